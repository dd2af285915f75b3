//! Ready-made instances: the two-bidder example where pooling helps, the correlated
//! instance on which pooling cannot beat half the optimum, the pooled-interval
//! closed form, and seeded random generators.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::mech::{AuctionInstance, Mechanism, Outcome, PoolSchedule, Profile};

/// Bidder 1 always values the item at 1; bidder 2 values it at `1 + eps` with
/// probability `1 - eps` and at `1 / eps` otherwise.
pub fn build_example1(eps: f64) -> Result<AuctionInstance> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInstance(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    AuctionInstance::independent(vec![
        DiscreteDistribution::point_mass(1.0)?,
        DiscreteDistribution::new([(1.0 + eps, 1.0 - eps), (1.0 / eps, eps)])?,
    ])
}

/// Two i.i.d. bidders uniform on `{1, 2}`.
pub fn two_point_iid() -> AuctionInstance {
    let d = DiscreteDistribution::new([(1.0, 0.5), (2.0, 0.5)]).expect("valid literal");
    AuctionInstance::independent(vec![d.clone(), d]).expect("two bidders")
}

/// Equal-revenue law on `{1, ..., k}`: `Pr[v >= j] = 1/j`, so every price earns 1.
pub fn discrete_equal_revenue(k: u64) -> Result<DiscreteDistribution> {
    if k == 0 {
        return Err(Error::InvalidDistribution(
            "empty equal-revenue support".into(),
        ));
    }
    DiscreteDistribution::new(
        equal_revenue_masses(k)
            .into_iter()
            .enumerate()
            .map(|(j, m)| ((j + 1) as f64, m)),
    )
}

fn equal_revenue_masses(k: u64) -> Vec<f64> {
    (1..=k)
        .map(|j| {
            let j = j as f64;
            if j < k as f64 {
                1.0 / j - 1.0 / (j + 1.0)
            } else {
                1.0 / j
            }
        })
        .collect()
}

fn reciprocal_integer(x: f64, what: &str) -> Result<u64> {
    let k = (1.0 / x).round();
    if !(k >= 1.0) || ((1.0 / x) - k).abs() > 1e-9 * k {
        return Err(Error::InfeasibleGrid(format!(
            "1/{what} = {} is not an integer",
            1.0 / x
        )));
    }
    Ok(k as u64)
}

/// Exact integer encoding of one profile: `v1 = n1 / M`, `v2 = code2 / M^4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProfileCode {
    pub k: u64,
    pub xi: u64,
    pub n1: u128,
    pub code2: u128,
}

/// Bidder 1's value `v1` is equal-revenue on `{1, ..., 1/eps1}`; bidder 2's value is
/// `v2 = v1 (xi + eps^3)` with `xi` equal-revenue on `{1, ..., 1/eps2}`. The `eps^3`
/// term makes `v1` readable off `v2`, so the seller learns `v1` from the top bid.
#[derive(Debug, Clone)]
pub struct CorrelatedConstruction {
    pub eps1: f64,
    pub eps2: f64,
    pub eps: f64,
    pub k1: u64,
    pub k2: u64,
    /// `1 / eps`.
    pub m: u64,
    pub instance: AuctionInstance,
    pub codes: Vec<ProfileCode>,
    v1_of_v2: HashMap<u64, f64>,
}

impl CorrelatedConstruction {
    /// `v1 * M` recovered from the exact code of `v2`: `code2 mod M^2`.
    pub fn decode(&self, code2: u128) -> u128 {
        let m = self.m as u128;
        code2 % (m * m)
    }

    /// `v1` from the stored floating-point `v2`, if `v2` is in the support.
    pub fn v1_from_v2(&self, v2: f64) -> Option<f64> {
        self.v1_of_v2.get(&v2.to_bits()).copied()
    }

    /// Number of profiles whose `v1` does not round-trip through the decoder.
    pub fn decoder_failures(&self) -> usize {
        let profiles = self.instance.profiles();
        self.codes
            .iter()
            .zip(&profiles)
            .filter(|(c, p)| {
                let n1 = self.decode(c.code2);
                n1 != c.n1
                    || n1 as f64 / self.m as f64 != p.values[0]
                    || self.v1_from_v2(p.values[1]) != Some(p.values[0])
            })
            .count()
    }

    /// The v1 support `{1, ..., k1}`, the natural jump endpoints for this instance.
    pub fn v1_support(&self) -> Vec<f64> {
        (1..=self.k1).map(|k| k as f64).collect()
    }

    /// The benchmark mechanism: offer `v1 / eps2` to bidder 2, then `v1` to bidder 1.
    pub fn opt_mechanism(&self) -> CorrelatedOpt<'_> {
        CorrelatedOpt { c: self }
    }
}

pub fn build_correlated(eps1: f64, eps2: f64, eps: Option<f64>) -> Result<CorrelatedConstruction> {
    let eps = eps.unwrap_or(eps1 / 10.0);
    // The lower bound is about eps1 << eps2, but the instance is well defined whenever
    // the two grids differ, which lets a ladder start above eps2.
    if !(0.0 < eps && eps < eps1 && eps1 < 1.0 && eps < eps2 && eps2 < 1.0) || eps1 == eps2 {
        return Err(Error::InvalidInstance(format!(
            "need 0 < eps < eps1, eps2 < 1 with eps1 != eps2, got eps={eps}, eps1={eps1}, eps2={eps2}"
        )));
    }
    let k1 = reciprocal_integer(eps1, "eps1")?;
    let k2 = reciprocal_integer(eps2, "eps2")?;
    let m = reciprocal_integer(eps, "eps")?;
    if m <= k1 {
        return Err(Error::InfeasibleGrid(format!(
            "1/eps = {m} must exceed 1/eps1 = {k1}"
        )));
    }
    let mw = m as u128;
    let m4 = (mw * mw * mw * mw) as f64;
    let w1 = equal_revenue_masses(k1);
    let w2 = equal_revenue_masses(k2);

    let mut table = Vec::with_capacity((k1 * k2) as usize);
    let mut codes = Vec::with_capacity(table.capacity());
    let mut v1_of_v2 = HashMap::with_capacity(table.capacity());
    for k in 1..=k1 {
        for xi in 1..=k2 {
            let n1 = k as u128 * mw;
            let n2 = xi as u128 * mw;
            let code2 = n1 * (n2 * mw * mw + 1);
            let v1 = k as f64;
            let v2 = code2 as f64 / m4;
            v1_of_v2.insert(v2.to_bits(), v1);
            codes.push(ProfileCode { k, xi, n1, code2 });
            table.push(Profile {
                values: vec![v1, v2],
                mass: w1[(k - 1) as usize] * w2[(xi - 1) as usize],
            });
        }
    }
    let instance = AuctionInstance::joint(2, table)?;
    Ok(CorrelatedConstruction {
        eps1,
        eps2,
        eps,
        k1,
        k2,
        m,
        instance,
        codes,
        v1_of_v2,
    })
}

/// See [`CorrelatedConstruction::opt_mechanism`].
#[derive(Debug, Clone, Copy)]
pub struct CorrelatedOpt<'a> {
    c: &'a CorrelatedConstruction,
}

impl Mechanism for CorrelatedOpt<'_> {
    fn name(&self) -> String {
        "correlated benchmark".into()
    }

    fn outcome(&self, bids: &[f64]) -> Outcome {
        let top_price = bids[0] * self.c.k2 as f64;
        if bids[1] >= top_price {
            return Outcome::sale(2, 1, top_price);
        }
        match self.c.v1_from_v2(bids[1]) {
            Some(v1) if bids[0] >= v1 => Outcome::sale(2, 0, v1),
            _ => Outcome::empty(2),
        }
    }
}

/// Exact expected revenue of the benchmark mechanism on the discrete instance.
pub fn correlated_opt_benchmark(c: &CorrelatedConstruction) -> f64 {
    crate::mech::expected_revenue(&c.instance, &c.opt_mechanism())
}

/// The continuum approximation `(2 - eps2) ln(1 / eps1)`.
pub fn correlated_opt_continuum(eps1: f64, eps2: f64) -> f64 {
    (2.0 - eps2) * (1.0 / eps1).ln()
}

/// Revenue of pooling `[s, t]` when `v1` has density `1/u^2` on `[s, t]` and bidder 2 is
/// `v1` times an independent equal-revenue factor: `1 - s/t + (t - s)/(2t) ln(t/s)`.
pub fn lap_interval_revenue_closed_form(s: f64, t: f64) -> Result<f64> {
    if !(s > 0.0 && s < t) {
        return Err(Error::InvalidInstance(format!(
            "need 0 < s < t, got s={s}, t={t}"
        )));
    }
    Ok(1.0 - s / t + (t - s) / (2.0 * t) * (t / s).ln())
}

/// The lookahead revenue on the same slice, `ln(t/s)`, which bounds the closed form.
pub fn lap_interval_bound(s: f64, t: f64) -> f64 {
    -(s / t).ln()
}

/// A discretized pooled interval on a geometric grid of `n` steps from `s` to `t`.
#[derive(Debug, Clone)]
pub struct IntervalSimulation {
    pub instance: AuctionInstance,
    pub schedule: PoolSchedule,
    /// Multiply the instance revenue by this to compare with the closed form.
    pub scale: f64,
    /// The grid's top point, used as the jump's upper end.
    pub t: f64,
}

/// Builds the joint instance behind the closed form: `v1 = g_a` for `a < n` with
/// equal-revenue masses restricted to `[s, t)`, and `v2 = g_{a+b}` with `b` equal-revenue
/// on `{rho^0, ..., rho^n}`, where `g_k = s rho^k` and `g_n = t`.
pub fn interval_simulation(s: f64, t: f64, n: usize) -> Result<IntervalSimulation> {
    lap_interval_revenue_closed_form(s, t)?;
    if n == 0 {
        return Err(Error::InvalidInstance("need at least one grid step".into()));
    }
    let step = (t / s).ln() / n as f64;
    let grid = |k: usize| s * (k as f64 * step).exp();
    let top = grid(n);
    let w1: Vec<f64> = (0..n).map(|a| 1.0 / grid(a) - 1.0 / grid(a + 1)).collect();
    let total1: f64 = w1.iter().sum();
    let rho_inv = (-step).exp();
    let w2: Vec<f64> = (0..=n)
        .map(|b| {
            let here = rho_inv.powi(b as i32);
            if b < n {
                here - rho_inv.powi(b as i32 + 1)
            } else {
                here
            }
        })
        .collect();
    let total2: f64 = w2.iter().sum();
    let mut table = Vec::with_capacity(n * (n + 1));
    for (a, &ma) in w1.iter().enumerate() {
        for (b, &mb) in w2.iter().enumerate() {
            table.push(Profile {
                values: vec![grid(a), grid(a + b)],
                mass: (ma / total1) * (mb / total2),
            });
        }
    }
    let total: f64 = crate::util::compensated_sum(table.iter().map(|p| p.mass));
    for p in &mut table {
        p.mass /= total;
    }
    Ok(IntervalSimulation {
        instance: AuctionInstance::joint(2, table)?,
        schedule: PoolSchedule::single(s, top)?,
        scale: 1.0 / s - 1.0 / top,
        t: top,
    })
}

/// Parameters of the random corpus generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorpusSpec {
    pub max_bidders: usize,
    pub max_support: usize,
    pub value_range: (f64, f64),
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            max_bidders: 3,
            max_support: 5,
            value_range: (1.0, 10.0),
        }
    }
}

/// A random distribution: distinct values drawn uniformly from `range` at cent
/// resolution, with flat-Dirichlet masses.
pub fn random_distribution(
    rng: &mut impl Rng,
    support: usize,
    range: (f64, f64),
) -> Result<DiscreteDistribution> {
    let (lo, hi) = range;
    let cells = ((hi - lo) * 100.0).round() as i64;
    if support == 0 || cells + 1 < support as i64 {
        return Err(Error::InvalidInstance(format!(
            "cannot draw {support} distinct cent values from [{lo}, {hi}]"
        )));
    }
    let mut cents: Vec<i64> = Vec::with_capacity(support);
    while cents.len() < support {
        let c = rng.gen_range(0..=cells);
        if !cents.contains(&c) {
            cents.push(c);
        }
    }
    cents.sort_unstable();
    let weights: Vec<f64> = (0..support)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    DiscreteDistribution::from_weights(
        cents
            .into_iter()
            .zip(weights)
            .map(|(c, w)| (((lo * 100.0).round() + c as f64) / 100.0, w))
            .collect(),
    )
}

/// A deterministic independent instance from `seed`.
pub fn gen_random_instance(
    seed: u64,
    n: usize,
    support: usize,
    range: (f64, f64),
) -> Result<AuctionInstance> {
    if n == 0 || n > 4 || support > 8 {
        return Err(Error::InvalidInstance(format!(
            "generator supports 1..=4 bidders and at most 8 support points, got n={n}, support={support}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists = (0..n)
        .map(|_| random_distribution(&mut rng, support, range))
        .collect::<Result<Vec<_>>>()?;
    AuctionInstance::independent(dists)
}

/// One corpus member with the seed that produced it.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub seed: u64,
    pub instance: AuctionInstance,
}

/// `size` instances with seeds `base, base + 1, ...`; each seed also picks the bidder
/// count (2 up to `max_bidders`) and a per-bidder support size (1 up to `max_support`).
pub fn gen_corpus(base: u64, size: usize, spec: CorpusSpec) -> Vec<CorpusEntry> {
    (0..size as u64)
        .map(|i| {
            let seed = base.wrapping_add(i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..=spec.max_bidders.max(2));
            let dists = (0..n)
                .map(|_| {
                    let k = rng.gen_range(1..=spec.max_support);
                    random_distribution(&mut rng, k, spec.value_range)
                        .expect("range holds enough cents")
                })
                .collect();
            CorpusEntry {
                seed,
                instance: AuctionInstance::independent(dists).expect("non-empty"),
            }
        })
        .collect()
}

/// A random distribution whose revenue curve is not concave, found by rejection.
pub fn gen_irregular(seed: u64, support: usize, range: (f64, f64)) -> Result<DiscreteDistribution> {
    if support < 3 {
        return Err(Error::InvalidInstance(
            "irregular laws need at least 3 support points".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let d = random_distribution(&mut rng, support, range)?;
        if !d.revenue_curve().ironed_intervals().is_empty() {
            return Ok(d);
        }
    }
}
