//! Finite value distributions and the single-bidder revenue machinery built on them:
//! survival probabilities, posted prices, revenue curves in quantile space, their
//! concave envelopes (ironing) and discrete virtual values.
//!
//! Survival is always closed: `quantile(p) = Pr[v >= p]`, so a posted price `p` sells
//! with exactly that probability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::compensated_sum;

/// Tolerance on the total mass of a distribution.
pub const MASS_TOL: f64 = 1e-12;

/// Two revenues within this distance count as tied; ties go to the lower price.
pub const PRICE_TIE_TOL: f64 = 1e-9;

/// A value distribution with finite support and strictly positive point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    support: Vec<f64>,
    mass: Vec<f64>,
    // survival[k] = Pr[v >= support[k]], computed as suffix sums.
    survival: Vec<f64>,
    // best_from[k] = revenue-maximizing price index among support[k..], ties to the lowest.
    best_from: Vec<usize>,
}

impl DiscreteDistribution {
    /// Builds a distribution from `(value, mass)` pairs in any order.
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        for &(v, m) in &pairs {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "value {v} must be finite and non-negative"
                )));
            }
            if !m.is_finite() || m <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "mass {m} at value {v} must be strictly positive"
                )));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDistribution(format!(
                "duplicate support value {}",
                w[0].0
            )));
        }
        let total = compensated_sum(pairs.iter().map(|p| p.1));
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        let (support, mass): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        Ok(Self::from_sorted(support, mass))
    }

    /// A point mass at `value`.
    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new([(value, 1.0)])
    }

    /// Renormalizes positive weights into a distribution; used for conditioning.
    pub(crate) fn from_weights(pairs: Vec<(f64, f64)>) -> Result<Self> {
        let total = compensated_sum(pairs.iter().map(|p| p.1));
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("zero total weight".into()));
        }
        Self::new(pairs.into_iter().map(|(v, w)| (v, w / total)))
    }

    fn from_sorted(support: Vec<f64>, mass: Vec<f64>) -> Self {
        let n = support.len();
        let mut survival = vec![0.0; n];
        let mut acc = 0.0;
        for k in (0..n).rev() {
            acc += mass[k];
            survival[k] = acc;
        }
        // masses sum to one within MASS_TOL; pin the bottom of the curve at q = 1
        survival[0] = 1.0;
        let mut best_from = vec![0; n];
        let mut best = n - 1;
        for k in (0..n).rev() {
            let rev = support[k] * survival[k];
            let best_rev = support[best] * survival[best];
            if rev >= best_rev - PRICE_TIE_TOL {
                best = k;
            }
            best_from[k] = best;
        }
        Self {
            support,
            mass,
            survival,
            best_from,
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn min_value(&self) -> f64 {
        self.support[0]
    }

    pub fn max_value(&self) -> f64 {
        self.support[self.support.len() - 1]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.mass.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.pairs().map(|(v, m)| v * m).sum()
    }

    /// Index of the first support point `>= p`.
    fn first_at_least(&self, p: f64) -> usize {
        self.support.partition_point(|&v| v < p)
    }

    /// Index of the largest support point `<= b`, if any.
    pub fn index_at_most(&self, b: f64) -> Option<usize> {
        self.support.partition_point(|&v| v <= b).checked_sub(1)
    }

    /// `Pr[v >= p]`.
    pub fn quantile(&self, p: f64) -> f64 {
        let k = self.first_at_least(p);
        self.survival.get(k).copied().unwrap_or(0.0)
    }

    /// The revenue-maximizing posted price `r >= floor` against `v | v >= floor`,
    /// with its conditional expected revenue. Ties go to the lowest price.
    pub fn posted_price(&self, floor: f64) -> Result<(f64, f64)> {
        let k = self.first_at_least(floor);
        if k == self.support.len() {
            return Err(Error::ZeroProbabilityCondition(floor));
        }
        let j = self.best_from[k];
        let price = self.support[j];
        Ok((price, price * self.survival[j] / self.survival[k]))
    }

    /// The distribution of `v` conditioned on `v >= c`.
    pub fn conditional_at_least(&self, c: f64) -> Result<Self> {
        let k = self.first_at_least(c);
        if k == self.support.len() {
            return Err(Error::ZeroProbabilityCondition(c));
        }
        if k == 0 {
            return Ok(self.clone());
        }
        Self::from_weights(self.pairs().skip(k).collect())
    }

    /// The distribution of `v` conditioned on `v > c`.
    pub fn conditional_above(&self, c: f64) -> Result<Self> {
        let k = self.support.partition_point(|&v| v <= c);
        if k == self.support.len() {
            return Err(Error::ZeroProbabilityCondition(c));
        }
        Self::from_weights(self.pairs().skip(k).collect())
    }

    pub fn revenue_curve(&self) -> RevenueCurve {
        RevenueCurve::new(self)
    }

    pub fn virtual_values(&self) -> VirtualValueTable {
        VirtualValueTable::new(self)
    }
}

/// Literal format: a list of `[value, mass]` pairs.
impl Serialize for DiscreteDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(f64, f64)> = self.pairs().collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<(f64, f64)>::deserialize(d)?;
        DiscreteDistribution::new(pairs).map_err(serde::de::Error::custom)
    }
}

/// One point `(q, R(q))` of the revenue curve. `price` is `None` at `q = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub quantile: f64,
    pub revenue: f64,
    pub price: Option<f64>,
}

/// A linear piece of the concave envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub slope: f64,
}

impl Segment {
    fn at(&self, q: f64) -> f64 {
        self.start.1 + self.slope * (q - self.start.0)
    }
}

/// A two-point randomization over quantiles: with probability `alpha` sell at the price
/// of `q1`, otherwise at the price of `q2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IronLottery {
    pub alpha: f64,
    pub q1: f64,
    pub q2: f64,
}

/// Revenue curve of a discrete distribution and its concave envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct RevenueCurve {
    points: Vec<CurvePoint>,
    // Indices of the envelope vertices in `points`.
    hull: Vec<usize>,
}

impl RevenueCurve {
    pub fn new(d: &DiscreteDistribution) -> Self {
        let mut points = Vec::with_capacity(d.len() + 1);
        points.push(CurvePoint {
            quantile: 0.0,
            revenue: 0.0,
            price: None,
        });
        for k in (0..d.len()).rev() {
            let q = d.survival[k];
            points.push(CurvePoint {
                quantile: q,
                revenue: d.support[k] * q,
                price: Some(d.support[k]),
            });
        }
        let hull = upper_hull(&points);
        Self { points, hull }
    }

    /// A curve for a bidder of deterministic value `v`: `R(q) = v q`.
    pub fn linear(v: f64) -> Self {
        Self::new(&DiscreteDistribution::from_sorted(vec![v], vec![1.0]))
    }

    /// Raw curve points in increasing quantile order, from `(0, 0)` to `(1, v_min)`.
    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn hull_points(&self) -> impl Iterator<Item = &CurvePoint> + '_ {
        self.hull.iter().map(|&i| &self.points[i])
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.hull
            .windows(2)
            .map(|w| {
                let (a, b) = (&self.points[w[0]], &self.points[w[1]]);
                Segment {
                    start: (a.quantile, a.revenue),
                    end: (b.quantile, b.revenue),
                    slope: (b.revenue - a.revenue) / (b.quantile - a.quantile),
                }
            })
            .collect()
    }

    /// Index `h` of the envelope segment `hull[h]..hull[h+1]` containing `q`.
    fn segment_index(&self, q: f64) -> usize {
        let h = self
            .hull
            .partition_point(|&i| self.points[i].quantile <= q)
            .saturating_sub(1);
        h.min(self.hull.len() - 2)
    }

    fn segment(&self, h: usize) -> Segment {
        let (a, b) = (&self.points[self.hull[h]], &self.points[self.hull[h + 1]]);
        Segment {
            start: (a.quantile, a.revenue),
            end: (b.quantile, b.revenue),
            slope: (b.revenue - a.revenue) / (b.quantile - a.quantile),
        }
    }

    /// The ironed revenue `R̄(q)`.
    pub fn envelope(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let h = self.segment_index(q);
        let seg = self.segment(h);
        if q == seg.end.0 {
            seg.end.1
        } else {
            seg.at(q)
        }
    }

    /// Envelope slope just to the left of `q` (the slope at `q=0` is the first segment's).
    pub fn left_slope(&self, q: f64) -> f64 {
        let mut h = self.segment_index(q);
        if h > 0 && self.points[self.hull[h]].quantile >= q {
            h -= 1;
        }
        self.segment(h).slope
    }

    /// Quantile intervals `[a_j, b_j]` on which the envelope lies strictly above some raw point.
    pub fn ironed_intervals(&self) -> Vec<(f64, f64)> {
        self.hull
            .windows(2)
            .filter(|w| {
                let seg = self.segment_between(w[0], w[1]);
                self.points[w[0] + 1..w[1]]
                    .iter()
                    .any(|p| seg.at(p.quantile) - p.revenue > MASS_TOL)
            })
            .map(|w| (self.points[w[0]].quantile, self.points[w[1]].quantile))
            .collect()
    }

    fn segment_between(&self, i: usize, j: usize) -> Segment {
        let (a, b) = (&self.points[i], &self.points[j]);
        Segment {
            start: (a.quantile, a.revenue),
            end: (b.quantile, b.revenue),
            slope: (b.revenue - a.revenue) / (b.quantile - a.quantile),
        }
    }

    pub fn is_ironed_at(&self, q: f64) -> bool {
        self.ironed_intervals()
            .iter()
            .any(|&(a, b)| a + MASS_TOL < q && q < b - MASS_TOL)
    }

    /// The raw point at quantile `q`, if there is one within `1e-12`.
    pub fn point_at(&self, q: f64) -> Option<&CurvePoint> {
        let i = self.points.partition_point(|p| p.quantile < q - MASS_TOL);
        self.points
            .get(i)
            .filter(|p| (p.quantile - q).abs() <= MASS_TOL)
    }

    /// The price selling with probability exactly `q`, when `q` is a raw point.
    pub fn price_at(&self, q: f64) -> Option<f64> {
        self.point_at(q).and_then(|p| p.price)
    }

    /// The two-price randomization achieving `R̄(q)`.
    pub fn iron_lottery(&self, q: f64) -> IronLottery {
        let q = q.clamp(0.0, 1.0);
        if let Some(p) = self.point_at(q) {
            if self.envelope(p.quantile) - p.revenue <= MASS_TOL {
                return IronLottery {
                    alpha: 1.0,
                    q1: p.quantile,
                    q2: p.quantile,
                };
            }
        }
        let seg = self.segment(self.segment_index(q));
        let (a, b) = (seg.start.0, seg.end.0);
        IronLottery {
            alpha: (b - q) / (b - a),
            q1: a,
            q2: b,
        }
    }

    /// Raw revenue at a point quantile (used with `iron_lottery` outputs).
    pub fn raw_revenue(&self, q: f64) -> Option<f64> {
        self.point_at(q).map(|p| p.revenue)
    }
}

fn upper_hull(points: &[CurvePoint]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        while hull.len() >= 2 {
            let o = &points[hull[hull.len() - 2]];
            let a = &points[hull[hull.len() - 1]];
            // Drop `a` when it is on or below the chord o -> p.
            let cross = (a.quantile - o.quantile) * (p.revenue - o.revenue)
                - (a.revenue - o.revenue) * (p.quantile - o.quantile);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Per-value raw and ironed virtual values, in ascending value order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirtualValueTable {
    pub values: Vec<f64>,
    pub phi: Vec<f64>,
    pub ironed: Vec<f64>,
    pub regular: bool,
}

impl VirtualValueTable {
    pub fn new(d: &DiscreteDistribution) -> Self {
        let curve = d.revenue_curve();
        let n = d.len();
        let mut phi = vec![0.0; n];
        let mut ironed = vec![0.0; n];
        for k in 0..n {
            let upper_q = if k + 1 < n { d.survival[k + 1] } else { 0.0 };
            let upper_r = if k + 1 < n {
                d.support[k + 1] * d.survival[k + 1]
            } else {
                0.0
            };
            phi[k] = (d.support[k] * d.survival[k] - upper_r) / (d.survival[k] - upper_q);
            ironed[k] = curve.left_slope(d.survival[k]);
        }
        let regular = phi.windows(2).all(|w| w[0] <= w[1] + MASS_TOL);
        Self {
            values: d.support.clone(),
            phi,
            ironed,
            regular,
        }
    }

    pub fn phi_at(&self, v: f64) -> Option<f64> {
        self.index_of(v).map(|k| self.phi[k])
    }

    pub fn ironed_at(&self, v: f64) -> Option<f64> {
        self.index_of(v).map(|k| self.ironed[k])
    }

    fn index_of(&self, v: f64) -> Option<usize> {
        self.values.iter().position(|&x| x == v)
    }
}
