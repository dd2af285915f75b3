//! The ex-ante relaxation and the two-bidder pooling construction built on it.
//!
//! [`solve_exante`] maximizes `sum_i R̄_i(x_i)` subject to `sum_i x_i <= budget`.
//! [`lemma1_mechanism`] uses the solution for two bidders plus a deterministic bidder of
//! value `v` to pick the best of three pooling schedules, and [`TwoStageLap`] applies that
//! choice to any number of bidders, with `v` set to the third-highest bid.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::Serialize;

use crate::dist::{DiscreteDistribution, RevenueCurve};
use crate::error::{Error, Result};
use crate::mech::{
    expected_revenue, run_la, run_lap, AuctionInstance, Lap, Mechanism, Outcome, PoolSchedule,
};

const TOL: f64 = 1e-9;

/// How a bidder's ex-ante sale probability is implemented with posted prices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriceDecomposition {
    /// The bidder is never served.
    None,
    Single {
        price: f64,
        quantile: f64,
    },
    /// Post `p1` with probability `alpha`, else `p2`.
    Mixture {
        alpha: f64,
        p1: f64,
        q1: f64,
        p2: f64,
        q2: f64,
    },
}

impl PriceDecomposition {
    pub fn prices(&self) -> Vec<f64> {
        match *self {
            Self::None => vec![],
            Self::Single { price, .. } => vec![price],
            Self::Mixture { p1, p2, .. } => vec![p1, p2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BidderPlan {
    pub x: f64,
    pub revenue: f64,
    pub decomposition: PriceDecomposition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExAnteSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub per_bidder: Vec<BidderPlan>,
}

fn decompose(curve: &RevenueCurve, x: f64) -> PriceDecomposition {
    if x <= 0.0 {
        return PriceDecomposition::None;
    }
    let l = curve.iron_lottery(x);
    if l.q1 == l.q2 {
        return match curve.price_at(l.q1) {
            Some(price) => PriceDecomposition::Single {
                price,
                quantile: l.q1,
            },
            None => PriceDecomposition::None,
        };
    }
    match (curve.price_at(l.q1), curve.price_at(l.q2)) {
        (Some(p1), Some(p2)) => PriceDecomposition::Mixture {
            alpha: l.alpha,
            p1,
            q1: l.q1,
            p2,
            q2: l.q2,
        },
        // q1 = 0 carries no price: selling at p2 with probability 1 - alpha.
        (None, Some(p2)) => PriceDecomposition::Mixture {
            alpha: l.alpha,
            p1: f64::INFINITY,
            q1: l.q1,
            p2,
            q2: l.q2,
        },
        _ => PriceDecomposition::None,
    }
}

/// Greedy water-filling over envelope segments, steepest first. Equal slopes go to the
/// curve listed first, so a dummy curve placed last receives leftover budget only.
pub fn solve_exante(curves: &[RevenueCurve], budget: f64) -> ExAnteSolution {
    let mut pieces: Vec<(usize, usize, f64)> = Vec::new();
    let segs: Vec<_> = curves.iter().map(RevenueCurve::segments).collect();
    for (c, ss) in segs.iter().enumerate() {
        for (h, s) in ss.iter().enumerate() {
            if s.slope >= 0.0 {
                pieces.push((c, h, s.slope));
            }
        }
    }
    // Stable: within a curve slopes already decrease, across curves the index breaks ties.
    pieces.sort_by(|a, b| b.2.total_cmp(&a.2));

    let mut x = vec![0.0; curves.len()];
    let mut left = budget;
    for &(c, h, _) in &pieces {
        if left <= 0.0 {
            break;
        }
        let s = &segs[c][h];
        let len = s.end.0 - s.start.0;
        if len <= left {
            x[c] = s.end.0;
            left -= len;
        } else {
            x[c] = s.start.0 + left;
            left = 0.0;
        }
    }

    let per_bidder: Vec<BidderPlan> = curves
        .iter()
        .zip(&x)
        .map(|(curve, &xi)| BidderPlan {
            x: xi,
            revenue: curve.envelope(xi),
            decomposition: decompose(curve, xi),
        })
        .collect();
    let value = per_bidder.iter().map(|b| b.revenue).sum();
    ExAnteSolution {
        x,
        value,
        per_bidder,
    }
}

/// Lower bounds on the three candidate revenues, for values normalized so that `v = 1`.
pub fn claim1_bounds(r1: f64, r2: f64, x1: f64, x2: f64) -> Result<(f64, f64, f64)> {
    if x1 < -TOL || x2 < -TOL || x1 + x2 > 1.0 + TOL || r1 < x1 - TOL || r2 < x2 - TOL {
        return Err(Error::ConstraintViolation(format!(
            "need x1, x2 >= 0, x1 + x2 <= 1, r1 >= x1, r2 >= x2; got r1={r1}, r2={r2}, x1={x1}, x2={x2}"
        )));
    }
    let b1 = r1 + r2 - (r2 * x1 + r1 * x2) / 2.0;
    let b2 = r1.max(r2);
    let b3 = (1.0 + (r1 - x1) / 2.0).max(1.0 + (r2 - x2) / 2.0);
    Ok((b1, b2, b3))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaOneReport {
    pub opt_exante: f64,
    pub rev1: f64,
    pub rev2: f64,
    pub rev3: f64,
    /// 1, 2 or 3: the first candidate attaining the maximum.
    pub chosen: usize,
    pub schedule: PoolSchedule,
    pub ratio: f64,
    /// Analytic lower bounds on the three candidates, in currency units.
    pub lower_bounds: [f64; 3],
    pub exante: ExAnteSolution,
}

impl LemmaOneReport {
    pub fn revenue(&self) -> f64 {
        self.rev1.max(self.rev2).max(self.rev3)
    }
}

/// The chosen schedule on the two-bidder instance, plus how it was found.
#[derive(Debug, Clone)]
pub struct LemmaOne {
    pub instance: AuctionInstance,
    pub report: LemmaOneReport,
}

impl LemmaOne {
    pub fn mechanism(&self) -> Lap<'_> {
        Lap::new(&self.instance, self.report.schedule.clone())
    }
}

fn best_of(inst: &AuctionInstance, candidates: Vec<PoolSchedule>) -> (PoolSchedule, f64) {
    let mut best = (PoolSchedule::empty(), f64::NEG_INFINITY);
    for s in candidates {
        let r = expected_revenue(inst, &Lap::new(inst, s.clone()));
        if r > best.1 {
            best = (s, r);
        }
    }
    best
}

/// Two bidders `A`, `B` with values at least `v`, benchmarked against the ex-ante
/// relaxation that also includes a bidder of deterministic value `v`.
pub fn lemma1_mechanism(
    d_a: &DiscreteDistribution,
    d_b: &DiscreteDistribution,
    v: f64,
) -> Result<LemmaOne> {
    if !(v > 0.0) {
        return Err(Error::ConstraintViolation(format!(
            "v must be positive, got {v}"
        )));
    }
    if d_a.min_value() < v || d_b.min_value() < v {
        return Err(Error::ValuesBelowFloor(v));
    }
    let curves = [
        d_a.revenue_curve(),
        d_b.revenue_curve(),
        RevenueCurve::linear(v),
    ];
    let exante = solve_exante(&curves, 1.0);
    let inst = AuctionInstance::independent(vec![d_a.clone(), d_b.clone()])?;

    let cand_a: Vec<f64> = exante.per_bidder[0]
        .decomposition
        .prices()
        .into_iter()
        .filter(|p| p.is_finite())
        .collect();
    let cand_b: Vec<f64> = exante.per_bidder[1]
        .decomposition
        .prices()
        .into_iter()
        .filter(|p| p.is_finite())
        .collect();

    // (1) ascend, then pool between the two ex-ante prices
    let mut m1 = Vec::new();
    for &pa in &cand_a {
        for &pb in &cand_b {
            let (lo, hi) = (pa.min(pb), pa.max(pb));
            m1.push(if lo < hi {
                PoolSchedule::single(lo, hi)?
            } else {
                PoolSchedule::empty()
            });
        }
    }
    if m1.is_empty() {
        m1.push(PoolSchedule::empty());
    }
    let (s1, rev1) = best_of(&inst, m1);

    // (2) plain lookahead
    let (s2, rev2) = best_of(&inst, vec![PoolSchedule::empty()]);

    // (3) pool from v up to one ex-ante price, or past every value
    let mut m3 = Vec::new();
    for &p in cand_a.iter().chain(&cand_b) {
        if p > v {
            m3.push(PoolSchedule::single(v, p)?);
        }
    }
    m3.push(PoolSchedule::single(
        v,
        d_a.max_value().max(d_b.max_value()) + 1.0,
    )?);
    let (s3, rev3) = best_of(&inst, m3);

    let best = rev1.max(rev2).max(rev3);
    let (chosen, schedule) = if rev1 == best {
        (1, s1)
    } else if rev2 == best {
        (2, s2)
    } else {
        (3, s3)
    };

    let (x1, x2) = (exante.x[0], exante.x[1]);
    let (r1, r2) = (
        exante.per_bidder[0].revenue / v,
        exante.per_bidder[1].revenue / v,
    );
    let (b1, b2, b3) = claim1_bounds(r1, r2, x1, x2)?;
    let opt = exante.value;
    let report = LemmaOneReport {
        opt_exante: opt,
        rev1,
        rev2,
        rev3,
        chosen,
        schedule,
        ratio: if opt > 0.0 { best / opt } else { f64::NAN },
        lower_bounds: [b1 * v, b2 * v, b3 * v],
        exante,
    };
    Ok(LemmaOne {
        instance: inst,
        report,
    })
}

/// What the two-stage mechanism runs once the third-highest bid has fixed `v`.
#[derive(Debug, Clone)]
struct Stage {
    pair: (usize, usize),
    sub: AuctionInstance,
    schedule: PoolSchedule,
}

// (pair, third bidder, bits of v)
type StageKey = (usize, usize, Option<usize>, u64);

/// Ascend until all but two bidders have dropped, then run the two-bidder pooling
/// construction on the survivors, with `v` equal to the last drop-out value.
///
/// Bidders are ranked by bid, ties to the lower index. A survivor ranked above the
/// third bidder on a tie must have bid at least `v` if their index is lower, and strictly
/// more otherwise; their restricted distribution reflects that.
#[derive(Debug)]
pub struct TwoStageLap<'a> {
    inst: &'a AuctionInstance,
    dists: &'a [DiscreteDistribution],
    cache: RefCell<HashMap<StageKey, Option<Stage>>>,
}

impl<'a> TwoStageLap<'a> {
    pub fn new(inst: &'a AuctionInstance) -> Result<Self> {
        let dists = inst.marginals()?;
        let me = Self {
            inst,
            dists,
            cache: RefCell::new(HashMap::new()),
        };
        let n = dists.len();
        if n == 2 {
            me.stage(0, 1, None, me.base_v());
        } else if n > 2 {
            for k in 0..n {
                for &v in dists[k].support() {
                    for i in 0..n {
                        for j in i + 1..n {
                            if i != k && j != k {
                                me.stage(i, j, Some(k), v);
                            }
                        }
                    }
                }
            }
        }
        Ok(me)
    }

    fn base_v(&self) -> f64 {
        self.dists[0].min_value().min(self.dists[1].min_value())
    }

    fn restrict(&self, i: usize, third: Option<usize>, v: f64) -> Result<DiscreteDistribution> {
        match third {
            Some(k) if i > k => self.dists[i].conditional_above(v),
            _ => self.dists[i].conditional_at_least(v),
        }
    }

    fn stage(&self, i: usize, j: usize, third: Option<usize>, v: f64) -> Option<Stage> {
        let key = (i, j, third, v.to_bits());
        if let Some(s) = self.cache.borrow().get(&key) {
            return s.clone();
        }
        let built = (|| {
            let da = self.restrict(i, third, v).ok()?;
            let db = self.restrict(j, third, v).ok()?;
            let schedule = if v > 0.0 {
                lemma1_mechanism(&da, &db, v).ok()?.report.schedule
            } else {
                PoolSchedule::empty()
            };
            Some(Stage {
                pair: (i, j),
                sub: AuctionInstance::independent(vec![da, db]).ok()?,
                schedule,
            })
        })();
        self.cache.borrow_mut().insert(key, built.clone());
        built
    }

    /// The schedule used when `pair` survives and the third-highest bid is `v`.
    pub fn schedule_for(&self, bids: &[f64]) -> Option<PoolSchedule> {
        self.locate(bids).map(|s| s.schedule)
    }

    fn locate(&self, bids: &[f64]) -> Option<Stage> {
        let n = bids.len();
        if n < 2 {
            return None;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| bids[b].total_cmp(&bids[a]).then(a.cmp(&b)));
        let (i, j) = (order[0].min(order[1]), order[0].max(order[1]));
        if n == 2 {
            self.stage(i, j, None, self.base_v())
        } else {
            let k = order[2];
            self.stage(i, j, Some(k), bids[k])
        }
    }
}

impl Mechanism for TwoStageLap<'_> {
    fn name(&self) -> String {
        "two-stage LAP".into()
    }

    fn outcome(&self, bids: &[f64]) -> Outcome {
        let Some(stage) = self.locate(bids) else {
            return run_la(self.inst, bids);
        };
        let (i, j) = stage.pair;
        let sub = run_lap(&stage.sub, &stage.schedule, &[bids[i], bids[j]]);
        let mut o = Outcome::empty(bids.len());
        o.alloc[i] = sub.alloc[0];
        o.pay[i] = sub.pay[0];
        o.alloc[j] = sub.alloc[1];
        o.pay[j] = sub.pay[1];
        o
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .cache
            .borrow()
            .values()
            .flatten()
            .flat_map(|s| s.schedule.endpoints())
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}
