//! Incentive checks, revenue benchmarks and schedule search.

mod dsic;
mod grid;
mod lp;
mod search;

use serde::Serialize;

pub use dsic::{check_dsic_ir, deviation_bids, DeviationReport, Witness};
pub use grid::{bound_ratio, grid_check_47, GridCheckReport, FOUR_SEVENTHS};
pub use lp::{optimal_dsic_lp, LP_PROFILE_LIMIT};
pub use search::{brute_force_search, search_lap, ScheduleFamily, SearchResult};

use crate::error::{Error, Result};
use crate::exante::TwoStageLap;
use crate::mech::{expected_revenue, AuctionInstance, Mechanism, Myerson};

/// What a mechanism's revenue is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Benchmark {
    /// The optimal DSIC mechanism, via linear programming.
    Lp,
    /// Myerson's auction (independent priors only).
    Myerson,
    Value(f64),
}

impl Benchmark {
    pub fn revenue(&self, inst: &AuctionInstance) -> Result<f64> {
        match *self {
            Self::Lp => optimal_dsic_lp(inst),
            Self::Myerson => Ok(expected_revenue(inst, &Myerson::new(inst)?)),
            Self::Value(v) => Ok(v),
        }
    }
}

/// `expected_revenue(mech) / benchmark`.
pub fn ratio_report(
    inst: &AuctionInstance,
    mech: &impl Mechanism,
    benchmark: Benchmark,
) -> Result<f64> {
    let b = benchmark.revenue(inst)?;
    if !(b > 0.0) {
        return Err(Error::ZeroBenchmark);
    }
    Ok(expected_revenue(inst, mech) / b)
}

/// The best pooling auction found for an independent instance: the better of the
/// optimal non-adaptive schedule and the two-stage construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestLap {
    pub non_adaptive: SearchResult,
    pub two_stage: f64,
    pub revenue: f64,
}

pub fn best_lap(inst: &AuctionInstance, max_jumps: usize) -> Result<BestLap> {
    let non_adaptive = search_lap(inst, &ScheduleFamily::exhaustive(inst, max_jumps));
    let two_stage = expected_revenue(inst, &TwoStageLap::new(inst)?);
    let revenue = non_adaptive.revenue.max(two_stage);
    Ok(BestLap {
        non_adaptive,
        two_stage,
        revenue,
    })
}
