//! Auction mechanisms over a finite prior, with exact expected revenue.
//!
//! A mechanism maps a bid profile to an [`Outcome`] whose entries are already
//! averaged over any internal lottery, so revenue is a finite weighted sum.

mod instance;
mod lap;
mod myerson;
mod simple;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::pairwise_sum;

pub use instance::{AuctionInstance, JointPrior, Prior, Profile};
pub use lap::{run_la, run_lap, Lap, Lookahead, MenuChoice};
pub use myerson::{run_myerson, Myerson};
pub use simple::{FirstPrice, PostedPrice};

/// Interim allocation probabilities and expected payments for one profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub alloc: Vec<f64>,
    pub pay: Vec<f64>,
}

impl Outcome {
    pub fn empty(n: usize) -> Self {
        Self {
            alloc: vec![0.0; n],
            pay: vec![0.0; n],
        }
    }

    pub fn sale(n: usize, winner: usize, price: f64) -> Self {
        let mut o = Self::empty(n);
        o.alloc[winner] = 1.0;
        o.pay[winner] = price;
        o
    }

    pub fn revenue(&self) -> f64 {
        self.pay.iter().sum()
    }

    /// Buyer `i`'s expected utility when their true value is `value`.
    pub fn utility(&self, i: usize, value: f64) -> f64 {
        self.alloc[i] * value - self.pay[i]
    }
}

/// A direct-revelation mechanism.
pub trait Mechanism {
    fn name(&self) -> String;

    fn outcome(&self, bids: &[f64]) -> Outcome;

    /// Bid levels where the outcome may change apart from the support points.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<M: Mechanism + ?Sized> Mechanism for &M {
    fn name(&self) -> String {
        (**self).name()
    }
    fn outcome(&self, bids: &[f64]) -> Outcome {
        (**self).outcome(bids)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

impl<M: Mechanism + ?Sized> Mechanism for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn outcome(&self, bids: &[f64]) -> Outcome {
        (**self).outcome(bids)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
}

/// Ordered jump intervals `[s, t]` of a lookahead auction with pooling.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PoolSchedule {
    jumps: Vec<(f64, f64)>,
}

impl PoolSchedule {
    pub fn new(jumps: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev_end = 0.0;
        for &(s, t) in &jumps {
            if !s.is_finite() || !t.is_finite() {
                return Err(Error::NonMonotoneSchedule(format!(
                    "non-finite jump [{s}, {t}]"
                )));
            }
            if s < prev_end {
                return Err(Error::NonMonotoneSchedule(format!(
                    "jump [{s}, {t}] starts below the current cutoff {prev_end}"
                )));
            }
            if t <= s {
                return Err(Error::NonMonotoneSchedule(format!("empty jump [{s}, {t}]")));
            }
            prev_end = t;
        }
        Ok(Self { jumps })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(s: f64, t: f64) -> Result<Self> {
        Self::new(vec![(s, t)])
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn endpoints(&self) -> Vec<f64> {
        self.jumps.iter().flat_map(|&(s, t)| [s, t]).collect()
    }
}

impl TryFrom<Vec<(f64, f64)>> for PoolSchedule {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PoolSchedule> for Vec<(f64, f64)> {
    fn from(s: PoolSchedule) -> Self {
        s.jumps
    }
}

impl fmt::Display for PoolSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.jumps.is_empty() {
            return write!(f, "(none)");
        }
        let parts: Vec<String> = self
            .jumps
            .iter()
            .map(|(s, t)| format!("[{s},{t}]"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Parses `"[1,100],[120,150]"`. An empty string or `"(none)"` is the empty schedule.
impl FromStr for PoolSchedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "(none)" {
            return Ok(Self::empty());
        }
        let mut jumps = Vec::new();
        let mut rest = s;
        loop {
            rest = rest.trim_start();
            let Some(body) = rest.strip_prefix('[') else {
                return Err(Error::Parse(format!("expected '[' in schedule {s:?}")));
            };
            let Some(close) = body.find(']') else {
                return Err(Error::Parse(format!("unclosed '[' in schedule {s:?}")));
            };
            let nums: Vec<&str> = body[..close].split(',').map(str::trim).collect();
            if nums.len() != 2 {
                return Err(Error::Parse(format!(
                    "jump needs two endpoints: [{}]",
                    &body[..close]
                )));
            }
            let parse = |x: &str| {
                x.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {x:?} in schedule")))
            };
            jumps.push((parse(nums[0])?, parse(nums[1])?));
            rest = body[close + 1..].trim_start();
            if rest.is_empty() {
                break;
            }
            rest = rest
                .strip_prefix(',')
                .ok_or_else(|| Error::Parse(format!("expected ',' between jumps in {s:?}")))?;
        }
        Self::new(jumps)
    }
}

/// Every profile of the prior with the mechanism's outcome on it.
pub fn profile_outcomes(inst: &AuctionInstance, mech: &impl Mechanism) -> Vec<(Profile, Outcome)> {
    inst.profiles()
        .into_iter()
        .map(|p| {
            let o = mech.outcome(&p.values);
            (p, o)
        })
        .collect()
}

/// `E[sum_i p_i(v)]`, summed exactly over the prior.
pub fn expected_revenue(inst: &AuctionInstance, mech: &impl Mechanism) -> f64 {
    let terms: Vec<f64> = inst
        .profiles()
        .iter()
        .map(|p| p.mass * mech.outcome(&p.values).revenue())
        .collect();
    pairwise_sum(&terms)
}
