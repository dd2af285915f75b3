use std::collections::HashMap;

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use crate::error::{Error, Result};
use crate::mech::AuctionInstance;

/// Largest product grid the LP benchmark accepts.
pub const LP_PROFILE_LIMIT: usize = 10_000;

/// Optimal revenue over all ex-post DSIC and IR mechanisms, as a linear program over
/// per-profile allocations and payments.
///
/// Variables live on the product of the marginal supports; profiles outside the prior
/// carry zero weight but still constrain deviations, which makes the program valid for
/// correlated priors.
pub fn optimal_dsic_lp(inst: &AuctionInstance) -> Result<f64> {
    let n = inst.bidders();
    let supports: Vec<Vec<f64>> = (0..n)
        .map(|i| inst.marginal(i).support().to_vec())
        .collect();
    let total = supports
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.len()))
        .unwrap_or(usize::MAX);
    if total > LP_PROFILE_LIMIT {
        return Err(Error::InstanceTooLarge {
            profiles: total,
            limit: LP_PROFILE_LIMIT,
        });
    }

    let mass: HashMap<Vec<u64>, f64> = inst
        .profiles()
        .into_iter()
        .map(|p| (p.values.iter().map(|v| v.to_bits()).collect(), p.mass))
        .collect();

    // Mixed-radix profile indexing, bidder 0 most significant.
    let mut stride = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * supports[i + 1].len();
    }
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut d = vec![0; n];
        for i in 0..n {
            d[i] = idx / stride[i];
            idx %= stride[i];
        }
        d
    };

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let mut xs: Vec<Variable> = Vec::with_capacity(total * n);
    let mut ps: Vec<Variable> = Vec::with_capacity(total * n);
    for idx in 0..total {
        let d = digits(idx);
        let key: Vec<u64> = (0..n).map(|i| supports[i][d[i]].to_bits()).collect();
        let w = mass.get(&key).copied().unwrap_or(0.0);
        for _ in 0..n {
            xs.push(lp.add_var(0.0, (0.0, 1.0)));
            ps.push(lp.add_var(w, (f64::NEG_INFINITY, f64::INFINITY)));
        }
    }

    for idx in 0..total {
        let d = digits(idx);
        let feas: Vec<(Variable, f64)> = (0..n).map(|i| (xs[idx * n + i], 1.0)).collect();
        lp.add_constraint(feas, ComparisonOp::Le, 1.0);
        for i in 0..n {
            let v = supports[i][d[i]];
            let (x, p) = (xs[idx * n + i], ps[idx * n + i]);
            lp.add_constraint([(x, v), (p, -1.0)], ComparisonOp::Ge, 0.0);
            for k in 0..supports[i].len() {
                if k == d[i] {
                    continue;
                }
                let alt = idx - d[i] * stride[i] + k * stride[i];
                let (xa, pa) = (xs[alt * n + i], ps[alt * n + i]);
                // v x - p >= v x' - p'
                lp.add_constraint(
                    [(x, v), (p, -1.0), (xa, -v), (pa, 1.0)],
                    ComparisonOp::Ge,
                    0.0,
                );
            }
        }
    }

    let sol = lp.solve().map_err(|e| Error::Solver(e.to_string()))?;
    Ok(sol.objective())
}
