use serde::Serialize;

use crate::mech::{AuctionInstance, Mechanism};

const UTIL_TOL: f64 = 1e-9;

/// The first profitable deviation (or IR failure) found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub bidder: usize,
    pub profile: Vec<f64>,
    /// `None` for an IR failure at the truthful bid.
    pub deviation: Option<f64>,
    pub truthful_utility: f64,
    pub deviating_utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub passed: bool,
    pub witness: Option<Witness>,
    pub checks: usize,
}

/// Candidate misreports: every support value, midpoints between neighbours, mechanism
/// breakpoints and a small step either side of each, zero, and one above the top value.
pub fn deviation_bids(inst: &AuctionInstance, mech: &impl Mechanism) -> Vec<f64> {
    let mut base = inst.all_values();
    base.extend(
        mech.breakpoints()
            .into_iter()
            .filter(|b| b.is_finite() && *b >= 0.0),
    );
    base.sort_by(f64::total_cmp);
    base.dedup();
    let gap = base
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let step = if gap.is_finite() { gap / 4.0 } else { 0.25 };
    let mut out = base.clone();
    for w in base.windows(2) {
        out.push((w[0] + w[1]) / 2.0);
    }
    for &b in &base {
        out.push(b - step);
        out.push(b + step);
    }
    out.push(0.0);
    out.push(inst.max_value() + 1.0);
    out.retain(|b| *b >= 0.0);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Ex-post check: on every profile in the support, no bidder gains by misreporting
/// and truthful utility is non-negative.
pub fn check_dsic_ir(inst: &AuctionInstance, mech: &impl Mechanism) -> DeviationReport {
    let devs = deviation_bids(inst, mech);
    let mut checks = 0;
    for p in inst.profiles() {
        let truth = mech.outcome(&p.values);
        let mut bids = p.values.clone();
        for i in 0..p.values.len() {
            let v = p.values[i];
            let u = truth.utility(i, v);
            checks += 1;
            if u < -UTIL_TOL {
                return DeviationReport {
                    passed: false,
                    witness: Some(Witness {
                        bidder: i,
                        profile: p.values.clone(),
                        deviation: None,
                        truthful_utility: u,
                        deviating_utility: u,
                    }),
                    checks,
                };
            }
            for &b in &devs {
                if b == v {
                    continue;
                }
                bids[i] = b;
                let ud = mech.outcome(&bids).utility(i, v);
                checks += 1;
                if ud > u + UTIL_TOL {
                    return DeviationReport {
                        passed: false,
                        witness: Some(Witness {
                            bidder: i,
                            profile: p.values.clone(),
                            deviation: Some(b),
                            truthful_utility: u,
                            deviating_utility: ud,
                        }),
                        checks,
                    };
                }
            }
            bids[i] = v;
        }
    }
    DeviationReport {
        passed: true,
        witness: None,
        checks,
    }
}
