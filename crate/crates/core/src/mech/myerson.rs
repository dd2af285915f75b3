use super::{AuctionInstance, Mechanism, Outcome};
use crate::dist::VirtualValueTable;
use crate::error::Result;

/// Ironed virtual values below this count as zero.
const PHI_TOL: f64 = 1e-12;

/// Myerson's optimal auction for independent priors: award the item to the largest
/// positive ironed virtual value and charge the threshold bid.
#[derive(Debug, Clone)]
pub struct Myerson {
    tables: Vec<VirtualValueTable>,
}

impl Myerson {
    pub fn new(inst: &AuctionInstance) -> Result<Self> {
        let tables = inst
            .marginals()?
            .iter()
            .map(VirtualValueTable::new)
            .collect();
        Ok(Self { tables })
    }

    /// Ironed virtual value of bidder `i` bidding `b`, read at the largest support value
    /// `<= b`. `None` when `b` is below the support.
    fn score(&self, i: usize, b: f64) -> Option<f64> {
        let t = &self.tables[i];
        let k = t.values.partition_point(|&v| v <= b).checked_sub(1)?;
        Some(t.ironed[k])
    }

    fn winner(&self, scores: &[Option<f64>]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in scores.iter().enumerate() {
            if let Some(s) = *s {
                if s > PHI_TOL && best.is_none_or(|(_, b)| s > b) {
                    best = Some((i, s));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// `sum_i mass * max_i phī_i^+` over the profiles of `inst`.
    pub fn virtual_surplus(&self, inst: &AuctionInstance) -> f64 {
        let terms: Vec<f64> = inst
            .profiles()
            .iter()
            .map(|p| {
                let best = (0..p.values.len())
                    .filter_map(|i| self.score(i, p.values[i]))
                    .fold(0.0, f64::max);
                p.mass * best
            })
            .collect();
        crate::util::pairwise_sum(&terms)
    }
}

impl Mechanism for Myerson {
    fn name(&self) -> String {
        "Myerson".into()
    }

    fn outcome(&self, bids: &[f64]) -> Outcome {
        let n = bids.len();
        let mut scores: Vec<Option<f64>> = (0..n).map(|i| self.score(i, bids[i])).collect();
        let Some(w) = self.winner(&scores) else {
            return Outcome::empty(n);
        };
        // Threshold: the least support value at which `w` still wins.
        let table = &self.tables[w];
        let mut price = bids[w];
        for (k, &v) in table.values.iter().enumerate() {
            if v > bids[w] {
                break;
            }
            scores[w] = Some(table.ironed[k]);
            if self.winner(&scores) == Some(w) {
                price = v;
                break;
            }
        }
        Outcome::sale(n, w, price)
    }
}

/// Myerson's auction on one profile.
pub fn run_myerson(inst: &AuctionInstance, bids: &[f64]) -> Result<Outcome> {
    Ok(Myerson::new(inst)?.outcome(bids))
}
