use super::{Mechanism, Outcome};

/// Sell to the highest bidder (lowest index on ties) at a fixed price, if they bid at least that.
#[derive(Debug, Clone, Copy)]
pub struct PostedPrice {
    pub price: f64,
}

impl Mechanism for PostedPrice {
    fn name(&self) -> String {
        format!("posted price {}", self.price)
    }

    fn outcome(&self, bids: &[f64]) -> Outcome {
        let n = bids.len();
        match top(bids) {
            Some(w) if bids[w] >= self.price => Outcome::sale(n, w, self.price),
            _ => Outcome::empty(n),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.price]
    }
}

/// Pay-your-bid auction. Not truthful; used to exercise the incentive checker.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstPrice;

impl Mechanism for FirstPrice {
    fn name(&self) -> String {
        "first price".into()
    }

    fn outcome(&self, bids: &[f64]) -> Outcome {
        match top(bids) {
            Some(w) => Outcome::sale(bids.len(), w, bids[w]),
            None => Outcome::empty(bids.len()),
        }
    }
}

fn top(bids: &[f64]) -> Option<usize> {
    let mut w: Option<usize> = None;
    for (i, &b) in bids.iter().enumerate() {
        if w.is_none_or(|j| b > bids[j]) {
            w = Some(i);
        }
    }
    w
}
