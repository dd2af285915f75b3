use serde::Serialize;

use super::{AuctionInstance, Mechanism, Outcome, PoolSchedule};

/// The two options offered to a lone survivor of a jump from `s`, pooled with `m - 1` others.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MenuChoice {
    /// `(alloc, price)` of keeping the lottery ticket.
    pub lottery: (f64, f64),
    /// `(alloc, price)` of buying the item outright.
    pub buy: (f64, f64),
    /// The posted price behind the purchase option.
    pub r: f64,
}

impl MenuChoice {
    pub fn new(s: f64, r: f64, m: usize) -> Self {
        let m = m as f64;
        Self {
            lottery: (1.0 / m, s / m),
            buy: (1.0, s / m + r * (m - 1.0) / m),
            r,
        }
    }

    /// Whether a buyer with `value` takes the outright purchase. Indifference goes to buying.
    pub fn buys(&self, value: f64) -> bool {
        // u_buy - u_lottery = (value - r)(m - 1)/m
        value >= self.r
    }
}

/// Highest active bidder (lowest index on ties) and the largest other active bid,
/// or `cutoff` when nobody else is active.
fn leader(bids: &[f64], cutoff: f64) -> (usize, f64) {
    let mut w = usize::MAX;
    for (i, &b) in bids.iter().enumerate() {
        if b >= cutoff && (w == usize::MAX || b > bids[w]) {
            w = i;
        }
    }
    let second = bids
        .iter()
        .enumerate()
        .filter(|&(i, &b)| i != w && b >= cutoff)
        .map(|(_, &b)| b)
        .fold(cutoff, f64::max);
    (w, second)
}

fn posted_stop(inst: &AuctionInstance, bids: &[f64], winner: usize, floor: f64) -> Outcome {
    let price = inst.posted_price(winner, bids, floor).unwrap_or(floor);
    if bids[winner] >= price {
        Outcome::sale(bids.len(), winner, price)
    } else {
        Outcome::empty(bids.len())
    }
}

/// The lookahead auction on one profile: the top bidder is offered the best price at or
/// above the second-highest bid, computed from their posterior.
pub fn run_la(inst: &AuctionInstance, bids: &[f64]) -> Outcome {
    let (w, c) = leader(bids, 0.0);
    posted_stop(inst, bids, w, c)
}

/// The lookahead auction with pooling on one profile.
pub fn run_lap(inst: &AuctionInstance, sched: &PoolSchedule, bids: &[f64]) -> Outcome {
    let n = bids.len();
    let mut cutoff = 0.0;
    for &(s, t) in sched.jumps() {
        let (w, c2) = leader(bids, cutoff);
        if c2 < s {
            return posted_stop(inst, bids, w, c2);
        }
        let pool: Vec<usize> = (0..n).filter(|&i| bids[i] >= s).collect();
        let m = pool.len();
        let survivors: Vec<usize> = pool.iter().copied().filter(|&i| bids[i] >= t).collect();
        match survivors.as_slice() {
            [] => {
                let mut o = Outcome::empty(n);
                for &i in &pool {
                    o.alloc[i] = 1.0 / m as f64;
                    o.pay[i] = s / m as f64;
                }
                return o;
            }
            &[i] => {
                let r = inst.posted_price(i, bids, t).unwrap_or(t);
                let menu = MenuChoice::new(s, r, m);
                let mut o = Outcome::empty(n);
                let (a, p) = if menu.buys(bids[i]) {
                    menu.buy
                } else {
                    menu.lottery
                };
                o.alloc[i] = a;
                o.pay[i] = p;
                return o;
            }
            _ => cutoff = t,
        }
    }
    let (w, c2) = leader(bids, cutoff);
    posted_stop(inst, bids, w, c2)
}

/// The lookahead auction.
#[derive(Debug, Clone, Copy)]
pub struct Lookahead<'a> {
    inst: &'a AuctionInstance,
}

impl<'a> Lookahead<'a> {
    pub fn new(inst: &'a AuctionInstance) -> Self {
        Self { inst }
    }
}

impl Mechanism for Lookahead<'_> {
    fn name(&self) -> String {
        "LA".into()
    }

    fn outcome(&self, bids: &[f64]) -> Outcome {
        run_la(self.inst, bids)
    }
}

/// A lookahead auction with pooling over a fixed schedule.
#[derive(Debug, Clone)]
pub struct Lap<'a> {
    inst: &'a AuctionInstance,
    schedule: PoolSchedule,
}

impl<'a> Lap<'a> {
    pub fn new(inst: &'a AuctionInstance, schedule: PoolSchedule) -> Self {
        Self { inst, schedule }
    }

    pub fn schedule(&self) -> &PoolSchedule {
        &self.schedule
    }
}

impl Mechanism for Lap<'_> {
    fn name(&self) -> String {
        format!("LAP {}", self.schedule)
    }

    fn outcome(&self, bids: &[f64]) -> Outcome {
        run_lap(self.inst, &self.schedule, bids)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.schedule.endpoints()
    }
}
