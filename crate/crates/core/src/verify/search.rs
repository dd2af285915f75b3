use serde::Serialize;

use crate::mech::{expected_revenue, run_la, AuctionInstance, Lap, PoolSchedule};

/// Gains at or below this do not justify adding a jump.
const GAIN_TOL: f64 = 1e-12;

/// Non-adaptive schedules with endpoints drawn from `endpoints` and at most `max_jumps` jumps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleFamily {
    pub endpoints: Vec<f64>,
    pub max_jumps: usize,
}

impl ScheduleFamily {
    pub fn new(mut endpoints: Vec<f64>, max_jumps: usize) -> Self {
        endpoints.retain(|e| e.is_finite() && *e >= 0.0);
        endpoints.sort_by(f64::total_cmp);
        endpoints.dedup();
        Self {
            endpoints,
            max_jumps,
        }
    }

    /// Every support value plus one point above the top, which makes "nobody survives"
    /// jumps available.
    pub fn exhaustive(inst: &AuctionInstance, max_jumps: usize) -> Self {
        let mut e = inst.all_values();
        e.push(inst.max_value() + 1.0);
        Self::new(e, max_jumps)
    }

    /// Lists every member, empty schedule first.
    pub fn enumerate(&self) -> Vec<PoolSchedule> {
        let mut out = vec![Vec::new()];
        let mut frontier: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        let e = self.endpoints.len();
        for _ in 0..self.max_jumps {
            let mut next = Vec::new();
            for sched in &frontier {
                let from = sched.last().map_or(0, |&(_, t)| t);
                for s in from..e {
                    for t in s + 1..e {
                        let mut v = sched.clone();
                        v.push((s, t));
                        next.push(v);
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out.into_iter()
            .map(|v| {
                PoolSchedule::new(
                    v.into_iter()
                        .map(|(s, t)| (self.endpoints[s], self.endpoints[t]))
                        .collect(),
                )
                .expect("indices are increasing")
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub schedule: PoolSchedule,
    /// Exact expected revenue of `schedule`, re-evaluated profile by profile.
    pub revenue: f64,
    pub la_revenue: f64,
    /// The optimum predicted by the search itself.
    pub predicted: f64,
}

fn second_and_top(bids: &[f64]) -> (usize, f64, f64) {
    let mut w = 0;
    for (i, &b) in bids.iter().enumerate() {
        if b > bids[w] {
            w = i;
        }
    }
    let c2 = bids
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != w)
        .map(|(_, &b)| b)
        .fold(0.0, f64::max);
    (w, bids[w], c2)
}

/// Best schedule in `family` by exact expected revenue.
///
/// On a profile whose second-highest bid is `c2`, a schedule acts only through the jump
/// `[s, t)` containing `c2`, if any; otherwise the outcome is the plain lookahead one. So the
/// revenue of a schedule is the lookahead revenue plus a sum of per-jump gains `W(s, t)`,
/// and the best schedule is a longest path over the sorted endpoints.
pub fn search_lap(inst: &AuctionInstance, family: &ScheduleFamily) -> SearchResult {
    let e = &family.endpoints;
    let ne = e.len();
    let profiles = inst.profiles();

    struct Row {
        mass: f64,
        bids: Vec<f64>,
        winner: usize,
        top: f64,
        c2: f64,
        la: f64,
    }
    let mut rows: Vec<Row> = profiles
        .iter()
        .map(|p| {
            let (winner, top, c2) = second_and_top(&p.values);
            Row {
                mass: p.mass,
                la: run_la(inst, &p.values).revenue(),
                bids: p.values.clone(),
                winner,
                top,
                c2,
            }
        })
        .collect();
    let la_terms: Vec<f64> = rows.iter().map(|r| r.mass * r.la).collect();
    let la_revenue = crate::util::pairwise_sum(&la_terms);
    rows.sort_by(|a, b| a.c2.total_cmp(&b.c2));

    // w[s][t] for s < t, built one t at a time from difference arrays over s:
    // W(s, t) = s * lin[s] + con[s].
    let mut w = vec![vec![0.0; ne]; ne];
    let mut lin = vec![0.0; ne + 1];
    let mut con = vec![0.0; ne + 1];
    for t in 1..ne {
        let et = e[t];
        lin.iter_mut().for_each(|x| *x = 0.0);
        con.iter_mut().for_each(|x| *x = 0.0);
        let active = rows.partition_point(|r| r.c2 < et);
        for r in &rows[..active] {
            // s ranges over endpoints <= c2
            let hi = e.partition_point(|&x| x <= r.c2);
            if hi == 0 {
                continue;
            }
            if r.top < et {
                // nobody survives: the pool pays s in total
                lin[0] += r.mass;
                lin[hi] -= r.mass;
                con[0] -= r.mass * r.la;
                con[hi] += r.mass * r.la;
                continue;
            }
            let price = inst.posted_price(r.winner, &r.bids, et).unwrap_or(et);
            let g = if r.top >= price { price } else { 0.0 };
            // pool size m(s) = #{b >= s} is constant between consecutive sorted bids
            let mut below: Vec<f64> = r.bids.iter().copied().filter(|&b| b <= r.c2).collect();
            below.sort_by(f64::total_cmp);
            let mut lo = 0;
            let mut m = r.bids.len();
            for &b in &below {
                let end = e.partition_point(|&x| x <= b).min(hi);
                if end > lo {
                    let mf = m as f64;
                    lin[lo] += r.mass / mf;
                    lin[end] -= r.mass / mf;
                    let c = r.mass * ((mf - 1.0) / mf * g - r.la);
                    con[lo] += c;
                    con[end] -= c;
                    lo = end;
                }
                m -= 1;
            }
        }
        let (mut a, mut c) = (0.0, 0.0);
        for s in 0..t {
            a += lin[s];
            c += con[s];
            w[s][t] = e[s] * a + c;
        }
    }

    // best[j][k]: max gain with at most j jumps, all endpoints <= e[k]
    let jm = family.max_jumps;
    let mut best = vec![vec![0.0; ne]; jm + 1];
    let mut choice: Vec<Vec<Option<usize>>> = vec![vec![None; ne]; jm + 1];
    for j in 1..=jm {
        for k in 0..ne {
            let mut val = if k > 0 { best[j][k - 1] } else { 0.0 };
            let mut ch = None;
            for s in 0..k {
                let cand = best[j - 1][s] + w[s][k];
                if w[s][k] > GAIN_TOL && cand > val + GAIN_TOL {
                    val = cand;
                    ch = Some(s);
                }
            }
            best[j][k] = val;
            choice[j][k] = ch;
        }
    }

    let mut jumps = Vec::new();
    let (mut j, mut k) = (jm, ne.saturating_sub(1));
    while j > 0 && ne > 0 {
        match choice[j][k] {
            Some(s) => {
                jumps.push((e[s], e[k]));
                j -= 1;
                k = s;
            }
            None if k > 0 => k -= 1,
            None => break,
        }
    }
    jumps.reverse();
    let schedule = PoolSchedule::new(jumps).expect("search builds ordered jumps");
    let predicted = la_revenue + if ne > 0 { best[jm][ne - 1] } else { 0.0 };
    let revenue = expected_revenue(inst, &Lap::new(inst, schedule.clone()));
    SearchResult {
        schedule,
        revenue,
        la_revenue,
        predicted,
    }
}

/// Evaluates every member of `family` directly. Exponential; for cross-checks on small cases.
pub fn brute_force_search(inst: &AuctionInstance, family: &ScheduleFamily) -> SearchResult {
    let la_revenue = expected_revenue(inst, &Lap::new(inst, PoolSchedule::empty()));
    let mut best = (PoolSchedule::empty(), la_revenue);
    for s in family.enumerate().into_iter().skip(1) {
        let r = expected_revenue(inst, &Lap::new(inst, s.clone()));
        if r > best.1 + GAIN_TOL {
            best = (s, r);
        }
    }
    SearchResult {
        schedule: best.0,
        revenue: best.1,
        la_revenue,
        predicted: best.1,
    }
}
