use serde::Serialize;

use crate::exante::claim1_bounds;

pub const FOUR_SEVENTHS: f64 = 4.0 / 7.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCheckReport {
    pub grid_step: f64,
    pub rmax: f64,
    pub points: u64,
    /// Minimum over the grid of `max{b1, b2, b3} / (r1 + r2 + 1 - x1 - x2)`.
    pub min_ratio: f64,
    /// `min_ratio / (4/7)`.
    pub normalized: f64,
    /// `(r1, r2, x1, x2)` where the minimum occurs.
    pub argmin: (f64, f64, f64, f64),
    pub passed: bool,
}

/// `max{b1, b2, b3}` over the ex-ante benchmark at one point.
pub fn bound_ratio(r1: f64, r2: f64, x1: f64, x2: f64) -> f64 {
    let (b1, b2, b3) = claim1_bounds(r1, r2, x1, x2).expect("point outside the feasible region");
    b1.max(b2).max(b3) / (r1 + r2 + 1.0 - x1 - x2)
}

/// Exhaustive check of the three-bound inequality on the grid
/// `0 <= x1, x2`, `x1 + x2 <= 1`, `x_i <= r_i <= rmax`, with spacing `step`.
pub fn grid_check_47(step: f64, rmax: f64) -> GridCheckReport {
    assert!(step > 0.0 && step <= 0.1, "grid step must lie in (0, 0.1]");
    assert!(rmax >= 2.0, "rmax must be at least 2");
    let nx = (1.0 / step).round() as i64;
    let nr = (rmax / step).round() as i64;
    let at = |k: i64| k as f64 * step;

    let mut best = f64::INFINITY;
    let mut arg = (0i64, 0i64, 0i64, 0i64);
    let mut points = 0u64;
    for a in 0..=nx {
        let x1 = at(a);
        for b in 0..=nx - a {
            let x2 = at(b);
            for i in a..=nr {
                let r1 = at(i);
                for j in b..=nr {
                    let r2 = at(j);
                    let b1 = r1 + r2 - (r2 * x1 + r1 * x2) / 2.0;
                    let b3 = 1.0 + ((r1 - x1).max(r2 - x2)) / 2.0;
                    let top = b1.max(r1.max(r2)).max(b3);
                    let ratio = top / (r1 + r2 + 1.0 - x1 - x2);
                    if ratio < best {
                        best = ratio;
                        arg = (i, j, a, b);
                    }
                }
                points += (nr - b + 1) as u64;
            }
        }
    }
    let argmin = (at(arg.0), at(arg.1), at(arg.2), at(arg.3));
    let min_ratio = bound_ratio(argmin.0, argmin.1, argmin.2, argmin.3);
    GridCheckReport {
        grid_step: step,
        rmax,
        points,
        min_ratio,
        normalized: min_ratio / FOUR_SEVENTHS,
        argmin,
        passed: min_ratio >= FOUR_SEVENTHS - 1e-9,
    }
}
