//! One-dimensional minimization on a closed interval.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub argmin: f64,
    pub value: f64,
    /// `(x, f(x))` pairs in evaluation order.
    pub trace: Vec<(f64, f64)>,
    /// True when the minimizer sits within `tol` of an interval end.
    pub at_boundary: bool,
}

const SCAN_POINTS: usize = 41;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search on `[lo, hi]` to absolute tolerance `tol`.
///
/// A coarse scan first brackets the lowest grid value, then the golden
/// section refines inside the neighbouring grid cells. Non-finite objective
/// values are treated as `+inf`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Minimum {
    let mut trace = Vec::new();
    let mut eval = |x: f64, trace: &mut Vec<(f64, f64)>| {
        let v = f(x);
        let v = if v.is_finite() { v } else { f64::INFINITY };
        trace.push((x, v));
        v
    };
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..SCAN_POINTS {
        let v = eval(lo + i as f64 * step, &mut trace);
        if v < best.1 {
            best = (i, v);
        }
    }
    let mut a = lo + best.0.saturating_sub(1) as f64 * step;
    let mut b = (lo + (best.0 + 1) as f64 * step).min(hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut trace);
    let mut fd = eval(d, &mut trace);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut trace);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut trace);
        }
    }
    let mut argmin = 0.5 * (a + b);
    let mut value = eval(argmin, &mut trace);
    // The scan grid includes the end points; keep them if they win.
    let grid_best = lo + best.0 as f64 * step;
    if best.1 < value {
        argmin = grid_best;
        value = best.1;
    }
    let at_boundary = (argmin - lo).abs() <= 10.0 * tol || (hi - argmin).abs() <= 10.0 * tol;
    Minimum {
        argmin,
        value,
        trace,
        at_boundary,
    }
}
