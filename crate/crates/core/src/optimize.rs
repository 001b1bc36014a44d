//! One-dimensional maximization by a uniform grid followed by golden-section
//! refinement of the bracket around the best grid point.
//!
//! The result is always a point at which `f` was actually evaluated, so a
//! caller whose every candidate is a valid bound never receives an
//! extrapolated value.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Optimum {
    pub x: f64,
    pub value: f64,
}

fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maximizes `f` on `[lo, hi]` with `n >= 2` grid points (endpoints
/// included), refining until the bracket is narrower than `rel_tol * max(|x|, 1)`.
pub(crate) fn maximize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize, rel_tol: f64) -> Optimum {
    debug_assert!(n >= 2 && lo <= hi);
    if lo == hi {
        return Optimum { x: lo, value: f(lo) };
    }
    let step = (hi - lo) / (n - 1) as f64;
    let at = |i: usize| if i + 1 == n { hi } else { lo + step * i as f64 };
    let mut best = Optimum {
        x: lo,
        value: f64::NEG_INFINITY,
    };
    let mut best_i = 0;
    for i in 0..n {
        let x = at(i);
        let v = score(f(x));
        if v > best.value {
            best = Optimum { x, value: v };
            best_i = i;
        }
    }
    let mut a = at(best_i.saturating_sub(1));
    let mut b = at((best_i + 1).min(n - 1));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (score(f(c)), score(f(d)));
    for _ in 0..200 {
        for (x, v) in [(c, fc), (d, fd)] {
            if v > best.value {
                best = Optimum { x, value: v };
            }
        }
        if (b - a) <= rel_tol * best.x.abs().max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = score(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = score(f(d));
        }
    }
    best
}
