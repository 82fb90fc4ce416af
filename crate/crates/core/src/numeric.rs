//! Small shared numerical routines.

/// Adaptive Simpson quadrature on `[a, b]` with absolute tolerance `tol`.
///
/// The interval is first split into `initial_panels` equal panels so that
/// narrow features away from the midpoint cannot be missed by the first
/// refinement test; each panel is then refined recursively.
pub(crate) fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    initial_panels: usize,
) -> f64 {
    debug_assert!(b >= a);
    debug_assert!(tol > 0.0);
    let n = initial_panels.max(1);
    let h = (b - a) / n as f64;
    let panel_tol = tol / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == n { b } else { lo + h };
        let m = 0.5 * (lo + hi);
        let (flo, fm, fhi) = (f(lo), f(m), f(hi));
        let whole = simpson(flo, fm, fhi, hi - lo);
        total += refine(f, lo, hi, flo, fm, fhi, whole, panel_tol, MAX_DEPTH);
    }
    total
}

const MAX_DEPTH: u32 = 48;

fn simpson(fa: f64, fm: f64, fb: f64, width: f64) -> f64 {
    width / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Bisection on a bracketing interval. `f(lo)` and `f(hi)` must have opposite
/// signs (a zero value counts as either sign). Converges on interval width,
/// so flat functions near the root do not stall the search.
pub(crate) fn bisect(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, width_tol: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    debug_assert!(flo * f(hi) <= 0.0, "bisect requires a sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= width_tol || mid <= lo || mid >= hi {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Density of a Gaussian with the given mean and variance.
pub(crate) fn gaussian_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    debug_assert!(variance > 0.0);
    let z = x - mean;
    (-z * z / (2.0 * variance)).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
}
