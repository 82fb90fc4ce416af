//! Quadrature oracle for integration tests.
//!
//! Romberg integration — iterated trapezoid refinement with Richardson
//! extrapolation — shares no code or algorithmic structure with the
//! library's adaptive Simpson routine, so agreement between the two is
//! evidence, not tautology.

// Shared across several test binaries; not every binary uses every oracle.
#![allow(dead_code)]

/// Integrates `f` over `[a, b]` to the requested relative tolerance.
/// Panics if the Romberg table fails to converge; the integrand must be
/// smooth on the interval (split at kinks before calling).
pub fn romberg(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const MAX_LEVEL: usize = 22;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut h = b - a;
    let mut trapezoid = 0.5 * h * (f(a) + f(b));
    rows.push(vec![trapezoid]);
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let new_points = 1usize << (level - 1);
        let mut sum = 0.0;
        for i in 0..new_points {
            sum += f(a + (2 * i + 1) as f64 * h);
        }
        trapezoid = 0.5 * rows[level - 1][0] + h * sum;
        let mut row = vec![trapezoid];
        let mut factor = 1.0;
        for k in 1..=level {
            factor *= 4.0;
            let extrapolated = (factor * row[k - 1] - rows[level - 1][k - 1]) / (factor - 1.0);
            row.push(extrapolated);
        }
        let best = *row.last().unwrap();
        let prev_best = *rows[level - 1].last().unwrap();
        rows.push(row);
        if level >= 5 && (best - prev_best).abs() <= tol * best.abs().max(1e-300) {
            return best;
        }
    }
    panic!("romberg did not converge on [{a}, {b}]");
}

/// Gaussian density, written independently of the library's helper.
pub fn gaussian(x: f64, mean: f64, variance: f64) -> f64 {
    let z = x - mean;
    (-z * z / (2.0 * variance)).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
}
