//! Closed-form stationary quantities checked against direct quadrature of
//! the density, across a grid of tail-exponent pairs.

mod oracle;

use mobility_core::StationaryDistribution;
use oracle::romberg;

const TAIL_GRID: [(f64, f64); 9] = [
    (1.2, 0.5),
    (1.2, 1.0),
    (1.2, 6.25),
    (2.0, 0.5),
    (2.0, 1.0),
    (2.0, 6.25),
    (5.0, 0.5),
    (5.0, 1.0),
    (5.0, 6.25),
];

/// Log-income point beyond which the upper tail holds less than `mass`.
fn upper_cut(a: f64, b: f64, mass: f64) -> f64 {
    (b / ((a + b) * mass)).ln() / a
}

/// Log-income point below which the lower tail holds less than `mass`.
fn lower_cut(a: f64, b: f64, mass: f64) -> f64 {
    -(a / ((a + b) * mass)).ln() / b
}

#[test]
fn density_normalizes_to_one() {
    for &(a, b) in &TAIL_GRID {
        let dist = StationaryDistribution::new(a, b, 1.0).unwrap();
        let f = |y: f64| dist.log_pdf(y);
        // The density has a kink at the origin; integrate each side alone.
        let lower = romberg(&f, lower_cut(a, b, 1e-13), 0.0, 1e-10);
        let upper = romberg(&f, 0.0, upper_cut(a, b, 1e-13), 1e-10);
        let mass = lower + upper;
        assert!((mass - 1.0).abs() < 1e-9, "a={a} b={b}: mass {mass}");
    }
}

#[test]
fn closed_mean_matches_quadrature() {
    for &(a, b) in &TAIL_GRID {
        let dist = StationaryDistribution::new(a, b, 1.0).unwrap();
        let closed = dist.mean().unwrap();
        let f = |y: f64| y.exp() * dist.log_pdf(y);
        // Truncation points sized so the discarded tail mass of the
        // x-weighted integrand stays below 1e-12 of the mean.
        let y_hi = ((a * b / (a + b)) / ((a - 1.0) * 1e-12 * closed)).ln() / (a - 1.0);
        let y_lo = -((a * b / (a + b)) / ((b + 1.0) * 1e-12 * closed)).ln() / (b + 1.0);
        let quad = romberg(&f, y_lo, 0.0, 1e-10) + romberg(&f, 0.0, y_hi, 1e-10);
        assert!(
            ((quad - closed) / closed).abs() < 1e-8,
            "a={a} b={b}: quadrature {quad} vs closed {closed}"
        );
    }
}

#[test]
fn closed_top_share_matches_quadrature() {
    for &(a, b) in &TAIL_GRID {
        let dist = StationaryDistribution::new(a, b, 1.0).unwrap();
        let mean = dist.mean().unwrap();
        for p in [0.01, 0.3] {
            let closed = dist.top_share(p).unwrap();
            let y_p = dist.quantile(1.0 - p).unwrap().ln();
            let f = |y: f64| y.exp() * dist.log_pdf(y);
            let y_hi = ((a * b / (a + b)) / ((a - 1.0) * 1e-13 * mean)).ln() / (a - 1.0);
            let above_threshold = if y_p >= 0.0 {
                romberg(&f, y_p, y_hi.max(y_p + 1.0), 1e-10)
            } else {
                romberg(&f, y_p, 0.0, 1e-10) + romberg(&f, 0.0, y_hi, 1e-10)
            };
            let quad = above_threshold / mean;
            assert!(
                ((quad - closed) / closed).abs() < 1e-8,
                "a={a} b={b} p={p}: quadrature {quad} vs closed {closed}"
            );
        }
    }
}

#[test]
fn closed_survival_matches_quadrature() {
    for &(a, b) in &[(2.0, 6.25), (1.2, 0.5), (5.0, 1.0)] {
        let dist = StationaryDistribution::new(a, b, 1.0).unwrap();
        let f = |y: f64| dist.log_pdf(y);
        for x in [0.5f64, 1.0, 2.0] {
            let closed = dist.survival(x).unwrap();
            let y = x.ln();
            let y_hi = upper_cut(a, b, 1e-14 * closed);
            let quad = if y >= 0.0 {
                romberg(&f, y, y_hi, 1e-10)
            } else {
                romberg(&f, y, 0.0, 1e-10) + romberg(&f, 0.0, y_hi, 1e-10)
            };
            assert!(
                ((quad - closed) / closed).abs() < 1e-8,
                "a={a} b={b} x={x}: quadrature {quad} vs closed {closed}"
            );
        }
    }
}

#[test]
fn reset_level_scales_incomes_not_shares() {
    let unit = StationaryDistribution::new(2.0, 6.25, 1.0).unwrap();
    let scaled = StationaryDistribution::new(2.0, 6.25, 3.0).unwrap();
    let mean_ratio = scaled.mean().unwrap() / unit.mean().unwrap();
    assert!((mean_ratio - 3.0).abs() < 1e-12);
    let q_ratio = scaled.quantile(0.9).unwrap() / unit.quantile(0.9).unwrap();
    assert!((q_ratio - 3.0).abs() < 1e-12);
    let share_unit = unit.top_share(0.01).unwrap();
    let share_scaled = scaled.top_share(0.01).unwrap();
    assert!((share_unit - share_scaled).abs() < 1e-14);
    // Survival matches after rescaling the evaluation point.
    let s_unit = unit.survival(2.0).unwrap();
    let s_scaled = scaled.survival(6.0).unwrap();
    assert!((s_unit - s_scaled).abs() < 1e-14);
}
