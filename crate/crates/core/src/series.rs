//! Summation helpers for slowly decaying image-charge series.

use crate::special::gauss_legendre;
use std::sync::OnceLock;

const TAIL_NODES: usize = 24;

fn tail_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(TAIL_NODES);
        // map [-1, 1] to [0, 1]
        let x = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let w = w.iter().map(|w| 0.5 * w).collect();
        (x, w)
    })
}

/// Number of function evaluations spent by [`tail_sum`].
pub const TAIL_EVALUATIONS: usize = TAIL_NODES + 19;

/// `Σ_{μ ≥ a} f(μ)` for a smooth `f` decaying at least like `μ⁻²`.
///
/// Euler–Maclaurin with the integral evaluated by Gauss–Legendre on
/// `u = a/μ` and derivative corrections up to `f'''`. `f` must be analytic
/// well beyond `[a, ∞)` in the variable `1/μ`; callers choose `a` several
/// times larger than the distance of the nearest complex singularity.
pub fn tail_sum(f: impl Fn(f64) -> f64, a: f64) -> f64 {
    let (x, w) = tail_rule();
    let mut integral = 0.0;
    for (u, wu) in x.iter().zip(w) {
        let mu = a / u;
        integral += wu * f(mu) * a / (u * u);
    }
    let h = 0.005 * a;
    let fp1 = f(a + h);
    let fm1 = f(a - h);
    let fp2 = f(a + 2.0 * h);
    let fm2 = f(a - 2.0 * h);
    let d1 = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h);
    let stencil = |step: f64| -> Vec<f64> { (-3..=3).map(|k| f(a + k as f64 * step)).collect() };
    let h3 = 0.02 * a;
    let g = stencil(h3);
    let d3 = (-g[6] + 8.0 * g[5] - 13.0 * g[4] + 13.0 * g[2] - 8.0 * g[1] + g[0])
        / (8.0 * h3 * h3 * h3);
    let h5 = 0.01 * a;
    let g = stencil(h5);
    let d5 = (g[6] - 4.0 * g[5] + 5.0 * g[4] - 5.0 * g[2] + 4.0 * g[1] - g[0])
        / (2.0 * h5.powi(5));
    integral + 0.5 * f(a) - d1 / 12.0 + d3 / 720.0 - d5 / 30_240.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{hurwitz_zeta, zeta};

    #[test]
    fn power_law_tails() {
        for (s, a) in [(3.0, 32usize), (5.0, 20)] {
            let direct: f64 = (1..a).map(|k| (k as f64).powf(-s)).sum();
            let total = direct + tail_sum(|m| m.powf(-s), a as f64);
            assert!((total - zeta(s)).abs() < 5e-15, "s={s}: {total} vs {}", zeta(s));
        }
        for s in [2.0, 3.0] {
            let want = hurwitz_zeta(s, 32.0);
            assert!(((tail_sum(|m| m.powf(-s), 32.0) - want) / want).abs() < 1e-11);
        }
    }

    #[test]
    fn shifted_pole_tail() {
        // f(μ) = 1/((μ+c)² + b²) with poles at distance ≈ 1.7 from the origin
        let (c, b) = (0.7, 1.5);
        let f = |m: f64| 1.0 / ((m + c) * (m + c) + b * b);
        let direct: f64 = (50..2_000_000).map(|k| f(k as f64)).sum::<f64>();
        // remainder beyond 2e6 is ≈ 1/2e6 to high accuracy
        let reference = direct + 1.0 / (2_000_000.0 + c - 0.5);
        let got = tail_sum(f, 50.0);
        assert!(((got - reference) / reference).abs() < 1e-11);
    }
}
