//! Special functions used by the Green's-function series.
//!
//! Everything here is evaluated in double precision on the real axis, on the
//! domains the electrostatics module needs: positive arguments for the
//! digamma family and for `K₀`, integer orders `s ≥ 2` for the zeta function
//! and `|x| ≤ 1` for the Legendre polynomials.

use std::f64::consts::PI;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// Digamma function `ψ(x) = Γ'(x)/Γ(x)`.
///
/// Uses upward recurrence to `x ≥ 10` followed by the asymptotic series, and
/// the reflection formula for negative non-integer arguments.
pub fn digamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        if x == x.floor() {
            return f64::NAN;
        }
        return digamma(1.0 - x) - PI / (PI * x).tan();
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli tail B_{2k}/(2k x^{2k}) for k = 1..7
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + x.ln() - 0.5 / x - series
}

/// Trigamma function `ψ'(x)` for `x > 0`.
pub fn trigamma(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        + 0.5 * inv2
        + inv
            * inv2
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0
                        - inv2
                            * (1.0 / 42.0
                                - inv2
                                    * (1.0 / 30.0
                                        - inv2
                                            * (5.0 / 66.0
                                                - inv2 * (691.0 / 2730.0 - inv2 * 7.0 / 6.0))))));
    acc + series
}

/// Exponentially scaled Bessel function `eˣ K₀(x)` for `x > 0`.
///
/// Trapezoidal rule on `∫₀^∞ exp(-2x sinh²(t/2)) dt`, which converges
/// geometrically because the integrand is analytic in a strip around the real
/// axis. The step shrinks like `x^{-1/2}` so the peak stays resolved.
pub fn bessel_k0_scaled(x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 {
        return f64::NAN;
    }
    let step = if x > 1.0 { (0.5 / x.sqrt()).min(0.1) } else { 0.1 };
    let mut sum = 0.5;
    let mut k = 1usize;
    loop {
        let t = k as f64 * step;
        let s = (0.5 * t).sinh();
        let v = (-2.0 * x * s * s).exp();
        sum += v;
        if v < 1e-18 * sum || t > 40.0 {
            break;
        }
        k += 1;
    }
    sum * step
}

/// Modified Bessel function of the second kind `K₀(x)` for `x > 0`.
pub fn bessel_k0(x: f64) -> f64 {
    if x > 745.0 {
        return 0.0;
    }
    bessel_k0_scaled(x) * (-x).exp()
}

/// Hurwitz zeta function `ζ(s, a) = Σ_{k≥0} (k + a)^{-s}` for `s > 1`, `a > 0`.
///
/// Euler–Maclaurin summation with ten explicit terms and eight Bernoulli
/// corrections.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    const B2K: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    if !(s > 1.0) || !(a > 0.0) {
        return f64::NAN;
    }
    let n = 10usize;
    let mut sum = 0.0;
    for k in 0..n {
        sum += (k as f64 + a).powf(-s);
    }
    let x = n as f64 + a;
    let xs = x.powf(-s);
    sum += x * xs / (s - 1.0) + 0.5 * xs;
    // rising factorial s (s+1) ... (s+2j-2) / (2j)!
    let mut coef = s;
    let mut fact = 2.0;
    let mut xpow = xs / x;
    for (j, b) in B2K.iter().enumerate() {
        let term = b / fact * coef * xpow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        let jj = (j + 1) as f64;
        coef *= (s + 2.0 * jj - 1.0) * (s + 2.0 * jj);
        fact *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
        xpow /= x * x;
    }
    sum
}

/// Riemann zeta function for `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Legendre polynomial `P_n(x)` by the three-term recurrence.
pub fn legendre_p(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 0 { 0.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values from 30-digit arbitrary precision evaluation.
    #[test]
    fn digamma_table() {
        let table = [
            (1.0, -EULER_GAMMA),
            (0.5, -1.963_510_026_021_423_5),
            (0.01, -100.560_885_457_868_67),
            (0.25, -4.227_453_533_376_265),
            (3.7, 1.167_153_539_361_511_4),
            (25.0, 3.198_742_512_851_974),
        ];
        for (x, want) in table {
            assert!(rel(digamma(x), want) < 1e-14, "psi({x}) = {}", digamma(x));
        }
        assert!(rel(digamma(-0.5), 0.036_489_973_978_576_52) < 1e-13);
    }

    #[test]
    fn trigamma_table() {
        let table = [
            (1.0, PI * PI / 6.0),
            (0.5, PI * PI / 2.0),
            (0.01, 10_001.621_213_528_313),
            (0.75, 2.541_879_647_671_606_5),
            (12.5, 0.083_285_224_601_578_37),
        ];
        for (x, want) in table {
            assert!(rel(trigamma(x), want) < 1e-13, "psi'({x}) = {}", trigamma(x));
        }
    }

    #[test]
    fn bessel_k0_table() {
        let table = [
            (1e-3, 7.023_688_800_562_381),
            (0.1, 2.427_069_024_702_016_6),
            (1.0, 0.421_024_438_240_708_33),
            (2.5, 0.062_347_553_200_366_2),
            (5.0, 3.691_098_334_042_594e-3),
            (10.0, 1.778_006_231_616_765_2e-5),
            (50.0, 3.410_167_749_789_496e-23),
        ];
        for (x, want) in table {
            assert!(rel(bessel_k0(x), want) < 1e-13, "K0({x}) = {}", bessel_k0(x));
        }
    }

    #[test]
    fn zeta_table() {
        assert!(rel(zeta(2.0), PI * PI / 6.0) < 1e-14);
        assert!(rel(zeta(3.0), 1.202_056_903_159_594_3) < 1e-14);
        assert!(rel(zeta(4.0), PI.powi(4) / 90.0) < 1e-14);
        assert!(rel(zeta(7.0), 1.008_349_277_381_922_8) < 1e-14);
        assert!(rel(zeta(40.0), 1.000_000_000_000_909_5) < 1e-15);
        assert!(rel(hurwitz_zeta(3.0, 0.5), 7.0 * zeta(3.0)) < 1e-14);
    }

    #[test]
    fn legendre_known_values() {
        assert_eq!(legendre_p(0, 0.3), 1.0);
        assert!((legendre_p(2, 0.3) - 0.5 * (3.0 * 0.09 - 1.0)).abs() < 1e-15);
        assert!((legendre_p(3, -0.7) - 0.5 * (5.0 * (-0.343) - 3.0 * (-0.7))).abs() < 1e-15);
        for n in 0..50 {
            assert!((legendre_p(n, 1.0) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let i22: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((i22 - 2.0 / 23.0).abs() < 1e-14);
    }
}
