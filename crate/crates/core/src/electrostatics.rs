//! Dirichlet Green's functions between grounded planes.
//!
//! Conventions: the electrode plane is `z = 0`, the optional cover plane is
//! `z = H`. `G` is normalised so that free space gives `1/|r − r′|`; the
//! surface Green's function is `(1/4π) ∂G/∂z′` at `z′ = 0`, i.e. the kernel
//! that maps a boundary potential to the potential above it.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::series::{tail_sum, TAIL_EVALUATIONS};
use crate::special::{bessel_k0, digamma, trigamma, zeta, EULER_GAMMA};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Conducting-plane configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Planes {
    /// No conductors.
    Free,
    /// Grounded plane at `z = 0`.
    Plane,
    /// Grounded planes at `z = 0` and `z = H`.
    Cover(f64),
}

/// Plane configuration plus series truncation controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreensEnv {
    pub planes: Planes,
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for GreensEnv {
    fn default() -> Self {
        GreensEnv {
            planes: Planes::Plane,
            abs_tol: 1e-12,
            max_terms: 1_000_000,
        }
    }
}

impl GreensEnv {
    pub fn free() -> Self {
        GreensEnv {
            planes: Planes::Free,
            ..Default::default()
        }
    }

    pub fn plane() -> Self {
        Self::default()
    }

    pub fn cover(height: f64) -> Self {
        GreensEnv {
            planes: Planes::Cover(height),
            ..Default::default()
        }
    }

    /// Plane configuration for an optional cover height.
    pub fn from_cover(height: Option<f64>) -> Self {
        match height {
            Some(h) if h.is_finite() => Self::cover(h),
            _ => Self::plane(),
        }
    }

    pub fn with_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn cover_height(&self) -> Option<f64> {
        match self.planes {
            Planes::Cover(h) => Some(h),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Planes::Cover(h) = self.planes {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Config(format!("cover height must be positive, got {h}")));
            }
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::Config(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if self.max_terms == 0 {
            return Err(Error::Config("max_terms must be at least 1".into()));
        }
        Ok(())
    }
}

/// Horizontal separation and the two heights of a source–field pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub rho: f64,
    pub z: f64,
    pub z_src: f64,
}

impl FieldPoint {
    pub fn new(rho: f64, z: f64, z_src: f64) -> Self {
        FieldPoint { rho, z, z_src }
    }

    pub fn from_points(r: Vec3, r_src: Vec3) -> Self {
        let d = r - r_src;
        FieldPoint::new(d.x.hypot(d.y), r.z, r_src.z)
    }

    /// Direct distance between the two points.
    pub fn separation(&self) -> f64 {
        self.rho.hypot(self.z - self.z_src)
    }

    pub fn swapped(&self) -> Self {
        FieldPoint::new(self.rho, self.z_src, self.z)
    }
}

/// Which representation produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesForm {
    Closed,
    ImageSum,
    Bessel,
    ZetaLegendre,
}

impl SeriesForm {
    pub fn name(self) -> &'static str {
        match self {
            SeriesForm::Closed => "closed",
            SeriesForm::ImageSum => "images",
            SeriesForm::Bessel => "bessel",
            SeriesForm::ZetaLegendre => "zeta",
        }
    }
}

/// A value together with the form and number of terms used.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub form: SeriesForm,
    pub terms: usize,
}

impl Evaluation {
    fn closed(value: f64) -> Self {
        Evaluation {
            value,
            form: SeriesForm::Closed,
            terms: 1,
        }
    }
}

/// Free-space Green's function `1/|r − r′|`.
pub fn greens_free(r: Vec3, r_src: Vec3) -> Result<f64> {
    let d = (r - r_src).norm();
    if d == 0.0 {
        return Err(Error::domain("greens_free", "coincident points"));
    }
    Ok(1.0 / d)
}

fn check_pair(op: &'static str, p: &FieldPoint) -> Result<()> {
    if !(p.rho >= 0.0) || !p.z.is_finite() || !p.z_src.is_finite() {
        return Err(Error::domain(op, format!("invalid field point {p:?}")));
    }
    if p.separation() == 0.0 {
        return Err(Error::domain(op, "coincident points"));
    }
    Ok(())
}

fn check_cover(op: &'static str, p: &FieldPoint, h: f64) -> Result<()> {
    check_pair(op, p)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(op, format!("cover height must be positive, got {h}")));
    }
    for z in [p.z, p.z_src] {
        if !(z >= 0.0 && z <= h) {
            return Err(Error::domain(op, format!("height {z} outside [0, {h}]")));
        }
    }
    Ok(())
}

/// Single-plane Green's function by one image charge.
pub fn greens_plane(p: FieldPoint) -> Result<f64> {
    check_pair("greens_plane", &p)?;
    if p.z < 0.0 || p.z_src < 0.0 {
        return Err(Error::domain("greens_plane", "points must lie above the plane"));
    }
    let r2 = p.rho * p.rho;
    let dm = p.z - p.z_src;
    let dp = p.z + p.z_src;
    Ok(1.0 / (r2 + dm * dm).sqrt() - 1.0 / (r2 + dp * dp).sqrt())
}

/// Index from which image pairs are summed by the Euler–Maclaurin tail.
///
/// The pair function has complex poles at `|μ| ≲ 1 + ρ/2H`; starting the tail
/// well beyond that keeps the quadrature in `1/μ` spectrally accurate.
fn tail_start(rho: f64, h: f64) -> usize {
    32 + (8.0 * (1.0 + rho / (2.0 * h))).ceil() as usize
}

/// Sum over image pairs: `f(0) + Σ_{μ≥1} pair(μ)`.
fn image_series(
    op: &'static str,
    env: &GreensEnv,
    rho: f64,
    h: f64,
    centre: f64,
    pair: impl Fn(f64) -> f64,
) -> Result<Evaluation> {
    let start = tail_start(rho, h);
    if start > env.max_terms {
        return Err(Error::Convergence {
            op,
            terms: env.max_terms,
        });
    }
    let mut sum = centre;
    for mu in 1..start {
        sum += pair(mu as f64);
    }
    sum += tail_sum(&pair, start as f64);
    Ok(Evaluation {
        value: sum,
        form: SeriesForm::ImageSum,
        terms: start + TAIL_EVALUATIONS,
    })
}

/// Cover-plane Green's function as a sum over mirror images.
pub fn greens_cover_images(p: FieldPoint, env: &GreensEnv) -> Result<Evaluation> {
    let h = cover_or_err("greens_cover_images", env)?;
    check_cover("greens_cover_images", &p, h)?;
    let r2 = p.rho * p.rho;
    let g = |shift: f64| {
        let a = p.z - p.z_src + shift;
        let b = p.z + p.z_src + shift;
        1.0 / (r2 + a * a).sqrt() - 1.0 / (r2 + b * b).sqrt()
    };
    let pair = |mu: f64| g(2.0 * mu * h) + g(-2.0 * mu * h);
    image_series("greens_cover_images", env, p.rho, h, g(0.0), pair)
}

/// Remainder bound for `Σ_{ν>n} c ν^k K₀(ν x)`, using `K₀((ν+1)x) ≤ e^{−x} K₀(νx)`.
fn bessel_tail_bound(scale: f64, power: i32, x: f64, n: usize) -> f64 {
    let q = (-x).exp();
    let next = (n + 1) as f64;
    let k0 = bessel_k0(next * x);
    // ν^k grows at most like (1 + 1/next)^k per step
    let growth = (1.0 + 1.0 / next).powi(power);
    let ratio = q * growth;
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    scale * next.powi(power) * k0 / (1.0 - ratio)
}

fn bessel_series(
    op: &'static str,
    env: &GreensEnv,
    x: f64,
    scale: f64,
    power: i32,
    term: impl Fn(usize, f64) -> f64,
) -> Result<Evaluation> {
    let mut sum = 0.0;
    for nu in 1..=env.max_terms {
        let k0 = bessel_k0(nu as f64 * x);
        sum += term(nu, k0);
        let bound = bessel_tail_bound(scale, power, x, nu);
        if bound < env.abs_tol && (bound < 1e-12 * sum.abs() || bound < 1e-3 * env.abs_tol) {
            return Ok(Evaluation {
                value: sum,
                form: SeriesForm::Bessel,
                terms: nu,
            });
        }
    }
    Err(Error::Convergence {
        op,
        terms: env.max_terms,
    })
}

/// Cover-plane Green's function as a sum over Bessel modes (needs `ρ > 0`).
pub fn greens_cover_bessel(p: FieldPoint, env: &GreensEnv) -> Result<Evaluation> {
    let op = "greens_cover_bessel";
    let h = cover_or_err(op, env)?;
    check_cover(op, &p, h)?;
    if !(p.rho > 0.0) {
        return Err(Error::domain(op, "the Bessel form requires rho > 0"));
    }
    let k = PI / h;
    let x = k * p.rho;
    let scale = 4.0 / h;
    bessel_series(op, env, x, scale, 0, |nu, k0| {
        let n = nu as f64;
        scale * (n * k * p.z).sin() * (n * k * p.z_src).sin() * k0
    })
}

fn cover_or_err(op: &'static str, env: &GreensEnv) -> Result<f64> {
    env.cover_height()
        .ok_or_else(|| Error::domain(op, "environment has no cover plane"))
}

/// Dirichlet Green's function for the configured planes.
///
/// With a cover plane the image form is used when `|r − r′| ≤ H` and the
/// Bessel form otherwise.
pub fn greens_cover(p: FieldPoint, env: &GreensEnv) -> Result<Evaluation> {
    match env.planes {
        Planes::Free => {
            check_pair("greens_cover", &p)?;
            Ok(Evaluation::closed(1.0 / p.separation()))
        }
        Planes::Plane => greens_plane(p).map(Evaluation::closed),
        Planes::Cover(h) => {
            if p.separation() <= h || p.rho == 0.0 {
                greens_cover_images(p, env)
            } else {
                greens_cover_bessel(p, env)
            }
        }
    }
}

/// Scaled self-potential `e_H(z)`; `H = ∞` gives `1/(4z)`.
pub fn self_potential(z: f64, cover_height: f64) -> Result<f64> {
    if cover_height.is_infinite() {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::domain("self_potential", format!("height {z} must be positive")));
        }
        return Ok(0.25 / z);
    }
    if !(z > 0.0 && z < cover_height) {
        return Err(Error::domain(
            "self_potential",
            format!("height {z} outside (0, {cover_height})"),
        ));
    }
    let a = z / cover_height;
    Ok(-(2.0 * EULER_GAMMA + digamma(a) + digamma(1.0 - a)) / (4.0 * cover_height))
}

fn check_surface(op: &'static str, rho: f64, z: f64, h: Option<f64>) -> Result<()> {
    if !(rho >= 0.0 && z > 0.0) {
        return Err(Error::domain(op, format!("need rho >= 0 and z > 0, got ({rho}, {z})")));
    }
    if let Some(h) = h {
        if !(z < h) {
            return Err(Error::domain(op, format!("height {z} outside (0, {h})")));
        }
    }
    Ok(())
}

fn surface_free(rho: f64, z: f64) -> f64 {
    let s2 = rho * rho + z * z;
    z / (2.0 * PI * s2 * s2.sqrt())
}

/// Surface Green's function as a sum over mirror images.
pub fn surface_greens_images(rho: f64, z: f64, env: &GreensEnv) -> Result<Evaluation> {
    let op = "surface_greens_images";
    let h = cover_or_err(op, env)?;
    check_surface(op, rho, z, Some(h))?;
    let pair = |mu: f64| surface_free(rho, z + 2.0 * mu * h) + surface_free(rho, z - 2.0 * mu * h);
    image_series(op, env, rho, h, surface_free(rho, z), pair)
}

/// Surface Green's function as a sum over Bessel modes (needs `ρ > 0`).
pub fn surface_greens_bessel(rho: f64, z: f64, env: &GreensEnv) -> Result<Evaluation> {
    let op = "surface_greens_bessel";
    let h = cover_or_err(op, env)?;
    check_surface(op, rho, z, Some(h))?;
    if !(rho > 0.0) {
        return Err(Error::domain(op, "the Bessel form requires rho > 0"));
    }
    let k = PI / h;
    let scale = 1.0 / (h * h);
    bessel_series(op, env, k * rho, scale, 1, |nu, k0| {
        let n = nu as f64;
        scale * n * (n * k * z).sin() * k0
    })
}

/// Surface Green's function by the odd zeta–Legendre expansion (`s < 2H`).
pub fn surface_greens_zeta(rho: f64, z: f64, env: &GreensEnv) -> Result<Evaluation> {
    let op = "surface_greens_zeta";
    let h = cover_or_err(op, env)?;
    check_surface(op, rho, z, Some(h))?;
    let s = rho.hypot(z);
    let t = s / (2.0 * h);
    if !(t < 1.0) {
        return Err(Error::domain(op, format!("requires s < 2H, got s = {s}")));
    }
    let c = z / s;
    let mut sum = 0.0;
    let mut tj = t;
    let (mut p0, mut p1) = (1.0, c);
    let mut j = 1usize;
    let mut terms = 0usize;
    loop {
        let jf = j as f64;
        let term = (jf + 1.0) * zeta(jf + 2.0) * tj * p1;
        sum += term;
        terms += 1;
        // |P_j| ≤ 1 and ζ decreases: Σ_{i≥0} (j+3+2i) t^{j+2+2i} bounds the rest
        let q = t * t;
        let bound = zeta(jf + 4.0) * tj * q * ((jf + 3.0) / (1.0 - q) + 2.0 * q / ((1.0 - q) * (1.0 - q)));
        let scaled = bound / (4.0 * PI * h * h);
        let value = (sum / (4.0 * PI * h * h)).abs();
        if scaled < env.abs_tol && (scaled < 1e-12 * value || scaled < 1e-3 * env.abs_tol) {
            break;
        }
        if terms >= env.max_terms {
            return Err(Error::Convergence {
                op,
                terms: env.max_terms,
            });
        }
        // advance the Legendre recurrence by two orders
        for step in 0..2 {
            let k = (j + step) as f64;
            let p2 = ((2.0 * k + 1.0) * c * p1 - k * p0) / (k + 1.0);
            p0 = p1;
            p1 = p2;
        }
        tj *= t * t;
        j += 2;
    }
    Ok(Evaluation {
        value: surface_free(rho, z) - sum / (4.0 * PI * h * h),
        form: SeriesForm::ZetaLegendre,
        terms,
    })
}

/// Surface Green's function for the configured planes.
///
/// Without a cover plane the closed form is returned; with one the image
/// form is used for `s ≤ H` and the Bessel form otherwise.
pub fn surface_greens(rho: f64, z: f64, env: &GreensEnv) -> Result<Evaluation> {
    match env.planes {
        Planes::Free | Planes::Plane => {
            check_surface("surface_greens", rho, z, None)?;
            Ok(Evaluation::closed(surface_free(rho, z)))
        }
        Planes::Cover(h) => {
            if rho.hypot(z) <= h || rho == 0.0 {
                surface_greens_images(rho, z, env)
            } else {
                surface_greens_bessel(rho, z, env)
            }
        }
    }
}

/// Fourier-space surface Green's function `sinh(k(H − z))/sinh(kH)`.
///
/// `H = ∞` gives `e^{−kz}`; `k = 0` gives the linear profile `(H − z)/H`.
pub fn surface_greens_fourier(k: f64, z: f64, cover_height: f64) -> f64 {
    if cover_height.is_infinite() {
        return (-k * z).exp();
    }
    let h = cover_height;
    if k * h < 1e-8 {
        return (h - z) / h;
    }
    // e^{-kz}(1 − e^{−2k(H−z)})/(1 − e^{−2kH}) avoids overflow at large k
    (-k * z).exp() * (-(-2.0 * k * (h - z)).exp_m1()) / (-(-2.0 * k * h).exp_m1())
}

/// `∂/∂z` of [`surface_greens_fourier`].
pub fn surface_greens_fourier_dz(k: f64, z: f64, cover_height: f64) -> f64 {
    if cover_height.is_infinite() {
        return -k * (-k * z).exp();
    }
    let h = cover_height;
    if k * h < 1e-8 {
        return -1.0 / h;
    }
    // −k cosh(k(H−z))/sinh(kH)
    -k * (-k * z).exp() * (1.0 + (-2.0 * k * (h - z)).exp()) / (-(-2.0 * k * h).exp_m1())
}

/// Limiting forms of the Green's functions.
pub mod asymptotic {
    use super::*;

    /// `G ≈ 1/ρ` for `ρ ≪ h`.
    pub fn greens_near(rho: f64) -> f64 {
        1.0 / rho
    }

    /// `G ≈ 2h²/ρ³` for `h ≪ ρ ≪ H`.
    pub fn greens_intermediate(rho: f64, h: f64) -> f64 {
        2.0 * h * h / (rho * rho * rho)
    }

    /// Leading Bessel mode for `ρ ≫ H`.
    pub fn greens_far(rho: f64, h: f64, cover_height: f64) -> f64 {
        let s = (PI * h / cover_height).sin();
        (8.0 / (cover_height * rho)).sqrt() * s * s * (-PI * rho / cover_height).exp()
    }

    /// On-axis surface Green's function; exact at `ρ = 0`.
    pub fn surface_on_axis(z: f64, cover_height: f64) -> f64 {
        let a = z / (2.0 * cover_height);
        (trigamma(a) - trigamma(1.0 - a)) / (8.0 * PI * cover_height * cover_height)
    }

    /// Leading Bessel mode of the surface Green's function for `ρ ≫ H`.
    pub fn surface_far(rho: f64, z: f64, cover_height: f64) -> f64 {
        (PI * z / cover_height).sin() * (-PI * rho / cover_height).exp()
            / (2.0 * rho * cover_height.powi(3)).sqrt()
    }
}
