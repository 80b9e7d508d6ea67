//! Dipole–dipole coupling tensors `m·∇∇′G·m′`.
//!
//! All three variants are closed-form second derivatives of the image-charge
//! expressions; no numerical differentiation is involved.

use crate::electrostatics::{GreensEnv, Planes};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::series::tail_sum;

fn free_kernel(d: Vec3, m: &Vec3, mp: &Vec3) -> f64 {
    let r2 = d.norm_squared();
    let r = r2.sqrt();
    let md = m.dot(&d);
    let mpd = mp.dot(&d);
    (m.dot(mp) * r2 - 3.0 * md * mpd) / (r2 * r2 * r)
}

fn mirror(v: &Vec3) -> Vec3 {
    Vec3::new(v.x, v.y, -v.z)
}

fn plane_kernel(r: Vec3, m: &Vec3, rp: &Vec3, mp: &Vec3) -> f64 {
    free_kernel(r - rp, m, mp) - free_kernel(r - mirror(rp), m, &mirror(mp))
}

/// Free-space dipole coupling `[m·m′ − 3(m·n)(m′·n)]/|r − r′|³`.
pub fn dipdip_free(r: Vec3, m: Vec3, rp: Vec3, mp: Vec3) -> Result<f64> {
    if r == rp {
        return Err(Error::domain("dipdip_free", "coincident points"));
    }
    Ok(free_kernel(r - rp, &m, &mp))
}

/// Dipole coupling above a grounded plane at `z = 0`.
pub fn dipdip_plane(r: Vec3, m: Vec3, rp: Vec3, mp: Vec3) -> Result<f64> {
    if r == rp {
        return Err(Error::domain("dipdip_plane", "coincident points"));
    }
    if r.z <= 0.0 || rp.z <= 0.0 {
        return Err(Error::domain("dipdip_plane", "points must lie above the plane"));
    }
    Ok(plane_kernel(r, &m, &rp, &mp))
}

/// Dipole coupling between grounded planes at `z = 0` and `z = H`.
///
/// Image pairs `r ± 2μHẑ` are summed explicitly up to a start index that
/// grows with `ρ/H`; the remainder, which decays like `μ⁻⁵`, is added by an
/// Euler–Maclaurin tail. With no cover plane in `env` this falls back to the
/// single-plane or free-space form.
pub fn dipdip_cover(r: Vec3, m: Vec3, rp: Vec3, mp: Vec3, env: &GreensEnv) -> Result<f64> {
    let h = match env.planes {
        Planes::Free => return dipdip_free(r, m, rp, mp),
        Planes::Plane => return dipdip_plane(r, m, rp, mp),
        Planes::Cover(h) => h,
    };
    if r == rp {
        return Err(Error::domain("dipdip_cover", "coincident points"));
    }
    for z in [r.z, rp.z] {
        if !(z > 0.0 && z < h) {
            return Err(Error::domain(
                "dipdip_cover",
                format!("height {z} outside (0, {h})"),
            ));
        }
    }
    let rho = (r - rp).xy().norm();
    let start = 40 + (8.0 * rho / (2.0 * h)).ceil() as usize;
    if start > env.max_terms {
        return Err(Error::Convergence {
            op: "dipdip_cover",
            terms: env.max_terms,
        });
    }
    let shift = |mu: f64| Vec3::new(0.0, 0.0, 2.0 * mu * h);
    let pair = |mu: f64| {
        plane_kernel(r + shift(mu), &m, &rp, &mp) + plane_kernel(r - shift(mu), &m, &rp, &mp)
    };
    let mut tail = tail_sum(pair, start as f64);
    for mu in (1..start).rev() {
        tail += pair(mu as f64);
    }
    Ok(plane_kernel(r, &m, &rp, &mp) + tail)
}

/// Lab axis for the two-ion demonstration geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemoAxis {
    X,
    Y,
    Z,
}

impl DemoAxis {
    pub const ALL: [DemoAxis; 3] = [DemoAxis::X, DemoAxis::Y, DemoAxis::Z];

    pub fn unit(self) -> Vec3 {
        match self {
            DemoAxis::X => Vec3::x(),
            DemoAxis::Y => Vec3::y(),
            DemoAxis::Z => Vec3::z(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DemoAxis::X => "x",
            DemoAxis::Y => "y",
            DemoAxis::Z => "z",
        }
    }
}

/// Closed form for two ions at height `h`, separated by `ρ` along `x`,
/// both vibrating along the same lab axis, above a single plane.
pub fn demo_closed_form(axis: DemoAxis, rho: f64, h: f64) -> f64 {
    let s2 = rho * rho + 4.0 * h * h;
    let s = s2.sqrt();
    let r3 = rho * rho * rho;
    match axis {
        DemoAxis::X => -2.0 / r3 * (1.0 + r3 * (2.0 * h * h - rho * rho) / (s2 * s2 * s)),
        DemoAxis::Y => (1.0 - r3 / (s2 * s)) / r3,
        DemoAxis::Z => (1.0 - r3 * (8.0 * h * h - rho * rho) / (s2 * s2 * s)) / r3,
    }
}

/// Leading behaviour of [`demo_closed_form`] for `ρ ≫ 2h`.
pub fn demo_far_field(axis: DemoAxis, rho: f64, h: f64) -> f64 {
    match axis {
        DemoAxis::X => -24.0 * h * h / rho.powi(5),
        DemoAxis::Y => 6.0 * h * h / rho.powi(5),
        DemoAxis::Z => 2.0 / rho.powi(3),
    }
}

/// The demonstration geometry evaluated through [`dipdip_plane`].
pub fn demo_plane(axis: DemoAxis, rho: f64, h: f64) -> Result<f64> {
    let m = axis.unit();
    dipdip_plane(Vec3::new(0.0, 0.0, h), m, Vec3::new(rho, 0.0, h), m)
}
