//! RF pseudopotential of periodic surface-electrode patterns.
//!
//! Lengths are in units of `d`. The rf electrode region is a set of polygons
//! repeated on the pattern's cell; counter-clockwise polygons add to the rf
//! region and clockwise polygons cut holes. `φ` denotes the potential with the
//! rf region at 1 V and everything else, cover plane included, grounded.

use crate::electrostatics::{surface_greens_fourier, surface_greens_fourier_dz};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::series::tail_sum;
use crate::special::gauss_legendre;
use crate::units::{BOLTZMANN, ELEMENTARY_CHARGE, ATOMIC_MASS_UNIT};
use nalgebra::{Matrix3, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Simple polygon in the electrode plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross2(sub2(q2, q1), sub2(p1, q1));
    let d2 = cross2(sub2(q2, q1), sub2(p2, q1));
    let d3 = cross2(sub2(p2, p1), sub2(q1, p1));
    let d4 = cross2(sub2(p2, p1), sub2(q2, p1));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl Polygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Self {
        Polygon { vertices }
    }

    /// Regular `n`-gon; `ccw = false` gives a hole.
    pub fn regular(center: [f64; 2], circumradius: f64, n: usize, rotation: f64, ccw: bool) -> Self {
        let mut v: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let t = rotation + 2.0 * PI * k as f64 / n as f64;
                [center[0] + circumradius * t.cos(), center[1] + circumradius * t.sin()]
            })
            .collect();
        if !ccw {
            v.reverse();
        }
        Polygon { vertices: v }
    }

    /// Signed area, positive for counter-clockwise order.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| cross2(self.vertices[i], self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }

    fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(Error::Config("polygon needs at least three vertices".into()));
        }
        if self.vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("polygon vertex is not finite".into()));
        }
        if self.signed_area().abs() < 1e-14 {
            return Err(Error::Config("polygon has zero area".into()));
        }
        let e: Vec<_> = self.edges().collect();
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_cross(e[i].0, e[i].1, e[j].0, e[j].1) {
                    return Err(Error::Config(format!("polygon edges {i} and {j} intersect")));
                }
            }
        }
        Ok(())
    }

    /// `∫_P e^{−iG·ρ} d²ρ`, signed by orientation.
    pub fn fourier_integral(&self, g: [f64; 2]) -> Complex64 {
        let g2 = g[0] * g[0] + g[1] * g[1];
        if g2 == 0.0 {
            return Complex64::new(self.signed_area(), 0.0);
        }
        // divergence theorem with F = iG e^{−iG·ρ}/|G|²
        let mut sum = Complex64::new(0.0, 0.0);
        for (p, q) in self.edges() {
            let e = sub2(q, p);
            let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            let gn = g[0] * e[1] - g[1] * e[0];
            let half = 0.5 * (g[0] * e[0] + g[1] * e[1]);
            let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
            let phase = -(g[0] * mid[0] + g[1] * mid[1]);
            sum += Complex64::from_polar(gn * sinc, phase);
        }
        sum * Complex64::new(0.0, 1.0 / g2)
    }
}

/// RF electrode region repeated on a 2D cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodePattern {
    pub cell_a: [f64; 2],
    pub cell_b: [f64; 2],
    pub rf: Vec<Polygon>,
}

impl ElectrodePattern {
    pub fn validate(&self) -> Result<()> {
        if cross2(self.cell_a, self.cell_b).abs() < 1e-12 {
            return Err(Error::Config("cell vectors are degenerate".into()));
        }
        if self.rf.is_empty() {
            return Err(Error::Config("pattern has no rf polygons".into()));
        }
        for p in &self.rf {
            p.validate()?;
        }
        Ok(())
    }

    pub fn cell_area(&self) -> f64 {
        cross2(self.cell_a, self.cell_b).abs()
    }

    /// Fraction of the cell covered by the rf region.
    pub fn coverage(&self) -> f64 {
        self.rf.iter().map(Polygon::signed_area).sum::<f64>() / self.cell_area()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: ElectrodePattern =
            toml::from_str(text).map_err(|e| Error::Config(format!("pattern file: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pattern serialises")
    }

    /// Illustrative honeycomb pattern: a hexagonal rf ring around every site.
    ///
    /// Not an optimised design; each ring has an rf null on its axis.
    pub fn example_rings() -> Self {
        let (outer, inner) = (0.45, 0.2);
        let mut rf = Vec::new();
        for c in [[0.0, 0.0], [3f64.sqrt(), 1.0]] {
            rf.push(Polygon::regular(c, outer, 6, PI / 6.0, true));
            rf.push(Polygon::regular(c, inner, 6, PI / 6.0, false));
        }
        ElectrodePattern {
            cell_a: [3f64.sqrt(), 0.0],
            cell_b: [0.5 * 3f64.sqrt(), 1.5],
            rf,
        }
    }

    /// Whole cell as one electrode.
    pub fn uniform(cell_a: [f64; 2], cell_b: [f64; 2]) -> Self {
        let v = vec![
            [0.0, 0.0],
            cell_a,
            [cell_a[0] + cell_b[0], cell_a[1] + cell_b[1]],
            cell_b,
        ];
        ElectrodePattern {
            cell_a,
            cell_b,
            rf: vec![Polygon::new(v)],
        }
    }

    pub fn reciprocal(&self) -> ([f64; 2], [f64; 2]) {
        let det = cross2(self.cell_a, self.cell_b);
        let s = 2.0 * PI / det;
        (
            [s * self.cell_b[1], -s * self.cell_b[0]],
            [-s * self.cell_a[1], s * self.cell_a[0]],
        )
    }

    /// Fourier table with all reciprocal vectors up to `gmax`.
    pub fn fourier(&self, gmax: f64, cover_height: f64, tol: f64) -> Result<FourierTable> {
        self.validate()?;
        if !(cover_height > 0.0) {
            return Err(Error::domain("fourier_table", "cover height must be positive"));
        }
        let (ga, gb) = self.reciprocal();
        let gmin = (ga[0].hypot(ga[1])).min(gb[0].hypot(gb[1]));
        // reach along each index from the dual cell geometry
        let reach = (gmax / gmin * 2.0).ceil() as i64 + 1;
        let area = self.cell_area();
        let mut terms = Vec::new();
        for m in -reach..=reach {
            for n in -reach..=reach {
                let g = [m as f64 * ga[0] + n as f64 * gb[0], m as f64 * ga[1] + n as f64 * gb[1]];
                let k = g[0].hypot(g[1]);
                if k > gmax {
                    continue;
                }
                let c: Complex64 = self.rf.iter().map(|p| p.fourier_integral(g)).sum::<Complex64>() / area;
                terms.push(FourierTerm { g, k, c });
            }
        }
        terms.sort_by(|a, b| a.k.partial_cmp(&b.k).unwrap());
        Ok(FourierTable {
            terms,
            gmax,
            cover_height,
            tol,
        })
    }

    /// Table adequate for heights `z ≥ 0.1`.
    pub fn fourier_default(&self, cover_height: f64) -> Result<FourierTable> {
        self.fourier(240.0, cover_height, 1e-8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierTerm {
    pub g: [f64; 2],
    pub k: f64,
    pub c: Complex64,
}

/// Boundary Fourier coefficients of `φ`, sorted by `|G|`.
#[derive(Clone, Debug)]
pub struct FourierTable {
    pub terms: Vec<FourierTerm>,
    pub gmax: f64,
    pub cover_height: f64,
    /// Largest accepted `e^{−G_max z}`.
    pub tol: f64,
}

impl FourierTable {
    pub fn truncation_estimate(&self, z: f64) -> f64 {
        (-self.gmax * z).exp()
    }

    fn check(&self, op: &'static str, p: Vec3) -> Result<()> {
        if !(p.z > 0.0 && p.z < self.cover_height) {
            return Err(Error::domain(op, format!("z = {} outside (0, H)", p.z)));
        }
        if self.truncation_estimate(p.z) > self.tol {
            return Err(Error::Convergence {
                op,
                terms: self.terms.len(),
            });
        }
        Ok(())
    }

    fn active(&self, z: f64) -> impl Iterator<Item = &FourierTerm> {
        let kcut = (-(1e-18f64).ln() / z).min(f64::INFINITY);
        self.terms.iter().take_while(move |t| t.k <= kcut)
    }
}

/// `φ` at a point above the pattern.
pub fn periodic_potential(table: &FourierTable, p: Vec3) -> Result<f64> {
    table.check("periodic_potential", p)?;
    let h = table.cover_height;
    let mut sum = 0.0;
    for t in table.active(p.z) {
        let wave = Complex64::from_polar(1.0, t.g[0] * p.x + t.g[1] * p.y);
        sum += (t.c * wave).re * surface_greens_fourier(t.k, p.z, h);
    }
    Ok(sum)
}

/// `∇φ` at a point above the pattern.
pub fn periodic_gradient(table: &FourierTable, p: Vec3) -> Result<Vec3> {
    table.check("periodic_gradient", p)?;
    let h = table.cover_height;
    let mut g = Vec3::zeros();
    for t in table.active(p.z) {
        let cw = t.c * Complex64::from_polar(1.0, t.g[0] * p.x + t.g[1] * p.y);
        let s = surface_greens_fourier(t.k, p.z, h);
        // ∂_x of Re(c e^{iG·ρ}) = Re(i G_x c e^{iG·ρ}) = −G_x Im(c e^{iG·ρ})
        g.x -= t.g[0] * cw.im * s;
        g.y -= t.g[1] * cw.im * s;
        g.z += cw.re * surface_greens_fourier_dz(t.k, p.z, h);
    }
    Ok(g)
}

// ∫_0^R r dr of the surface kernel with all cover-plane images
fn radial_integral(r: f64, z: f64, h: f64) -> f64 {
    let term = |zz: f64| zz.signum() - zz / (r * r + zz * zz).sqrt();
    let mut s = term(z);
    if h.is_finite() {
        let pair = |mu: f64| term(z + 2.0 * mu * h) + term(z - 2.0 * mu * h);
        let start = 32 + (8.0 * (1.0 + r / (2.0 * h))).ceil() as usize;
        for mu in 1..start {
            s += pair(mu as f64);
        }
        s += tail_sum(pair, start as f64);
    }
    s / (2.0 * PI)
}

/// Potential of non-repeated polygons by real-space integration.
///
/// Each edge contributes `∫ dθ F(r(θ))` over the angle it subtends at the
/// field point, where `F` is the analytic radial integral of the surface
/// kernel. Independent of the Fourier route.
pub fn aperiodic_potential(polygons: &[Polygon], p: Vec3, cover_height: f64) -> Result<f64> {
    if !(p.z > 0.0 && p.z < cover_height) {
        return Err(Error::domain("aperiodic_potential", "point outside (0, H)"));
    }
    let (nodes, weights) = gauss_legendre(24);
    let c = [p.x, p.y];
    let mut total = 0.0;
    for poly in polygons {
        for (a, b) in poly.edges() {
            let (u, v) = (sub2(a, c), sub2(b, c));
            let e = sub2(b, a);
            let cr = cross2(u, e);
            if cr.abs() < 1e-15 {
                continue;
            }
            let dtheta = cross2(u, v).atan2(u[0] * v[0] + u[1] * v[1]);
            let t0 = u[1].atan2(u[0]);
            let panels = 4;
            for k in 0..panels {
                let lo = dtheta * k as f64 / panels as f64;
                let hi = dtheta * (k + 1) as f64 / panels as f64;
                for (x, w) in nodes.iter().zip(&weights) {
                    let th = t0 + 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
                    let dir = [th.cos(), th.sin()];
                    let r = cr / cross2(dir, e);
                    total += 0.5 * (hi - lo) * w * radial_integral(r, p.z, cover_height);
                }
            }
        }
    }
    Ok(total)
}

/// Ion species and rf drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SIContext {
    /// Coulomb.
    pub charge: f64,
    /// Kilogram.
    pub mass: f64,
    /// Metre.
    pub spacing: f64,
    /// RF amplitude in volt.
    pub rf_amplitude: f64,
    /// RF angular frequency in rad/s.
    pub rf_frequency: f64,
    /// Cover height in units of `d`.
    pub cover_height: f64,
}

impl Default for SIContext {
    fn default() -> Self {
        SIContext {
            charge: ELEMENTARY_CHARGE,
            mass: 9.0 * ATOMIC_MASS_UNIT,
            spacing: 30e-6,
            rf_amplitude: 50.0,
            rf_frequency: 2.0 * PI * 200e6,
            cover_height: 50.0,
        }
    }
}

impl SIContext {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.mass, self.spacing, self.rf_amplitude, self.rf_frequency, self.cover_height]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !ok || self.charge == 0.0 {
            return Err(Error::Config("SI context values must be positive".into()));
        }
        Ok(())
    }

    /// `E_pp = Q²U²/(4MΩ²d²)` in joule.
    pub fn e_pp(&self) -> f64 {
        (self.charge * self.rf_amplitude).powi(2)
            / (4.0 * self.mass * self.rf_frequency.powi(2) * self.spacing.powi(2))
    }

    pub fn e_pp_ev(&self) -> f64 {
        self.e_pp() / ELEMENTARY_CHARGE
    }

    pub fn e_pp_kelvin(&self) -> f64 {
        self.e_pp() / BOLTZMANN
    }

    /// `V_pp = E_pp/Q` in volt.
    pub fn v_pp(&self) -> f64 {
        self.e_pp() / self.charge
    }
}

/// Pseudopotential `‖∇φ‖²` in units of `E_pp`.
pub fn pseudopotential(table: &FourierTable, p: Vec3) -> Result<f64> {
    Ok(periodic_gradient(table, p)?.norm_squared())
}

/// Pseudopotential in eV.
pub fn pseudopotential_ev(table: &FourierTable, p: Vec3, ctx: &SIContext) -> Result<f64> {
    Ok(pseudopotential(table, p)? * ctx.e_pp_ev())
}

/// Total potential energy in units of `E_pp` with the dc electrodes and cover
/// at bias `v` (units of `V_pp`).
pub fn total_potential(table: &FourierTable, p: Vec3, v: f64) -> Result<f64> {
    let pp = pseudopotential(table, p)?;
    Ok(pp + v * (1.0 - periodic_potential(table, p)?))
}

/// Secular frequencies in rad/s from the pseudopotential curvature at `p`.
pub fn secular_frequencies(table: &FourierTable, p: Vec3, ctx: &SIContext, step: f64) -> Result<[f64; 3]> {
    let f = |q: Vec3| pseudopotential(table, q);
    let mut hess = Matrix3::<f64>::zeros();
    let e = [Vec3::x(), Vec3::y(), Vec3::z()];
    let f0 = f(p)?;
    for i in 0..3 {
        for j in i..3 {
            let v = if i == j {
                (f(p + e[i] * step)? - 2.0 * f0 + f(p - e[i] * step)?) / (step * step)
            } else {
                (f(p + (e[i] + e[j]) * step)? - f(p + (e[i] - e[j]) * step)?
                    - f(p + (e[j] - e[i]) * step)?
                    + f(p - (e[i] + e[j]) * step)?)
                    / (4.0 * step * step)
            };
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(hess);
    let scale = ctx.e_pp() / (ctx.mass * ctx.spacing * ctx.spacing);
    let mut w: Vec<f64> = eig.eigenvalues.iter().map(|k| (k * scale).max(0.0).sqrt()).collect();
    w.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok([w[0], w[1], w[2]])
}

/// Potential along a vertical line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerticalScan {
    pub xy: [f64; 2],
    pub bias: f64,
    pub z: Vec<f64>,
    /// `E/E_pp` of the pseudopotential alone.
    pub pseudo: Vec<f64>,
    /// `E/E_pp` including the bias term.
    pub total: Vec<f64>,
    /// `(z, E)` of the lowest local minimum.
    pub minimum: Option<(f64, f64)>,
    /// `(z, E)` of the highest point above the minimum.
    pub barrier: Option<(f64, f64)>,
    pub depth: Option<f64>,
    pub trapped: bool,
}

/// Samples `n` heights in `[z_lo, z_hi]` above `xy` with bias `v` (units of `V_pp`).
pub fn vertical_scan(
    table: &FourierTable,
    xy: [f64; 2],
    v: f64,
    range: (f64, f64),
    n: usize,
) -> Result<VerticalScan> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi < table.cover_height && lo < hi && n >= 3) {
        return Err(Error::domain("vertical_scan", "scan range must lie inside (0, H)"));
    }
    let z: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let mut pseudo = Vec::with_capacity(n);
    let mut total = Vec::with_capacity(n);
    for &zz in &z {
        let p = Vec3::new(xy[0], xy[1], zz);
        let pp = pseudopotential(table, p)?;
        pseudo.push(pp);
        total.push(pp + v * (1.0 - periodic_potential(table, p)?));
    }
    let mut minimum: Option<(usize, f64)> = None;
    for i in 1..n - 1 {
        if total[i] <= total[i - 1] && total[i] < total[i + 1] {
            if minimum.map_or(true, |(_, e)| total[i] < e) {
                minimum = Some((i, total[i]));
            }
        }
    }
    let (minimum, barrier, depth) = match minimum {
        Some((i, e)) => {
            let (j, b) = (i..n)
                .map(|j| (j, total[j]))
                .fold((i, e), |acc, x| if x.1 > acc.1 { x } else { acc });
            (Some((z[i], e)), Some((z[j], b)), Some(b - e))
        }
        None => (None, None, None),
    };
    Ok(VerticalScan {
        xy,
        bias: v,
        z,
        pseudo,
        total,
        minimum,
        barrier,
        depth,
        trapped: depth.is_some_and(|d| d > 0.0),
    })
}

/// Height of the rf null on the vertical line above `xy`, by bisection on `∂_zφ`.
pub fn find_null_height(table: &FourierTable, xy: [f64; 2], range: (f64, f64)) -> Result<f64> {
    let dz = |z: f64| periodic_gradient(table, Vec3::new(xy[0], xy[1], z)).map(|g| g.z);
    let (mut a, mut b) = range;
    let (mut fa, fb) = (dz(a)?, dz(b)?);
    if fa * fb > 0.0 {
        return Err(Error::domain("find_null_height", "no sign change of ∂φ/∂z in range"));
    }
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        let fm = dz(m)?;
        if fm * fa <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
