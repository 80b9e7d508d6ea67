//! Field of the two-colour wire grid under the ions and the drive budgets it implies.
//!
//! Lengths are in units of `d`, measured from the wire plane. Fields are in
//! units of `μ₀·[A]/d` when currents are given in ampere; multiply by `μ₀/d`
//! for tesla. Both colours carry positive current along `−ŷ`; blue wires sit
//! at `x = n·d_w`, red wires halfway between, with `d_w = √3/2`.

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::units::{ReducedUnits, BOHR_MAGNETON, HBAR, PLANCK, VACUUM_PERMEABILITY};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Spacing between wires of equal colour, `√3/2`.
pub const WIRE_SPACING: f64 = 0.866_025_403_784_438_6;

/// Default depth of the wires below the ions, `h_w = d_w`.
pub const DEFAULT_DEPTH: f64 = WIRE_SPACING;

/// Static snapshot of the grid currents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireGrid {
    /// Height of the ions above the wire plane.
    pub depth: f64,
    pub blue: f64,
    pub red: f64,
}

impl WireGrid {
    /// Grid with the red current set by the null ratio at the ion height.
    pub fn nulled(depth: f64, blue: f64) -> Result<Self> {
        let ratio = null_current_ratio(depth)?;
        Ok(WireGrid {
            depth,
            blue,
            red: blue / ratio,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.depth > 0.0 && self.depth.is_finite()) {
            return Err(Error::domain("wire_grid", "wire depth must be positive"));
        }
        Ok(())
    }
}

// Terms of sinh v/(cos u − cosh v) and sin u/(cos u − cosh v), written with
// e^{−|v|} so large heights do not overflow.
fn array_terms(u: f64, v: f64, shift_sign: f64) -> Option<(f64, f64)> {
    let e = (-v.abs()).exp();
    let den = 2.0 * e * shift_sign * u.cos() - 1.0 - e * e;
    if den.abs() < 1e-14 {
        return None;
    }
    let sinh_part = v.signum() * (1.0 - e * e) / den;
    let sin_part = 2.0 * e * u.sin() / den;
    Some((sinh_part, sin_part))
}

/// Closed-form field of both infinite wire arrays at `(x, z)`.
pub fn wire_field(x: f64, z: f64, grid: &WireGrid) -> Result<Vec3> {
    let k = 4.0 * PI / 3f64.sqrt();
    let (u, v) = (k * x, k * z);
    let on_wire = || Error::domain("wire_field", format!("({x}, {z}) lies on a wire"));
    let pre = 1.0 / 3f64.sqrt();
    let (bs, bn) = array_terms(u, v, 1.0).ok_or_else(on_wire)?;
    // the red denominator is cos u + cosh v; write it as −(−cos u − cosh v)
    let (rs, rn) = array_terms(u, v, -1.0).ok_or_else(on_wire)?;
    let bx = pre * grid.blue * bs + pre * grid.red * rs;
    let bz = -pre * grid.blue * bn + pre * grid.red * rn;
    Ok(Vec3::new(bx, 0.0, bz))
}

/// `I_blue/I_red` that cancels the field at height `depth` above the blue wires.
pub fn null_current_ratio(depth: f64) -> Result<f64> {
    if !(depth > 0.0) {
        return Err(Error::domain("null_current_ratio", "wire depth must be positive"));
    }
    let t = (2.0 * PI * depth / 3f64.sqrt()).tanh();
    Ok(-t * t)
}

/// Gradient `∂_i B_j` above a blue wire at the null ratio, units of `μ₀·[A]/d²`.
pub fn null_gradient(depth: f64, blue: f64) -> Result<[[f64; 3]; 3]> {
    if !(depth > 0.0) {
        return Err(Error::domain("null_gradient", "wire depth must be positive"));
    }
    let s = (2.0 * PI * depth / 3f64.sqrt()).sinh();
    let g = 4.0 * PI * blue / (3.0 * s * s);
    Ok([[0.0, 0.0, g], [0.0, 0.0, 0.0], [g, 0.0, 0.0]])
}

/// Wire-by-wire Biot–Savart sum over `2·(2n+1)` wires plus the analytic
/// remainder of each array beyond the summed block.
pub fn biot_savart_field(x: f64, z: f64, grid: &WireGrid, n: usize) -> Vec3 {
    let n = n as i64;
    let mut total = Vec3::zeros();
    for (offset, current) in [(0.0, grid.blue), (0.5 * WIRE_SPACING, grid.red)] {
        // current flows along −ŷ, so B = −μ₀I/(2π) (z x̂ − X ẑ)/(X² + z²)
        let pre = -current / (2.0 * PI);
        let centre = ((x - offset) / WIRE_SPACING).round() as i64;
        let (mut sx, mut sz) = (0.0, 0.0);
        for w in (centre - n)..=(centre + n) {
            let dx = x - offset - w as f64 * WIRE_SPACING;
            let r2 = dx * dx + z * z;
            sx += z / r2;
            sz -= dx / r2;
        }
        let xu = x - offset - (centre + n) as f64 * WIRE_SPACING - 0.5 * WIRE_SPACING;
        let xl = x - offset - (centre - n) as f64 * WIRE_SPACING + 0.5 * WIRE_SPACING;
        sx += ((xu / z).atan() + PI / 2.0 + PI / 2.0 - (xl / z).atan()) / WIRE_SPACING;
        sz -= 0.5 * ((xu * xu + z * z).ln() - (xl * xl + z * z).ln()) / WIRE_SPACING;
        total += Vec3::new(pre * sx, 0.0, pre * sz);
    }
    total
}

/// Central-difference gradient `∂_i B_j` of [`wire_field`] with step `h`.
pub fn field_gradient_fd(x: f64, z: f64, grid: &WireGrid, h: f64) -> Result<[[f64; 3]; 3]> {
    let diff = |dx: f64, dz: f64| -> Result<Vec3> {
        let f = |s: f64| wire_field(x + s * dx, z + s * dz, grid);
        // fourth-order stencil
        Ok((f(-2.0 * h)? - f(2.0 * h)? + (f(h)? - f(-h)?) * 8.0) / (12.0 * h))
    };
    let gx = diff(1.0, 0.0)?;
    let gz = diff(0.0, 1.0)?;
    Ok([
        [gx.x, gx.y, gx.z],
        [0.0, 0.0, 0.0],
        [gz.x, gz.y, gz.z],
    ])
}

/// Parameters of the wire-driven phase-gate coupling along the Z bonds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireDesign {
    pub units: ReducedUnits,
    pub g_factor: f64,
    /// `ω̄_Z` in rad/s.
    pub bare_frequency: f64,
    /// `h_w` in units of `d`.
    pub depth: f64,
    /// Nearest-neighbour coupling in reduced units.
    pub gamma_nn: f64,
}

impl Default for WireDesign {
    fn default() -> Self {
        WireDesign {
            units: ReducedUnits::beryllium(),
            g_factor: 1.0,
            bare_frequency: 2.0 * PI * 5e6,
            depth: DEFAULT_DEPTH,
            gamma_nn: (52.0 - 3.0 * 2f64.sqrt()) / 24.0,
        }
    }
}

/// Detuning unit `2π × 1 kHz` in rad/s.
pub const KHZ_DETUNING: f64 = 2.0 * PI * 1e3;

impl WireDesign {
    pub fn validate(&self) -> Result<()> {
        self.units.validate()?;
        if !(self.bare_frequency > 0.0 && self.depth > 0.0) {
            return Err(Error::Config("bare frequency and wire depth must be positive".into()));
        }
        Ok(())
    }

    /// Gradient magnitude `G` in T/m per ampere of blue current.
    pub fn gradient_per_amp(&self) -> f64 {
        let d = self.units.spacing;
        let s = (2.0 * PI * self.depth / 3f64.sqrt()).sinh();
        4.0 * PI * VACUUM_PERMEABILITY / (3.0 * d * d * s * s)
    }

    /// `J_Z` in joule for blue current `current` (A) and detuning `detuning` (rad/s).
    pub fn jz(&self, current: f64, detuning: f64) -> f64 {
        let u = &self.units;
        let q0 = (HBAR / (2.0 * u.mass * self.bare_frequency)).sqrt();
        let s = (2.0 * PI * self.depth / 3f64.sqrt()).sinh();
        let gamma_ratio = self.gamma_nn / ((52.0 - 3.0 * 2f64.sqrt()) / 24.0);
        let num = (q0 * self.g_factor * BOHR_MAGNETON * VACUUM_PERMEABILITY * u.charge * current).powi(2);
        let den = 4.0
            * PI
            * crate::units::VACUUM_PERMITTIVITY
            * u.mass
            * HBAR
            * self.bare_frequency
            * detuning
            * detuning
            * u.spacing.powi(7)
            * s.powi(4);
        gamma_ratio * PI * PI * (52.0 - 3.0 * 2f64.sqrt()) / 432.0 * num / den
    }

    /// `J_Z/h` in Hz at 1 A and `δ̄ = 2π × 1 kHz`.
    pub fn jz_coefficient_hz(&self) -> f64 {
        self.jz(1.0, KHZ_DETUNING) / PLANCK
    }

    /// `|J_Z/(ħδ̄)|` for blue current in A and detuning in units of `2π × 1 kHz`.
    pub fn entanglement_ratio(&self, current: f64, detuning_khz: f64) -> f64 {
        (self.jz(current, detuning_khz * KHZ_DETUNING) / (HBAR * detuning_khz * KHZ_DETUNING)).abs()
    }

    /// Largest blue current of one tone with `|J/(ħδ̄)| ≤ bound`.
    pub fn max_current(&self, detuning_khz: f64, bound: f64) -> f64 {
        (bound / self.entanglement_ratio(1.0, detuning_khz)).sqrt()
    }
}

/// `J_{X/Y}` from `J_Z` for π transitions given the projection factor
/// `q̄_{X/Y}(μ_d·Ẑ)/(q̄_Z gμ_B)` and the three tone currents.
pub fn jxy_from_jz(jz: f64, projection: f64, i_plus: f64, i_minus: f64, i_z: f64) -> f64 {
    jz * projection * projection * i_plus * i_minus / (i_z * i_z)
}

/// RMS current each blue wire carries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentBudget {
    /// Amplitude of each tone in A: Z, then X±, then Y±.
    pub tones: Vec<f64>,
    pub rms: f64,
}

/// Budget at the entanglement bound for detunings `[δ̄_X, δ̄_Y, δ̄_Z]` in units
/// of `2π × 1 kHz`. `scales[μ]` is `J_μ/J_Z` at equal tone currents.
pub fn rms_current_budget(
    design: &WireDesign,
    detunings_khz: [f64; 3],
    scales: [f64; 3],
    bound: f64,
) -> Result<CurrentBudget> {
    if detunings_khz.iter().any(|d| !(d.abs() > 0.0)) {
        return Err(Error::domain("rms_current_budget", "detunings must be nonzero"));
    }
    let mut tones = vec![design.max_current(detunings_khz[2], bound) / scales[2].sqrt()];
    for mu in 0..2 {
        let i = design.max_current(detunings_khz[mu], bound) / scales[mu].sqrt();
        tones.push(i);
        tones.push(i);
    }
    let rms = (tones.iter().map(|i| i * i / 2.0).sum::<f64>()).sqrt();
    Ok(CurrentBudget { tones, rms })
}

/// Power-law exponents of the miniaturisation argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    /// `J ∝ I^a ω̄^b d^c` at fixed `|J/(ħδ̄)|`.
    pub coupling_exponents: [f64; 3],
    /// Heat-limited current `I ∝ d^p`.
    pub current_exponent: f64,
    /// Stiff-limit frequency bound in rad/s at `d`.
    pub stiff_bound: f64,
    /// Exponents of the two lower bounds on `ω̄` in `d`.
    pub bound_exponents: [f64; 2],
    /// Resulting `J ∝ d^e` for each bound.
    pub composite_exponents: [f64; 2],
    /// Exponents of `J·d⁴` (coupling over anomalous heating rate).
    pub heating_merit_exponents: [f64; 2],
}

/// Evaluates the scaling chain for the ion and spacing in `units`.
pub fn scaling_bounds(units: &ReducedUnits, current_exponent: f64) -> ScalingReport {
    // J ∝ I² ω̄⁻² δ̄⁻² d⁻⁷ with J ∝ δ̄ gives δ̄ ∝ J ∝ I^{2/3} ω̄^{-2/3} d^{-7/3}
    let (a, b, c) = (2.0 / 3.0, -2.0 / 3.0, -7.0 / 3.0);
    // stiff: ω₀ ∝ ω̄⁻¹d⁻³ ≪ ω̄
    let stiff = -1.5;
    // expansion: ω̄⁻¹d⁻³ ≪ δ̄, i.e. ω̄^{-1-b} ≪ I^a d^{c+3}
    let expansion = (a * current_exponent + c + 3.0) / (-1.0 - b);
    let with_current = c + a * current_exponent;
    let composite = [with_current + b * stiff, with_current + b * expansion];
    let stiff_bound = units.frequency() / 2f64.sqrt();
    ScalingReport {
        coupling_exponents: [a, b, c],
        current_exponent,
        stiff_bound,
        bound_exponents: [stiff, expansion],
        composite_exponents: composite,
        heating_merit_exponents: [composite[0] + 4.0, composite[1] + 4.0],
    }
}

/// `J` ratio under rescaling of current, trap frequency and spacing.
pub fn coupling_scale_factor(current: f64, frequency: f64, spacing: f64) -> f64 {
    current.powf(2.0 / 3.0) * frequency.powf(-2.0 / 3.0) * spacing.powf(-7.0 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> WireGrid {
        WireGrid::nulled(DEFAULT_DEPTH, 1.0).unwrap()
    }

    #[test]
    fn null_at_ions() {
        let g = grid();
        for n in -3..=3 {
            let b = wire_field(n as f64 * WIRE_SPACING, g.depth, &g).unwrap();
            assert!(b.norm() < 1e-12, "{b:?}");
        }
        let r = null_current_ratio(DEFAULT_DEPTH).unwrap();
        assert!((r + PI.tanh().powi(2)).abs() < 1e-15);
        assert!((null_current_ratio(50.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(null_current_ratio(1e-9).unwrap().abs() < 1e-15);
    }

    #[test]
    fn biot_savart_agreement() {
        let g = WireGrid { depth: 0.7, blue: 1.0, red: -0.4 };
        for (x, z) in [(0.13, 0.7), (0.61, 0.35), (-1.9, 1.3), (0.2, 0.05)] {
            let a = wire_field(x, z, &g).unwrap();
            let b = biot_savart_field(x, z, &g, 2500);
            assert!((a - b).norm() < 1e-8 * a.norm(), "{a:?} {b:?}");
        }
    }

    #[test]
    fn gradient_matches_fd() {
        let g = grid();
        let want = null_gradient(g.depth, 1.0).unwrap();
        let got = field_gradient_fd(0.0, g.depth, &g, 1e-3).unwrap();
        let scale = want[0][2].abs();
        for i in 0..3 {
            for j in 0..3 {
                assert!((got[i][j] - want[i][j]).abs() < 1e-8 * scale, "{i}{j} {} {}", got[i][j], want[i][j]);
            }
        }
    }

    #[test]
    fn gradient_scaling_with_depth() {
        let u: f64 = 2.0 * PI * DEFAULT_DEPTH / 3f64.sqrt();
        let a = null_gradient(DEFAULT_DEPTH, 1.0).unwrap()[0][2];
        let b = null_gradient(2.0 * DEFAULT_DEPTH, 1.0).unwrap()[0][2];
        assert!((b / a - (u.sinh() / (2.0 * u).sinh()).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn on_wire_rejected() {
        let g = grid();
        assert!(wire_field(0.0, 0.0, &g).is_err());
        assert!(wire_field(0.5 * WIRE_SPACING, 0.0, &g).is_err());
    }

    #[test]
    fn design_point_numbers() {
        let d = WireDesign::default();
        let c = d.jz_coefficient_hz();
        assert!((c / 7.6e3 - 1.0).abs() < 0.02, "{c}");
        // closed form against (m·s)² γ/(16Mω̄²δ̄²) with m·s = gμ_B G/2
        let u = d.units;
        let ms = 0.5 * d.g_factor * BOHR_MAGNETON * d.gradient_per_amp();
        let gamma = d.gamma_nn * u.frequency().powi(2);
        let j = gamma * ms * ms / (16.0 * u.mass * d.bare_frequency.powi(2) * KHZ_DETUNING.powi(2));
        assert!((j / d.jz(1.0, KHZ_DETUNING) - 1.0).abs() < 1e-12);
        let r = d.entanglement_ratio(1.0, 1.0);
        assert!((r / 7.6 - 1.0).abs() < 0.02);
        assert!((d.entanglement_ratio(2.0, 1.0) / r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn current_budget() {
        let d = WireDesign::default();
        let b = rms_current_budget(&d, [1.0; 3], [1.0; 3], 1.0).unwrap();
        assert_eq!(b.tones.len(), 5);
        assert!((b.rms / (2.5f64.sqrt() * 0.36) - 1.0).abs() < 0.02, "{}", b.rms);
        assert!((b.tones[0] / 0.36 - 1.0).abs() < 0.02);
        let b4 = rms_current_budget(&d, [4.0; 3], [1.0; 3], 1.0).unwrap();
        assert!((b4.rms / b.rms - 8.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_exponents() {
        let r = scaling_bounds(&ReducedUnits::beryllium(), 1.5);
        assert!((r.bound_exponents[1] + 5.0).abs() < 1e-12);
        assert!((r.composite_exponents[0] + 1.0 / 3.0).abs() < 1e-12);
        assert!((r.composite_exponents[1] - 2.0).abs() < 1e-12);
        assert!((coupling_scale_factor(1.0, 1.0, 0.5) - 2f64.powf(7.0 / 3.0)).abs() < 1e-12);
        assert!((r.stiff_bound / 5.35e5 - 1.0).abs() < 0.01, "{}", r.stiff_bound);
    }

    #[test]
    fn xy_scaling() {
        assert!((jxy_from_jz(2.0, 0.5, 3.0, 1.0, 1.5) - 2.0 * 0.25 * 3.0 / 2.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn periodic_in_x(x in -2.0..2.0f64, z in 0.1..2.0f64) {
            let g = WireGrid { depth: 0.8, blue: 1.0, red: 0.3 };
            let a = wire_field(x, z, &g).unwrap();
            let b = wire_field(x + WIRE_SPACING, z, &g).unwrap();
            prop_assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        }

        #[test]
        fn divergence_and_curl_free(x in -1.0..1.0f64, z in 0.2..1.5f64) {
            let g = WireGrid { depth: 0.8, blue: 1.0, red: -0.6 };
            let grad = field_gradient_fd(x, z, &g, 1e-3).unwrap();
            let scale = grad.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
            prop_assert!((grad[0][0] + grad[2][2]).abs() < 1e-7 * scale);
            prop_assert!((grad[2][0] - grad[0][2]).abs() < 1e-7 * scale);
        }

        #[test]
        fn bx_odd_in_z(x in -1.0..1.0f64, z in 0.1..1.5f64) {
            let g = WireGrid { depth: 0.8, blue: 1.0, red: 0.0 };
            let a = wire_field(x, z, &g).unwrap();
            let b = wire_field(x, -z, &g).unwrap();
            prop_assert!((a.x + b.x).abs() < 1e-12 * (1.0 + a.x.abs()));
        }

        #[test]
        fn gradient_decreases_with_depth(h in 0.1..3.0f64) {
            let a = null_gradient(h, 1.0).unwrap()[0][2];
            let b = null_gradient(h * 1.01, 1.0).unwrap()[0][2];
            prop_assert!(b < a);
        }
    }
}
