//! Effective spin–spin couplings mediated by state-dependent forces.
//!
//! All quantities are in reduced units with `M = 1`: forces `f = m·s` in units
//! of `Mω_c²d`, couplings `J` in units of `Mω_c²d²`. Detunings follow
//! `δ_m = ω_m − ω_I` and `δ̄ = ω̄ − ω_I`. The effective Hamiltonian is
//! `Σ_{i,j} J_ij σ^i σ^j` over ordered pairs, so each bond appears twice.

use crate::error::{Error, Result};
use crate::geometry::{rotate_z, site_position, Family, LatticeSpec, SiteIndex, Sublattice, Vec3};
use crate::phonons::{bloch_bands, CouplingSet, CouplingTensor, KGrid, NormalModes, Patch};
use crate::units::ReducedUnits;
use crate::wires::{null_gradient, WireDesign, WIRE_SPACING};
use crate::units::VACUUM_PERMEABILITY;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Scale factors between the reduced and SI layers of a drive.
pub type MotionalScale = ReducedUnits;

/// Mechanism that produces the spin–spin term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    /// `σ_Zσ_Z` from a drive near `ω̄_μ`.
    PhaseGate,
    /// `σ_Xσ_X` or `σ_Yσ_Y` from a pair near `ω_↑↓ ± ω̄_μ`.
    MolmerSorensen,
}

/// Phase and amplitude applied to one site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteDrive {
    pub site: SiteIndex,
    pub phase: f64,
    pub amplitude: f64,
}

/// Spatial pattern of drive phases and amplitudes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulation {
    #[default]
    Uniform,
    /// Repeating pattern over the wires at `x = n·d_w`.
    PerWire { phases: Vec<f64>, amplitudes: Vec<f64> },
    /// Explicit sites; unlisted sites get phase 0 and amplitude 1.
    PerSite { sites: Vec<SiteDrive> },
}

/// Inputs of one state-dependent force.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    /// Target vibration family μ.
    pub family: Family,
    pub kind: DriveKind,
    /// `δ̄ = ω̄_μ − ω_I`.
    pub detuning: f64,
    /// Sideband vector `s` on ∘ and • sites.
    pub sideband: [[f64; 3]; 2],
    /// Carrier magnitudes `c` on ∘ and • sites.
    #[serde(default)]
    pub carrier: [f64; 2],
    #[serde(default)]
    pub modulation: Modulation,
    /// Pseudo-spin splitting `ω_↑↓`, free input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_splitting: Option<f64>,
    /// Basis phase χ of `|±⟩`; metadata only.
    #[serde(default)]
    pub basis_phase: f64,
}

impl DriveSpec {
    /// Same sideband vector on every site.
    pub fn uniform(family: Family, kind: DriveKind, detuning: f64, sideband: Vec3) -> Self {
        let s = [sideband.x, sideband.y, sideband.z];
        DriveSpec {
            family,
            kind,
            detuning,
            sideband: [s, s],
            carrier: [0.0; 2],
            modulation: Modulation::Uniform,
            spin_splitting: None,
            basis_phase: 0.0,
        }
    }

    pub fn with_modulation(mut self, modulation: Modulation) -> Self {
        self.modulation = modulation;
        self
    }

    pub fn drive_frequency(&self, bare: f64) -> f64 {
        bare - self.detuning
    }

    pub fn sideband_vector(&self, sub: Sublattice) -> Vec3 {
        Vec3::from(self.sideband[sub.index()])
    }

    /// `(φ_s, amplitude)` at a site.
    pub fn site_factor(&self, spec: &LatticeSpec, site: SiteIndex) -> (f64, f64) {
        match &self.modulation {
            Modulation::Uniform => (0.0, 1.0),
            Modulation::PerWire { phases, amplitudes } => {
                let x = site_position(site, spec).x;
                let n = (x / WIRE_SPACING).round() as i64;
                let pick = |v: &Vec<f64>, default: f64| {
                    if v.is_empty() {
                        default
                    } else {
                        v[n.rem_euclid(v.len() as i64) as usize]
                    }
                };
                (pick(phases, 0.0), pick(amplitudes, 1.0))
            }
            Modulation::PerSite { sites } => sites
                .iter()
                .find(|s| s.site == site)
                .map(|s| (s.phase, s.amplitude))
                .unwrap_or((0.0, 1.0)),
        }
    }

    /// Projection `m_i^ν · s^{(i)}` including the site amplitude.
    pub fn force(&self, spec: &LatticeSpec, site: SiteIndex, family: Family) -> f64 {
        let (_, amp) = self.site_factor(spec, site);
        let m = spec.axis(site.sub, family);
        amp * m.dot(&self.sideband_vector(site.sub))
    }
}

/// Carrier and sideband coefficients for `ℓ = 0, X, Y, Z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SidebandTable {
    pub carrier: [f64; 4],
    pub sideband: [[f64; 3]; 4],
}

/// Coefficients of a magnetic-dipole coupling with moment `g μ_B`.
///
/// `gradient[i][j] = ∂_i B_j`; `frame` is `(X̂, Ŷ, Ẑ)`.
pub fn magnetic_sideband_vectors(
    field: Vec3,
    gradient: [[f64; 3]; 3],
    moment: f64,
    frame: [Vec3; 3],
) -> SidebandTable {
    let mut carrier = [0.0; 4];
    let mut sideband = [[0.0; 3]; 4];
    for (l, axis) in frame.iter().enumerate() {
        carrier[l + 1] = -moment * axis.dot(&field);
        for i in 0..3 {
            let d: f64 = (0..3).map(|j| gradient[i][j] * axis[j]).sum();
            sideband[l + 1][i] = -moment * d;
        }
    }
    SidebandTable { carrier, sideband }
}

/// Quantisation frame with `Ẑ = Δ_Z/d`.
pub fn bond_frame(spec: &LatticeSpec) -> [Vec3; 3] {
    let z = spec.bonds().z.normalize();
    let y = Vec3::z();
    let x = y.cross(&z);
    [x, y, z]
}

/// Uniform phase-gate drive from the wire grid at the null ratio.
///
/// `projection` scales the force for Mølmer–Sørensen drives
/// (`|μ_d·Ẑ|/(gμ_B)` times the geometric mean of the tone ratios); use 1 for Z.
pub fn wire_drive(
    spec: &LatticeSpec,
    design: &WireDesign,
    family: Family,
    current: f64,
    detuning: f64,
    projection: f64,
) -> Result<DriveSpec> {
    design.validate()?;
    let d = design.units.spacing;
    let mut grad = null_gradient(design.depth, current)?;
    for row in &mut grad {
        for v in row.iter_mut() {
            *v *= VACUUM_PERMEABILITY / (d * d);
        }
    }
    let moment = design.g_factor * crate::units::BOHR_MAGNETON;
    let table = magnetic_sideband_vectors(Vec3::zeros(), grad, moment, bond_frame(spec));
    let s = Vec3::from(table.sideband[3]) * (projection / design.units.force());
    let kind = if family == Family::Z {
        DriveKind::PhaseGate
    } else {
        DriveKind::MolmerSorensen
    };
    Ok(DriveSpec::uniform(family, kind, detuning, s))
}

/// Validity diagnostics attached to a coupling matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JDiagnostics {
    /// `|δ̄|/ω̄`; the expansions need this small.
    pub detuning_ratio: f64,
    pub detuning_flag: bool,
    /// Half of the active band spread over `|δ̄|`.
    pub spread_ratio: Option<f64>,
    /// Relative change of `J` when all bands are included.
    pub leakage: Option<f64>,
}

/// `J_ij` on a list of sites; diagonal terms are kept apart.
#[derive(Clone, Debug)]
pub struct JMatrix {
    pub family: Family,
    pub sites: Vec<SiteIndex>,
    /// Off-diagonal couplings; the diagonal is zero.
    pub values: DMatrix<f64>,
    /// `J_ii`, a global phase.
    pub self_terms: Vec<f64>,
    pub diagnostics: JDiagnostics,
}

impl JMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Couplings in joule.
    pub fn to_si(&self, units: &ReducedUnits) -> DMatrix<f64> {
        &self.values * units.energy()
    }

    pub fn symmetry_error(&self) -> f64 {
        (&self.values - self.values.transpose()).amax()
    }
}

fn check_detuning(op: &'static str, detuning: f64) -> Result<()> {
    if !(detuning.abs() > 0.0) || !detuning.is_finite() {
        return Err(Error::domain(op, "detuning must be finite and nonzero"));
    }
    Ok(())
}

/// `γ cos φ f_i f_j / (16 ω̄² δ̄²)` for one pair.
pub fn j_pair(gamma: f64, dphi: f64, fi: f64, fj: f64, bare: f64, detuning: f64) -> f64 {
    gamma * dphi.cos() * fi * fj / (16.0 * bare * bare * detuning * detuning)
}

fn base_diagnostics(bare: f64, detuning: f64) -> JDiagnostics {
    let r = detuning.abs() / bare;
    JDiagnostics {
        detuning_ratio: r,
        detuning_flag: r > 0.1,
        ..Default::default()
    }
}

/// Lowest-order couplings on the sites of `patch`.
pub fn j_perturbative(
    tensor: &CouplingTensor,
    drive: &DriveSpec,
    bare: f64,
    patch: Patch,
) -> Result<JMatrix> {
    check_detuning("j_perturbative", drive.detuning)?;
    if tensor.families != (drive.family, drive.family) {
        return Err(Error::domain("j_perturbative", "tensor family does not match the drive"));
    }
    let spec = &tensor.lattice;
    let sites = patch.sites();
    let n = sites.len();
    let info: Vec<(f64, f64)> = sites
        .iter()
        .map(|s| (drive.site_factor(spec, *s).0, drive.force(spec, *s, drive.family)))
        .collect();
    let mut values = DMatrix::<f64>::zeros(n, n);
    for (i, site) in sites.iter().enumerate() {
        for e in tensor.entries.iter().filter(|e| e.source == site.sub) {
            let target = e.target.shifted(site.na, site.nb);
            let Some(j) = patch.position_of(target) else { continue };
            if j == i {
                continue;
            }
            let (pi, fi) = info[i];
            let (pj, fj) = info[j];
            values[(i, j)] += j_pair(e.value, pi - pj, fi, fj, bare, drive.detuning);
        }
    }
    Ok(JMatrix {
        family: drive.family,
        sites,
        values,
        self_terms: vec![0.0; n],
        diagnostics: base_diagnostics(bare, drive.detuning),
    })
}

/// Per-mode factor multiplying `F_im F_jm` in the mode sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKernel {
    /// `1/(8 ω_m δ_m)`.
    Exact,
    /// `(1/(8ω̄)) [1/δ̄ − (ω_m² − ω̄²)/(2ω̄δ̄²)]`, the first-order series with `q_0m = q̄`.
    FirstOrderSeries,
}

/// Which modes enter the sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSelection {
    /// Modes whose weight lies mostly on the drive family.
    Active,
    All,
}

/// `F_im = Σ_ν O_{iνm} f_{iν}` for every site and mode.
fn mode_forces(modes: &NormalModes, drive: &DriveSpec, spec: &LatticeSpec) -> DMatrix<f64> {
    let n = modes.sites.len();
    let nm = modes.omega.len();
    let mut out = DMatrix::<f64>::zeros(n, nm);
    for (i, site) in modes.sites.iter().enumerate() {
        let f: Vec<f64> = modes.families.iter().map(|fam| drive.force(spec, *site, *fam)).collect();
        for m in 0..nm {
            out[(i, m)] = (0..f.len()).map(|k| modes.o(i, k, m) * f[k]).sum();
        }
    }
    out
}

fn bare_of(modes: &NormalModes, family: Family) -> Result<f64> {
    let k = modes
        .families
        .iter()
        .position(|f| *f == family)
        .ok_or_else(|| Error::domain("j_exact_modesum", "drive family not present in the modes"))?;
    Ok(modes.bare[k])
}

/// `J_ij = −cos φ_ij Σ_m F_im F_jm K_m` over the selected modes.
pub fn j_exact_modesum(
    modes: &NormalModes,
    drive: &DriveSpec,
    spec: &LatticeSpec,
    kernel: ModeKernel,
    selection: ModeSelection,
) -> Result<JMatrix> {
    check_detuning("j_exact_modesum", drive.detuning)?;
    let bare = bare_of(modes, drive.family)?;
    let w_drive = drive.drive_frequency(bare);
    let forces = mode_forces(modes, drive, spec);
    let n = modes.sites.len();
    let mut weights = Vec::with_capacity(modes.omega.len());
    for (m, &w) in modes.omega.iter().enumerate() {
        let active = selection == ModeSelection::All || modes.mode_family(m) == drive.family;
        if !active {
            weights.push(0.0);
            continue;
        }
        let k = match kernel {
            ModeKernel::Exact => {
                let delta = w - w_drive;
                if delta.abs() <= 1e-14 * w {
                    return Err(Error::Resonance {
                        op: "j_exact_modesum",
                        mode: m,
                    });
                }
                1.0 / (8.0 * w * delta)
            }
            ModeKernel::FirstOrderSeries => {
                let x = w * w - bare * bare;
                let d = drive.detuning;
                (1.0 / d - x / (2.0 * bare * d * d)) / (8.0 * bare)
            }
        };
        weights.push(k);
    }
    let phases: Vec<f64> = modes.sites.iter().map(|s| drive.site_factor(spec, *s).0).collect();
    let mut values = DMatrix::<f64>::zeros(n, n);
    let mut self_terms = vec![0.0; n];
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..weights.len()).map(|m| forces[(i, m)] * forces[(j, m)] * weights[m]).sum();
            let v = -(phases[i] - phases[j]).cos() * s;
            if i == j {
                self_terms[i] = v;
            } else {
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
    }
    let active: Vec<f64> = modes
        .omega
        .iter()
        .enumerate()
        .filter(|(m, _)| modes.mode_family(*m) == drive.family)
        .map(|(_, w)| *w)
        .collect();
    let mut diagnostics = base_diagnostics(bare, drive.detuning);
    if let (Some(lo), Some(hi)) = (
        active.iter().cloned().reduce(f64::min),
        active.iter().cloned().reduce(f64::max),
    ) {
        diagnostics.spread_ratio = Some(0.5 * (hi - lo) / drive.detuning.abs());
    }
    Ok(JMatrix {
        family: drive.family,
        sites: modes.sites.clone(),
        values,
        self_terms,
        diagnostics,
    })
}

/// Active-band result with the leakage from all other bands recorded.
pub fn j_exact_with_leakage(
    modes: &NormalModes,
    drive: &DriveSpec,
    spec: &LatticeSpec,
) -> Result<(JMatrix, JMatrix)> {
    let mut active = j_exact_modesum(modes, drive, spec, ModeKernel::Exact, ModeSelection::Active)?;
    let all = j_exact_modesum(modes, drive, spec, ModeKernel::Exact, ModeSelection::All)?;
    let scale = active.values.amax();
    let leak = (&all.values - &active.values).amax();
    active.diagnostics.leakage = Some(if scale > 0.0 { leak / scale } else { f64::INFINITY });
    Ok((active, all))
}

/// Relative size of the terms dropped by the first-order series for a pair
/// with coupling `gamma`, given the active-band frequencies.
///
/// Includes the `q_0m ≈ q̄` replacement (relative `δ̄/ω̄`) and the second-order
/// term of the `1/(ω_m δ_m)` expansion with `(ω_m² − ω̄²)²` bounded by its maximum.
pub fn next_order_estimate(active_omega: &[f64], bare: f64, detuning: f64, gamma: f64) -> f64 {
    let (w, d) = (bare, detuning);
    let x2 = active_omega
        .iter()
        .map(|o| (o * o - w * w).powi(2))
        .fold(0.0, f64::max);
    let quad = ((1.0 / w + 1.0 / d) / (8.0 * w.powi(3))
        + (1.0 / (w * w) + 1.0 / (w * d) + 1.0 / (d * d)) / (4.0 * w * w))
        / (w * d);
    let first = gamma.abs() / (2.0 * w * w * d * d);
    (d / w).abs() + quad.abs() * x2 / first
}

/// `(δ t − sin δ t)/δ²`, the pair phase accumulated by mode detuning `δ`.
pub fn phase_factor(delta: f64, t: f64) -> f64 {
    let x = delta * t;
    if x.abs() < 1e-4 {
        // series avoids cancellation
        return delta * t.powi(3) / 6.0 * (1.0 - x * x / 20.0);
    }
    (x - x.sin()) / (delta * delta)
}

/// Coherent displacements left in the modes at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Displacements {
    /// Worst-case `Σ_i |Ω_im| |1 − e^{iδ_m t}|/|δ_m|` per mode.
    pub per_mode: Vec<f64>,
    /// Condition (A): `max_{i,m} |Ω_im/δ_m|`.
    pub max_omega_over_delta: f64,
}

/// Displacement magnitudes with `ħ` in reduced units (see [`ReducedUnits::hbar`]).
pub fn displacement_amplitudes(
    modes: &NormalModes,
    drive: &DriveSpec,
    spec: &LatticeSpec,
    t: f64,
    hbar: f64,
) -> Result<Displacements> {
    check_detuning("displacement_amplitudes", drive.detuning)?;
    let bare = bare_of(modes, drive.family)?;
    let w_drive = drive.drive_frequency(bare);
    let forces = mode_forces(modes, drive, spec);
    let mut per_mode = Vec::with_capacity(modes.omega.len());
    let mut worst: f64 = 0.0;
    for (m, &w) in modes.omega.iter().enumerate() {
        let delta = w - w_drive;
        if delta.abs() <= 1e-14 * w {
            return Err(Error::Resonance {
                op: "displacement_amplitudes",
                mode: m,
            });
        }
        let loop_factor = 2.0 * (0.5 * delta * t).sin().abs();
        let mut total = 0.0;
        for i in 0..modes.sites.len() {
            let omega = forces[(i, m)] / (2.0 * (2.0 * w * hbar).sqrt());
            worst = worst.max((omega / delta).abs());
            total += omega.abs() * loop_factor / delta.abs();
        }
        per_mode.push(total);
    }
    Ok(Displacements {
        per_mode,
        max_omega_over_delta: worst,
    })
}

/// `|J/(ħδ̄)|` against the bound 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementCheck {
    pub ratio: f64,
    pub pass: bool,
    /// The ratio sits on the bound within 1e-9.
    pub boundary: bool,
}

pub fn entanglement_bound_check(j: f64, detuning: f64, hbar: f64) -> EntanglementCheck {
    let ratio = (j / (hbar * detuning)).abs();
    EntanglementCheck {
        ratio,
        pass: ratio < 1.0,
        boundary: (ratio - 1.0).abs() <= 1e-9,
    }
}

/// Design-point form `7.6 × I²/δ̃³` evaluated from the wire design.
pub fn entanglement_closed_form(design: &WireDesign, current: f64, detuning_khz: f64) -> EntanglementCheck {
    let ratio = design.entanglement_ratio(current, detuning_khz);
    EntanglementCheck {
        ratio,
        pass: ratio < 1.0,
        boundary: (ratio - 1.0).abs() <= 1e-9,
    }
}

/// One coupling of the effective Hamiltonian, from a home-cell site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KitaevCoefficient {
    pub source: Sublattice,
    pub target: SiteIndex,
    pub separation: [f64; 3],
    pub j: f64,
    /// `J/J_nn`.
    pub relative: f64,
}

/// Couplings generated by one drive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KitaevFamilyTable {
    pub family: Family,
    pub bare_frequency: f64,
    pub detuning: f64,
    pub drive_frequency: f64,
    /// `J` on the family's own nearest-neighbour bond from the ∘ site.
    pub nn: f64,
    pub entries: Vec<KitaevCoefficient>,
}

impl KitaevFamilyTable {
    pub fn at_separation(&self, source: Sublattice, sep: Vec3) -> Option<&KitaevCoefficient> {
        self.entries
            .iter()
            .find(|e| e.source == source && (Vec3::from(e.separation) - sep).norm() < 1e-9)
    }
}

/// Coefficient tables of `H' = −J_X H_X − J_Y H_Y − J_Z H_Z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KitaevTable {
    pub families: Vec<KitaevFamilyTable>,
}

impl KitaevTable {
    pub fn family(&self, f: Family) -> Option<&KitaevFamilyTable> {
        self.families.iter().find(|t| t.family == f)
    }

    /// Largest mismatch of relative coefficients between a family table and
    /// the next family's table at separations rotated by 120°.
    pub fn rotation_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for t in &self.families {
            let Some(next) = self.family(t.family.next()) else { continue };
            for e in &t.entries {
                let rot = rotate_z(Vec3::from(e.separation), -2.0 * std::f64::consts::PI / 3.0);
                match next.at_separation(e.source, rot) {
                    Some(o) => worst = worst.max((o.relative - e.relative).abs()),
                    None => worst = f64::INFINITY,
                }
            }
        }
        worst
    }
}

/// Minimum drive-to-band separation in units of `|δ̄|` for mutually off-resonant drives.
pub const DEFAULT_COLLISION_FACTOR: f64 = 10.0;

/// Effective Hamiltonian coefficients for three simultaneous drives.
///
/// Band edges come from `bands` when given, otherwise from a 24×24 Bloch grid.
pub fn kitaev_effective_hamiltonian(
    set: &CouplingSet,
    drives: &[DriveSpec],
    bare: [f64; 3],
    bands: Option<[(f64, f64); 3]>,
    collision_factor: f64,
) -> Result<KitaevTable> {
    let mut edges = [(0.0, 0.0); 3];
    for fam in Family::ALL {
        let t = set
            .get(fam, fam)
            .ok_or_else(|| Error::domain("kitaev_effective_hamiltonian", format!("missing tensor for {fam}")))?;
        edges[fam.index()] = match bands {
            Some(b) => b[fam.index()],
            None => {
                let bs = bloch_bands(t, bare[fam.index()], KGrid::new(24, 24))?;
                let e = bs.band_edges();
                (e[0].0, e[1].1)
            }
        };
    }
    for d in drives {
        check_detuning("kitaev_effective_hamiltonian", d.detuning)?;
        let w_i = d.drive_frequency(bare[d.family.index()]);
        for nu in Family::ALL.into_iter().filter(|nu| *nu != d.family) {
            let (lo, hi) = edges[nu.index()];
            let dist = if w_i >= lo && w_i <= hi {
                0.0
            } else {
                (w_i - lo).abs().min((w_i - hi).abs())
            };
            let limit = collision_factor * d.detuning.abs();
            if dist <= limit {
                return Err(Error::Config(format!(
                    "drive collision: {} drive at ω_I = {w_i:.6} lies within {limit:.3e} of the {nu} band [{lo:.6}, {hi:.6}]",
                    d.family
                )));
            }
        }
    }
    let mut families = Vec::new();
    for d in drives {
        let t = set.get(d.family, d.family).unwrap();
        let spec = &t.lattice;
        let w = bare[d.family.index()];
        let mut entries = Vec::new();
        for e in &t.entries {
            let src = SiteIndex::new(0, 0, e.source);
            let (pi, _) = d.site_factor(spec, src);
            let (pj, _) = d.site_factor(spec, e.target);
            let fi = d.force(spec, src, d.family);
            let fj = d.force(spec, e.target, d.family);
            entries.push(KitaevCoefficient {
                source: e.source,
                target: e.target,
                separation: e.separation,
                j: j_pair(e.value, pi - pj, fi, fj, w, d.detuning),
                relative: 0.0,
            });
        }
        let bond = spec.bonds().get(d.family);
        let nn = entries
            .iter()
            .find(|e| e.source == Sublattice::Hollow && (Vec3::from(e.separation) - bond).norm() < 1e-9)
            .map(|e| e.j)
            .unwrap_or(0.0);
        for e in &mut entries {
            e.relative = if nn != 0.0 { e.j / nn } else { f64::NAN };
        }
        families.push(KitaevFamilyTable {
            family: d.family,
            bare_frequency: w,
            detuning: d.detuning,
            drive_frequency: d.drive_frequency(w),
            nn,
            entries,
        });
    }
    Ok(KitaevTable { families })
}

/// Uniform drives along `ẑ` with the given detunings, for quick tables.
pub fn uniform_drives(detunings: [f64; 3], force: f64) -> Vec<DriveSpec> {
    Family::ALL
        .iter()
        .map(|&f| {
            let kind = if f == Family::Z { DriveKind::PhaseGate } else { DriveKind::MolmerSorensen };
            DriveSpec::uniform(f, kind, detunings[f.index()], Vec3::z() * force)
        })
        .collect()
}

/// Per-site drive factors collected for reporting.
pub fn site_factors(drive: &DriveSpec, spec: &LatticeSpec, sites: &[SiteIndex]) -> HashMap<SiteIndex, (f64, f64)> {
    sites.iter().map(|s| (*s, drive.site_factor(spec, *s))).collect()
}
