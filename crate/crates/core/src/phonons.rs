//! Coulomb coupling tensors, Bloch bands and finite-lattice normal modes.
//!
//! Frequencies are in reduced units where `Q²/(4πε₀Md³) = 1`, so `γ` has
//! units of frequency squared. For a family with bare frequency `ω̄` the band
//! scale is `ω₀ = 1/(2ω̄)`, and a Bloch eigenvalue `λ` shifts the mode to
//! `√(ω̄² + λ)`.

use crate::dipole::dipdip_cover;
use crate::electrostatics::GreensEnv;
use crate::error::{Error, Result};
use crate::geometry::{neighbors, site_position, Family, LatticeSpec, SiteIndex, Sublattice, Vec3};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Default coupling cutoff radius.
pub const DEFAULT_CUTOFF: f64 = 8.0;

/// Default bound on the number of sites in a finite patch.
pub const DEFAULT_MAX_SITES: usize = 2000;

/// One coupling from a site in the home cell to a neighbour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub source: Sublattice,
    /// Target site relative to the source's cell.
    pub target: SiteIndex,
    /// `R_target − R_source`.
    pub separation: [f64; 3],
    pub value: f64,
}

impl CouplingEntry {
    pub fn separation(&self) -> Vec3 {
        Vec3::from(self.separation)
    }

    pub fn distance(&self) -> f64 {
        self.separation().norm()
    }
}

/// `γ^{μν}` for all pairs within a cutoff, from both sublattices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingTensor {
    pub lattice: LatticeSpec,
    /// `(μ, ν)`: vibration family on the source and on the target.
    pub families: (Family, Family),
    pub cutoff: f64,
    pub entries: Vec<CouplingEntry>,
}

/// Couplings for family pair `(μ, ν)` on the lattice `spec`.
///
/// The planes come from `env`; pass `GreensEnv::from_cover(spec.cover_height)`
/// to follow the lattice specification.
pub fn assemble_gamma(
    spec: &LatticeSpec,
    families: (Family, Family),
    cutoff: f64,
    env: &GreensEnv,
) -> Result<CouplingTensor> {
    if !(cutoff >= 1.0) {
        return Err(Error::domain("assemble_gamma", format!("cutoff must be >= 1, got {cutoff}")));
    }
    spec.validate()?;
    let (mu, nu) = families;
    let mut entries = Vec::new();
    for source in Sublattice::ALL {
        let idx = SiteIndex::new(0, 0, source);
        let r = site_position(idx, spec);
        let m = spec.axis(source, mu);
        let list = neighbors(idx, spec, cutoff);
        let values: Result<Vec<f64>> = list
            .par_iter()
            .map(|(t, sep)| dipdip_cover(r, m, r + sep, spec.axis(t.sub, nu), env))
            .collect();
        for ((t, sep), value) in list.iter().zip(values?) {
            entries.push(CouplingEntry {
                source,
                target: *t,
                separation: [sep.x, sep.y, sep.z],
                value,
            });
        }
    }
    Ok(CouplingTensor {
        lattice: spec.clone(),
        families,
        cutoff,
        entries,
    })
}

impl CouplingTensor {
    /// Coupling from `source` in the home cell to `target`, if within cutoff.
    pub fn get(&self, source: Sublattice, target: SiteIndex) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.source == source && e.target == target)
            .map(|e| e.value)
    }

    /// Coupling from `source` to the site at separation `sep`.
    pub fn at_separation(&self, source: Sublattice, sep: Vec3) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.source == source && (e.separation() - sep).norm() < 1e-9)
            .map(|e| e.value)
    }

    /// The nearest-neighbour coupling along the family's own bond.
    pub fn dominant(&self) -> f64 {
        let bond = self.lattice.bonds().get(self.families.0);
        self.at_separation(Sublattice::Hollow, bond).unwrap_or(0.0)
    }

    /// Entries from one sublattice sorted by distance, with the value
    /// relative to the dominant coupling.
    pub fn table(&self, source: Sublattice) -> Vec<(CouplingEntry, f64)> {
        let dom = self.dominant();
        self.entries
            .iter()
            .filter(|e| e.source == source)
            .map(|e| (*e, if dom != 0.0 { e.value / dom } else { f64::NAN }))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.value.abs()).fold(0.0, f64::max)
    }

    /// Same tensor with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.value *= factor;
        }
        out
    }

    fn is_diagonal(&self) -> bool {
        self.families.0 == self.families.1
    }
}

/// Tensors for several family pairs on the same lattice.
#[derive(Clone, Debug, Default)]
pub struct CouplingSet {
    tensors: HashMap<(Family, Family), CouplingTensor>,
}

impl CouplingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(tensor: CouplingTensor) -> Self {
        let mut set = Self::new();
        set.insert(tensor);
        set
    }

    pub fn insert(&mut self, tensor: CouplingTensor) {
        self.tensors.insert(tensor.families, tensor);
    }

    /// All nine family pairs (or only the three diagonal ones).
    pub fn assemble(
        spec: &LatticeSpec,
        cutoff: f64,
        env: &GreensEnv,
        include_cross: bool,
    ) -> Result<Self> {
        let mut set = Self::new();
        for mu in Family::ALL {
            for nu in Family::ALL {
                if mu == nu || include_cross {
                    set.insert(assemble_gamma(spec, (mu, nu), cutoff, env)?);
                }
            }
        }
        Ok(set)
    }

    pub fn get(&self, mu: Family, nu: Family) -> Option<&CouplingTensor> {
        self.tensors.get(&(mu, nu))
    }

    pub fn iter(&self) -> impl Iterator<Item = &CouplingTensor> {
        self.tensors.values()
    }
}

/// Γ-centred uniform grid on the reciprocal cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGrid {
    pub n1: usize,
    pub n2: usize,
}

impl Default for KGrid {
    fn default() -> Self {
        KGrid { n1: 96, n2: 96 }
    }
}

impl KGrid {
    pub fn new(n1: usize, n2: usize) -> Self {
        KGrid { n1, n2 }
    }

    pub fn points(&self, spec: &LatticeSpec) -> Vec<[f64; 2]> {
        let (ga, gb) = spec.reciprocal();
        let mut out = Vec::with_capacity(self.n1 * self.n2);
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                let (u, v) = (i as f64 / self.n1 as f64, j as f64 / self.n2 as f64);
                out.push([u * ga[0] + v * gb[0], u * ga[1] + v * gb[1]]);
            }
        }
        out
    }
}

/// 2×2 Bloch sum of a within-family tensor; index 0 is ∘, 1 is •.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochMatrix {
    pub k: [f64; 2],
    pub m: [[Complex64; 2]; 2],
}

impl BlochMatrix {
    /// Largest deviation from hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for s in 0..2 {
            for t in 0..2 {
                e = e.max((self.m[s][t] - self.m[t][s].conj()).norm());
            }
        }
        e
    }

    /// Eigenvalues (ascending) and unit eigenvectors `(u∘, u•)`.
    pub fn eigen(&self) -> ([f64; 2], [[Complex64; 2]; 2]) {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = self.m[0][1];
        let mean = 0.5 * (a + d);
        let half = 0.5 * (a - d);
        let r = (half * half + b.norm_sqr()).sqrt();
        let vals = [mean - r, mean + r];
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if r < 1e-300 {
            return (vals, [[one, zero], [zero, one]]);
        }
        let vecs = vals.map(|lam| {
            // either row of (M − λ) gives a null vector; keep the better conditioned one
            let v1 = [b, Complex64::new(lam - a, 0.0)];
            let v2 = [Complex64::new(lam - d, 0.0), b.conj()];
            let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
            let n2 = (v2[0].norm_sqr() + v2[1].norm_sqr()).sqrt();
            if n1 >= n2 {
                [v1[0] / n1, v1[1] / n1]
            } else {
                [v2[0] / n2, v2[1] / n2]
            }
        });
        (vals, vecs)
    }
}

/// `M_st(k) = Σ_R γ_st(R) e^{ik·(R + τ_t − τ_s)}` for a within-family tensor.
pub fn bloch_matrix(tensor: &CouplingTensor, k: [f64; 2]) -> Result<BlochMatrix> {
    if !tensor.is_diagonal() {
        return Err(Error::domain(
            "bloch_matrix",
            "Bloch bands are defined for within-family tensors only",
        ));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[zero; 2]; 2];
    for e in &tensor.entries {
        let phase = k[0] * e.separation[0] + k[1] * e.separation[1];
        m[e.source.index()][e.target.sub.index()] += Complex64::from_polar(e.value, phase);
    }
    let bm = BlochMatrix { k, m };
    let err = bm.hermiticity_error();
    let scale = tensor.max_abs().max(1.0);
    if err > 1e-12 * scale * (tensor.entries.len() as f64).sqrt() {
        return Err(Error::Consistency {
            op: "bloch_matrix",
            msg: format!("Bloch matrix not Hermitian (error {err:.3e})"),
        });
    }
    Ok(bm)
}

/// Relative motion of neighbouring ions along the family's own bond.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModePhase {
    InPhase,
    OutOfPhase,
}

/// Both bands at one wavevector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub k: [f64; 2],
    /// Bloch eigenvalues, lower band first.
    pub lambda: [f64; 2],
    /// Absolute frequencies `√(ω̄² + λ)`.
    pub omega: [f64; 2],
    /// `(ω − ω̄)/ω₀`.
    pub shift: [f64; 2],
    /// First-order shift `λ/(2ω̄ω₀)`.
    pub shift_linear: [f64; 2],
    pub phase: [ModePhase; 2],
}

/// Bands of one family on a k-grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub family: Family,
    pub bare_frequency: f64,
    /// Band scale `ω₀ = 1/(2ω̄)` in reduced units.
    pub omega0: f64,
    pub grid: KGrid,
    pub points: Vec<BandPoint>,
}

impl BandStructure {
    /// Mean exact shift of each band in units of `ω₀`.
    pub fn band_centers(&self) -> [f64; 2] {
        let n = self.points.len() as f64;
        let mut c = [0.0; 2];
        for p in &self.points {
            c[0] += p.shift[0];
            c[1] += p.shift[1];
        }
        [c[0] / n, c[1] / n]
    }

    /// `(min, max)` of each band's absolute frequency.
    pub fn band_edges(&self) -> [(f64, f64); 2] {
        let mut out = [(f64::INFINITY, f64::NEG_INFINITY); 2];
        for p in &self.points {
            for b in 0..2 {
                out[b].0 = out[b].0.min(p.omega[b]);
                out[b].1 = out[b].1.max(p.omega[b]);
            }
        }
        out
    }

    /// Half of the full frequency spread of the family.
    pub fn half_width(&self) -> f64 {
        let e = self.band_edges();
        0.5 * (e[1].1 - e[0].0)
    }
}

fn phase_label(u: &[Complex64; 2], k: [f64; 2], bond: Vec3) -> ModePhase {
    let ph = Complex64::from_polar(1.0, k[0] * bond.x + k[1] * bond.y);
    let rel = u[0].conj() * u[1] * ph;
    if rel.re >= 0.0 {
        ModePhase::InPhase
    } else {
        ModePhase::OutOfPhase
    }
}

/// Band structure `ω(k) = √(ω̄² + λ(k))` of a within-family tensor.
pub fn bloch_bands(tensor: &CouplingTensor, bare: f64, grid: KGrid) -> Result<BandStructure> {
    if !(bare > 0.0) {
        return Err(Error::domain("bloch_bands", "bare frequency must be positive"));
    }
    let family = tensor.families.0;
    let bond = tensor.lattice.bonds().get(family);
    let omega0 = 0.5 / bare;
    let ks = grid.points(&tensor.lattice);
    let points: Result<Vec<BandPoint>> = ks
        .par_iter()
        .map(|&k| band_point(tensor, bare, omega0, bond, k))
        .collect();
    Ok(BandStructure {
        family,
        bare_frequency: bare,
        omega0,
        grid,
        points: points?,
    })
}

fn band_point(
    tensor: &CouplingTensor,
    bare: f64,
    omega0: f64,
    bond: Vec3,
    k: [f64; 2],
) -> Result<BandPoint> {
    let bm = bloch_matrix(tensor, k)?;
    let (lambda, vecs) = bm.eigen();
    let mut omega = [0.0; 2];
    for b in 0..2 {
        let w2 = bare * bare + lambda[b];
        if !(w2 > 0.0) {
            return Err(Error::domain(
                "bloch_bands",
                format!("unstable mode at k = {k:?}: ω² = {w2}"),
            ));
        }
        omega[b] = w2.sqrt();
    }
    Ok(BandPoint {
        k,
        lambda,
        omega,
        shift: omega.map(|w| (w - bare) / omega0),
        shift_linear: lambda.map(|l| l / (2.0 * bare) / omega0),
        phase: [phase_label(&vecs[0], k, bond), phase_label(&vecs[1], k, bond)],
    })
}

/// Normalised histogram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Runs of non-empty bins separated by at least one empty bin.
    pub fn clusters(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for (i, w) in self.weights.iter().enumerate() {
            match (start, *w > 0.0) {
                (None, true) => start = Some(i),
                (Some(s), false) => {
                    out.push((self.edges[s], self.edges[i]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((self.edges[s], *self.edges.last().unwrap()));
        }
        out
    }
}

/// Histogram of absolute band frequencies, each band point weighted equally.
///
/// `range` defaults to the span of all frequencies.
pub fn density_of_states(
    bands: &[&BandStructure],
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::domain("density_of_states", "need at least one bin"));
    }
    let all: Vec<f64> = bands
        .iter()
        .flat_map(|b| b.points.iter().flat_map(|p| p.omega))
        .collect();
    if all.is_empty() {
        return Err(Error::domain("density_of_states", "no band data"));
    }
    let (lo, hi) = range.unwrap_or_else(|| {
        let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pad = 1e-9 * (hi - lo).max(hi.abs());
        (lo - pad, hi + pad)
    });
    let width = (hi - lo) / bins as f64;
    let mut weights = vec![0.0; bins];
    let mut inside = 0usize;
    for w in &all {
        if *w >= lo && *w <= hi {
            let i = (((w - lo) / width) as usize).min(bins - 1);
            weights[i] += 1.0;
            inside += 1;
        }
    }
    if inside > 0 {
        for w in &mut weights {
            *w /= inside as f64;
        }
    }
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    Ok(Histogram { edges, weights })
}

/// Boundary conditions of a finite patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Torus,
}

/// `na × nb` cells, two sites each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub na: usize,
    pub nb: usize,
    pub boundary: Boundary,
}

impl Patch {
    pub fn torus(na: usize, nb: usize) -> Self {
        Patch {
            na,
            nb,
            boundary: Boundary::Torus,
        }
    }

    pub fn open(na: usize, nb: usize) -> Self {
        Patch {
            na,
            nb,
            boundary: Boundary::Open,
        }
    }

    pub fn sites(&self) -> Vec<SiteIndex> {
        let mut out = Vec::with_capacity(2 * self.na * self.nb);
        for a in 0..self.na as i32 {
            for b in 0..self.nb as i32 {
                for sub in Sublattice::ALL {
                    out.push(SiteIndex::new(a, b, sub));
                }
            }
        }
        out
    }

    /// Position of a site in [`Patch::sites`], wrapping on a torus.
    pub fn position_of(&self, idx: SiteIndex) -> Option<usize> {
        let (na, nb) = (self.na as i32, self.nb as i32);
        let (a, b) = match self.boundary {
            Boundary::Torus => (idx.na.rem_euclid(na), idx.nb.rem_euclid(nb)),
            Boundary::Open => {
                if idx.na < 0 || idx.na >= na || idx.nb < 0 || idx.nb >= nb {
                    return None;
                }
                (idx.na, idx.nb)
            }
        };
        Some(((a * nb + b) * 2) as usize + idx.sub.index())
    }
}

/// Normal modes `r_i^μ = Σ_m O_{iμm} q_m` of a finite set of oscillators.
#[derive(Clone, Debug)]
pub struct NormalModes {
    pub sites: Vec<SiteIndex>,
    pub families: Vec<Family>,
    /// Bare frequency per degree of freedom.
    pub bare: Vec<f64>,
    /// Mode frequencies, ascending.
    pub omega: Vec<f64>,
    /// Rows: degree of freedom `site·F + family`; columns: modes.
    pub vectors: DMatrix<f64>,
    /// The coupling matrix `γ` used (without the bare diagonal).
    pub gamma: DMatrix<f64>,
}

impl NormalModes {
    pub fn dof(&self, site: usize, family: usize) -> usize {
        site * self.families.len() + family
    }

    pub fn o(&self, site: usize, family: usize, mode: usize) -> f64 {
        self.vectors[(self.dof(site, family), mode)]
    }

    /// Family whose degrees of freedom carry most of a mode's weight.
    pub fn mode_family(&self, mode: usize) -> Family {
        let f = self.families.len();
        let mut w = vec![0.0; f];
        for dof in 0..self.vectors.nrows() {
            w[dof % f] += self.vectors[(dof, mode)].powi(2);
        }
        let best = (0..f).max_by(|a, b| w[*a].partial_cmp(&w[*b]).unwrap()).unwrap();
        self.families[best]
    }

    /// Maximum deviations of `OOᵀ` and `OᵀO` from the identity.
    pub fn orthogonality_errors(&self) -> (f64, f64) {
        let n = self.vectors.nrows();
        let id = DMatrix::<f64>::identity(n, n);
        let a = (&self.vectors * self.vectors.transpose() - &id).amax();
        let b = (self.vectors.transpose() * &self.vectors - id).amax();
        (a, b)
    }
}

/// Diagonalises `diag(ω̄²) + γ` for an explicit symmetric coupling matrix.
pub fn normal_modes_from_matrix(
    sites: Vec<SiteIndex>,
    families: Vec<Family>,
    bare: Vec<f64>,
    gamma: DMatrix<f64>,
) -> Result<NormalModes> {
    let n = bare.len();
    if gamma.nrows() != n || gamma.ncols() != n {
        return Err(Error::domain("normal_modes", "coupling matrix has the wrong size"));
    }
    let asym = (&gamma - gamma.transpose()).amax();
    if asym > 1e-12 * gamma.amax().max(1.0) {
        return Err(Error::Consistency {
            op: "normal_modes",
            msg: format!("coupling matrix not symmetric (error {asym:.3e})"),
        });
    }
    let mut dyn_mat = gamma.clone();
    for i in 0..n {
        dyn_mat[(i, i)] += bare[i] * bare[i];
    }
    let eig = SymmetricEigen::new(dyn_mat);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].partial_cmp(&eig.eigenvalues[*b]).unwrap());
    let mut omega = Vec::with_capacity(n);
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (col, &m) in order.iter().enumerate() {
        let w2 = eig.eigenvalues[m];
        if !(w2 > 0.0) {
            return Err(Error::domain("normal_modes", format!("unstable mode: ω² = {w2}")));
        }
        omega.push(w2.sqrt());
        // fix the sign so the largest component is positive
        let v = eig.eigenvectors.column(m);
        let imax = v.iamax();
        let sign = if v[imax] < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(col, &(v * sign));
    }
    Ok(NormalModes {
        sites,
        families,
        bare,
        omega,
        vectors,
        gamma,
    })
}

/// Normal modes of a finite patch with the families present in `families`.
///
/// Couplings between families are included whenever `set` holds the
/// corresponding cross tensor.
pub fn finite_normal_modes(
    set: &CouplingSet,
    families: &[Family],
    bare: [f64; 3],
    patch: Patch,
    max_sites: usize,
) -> Result<NormalModes> {
    let sites = patch.sites();
    if sites.len() > max_sites {
        return Err(Error::PatchTooLarge {
            sites: sites.len(),
            limit: max_sites,
        });
    }
    if families.is_empty() {
        return Err(Error::domain("finite_normal_modes", "no families selected"));
    }
    let f = families.len();
    let n = sites.len() * f;
    let mut gamma = DMatrix::<f64>::zeros(n, n);
    for (fi, &mu) in families.iter().enumerate() {
        for (fj, &nu) in families.iter().enumerate() {
            let Some(t) = set.get(mu, nu) else {
                if mu == nu {
                    return Err(Error::domain(
                        "finite_normal_modes",
                        format!("missing tensor for family {mu}"),
                    ));
                }
                continue;
            };
            for (i, site) in sites.iter().enumerate() {
                for e in t.entries.iter().filter(|e| e.source == site.sub) {
                    let target = e.target.shifted(site.na, site.nb);
                    if let Some(j) = patch.position_of(target) {
                        gamma[(i * f + fi, j * f + fj)] += e.value;
                    }
                }
            }
        }
    }
    let bare_dof = sites
        .iter()
        .flat_map(|_| families.iter().map(|fam| bare[fam.index()]))
        .collect();
    normal_modes_from_matrix(sites, families.to_vec(), bare_dof, gamma)
}

/// Stiff-limit diagnostics for conditions (i) and (ii).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StiffnessReport {
    /// `max |γ^{μν}| / |ω̄_μ² − ω̄_ν²|` over `μ ≠ ν`.
    pub cross_ratio: f64,
    /// `max |γ^{μμ}| / min_{ν≠μ} |ω̄_μ² − ω̄_ν²|`.
    pub band_ratio: f64,
    pub cross_threshold: f64,
    pub band_threshold: f64,
    pub cross_pass: bool,
    pub band_pass: bool,
}

/// Evaluates both stiffness ratios; `set` must hold all nine family pairs.
pub fn stiffness_report(
    set: &CouplingSet,
    bare: [f64; 3],
    thresholds: (f64, f64),
) -> Result<StiffnessReport> {
    let mut cross: f64 = 0.0;
    let mut band: f64 = 0.0;
    for mu in Family::ALL {
        let wm = bare[mu.index()];
        let mut gap = f64::INFINITY;
        for nu in Family::ALL {
            let t = set.get(mu, nu).ok_or_else(|| {
                Error::domain("stiffness_report", format!("missing tensor ({mu}, {nu})"))
            })?;
            if mu == nu {
                continue;
            }
            let sep = (wm * wm - bare[nu.index()].powi(2)).abs();
            gap = gap.min(sep);
            let ratio = if sep > 0.0 { t.max_abs() / sep } else { f64::INFINITY };
            cross = cross.max(ratio);
        }
        let t = set.get(mu, mu).unwrap();
        let ratio = if gap > 0.0 { t.max_abs() / gap } else { f64::INFINITY };
        band = band.max(ratio);
    }
    Ok(StiffnessReport {
        cross_ratio: cross,
        band_ratio: band,
        cross_threshold: thresholds.0,
        band_threshold: thresholds.1,
        cross_pass: cross < thresholds.0,
        band_pass: band < thresholds.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rotate_z;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec() -> LatticeSpec {
        LatticeSpec::default()
    }

    fn tensor(fam: Family, cutoff: f64) -> CouplingTensor {
        assemble_gamma(&spec(), (fam, fam), cutoff, &GreensEnv::plane()).unwrap()
    }

    #[test]
    fn nearest_neighbour_values() {
        let t = tensor(Family::X, 3.0);
        let diag = (52.0 - 3.0 * 2f64.sqrt()) / 24.0;
        assert!((t.dominant() - diag).abs() < 1e-12);
        let off = (3.0 * 2f64.sqrt() - 4.0) / 48.0;
        let b = spec().bonds();
        for bond in [b.y, b.z] {
            let v = t.at_separation(Sublattice::Hollow, bond).unwrap();
            assert!((v - off).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn further_neighbour_ratios() {
        let t = tensor(Family::X, 3.0);
        let b = spec().bonds();
        let dom = t.dominant();
        for sep in [b.y * -2.0, b.z * -2.0] {
            let r = t.at_separation(Sublattice::Hollow, sep).unwrap() / dom;
            assert!((r - 0.05).abs() < 0.005, "{r}");
        }
        for sep in [b.y - b.z, b.z - b.y] {
            let r = t.at_separation(Sublattice::Hollow, sep).unwrap() / dom;
            assert!((r - 0.06).abs() < 0.005, "{r}");
        }
    }

    #[test]
    fn tensor_symmetry() {
        let s = spec();
        let env = GreensEnv::plane();
        let xy = assemble_gamma(&s, (Family::X, Family::Y), 4.0, &env).unwrap();
        let yx = assemble_gamma(&s, (Family::Y, Family::X), 4.0, &env).unwrap();
        for e in &xy.entries {
            let back = yx.at_separation(e.target.sub, -e.separation()).unwrap();
            assert!((back - e.value).abs() < 1e-14);
        }
        assert!(xy.entries.iter().all(|e| e.distance() > 0.5));
    }

    #[test]
    fn gamma_point_eigenvectors() {
        let t = tensor(Family::Z, 6.0);
        let bm = bloch_matrix(&t, [0.0, 0.0]).unwrap();
        let (_, vecs) = bm.eigen();
        for v in vecs {
            assert!((v[0].norm() - v[1].norm()).abs() < 1e-12);
            let rel = v[0].conj() * v[1];
            assert!(rel.im.abs() < 1e-12);
        }
        let s0 = (vecs[0][0].conj() * vecs[0][1]).re;
        let s1 = (vecs[1][0].conj() * vecs[1][1]).re;
        assert!(s0 < 0.0 && s1 > 0.0);
    }

    #[test]
    fn inversion_gives_conjugate() {
        let t = tensor(Family::Y, 6.0);
        let k = [0.37, -1.1];
        let a = bloch_matrix(&t, k).unwrap();
        let b = bloch_matrix(&t, [-k[0], -k[1]]).unwrap();
        for s in 0..2 {
            for u in 0..2 {
                assert!((a.m[s][u] - b.m[s][u].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn band_separation_near_four() {
        let t = tensor(Family::Y, DEFAULT_CUTOFF);
        let bands = bloch_bands(&t, 5.0, KGrid::new(48, 48)).unwrap();
        let c = bands.band_centers();
        assert!(((c[1] - c[0]) / 4.0 - 1.0).abs() < 0.1, "{c:?}");
    }

    #[test]
    fn lower_band_out_of_phase_at_extremes() {
        let t = tensor(Family::X, DEFAULT_CUTOFF);
        let bands = bloch_bands(&t, 5.0, KGrid::new(24, 24)).unwrap();
        for b in 0..2 {
            let lo = bands.points.iter().min_by(|p, q| p.omega[b].partial_cmp(&q.omega[b]).unwrap()).unwrap();
            let hi = bands.points.iter().max_by(|p, q| p.omega[b].partial_cmp(&q.omega[b]).unwrap()).unwrap();
            let want = if b == 0 { ModePhase::OutOfPhase } else { ModePhase::InPhase };
            assert_eq!(lo.phase[b], want);
            assert_eq!(hi.phase[b], want);
        }
    }

    #[test]
    fn torus_matches_bloch() {
        let fam = Family::X;
        let t = tensor(fam, DEFAULT_CUTOFF);
        let n = 12;
        let modes = finite_normal_modes(&CouplingSet::single(t.clone()), &[fam], [5.0; 3], Patch::torus(n, n), DEFAULT_MAX_SITES).unwrap();
        let (ga, gb) = spec().reciprocal();
        let mut bloch = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                let k = [u * ga[0] + v * gb[0], u * ga[1] + v * gb[1]];
                let (lam, _) = bloch_matrix(&t, k).unwrap().eigen();
                bloch.extend(lam.iter().map(|l| (25.0 + l).sqrt()));
            }
        }
        bloch.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in bloch.iter().zip(&modes.omega) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn c3_symmetry_of_bands() {
        let tx = tensor(Family::X, 6.0);
        let ty = tensor(Family::Y, 6.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rot = -2.0 * std::f64::consts::PI / 3.0;
        for _ in 0..10 {
            let k = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let kr = rotate_z(Vec3::new(k[0], k[1], 0.0), rot);
            let (a, _) = bloch_matrix(&tx, k).unwrap().eigen();
            let (b, _) = bloch_matrix(&ty, [kr.x, kr.y]).unwrap().eigen();
            assert!((a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10);
        }
    }

    // Entries beyond the smaller cutoff are what the comparison isolates; the
    // z-components of the axes give a ρ⁻³ tail that the image plane enhances.
    #[test]
    fn cutoff_convergence() {
        let small = tensor(Family::X, 6.0);
        let large = tensor(Family::X, 10.0);
        let grid = KGrid::new(12, 12);
        let a = bloch_bands(&small, 5.0, grid).unwrap();
        let b = bloch_bands(&large, 5.0, grid).unwrap();
        let worst = a
            .points
            .iter()
            .zip(&b.points)
            .flat_map(|(p, q)| (0..2).map(move |i| (p.shift[i] - q.shift[i]).abs()))
            .fold(0.0, f64::max);
        assert!(worst < 1e-4, "largest band change {worst} ω₀");
    }

    #[test]
    fn two_ion_splitting() {
        let g = 0.3;
        let gamma = DMatrix::from_row_slice(2, 2, &[0.0, g, g, 0.0]);
        let sites = vec![SiteIndex::hollow(0, 0), SiteIndex::solid(0, 0)];
        let m = normal_modes_from_matrix(sites, vec![Family::Z], vec![2.0, 2.0], gamma).unwrap();
        assert!((m.omega[0].powi(2) - (4.0 - g)).abs() < 1e-13);
        assert!((m.omega[1].powi(2) - (4.0 + g)).abs() < 1e-13);
    }

    #[test]
    fn sum_rules_on_patch() {
        let fam = Family::Z;
        let t = tensor(fam, 4.0);
        let bare = spec().bare_frequencies(5.0);
        let modes = finite_normal_modes(&CouplingSet::single(t), &[fam], bare, Patch::open(4, 3), 100).unwrap();
        let (e1, e2) = modes.orthogonality_errors();
        assert!(e1 < 1e-10 && e2 < 1e-10);
        let w = bare[fam.index()];
        let n = modes.sites.len();
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n)
                    .map(|m| modes.o(i, 0, m) * modes.o(j, 0, m) * (modes.omega[m].powi(2) - w * w))
                    .sum();
                assert!((s - modes.gamma[(i, j)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn patch_limit() {
        let t = tensor(Family::X, 2.0);
        let err = finite_normal_modes(&CouplingSet::single(t), &[Family::X], [5.0; 3], Patch::torus(40, 40), 2000).unwrap_err();
        assert_eq!(err, Error::PatchTooLarge { sites: 3200, limit: 2000 });
    }

    #[test]
    fn dos_normalised_and_split() {
        let s = spec();
        let bare = s.bare_frequencies(5.0);
        let mut all = Vec::new();
        for fam in Family::ALL {
            all.push(bloch_bands(&tensor(fam, 6.0), bare[fam.index()], KGrid::default()).unwrap());
        }
        let refs: Vec<&BandStructure> = all.iter().collect();
        let h = density_of_states(&refs, 200, None).unwrap();
        assert!((h.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(h.clusters().len(), 6);
        for b in &all {
            let e = b.band_edges();
            let pad = 0.05 * (e[1].1 - e[0].0);
            let zoom = density_of_states(&[b], 200, Some((e[0].0 - pad, e[1].1 + pad))).unwrap();
            assert_eq!(zoom.clusters().len(), 2, "{}", b.family);
            let mid = 0.5 * (e[0].0 + e[1].1);
            assert!((mid - b.bare_frequency).abs() < b.omega0, "{} {}", b.family, (mid - b.bare_frequency) / b.omega0);
        }
    }

    #[test]
    fn stiffness_ratios() {
        let s = spec();
        let set = CouplingSet::assemble(&s, 4.0, &GreensEnv::plane(), true).unwrap();
        let r = stiffness_report(&set, s.bare_frequencies(5.0), (0.1, 0.5)).unwrap();
        assert!(r.cross_ratio.is_finite() && r.band_ratio.is_finite());
        assert!(r.cross_pass);
        let d = stiffness_report(&set, [5.0, 5.0, 6.0], (0.1, 0.5)).unwrap();
        assert!(d.cross_ratio.is_infinite() && !d.cross_pass);
        let mut doubled = CouplingSet::new();
        for t in set.iter() {
            doubled.insert(t.scaled(2.0));
        }
        let r2 = stiffness_report(&doubled, s.bare_frequencies(5.0), (0.1, 0.5)).unwrap();
        assert!((r2.cross_ratio / r.cross_ratio - 2.0).abs() < 1e-12);
        assert!((r2.band_ratio / r.band_ratio - 2.0).abs() < 1e-12);
    }
}
