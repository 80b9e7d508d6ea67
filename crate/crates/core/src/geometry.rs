//! Honeycomb lattice, bond vectors and local vibration axes.
//!
//! Lengths are in units of the nearest-neighbour distance `d`. The lab frame
//! has the electrode plane at `z = 0`; ions sit at height `h` above it.

use crate::error::{Error, Result};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Lab-frame vector.
pub type Vec3 = Vector3<f64>;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const SQRT2: f64 = std::f64::consts::SQRT_2;
const SQRT6: f64 = 2.449_489_742_783_178;

/// Golden ratio.
pub const PHI: f64 = 1.618_033_988_749_895;

/// Vibration and bond family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    X,
    Y,
    Z,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::X, Family::Y, Family::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The family obtained by a clockwise rotation of 120°.
    pub fn next(self) -> Family {
        match self {
            Family::X => Family::Y,
            Family::Y => Family::Z,
            Family::Z => Family::X,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::X => "X",
            Family::Y => "Y",
            Family::Z => "Z",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "X" | "x" => Ok(Family::X),
            "Y" | "y" => Ok(Family::Y),
            "Z" | "z" => Ok(Family::Z),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

/// Sublattice tag. `Hollow` is ∘, `Solid` is •.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sublattice {
    Hollow,
    Solid,
}

impl Sublattice {
    pub const ALL: [Sublattice; 2] = [Sublattice::Hollow, Sublattice::Solid];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Sublattice {
        match self {
            Sublattice::Hollow => Sublattice::Solid,
            Sublattice::Solid => Sublattice::Hollow,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sublattice::Hollow => "o",
            Sublattice::Solid => "*",
        }
    }
}

/// A lattice site: cell coordinates along `a`, `b` and the sublattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteIndex {
    pub na: i32,
    pub nb: i32,
    pub sub: Sublattice,
}

impl SiteIndex {
    pub fn new(na: i32, nb: i32, sub: Sublattice) -> Self {
        SiteIndex { na, nb, sub }
    }

    pub fn hollow(na: i32, nb: i32) -> Self {
        Self::new(na, nb, Sublattice::Hollow)
    }

    pub fn solid(na: i32, nb: i32) -> Self {
        Self::new(na, nb, Sublattice::Solid)
    }

    /// Same sublattice, translated by whole cells.
    pub fn shifted(self, da: i32, db: i32) -> Self {
        Self::new(self.na + da, self.nb + db, self.sub)
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.na, self.nb, self.sub.symbol())
    }
}

/// Nearest-neighbour bond vectors from a ∘ site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BondVectors {
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
}

impl BondVectors {
    pub fn get(&self, family: Family) -> Vec3 {
        match family {
            Family::X => self.x,
            Family::Y => self.y,
            Family::Z => self.z,
        }
    }
}

impl Default for BondVectors {
    fn default() -> Self {
        BondVectors {
            x: Vec3::new(0.0, 1.0, 0.0),
            y: Vec3::new(SQRT3 / 2.0, -0.5, 0.0),
            z: Vec3::new(-SQRT3 / 2.0, -0.5, 0.0),
        }
    }
}

/// Vibration axes of one sublattice, one unit vector per family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisTriple {
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub z: [f64; 3],
}

impl AxisTriple {
    pub fn get(&self, family: Family) -> Vec3 {
        let v = match family {
            Family::X => self.x,
            Family::Y => self.y,
            Family::Z => self.z,
        };
        Vec3::from(v)
    }

    fn hollow_default() -> Self {
        AxisTriple {
            x: [0.0, 2.0 / SQRT6, SQRT2 / SQRT6],
            y: [SQRT3 / SQRT6, -1.0 / SQRT6, SQRT2 / SQRT6],
            z: [-SQRT3 / SQRT6, -1.0 / SQRT6, SQRT2 / SQRT6],
        }
    }

    fn solid_default() -> Self {
        AxisTriple {
            x: [0.0, -2.0 / SQRT6, SQRT2 / SQRT6],
            y: [-SQRT3 / SQRT6, 1.0 / SQRT6, SQRT2 / SQRT6],
            z: [SQRT3 / SQRT6, 1.0 / SQRT6, SQRT2 / SQRT6],
        }
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let v = [self.get(Family::X), self.get(Family::Y), self.get(Family::Z)];
        let mut err: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((v[i].dot(&v[j]) - target).abs());
            }
        }
        err
    }
}

/// Per-sublattice vibration axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    pub hollow: AxisTriple,
    pub solid: AxisTriple,
}

impl Default for Axes {
    fn default() -> Self {
        Axes {
            hollow: AxisTriple::hollow_default(),
            solid: AxisTriple::solid_default(),
        }
    }
}

/// Honeycomb lattice geometry in reduced units (`d = 1`).
///
/// The TOML form uses the field names below; every key is optional and
/// falls back to the default design:
///
/// ```toml
/// trap_height = 0.5
/// cover_height = 50.0          # omit for no cover plane
/// cell_a = [1.7320508075688772, 0.0]
/// cell_b = [0.8660254037844386, 1.5]
/// offset_hollow = [0.0, 0.0]
/// offset_solid = [1.7320508075688772, 1.0]
/// frequency_ratio = [0.6180339887498949, 1.0, 1.618033988749895]
///
/// [axes.hollow]
/// x = [0.0, 0.8164965809277261, 0.5773502691896258]
/// # y, z ...
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    /// Ion height above the electrode plane.
    pub trap_height: f64,
    /// Cover-plane height; `None` means no cover plane.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover_height: Option<f64>,
    /// Horizontal unit-cell vectors.
    pub cell_a: [f64; 2],
    pub cell_b: [f64; 2],
    /// Horizontal positions of the two sites inside the cell.
    pub offset_hollow: [f64; 2],
    pub offset_solid: [f64; 2],
    pub axes: Axes,
    /// Bare frequencies ω̄_X : ω̄_Y : ω̄_Z.
    pub frequency_ratio: [f64; 3],
}

impl Default for LatticeSpec {
    fn default() -> Self {
        LatticeSpec {
            trap_height: 0.5,
            cover_height: None,
            cell_a: [SQRT3, 0.0],
            cell_b: [SQRT3 / 2.0, 1.5],
            offset_hollow: [0.0, 0.0],
            offset_solid: [SQRT3, 1.0],
            axes: Axes::default(),
            frequency_ratio: [1.0 / PHI, 1.0, PHI],
        }
    }
}

impl LatticeSpec {
    pub fn with_cover(mut self, height: f64) -> Self {
        self.cover_height = Some(height);
        self
    }

    /// Checks heights, cell area and axis orthonormality (to 1e-12).
    pub fn validate(&self) -> Result<()> {
        let h = self.trap_height;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Config(format!("trap_height must be positive, got {h}")));
        }
        if let Some(cover) = self.cover_height {
            if !(cover.is_finite() && cover > h) {
                return Err(Error::Config(format!(
                    "cover_height must exceed trap_height ({h}), got {cover}"
                )));
            }
        }
        let area = self.cell_area();
        if !(area.abs() > 1e-9) {
            return Err(Error::Config("cell vectors are degenerate".into()));
        }
        for (name, t) in [("hollow", &self.axes.hollow), ("solid", &self.axes.solid)] {
            let err = t.orthonormality_error();
            if !(err <= 1e-12) {
                return Err(Error::Config(format!(
                    "axes.{name} is not orthonormal (Gram error {err:.3e})"
                )));
            }
        }
        if self.frequency_ratio.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config("frequency_ratio entries must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: LatticeSpec =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("lattice spec serializes")
    }

    pub fn a(&self) -> Vec3 {
        Vec3::new(self.cell_a[0], self.cell_a[1], 0.0)
    }

    pub fn b(&self) -> Vec3 {
        Vec3::new(self.cell_b[0], self.cell_b[1], 0.0)
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_a[0] * self.cell_b[1] - self.cell_a[1] * self.cell_b[0]
    }

    /// Reciprocal vectors with `a·g_a = 2π`, `b·g_a = 0` and so on.
    pub fn reciprocal(&self) -> ([f64; 2], [f64; 2]) {
        let area = self.cell_area();
        let tau = 2.0 * std::f64::consts::PI / area;
        let ga = [self.cell_b[1] * tau, -self.cell_b[0] * tau];
        let gb = [-self.cell_a[1] * tau, self.cell_a[0] * tau];
        (ga, gb)
    }

    /// Horizontal offset of a sublattice, lifted to the trap height.
    pub fn offset(&self, sub: Sublattice) -> Vec3 {
        let o = match sub {
            Sublattice::Hollow => self.offset_hollow,
            Sublattice::Solid => self.offset_solid,
        };
        Vec3::new(o[0], o[1], self.trap_height)
    }

    pub fn axis(&self, sub: Sublattice, family: Family) -> Vec3 {
        match sub {
            Sublattice::Hollow => self.axes.hollow.get(family),
            Sublattice::Solid => self.axes.solid.get(family),
        }
    }

    /// Bare frequencies for a given geometric mean ω̄.
    pub fn bare_frequencies(&self, mean: f64) -> [f64; 3] {
        let r = self.frequency_ratio;
        let g = (r[0] * r[1] * r[2]).cbrt();
        [mean * r[0] / g, mean * r[1] / g, mean * r[2] / g]
    }

    pub fn bonds(&self) -> BondVectors {
        BondVectors::default()
    }

    /// Site reached from `idx` by adding a whole-lattice separation, if any.
    pub fn site_at(&self, from: SiteIndex, sep: Vec3) -> Option<SiteIndex> {
        let target = site_position(from, self) + sep;
        let area = self.cell_area();
        for sub in Sublattice::ALL {
            let rel = target - self.offset(sub);
            let fa = (rel.x * self.cell_b[1] - rel.y * self.cell_b[0]) / area;
            let fb = (self.cell_a[0] * rel.y - self.cell_a[1] * rel.x) / area;
            let (na, nb) = (fa.round(), fb.round());
            if (fa - na).abs() < 1e-9 && (fb - nb).abs() < 1e-9 && rel.z.abs() < 1e-9 {
                return Some(SiteIndex::new(na as i32, nb as i32, sub));
            }
        }
        None
    }
}

/// Lab-frame position including the trap height.
pub fn site_position(idx: SiteIndex, spec: &LatticeSpec) -> Vec3 {
    spec.a() * idx.na as f64 + spec.b() * idx.nb as f64 + spec.offset(idx.sub)
}

/// All sites within `cutoff` of `idx`, nearest first, excluding `idx`.
///
/// Ties in distance are broken by the polar angle of the separation, then by
/// the site index, so the order is reproducible.
pub fn neighbors(idx: SiteIndex, spec: &LatticeSpec, cutoff: f64) -> Vec<(SiteIndex, Vec3)> {
    let origin = site_position(idx, spec);
    let area = spec.cell_area().abs();
    let reach = area / spec.a().norm().max(spec.b().norm());
    let spread = (spec.offset(Sublattice::Solid) - spec.offset(Sublattice::Hollow)).norm();
    let w = ((cutoff + spread) / reach).ceil() as i32 + 1;
    let limit = cutoff * (1.0 + 1e-12);
    let mut out = Vec::new();
    for da in -w..=w {
        for db in -w..=w {
            for sub in Sublattice::ALL {
                let other = SiteIndex::new(idx.na + da, idx.nb + db, sub);
                if other == idx {
                    continue;
                }
                let sep = site_position(other, spec) - origin;
                if sep.norm() <= limit {
                    out.push((other, sep));
                }
            }
        }
    }
    out.sort_by(|(ia, sa), (ib, sb)| {
        sa.norm()
            .partial_cmp(&sb.norm())
            .unwrap()
            .then_with(|| sa.y.atan2(sa.x).partial_cmp(&sb.y.atan2(sb.x)).unwrap())
            .then_with(|| ia.cmp(ib))
    });
    out
}

/// Rotation about the lab `z` axis by `angle` (counter-clockwise).
pub fn rotate_z(v: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_match_cell_convention() {
        let spec = LatticeSpec::default();
        let p = site_position(SiteIndex::hollow(0, 0), &spec);
        assert_eq!(p, Vec3::new(0.0, 0.0, 0.5));
        let p = site_position(SiteIndex::solid(0, 0), &spec);
        assert!((p - Vec3::new(SQRT3, 1.0, 0.5)).norm() < 1e-15);
        let p = site_position(SiteIndex::hollow(1, 0), &spec);
        assert!((p - Vec3::new(SQRT3, 0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn neighbour_shells() {
        let spec = LatticeSpec::default();
        for idx in [SiteIndex::hollow(0, 0), SiteIndex::solid(3, -2)] {
            assert_eq!(neighbors(idx, &spec, 1.01).len(), 3);
            assert_eq!(neighbors(idx, &spec, 1.8).len(), 9);
            assert_eq!(neighbors(idx, &spec, 2.01).len(), 12);
        }
    }

    // Independent count over a 7x7 patch of cells without any window logic.
    #[test]
    fn third_shell_brute_force() {
        let spec = LatticeSpec::default();
        let centre = site_position(SiteIndex::hollow(0, 0), &spec);
        let mut count = 0;
        for na in -3..=3 {
            for nb in -3..=3 {
                for sub in Sublattice::ALL {
                    let d = (site_position(SiteIndex::new(na, nb, sub), &spec) - centre).norm();
                    if d > 1e-9 && d < 2.01 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 12);
    }

    #[test]
    fn nearest_neighbours_are_bond_vectors() {
        let spec = LatticeSpec::default();
        let bonds = spec.bonds();
        let nn = neighbors(SiteIndex::hollow(2, 5), &spec, 1.01);
        for fam in Family::ALL {
            let d = bonds.get(fam);
            let hit = nn.iter().find(|(i, s)| (s - d).norm() < 1e-14 && i.sub == Sublattice::Solid);
            assert!(hit.is_some(), "missing bond {fam}");
        }
        assert!((bonds.x + bonds.y + bonds.z).norm() < 1e-15);
        for fam in Family::ALL {
            assert!((bonds.get(fam).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn default_axes() {
        let spec = LatticeSpec::default();
        assert!(spec.axes.hollow.orthonormality_error() < 1e-15);
        assert!(spec.axes.solid.orthonormality_error() < 1e-15);
        let tilt = SQRT2 / SQRT6;
        for sub in Sublattice::ALL {
            for fam in Family::ALL {
                assert!((spec.axis(sub, fam).z - tilt).abs() < 1e-15);
            }
        }
        let m = spec.axis(Sublattice::Hollow, Family::X) * SQRT6;
        assert!((m - Vec3::new(0.0, 2.0, SQRT2)).norm() < 1e-14);
    }

    #[test]
    fn mirror_x_swaps_y_and_z() {
        let spec = LatticeSpec::default();
        let flip = |v: Vec3| Vec3::new(-v.x, v.y, v.z);
        let my = spec.axis(Sublattice::Hollow, Family::Y);
        let mz = spec.axis(Sublattice::Hollow, Family::Z);
        assert!((flip(my) - mz).norm() < 1e-15);
        let b = spec.bonds();
        assert!((flip(b.y) - b.z).norm() < 1e-15);
    }

    #[test]
    fn rotation_maps_x_axes_to_y_axes() {
        let spec = LatticeSpec::default();
        let rot = -2.0 * std::f64::consts::PI / 3.0;
        for sub in Sublattice::ALL {
            for fam in Family::ALL {
                let r = rotate_z(spec.axis(sub, fam), rot);
                assert!((r - spec.axis(sub, fam.next())).norm() < 1e-14);
            }
        }
        let b = spec.bonds();
        assert!((rotate_z(b.x, rot) - b.y).norm() < 1e-14);
    }

    #[test]
    fn site_lookup_inverts_position() {
        let spec = LatticeSpec::default();
        let from = SiteIndex::hollow(1, -1);
        let to = spec.site_at(from, spec.bonds().x).unwrap();
        assert_eq!(to, SiteIndex::solid(0, -1));
        assert!(spec.site_at(from, Vec3::new(0.3, 0.0, 0.0)).is_none());
    }

    #[test]
    fn toml_round_trip() {
        let spec = LatticeSpec::default().with_cover(50.0);
        let text = spec.to_toml();
        let back = LatticeSpec::from_toml(&text).unwrap();
        assert_eq!(back, spec);
        let partial = LatticeSpec::from_toml("trap_height = 0.75\n").unwrap();
        assert_eq!(partial.trap_height, 0.75);
        assert_eq!(partial.axes, Axes::default());
    }

    #[test]
    fn rejects_bad_axes() {
        let mut spec = LatticeSpec::default();
        spec.axes.solid.y = [0.0, 1.0, 0.0];
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
        assert!(LatticeSpec::from_toml("trap_hieght = 1.0").is_err());
    }

    #[test]
    fn bare_frequency_mean() {
        let spec = LatticeSpec::default();
        let w = spec.bare_frequencies(5.0);
        assert!(((w[0] * w[1] * w[2]).cbrt() - 5.0).abs() < 1e-13);
        assert!((w[2] / w[1] - PHI).abs() < 1e-14);
    }
}
