//! Run configuration. Every field defaults to the reference design values.

use kitaev_trap::geometry::{Family, LatticeSpec, Sublattice};
use kitaev_trap::phonons::{DEFAULT_CUTOFF, DEFAULT_MAX_SITES};
use kitaev_trap::spincoupling::DriveKind;
use kitaev_trap::trap::SIContext;
use kitaev_trap::wires::{WireDesign, DEFAULT_DEPTH, WIRE_SPACING};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeSpec,
    /// Mean bare frequency `ω̄` in units of `ω_c`.
    pub mean_frequency: f64,
    pub cutoff: f64,
    pub kgrid: [usize; 2],
    /// Absolute tolerance of the Green's-function series.
    pub tol: f64,
    pub max_sites: usize,
    pub greens: GreensConfig,
    pub dipole: DipoleConfig,
    pub couplings: CouplingsConfig,
    pub bands: BandsConfig,
    pub dos: DosConfig,
    pub jmatrix: JMatrixConfig,
    pub wires: WiresConfig,
    pub trap: TrapConfig,
    pub design: WireDesign,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lattice: LatticeSpec::default(),
            mean_frequency: 41.55,
            cutoff: DEFAULT_CUTOFF,
            kgrid: [96, 96],
            tol: 1e-13,
            max_sites: DEFAULT_MAX_SITES,
            greens: GreensConfig::default(),
            dipole: DipoleConfig::default(),
            couplings: CouplingsConfig::default(),
            bands: BandsConfig::default(),
            dos: DosConfig::default(),
            jmatrix: JMatrixConfig::default(),
            wires: WiresConfig::default(),
            trap: TrapConfig::default(),
            design: WireDesign::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreensConfig {
    /// `None` evaluates the single-plane kernel.
    pub cover_height: Option<f64>,
    pub z: f64,
    pub z_src: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub points: usize,
}

impl Default for GreensConfig {
    fn default() -> Self {
        GreensConfig {
            cover_height: Some(100.0),
            z: 1.0,
            z_src: 1.0,
            rho_min: 0.01,
            rho_max: 1000.0,
            points: 121,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DipoleConfig {
    pub height: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub points: usize,
}

impl Default for DipoleConfig {
    fn default() -> Self {
        DipoleConfig {
            height: 1.0,
            rho_min: 0.1,
            rho_max: 100.0,
            points: 121,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingsConfig {
    pub family: Family,
    /// Defaults to `family`.
    pub partner: Option<Family>,
    pub source: Sublattice,
}

impl Default for CouplingsConfig {
    fn default() -> Self {
        CouplingsConfig {
            family: Family::X,
            partner: None,
            source: Sublattice::Hollow,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandsConfig {
    pub families: Vec<Family>,
}

impl Default for BandsConfig {
    fn default() -> Self {
        BandsConfig {
            families: Family::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DosConfig {
    pub bins: usize,
    pub range: Option<[f64; 2]>,
}

impl Default for DosConfig {
    fn default() -> Self {
        DosConfig { bins: 600, range: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JMatrixConfig {
    pub family: Family,
    pub kind: DriveKind,
    /// Torus of `na × nb` cells.
    pub patch: [usize; 2],
    /// Detuning in units of the active half-width, used when `detuning` is unset.
    pub detuning_factor: f64,
    pub detuning: Option<f64>,
    pub sideband: [f64; 3],
}

impl Default for JMatrixConfig {
    fn default() -> Self {
        JMatrixConfig {
            family: Family::Z,
            kind: DriveKind::PhaseGate,
            patch: [8, 8],
            detuning_factor: 10.0,
            detuning: None,
            sideband: [0.0, 0.0, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WiresConfig {
    pub depth: f64,
    pub blue: f64,
    /// `None` applies the field-null ratio.
    pub red: Option<f64>,
    /// Height above the wire plane; `None` is the ion plane.
    pub z: Option<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for WiresConfig {
    fn default() -> Self {
        WiresConfig {
            depth: DEFAULT_DEPTH,
            blue: 1.0,
            red: None,
            z: None,
            x_min: -2.0 * WIRE_SPACING,
            x_max: 2.0 * WIRE_SPACING,
            points: 201,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrapConfig {
    /// Pattern file; `None` uses the built-in example rings.
    pub pattern: Option<PathBuf>,
    pub context: SIContext,
    pub xy: [f64; 2],
    pub z_min: f64,
    pub z_max: f64,
    pub points: usize,
    /// Bias values in units of `V_pp`.
    pub biases: Vec<f64>,
    pub gmax: f64,
}

impl Default for TrapConfig {
    fn default() -> Self {
        TrapConfig {
            pattern: None,
            context: SIContext::default(),
            xy: [0.0, 0.0],
            z_min: 0.1,
            z_max: 3.0,
            points: 291,
            biases: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            gmax: 240.0,
        }
    }
}

/// Parses TOML, or JSON when the file name ends in `.json`.
pub fn parse(text: &str, path: &Path) -> Result<RunConfig, String> {
    let json = path.extension().is_some_and(|e| e == "json");
    let cfg: RunConfig = if json {
        serde_json::from_str(text).map_err(|e| format!("{}: {e}", path.display()))?
    } else {
        toml::from_str(text).map_err(|e| format!("{}: {e}", path.display()))?
    };
    Ok(cfg)
}
