//! Subcommand implementations. Each returns the rendered artifact.

use crate::config::RunConfig;
use crate::output::{report, Cell, Format, Table};
use crate::CliError;
use kitaev_trap::dipole::{demo_closed_form, demo_plane, DemoAxis};
use kitaev_trap::electrostatics::{greens_cover, greens_cover_bessel, greens_cover_images, greens_plane, FieldPoint, GreensEnv};
use kitaev_trap::geometry::{Family, Sublattice, Vec3};
use kitaev_trap::phonons::{
    assemble_gamma, bloch_bands, density_of_states, finite_normal_modes, BandStructure, CouplingSet, KGrid, Patch,
};
use kitaev_trap::spincoupling::{j_exact_modesum, j_perturbative, next_order_estimate, DriveSpec, ModeKernel, ModeSelection};
use kitaev_trap::trap::{vertical_scan, ElectrodePattern};
use kitaev_trap::wires::{
    null_current_ratio, null_gradient, rms_current_budget, scaling_bounds, wire_field, WireGrid, KHZ_DETUNING,
};
use serde_json::{json, Value};
use std::path::Path;

const GAMMA_UNIT: &str = "Q²/(4πε₀d³)";

fn logspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(CliError::Config("range needs 0 < min < max and at least 2 points".into()));
    }
    Ok((0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(hi > lo && n >= 2) {
        return Err(CliError::Config("range needs min < max and at least 2 points".into()));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn env(cfg: &RunConfig) -> GreensEnv {
    GreensEnv::from_cover(cfg.lattice.cover_height).with_tol(cfg.tol)
}

pub fn greens(cfg: &RunConfig, format: Format, c: &Value) -> Result<String, CliError> {
    let g = &cfg.greens;
    let rhos = logspace(g.rho_min, g.rho_max, g.points)?;
    let unit = "Q/(4πε₀d)";
    let mut t = match g.cover_height {
        Some(_) => Table::new(
            "Green's function between grounded planes",
            &[("rho", "d"), ("G_images", unit), ("G_bessel", unit), ("G", unit), ("form", "-")],
        ),
        None => Table::new("Green's function above a grounded plane", &[("rho", "d"), ("G", unit)]),
    };
    t.note(format!("z = {}, z' = {}, cover height = {:?}", g.z, g.z_src, g.cover_height));
    for rho in rhos {
        let p = FieldPoint::new(rho, g.z, g.z_src);
        match g.cover_height {
            Some(h) => {
                let e = GreensEnv::cover(h).with_tol(cfg.tol);
                let a = greens_cover_images(p, &e)?.value;
                let b = greens_cover_bessel(p, &e)?.value;
                let s = greens_cover(p, &e)?;
                t.push(vec![rho.into(), a.into(), b.into(), s.value.into(), s.form.name().into()]);
            }
            None => t.push(vec![rho.into(), greens_plane(p)?.into()]),
        }
    }
    Ok(t.render(format, c))
}

pub fn dipole(cfg: &RunConfig, format: Format, c: &Value) -> Result<String, CliError> {
    let d = &cfg.dipole;
    let mut t = Table::new(
        "Dipole-dipole coupling of two ions above a grounded plane",
        &[
            ("rho", "d"),
            ("x_kernel", GAMMA_UNIT),
            ("x_closed", GAMMA_UNIT),
            ("y_kernel", GAMMA_UNIT),
            ("y_closed", GAMMA_UNIT),
            ("z_kernel", GAMMA_UNIT),
            ("z_closed", GAMMA_UNIT),
        ],
    );
    t.note(format!("ion height h = {}; separation along x", d.height));
    for rho in logspace(d.rho_min, d.rho_max, d.points)? {
        let mut row: Vec<Cell> = vec![rho.into()];
        for axis in DemoAxis::ALL {
            row.push(demo_plane(axis, rho, d.height)?.into());
            row.push(demo_closed_form(axis, rho, d.height).into());
        }
        t.push(row);
    }
    Ok(t.render(format, c))
}

pub fn couplings(cfg: &RunConfig, format: Format, c: &Value) -> Result<String, CliError> {
    let k = &cfg.couplings;
    let partner = k.partner.unwrap_or(k.family);
    let tensor = assemble_gamma(&cfg.lattice, (k.family, partner), cfg.cutoff, &env(cfg))?;
    let bonds = cfg.lattice.bonds();
    let mut t = Table::new(
        "Coupling constants gamma, sorted by magnitude",
        &[
            ("bond", "-"),
            ("target_na", "-"),
            ("target_nb", "-"),
            ("target_sub", "-"),
            ("sep_x", "d"),
            ("sep_y", "d"),
            ("distance", "d"),
            ("gamma", GAMMA_UNIT),
            ("relative", "%"),
        ],
    );
    t.note(format!("families {}{}, source {}, cutoff {} d", k.family, partner, k.source.symbol(), cfg.cutoff));
    let mut rows = tensor.table(k.source);
    rows.sort_by(|a, b| {
        b.0.value
            .abs()
            .total_cmp(&a.0.value.abs())
            .then(a.0.distance().total_cmp(&b.0.distance()))
            .then(a.0.target.cmp(&b.0.target))
    });
    for (e, rel) in rows {
        let sep = e.separation();
        let bond = Family::ALL
            .into_iter()
            .find(|f| (bonds.get(*f) - sep).norm() < 1e-9 || (bonds.get(*f) + sep).norm() < 1e-9)
            .map(|f| format!("Delta_{f}"))
            .unwrap_or_else(|| "-".into());
        t.push(vec![
            Cell::Text(bond),
            Cell::Int(e.target.na as i64),
            Cell::Int(e.target.nb as i64),
            e.target.sub.symbol().into(),
            sep.x.into(),
            sep.y.into(),
            e.distance().into(),
            e.value.into(),
            (100.0 * rel).into(),
        ]);
    }
    Ok(t.render(format, c))
}

fn kgrid(cfg: &RunConfig) -> KGrid {
    KGrid::new(cfg.kgrid[0], cfg.kgrid[1])
}

fn band_structures(cfg: &RunConfig, families: &[Family]) -> Result<Vec<BandStructure>, CliError> {
    let bare = cfg.lattice.bare_frequencies(cfg.mean_frequency);
    let mut out = Vec::new();
    for &f in families {
        let t = assemble_gamma(&cfg.lattice, (f, f), cfg.cutoff, &env(cfg))?;
        out.push(bloch_bands(&t, bare[f.index()], kgrid(cfg))?);
    }
    Ok(out)
}

pub fn bands(cfg: &RunConfig, format: Format, c: &Value) -> Result<String, CliError> {
    let all = band_structures(cfg, &cfg.bands.families)?;
    let mut t = Table::new(
        "Bloch bands",
        &[
            ("family", "-"),
            ("kx", "1/d"),
            ("ky", "1/d"),
            ("omega_lower", "ω_c"),
            ("omega_upper", "ω_c"),
        ],
    );
    for b in &all {
        let c = b.band_centers();
        t.note(format!(
            "{}: bare {:.6} ω_c, ω₀ = {:.6e} ω_c, band centres {:.4} and {:.4} ω₀",
            b.family, b.bare_frequency, b.omega0, c[0], c[1]
        ));
    }
    for b in &all {
        for p in &b.points {
            t.push(vec![
                Cell::Text(b.family.to_string()),
                p.k[0].into(),
                p.k[1].into(),
                p.omega[0].into(),
                p.omega[1].into(),
            ]);
        }
    }
    Ok(t.render(format, c))
}

pub fn dos(cfg: &RunConfig, format: Format, c: &Value) -> Result<String, CliError> {
    let all = band_structures(cfg, &Family::ALL)?;
    let refs: Vec<&BandStructure> = all.iter().collect();
    let h = density_of_states(&refs, cfg.dos.bins, cfg.dos.range.map(|r| (r[0], r[1])))?;
    let mut t = Table::new("Density of states", &[("omega", "ω_c"), ("weight", "fraction per bin")]);
    for (lo, hi) in h.clusters() {
        t.note(format!("cluster [{lo:.6}, {hi:.6}]"));
    }
    for (w, p) in h.centers().into_iter().zip(&h.weights) {
        t.push(vec![w.into(), (*p).into()]);
    }
    Ok(t.render(format, c))
}

pub fn jmatrix(cfg: &RunConfig, c: &Value) -> Result<String, CliError> {
    let j = &cfg.jmatrix;
    let spec = &cfg.lattice;
    let fam = j.family;
    let bare = spec.bare_frequencies(cfg.mean_frequency);
    let w = bare[fam.index()];
    let t = assemble_gamma(spec, (fam, fam), cfg.cutoff, &env(cfg))?;
    let patch = Patch::torus(j.patch[0], j.patch[1]);
    let modes = finite_normal_modes(&CouplingSet::single(t.clone()), &[fam], bare, patch, cfg.max_sites)?;
    let half = 0.5 * (modes.omega.last().unwrap() - modes.omega[0]);
    let detuning = j.detuning.unwrap_or(j.detuning_factor * half);
    let drive = DriveSpec::uniform(fam, j.kind, detuning, Vec3::from(j.sideband));
    let exact = j_exact_modesum(&modes, &drive, spec, ModeKernel::Exact, ModeSelection::Active)?;
    let pert = j_perturbative(&t, &drive, w, patch)?;
    let rows = |m: &kitaev_trap::spincoupling::JMatrix| -> Vec<Vec<f64>> {
        (0..m.sites.len()).map(|i| (0..m.sites.len()).map(|k| m.get(i, k)).collect()).collect()
    };
    let bonds = spec.bonds();
    let mut pairs = Vec::new();
    for site in patch.sites().into_iter().filter(|s| s.sub == Sublattice::Hollow) {
        let a = patch.position_of(site).unwrap();
        for f in Family::ALL {
            let Some(target) = spec.site_at(site, bonds.get(f)) else { continue };
            let Some(b) = patch.position_of(target) else { continue };
            let gamma = t.at_separation(Sublattice::Hollow, bonds.get(f)).unwrap_or(t.dominant());
            let est = next_order_estimate(&modes.omega, w, detuning, gamma);
            let rel = (exact.get(a, b) - pert.get(a, b)).abs() / pert.get(a, b).abs();
            pairs.push(json!({"i": a, "j": b, "bond": f.to_string(), "relative_deviation": rel, "next_order_estimate": est}));
        }
    }
    let sites: Vec<Value> = exact.sites.iter().map(|s| json!([s.na, s.nb, s.sub.symbol()])).collect();
    let body = json!({
        "family": fam.to_string(),
        "bare_frequency": w,
        "detuning": detuning,
        "active_half_width": half,
        "sites": sites,
        "exact": rows(&exact),
        "perturbative": rows(&pert),
        "self_terms": exact.self_terms,
        "diagnostics": exact.diagnostics,
        "nearest_neighbour_pairs": pairs,
    });
    let units = json!({"frequencies": "ω_c", "J": "Mω_c²d² per unit force² (reduced)", "sites": "(na, nb, sublattice)"});
    Ok(report("Spin-spin couplings on a torus", units, body, c))
}

pub fn wires(cfg: &RunConfig, format: Format, c: &Value) -> Result<String, CliError> {
    let w = &cfg.wires;
    let grid = match w.red {
        Some(red) => WireGrid { depth: w.depth, blue: w.blue, red },
        None => WireGrid::nulled(w.depth, w.blue)?,
    };
    grid.validate()?;
    let z = w.z.unwrap_or(w.depth);
    let mut t = Table::new(
        "Magnetic field of the wire grid",
        &[("x", "d"), ("z", "d"), ("Bx", "μ₀A/d"), ("Bz", "μ₀A/d")],
    );
    let ratio = null_current_ratio(w.depth)?;
    let g = null_gradient(w.depth, w.blue)?[0][2];
    t.note(format!("blue {} A, red {} A, depth {} d; wires at z = 0", grid.blue, grid.red, grid.depth));
    t.note(format!("null current ratio I_blue/I_red = {ratio:.15e}"));
    t.note(format!("gradient dBx/dz at ions = {g:.15e} μ₀A/d²"));
    for x in linspace(w.x_min, w.x_max, w.points)? {
        let b = wire_field(x, z, &grid)?;
        t.push(vec![x.into(), z.into(), b.x.into(), b.z.into()]);
    }
    Ok(t.render(format, c))
}

fn load_pattern(cfg: &RunConfig, base: Option<&Path>) -> Result<ElectrodePattern, CliError> {
    match &cfg.trap.pattern {
        None => Ok(ElectrodePattern::example_rings()),
        Some(p) => {
            let path = match base {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.clone(),
            };
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(ElectrodePattern::from_toml(&text)?)
        }
    }
}

pub fn trapscan(cfg: &RunConfig, format: Format, c: &Value, base: Option<&Path>) -> Result<String, CliError> {
    let tr = &cfg.trap;
    tr.context.validate()?;
    if tr.biases.is_empty() {
        return Err(CliError::Config("trap.biases must list at least one value".into()));
    }
    let pattern = load_pattern(cfg, base)?;
    let table = pattern.fourier(tr.gmax, tr.context.cover_height, 1e-8)?;
    let mut cols: Vec<(String, String)> = vec![("z".into(), "d".into()), ("pseudo".into(), "E_pp".into())];
    cols.extend(tr.biases.iter().map(|v| (format!("total_V{v}"), "E_pp".into())));
    let col_refs: Vec<(&str, &str)> = cols.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let mut t = Table::new("Potential energy on a vertical axis", &col_refs);
    let ctx = &tr.context;
    t.note(format!("axis at ({}, {}) d, bias values in V_pp", tr.xy[0], tr.xy[1]));
    t.note(format!("E_pp = {:.6e} eV = {:.6e} K, V_pp = {:.6e} V", ctx.e_pp_ev(), ctx.e_pp_kelvin(), ctx.v_pp()));
    let mut scans = Vec::new();
    for &v in &tr.biases {
        let s = vertical_scan(&table, tr.xy, v, (tr.z_min, tr.z_max), tr.points)?;
        match (s.minimum, s.barrier, s.depth) {
            (Some((zm, em)), Some((zb, eb)), Some(d)) if s.trapped => t.note(format!(
                "V = {v}: minimum {em:.6e} at z = {zm:.6}, barrier {eb:.6e} at z = {zb:.6}, depth {d:.6e} E_pp"
            )),
            _ => t.note(format!("V = {v}: untrapped")),
        }
        scans.push(s);
    }
    for i in 0..scans[0].z.len() {
        let mut row: Vec<Cell> = vec![scans[0].z[i].into(), scans[0].pseudo[i].into()];
        row.extend(scans.iter().map(|s| Cell::Num(s.total[i])));
        t.push(row);
    }
    Ok(t.render(format, c))
}

pub fn kitaev_report(cfg: &RunConfig, c: &Value) -> Result<String, CliError> {
    let spec = &cfg.lattice;
    let gamma = assemble_gamma(spec, (Family::Z, Family::Z), cfg.cutoff, &env(cfg))?.dominant();
    let mut design = cfg.design;
    design.gamma_nn = gamma;
    design.validate()?;
    let budget = rms_current_budget(&design, [1.0; 3], [1.0; 3], 1.0)?;
    let ctx = &cfg.trap.context;
    let scaling = scaling_bounds(&design.units, 1.5);
    let body = json!({
        "gamma_nn": gamma,
        "jz_coefficient_hz": design.jz_coefficient_hz(),
        "jz_at_1A_1kHz_joule": design.jz(1.0, KHZ_DETUNING),
        "entanglement_ratio_1A_1kHz": design.entanglement_ratio(1.0, 1.0),
        "gradient_per_amp_t_per_m": design.gradient_per_amp(),
        "null_current_ratio": null_current_ratio(design.depth)?,
        "current_budget": budget,
        "e_pp_ev": ctx.e_pp_ev(),
        "e_pp_kelvin": ctx.e_pp_kelvin(),
        "v_pp_volt": ctx.v_pp(),
        "scaling": scaling,
    });
    let units = json!({
        "gamma_nn": GAMMA_UNIT,
        "jz_coefficient_hz": "Hz at I = 1 A and δ̄ = 2π·1 kHz; scales as I²/δ̄²",
        "current_budget": "A at δ̄ = 2π·1 kHz; scales as δ̄^(3/2)",
        "gradient_per_amp_t_per_m": "T/(m·A)",
        "scaling.stiff_bound": "rad/s",
    });
    Ok(report("Kitaev design numbers", units, body, c))
}
