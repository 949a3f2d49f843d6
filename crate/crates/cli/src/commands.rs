use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;
use waveguide_core::backflow::{
    backflow_map, k_parallel, mask_agreement, relative_disagreement, BackflowMode, BackflowReport,
    DetectorPlane,
};
use waveguide_core::kernels::{kernel_bundle, KernelSpec};
use waveguide_core::oracle::normalization_delta;
use waveguide_core::wavepacket::{
    bispinor_from_bundle, current_z_split_from_bundle, density_and_current, normalize, CylPoint,
};

use crate::config::{Resolved, RunConfig};
use crate::failure::Failure;
use crate::table::{num, Table};
use crate::ModeArg;

/// The packet used by every command: the configured `A0` if given, else the normalized one.
pub fn packet(cfg: &RunConfig, res: &Resolved) -> Result<KernelSpec, Failure> {
    let a0 = match cfg.a0_override() {
        Some(a0) => a0,
        None => normalize(&res.unit_spec, &res.geom, &res.settings)?,
    };
    Ok(res.unit_spec.with_a0(a0))
}

pub fn cmd_normalize(res: &Resolved) -> Result<String, Failure> {
    let a0 = normalize(&res.unit_spec, &res.geom, &res.settings)?;
    let delta = normalization_delta(&res.unit_spec, &res.geom, &res.settings)?;
    Ok(format!("A0={} delta={}", num(a0.re), num(delta)))
}

fn linspace(n: usize, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
}

struct FieldGrid {
    rho: Vec<f64>,
    phi: Vec<f64>,
    z: Vec<f64>,
}

impl FieldGrid {
    fn new(cfg: &RunConfig, res: &Resolved) -> Self {
        FieldGrid {
            rho: linspace(cfg.grid.n_rho, res.geom.a()),
            phi: (0..cfg.grid.n_phi)
                .map(|j| 2.0 * PI * j as f64 / cfg.grid.n_phi as f64)
                .collect(),
            z: linspace(cfg.grid.n_z, cfg.grid.z_max),
        }
    }
}

pub const FIELD_HEADER: [&str; 13] = [
    "rho", "phi", "z", "t", "re_c1", "im_c1", "re_c2", "im_c2", "re_c3", "im_c3", "re_c4", "im_c4",
    "density",
];

pub fn cmd_field(cfg: &RunConfig, res: &Resolved, out: Option<&Path>) -> Result<(), Failure> {
    let spec = packet(cfg, res)?;
    let grid = FieldGrid::new(cfg, res);
    let s = cfg.length_scale();
    let mut table = Table::create(out, cfg.output.format, &FIELD_HEADER)?;
    for t in cfg.plane.times() {
        for &z in &grid.z {
            let b = kernel_bundle(&spec, &res.geom, z, t)?;
            for &rho in &grid.rho {
                for &phi in &grid.phi {
                    let psi =
                        bispinor_from_bundle(&res.geom, &res.spin, &CylPoint::new(rho, phi, z), &b);
                    let mut row = vec![num(rho * s), num(phi), num(z * s), num(t * s)];
                    for c in psi.c {
                        row.push(num(c.re));
                        row.push(num(c.im));
                    }
                    row.push(num(psi.norm_sqr()));
                    table.row(&row)?;
                }
            }
        }
    }
    table.finish()
}

pub const CURRENT_HEADER: [&str; 10] = [
    "rho",
    "phi",
    "z",
    "t",
    "density",
    "j_rho",
    "j_phi",
    "j_z",
    "j_z_convective",
    "j_z_spin",
];

pub fn cmd_current(cfg: &RunConfig, res: &Resolved, out: Option<&Path>) -> Result<(), Failure> {
    let spec = packet(cfg, res)?;
    let grid = FieldGrid::new(cfg, res);
    let s = cfg.length_scale();
    let mut table = Table::create(out, cfg.output.format, &CURRENT_HEADER)?;
    for t in cfg.plane.times() {
        for &z in &grid.z {
            let b = kernel_bundle(&spec, &res.geom, z, t)?;
            for &rho in &grid.rho {
                for &phi in &grid.phi {
                    let psi =
                        bispinor_from_bundle(&res.geom, &res.spin, &CylPoint::new(rho, phi, z), &b);
                    let j = density_and_current(&psi, phi);
                    let (conv, spin) =
                        current_z_split_from_bundle(&res.geom, &res.spin, rho, phi, &b);
                    table.row([
                        num(rho * s),
                        num(phi),
                        num(z * s),
                        num(t * s),
                        num(j.density),
                        num(j.j_rho),
                        num(j.j_phi),
                        num(j.j_z),
                        num(conv),
                        num(spin),
                    ])?;
                }
            }
        }
    }
    table.finish()
}

#[derive(Serialize)]
struct ModeSummary {
    area_fraction: f64,
    min_jz: f64,
    backflow_flux: f64,
    total_flux: f64,
    warnings: Vec<String>,
}

impl From<&BackflowReport> for ModeSummary {
    fn from(r: &BackflowReport) -> Self {
        ModeSummary {
            area_fraction: r.area_fraction,
            min_jz: r.min_jz,
            backflow_flux: r.backflow_flux,
            total_flux: r.total_flux,
            warnings: r.warnings.clone(),
        }
    }
}

#[derive(Serialize)]
struct PersistenceEntry {
    t: f64,
    k_parallel: f64,
    area_fraction: f64,
    min_jz: f64,
    backflow_flux: f64,
    total_flux: f64,
}

/// Summary written next to the backflow table. Every key is always present;
/// quantities of a mode that was not run are `null`.
#[derive(Serialize)]
struct BackflowSummary {
    config: RunConfig,
    mode: ModeArg,
    primary_mode: BackflowMode,
    a0: [f64; 2],
    #[serde(rename = "L")]
    distance: f64,
    t: f64,
    k_parallel: f64,
    area_fraction: f64,
    min_jz: f64,
    backflow_flux: f64,
    total_flux: f64,
    warnings: Vec<String>,
    exact: Option<ModeSummary>,
    asymptotic: Option<ModeSummary>,
    mask_agreement: Option<f64>,
    relative_disagreement: Option<f64>,
    persistence: Vec<PersistenceEntry>,
}

pub const BACKFLOW_HEADER: [&str; 5] =
    ["rho", "phi", "jz_exact", "jz_asymptotic", "sufficient_flag"];

/// `out.csv` -> `out.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

pub fn cmd_backflow(
    cfg: &RunConfig,
    res: &Resolved,
    out: Option<&Path>,
    mode: ModeArg,
) -> Result<(), Failure> {
    let times = cfg.plane.times();
    let planes = times
        .iter()
        .map(|&t| DetectorPlane::new(cfg.plane.distance, t))
        .collect::<Result<Vec<_>, _>>()?;
    if planes.windows(2).any(|w| w[1].t() <= w[0].t()) {
        return Err(Failure::config("plane.t_list must be strictly increasing"));
    }
    let spec = packet(cfg, res)?;
    let run = |plane: &DetectorPlane, m: BackflowMode| {
        backflow_map(&spec, &res.geom, &res.spin, plane, res.grid, m)
    };
    let primary_mode = match mode {
        ModeArg::Exact => BackflowMode::Exact,
        _ => BackflowMode::Asymptotic,
    };

    let mut persistence = Vec::new();
    let mut last = None;
    for plane in &planes {
        let exact = matches!(mode, ModeArg::Exact | ModeArg::Both)
            .then(|| run(plane, BackflowMode::Exact))
            .transpose()?;
        let asym = matches!(mode, ModeArg::Asymptotic | ModeArg::Both)
            .then(|| run(plane, BackflowMode::Asymptotic))
            .transpose()?;
        let primary = if primary_mode == BackflowMode::Exact {
            &exact
        } else {
            &asym
        };
        let p = primary.as_ref().expect("primary mode was run");
        persistence.push(PersistenceEntry {
            t: plane.t(),
            k_parallel: k_parallel(&res.geom, plane.distance(), plane.t())?,
            area_fraction: p.area_fraction,
            min_jz: p.min_jz,
            backflow_flux: p.backflow_flux,
            total_flux: p.total_flux,
        });
        last = Some((*plane, exact, asym));
    }
    let (plane, exact, asym) = last.expect("at least one time");

    let s = cfg.length_scale();
    let mut table = Table::create(out, cfg.output.format, &BACKFLOW_HEADER)?;
    let n_phi = res.grid.n_phi;
    let nan = || "nan".to_string();
    for idx in 0..res.grid.len() {
        let (i, j) = (idx / n_phi, idx % n_phi);
        let sufficient = exact
            .as_ref()
            .or(asym.as_ref())
            .map(|r| r.sufficient[idx])
            .unwrap_or(false);
        table.row([
            num(res.grid.rho(&res.geom, i) * s),
            num(res.grid.phi(j)),
            exact.as_ref().map(|r| num(r.jz[idx])).unwrap_or_else(nan),
            asym.as_ref().map(|r| num(r.jz[idx])).unwrap_or_else(nan),
            if sufficient { "1" } else { "0" }.to_string(),
        ])?;
    }
    table.finish()?;

    let primary = if primary_mode == BackflowMode::Exact {
        &exact
    } else {
        &asym
    };
    let p = primary.as_ref().expect("primary mode was run");
    let (agreement, disagreement) = match (&exact, &asym) {
        (Some(e), Some(a)) => (
            Some(mask_agreement(&res.geom, e, a)?),
            relative_disagreement(e, a).ok(),
        ),
        _ => (None, None),
    };
    let summary = BackflowSummary {
        config: cfg.clone(),
        mode,
        primary_mode,
        a0: [spec.a0.re, spec.a0.im],
        distance: plane.distance(),
        t: plane.t(),
        k_parallel: k_parallel(&res.geom, plane.distance(), plane.t())?,
        area_fraction: p.area_fraction,
        min_jz: p.min_jz,
        backflow_flux: p.backflow_flux,
        total_flux: p.total_flux,
        warnings: p.warnings.clone(),
        exact: exact.as_ref().map(ModeSummary::from),
        asymptotic: asym.as_ref().map(ModeSummary::from),
        mask_agreement: agreement,
        relative_disagreement: disagreement,
        persistence,
    };
    let text = serde_json::to_string_pretty(&summary).map_err(Failure::io)? + "\n";
    match out {
        Some(path) => std::fs::write(summary_path(path), text).map_err(Failure::io)?,
        None => eprint!("{text}"),
    }
    Ok(())
}
