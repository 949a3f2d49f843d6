//! Axial current on a detector cross-section at distance `L`, its
//! large-distance form, and maps of the region where it turns negative.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{kernel_bundle, spectral_A, KernelSpec, WaveguideGeometry};
use crate::specfun::bessel_j01;
use crate::wavepacket::{current_z_split_from_bundle, SpinState};

/// Below this distance the large-distance form is flagged as unreliable.
pub const ASYMPTOTIC_WARN_DISTANCE: f64 = 50.0;

/// Cross-section `z = L` observed at time `t` (with `c = 1`, `t > L`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorPlane {
    distance: f64,
    t: f64,
}

impl DetectorPlane {
    pub fn new(distance: f64, t: f64) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(invalid("L", format!("must be positive, got {distance}")));
        }
        if !t.is_finite() {
            return Err(invalid("t", "must be finite"));
        }
        if t <= distance {
            return Err(Error::PreLightCone { ct: t, distance });
        }
        Ok(DetectorPlane { distance, t })
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Wavenumber arriving at `(L, t)`: `mu L / sqrt(t^2 - L^2)`.
pub fn k_parallel(geom: &WaveguideGeometry, distance: f64, t: f64) -> Result<f64> {
    let plane = DetectorPlane::new(distance, t)?;
    Ok(k_par(geom, &plane))
}

fn k_par(geom: &WaveguideGeometry, plane: &DetectorPlane) -> f64 {
    let (l, t) = (plane.distance, plane.t);
    geom.mu() * l / ((t - l) * (t + l)).sqrt()
}

struct Asymptotic {
    k_par: f64,
    prefactor: f64,
}

impl Asymptotic {
    fn new(spec: &KernelSpec, geom: &WaveguideGeometry, plane: &DetectorPlane) -> Self {
        let k = k_par(geom, plane);
        let (l, t, mu) = (plane.distance, plane.t, geom.mu());
        let a = spectral_A(spec, geom, k).norm_sqr();
        let prefactor = PI * t * t * k.powi(3) / (mu * mu * l.powi(3)) * a / (geom.omega(k) + 1.0);
        Asymptotic {
            k_par: k,
            prefactor,
        }
    }

    fn jz(&self, geom: &WaveguideGeometry, spin: &SpinState, rho: f64, phi: f64) -> f64 {
        let (j0, j1) = bessel_j01(geom.k_perp() * rho);
        let bracket = self.k_par * j0
            - geom.k_perp() * spin.theta().sin() * (spin.phi_spin() - phi).sin() * j1;
        self.prefactor * j0 * bracket
    }
}

pub fn asymptotic_jz(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    spin: &SpinState,
    p_cross: (f64, f64),
    plane: &DetectorPlane,
) -> f64 {
    Asymptotic::new(spec, geom, plane).jz(geom, spin, p_cross.0, p_cross.1)
}

/// `rho sin(phi_spin - phi) > 2 csc(theta) k_par / k_perp^2`.
pub fn backflow_sufficient(
    geom: &WaveguideGeometry,
    spin: &SpinState,
    p_cross: (f64, f64),
    plane: &DetectorPlane,
) -> bool {
    sufficient(geom, spin, k_par(geom, plane), p_cross.0, p_cross.1)
}

fn sufficient(geom: &WaveguideGeometry, spin: &SpinState, k_par: f64, rho: f64, phi: f64) -> bool {
    let s = spin.theta().sin();
    if s <= 0.0 {
        return false;
    }
    rho * (spin.phi_spin() - phi).sin() > 2.0 * k_par / (s * geom.k_perp().powi(2))
}

/// Cell-centred polar grid over the cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossSectionGrid {
    pub n_rho: usize,
    pub n_phi: usize,
}

impl Default for CrossSectionGrid {
    fn default() -> Self {
        CrossSectionGrid {
            n_rho: 200,
            n_phi: 256,
        }
    }
}

impl CrossSectionGrid {
    pub fn new(n_rho: usize, n_phi: usize) -> Result<Self> {
        if n_rho == 0 || n_phi == 0 {
            return Err(invalid("grid", "n_rho and n_phi must be positive"));
        }
        Ok(CrossSectionGrid { n_rho, n_phi })
    }

    pub fn rho(&self, geom: &WaveguideGeometry, i: usize) -> f64 {
        (i as f64 + 0.5) * geom.a() / self.n_rho as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * 2.0 * PI / self.n_phi as f64
    }

    /// `rho d_rho d_phi` for a cell in ring `i`.
    pub fn weight(&self, geom: &WaveguideGeometry, i: usize) -> f64 {
        self.rho(geom, i) * (geom.a() / self.n_rho as f64) * (2.0 * PI / self.n_phi as f64)
    }

    pub fn len(&self) -> usize {
        self.n_rho * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackflowMode {
    Exact,
    Asymptotic,
}

/// Cell values are stored ring by ring: index `i * n_phi + j`.
#[derive(Debug, Clone, Serialize)]
pub struct BackflowReport {
    pub mode: BackflowMode,
    pub plane: DetectorPlane,
    pub grid: CrossSectionGrid,
    pub jz: Vec<f64>,
    pub mask: Vec<bool>,
    pub sufficient: Vec<bool>,
    pub area_fraction: f64,
    pub min_jz: f64,
    pub backflow_flux: f64,
    pub total_flux: f64,
    pub warnings: Vec<String>,
}

pub fn backflow_map(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    spin: &SpinState,
    plane: &DetectorPlane,
    grid: CrossSectionGrid,
    mode: BackflowMode,
) -> Result<BackflowReport> {
    spec.validate()?;
    let k = k_par(geom, plane);
    let rows: Vec<(f64, f64)> = (0..grid.n_rho)
        .map(|i| (grid.rho(geom, i), grid.weight(geom, i)))
        .collect();
    let cell: Box<dyn Fn(f64, f64) -> f64 + Sync> = match mode {
        BackflowMode::Exact => {
            let b = kernel_bundle(spec, geom, plane.distance, plane.t)?;
            let geom = *geom;
            let spin = *spin;
            Box::new(move |rho, phi| {
                let (c, s) = current_z_split_from_bundle(&geom, &spin, rho, phi, &b);
                c + s
            })
        }
        BackflowMode::Asymptotic => {
            let asym = Asymptotic::new(spec, geom, plane);
            let geom = *geom;
            let spin = *spin;
            Box::new(move |rho, phi| asym.jz(&geom, &spin, rho, phi))
        }
    };
    let per_row: Vec<Vec<(f64, bool)>> = rows
        .par_iter()
        .map(|&(rho, _)| {
            (0..grid.n_phi)
                .map(|j| {
                    let phi = grid.phi(j);
                    (cell(rho, phi), sufficient(geom, spin, k, rho, phi))
                })
                .collect()
        })
        .collect();

    let mut jz = Vec::with_capacity(grid.len());
    let mut suff = Vec::with_capacity(grid.len());
    let (mut neg_area, mut area, mut bf, mut total) = (0.0, 0.0, 0.0, 0.0);
    let mut min_jz = f64::INFINITY;
    for (row, &(_, w)) in per_row.iter().zip(&rows) {
        for &(j, s) in row {
            if !j.is_finite() {
                return Err(Error::NonFinite {
                    function: "backflow_map",
                    z: num_complex::Complex64::new(j, 0.0),
                });
            }
            area += w;
            total += j * w;
            if j < 0.0 {
                neg_area += w;
                bf += j * w;
            }
            min_jz = min_jz.min(j);
            jz.push(j);
            suff.push(s);
        }
    }
    let mut warnings = Vec::new();
    if mode == BackflowMode::Asymptotic && plane.distance < ASYMPTOTIC_WARN_DISTANCE {
        warnings.push(format!(
            "L = {} is below {}; the large-distance current may be inaccurate",
            plane.distance, ASYMPTOTIC_WARN_DISTANCE
        ));
    }
    Ok(BackflowReport {
        mode,
        plane: *plane,
        grid,
        mask: jz.iter().map(|&j| j < 0.0).collect(),
        jz,
        sufficient: suff,
        area_fraction: neg_area / area,
        min_jz,
        backflow_flux: bf,
        total_flux: total,
        warnings,
    })
}

/// One report per detector time at fixed distance.
pub fn persistence_scan(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    spin: &SpinState,
    distance: f64,
    t_list: &[f64],
    grid: CrossSectionGrid,
    mode: BackflowMode,
) -> Result<Vec<BackflowReport>> {
    t_list
        .iter()
        .map(|&t| {
            backflow_map(
                spec,
                geom,
                spin,
                &DetectorPlane::new(distance, t)?,
                grid,
                mode,
            )
        })
        .collect()
}

fn same_grid(a: &BackflowReport, b: &BackflowReport) -> Result<()> {
    if a.grid != b.grid {
        return Err(invalid("grid", "reports are on different grids"));
    }
    Ok(())
}

/// Area-weighted fraction of cells on which two masks coincide.
pub fn mask_agreement(
    geom: &WaveguideGeometry,
    a: &BackflowReport,
    b: &BackflowReport,
) -> Result<f64> {
    same_grid(a, b)?;
    let n_phi = a.grid.n_phi;
    let (mut agree, mut area) = (0.0, 0.0);
    for (idx, (x, y)) in a.mask.iter().zip(&b.mask).enumerate() {
        let w = a.grid.weight(geom, idx / n_phi);
        area += w;
        if x == y {
            agree += w;
        }
    }
    Ok(agree / area)
}

/// Mean of `|j_exact - j_asym| / |j_exact|` over cells where `|j_exact|`
/// exceeds 1% of its cross-section maximum.
pub fn relative_disagreement(exact: &BackflowReport, asymptotic: &BackflowReport) -> Result<f64> {
    same_grid(exact, asymptotic)?;
    let peak = exact.jz.iter().fold(0.0_f64, |m, j| m.max(j.abs()));
    let (mut sum, mut n) = (0.0, 0usize);
    for (e, a) in exact.jz.iter().zip(&asymptotic.jz) {
        if e.abs() > 0.01 * peak {
            sum += (e - a).abs() / e.abs();
            n += 1;
        }
    }
    if n == 0 {
        return Err(invalid(
            "exact",
            "current vanishes on the whole cross-section",
        ));
    }
    Ok(sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelFamily;

    #[test]
    fn k_parallel_values() {
        let g = WaveguideGeometry::new(5.0).unwrap();
        let k = k_parallel(&g, 10.0, 10.0 * 2f64.sqrt()).unwrap();
        assert!((k - g.mu()).abs() < 1e-14);
        let mut last = f64::INFINITY;
        for t in [11.0, 15.0, 40.0, 1e3, 1e6] {
            let k = k_parallel(&g, 10.0, t).unwrap();
            assert!(k < last && k > 0.0);
            last = k;
        }
        assert!(last < 1e-4);
        assert!(matches!(
            k_parallel(&g, 10.0, 10.0),
            Err(Error::PreLightCone { .. })
        ));
        assert!(k_parallel(&g, 10.0, 5.0).is_err());
    }

    #[test]
    fn parallel_spin_never_suffices() {
        let g = WaveguideGeometry::new(5.0).unwrap();
        let plane = DetectorPlane::new(10.0, 1e5).unwrap();
        for spin in [SpinState::up(), SpinState::new(PI, 1.0).unwrap()] {
            for j in 0..16 {
                assert!(!backflow_sufficient(
                    &g,
                    &spin,
                    (4.9, j as f64 * 0.4),
                    &plane
                ));
            }
        }
    }

    #[test]
    fn sufficiency_at_wall_for_late_times() {
        let g = WaveguideGeometry::new(5.0).unwrap();
        let spin = SpinState::new(PI / 2.0, PI / 2.0).unwrap();
        let plane = DetectorPlane::new(200.0, 4000.0).unwrap();
        let rhs = 2.0 * k_par(&g, &plane) / g.k_perp().powi(2);
        assert!(rhs < g.a());
        assert!(backflow_sufficient(&g, &spin, (g.a(), 0.0), &plane));
        assert!(!backflow_sufficient(&g, &spin, (0.5 * rhs, 0.0), &plane));
    }

    #[test]
    fn grid_weights_sum_to_area() {
        let g = WaveguideGeometry::new(3.0).unwrap();
        let grid = CrossSectionGrid::new(7, 5).unwrap();
        let s: f64 = (0..7).map(|i| grid.weight(&g, i) * 5.0).sum();
        assert!((s - PI * 9.0).abs() < 1e-12);
        assert!(CrossSectionGrid::new(0, 5).is_err());
    }

    #[test]
    fn report_invariants() {
        let g = WaveguideGeometry::new(5.0).unwrap();
        let spec = KernelSpec::new(KernelFamily::K1Ratio, 1.0, 0.0).unwrap();
        let spin = SpinState::new(PI / 2.0, PI / 2.0).unwrap();
        let plane = DetectorPlane::new(40.0, 80.0).unwrap();
        let grid = CrossSectionGrid::new(20, 32).unwrap();
        for mode in [BackflowMode::Exact, BackflowMode::Asymptotic] {
            let r = backflow_map(&spec, &g, &spin, &plane, grid, mode).unwrap();
            assert!(r.backflow_flux <= 0.0);
            assert!((0.0..=1.0).contains(&r.area_fraction));
            assert_eq!(r.mask.len(), grid.len());
            assert_eq!(r.mask.iter().any(|&m| m), r.min_jz < 0.0);
            assert_eq!(r.warnings.is_empty(), mode == BackflowMode::Exact);
        }
    }
}
