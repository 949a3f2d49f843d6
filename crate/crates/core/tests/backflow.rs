use std::f64::consts::PI;

use waveguide_core::backflow::*;
use waveguide_core::kernels::{KernelFamily, KernelSpec, WaveguideGeometry};
use waveguide_core::oracle::QuadratureSettings;
use waveguide_core::wavepacket::{current_z_split, normalize, CylPoint, SpinState};

fn normalized(family: KernelFamily, geom: &WaveguideGeometry) -> KernelSpec {
    let unit = KernelSpec::new(family, 1.0, 2.0).unwrap();
    unit.with_a0(normalize(&unit, geom, &QuadratureSettings::default()).unwrap())
}

fn transverse() -> SpinState {
    SpinState::new(PI / 2.0, PI / 2.0).unwrap()
}

fn small_grid() -> CrossSectionGrid {
    CrossSectionGrid::new(50, 64).unwrap()
}

#[test]
fn sufficiency_implies_negative_current() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom);
    for theta in [0.3, PI / 2.0, 2.0] {
        let spin = SpinState::new(theta, 1.0).unwrap();
        for ratio in [1.1, 2.0, 20.0] {
            let plane = DetectorPlane::new(200.0, 200.0 * ratio).unwrap();
            let r = backflow_map(
                &spec,
                &geom,
                &spin,
                &plane,
                CrossSectionGrid::default(),
                BackflowMode::Asymptotic,
            )
            .unwrap();
            for (s, m) in r.sufficient.iter().zip(&r.mask) {
                assert!(!s || *m);
            }
        }
    }
}

#[test]
fn sign_pattern_ignores_the_spectrum() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spin = SpinState::new(1.2, 0.7).unwrap();
    let plane = DetectorPlane::new(200.0, 300.0).unwrap();
    let masks: Vec<Vec<bool>> = KernelFamily::ALL
        .iter()
        .map(|&f| {
            backflow_map(
                &normalized(f, &geom),
                &geom,
                &spin,
                &plane,
                small_grid(),
                BackflowMode::Asymptotic,
            )
            .unwrap()
            .mask
        })
        .collect();
    assert!(masks[0].iter().any(|&m| m));
    for m in &masks[1..] {
        assert_eq!(m, &masks[0]);
    }
}

#[test]
fn rotating_the_spin_rotates_the_mask() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom);
    let plane = DetectorPlane::new(200.0, 1000.0).unwrap();
    let grid = small_grid();
    let shift = 8;
    let delta = shift as f64 * 2.0 * PI / grid.n_phi as f64;
    let a = backflow_map(
        &spec,
        &geom,
        &SpinState::new(1.0, 0.5).unwrap(),
        &plane,
        grid,
        BackflowMode::Asymptotic,
    )
    .unwrap();
    let b = backflow_map(
        &spec,
        &geom,
        &SpinState::new(1.0, 0.5 + delta).unwrap(),
        &plane,
        grid,
        BackflowMode::Asymptotic,
    )
    .unwrap();
    for i in 0..grid.n_rho {
        for j in 0..grid.n_phi {
            let jr = (j + shift) % grid.n_phi;
            let (x, y) = (a.jz[i * grid.n_phi + j], b.jz[i * grid.n_phi + jr]);
            assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-300), "{x} {y}");
        }
    }
}

#[test]
fn spin_term_is_mirror_odd() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K0Diff, &geom);
    let spin = SpinState::new(1.0, 0.9).unwrap();
    for &(rho, phi) in &[(1.0, 0.2), (3.0, 2.5), (4.5, 5.0)] {
        let p = CylPoint::new(rho, phi, 30.0);
        let q = CylPoint::new(rho, 2.0 * spin.phi_spin() - phi, 30.0);
        let (c1, s1) = current_z_split(&spec, &geom, &spin, &p, 45.0).unwrap();
        let (c2, s2) = current_z_split(&spec, &geom, &spin, &q, 45.0).unwrap();
        assert!((c1 - c2).abs() <= 1e-14 * c1.abs());
        assert!((s1 + s2).abs() <= 1e-12 * s1.abs());
    }
}

#[test]
fn parallel_spin_has_no_backflow() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom);
    let plane = DetectorPlane::new(200.0, 400.0).unwrap();
    let r = backflow_map(
        &spec,
        &geom,
        &SpinState::up(),
        &plane,
        CrossSectionGrid::default(),
        BackflowMode::Asymptotic,
    )
    .unwrap();
    assert_eq!(r.area_fraction, 0.0);
    assert_eq!(r.backflow_flux, 0.0);
    assert!(r.total_flux > 0.0);
}

#[test]
fn transverse_spin_backflow_persists() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom);
    let t_list: Vec<f64> = [1.1, 1.5, 2.0, 5.0, 20.0]
        .iter()
        .map(|r| r * 200.0)
        .collect();
    let reports = persistence_scan(
        &spec,
        &geom,
        &transverse(),
        200.0,
        &t_list,
        CrossSectionGrid::default(),
        BackflowMode::Asymptotic,
    )
    .unwrap();
    let fractions: Vec<f64> = reports.iter().map(|r| r.area_fraction).collect();
    for w in fractions.windows(2) {
        assert!(w[1] >= w[0], "{fractions:?}");
    }
    let last = *fractions.last().unwrap();
    assert!((0.40..=0.50).contains(&last), "{last}");
}

#[test]
fn exact_map_shows_backflow() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom);
    let spin = transverse();
    let grid = CrossSectionGrid::default();
    for ratio in [2.0, 5.0] {
        let plane = DetectorPlane::new(200.0, 200.0 * ratio).unwrap();
        let exact = backflow_map(&spec, &geom, &spin, &plane, grid, BackflowMode::Exact).unwrap();
        let asym =
            backflow_map(&spec, &geom, &spin, &plane, grid, BackflowMode::Asymptotic).unwrap();
        let agree = mask_agreement(&geom, &exact, &asym).unwrap();
        assert!(exact.area_fraction > 0.0);
        assert!(exact.backflow_flux < 0.0);
        assert!(agree >= 0.9);
    }
}

#[test]
fn spin_current_dominates_at_sufficient_points() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom);
    let spin = transverse();
    let grid = CrossSectionGrid::default();
    let plane = DetectorPlane::new(200.0, 1000.0).unwrap();
    let exact = backflow_map(&spec, &geom, &spin, &plane, grid, BackflowMode::Exact).unwrap();
    let mut checked = 0;
    for (idx, _) in exact
        .sufficient
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .step_by(97)
    {
        let p = CylPoint::new(
            grid.rho(&geom, idx / grid.n_phi),
            grid.phi(idx % grid.n_phi),
            plane.distance(),
        );
        let (convective, spin_term) = current_z_split(&spec, &geom, &spin, &p, plane.t()).unwrap();
        assert!(spin_term < 0.0 && spin_term.abs() > convective, "{p:?}");
        checked += 1;
    }
    assert!(checked > 10);
}

#[test]
fn asymptotic_form_improves_with_distance() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom);
    let spin = transverse();
    let errors: Vec<f64> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&l| {
            let plane = DetectorPlane::new(l, 2.0 * l).unwrap();
            let e = backflow_map(
                &spec,
                &geom,
                &spin,
                &plane,
                small_grid(),
                BackflowMode::Exact,
            )
            .unwrap();
            let a = backflow_map(
                &spec,
                &geom,
                &spin,
                &plane,
                small_grid(),
                BackflowMode::Asymptotic,
            )
            .unwrap();
            relative_disagreement(&e, &a).unwrap()
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    assert!(errors[2] < 0.1, "{errors:?}");
}

#[test]
fn wide_guides_lose_backflow() {
    let spin = transverse();
    let mut last = f64::INFINITY;
    for a in [5.0, 20.0, 80.0, 320.0] {
        let geom = WaveguideGeometry::new(a).unwrap();
        let spec = normalized(KernelFamily::K1Ratio, &geom);
        let plane = DetectorPlane::new(200.0, 4000.0).unwrap();
        let f = backflow_map(
            &spec,
            &geom,
            &spin,
            &plane,
            CrossSectionGrid::default(),
            BackflowMode::Asymptotic,
        )
        .unwrap()
        .area_fraction;
        assert!(f < last, "a={a}: {f}");
        last = f;
    }
    assert!(last < 0.05, "{last}");
}

#[test]
fn short_distance_is_flagged() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom);
    let plane = DetectorPlane::new(20.0, 40.0).unwrap();
    let r = backflow_map(
        &spec,
        &geom,
        &transverse(),
        &plane,
        small_grid(),
        BackflowMode::Asymptotic,
    )
    .unwrap();
    assert_eq!(r.warnings.len(), 1);
}

#[test]
fn reports_on_different_grids_are_not_compared() {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom);
    let plane = DetectorPlane::new(60.0, 90.0).unwrap();
    let a = backflow_map(
        &spec,
        &geom,
        &transverse(),
        &plane,
        small_grid(),
        BackflowMode::Exact,
    )
    .unwrap();
    let b = backflow_map(
        &spec,
        &geom,
        &transverse(),
        &plane,
        CrossSectionGrid::new(10, 10).unwrap(),
        BackflowMode::Exact,
    )
    .unwrap();
    assert!(mask_agreement(&geom, &a, &b).is_err());
    assert!(relative_disagreement(&a, &b).is_err());
}
