//! One line per acceptance criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use waveguide_core::backflow::*;
use waveguide_core::kernels::{kernel_I, KernelFamily, KernelSpec, WaveguideGeometry};
use waveguide_core::oracle::{normalization_delta, oracle_I, QuadratureSettings};
use waveguide_core::wavepacket::*;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn spec_for(family: KernelFamily) -> KernelSpec {
    KernelSpec::new(family, 1.0, 2.0).unwrap()
}

fn normalized(family: KernelFamily, geom: &WaveguideGeometry) -> Result<KernelSpec, String> {
    let unit = spec_for(family);
    Ok(unit.with_a0(normalize(&unit, geom, &QuadratureSettings::default()).map_err(err)?))
}

fn interior(rng: &mut ChaCha8Rng, geom: &WaveguideGeometry) -> (SpinState, CylPoint, f64) {
    let spin = SpinState::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).unwrap();
    let p = CylPoint::new(
        rng.gen_range(0.05..0.9) * geom.a(),
        rng.gen_range(0.0..2.0 * PI),
        rng.gen_range(0.5..10.0),
    );
    (spin, p, rng.gen_range(0.5..10.0))
}

fn closed_form_vs_oracle() -> Verdict {
    let start = Instant::now();
    let s = QuadratureSettings::default();
    let axis: Vec<f64> = (0..6).map(|i| 4.0 * i as f64).collect();
    let mut worst = 0.0_f64;
    let mut points = usize::MAX;
    for family in KernelFamily::ALL {
        let spec = spec_for(family);
        let mut n = 0;
        for mu in [1.05, 1.5, 3.0] {
            let geom = WaveguideGeometry::from_mu(mu).map_err(err)?;
            for &z in &axis {
                for &tau in &axis {
                    let c = kernel_I(&spec, &geom, z, tau).map_err(err)?;
                    let o = oracle_I(&spec, &geom, z, tau, &s).map_err(err)?.value;
                    worst = worst.max((c - o).norm() / c.norm().max(1e-6));
                    n += 1;
                }
            }
        }
        points = points.min(n);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-6 && points >= 100 && secs < 300.0,
        format!("{points} points per family, max relative error {worst:.2e}, {secs:.1} s"),
    )
}

fn dirac_residual_check() -> Verdict {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut lo, mut hi) = (0.0_f64, f64::INFINITY, 0.0_f64);
    for family in KernelFamily::ALL {
        let spec = spec_for(family);
        for k in 0..20 {
            let (spin, p, t) = interior(&mut rng, &geom);
            worst = worst.max(dirac_residual(&spec, &geom, &spin, &p, t, 1e-3).map_err(err)?);
            if k < 5 {
                let r = dirac_residual(&spec, &geom, &spin, &p, t, 1e-2).map_err(err)?
                    / dirac_residual(&spec, &geom, &spin, &p, t, 5e-3).map_err(err)?;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    check(
        worst < 1e-4 && lo >= 3.5 && hi <= 4.5,
        format!("max residual {worst:.2e} at h = 1e-3, step-halving ratio in [{lo:.3}, {hi:.3}]"),
    )
}

fn boundary_conditions() -> Verdict {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for family in KernelFamily::ALL {
        let spec = spec_for(family);
        for k in 0..100 {
            let (spin, p, t) = interior(&mut rng, &geom);
            let wall = if k % 2 == 0 {
                CylPoint::new(geom.a(), p.phi, p.z)
            } else {
                CylPoint::new(p.rho, p.phi, 0.0)
            };
            let inner = evaluate_bispinor(&spec, &geom, &spin, &p, t).map_err(err)?;
            let psi = evaluate_bispinor(&spec, &geom, &spin, &wall, t).map_err(err)?;
            let scale = inner.norm_sqr().max(psi.norm_sqr());
            let large = psi.c[0].norm_sqr() + psi.c[1].norm_sqr();
            let s = density_and_current(&psi, wall.phi);
            let normal = if k % 2 == 0 { s.j_rho } else { s.j_z };
            worst = worst
                .max(large.sqrt() / scale.sqrt())
                .max(normal.abs() / scale);
        }
    }
    check(
        worst <= 1e-12,
        format!("400 wall points, max relative magnitude {worst:.2e}"),
    )
}

fn normalization() -> Verdict {
    let s = QuadratureSettings::default();
    let (mut delta, mut drift) = (0.0_f64, 0.0_f64);
    for family in KernelFamily::ALL {
        for geom in [
            WaveguideGeometry::new(5.0).unwrap(),
            WaveguideGeometry::from_mu(1.5).unwrap(),
        ] {
            delta = delta.max(normalization_delta(&spec_for(family), &geom, &s).map_err(err)?);
        }
        let geom = WaveguideGeometry::new(5.0).unwrap();
        let spec = normalized(family, &geom)?;
        for m in [0.0, 1.0, 5.0, 20.0] {
            drift =
                drift.max((total_norm(&spec, &geom, m * geom.a(), &s).map_err(err)? - 1.0).abs());
        }
    }
    check(
        delta < 1e-6 && drift < 1e-6,
        format!("z/k-space gap {delta:.2e}, max |norm - 1| {drift:.2e}"),
    )
}

fn continuity() -> Verdict {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let spec = spec_for(KernelFamily::ALL[k % 4]);
        let (spin, p, t) = interior(&mut rng, &geom);
        worst = worst.max(continuity_residual(&spec, &geom, &spin, &p, t, 1e-3).map_err(err)?);
    }
    check(worst < 1e-4, format!("50 points, max residual {worst:.2e}"))
}

fn transverse() -> SpinState {
    SpinState::new(PI / 2.0, PI / 2.0).unwrap()
}

fn backflow_reproduction() -> Verdict {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom)?;
    let grid = CrossSectionGrid::default();
    let plane = DetectorPlane::new(200.0, 400.0).unwrap();
    let exact = backflow_map(
        &spec,
        &geom,
        &transverse(),
        &plane,
        grid,
        BackflowMode::Exact,
    )
    .map_err(err)?;
    let (mut sufficient, mut violations) = (0, 0);
    for ratio in [2.0, 5.0, 20.0] {
        let p = DetectorPlane::new(200.0, 200.0 * ratio).unwrap();
        let r = backflow_map(
            &spec,
            &geom,
            &transverse(),
            &p,
            grid,
            BackflowMode::Asymptotic,
        )
        .map_err(err)?;
        for (s, jz) in r.sufficient.iter().zip(&r.jz) {
            sufficient += *s as usize;
            violations += (*s && *jz >= 0.0) as usize;
        }
    }
    let parallel = backflow_map(
        &spec,
        &geom,
        &SpinState::up(),
        &plane,
        grid,
        BackflowMode::Asymptotic,
    )
    .map_err(err)?;
    check(
        exact.area_fraction > 0.0 && violations == 0 && parallel.area_fraction == 0.0,
        format!(
            "exact area fraction {:.4}, {sufficient} sufficient cells over ct/L = 2, 5, 20 with {violations} violations, \
             area fraction {} for axial spin",
            exact.area_fraction, parallel.area_fraction
        ),
    )
}

fn persistence() -> Verdict {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom)?;
    let ratios = [1.1, 1.5, 2.0, 5.0, 20.0];
    let t_list: Vec<f64> = ratios.iter().map(|r| r * 200.0).collect();
    let reports = persistence_scan(
        &spec,
        &geom,
        &transverse(),
        200.0,
        &t_list,
        CrossSectionGrid::default(),
        BackflowMode::Asymptotic,
    )
    .map_err(err)?;
    let f: Vec<f64> = reports.iter().map(|r| r.area_fraction).collect();
    let monotone = f.windows(2).all(|w| w[1] >= w[0]);
    let last = f[f.len() - 1];
    let listed: Vec<String> = f.iter().map(|x| format!("{x:.4}")).collect();
    check(
        monotone && (0.40..=0.50).contains(&last),
        format!("area fractions [{}]", listed.join(", ")),
    )
}

fn asymptotic_validity() -> Verdict {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let spec = normalized(KernelFamily::K1Ratio, &geom)?;
    let mut errors = Vec::new();
    for l in [50.0, 100.0, 200.0] {
        let plane = DetectorPlane::new(l, 2.0 * l).unwrap();
        let grid = CrossSectionGrid::default();
        let e = backflow_map(
            &spec,
            &geom,
            &transverse(),
            &plane,
            grid,
            BackflowMode::Exact,
        )
        .map_err(err)?;
        let a = backflow_map(
            &spec,
            &geom,
            &transverse(),
            &plane,
            grid,
            BackflowMode::Asymptotic,
        )
        .map_err(err)?;
        errors.push(relative_disagreement(&e, &a).map_err(err)?);
    }
    check(
        errors[0] > errors[1] && errors[1] > errors[2],
        format!(
            "relative disagreement at L = 50, 100, 200: {:.3e}, {:.3e}, {:.3e}",
            errors[0], errors[1], errors[2]
        ),
    )
}

fn sign_invariance() -> Verdict {
    let geom = WaveguideGeometry::new(5.0).unwrap();
    let mut differing = 0;
    let mut negative = 0;
    for (spin, ratio) in [
        (transverse(), 2.0),
        (SpinState::new(1.0, 4.0).unwrap(), 5.0),
    ] {
        let plane = DetectorPlane::new(200.0, 200.0 * ratio).unwrap();
        let signs = KernelFamily::ALL
            .iter()
            .map(|&f| {
                let r = backflow_map(
                    &normalized(f, &geom)?,
                    &geom,
                    &spin,
                    &plane,
                    CrossSectionGrid::default(),
                    BackflowMode::Asymptotic,
                )
                .map_err(err)?;
                Ok(r.jz.iter().map(|j| j.signum()).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>, String>>()?;
        negative += signs[0].iter().filter(|&&s| s < 0.0).count();
        for s in &signs[1..] {
            differing += s.iter().zip(&signs[0]).filter(|(a, b)| a != b).count();
        }
    }
    check(
        differing == 0 && negative > 0,
        format!("{differing} cells differ across the four families ({negative} negative cells in the reference)"),
    )
}

fn cli_determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_waveguide");
    let dir = tempfile::tempdir().map_err(err)?;
    let validate = Command::new(bin).arg("validate").output().map_err(err)?;
    if !validate.status.success() {
        return Err(format!("validate exited with {:?}", validate.status.code()));
    }
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"grid": {"n_rho": 40, "n_phi": 48, "n_z": 5, "z_max": 8}, "plane": {"L": 200, "t_list": [300, 400]}}"#,
    )
    .map_err(err)?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let mut files = Vec::new();
        for cmd in ["backflow", "field", "current"] {
            let out = dir.path().join(format!("{cmd}{run}.csv"));
            let st = Command::new(bin)
                .args([cmd, "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(err)?;
            if !st.success() {
                return Err(format!("{cmd} exited with {:?}", st.code()));
            }
            files.push(std::fs::read(&out).map_err(err)?);
            if cmd == "backflow" {
                let summary =
                    std::fs::read_to_string(out.with_extension("summary.json")).map_err(err)?;
                // the path is the only field that differs between the runs
                files.push(
                    summary
                        .replace(&format!("backflow{run}"), "backflow")
                        .into_bytes(),
                );
            }
        }
        outputs.push(files);
    }
    let identical = outputs[0] == outputs[1];
    let bytes: usize = outputs[0].iter().map(|f| f.len()).sum();
    check(
        identical,
        format!("validate exit 0; {bytes} bytes of output identical across two runs"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("closed form matches quadrature", closed_form_vs_oracle),
        ("Dirac residual", dirac_residual_check),
        ("hard-wall boundary conditions", boundary_conditions),
        ("normalization duality and conservation", normalization),
        ("continuity equation", continuity),
        ("backflow region at L = 200, ct = 2L", backflow_reproduction),
        ("backflow persistence", persistence),
        ("asymptotic current improves with L", asymptotic_validity),
        ("sign pattern independent of the spectrum", sign_invariance),
        ("CLI validation and determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("PASS {:>2} {name}: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
