use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use waveguide_core::backflow::{
    backflow_map, mask_agreement, BackflowMode, CrossSectionGrid, DetectorPlane,
};
use waveguide_core::kernels::{kernel_I, KernelFamily, KernelSpec};
use waveguide_core::oracle::{normalization_delta, oracle_I};
use waveguide_core::wavepacket::{
    continuity_residual, current_z_closed, density_and_current, dirac_residual, evaluate_bispinor,
    total_norm, CylPoint, SpinState,
};
use waveguide_core::Result;

use crate::commands::packet;
use crate::config::{Resolved, RunConfig};
use crate::failure::Failure;

pub enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

struct Ctx<'a> {
    res: &'a Resolved,
    spec: KernelSpec,
    planes: Vec<DetectorPlane>,
    fast: bool,
}

impl Ctx<'_> {
    fn count(&self, full: usize, fast: usize) -> usize {
        if self.fast {
            fast
        } else {
            full
        }
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0x5eed ^ salt)
    }

    fn interior(&self, rng: &mut ChaCha8Rng) -> (SpinState, CylPoint, f64) {
        let a = self.res.geom.a();
        let spin =
            SpinState::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI)).expect("in range");
        let p = CylPoint::new(
            rng.gen_range(0.05..0.9) * a,
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.5..10.0),
        );
        (spin, p, rng.gen_range(0.5..10.0))
    }

    fn grid(&self) -> CrossSectionGrid {
        if self.fast {
            CrossSectionGrid {
                n_rho: 50,
                n_phi: 64,
            }
        } else {
            self.res.grid
        }
    }
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn closed_form_vs_oracle(c: &Ctx) -> Result<Outcome> {
    let n = c.count(60, 12);
    let mut rng = c.rng(1);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let (z, tau) = (rng.gen_range(0.0..20.0), rng.gen_range(0.0..20.0));
        let closed = kernel_I(&c.spec, &c.res.geom, z, tau)?;
        let quad = oracle_I(&c.spec, &c.res.geom, z, tau, &c.res.settings)?.value;
        worst = worst.max((closed - quad).norm() / closed.norm().max(1e-6 * c.spec.a0.norm()));
    }
    Ok(verdict(
        worst < 1e-6,
        format!("{n} points, max relative error {worst:.3e}"),
    ))
}

fn dirac(c: &Ctx) -> Result<Outcome> {
    let n = c.count(20, 5);
    let mut rng = c.rng(2);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let (spin, p, t) = c.interior(&mut rng);
        worst = worst.max(dirac_residual(&c.spec, &c.res.geom, &spin, &p, t, 1e-3)?);
    }
    Ok(verdict(
        worst < 1e-4,
        format!("{n} points, max residual {worst:.3e}"),
    ))
}

fn fd_order(c: &Ctx) -> Result<Outcome> {
    let n = c.count(5, 2);
    let mut rng = c.rng(3);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for _ in 0..n {
        let (spin, p, t) = c.interior(&mut rng);
        let r = dirac_residual(&c.spec, &c.res.geom, &spin, &p, t, 1e-2)?
            / dirac_residual(&c.spec, &c.res.geom, &spin, &p, t, 5e-3)?;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(verdict(
        lo >= 3.5 && hi <= 4.5,
        format!("step-halving ratios in [{lo:.3}, {hi:.3}]"),
    ))
}

fn boundary(c: &Ctx) -> Result<Outcome> {
    let n = c.count(100, 20);
    let mut rng = c.rng(4);
    let geom = &c.res.geom;
    let mut worst = 0.0_f64;
    for k in 0..n {
        let (spin, p, t) = c.interior(&mut rng);
        let q = if k % 2 == 0 {
            CylPoint::new(geom.a(), p.phi, p.z)
        } else {
            CylPoint::new(p.rho, p.phi, 0.0)
        };
        let scale = evaluate_bispinor(&c.spec, geom, &spin, &p, t)?.norm_sqr();
        let psi = evaluate_bispinor(&c.spec, geom, &spin, &q, t)?;
        let s = density_and_current(&psi, q.phi);
        let normal = if k % 2 == 0 { s.j_rho } else { s.j_z };
        let large = (psi.c[0].norm_sqr() + psi.c[1].norm_sqr()).sqrt();
        let scale = scale.max(psi.norm_sqr());
        worst = worst.max(large / scale.sqrt()).max(normal.abs() / scale);
    }
    Ok(verdict(
        worst <= 1e-12,
        format!("{n} wall points, max relative magnitude {worst:.3e}"),
    ))
}

fn continuity(c: &Ctx) -> Result<Outcome> {
    let n = c.count(50, 10);
    let mut rng = c.rng(5);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let (spin, p, t) = c.interior(&mut rng);
        worst = worst.max(continuity_residual(
            &c.spec,
            &c.res.geom,
            &spin,
            &p,
            t,
            1e-3,
        )?);
    }
    Ok(verdict(
        worst < 1e-4,
        format!("{n} points, max residual {worst:.3e}"),
    ))
}

fn current_paths(c: &Ctx) -> Result<Outcome> {
    let n = c.count(50, 10);
    let mut rng = c.rng(6);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let (spin, p, t) = c.interior(&mut rng);
        let matrix = density_and_current(
            &evaluate_bispinor(&c.spec, &c.res.geom, &spin, &p, t)?,
            p.phi,
        )
        .j_z;
        let closed = current_z_closed(&c.spec, &c.res.geom, &spin, &p, t)?;
        if closed != 0.0 {
            worst = worst.max((matrix - closed).abs() / closed.abs());
        }
    }
    Ok(verdict(
        worst <= 1e-12,
        format!("{n} points, max relative gap {worst:.3e}"),
    ))
}

fn duality(c: &Ctx) -> Result<Outcome> {
    let d = normalization_delta(&c.res.unit_spec, &c.res.geom, &c.res.settings)?;
    Ok(verdict(d < 1e-6, format!("relative gap {d:.3e}")))
}

fn conservation(c: &Ctx) -> Result<Outcome> {
    let multiples: &[f64] = if c.fast {
        &[0.0, 5.0]
    } else {
        &[0.0, 1.0, 5.0, 20.0]
    };
    let a = c.res.geom.a();
    let mut worst = 0.0_f64;
    for &m in multiples {
        worst = worst.max((total_norm(&c.spec, &c.res.geom, m * a, &c.res.settings)? - 1.0).abs());
    }
    Ok(verdict(
        worst < 1e-6,
        format!(
            "max |norm - 1| = {worst:.3e} over {} times",
            multiples.len()
        ),
    ))
}

fn sufficiency(c: &Ctx) -> Result<Outcome> {
    if c.planes.is_empty() {
        return Ok(Outcome::Skip(
            "no detector time beyond the light cone".into(),
        ));
    }
    let mut violations = 0usize;
    let mut flagged = 0usize;
    for plane in &c.planes {
        let r = backflow_map(
            &c.spec,
            &c.res.geom,
            &c.res.spin,
            plane,
            c.grid(),
            BackflowMode::Asymptotic,
        )?;
        for (s, m) in r.sufficient.iter().zip(&r.mask) {
            flagged += *s as usize;
            violations += (*s && !*m) as usize;
        }
    }
    Ok(verdict(
        violations == 0,
        format!("{flagged} sufficient cells, {violations} violations"),
    ))
}

fn sign_invariance(c: &Ctx) -> Result<Outcome> {
    let Some(plane) = c.planes.first() else {
        return Ok(Outcome::Skip(
            "no detector time beyond the light cone".into(),
        ));
    };
    let (tau0, z0) = (c.res.unit_spec.tau0, c.res.unit_spec.z0);
    let masks = KernelFamily::ALL
        .iter()
        .map(|&f| {
            let spec = KernelSpec::new(f, tau0, z0).or_else(|_| KernelSpec::new(f, 1.0, 2.0))?;
            Ok(backflow_map(
                &spec,
                &c.res.geom,
                &c.res.spin,
                plane,
                c.grid(),
                BackflowMode::Asymptotic,
            )?
            .mask)
        })
        .collect::<Result<Vec<_>>>()?;
    let differing = masks[1..]
        .iter()
        .map(|m| m.iter().zip(&masks[0]).filter(|(a, b)| a != b).count())
        .sum::<usize>();
    Ok(verdict(
        differing == 0,
        format!("{differing} cells differ across families"),
    ))
}

fn exact_vs_asymptotic(c: &Ctx) -> Result<Outcome> {
    let Some(plane) = c.planes.last() else {
        return Ok(Outcome::Skip(
            "no detector time beyond the light cone".into(),
        ));
    };
    if plane.distance() < 200.0 {
        return Ok(Outcome::Skip(format!(
            "L = {} is below 200",
            plane.distance()
        )));
    }
    let e = backflow_map(
        &c.spec,
        &c.res.geom,
        &c.res.spin,
        plane,
        c.grid(),
        BackflowMode::Exact,
    )?;
    let a = backflow_map(
        &c.spec,
        &c.res.geom,
        &c.res.spin,
        plane,
        c.grid(),
        BackflowMode::Asymptotic,
    )?;
    let agree = mask_agreement(&c.res.geom, &e, &a)?;
    Ok(verdict(
        agree >= 0.9,
        format!("masks agree on {:.2}% of the area", 100.0 * agree),
    ))
}

type Check = fn(&Ctx) -> Result<Outcome>;

const CHECKS: [(&str, Check); 11] = [
    ("closed_form_vs_oracle", closed_form_vs_oracle),
    ("dirac_residual", dirac),
    ("dirac_fd_order", fd_order),
    ("boundary_conditions", boundary),
    ("continuity", continuity),
    ("current_paths", current_paths),
    ("normalization_duality", duality),
    ("norm_conservation", conservation),
    ("backflow_sufficiency", sufficiency),
    ("sign_invariance", sign_invariance),
    ("exact_vs_asymptotic_mask", exact_vs_asymptotic),
];

/// Runs every check, printing one line each; fails with the first failing check named.
pub fn cmd_validate(
    cfg: &RunConfig,
    res: &Resolved,
    fast: bool,
    out: &mut impl std::io::Write,
) -> std::result::Result<(), Failure> {
    let spec = packet(cfg, res)?;
    let planes = cfg
        .plane
        .times()
        .iter()
        .filter_map(|&t| DetectorPlane::new(cfg.plane.distance, t).ok())
        .collect();
    let ctx = Ctx {
        res,
        spec,
        planes,
        fast,
    };
    let mut first_failure = None;
    for (name, check) in CHECKS {
        let line = match check(&ctx) {
            Ok(Outcome::Pass(d)) => format!("PASS {name}: {d}"),
            Ok(Outcome::Skip(d)) => format!("SKIP {name}: {d}"),
            Ok(Outcome::Fail(d)) => {
                first_failure.get_or_insert(name);
                format!("FAIL {name}: {d}")
            }
            Err(e) => {
                first_failure.get_or_insert(name);
                format!("FAIL {name}: {e}")
            }
        };
        writeln!(out, "{line}").map_err(Failure::io)?;
    }
    match first_failure {
        None => Ok(()),
        Some(name) => Err(Failure::validation(format!(
            "validation failed: first failing check is {name}"
        ))),
    }
}
