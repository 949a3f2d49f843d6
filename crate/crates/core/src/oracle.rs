//! Direct quadrature of the defining k-integrals, used as ground truth for the
//! closed forms.
//!
//! Integrands are oscillatory; each panel boundary is a zero of `sin(kz)`
//! (or `cos(kz)`) or a point where the phase `tau w(k)` has advanced by `2 pi`,
//! so no panel holds more than about one period of either factor.

use num_complex::Complex64 as C;

use crate::error::{invalid, Result};
use crate::kernels::{
    kernel_bundle, spectral_A, spectral_f, KernelFamily, KernelSpec, WaveguideGeometry,
};
use crate::quadrature::{integrate, integrate_real, Estimate, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper integration limit; `None` picks it from the spectral envelope.
    pub k_max: Option<f64>,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            k_max: None,
            max_subdivisions: 20_000,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(invalid(
                "rel_tol",
                format!("must be positive, got {}", self.rel_tol),
            ));
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(invalid(
                "abs_tol",
                format!("must be non-negative, got {}", self.abs_tol),
            ));
        }
        if let Some(k) = self.k_max {
            if !(k > 0.0 && k.is_finite()) {
                return Err(invalid(
                    "k_max",
                    format!("must be positive and finite, got {k}"),
                ));
            }
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions", "must be at least 1"));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance {
            rel: self.rel_tol,
            abs: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

/// Exponential decay rate of `f(k)` at large `k`.
fn decay_rate(spec: &KernelSpec) -> f64 {
    match spec.family {
        KernelFamily::KQuarterProd => spec.z0,
        _ => spec.tau0,
    }
}

/// Bound on `|f(k)|` with the oscillating factor replaced by one.
fn f_envelope(spec: &KernelSpec, geom: &WaveguideGeometry, k: f64) -> f64 {
    let w = geom.omega(k);
    match spec.family {
        KernelFamily::K1Ratio => k * (-spec.tau0 * w).exp(),
        KernelFamily::K0Diff => 2.0 * (-spec.tau0 * w).exp(),
        KernelFamily::IkQuarter => (8.0 / k.max(1e-300)).sqrt() * (-spec.tau0 * w).exp(),
        KernelFamily::KQuarterProd => spectral_f(spec, geom, k),
    }
}

/// Upper limit of the k-integrals.
///
/// The envelope `|A0| |f| (k^2 + k_perp^2 + w^2)(1 + k) / w` bounds every
/// integrand used here (up to the factor of `|A|` in the norms). Beyond its
/// maximum it decays at least like `e^{-r k}` with `r` the decay rate of `f`,
/// so stopping where it falls below `0.01 r abs_tol` leaves a tail below
/// `0.01 abs_tol`.
pub fn resolved_k_max(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    settings: &QuadratureSettings,
) -> f64 {
    if let Some(k) = settings.k_max {
        return k;
    }
    let kp2 = geom.k_perp() * geom.k_perp();
    let a0 = spec.a0.norm().max(1e-300);
    let envelope = |k: f64| {
        let w = geom.omega(k);
        a0 * f_envelope(spec, geom, k) * (k * k + kp2 + w * w) * (1.0 + k) / w
    };
    let threshold = 0.01 * decay_rate(spec).min(1.0) * settings.abs_tol.max(1e-300);
    let step = 0.25 / decay_rate(spec).clamp(1e-3, 4.0);
    let mut k = step;
    let mut prev = envelope(0.0);
    loop {
        let e = envelope(k);
        if e < threshold && e <= prev {
            return k;
        }
        prev = e;
        k += step;
    }
}

/// Sorted panel boundaries on `[0, k_max]`: zeros of `sin(k z)` (which are
/// also half-period marks for `cos`), `2 pi` phase marks of `tau w(k)`, and
/// any extra points.
fn panel_breaks(geom: &WaveguideGeometry, z: f64, tau: f64, k_max: f64, extra: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0, k_max];
    let z = z.abs();
    if z > 0.0 {
        let step = std::f64::consts::PI / (2.0 * z);
        let mut j = 1.0;
        while j * step < k_max {
            b.push(j * step);
            j += 1.0;
        }
    }
    let tau = tau.abs();
    if tau > 0.0 {
        let mu = geom.mu();
        let mut m = 1.0;
        loop {
            let w = mu + 2.0 * std::f64::consts::PI * m / tau;
            let k = (w * w - mu * mu).sqrt();
            if k >= k_max {
                break;
            }
            b.push(k);
            m += 1.0;
        }
    }
    b.extend(extra.iter().copied().filter(|&k| k > 0.0 && k < k_max));
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * k_max);
    b
}

/// Zeros of `sin(k z0)` for the families that carry that factor.
fn spectral_breaks(spec: &KernelSpec, k_max: f64) -> Vec<f64> {
    match spec.family {
        KernelFamily::K0Diff | KernelFamily::IkQuarter if spec.z0 > 0.0 => {
            let step = std::f64::consts::PI / spec.z0;
            (1..)
                .map(|j| j as f64 * step)
                .take_while(|&k| k < k_max)
                .collect()
        }
        _ => Vec::new(),
    }
}

fn phase(tau: f64, w: f64) -> C {
    C::from_polar(1.0, -tau * w)
}

/// `\int_0^{k_max} weight(k) sin(kz) e^{-i tau w} / w dk` for an arbitrary weight.
pub fn oracle_master<W: Fn(f64) -> f64>(
    weight: W,
    geom: &WaveguideGeometry,
    z: f64,
    tau: f64,
    k_max: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    settings.validate()?;
    if z == 0.0 {
        return Ok(Estimate {
            value: C::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let breaks = panel_breaks(geom, z, tau, k_max, &[]);
    integrate(
        |k| {
            let w = geom.omega(k);
            phase(tau, w) * (weight(k) * (k * z).sin() / w)
        },
        &breaks,
        settings.tolerance(),
    )
    .map(|e| with_tail(e, settings))
}

/// Adds the truncation bound to the quadrature error.
fn with_tail(e: Estimate, settings: &QuadratureSettings) -> Estimate {
    Estimate {
        error: e.error + 0.01 * settings.abs_tol,
        ..e
    }
}

/// `I(z, tau)` by quadrature.
#[allow(non_snake_case)]
pub fn oracle_I(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    z: f64,
    tau: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    spec.validate()?;
    let k_max = resolved_k_max(spec, geom, settings);
    oracle_master(|k| spectral_f(spec, geom, k), geom, z, tau, k_max, settings)
}

fn amplitude_integral<G: Fn(f64, C) -> C>(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    z: f64,
    tau: f64,
    settings: &QuadratureSettings,
    integrand: G,
) -> Result<Estimate> {
    spec.validate()?;
    settings.validate()?;
    let k_max = resolved_k_max(spec, geom, settings);
    let breaks = panel_breaks(geom, z, tau, k_max, &spectral_breaks(spec, k_max));
    integrate(
        |k| {
            let w = geom.omega(k);
            integrand(k, spectral_A(spec, geom, k) * phase(tau, w))
        },
        &breaks,
        settings.tolerance(),
    )
    .map(|e| with_tail(e, settings))
}

/// `F(z, tau) = \int A(k) sin(kz) e^{-i tau w} dk`.
#[allow(non_snake_case)]
pub fn oracle_F(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    z: f64,
    tau: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    if z == 0.0 {
        return Ok(zero_estimate());
    }
    amplitude_integral(spec, geom, z, tau, settings, |k, a| a * (k * z).sin())
}

/// `G(z, tau) = i \int A(k) sin(kz) e^{-i tau w} / (w + 1) dk`.
#[allow(non_snake_case)]
pub fn oracle_G(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    z: f64,
    tau: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    if z == 0.0 {
        return Ok(zero_estimate());
    }
    amplitude_integral(spec, geom, z, tau, settings, |k, a| {
        C::new(0.0, 1.0) * a * ((k * z).sin() / (geom.omega(k) + 1.0))
    })
}

/// `dG/dz = i \int A(k) k cos(kz) e^{-i tau w} / (w + 1) dk`.
#[allow(non_snake_case)]
pub fn oracle_Gz(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    z: f64,
    tau: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    amplitude_integral(spec, geom, z, tau, settings, |k, a| {
        C::new(0.0, 1.0) * a * (k * (k * z).cos() / (geom.omega(k) + 1.0))
    })
}

fn zero_estimate() -> Estimate {
    Estimate {
        value: C::new(0.0, 0.0),
        error: 0.0,
        evaluations: 0,
    }
}

/// `\int_0^\infty w / (w + 1) |A(k)|^2 dk`.
pub fn norm_kspace(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    settings: &QuadratureSettings,
) -> Result<f64> {
    spec.validate()?;
    settings.validate()?;
    let k_max = resolved_k_max(spec, geom, settings);
    let mut breaks = vec![0.0, k_max];
    breaks.extend(spectral_breaks(spec, k_max));
    // resolve the peak region of the spectrum
    breaks.extend((1..64).map(|j| k_max * j as f64 / 64.0));
    breaks.sort_by(f64::total_cmp);
    let (value, _) = integrate_real(
        |k| {
            let w = geom.omega(k);
            w / (w + 1.0) * spectral_A(spec, geom, k).norm_sqr()
        },
        &breaks,
        settings.tolerance(),
    )?;
    Ok(value)
}

/// `\int_0^\infty (|F|^2 + k_perp^2 |G|^2 + |G_z|^2)(z, tau) dz` from the closed forms.
///
/// `[0, Z1]` is split into unit panels and the tail is mapped onto `(0, 1]`
/// by `z = Z1 / t`, which handles the algebraic tails of the `sqrt(k)`
/// family as well as the exponential ones.
pub fn z_density_integral(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    tau: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    spec.validate()?;
    settings.validate()?;
    let kp2 = geom.k_perp() * geom.k_perp();
    let density = |z: f64| -> f64 {
        match kernel_bundle(spec, geom, z, tau) {
            Ok(b) => b.f.norm_sqr() + kp2 * b.g.norm_sqr() + b.g_z.norm_sqr(),
            Err(_) => f64::NAN,
        }
    };
    let reach = spec.z0 + tau.abs() + spec.tau0;
    let z1 = (10.0 + 2.0 * reach + 30.0 / geom.mu()).ceil();
    let panels: Vec<f64> = (0..=(z1 as usize)).map(|j| j as f64).collect();
    let tol = Tolerance {
        rel: settings.rel_tol,
        abs: 0.0,
        max_subdivisions: settings.max_subdivisions,
    };
    let (body, _) = integrate_real(density, &panels, tol)?;
    let tail_breaks: Vec<f64> = (0..=16).map(|j| j as f64 / 16.0).collect();
    let (tail, _) = integrate_real(
        |t| {
            if t == 0.0 {
                0.0
            } else {
                density(z1 / t) * z1 / (t * t)
            }
        },
        &tail_breaks,
        Tolerance {
            abs: settings.rel_tol * body.abs(),
            ..tol
        },
    )?;
    let total = body + tail;
    if total.is_finite() {
        Ok(total)
    } else {
        Err(crate::error::Error::NonFinite {
            function: "z_density_integral",
            z: C::new(tau, 0.0),
        })
    }
}

/// The z-space normalization integral at `t = 0`.
pub fn norm_zspace(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    settings: &QuadratureSettings,
) -> Result<f64> {
    z_density_integral(spec, geom, 0.0, settings)
}

/// Relative disagreement between the two normalization forms. The z-space
/// integral equals `pi` times the k-space one.
pub fn normalization_delta(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let k = std::f64::consts::PI * norm_kspace(spec, geom, settings)?;
    let z = norm_zspace(spec, geom, settings)?;
    Ok((z - k).abs() / k)
}
