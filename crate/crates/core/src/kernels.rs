//! Waveguide geometry, the spectral amplitude `A(k)`, and closed forms for
//!
//! ```text
//! I(z, tau) = \int_0^\infty f(k) sin(kz) e^{-i tau w(k)} / w(k) dk,   w(k) = sqrt(k^2 + mu^2)
//! ```
//!
//! for four choices of `f`, together with the longitudinal amplitudes
//! `F = A0 (k_perp^2 - d_z^2) I` and `G = A0 (-i - d_tau) I`.
//!
//! All derivatives are exact: each closed form is evaluated on a Taylor jet in
//! `(z, tau)`, so the bundle carries `I`, `I_z`, `I_zz`, `I_tau` and `I_ztau`
//! from a single pass through the special functions.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::jet::{bessel_i_jet, bessel_k_jet, Jet, ScaledJet};
use crate::specfun::{first_j0_zero, Sheet, SERIES_RADIUS};

const GAMMA_THREE_QUARTERS: f64 = 1.225_416_702_465_177_6;

/// Hollow cylinder of radius `a` restricted to the lowest odd radial mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideGeometry {
    a: f64,
    k_perp: f64,
    mu: f64,
}

impl WaveguideGeometry {
    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(invalid(
                "a",
                format!("radius must be positive and finite, got {a}"),
            ));
        }
        let k_perp = first_j0_zero() / a;
        Ok(WaveguideGeometry {
            a,
            k_perp,
            mu: (k_perp * k_perp + 1.0).sqrt(),
        })
    }

    /// The geometry whose effective mass is `mu` (> 1).
    pub fn from_mu(mu: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 1.0) {
            return Err(invalid(
                "mu",
                format!("effective mass must exceed 1, got {mu}"),
            ));
        }
        let k_perp = (mu * mu - 1.0).sqrt();
        Ok(WaveguideGeometry {
            a: first_j0_zero() / k_perp,
            k_perp,
            mu,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn k_perp(&self) -> f64 {
        self.k_perp
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `sqrt(k^2 + mu^2)`.
    pub fn omega(&self, k: f64) -> f64 {
        k.hypot(self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `f = k e^{-tau0 w}`.
    K1Ratio,
    /// `f = 2 sin(k z0) e^{-tau0 w}`.
    K0Diff,
    /// `f = sqrt(8/k) sin(k z0) e^{-tau0 w}`.
    IkQuarter,
    /// `f = sqrt(4 pi k) e^{-k z0}`.
    KQuarterProd,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [
        KernelFamily::K1Ratio,
        KernelFamily::K0Diff,
        KernelFamily::IkQuarter,
        KernelFamily::KQuarterProd,
    ];

    /// 1-based index.
    pub fn index(self) -> usize {
        match self {
            KernelFamily::K1Ratio => 1,
            KernelFamily::K0Diff => 2,
            KernelFamily::IkQuarter => 3,
            KernelFamily::KQuarterProd => 4,
        }
    }

    pub fn uses_tau0(self) -> bool {
        self != KernelFamily::KQuarterProd
    }

    pub fn uses_z0(self) -> bool {
        self != KernelFamily::K1Ratio
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub tau0: f64,
    pub z0: f64,
    pub a0: C,
}

impl KernelSpec {
    /// A kernel with `A0 = 1`.
    pub fn new(family: KernelFamily, tau0: f64, z0: f64) -> Result<Self> {
        let spec = KernelSpec {
            family,
            tau0,
            z0,
            a0: C::new(1.0, 0.0),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_a0(self, a0: C) -> Self {
        KernelSpec { a0, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.family.uses_tau0() && !(self.tau0.is_finite() && self.tau0 > 0.0) {
            return Err(invalid(
                "tau0",
                format!("must be positive and finite, got {}", self.tau0),
            ));
        }
        if self.family.uses_z0() {
            let ok = match self.family {
                KernelFamily::KQuarterProd => self.z0 > 0.0,
                _ => self.z0 >= 0.0,
            };
            if !(ok && self.z0.is_finite()) {
                return Err(invalid(
                    "z0",
                    format!("out of range for {:?}: {}", self.family, self.z0),
                ));
            }
        }
        if !(self.a0.re.is_finite() && self.a0.im.is_finite()) {
            return Err(invalid("a0", "must be finite"));
        }
        Ok(())
    }
}

/// Values of `I` and the amplitudes at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeBundle {
    pub i: C,
    pub i_z: C,
    pub i_zz: C,
    pub i_tau: C,
    pub i_ztau: C,
    pub f: C,
    pub g: C,
    pub g_z: C,
}

/// The weight `f(k)` of the chosen family.
pub fn spectral_f(spec: &KernelSpec, geom: &WaveguideGeometry, k: f64) -> f64 {
    let w = geom.omega(k);
    match spec.family {
        KernelFamily::K1Ratio => k * (-spec.tau0 * w).exp(),
        KernelFamily::K0Diff => 2.0 * (k * spec.z0).sin() * (-spec.tau0 * w).exp(),
        KernelFamily::IkQuarter => {
            if k == 0.0 {
                0.0
            } else {
                (8.0 / k).sqrt() * (k * spec.z0).sin() * (-spec.tau0 * w).exp()
            }
        }
        KernelFamily::KQuarterProd => (4.0 * PI * k).sqrt() * (-k * spec.z0).exp(),
    }
}

/// `A(k) = A0 (k^2 + k_perp^2) f(k) / sqrt(k^2 + mu^2)`.
#[allow(non_snake_case)]
pub fn spectral_A(spec: &KernelSpec, geom: &WaveguideGeometry, k: f64) -> C {
    let kp = geom.k_perp();
    spec.a0 * ((k * k + kp * kp) * spectral_f(spec, geom, k) / geom.omega(k))
}

/// `I(z, tau)`. Odd in `z`; `tau` of either sign.
#[allow(non_snake_case)]
pub fn kernel_I(spec: &KernelSpec, geom: &WaveguideGeometry, z: f64, tau: f64) -> Result<C> {
    Ok(master(spec, geom, z, tau)?.i)
}

/// `I`, its derivatives, and `F`, `G`, `G_z` at `(z, tau)`.
pub fn kernel_bundle(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    z: f64,
    tau: f64,
) -> Result<AmplitudeBundle> {
    let d = master(spec, geom, z, tau)?;
    let kp2 = geom.k_perp() * geom.k_perp();
    let mi = C::new(0.0, -1.0);
    Ok(AmplitudeBundle {
        f: spec.a0 * (d.i * kp2 - d.i_zz),
        g: spec.a0 * (mi * d.i - d.i_tau),
        g_z: spec.a0 * (mi * d.i_z - d.i_ztau),
        ..d
    })
}

fn check_point(z: f64, tau: f64) -> Result<()> {
    if !z.is_finite() {
        return Err(invalid("z", format!("must be finite, got {z}")));
    }
    if !tau.is_finite() {
        return Err(invalid("tau", format!("must be finite, got {tau}")));
    }
    Ok(())
}

/// How the derivatives of `I` sit in the evaluated jet.
enum Readout {
    /// The jet is `I` itself.
    Direct,
    /// The jet is `S` with `I = -dS/dz`.
    MinusDz,
}

fn master(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    z: f64,
    tau: f64,
) -> Result<AmplitudeBundle> {
    spec.validate()?;
    check_point(z, tau)?;
    let (scaled, readout) = match spec.family {
        KernelFamily::K1Ratio => (k1_ratio(spec, geom, z, tau)?, Readout::MinusDz),
        KernelFamily::K0Diff => (k0_diff(spec, geom, z, tau)?, Readout::Direct),
        KernelFamily::IkQuarter => (ik_quarter(spec, geom, z, tau)?, Readout::Direct),
        KernelFamily::KQuarterProd => (k_quarter_prod(spec, geom, z, tau)?, Readout::MinusDz),
    };
    let jet = scaled.unscaled();
    let (mut i, i_z, mut i_zz, mut i_tau, i_ztau) = match readout {
        Readout::Direct => (
            jet.partial(0, 0),
            jet.partial(1, 0),
            jet.partial(2, 0),
            jet.partial(0, 1),
            jet.partial(1, 1),
        ),
        Readout::MinusDz => (
            -jet.partial(1, 0),
            -jet.partial(2, 0),
            -jet.partial(3, 0),
            -jet.partial(1, 1),
            -jet.partial(2, 1),
        ),
    };
    if z == 0.0 {
        // odd in z
        i = C::new(0.0, 0.0);
        i_zz = i;
        i_tau = i;
    }
    if [i, i_z, i_zz, i_tau, i_ztau]
        .iter()
        .any(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(crate::error::Error::NonFinite {
            function: "kernel_bundle",
            z: C::new(z, tau),
        });
    }
    Ok(AmplitudeBundle {
        i,
        i_z,
        i_zz,
        i_tau,
        i_ztau,
        f: C::new(0.0, 0.0),
        g: C::new(0.0, 0.0),
        g_z: C::new(0.0, 0.0),
    })
}

/// `tau0 + i tau` as a jet.
fn complex_time(tau0: f64, tau: f64) -> Jet {
    Jet::var_tau(tau) * C::new(0.0, 1.0) + C::new(tau0, 0.0)
}

/// `S = K_0(mu sqrt(z^2 + s^2))`, whose negative z-derivative is `I`.
fn k1_ratio(spec: &KernelSpec, geom: &WaveguideGeometry, z: f64, tau: f64) -> Result<ScaledJet> {
    let zj = Jet::var_z(z);
    let s = complex_time(spec.tau0, tau);
    let arg = (zj * zj + s * s).sqrt() * geom.mu();
    bessel_k_jet(0.0, &arg, Sheet::Principal)
}

fn k0_diff(spec: &KernelSpec, geom: &WaveguideGeometry, z: f64, tau: f64) -> Result<ScaledJet> {
    let s = complex_time(spec.tau0, tau);
    let s2 = s * s;
    let term = |shift: f64| -> Result<ScaledJet> {
        let u = Jet::var_z(z) + C::new(shift, 0.0);
        let arg = (u * u + s2).sqrt() * geom.mu();
        bessel_k_jet(0.0, &arg, Sheet::Principal)
    };
    // K_0(mu R(z - z0)) - K_0(mu R(z + z0))
    Ok(term(-spec.z0)?.sub(&term(spec.z0)?))
}

/// `(x/2)^{1/4} I_{-1/4}(x) = sum_k (x^2/4)^k / (k! Gamma(k + 3/4))`, an
/// entire function of `x`.
fn reduced_i_minus_quarter(x: &Jet) -> Result<ScaledJet> {
    let x0 = x.value();
    if x0.norm() <= SERIES_RADIUS {
        let q = (*x * *x) * 0.25;
        let q0 = q.value();
        // n-th derivative in q shifts Gamma(k + 3/4) to Gamma(k + n + 3/4)
        let mut d = [C::new(0.0, 0.0); 5];
        let mut gamma_n = GAMMA_THREE_QUARTERS;
        for (n, dn) in d.iter_mut().enumerate() {
            let mut term = C::new(1.0 / gamma_n, 0.0);
            let mut sum = term;
            for k in 1..60 {
                let kf = k as f64;
                term *= q0 / (kf * (kf + n as f64 - 0.25));
                sum += term;
                if term.norm() < 1e-17 * sum.norm() {
                    break;
                }
            }
            *dn = sum;
            gamma_n *= n as f64 + 0.75;
        }
        return Ok(ScaledJet::plain(q.compose(&d)));
    }
    let power = (*x * 0.5).powf(0.25);
    Ok(bessel_i_jet(-0.25, x)?.mul_jet(&power))
}

/// `Psi(u) = sqrt(pi) (4 (R + s)/mu)^{1/4} (xi_-/2)^{1/4} I_{-1/4}(xi_-) K_{1/4}(xi_+)`
/// with `R = sqrt(s^2 + u^2)`, `xi_+ = mu (R + s)/2`, `xi_- = mu u^2 / (2 (R + s))`.
fn ik_quarter(spec: &KernelSpec, geom: &WaveguideGeometry, z: f64, tau: f64) -> Result<ScaledJet> {
    let mu = geom.mu();
    let s = complex_time(spec.tau0, tau);
    let s2 = s * s;
    let psi = |u: Jet| -> Result<ScaledJet> {
        let r = (u * u + s2).sqrt();
        let rs = r + s;
        let xi_plus = rs * (0.5 * mu);
        let xi_minus = u * u * rs.recip() * (0.5 * mu);
        let prefactor = (rs * (4.0 / mu)).powf(0.25) * PI.sqrt();
        let k = bessel_k_jet(0.25, &xi_plus, Sheet::Principal)?;
        Ok(reduced_i_minus_quarter(&xi_minus)?
            .mul(&k)
            .mul_jet(&prefactor))
    };
    let zj = Jet::var_z(z);
    let z0 = C::new(spec.z0, 0.0);
    Ok(psi(-zj + z0)?.sub(&psi(zj + z0)?))
}

/// `S = sqrt(p) K(i xi_+) K(i xi_-) + [same with p -> conj p]` where
/// `p = z0 + i z`, `xi_pm = mu (tau pm sqrt(tau^2 + p^2))/2`, and `I = -dS/dz`.
/// Evaluated for `z >= 0`, `tau >= 0` and extended by symmetry.
fn k_quarter_prod(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    z: f64,
    tau: f64,
) -> Result<ScaledJet> {
    if z < 0.0 {
        // S is even in z
        let s = k_quarter_prod(spec, geom, -z, tau)?;
        return Ok(ScaledJet {
            jet: s.jet.z_reflect(),
            ..s
        });
    }
    if tau < 0.0 {
        // f is real, so I(z, -tau) = conj I(z, tau); the scale is a pure phase
        let s = k_quarter_prod(spec, geom, z, -tau)?;
        return Ok(ScaledJet::plain(s.unscaled().conj_tau_reflect()));
    }
    let mu = geom.mu();
    let t = Jet::var_tau(tau);
    let zj = Jet::var_z(z);
    let i = C::new(0.0, 1.0);
    let term = |p: Jet, second: Sheet| -> Result<ScaledJet> {
        let q = (t * t + p * p).sqrt();
        let w_plus = (t + q) * (i * 0.5 * mu);
        let w_minus = (t - q) * (i * 0.5 * mu);
        let k1 = bessel_k_jet(0.25, &w_plus, Sheet::Principal)?;
        let k2 = bessel_k_jet(0.25, &w_minus, second)?;
        Ok(k1.mul(&k2).mul_jet(&p.sqrt()))
    };
    let z0 = C::new(spec.z0, 0.0);
    let forward = term(zj * i + z0, Sheet::Principal)?;
    // the conjugate-side factor crosses the negative real axis from below
    let backward = term(zj * (-i) + z0, Sheet::FromBelow)?;
    Ok(forward.add(&backward))
}
