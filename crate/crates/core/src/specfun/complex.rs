//! Modified Bessel functions `K_nu` and `I_nu` of complex argument.
//!
//! Orders are quarter-integers (the public surface restricts them to
//! `{-1/4, 0, 1/4, 1}`, the kernels internally need a few neighbours).
//!
//! `K` in the closed right half-plane:
//! * `|z| <= 2`: Temme's series for the pair `(K_mu, K_{mu+1})`, `|mu| <= 1/2`;
//! * `2 < |z| < 17`: Steed's continued fraction (Temme's CF2);
//! * `|z| >= 17`: the Hankel asymptotic expansion, truncated at its smallest term.
//!
//! `I` in the closed right half-plane:
//! * `|z| <= 2`: ascending series;
//! * otherwise the ratio `I_{nu+1}/I_nu` from its continued fraction (CF1)
//!   combined with the Wronskian `I_nu K_{nu+1} + I_{nu+1} K_nu = 1/z`.
//!
//! The left half-plane is reached with the continuation formulas
//! `K_nu(u e^{i m pi}) = e^{-i m nu pi} K_nu(u) - i m pi I_nu(u)` and
//! `I_nu(u e^{i m pi}) = e^{i m nu pi} I_nu(u)`, `m = +-1`, `Re u >= 0`.
//!
//! Internally everything is carried exponentially scaled (`e^z K`, `e^{-z} I`)
//! so products such as `I(x) K(y)` with large `x`, `y` never overflow.

use num_complex::Complex64 as C;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const EPS: f64 = 1.0e-16;
const MAX_ITER: usize = 20_000;

/// Radius below which the small-argument series are used.
pub(crate) const SERIES_RADIUS: f64 = 2.0;
/// Radius above which `K` switches from CF2 to the asymptotic expansion.
pub(crate) const ASYMPTOTIC_RADIUS: f64 = 17.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_3;
const GAMMA_HALF: f64 = 1.772_453_850_905_516;
const GAMMA_THREE_QUARTERS: f64 = 1.225_416_702_465_177_6;

/// `Gamma(x)` for positive quarter-integers `x`.
fn gamma_quarter_integer(x: f64) -> f64 {
    let quarters = (4.0 * x).round();
    debug_assert!(quarters >= 1.0 && (4.0 * x - quarters).abs() < 1e-12);
    let mut q = quarters as i64;
    let mut acc = 1.0;
    while q > 4 {
        q -= 4;
        acc *= q as f64 / 4.0;
    }
    acc * match q {
        1 => GAMMA_QUARTER,
        2 => GAMMA_HALF,
        3 => GAMMA_THREE_QUARTERS,
        _ => 1.0,
    }
}

/// `1 / Gamma(1 + x)` for quarter-integer `x > -1`.
fn inv_gamma_one_plus(x: f64) -> f64 {
    1.0 / gamma_quarter_integer(1.0 + x)
}

fn check_finite(function: &'static str, z: C, value: C) -> Result<C> {
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { function, z })
    }
}

// ---------------------------------------------------------------------------
// K in the right half-plane
// ---------------------------------------------------------------------------

/// Temme's series: unscaled `(K_mu(z), K_{mu+1}(z))` for `|mu| <= 1/2`, small `|z|`.
fn temme_pair(mu: f64, z: C) -> (C, C) {
    let (gam1, gam2, gampl, gammi) = if mu == 0.0 {
        (-EULER_GAMMA, 1.0, 1.0, 1.0)
    } else {
        let gampl = inv_gamma_one_plus(mu);
        let gammi = inv_gamma_one_plus(-mu);
        (
            (gammi - gampl) / (2.0 * mu),
            0.5 * (gammi + gampl),
            gampl,
            gammi,
        )
    };
    let half = 0.5 * z;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS {
        1.0
    } else {
        pimu / pimu.sin()
    };
    let d = -half.ln();
    let e = d * mu;
    let fact2 = if e.norm() < EPS {
        C::new(1.0, 0.0)
    } else {
        e.sinh() / e
    };
    let mut ff = (e.cosh() * gam1 + fact2 * d * gam2) * fact;
    let mut sum = ff;
    let ee = e.exp();
    let mut p = ee * (0.5 / gampl);
    let mut q = ee.inv() * (0.5 / gammi);
    let mut c = C::new(1.0, 0.0);
    let dd = half * half;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (ff * fi + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - ff * fi);
        sum1 += del1;
        if del.norm() < sum.norm() * EPS && del1.norm() < sum1.norm() * EPS {
            break;
        }
    }
    (sum, sum1 * (2.0 / z))
}

/// Steed's evaluation of CF2: scaled `(e^z K_mu, e^z K_{mu+1})`, `|mu| <= 1/2`.
fn steed_pair_scaled(mu: f64, z: C) -> (C, C) {
    let mu2 = mu * mu;
    let mut b = (z + 1.0) * 2.0;
    let mut d = b.inv();
    let mut h = d;
    let mut delh = d;
    let mut q1 = C::new(0.0, 0.0);
    let mut q2 = C::new(1.0, 0.0);
    let a1 = 0.25 - mu2;
    let mut q = C::new(a1, 0.0);
    let mut c = C::new(a1, 0.0);
    let mut a = -a1;
    let mut s = q * delh + 1.0;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -c * a / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = (b + d * a).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).norm() < EPS {
            break;
        }
    }
    h *= a1;
    let kmu = (PI / (2.0 * z)).sqrt() / s;
    let kmu1 = kmu * (z + mu + 0.5 - h) / z;
    (kmu, kmu1)
}

/// Hankel expansion of `e^z K_nu(z)`, truncated at the smallest term.
fn asymptotic_k_scaled(nu: f64, z: C) -> C {
    let four_nu2 = 4.0 * nu * nu;
    let mut term = C::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * ((four_nu2 - odd * odd) / (8.0 * kf)) / z;
        let size = next.norm();
        if size > last || size == 0.0 {
            break;
        }
        term = next;
        sum += term;
        last = size;
        if size < EPS * sum.norm() {
            break;
        }
    }
    (PI / (2.0 * z)).sqrt() * sum
}

/// Scaled base pair `(e^z K_mu, e^z K_{mu+1})`, `|mu| <= 1/2`, `Re z >= 0`, `z != 0`.
fn k_base_pair_scaled(mu: f64, z: C) -> (C, C) {
    let r = z.norm();
    if r <= SERIES_RADIUS {
        let (k0, k1) = temme_pair(mu, z);
        let e = z.exp();
        (k0 * e, k1 * e)
    } else if r < ASYMPTOTIC_RADIUS {
        steed_pair_scaled(mu, z)
    } else {
        (asymptotic_k_scaled(mu, z), asymptotic_k_scaled(mu + 1.0, z))
    }
}

/// Scaled `(e^z K_nu, e^z K_{nu+1})` for quarter-integer `nu >= -1/2`, `Re z >= 0`.
pub(crate) fn k_pair_scaled(nu: f64, z: C) -> (C, C) {
    let steps = nu.round();
    let mu = nu - steps;
    let (mut k0, mut k1) = k_base_pair_scaled(mu, z);
    let mut order = mu;
    // K_{v+1} = K_{v-1} + (2v/z) K_v
    for _ in 0..steps as i64 {
        let k2 = k0 + k1 * (2.0 * (order + 1.0)) / z;
        k0 = k1;
        k1 = k2;
        order += 1.0;
    }
    (k0, k1)
}

// ---------------------------------------------------------------------------
// I in the right half-plane
// ---------------------------------------------------------------------------

/// Ascending series, unscaled `I_nu(z)`; `nu > -1`.
fn series_i(nu: f64, z: C) -> C {
    let q = z * z * 0.25;
    let mut term = C::new(inv_gamma_one_plus(nu), 0.0);
    let mut sum = term;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.norm() <= EPS * sum.norm() {
            break;
        }
    }
    if nu == 0.0 {
        sum
    } else {
        (z * 0.5).powf(nu) * sum
    }
}

/// `I_{nu+1}(z) / I_nu(z)` by the modified Lentz algorithm.
fn cf1_ratio(nu: f64, z: C) -> C {
    let tiny = C::new(1e-150, 0.0);
    let mut f = tiny;
    let mut cc = f;
    let mut dd = C::new(0.0, 0.0);
    for k in 1..MAX_ITER {
        let b = (2.0 * (nu + k as f64)) / z;
        dd = b + dd;
        if dd.norm() == 0.0 {
            dd = tiny;
        }
        cc = b + cc.inv();
        if cc.norm() == 0.0 {
            cc = tiny;
        }
        dd = dd.inv();
        let delta = cc * dd;
        f *= delta;
        if (delta - 1.0).norm() < EPS {
            break;
        }
    }
    f
}

/// Scaled `(e^{-z} I_nu, e^{-z} I_{nu+1})`, quarter-integer `nu >= -1/4`, `Re z >= 0`.
pub(crate) fn i_pair_scaled(nu: f64, z: C) -> (C, C) {
    if z.norm() <= SERIES_RADIUS {
        let e = (-z).exp();
        return (series_i(nu, z) * e, series_i(nu + 1.0, z) * e);
    }
    let ratio = cf1_ratio(nu, z);
    let (k_nu, k_next) = if nu < 0.0 {
        // K_nu = K_{-nu} and K_{nu+1} = K_{|nu|-1} via the downward recurrence
        let (ka, kb) = k_pair_scaled(-nu, z);
        (ka, kb - ka * (2.0 * (-nu)) / z)
    } else {
        k_pair_scaled(nu, z)
    };
    let i_nu = (z * (k_next + ratio * k_nu)).inv();
    (i_nu, i_nu * ratio)
}

// ---------------------------------------------------------------------------
// Analytic continuation and the public (principal-branch) surface
// ---------------------------------------------------------------------------

/// Sheet used for `K_nu(w)` when `Re w < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    /// `arg w` in `(-pi, pi]`; the negative real axis is rejected.
    Principal,
    /// Continued across the negative real axis from below: `arg w` in `(-3pi/2, -pi/2)`.
    FromBelow,
    /// Continued across the negative real axis from above: `arg w` in `(pi/2, 3pi/2)`.
    FromAbove,
}

/// A solution of the modified Bessel equation at a point, as
/// `f = e^{log_scale} value`, `f' = e^{log_scale} derivative`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSolution {
    pub value: C,
    pub derivative: C,
    pub log_scale: C,
}

impl ScaledSolution {
    pub fn unscaled(&self) -> (C, C) {
        let e = self.log_scale.exp();
        (self.value * e, self.derivative * e)
    }
}

fn continuation_sign(function: &'static str, w: C, sheet: Sheet) -> Result<f64> {
    match sheet {
        Sheet::FromBelow => Ok(-1.0),
        Sheet::FromAbove => Ok(1.0),
        Sheet::Principal => {
            if w.im > 0.0 {
                Ok(1.0)
            } else if w.im < 0.0 {
                Ok(-1.0)
            } else {
                Err(Error::BranchCut { function, z: w })
            }
        }
    }
}

/// `K_nu` and its derivative at `w` on the chosen sheet; `log_scale = -w`.
pub fn k_solution(nu: f64, w: C, sheet: Sheet) -> Result<ScaledSolution> {
    const NAME: &str = "bessel_k";
    if w.norm() == 0.0 {
        return Err(Error::BranchCut {
            function: NAME,
            z: w,
        });
    }
    let nu = nu.abs();
    let sol = if w.re >= 0.0 {
        let (k0, k1) = k_pair_scaled(nu, w);
        ScaledSolution {
            value: k0,
            derivative: -k1 + k0 * nu / w,
            log_scale: -w,
        }
    } else {
        let m = continuation_sign(NAME, w, sheet)?;
        let u = -w;
        let (k0, k1) = k_pair_scaled(nu, u);
        let (i0, i1) = i_pair_scaled(nu, u);
        // e^{u} is the common scale: e^{-u}K(u) = e^{-2u} (e^u K(u)).
        let damp = (u * -2.0).exp();
        let phase = C::from_polar(1.0, -m * nu * PI);
        let imp = C::new(0.0, m * PI);
        let kp = -k1 + k0 * nu / u;
        let ip = i1 + i0 * nu / u;
        ScaledSolution {
            value: phase * damp * k0 - imp * i0,
            derivative: -(phase * damp * kp - imp * ip),
            log_scale: u,
        }
    };
    check_finite(NAME, w, sol.value)?;
    check_finite(NAME, w, sol.derivative)?;
    Ok(sol)
}

/// `I_nu` and its derivative at `w` (principal branch); `log_scale = w` for `Re w >= 0`.
pub fn i_solution(nu: f64, w: C) -> Result<ScaledSolution> {
    const NAME: &str = "bessel_i";
    let integer = nu.fract() == 0.0;
    if w.norm() == 0.0 {
        if !integer {
            return Err(Error::BranchCut {
                function: NAME,
                z: w,
            });
        }
        let (value, derivative) = if nu == 0.0 { (1.0, 0.0) } else { (0.0, 0.5) };
        return Ok(ScaledSolution {
            value: C::new(value, 0.0),
            derivative: C::new(derivative, 0.0),
            log_scale: C::new(0.0, 0.0),
        });
    }
    let sol = if w.re >= 0.0 {
        let (i0, i1) = i_pair_scaled(nu, w);
        ScaledSolution {
            value: i0,
            derivative: i1 + i0 * nu / w,
            log_scale: w,
        }
    } else {
        let phase = if w.im == 0.0 {
            if !integer {
                return Err(Error::BranchCut {
                    function: NAME,
                    z: w,
                });
            }
            C::new(if (nu as i64) % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        } else {
            let m = w.im.signum();
            C::from_polar(1.0, m * nu * PI)
        };
        let u = -w;
        let (i0, i1) = i_pair_scaled(nu, u);
        ScaledSolution {
            value: phase * i0,
            derivative: -(phase * (i1 + i0 * nu / u)),
            log_scale: u,
        }
    };
    check_finite(NAME, w, sol.value)?;
    check_finite(NAME, w, sol.derivative)?;
    Ok(sol)
}
