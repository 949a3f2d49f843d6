//! Truncated bivariate Taylor jets in `(dz, dtau)`.
//!
//! A jet stores `c[a][b]` for `a <= 3`, `b <= 1`, so that a smooth function
//! near `(z, tau)` is `sum c[a][b] dz^a dtau^b`. That is exactly the set of
//! partial derivatives the amplitudes need (up to `d^3/dz^3`, `d^3/dz^2 dtau`
//! after one outer z-derivative). Analytic functions are applied through
//! their first four derivatives at the expansion point.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C;

use crate::error::Result;
use crate::specfun::{i_solution, k_solution, ScaledSolution, Sheet};

pub(crate) const Z_ORDER: usize = 4;
pub(crate) const T_ORDER: usize = 2;
const ZERO: C = C::new(0.0, 0.0);
const FACTORIAL: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet {
    pub c: [[C; T_ORDER]; Z_ORDER],
}

impl Jet {
    pub fn constant(v: C) -> Self {
        let mut c = [[ZERO; T_ORDER]; Z_ORDER];
        c[0][0] = v;
        Jet { c }
    }

    /// The coordinate `z` expanded about `z0`.
    pub fn var_z(z0: f64) -> Self {
        let mut j = Jet::constant(C::new(z0, 0.0));
        j.c[1][0] = C::new(1.0, 0.0);
        j
    }

    /// The coordinate `tau` expanded about `tau0`.
    pub fn var_tau(tau0: f64) -> Self {
        let mut j = Jet::constant(C::new(tau0, 0.0));
        j.c[0][1] = C::new(1.0, 0.0);
        j
    }

    pub fn value(&self) -> C {
        self.c[0][0]
    }

    /// `d^a/dz^a d^b/dtau^b` at the expansion point.
    pub fn partial(&self, a: usize, b: usize) -> C {
        self.c[a][b] * (FACTORIAL[a] * FACTORIAL[b])
    }

    pub fn scale(&self, s: C) -> Self {
        let mut out = *self;
        out.c.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }

    /// `f(self)` where `d[n]` is the n-th derivative of `f` at `self.value()`.
    pub fn compose(&self, d: &[C; 5]) -> Self {
        let mut delta = *self;
        delta.c[0][0] = ZERO;
        let mut out = Jet::constant(d[0]);
        let mut power = Jet::constant(C::new(1.0, 0.0));
        for (n, dn) in d.iter().enumerate().skip(1) {
            power = power * delta;
            out = out + power.scale(*dn / FACTORIAL[n]);
        }
        out
    }

    /// Principal `self^p`.
    pub fn powf(&self, p: f64) -> Self {
        let x = self.value();
        let x_p = x.powf(p);
        let mut d = [ZERO; 5];
        let mut coef = 1.0;
        for (n, dn) in d.iter_mut().enumerate() {
            *dn = x_p * coef / x.powi(n as i32);
            coef *= p - n as f64;
        }
        self.compose(&d)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let x = self.value();
        let r = x.sqrt();
        let d = [
            r,
            0.5 / r,
            -0.25 / (r * x),
            0.375 / (r * x * x),
            -0.9375 / (r * x * x * x),
        ];
        self.compose(&d)
    }

    pub fn recip(&self) -> Self {
        let x = self.value().inv();
        let x2 = x * x;
        let d = [x, -x2, 2.0 * x2 * x, -6.0 * x2 * x2, 24.0 * x2 * x2 * x];
        self.compose(&d)
    }

    /// Reflect `tau -> -tau` and conjugate: the jet of `conj(f(z, -tau))`.
    pub fn conj_tau_reflect(&self) -> Self {
        let mut out = *self;
        for row in out.c.iter_mut() {
            row[0] = row[0].conj();
            row[1] = -row[1].conj();
        }
        out
    }

    /// Reflect `z -> -z`: the jet of `f(-z, tau)`.
    pub fn z_reflect(&self) -> Self {
        let mut out = *self;
        for (a, row) in out.c.iter_mut().enumerate() {
            if a % 2 == 1 {
                row.iter_mut().for_each(|x| *x = -*x);
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (x, y) in self.c.iter_mut().flatten().zip(rhs.c.iter().flatten()) {
            *x += *y;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(C::new(-1.0, 0.0))
    }
}

impl Add<C> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: C) -> Jet {
        self.c[0][0] += rhs;
        self
    }
}

impl Mul<C> for Jet {
    type Output = Jet;
    fn mul(self, rhs: C) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(C::new(rhs, 0.0))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut c = [[ZERO; T_ORDER]; Z_ORDER];
        for a1 in 0..Z_ORDER {
            for b1 in 0..T_ORDER {
                let x = self.c[a1][b1];
                if x == ZERO {
                    continue;
                }
                for a2 in 0..Z_ORDER - a1 {
                    for b2 in 0..T_ORDER - b1 {
                        c[a1 + a2][b1 + b2] += x * rhs.c[a2][b2];
                    }
                }
            }
        }
        Jet { c }
    }
}

/// A jet carrying an overall factor `e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ScaledJet {
    pub jet: Jet,
    pub log_scale: C,
}

impl ScaledJet {
    pub fn plain(jet: Jet) -> Self {
        ScaledJet {
            jet,
            log_scale: ZERO,
        }
    }

    pub fn unscaled(&self) -> Jet {
        self.jet.scale(self.log_scale.exp())
    }

    /// Sum with the larger scale factored out.
    pub fn add(&self, other: &ScaledJet) -> ScaledJet {
        let (big, small) = if self.log_scale.re >= other.log_scale.re {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.log_scale - big.log_scale).exp();
        ScaledJet {
            jet: big.jet + small.jet.scale(ratio),
            log_scale: big.log_scale,
        }
    }

    pub fn sub(&self, other: &ScaledJet) -> ScaledJet {
        self.add(&ScaledJet {
            jet: -other.jet,
            log_scale: other.log_scale,
        })
    }

    pub fn mul(&self, other: &ScaledJet) -> ScaledJet {
        ScaledJet {
            jet: self.jet * other.jet,
            log_scale: self.log_scale + other.log_scale,
        }
    }

    pub fn mul_jet(&self, other: &Jet) -> ScaledJet {
        ScaledJet {
            jet: self.jet * *other,
            log_scale: self.log_scale,
        }
    }
}

/// Derivatives 0..=4 of a modified Bessel solution from its value and first
/// derivative, by the differentiated Bessel equation
/// `w^2 f'' + w f' - (w^2 + nu^2) f = 0`.
fn bessel_derivatives(nu: f64, w: C, value: C, derivative: C) -> [C; 5] {
    let mut d = [value, derivative, ZERO, ZERO, ZERO];
    let w2 = w * w;
    let nu2 = nu * nu;
    for n in 0..3 {
        let nf = n as f64;
        let mut rhs = -(2.0 * nf + 1.0) * w * d[n + 1] - (nf * nf - w2 - nu2) * d[n];
        if n >= 1 {
            rhs += 2.0 * nf * w * d[n - 1];
        }
        if n >= 2 {
            rhs += nf * (nf - 1.0) * d[n - 2];
        }
        d[n + 2] = rhs / w2;
    }
    d
}

fn solution_jet(nu: f64, w: &Jet, sol: ScaledSolution) -> ScaledJet {
    let d = bessel_derivatives(nu, w.value(), sol.value, sol.derivative);
    ScaledJet {
        jet: w.compose(&d),
        log_scale: sol.log_scale,
    }
}

/// `K_nu(w)` on the given sheet, as a scaled jet.
pub(crate) fn bessel_k_jet(nu: f64, w: &Jet, sheet: Sheet) -> Result<ScaledJet> {
    let sol = k_solution(nu, w.value(), sheet)?;
    Ok(solution_jet(nu, w, sol))
}

/// `I_nu(w)` on the principal branch, as a scaled jet.
pub(crate) fn bessel_i_jet(nu: f64, w: &Jet) -> Result<ScaledJet> {
    let sol = i_solution(nu, w.value())?;
    Ok(solution_jet(nu, w, sol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn product_rule_on_polynomials() {
        // f = z^2 tau + 3 z, g = z + tau
        let z = Jet::var_z(0.7);
        let t = Jet::var_tau(-0.4);
        let f = z * z * t + z * 3.0;
        let g = z + t;
        let h = f * g;
        let (z0, t0) = (0.7_f64, -0.4_f64);
        // h = z^3 tau + z^2 tau^2 + 3 z^2 + 3 z tau
        let hz3 = 6.0 * t0;
        let hz2t = 6.0 * z0 + 4.0 * t0;
        let hz = 3.0 * z0 * z0 * t0 + 2.0 * z0 * t0 * t0 + 6.0 * z0 + 3.0 * t0;
        assert!((h.partial(3, 0).re - hz3).abs() < 1e-14);
        assert!((h.partial(2, 1).re - hz2t).abs() < 1e-14);
        assert!((h.partial(1, 0).re - hz).abs() < 1e-14);
    }

    #[test]
    fn elementary_compositions_invert() {
        let x = Jet::var_z(1.3) * C::new(0.5, 0.8) + Jet::var_tau(0.2) * C::new(0.0, 1.0);
        let one = x.recip() * x;
        assert!(close(one.value(), C::new(1.0, 0.0), 1e-15));
        for a in 0..Z_ORDER {
            for b in 0..T_ORDER {
                if a + b > 0 {
                    assert!(one.c[a][b].norm() < 1e-14);
                }
            }
        }
        let back = x.sqrt() * x.sqrt() - x;
        assert!(back.c.iter().flatten().all(|v| v.norm() < 1e-14));
        let q = x.powf(0.25);
        let back = q * q * q * q - x;
        assert!(back.c.iter().flatten().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn bessel_jet_matches_shifted_evaluations() {
        let w0 = C::new(2.7, 1.1);
        let w = Jet::var_z(0.0) + w0;
        let jet = bessel_k_jet(0.25, &w, Sheet::Principal).unwrap().unscaled();
        let f = |x: C| crate::specfun::bessel_k(crate::specfun::BesselOrder::Quarter, x).unwrap();
        for h in [0.01_f64, -0.02] {
            let taylor = (0..Z_ORDER).fold(C::new(0.0, 0.0), |acc, a| {
                acc + jet.c[a][0] * h.powi(a as i32)
            });
            // fourth-order remainder
            assert!(close(taylor, f(w0 + h), 1e-7));
        }
    }

    #[test]
    fn reflections() {
        let z = Jet::var_z(0.5);
        let t = Jet::var_tau(2.0);
        let f = (z * z * z + t * C::new(0.0, 1.0) * z) * C::new(1.0, 2.0);
        let r = f.z_reflect();
        // jet of g(z) = f(-z), expanded about z = -0.5
        let direct = {
            let z = -Jet::var_z(-0.5);
            (z * z * z + t * C::new(0.0, 1.0) * z) * C::new(1.0, 2.0)
        };
        for (x, y) in r.c.iter().flatten().zip(direct.c.iter().flatten()) {
            assert!((x - y).norm() < 1e-15);
        }
        let c = f.conj_tau_reflect();
        assert_eq!(c.c[0][1], -f.c[0][1].conj());
    }
}
