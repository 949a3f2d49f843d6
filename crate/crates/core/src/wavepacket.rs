//! The spin-polarized packet `|theta, phi_spin>` in the waveguide, its Dirac
//! density and current, and numerical checks of the Dirac and continuity
//! equations.
//!
//! Standard representation: `beta = diag(1, 1, -1, -1)`,
//! `alpha_i = [[0, sigma_i], [sigma_i, 0]]`. Time enters the amplitudes as
//! `tau = t` (code units `c = 1`).

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::kernels::{kernel_bundle, AmplitudeBundle, KernelSpec, WaveguideGeometry};
use crate::oracle::{norm_kspace, z_density_integral, QuadratureSettings};
use crate::specfun::bessel_j01;

const I: C = C::new(0.0, 1.0);

/// Polarization of the large components on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    theta: f64,
    phi_spin: f64,
}

impl SpinState {
    pub fn new(theta: f64, phi_spin: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(invalid(
                "theta",
                format!("must lie in [0, pi], got {theta}"),
            ));
        }
        if !phi_spin.is_finite() {
            return Err(invalid("phi_spin", "must be finite"));
        }
        Ok(SpinState {
            theta,
            phi_spin: phi_spin.rem_euclid(2.0 * PI),
        })
    }

    pub fn up() -> Self {
        SpinState {
            theta: 0.0,
            phi_spin: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi_spin(&self) -> f64 {
        self.phi_spin
    }

    /// `(cos(theta/2), e^{i phi_spin} sin(theta/2))`.
    pub fn chi(&self) -> [C; 2] {
        let (s, c) = (0.5 * self.theta).sin_cos();
        [C::new(c, 0.0), C::from_polar(s, self.phi_spin)]
    }
}

/// A point inside the waveguide in cylindrical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylPoint {
    pub rho: f64,
    pub phi: f64,
    pub z: f64,
}

impl CylPoint {
    pub fn new(rho: f64, phi: f64, z: f64) -> Self {
        CylPoint { rho, phi, z }
    }

    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Self {
        CylPoint {
            rho: x.hypot(y),
            phi: y.atan2(x),
            z,
        }
    }

    fn validate(&self, geom: &WaveguideGeometry) -> Result<()> {
        if !(self.rho >= 0.0 && self.rho <= geom.a() * (1.0 + 1e-12)) {
            return Err(invalid(
                "rho",
                format!("{} is outside [0, a = {}]", self.rho, geom.a()),
            ));
        }
        if !self.phi.is_finite() {
            return Err(invalid("phi", "must be finite"));
        }
        if !(self.z >= 0.0 && self.z.is_finite()) {
            return Err(invalid("z", format!("{} is outside the waveguide", self.z)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bispinor {
    pub c: [C; 4],
}

impl Bispinor {
    pub fn zero() -> Self {
        Bispinor {
            c: [C::new(0.0, 0.0); 4],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|x| x.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentSample {
    pub density: f64,
    pub j_rho: f64,
    pub j_phi: f64,
    pub j_z: f64,
}

/// Radial factors `(J_0(k_perp rho), k_perp J_1(k_perp rho))`.
fn radial(geom: &WaveguideGeometry, rho: f64) -> (f64, f64) {
    let (j0, j1) = bessel_j01(geom.k_perp() * rho);
    (j0, geom.k_perp() * j1)
}

/// Upper pair `J_0 F chi`; lower pair `-(sigma_z d_z + sigma_rho d_rho) J_0 G chi`.
fn assemble(
    geom: &WaveguideGeometry,
    spin: &SpinState,
    p: &CylPoint,
    f: C,
    g: C,
    g_z: C,
) -> Bispinor {
    let (j0, kj1) = radial(geom, p.rho);
    let [u, d] = spin.chi();
    let e_minus = C::from_polar(1.0, -p.phi);
    let e_plus = e_minus.conj();
    // d_rho J_0(k_perp rho) = -k_perp J_1
    Bispinor {
        c: [
            u * f * j0,
            d * f * j0,
            -u * g_z * j0 + e_minus * d * g * kj1,
            d * g_z * j0 + e_plus * u * g * kj1,
        ],
    }
}

/// Bispinor from precomputed amplitudes at `(p.z, t)`.
pub fn bispinor_from_bundle(
    geom: &WaveguideGeometry,
    spin: &SpinState,
    p: &CylPoint,
    b: &AmplitudeBundle,
) -> Bispinor {
    assemble(geom, spin, p, b.f, b.g, b.g_z)
}

pub fn evaluate_bispinor(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    spin: &SpinState,
    p: &CylPoint,
    t: f64,
) -> Result<Bispinor> {
    p.validate(geom)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be non-negative, got {t}")));
    }
    let b = kernel_bundle(spec, geom, p.z, t)?;
    Ok(bispinor_from_bundle(geom, spin, p, &b))
}

/// The single-`k` basis mode: `A(k') = delta(k' - k)`.
pub fn plane_wave_mode(
    geom: &WaveguideGeometry,
    spin: &SpinState,
    k: f64,
    p: &CylPoint,
    t: f64,
) -> Bispinor {
    let w = geom.omega(k);
    let phase = C::from_polar(1.0, -w * t);
    let f = phase * (k * p.z).sin();
    let g = I * phase * ((k * p.z).sin() / (w + 1.0));
    let g_z = I * phase * (k * (k * p.z).cos() / (w + 1.0));
    assemble(geom, spin, p, f, g, g_z)
}

/// `psi^dagger alpha psi` in Cartesian components.
fn cartesian_current(psi: &Bispinor) -> [f64; 3] {
    let [u1, u2, l1, l2] = psi.c;
    [
        2.0 * (u1.conj() * l2 + u2.conj() * l1).re,
        2.0 * (u1.conj() * (-I * l2) + u2.conj() * (I * l1)).re,
        2.0 * (u1.conj() * l1 - u2.conj() * l2).re,
    ]
}

/// Density `psi^dagger psi` and the current resolved along `(rho, phi, z)` at azimuth `phi`.
pub fn density_and_current(psi: &Bispinor, phi: f64) -> CurrentSample {
    let [jx, jy, jz] = cartesian_current(psi);
    let (s, c) = phi.sin_cos();
    CurrentSample {
        density: psi.norm_sqr(),
        j_rho: jx * c + jy * s,
        j_phi: -jx * s + jy * c,
        j_z: jz,
    }
}

/// The two terms of `j_z`: `-2 J_0^2 Re[F* G_z]` and
/// `-2 k_perp sin(phi_spin - phi) sin(theta) J_0 J_1 Im[F* G]`.
pub fn current_z_split_from_bundle(
    geom: &WaveguideGeometry,
    spin: &SpinState,
    rho: f64,
    phi: f64,
    b: &AmplitudeBundle,
) -> (f64, f64) {
    let (j0, kj1) = radial(geom, rho);
    let convective = -2.0 * j0 * j0 * (b.f.conj() * b.g_z).re;
    let spin_term =
        -2.0 * (spin.phi_spin - phi).sin() * spin.theta.sin() * j0 * kj1 * (b.f.conj() * b.g).im;
    (convective, spin_term)
}

pub fn current_z_split(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    spin: &SpinState,
    p: &CylPoint,
    t: f64,
) -> Result<(f64, f64)> {
    p.validate(geom)?;
    let b = kernel_bundle(spec, geom, p.z, t)?;
    Ok(current_z_split_from_bundle(geom, spin, p.rho, p.phi, &b))
}

pub fn current_z_closed(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    spin: &SpinState,
    p: &CylPoint,
    t: f64,
) -> Result<f64> {
    let (a, b) = current_z_split(spec, geom, spin, p, t)?;
    Ok(a + b)
}

/// Right-hand side of the k-space normalization condition, `1/((pi a)^2 J_1^2(k_perp a))`.
pub fn normalization_target(geom: &WaveguideGeometry) -> f64 {
    let (_, j1) = bessel_j01(geom.k_perp() * geom.a());
    1.0 / ((PI * geom.a()).powi(2) * j1 * j1)
}

/// The positive real `A0` that normalizes the packet.
pub fn normalize(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    settings: &QuadratureSettings,
) -> Result<C> {
    let unit = spec.with_a0(C::new(1.0, 0.0));
    let n = norm_kspace(&unit, geom, settings)?;
    if !(n > 0.0 && n.is_finite()) {
        return Err(invalid(
            "kernel",
            format!("k-space norm is {n}; the packet vanishes"),
        ));
    }
    Ok(C::new((normalization_target(geom) / n).sqrt(), 0.0))
}

/// `\int psi^dagger psi dV` over the waveguide at time `t`.
///
/// The radial and azimuthal integrals are done exactly: cross terms carry
/// `e^{+-i phi}` and vanish, and `\int_0^a rho J_nu^2 = (a^2/2) J_1^2(k_perp a)`
/// for both orders, so the spin state drops out.
pub fn total_norm(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    t: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let (_, j1) = bessel_j01(geom.k_perp() * geom.a());
    let radial = PI * geom.a() * geom.a() * j1 * j1;
    Ok(radial * z_density_integral(spec, geom, t, settings)?)
}

/// A wave function on spacetime, `(t, x, y, z) -> psi`.
pub trait Field {
    fn psi(&self, t: f64, x: f64, y: f64, z: f64) -> Result<Bispinor>;
}

impl<F: Fn(f64, f64, f64, f64) -> Result<Bispinor>> Field for F {
    fn psi(&self, t: f64, x: f64, y: f64, z: f64) -> Result<Bispinor> {
        self(t, x, y, z)
    }
}

fn sub(a: &Bispinor, b: &Bispinor, scale: f64) -> [C; 4] {
    std::array::from_fn(|i| (a.c[i] - b.c[i]) * scale)
}

/// `|| i d_t psi + i alpha . grad psi - beta psi || / || psi ||` with every
/// derivative a central difference of step `h`.
pub fn dirac_residual_of<F: Field>(
    field: &F,
    t: f64,
    x: f64,
    y: f64,
    z: f64,
    h: f64,
) -> Result<f64> {
    let psi = field.psi(t, x, y, z)?;
    let d = |dt: f64, dx: f64, dy: f64, dz: f64| -> Result<[C; 4]> {
        let p = field.psi(t + dt, x + dx, y + dy, z + dz)?;
        let m = field.psi(t - dt, x - dx, y - dy, z - dz)?;
        Ok(sub(&p, &m, 0.5 / h))
    };
    let dt = d(h, 0.0, 0.0, 0.0)?;
    let dx = d(0.0, h, 0.0, 0.0)?;
    let dy = d(0.0, 0.0, h, 0.0)?;
    let dz = d(0.0, 0.0, 0.0, h)?;
    // alpha_i acting on v: upper <- sigma_i v_lower, lower <- sigma_i v_upper
    let sigma_x = |a: C, b: C| [b, a];
    let sigma_y = |a: C, b: C| [-I * b, I * a];
    let sigma_z = |a: C, b: C| [a, -b];
    let alpha = |v: &[C; 4], s: &dyn Fn(C, C) -> [C; 2]| -> [C; 4] {
        let up = s(v[2], v[3]);
        let lo = s(v[0], v[1]);
        [up[0], up[1], lo[0], lo[1]]
    };
    let ax = alpha(&dx, &sigma_x);
    let ay = alpha(&dy, &sigma_y);
    let az = alpha(&dz, &sigma_z);
    let beta = [1.0, 1.0, -1.0, -1.0];
    let residual: f64 = (0..4)
        .map(|i| (I * dt[i] + I * (ax[i] + ay[i] + az[i]) - psi.c[i] * beta[i]).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(residual / psi.norm_sqr().sqrt())
}

fn packet_field<'a>(
    spec: &'a KernelSpec,
    geom: &'a WaveguideGeometry,
    spin: &'a SpinState,
) -> impl Fn(f64, f64, f64, f64) -> Result<Bispinor> + 'a {
    move |t, x, y, z| {
        let p = CylPoint::from_cartesian(x, y, z);
        let b = kernel_bundle(spec, geom, z, t)?;
        Ok(bispinor_from_bundle(geom, spin, &p, &b))
    }
}

/// Dirac residual of the packet at `p` (which must clear the walls by more than `h`).
pub fn dirac_residual(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    spin: &SpinState,
    p: &CylPoint,
    t: f64,
    h: f64,
) -> Result<f64> {
    p.validate(geom)?;
    let (x, y) = (p.rho * p.phi.cos(), p.rho * p.phi.sin());
    dirac_residual_of(&packet_field(spec, geom, spin), t, x, y, p.z, h)
}

/// `|d_t rho + div j| / (|d_t rho| + sum_i |d_i j_i|)` by central differences.
pub fn continuity_residual(
    spec: &KernelSpec,
    geom: &WaveguideGeometry,
    spin: &SpinState,
    p: &CylPoint,
    t: f64,
    h: f64,
) -> Result<f64> {
    p.validate(geom)?;
    let field = packet_field(spec, geom, spin);
    let (x, y, z) = (p.rho * p.phi.cos(), p.rho * p.phi.sin(), p.z);
    let density = |t: f64, x: f64, y: f64, z: f64| -> Result<(f64, [f64; 3])> {
        let psi = field(t, x, y, z)?;
        Ok((psi.norm_sqr(), cartesian_current(&psi)))
    };
    let (rp, _) = density(t + h, x, y, z)?;
    let (rm, _) = density(t - h, x, y, z)?;
    let drho = (rp - rm) / (2.0 * h);
    let mut div = 0.0;
    let mut scale = drho.abs();
    for axis in 0..3 {
        let mut e = [0.0; 3];
        e[axis] = h;
        let (_, jp) = density(t, x + e[0], y + e[1], z + e[2])?;
        let (_, jm) = density(t, x - e[0], y - e[1], z - e[2])?;
        let d = (jp[axis] - jm[axis]) / (2.0 * h);
        div += d;
        scale += d.abs();
    }
    Ok((drho + div).abs() / scale)
}
