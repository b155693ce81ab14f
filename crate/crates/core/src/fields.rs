//! Pointwise evaluation of the vector wave functions used by the scattering
//! bases: regular/outgoing spherical multipole fields and polarized plane
//! waves. These serve as the independent field oracles for every
//! basis-conversion identity.
//!
//! Wave conventions:
//! - M-type (magnetic, TE): E = f_l(kr) X_lm(r̂), X_lm = e^{imφ}(−π̄ θ̂ − iτ̄ φ̂).
//! - E-type (electric, TM): N = (1/k)∇×M, so the duality (1/k)∇×N = M holds.
//! - Plane waves: ê_M = φ̂_k (s), ê_E = ê_M × k̂ (p), E = ê e^{ik·r}.

use num_complex::Complex64;

use crate::specfun::legendre;
use crate::specfun::spherical_bessel_jh;

/// Cartesian complex vector.
pub type CVec3 = [Complex64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialKind {
    Regular,
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveType {
    Electric,
    Magnetic,
}

fn add_scaled(a: &mut CVec3, b: CVec3, s: Complex64) {
    for (ai, bi) in a.iter_mut().zip(b) {
        *ai += s * bi;
    }
}

/// Spherical unit vectors at (θ, φ) in Cartesian components.
fn unit_vectors(theta: f64, phi: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let (st, ct) = (theta.sin(), theta.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    let r_hat = [st * cp, st * sp, ct];
    let theta_hat = [ct * cp, ct * sp, -st];
    let phi_hat = [-sp, cp, 0.0];
    (r_hat, theta_hat, phi_hat)
}

/// Evaluate the spherical vector wave (l, m, type, kind) at the Cartesian
/// point `r` for wavenumber `k`. Valid for moderate l and |kr| (oracle use).
pub fn spherical_wave(
    l: usize,
    m: i32,
    wave: WaveType,
    kind: RadialKind,
    k: f64,
    point: [f64; 3],
) -> CVec3 {
    assert!(l >= 1 && m.unsigned_abs() as usize <= l);
    let r = (point[0] * point[0] + point[1] * point[1] + point[2] * point[2]).sqrt();
    assert!(r > 0.0, "field point must avoid the origin");
    let theta = (point[2] / r).acos();
    let phi = point[1].atan2(point[0]);
    let z = k * r;

    let (jset, hset) = spherical_bessel_jh(l, Complex64::new(z, 0.0)).expect("z > 0");
    let (f, df) = match kind {
        RadialKind::Regular => (jset.values[l], jset.derivatives[l]),
        RadialKind::Outgoing => (hset.values[l], hset.derivatives[l]),
    };

    let (pi_tau_m, phase) = pi_tau_signed(l, m, theta, phi);
    let (pi_v, tau_v, p_bar) = pi_tau_m;
    let (_, theta_hat, phi_hat) = unit_vectors(theta, phi);
    let (r_hat, _, _) = unit_vectors(theta, phi);
    let c = |v: [f64; 3]| [Complex64::from(v[0]), Complex64::from(v[1]), Complex64::from(v[2])];

    let mut out = [Complex64::ZERO; 3];
    match wave {
        WaveType::Magnetic => {
            // M = f(z)·e^{imφ}(−π̄ θ̂ − iτ̄ φ̂)
            add_scaled(&mut out, c(theta_hat), -phase * f * pi_v);
            add_scaled(&mut out, c(phi_hat), -Complex64::I * phase * f * tau_v);
        }
        WaveType::Electric => {
            // N = i e^{imφ}[√λ (f/z) P̄ r̂ + ((zf)'/z)(τ̄ θ̂ + iπ̄ φ̂)]
            let lam = (l * (l + 1)) as f64;
            let zf_prime_over_z = (f + z * df) / z;
            add_scaled(
                &mut out,
                c(r_hat),
                Complex64::I * phase * lam.sqrt() * (f / z) * p_bar,
            );
            add_scaled(
                &mut out,
                c(theta_hat),
                Complex64::I * phase * zf_prime_over_z * tau_v,
            );
            add_scaled(
                &mut out,
                c(phi_hat),
                Complex64::I * phase * zf_prime_over_z * (Complex64::I * pi_v),
            );
        }
    }
    out
}

/// (π̄, τ̄, P̄) for signed m at real angles, plus the azimuthal phase e^{imφ}.
/// Negative m uses P̄_l^{−|m|} = (−1)^m P̄_l^{|m|}.
fn pi_tau_signed(
    l: usize,
    m: i32,
    theta: f64,
    phi: f64,
) -> ((Complex64, Complex64, Complex64), Complex64) {
    let ma = m.unsigned_abs() as usize;
    let (pi_v, tau_v) = legendre::pi_tau(l, ma, Complex64::new(theta.cos(), 0.0), theta.sin());
    let idx = l - ma.max(1);
    let lam = ((l * (l + 1)) as f64).sqrt();
    // Recover P̄ from π̄ when m ≠ 0, else rebuild from the recurrence.
    let p_bar = if ma > 0 {
        pi_v[idx] * lam * theta.sin() / ma as f64
    } else {
        norm_legendre_m0(l, theta.cos())
    };
    let sign = if m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
    let m_ratio = if m < 0 { -1.0 } else { 1.0 };
    // π̄ carries an explicit factor m, τ̄ does not.
    let pi_s = pi_v[idx] * sign * m_ratio;
    let tau_s = tau_v[idx] * sign;
    let p_s = p_bar * sign;
    let phase = Complex64::new(0.0, m as f64 * phi).exp();
    ((pi_s, tau_s, p_s), phase)
}

fn norm_legendre_m0(l: usize, x: f64) -> Complex64 {
    let mut p0 = Complex64::from((1.0 / (4.0 * std::f64::consts::PI)).sqrt());
    if l == 0 {
        return p0;
    }
    let mut p1 = Complex64::from(x) * 3.0_f64.sqrt() * p0;
    for ll in 2..=l {
        let (alpha, beta) = legendre::recurrence_coeffs(ll, 0);
        let p2 = alpha * x * p1 - beta * p0;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Polarized plane wave E = ê_P e^{ik·r} with propagation direction given by
/// (cosθ_k complex for evanescent continuation, sinθ_k ≥ 0 real, φ_k) and
/// the P = M (s, along φ̂_k) / P = E (p, ê_s × k̂) polarization vectors.
pub fn plane_wave(
    wave: WaveType,
    k: f64,
    cos_k: Complex64,
    sin_k: f64,
    phi_k: f64,
    point: [f64; 3],
) -> CVec3 {
    let (sp, cp) = (phi_k.sin(), phi_k.cos());
    // k̂ in Cartesian components (cos_k may be complex).
    let k_hat = [
        Complex64::from(sin_k * cp),
        Complex64::from(sin_k * sp),
        cos_k,
    ];
    let e_s = [Complex64::from(-sp), Complex64::from(cp), Complex64::ZERO];
    // ê_p = ê_s × k̂ (bilinear cross product).
    let e_p = [
        e_s[1] * k_hat[2] - e_s[2] * k_hat[1],
        e_s[2] * k_hat[0] - e_s[0] * k_hat[2],
        e_s[0] * k_hat[1] - e_s[1] * k_hat[0],
    ];
    let e = match wave {
        WaveType::Magnetic => e_s,
        WaveType::Electric => e_p,
    };
    let phase = (Complex64::I
        * k
        * (k_hat[0] * point[0] + k_hat[1] * point[1] + k_hat[2] * point[2]))
        .exp();
    [e[0] * phase, e[1] * phase, e[2] * phase]
}
