//! T-matrix elements for the three shapes: Fresnel coefficients of the
//! half-space, Mie coefficients of the sphere, and the 2×2
//! polarization-mixing block of the dielectric cylinder at oblique incidence.
//!
//! Conventions (fixed once, tested through the passivity invariant):
//! scattered = t × incoming-regular, S = 1 + 2t, time dependence e^{−iωt},
//! Im ε ≥ 0. P = E is electric-type (TM, p-polarized for planar waves),
//! P = M magnetic-type (TE, s-polarized). With these choices the per-mode
//! bracket Re t + Σ|t|² is non-positive for every passive scatterer, and
//! perfect mirrors give r^E → +1, r^M → −1.

use num_complex::Complex64;
use thiserror::Error;

use crate::constants::SPEED_OF_LIGHT;
use crate::materials::{sqrt_passive, DielectricModel, MaterialError};
use crate::specfun::{
    cyl_j_log_derivative, cylindrical_bessel_jh, riccati_psi_log_derivative, SpecfunError,
};

#[derive(Debug, Error)]
pub enum ScatteringError {
    #[error("special function evaluation failed: {0}")]
    Specfun(#[from] SpecfunError),
    #[error("material evaluation failed: {0}")]
    Material(#[from] MaterialError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Fresnel reflection pair of a half-space for vacuum incidence at one
/// (ω, k_transverse). `r_e` is the electric (TM, p) coefficient, `r_m` the
/// magnetic (TE, s) one.
#[derive(Debug, Clone, Copy)]
pub struct FresnelPair {
    pub r_e: Complex64,
    pub r_m: Complex64,
    pub k_transverse: f64,
    pub omega: f64,
    pub evanescent: bool,
}

/// Vacuum-side normal wavevector component with the decay branch
/// Im k_z ≥ 0 for evanescent waves.
pub fn k_z_vacuum(omega: f64, k_transverse: f64) -> Complex64 {
    let k = omega / SPEED_OF_LIGHT;
    let arg = k * k - k_transverse * k_transverse;
    if arg >= 0.0 {
        Complex64::new(arg.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-arg).sqrt())
    }
}

/// Fresnel coefficients for a plate of permittivity `eps_plate` (μ = 1).
pub fn fresnel(eps_plate: Complex64, omega: f64, k_transverse: f64) -> FresnelPair {
    let k = omega / SPEED_OF_LIGHT;
    let kz = k_z_vacuum(omega, k_transverse);
    let kzm = sqrt_passive(eps_plate * k * k - k_transverse * k_transverse);
    FresnelPair {
        r_e: (eps_plate * kz - kzm) / (eps_plate * kz + kzm),
        r_m: (kz - kzm) / (kz + kzm),
        k_transverse,
        omega,
        evanescent: k_transverse > k,
    }
}

/// A plate in the transfer geometry: either a dielectric half-space or the
/// idealized black surface (r ≡ 0) used as a test hook for blackbody limits.
#[derive(Debug, Clone)]
pub enum PlateModel {
    Material(DielectricModel),
    Black,
}

impl PlateModel {
    pub fn reflection(&self, omega: f64, k_transverse: f64) -> Result<FresnelPair, MaterialError> {
        match self {
            PlateModel::Material(model) => {
                let eps = crate::materials::permittivity(model, omega)?;
                Ok(fresnel(eps, omega, k_transverse))
            }
            PlateModel::Black => Ok(FresnelPair {
                r_e: Complex64::ZERO,
                r_m: Complex64::ZERO,
                k_transverse,
                omega,
                evanescent: k_transverse > omega / SPEED_OF_LIGHT,
            }),
        }
    }
}

/// Mie T-matrix pair of one multipole order.
#[derive(Debug, Clone, Copy)]
pub struct MieBlock {
    pub l: usize,
    pub t_e: Complex64,
    pub t_m: Complex64,
    pub size_parameter: f64,
}

/// Mie coefficients of a homogeneous sphere with permittivity `eps_sphere`
/// and permeability `mu_sphere`, in the S = 1 + 2t convention.
///
/// For x = ωR/c ≪ 1 the electric element reduces to the dipole form
/// t^E_1 = (2i/3)x³(ε−1)/(ε+2) and the magnetic one to the μ analogue.
pub fn mie_block(
    eps_sphere: Complex64,
    mu_sphere: Complex64,
    omega: f64,
    radius: f64,
    l: usize,
) -> Result<MieBlock, ScatteringError> {
    if l < 1 {
        return Err(ScatteringError::InvalidArgument(
            "multipole order l must be ≥ 1".into(),
        ));
    }
    if !(radius > 0.0) || !(omega > 0.0) {
        return Err(ScatteringError::InvalidArgument(
            "radius and frequency must be positive".into(),
        ));
    }
    let all = mie_t_scaled(eps_sphere, mu_sphere, omega, radius, l)?;
    let x = omega * radius / SPEED_OF_LIGHT;
    let t = &all[l - 1];
    Ok(MieBlock {
        l,
        t_e: t[0].to_complex(),
        t_m: t[1].to_complex(),
        size_parameter: x,
    })
}

/// Complex number carried as mantissa × e^{log_mag}; keeps the deeply
/// sub-threshold high-l Mie elements representable for the transfer solver.
#[derive(Debug, Clone, Copy)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub log_mag: f64,
}

impl ScaledComplex {
    pub fn zero() -> Self {
        Self {
            mantissa: Complex64::ZERO,
            log_mag: 0.0,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        self.mantissa * self.log_mag.exp()
    }

    pub fn log_abs(&self) -> f64 {
        if self.mantissa == Complex64::ZERO {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.log_mag
        }
    }
}

/// Scaled Mie elements [t^E_l, t^M_l] for l = 1..=l_max, built from
/// logarithmic derivatives and ratio recurrences so no intermediate value
/// overflows or underflows regardless of order.
pub fn mie_t_scaled(
    eps_sphere: Complex64,
    mu_sphere: Complex64,
    omega: f64,
    radius: f64,
    l_max: usize,
) -> Result<Vec<[ScaledComplex; 2]>, ScatteringError> {
    let x = omega * radius / SPEED_OF_LIGHT;
    let m = sqrt_passive(eps_sphere * mu_sphere);
    let zx = Complex64::new(x, 0.0);

    if (eps_sphere - Complex64::ONE).norm() < 1e-15 && (mu_sphere - Complex64::ONE).norm() < 1e-15
    {
        return Ok(vec![[ScaledComplex::zero(), ScaledComplex::zero()]; l_max]);
    }

    // Interior logarithmic derivative D_l = ψ'_l(mx)/ψ_l(mx).
    let d_in = riccati_psi_log_derivative(l_max, m * zx)?;
    // Exterior ψ'/ψ and the j-ratios feeding the ψ/ξ log-magnitude walk.
    let d_psi = riccati_psi_log_derivative(l_max, zx)?;
    let j_ratios = sph_j_ratios(l_max, zx)?;

    // Exterior ξ'/ξ via the (dominant, upward-stable) h-ratio recurrence.
    let mut h_ratios = vec![Complex64::ZERO; l_max + 1];
    // h_1/h_0 = (z + i)/(i z) from the closed forms.
    h_ratios[0] = (zx + Complex64::I) / (Complex64::I * zx);
    for l in 1..=l_max {
        h_ratios[l] = (2 * l + 1) as f64 / zx - h_ratios[l - 1].finv();
    }
    let d_xi: Vec<Complex64> = (0..=l_max)
        .map(|l| (l + 1) as f64 / zx - h_ratios[l])
        .collect();

    // ρ_l = ψ_l(x)/ξ_l(x), tracked as unit phase × e^{log_mag}.
    // ρ_0 = i sin(x) e^{−ix}.
    let rho0 = Complex64::I * Complex64::new(x.sin(), 0.0) * Complex64::new(0.0, -x).exp();
    let mut rho_phase = if rho0 == Complex64::ZERO {
        Complex64::ONE
    } else {
        rho0 / rho0.norm()
    };
    let mut rho_log = rho0.norm().max(f64::MIN_POSITIVE).ln();

    let q_e = m / eps_sphere;
    let q_m = m / mu_sphere;

    let mut out = Vec::with_capacity(l_max);
    for l in 1..=l_max {
        // Advance ρ to order l.
        let step = j_ratios[l - 1] / h_ratios[l - 1];
        let mag = step.norm();
        if mag > 0.0 {
            rho_phase *= step / mag;
            rho_log += mag.ln();
        } else {
            rho_phase = Complex64::ZERO;
        }

        let make = |q: Complex64| -> ScaledComplex {
            let num = d_psi[l] - q * d_in[l];
            let den = d_xi[l] - q * d_in[l];
            ScaledComplex {
                mantissa: -rho_phase * (num / den),
                log_mag: rho_log,
            }
        };
        out.push([make(q_e), make(q_m)]);
    }
    Ok(out)
}

/// j_{l+1}(z)/j_l(z) for l = 0..=n_max−1 (continued fraction at the top,
/// downward recurrence below), re-derived from the log-derivative ladder.
fn sph_j_ratios(n_max: usize, z: Complex64) -> Result<Vec<Complex64>, SpecfunError> {
    let d = riccati_psi_log_derivative(n_max, z)?;
    // D_l = (l+1)/z − j_{l+1}/j_l.
    Ok((0..n_max).map(|l| (l + 1) as f64 / z - d[l]).collect())
}

/// Cylinder T-matrix block at one (n, k_∥): 2×2 matrix indexed
/// (outgoing P', incoming P) with P = E, M over the axial-field basis
/// (E_z, Z₀H_z).
#[derive(Debug, Clone, Copy)]
pub struct CylinderBlock {
    pub n: i32,
    pub k_parallel: f64,
    /// t[out][in], index 0 = E, 1 = M.
    pub t: [[Complex64; 2]; 2],
}

impl CylinderBlock {
    /// Per-outgoing-polarization emission bracket
    /// Re t^{PP} + |t^{PP}|² + |t^{P P̄}|².
    pub fn emission_bracket(&self, out: usize) -> f64 {
        self.t[out][out].re + self.t[out][0].norm_sqr() + self.t[out][1].norm_sqr()
    }
}

/// Solve the dielectric-cylinder boundary problem at oblique incidence
/// (μ = 1), including the E↔M mixing for k_∥ ≠ 0.
pub fn cylinder_block(
    eps_cyl: Complex64,
    omega: f64,
    radius: f64,
    n: i32,
    k_parallel: f64,
) -> Result<CylinderBlock, ScatteringError> {
    let blocks = cylinder_blocks_batch(eps_cyl, omega, radius, n.unsigned_abs() as usize, k_parallel)?;
    let b = blocks[n.unsigned_abs() as usize];
    if n >= 0 {
        Ok(CylinderBlock { n, ..b })
    } else {
        // n → −n: diagonal entries even, off-diagonal entries odd.
        Ok(CylinderBlock {
            n,
            k_parallel,
            t: [[b.t[0][0], -b.t[0][1]], [-b.t[1][0], b.t[1][1]]],
        })
    }
}

/// Cylinder blocks for every order 0..=n_max at one (ω, k_∥), sharing the
/// Bessel evaluations across orders.
pub fn cylinder_blocks_batch(
    eps_cyl: Complex64,
    omega: f64,
    radius: f64,
    n_max: usize,
    k_parallel: f64,
) -> Result<Vec<CylinderBlock>, ScatteringError> {
    if !(radius > 0.0) || !(omega > 0.0) {
        return Err(ScatteringError::InvalidArgument(
            "radius and frequency must be positive".into(),
        ));
    }
    let k0 = omega / SPEED_OF_LIGHT;
    let q_out = {
        let arg = k0 * k0 - k_parallel * k_parallel;
        if arg >= 0.0 {
            Complex64::new(arg.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-arg).sqrt())
        }
    };
    let q_in = sqrt_passive(eps_cyl * k0 * k0 - k_parallel * k_parallel);

    if (eps_cyl - Complex64::ONE).norm() < 1e-15 {
        return Ok((0..=n_max)
            .map(|n| CylinderBlock {
                n: n as i32,
                k_parallel,
                t: [[Complex64::ZERO; 2]; 2],
            })
            .collect());
    }

    let zo = q_out * radius;
    let zi = q_in * radius;

    let (jset, hset) = cylindrical_bessel_jh(n_max, zo)?;
    // Scaled values share one exponent per family; every t entry carries one
    // J factor and one H factor against an H² denominator, so the net factor
    // is e^{σ_J − σ_H} applied at the end.
    let scale = (jset.log_scale - hset.log_scale).exp();
    let d_inner = cyl_j_log_derivative(n_max, zi)?;

    let inv_diff = q_out.powi(2).finv() - q_in.powi(2).finv();

    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let jv = jset.values[n];
        let djv = jset.derivatives[n];
        let hv = hset.values[n];
        let dhv = hset.derivatives[n];
        let di = d_inner[n];

        let coupling = Complex64::new(0.0, n as f64 * k_parallel / radius) * inv_diff;

        // Surface combinations: b = k₀(D_i/q_in)·f − (k₀/q_out)·f',
        // c = same with an ε on the interior term.
        let b_of = |f: Complex64, df: Complex64| k0 * (di / q_in) * f - (k0 / q_out) * df;
        let c_of =
            |f: Complex64, df: Complex64| k0 * eps_cyl * (di / q_in) * f - (k0 / q_out) * df;

        let a_h = coupling * hv;
        let a_j = coupling * jv;
        let b_h = b_of(hv, dhv);
        let b_j = b_of(jv, djv);
        let c_h = c_of(hv, dhv);
        let c_j = c_of(jv, djv);

        let det = a_h * a_h + b_h * c_h;
        if det == Complex64::ZERO {
            return Err(ScatteringError::InvalidArgument(format!(
                "degenerate cylinder boundary system at n = {n}, k_par = {k_parallel:e}"
            )));
        }

        let t_ee = (-a_j * a_h - b_h * c_j) / det * scale;
        let t_me = (a_h * c_j - c_h * a_j) / det * scale;
        let t_em = (-b_j * a_h + b_h * a_j) / det * scale;
        let t_mm = (-a_h * a_j - c_h * b_j) / det * scale;

        // Orders deep in the sub-wavelength tail can overflow the irregular
        // Hankel factors; the true block there is zero to every digit.
        let finite = [t_ee, t_em, t_me, t_mm].iter().all(|v| v.is_finite());
        let t = if finite {
            [[t_ee, t_em], [t_me, t_mm]]
        } else {
            [[Complex64::ZERO; 2]; 2]
        };
        out.push(CylinderBlock {
            n: n as i32,
            k_parallel,
            t,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fresnel_vacuum_is_transparent() {
        for kt_frac in [0.0, 0.5, 0.99, 1.7] {
            let omega = 2.0e14;
            let kt = kt_frac * omega / SPEED_OF_LIGHT;
            let f = fresnel(Complex64::ONE, omega, kt);
            assert!(f.r_e.norm() < 1e-14);
            assert!(f.r_m.norm() < 1e-14);
        }
    }

    #[test]
    fn fresnel_normal_incidence_eps_four() {
        let omega = 1.0e14;
        let f = fresnel(c(4.0, 0.0), omega, 0.0);
        assert_relative_eq!(f.r_e.norm(), 1.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(f.r_m.norm(), 1.0 / 3.0, max_relative = 1e-12);
        // Signs: r^E = +1/3, r^M = −1/3 in this convention.
        assert!(f.r_e.re > 0.0);
        assert!(f.r_m.re < 0.0);
    }

    #[test]
    fn fresnel_perfect_mirror_limit() {
        // Exact deviation from unit reflectance is 2/(√|ε| cosθ) for r^E at
        // normal incidence; grazing angles approach unity faster.
        let omega = 1.0e14;
        for angle_frac in [0.0, 0.3, 0.8] {
            let kt = angle_frac * omega / SPEED_OF_LIGHT;
            let f = fresnel(c(1e12, 0.0), omega, kt);
            assert!((f.r_e.norm() - 1.0).abs() < 5.0e-6);
            assert!((f.r_m.norm() - 1.0).abs() < 5.0e-6);
        }
    }

    #[test]
    fn fresnel_subunitary_for_passive_propagating() {
        let omega = 1.5e14;
        for &eps in &[c(2.5, 0.0), c(3.0, 1.5), c(-4.0, 0.2)] {
            for i in 0..20 {
                let kt = (i as f64 / 20.0) * omega / SPEED_OF_LIGHT;
                let f = fresnel(eps, omega, kt);
                assert!(f.r_e.norm() <= 1.0 + 1e-12);
                assert!(f.r_m.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn mie_vacuum_sphere_vanishes() {
        let b = mie_block(Complex64::ONE, Complex64::ONE, 1e14, 1e-6, 1).unwrap();
        assert_eq!(b.t_e, Complex64::ZERO);
        assert_eq!(b.t_m, Complex64::ZERO);
    }

    #[test]
    fn mie_dipole_limit() {
        // x = 10⁻³, ε = 2: t^E_1 = (2i/3)x³(ε−1)/(ε+2) within 0.1%.
        let radius = 1.0e-6;
        let omega = 1.0e-3 * SPEED_OF_LIGHT / radius;
        let eps = c(2.0, 0.0);
        let b = mie_block(eps, Complex64::ONE, omega, radius, 1).unwrap();
        let x = 1.0e-3;
        let expected = Complex64::new(0.0, 2.0 / 3.0) * x * x * x * (eps - 1.0) / (eps + 2.0);
        assert!(
            (b.t_e - expected).norm() / expected.norm() < 1e-3,
            "dipole limit violated: {} vs {}",
            b.t_e,
            expected
        );
    }

    #[test]
    fn mie_magnetic_dipole_limit() {
        // μ ≠ 1 sphere: t^M_1 = (2i/3)x³(μ−1)/(μ+2).
        let radius = 1.0e-6;
        let omega = 1.0e-3 * SPEED_OF_LIGHT / radius;
        let mu = c(3.0, 0.0);
        let b = mie_block(Complex64::ONE * 1.000000001, mu, omega, radius, 1).unwrap();
        let x = 1.0e-3;
        let expected = Complex64::new(0.0, 2.0 / 3.0) * x * x * x * (mu - 1.0) / (mu + 2.0);
        assert!(
            (b.t_m - expected).norm() / expected.norm() < 1e-3,
            "magnetic dipole limit violated: {} vs {}",
            b.t_m,
            expected
        );
    }

    #[test]
    fn mie_lossless_unitarity() {
        // |1 + 2t| = 1 to 10⁻¹⁰ for real ε at x = 1, l = 1..10.
        let radius = 1.0e-6;
        let omega = SPEED_OF_LIGHT / radius;
        for l in 1..=10 {
            let b = mie_block(c(5.0, 0.0), Complex64::ONE, omega, radius, l).unwrap();
            for t in [b.t_e, b.t_m] {
                let s = Complex64::ONE + 2.0 * t;
                assert!(
                    (s.norm() - 1.0).abs() < 1e-10,
                    "unitarity violated at l = {l}: |S| = {}",
                    s.norm()
                );
            }
        }
    }

    #[test]
    fn mie_passivity_bracket() {
        // Re t + |t|² ≤ 0 for absorbing spheres across sizes and orders.
        let radius = 2.0e-6;
        for &eps in &[c(3.0, 0.5), c(-2.0, 1.0), c(12.0, 3.0)] {
            for &xfrac in &[0.1, 1.0, 5.0] {
                let omega = xfrac * SPEED_OF_LIGHT / radius;
                for l in 1..=8 {
                    let b = mie_block(eps, Complex64::ONE, omega, radius, l).unwrap();
                    for t in [b.t_e, b.t_m] {
                        assert!(
                            t.re + t.norm_sqr() <= 1e-12,
                            "passivity violated: eps = {eps}, x = {xfrac}, l = {l}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn mie_continuity_in_frequency() {
        // Finite-difference smoothness scan away from material resonances.
        let radius = 1.5e-6;
        let eps = c(2.5, 0.7);
        let omega0 = 0.8 * SPEED_OF_LIGHT / radius;
        let f = |omega: f64| {
            mie_block(eps, Complex64::ONE, omega, radius, 2)
                .unwrap()
                .t_e
        };
        let h = 1e-6;
        let base = f(omega0);
        let d1 = (f(omega0 * (1.0 + h)) - base) / (omega0 * h);
        let d2 = (f(omega0 * (1.0 + 2.0 * h)) - base) / (2.0 * omega0 * h);
        assert!((d1 - d2).norm() / d1.norm() < 1e-3);
    }

    #[test]
    fn mie_scaled_matches_plain_and_descends() {
        let radius = 1.0e-6;
        let omega = 2.0 * SPEED_OF_LIGHT / radius;
        let eps = c(3.0, 0.4);
        let all = mie_t_scaled(eps, Complex64::ONE, omega, radius, 40).unwrap();
        for l in [1usize, 3, 8, 15] {
            let b = mie_block(eps, Complex64::ONE, omega, radius, l).unwrap();
            let s = all[l - 1][0].to_complex();
            assert!((s - b.t_e).norm() / b.t_e.norm().max(1e-300) < 1e-9);
        }
        // log|t| decreases steadily at high order.
        assert!(all[39][0].log_abs() < all[20][0].log_abs());
        assert!(all[39][0].log_abs() < -40.0);
    }

    #[test]
    fn cylinder_vacuum_vanishes() {
        let b = cylinder_block(Complex64::ONE, 1e14, 1e-6, 2, 0.3 * 1e14 / SPEED_OF_LIGHT)
            .unwrap();
        for row in b.t {
            for v in row {
                assert_eq!(v, Complex64::ZERO);
            }
        }
    }

    #[test]
    fn cylinder_perpendicular_incidence_decouples() {
        for n in [0, 1, 3] {
            let b = cylinder_block(c(3.0, 0.2), 1.2e14, 0.8e-6, n, 0.0).unwrap();
            assert!(b.t[0][1].norm() < 1e-14 * (1.0 + b.t[0][0].norm()));
            assert!(b.t[1][0].norm() < 1e-14 * (1.0 + b.t[1][1].norm()));
        }
    }

    #[test]
    fn cylinder_n_symmetry() {
        let omega = 1.3e14;
        let kp = 0.4 * omega / SPEED_OF_LIGHT;
        let bp = cylinder_block(c(2.5, 0.3), omega, 1.1e-6, 3, kp).unwrap();
        let bn = cylinder_block(c(2.5, 0.3), omega, 1.1e-6, -3, kp).unwrap();
        // Diagonals equal, off-diagonals flip sign.
        assert!((bp.t[0][0] - bn.t[0][0]).norm() < 1e-13 * bp.t[0][0].norm().max(1e-30));
        assert!((bp.t[1][1] - bn.t[1][1]).norm() < 1e-13 * bp.t[1][1].norm().max(1e-30));
        assert!((bp.t[0][1] + bn.t[0][1]).norm() < 1e-13 * bp.t[0][1].norm().max(1e-30));
        assert!((bp.t[1][0] + bn.t[1][0]).norm() < 1e-13 * bp.t[1][0].norm().max(1e-30));
    }

    #[test]
    fn cylinder_lossless_unitarity() {
        // S = 1 + 2t unitary to 10⁻⁹ for real ε at oblique incidence.
        let radius = 1.0e-6;
        let omega = 0.8 * SPEED_OF_LIGHT / radius;
        let kp = 0.5 * omega / SPEED_OF_LIGHT;
        for n in 0..=5 {
            let b = cylinder_block(c(3.0, 0.0), omega, radius, n, kp).unwrap();
            // S†S = 1 entrywise.
            let s = [
                [
                    Complex64::ONE + 2.0 * b.t[0][0],
                    2.0 * b.t[0][1],
                ],
                [
                    2.0 * b.t[1][0],
                    Complex64::ONE + 2.0 * b.t[1][1],
                ],
            ];
            for i in 0..2 {
                for j in 0..2 {
                    let mut dot = Complex64::ZERO;
                    for k in 0..2 {
                        dot += s[k][i].conj() * s[k][j];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (dot - expect).norm() < 1e-9,
                        "S†S deviates at n = {n}, ({i},{j}): {dot}"
                    );
                }
            }
        }
    }

    #[test]
    fn cylinder_passivity_bracket() {
        // Column bracket Re t^{PP} + Σ_{P'} |t^{P'P}|² ≤ 0 for Im ε > 0.
        let radius = 1.0e-6;
        for &eps in &[c(3.0, 0.4), c(-1.5, 0.8)] {
            for &xfrac in &[0.3, 1.2] {
                let omega = xfrac * SPEED_OF_LIGHT / radius;
                for n in 0..=4 {
                    for &kfrac in &[0.0, 0.4, 0.9] {
                        let kp = kfrac * omega / SPEED_OF_LIGHT;
                        let b = cylinder_block(eps, omega, radius, n, kp).unwrap();
                        for pin in 0..2 {
                            let bracket = b.t[pin][pin].re
                                + b.t[0][pin].norm_sqr()
                                + b.t[1][pin].norm_sqr();
                            assert!(
                                bracket <= 1e-12,
                                "cylinder passivity violated: eps={eps}, n={n}, kfrac={kfrac}, pin={pin}, bracket={bracket}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cylinder_continuity_in_parameters() {
        // Finite-difference smoothness scan in ω and k_∥.
        let radius = 1.0e-6;
        let eps = c(2.5, 0.3);
        let omega0 = 1.1e14;
        let kp0 = 0.3 * omega0 / SPEED_OF_LIGHT;
        let f = |omega: f64, kp: f64| cylinder_block(eps, omega, radius, 1, kp).unwrap().t[0][0];
        let h = 1e-6;
        let base = f(omega0, kp0);
        let d_omega = (f(omega0 * (1.0 + h), kp0) - base) / (omega0 * h);
        let d_omega2 = (f(omega0 * (1.0 + 2.0 * h), kp0) - base) / (2.0 * omega0 * h);
        assert!((d_omega - d_omega2).norm() / d_omega.norm() < 1e-3);
    }
}
