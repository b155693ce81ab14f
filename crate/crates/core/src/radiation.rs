//! Heat radiation of isolated bodies: plate (per area), sphere (total) and
//! cylinder (per length, polarization resolved).
//!
//! Every operation integrates the thermal weight against the body's per-mode
//! emission bracket. For the sphere the bracket is Re t + |t|² summed over
//! (l, m, P); for the cylinder it is Re t^{PP} + |t^{PP}|² + |t^{P P̄}|²
//! summed over orders and integrated over the axial wavevector, grouped by
//! the outgoing polarization (P = E is the component polarized parallel to
//! the axis, P = M perpendicular). Emitted powers are returned positive.

use std::cell::{Cell, RefCell};

use num_complex::Complex64;
use thiserror::Error;

use crate::constants::{
    stefan_boltzmann_flux, thermal_energy, SPEED_OF_LIGHT,
};
use crate::materials::{permittivity, DielectricModel, MaterialError};
use crate::numerics::{
    self, frequency_grid, integrate_adaptive_multi, QuadratureError, SpectralCurve, MAX_EXTRA,
};
use crate::scattering::{
    cylinder_blocks_batch, mie_t_scaled, PlateModel, ScatteringError,
};

#[derive(Debug, Error)]
pub enum RadiationError {
    #[error("frequency integration failed: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Constants(#[from] crate::constants::ConstantsError),
    #[error(
        "multipole sum not converged at ω = {omega:.4e} rad/s with order cap {cap} \
         (spectral weight share {weight_share:.2e})"
    )]
    TruncationFailure {
        omega: f64,
        cap: usize,
        weight_share: f64,
    },
}

/// Emission of one body, polarization resolved, with the spectrum and the
/// truncation bookkeeping.
#[derive(Debug, Clone)]
pub struct EmissionResult {
    /// W (sphere), W/m² (plate) or W/m (cylinder).
    pub power: f64,
    /// Power over the Stefan-Boltzmann reference σT⁴·A with A = 4πR²
    /// (sphere), 2πR per length (cylinder), 1 (plate).
    pub normalized: f64,
    pub pol_e: f64,
    pub pol_m: f64,
    pub spectrum: SpectralCurve,
    /// Highest multipole order used anywhere on the frequency grid.
    pub orders_used: usize,
    /// Largest relative change produced by the final order-doubling.
    pub truncation_error: f64,
}

/// Hard ceiling for multipole escalation; guards runaway growth for
/// R ≫ λ_T. Frequencies whose Planck weight share is negligible are allowed
/// to stop here without converging.
const ORDER_CAP: usize = 400;

/// The Planck weight x³/(eˣ−1) at its maximum, for weight-share estimates.
const PLANCK_PEAK: f64 = 1.421_435_401_84;

fn weight_share(x: f64) -> f64 {
    x.powi(3) / (x.exp_m1()) / PLANCK_PEAK
}

/// Hemispherical emitted power per area of a half-space at temperature `t`.
///
/// normalized is the emissivity e(T) ∈ [0, 1]; the black surface reproduces
/// σT⁴ exactly.
pub fn radiate_plate(
    plate: &PlateModel,
    t: f64,
    tol: f64,
) -> Result<EmissionResult, RadiationError> {
    let grid = frequency_grid(t)?;
    let (theta_nodes, theta_weights) = numerics::gauss_legendre_on(48, 0.0, std::f64::consts::FRAC_PI_2);

    let failure: RefCell<Option<RadiationError>> = RefCell::new(None);
    let integrand = |x: f64| -> [f64; MAX_EXTRA + 1] {
        let omega = grid.omega(x);
        let k = omega / SPEED_OF_LIGHT;
        let mut sum_e = 0.0;
        let mut sum_m = 0.0;
        for (&theta, &w) in theta_nodes.iter().zip(&theta_weights) {
            let kt = k * theta.sin();
            match plate.reflection(omega, kt) {
                Ok(f) => {
                    let proj = theta.sin() * theta.cos() * w;
                    sum_e += (1.0 - f.r_e.norm_sqr()).max(0.0) * proj;
                    sum_m += (1.0 - f.r_m.norm_sqr()).max(0.0) * proj;
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e.into());
                    return [f64::NAN; MAX_EXTRA + 1];
                }
            }
        }
        // dH/dω = Θ(ω,T)·ω²/(4π²c²)·Σ_P ∫ (1−|r|²) sinθ cosθ dθ, times dω/dx.
        let pref = thermal_energy(omega, t) * omega * omega
            / (4.0 * std::f64::consts::PI.powi(2) * SPEED_OF_LIGHT * SPEED_OF_LIGHT)
            * grid.omega_per_x;
        let mut out = [0.0; MAX_EXTRA + 1];
        out[0] = pref * (sum_e + sum_m);
        out[1] = pref * sum_e;
        out[2] = pref * sum_m;
        out
    };

    let abs_floor = 1e-10 * stefan_boltzmann_flux(t);
    let (result, extra, curve) =
        integrate_adaptive_multi(integrand, 2, grid.x_min, grid.x_max, tol, abs_floor).map_err(
            |e| {
                failure
                    .borrow_mut()
                    .take()
                    .unwrap_or(RadiationError::Quadrature(e))
            },
        )?;

    Ok(EmissionResult {
        power: result.value,
        normalized: result.value / stefan_boltzmann_flux(t),
        pol_e: extra[0],
        pol_m: extra[1],
        spectrum: curve,
        orders_used: 0,
        truncation_error: 0.0,
    })
}

/// Outcome of one adaptive mode-sum evaluation at fixed frequency.
struct ModeSum {
    sum_e: f64,
    sum_m: f64,
    orders: usize,
    rel_change: f64,
    converged: bool,
}

/// Σ_l (2l+1)(−Re t − |t|²) per polarization with order doubling.
fn sphere_mode_sum(
    eps: Complex64,
    mu: Complex64,
    omega: f64,
    radius: f64,
    tol: f64,
) -> Result<ModeSum, ScatteringError> {
    let x = omega * radius / SPEED_OF_LIGHT;
    let start = ((x.ceil() as usize) + 12).min(ORDER_CAP);

    let eval = |l_max: usize| -> Result<(f64, f64, f64), ScatteringError> {
        let t = mie_t_scaled(eps, mu, omega, radius, l_max)?;
        let mut sum_e = 0.0;
        let mut sum_m = 0.0;
        let mut gross = 0.0;
        for (i, pair) in t.iter().enumerate() {
            let weight = (2 * (i + 1) + 1) as f64;
            for (p, scaled) in pair.iter().enumerate() {
                if scaled.log_abs() < -600.0 {
                    continue;
                }
                let tv = scaled.to_complex();
                // Passivity makes the bracket non-positive; clamp roundoff.
                let bracket = (tv.re + tv.norm_sqr()).min(0.0);
                let emit = -bracket * weight;
                if p == 0 {
                    sum_e += emit;
                } else {
                    sum_m += emit;
                }
                gross += weight * (tv.re.abs() + tv.norm_sqr());
            }
        }
        Ok((sum_e, sum_m, gross))
    };

    let (mut sum_e, mut sum_m, mut _gross) = eval(start)?;
    let mut l_max = start;
    let mut rel_change = f64::INFINITY;
    loop {
        if l_max >= ORDER_CAP {
            return Ok(ModeSum {
                sum_e,
                sum_m,
                orders: l_max,
                rel_change,
                converged: rel_change <= 0.1 * tol,
            });
        }
        let next = (2 * l_max).min(ORDER_CAP);
        let (e2, m2, g2) = eval(next)?;
        let scale = (e2 + m2).abs().max(1e-10 * g2).max(f64::MIN_POSITIVE);
        rel_change = ((e2 + m2) - (sum_e + sum_m)).abs() / scale;
        sum_e = e2;
        sum_m = m2;
        _gross = g2;
        if rel_change < 0.1 * tol {
            return Ok(ModeSum {
                sum_e,
                sum_m,
                orders: next,
                rel_change,
                converged: true,
            });
        }
        l_max = next;
    }
}

/// Total emitted power of a homogeneous sphere at temperature `t`:
/// H = (2/π) ∫dω Θ(ω,T) Σ_{l,P} (2l+1)(−Re t − |t|²).
pub fn radiate_sphere(
    model: &DielectricModel,
    mu: Complex64,
    radius: f64,
    t: f64,
    tol: f64,
) -> Result<EmissionResult, RadiationError> {
    let grid = frequency_grid(t)?;
    let failure: RefCell<Option<RadiationError>> = RefCell::new(None);
    let orders_used = Cell::new(0usize);
    let trunc_err = Cell::new(0.0f64);

    let integrand = |x: f64| -> [f64; MAX_EXTRA + 1] {
        let omega = grid.omega(x);
        let eps = match permittivity(model, omega) {
            Ok(e) => e,
            Err(e) => {
                *failure.borrow_mut() = Some(e.into());
                return [f64::NAN; MAX_EXTRA + 1];
            }
        };
        let ms = match sphere_mode_sum(eps, mu, omega, radius, tol) {
            Ok(m) => m,
            Err(e) => {
                *failure.borrow_mut() = Some(e.into());
                return [f64::NAN; MAX_EXTRA + 1];
            }
        };
        if !ms.converged {
            let share = weight_share(x);
            if share > 10.0 * tol {
                *failure.borrow_mut() = Some(RadiationError::TruncationFailure {
                    omega,
                    cap: ORDER_CAP,
                    weight_share: share,
                });
                return [f64::NAN; MAX_EXTRA + 1];
            }
        }
        orders_used.set(orders_used.get().max(ms.orders));
        if ms.converged {
            trunc_err.set(trunc_err.get().max(ms.rel_change.min(1.0)));
        }
        let pref =
            (2.0 / std::f64::consts::PI) * thermal_energy(omega, t) * grid.omega_per_x;
        let mut out = [0.0; MAX_EXTRA + 1];
        out[0] = pref * (ms.sum_e + ms.sum_m);
        out[1] = pref * ms.sum_e;
        out[2] = pref * ms.sum_m;
        out
    };

    let area_ref = 4.0 * std::f64::consts::PI * radius * radius;
    let abs_floor = 1e-10 * stefan_boltzmann_flux(t) * area_ref;
    let (result, extra, curve) =
        integrate_adaptive_multi(integrand, 2, grid.x_min, grid.x_max, tol, abs_floor).map_err(
            |e| {
                failure
                    .borrow_mut()
                    .take()
                    .unwrap_or(RadiationError::Quadrature(e))
            },
        )?;

    let area = area_ref;
    Ok(EmissionResult {
        power: result.value,
        normalized: result.value / (stefan_boltzmann_flux(t) * area),
        pol_e: extra[0],
        pol_m: extra[1],
        spectrum: curve,
        orders_used: orders_used.get(),
        truncation_error: trunc_err.get(),
    })
}

/// Cylinder (n, k_∥) double sum at one frequency: polarization-resolved
/// Σ_n ∫dk_∥ of the emission bracket, with order doubling.
fn cylinder_mode_sum(
    eps: Complex64,
    omega: f64,
    radius: f64,
    tol: f64,
    phi_nodes: &[f64],
    phi_weights: &[f64],
) -> Result<ModeSum, ScatteringError> {
    let k = omega / SPEED_OF_LIGHT;
    let x = k * radius;
    let start = ((x.ceil() as usize) + 12).min(ORDER_CAP);

    // ∫_{−k}^{k} dk_∥ f = 2k ∫₀^{π/2} cosφ f(k sinφ) dφ by evenness.
    let eval = |n_max: usize| -> Result<(f64, f64, f64), ScatteringError> {
        let mut sum_e = 0.0;
        let mut sum_m = 0.0;
        let mut gross = 0.0;
        for (&phi, &w) in phi_nodes.iter().zip(phi_weights) {
            let kp = k * phi.sin();
            let blocks = cylinder_blocks_batch(eps, omega, radius, n_max, kp)?;
            let mut node_e = 0.0;
            let mut node_m = 0.0;
            let mut node_g = 0.0;
            for (n, b) in blocks.iter().enumerate() {
                let degeneracy = if n == 0 { 1.0 } else { 2.0 };
                node_e += degeneracy * (-b.emission_bracket(0)).max(0.0);
                node_m += degeneracy * (-b.emission_bracket(1)).max(0.0);
                for row in b.t {
                    for v in row {
                        node_g += degeneracy * (v.re.abs() + v.norm_sqr());
                    }
                }
            }
            let jac = 2.0 * k * phi.cos() * w;
            sum_e += node_e * jac;
            sum_m += node_m * jac;
            gross += node_g * jac;
        }
        Ok((sum_e, sum_m, gross))
    };

    let (mut sum_e, mut sum_m, mut _gross) = eval(start)?;
    let mut n_max = start;
    let mut rel_change = f64::INFINITY;
    loop {
        if n_max >= ORDER_CAP {
            return Ok(ModeSum {
                sum_e,
                sum_m,
                orders: n_max,
                rel_change,
                converged: rel_change <= 0.1 * tol,
            });
        }
        let next = (2 * n_max).min(ORDER_CAP);
        let (e2, m2, g2) = eval(next)?;
        // Lossless sums are pure roundoff; the gross magnitude keeps the
        // relative test meaningful there.
        let scale = (e2 + m2).abs().max(1e-10 * g2).max(f64::MIN_POSITIVE);
        rel_change = ((e2 + m2) - (sum_e + sum_m)).abs() / scale;
        sum_e = e2;
        sum_m = m2;
        _gross = g2;
        if rel_change < 0.1 * tol {
            return Ok(ModeSum {
                sum_e,
                sum_m,
                orders: next,
                rel_change,
                converged: true,
            });
        }
        n_max = next;
    }
}

/// Radiated power per length of an infinite cylinder at temperature `t`:
/// H/L = (1/π²) ∫dω Θ(ω,T) Σ_P Σ_n ∫_{−ω/c}^{ω/c} dk_∥ (−bracket_P).
///
/// The P = E sum is the parallel-polarized share, P = M the perpendicular
/// one.
pub fn radiate_cylinder(
    model: &DielectricModel,
    radius: f64,
    t: f64,
    tol: f64,
) -> Result<EmissionResult, RadiationError> {
    let grid = frequency_grid(t)?;
    let (phi_nodes, phi_weights) =
        numerics::gauss_legendre_on(48, 0.0, std::f64::consts::FRAC_PI_2);

    let failure: RefCell<Option<RadiationError>> = RefCell::new(None);
    let orders_used = Cell::new(0usize);
    let trunc_err = Cell::new(0.0f64);

    let integrand = |x: f64| -> [f64; MAX_EXTRA + 1] {
        let omega = grid.omega(x);
        let eps = match permittivity(model, omega) {
            Ok(e) => e,
            Err(e) => {
                *failure.borrow_mut() = Some(e.into());
                return [f64::NAN; MAX_EXTRA + 1];
            }
        };
        let ms = match cylinder_mode_sum(eps, omega, radius, tol, &phi_nodes, &phi_weights) {
            Ok(m) => m,
            Err(e) => {
                *failure.borrow_mut() = Some(e.into());
                return [f64::NAN; MAX_EXTRA + 1];
            }
        };
        if !ms.converged {
            let share = weight_share(x);
            if share > 10.0 * tol {
                *failure.borrow_mut() = Some(RadiationError::TruncationFailure {
                    omega,
                    cap: ORDER_CAP,
                    weight_share: share,
                });
                return [f64::NAN; MAX_EXTRA + 1];
            }
        }
        orders_used.set(orders_used.get().max(ms.orders));
        if ms.converged && ms.rel_change.is_finite() {
            trunc_err.set(trunc_err.get().max(ms.rel_change.min(1.0)));
        }
        let pref = thermal_energy(omega, t) / std::f64::consts::PI.powi(2) * grid.omega_per_x;
        let mut out = [0.0; MAX_EXTRA + 1];
        out[0] = pref * (ms.sum_e + ms.sum_m);
        out[1] = pref * ms.sum_e;
        out[2] = pref * ms.sum_m;
        out
    };

    let area_per_length = 2.0 * std::f64::consts::PI * radius;
    let abs_floor = 1e-10 * stefan_boltzmann_flux(t) * area_per_length;
    let (result, extra, curve) =
        integrate_adaptive_multi(integrand, 2, grid.x_min, grid.x_max, tol, abs_floor).map_err(
            |e| {
                failure
                    .borrow_mut()
                    .take()
                    .unwrap_or(RadiationError::Quadrature(e))
            },
        )?;
    Ok(EmissionResult {
        power: result.value,
        normalized: result.value / (stefan_boltzmann_flux(t) * area_per_length),
        pol_e: extra[0],
        pol_m: extra[1],
        spectrum: curve,
        orders_used: orders_used.get(),
        truncation_error: trunc_err.get(),
    })
}
