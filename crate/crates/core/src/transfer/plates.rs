//! Parallel-plate radiative flux: the standard two-plate mode sum over
//! propagating (cavity-dressed transmission) and evanescent (photon
//! tunneling) channels, per polarization.

use std::cell::RefCell;

use num_complex::Complex64;

use crate::constants::{thermal_energy, SPEED_OF_LIGHT};
use crate::numerics::{
    frequency_grid, integrate_adaptive, integrate_adaptive_multi, MAX_EXTRA,
};
use crate::scattering::PlateModel;
use crate::transfer::conversion::LAMBDA_CUTOFF;
use crate::transfer::{ChannelFilter, TransferError, TransferResult};

/// Spectral kernel Σ_P ∫k_t dk_t τ_P at one frequency, split into
/// (prop_E, prop_M, evan_E, evan_M).
pub(crate) fn plate_plate_kernel(
    plate1: &PlateModel,
    plate2: &PlateModel,
    omega: f64,
    gap: f64,
    tol: f64,
    one_reflection: bool,
    filter: ChannelFilter,
) -> Result<[f64; 4], TransferError> {
    let k = omega / SPEED_OF_LIGHT;

    let tau = |k_t: f64| -> Result<(f64, f64, bool), TransferError> {
        let f1 = plate1.reflection(omega, k_t)?;
        let f2 = plate2.reflection(omega, k_t)?;
        let kz = crate::scattering::k_z_vacuum(omega, k_t);
        if k_t < k {
            let phase = (2.0 * Complex64::I * kz * gap).exp();
            let mut te = (1.0 - f1.r_e.norm_sqr()).max(0.0) * (1.0 - f2.r_e.norm_sqr()).max(0.0);
            let mut tm = (1.0 - f1.r_m.norm_sqr()).max(0.0) * (1.0 - f2.r_m.norm_sqr()).max(0.0);
            if !one_reflection {
                te /= (Complex64::ONE - f1.r_e * f2.r_e * phase).norm_sqr();
                tm /= (Complex64::ONE - f1.r_m * f2.r_m * phase).norm_sqr();
            }
            Ok((te, tm, false))
        } else {
            let kappa = kz.im;
            let decay = (-2.0 * kappa * gap).exp();
            let mut te = 4.0 * f1.r_e.im.max(0.0) * f2.r_e.im.max(0.0) * decay;
            let mut tm = 4.0 * f1.r_m.im.max(0.0) * f2.r_m.im.max(0.0) * decay;
            if !one_reflection {
                te /= (Complex64::ONE - f1.r_e * f2.r_e * decay).norm_sqr();
                tm /= (Complex64::ONE - f1.r_m * f2.r_m * decay).norm_sqr();
            }
            Ok((te, tm, true))
        }
    };

    let failure: RefCell<Option<TransferError>> = RefCell::new(None);
    let mut eval = |f: &dyn Fn(f64) -> Result<f64, TransferError>, x: f64| -> f64 {
        match f(x) {
            Ok(v) => v,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    };

    // Propagating: k_t = k sinθ kills the edge derivative at k_t = k.
    let mut out = [0.0; 4];
    if filter == ChannelFilter::All {
        for pol in 0..2 {
            let f = |theta: f64| -> Result<f64, TransferError> {
                let k_t = k * theta.sin();
                let (te, tm, _) = tau(k_t)?;
                let v = if pol == 0 { te } else { tm };
                Ok(v * k * k * theta.sin() * theta.cos())
            };
            let r = integrate_adaptive(
                |th| eval(&f, th),
                0.0,
                std::f64::consts::FRAC_PI_2,
                tol,
            )
            .map_err(|e| {
                failure
                    .borrow_mut()
                    .take()
                    .unwrap_or(TransferError::Quadrature(e))
            })?;
            out[pol] = r.value;
        }
    }

    // Evanescent: κ' from 0 to the cutoff, split linear + log tail.
    let kappa_max = {
        let kt_max = k + LAMBDA_CUTOFF / gap;
        (kt_max * kt_max - k * k).sqrt()
    };
    for pol in 0..2 {
        if filter == ChannelFilter::EvanescentE && pol == 1 {
            continue;
        }
        let f = |kappa: f64| -> Result<f64, TransferError> {
            let k_t = (k * k + kappa * kappa).sqrt();
            let (te, tm, _) = tau(k_t)?;
            let v = if pol == 0 { te } else { tm };
            Ok(v * kappa)
        };
        let split = k.min(kappa_max);
        let mut total = integrate_adaptive(|kp| eval(&f, kp), 0.0, split, tol)
            .map_err(|e| {
                failure
                    .borrow_mut()
                    .take()
                    .unwrap_or(TransferError::Quadrature(e))
            })?
            .value;
        if kappa_max > split {
            let g = |u: f64| -> Result<f64, TransferError> {
                let kappa = u.exp();
                Ok(f(kappa)? * kappa)
            };
            total += integrate_adaptive(|u| eval(&g, u), split.ln(), kappa_max.ln(), tol)
                .map_err(|e| {
                    failure
                        .borrow_mut()
                        .take()
                        .unwrap_or(TransferError::Quadrature(e))
                })?
                .value;
        }
        out[2 + pol] = total;
    }
    Ok(out)
}

/// Net radiative flux (W/m²) from plate 1 at T1 to plate 2 at T2 across a
/// vacuum gap, antisymmetric under (1↔2, T1↔T2). Equal temperatures return
/// exactly zero.
pub fn plate_plate_flux(
    plate1: &PlateModel,
    plate2: &PlateModel,
    gap: f64,
    t1: f64,
    t2: f64,
    tol: f64,
) -> Result<TransferResult, TransferError> {
    plate_plate_flux_filtered(plate1, plate2, gap, t1, t2, tol, false, ChannelFilter::All)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn plate_plate_flux_filtered(
    plate1: &PlateModel,
    plate2: &PlateModel,
    gap: f64,
    t1: f64,
    t2: f64,
    tol: f64,
    one_reflection: bool,
    filter: ChannelFilter,
) -> Result<TransferResult, TransferError> {
    if !(gap > 0.0) {
        return Err(TransferError::InvalidArgument(
            "gap must be positive".into(),
        ));
    }
    if t1 == t2 {
        return Ok(TransferResult::zero());
    }
    let t_ref = t1.max(t2);
    let grid = frequency_grid(t_ref)?;
    let failure: RefCell<Option<TransferError>> = RefCell::new(None);

    let integrand = |x: f64| -> [f64; MAX_EXTRA + 1] {
        let omega = grid.omega(x);
        let kernel =
            match plate_plate_kernel(plate1, plate2, omega, gap, tol, one_reflection, filter) {
                Ok(kv) => kv,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    return [f64::NAN; MAX_EXTRA + 1];
                }
            };
        let weight = (thermal_energy(omega, t1) - thermal_energy(omega, t2))
            / (4.0 * std::f64::consts::PI.powi(2))
            * grid.omega_per_x;
        let mut out = [0.0; MAX_EXTRA + 1];
        // total, prop, evan, pol E, pol M
        out[0] = weight * (kernel[0] + kernel[1] + kernel[2] + kernel[3]);
        out[1] = weight * (kernel[0] + kernel[1]);
        out[2] = weight * (kernel[2] + kernel[3]);
        out[3] = weight * (kernel[0] + kernel[2]);
        out[4] = weight * (kernel[1] + kernel[3]);
        out
    };

    let abs_floor = 1e-10
        * crate::constants::stefan_boltzmann_flux(t1.max(t2))
        * ((t1.powi(4) - t2.powi(4)).abs() / t_ref.powi(4)).max(1e-6);
    let (result, extra, curve) =
        integrate_adaptive_multi(integrand, 4, grid.x_min, grid.x_max, tol, abs_floor).map_err(
            |e| {
                failure
                    .borrow_mut()
                    .take()
                    .unwrap_or(TransferError::Quadrature(e))
            },
        )?;

    Ok(TransferResult {
        power: result.value,
        spectrum: curve,
        channel_prop: extra[0],
        channel_evan: extra[1],
        pol_e: extra[2],
        pol_m: extra[3],
        l_max_used: 0,
        reflections: if one_reflection {
            crate::transfer::engine::ReflectionOrder::One
        } else {
            crate::transfer::engine::ReflectionOrder::Full
        },
        truncation_error: 0.0,
        quadrature_error: result.error_estimate,
        condition_estimate: 0.0,
    })
}
