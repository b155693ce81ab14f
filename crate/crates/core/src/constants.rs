//! Physical constants, thermal spectral weights and blackbody reference
//! quantities shared by every other module.
//!
//! SI units throughout; angular frequency ω in rad/s is the sole spectral
//! variable. CODATA values are fixed at build time and never configurable.

use thiserror::Error;

/// Speed of light in vacuum (m/s). Exact by SI definition.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reduced Planck constant ħ (J·s). CODATA 2018, exact h / 2π.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant k_B (J/K). Exact by 2019 SI definition.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Stefan-Boltzmann constant σ = π²k_B⁴/(60 ħ³ c²) in W·m⁻²·K⁻⁴.
pub fn stefan_boltzmann_constant() -> f64 {
    let pi = std::f64::consts::PI;
    pi * pi * BOLTZMANN.powi(4) / (60.0 * HBAR.powi(3) * SPEED_OF_LIGHT * SPEED_OF_LIGHT)
}

/// Argument ħω/k_BT above which the Bose factor underflows any representable
/// tolerance; the spectral weight is returned as exactly zero there.
const EXP_OVERFLOW_GUARD: f64 = 700.0;

#[derive(Debug, Error, PartialEq)]
pub enum ConstantsError {
    #[error("angular frequency must be positive, got {0} rad/s")]
    NonPositiveFrequency(f64),
    #[error("temperature must be positive, got {0} K")]
    NonPositiveTemperature(f64),
}

/// Thermal spectral weight a_T(ω) evaluated at one (ω, T) point.
///
/// `value` is a_T(ω) = ω⁴ħ(4π)²/c⁴ · (exp[ħω/k_BT] − 1)⁻¹ in SI units.
/// The zero-point weight a_0(ω) = ω⁴ħ(4π)²/(2c⁴) plays no role in any
/// emitted power and is provided for documentation only (`zero_point`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWeight {
    pub value: f64,
    pub omega: f64,
    pub temperature: f64,
}

/// a_T(ω): the thermal spectral weight, proportional to the Bose occupation
/// of all oscillators at frequency ω.
///
/// Returns exactly zero for T = 0 and for ħω/k_BT beyond the overflow guard.
pub fn planck_factor(omega: f64, temperature: f64) -> Result<SpectralWeight, ConstantsError> {
    if !(omega > 0.0) {
        return Err(ConstantsError::NonPositiveFrequency(omega));
    }
    if temperature < 0.0 {
        return Err(ConstantsError::NonPositiveTemperature(temperature));
    }
    let prefactor = omega.powi(4) * HBAR * (4.0 * std::f64::consts::PI).powi(2)
        / SPEED_OF_LIGHT.powi(4);
    let value = prefactor * bose_occupation(omega, temperature);
    Ok(SpectralWeight {
        value,
        omega,
        temperature,
    })
}

/// Bose occupation number 1/(exp[ħω/k_BT] − 1), zero at T = 0.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    let x = HBAR * omega / (BOLTZMANN * temperature);
    if x > EXP_OVERFLOW_GUARD {
        return 0.0;
    }
    if x < 1e-8 {
        // exp(x)-1 loses precision; two-term series is exact to f64 here.
        return 1.0 / (x * (1.0 + 0.5 * x));
    }
    1.0 / (x.exp() - 1.0)
}

/// Thermal energy per mode Θ(ω, T) = ħω/(exp[ħω/k_BT] − 1) in J.
///
/// Identical information as [`planck_factor`] with the geometric prefactor
/// stripped: a_T(ω) = 16π²ω³/c⁴ · Θ(ω, T). The identity is pinned by a test.
pub fn thermal_energy(omega: f64, temperature: f64) -> f64 {
    HBAR * omega * bose_occupation(omega, temperature)
}

/// Thermal wavelength λ_T = ħc/(k_B T) in meters (≈ 7.6 μm at 300 K).
pub fn thermal_wavelength(temperature: f64) -> Result<f64, ConstantsError> {
    if !(temperature > 0.0) {
        return Err(ConstantsError::NonPositiveTemperature(temperature));
    }
    Ok(HBAR * SPEED_OF_LIGHT / (BOLTZMANN * temperature))
}

/// Blackbody hemispherical flux σT⁴ in W/m².
pub fn stefan_boltzmann_flux(temperature: f64) -> f64 {
    stefan_boltzmann_constant() * temperature.powi(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn planck_factor_zero_at_zero_temperature() {
        let w = planck_factor(1.0e14, 0.0).unwrap();
        assert_eq!(w.value, 0.0);
    }

    #[test]
    fn planck_factor_unit_occupation() {
        // ħω = k_B T ln 2 makes exp(ħω/k_BT) = 2, occupation exactly 1,
        // so a_T = 16π²ħω⁴/c⁴.
        let t = 500.0;
        let omega = BOLTZMANN * t * std::f64::consts::LN_2 / HBAR;
        let w = planck_factor(omega, t).unwrap();
        let expected =
            16.0 * std::f64::consts::PI.powi(2) * HBAR * omega.powi(4) / SPEED_OF_LIGHT.powi(4);
        assert_relative_eq!(w.value, expected, max_relative = 1e-12);
    }

    #[test]
    fn planck_factor_rayleigh_jeans_limit() {
        // ħω ≪ k_BT: a_T → 16π²ω³k_BT/c⁴ within 1% at ħω/k_BT = 0.02.
        let t = 300.0;
        let omega = 0.02 * BOLTZMANN * t / HBAR;
        let w = planck_factor(omega, t).unwrap();
        let rj = 16.0 * std::f64::consts::PI.powi(2) * omega.powi(3) * BOLTZMANN * t
            / SPEED_OF_LIGHT.powi(4);
        assert_relative_eq!(w.value, rj, max_relative = 0.01);
    }

    #[test]
    fn planck_factor_rejects_nonpositive_frequency() {
        assert!(planck_factor(0.0, 300.0).is_err());
        assert!(planck_factor(-1.0, 300.0).is_err());
    }

    #[test]
    fn planck_factor_monotone_in_temperature() {
        let omega = 2.0e14;
        let mut prev = 0.0;
        for t in [10.0, 100.0, 300.0, 1000.0, 5000.0] {
            let v = planck_factor(omega, t).unwrap().value;
            assert!(v > prev, "a_T not increasing at T = {t}");
            prev = v;
        }
    }

    #[test]
    fn planck_factor_dimensionless_collapse() {
        // a_T·c⁴/(16π²ω⁴ħ) depends only on ħω/k_BT.
        let collapse = |omega: f64, t: f64| {
            planck_factor(omega, t).unwrap().value * SPEED_OF_LIGHT.powi(4)
                / (16.0 * std::f64::consts::PI.powi(2) * omega.powi(4) * HBAR)
        };
        let x = 2.5;
        let t1 = 300.0;
        let t2 = 1700.0;
        let w1 = x * BOLTZMANN * t1 / HBAR;
        let w2 = x * BOLTZMANN * t2 / HBAR;
        assert_relative_eq!(collapse(w1, t1), collapse(w2, t2), max_relative = 1e-12);
    }

    #[test]
    fn thermal_energy_matches_planck_factor() {
        // a_T(ω) = 16π²ω³/c⁴ · Θ(ω,T), the normalization every emission
        // formula relies on.
        let omega = 3.7e14;
        let t = 412.0;
        let a = planck_factor(omega, t).unwrap().value;
        let theta = thermal_energy(omega, t);
        let ratio = 16.0 * std::f64::consts::PI.powi(2) * omega.powi(3) / SPEED_OF_LIGHT.powi(4);
        assert_relative_eq!(a, ratio * theta, max_relative = 1e-13);
    }

    #[test]
    fn thermal_wavelength_room_temperature() {
        let lambda = thermal_wavelength(300.0).unwrap();
        assert_relative_eq!(lambda, 7.6e-6, max_relative = 0.02);
    }

    #[test]
    fn thermal_wavelength_scales_inversely() {
        let l300 = thermal_wavelength(300.0).unwrap();
        let l600 = thermal_wavelength(600.0).unwrap();
        assert_eq!(l600, l300 / 2.0);
        assert!(thermal_wavelength(f64::MAX).unwrap() < 1e-55);
    }

    #[test]
    fn stefan_boltzmann_codata_value() {
        assert_relative_eq!(
            stefan_boltzmann_constant(),
            5.670e-8,
            max_relative = 1.0e-3
        );
    }

    #[test]
    fn stefan_boltzmann_quartic() {
        assert_eq!(stefan_boltzmann_flux(0.0), 0.0);
        let f1 = stefan_boltzmann_flux(321.0);
        let f2 = stefan_boltzmann_flux(642.0);
        assert_relative_eq!(f2, 16.0 * f1, max_relative = 1e-12);
    }

    #[test]
    fn overflow_guard_returns_zero() {
        let t = 1.0;
        let omega = 701.0 * BOLTZMANN * t / HBAR;
        assert_eq!(planck_factor(omega, t).unwrap().value, 0.0);
    }
}
