//! Normalized associated Legendre functions and the derived angular
//! functions π̄ and τ̄ entering every plane-wave/spherical-wave conversion.
//!
//! Normalization is that of the spherical harmonics: Y_lm = P̄_l^m(cosθ)e^{imφ}
//! with ∫|Y_lm|² dΩ = 1 and the Condon-Shortley phase included. The argument
//! may be complex (evanescent continuation, cosθ = k_z/k) while sinθ = k_t/k
//! stays real and positive.

use num_complex::Complex64;

/// Seed value P̄_m^m(x) = (−1)^m √((2m+1)/4π · (2m−1)!!/(2m)!!) · s^m,
/// returned as (mantissa, natural-log scale) so large m · ln s stays finite.
pub fn seed_mm(m: usize, sin_theta: f64) -> (f64, f64) {
    let mut norm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for j in 1..=m {
        norm *= ((2 * j + 1) as f64 / (2 * j) as f64).sqrt();
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    (sign * norm, m as f64 * sin_theta.ln())
}

/// Recurrence coefficients for P̄_{l}^m from P̄_{l−1}^m and P̄_{l−2}^m:
/// P̄_l = α·x·P̄_{l−1} − β·P̄_{l−2}.
pub fn recurrence_coeffs(l: usize, m: usize) -> (f64, f64) {
    let l = l as f64;
    let m = m as f64;
    let alpha = ((2.0 * l + 1.0) * (2.0 * l - 1.0) / ((l - m) * (l + m))).sqrt();
    let beta = ((2.0 * l + 1.0) * (l - 1.0 - m) * (l - 1.0 + m)
        / ((2.0 * l - 3.0) * (l - m) * (l + m)))
        .sqrt();
    (alpha, beta)
}

/// Coefficient in the θ-derivative relation
/// dP̄_l^m/dθ = (l·x·P̄_l^m − c_lm·P̄_{l−1}^m)/sinθ.
pub fn derivative_coeff(l: usize, m: usize) -> f64 {
    let l = l as f64;
    let m = m as f64;
    ((l * l - m * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0)).sqrt()
}

/// π̄_lm = m·P̄_l^m/(√(l(l+1)) sinθ) and τ̄_lm = (dP̄_l^m/dθ)/√(l(l+1)) for
/// l = m.max(1)..=l_max at complex x = cosθ with real sinθ > 0.
///
/// Plain (unscaled) evaluation; adequate while |x|^l_max stays well inside
/// f64 range. The transfer engine fuses this recurrence with its own
/// per-order rescaling for the extreme evanescent regime.
pub fn pi_tau(
    l_max: usize,
    m: usize,
    cos_theta: Complex64,
    sin_theta: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    assert!(sin_theta > 0.0, "pi_tau requires sinθ > 0");
    let l_min = m.max(1);
    let count = l_max + 1 - l_min;
    let mut pi = vec![Complex64::ZERO; count];
    let mut tau = vec![Complex64::ZERO; count];

    let (seed, log_scale) = seed_mm(m, sin_theta);
    let scale = log_scale.exp();
    let mut p_prev = Complex64::ZERO; // P̄_{l−1}
    let mut p_cur = Complex64::new(seed * scale, 0.0); // P̄_l starting at l = m

    // Walk l upward from m, filling π̄ and τ̄ for l ≥ max(m, 1).
    let mut l = m;
    if m == 0 {
        // l = 0 is never used (multipoles start at l = 1); advance once.
        let p_next = cos_theta * 3.0_f64.sqrt() * p_cur;
        p_prev = p_cur;
        p_cur = p_next;
        l = 1;
    }
    loop {
        if l >= l_min {
            let lam = (l * (l + 1)) as f64;
            let idx = l - l_min;
            pi[idx] = (m as f64) * p_cur / (lam.sqrt() * sin_theta);
            let c = derivative_coeff(l, m);
            tau[idx] =
                ((l as f64) * cos_theta * p_cur - c * p_prev) / (lam.sqrt() * sin_theta);
        }
        if l == l_max {
            break;
        }
        let next = if l == m {
            // P̄_{m+1}^m = √(2m+3)·x·P̄_m^m.
            cos_theta * ((2 * m + 3) as f64).sqrt() * p_cur
        } else {
            let (alpha, beta) = recurrence_coeffs(l + 1, m);
            alpha * cos_theta * p_cur - beta * p_prev
        };
        p_prev = p_cur;
        p_cur = next;
        l += 1;
    }
    (pi, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_closed_forms_low_order() {
        let theta = 0.7f64;
        let (x, s) = (theta.cos(), theta.sin());
        let (pi, tau) = pi_tau(2, 1, Complex64::new(x, 0.0), s);
        // P̄_1^1 = −√(3/8π) sinθ; π̄_11 = P̄_1^1/(√2 sinθ); τ̄_11 = cosθ·(−√(3/8π))/√2.
        let p11 = -(3.0 / (8.0 * std::f64::consts::PI)).sqrt() * s;
        assert_relative_eq!(pi[0].re, p11 / (2.0f64.sqrt() * s), max_relative = 1e-12);
        // dP̄_1^1/dθ = −√(3/8π) cosθ.
        let dp11 = -(3.0 / (8.0 * std::f64::consts::PI)).sqrt() * x;
        assert_relative_eq!(tau[0].re, dp11 / 2.0f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn angular_normalization_sum() {
        // ∫|X_lm|²dΩ = 1 means 2π ∫ (π̄² + τ̄²) sinθ dθ = 1 for each (l, m).
        let n = 400;
        for (l, m) in [(1usize, 0usize), (2, 1), (5, 3), (9, 0), (12, 12)] {
            let mut integral = 0.0;
            for i in 0..n {
                let theta = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
                let (pi_v, tau_v) =
                    pi_tau(l, m, Complex64::new(theta.cos(), 0.0), theta.sin());
                let idx = l - m.max(1);
                let val = pi_v[idx].norm_sqr() + tau_v[idx].norm_sqr();
                integral += val * theta.sin() * std::f64::consts::PI / n as f64;
            }
            integral *= 2.0 * std::f64::consts::PI;
            assert_relative_eq!(integral, 1.0, max_relative = 1e-4);
        }
    }

    #[test]
    fn addition_theorem_per_direction() {
        // Σ_m (|π̄|²+|τ̄|²) over m = −l..l equals (2l+1)/4π at any angle;
        // negative m duplicates |m| by symmetry of the moduli.
        let l = 6usize;
        for &theta in &[0.3f64, 1.1, 2.0] {
            let mut sum = 0.0;
            for m in 0..=l {
                let (pi_v, tau_v) =
                    pi_tau(l, m, Complex64::new(theta.cos(), 0.0), theta.sin());
                let idx = l - m.max(1);
                let v = pi_v[idx].norm_sqr() + tau_v[idx].norm_sqr();
                sum += if m == 0 { v } else { 2.0 * v };
            }
            assert_relative_eq!(
                sum,
                (2 * l + 1) as f64 / (4.0 * std::f64::consts::PI),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn evanescent_continuation_is_finite() {
        // cosθ = i·κ'/k with sinθ = k_t/k > 1.
        let kappa = 3.0;
        let sin_theta = (1.0f64 + kappa * kappa).sqrt();
        let (pi_v, tau_v) = pi_tau(8, 2, Complex64::new(0.0, kappa), sin_theta);
        for v in pi_v.iter().chain(tau_v.iter()) {
            assert!(v.is_finite());
        }
    }
}
