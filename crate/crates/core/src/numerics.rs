//! Adaptive quadrature and frequency-grid construction shared by the
//! radiation and transfer modules.
//!
//! The integrator is a global-adaptive bisection scheme built on the
//! 15-point Kronrod rule with the embedded 7-point Gauss rule for the
//! error estimate. Everything here is deterministic: identical inputs
//! produce bit-identical outputs.

use thiserror::Error;

pub mod linalg;

/// 15-point Kronrod abscissae on [0, 1] side of the symmetric rule.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// 7-point Gauss weights (paired with the odd Kronrod abscissae).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod weights.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error(
        "subinterval cap exceeded after {evaluations} evaluations; worst subinterval \
         [{a:.6e}, {b:.6e}] with error estimate {error:.3e}"
    )]
    CapExceeded {
        a: f64,
        b: f64,
        error: f64,
        evaluations: usize,
    },
    #[error("invalid bounds: a = {0} must be < b = {1}")]
    InvalidBounds(f64, f64),
    #[error("integrand returned a non-finite value at x = {0:.6e}")]
    NonFinite(f64),
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub subintervals: usize,
}

/// One node of a [`SpectralCurve`]: a subinterval of the adaptive grid,
/// reported at its midpoint with the local mean density, the subinterval
/// width as quadrature weight and the local error estimate.
#[derive(Debug, Clone, Copy)]
pub struct SpectralNode {
    pub omega: f64,
    pub density: f64,
    pub weight: f64,
    pub error: f64,
}

/// A spectral quantity resolved over the adaptive angular-frequency grid.
#[derive(Debug, Clone, Default)]
pub struct SpectralCurve {
    pub nodes: Vec<SpectralNode>,
}

impl SpectralCurve {
    /// Sum of density × weight over all nodes (the integral it resolves).
    pub fn total(&self) -> f64 {
        self.nodes.iter().map(|n| n.density * n.weight).sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Trailing components carried along with the refinement-driving value.
    extra: [f64; MAX_EXTRA],
}

pub const MAX_EXTRA: usize = 6;

fn gk15<F>(f: &mut F, a: f64, b: f64, n_extra: usize) -> Result<Panel, QuadratureError>
where
    F: FnMut(f64) -> [f64; MAX_EXTRA + 1],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut kronrod = [0.0; MAX_EXTRA + 1];
    let mut gauss = 0.0;
    let mut res_abs = 0.0;

    let fc = f(center);
    if !fc[0].is_finite() {
        return Err(QuadratureError::NonFinite(center));
    }
    for (acc, v) in kronrod.iter_mut().zip(fc.iter()) {
        *acc += WGK[7] * v;
    }
    gauss += WG[3] * fc[0];
    res_abs += WGK[7] * fc[0].abs();

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        if !f1[0].is_finite() {
            return Err(QuadratureError::NonFinite(center - x));
        }
        if !f2[0].is_finite() {
            return Err(QuadratureError::NonFinite(center + x));
        }
        for ((acc, v1), v2) in kronrod.iter_mut().zip(f1.iter()).zip(f2.iter()) {
            *acc += WGK[j] * (v1 + v2);
        }
        res_abs += WGK[j] * (f1[0].abs() + f2[0].abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1[0] + f2[0]);
        }
    }

    let value = kronrod[0] * half;
    let gauss_value = gauss * half;
    res_abs *= half.abs();

    // Conservative rescaling of the raw |K15 - G7| difference, following the
    // usual embedded-rule practice.
    let mut err = (value - gauss_value).abs();
    if res_abs > 0.0 && err > 0.0 {
        let scale = (200.0 * err / res_abs).powf(1.5);
        err = if scale < 1.0 { res_abs * scale } else { res_abs };
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }

    let mut extra = [0.0; MAX_EXTRA];
    for i in 0..n_extra {
        extra[i] = kronrod[i + 1] * half;
    }

    Ok(Panel {
        a,
        b,
        value,
        error: err,
        extra,
    })
}

/// Default subinterval cap for adaptive integration.
const MAX_SUBINTERVALS: usize = 2000;

/// Adaptive integration of a scalar function over [a, b] to relative
/// tolerance `tol`.
pub fn integrate_adaptive<F>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadratureResult, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    let (result, _, _) = integrate_adaptive_multi(
        |x| {
            let mut out = [0.0; MAX_EXTRA + 1];
            out[0] = f(x);
            out
        },
        0,
        a,
        b,
        tol,
        0.0,
    )?;
    Ok(result)
}

/// Adaptive integration of a vector-valued integrand.
///
/// Component 0 drives the refinement; the remaining `n_extra` components are
/// accumulated with the same rule and panels, so sums over components remain
/// consistent with the driving total. Also returns the panel list as a
/// [`SpectralCurve`] over component 0 (sorted by abscissa) and the integrals
/// of the extra components.
///
/// Termination at summed error ≤ max(tol·|value|, abs_tol); the absolute
/// floor lets integrals that are zero up to roundoff (lossless bodies)
/// terminate instead of refining noise.
pub fn integrate_adaptive_multi<F>(
    mut f: F,
    n_extra: usize,
    a: f64,
    b: f64,
    tol: f64,
    abs_tol: f64,
) -> Result<(QuadratureResult, [f64; MAX_EXTRA], SpectralCurve), QuadratureError>
where
    F: FnMut(f64) -> [f64; MAX_EXTRA + 1],
{
    if !(a < b) {
        return Err(QuadratureError::InvalidBounds(a, b));
    }
    assert!(n_extra <= MAX_EXTRA);

    let mut panels: Vec<Panel> = vec![gk15(&mut f, a, b, n_extra)?];
    let mut evaluations = 15;

    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        let target = (tol * total.abs()).max(abs_tol).max(f64::MIN_POSITIVE);
        if total_err <= target {
            break;
        }
        if panels.len() >= MAX_SUBINTERVALS {
            let worst = panels
                .iter()
                .cloned()
                .reduce(|p, q| if q.error > p.error { q } else { p })
                .expect("at least one panel");
            return Err(QuadratureError::CapExceeded {
                a: worst.a,
                b: worst.b,
                error: worst.error,
                evaluations,
            });
        }

        // Split the worst panel; ties broken by lowest index for determinism.
        let mut worst_idx = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.error > panels[worst_idx].error {
                worst_idx = i;
            }
        }
        let Panel { a: pa, b: pb, .. } = panels[worst_idx];
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Interval at floating-point resolution; cannot refine further.
            break;
        }
        let left = gk15(&mut f, pa, mid, n_extra)?;
        let right = gk15(&mut f, mid, pb, n_extra)?;
        evaluations += 30;
        panels[worst_idx] = left;
        panels.push(right);
    }

    let mut value = 0.0;
    let mut error = 0.0;
    let mut extra = [0.0; MAX_EXTRA];
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut curve = SpectralCurve {
        nodes: Vec::with_capacity(panels.len()),
    };
    for p in &panels {
        value += p.value;
        error += p.error;
        for i in 0..n_extra {
            extra[i] += p.extra[i];
        }
        let width = p.b - p.a;
        curve.nodes.push(SpectralNode {
            omega: 0.5 * (p.a + p.b),
            density: p.value / width,
            weight: width,
            error: p.error,
        });
    }

    Ok((
        QuadratureResult {
            value,
            error_estimate: error,
            evaluations,
            subintervals: panels.len(),
        },
        extra,
        curve,
    ))
}

/// Dimensionless frequency domain x = ħω/k_BT used for every thermal
/// integral. The Planck weight kills both tails: the retained window
/// [10⁻⁴, 40] carries all but < 10⁻¹² of the blackbody integral.
#[derive(Debug, Clone, Copy)]
pub struct FrequencyGrid {
    pub x_min: f64,
    pub x_max: f64,
    /// dω/dx = k_BT/ħ, the Jacobian of the mapping.
    pub omega_per_x: f64,
}

pub const X_MIN: f64 = 1.0e-4;
pub const X_MAX: f64 = 40.0;

/// Mapped ω-integration domain for temperature `t`.
pub fn frequency_grid(t: f64) -> Result<FrequencyGrid, crate::constants::ConstantsError> {
    if !(t > 0.0) {
        return Err(crate::constants::ConstantsError::NonPositiveTemperature(t));
    }
    Ok(FrequencyGrid {
        x_min: X_MIN,
        x_max: X_MAX,
        omega_per_x: crate::constants::BOLTZMANN * t / crate::constants::HBAR,
    })
}

impl FrequencyGrid {
    pub fn omega(&self, x: f64) -> f64 {
        x * self.omega_per_x
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial and memoized per order. Deterministic for a
/// given `n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let rule = gauss_legendre_uncached(n);
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn gauss_legendre_uncached(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess (Abramowitz & Stegun 25.4.30 style).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&v| v * half).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate_adaptive(|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert_relative_eq!(r.value, 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn stefan_boltzmann_kernel() {
        // ∫₀^∞ x³/(eˣ−1) dx = π⁴/15, integrated over the mapped window.
        let f = |x: f64| x.powi(3) / (x.exp() - 1.0);
        let r = integrate_adaptive(f, X_MIN, X_MAX, 1e-10).unwrap();
        let exact = std::f64::consts::PI.powi(4) / 15.0;
        assert_relative_eq!(r.value, exact, max_relative = 1e-8);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let r = integrate_adaptive(|x| 1.0 / x.sqrt(), 1e-300, 1.0, 1e-8).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn error_estimate_brackets_true_error() {
        // On analytic integrands the true error stays within 10x the estimate.
        let cases: [(fn(f64) -> f64, f64, f64, f64); 3] = [
            (|x| (4.0 * x).sin() * x.exp(), 0.0, 2.0, {
                // ∫ e^x sin(4x) dx = e^x (sin4x - 4cos4x)/17
                let fx = |x: f64| x.exp() * ((4.0 * x).sin() - 4.0 * (4.0 * x).cos()) / 17.0;
                fx(2.0) - fx(0.0)
            }),
            (|x| 1.0 / (1.0 + x * x), -4.0, 4.0, 2.0 * 4.0_f64.atan()),
            (|x| x.exp(), 0.0, 1.0, std::f64::consts::E - 1.0),
        ];
        for (f, a, b, exact) in cases {
            let r = integrate_adaptive(f, a, b, 1e-9).unwrap();
            let true_err = (r.value - exact).abs();
            assert!(
                true_err <= 10.0 * r.error_estimate.max(1e-15),
                "true error {true_err:.3e} vs estimate {:.3e}",
                r.error_estimate
            );
        }
    }

    #[test]
    fn refinement_does_not_increase_global_estimate() {
        // Tighten the tolerance on the same smooth integrand and check the
        // final summed estimate never grows.
        let f = |x: f64| (x * x).exp() * (10.0 * x).cos();
        let mut prev = f64::INFINITY;
        for tol in [1e-3, 1e-6, 1e-9] {
            let r = integrate_adaptive(f, 0.0, 1.5, tol).unwrap();
            assert!(r.error_estimate <= prev * (1.0 + 1e-12));
            prev = r.error_estimate;
        }
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(integrate_adaptive(|x| x, 1.0, 0.0, 1e-6).is_err());
    }

    #[test]
    fn determinism() {
        let run = || {
            let r = integrate_adaptive(|x| (x.sin() / (1.0 + x)).abs().sqrt(), 0.0, 20.0, 1e-9)
                .unwrap();
            r.value.to_bits()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn frequency_grid_tail_bounds() {
        // Planck weight relative to its peak at the upper cutoff.
        let weight = |x: f64| x.powi(3) / (x.exp() - 1.0);
        let peak = weight(2.821439372); // maximum of x³/(eˣ−1)
        assert!(weight(X_MAX) / peak < 1e-12);
        // Low-end truncation loses less than 1e-9 of the σT⁴ integral.
        let lost_low = X_MIN.powi(3) / 3.0; // ∫₀^xmin x² dx bound
        assert!(lost_low / (std::f64::consts::PI.powi(4) / 15.0) < 1e-9);
    }

    #[test]
    fn frequency_grid_dimensionless_collapse() {
        let g1 = frequency_grid(300.0).unwrap();
        let g2 = frequency_grid(600.0).unwrap();
        assert_eq!(g1.x_min, g2.x_min);
        assert_eq!(g1.x_max, g2.x_max);
        assert_relative_eq!(g2.omega_per_x, 2.0 * g1.omega_per_x, max_relative = 1e-15);
    }

    #[test]
    fn gauss_legendre_exactness() {
        // n-point rule integrates degree 2n-1 exactly.
        let (x, w) = gauss_legendre_on(8, 0.0, 2.0);
        let integral: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| wi * xi.powi(15))
            .sum();
        assert_relative_eq!(integral, 2.0_f64.powi(16) / 16.0, max_relative = 1e-12);
    }

    #[test]
    fn spectral_curve_matches_value() {
        let (r, _, curve) = integrate_adaptive_multi(
            |x| {
                let mut out = [0.0; MAX_EXTRA + 1];
                out[0] = x.exp();
                out
            },
            0,
            0.0,
            1.0,
            1e-10,
            0.0,
        )
        .unwrap();
        assert_relative_eq!(curve.total(), r.value, max_relative = 1e-12);
    }

    #[test]
    fn absolute_floor_terminates_on_noise() {
        // A pure-roundoff integrand converges via the absolute floor.
        let (r, _, _) = integrate_adaptive_multi(
            |x| {
                let mut out = [0.0; MAX_EXTRA + 1];
                out[0] = (x * 1e17).sin() * 1e-18;
                out
            },
            0,
            0.0,
            1.0,
            1e-10,
            1e-12,
        )
        .unwrap();
        assert!(r.value.abs() < 1e-9);
    }
}
