//! Complex-argument special functions underlying every T-matrix evaluation:
//! spherical and cylindrical Bessel families, their logarithmic derivatives,
//! and normalized associated Legendre functions.
//!
//! Regular families use Miller-type downward recurrence with a final
//! normalization match; irregular families go upward from closed-form or
//! asymptotic seeds. Values are exponent-scaled so that arguments with large
//! imaginary part remain representable: the stored arrays satisfy
//! `true = stored · exp(log_scale)`.

use num_complex::Complex64;
use thiserror::Error;

pub mod legendre;

#[derive(Debug, Error, PartialEq)]
pub enum SpecfunError {
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("recurrence failed to converge: {0}")]
    Convergence(String),
}

/// Bessel family values and derivatives for orders 0..=n_max at one
/// argument. `true value = values[n] · exp(log_scale)` and likewise for
/// the derivatives (one common scale per set).
#[derive(Debug, Clone)]
pub struct BesselSet {
    pub n_max: usize,
    pub argument: Complex64,
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
    pub log_scale: f64,
}

impl BesselSet {
    /// Unscaled value; may overflow to ±inf for extreme arguments.
    pub fn value(&self, n: usize) -> Complex64 {
        self.values[n] * self.log_scale.exp()
    }

    pub fn derivative(&self, n: usize) -> Complex64 {
        self.derivatives[n] * self.log_scale.exp()
    }
}

/// sin(z)·e^{−|Im z|}, stable for any |Im z|.
fn scaled_sin(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let ay = y.abs();
    let cosh_s = 0.5 * (1.0 + (-2.0 * ay).exp());
    let sinh_s = 0.5 * y.signum() * (1.0 - (-2.0 * ay).exp());
    Complex64::new(x.sin() * cosh_s, x.cos() * sinh_s)
}

/// cos(z)·e^{−|Im z|}, stable for any |Im z|.
fn scaled_cos(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let ay = y.abs();
    let cosh_s = 0.5 * (1.0 + (-2.0 * ay).exp());
    let sinh_s = 0.5 * y.signum() * (1.0 - (-2.0 * ay).exp());
    Complex64::new(x.cos() * cosh_s, -x.sin() * sinh_s)
}

/// Spherical Bessel functions j_l (regular) and h_l⁽¹⁾ (outgoing) with
/// derivatives, orders 0..=n_max.
///
/// The j-set carries `log_scale = |Im z|`, the h-set `log_scale = −Im z`,
/// keeping both representable for arguments far from the real axis.
pub fn spherical_bessel_jh(
    n_max: usize,
    z: Complex64,
) -> Result<(BesselSet, BesselSet), SpecfunError> {
    if z == Complex64::ZERO {
        return Err(SpecfunError::ZeroArgument);
    }
    let sigma_j = z.im.abs();
    let sigma_h = -z.im;

    // Scaled seeds: j̃_0 = sin(z)e^{−σ}/z, j̃_1 = j̃_0/z − cos(z)e^{−σ}/z.
    let s0 = scaled_sin(z) / z;
    let c0 = scaled_cos(z) / z;
    let j_scaled = if z.norm() > 1.5 * n_max as f64 + 40.0 {
        // All orders sit in the oscillatory regime; upward from exact seeds.
        let mut j = vec![Complex64::ZERO; n_max + 1];
        j[0] = s0;
        if n_max >= 1 {
            j[1] = s0 / z - c0;
            for l in 1..n_max {
                j[l + 1] = (2 * l + 1) as f64 / z * j[l] - j[l - 1];
            }
        }
        j
    } else {
        miller_downward_spherical(n_max, z, s0, s0 / z - c0)?
    };

    let mut dj = vec![Complex64::ZERO; n_max + 1];
    dj[0] = if n_max >= 1 {
        -j_scaled[1]
    } else {
        // j_0' = cos z/z − sin z/z², scaled.
        c0 - s0 / z
    };
    for l in 1..=n_max {
        dj[l] = j_scaled[l - 1] - (l + 1) as f64 / z * j_scaled[l];
    }

    // h̃_0 = −i e^{ix}/z exactly (the e^{iz} e^{Im z} factor collapses).
    let phase = Complex64::new(0.0, z.re).exp();
    let mut h = vec![Complex64::ZERO; n_max + 1];
    h[0] = -Complex64::I * phase / z;
    if n_max >= 1 {
        h[1] = -phase * (z + Complex64::I) / (z * z);
        for l in 1..n_max {
            h[l + 1] = (2 * l + 1) as f64 / z * h[l] - h[l - 1];
        }
    }
    let mut dh = vec![Complex64::ZERO; n_max + 1];
    // h_0' = −h_1 whether or not h_1 is retained.
    dh[0] = if n_max >= 1 {
        -h[1]
    } else {
        phase * (z + Complex64::I) / (z * z)
    };
    for l in 1..=n_max {
        dh[l] = h[l - 1] - (l + 1) as f64 / z * h[l];
    }

    Ok((
        BesselSet {
            n_max,
            argument: z,
            values: j_scaled,
            derivatives: dj,
            log_scale: sigma_j,
        },
        BesselSet {
            n_max,
            argument: z,
            values: h,
            derivatives: dh,
            log_scale: sigma_h,
        },
    ))
}

/// Downward Miller recurrence for scaled spherical j, normalized against
/// whichever of j̃_0, j̃_1 is larger. The starting-order margin doubles on a
/// failed self-consistency check.
fn miller_downward_spherical(
    n_max: usize,
    z: Complex64,
    seed0: Complex64,
    seed1: Complex64,
) -> Result<Vec<Complex64>, SpecfunError> {
    let base = (n_max as f64).max(1.1 * z.norm()).ceil() as usize;
    let mut margin = 10 + (2.0 * z.norm().sqrt()).ceil() as usize;

    let run = |start: usize| -> Vec<Complex64> {
        let mut f2 = Complex64::ZERO;
        let mut f1 = Complex64::new(1e-280, 0.0);
        let mut out = vec![Complex64::ZERO; n_max + 1];
        for l in (0..=start).rev() {
            let f0 = (2 * l + 3) as f64 / z * f1 - f2;
            if l <= n_max {
                out[l] = f0;
            }
            f2 = f1;
            f1 = f0;
            // Rescale well below the range where norm_sqr-based complex
            // division overflows; relative structure is all that matters.
            let m = f1.norm();
            if m > 1e100 {
                let inv = 1e-100;
                f1 *= inv;
                f2 *= inv;
                for v in out.iter_mut() {
                    *v *= inv;
                }
            }
        }
        out
    };

    for _attempt in 0..6 {
        let raw = run(base + margin);
        let norm = if seed0.norm() >= seed1.norm() || n_max == 0 {
            seed0 / raw[0]
        } else {
            seed1 / raw[1]
        };
        let result: Vec<Complex64> = raw.iter().map(|&v| v * norm).collect();

        // Self-consistency: an independent run with a larger margin must agree.
        let raw_check = run(base + margin + 12);
        let norm_check = if seed0.norm() >= seed1.norm() || n_max == 0 {
            seed0 / raw_check[0]
        } else {
            seed1 / raw_check[1]
        };
        let check = raw_check[n_max] * norm_check;
        let reference = result[n_max];
        let denom = reference.norm().max(1e-290);
        if (check - reference).norm() / denom < 1e-12 || reference.norm() < 1e-280 {
            return Ok(result);
        }
        margin *= 2;
    }
    Err(SpecfunError::Convergence(format!(
        "spherical Miller recurrence did not stabilize at z = {z}"
    )))
}

/// Cylindrical Bessel functions J_n and H_n⁽¹⁾ with derivatives,
/// orders 0..=n_max, exponent-scaled like the spherical family.
pub fn cylindrical_bessel_jh(
    n_max: usize,
    z: Complex64,
) -> Result<(BesselSet, BesselSet), SpecfunError> {
    if z == Complex64::ZERO {
        return Err(SpecfunError::ZeroArgument);
    }
    let sigma_j = z.im.abs();
    let sigma_h = -z.im;

    // Scaled seeds for J_0, J_1 and H_0, H_1.
    let (j0, j1, h0, h1) = cylinder_seeds(z);

    let j_scaled = if z.norm() > 1.5 * n_max as f64 + 40.0 {
        let mut j = vec![Complex64::ZERO; n_max + 1];
        j[0] = j0;
        if n_max >= 1 {
            j[1] = j1;
            for n in 1..n_max {
                j[n + 1] = 2.0 * n as f64 / z * j[n] - j[n - 1];
            }
        }
        j
    } else {
        miller_downward_cylindrical(n_max, z, j0, j1)?
    };

    let mut dj = vec![Complex64::ZERO; n_max + 1];
    dj[0] = if n_max >= 1 { -j_scaled[1] } else { -j1 };
    for n in 1..=n_max {
        dj[n] = j_scaled[n - 1] - n as f64 / z * j_scaled[n];
    }

    let mut h = vec![Complex64::ZERO; n_max + 1];
    h[0] = h0;
    if n_max >= 1 {
        h[1] = h1;
        for n in 1..n_max {
            h[n + 1] = 2.0 * n as f64 / z * h[n] - h[n - 1];
        }
    }
    let mut dh = vec![Complex64::ZERO; n_max + 1];
    dh[0] = if n_max >= 1 { -h[1] } else { -h1 };
    for n in 1..=n_max {
        dh[n] = h[n - 1] - n as f64 / z * h[n];
    }

    Ok((
        BesselSet {
            n_max,
            argument: z,
            values: j_scaled,
            derivatives: dj,
            log_scale: sigma_j,
        },
        BesselSet {
            n_max,
            argument: z,
            values: h,
            derivatives: dh,
            log_scale: sigma_h,
        },
    ))
}

/// Scaled seeds (J̃_0, J̃_1, H̃_0, H̃_1): power series + Neumann log-series
/// for moderate |z| near the real axis, the integral representation of H⁽¹⁾
/// when Im z is large enough to make J + iY cancellation-limited, and
/// Hankel asymptotics beyond |z| = 14.
fn cylinder_seeds(z: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let sigma = z.im.abs();
    if z.norm() <= 14.0 {
        let j0 = bessel_j_series(0, z);
        let j1 = bessel_j_series(1, z);
        let esj = (-sigma).exp();
        let (h0, h1) = if z.im > 3.0 {
            hankel1_seeds_integral(z)
        } else {
            let y0 = bessel_y_series(0, z, j0);
            let y1 = bessel_y_series(1, z, j1);
            let esh = z.im.exp(); // e^{−σ_h} with σ_h = −Im z
            (
                (j0 + Complex64::I * y0) * esh,
                (j1 + Complex64::I * y1) * esh,
            )
        };
        (j0 * esj, j1 * esj, h0, h1)
    } else {
        // H̃⁽¹⁾_n = √(2/πz) e^{i(x − nπ/2 − π/4)} S⁺_n(z); the e^{iz}e^{Im z}
        // factor reduces to e^{ix}.
        let pref = (2.0 / (std::f64::consts::PI * z)).sqrt();
        let hankel = |n: usize, sign: f64| -> Complex64 {
            let series = hankel_asymptotic_series(n, z, sign);
            let phase_arg = z.re - (n as f64) * std::f64::consts::FRAC_PI_2
                - std::f64::consts::FRAC_PI_4;
            let damp = if sign > 0.0 {
                1.0
            } else {
                // H⁽²⁾ scaled by e^{−σ_h}: e^{−iz}·e^{Im z} = e^{−ix}e^{2 Im z}
                (2.0 * z.im).exp()
            };
            pref * Complex64::new(0.0, sign * phase_arg).exp() * series * damp
        };
        let h1_0 = hankel(0, 1.0);
        let h1_1 = hankel(1, 1.0);
        // J̃_n = (H̃⁽¹⁾_n e^{−(σ_j+σ_h)} + H⁽²⁾_n e^{−σ_j}) / 2.
        let h2_0 = hankel2_scaled_j(0, z, pref);
        let h2_1 = hankel2_scaled_j(1, z, pref);
        let cross = (-(sigma + z.im)).exp(); // e^{−σ_j}·e^{+σ_h reverse}
        let j0 = 0.5 * (h1_0 * cross + h2_0);
        let j1 = 0.5 * (h1_1 * cross + h2_1);
        (j0, j1, h1_0, h1_1)
    }
}

/// Scaled (H̃_0, H̃_1) from H⁽¹⁾_0(z) = (2/iπ)∫₀^∞ e^{iz cosh t} dt and
/// H⁽¹⁾_1 = −dH⁽¹⁾_0/dz, valid for Im z > 0. The stored values carry the
/// e^{Im z} scale, so the integrand is bounded by one and decays like
/// e^{−Im z (cosh t − 1)}.
fn hankel1_seeds_integral(z: Complex64) -> (Complex64, Complex64) {
    let y = z.im;
    debug_assert!(y > 0.0);
    // Range: Im z · (cosh t − 1) = 45 bounds the discarded tail below 1e-19.
    let cosh_max = 1.0 + 45.0 / y;
    let t_max = (cosh_max + (cosh_max * cosh_max - 1.0).sqrt()).ln();
    // Oscillation scale Re z · sinh t sets the step; keep ≥ 20 points per
    // period and a floor for the smooth envelope.
    let freq = z.re.abs() * t_max.sinh() + 1.0;
    let n = ((freq * t_max * 20.0 / std::f64::consts::TAU).ceil() as usize).clamp(600, 40000);
    let h = t_max / n as f64;
    // Trapezoid; endpoint t_max contributes ~1e-19, endpoint 0 has weight ½.
    let mut sum0 = Complex64::new(0.5, 0.0); // t = 0: e^{i z·1}·e^{σ} = e^{i x}, folded below
    let mut sum1 = Complex64::new(0.5, 0.0);
    for k in 1..=n {
        let t = k as f64 * h;
        let ch = t.cosh();
        // e^{iz cosh t}·e^{−iz} = e^{i Re z (cosh t − 1)}·e^{−Im z (cosh t −1)}
        let w = (Complex64::new(0.0, z.re) * (ch - 1.0)).exp() * (-(y) * (ch - 1.0)).exp();
        sum0 += w;
        sum1 += w * ch;
    }
    let phase = Complex64::new(0.0, z.re).exp(); // e^{iz}e^{Im z}
    let i0 = sum0 * h * phase;
    let i1 = sum1 * h * phase;
    let h0 = 2.0 / (Complex64::I * std::f64::consts::PI) * i0;
    let h1 = -(2.0 / std::f64::consts::PI) * i1;
    (h0, h1)
}

/// H⁽²⁾_n(z)·e^{−|Im z|}: dominant piece of J for Im z > 0.
fn hankel2_scaled_j(n: usize, z: Complex64, pref: Complex64) -> Complex64 {
    let series = hankel_asymptotic_series(n, z, -1.0);
    let phase_arg =
        z.re - (n as f64) * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4;
    // e^{−iz}e^{−|Im z|} = e^{−ix} e^{Im z − |Im z|}
    let damp = (z.im - z.im.abs()).exp();
    pref * Complex64::new(0.0, -phase_arg).exp() * series * damp
}

/// Σ_k (±i)^k a_k(n)/z^k with a_k(n) = Π_{j=1..k}(4n²−(2j−1)²)/(k!8^k).
fn hankel_asymptotic_series(n: usize, z: Complex64, sign: f64) -> Complex64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut term = Complex64::ONE;
    let mut sum = term;
    for k in 1..=24 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= Complex64::new(0.0, sign) * (mu - odd * odd) / (8.0 * kf * z);
        let new = sum + term;
        if term.norm() < 1e-16 * sum.norm() {
            sum = new;
            break;
        }
        sum = new;
    }
    sum
}

/// Power series for J_n(z), adequate to |z| ≈ 14 well within f64.
fn bessel_j_series(n: usize, z: Complex64) -> Complex64 {
    let half = 0.5 * z;
    let half_sq = half * half;
    let mut prefix = Complex64::ONE;
    for _ in 0..n {
        prefix *= half;
    }
    let mut k_fact = 1.0;
    let mut nk_fact: f64 = (1..=n).map(|v| v as f64).product::<f64>().max(1.0);
    let mut term = Complex64::new(1.0 / nk_fact, 0.0);
    let mut sum = term;
    for k in 1..=60 {
        let kf = k as f64;
        k_fact *= kf;
        nk_fact *= n as f64 + kf;
        term = (-half_sq).powu(k as u32) / (k_fact * nk_fact);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    prefix * sum
}

/// Neumann function Y_n(z) for n ∈ {0, 1} via the logarithmic series.
fn bessel_y_series(n: usize, z: Complex64, jn: Complex64) -> Complex64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let pi = std::f64::consts::PI;
    let half = 0.5 * z;
    let half_sq = half * half;
    let log_term = (2.0 / pi) * (half.ln() + EULER_GAMMA) * jn;

    let digamma_tail = |m: usize| -> f64 { (1..m).map(|j| 1.0 / j as f64).sum() };

    // −(1/π) Σ_k (−1)^k [ψ̃(k+1)+ψ̃(n+k+1)] (z/2)^{2k+n}/(k!(n+k)!) with the
    // −γ parts already absorbed into log_term.
    let mut prefix = Complex64::ONE;
    for _ in 0..n {
        prefix *= half;
    }
    let mut sum = Complex64::ZERO;
    let mut k_fact = 1.0;
    let mut nk_fact = 1.0;
    let mut pow = Complex64::ONE;
    for k in 0..=60 {
        let kf = k as f64;
        if k > 0 {
            k_fact *= kf;
            nk_fact *= n as f64 + kf;
            pow *= -half_sq;
        }
        let psi_sum = digamma_tail(k + 1) + digamma_tail(n + k + 1);
        let term = pow * (psi_sum / (k_fact * nk_fact));
        sum += term;
        if k > 2 && term.norm() < 1e-17 * sum.norm().max(1e-30) {
            break;
        }
    }
    let series_part = -(1.0 / pi) * prefix * sum;

    // Finite sum (z/2)^{-n} Σ_{k<n} (n−k−1)!/k! (z²/4)^k, only for n ≥ 1.
    let finite_part = if n == 0 {
        Complex64::ZERO
    } else {
        (1.0 / pi) * (1.0 / half)
    };

    log_term + series_part - finite_part
}

fn miller_downward_cylindrical(
    n_max: usize,
    z: Complex64,
    seed0: Complex64,
    seed1: Complex64,
) -> Result<Vec<Complex64>, SpecfunError> {
    let base = (n_max as f64).max(1.1 * z.norm()).ceil() as usize;
    let mut margin = 10 + (2.0 * z.norm().sqrt()).ceil() as usize;

    let run = |start: usize| -> Vec<Complex64> {
        let mut f2 = Complex64::ZERO;
        let mut f1 = Complex64::new(1e-280, 0.0);
        let mut out = vec![Complex64::ZERO; n_max + 1];
        for n in (0..=start).rev() {
            let f0 = 2.0 * (n + 1) as f64 / z * f1 - f2;
            if n <= n_max {
                out[n] = f0;
            }
            f2 = f1;
            f1 = f0;
            if f1.norm() > 1e100 {
                let inv = 1e-100;
                f1 *= inv;
                f2 *= inv;
                for v in out.iter_mut() {
                    *v *= inv;
                }
            }
        }
        out
    };

    for _attempt in 0..6 {
        let raw = run(base + margin);
        let norm = if seed0.norm() >= seed1.norm() || n_max == 0 {
            seed0 / raw[0]
        } else {
            seed1 / raw[1]
        };
        let result: Vec<Complex64> = raw.iter().map(|&v| v * norm).collect();

        let raw_check = run(base + margin + 12);
        let norm_check = if seed0.norm() >= seed1.norm() || n_max == 0 {
            seed0 / raw_check[0]
        } else {
            seed1 / raw_check[1]
        };
        let check = raw_check[n_max] * norm_check;
        let reference = result[n_max];
        let denom = reference.norm().max(1e-290);
        if (check - reference).norm() / denom < 1e-12 || reference.norm() < 1e-280 {
            return Ok(result);
        }
        margin *= 2;
    }
    Err(SpecfunError::Convergence(format!(
        "cylindrical Miller recurrence did not stabilize at z = {z}"
    )))
}

/// Riccati log-derivatives D_l = ψ_l'(z)/ψ_l(z) with ψ_l(z) = z·j_l(z), for
/// l = 0..=n_max; the standard overflow-free route into Mie coefficients.
///
/// Continued fraction (modified Lentz) for the top ratio, downward recurrence
/// below.
pub fn riccati_psi_log_derivative(
    n_max: usize,
    z: Complex64,
) -> Result<Vec<Complex64>, SpecfunError> {
    if z == Complex64::ZERO {
        return Err(SpecfunError::ZeroArgument);
    }
    // r_l = j_{l+1}/j_l from the CF r_l = 1/((2l+3)/z − r_{l+1}).
    let mut ratios = vec![Complex64::ZERO; n_max + 1];
    ratios[n_max] = spherical_ratio_cf(n_max, z)?;
    for l in (0..n_max).rev() {
        let denom = (2 * l + 3) as f64 / z - ratios[l + 1];
        ratios[l] = denom.finv();
    }
    Ok((0..=n_max)
        .map(|l| (l + 1) as f64 / z - ratios[l])
        .collect())
}

/// j_{l+1}(z)/j_l(z) by modified Lentz continued fraction.
fn spherical_ratio_cf(l: usize, z: Complex64) -> Result<Complex64, SpecfunError> {
    let tiny = Complex64::new(1e-150, 0.0);
    let mut f = tiny;
    let mut c = f;
    let mut d = Complex64::ZERO;
    for k in 0..20000 {
        // CF: r_l = cf with partial denominators b_k = (2(l+k)+3)/z and
        // partial numerators a_1 = 1, a_k = −1 (k ≥ 2).
        let b = (2 * (l + k) + 3) as f64 / z;
        let a = if k == 0 {
            Complex64::ONE
        } else {
            -Complex64::ONE
        };
        d = b + a * d;
        if d == Complex64::ZERO {
            d = tiny;
        }
        c = b + a / c;
        if c == Complex64::ZERO {
            c = tiny;
        }
        d = d.finv();
        let delta = c * d;
        f *= delta;
        if (delta - Complex64::ONE).norm() < 1e-15 {
            return Ok(f);
        }
    }
    Err(SpecfunError::Convergence(format!(
        "spherical continued fraction at l = {l}, z = {z}"
    )))
}

/// Log-derivatives J_n'(z)/J_n(z) for n = 0..=n_max.
pub fn cyl_j_log_derivative(n_max: usize, z: Complex64) -> Result<Vec<Complex64>, SpecfunError> {
    if z == Complex64::ZERO {
        return Err(SpecfunError::ZeroArgument);
    }
    let mut ratios = vec![Complex64::ZERO; n_max + 1];
    ratios[n_max] = cylindrical_ratio_cf(n_max, z)?;
    for n in (0..n_max).rev() {
        let denom = 2.0 * (n + 1) as f64 / z - ratios[n + 1];
        ratios[n] = denom.finv();
    }
    Ok((0..=n_max)
        .map(|n| n as f64 / z - ratios[n])
        .collect())
}

/// J_{n+1}(z)/J_n(z) by modified Lentz continued fraction.
fn cylindrical_ratio_cf(n: usize, z: Complex64) -> Result<Complex64, SpecfunError> {
    let tiny = Complex64::new(1e-150, 0.0);
    let mut f = tiny;
    let mut c = f;
    let mut d = Complex64::ZERO;
    for k in 0..20000 {
        let b = 2.0 * (n + k + 1) as f64 / z;
        let a = if k == 0 {
            Complex64::ONE
        } else {
            -Complex64::ONE
        };
        d = b + a * d;
        if d == Complex64::ZERO {
            d = tiny;
        }
        c = b + a / c;
        if c == Complex64::ZERO {
            c = tiny;
        }
        d = d.finv();
        let delta = c * d;
        f *= delta;
        if (delta - Complex64::ONE).norm() < 1e-15 {
            return Ok(f);
        }
    }
    Err(SpecfunError::Convergence(format!(
        "cylindrical continued fraction at n = {n}, z = {z}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn j0_closed_form_at_one() {
        let (j, _) = spherical_bessel_jh(3, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(j.value(0).re, 1.0_f64.sin(), max_relative = 1e-13);
        assert_relative_eq!(j.value(0).im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn h0_closed_form_at_one() {
        // h_0⁽¹⁾(1) = −i e^{i} = sin 1 − i cos 1.
        let (_, h) = spherical_bessel_jh(2, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(h.value(0).re, 1.0_f64.sin(), max_relative = 1e-13);
        assert_relative_eq!(h.value(0).im, -(1.0_f64.cos()), max_relative = 1e-13);
    }

    #[test]
    fn spherical_wronskian_at_real_argument() {
        // j_l h_l' − j_l' h_l = i/z² at every order.
        let z = c(2.7, 0.0);
        let n_max = 12;
        let (j, h) = spherical_bessel_jh(n_max, z).unwrap();
        let expect = Complex64::I / (z * z);
        for l in 0..=n_max {
            let w = (j.values[l] * h.derivatives[l] - j.derivatives[l] * h.values[l])
                * (j.log_scale + h.log_scale).exp();
            assert!(
                (w - expect).norm() / expect.norm() < 1e-10,
                "Wronskian off at l = {l}: {w}"
            );
        }
    }

    #[test]
    fn spherical_wronskian_complex_grid() {
        // |z| from 10⁻³ to 10³, arg in [0, π/2]; scaled product cancels the
        // two exponent factors exactly when Im z ≥ 0.
        let n_max = 20;
        for &mag in &[1e-3, 0.1, 1.0, 7.3, 55.0, 400.0, 1e3] {
            for &arg in &[0.0, 0.3, std::f64::consts::FRAC_PI_4, 1.2, std::f64::consts::FRAC_PI_2]
            {
                let z = Complex64::from_polar(mag, arg);
                let (j, h) = spherical_bessel_jh(n_max, z).unwrap();
                let expect = Complex64::I / (z * z);
                let rescale = (j.log_scale + h.log_scale).exp();
                for l in 0..=n_max {
                    let w = (j.values[l] * h.derivatives[l] - j.derivatives[l] * h.values[l])
                        * rescale;
                    assert!(
                        (w - expect).norm() / expect.norm() < 1e-8,
                        "spherical Wronskian failed at |z|={mag}, arg={arg}, l={l}: {w} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn spherical_recurrence_residual() {
        let z = c(3.3, 0.9);
        let n_max = 15;
        let (j, _) = spherical_bessel_jh(n_max, z).unwrap();
        for l in 1..n_max {
            let lhs = j.values[l - 1] + j.values[l + 1];
            let rhs = (2 * l + 1) as f64 / z * j.values[l];
            assert!(
                (lhs - rhs).norm() / rhs.norm().max(1e-280) < 1e-9,
                "three-term residual too large at l = {l}"
            );
        }
    }

    #[test]
    fn spherical_conjugation_symmetry() {
        let z = c(2.2, 1.4);
        let (j, _) = spherical_bessel_jh(8, z).unwrap();
        let (jc, _) = spherical_bessel_jh(8, z.conj()).unwrap();
        for l in 0..=8 {
            let a = j.values[l];
            let b = jc.values[l].conj();
            assert!((a - b).norm() / a.norm().max(1e-30) < 1e-11);
        }
    }

    #[test]
    fn cylindrical_j0_near_zero() {
        let (j, _) = cylindrical_bessel_jh(2, c(1e-8, 0.0)).unwrap();
        assert!((j.value(0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cylindrical_j1_reference_value() {
        // Frozen from the power-series oracle below.
        let (j, _) = cylindrical_bessel_jh(3, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(j.value(1).re, 0.440_050_585_744_933_5, max_relative = 1e-12);
    }

    /// Independent oracle: raw power series summed to machine precision.
    fn j_series_oracle(n: usize, x: f64) -> f64 {
        let mut sum = 0.0;
        let mut k_fact = 1.0;
        let mut nk_fact: f64 = (1..=n).map(|v| v as f64).product::<f64>().max(1.0);
        for k in 0..80 {
            if k > 0 {
                k_fact *= k as f64;
                nk_fact *= (n + k) as f64;
            }
            let term = (-1.0f64).powi(k as i32) * (x / 2.0).powi((2 * k + n) as i32)
                / (k_fact * nk_fact);
            sum += term;
        }
        sum
    }

    #[test]
    fn cylindrical_matches_series_oracle() {
        for &x in &[0.3, 1.0, 2.7, 6.4] {
            let (j, _) = cylindrical_bessel_jh(6, c(x, 0.0)).unwrap();
            for n in 0..=6 {
                assert_relative_eq!(
                    j.value(n).re,
                    j_series_oracle(n, x),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn cylindrical_wronskian_grid() {
        // J_n H_n' − J_n' H_n = 2i/(πz).
        let n_max = 16;
        for &mag in &[1e-3, 0.3, 3.1, 12.0, 80.0, 1e3] {
            for &arg in &[0.0, 0.5, 1.0, std::f64::consts::FRAC_PI_2] {
                let z = Complex64::from_polar(mag, arg);
                let (j, h) = cylindrical_bessel_jh(n_max, z).unwrap();
                let expect = 2.0 * Complex64::I / (std::f64::consts::PI * z);
                let rescale = (j.log_scale + h.log_scale).exp();
                for n in 0..=n_max {
                    let w = (j.values[n] * h.derivatives[n] - j.derivatives[n] * h.values[n])
                        * rescale;
                    assert!(
                        (w - expect).norm() / expect.norm() < 1e-8,
                        "cylindrical Wronskian failed at |z|={mag}, arg={arg}, n={n}: {w} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn riccati_log_derivative_matches_direct() {
        // D_l = ψ'_l/ψ_l against direct scaled evaluation.
        for &z in &[c(1.7, 0.0), c(4.2, 2.1), c(0.3, 0.1), c(30.0, 12.0)] {
            let n_max = 10;
            let d = riccati_psi_log_derivative(n_max, z).unwrap();
            let (j, _) = spherical_bessel_jh(n_max, z).unwrap();
            for l in 0..=n_max {
                // ψ = z j, ψ' = j + z j'; the common scale cancels in the ratio.
                let psi = z * j.values[l];
                let dpsi = j.values[l] + z * j.derivatives[l];
                let expect = dpsi / psi;
                assert!(
                    (d[l] - expect).norm() / expect.norm() < 1e-9,
                    "D mismatch at l={l}, z={z}: {} vs {expect}",
                    d[l]
                );
            }
        }
    }

    #[test]
    fn cyl_log_derivative_matches_direct() {
        for &z in &[c(2.4, 0.0), c(5.5, 3.0), c(0.7, 0.2)] {
            let n_max = 8;
            let d = cyl_j_log_derivative(n_max, z).unwrap();
            let (j, _) = cylindrical_bessel_jh(n_max, z).unwrap();
            for n in 0..=n_max {
                let expect = j.derivatives[n] / j.values[n];
                assert!(
                    (d[n] - expect).norm() / expect.norm().max(1e-10) < 1e-9,
                    "cyl D mismatch at n={n}, z={z}"
                );
            }
        }
    }

    #[test]
    fn zero_argument_rejected() {
        assert_eq!(
            spherical_bessel_jh(2, Complex64::ZERO).unwrap_err(),
            SpecfunError::ZeroArgument
        );
        assert_eq!(
            cylindrical_bessel_jh(2, Complex64::ZERO).unwrap_err(),
            SpecfunError::ZeroArgument
        );
    }
}
