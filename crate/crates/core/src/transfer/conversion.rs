//! Conversion between the planar and spherical wave bases: plane waves
//! expanded in regular multipoles around the sphere center, and outgoing
//! multipoles decomposed into their (Weyl) plane-wave spectra.
//!
//! All entries are azimuthally reduced: the full matrix element carries
//! e^{∓imφ_k}, integrated out analytically wherever these blocks are used.
//! Phase references: planar modes are referenced to the plate surface z = 0,
//! spherical modes to the sphere center at height z_ref, so every up- or
//! down-going conversion entry carries one factor e^{i k_z z_ref}.

use num_complex::Complex64;

use crate::constants::SPEED_OF_LIGHT;
use crate::numerics::gauss_legendre_on;
use crate::specfun::legendre;

/// Polarization index order used across the transfer machinery.
pub const POL_E: usize = 0;
pub const POL_M: usize = 1;

/// One transverse-wavevector quadrature node with its radial weight
/// (the weight already includes the k_t Jacobian of ∫k_t dk_t).
#[derive(Debug, Clone, Copy)]
pub struct KtNode {
    pub k_t: f64,
    pub weight: f64,
    pub evanescent: bool,
}

/// Discretized transverse-wavevector quadrature: propagating nodes up to
/// ω/c and an evanescent tail up to the cutoff κ_max = ω/c + Λ/d.
#[derive(Debug, Clone)]
pub struct PlanarQuadrature {
    pub nodes: Vec<KtNode>,
    pub omega: f64,
}

/// Evanescent-tail cutoff coefficient Λ in κ_max = ω/c + Λ/gap.
pub const LAMBDA_CUTOFF: f64 = 40.0;

impl PlanarQuadrature {
    /// Build the default quadrature: angle-substituted Gauss-Legendre on the
    /// propagating range (k_t = k sinθ removes the k_z edge singularity) and
    /// a two-panel (linear + logarithmic) layout in κ' = √(k_t²−k²) on the
    /// evanescent side.
    pub fn build(omega: f64, gap: f64, l_max: usize, oscillation_scale: f64) -> Self {
        let k = omega / SPEED_OF_LIGHT;
        let n_prop = ((1.3 * l_max as f64 + 0.35 * oscillation_scale).ceil() as usize + 24)
            .clamp(32, 700);
        // Every evanescent integrand is a member of the saddle family
        // κ'^{l+l'} e^{−2κ'z}: per-octave Gauss panels with O(√l) nodes
        // resolve all of them at once.
        let n_oct = ((2.2 * (l_max as f64).sqrt()).ceil() as usize + 16).max(24);

        let mut nodes = Vec::new();
        let (theta_nodes, theta_weights) =
            gauss_legendre_on(n_prop, 0.0, std::f64::consts::FRAC_PI_2);
        for (&theta, &w) in theta_nodes.iter().zip(&theta_weights) {
            // ∫₀^k k_t dk_t = k² ∫ sinθ cosθ dθ.
            nodes.push(KtNode {
                k_t: k * theta.sin(),
                weight: k * k * theta.sin() * theta.cos() * w,
                evanescent: false,
            });
        }

        let kt_max = k + LAMBDA_CUTOFF / gap;
        let kappa_max = (kt_max * kt_max - k * k).sqrt();
        // ∫_k^{kt_max} k_t dk_t = ∫₀^{κ_max} κ' dκ'.
        let kappa_split = k.min(kappa_max);
        let (kp_nodes, kp_weights) = gauss_legendre_on(2 * n_oct, 0.0, kappa_split);
        for (&kappa, &w) in kp_nodes.iter().zip(&kp_weights) {
            nodes.push(KtNode {
                k_t: (k * k + kappa * kappa).sqrt(),
                weight: kappa * w,
                evanescent: true,
            });
        }
        // Factor-2 octave panels in κ' up to the cutoff, Gauss in ln κ'.
        let mut lo = kappa_split;
        while lo < kappa_max {
            let hi = (2.0 * lo).min(kappa_max);
            let (u_nodes, u_weights) = gauss_legendre_on(n_oct, lo.ln(), hi.ln());
            for (&u, &w) in u_nodes.iter().zip(&u_weights) {
                let kappa = u.exp();
                nodes.push(KtNode {
                    k_t: (k * k + kappa * kappa).sqrt(),
                    weight: kappa * kappa * w,
                    evanescent: true,
                });
            }
            lo = hi;
        }
        Self { nodes, omega }
    }

    /// Propagating-only quadrature over the full sphere of directions,
    /// used by the regular-wave round trip.
    pub fn full_sphere(omega: f64, n_theta: usize) -> (Vec<f64>, Vec<f64>) {
        let _ = omega;
        gauss_legendre_on(n_theta, 0.0, std::f64::consts::PI)
    }
}

/// k_z for the node (decay branch Im k_z ≥ 0).
pub fn node_kz(omega: f64, k_t: f64) -> Complex64 {
    crate::scattering::k_z_vacuum(omega, k_t)
}

/// Signed-m angular functions (π̄_s, τ̄_s) for l = max(1,|m|)..=l_max at
/// complex cosθ with real sinθ > 0: π̄ flips sign with m (it carries an
/// explicit factor m), τ̄ keeps (−1)^m parity.
pub fn angular_pair(
    l_max: usize,
    m: i32,
    cos_k: Complex64,
    sin_k: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let ma = m.unsigned_abs() as usize;
    let (mut pi_v, mut tau_v) = legendre::pi_tau(l_max, ma, cos_k, sin_k);
    if m < 0 {
        let parity = if ma % 2 == 1 { -1.0 } else { 1.0 };
        for v in pi_v.iter_mut() {
            *v *= -parity;
        }
        for v in tau_v.iter_mut() {
            *v *= parity;
        }
    }
    (pi_v, tau_v)
}

/// i^l on the canonical cycle.
#[inline]
pub fn i_pow(l: usize) -> Complex64 {
    const CYCLE: [Complex64; 4] = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    CYCLE[l % 4]
}

/// Reduced plane-wave → regular-multipole entries at one node: for each
/// retained l, the coefficients from incoming planar (s, p) to the spherical
/// (E, M) pair. Layout: out[(l − l_min)·2 + P][planar pol 0 = s? no:
/// indexed explicitly below].
///
/// Returned as (u_from_s, u_from_p) with the spherical index
/// idx = (l − l_min)*2 + P, P ∈ {E = 0, M = 1}; the dropped factor is
/// e^{−imφ_k}, and each entry includes e^{i k_z z_ref}.
pub fn u_entries(
    l_max: usize,
    m: i32,
    omega: f64,
    k_t: f64,
    z_ref: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let k = omega / SPEED_OF_LIGHT;
    let kz = node_kz(omega, k_t);
    let cos_k = kz / k;
    let sin_k = k_t / k;
    let phase = (Complex64::I * kz * z_ref).exp();
    let (pi_v, tau_v) = angular_pair(l_max, m, cos_k, sin_k);
    let l_min = (m.unsigned_abs() as usize).max(1);
    let count = l_max + 1 - l_min;
    let mut from_s = vec![Complex64::ZERO; 2 * count];
    let mut from_p = vec![Complex64::ZERO; 2 * count];
    let four_pi = 4.0 * std::f64::consts::PI;
    for l in l_min..=l_max {
        let idx = l - l_min;
        let il = i_pow(l % 4);
        let pi_l = pi_v[idx];
        let tau_l = tau_v[idx];
        // E (electric, q_lm) row then M (magnetic, p_lm) row.
        from_s[idx * 2 + POL_E] = -four_pi * il / Complex64::I * pi_l * phase;
        from_p[idx * 2 + POL_E] = -four_pi * il * tau_l * phase;
        from_s[idx * 2 + POL_M] = four_pi * il * Complex64::I * tau_l * phase;
        from_p[idx * 2 + POL_M] = -four_pi * il * pi_l * phase;
    }
    (from_s, from_p)
}

/// Reduced outgoing-multipole → down-going planar amplitude densities at one
/// node (per d²k_t), mirrored by parity from the up-going Weyl amplitudes.
/// The dropped factor is e^{+imφ_k}; each entry includes e^{i k_z z_ref}.
pub fn d_entries(
    l_max: usize,
    m: i32,
    omega: f64,
    k_t: f64,
    z_ref: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let k = omega / SPEED_OF_LIGHT;
    let kz = node_kz(omega, k_t);
    let cos_k = kz / k;
    let sin_k = k_t / k;
    let phase = (Complex64::I * kz * z_ref).exp();
    let (pi_v, tau_v) = angular_pair(l_max, m, cos_k, sin_k);
    let l_min = (m.unsigned_abs() as usize).max(1);
    let count = l_max + 1 - l_min;
    let mut to_s = vec![Complex64::ZERO; 2 * count];
    let mut to_p = vec![Complex64::ZERO; 2 * count];
    let ma = m.unsigned_abs() as usize;
    for l in l_min..=l_max {
        let idx = l - l_min;
        let g = i_pow(l % 4).finv() * phase / (std::f64::consts::TAU * k * kz);
        let sigma = if (l + ma) % 2 == 0 { 1.0 } else { -1.0 };
        let pi_l = pi_v[idx];
        let tau_l = tau_v[idx];
        to_s[idx * 2 + POL_E] = -g * Complex64::I * sigma * pi_l;
        to_p[idx * 2 + POL_E] = g * sigma * tau_l;
        to_s[idx * 2 + POL_M] = g * Complex64::I * sigma * tau_l;
        to_p[idx * 2 + POL_M] = -g * sigma * pi_l;
    }
    (to_s, to_p)
}

/// Up-going Weyl amplitude densities (outgoing multipole → up-going planar),
/// needed by field checks and the flux bookkeeping above the sphere.
pub fn d_entries_up(
    l_max: usize,
    m: i32,
    omega: f64,
    k_t: f64,
    z_ref: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let k = omega / SPEED_OF_LIGHT;
    let kz = node_kz(omega, k_t);
    let cos_k = kz / k;
    let sin_k = k_t / k;
    // Up-going re-referencing carries e^{−i k_z z_ref}.
    let phase = (-Complex64::I * kz * z_ref).exp();
    let (pi_v, tau_v) = angular_pair(l_max, m, cos_k, sin_k);
    let l_min = (m.unsigned_abs() as usize).max(1);
    let count = l_max + 1 - l_min;
    let mut to_s = vec![Complex64::ZERO; 2 * count];
    let mut to_p = vec![Complex64::ZERO; 2 * count];
    for l in l_min..=l_max {
        let idx = l - l_min;
        let g = i_pow(l % 4).finv() * phase / (std::f64::consts::TAU * k * kz);
        let pi_l = pi_v[idx];
        let tau_l = tau_v[idx];
        to_s[idx * 2 + POL_E] = -g * Complex64::I * pi_l;
        to_p[idx * 2 + POL_E] = -g * tau_l;
        to_s[idx * 2 + POL_M] = -g * Complex64::I * tau_l;
        to_p[idx * 2 + POL_M] = -g * pi_l;
    }
    (to_s, to_p)
}

/// Dense conversion block between the discretized planar basis and the
/// spherical multipoles up to `l_max`, with the plate-reflection phase
/// factors referenced to height `z_ref` above the plate.
#[derive(Debug, Clone)]
pub struct ConversionBlock {
    pub omega: f64,
    pub l_max: usize,
    pub z_ref: f64,
    pub quad: PlanarQuadrature,
}

impl ConversionBlock {
    pub fn new(omega: f64, l_max: usize, z_ref: f64, quad: PlanarQuadrature) -> Self {
        Self {
            omega,
            l_max,
            z_ref,
            quad,
        }
    }

    /// Number of retained spherical modes per azimuthal index m.
    pub fn block_size(&self, m: i32) -> usize {
        let l_min = (m.unsigned_abs() as usize).max(1);
        if l_min > self.l_max {
            0
        } else {
            2 * (self.l_max + 1 - l_min)
        }
    }

    /// Project up-going planar amplitudes (per node, per planar polarization
    /// (s, p)) onto regular multipole amplitudes of azimuthal index m.
    /// `amplitudes[node] = (a_s, a_p)` are densities w.r.t. ∫d²k_t already
    /// containing any azimuthal reduction.
    pub fn to_spherical(&self, m: i32, amplitudes: &[(Complex64, Complex64)]) -> Vec<Complex64> {
        let n = self.block_size(m);
        let mut out = vec![Complex64::ZERO; n];
        for (node, amp) in self.quad.nodes.iter().zip(amplitudes) {
            let (us, up) = u_entries(self.l_max, m, self.omega, node.k_t, self.z_ref);
            for i in 0..n {
                out[i] += std::f64::consts::TAU
                    * node.weight
                    * (us[i] * amp.0 + up[i] * amp.1);
            }
        }
        out
    }

    /// Expand outgoing multipole amplitudes of index m into down-going planar
    /// amplitude densities per node.
    pub fn to_planar_down(&self, m: i32, spherical: &[Complex64]) -> Vec<(Complex64, Complex64)> {
        let n = self.block_size(m);
        assert_eq!(spherical.len(), n);
        self.quad
            .nodes
            .iter()
            .map(|node| {
                let (ds, dp) = d_entries(self.l_max, m, self.omega, node.k_t, self.z_ref);
                let mut a_s = Complex64::ZERO;
                let mut a_p = Complex64::ZERO;
                for i in 0..n {
                    a_s += ds[i] * spherical[i];
                    a_p += dp[i] * spherical[i];
                }
                (a_s, a_p)
            })
            .collect()
    }

    /// Residual of the regular round trip: expand regular multipoles over the
    /// full sphere of propagating directions, re-project, compare with the
    /// identity on the retained subspace. Returns the max entry deviation.
    pub fn round_trip_residual(&self, m: i32) -> f64 {
        let n = self.block_size(m);
        if n == 0 {
            return 0.0;
        }
        let n_theta = (2 * self.l_max + 24).max(48);
        let (theta_nodes, theta_weights) = PlanarQuadrature::full_sphere(self.omega, n_theta);

        // Composition C = ∫dΩ_k U-row(k̂) ⊗ V-col(k̂); V is the regular
        // decomposition density (i^{−l}/4π)·amp_P(k̂).
        let mut c = vec![Complex64::ZERO; n * n];
        let l_min = (m.unsigned_abs() as usize).max(1);
        for (&theta, &w) in theta_nodes.iter().zip(&theta_weights) {
            let cos_k = Complex64::from(theta.cos());
            let sin_k = theta.sin();
            if sin_k <= 1e-12 {
                continue;
            }
            let (pi_v, tau_v) = angular_pair(self.l_max, m, cos_k, sin_k);
            // U entries without phase (z_ref = 0 for the identity check).
            let four_pi = 4.0 * std::f64::consts::PI;
            let mut u_s = vec![Complex64::ZERO; n];
            let mut u_p = vec![Complex64::ZERO; n];
            let mut v_s = vec![Complex64::ZERO; n];
            let mut v_p = vec![Complex64::ZERO; n];
            for l in l_min..=self.l_max {
                let idx = l - l_min;
                let il = i_pow(l % 4);
                let pi_l = pi_v[idx];
                let tau_l = tau_v[idx];
                u_s[idx * 2 + POL_E] = -four_pi * il / Complex64::I * pi_l;
                u_p[idx * 2 + POL_E] = -four_pi * il * tau_l;
                u_s[idx * 2 + POL_M] = four_pi * il * Complex64::I * tau_l;
                u_p[idx * 2 + POL_M] = -four_pi * il * pi_l;
                let v_pref = il.finv() / four_pi;
                v_s[idx * 2 + POL_E] = -v_pref * Complex64::I * pi_l;
                v_p[idx * 2 + POL_E] = -v_pref * tau_l;
                v_s[idx * 2 + POL_M] = -v_pref * Complex64::I * tau_l;
                v_p[idx * 2 + POL_M] = -v_pref * pi_l;
            }
            // dΩ = 2π sinθ dθ after azimuthal reduction.
            let measure = std::f64::consts::TAU * sin_k * w;
            for row in 0..n {
                for col in 0..n {
                    c[row * n + col] +=
                        measure * (u_s[row] * v_s[col] + u_p[row] * v_p[col]);
                }
            }
        }
        let mut worst: f64 = 0.0;
        for row in 0..n {
            for col in 0..n {
                let expect = if row == col {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                worst = worst.max((c[row * n + col] - expect).norm());
            }
        }
        worst
        // Conjugate phases of U and V cancel on the diagonal; the regular
        // decomposition requires no evanescent continuation.
    }

    /// The scalar wavenumber.
    pub fn wavenumber(&self) -> f64 {
        self.omega / SPEED_OF_LIGHT
    }
}
