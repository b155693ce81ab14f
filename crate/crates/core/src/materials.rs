//! Complex dielectric function models, tabulated-data ingestion and derived
//! material quantities.
//!
//! All models are passive: Im ε(ω) ≥ 0 for ω > 0, validated at construction
//! (tabulated data row by row, analytic models on a sampled log grid).

use num_complex::Complex64;
use std::io::BufRead;
use thiserror::Error;

use crate::constants::SPEED_OF_LIGHT;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("passivity violation: Im ε = {im} < 0 at ω = {omega:.6e} rad/s (line {line})")]
    Passivity { omega: f64, im: f64, line: usize },
    #[error("grid not strictly increasing at line {line}: ω = {omega:.6e}")]
    NonMonotonicGrid { omega: f64, line: usize },
    #[error("tabulated grid needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("frequency {omega:.6e} rad/s outside tabulated range [{min:.6e}, {max:.6e}]")]
    OutOfRange { omega: f64, min: f64, max: f64 },
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// One Lorentz oscillator: ε contribution S·ω₀²/(ω₀² − ω² − iγω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzOscillator {
    pub strength: f64,
    pub resonance: f64,
    pub damping: f64,
}

/// Complex dielectric function model.
#[derive(Debug, Clone, PartialEq)]
pub enum DielectricModel {
    /// Frequency-independent ε.
    Constant(Complex64),
    /// Drude metal: ε(ω) = 1 − ω_p²/(ω² + iγω).
    Drude { plasma: f64, damping: f64 },
    /// Sum of Lorentz oscillators on top of ε_∞.
    LorentzSum {
        eps_inf: f64,
        oscillators: Vec<LorentzOscillator>,
    },
    /// Linearly interpolated tabulated data, strictly increasing in ω.
    Tabulated(Vec<(f64, f64, f64)>),
}

/// Frequency-independent complex magnetic permeability, Im μ ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagneticPermeability {
    pub mu: Complex64,
}

impl MagneticPermeability {
    pub fn new(mu: Complex64) -> Result<Self, MaterialError> {
        if mu.im < 0.0 {
            return Err(MaterialError::InvalidParameter(format!(
                "Im μ must be ≥ 0, got {}",
                mu.im
            )));
        }
        Ok(Self { mu })
    }

    pub fn vacuum() -> Self {
        Self { mu: Complex64::ONE }
    }
}

impl Default for MagneticPermeability {
    fn default() -> Self {
        Self::vacuum()
    }
}

impl DielectricModel {
    pub fn constant(re: f64, im: f64) -> Result<Self, MaterialError> {
        if im < 0.0 {
            return Err(MaterialError::Passivity {
                omega: 0.0,
                im,
                line: 0,
            });
        }
        Ok(Self::Constant(Complex64::new(re, im)))
    }

    pub fn drude(plasma: f64, damping: f64) -> Result<Self, MaterialError> {
        if plasma < 0.0 || damping < 0.0 {
            return Err(MaterialError::InvalidParameter(
                "Drude parameters must be non-negative".into(),
            ));
        }
        Ok(Self::Drude { plasma, damping })
    }

    pub fn lorentz_sum(
        eps_inf: f64,
        oscillators: Vec<LorentzOscillator>,
    ) -> Result<Self, MaterialError> {
        if eps_inf < 1.0 {
            return Err(MaterialError::InvalidParameter(format!(
                "ε_∞ must be ≥ 1, got {eps_inf}"
            )));
        }
        for osc in &oscillators {
            if osc.strength < 0.0 || osc.resonance <= 0.0 || osc.damping < 0.0 {
                return Err(MaterialError::InvalidParameter(
                    "oscillator parameters must be non-negative with resonance > 0".into(),
                ));
            }
        }
        Ok(Self::LorentzSum {
            eps_inf,
            oscillators,
        })
    }

    /// Vacuum (ε = 1).
    pub fn vacuum() -> Self {
        Self::Constant(Complex64::ONE)
    }

    /// Two-oscillator Lorentz model with resonances near the two SiO₂
    /// phonon bands (0.86·10¹⁴ and 2.03·10¹⁴ rad/s). Qualitative stand-in
    /// for measured silica data; supports surface phonon polaritons, and the
    /// damping is chosen light enough that the near-field scaling laws sit
    /// in their asymptotic regime across the 10–100 nm window.
    pub fn sio2_like() -> Self {
        Self::LorentzSum {
            eps_inf: 2.1,
            oscillators: vec![
                LorentzOscillator {
                    strength: 0.75,
                    resonance: 0.86e14,
                    damping: 0.25e13,
                },
                LorentzOscillator {
                    strength: 0.55,
                    resonance: 2.03e14,
                    damping: 0.50e13,
                },
            ],
        }
    }

    /// Drude gold: ω_p = 1.37·10¹⁶ rad/s, γ = 5.3·10¹³ rad/s.
    pub fn gold_drude() -> Self {
        Self::Drude {
            plasma: 1.37e16,
            damping: 5.3e13,
        }
    }
}

/// ε(ω) for a validated model. Tabulated data is interpolated linearly
/// in ω, separately on the real and imaginary parts; no extrapolation.
pub fn permittivity(model: &DielectricModel, omega: f64) -> Result<Complex64, MaterialError> {
    if !(omega > 0.0) {
        return Err(MaterialError::NonPositiveFrequency(omega));
    }
    match model {
        DielectricModel::Constant(eps) => Ok(*eps),
        DielectricModel::Drude { plasma, damping } => {
            let denom = Complex64::new(omega * omega, *damping * omega);
            Ok(Complex64::ONE - plasma * plasma / denom)
        }
        DielectricModel::LorentzSum {
            eps_inf,
            oscillators,
        } => {
            let mut eps = Complex64::new(*eps_inf, 0.0);
            for osc in oscillators {
                let w0sq = osc.resonance * osc.resonance;
                let denom = Complex64::new(w0sq - omega * omega, -osc.damping * omega);
                eps += osc.strength * w0sq / denom;
            }
            Ok(eps)
        }
        DielectricModel::Tabulated(grid) => {
            let first = grid.first().expect("validated grid");
            let last = grid.last().expect("validated grid");
            if omega < first.0 || omega > last.0 {
                return Err(MaterialError::OutOfRange {
                    omega,
                    min: first.0,
                    max: last.0,
                });
            }
            // Exact grid nodes return the stored value bit-for-bit.
            let idx = grid.partition_point(|p| p.0 < omega);
            if idx < grid.len() && grid[idx].0 == omega {
                return Ok(Complex64::new(grid[idx].1, grid[idx].2));
            }
            let (w0, re0, im0) = grid[idx - 1];
            let (w1, re1, im1) = grid[idx];
            let t = (omega - w0) / (w1 - w0);
            Ok(Complex64::new(
                re0 + t * (re1 - re0),
                im0 + t * (im1 - im0),
            ))
        }
    }
}

/// Skin depth δ(ω) = c/(Im √ε(ω) · ω) with the branch Im √ε ≥ 0.
///
/// Returns `f64::INFINITY` for lossless media.
pub fn skin_depth(model: &DielectricModel, omega: f64) -> Result<f64, MaterialError> {
    let eps = permittivity(model, omega)?;
    let im = sqrt_passive(eps).im;
    if im <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(SPEED_OF_LIGHT / (im * omega))
}

/// Square root with the branch chosen so Im √ε ≥ 0, the physical branch for
/// passive media with the e^{−iωt} time convention.
pub fn sqrt_passive(z: Complex64) -> Complex64 {
    let r = z.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// Parse the material CSV format: header `omega_rad_s,eps_re,eps_im`, one
/// row per grid point, `#` comment lines permitted, ω strictly increasing.
pub fn load_tabulated<R: std::io::Read>(source: R) -> Result<DielectricModel, MaterialError> {
    let reader = std::io::BufReader::new(source);
    let mut grid: Vec<(f64, f64, f64)> = Vec::new();
    let mut header_seen = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !header_seen {
            if trimmed != "omega_rad_s,eps_re,eps_im" {
                return Err(MaterialError::Parse {
                    line: line_no,
                    message: format!(
                        "expected header `omega_rad_s,eps_re,eps_im`, got `{trimmed}`"
                    ),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(MaterialError::Parse {
                line: line_no,
                message: format!("expected 3 comma-separated fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64, MaterialError> {
            s.parse::<f64>().map_err(|e| MaterialError::Parse {
                line: line_no,
                message: format!("bad {what} `{s}`: {e}"),
            })
        };
        let omega = parse(fields[0], "omega_rad_s")?;
        let re = parse(fields[1], "eps_re")?;
        let im = parse(fields[2], "eps_im")?;
        if !(omega > 0.0) {
            return Err(MaterialError::Parse {
                line: line_no,
                message: format!("omega must be positive, got {omega}"),
            });
        }
        if im < 0.0 {
            return Err(MaterialError::Passivity {
                omega,
                im,
                line: line_no,
            });
        }
        if let Some(&(prev, _, _)) = grid.last() {
            if omega <= prev {
                return Err(MaterialError::NonMonotonicGrid {
                    omega,
                    line: line_no,
                });
            }
        }
        grid.push((omega, re, im));
    }

    if !header_seen {
        return Err(MaterialError::Parse {
            line: 0,
            message: "missing header line".into(),
        });
    }
    if grid.len() < 2 {
        return Err(MaterialError::TooFewPoints(grid.len()));
    }
    Ok(DielectricModel::Tabulated(grid))
}

/// Load a tabulated model from a file path.
pub fn load_tabulated_file(path: &std::path::Path) -> Result<DielectricModel, MaterialError> {
    let file = std::fs::File::open(path)?;
    load_tabulated(file)
}
