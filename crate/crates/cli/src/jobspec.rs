//! Validated job descriptions: the bridge between command-line flags,
//! flat key=value config files and the library operations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    RadiatePlate,
    RadiateSphere,
    RadiateCylinder,
    TransferPlates,
    TransferSpherePlate,
    Pta,
    LargeD,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::RadiatePlate => "radiate-plate",
            CommandKind::RadiateSphere => "radiate-sphere",
            CommandKind::RadiateCylinder => "radiate-cylinder",
            CommandKind::TransferPlates => "transfer-plates",
            CommandKind::TransferSpherePlate => "transfer-sphere-plate",
            CommandKind::Pta => "pta",
            CommandKind::LargeD => "large-d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    D,
    Radius,
}

impl SweepVariable {
    pub fn column(&self) -> &'static str {
        match self {
            SweepVariable::D => "d",
            SweepVariable::Radius => "radius",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Sweep {
    /// Parse "start:stop:count:lin|log".
    pub fn parse(variable: SweepVariable, text: &str) -> Result<Self, SpecError> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 4 {
            return Err(SpecError::Usage(format!(
                "sweep `{text}` must have the form start:stop:count:lin|log"
            )));
        }
        let num = |s: &str, what: &str| -> Result<f64, SpecError> {
            s.parse::<f64>()
                .map_err(|_| SpecError::Usage(format!("bad sweep {what} `{s}`")))
        };
        let start = num(parts[0], "start")?;
        let stop = num(parts[1], "stop")?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| SpecError::Usage(format!("bad sweep count `{}`", parts[2])))?;
        let spacing = match parts[3] {
            "lin" => Spacing::Lin,
            "log" => Spacing::Log,
            other => {
                return Err(SpecError::Usage(format!(
                    "sweep spacing must be lin or log, got `{other}`"
                )))
            }
        };
        if count < 1 {
            return Err(SpecError::Usage("sweep count must be ≥ 1".into()));
        }
        if !(start > 0.0) || !(stop > 0.0) {
            return Err(SpecError::Usage(
                "sweep endpoints must be positive".into(),
            ));
        }
        Ok(Self {
            variable,
            start,
            stop,
            count,
            spacing,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| {
                let t = i as f64 / (self.count - 1) as f64;
                match self.spacing {
                    Spacing::Lin => self.start + t * (self.stop - self.start),
                    Spacing::Log => {
                        (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReflectionsOpt {
    One,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", untagged)]
pub enum LmaxOpt {
    Auto(String2Auto),
    Fixed(usize),
}

/// Helper so `"auto"` round-trips through serde untagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum String2Auto {
    Auto,
}

impl LmaxOpt {
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        if text == "auto" {
            Ok(LmaxOpt::Auto(String2Auto::Auto))
        } else {
            text.parse::<usize>()
                .map(LmaxOpt::Fixed)
                .map_err(|_| SpecError::Usage(format!("l-max must be `auto` or an integer, got `{text}`")))
        }
    }

    pub fn auto() -> Self {
        LmaxOpt::Auto(String2Auto::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Fully validated job description. Materials are kept as their source
/// strings so a JSON echo re-parses to an identical spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub command: CommandKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sweep: Option<Sweep>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub material: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub material_1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub material_2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub material_sphere: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub material_plate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_plate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_sphere: Option<f64>,
    pub reflections: ReflectionsOpt,
    pub l_max: LmaxOpt,
    pub tol: f64,
    #[serde(default)]
    pub divergent_only: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output: Option<String>,
    pub format: OutputFormat,
}

impl JobSpec {
    /// Check that exactly the parameters required by the command are
    /// present, naming the offending flag.
    pub fn validate(&self) -> Result<(), SpecError> {
        use CommandKind::*;
        let require = |present: bool, flag: &str| -> Result<(), SpecError> {
            if present {
                Ok(())
            } else {
                Err(SpecError::Usage(format!(
                    "missing required --{flag} for {}",
                    self.command.name()
                )))
            }
        };
        let positive = |v: Option<f64>, flag: &str| -> Result<(), SpecError> {
            match v {
                Some(x) if x > 0.0 => Ok(()),
                Some(x) => Err(SpecError::Usage(format!(
                    "--{flag} must be positive, got {x}"
                ))),
                None => Ok(()),
            }
        };
        let non_negative = |v: Option<f64>, flag: &str| -> Result<(), SpecError> {
            match v {
                Some(x) if x >= 0.0 => Ok(()),
                Some(x) => Err(SpecError::Usage(format!(
                    "--{flag} must be ≥ 0, got {x}"
                ))),
                None => Ok(()),
            }
        };

        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(SpecError::Usage(format!(
                "--tol must lie in (0, 1), got {}",
                self.tol
            )));
        }
        positive(self.radius, "radius")?;
        positive(self.gap, "gap")?;
        non_negative(self.temperature, "temperature")?;
        non_negative(self.t1, "t1")?;
        non_negative(self.t2, "t2")?;
        non_negative(self.t_plate, "t-plate")?;
        non_negative(self.t_sphere, "t-sphere")?;

        let sweeping = |v: SweepVariable| self.sweep.map(|s| s.variable) == Some(v);

        match self.command {
            RadiatePlate => {
                require(self.material.is_some(), "material")?;
                require(self.temperature.is_some(), "temperature")?;
                if self.sweep.is_some() {
                    return Err(SpecError::Usage(
                        "radiate-plate does not accept geometry sweeps".into(),
                    ));
                }
            }
            RadiateSphere | RadiateCylinder => {
                require(self.material.is_some(), "material")?;
                require(self.temperature.is_some(), "temperature")?;
                require(
                    self.radius.is_some() || sweeping(SweepVariable::Radius),
                    "radius",
                )?;
                if sweeping(SweepVariable::D) {
                    return Err(SpecError::Usage(
                        "single-body commands only sweep radius".into(),
                    ));
                }
            }
            TransferPlates => {
                require(self.material_1.is_some(), "material-1")?;
                require(self.material_2.is_some(), "material-2")?;
                require(self.t1.is_some(), "t1")?;
                require(self.t2.is_some(), "t2")?;
                require(self.gap.is_some() || sweeping(SweepVariable::D), "gap")?;
                if sweeping(SweepVariable::Radius) {
                    return Err(SpecError::Usage(
                        "transfer-plates has no radius to sweep".into(),
                    ));
                }
            }
            TransferSpherePlate | Pta => {
                require(self.material_sphere.is_some(), "material-sphere")?;
                require(self.material_plate.is_some(), "material-plate")?;
                require(self.t_plate.is_some(), "t-plate")?;
                require(self.t_sphere.is_some(), "t-sphere")?;
                require(
                    self.radius.is_some() || sweeping(SweepVariable::Radius),
                    "radius",
                )?;
                require(self.gap.is_some() || sweeping(SweepVariable::D), "gap")?;
            }
            LargeD => {
                require(self.material_sphere.is_some(), "material-sphere")?;
                require(self.material_plate.is_some(), "material-plate")?;
                require(self.t_plate.is_some(), "t-plate")?;
                require(
                    self.radius.is_some() || sweeping(SweepVariable::Radius),
                    "radius",
                )?;
                if sweeping(SweepVariable::D) {
                    return Err(SpecError::Usage(
                        "large-d is separation-independent; sweep radius instead".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Name of the quantity in the first CSV column.
    pub fn sweep_column(&self) -> &'static str {
        if let Some(s) = &self.sweep {
            s.variable.column()
        } else {
            match self.command {
                CommandKind::RadiatePlate => "temperature",
                CommandKind::RadiateSphere | CommandKind::RadiateCylinder | CommandKind::LargeD => {
                    "radius"
                }
                _ => "d",
            }
        }
    }

    /// Grid of sweep values (single point when no sweep requested).
    pub fn grid(&self) -> Vec<f64> {
        if let Some(s) = &self.sweep {
            s.values()
        } else {
            match self.command {
                CommandKind::RadiatePlate => vec![self.temperature.unwrap_or(0.0)],
                CommandKind::RadiateSphere | CommandKind::RadiateCylinder | CommandKind::LargeD => {
                    vec![self.radius.unwrap_or(0.0)]
                }
                _ => vec![self.gap.unwrap_or(0.0)],
            }
        }
    }
}

/// Flat key=value config file; `#` starts a comment line.
pub fn parse_config(path: &str) -> Result<std::collections::BTreeMap<String, String>, SpecError> {
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.to_string(),
        source,
    })?;
    let mut map = std::collections::BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(SpecError::Usage(format!(
                "config line {} is not key=value: `{line}`",
                i + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
