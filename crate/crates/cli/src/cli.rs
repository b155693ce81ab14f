//! Flag definitions and the flag/config-file merge producing a [`JobSpec`].

use clap::{Args, Parser, Subcommand};

use crate::jobspec::{
    parse_config, CommandKind, JobSpec, LmaxOpt, OutputFormat, ReflectionsOpt, SpecError, Sweep,
    SweepVariable,
};

#[derive(Debug, Parser)]
#[command(
    name = "heatrad",
    version,
    about = "Thermal emission and near-field radiative heat transfer from scattering theory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hemispherical emission of a half-space (W/m²) and its emissivity.
    RadiatePlate(CommonArgs),
    /// Total emission of a sphere (W).
    RadiateSphere(CommonArgs),
    /// Emission per length of an infinite cylinder (W/m), polarization
    /// resolved.
    RadiateCylinder(CommonArgs),
    /// Net flux between two parallel plates (W/m²).
    TransferPlates(CommonArgs),
    /// Net power absorbed by a sphere above a plate (W).
    TransferSpherePlate(CommonArgs),
    /// Proximity transfer approximation for the sphere-plate geometry (W).
    Pta(CommonArgs),
    /// Large-separation sphere-plate limit (W), separation independent.
    LargeD(CommonArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// Material for single-body commands (builtin name, constant:<re>,<im>,
    /// or a material CSV path; plates also accept `black`).
    #[arg(long)]
    pub material: Option<String>,
    /// First plate material (transfer-plates).
    #[arg(long)]
    pub material_1: Option<String>,
    /// Second plate material (transfer-plates).
    #[arg(long)]
    pub material_2: Option<String>,
    /// Sphere material (transfer-sphere-plate, pta, large-d).
    #[arg(long)]
    pub material_sphere: Option<String>,
    /// Plate material (transfer-sphere-plate, pta, large-d).
    #[arg(long)]
    pub material_plate: Option<String>,
    /// Radius in meters.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Surface-to-surface gap in meters.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Temperature in kelvin (single-body commands).
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Plate-1 temperature (transfer-plates).
    #[arg(long)]
    pub t1: Option<f64>,
    /// Plate-2 temperature (transfer-plates).
    #[arg(long)]
    pub t2: Option<f64>,
    /// Plate temperature (sphere-plate family).
    #[arg(long)]
    pub t_plate: Option<f64>,
    /// Sphere temperature (sphere-plate family).
    #[arg(long)]
    pub t_sphere: Option<f64>,
    /// Gap sweep start:stop:count:lin|log.
    #[arg(long)]
    pub sweep_d: Option<String>,
    /// Radius sweep start:stop:count:lin|log.
    #[arg(long)]
    pub sweep_radius: Option<String>,
    /// Reflection order for sphere-plate: one | full.
    #[arg(long)]
    pub reflections: Option<String>,
    /// Multipole cutoff: auto | <integer>.
    #[arg(long)]
    pub l_max: Option<String>,
    /// Relative tolerance for every integration.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Restrict to the divergent evanescent-E channel in the one-reflection
    /// convention (diagnostic for the proximity-limit comparison).
    #[arg(long)]
    pub divergent_only: bool,
    /// Concurrent grid points.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub output: Option<String>,
    /// Output format: csv | json.
    #[arg(long)]
    pub format: Option<String>,
    /// Flat key=value config file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<String>,
}

/// Merge flags over config-file values over defaults into a validated spec.
pub fn build_jobspec(kind: CommandKind, args: &CommonArgs) -> Result<JobSpec, SpecError> {
    let cfg = match &args.config {
        Some(path) => parse_config(path)?,
        None => Default::default(),
    };
    let pick_str = |flag: &Option<String>, key: &str| -> Option<String> {
        flag.clone().or_else(|| cfg.get(key).cloned())
    };
    let pick_f64 = |flag: &Option<f64>, key: &str| -> Result<Option<f64>, SpecError> {
        if flag.is_some() {
            return Ok(*flag);
        }
        match cfg.get(key) {
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| SpecError::Usage(format!("bad numeric config value {key}={v}"))),
            None => Ok(None),
        }
    };
    let pick_usize = |flag: &Option<usize>, key: &str| -> Result<Option<usize>, SpecError> {
        if flag.is_some() {
            return Ok(*flag);
        }
        match cfg.get(key) {
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| SpecError::Usage(format!("bad integer config value {key}={v}"))),
            None => Ok(None),
        }
    };

    let sweep_d = pick_str(&args.sweep_d, "sweep-d");
    let sweep_radius = pick_str(&args.sweep_radius, "sweep-radius");
    let sweep = match (&sweep_d, &sweep_radius) {
        (Some(_), Some(_)) => {
            return Err(SpecError::Usage(
                "at most one of --sweep-d / --sweep-radius may be given".into(),
            ))
        }
        (Some(text), None) => Some(Sweep::parse(SweepVariable::D, text)?),
        (None, Some(text)) => Some(Sweep::parse(SweepVariable::Radius, text)?),
        (None, None) => None,
    };

    let reflections = match pick_str(&args.reflections, "reflections").as_deref() {
        None | Some("full") => ReflectionsOpt::Full,
        Some("one") => ReflectionsOpt::One,
        Some(other) => {
            return Err(SpecError::Usage(format!(
                "--reflections must be one|full, got `{other}`"
            )))
        }
    };
    let l_max = match pick_str(&args.l_max, "l-max") {
        None => LmaxOpt::auto(),
        Some(text) => LmaxOpt::parse(&text)?,
    };
    let format = match pick_str(&args.format, "format").as_deref() {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => {
            return Err(SpecError::Usage(format!(
                "--format must be csv|json, got `{other}`"
            )))
        }
    };
    let divergent_only = args.divergent_only
        || cfg
            .get("divergent-only")
            .map(|v| v == "true" || v == "1")
            .unwrap_or(false);

    let job = JobSpec {
        command: kind,
        radius: pick_f64(&args.radius, "radius")?,
        gap: pick_f64(&args.gap, "gap")?,
        sweep,
        material: pick_str(&args.material, "material"),
        material_1: pick_str(&args.material_1, "material-1"),
        material_2: pick_str(&args.material_2, "material-2"),
        material_sphere: pick_str(&args.material_sphere, "material-sphere"),
        material_plate: pick_str(&args.material_plate, "material-plate"),
        temperature: pick_f64(&args.temperature, "temperature")?,
        t1: pick_f64(&args.t1, "t1")?,
        t2: pick_f64(&args.t2, "t2")?,
        t_plate: pick_f64(&args.t_plate, "t-plate")?,
        t_sphere: pick_f64(&args.t_sphere, "t-sphere")?,
        reflections,
        l_max,
        tol: pick_f64(&args.tol, "tol")?.unwrap_or(1e-6),
        divergent_only,
        jobs: pick_usize(&args.jobs, "jobs")?,
        output: pick_str(&args.output, "output"),
        format,
    };
    job.validate()?;
    Ok(job)
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::RadiatePlate(_) => CommandKind::RadiatePlate,
            Command::RadiateSphere(_) => CommandKind::RadiateSphere,
            Command::RadiateCylinder(_) => CommandKind::RadiateCylinder,
            Command::TransferPlates(_) => CommandKind::TransferPlates,
            Command::TransferSpherePlate(_) => CommandKind::TransferSpherePlate,
            Command::Pta(_) => CommandKind::Pta,
            Command::LargeD(_) => CommandKind::LargeD,
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::RadiatePlate(a)
            | Command::RadiateSphere(a)
            | Command::RadiateCylinder(a)
            | Command::TransferPlates(a)
            | Command::TransferSpherePlate(a)
            | Command::Pta(a)
            | Command::LargeD(a) => a,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_cylinder_invocation_builds() {
        let cli = Cli::parse_from([
            "heatrad",
            "radiate-cylinder",
            "--material",
            "sio2-like",
            "--radius",
            "1e-6",
            "--temperature",
            "300",
        ]);
        let job = build_jobspec(cli.command.kind(), cli.command.args()).unwrap();
        assert_eq!(job.command, CommandKind::RadiateCylinder);
        assert_eq!(job.radius, Some(1e-6));
    }

    #[test]
    fn flags_override_config() {
        let dir = std::env::temp_dir().join("heatrad_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let cfg_path = dir.join("cfg.txt");
        std::fs::write(&cfg_path, "temperature=500\ntol=1e-3\nmaterial=vacuum\n").unwrap();
        let cli = Cli::parse_from([
            "heatrad",
            "radiate-plate",
            "--temperature",
            "300",
            "--config",
            cfg_path.to_str().unwrap(),
        ]);
        let job = build_jobspec(cli.command.kind(), cli.command.args()).unwrap();
        assert_eq!(job.temperature, Some(300.0)); // flag wins
        assert_eq!(job.tol, 1e-3); // config fills the gap
        assert_eq!(job.material.as_deref(), Some("vacuum"));
    }

    #[test]
    fn conflicting_sweeps_rejected() {
        let cli = Cli::parse_from([
            "heatrad",
            "transfer-sphere-plate",
            "--material-sphere",
            "sio2-like",
            "--material-plate",
            "sio2-like",
            "--t-plate",
            "300",
            "--t-sphere",
            "0",
            "--radius",
            "5e-6",
            "--sweep-d",
            "1e-8:1e-7:4:log",
            "--sweep-radius",
            "1e-7:1e-6:4:log",
        ]);
        assert!(build_jobspec(cli.command.kind(), cli.command.args()).is_err());
    }
}
