//! Run a validated job over its sweep grid and serialize the rows.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use heatrad::constants::stefan_boltzmann_flux;
use heatrad::materials::{load_tabulated_file, DielectricModel};
use heatrad::radiation::{radiate_cylinder, radiate_plate, radiate_sphere};
use heatrad::scattering::PlateModel;
use heatrad::transfer::{
    divergent_term_ratio, plate_plate_flux, pta_transfer, sphere_plate_large_d,
    sphere_plate_transfer, LmaxMode, ReflectionOrder, SourceFilter, SpherePlateOptions,
};

use crate::jobspec::{
    CommandKind, JobSpec, LmaxOpt, OutputFormat, ReflectionsOpt, SpecError,
};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("computation failed at {column} = {value:.6e} (grid point {index}): {detail}")]
    Computation {
        index: usize,
        column: &'static str,
        value: f64,
        detail: String,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Spec(SpecError::Usage(_)) => 2,
            RunError::Spec(SpecError::Io { .. }) | RunError::Io { .. } => 3,
            RunError::Computation { .. } => 4,
        }
    }
}

/// One output row; `None` renders as an empty CSV field.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub sweep_value: f64,
    pub power: f64,
    pub normalized: Option<f64>,
    pub pol_e: Option<f64>,
    pub pol_m: Option<f64>,
    pub channel_prop: Option<f64>,
    pub channel_evan: Option<f64>,
    pub l_max_used: Option<usize>,
    pub est_error: f64,
}

/// Resolve a material specification: a built-in name, `constant:<re>,<im>`,
/// or a path to a material CSV file.
pub fn resolve_material(spec: &str) -> Result<DielectricModel, SpecError> {
    match spec {
        "vacuum" => Ok(DielectricModel::vacuum()),
        "sio2-like" => Ok(DielectricModel::sio2_like()),
        "gold-drude" => Ok(DielectricModel::gold_drude()),
        other => {
            if let Some(rest) = other.strip_prefix("constant:") {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 2 {
                    return Err(SpecError::Usage(format!(
                        "constant material needs `constant:<re>,<im>`, got `{other}`"
                    )));
                }
                let re: f64 = parts[0].trim().parse().map_err(|_| {
                    SpecError::Usage(format!("bad constant ε real part `{}`", parts[0]))
                })?;
                let im: f64 = parts[1].trim().parse().map_err(|_| {
                    SpecError::Usage(format!("bad constant ε imaginary part `{}`", parts[1]))
                })?;
                DielectricModel::constant(re, im)
                    .map_err(|e| SpecError::Usage(format!("invalid constant material: {e}")))
            } else {
                load_tabulated_file(std::path::Path::new(other)).map_err(|e| match e {
                    heatrad::materials::MaterialError::Io(source) => SpecError::Io {
                        path: other.to_string(),
                        source,
                    },
                    other_err => SpecError::Usage(format!("material file rejected: {other_err}")),
                })
            }
        }
    }
}

/// Plate slots additionally accept the ideal `black` surface (r ≡ 0).
pub fn resolve_plate(spec: &str) -> Result<PlateModel, SpecError> {
    if spec == "black" {
        Ok(PlateModel::Black)
    } else {
        Ok(PlateModel::Material(resolve_material(spec)?))
    }
}

fn sphere_options(job: &JobSpec) -> SpherePlateOptions {
    SpherePlateOptions {
        reflections: match job.reflections {
            ReflectionsOpt::One => ReflectionOrder::One,
            ReflectionsOpt::Full => ReflectionOrder::Full,
        },
        l_max: match job.l_max {
            LmaxOpt::Fixed(l) => LmaxMode::Fixed(l),
            LmaxOpt::Auto(_) => LmaxMode::Auto,
        },
        tol: job.tol,
        source_filter: if job.divergent_only {
            SourceFilter::EvanescentE
        } else {
            SourceFilter::All
        },
    }
}

fn lmax_mode(job: &JobSpec) -> LmaxMode {
    match job.l_max {
        LmaxOpt::Fixed(l) => LmaxMode::Fixed(l),
        LmaxOpt::Auto(_) => LmaxMode::Auto,
    }
}

/// Evaluate one grid point.
fn compute_row(job: &JobSpec, value: f64) -> Result<Row, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    match job.command {
        CommandKind::RadiatePlate => {
            let plate = resolve_plate(job.material.as_ref().unwrap()).map_err(|e| err(&e))?;
            let r = radiate_plate(&plate, value, job.tol).map_err(|e| err(&e))?;
            Ok(Row {
                sweep_value: value,
                power: r.power,
                normalized: Some(r.normalized),
                pol_e: Some(r.pol_e),
                pol_m: Some(r.pol_m),
                channel_prop: None,
                channel_evan: None,
                l_max_used: None,
                est_error: r.truncation_error,
            })
        }
        CommandKind::RadiateSphere => {
            let model = resolve_material(job.material.as_ref().unwrap()).map_err(|e| err(&e))?;
            let r = radiate_sphere(
                &model,
                Complex64::ONE,
                value,
                job.temperature.unwrap(),
                job.tol,
            )
            .map_err(|e| err(&e))?;
            Ok(Row {
                sweep_value: value,
                power: r.power,
                normalized: Some(r.normalized),
                pol_e: Some(r.pol_e),
                pol_m: Some(r.pol_m),
                channel_prop: None,
                channel_evan: None,
                l_max_used: Some(r.orders_used),
                est_error: r.truncation_error,
            })
        }
        CommandKind::RadiateCylinder => {
            let model = resolve_material(job.material.as_ref().unwrap()).map_err(|e| err(&e))?;
            let r = radiate_cylinder(&model, value, job.temperature.unwrap(), job.tol)
                .map_err(|e| err(&e))?;
            Ok(Row {
                sweep_value: value,
                power: r.power,
                normalized: Some(r.normalized),
                pol_e: Some(r.pol_e),
                pol_m: Some(r.pol_m),
                channel_prop: None,
                channel_evan: None,
                l_max_used: Some(r.orders_used),
                est_error: r.truncation_error,
            })
        }
        CommandKind::TransferPlates => {
            let p1 = resolve_plate(job.material_1.as_ref().unwrap()).map_err(|e| err(&e))?;
            let p2 = resolve_plate(job.material_2.as_ref().unwrap()).map_err(|e| err(&e))?;
            let (t1, t2) = (job.t1.unwrap(), job.t2.unwrap());
            let r = plate_plate_flux(&p1, &p2, value, t1, t2, job.tol).map_err(|e| err(&e))?;
            let reference = stefan_boltzmann_flux(t1) - stefan_boltzmann_flux(t2);
            Ok(Row {
                sweep_value: value,
                power: r.power,
                normalized: (reference != 0.0).then(|| r.power / reference),
                pol_e: Some(r.pol_e),
                pol_m: Some(r.pol_m),
                channel_prop: Some(r.channel_prop),
                channel_evan: Some(r.channel_evan),
                l_max_used: None,
                est_error: r.quadrature_error,
            })
        }
        CommandKind::TransferSpherePlate => {
            let model_s =
                resolve_material(job.material_sphere.as_ref().unwrap()).map_err(|e| err(&e))?;
            let plate =
                resolve_plate(job.material_plate.as_ref().unwrap()).map_err(|e| err(&e))?;
            let (tp, ts) = (job.t_plate.unwrap(), job.t_sphere.unwrap());
            let radius = if job.sweep.map(|s| s.variable)
                == Some(crate::jobspec::SweepVariable::Radius)
            {
                value
            } else {
                job.radius.unwrap()
            };
            let gap = if job.sweep.map(|s| s.variable) == Some(crate::jobspec::SweepVariable::D)
            {
                value
            } else {
                job.gap.unwrap()
            };
            let r = sphere_plate_transfer(
                &model_s,
                &plate,
                Complex64::ONE,
                radius,
                gap,
                tp,
                ts,
                &sphere_options(job),
            )
            .map_err(|e| err(&e))?;
            let reference = (stefan_boltzmann_flux(tp) - stefan_boltzmann_flux(ts))
                * 2.0
                * std::f64::consts::PI
                * radius
                * radius;
            Ok(Row {
                sweep_value: value,
                power: r.power,
                normalized: (reference != 0.0).then(|| r.power / reference),
                pol_e: Some(r.pol_e),
                pol_m: Some(r.pol_m),
                channel_prop: Some(r.channel_prop),
                channel_evan: Some(r.channel_evan),
                l_max_used: Some(r.l_max_used),
                est_error: r.truncation_error.max(r.quadrature_error / r.power.abs().max(f64::MIN_POSITIVE)),
            })
        }
        CommandKind::Pta => {
            let model_s =
                resolve_material(job.material_sphere.as_ref().unwrap()).map_err(|e| err(&e))?;
            let plate =
                resolve_plate(job.material_plate.as_ref().unwrap()).map_err(|e| err(&e))?;
            let (tp, ts) = (job.t_plate.unwrap(), job.t_sphere.unwrap());
            let radius = if job.sweep.map(|s| s.variable)
                == Some(crate::jobspec::SweepVariable::Radius)
            {
                value
            } else {
                job.radius.unwrap()
            };
            let gap = if job.sweep.map(|s| s.variable) == Some(crate::jobspec::SweepVariable::D)
            {
                value
            } else {
                job.gap.unwrap()
            };
            let power = if job.divergent_only {
                divergent_term_ratio(&model_s, &plate, radius, gap, tp, lmax_mode(job), job.tol)
                    .map_err(|e| err(&e))?
                    .1
            } else {
                pta_transfer(&model_s, &plate, radius, gap, tp, ts, job.tol)
                    .map_err(|e| err(&e))?
            };
            let reference = (stefan_boltzmann_flux(tp) - stefan_boltzmann_flux(ts))
                * 2.0
                * std::f64::consts::PI
                * radius
                * radius;
            Ok(Row {
                sweep_value: value,
                power,
                normalized: (reference != 0.0).then(|| power / reference),
                pol_e: None,
                pol_m: None,
                channel_prop: None,
                channel_evan: None,
                l_max_used: None,
                est_error: job.tol,
            })
        }
        CommandKind::LargeD => {
            let model_s =
                resolve_material(job.material_sphere.as_ref().unwrap()).map_err(|e| err(&e))?;
            let plate =
                resolve_plate(job.material_plate.as_ref().unwrap()).map_err(|e| err(&e))?;
            let tp = job.t_plate.unwrap();
            let power = sphere_plate_large_d(&model_s, &plate, Complex64::ONE, value, tp, job.tol)
                .map_err(|e| err(&e))?;
            let reference =
                stefan_boltzmann_flux(tp) * 2.0 * std::f64::consts::PI * value * value;
            Ok(Row {
                sweep_value: value,
                power,
                normalized: (reference != 0.0).then(|| power / reference),
                pol_e: None,
                pol_m: None,
                channel_prop: None,
                channel_evan: None,
                l_max_used: None,
                est_error: job.tol,
            })
        }
    }
}

/// Execute every grid point (concurrently up to `jobs`), preserving grid
/// order in the output. Returns the rows computed before the first failure
/// together with that failure, if any.
pub fn run_grid(job: &JobSpec) -> (Vec<Row>, Option<RunError>) {
    let grid = job.grid();
    let column = job.sweep_column();

    let compute_all = || -> Vec<Result<Row, String>> {
        grid.par_iter().map(|&v| compute_row(job, v)).collect()
    };
    let results: Vec<Result<Row, String>> = match job.jobs {
        Some(n) if n >= 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool");
            pool.install(compute_all)
        }
        _ => compute_all(),
    };

    let mut rows = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(row) => rows.push(row),
            Err(detail) => {
                return (
                    rows,
                    Some(RunError::Computation {
                        index: i,
                        column,
                        value: grid[i],
                        detail,
                    }),
                )
            }
        }
    }
    (rows, None)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Render rows as the canonical CSV, bit-exact given identical inputs.
pub fn to_csv(job: &JobSpec, rows: &[Row]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{},power,normalized,pol_E,pol_M,channel_prop,channel_evan,l_max_used,est_error\n",
        job.sweep_column()
    ));
    for row in rows {
        out.push_str(&format!(
            "{:e},{:e},{},{},{},{},{},{},{:e}\n",
            row.sweep_value,
            row.power,
            fmt_opt(row.normalized),
            fmt_opt(row.pol_e),
            fmt_opt(row.pol_m),
            fmt_opt(row.channel_prop),
            fmt_opt(row.channel_evan),
            row.l_max_used.map(|v| v.to_string()).unwrap_or_default(),
            row.est_error,
        ));
    }
    out
}

/// Render rows plus the echoed job and library version as JSON.
pub fn to_json(job: &JobSpec, rows: &[Row]) -> String {
    #[derive(Serialize)]
    struct Output<'a> {
        version: &'static str,
        jobspec: &'a JobSpec,
        rows: &'a [Row],
    }
    serde_json::to_string_pretty(&Output {
        version: env!("CARGO_PKG_VERSION"),
        jobspec: job,
        rows,
    })
    .expect("serializable output")
}

/// Resolve every referenced material once up front so missing files and
/// malformed specifications surface with their proper exit codes before any
/// computation starts. Plate slots admit `black`; bodies do not.
fn preflight_materials(job: &JobSpec) -> Result<(), SpecError> {
    if let Some(spec) = &job.material {
        if job.command == CommandKind::RadiatePlate {
            resolve_plate(spec)?;
        } else {
            resolve_material(spec)?;
        }
    }
    for spec in [&job.material_1, &job.material_2, &job.material_plate]
        .into_iter()
        .flatten()
    {
        resolve_plate(spec)?;
    }
    if let Some(spec) = &job.material_sphere {
        resolve_material(spec)?;
    }
    Ok(())
}

/// Full execution: compute, serialize, write to the requested sink.
/// Partial results are flushed before a computation error is reported.
pub fn execute(job: &JobSpec) -> Result<(), RunError> {
    job.validate()?;
    preflight_materials(job)?;
    let (rows, failure) = run_grid(job);
    let body = match job.format {
        OutputFormat::Csv => to_csv(job, &rows),
        OutputFormat::Json => to_json(job, &rows),
    };
    match &job.output {
        Some(path) => {
            std::fs::write(path, body).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
        }
        None => {
            print!("{body}");
        }
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
