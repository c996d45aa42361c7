//! Command-line driver: every subcommand assembles a one-step pipeline
//! (or runs the scenario's own) and defers to the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kuratlas::report::{emit_report, Report, ReportFormat};
use kuratlas::scenario::{
    run_spec, DarbouxSpec, Overrides, PipelineStep, PointSpec, ScenarioError, ScenarioSpec,
};

#[derive(Parser)]
#[command(
    name = "kuratlas",
    about = "Validate shifted-symplectic local models and their Kuranishi atlas data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Floating tolerance override.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Seed override for randomized sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid spacing override.
    #[arg(long)]
    grid: Option<f64>,
    /// Output format: text or json.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every pipeline declared in a scenario file.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Build the literal intersection form of the C-family.
        #[arg(long)]
        literal_intersection: bool,
    },
    /// Check the defining identities of a Darboux model.
    ValidateDarboux {
        #[command(flatten)]
        common: CommonArgs,
        /// Model id within the scenario.
        #[arg(long)]
        model: Option<String>,
        /// Standalone model file (a single darboux object).
        #[arg(long)]
        model_file: Option<PathBuf>,
    },
    /// Pointwise tangent-complex cohomology at a zero.
    TangentReport {
        #[command(flatten)]
        common: CommonArgs,
        /// Model id, or a standalone model file via --model-file.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        model_file: Option<PathBuf>,
        /// Point as comma-separated rationals, interleaved re,im.
        #[arg(long)]
        point: String,
        /// Use the model's declared relative submersion.
        #[arg(long)]
        relative: bool,
    },
    /// Condition (*) for a frame at a zero.
    CheckStar {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        model: String,
        #[arg(long)]
        frame: String,
        #[arg(long)]
        point: String,
    },
    /// Build the reduced pair (E⁺, s⁺).
    Reduce {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        model: String,
        #[arg(long)]
        frame: String,
    },
    /// Sample condition (†) over the chart domain.
    CheckDagger {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        model: String,
        #[arg(long)]
        frame: String,
        /// Random sample count (requires a seed).
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Validate the atlas block of a scenario.
    AtlasCheck {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Build shrinking chains and the closed family on the space block.
    Cover {
        #[command(flatten)]
        common: CommonArgs,
        /// Build the literal intersection form instead of the union form.
        #[arg(long)]
        literal_intersection: bool,
    },
    /// Signed zero count of a vdim-0 reduction.
    Count {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        model: String,
        #[arg(long)]
        frame: String,
        /// Winding radius for degenerate zeros.
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        /// Perturb paired sections by ε·x₁ before counting.
        #[arg(long, allow_negative_numbers = true)]
        perturb: Option<f64>,
        /// Expected count (the step fails when it disagrees).
        #[arg(long, allow_negative_numbers = true)]
        expect: Option<i64>,
    },
}

fn parse_format(s: &Option<String>) -> Result<Option<ReportFormat>, String> {
    match s.as_deref() {
        None => Ok(None),
        Some("text") => Ok(Some(ReportFormat::Text)),
        Some("json") => Ok(Some(ReportFormat::Json)),
        Some(other) => Err(format!("unknown format {other:?} (use text or json)")),
    }
}

fn overrides_from(common: &CommonArgs, literal: Option<bool>) -> Result<Overrides, String> {
    Ok(Overrides {
        tolerance: common.tolerance,
        seed: common.seed,
        grid: common.grid,
        format: parse_format(&common.format)?,
        literal_intersection: literal,
    })
}

/// Comma-separated rationals, interleaved re,im per complex coordinate.
fn parse_point_arg(s: &str) -> Result<PointSpec, String> {
    let parts: Vec<&str> = s.split(',').map(|p| p.trim()).collect();
    if parts.len() % 2 != 0 {
        return Err("point needs an even number of entries (re,im pairs)".into());
    }
    Ok(parts
        .chunks(2)
        .map(|c| [c[0].to_string(), c[1].to_string()])
        .collect())
}

fn load_scenario(path: &Option<PathBuf>) -> Result<ScenarioSpec, ScenarioError> {
    let Some(path) = path else {
        return Err(ScenarioError::Parse("--scenario is required".into()));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Parse(format!("{}: {}", path.display(), e)))?;
    serde_json::from_str(&text).map_err(|e| ScenarioError::Parse(e.to_string()))
}

/// Either load the scenario or wrap a standalone model file in an empty
/// one, returning the effective model id.
fn scenario_with_model(
    common: &CommonArgs,
    model: &Option<String>,
    model_file: &Option<PathBuf>,
) -> Result<(ScenarioSpec, String), ScenarioError> {
    match (model_file, model) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ScenarioError::Parse(format!("{}: {}", path.display(), e)))?;
            let spec: DarbouxSpec =
                serde_json::from_str(&text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
            let id = spec.id.clone();
            let scenario = ScenarioSpec {
                version: 1,
                config: Default::default(),
                darboux: vec![spec],
                frames: Default::default(),
                space: None,
                cover: None,
                atlas: None,
                orientation: None,
                pipelines: Vec::new(),
            };
            Ok((scenario, id))
        }
        (None, Some(id)) => {
            let spec = load_scenario(&common.scenario)?;
            Ok((spec, id.clone()))
        }
        (None, None) => Err(ScenarioError::Parse(
            "provide --model (with --scenario) or --model-file".into(),
        )),
    }
}

fn run(spec: &ScenarioSpec, overrides: &Overrides) -> ExitCode {
    match run_spec(spec, overrides) {
        Ok((report, format)) => {
            print!("{}", emit_report(&report, format));
            code_from_report(&report)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn code_from_report(report: &Report) -> ExitCode {
    ExitCode::from(report.exit_code() as u8)
}

fn scenario_or_exit(common: &CommonArgs) -> Result<ScenarioSpec, ExitCode> {
    load_scenario(&common.scenario).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<ExitCode, String> = (|| {
        let code = match &cli.command {
            Command::Run {
                common,
                literal_intersection,
            } => {
                let overrides = overrides_from(common, Some(*literal_intersection))?;
                match scenario_or_exit(common) {
                    Ok(spec) => run(&spec, &overrides),
                    Err(code) => code,
                }
            }
            Command::ValidateDarboux {
                common,
                model,
                model_file,
            } => {
                let overrides = overrides_from(common, None)?;
                match scenario_with_model(common, model, model_file) {
                    Ok((mut spec, id)) => {
                        spec.pipelines = vec![PipelineStep::ValidateDarboux { model: id }];
                        run(&spec, &overrides)
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        ExitCode::from(2)
                    }
                }
            }
            Command::TangentReport {
                common,
                model,
                model_file,
                point,
                relative,
            } => {
                let overrides = overrides_from(common, None)?;
                let point = parse_point_arg(point)?;
                match scenario_with_model(common, model, model_file) {
                    Ok((mut spec, id)) => {
                        spec.pipelines = vec![PipelineStep::TangentReport {
                            model: id,
                            point,
                            relative: if *relative { Some(Vec::new()) } else { None },
                        }];
                        run(&spec, &overrides)
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        ExitCode::from(2)
                    }
                }
            }
            Command::CheckStar {
                common,
                model,
                frame,
                point,
            } => {
                let overrides = overrides_from(common, None)?;
                let point = parse_point_arg(point)?;
                match scenario_or_exit(common) {
                    Ok(mut spec) => {
                        spec.pipelines = vec![PipelineStep::CheckStar {
                            model: model.clone(),
                            frame: frame.clone(),
                            point,
                        }];
                        run(&spec, &overrides)
                    }
                    Err(code) => code,
                }
            }
            Command::Reduce {
                common,
                model,
                frame,
            } => {
                let overrides = overrides_from(common, None)?;
                match scenario_or_exit(common) {
                    Ok(mut spec) => {
                        spec.pipelines = vec![PipelineStep::Reduce {
                            model: model.clone(),
                            frame: frame.clone(),
                        }];
                        run(&spec, &overrides)
                    }
                    Err(code) => code,
                }
            }
            Command::CheckDagger {
                common,
                model,
                frame,
                samples,
            } => {
                let overrides = overrides_from(common, None)?;
                match scenario_or_exit(common) {
                    Ok(mut spec) => {
                        spec.pipelines = vec![PipelineStep::CheckDagger {
                            model: model.clone(),
                            frame: frame.clone(),
                            grid: common.grid,
                            samples: *samples,
                        }];
                        run(&spec, &overrides)
                    }
                    Err(code) => code,
                }
            }
            Command::AtlasCheck { common } => {
                let overrides = overrides_from(common, None)?;
                match scenario_or_exit(common) {
                    Ok(mut spec) => {
                        spec.pipelines = vec![PipelineStep::AtlasCheck {}];
                        run(&spec, &overrides)
                    }
                    Err(code) => code,
                }
            }
            Command::Cover {
                common,
                literal_intersection,
            } => {
                let overrides = overrides_from(common, Some(*literal_intersection))?;
                match scenario_or_exit(common) {
                    Ok(mut spec) => {
                        spec.pipelines = vec![PipelineStep::Cover {
                            literal_intersection: Some(*literal_intersection),
                        }];
                        run(&spec, &overrides)
                    }
                    Err(code) => code,
                }
            }
            Command::Count {
                common,
                model,
                frame,
                radius,
                perturb,
                expect,
            } => {
                let overrides = overrides_from(common, None)?;
                match scenario_or_exit(common) {
                    Ok(mut spec) => {
                        spec.pipelines = vec![PipelineStep::Count {
                            model: model.clone(),
                            frame: frame.clone(),
                            radius: *radius,
                            grid: common.grid,
                            expect: *expect,
                            perturb: *perturb,
                        }];
                        run(&spec, &overrides)
                    }
                    Err(code) => code,
                }
            }
        };
        Ok(code)
    })();
    match outcome {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
