use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use circled_core::implicit::{certify_degree, DEFAULT_SEED};
use circled_core::lattice::{p3_chain, s3_chain};
use circled_core::mesh::curves_to_json;
use circled_core::topology::project_circle;
use circled_core::verify::{self, Fault, Group, VerifyOptions};
use circled_core::{classify, CircleSpec, Error, Preset, ProductSurface, Projection, RationalCircleParam, Side};

const DEFAULT_NU: usize = 128;
const DEFAULT_NV: usize = 128;
const DEFAULT_DMAX: u32 = 8;
const CURVE_SAMPLES: usize = 512;

#[derive(Parser)]
#[command(name = "circled", version, about = "Surfaces in S³ swept by products of circles")]
struct Cli {
    /// TOML file with defaults for seed, nu, nv, dmax, project and format; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Great type I/II/III of a great circle times a small circle.
    Classify {
        /// Great circle: preset name or JSON circle spec.
        #[arg(long)]
        left: String,
        /// Small circle: preset name or JSON circle spec.
        #[arg(long)]
        right: String,
    },
    /// Sample the projected surface on a closed grid.
    Mesh {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        nu: Option<usize>,
        #[arg(long)]
        nv: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Certified implicit equation of the projected surface.
    Implicitize {
        #[command(flatten)]
        surface: SurfaceArgs,
        #[arg(long)]
        dmax: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Delta invariant bookkeeping in S³ and ℙ³.
    Lattice {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the verification battery and report as JSON.
    Verify {
        /// Check group to skip (`exact` or `float`); repeatable.
        #[arg(long)]
        skip: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Corrupt a preset before running, to exercise failure reporting.
        #[arg(long, hide = true)]
        corrupt: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Project a circle, or with `--right` the double curve of the product.
    Project {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: Option<String>,
        #[arg(long, default_value = "left_times_right")]
        side: String,
        #[arg(long)]
        project: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(long)]
    left: String,
    #[arg(long)]
    right: String,
    /// `left_times_right` or `right_times_left`.
    #[arg(long, default_value = "left_times_right")]
    side: String,
    /// `stereo:default`, `stereo:w,x,y,z` or `central`.
    #[arg(long)]
    project: Option<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Obj,
    Ply,
    Json,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    seed: Option<u64>,
    nu: Option<usize>,
    nv: Option<usize>,
    dmax: Option<u32>,
    project: Option<String>,
    format: Option<Format>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("verification failed")]
    Failed,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if is_input_error(e) => 2,
            _ => 1,
        }
    }
}

/// Errors caused by the arguments rather than by a failed computation.
fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse(_)
            | Error::UnknownPreset(_)
            | Error::InvalidCircle(_)
            | Error::NotUnit(_)
            | Error::NotGreat
            | Error::BothSmall
            | Error::CliffordTorus
            | Error::CenterOnSurface(_)
            | Error::Resolution(_)
            | Error::DegenerateProduct
            | Error::NotApplicable(_)
    )
}

type Result<T> = std::result::Result<T, CliError>;

fn load_config(path: Option<&Path>) -> Result<Config> {
    let Some(path) = path else { return Ok(Config::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn circle(spec: &str) -> Result<RationalCircleParam> {
    Ok(CircleSpec::parse(spec)?.to_param()?)
}

fn projection(flag: Option<&str>, config: &Config) -> Result<Projection> {
    Ok(flag.or(config.project.as_deref()).unwrap_or("stereo:default").parse()?)
}

fn surface(args: &SurfaceArgs) -> Result<ProductSurface> {
    let side: Side = args.side.parse()?;
    Ok(ProductSurface::build(circle(&args.left)?, circle(&args.right)?, side)?)
}

fn format_for(output: &OutputArgs, config: &Config, fallback: Format) -> Format {
    output
        .format
        .or_else(|| {
            let ext = output.out.as_ref()?.extension()?.to_str()?;
            match ext {
                "obj" => Some(Format::Obj),
                "ply" => Some(Format::Ply),
                "json" => Some(Format::Json),
                _ => None,
            }
        })
        .or(config.format)
        .unwrap_or(fallback)
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(output: &OutputArgs, value: &serde_json::Value) -> Result<()> {
    let mut w = writer(output.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn json_only(output: &OutputArgs, config: &Config) -> Result<()> {
    match format_for(output, config, Format::Json) {
        Format::Json => Ok(()),
        f => Err(CliError::Usage(format!("format {f:?} is only available for `mesh`").to_lowercase())),
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Classify { left, right } => {
            let c = classify(&circle(&left)?, &circle(&right)?)?;
            println!("{}", serde_json::to_string_pretty(&c).map_err(io::Error::from)?);
        }
        Command::Mesh { surface: s, nu, nv, output } => {
            let proj = projection(s.project.as_deref(), &config)?;
            let nu = nu.or(config.nu).unwrap_or(DEFAULT_NU);
            let nv = nv.or(config.nv).unwrap_or(DEFAULT_NV);
            let mesh = surface(&s)?.sample_grid(nu, nv, &proj)?;
            match format_for(&output, &config, Format::Obj) {
                Format::Json => emit_json(&output, &serde_json::to_value(&mesh).map_err(io::Error::from)?)?,
                f => {
                    let mut w = writer(output.out.as_deref())?;
                    if f == Format::Obj {
                        mesh.write_obj(&mut w)?;
                    } else {
                        mesh.write_ply(&mut w)?;
                    }
                    w.flush()?;
                }
            }
        }
        Command::Implicitize { surface: s, dmax, seed, output } => {
            json_only(&output, &config)?;
            let proj = projection(s.project.as_deref(), &config)?;
            let dmax = dmax.or(config.dmax).unwrap_or(DEFAULT_DMAX);
            let seed = seed.or(config.seed).unwrap_or(DEFAULT_SEED);
            let cert = certify_degree(&surface(&s)?, &proj, dmax, seed)?;
            let value = json!({
                "type": "implicit",
                "projection": proj.to_string(),
                "degree": cert.degree,
                "kernel_dim": cert.kernel_dim,
                "kernel_dims": cert.kernel_dims,
                "fresh_samples": cert.fresh_samples,
                "seed": cert.seed,
                "terms": cert.poly.terms(),
                "poly": cert.poly.to_json(),
            });
            emit_json(&output, &value)?;
        }
        Command::Lattice { output } => {
            let chains = [s3_chain(), p3_chain()];
            if output.format == Some(Format::Json) {
                emit_json(&output, &serde_json::to_value(&chains).map_err(io::Error::from)?)?;
            } else {
                let mut w = writer(output.out.as_deref())?;
                for c in &chains {
                    writeln!(w, "{}", c.equation())?;
                }
                w.flush()?;
            }
            if !chains.iter().all(|c| c.balances()) {
                return Err(CliError::Failed);
            }
        }
        Command::Verify { skip, seed, corrupt, output } => {
            json_only(&output, &config)?;
            let skip: BTreeSet<Group> = skip.iter().map(|s| s.parse()).collect::<std::result::Result<_, _>>()?;
            let fault = corrupt.map(|p| p.parse::<Preset>().map(Fault::CorruptPreset)).transpose()?;
            let opts = VerifyOptions { skip, seed: seed.or(config.seed).unwrap_or(DEFAULT_SEED), fault };
            let report = verify::run(&opts);
            emit_json(&output, &serde_json::to_value(&report).map_err(io::Error::from)?)?;
            for c in report.failures() {
                eprintln!("FAIL {}::{} {} = {}", c.module, c.op, c.name, c.value);
            }
            eprintln!(
                "{} of {} checks pass{}",
                report.checks.iter().filter(|c| c.pass).count(),
                report.checks.len(),
                if report.partial { " (partial)" } else { "" }
            );
            if !report.passed() {
                return Err(CliError::Failed);
            }
        }
        Command::Project { left, right, side, project, output } => {
            json_only(&output, &config)?;
            let proj = projection(project.as_deref(), &config)?;
            let value = match right {
                None => {
                    let curve = project_circle(&circle(&left)?, &proj, CURVE_SAMPLES)?;
                    json!({ "type": "circle", "projection": proj.to_string(), "curves": curves_to_json(&[curve]) })
                }
                Some(right) => {
                    let s = surface(&SurfaceArgs { left, right, side, project: None })?;
                    let curves = s.double_curve(&proj)?;
                    json!({ "type": "double_curve", "projection": proj.to_string(), "curves": curves_to_json(&curves) })
                }
            };
            emit_json(&output, &value)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
