use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use npnkit::plan::CampaignPlan;
use npnkit::FusedSample;
use npnkit_cli::commands::{self, Format};
use npnkit_cli::output::{write_atomic, Manifest, Outputs};
use npnkit_cli::scenario::{resolve_limit, sha256_hex, LoadedScenario};
use npnkit_cli::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "npnkit", version, about = "UAV emission assessment for indoor private 5G networks")]
struct Cli {
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Encoding of heatmaps and fused samples.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Only evaluate samples within 1 m of the limit's evaluation height.
    #[arg(long, global = true)]
    strict_height: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate scanner and telemetry logs for every planned flight.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the campaign plan as JSON.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuse one scanner log with its telemetry log.
    Fuse {
        #[arg(long)]
        scanner: PathBuf,
        #[arg(long)]
        telemetry: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Plan JSON; rebuilt from the scenario when omitted.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Scanner-minus-drone clock offset in seconds; estimated when omitted.
        #[arg(long, allow_negative_numbers = true)]
        offset: Option<f64>,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Heatmaps, per-flight CDFs and the path-loss regression.
    Analyze {
        /// Fused CSV files, one per flight.
        #[arg(long, num_args = 1.., required = true)]
        fused: Vec<PathBuf>,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check fused samples against a regulatory limit.
    Comply {
        #[arg(long, num_args = 1.., required = true)]
        fused: Vec<PathBuf>,
        /// Preset name (germany, ofcom) or limit JSON file.
        #[arg(long)]
        limit: String,
        #[arg(long)]
        scenario: PathBuf,
        /// Output file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run simulate, fuse, analyze and comply end to end.
    Campaign {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_text(path: &Path, stage: &'static str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::new(stage, format!("{}: {e}", path.display())))
}

fn load_plan(path: Option<&Path>, sc: &LoadedScenario) -> CliResult<CampaignPlan> {
    let Some(path) = path else { return commands::cmd_plan(sc) };
    let plan: CampaignPlan = serde_json::from_str(&read_text(path, "plan")?)
        .map_err(|e| CliError::new("plan", format!("{}: {e}", path.display())))?;
    plan.validate().map_err(|e| CliError::new("plan", e))?;
    Ok(plan)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn json_bytes<T: serde::Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::new("output", e))?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { scenario, out } => {
            let sc = LoadedScenario::load(&scenario, cli.seed)?;
            let mut files = commands::cmd_simulate(&sc)?;
            let mut m = Manifest::new("simulate", Some(sc.file.seed));
            m.input("scenario", &sc.file_name(), Some(sc.sha256.clone()));
            m.seal(&mut files)?;
            files.write_all(&out)
        }
        Command::Plan { scenario, out } => {
            let sc = LoadedScenario::load(&scenario, cli.seed)?;
            write_atomic(&out, &json_bytes(&commands::cmd_plan(&sc)?)?)
        }
        Command::Fuse { scanner, telemetry, scenario, plan, offset, out } => {
            let sc = LoadedScenario::load(&scenario, cli.seed)?;
            let plan = load_plan(plan.as_deref(), &sc)?;
            let o = commands::fuse_logs(
                &read_text(&scanner, "fuse")?,
                &read_text(&telemetry, "fuse")?,
                &sc.file.origin,
                &plan.routes,
                &sc.file.emission.bs_pos,
                &sc.file.fusion,
                offset,
            )?;
            log::info!("offset {:+.2} s, kept {}/{}", o.offset_s, o.kept, o.scanner_records);
            write_atomic(&out, &commands::encode_fused(&o.samples, cli.format)?)
        }
        Command::Analyze { fused, scenario, plan, out } => {
            let sc = LoadedScenario::load(&scenario, cli.seed)?;
            let plan = load_plan(plan.as_deref(), &sc)?;
            let mut m = Manifest::new("analyze", None);
            m.input("scenario", &sc.file_name(), Some(sc.sha256.clone()));
            let mut flights = Vec::new();
            for path in &fused {
                let text = read_text(path, "analyze")?;
                m.input("fused", &stem(path), Some(sha256_hex(text.as_bytes())));
                flights.push(commands::read_fused(&stem(path), &text)?);
            }
            let mut files: Outputs =
                commands::analyze(&flights, &plan, &sc.file.analysis, &sc.file.fit_settings(), &sc.file.origin, cli.format)?;
            m.seal(&mut files)?;
            files.write_all(&out)
        }
        Command::Comply { fused, limit, scenario, out } => {
            let sc = LoadedScenario::load(&scenario, cli.seed)?;
            let limit = resolve_limit(&limit, Path::new("."))?;
            let mut samples: Vec<FusedSample> = Vec::new();
            for path in &fused {
                samples.extend(commands::read_fused(&stem(path), &read_text(path, "comply")?)?.samples);
            }
            let report = commands::cmd_comply(&samples, &limit, &commands::compliance_setup(&sc, cli.strict_height))?;
            write_atomic(&out, &json_bytes(&report)?)
        }
        Command::Campaign { scenario, out } => {
            let sc = LoadedScenario::load(&scenario, cli.seed)?;
            commands::cmd_campaign(&sc, cli.format, cli.strict_height)?.write_all(&out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NPNKIT_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
