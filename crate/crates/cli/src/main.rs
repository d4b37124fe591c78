use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gtprob::harness::{
    emit_report, ingest_forecast_stream, run_experiment, verify_stream, ExperimentConfig, ExperimentKind,
    ForecasterKind, OutputFormat, RealityKind, Report, ReportBody, ScepticKind, SpaceSpec, VerdictBasis,
};

#[derive(Parser)]
#[command(name = "gtprob", version, about = "Test forecasts by betting against them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one session and report the capital.
    Simulate {
        #[arg(long, value_enum, default_value_t = Protocol::OneStep)]
        protocol: Protocol,
        #[command(flatten)]
        common: Common,
    },
    /// Re-test a recorded CSV forecast stream.
    Verify {
        /// CSV with header `step,p_<label>,…,outcome`.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo estimate of Pr{max K ≥ c} under honest forecasts.
    Ville {
        /// Capital level c; repeatable.
        #[arg(long = "threshold", default_values_t = [10.0, 100.0])]
        thresholds: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a forcing certificate exhaustively over binary paths.
    Certify {
        #[command(flatten)]
        common: Common,
    },
    /// Regret tail of Bayes decisions against fixed alternatives.
    Regret {
        /// Window length K of the loss.
        #[arg(long, default_value_t = 1)]
        window: usize,
        /// Alternative strategy; repeatable.
        #[arg(long = "alternative")]
        alternatives: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment described by a JSON configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Protocol {
    OneStep,
    Team,
    Tracking,
    Market,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Verdict {
    Max,
    Final,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    paths: usize,
    /// `binary`, `numeric:<m>`, `labels:<a>,<b>,…` or `classical[:<m>,…]`.
    #[arg(long, default_value = "binary")]
    space: String,
    /// `vacuous`, `random-bet`, `laplace`, `kolmogorov`, `zero`, `team` or `tracking`.
    #[arg(long)]
    strategy: Option<String>,
    /// `uniform`, `fixed:<p>,…`, `random`, `perturbed:<s>`, `classical` or `daltonism`.
    #[arg(long, default_value = "uniform")]
    forecaster: String,
    #[arg(long)]
    second_forecaster: Option<String>,
    /// `honest`, `constant:<index>` or `biased:<p>,…`.
    #[arg(long, default_value = "honest")]
    reality: String,
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    /// Regret tail level; repeatable.
    #[arg(long = "epsilon")]
    epsilons: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Verdict::Max)]
    verdict: Verdict,
    /// Report path; JSON goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl Common {
    fn config(&self, kind: ExperimentKind, default_strategy: ScepticKind) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::new(kind, self.seed, self.steps);
        c.paths = self.paths;
        c.space = self.space.parse::<SpaceSpec>()?;
        c.forecaster = self.forecaster.parse::<ForecasterKind>()?;
        c.second_forecaster = self
            .second_forecaster
            .as_deref()
            .map(str::parse::<ForecasterKind>)
            .transpose()?;
        c.sceptic = match &self.strategy {
            Some(s) => s.parse::<ScepticKind>()?,
            None => default_strategy,
        };
        c.reality = self.reality.parse::<RealityKind>()?;
        c.delta = self.delta;
        if !self.epsilons.is_empty() {
            c.epsilons = self.epsilons.clone();
        }
        c.verdict = match self.verdict {
            Verdict::Max => VerdictBasis::Max,
            Verdict::Final => VerdictBasis::Final,
        };
        Ok(c)
    }
}

fn emit(report: &Report, out: Option<&PathBuf>, format: Format) -> Result<()> {
    let format = match format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    match out {
        Some(path) => {
            for p in emit_report(report, path, format)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None if format == OutputFormat::Json => println!("{}", report.to_json()?),
        None => bail!("--format csv needs --out"),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (report, out, format) = match cli.command {
        Command::Simulate { protocol, common } => {
            let (kind, default) = match protocol {
                Protocol::OneStep => (ExperimentKind::Session, ScepticKind::Laplace),
                Protocol::Team => (ExperimentKind::Team, ScepticKind::Team),
                Protocol::Tracking => (ExperimentKind::Tracking, ScepticKind::Tracking),
                Protocol::Market => (ExperimentKind::Market, ScepticKind::Vacuous),
            };
            let mut c = common.config(kind, default)?;
            if matches!(protocol, Protocol::Team | Protocol::Tracking) && c.second_forecaster.is_none() {
                c.second_forecaster = Some(ForecasterKind::Perturbed(0.3));
            }
            (run_experiment(&c)?, common.out, common.format)
        }
        Command::Verify { input, common } => {
            let mut c = common.config(ExperimentKind::Session, ScepticKind::Laplace)?;
            let declared = (common.space != "binary").then(|| c.build_space()).transpose()?;
            let stream = ingest_forecast_stream(&input, declared.as_ref())
                .with_context(|| format!("reading {}", input.display()))?;
            let labels = stream.space.labels().to_vec();
            c.space = SpaceSpec::Labels(labels);
            (
                verify_stream(&stream, &c, &input.display().to_string())?,
                common.out,
                common.format,
            )
        }
        Command::Ville { thresholds, common } => {
            let mut c = common.config(ExperimentKind::Ville, ScepticKind::Team)?;
            c.thresholds = thresholds;
            if c.sceptic == ScepticKind::Team && c.second_forecaster.is_none() {
                c.second_forecaster = Some(ForecasterKind::Perturbed(0.3));
            }
            (run_experiment(&c)?, common.out, common.format)
        }
        Command::Certify { common } => {
            let c = common.config(ExperimentKind::Certificate, ScepticKind::Kolmogorov)?;
            let report = run_experiment(&c)?;
            (report, common.out, common.format)
        }
        Command::Regret {
            window,
            alternatives,
            common,
        } => {
            let mut c = common.config(ExperimentKind::Regret, ScepticKind::Vacuous)?;
            c.window = window;
            if !alternatives.is_empty() {
                c.alternatives = alternatives;
            }
            (run_experiment(&c)?, common.out, common.format)
        }
        Command::Run { config, out, format } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            (run_experiment(&ExperimentConfig::from_json(&text)?)?, out, format)
        }
    };
    emit(&report, out.as_ref(), format)?;
    let failed = match &report.result {
        ReportBody::Certificate(c) => !c.holds,
        ReportBody::Ville(v) => v.any_violation(),
        ReportBody::Regret(r) => !r.all_respected(),
        _ => false,
    };
    if failed {
        std::process::exit(2);
    }
    Ok(())
}
