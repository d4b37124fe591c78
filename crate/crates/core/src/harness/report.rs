//! JSON reports and plot-ready CSV trajectories.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::certificate::Certificate;
use super::config::{ExperimentConfig, VerdictBasis};
use super::ville::VilleReport;
use crate::decision::RegretReport;
use crate::error::{Error, Result};
use crate::futures::{settlement_decomposition, MarketTranscript, SettlementDecomposition};
use crate::protocol::{jeffreys_verdict, CapitalProcess, EvidenceVerdict, SessionMeta, Transcript};
use crate::sceptics::{geometric_identity, DualTranscript, TrackingTranscript};

pub const SCHEMA_VERSION: u32 = 1;

/// `(n, K_n, ln K_n)`.
pub type TrajectoryPoint = (usize, f64, f64);

pub fn trajectory(capital: &CapitalProcess) -> Vec<TrajectoryPoint> {
    capital
        .values()
        .iter()
        .zip(capital.log_values())
        .enumerate()
        .map(|(n, (&k, &l))| (n, k, l))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceReport {
    pub stream_id: String,
    pub final_capital: f64,
    pub max_capital: f64,
    pub verdict_basis: VerdictBasis,
    pub verdict: EvidenceVerdict,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl EvidenceReport {
    pub fn new(stream_id: impl Into<String>, capital: &CapitalProcess, basis: VerdictBasis) -> Result<Self> {
        let k = match basis {
            VerdictBasis::Max => capital.running_max(),
            VerdictBasis::Final => capital.current(),
        };
        Ok(Self {
            stream_id: stream_id.into(),
            final_capital: capital.current(),
            max_capital: capital.running_max(),
            verdict_basis: basis,
            verdict: jeffreys_verdict(k)?,
            trajectory: trajectory(capital),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaReport {
    pub seed: u64,
    pub forecaster: String,
    pub sceptic: String,
    pub reality: String,
    pub bankrupt_at: Option<usize>,
    pub warnings: Vec<String>,
}

impl From<&SessionMeta> for MetaReport {
    fn from(m: &SessionMeta) -> Self {
        Self {
            seed: m.seed,
            forecaster: m.forecaster.clone(),
            sceptic: m.sceptic.clone(),
            reality: m.reality.clone(),
            bankrupt_at: m.bankrupt_at,
            warnings: m.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub meta: MetaReport,
    pub n_steps: usize,
    pub evidence: EvidenceReport,
}

impl SessionReport {
    pub fn new(t: &Transcript, stream_id: &str, basis: VerdictBasis) -> Result<Self> {
        Ok(Self {
            meta: (&t.meta).into(),
            n_steps: t.steps.len(),
            evidence: EvidenceReport::new(stream_id, &t.capital, basis)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeamReport {
    pub meta: MetaReport,
    pub n_steps: usize,
    pub evidence_1: EvidenceReport,
    pub evidence_2: EvidenceReport,
    /// `H(P¹_n, P²_n)` per step.
    pub hellinger_integrals: Vec<f64>,
    /// `max_n |ln √(K¹_n K²_n) − Σ_{i≤n} ln(1/H_i)|`.
    pub identity_residual: f64,
}

impl TeamReport {
    pub fn new(t: &DualTranscript, stream_id: &str, basis: VerdictBasis) -> Result<Self> {
        Ok(Self {
            meta: (&t.meta).into(),
            n_steps: t.steps.len(),
            evidence_1: EvidenceReport::new(format!("{stream_id}/1"), &t.capital_1, basis)?,
            evidence_2: EvidenceReport::new(format!("{stream_id}/2"), &t.capital_2, basis)?,
            hellinger_integrals: t.hellinger_integrals()?,
            identity_residual: geometric_identity(t)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackingReport {
    pub meta: MetaReport,
    pub n_steps: usize,
    pub evidence_1: EvidenceReport,
    pub evidence_2: EvidenceReport,
    /// `min_n [ln K²_n − ½(ln K¹_n − Σ ln χ_i)]`.
    pub guarantee_slack: f64,
    /// `min_n [ln K²_n − ½ ln K¹_n + ½ Σ ρ_χ]`.
    pub crude_guarantee_slack: f64,
}

impl TrackingReport {
    pub fn new(t: &TrackingTranscript, stream_id: &str, basis: VerdictBasis) -> Result<Self> {
        Ok(Self {
            meta: (&t.meta).into(),
            n_steps: t.steps.len(),
            evidence_1: EvidenceReport::new(format!("{stream_id}/1"), &t.capital_1, basis)?,
            evidence_2: EvidenceReport::new(format!("{stream_id}/2"), &t.capital_2, basis)?,
            guarantee_slack: t.guarantee_slack(),
            crude_guarantee_slack: t.crude_guarantee_slack()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarketReport {
    pub transcript: MarketTranscript,
    pub decomposition: SettlementDecomposition,
    pub reconstruction_error: f64,
    pub final_capital: f64,
}

impl MarketReport {
    pub fn new(t: MarketTranscript) -> Self {
        Self {
            decomposition: settlement_decomposition(&t),
            reconstruction_error: t.reconstruction_error(),
            final_capital: t.final_capital(),
            transcript: t,
        }
    }

    /// `(n, K'_n, ln K'_n)`; the log is undefined for nonpositive capital.
    pub fn trajectory(&self) -> Vec<TrajectoryPoint> {
        std::iter::once((0, 1.0, 0.0))
            .chain(self.transcript.steps.iter().map(|s| {
                let log = if s.capital_mid > 0.0 { s.capital_mid.ln() } else { f64::NAN };
                (s.index, s.capital_mid, log)
            }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportBody {
    Session(SessionReport),
    Team(TeamReport),
    Tracking(TrackingReport),
    Market(MarketReport),
    Ville(VilleReport),
    Certificate(Certificate),
    Regret(RegretReport),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub result: ReportBody,
}

impl Report {
    pub fn new(config: ExperimentConfig, result: ReportBody) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Named capital trajectories, empty for Monte Carlo summaries.
    pub fn trajectories(&self) -> Vec<(&'static str, Vec<TrajectoryPoint>)> {
        match &self.result {
            ReportBody::Session(r) => vec![("capital", r.evidence.trajectory.clone())],
            ReportBody::Team(r) => vec![
                ("capital_1", r.evidence_1.trajectory.clone()),
                ("capital_2", r.evidence_2.trajectory.clone()),
            ],
            ReportBody::Tracking(r) => vec![
                ("capital_1", r.evidence_1.trajectory.clone()),
                ("capital_2", r.evidence_2.trajectory.clone()),
            ],
            ReportBody::Market(r) => vec![("capital", r.trajectory())],
            _ => Vec::new(),
        }
    }
}

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "capital", "log_capital"]).expect("in-memory write");
    for &(n, k, l) in points {
        w.write_record([n.to_string(), k.to_string(), l.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    /// The JSON report plus one CSV per capital trajectory.
    Csv,
}

/// Writes the report to `out` (JSON); with CSV output also writes
/// trajectories next to it as `<stem>.csv` or `<stem>_<name>.csv`.
pub fn emit_report(report: &Report, out: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let json_path = match format {
        OutputFormat::Json => out.to_path_buf(),
        OutputFormat::Csv => out.with_extension("json"),
    };
    if let Some(dir) = json_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&json_path, report.to_json()?)?;
    let mut written = vec![json_path];
    if format == OutputFormat::Csv {
        let trajectories = report.trajectories();
        if trajectories.is_empty() {
            return Err(Error::Config("this report has no capital trajectory for CSV output".into()));
        }
        let stem = out.with_extension("");
        let single = trajectories.len() == 1;
        for (name, points) in trajectories {
            let path = if single {
                stem.with_extension("csv")
            } else {
                PathBuf::from(format!("{}_{name}.csv", stem.display()))
            };
            fs::write(&path, trajectory_csv(&points))?;
            written.push(path);
        }
    }
    Ok(written)
}
