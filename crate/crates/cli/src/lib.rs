//! Command-line front end: simulations, verification sweeps and one-off
//! drift evaluations.
//!
//! Exit codes: 0 pass, 1 verification found violations, 2 usage or config error.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chunkswarm::analysis::{
    check_drift_negative, check_lemma_sweep, drift, threshold_case1, threshold_two_chunk, two_chunk_states, Lemma,
    LyapunovSpec, StateSampler, SweepReport,
};
use chunkswarm::sim::{output, run, SimConfig};
use chunkswarm::{Rule, StateSnapshot, SwarmState};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const EXIT_VIOLATIONS: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "chunkswarm", version, about = "Chunk-swarm simulator and drift analyzer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation, or one per rule when the config lists `rules`.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a verification job and report violations.
    Verify {
        #[arg(long)]
        job: PathBuf,
        /// Also write the report JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the drift report of a single state.
    Drift {
        #[arg(long)]
        state: PathBuf,
        /// Rule as JSON, e.g. '{"type":"common-chunk","m":3}'.
        #[arg(long)]
        rule: String,
        #[arg(long)]
        lambda: f64,
        /// l1, two-chunk, combined or combined:<C>.
        #[arg(long)]
        spec: String,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{what}: {source}")]
    Json { what: String, source: serde_json::Error },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] chunkswarm::Error),
}

impl CliError {
    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn parse_json<T: for<'de> Deserialize<'de>>(bytes: &[u8], what: &Path) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|source| CliError::Json {
        what: what.display().to_string(),
        source,
    })
}

pub fn execute(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Simulate { config, out } => simulate(&config, &out).map(|_| 0),
        Command::Verify { job, out } => verify(&job, out.as_deref()),
        Command::Drift {
            state,
            rule,
            lambda,
            spec,
        } => drift_cmd(&state, &rule, lambda, &spec).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

/// Splits a config into one [`SimConfig`] per rule. A config holds either a
/// single `rule` or a `rules` list; every other field is shared.
pub fn load_sim_configs(bytes: &[u8], path: &Path) -> Result<Vec<SimConfig>, CliError> {
    let mut value: Value = parse_json(bytes, path)?;
    let rules = match value.as_object_mut() {
        Some(obj) => obj.remove("rules"),
        None => return Err(CliError::Config(format!("{}: expected a JSON object", path.display()))),
    };
    let variants = match rules {
        None => vec![value],
        Some(Value::Array(rules)) if !rules.is_empty() => {
            if value.get("rule").is_some() {
                return Err(CliError::Config("give either `rule` or `rules`, not both".into()));
            }
            rules
                .into_iter()
                .map(|rule| {
                    let mut v = value.clone();
                    v["rule"] = rule;
                    v
                })
                .collect()
        }
        Some(_) => return Err(CliError::Config("`rules` must be a non-empty array".into())),
    };
    let configs = variants
        .into_iter()
        .map(|v| {
            serde_json::from_value::<SimConfig>(v).map_err(|source| CliError::Json {
                what: path.display().to_string(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    for cfg in &configs {
        cfg.validate()?;
    }
    Ok(configs)
}

pub fn simulate(config: &Path, out: &Path) -> Result<Vec<output::RunSummary>, CliError> {
    let configs = load_sim_configs(&read(config)?, config)?;
    let nested = configs.len() > 1;
    let mut labels: Vec<String> = configs.iter().map(|c| c.rule.label()).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != configs.len() {
        return Err(CliError::Config("`rules` lists the same rule twice".into()));
    }
    configs
        .par_iter()
        .map(|cfg| {
            let dir = if nested {
                out.join(cfg.rule.label())
            } else {
                out.to_path_buf()
            };
            let outcome = run(cfg)?;
            output::write_run(&dir, cfg, &outcome).map_err(|e| CliError::io(&dir, e))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Lemma1,
    Lemma2,
    Case1Drift,
    TwoChunkDrift,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSource {
    Random {
        count: usize,
        s_min: u64,
        s_max: u64,
        rng_seed: u64,
    },
    /// Every two-chunk state in the population range.
    Exhaustive { s_min: u64, s_max: u64 },
    /// JSON array of snapshots; relative paths resolve against the job file.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationJob {
    pub target: Target,
    pub k: usize,
    /// Required by the drift targets.
    #[serde(default)]
    pub lambda: Option<f64>,
    pub rule: Rule,
    pub states: StateSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationRecord {
    pub state: StateSnapshot,
    /// Rate for lemma targets, drift for drift targets.
    pub value: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub job: VerificationJob,
    pub states: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub min_margin: Option<f64>,
    pub runtime_seconds: f64,
    pub passed: bool,
    pub violations: Vec<ViolationRecord>,
}

impl VerificationJob {
    pub fn validate(&self) -> Result<(), CliError> {
        self.rule.validate()?;
        let lemma = matches!(self.target, Target::Lemma1 | Target::Lemma2);
        if lemma && self.rule != Rule::BASE {
            return Err(CliError::Config(format!(
                "lemma targets apply to {} only, got {}",
                Rule::BASE,
                self.rule
            )));
        }
        if !lemma {
            match self.lambda {
                Some(l) if l > 0.0 && l.is_finite() => {}
                Some(l) => return Err(CliError::Config(format!("`lambda` must be positive, got {l}"))),
                None => return Err(CliError::Config("`lambda` is required for drift targets".into())),
            }
        }
        let two_chunk = self.target == Target::TwoChunkDrift || matches!(self.states, StateSource::Exhaustive { .. });
        if two_chunk && self.k != 2 {
            return Err(CliError::Config(format!(
                "two-chunk drift and exhaustive states need k = 2, got {}",
                self.k
            )));
        }
        if let StateSource::Random { s_min, s_max, .. } | StateSource::Exhaustive { s_min, s_max } = self.states {
            if s_min < 1 || s_min > s_max {
                return Err(CliError::Config(format!("bad population range {s_min}..={s_max}")));
            }
        }
        Ok(())
    }

    pub fn load_states(&self, job_dir: &Path) -> Result<Vec<SwarmState>, CliError> {
        Ok(match &self.states {
            StateSource::Random {
                count,
                s_min,
                s_max,
                rng_seed,
            } => StateSampler::new(vec![self.k], *s_min..=*s_max).generate(*count, *rng_seed),
            StateSource::Exhaustive { s_min, s_max } => two_chunk_states(*s_min..=*s_max),
            StateSource::File { path } => {
                let path = job_dir.join(path);
                let snapshots: Vec<StateSnapshot> = parse_json(&read(&path)?, &path)?;
                let states = snapshots
                    .into_iter()
                    .map(SwarmState::try_from)
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(bad) = states.iter().find(|s| s.k() != self.k) {
                    return Err(CliError::Config(format!(
                        "{}: snapshot with k = {} in a k = {} job",
                        path.display(),
                        bad.k(),
                        self.k
                    )));
                }
                states
            }
        })
    }

    pub fn run(&self, states: &[SwarmState]) -> Result<SweepReport, CliError> {
        let lambda = self.lambda.unwrap_or(0.0);
        let arithmetic = Default::default();
        let report = match self.target {
            Target::Lemma1 => check_lemma_sweep(states, self.rule, Lemma::One, arithmetic)?,
            Target::Lemma2 => check_lemma_sweep(states, self.rule, Lemma::Two, arithmetic)?,
            Target::Case1Drift => {
                let floor = threshold_case1(self.k);
                check_drift_negative(states, self.rule, lambda, LyapunovSpec::L1, arithmetic, |s| {
                    s.peers() as f64 > floor
                })?
            }
            Target::TwoChunkDrift => {
                let floor = threshold_two_chunk(lambda);
                check_drift_negative(states, self.rule, lambda, LyapunovSpec::TwoChunk, arithmetic, |s| {
                    s.peers() as f64 > floor
                })?
            }
        };
        Ok(report)
    }
}

pub fn verify_job(job_path: &Path) -> Result<VerificationReport, CliError> {
    let job: VerificationJob = parse_json(&read(job_path)?, job_path)?;
    job.validate()?;
    let start = Instant::now();
    let states = job.load_states(job_path.parent().unwrap_or(Path::new(".")))?;
    let sweep = job.run(&states)?;
    Ok(VerificationReport {
        states: states.len(),
        evaluated: sweep.evaluated,
        skipped: sweep.skipped,
        min_margin: sweep.min_margin,
        runtime_seconds: start.elapsed().as_secs_f64(),
        passed: sweep.passed(),
        violations: sweep
            .violations
            .into_iter()
            .map(|v| ViolationRecord {
                state: v.state.to_snapshot(),
                value: v.value,
                margin: v.margin,
            })
            .collect(),
        job,
    })
}

fn verify(job: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let report = verify_job(job)?;
    let json = serde_json::to_vec_pretty(&report).map_err(|source| CliError::Json {
        what: "report".into(),
        source,
    })?;
    if let Some(out) = out {
        output::write_atomic(out, &json).map_err(|e| CliError::io(out, e))?;
    }
    println!("{}", String::from_utf8_lossy(&json));
    Ok(if report.passed { 0 } else { EXIT_VIOLATIONS })
}

fn drift_cmd(state: &Path, rule: &str, lambda: f64, spec: &str) -> Result<(), CliError> {
    let snapshot: StateSnapshot = parse_json(&read(state)?, state)?;
    let state = SwarmState::try_from(snapshot)?;
    let rule: Rule = serde_json::from_str(rule).map_err(|source| CliError::Json {
        what: "--rule".into(),
        source,
    })?;
    rule.validate()?;
    let spec = LyapunovSpec::parse(spec, state.k())?;
    let report = drift(&state, rule, lambda, spec)?;
    let json = serde_json::to_string_pretty(&report).map_err(|source| CliError::Json {
        what: "report".into(),
        source,
    })?;
    println!("{json}");
    Ok(())
}
