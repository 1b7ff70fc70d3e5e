//! Campaign driver behind the `bellport` binary.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bell::{seeded_rng, BellState, SimRng};
use crate::error::{Error, Result};
use crate::harness::{run_all_branches, ProtocolTranscript, Session};
use crate::qstate::{QubitId, StateVector};
use crate::teleport::{
    all_outcome_keys, certify_table, check_width, derive_corrections, outcome_code, validate_table,
    CertificationReport, CorrectionTable, MAX_TABLE_WIDTH, MAX_WIDTH,
};

/// Fidelity below this fails a campaign.
pub const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;

/// Reference correction tables, transcribed row by row.
pub const REFERENCE_TABLE_1: &str = include_str!("../fixtures/table1.txt");
pub const REFERENCE_TABLE_2: &str = include_str!("../fixtures/table2.txt");

pub fn reference_table(n: usize) -> Result<CorrectionTable> {
    match n {
        1 => CorrectionTable::parse_text(REFERENCE_TABLE_1),
        2 => CorrectionTable::parse_text(REFERENCE_TABLE_2),
        _ => Err(Error::Config(format!("no reference table for width {n}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sample,
    Branches,
    DeriveTable,
    Certify,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputSpec {
    Random,
    /// `zero`, `uniform` or `ghz`.
    Fixture(String),
    File(PathBuf),
}

const FIXTURES: [&str; 3] = ["zero", "uniform", "ghz"];

impl FromStr for InputSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random" => InputSpec::Random,
            _ if FIXTURES.contains(&s) => InputSpec::Fixture(s.to_string()),
            _ => InputSpec::File(PathBuf::from(s)),
        })
    }
}

impl fmt::Display for InputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSpec::Random => f.write_str("random"),
            InputSpec::Fixture(name) => f.write_str(name),
            InputSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl Serialize for InputSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    pub input: InputSpec,
    pub strict: bool,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let max = match self.mode {
            Mode::Sample => MAX_WIDTH,
            Mode::Branches | Mode::DeriveTable => MAX_TABLE_WIDTH,
            Mode::Certify => 2,
        };
        check_width(self.n, max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityStats {
    pub min: f64,
    pub mean: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub p_value: f64,
    pub dof: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbabilityRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignReport {
    pub config: CampaignConfig,
    pub trials_run: usize,
    pub fidelity: Option<FidelityStats>,
    /// Outcome code → count; totals `trials_run`.
    pub histogram: BTreeMap<String, u64>,
    pub chi_square: Option<ChiSquare>,
    pub branch_probability: Option<ProbabilityRange>,
    pub resource_violations: Vec<String>,
    pub table: Option<Vec<String>>,
    pub certification: Option<CertificationReport>,
    pub passed: bool,
}

impl CampaignReport {
    fn new(config: &CampaignConfig) -> Self {
        Self {
            config: config.clone(),
            trials_run: 0,
            fidelity: None,
            histogram: BTreeMap::new(),
            chi_square: None,
            branch_probability: None,
            resource_violations: Vec::new(),
            table: None,
            certification: None,
            passed: false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    fn absorb(&mut self, transcripts: &[ProtocolTranscript]) {
        let n = self.config.n;
        self.histogram = all_outcome_keys(n)
            .iter()
            .map(|k| (outcome_code(k), 0))
            .collect();
        let mut min = f64::INFINITY;
        let mut sum = 0.0;
        for (i, t) in transcripts.iter().enumerate() {
            *self.histogram.entry(t.message.to_string()).or_default() += 1;
            min = min.min(t.final_fidelity);
            sum += t.final_fidelity;
            self.resource_violations.extend(
                t.resource_violations()
                    .into_iter()
                    .map(|v| format!("trial {i}: {v}")),
            );
        }
        self.trials_run = transcripts.len();
        self.fidelity = Some(FidelityStats {
            min,
            mean: sum / transcripts.len() as f64,
        });
    }

    fn fidelity_ok(&self) -> bool {
        self.fidelity.is_none_or(|f| f.min >= FIDELITY_FLOOR)
    }
}

/// Pearson statistic of `histogram` against a uniform expectation of
/// `expected_prob` per bin, with its upper-tail p-value on `bins − 1`
/// degrees of freedom.
pub fn chi_square_uniform(histogram: &[u64], expected_prob: f64) -> Result<ChiSquare> {
    let bins = histogram.len();
    if bins < 2 {
        return Err(Error::Config(format!(
            "chi-square needs at least 2 bins, got {bins}"
        )));
    }
    if (expected_prob * bins as f64 - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "expected probability {expected_prob} does not cover {bins} bins"
        )));
    }
    let total: u64 = histogram.iter().sum();
    if total == 0 {
        return Err(Error::Config("chi-square over zero trials".into()));
    }
    let expected = total as f64 * expected_prob;
    let statistic: f64 = histogram
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = bins - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Config(e.to_string()))?;
    Ok(ChiSquare {
        statistic,
        p_value: dist.sf(statistic),
        dof,
    })
}

pub fn load_state(path: &Path) -> Result<StateVector> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    StateVector::parse_literal(&text)
}

fn fixture_state(name: &str, n: usize) -> Result<StateVector> {
    let len = 1usize << n;
    let amps = match name {
        "zero" => (0..len).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
        "uniform" => vec![1.0; len],
        "ghz" => (0..len)
            .map(|i| {
                if i == 0 || i == len - 1 {
                    FRAC_1_SQRT_2
                } else {
                    0.0
                }
            })
            .collect::<Vec<_>>(),
        _ => return Err(Error::Config(format!("unknown fixture {name:?}"))),
    };
    StateVector::new(
        QubitId::generic(n),
        amps.into_iter().map(|a| Complex64::new(a, 0.0)).collect(),
    )
}

/// Resolves the configured input for one trial. Random inputs are drawn from
/// `rng`, so each trial stream gets its own state.
fn resolve_input(cfg: &CampaignConfig, rng: &mut SimRng) -> Result<StateVector> {
    let state = match &cfg.input {
        InputSpec::Random => StateVector::random(QubitId::generic(cfg.n), rng)?,
        InputSpec::Fixture(name) => fixture_state(name, cfg.n)?,
        InputSpec::File(path) => load_state(path)?,
    };
    if state.num_qubits() != cfg.n {
        return Err(Error::WidthMismatch {
            expected: cfg.n,
            got: state.num_qubits(),
        });
    }
    Ok(state)
}

/// Trial `i` draws from its own ChaCha stream of the campaign seed.
fn trial_rng(seed: u64, trial: usize) -> SimRng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(trial as u64);
    rng
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let mut report = CampaignReport::new(cfg);
    match cfg.mode {
        Mode::Sample => {
            // surface bad files once instead of per trial
            if let InputSpec::File(_) | InputSpec::Fixture(_) = cfg.input {
                resolve_input(cfg, &mut seeded_rng(cfg.seed))?;
            }
            let transcripts = (0..cfg.trials)
                .into_par_iter()
                .map(|i| {
                    let mut rng = trial_rng(cfg.seed, i);
                    let xi = resolve_input(cfg, &mut rng)?;
                    Session::run(&xi, BellState::PsiMinus, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            report.absorb(&transcripts);
            let counts: Vec<u64> = report.histogram.values().copied().collect();
            report.chi_square = Some(chi_square_uniform(&counts, 1.0 / counts.len() as f64)?);
        }
        Mode::Branches => {
            let xi = resolve_input(cfg, &mut seeded_rng(cfg.seed))?;
            let transcripts = run_all_branches(&xi, cfg.n)?;
            report.absorb(&transcripts);
            report.branch_probability = Some(probability_range(
                transcripts.iter().map(|t| t.branch_probability),
            ));
        }
        Mode::DeriveTable => {
            let table = derive_corrections(cfg.n)?;
            record_table(&mut report, &table, cfg.seed)?;
        }
        Mode::Certify => {
            let table = derive_corrections(cfg.n)?;
            record_table(&mut report, &table, cfg.seed)?;
            report.certification = Some(certify_table(&table, &reference_table(cfg.n)?)?);
        }
    }
    let strict_failure = cfg.strict
        && report
            .certification
            .as_ref()
            .is_some_and(|c| c.operator_mismatches > 0);
    report.passed =
        report.fidelity_ok() && report.resource_violations.is_empty() && !strict_failure;
    Ok(report)
}

fn probability_range(ps: impl Iterator<Item = f64>) -> ProbabilityRange {
    ps.fold(
        ProbabilityRange {
            min: f64::INFINITY,
            max: 0.0,
        },
        |r, p| ProbabilityRange {
            min: r.min.min(p),
            max: r.max.max(p),
        },
    )
}

/// Stores the table rows and replays them over `trials`-independent random
/// states drawn from `seed`.
fn record_table(report: &mut CampaignReport, table: &CorrectionTable, seed: u64) -> Result<()> {
    let n = table.width();
    let mut rng = seeded_rng(seed);
    let states = (0..report.config.trials)
        .map(|_| StateVector::random(QubitId::generic(n), &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let check = validate_table(table, &states)?;
    report.trials_run = states.len();
    report.fidelity = Some(FidelityStats {
        min: check.min_fidelity,
        mean: check.mean_fidelity,
    });
    report.branch_probability = Some(ProbabilityRange {
        min: check.min_probability,
        max: check.max_probability,
    });
    report.resource_violations.extend(
        table
            .iter()
            .filter(|(_, p)| p.single_qubit_op_count() > 2 * n)
            .map(|(k, p)| {
                format!(
                    "row {} uses {} operations",
                    outcome_code(k),
                    p.single_qubit_op_count()
                )
            }),
    );
    report.table = Some(
        table
            .iter()
            .map(|(k, p)| format!("{} {}", outcome_code(k), p))
            .collect(),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn config(mode: Mode, n: usize, trials: usize) -> CampaignConfig {
        CampaignConfig {
            n,
            trials,
            seed: 7,
            mode,
            input: InputSpec::Random,
            strict: false,
        }
    }

    #[test]
    fn chi_square_edges() {
        let flat = chi_square_uniform(&[10, 10, 10, 10], 0.25).unwrap();
        assert_eq!(flat.statistic, 0.0);
        assert!((flat.p_value - 1.0).abs() < 1e-12);
        assert_eq!(flat.dof, 3);

        let spike = chi_square_uniform(
            &[16000, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
            1.0 / 16.0,
        )
        .unwrap();
        assert_eq!(spike.statistic, 240000.0);
        assert!(spike.p_value < 1e-300);

        assert!(chi_square_uniform(&[0, 0, 0, 0], 0.25).is_err());
        assert!(chi_square_uniform(&[1, 2, 3], 0.25).is_err());
        assert!(chi_square_uniform(&[5], 1.0).is_err());
    }

    #[test]
    fn chi_square_matches_known_quantile() {
        // χ²(3) upper 5% point is 7.814728
        let dist = ChiSquared::new(3.0).unwrap();
        assert!((dist.sf(7.814728) - 0.05).abs() < 1e-6);
        // 4 bins, 100 trials: (30−25)²/25 + (20−25)²/25 = 2
        let c = chi_square_uniform(&[30, 20, 25, 25], 0.25).unwrap();
        assert!((c.statistic - 2.0).abs() < 1e-12);
    }

    #[test]
    fn input_spec_parsing() {
        assert_eq!("random".parse::<InputSpec>().unwrap(), InputSpec::Random);
        assert_eq!(
            "ghz".parse::<InputSpec>().unwrap(),
            InputSpec::Fixture("ghz".into())
        );
        assert_eq!(
            "in.state".parse::<InputSpec>().unwrap(),
            InputSpec::File(PathBuf::from("in.state"))
        );
    }

    #[test]
    fn config_validation() {
        assert!(config(Mode::Sample, 5, 1).validate().is_ok());
        assert!(config(Mode::Sample, 6, 1).validate().is_err());
        assert!(config(Mode::Branches, 5, 1).validate().is_err());
        assert!(config(Mode::Certify, 3, 1).validate().is_err());
        assert!(config(Mode::Sample, 1, 0).validate().is_err());
    }

    #[test]
    fn single_sample_echoes_seed() {
        let report = run_campaign(&config(Mode::Sample, 1, 1)).unwrap();
        assert_eq!(report.trials_run, 1);
        assert_eq!(report.histogram.values().sum::<u64>(), 1);
        assert!(report.passed);
        assert!(report.to_json().contains("\"seed\": 7"));
    }

    #[test]
    fn branches_are_exactly_uniform() {
        let report = run_campaign(&config(Mode::Branches, 2, 1)).unwrap();
        assert_eq!(report.trials_run, 16);
        assert!(report.histogram.values().all(|&c| c == 1));
        let p = report.branch_probability.unwrap();
        assert!((p.min - 1.0 / 16.0).abs() <= 1e-12 && (p.max - 1.0 / 16.0).abs() <= 1e-12);
        assert!(report.fidelity.unwrap().min >= 1.0 - 1e-12);
    }

    #[test]
    fn certify_strict_and_documenting() {
        let mut cfg = config(Mode::Certify, 2, 10);
        let documenting = run_campaign(&cfg).unwrap();
        let cert = documenting.certification.as_ref().unwrap();
        assert!(cert.operator_mismatches > 0);
        assert!(documenting.passed);
        cfg.strict = true;
        assert!(!run_campaign(&cfg).unwrap().passed);
        cfg.n = 1;
        assert!(run_campaign(&cfg).unwrap().passed);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = config(Mode::Sample, 3, 200);
        assert_eq!(
            run_campaign(&cfg).unwrap().to_json(),
            run_campaign(&cfg).unwrap().to_json()
        );
    }

    #[test]
    fn load_state_files() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "1,0\n0,0\n").unwrap();
        assert_eq!(
            load_state(f.path()).unwrap(),
            StateVector::basis(QubitId::generic(1), 0).unwrap()
        );

        let uniform = load_state(Path::new(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/fixtures/uniform2.state"
        )))
        .unwrap();
        assert!((uniform.norm_sqr() - 1.0).abs() <= 1e-12);
        assert_eq!(uniform.num_qubits(), 2);

        let mut t = tempfile::NamedTempFile::new().unwrap();
        write!(t, "qubits: x1 x2\n1,0\n0,0\n").unwrap();
        let err = load_state(t.path()).unwrap_err();
        assert!(
            err.to_string().contains("missing amplitude index 2"),
            "{err}"
        );

        assert!(matches!(
            load_state(Path::new("/nonexistent/state")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn file_input_width_must_match() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "1,0\n0,0\n").unwrap();
        let mut cfg = config(Mode::Sample, 2, 3);
        cfg.input = InputSpec::File(f.path().to_path_buf());
        assert!(matches!(
            run_campaign(&cfg),
            Err(Error::WidthMismatch { .. })
        ));
    }
}
