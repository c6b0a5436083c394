//! Batch property suites: each draws `trials` random inputs from per-trial
//! seed streams, measures one worst-case quantity per trial and compares it
//! with a tolerance.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexroof::RoofConfig;
use crate::error::{Error, Result};
use crate::measures::tau3_pure;
use crate::monogamy::{check_monogamy, check_pure3_relation, MONOGAMY_TOL, PURE3_TOL};
use crate::qstate::{
    apply_local, derived_rng, random_invertible_local_with, random_pure_with, DensityMatrix, StateVector,
};
use crate::tau4::{check_concavity, monotonicity_trial, tau4_pure4, SloccProtocol, HARNESS_TOL};

pub const COVARIANCE_TOL: f64 = 1e-8;
pub const SEPARABLE_TOL: f64 = 2e-3;
pub const CONCAVITY_LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];
/// Site traced in the monotonicity, concavity and separability suites.
pub const MEASURED_SITE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Covariance,
    Concavity,
    Monotonicity,
    SeparableZero,
    Pure3Identity,
    Monogamy,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Covariance,
        Suite::Concavity,
        Suite::Monotonicity,
        Suite::SeparableZero,
        Suite::Pure3Identity,
        Suite::Monogamy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Covariance => "covariance",
            Suite::Concavity => "concavity",
            Suite::Monotonicity => "monotonicity",
            Suite::SeparableZero => "separable-zero",
            Suite::Pure3Identity => "pure3-identity",
            Suite::Monogamy => "monogamy",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::Covariance => COVARIANCE_TOL,
            Suite::Pure3Identity => PURE3_TOL,
            Suite::Concavity | Suite::Monotonicity => HARNESS_TOL,
            Suite::SeparableZero => SEPARABLE_TOL,
            Suite::Monogamy => MONOGAMY_TOL,
        }
    }

    /// What the per-trial metric measures; smaller is better for all suites.
    pub fn metric(self) -> &'static str {
        match self {
            Suite::Covariance => "relative error",
            Suite::Pure3Identity => "absolute deviation",
            Suite::Concavity => "chord minus mixture",
            Suite::Monotonicity => "post average minus pre",
            Suite::SeparableZero => "tau4 estimate",
            Suite::Monogamy => "lhs minus rhs",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|k| k.name()).collect();
            Error::Parse(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub trials: usize,
    pub seed: u64,
    pub roof: RoofConfig,
    /// `None` uses the suite default.
    pub tolerance: Option<f64>,
}

impl SuiteOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            roof: RoofConfig::fast(),
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub label: Option<String>,
    pub metric: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub metric: String,
    pub seed: u64,
    pub tolerance: f64,
    pub worst: f64,
    pub worst_trial: Option<usize>,
    pub passed: bool,
    pub records: Vec<TrialRecord>,
}

/// Which factor of a separable four-party state is split off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparablePattern {
    /// `|χ⟩_A ⊗ |γ⟩_BCD`
    OneThree,
    /// `|χ⟩_AB ⊗ |γ⟩_CD`
    TwoTwo,
    /// `|χ⟩_ABC ⊗ |γ⟩_D`
    ThreeOne,
}

impl SeparablePattern {
    pub const ALL: [SeparablePattern; 3] = [
        SeparablePattern::OneThree,
        SeparablePattern::TwoTwo,
        SeparablePattern::ThreeOne,
    ];

    fn split(self) -> usize {
        match self {
            SeparablePattern::OneThree => 1,
            SeparablePattern::TwoTwo => 2,
            SeparablePattern::ThreeOne => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SeparablePattern::OneThree => "A|BCD",
            SeparablePattern::TwoTwo => "AB|CD",
            SeparablePattern::ThreeOne => "ABC|D",
        }
    }
}

/// Haar-random factors joined in the given pattern.
pub fn random_separable<R: Rng + ?Sized>(pattern: SeparablePattern, rng: &mut R) -> Result<StateVector> {
    let k = pattern.split();
    let left = random_pure_with(&vec![2; k], rng)?;
    let right = random_pure_with(&vec![2; 4 - k], rng)?;
    Ok(left.tensor(&right))
}

fn haar_rank2<R: Rng + ?Sized>(rng: &mut R) -> Result<DensityMatrix> {
    random_pure_with(&[2; 4], rng)?.reduced(&[0, 1, 2])
}

fn covariance_trial(seed: u64, t: usize) -> Result<f64> {
    let mut rng = derived_rng(seed, t as u64);
    let phi = random_pure_with(&[2, 2, 2], &mut rng)?;
    let ops: Vec<_> = (0..3).map(|s| random_invertible_local_with(s, 2, &mut rng)).collect();
    let det: f64 = ops.iter().map(|o| o.matrix.determinant().norm()).product();
    let (psi, n2) = apply_local(&phi, &ops)?;
    let lhs = tau3_pure(&psi.normalize()?)?.value;
    let rhs = det * tau3_pure(&phi)?.value / n2;
    Ok((lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE))
}

fn run_trial(suite: Suite, opts: &SuiteOptions, t: usize) -> Result<(Option<String>, f64)> {
    let seed = opts.seed;
    let roof = &opts.roof;
    match suite {
        Suite::Covariance => Ok((None, covariance_trial(seed, t)?)),
        Suite::Pure3Identity => {
            let s = random_pure_with(&[2, 2, 2], &mut derived_rng(seed, t as u64))?;
            Ok((None, check_pure3_relation(&s, PURE3_TOL)?.deviation))
        }
        Suite::Concavity => {
            let mut rng = derived_rng(seed, t as u64);
            let (r1, r2) = (haar_rank2(&mut rng)?, haar_rank2(&mut rng)?);
            let rep = check_concavity(&r1, &r2, &CONCAVITY_LAMBDAS, roof, HARNESS_TOL)?;
            Ok((None, rep.max_violation))
        }
        Suite::Monotonicity => {
            let mut rng = derived_rng(seed, t as u64);
            let state = random_pure_with(&[2; 4], &mut rng)?;
            let protocol = SloccProtocol::random(state.dims(), MEASURED_SITE, 2, &mut rng)?;
            let pre = tau4_pure4(&state, MEASURED_SITE, roof)?.tau4;
            let trial = monotonicity_trial(&state, MEASURED_SITE, &protocol, pre, roof, t)?;
            Ok((None, trial.violation))
        }
        Suite::SeparableZero => {
            let pattern = SeparablePattern::ALL[t % 3];
            let mut rng = derived_rng(seed, t as u64);
            let state = random_separable(pattern, &mut rng)?;
            let tau4 = tau4_pure4(&state, MEASURED_SITE, roof)?.tau4;
            Ok((Some(pattern.name().to_string()), tau4))
        }
        Suite::Monogamy => {
            let state = random_pure_with(&[2; 4], &mut derived_rng(seed, t as u64))?;
            let rep = check_monogamy(&state, roof, MONOGAMY_TOL)?;
            Ok((None, rep.lhs - rep.rhs))
        }
    }
}

/// Runs `opts.trials` trials; the separability suite runs that many per
/// pattern. Records are ordered by trial index whatever the thread count.
pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport> {
    if opts.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    opts.roof.validate()?;
    let tolerance = opts.tolerance.unwrap_or_else(|| suite.default_tolerance());
    let count = match suite {
        Suite::SeparableZero => 3 * opts.trials,
        _ => opts.trials,
    };
    let records = (0..count)
        .into_par_iter()
        .map(|t| {
            let (label, metric) = run_trial(suite, opts, t)?;
            Ok(TrialRecord {
                trial: t,
                label,
                metric,
                passed: metric <= tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = records
        .iter()
        .max_by(|a, b| a.metric.total_cmp(&b.metric))
        .map(|r| (r.metric, r.trial));
    Ok(SuiteReport {
        suite,
        metric: suite.metric().to_string(),
        seed: opts.seed,
        tolerance,
        worst: worst.map_or(f64::NEG_INFINITY, |w| w.0),
        worst_trial: worst.map(|w| w.1),
        passed: records.iter().all(|r| r.passed),
        records,
    })
}
