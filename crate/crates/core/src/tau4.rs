//! The localized quadripartite monotone `τ₄ = √(τₐ² − τ₃²)` of a three-qubit
//! density matrix, its pure-state form obtained by tracing one site of a
//! `2⊗2⊗2⊗n` state, the four-component entanglement vector, and harnesses
//! that probe monotonicity under SLOCC rounds and concavity under mixing.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexroof::{average_tau3, roof_pair, RoofConfig, RoofResult};
use crate::error::{Error, Result};
use crate::measures::require_dims;
use crate::qstate::{
    apply_local, derived_rng, kraus_defect, random_kraus_set_with, DensityMatrix, LocalOperator, StateVector, C64,
    KRAUS_TOL,
};

/// Default tolerance for the monotonicity and concavity harnesses.
pub const HARNESS_TOL: f64 = 2e-2;
/// Minimum certified lower bound for a nonzero verdict.
pub const DEFAULT_CERTIFY_GAP: f64 = 5e-2;
/// Outcomes at or below this probability are dropped from SLOCC rounds.
pub const OUTCOME_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateBias {
    /// τₐ is under-estimated and τ₃ over-estimated, so τ₄ is too.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tau4Report {
    pub tau4: f64,
    pub tau_a: RoofResult,
    pub tau3: RoofResult,
    /// `√max(0, max² − min²)` recomputed from the two witness ensembles.
    pub certified_lower: f64,
    /// Site traced out of a pure state; `None` when a density matrix was given.
    pub traced_site: Option<usize>,
    pub bias: EstimateBias,
}

fn hyperbolic(hi: f64, lo: f64) -> f64 {
    (hi * hi - lo * lo).max(0.0).sqrt()
}

/// `τ₄` of a three-qubit density matrix from one pair of roof searches.
pub fn tau4_of_dm(dm: &DensityMatrix, config: &RoofConfig) -> Result<Tau4Report> {
    require_dims("tau4", dm.dims(), &[2, 2, 2])?;
    let (lo, hi) = roof_pair(dm, config)?;
    let tau4 = hyperbolic(hi.value, lo.value).min(1.0);
    let certified_lower = hyperbolic(average_tau3(&hi.witness)?, average_tau3(&lo.witness)?);
    Ok(Tau4Report {
        tau4,
        certified_lower: certified_lower.min(tau4),
        tau_a: hi,
        tau3: lo,
        traced_site: None,
        bias: EstimateBias::Lower,
    })
}

/// Sites kept after tracing `traced_site` out of a four-site state; all three
/// must be qubits.
pub fn kept_sites(dims: &[usize], traced_site: usize) -> Result<Vec<usize>> {
    if dims.len() != 4 {
        return Err(Error::InvalidDims(format!("tau4 needs four sites, got {:?}", dims)));
    }
    if traced_site >= 4 {
        return Err(Error::InvalidSubsystems(format!(
            "traced site {traced_site} out of range"
        )));
    }
    let kept: Vec<usize> = (0..4).filter(|&s| s != traced_site).collect();
    if kept.iter().any(|&s| dims[s] != 2) {
        return Err(Error::InvalidDims(format!(
            "sites kept after tracing {traced_site} must be qubits, dims are {:?}",
            dims
        )));
    }
    Ok(kept)
}

/// `τ₄` of a `2⊗2⊗2⊗n` pure state (in any site order) with `traced_site`
/// playing the role of the measured party.
pub fn tau4_pure4(state: &StateVector, traced_site: usize, config: &RoofConfig) -> Result<Tau4Report> {
    let kept = kept_sites(state.dims(), traced_site)?;
    let rho = state.reduced(&kept)?;
    let mut report = tau4_of_dm(&rho, config)?;
    report.traced_site = Some(traced_site);
    Ok(report)
}

/// `[τ_(A)BCD, τ_A(B)CD, τ_AB(C)D, τ_ABC(D)]`: component `k` traces site `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementVector(pub [f64; 4]);

pub fn entanglement_vector(state: &StateVector, config: &RoofConfig) -> Result<EntanglementVector> {
    Ok(EntanglementVector(
        entanglement_vector_reports(state, config)?.map(|r| r.tau4),
    ))
}

/// Full reports behind [`entanglement_vector`].
pub fn entanglement_vector_reports(state: &StateVector, config: &RoofConfig) -> Result<[Tau4Report; 4]> {
    require_dims("entanglement vector", state.dims(), &[2, 2, 2, 2])?;
    let reports = (0..4)
        .into_par_iter()
        .map(|k| tau4_pure4(state, k, config))
        .collect::<Result<Vec<_>>>()?;
    let [a, b, c, d]: [Tau4Report; 4] = reports.try_into().expect("four sites");
    Ok([a, b, c, d])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "decision")]
pub enum Certification {
    CertifiedNonzero { lower_bound: f64 },
    ConsistentWithZero { gap: f64 },
}

impl Certification {
    pub fn is_nonzero(&self) -> bool {
        matches!(self, Certification::CertifiedNonzero { .. })
    }
}

/// Nonzero verdict when the witness-certified lower bound on `τ₄` exceeds
/// `min_gap`; otherwise the bound is reported as the residual gap.
pub fn certify_report(report: &Tau4Report, min_gap: f64) -> Certification {
    if report.certified_lower > min_gap {
        Certification::CertifiedNonzero {
            lower_bound: report.certified_lower,
        }
    } else {
        Certification::ConsistentWithZero {
            gap: report.certified_lower,
        }
    }
}

pub fn certify_nonzero(
    state: &StateVector,
    traced_site: usize,
    config: &RoofConfig,
    min_gap: f64,
) -> Result<Certification> {
    Ok(certify_report(&tau4_pure4(state, traced_site, config)?, min_gap))
}

/// One measurement in a round: a Kraus set on `site`, and for each outcome
/// either the next measurement (conditioned on it) or nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolNode {
    pub site: usize,
    pub kraus: Vec<DMatrix<C64>>,
    pub children: Vec<ProtocolNode>,
}

impl ProtocolNode {
    fn validate(&self) -> Result<()> {
        let defect = kraus_defect(&self.kraus);
        if defect > KRAUS_TOL {
            return Err(Error::IncompleteKraus(defect));
        }
        if !self.children.is_empty() && self.children.len() != self.kraus.len() {
            return Err(Error::InvalidConfig(format!(
                "node on site {} has {} operators but {} children",
                self.site,
                self.kraus.len(),
                self.children.len()
            )));
        }
        self.children.iter().try_for_each(ProtocolNode::validate)
    }
}

/// A classically-coordinated measurement tree. The standard round measures
/// S, then A, B, C in turn, then S again, each choice conditioned on all
/// earlier outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloccProtocol {
    pub root: ProtocolNode,
}

/// Stage order `[S, A, B, C, S]` for a given measured site.
pub fn stage_sites(traced_site: usize) -> [usize; 5] {
    let k: Vec<usize> = (0..4).filter(|&s| s != traced_site).collect();
    [traced_site, k[0], k[1], k[2], traced_site]
}

impl SloccProtocol {
    /// Builds the tree by calling `kraus(stage, site)` for every node.
    pub fn from_stages<F>(sites: &[usize], mut kraus: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<Vec<DMatrix<C64>>>,
    {
        fn build<F>(sites: &[usize], stage: usize, kraus: &mut F) -> Result<ProtocolNode>
        where
            F: FnMut(usize, usize) -> Result<Vec<DMatrix<C64>>>,
        {
            let ops = kraus(stage, sites[stage])?;
            let children = if stage + 1 < sites.len() {
                (0..ops.len())
                    .map(|_| build(sites, stage + 1, kraus))
                    .collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            Ok(ProtocolNode {
                site: sites[stage],
                kraus: ops,
                children,
            })
        }
        if sites.is_empty() {
            return Err(Error::InvalidConfig("protocol needs at least one stage".into()));
        }
        let protocol = Self {
            root: build(sites, 0, &mut kraus)?,
        };
        protocol.validate()?;
        Ok(protocol)
    }

    /// Every stage applies the identity, a single certain outcome.
    pub fn identity(dims: &[usize], traced_site: usize) -> Result<Self> {
        kept_sites(dims, traced_site)?;
        Self::from_stages(&stage_sites(traced_site), |_, site| {
            Ok(vec![DMatrix::identity(dims[site], dims[site])])
        })
    }

    /// Random five-stage round with `outcomes` Kraus operators per stage.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], traced_site: usize, outcomes: usize, rng: &mut R) -> Result<Self> {
        kept_sites(dims, traced_site)?;
        Self::from_stages(&stage_sites(traced_site), |_, site| {
            random_kraus_set_with(dims[site], outcomes, rng)
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.root.validate()
    }

    pub fn leaf_count(&self) -> usize {
        fn count(n: &ProtocolNode) -> usize {
            if n.children.is_empty() {
                n.kraus.len()
            } else {
                n.children.iter().map(count).sum()
            }
        }
        count(&self.root)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloccOutcome {
    /// Outcome index at each stage.
    pub path: Vec<usize>,
    pub probability: f64,
    /// Normalized post-measurement state.
    pub state: StateVector,
    /// Product of `|det|` of every operator applied away from `skip_site`.
    pub det_factor: f64,
}

/// Enumerates every outcome of one round. Operators compose in stage order.
pub fn slocc_round(state: &StateVector, protocol: &SloccProtocol, skip_site: usize) -> Result<Vec<SloccOutcome>> {
    protocol.validate()?;
    let mut out = Vec::new();
    let mut path = Vec::new();
    walk(&protocol.root, state, 1.0, skip_site, &mut path, &mut out)?;
    Ok(out)
}

fn walk(
    node: &ProtocolNode,
    state: &StateVector,
    det: f64,
    skip_site: usize,
    path: &mut Vec<usize>,
    out: &mut Vec<SloccOutcome>,
) -> Result<()> {
    for (k, op) in node.kraus.iter().enumerate() {
        let (next, _) = apply_local(state, &[LocalOperator::new(node.site, op.clone())])?;
        let probability = next.norm_sqr();
        if probability <= OUTCOME_FLOOR {
            continue;
        }
        let det = if node.site == skip_site {
            det
        } else {
            det * op.determinant().norm()
        };
        path.push(k);
        if node.children.is_empty() {
            out.push(SloccOutcome {
                path: path.clone(),
                probability,
                state: next.normalize()?,
                det_factor: det,
            });
        } else {
            walk(&node.children[k], &next, det, skip_site, path, out)?;
        }
        path.pop();
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityTrial {
    pub trial: usize,
    pub outcomes: usize,
    pub probability_total: f64,
    /// `Σ N τ₄(post)`.
    pub post_average: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub traced_site: usize,
    pub pre: f64,
    pub trials: Vec<MonotonicityTrial>,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Average post-round `τ₄` for one protocol, against a precomputed `pre`.
pub fn monotonicity_trial(
    state: &StateVector,
    traced_site: usize,
    protocol: &SloccProtocol,
    pre: f64,
    config: &RoofConfig,
    trial: usize,
) -> Result<MonotonicityTrial> {
    let outcomes = slocc_round(state, protocol, traced_site)?;
    let values = outcomes
        .par_iter()
        .map(|o| Ok(o.probability * tau4_pure4(&o.state, traced_site, config)?.tau4))
        .collect::<Result<Vec<f64>>>()?;
    let post_average: f64 = values.iter().sum();
    Ok(MonotonicityTrial {
        trial,
        outcomes: outcomes.len(),
        probability_total: outcomes.iter().map(|o| o.probability).sum(),
        post_average,
        violation: post_average - pre,
    })
}

/// Random five-stage rounds with two outcomes per stage; trial `t` draws its
/// protocol from stream `t` of `seed`.
pub fn check_monotonicity(
    state: &StateVector,
    traced_site: usize,
    trials: usize,
    seed: u64,
    config: &RoofConfig,
    tolerance: f64,
) -> Result<MonotonicityReport> {
    let pre = tau4_pure4(state, traced_site, config)?.tau4;
    let records = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = derived_rng(seed, t as u64);
            let protocol = SloccProtocol::random(state.dims(), traced_site, 2, &mut rng)?;
            monotonicity_trial(state, traced_site, &protocol, pre, config, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_violation = records.iter().map(|r| r.violation).fold(f64::NEG_INFINITY, f64::max);
    Ok(MonotonicityReport {
        traced_site,
        pre,
        passed: records.iter().all(|r| r.violation <= tolerance),
        trials: records,
        max_violation,
        tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcavityPoint {
    pub lambda: f64,
    /// `τ₄[λρ₁ + (1−λ)ρ₂]`
    pub mixed: f64,
    /// `λτ₄[ρ₁] + (1−λ)τ₄[ρ₂]`
    pub chord: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub endpoints: [f64; 2],
    pub points: Vec<ConcavityPoint>,
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn check_concavity(
    dm1: &DensityMatrix,
    dm2: &DensityMatrix,
    lambdas: &[f64],
    config: &RoofConfig,
    tolerance: f64,
) -> Result<ConcavityReport> {
    if let Some(bad) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::InvalidConfig(format!("mixing weight {bad} outside [0, 1]")));
    }
    let ends = [tau4_of_dm(dm1, config)?, tau4_of_dm(dm2, config)?];
    let [t1, t2] = [ends[0].tau4, ends[1].tau4];
    let points = lambdas
        .par_iter()
        .map(|&lambda| {
            let mixed = tau4_of_dm(&dm1.mix(dm2, lambda)?, config)?.tau4;
            let chord = lambda * t1 + (1.0 - lambda) * t2;
            Ok(ConcavityPoint {
                lambda,
                mixed,
                chord,
                violation: chord - mixed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_violation = points.iter().map(|p| p.violation).fold(f64::NEG_INFINITY, f64::max);
    Ok(ConcavityReport {
        endpoints: [t1, t2],
        passed: points.iter().all(|p| p.violation <= tolerance),
        points,
        max_violation,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{bell_pair_product, family_state, ghz4, w4, FamilyId, FamilySpec};
    use crate::qstate::{random_pure, seeded_rng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn cfg() -> RoofConfig {
        RoofConfig::default()
    }

    #[test]
    fn pure_three_qubit_input_is_zero() {
        let ghz3 = StateVector::from_terms(&[(c(1.0), "000"), (c(1.0), "111")])
            .unwrap()
            .normalize()
            .unwrap();
        let r = tau4_of_dm(&ghz3.projector(), &cfg()).unwrap();
        assert!(r.tau4 < 1e-7, "{}", r.tau4);
        assert_eq!(r.bias, EstimateBias::Lower);
        assert!(r.traced_site.is_none());
    }

    #[test]
    fn ghz_is_one() {
        let r = tau4_pure4(&ghz4(), 3, &cfg()).unwrap();
        assert!((r.tau4 - 1.0).abs() < 1e-3, "{}", r.tau4);
        assert!(r.certified_lower >= 0.99 && r.certified_lower <= r.tau4 + 1e-9);
        assert_eq!(r.traced_site, Some(3));
        let cert = certify_nonzero(&ghz4(), 3, &cfg(), DEFAULT_CERTIFY_GAP).unwrap();
        assert!(matches!(cert, Certification::CertifiedNonzero { lower_bound } if lower_bound >= 0.99));
    }

    #[test]
    fn zero_cases() {
        assert!(tau4_pure4(&w4(), 3, &cfg()).unwrap().tau4 <= 2e-3);
        assert!(tau4_pure4(&bell_pair_product(), 3, &cfg()).unwrap().tau4 <= 1e-3);
        let chi = random_pure(&[2, 2, 2], 4).unwrap();
        let gamma = random_pure(&[2], 5).unwrap();
        assert!(tau4_pure4(&chi.tensor(&gamma), 3, &cfg()).unwrap().tau4 <= 1e-3);
        match certify_nonzero(&w4(), 3, &cfg(), DEFAULT_CERTIFY_GAP).unwrap() {
            Certification::ConsistentWithZero { gap } => assert!(gap <= 2e-3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kept_sites_must_be_qubits() {
        assert!(kept_sites(&[2, 2, 3, 2], 0).is_err());
        assert!(kept_sites(&[2, 2, 2], 0).is_err());
        assert!(kept_sites(&[2, 2, 2, 2], 4).is_err());
        assert_eq!(kept_sites(&[3, 2, 2, 2], 0).unwrap(), vec![1, 2, 3]);
        let qutrit = random_pure(&[2, 2, 2, 3], 8).unwrap();
        let r = tau4_pure4(&qutrit, 3, &RoofConfig::fast()).unwrap();
        assert!((0.0..=1.0).contains(&r.tau4));
        assert!(tau4_pure4(&qutrit, 0, &cfg()).is_err());
    }

    #[test]
    fn entanglement_vectors() {
        let v = entanglement_vector(&ghz4(), &cfg()).unwrap();
        assert!(v.0.iter().all(|x| (x - 1.0).abs() < 1e-3), "{v:?}");
        let v = entanglement_vector(&w4(), &cfg()).unwrap();
        assert!(v.0.iter().all(|&x| x <= 2e-3), "{v:?}");
        let l = family_state(&FamilySpec::new(FamilyId::L07Plus1Bar, &[]).unwrap()).unwrap();
        let reports = entanglement_vector_reports(&l, &cfg()).unwrap();
        assert!(certify_report(&reports[0], DEFAULT_CERTIFY_GAP).is_nonzero());
        assert!(reports[1..].iter().all(|r| r.tau4 <= 2e-3));
        assert!(entanglement_vector(&random_pure(&[2, 2, 2], 1).unwrap(), &cfg()).is_err());
    }

    #[test]
    fn identity_round() {
        let s = random_pure(&[2; 4], 3).unwrap();
        let p = SloccProtocol::identity(s.dims(), 3).unwrap();
        let out = slocc_round(&s, &p, 3).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].probability - 1.0).abs() < 1e-12);
        assert!((out[0].state.inner(&s).norm() - 1.0).abs() < 1e-12);
        assert!((out[0].det_factor - 1.0).abs() < 1e-15);
        assert_eq!(out[0].path, vec![0; 5]);
    }

    #[test]
    fn measuring_ghz_on_the_fourth_site() {
        let mut p0 = DMatrix::<C64>::zeros(2, 2);
        p0[(0, 0)] = c(1.0);
        let mut p1 = DMatrix::<C64>::zeros(2, 2);
        p1[(1, 1)] = c(1.0);
        let mut first = true;
        let p = SloccProtocol::from_stages(&stage_sites(3), |_, _| {
            Ok(if std::mem::take(&mut first) {
                vec![p0.clone(), p1.clone()]
            } else {
                vec![DMatrix::identity(2, 2)]
            })
        })
        .unwrap();
        let out = slocc_round(&ghz4(), &p, 3).unwrap();
        assert_eq!(out.len(), 2);
        for (o, idx) in out.iter().zip([0, 15]) {
            assert!((o.probability - 0.5).abs() < 1e-12);
            assert!((o.state.amps()[idx].norm() - 1.0).abs() < 1e-12);
        }
        let trial = monotonicity_trial(&ghz4(), 3, &p, 1.0, &cfg(), 0).unwrap();
        assert!(trial.post_average < 1e-7 && trial.violation < -0.99);
    }

    #[test]
    fn random_rounds_conserve_probability() {
        let mut rng = seeded_rng(17);
        for seed in 0..5 {
            let s = random_pure(&[2, 2, 2, 3], seed).unwrap();
            let p = SloccProtocol::random(s.dims(), 3, 2, &mut rng).unwrap();
            assert_eq!(p.leaf_count(), 32);
            let out = slocc_round(&s, &p, 3).unwrap();
            let total: f64 = out.iter().map(|o| o.probability).sum();
            assert!((total - 1.0).abs() < 1e-8);
            assert!(out.iter().all(|o| o.state.is_normalized()));
        }
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let half = DMatrix::<C64>::identity(2, 2).scale(0.5);
        let r = SloccProtocol::from_stages(&[3], |_, _| Ok(vec![half.clone()]));
        assert!(matches!(r, Err(Error::IncompleteKraus(_))));
        let mut p = SloccProtocol::identity(&[2; 4], 3).unwrap();
        p.root.kraus[0] = half;
        let s = ghz4();
        assert!(matches!(slocc_round(&s, &p, 3), Err(Error::IncompleteKraus(_))));
    }

    #[test]
    fn identity_protocol_keeps_tau4() {
        let s = random_pure(&[2; 4], 12).unwrap();
        let p = SloccProtocol::identity(s.dims(), 3).unwrap();
        let pre = tau4_pure4(&s, 3, &cfg()).unwrap().tau4;
        let t = monotonicity_trial(&s, 3, &p, pre, &cfg(), 0).unwrap();
        assert!(t.violation.abs() < 1e-6, "{}", t.violation);
    }

    #[test]
    fn monotonicity_report_shape() {
        let s = random_pure(&[2; 4], 6).unwrap();
        let r = check_monotonicity(&s, 3, 2, 9, &RoofConfig::fast(), HARNESS_TOL).unwrap();
        assert_eq!(r.trials.len(), 2);
        assert!(r.passed, "{r:?}");
        assert!(r.trials.iter().all(|t| t.outcomes == 32));
    }

    #[test]
    fn concavity_endpoints_and_degenerate_mixture() {
        let r1 = random_pure(&[2; 4], 30).unwrap().reduced(&[0, 1, 2]).unwrap();
        let r2 = random_pure(&[2; 4], 31).unwrap().reduced(&[0, 1, 2]).unwrap();
        let f = RoofConfig::fast();
        let rep = check_concavity(&r1, &r2, &[0.0, 1.0], &f, HARNESS_TOL).unwrap();
        assert_eq!(rep.points[0].mixed, rep.endpoints[1]);
        assert_eq!(rep.points[1].mixed, rep.endpoints[0]);
        assert!(rep.max_violation.abs() < 1e-12);
        let same = check_concavity(&r1, &r1, &[0.25, 0.5], &f, HARNESS_TOL).unwrap();
        assert!(same.max_violation.abs() < 1e-6, "{same:?}");
        assert!(check_concavity(&r1, &r2, &[1.5], &f, HARNESS_TOL).is_err());
    }
}
