//! Monogamy of localized entanglement: `τ²_(A)BCD + τ₃²(ρ_BCD)` is bounded by
//! the 3-tangle of the state with A and B merged into one party, which has a
//! closed form through the concurrences of `ρ_CD`.

use serde::{Deserialize, Serialize};

use crate::convexroof::RoofConfig;
use crate::error::{Error, Result};
use crate::measures::{concurrence_assist_2q, concurrence_mixed_2q, require_dims, tau3_pure};
use crate::qstate::{DensityMatrix, StateVector};
use crate::tau4::tau4_pure4;

pub const MONOGAMY_TOL: f64 = 1e-2;
pub const PURE3_TOL: f64 = 1e-8;

/// `√max(0, C_a² − C²)` of a two-qubit density matrix.
pub fn tangle_gap(rho: &DensityMatrix) -> Result<f64> {
    let ca = concurrence_assist_2q(rho)?.value;
    let c = concurrence_mixed_2q(rho)?.value;
    Ok((ca * ca - c * c).max(0.0).sqrt())
}

/// 3-tangle with sites 0 and 1 merged into one party, from `ρ` of sites 2, 3.
pub fn tau3_merged_ab(state: &StateVector) -> Result<f64> {
    tau3_merged(state, 0, 1)
}

/// 3-tangle with `first` and `second` merged into one party.
pub fn tau3_merged(state: &StateVector, first: usize, second: usize) -> Result<f64> {
    require_dims("merged 3-tangle", state.dims(), &[2, 2, 2, 2])?;
    if first == second || first > 3 || second > 3 {
        return Err(Error::InvalidSubsystems(format!(
            "cannot merge sites {first} and {second}"
        )));
    }
    let rest: Vec<usize> = (0..4).filter(|&s| s != first && s != second).collect();
    tangle_gap(&state.reduced(&rest)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonogamyComponents {
    /// `τ₄` with `traced_site` traced out.
    pub tau4: f64,
    /// Roof 3-tangle of the other three sites.
    pub tau3_rest: f64,
    pub concurrence: f64,
    pub concurrence_assist: f64,
    pub tau3_merged: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonogamyReport {
    pub traced_site: usize,
    pub partner_site: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`, negative on violation.
    pub gap: f64,
    pub satisfied: bool,
    pub tolerance: f64,
    pub components: MonogamyComponents,
}

pub fn check_monogamy(state: &StateVector, config: &RoofConfig, tolerance: f64) -> Result<MonogamyReport> {
    check_monogamy_at(state, 0, 1, config, tolerance)
}

/// The inequality with `traced_site` in the role of A and `partner_site` in
/// the role of B; the remaining two sites are C and D.
pub fn check_monogamy_at(
    state: &StateVector,
    traced_site: usize,
    partner_site: usize,
    config: &RoofConfig,
    tolerance: f64,
) -> Result<MonogamyReport> {
    require_dims("monogamy", state.dims(), &[2, 2, 2, 2])?;
    if traced_site == partner_site || partner_site > 3 {
        return Err(Error::InvalidSubsystems(format!(
            "partner site {partner_site} for traced site {traced_site}"
        )));
    }
    let report = tau4_pure4(state, traced_site, config)?;
    let rest: Vec<usize> = (0..4).filter(|&s| s != traced_site && s != partner_site).collect();
    let rho = state.reduced(&rest)?;
    let ca = concurrence_assist_2q(&rho)?.value;
    let c = concurrence_mixed_2q(&rho)?.value;
    let merged = (ca * ca - c * c).max(0.0).sqrt();

    let (tau4, tau3_rest) = (report.tau4, report.tau3.value);
    let lhs = tau4 * tau4 + tau3_rest * tau3_rest;
    let rhs = merged * merged;
    Ok(MonogamyReport {
        traced_site,
        partner_site,
        lhs,
        rhs,
        gap: rhs - lhs,
        satisfied: lhs <= rhs + tolerance,
        tolerance,
        components: MonogamyComponents {
            tau4,
            tau3_rest,
            concurrence: c,
            concurrence_assist: ca,
            tau3_merged: merged,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pure3Relation {
    pub tau3: f64,
    /// `√(C_a² − C²)` of the last two qubits.
    pub via_concurrence: f64,
    pub deviation: f64,
    pub satisfied: bool,
}

/// Pure three-qubit 3-tangle against the concurrence route through `ρ` of
/// the last two qubits.
pub fn check_pure3_relation(state: &StateVector, tolerance: f64) -> Result<Pure3Relation> {
    require_dims("pure 3-tangle relation", state.dims(), &[2, 2, 2])?;
    let tau3 = tau3_pure(state)?.value;
    let via = tangle_gap(&state.reduced(&[1, 2])?)?;
    let deviation = (tau3 - via).abs();
    Ok(Pure3Relation {
        tau3,
        via_concurrence: via,
        deviation,
        satisfied: deviation <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{bell_pair_product, ghz4};
    use crate::qstate::{apply_local, haar_unitary, random_pure, seeded_rng, LocalOperator, C64};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn merged_examples() {
        assert!((tau3_merged_ab(&ghz4()).unwrap() - 1.0).abs() < 1e-12);
        let bell = StateVector::from_terms(&[(c(1.0), "00"), (c(1.0), "11")])
            .unwrap()
            .normalize()
            .unwrap();
        let s = StateVector::basis(vec![2, 2], 0).unwrap().tensor(&bell);
        assert!(tau3_merged_ab(&s).unwrap() < 1e-7);
        let prod = StateVector::basis(vec![2; 4], 0).unwrap();
        assert_eq!(tau3_merged_ab(&prod).unwrap(), 0.0);
        assert!(tau3_merged_ab(&random_pure(&[2, 2, 2], 1).unwrap()).is_err());
        assert!(tau3_merged(&bell_pair_product(), 2, 2).is_err());
    }

    #[test]
    fn pure3_examples() {
        let ghz = StateVector::from_terms(&[(c(1.0), "000"), (c(1.0), "111")])
            .unwrap()
            .normalize()
            .unwrap();
        let r = check_pure3_relation(&ghz, PURE3_TOL).unwrap();
        assert!((r.tau3 - 1.0).abs() < 1e-12 && (r.via_concurrence - 1.0).abs() < 1e-12);
        let w = StateVector::from_terms(&[(c(1.0), "001"), (c(1.0), "010"), (c(1.0), "100")])
            .unwrap()
            .normalize()
            .unwrap();
        let r = check_pure3_relation(&w, PURE3_TOL).unwrap();
        assert!(r.tau3 < 1e-7 && r.satisfied, "{r:?}");
        let rho = w.reduced(&[1, 2]).unwrap();
        let ca = concurrence_assist_2q(&rho).unwrap().value;
        let cc = concurrence_mixed_2q(&rho).unwrap().value;
        assert!((ca - 2.0 / 3.0).abs() < 1e-12 && (cc - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn merged_is_local_unitary_invariant() {
        let mut rng = seeded_rng(21);
        for seed in 0..10 {
            let s = random_pure(&[2; 4], seed).unwrap();
            let base = tau3_merged_ab(&s).unwrap();
            for site in [0, 1] {
                let (u, _) = apply_local(&s, &[LocalOperator::new(site, haar_unitary(2, &mut rng))]).unwrap();
                assert!((tau3_merged_ab(&u).unwrap() - base).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ghz_saturates() {
        let r = check_monogamy(&ghz4(), &RoofConfig::default(), MONOGAMY_TOL).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-3 && (r.rhs - 1.0).abs() < 1e-9, "{r:?}");
        assert!(r.gap.abs() <= 1e-3 && r.satisfied);
        let prod = StateVector::basis(vec![2; 4], 0).unwrap();
        let r = check_monogamy(&prod, &RoofConfig::default(), MONOGAMY_TOL).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    }

    #[test]
    fn rejects_bad_sites() {
        let s = ghz4();
        assert!(check_monogamy_at(&s, 1, 1, &RoofConfig::default(), MONOGAMY_TOL).is_err());
        assert!(check_monogamy_at(&s, 0, 4, &RoofConfig::default(), MONOGAMY_TOL).is_err());
    }
}
