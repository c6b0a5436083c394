//! Closed-form entanglement measures: the pure-state 3-tangle, two-qubit
//! concurrence and concurrence of assistance, and the four-qubit n-tangle.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{apply_local, eigendecompose, DensityMatrix, LocalOperator, StateVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Mu3,
    Tau3,
    Concurrence,
    ConcurrenceAssist,
    NTangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub value: f64,
    pub kind: MeasureKind,
}

impl MeasureValue {
    fn new(kind: MeasureKind, value: f64) -> Self {
        Self { value, kind }
    }
}

pub(crate) fn require_dims(op: &'static str, found: &[usize], expected: &[usize]) -> Result<()> {
    if found != expected {
        return Err(Error::WrongDims {
            op,
            expected: expected.to_vec(),
            found: found.to_vec(),
        });
    }
    Ok(())
}

/// `d₁ − 2d₂ + 4d₃` for amplitudes `a_{ijk}` stored at index `4i + 2j + k`.
///
/// Evaluated over complex amplitudes; the modulus is taken by the callers.
/// Homogeneous of degree four, so unnormalized vectors may be passed.
pub fn hyperdeterminant(a: &[C64; 8]) -> C64 {
    let [a000, a001, a010, a011, a100, a101, a110, a111] = *a;
    let d1 =
        a000 * a000 * a111 * a111 + a001 * a001 * a110 * a110 + a010 * a010 * a101 * a101 + a100 * a100 * a011 * a011;
    let p0 = a000 * a111;
    let p1 = a011 * a100;
    let p2 = a101 * a010;
    let p3 = a110 * a001;
    let d2 = p0 * p1 + p0 * p2 + p0 * p3 + p1 * p2 + p1 * p3 + p2 * p3;
    let d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100;
    d1 - 2.0 * d2 + 4.0 * d3
}

/// `√μ₃` of an unnormalized vector `x`, which equals `‖x‖² τ₃(x/‖x‖)`.
///
/// This is the contribution `pᵢ τ₃(πᵢ)` of a subnormalized ensemble member.
#[inline]
pub fn weighted_tau3(a: &[C64; 8]) -> f64 {
    2.0 * hyperdeterminant(a).norm().sqrt()
}

fn three_qubit_amps(state: &StateVector, op: &'static str) -> Result<[C64; 8]> {
    require_dims(op, state.dims(), &[2, 2, 2])?;
    let mut a = [C64::new(0.0, 0.0); 8];
    a.copy_from_slice(state.amps().as_slice());
    Ok(a)
}

pub fn mu3_pure(state: &StateVector) -> Result<MeasureValue> {
    let a = three_qubit_amps(state, "mu3")?;
    Ok(MeasureValue::new(MeasureKind::Mu3, 4.0 * hyperdeterminant(&a).norm()))
}

pub fn tau3_pure(state: &StateVector) -> Result<MeasureValue> {
    let a = three_qubit_amps(state, "tau3")?;
    Ok(MeasureValue::new(MeasureKind::Tau3, weighted_tau3(&a)))
}

/// `σ_y ⊗ σ_y` in the computational basis (real).
fn yy_entry(a: usize) -> (usize, f64) {
    match a {
        0 => (3, -1.0),
        1 => (2, 1.0),
        2 => (1, 1.0),
        _ => (0, -1.0),
    }
}

/// Decreasing square roots of the eigenvalues of `ρ ρ̃`.
///
/// With `ρ = V V†` over the subnormalized eigenvectors, the nonzero
/// eigenvalues of `ρρ̃` are the squared singular values of the symmetric
/// matrix `Vᵀ (σ_y⊗σ_y) V`, so the square roots come straight out of an SVD
/// of a rank-sized matrix.
pub fn spin_flip_lambdas(dm: &DensityMatrix) -> Result<[f64; 4]> {
    require_dims("concurrence", dm.dims(), &[2, 2])?;
    let ens = eigendecompose(dm)?;
    let r = ens.len();
    let mut out = [0.0; 4];
    if r == 0 {
        return Ok(out);
    }
    let v = DMatrix::from_fn(4, r, |a, j| {
        let m = &ens.members[j];
        m.state.amps()[a] * m.weight.sqrt()
    });
    let t = DMatrix::from_fn(r, r, |j, k| {
        (0..4)
            .map(|a| {
                let (b, s) = yy_entry(a);
                v[(a, j)] * v[(b, k)] * s
            })
            .sum::<C64>()
    });
    let mut sv: Vec<f64> = t.singular_values().iter().cloned().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    for (slot, s) in out.iter_mut().zip(sv) {
        *slot = s;
    }
    Ok(out)
}

/// Wootters concurrence `max(0, λ₁−λ₂−λ₃−λ₄)`.
pub fn concurrence_mixed_2q(dm: &DensityMatrix) -> Result<MeasureValue> {
    let l = spin_flip_lambdas(dm)?;
    Ok(MeasureValue::new(
        MeasureKind::Concurrence,
        (l[0] - l[1] - l[2] - l[3]).max(0.0),
    ))
}

/// Concurrence of assistance `Σᵢ λᵢ`, the fidelity between `ρ` and `ρ̃`.
pub fn concurrence_assist_2q(dm: &DensityMatrix) -> Result<MeasureValue> {
    let l = spin_flip_lambdas(dm)?;
    Ok(MeasureValue::new(MeasureKind::ConcurrenceAssist, l.iter().sum()))
}

/// `|⟨ψ| σ_y^{⊗4} |ψ*⟩|²`
pub fn n_tangle_4q(state: &StateVector) -> Result<MeasureValue> {
    require_dims("n-tangle", state.dims(), &[2, 2, 2, 2])?;
    let i = C64::new(0.0, 1.0);
    let zero = C64::new(0.0, 0.0);
    let sy = DMatrix::from_row_slice(2, 2, &[zero, -i, i, zero]);
    let ops: Vec<_> = (0..4).map(|k| LocalOperator::new(k, sy.clone())).collect();
    let (flipped, _) = apply_local(&state.conjugate(), &ops)?;
    Ok(MeasureValue::new(
        MeasureKind::NTangle,
        state.inner(&flipped).norm_sqr(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{haar_unitary, random_pure, seeded_rng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn norm(terms: &[(C64, &str)]) -> StateVector {
        StateVector::from_terms(terms).unwrap().normalize().unwrap()
    }

    #[test]
    fn mu3_examples() {
        let ghz = norm(&[(c(1.0), "000"), (c(1.0), "111")]);
        assert!((mu3_pure(&ghz).unwrap().value - 1.0).abs() < 1e-14);
        let w = norm(&[(c(1.0), "001"), (c(1.0), "010"), (c(1.0), "100")]);
        assert!(mu3_pure(&w).unwrap().value.abs() < 1e-15);
        let prod = StateVector::basis(vec![2, 2, 2], 0).unwrap();
        assert_eq!(mu3_pure(&prod).unwrap().value, 0.0);
        for p in [0.1f64, 0.25, 0.7] {
            let s = StateVector::from_terms(&[(c(p.sqrt()), "000"), (c((1.0 - p).sqrt()), "111")]).unwrap();
            let m = mu3_pure(&s).unwrap().value;
            assert!((m - 4.0 * p * (1.0 - p)).abs() < 1e-14);
            let t = tau3_pure(&s).unwrap().value;
            assert!((t - 2.0 * (p * (1.0 - p)).sqrt()).abs() < 1e-14);
        }
        assert!((tau3_pure(&ghz).unwrap().value - 1.0).abs() < 1e-14);
        assert!(tau3_pure(&w).unwrap().value < 1e-7);
    }

    #[test]
    fn mu3_wrong_dims() {
        let s = random_pure(&[2, 2, 2, 2], 1).unwrap();
        assert!(matches!(mu3_pure(&s), Err(Error::WrongDims { .. })));
    }

    #[test]
    fn concurrence_examples() {
        let bell = norm(&[(c(1.0), "00"), (c(1.0), "11")]).projector();
        assert!((concurrence_mixed_2q(&bell).unwrap().value - 1.0).abs() < 1e-12);
        assert!((concurrence_assist_2q(&bell).unwrap().value - 1.0).abs() < 1e-12);

        let mut m = DMatrix::<C64>::zeros(4, 4);
        m[(0, 0)] = c(0.5);
        m[(3, 3)] = c(0.5);
        let classical2 = DensityMatrix::new(vec![2, 2], m).unwrap();
        let l = spin_flip_lambdas(&classical2).unwrap();
        assert!((l[0] - 0.5).abs() < 1e-14 && (l[1] - 0.5).abs() < 1e-14 && l[2] == 0.0);
        assert!(concurrence_mixed_2q(&classical2).unwrap().value.abs() < 1e-14);
        assert!((concurrence_assist_2q(&classical2).unwrap().value - 1.0).abs() < 1e-14);

        let mixed = DensityMatrix::new(vec![2, 2], DMatrix::identity(4, 4).scale(0.25)).unwrap();
        assert!((concurrence_assist_2q(&mixed).unwrap().value - 1.0).abs() < 1e-12);
        assert_eq!(concurrence_mixed_2q(&mixed).unwrap().value, 0.0);

        let prod = StateVector::basis(vec![2, 2], 0).unwrap().projector();
        assert!(concurrence_mixed_2q(&prod).unwrap().value.abs() < 1e-14);
        assert!(concurrence_assist_2q(&prod).unwrap().value.abs() < 1e-14);
    }

    #[test]
    fn pure_state_concurrence_matches_determinant_formula() {
        for seed in 0..20 {
            let s = random_pure(&[2, 2], seed).unwrap();
            let a = s.amps();
            let direct = 2.0 * (a[0] * a[3] - a[1] * a[2]).norm();
            let rho = s.projector();
            assert!((concurrence_mixed_2q(&rho).unwrap().value - direct).abs() < 1e-10);
            assert!((concurrence_assist_2q(&rho).unwrap().value - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn n_tangle_examples() {
        let bell = norm(&[(c(1.0), "00"), (c(1.0), "11")]);
        let bb = bell.tensor(&bell);
        assert!((n_tangle_4q(&bb).unwrap().value - 1.0).abs() < 1e-12);
        let ghz = norm(&[(c(1.0), "0000"), (c(1.0), "1111")]);
        assert!((n_tangle_4q(&ghz).unwrap().value - 1.0).abs() < 1e-12);
        let w = norm(&[(c(1.0), "0001"), (c(1.0), "0010"), (c(1.0), "0100"), (c(1.0), "1000")]);
        assert!(n_tangle_4q(&w).unwrap().value.abs() < 1e-15);
        assert!(n_tangle_4q(&bell).is_err());
    }

    #[test]
    fn mu3_is_permutation_invariant() {
        for seed in 0..25 {
            let s = random_pure(&[2, 2, 2], seed).unwrap();
            let m = mu3_pure(&s).unwrap().value;
            for order in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let p = s.permute(&order).unwrap();
                assert!((mu3_pure(&p).unwrap().value - m).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn measures_are_local_unitary_invariant() {
        let mut rng = seeded_rng(77);
        for seed in 0..10 {
            let s3 = random_pure(&[2, 2, 2], seed).unwrap();
            let ops: Vec<_> = (0..3)
                .map(|k| LocalOperator::new(k, haar_unitary(2, &mut rng)))
                .collect();
            let (u3, _) = apply_local(&s3, &ops).unwrap();
            assert!((tau3_pure(&s3).unwrap().value - tau3_pure(&u3).unwrap().value).abs() < 1e-9);

            let s4 = random_pure(&[2, 2, 2, 2], seed + 100).unwrap();
            let ops: Vec<_> = (0..4)
                .map(|k| LocalOperator::new(k, haar_unitary(2, &mut rng)))
                .collect();
            let (u4, _) = apply_local(&s4, &ops).unwrap();
            let nt = |s: &StateVector| n_tangle_4q(s).unwrap().value;
            assert!((nt(&s4) - nt(&u4)).abs() < 1e-9);
            let cd = |s: &StateVector| s.reduced(&[2, 3]).unwrap();
            let (a, b) = (cd(&s4), cd(&u4));
            assert!((concurrence_mixed_2q(&a).unwrap().value - concurrence_mixed_2q(&b).unwrap().value).abs() < 1e-9);
            assert!((concurrence_assist_2q(&a).unwrap().value - concurrence_assist_2q(&b).unwrap().value).abs() < 1e-9);
        }
    }
}
