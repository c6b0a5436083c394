//! Convex-roof search for the mixed-state 3-tangle.
//!
//! Every decomposition of a rank-`r` density matrix into `m ≥ r` members is
//! obtained from its spectral decomposition `{λⱼ, |eⱼ⟩}` and an `m×m` unitary:
//! `|π̃ᵢ⟩ = Σⱼ Uᵢⱼ √λⱼ |eⱼ⟩`, with weight `pᵢ = ⟨π̃ᵢ|π̃ᵢ⟩`. The unitary is the
//! exponential of an anti-Hermitian matrix built from `m²` real parameters,
//! so the search space is unconstrained.
//!
//! Minimizing the ensemble-average 3-tangle gives an upper bound on the
//! convex roof `τ₃(ρ)`; maximizing gives a lower bound on the 3-tangle of
//! assistance `τₐ(ρ)`. Both bounds are witnessed by the returned ensemble.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{require_dims, tau3_pure, weighted_tau3};
use crate::qstate::{derived_rng, eigendecompose, haar_unitary, DensityMatrix, Ensemble, Member, StateVector, C64};
use crate::simplex::{minimize, SimplexOptions};

/// Members lighter than this are dropped from witness ensembles.
pub const WITNESS_WEIGHT_FLOOR: f64 = 1e-14;
const UNITARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoofConfig {
    /// Number of ensemble members; `None` picks `max(r, min(r², 4))` for rank `r`.
    pub ensemble_length: Option<usize>,
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for RoofConfig {
    fn default() -> Self {
        Self {
            ensemble_length: None,
            restarts: 32,
            max_iterations: 2000,
            tolerance: 1e-8,
            seed: 0x7a04,
        }
    }
}

impl RoofConfig {
    /// Lighter search used by the batch property suites, which evaluate
    /// thousands of roofs: 8 restarts of at most 1000 iterations.
    pub fn fast() -> Self {
        Self {
            restarts: 8,
            max_iterations: 1000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.ensemble_length == Some(0) {
            return Err(Error::InvalidConfig("ensemble length must be positive".into()));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::InvalidConfig(format!("tolerance {}", self.tolerance)));
        }
        Ok(())
    }

    pub fn length_for_rank(&self, rank: usize) -> usize {
        self.ensemble_length.unwrap_or_else(|| rank.max((rank * rank).min(4)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundDirection {
    UpperBoundOnMin,
    LowerBoundOnMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoofDiagnostics {
    pub ensemble_length: usize,
    pub rank: usize,
    pub iterations: usize,
    pub evaluations: usize,
    pub restarts: usize,
    pub best_restart: usize,
    pub best_per_restart: Vec<f64>,
    /// Set when the witness came from the opposite search.
    pub cross_evaluated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoofResult {
    pub value: f64,
    pub witness: Ensemble,
    pub bound_direction: BoundDirection,
    pub diagnostics: RoofDiagnostics,
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a.scale(scale);
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    // ‖x‖ ≤ ½ so 14 terms reach double precision
    for k in 1..=14 {
        term = (&term * &x).unscale(k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// 4×4 complex matrix with split real and imaginary parts; the hot path of
/// the roof search multiplies a lot of these.
#[derive(Clone, Copy)]
struct M4 {
    re: [[f64; 4]; 4],
    im: [[f64; 4]; 4],
}

impl M4 {
    const ZERO: M4 = M4 {
        re: [[0.0; 4]; 4],
        im: [[0.0; 4]; 4],
    };

    fn identity() -> M4 {
        let mut m = M4::ZERO;
        for k in 0..4 {
            m.re[k][k] = 1.0;
        }
        m
    }

    #[inline]
    fn mul(&self, o: &M4) -> M4 {
        let mut out = M4::ZERO;
        for i in 0..4 {
            for k in 0..4 {
                let (ar, ai) = (self.re[i][k], self.im[i][k]);
                for j in 0..4 {
                    out.re[i][j] += ar * o.re[k][j] - ai * o.im[k][j];
                    out.im[i][j] += ar * o.im[k][j] + ai * o.re[k][j];
                }
            }
        }
        out
    }

    /// `self += c·o` for real `c`.
    #[inline]
    fn add_scaled(&mut self, o: &M4, c: f64) {
        for i in 0..4 {
            for j in 0..4 {
                self.re[i][j] += c * o.re[i][j];
                self.im[i][j] += c * o.im[i][j];
            }
        }
    }

    fn inf_norm(&self) -> f64 {
        (0..4)
            .map(|i| (0..4).map(|j| self.re[i][j].hypot(self.im[i][j])).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn get(&self, i: usize, j: usize) -> C64 {
        C64::new(self.re[i][j], self.im[i][j])
    }
}

/// Degree-15 Taylor polynomial evaluated by Paterson–Stockmeyer (six
/// products), after scaling to ‖A‖∞ ≤ ½, then squaring back.
fn expm4(a: &M4) -> M4 {
    let norm = a.inf_norm();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let mut x = M4::ZERO;
    x.add_scaled(a, scale);
    let x2 = x.mul(&x);
    let x3 = x2.mul(&x);
    let x4 = x2.mul(&x2);
    let powers = [M4::identity(), x, x2, x3];
    let mut inv_fact = [1.0f64; 16];
    for k in 1..16 {
        inv_fact[k] = inv_fact[k - 1] / k as f64;
    }
    // p(x) = B₀ + x⁴(B₁ + x⁴(B₂ + x⁴ B₃)), Bₖ = Σⱼ xʲ/(4k+j)!
    let block = |k: usize| {
        let mut b = M4::ZERO;
        for (j, p) in powers.iter().enumerate() {
            b.add_scaled(p, inv_fact[4 * k + j]);
        }
        b
    };
    let mut acc = block(3);
    for k in (0..3).rev() {
        let mut next = x4.mul(&acc);
        next.add_scaled(&block(k), 1.0);
        acc = next;
    }
    for _ in 0..squarings {
        acc = acc.mul(&acc);
    }
    acc
}

fn antihermitian_entries(params: &[f64], m: usize, mut put: impl FnMut(usize, usize, C64)) {
    for (k, &d) in params[..m].iter().enumerate() {
        put(k, k, C64::new(0.0, d));
    }
    let mut p = m;
    for j in 0..m {
        for k in j + 1..m {
            let (re, im) = (params[p], params[p + 1]);
            p += 2;
            put(j, k, C64::new(re, im));
            put(k, j, C64::new(-re, im));
        }
    }
}

/// Unitary `exp(A)` with `A` anti-Hermitian built from `m²` real parameters:
/// `m` diagonal phases followed by (real, imaginary) pairs for the upper triangle.
pub fn unitary_from_params(params: &[f64], m: usize) -> DMatrix<C64> {
    debug_assert_eq!(params.len(), m * m);
    let mut a = DMatrix::<C64>::zeros(m, m);
    antihermitian_entries(params, m, |j, k, z| a[(j, k)] = z);
    expm(&a)
}

/// Same as [`unitary_from_params`] for `m ≤ 4`, embedded in the top-left
/// block of a stack-allocated 4×4 matrix.
fn unitary4_from_params(params: &[f64], m: usize) -> M4 {
    let mut a = M4::ZERO;
    antihermitian_entries(params, m, |j, k, z| {
        a.re[j][k] = z.re;
        a.im[j][k] = z.im;
    });
    expm4(&a)
}

fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let m = u.ncols();
    (u.adjoint() * u - DMatrix::<C64>::identity(m, m)).camax()
}

/// Realizes the decomposition generated by `u` from a spectral ensemble.
pub fn ensemble_from_unitary(spectral: &Ensemble, u: &DMatrix<C64>) -> Result<Ensemble> {
    let r = spectral.len();
    let m = u.nrows();
    if u.ncols() != m {
        return Err(Error::InvalidDims(format!("{}x{} mixing matrix", m, u.ncols())));
    }
    if m < r {
        return Err(Error::EnsembleTooShort { length: m, rank: r });
    }
    let defect = unitarity_defect(u);
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let first = spectral
        .members
        .first()
        .ok_or_else(|| Error::InvalidDims("empty spectral ensemble".into()))?;
    let dims = first.state.dims().to_vec();
    let n = first.state.dim();
    let mut members = Vec::with_capacity(m);
    for i in 0..m {
        let mut amps = vec![C64::new(0.0, 0.0); n];
        for (j, member) in spectral.members.iter().enumerate() {
            let c = u[(i, j)] * member.weight.sqrt();
            for (slot, a) in amps.iter_mut().zip(member.state.amps().iter()) {
                *slot += c * a;
            }
        }
        let raw = StateVector::new(dims.clone(), amps)?;
        let weight = raw.norm_sqr();
        if weight > WITNESS_WEIGHT_FLOOR {
            members.push(Member {
                weight,
                state: raw.normalize()?,
            });
        }
    }
    Ok(Ensemble { members })
}

/// Average pure-state 3-tangle of an ensemble of three-qubit states.
pub fn average_tau3(ensemble: &Ensemble) -> Result<f64> {
    ensemble.average(|s| Ok(tau3_pure(s)?.value))
}

/// The hot loop: subnormalized spectral vectors and the ensemble length.
struct RoofProblem {
    vectors: Vec<[C64; 8]>,
    length: usize,
}

impl RoofProblem {
    fn new(spectral: &Ensemble, length: usize) -> Self {
        let vectors = spectral
            .members
            .iter()
            .map(|m| {
                let s = m.weight.sqrt();
                let mut v = [C64::new(0.0, 0.0); 8];
                for (slot, a) in v.iter_mut().zip(m.state.amps().iter()) {
                    *slot = a * s;
                }
                v
            })
            .collect();
        Self { vectors, length }
    }

    fn value(&self, u: impl Fn(usize, usize) -> C64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.length {
            let mut x = [C64::new(0.0, 0.0); 8];
            for (j, v) in self.vectors.iter().enumerate() {
                let c = u(i, j);
                for (slot, a) in x.iter_mut().zip(v) {
                    *slot += c * a;
                }
            }
            total += weighted_tau3(&x);
        }
        total
    }

    fn value_at(&self, params: &[f64]) -> f64 {
        if self.length <= 4 {
            let u = unitary4_from_params(params, self.length);
            self.value(|i, j| u.get(i, j))
        } else {
            let u = unitary_from_params(params, self.length);
            self.value(|i, j| u[(i, j)])
        }
    }
}

struct RestartOutcome {
    params: Vec<f64>,
    value: f64,
    iterations: usize,
    evaluations: usize,
}

fn run_restart(problem: &RoofProblem, objective: Objective, config: &RoofConfig, index: usize) -> RestartOutcome {
    let dim = problem.length * problem.length;
    let x0: Vec<f64> = if index == 0 {
        vec![0.0; dim]
    } else {
        let mut rng = derived_rng(config.seed, index as u64);
        (0..dim)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect()
    };
    let sign = match objective {
        Objective::Min => 1.0,
        Objective::Max => -1.0,
    };
    let opts = SimplexOptions {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        initial_step: 1.0,
    };
    let out = minimize(|x| sign * problem.value_at(x), &x0, &opts);
    RestartOutcome {
        value: sign * out.value,
        params: out.x,
        iterations: out.iterations,
        evaluations: out.evaluations,
    }
}

fn better(objective: Objective, candidate: f64, incumbent: f64) -> bool {
    match objective {
        Objective::Min => candidate < incumbent,
        Objective::Max => candidate > incumbent,
    }
}

fn spectral_for(dm: &DensityMatrix) -> Result<Ensemble> {
    require_dims("convex roof", dm.dims(), &[2, 2, 2])?;
    let spectral = eigendecompose(dm)?;
    if spectral.is_empty() {
        return Err(Error::InvalidDims("density matrix has no support".into()));
    }
    Ok(spectral)
}

/// Restarted simplex search over decompositions of `dm`.
pub fn optimize_roof(dm: &DensityMatrix, objective: Objective, config: &RoofConfig) -> Result<RoofResult> {
    config.validate()?;
    let spectral = spectral_for(dm)?;
    let rank = spectral.len();
    let length = config.length_for_rank(rank);
    if length < rank {
        return Err(Error::EnsembleTooShort { length, rank });
    }
    let problem = RoofProblem::new(&spectral, length);

    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|k| run_restart(&problem, objective, config, k))
        .collect();

    let mut best = 0;
    for (k, o) in outcomes.iter().enumerate() {
        if better(objective, o.value, outcomes[best].value) {
            best = k;
        }
    }
    let u = unitary_from_params(&outcomes[best].params, length);
    let witness = ensemble_from_unitary(&spectral, &u)?;
    let value = average_tau3(&witness)?.clamp(0.0, 1.0);

    Ok(RoofResult {
        value,
        witness,
        bound_direction: match objective {
            Objective::Min => BoundDirection::UpperBoundOnMin,
            Objective::Max => BoundDirection::LowerBoundOnMax,
        },
        diagnostics: RoofDiagnostics {
            ensemble_length: length,
            rank,
            iterations: outcomes.iter().map(|o| o.iterations).sum(),
            evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
            restarts: config.restarts,
            best_restart: best,
            best_per_restart: outcomes.iter().map(|o| o.value).collect(),
            cross_evaluated: false,
        },
    })
}

/// Runs both searches and lets each adopt the other's witness when it is
/// better for its own objective, so `max.value ≥ min.value` always holds.
pub fn roof_pair(dm: &DensityMatrix, config: &RoofConfig) -> Result<(RoofResult, RoofResult)> {
    let (lo, hi) = rayon::join(
        || optimize_roof(dm, Objective::Min, config),
        || optimize_roof(dm, Objective::Max, config),
    );
    let (mut lo, mut hi) = (lo?, hi?);
    if hi.value < lo.value {
        let (lo_w, lo_v) = (lo.witness.clone(), lo.value);
        lo.witness = hi.witness.clone();
        lo.value = hi.value;
        lo.diagnostics.cross_evaluated = true;
        hi.witness = lo_w;
        hi.value = lo_v;
        hi.diagnostics.cross_evaluated = true;
    }
    Ok((lo, hi))
}

/// Upper bound on the convex-roof 3-tangle `τ₃(ρ)`.
pub fn tau3_mixed(dm: &DensityMatrix, config: &RoofConfig) -> Result<RoofResult> {
    Ok(roof_pair(dm, config)?.0)
}

/// Lower bound on the 3-tangle of assistance `τₐ(ρ)`.
pub fn tau_a(dm: &DensityMatrix, config: &RoofConfig) -> Result<RoofResult> {
    Ok(roof_pair(dm, config)?.1)
}

/// Brute-force cross-check: best minimum and maximum of the average 3-tangle
/// over `samples` Haar-random unitaries at every length from the rank to 4.
pub fn grid_oracle(dm: &DensityMatrix, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let spectral = spectral_for(dm)?;
    let rank = spectral.len();
    if rank > 4 {
        return Err(Error::InvalidDims(format!("rank {rank} exceeds 4")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for length in rank..=4 {
        let mut rng = derived_rng(seed, length as u64);
        for _ in 0..samples {
            let u = haar_unitary(length, &mut rng);
            let v = average_tau3(&ensemble_from_unitary(&spectral, &u)?)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_pure, seeded_rng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn ghz_mixture() -> DensityMatrix {
        StateVector::from_terms(&[(c(1.0), "0000"), (c(1.0), "1111")])
            .unwrap()
            .normalize()
            .unwrap()
            .reduced(&[0, 1, 2])
            .unwrap()
    }

    fn quick() -> RoofConfig {
        RoofConfig {
            restarts: 6,
            ..Default::default()
        }
    }

    #[test]
    fn expm_matches_closed_form_rotation() {
        // exp(iθ σ_x) = cos θ I + i sin θ σ_x
        let t: f64 = 2.7;
        let a = DMatrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, t), C64::new(0.0, t), c(0.0)]);
        let e = expm(&a);
        assert!((e[(0, 0)] - c(t.cos())).norm() < 1e-14);
        assert!((e[(0, 1)] - C64::new(0.0, t.sin())).norm() < 1e-14);
    }

    #[test]
    fn stack_exponential_matches_heap_path() {
        let mut rng = seeded_rng(9);
        for m in 1..=4 {
            let p: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let heap = unitary_from_params(&p, m);
            let stack = unitary4_from_params(&p, m);
            for i in 0..m {
                for j in 0..m {
                    assert!((heap[(i, j)] - stack.get(i, j)).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn params_give_unitaries() {
        let mut rng = seeded_rng(3);
        for m in 1..=5 {
            let p: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-4.0..4.0)).collect();
            assert!(unitarity_defect(&unitary_from_params(&p, m)) < 1e-12);
        }
        let id = unitary_from_params(&[0.0; 16], 4);
        assert!((id - DMatrix::<C64>::identity(4, 4)).camax() < 1e-15);
    }

    #[test]
    fn identity_mixing_returns_spectral_ensemble() {
        let rho = ghz_mixture();
        let spectral = eigendecompose(&rho).unwrap();
        let e = ensemble_from_unitary(&spectral, &DMatrix::identity(4, 4)).unwrap();
        assert_eq!(e.len(), 2);
        for (a, b) in e.members.iter().zip(&spectral.members) {
            assert!((a.weight - b.weight).abs() < 1e-15);
            assert!((a.state.inner(&b.state).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn hadamard_mixing_gives_ghz_pair() {
        let rho = ghz_mixture();
        let spectral = eigendecompose(&rho).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = DMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]);
        let e = ensemble_from_unitary(&spectral, &u).unwrap();
        assert_eq!(e.len(), 2);
        for m in &e.members {
            assert!((m.weight - 0.5).abs() < 1e-14);
            let a = m.state.amps();
            assert!((a[0].norm() - h).abs() < 1e-14 && (a[7].norm() - h).abs() < 1e-14);
            assert!((tau3_pure(&m.state).unwrap().value - 1.0).abs() < 1e-13);
        }
        assert!(e.density_matrix().unwrap().frobenius_distance(&rho) < 1e-14);
    }

    #[test]
    fn mixing_errors() {
        let spectral = eigendecompose(&ghz_mixture()).unwrap();
        let one = DMatrix::<C64>::identity(1, 1);
        assert!(matches!(
            ensemble_from_unitary(&spectral, &one),
            Err(Error::EnsembleTooShort { length: 1, rank: 2 })
        ));
        let bad = DMatrix::<C64>::identity(2, 2).scale(1.1);
        assert!(matches!(
            ensemble_from_unitary(&spectral, &bad),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn random_unitaries_reconstruct() {
        let rho = random_pure(&[2, 2, 2, 2], 8).unwrap().reduced(&[0, 1, 2]).unwrap();
        let spectral = eigendecompose(&rho).unwrap();
        let mut rng = seeded_rng(1);
        for _ in 0..20 {
            let u = haar_unitary(4, &mut rng);
            let e = ensemble_from_unitary(&spectral, &u).unwrap();
            assert!(e.density_matrix().unwrap().frobenius_distance(&rho) < 1e-8);
        }
    }

    #[test]
    fn pure_input_has_single_decomposition() {
        let ghz3 = StateVector::from_terms(&[(c(1.0), "000"), (c(1.0), "111")])
            .unwrap()
            .normalize()
            .unwrap()
            .projector();
        for obj in [Objective::Min, Objective::Max] {
            let r = optimize_roof(&ghz3, obj, &quick()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12);
            assert_eq!(r.diagnostics.ensemble_length, 1);
        }
    }

    #[test]
    fn ghz_mixture_bounds() {
        let rho = ghz_mixture();
        let lo = optimize_roof(&rho, Objective::Min, &quick()).unwrap();
        assert!(lo.value < 1e-12);
        assert_eq!(lo.bound_direction, BoundDirection::UpperBoundOnMin);
        let hi = optimize_roof(&rho, Objective::Max, &quick()).unwrap();
        assert!(hi.value > 1.0 - 1e-6, "{}", hi.value);
        assert_eq!(hi.bound_direction, BoundDirection::LowerBoundOnMax);
    }

    #[test]
    fn witnesses_are_valid() {
        for seed in 0..3 {
            let rho = random_pure(&[2, 2, 2, 2], seed).unwrap().reduced(&[0, 1, 2]).unwrap();
            let (lo, hi) = roof_pair(&rho, &quick()).unwrap();
            for r in [&lo, &hi] {
                assert!(r.witness.density_matrix().unwrap().frobenius_distance(&rho) < 1e-8);
                assert!((average_tau3(&r.witness).unwrap() - r.value).abs() < 1e-9);
                assert!((r.witness.total_weight() - 1.0).abs() < 1e-9);
            }
            assert!(hi.value >= lo.value);
        }
    }

    #[test]
    fn search_is_deterministic() {
        let rho = random_pure(&[2, 2, 2, 2], 4).unwrap().reduced(&[0, 1, 2]).unwrap();
        let a = optimize_roof(&rho, Objective::Max, &quick()).unwrap();
        let b = optimize_roof(&rho, Objective::Max, &quick()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let rho2 = random_pure(&[2, 2], 1).unwrap().projector();
        assert!(matches!(
            optimize_roof(&rho2, Objective::Min, &quick()),
            Err(Error::WrongDims { .. })
        ));
        let short = RoofConfig {
            ensemble_length: Some(1),
            ..quick()
        };
        assert!(matches!(
            optimize_roof(&ghz_mixture(), Objective::Min, &short),
            Err(Error::EnsembleTooShort { .. })
        ));
        let none = RoofConfig { restarts: 0, ..quick() };
        assert!(optimize_roof(&ghz_mixture(), Objective::Min, &none).is_err());
    }

    #[test]
    fn oracle_on_pure_and_ghz_inputs() {
        let s = random_pure(&[2, 2, 2], 2).unwrap();
        let t = tau3_pure(&s).unwrap().value;
        let (lo, hi) = grid_oracle(&s.projector(), 50, 1).unwrap();
        assert!((lo - t).abs() < 1e-12 && (hi - t).abs() < 1e-12);

        let (lo, hi) = grid_oracle(&ghz_mixture(), 20_000, 5).unwrap();
        assert!(lo <= 0.02, "{lo}");
        assert!(hi >= 0.98, "{hi}");
    }
}
