//! Pure and mixed states over a list of subsystem dimensions.
//!
//! Amplitudes and matrix entries are indexed big-endian: the first
//! subsystem is the most significant digit of the linear index. Every
//! statement about "tracing the first qubit" elsewhere in the crate
//! depends on this convention.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Squared-norm tolerance for a state to count as normalized.
pub const NORM_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as numerical zero when determining rank.
pub const RANK_CUTOFF: f64 = 1e-12;
/// Tolerance on Hermiticity, trace and positivity of density matrices.
pub const DM_TOL: f64 = 1e-10;
/// Completeness tolerance for Kraus sets.
pub const KRAUS_TOL: f64 = 1e-9;

/// Deterministic generator for a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for the `stream`-th job derived from `seed`.
///
/// Restarts and trials use this so that their randomness does not depend on
/// the order in which they are executed.
pub fn derived_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("no subsystems".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d == 0) {
        return Err(Error::InvalidDims(format!("subsystem dimension {d}")));
    }
    Ok(dims.iter().product())
}

/// Linear-index strides for big-endian ordering.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets into the full index space contributed by every multi-index over
/// `sites`, enumerated big-endian over those sites.
fn site_offsets(dims: &[usize], sites: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &s in sites {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &base in &out {
            for i in 0..dims[s] {
                next.push(base + i * st[s]);
            }
        }
        out = next;
    }
    out
}

fn validate_keep(n_sites: usize, keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("nothing to keep".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    for w in kept.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidSubsystems(format!("site {} listed twice", w[0])));
        }
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= n_sites) {
        return Err(Error::InvalidSubsystems(format!(
            "site {bad} out of range for {n_sites} subsystems"
        )));
    }
    let traced = (0..n_sites).filter(|s| !kept.contains(s)).collect();
    Ok((kept, traced))
}

/// Complex amplitude tensor over an ordered list of subsystem dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateFile", into = "StateFile")]
pub struct StateVector {
    dims: Vec<usize>,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let expected = check_dims(&dims)?;
        if amps.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: amps.len(),
            });
        }
        Ok(Self {
            dims,
            amps: DVector::from_vec(amps),
        })
    }

    pub fn from_dvector(dims: Vec<usize>, amps: DVector<C64>) -> Result<Self> {
        Self::new(dims, amps.as_slice().to_vec())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let n = check_dims(&dims)?;
        if index >= n {
            return Err(Error::InvalidDims(format!("basis index {index} >= {n}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[index] = C64::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    /// Builds a state from `(coefficient, bitstring)` terms over qubits, e.g.
    /// `[(1.0, "0000"), (1.0, "1111")]`. The result is not normalized.
    pub fn from_terms(terms: &[(C64, &str)]) -> Result<Self> {
        let n = terms
            .first()
            .map(|(_, s)| s.len())
            .ok_or_else(|| Error::InvalidDims("no terms".into()))?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        for (c, bits) in terms {
            if bits.len() != n {
                return Err(Error::Parse(format!("bitstring {bits} has wrong length")));
            }
            let idx = usize::from_str_radix(bits, 2).map_err(|_| Error::Parse(format!("bad bitstring {bits}")))?;
            amps[idx] += c;
        }
        Self::new(vec![2; n], amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::DegenerateState);
        }
        Ok(Self {
            dims: self.dims.clone(),
            amps: self.amps.unscale(n),
        })
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in self.amps.iter() {
            for b in other.amps.iter() {
                amps.push(a * b);
            }
        }
        StateVector {
            dims,
            amps: DVector::from_vec(amps),
        }
    }

    pub fn conjugate(&self) -> StateVector {
        StateVector {
            dims: self.dims.clone(),
            amps: self.amps.map(|a| a.conj()),
        }
    }

    /// Reorders the subsystems: site `k` of the result is site `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<StateVector> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&s| s >= n || std::mem::replace(&mut seen[s], true)) {
            return Err(Error::InvalidSubsystems(format!("{order:?} is not a permutation")));
        }
        let dims: Vec<usize> = order.iter().map(|&s| self.dims[s]).collect();
        let src = site_offsets(&self.dims, order);
        let amps = src.iter().map(|&i| self.amps[i]).collect();
        StateVector::new(dims, amps)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            dims: self.dims.clone(),
            entries: &self.amps * self.amps.adjoint(),
        }
    }

    /// Reduced density matrix on `keep`, computed without forming the full projector.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (kept, traced) = validate_keep(self.dims.len(), keep)?;
        let ko = site_offsets(&self.dims, &kept);
        let to = site_offsets(&self.dims, &traced);
        let mut t = DMatrix::<C64>::zeros(ko.len(), to.len());
        for (a, &ka) in ko.iter().enumerate() {
            for (b, &tb) in to.iter().enumerate() {
                t[(a, b)] = self.amps[ka + tb];
            }
        }
        Ok(DensityMatrix {
            dims: kept.iter().map(|&k| self.dims[k]).collect(),
            entries: &t * t.adjoint(),
        })
    }

    /// The amplitudes arranged as a matrix whose rows index `keep` and whose
    /// columns index the remaining sites.
    pub fn bipartition(&self, keep: &[usize]) -> Result<DMatrix<C64>> {
        let (kept, traced) = validate_keep(self.dims.len(), keep)?;
        let ko = site_offsets(&self.dims, &kept);
        let to = site_offsets(&self.dims, &traced);
        Ok(DMatrix::from_fn(ko.len(), to.len(), |a, b| self.amps[ko[a] + to[b]]))
    }

    fn apply_site(&mut self, site: usize, m: &DMatrix<C64>) {
        let d = self.dims[site];
        let stride = strides(&self.dims)[site];
        let block = d * stride;
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for outer in (0..self.amps.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (i, slot) in buf.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..d {
                        acc += m[(i, j)] * self.amps[base + j * stride];
                    }
                    *slot = acc;
                }
                for (i, v) in buf.iter().enumerate() {
                    self.amps[base + i * stride] = *v;
                }
            }
        }
    }
}

/// On-disk representation: `{"dims":[2,2],"amps":[[re,im],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub amps: Vec<[f64; 2]>,
}

impl TryFrom<StateFile> for StateVector {
    type Error = Error;

    fn try_from(f: StateFile) -> Result<Self> {
        StateVector::new(f.dims, f.amps.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl From<StateVector> for StateFile {
    fn from(s: StateVector) -> Self {
        StateFile {
            dims: s.dims,
            amps: s.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

pub fn state_from_json(text: &str) -> Result<StateVector> {
    let file: StateFile = serde_json::from_str(text)?;
    file.try_into()
}

pub fn state_to_json(state: &StateVector) -> Result<String> {
    Ok(serde_json::to_string(&StateFile::from(state.clone()))?)
}

pub fn read_state(path: impl AsRef<std::path::Path>) -> Result<StateVector> {
    state_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_state(path: impl AsRef<std::path::Path>, state: &StateVector) -> Result<()> {
    std::fs::write(path, state_to_json(state)? + "\n")?;
    Ok(())
}

/// Hermitian, positive-semidefinite, unit-trace matrix over `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(dims: Vec<usize>, entries: DMatrix<C64>) -> Result<Self> {
        let n = check_dims(&dims)?;
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: entries.nrows(),
            });
        }
        let herm = hermiticity_defect(&entries);
        if herm > DM_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > DM_TOL || tr.im.abs() > DM_TOL {
            return Err(Error::InvalidDims(format!("trace {tr} is not 1")));
        }
        let min_eig = SymmetricEigen::new(entries.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -DM_TOL {
            return Err(Error::InvalidDims(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { dims, entries })
    }

    pub(crate) fn from_parts(dims: Vec<usize>, entries: DMatrix<C64>) -> Self {
        Self { dims, entries }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// `λ·self + (1−λ)·other`.
    pub fn mix(&self, other: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::WrongDims {
                op: "mix",
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        Ok(DensityMatrix {
            dims: self.dims.clone(),
            entries: self.entries.scale(lambda) + other.entries.scale(1.0 - lambda),
        })
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries).norm()
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (kept, traced) = validate_keep(self.dims.len(), keep)?;
        let ko = site_offsets(&self.dims, &kept);
        let to = site_offsets(&self.dims, &traced);
        let out = DMatrix::from_fn(ko.len(), ko.len(), |a, b| {
            to.iter().map(|&t| self.entries[(ko[a] + t, ko[b] + t)]).sum::<C64>()
        });
        Ok(DensityMatrix {
            dims: kept.iter().map(|&k| self.dims[k]).collect(),
            entries: out,
        })
    }

    /// Number of eigenvalues above [`RANK_CUTOFF`].
    pub fn rank(&self) -> usize {
        SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .filter(|&&e| e > RANK_CUTOFF)
            .count()
    }
}

fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).camax()
}

/// One member `(weight, state)` of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub weight: f64,
    pub state: StateVector,
}

/// A weighted list of pure states realizing a density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub members: Vec<Member>,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|m| m.weight).sum()
    }

    /// `Σ wᵢ |πᵢ⟩⟨πᵢ|`
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        let first = self
            .members
            .first()
            .ok_or_else(|| Error::InvalidDims("empty ensemble".into()))?;
        let dims = first.state.dims.clone();
        let n = first.state.dim();
        let mut acc = DMatrix::<C64>::zeros(n, n);
        for m in &self.members {
            if m.state.dims != dims {
                return Err(Error::WrongDims {
                    op: "ensemble",
                    expected: dims,
                    found: m.state.dims.clone(),
                });
            }
            acc += (&m.state.amps * m.state.amps.adjoint()).scale(m.weight);
        }
        Ok(DensityMatrix::from_parts(dims, acc))
    }

    /// Weighted average of a pure-state quantity.
    pub fn average<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&StateVector) -> Result<f64>,
    {
        let mut total = 0.0;
        for m in &self.members {
            total += m.weight * f(&m.state)?;
        }
        Ok(total)
    }
}

/// Spectral decomposition: orthonormal eigenvectors weighted by their
/// eigenvalues, in decreasing eigenvalue order, eigenvalues below
/// [`RANK_CUTOFF`] dropped.
pub fn eigendecompose(dm: &DensityMatrix) -> Result<Ensemble> {
    let herm = hermiticity_defect(&dm.entries);
    if herm > 1e-9 {
        return Err(Error::NotHermitian(herm));
    }
    let eig = SymmetricEigen::new(dm.entries.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let members = order
        .into_iter()
        .filter(|&k| eig.eigenvalues[k] > RANK_CUTOFF)
        .map(|k| Member {
            weight: eig.eigenvalues[k],
            state: StateVector {
                dims: dm.dims.clone(),
                amps: eig.eigenvectors.column(k).into_owned(),
            },
        })
        .collect();
    Ok(Ensemble { members })
}

/// A matrix acting on one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    pub site: usize,
    pub matrix: DMatrix<C64>,
}

impl LocalOperator {
    pub fn new(site: usize, matrix: DMatrix<C64>) -> Self {
        Self { site, matrix }
    }

    pub fn identity(site: usize, dim: usize) -> Self {
        Self::new(site, DMatrix::identity(dim, dim))
    }
}

/// Applies one operator per listed site (identity elsewhere) and returns the
/// unnormalized result together with its squared norm.
pub fn apply_local(state: &StateVector, ops: &[LocalOperator]) -> Result<(StateVector, f64)> {
    let mut used = vec![false; state.dims.len()];
    for op in ops {
        if op.site >= state.dims.len() {
            return Err(Error::InvalidSubsystems(format!("site {} out of range", op.site)));
        }
        if std::mem::replace(&mut used[op.site], true) {
            return Err(Error::InvalidSubsystems(format!("two operators on site {}", op.site)));
        }
        let d = state.dims[op.site];
        if op.matrix.nrows() != d || op.matrix.ncols() != d {
            return Err(Error::ShapeMismatch {
                site: op.site,
                dim: d,
                rows: op.matrix.nrows(),
                cols: op.matrix.ncols(),
            });
        }
    }
    let mut out = state.clone();
    for op in ops {
        out.apply_site(op.site, &op.matrix);
    }
    let p = out.norm_sqr();
    Ok((out, p))
}

/// Deviation of `Σ M†M` from the identity.
pub fn kraus_defect(set: &[DMatrix<C64>]) -> f64 {
    let Some(first) = set.first() else {
        return f64::INFINITY;
    };
    let d = first.ncols();
    let mut acc = DMatrix::<C64>::zeros(d, d);
    for m in set {
        if m.ncols() != d || m.nrows() != d {
            return f64::INFINITY;
        }
        acc += m.adjoint() * m;
    }
    (acc - DMatrix::<C64>::identity(d, d)).camax()
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub(crate) fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_pure_with<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<StateVector> {
    let n = check_dims(dims)?;
    let amps: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
    StateVector::new(dims.to_vec(), amps)?.normalize()
}

pub fn random_pure(dims: &[usize], seed: u64) -> Result<StateVector> {
    random_pure_with(dims, &mut seeded_rng(seed))
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase of `R`'s
/// diagonal absorbed.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = ginibre(dim, dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Random invertible operator rescaled so its largest singular value is 1.
pub fn random_invertible_local_with<R: Rng + ?Sized>(site: usize, dim: usize, rng: &mut R) -> LocalOperator {
    loop {
        let g = ginibre(dim, dim, rng);
        let smax = g.clone().singular_values().max();
        if smax <= 0.0 {
            continue;
        }
        let m = g.unscale(smax);
        if m.determinant().norm() > 1e-12 {
            return LocalOperator::new(site, m);
        }
    }
}

pub fn random_invertible_local(site: usize, dim: usize, seed: u64) -> LocalOperator {
    random_invertible_local_with(site, dim, &mut seeded_rng(seed))
}

/// Inverse square root of a Hermitian positive-definite matrix.
pub(crate) fn inv_sqrt_hermitian(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = SymmetricEigen::new(m.clone());
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::new(1.0 / e.sqrt(), 0.0)));
    v * d * v.adjoint()
}

/// Random complete Kraus set: Ginibre matrices `Gₖ` mapped to `Gₖ S^{-1/2}`
/// with `S = Σ Gₖ†Gₖ`.
pub fn random_kraus_set_with<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Result<Vec<DMatrix<C64>>> {
    if dim == 0 || count == 0 {
        return Err(Error::InvalidDims(format!(
            "Kraus set of {count} operators on dimension {dim}"
        )));
    }
    let gs: Vec<DMatrix<C64>> = (0..count).map(|_| ginibre(dim, dim, rng)).collect();
    let s = gs
        .iter()
        .fold(DMatrix::<C64>::zeros(dim, dim), |acc, g| acc + g.adjoint() * g);
    let w = inv_sqrt_hermitian(&s);
    Ok(gs.into_iter().map(|g| g * &w).collect())
}

pub fn random_kraus_set(dim: usize, count: usize, seed: u64) -> Result<Vec<DMatrix<C64>>> {
    random_kraus_set_with(dim, count, &mut seeded_rng(seed))
}
