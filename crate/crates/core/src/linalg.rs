//! Dense complex linear algebra on basis-tagged operators.
//!
//! Every matrix in the toolkit carries the identifier of the basis family it
//! is expressed in; combining operators from different bases is a
//! construction bug and panics loudly rather than producing garbage.
//! Matrix exponentials go strictly through the Hermitian eigendecomposition
//! (never Padé) so that `exp(-beta H)` is symmetric up to eigensolver error,
//! which the cone checks downstream rely on.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;

use crate::error::CoreError;
use crate::tol::DEFAULT_TOL;
use crate::Result;

pub type C64 = Complex64;

/// Identifier of a basis family ("ising-spin", "rotor-number", ...).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BasisTag(Arc<str>);

impl BasisTag {
    pub fn new(name: &str) -> Self {
        BasisTag(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Tag of the Hilbert–Schmidt (vectorized L^2) space over this basis.
    pub fn hs(&self) -> BasisTag {
        BasisTag::new(&format!("L2({})", self.0))
    }

    /// Tag of the tensor-doubled space over this basis.
    pub fn ext(&self) -> BasisTag {
        BasisTag::new(&format!("ext({})", self.0))
    }
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BasisTag({})", self.0)
    }
}

impl From<&str> for BasisTag {
    fn from(s: &str) -> Self {
        BasisTag::new(s)
    }
}

/// A dense complex square matrix tagged with the basis it is expressed in.
///
/// The universal carrier for Hamiltonians, observables and unitaries.
#[derive(Clone)]
pub struct Operator {
    data: Array2<C64>,
    basis_tag: BasisTag,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator[{}x{} @ {}]", self.dim(), self.dim(), self.basis_tag)
    }
}

impl Operator {
    pub fn new(data: Array2<C64>, basis_tag: BasisTag) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(CoreError::DimensionMismatch(data.nrows(), data.ncols()));
        }
        Ok(Operator { data, basis_tag })
    }

    pub fn from_real(data: Array2<f64>, basis_tag: BasisTag) -> Result<Self> {
        Operator::new(data.mapv(|x| C64::new(x, 0.0)), basis_tag)
    }

    pub fn identity(dim: usize, basis_tag: BasisTag) -> Self {
        Operator { data: Array2::eye(dim), basis_tag }
    }

    pub fn zeros(dim: usize, basis_tag: BasisTag) -> Self {
        Operator { data: Array2::zeros((dim, dim)), basis_tag }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<C64> {
        self.data
    }

    pub fn tag(&self) -> &BasisTag {
        &self.basis_tag
    }

    /// Re-express the same matrix as living in a different basis family.
    /// Used by basis maps whose domain and codomain tags differ.
    pub fn retag(mut self, tag: BasisTag) -> Self {
        self.basis_tag = tag;
        self
    }

    fn assert_compatible(&self, other: &Operator) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "operator dimension mismatch: {} vs {}",
            self.dim(),
            other.dim()
        );
        assert_eq!(
            self.basis_tag, other.basis_tag,
            "operator basis mismatch: {} vs {}",
            self.basis_tag, other.basis_tag
        );
    }

    pub fn add(&self, other: &Operator) -> Operator {
        self.assert_compatible(other);
        Operator { data: &self.data + &other.data, basis_tag: self.basis_tag.clone() }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        self.assert_compatible(other);
        Operator { data: &self.data - &other.data, basis_tag: self.basis_tag.clone() }
    }

    pub fn mul(&self, other: &Operator) -> Operator {
        self.assert_compatible(other);
        Operator { data: self.data.dot(&other.data), basis_tag: self.basis_tag.clone() }
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator { data: self.data.mapv(|x| x * c), basis_tag: self.basis_tag.clone() }
    }

    pub fn scale_re(&self, c: f64) -> Operator {
        self.scale(C64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Operator {
        Operator { data: self.data.t().mapv(|x| x.conj()), basis_tag: self.basis_tag.clone() }
    }

    pub fn transpose(&self) -> Operator {
        Operator { data: self.data.t().to_owned(), basis_tag: self.basis_tag.clone() }
    }

    pub fn conj(&self) -> Operator {
        Operator { data: self.data.mapv(|x| x.conj()), basis_tag: self.basis_tag.clone() }
    }

    /// `u^dagger self u`, the form every model transform uses.
    pub fn conjugated_by(&self, u: &Operator) -> Operator {
        self.assert_compatible(u);
        Operator {
            data: u.data.t().mapv(|x| x.conj()).dot(&self.data).dot(&u.data),
            basis_tag: self.basis_tag.clone(),
        }
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        assert_eq!(v.len(), self.dim(), "vector dimension mismatch");
        self.data.dot(v)
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.assert_compatible(other);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max |A - A^dagger| over entries.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[[i, j]] - self.data[[j, i]].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.asymmetry() <= tol * self.max_abs() + f64::MIN_POSITIVE
    }

    /// Commutator AB - BA.
    pub fn commutator(&self, other: &Operator) -> Operator {
        self.mul(other).sub(&other.mul(self))
    }

    /// Anticommutator AB + BA.
    pub fn anticommutator(&self, other: &Operator) -> Operator {
        self.mul(other).add(&other.mul(self))
    }

    /// Integer power by repeated multiplication. `pow(0)` is the identity.
    pub fn pow(&self, k: usize) -> Operator {
        let mut acc = Operator::identity(self.dim(), self.basis_tag.clone());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Spectral data of a Hermitian operator: ascending eigenvalues and the
/// unitary of eigenvectors (columns).
#[derive(Clone)]
pub struct Spectral {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Array2<C64>,
    pub basis_tag: BasisTag,
}

impl Spectral {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Transform an operator into the eigenbasis: `V^dagger A V`.
    pub fn to_eigenbasis(&self, op: &Operator) -> Array2<C64> {
        assert_eq!(op.dim(), self.dim(), "operator dimension mismatch");
        assert_eq!(op.tag(), &self.basis_tag, "operator basis mismatch");
        let vd = self.eigenvectors.t().mapv(|x| x.conj());
        vd.dot(op.data()).dot(&self.eigenvectors)
    }

    /// `V f(lambda) V^dagger` for an arbitrary real function of the spectrum.
    pub fn function(&self, f: impl Fn(f64) -> f64) -> Operator {
        let n = self.dim();
        let mut scaled = Array2::<C64>::zeros((n, n));
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let flam = C64::new(f(lam), 0.0);
            for i in 0..n {
                scaled[[i, j]] = self.eigenvectors[[i, j]] * flam;
            }
        }
        let vd = self.eigenvectors.t().mapv(|x| x.conj());
        Operator { data: scaled.dot(&vd), basis_tag: self.basis_tag.clone() }
    }

    /// Reconstruction residual `max |V diag(lambda) V^dagger - H|`.
    pub fn reconstruction_error(&self, h: &Operator) -> f64 {
        self.function(|x| x).max_abs_diff(h)
    }
}

/// Kronecker product of a nonempty sequence of operators, leftmost factor
/// varying slowest.
pub fn kron(factors: &[&Operator]) -> Result<Operator> {
    if factors.is_empty() {
        return Err(CoreError::EmptyProduct);
    }
    let mut data = factors[0].data.clone();
    let mut tag = factors[0].basis_tag.as_str().to_string();
    for f in &factors[1..] {
        data = kron2(&data, &f.data);
        tag = format!("{}*{}", tag, f.basis_tag);
    }
    Ok(Operator { data, basis_tag: BasisTag::new(&tag) })
}

fn kron2(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (m, n) = (a.nrows(), a.ncols());
    let (p, q) = (b.nrows(), b.ncols());
    let mut out = Array2::<C64>::zeros((m * p, n * q));
    for i in 0..m {
        for j in 0..n {
            let aij = a[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..p {
                for l in 0..q {
                    out[[i * p + k, j * q + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Hermitian eigendecomposition with an explicit Hermiticity gate.
///
/// The tolerance is `DEFAULT_TOL * max|H|`; violations indicate construction
/// bugs in the model builders, not physics.
pub fn hermitian_eig(h: &Operator) -> Result<Spectral> {
    let allowed = DEFAULT_TOL * h.max_abs() + f64::MIN_POSITIVE;
    let asym = h.asymmetry();
    if asym > allowed {
        return Err(CoreError::NotHermitian { asymmetry: asym, allowed });
    }
    let (vals, vecs) = h
        .data
        .eigh(UPLO::Lower)
        .map_err(|e| CoreError::Eigensolver(format!("{e}")))?;
    // For row-major input the backend effectively diagonalizes the
    // transpose, so the true eigenvectors are the conjugated columns.
    let vecs = vecs.mapv(|x| x.conj());
    Ok(Spectral {
        eigenvalues: vals.to_vec(),
        eigenvectors: vecs,
        basis_tag: h.basis_tag.clone(),
    })
}

/// `exp(t H)` for Hermitian `H`, via the eigendecomposition.
///
/// `t = 0` returns the identity exactly. Exponents above 700 error out so
/// the caller can rescale instead of silently overflowing.
pub fn expm_hermitian(h: &Operator, t: f64) -> Result<Operator> {
    if t == 0.0 {
        return Ok(Operator::identity(h.dim(), h.basis_tag.clone()));
    }
    let spectral = hermitian_eig(h)?;
    expm_from_spectral(&spectral, t)
}

/// `exp(t H)` from a precomputed eigendecomposition of `H`.
pub fn expm_from_spectral(spectral: &Spectral, t: f64) -> Result<Operator> {
    if t == 0.0 {
        return Ok(Operator::identity(spectral.dim(), spectral.basis_tag.clone()));
    }
    let worst = spectral
        .eigenvalues
        .iter()
        .map(|&lam| t * lam)
        .fold(f64::NEG_INFINITY, f64::max);
    if worst > 700.0 {
        return Err(CoreError::ExponentOverflow(worst));
    }
    Ok(spectral.function(|lam| (t * lam).exp()))
}

/// Trace of an ordered operator product. Cyclic up to rounding.
pub fn trace_product(ops: &[&Operator]) -> Result<C64> {
    if ops.is_empty() {
        return Err(CoreError::EmptyProduct);
    }
    let first = ops[0];
    for op in &ops[1..] {
        if op.dim() != first.dim() {
            return Err(CoreError::DimensionMismatch(first.dim(), op.dim()));
        }
        if op.tag() != first.tag() {
            return Err(CoreError::BasisMismatch(
                first.tag().to_string(),
                op.tag().to_string(),
            ));
        }
    }
    if ops.len() == 1 {
        return Ok(first.trace());
    }
    let mut acc = ops[0].data.clone();
    for op in &ops[1..ops.len() - 1] {
        acc = acc.dot(&op.data);
    }
    // Close the trace without materializing the final product.
    let last = &ops[ops.len() - 1].data;
    let n = first.dim();
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            tr += acc[[i, k]] * last[[k, i]];
        }
    }
    Ok(tr)
}
