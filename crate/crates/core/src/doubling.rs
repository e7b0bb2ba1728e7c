//! Hilbert-Schmidt doubling: left/right multiplication operators, the basis
//! map between `vec(L^2(h))` and the tensor square `h (x) h`, and
//! certificate-carrying reflection-positive operators.
//!
//! Reflection positivity is *certificate-carrying* here: an operator on the
//! doubled space counts as reflection positive exactly when it is built
//! through certified constructors as a conic combination of
//! `L(a) R(a^*)` terms. Raw matrices are never classified, because
//! membership in the weakly closed conic hull is not decidable from the
//! matrix alone; finite certificates also cannot represent genuine closure
//! points, which is a documented limitation rather than something to guess
//! around.
//!
//! Vectorization is row-major (`|x><y|` maps to index `x*dim + y`), and the
//! left/right multiplication matrices below depend on that convention:
//! `L(A) = A (x) 1` and `R(B) = 1 (x) B^T`.

use ndarray::{Array1, Array2};

use crate::cones::unvec_rowmajor;
use crate::error::CoreError;
use crate::linalg::{expm_hermitian, hermitian_eig, kron, BasisTag, Operator, C64};
use crate::tol::{scaled, DEFAULT_TOL};
use crate::Result;

/// An antilinear involution `v -> P conj(v)` with `P` real, symmetric and
/// orthogonal in the distinguished basis (so that applying it twice is the
/// identity).
#[derive(Clone, Debug)]
pub struct Involution {
    matrix: Array2<f64>,
    basis_tag: BasisTag,
}

impl Involution {
    pub fn new(matrix: Array2<f64>, basis_tag: BasisTag) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(CoreError::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        let n = matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let sym = (matrix[[i, j]] - matrix[[j, i]]).abs();
                let mut sq = 0.0;
                for k in 0..n {
                    sq += matrix[[i, k]] * matrix[[k, j]];
                }
                let inv = (sq - if i == j { 1.0 } else { 0.0 }).abs();
                worst = worst.max(sym).max(inv);
            }
        }
        if worst > scaled(DEFAULT_TOL, 1.0) {
            return Err(CoreError::NotJReal(worst));
        }
        Ok(Involution { matrix, basis_tag })
    }

    /// Plain entrywise conjugation in the distinguished basis.
    pub fn conjugation(dim: usize, basis_tag: BasisTag) -> Self {
        Involution { matrix: Array2::eye(dim), basis_tag }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tag(&self) -> &BasisTag {
        &self.basis_tag
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        assert_eq!(v.len(), self.dim(), "involution dimension mismatch");
        let conj = v.mapv(|x| x.conj());
        Array1::from_shape_fn(self.dim(), |i| {
            (0..self.dim()).map(|j| C64::new(self.matrix[[i, j]], 0.0) * conj[j]).sum()
        })
    }

    /// The linear operator `theta A^* theta` (a plain matrix, since the two
    /// antilinear factors cancel): `P A^T P`.
    pub fn sandwich_adjoint(&self, a: &Operator) -> Operator {
        assert_eq!(a.dim(), self.dim(), "involution dimension mismatch");
        let p = self.matrix.mapv(|x| C64::new(x, 0.0));
        Operator::new(p.dot(&a.data().t().to_owned()).dot(&p), a.tag().clone()).expect("square")
    }
}

/// `L(A)`: the matrix of `xi -> A xi` on row-major vectorized L^2.
pub fn left_mult(a: &Operator) -> Operator {
    let id = Operator::identity(a.dim(), a.tag().clone());
    kron(&[a, &id]).expect("nonempty").retag(a.tag().hs())
}

/// `R(A)`: the matrix of `xi -> xi A`.
///
/// The action does not involve the involution; `theta` fixes which
/// tensor-space operator it corresponds to under [`phi_theta`], namely
/// `1 (x) A = R(theta A^* theta)`, and is taken here so the dimensions are
/// checked against the identification actually in use.
pub fn right_mult(a: &Operator, theta: &Involution) -> Result<Operator> {
    if a.dim() != theta.dim() {
        return Err(CoreError::DimensionMismatch(a.dim(), theta.dim()));
    }
    Ok(right_mult_raw(a))
}

pub(crate) fn right_mult_raw(a: &Operator) -> Operator {
    let id = Operator::identity(a.dim(), a.tag().clone());
    kron(&[&id, &a.transpose()]).expect("nonempty").retag(a.tag().hs())
}

/// The unitary basis map `Phi_theta : vec(L^2(h)) -> h (x) h`, defined on
/// rank-1 matrices by `|x><y| -> x (x) theta y`.
///
/// Conjugating `A (x) 1` by it yields `L(A)`; conjugating `1 (x) A` yields
/// `R(theta A^* theta)`.
pub fn phi_theta(theta: &Involution) -> Operator {
    let d = theta.dim();
    let p = Operator::from_real(theta.matrix().clone(), theta.tag().clone()).expect("square");
    let id = Operator::identity(d, theta.tag().clone());
    kron(&[&id, &p]).expect("nonempty").retag(theta.tag().ext())
}

/// One `coeff * L(left) R(right)` term of a reflection-positivity
/// certificate.
#[derive(Clone, Debug)]
pub struct RpTerm {
    pub coeff: f64,
    pub left: Operator,
    pub right: Operator,
}

/// An operator on the doubled space stored as a conic combination of
/// `L(a) R(b)` terms. `certified` is set only when every term is
/// adjoint-paired (`b = a^*`), which is exactly the finite form of a
/// reflection-positivity certificate.
#[derive(Clone, Debug)]
pub struct RPOperator {
    dim: usize,
    basis_tag: BasisTag,
    terms: Vec<RpTerm>,
    certified: bool,
}

impl RPOperator {
    pub fn zero(dim: usize, basis_tag: BasisTag) -> Self {
        RPOperator { dim, basis_tag, terms: Vec::new(), certified: true }
    }

    pub fn identity(dim: usize, basis_tag: BasisTag) -> Self {
        let id = Operator::identity(dim, basis_tag.clone());
        RPOperator {
            dim,
            basis_tag,
            terms: vec![RpTerm { coeff: 1.0, left: id.clone(), right: id }],
            certified: true,
        }
    }

    /// `coeff * L(a) R(a^*)`, certified by construction.
    pub fn certified_term(coeff: f64, a: &Operator) -> Result<Self> {
        if coeff < 0.0 {
            return Err(CoreError::NotCertified(format!("negative coefficient {coeff}")));
        }
        Ok(RPOperator {
            dim: a.dim(),
            basis_tag: a.tag().clone(),
            terms: vec![RpTerm { coeff, left: a.clone(), right: a.adjoint() }],
            certified: true,
        })
    }

    /// General `coeff * L(a) R(b)`; certified only when `b` matches `a^*`
    /// to tolerance and the coefficient is nonnegative.
    pub fn term(coeff: f64, a: &Operator, b: &Operator) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(CoreError::DimensionMismatch(a.dim(), b.dim()));
        }
        let adj = a.adjoint();
        let paired = b.max_abs_diff(&adj) <= scaled(DEFAULT_TOL, a.max_abs());
        Ok(RPOperator {
            dim: a.dim(),
            basis_tag: a.tag().clone(),
            terms: vec![RpTerm { coeff, left: a.clone(), right: b.clone() }],
            certified: paired && coeff >= 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tag(&self) -> &BasisTag {
        &self.basis_tag
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn terms(&self) -> &[RpTerm] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn assert_compatible(&self, other: &RPOperator) {
        assert_eq!(self.dim, other.dim, "RPOperator dimension mismatch");
        assert_eq!(self.basis_tag, other.basis_tag, "RPOperator basis mismatch");
    }

    /// Term lists concatenated; certification survives only if both inputs
    /// carry it.
    pub fn add(&self, other: &RPOperator) -> RPOperator {
        self.assert_compatible(other);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        RPOperator {
            dim: self.dim,
            basis_tag: self.basis_tag.clone(),
            terms,
            certified: self.certified && other.certified,
        }
    }

    /// Pairwise product: L factors compose left-to-right, R factors
    /// right-to-left, so adjoint-paired terms stay adjoint-paired.
    pub fn mul(&self, other: &RPOperator) -> RPOperator {
        self.assert_compatible(other);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for o in &other.terms {
                terms.push(RpTerm {
                    coeff: s.coeff * o.coeff,
                    left: s.left.mul(&o.left),
                    right: o.right.mul(&s.right),
                });
            }
        }
        RPOperator {
            dim: self.dim,
            basis_tag: self.basis_tag.clone(),
            terms,
            certified: self.certified && other.certified,
        }
    }

    pub fn scale(&self, c: f64) -> RPOperator {
        RPOperator {
            dim: self.dim,
            basis_tag: self.basis_tag.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| RpTerm { coeff: t.coeff * c, left: t.left.clone(), right: t.right.clone() })
                .collect(),
            certified: self.certified && c >= 0.0,
        }
    }

    /// Materialize the superoperator matrix `sum_j c_j a_j (x) b_j^T`.
    pub fn to_matrix(&self) -> Operator {
        let d2 = self.dim * self.dim;
        let mut acc = Operator::zeros(d2, self.basis_tag.hs());
        for t in &self.terms {
            let m = kron(&[&t.left, &t.right.transpose()])
                .expect("nonempty")
                .retag(self.basis_tag.hs());
            acc = acc.add(&m.scale_re(t.coeff));
        }
        acc
    }

    /// Trace on L^2, computed exactly from the certificate as
    /// `sum_j c_j Tr[a_j] Tr[b_j]`; for certified operators this is
    /// `sum_j c_j |Tr a_j|^2 >= 0`.
    pub fn trace(&self) -> C64 {
        self.terms.iter().map(|t| t.left.trace() * t.right.trace() * t.coeff).sum()
    }

    /// Rewrite the certificate as at most `dim^2` adjoint-paired terms by
    /// diagonalizing its Choi matrix (the finite-dimensional form of the
    /// PSD-matrix lemma). Requires a certified input; the represented
    /// operator is unchanged up to eigensolver error.
    pub fn compress(&self, tol: f64) -> Result<RPOperator> {
        if !self.certified {
            return Err(CoreError::NotCertified(
                "compression re-derives adjoint-paired terms; input must be certified".into(),
            ));
        }
        if self.terms.len() <= 1 {
            return Ok(self.clone());
        }
        let d = self.dim;
        let d2 = d * d;
        // Choi matrix: the reshuffle C[(i,k),(j,l)] = S[(i,j),(k,l)] of the
        // superoperator matrix, PSD exactly when the map is a conic sum of
        // adjoint-paired terms.
        let sup = self.to_matrix();
        let mut choi = Array2::<C64>::zeros((d2, d2));
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        choi[[i * d + k, j * d + l]] = sup.data()[[i * d + j, k * d + l]];
                    }
                }
            }
        }
        let choi_op = Operator::new(choi, self.basis_tag.hs())?;
        let spec = hermitian_eig(&choi_op)?;
        let lam_max = spec.eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let drop = scaled(tol, lam_max);
        let mut terms = Vec::new();
        for (k, &lam) in spec.eigenvalues.iter().enumerate() {
            if lam < -drop {
                return Err(CoreError::NotCertified(format!(
                    "Choi eigenvalue {lam:.3e} is negative beyond tolerance"
                )));
            }
            if lam <= drop {
                continue;
            }
            let w = spec.eigenvectors.column(k).to_owned();
            let a = Operator::new(unvec_rowmajor(&w, d)?, self.basis_tag.clone())?;
            terms.push(RpTerm { coeff: lam, right: a.adjoint(), left: a });
        }
        Ok(RPOperator { dim: d, basis_tag: self.basis_tag.clone(), terms, certified: true })
    }
}

/// Assemble `sum_{ij} M_ij L(A_i^*) R(A_j)` for a PSD Gram matrix `M`,
/// returning a certified operator obtained by diagonalizing `M`.
pub fn assemble_psd_combination(m: &Operator, ops: &[Operator]) -> Result<RPOperator> {
    let n = ops.len();
    if m.dim() != n {
        return Err(CoreError::DimensionMismatch(m.dim(), n));
    }
    if n == 0 {
        return Err(CoreError::EmptyProduct);
    }
    let dim = ops[0].dim();
    let spec = hermitian_eig(m)?;
    let lam_max = spec.eigenvalues.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let mut terms = Vec::new();
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        if lam < -scaled(DEFAULT_TOL, lam_max) {
            return Err(CoreError::NotCertified(format!(
                "Gram matrix eigenvalue {lam:.3e} is negative"
            )));
        }
        if lam <= scaled(DEFAULT_TOL, lam_max) {
            continue;
        }
        // B_k = sum_j conj(V_jk) A_j turns the double sum into
        // sum_k lam_k L(B_k^*) R(B_k).
        let mut b = Operator::zeros(dim, ops[0].tag().clone());
        for (j, a) in ops.iter().enumerate() {
            b = b.add(&a.scale(spec.eigenvectors[[j, k]].conj()));
        }
        terms.push(RpTerm { coeff: lam, left: b.adjoint(), right: b });
    }
    Ok(RPOperator { dim, basis_tag: ops[0].tag().clone(), terms, certified: true })
}

/// Diagnostics attached to a Trotterized semigroup certificate.
#[derive(Clone, Debug)]
pub struct RpExpReport {
    /// Max-norm error of the certificate's matrix form against the exact
    /// `exp(-beta (H0 - V))`.
    pub matrix_error: f64,
    /// A priori bound on the order-4 series remainder per Trotter slice.
    pub series_remainder_bound: f64,
}

/// Certified Trotter product for `exp(-beta (H0 - V))`, where
/// `H0 = L(A) + R(A)` has the exactly factorized semigroup
/// `exp(-beta H0) = L(e^{-beta A}) R(e^{-beta A})` and `V` carries a
/// reflection-positivity certificate.
///
/// Each slice multiplies the free semigroup factor by the order-4 series of
/// `exp(beta V / n)`, which keeps the certificate a finite conic sum; the
/// term list is re-compressed through the Choi form after every product so
/// the certificate stays at most `dim^2` terms long.
pub fn rp_exponential(
    lr_free: &Operator,
    interaction: &RPOperator,
    beta: f64,
    trotter_n: usize,
    tol: f64,
) -> Result<(RPOperator, RpExpReport)> {
    if beta < 0.0 {
        return Err(CoreError::BetaRange(format!("beta = {beta} must be nonnegative")));
    }
    if !interaction.is_certified() {
        return Err(CoreError::NotCertified("interaction must carry a certificate".into()));
    }
    let n = trotter_n.max(1);
    let d = lr_free.dim();
    let tag = lr_free.tag().clone();
    if interaction.dim() != d {
        return Err(CoreError::DimensionMismatch(interaction.dim(), d));
    }

    let exact = {
        let h0 = left_mult(lr_free).add(&right_mult_raw(lr_free));
        let h = h0.sub(&interaction.to_matrix());
        expm_hermitian(&h, -beta)?
    };

    if interaction.num_terms() == 0 {
        let e = expm_hermitian(lr_free, -beta)?;
        let result = RPOperator::certified_term(1.0, &e)?;
        let matrix_error = result.to_matrix().max_abs_diff(&exact);
        return Ok((result, RpExpReport { matrix_error, series_remainder_bound: 0.0 }));
    }

    let x = beta / n as f64;
    let v_norm = frobenius(&interaction.to_matrix());
    let xv = x * v_norm;
    let series_remainder_bound = xv.powi(5) / 120.0 * xv.exp();

    // Order-4 truncated series of exp(x V) by Horner, compressing as we go.
    let id = RPOperator::identity(d, tag.clone());
    let mut series = id.clone();
    for k in (1..=4u32).rev() {
        series = id.add(&interaction.mul(&series).scale(x / k as f64)).compress(tol)?;
    }
    // Symmetric (Strang) slice: the half free factors on both sides keep
    // the certificate and make the splitting error O(beta^3 / n^2), which
    // is what lets a few hundred slices reach 1e-3 at desk-scale norms.
    let half_free = RPOperator::certified_term(1.0, &expm_hermitian(lr_free, -x / 2.0)?)?;
    let step = half_free.mul(&series).mul(&half_free).compress(tol)?;

    // Binary exponentiation of the slice.
    let mut acc = RPOperator::identity(d, tag);
    let mut base = step;
    let mut k = n;
    loop {
        if k & 1 == 1 {
            acc = acc.mul(&base).compress(tol)?;
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = base.mul(&base).compress(tol)?;
    }

    let matrix_error = acc.to_matrix().max_abs_diff(&exact);
    Ok((acc, RpExpReport { matrix_error, series_remainder_bound }))
}

fn frobenius(op: &Operator) -> f64 {
    op.data().iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{sampled_positive_map, vec_rowmajor};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tag() -> BasisTag {
        BasisTag::new("test")
    }

    fn random_op(dim: usize, rng: &mut impl Rng) -> Operator {
        Operator::new(
            Array2::from_shape_fn((dim, dim), |_| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }),
            tag(),
        )
        .unwrap()
    }

    fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Operator {
        let a = random_op(dim, rng);
        a.add(&a.adjoint()).scale_re(0.5)
    }

    fn sigma1() -> Operator {
        Operator::from_real(array![[0.0, 1.0], [1.0, 0.0]], tag()).unwrap()
    }

    fn sigma3() -> Operator {
        Operator::from_real(array![[1.0, 0.0], [0.0, -1.0]], tag()).unwrap()
    }

    #[test]
    fn left_mult_identity() {
        let id = Operator::identity(3, tag());
        let l = left_mult(&id);
        assert_eq!(l.dim(), 9);
        assert!(l.max_abs_diff(&Operator::identity(9, tag().hs())) < 1e-15);
    }

    #[test]
    fn left_mult_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let a = random_op(2, &mut rng);
            let b = random_op(2, &mut rng);
            let lhs = left_mult(&a).mul(&left_mult(&b));
            let rhs = left_mult(&a.mul(&b));
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn right_mult_antihomomorphism_and_commutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let theta = Involution::conjugation(3, tag());
        for _ in 0..10 {
            let a = random_op(3, &mut rng);
            let b = random_op(3, &mut rng);
            let lhs = right_mult(&a, &theta).unwrap().mul(&right_mult(&b, &theta).unwrap());
            let rhs = right_mult(&b.mul(&a), &theta).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            let comm = left_mult(&a).commutator(&right_mult(&b, &theta).unwrap());
            assert!(comm.max_abs() < 1e-12);
        }
    }

    #[test]
    fn mult_actions_on_vectorized_matrices() {
        let v = vec_rowmajor(sigma1().data());
        let out = left_mult(&sigma3()).apply(&v);
        let expect = vec_rowmajor(sigma3().mul(&sigma1()).data());
        for (a, b) in out.iter().zip(expect.iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
        let theta = Involution::conjugation(2, tag());
        let v = vec_rowmajor(sigma3().data());
        let out = right_mult(&sigma1(), &theta).unwrap().apply(&v);
        let expect = vec_rowmajor(sigma3().mul(&sigma1()).data());
        for (a, b) in out.iter().zip(expect.iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn phi_theta_is_unitary_and_maps_basis_pairs() {
        // A nontrivial involution: coordinate flip on dim 2.
        let flip = Involution::new(array![[0.0, 1.0], [1.0, 0.0]], tag()).unwrap();
        let phi = phi_theta(&flip);
        let prod = phi.adjoint().mul(&phi);
        assert!(prod.max_abs_diff(&Operator::identity(4, phi.tag().clone())) < 1e-14);

        for x in 0..2usize {
            for y in 0..2usize {
                let mut m = Array2::<C64>::zeros((2, 2));
                m[[x, y]] = C64::new(1.0, 0.0);
                let v = vec_rowmajor(&m);
                let out = phi.apply(&v);
                let mut ey = Array1::<C64>::zeros(2);
                ey[y] = C64::new(1.0, 0.0);
                let tey = flip.apply(&ey);
                for i in 0..2 {
                    for j in 0..2 {
                        let expect = if i == x { tey[j] } else { C64::new(0.0, 0.0) };
                        assert_abs_diff_eq!((out[i * 2 + j] - expect).norm(), 0.0, epsilon = 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn phi_theta_pullback_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for theta in [
            Involution::conjugation(2, tag()),
            Involution::new(array![[0.0, 1.0], [1.0, 0.0]], tag()).unwrap(),
        ] {
            let phi = phi_theta(&theta);
            for _ in 0..5 {
                let a = random_op(2, &mut rng);
                let id = Operator::identity(2, tag());
                // Phi* (A (x) 1) Phi = L(A)
                let a_tensor_1 = kron(&[&a, &id]).unwrap().retag(phi.tag().clone());
                let pulled = a_tensor_1.conjugated_by(&phi).retag(tag().hs());
                assert!(pulled.max_abs_diff(&left_mult(&a)) < 1e-12);
                // Phi* (1 (x) A) Phi = R(theta A^* theta)
                let one_tensor_a = kron(&[&id, &a]).unwrap().retag(phi.tag().clone());
                let pulled = one_tensor_a.conjugated_by(&phi).retag(tag().hs());
                let expect = right_mult(&theta.sandwich_adjoint(&a), &theta).unwrap();
                assert!(pulled.max_abs_diff(&expect) < 1e-12);
            }
        }
    }

    #[test]
    fn sandwich_with_plain_conjugation_keeps_real_symmetric_fixed() {
        let theta = Involution::conjugation(2, tag());
        let s = theta.sandwich_adjoint(&sigma3());
        assert!(s.max_abs_diff(&sigma3()) < 1e-15);
        let pulled = right_mult(&s, &theta).unwrap();
        assert!(pulled.max_abs_diff(&right_mult_raw(&sigma3())) < 1e-15);
    }

    #[test]
    fn rp_algebra_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_op(2, &mut rng);
        let b = random_op(2, &mut rng);
        let ta = RPOperator::certified_term(1.0, &a).unwrap();
        let tb = RPOperator::certified_term(1.0, &b).unwrap();
        let prod = ta.mul(&tb);
        assert!(prod.is_certified());
        // L(AB) R((AB)^*) up to term bookkeeping.
        let expect = RPOperator::certified_term(1.0, &a.mul(&b)).unwrap();
        assert!(prod.to_matrix().max_abs_diff(&expect.to_matrix()) < 1e-12);

        let zero = RPOperator::zero(2, tag());
        let s = ta.add(&zero);
        assert!(s.to_matrix().max_abs_diff(&ta.to_matrix()) < 1e-15);

        let uncert = RPOperator::term(1.0, &a, &b).unwrap();
        assert!(!uncert.is_certified());
        assert!(!ta.mul(&uncert).is_certified());
    }

    #[test]
    fn certified_terms_pass_sampled_positive_map_and_trace_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let a = random_op(3, &mut rng);
            let t = RPOperator::certified_term(rng.gen_range(0.1..2.0), &a).unwrap();
            let m = sampled_positive_map(&t.to_matrix(), 20, &mut rng, DEFAULT_TOL).unwrap();
            assert!(m.value >= -1e-9, "L(a)R(a*) must act positively, got {}", m.value);
            let tr = t.trace();
            let expect = t.terms()[0].coeff * a.trace().norm_sqr();
            assert_abs_diff_eq!(tr.re, expect, epsilon = 1e-10 * (1.0 + expect.abs()));
            assert!(tr.re >= 0.0);
            assert_abs_diff_eq!(tr.im, 0.0, epsilon = 1e-10 * (1.0 + expect.abs()));
            assert_abs_diff_eq!(
                t.to_matrix().trace().re,
                tr.re,
                epsilon = 1e-9 * (1.0 + expect.abs())
            );
        }
    }

    #[test]
    fn psd_gram_assembly_is_certified_and_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 3;
        let b = random_op(n, &mut rng);
        let gram = b.adjoint().mul(&b); // PSD by construction
        let ops: Vec<Operator> = (0..n).map(|_| random_op(2, &mut rng)).collect();
        let assembled = assemble_psd_combination(&gram, &ops).unwrap();
        assert!(assembled.is_certified());
        // Matrix form must equal the literal double sum.
        let mut direct = Operator::zeros(4, tag().hs());
        for i in 0..n {
            for j in 0..n {
                let m = left_mult(&ops[i].adjoint()).mul(&right_mult_raw(&ops[j]));
                let c = gram.data()[[i, j]];
                direct = direct.add(&m.scale(c));
            }
        }
        assert!(assembled.to_matrix().max_abs_diff(&direct) < 1e-10);
        let mv = sampled_positive_map(&assembled.to_matrix(), 20, &mut rng, DEFAULT_TOL).unwrap();
        assert!(mv.value >= -1e-9);
    }

    #[test]
    fn compress_preserves_the_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut acc = RPOperator::zero(3, tag());
        for _ in 0..7 {
            let a = random_op(3, &mut rng);
            acc = acc.add(&RPOperator::certified_term(rng.gen_range(0.0..1.0), &a).unwrap());
        }
        let before = acc.to_matrix();
        let compressed = acc.compress(DEFAULT_TOL).unwrap();
        assert!(compressed.is_certified());
        assert!(compressed.num_terms() <= 9);
        assert!(compressed.to_matrix().max_abs_diff(&before) < 1e-9 * (1.0 + before.max_abs()));
    }

    #[test]
    fn rp_exponential_zero_interaction_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_hermitian(3, &mut rng);
        let v = RPOperator::zero(3, tag());
        let (out, report) = rp_exponential(&a, &v, 1.3, 16, DEFAULT_TOL).unwrap();
        assert!(out.is_certified());
        assert_eq!(out.num_terms(), 1);
        let e = expm_hermitian(&a, -1.3).unwrap();
        let expect = RPOperator::certified_term(1.0, &e).unwrap();
        assert!(out.to_matrix().max_abs_diff(&expect.to_matrix()) < 1e-12);
        assert!(report.matrix_error < 1e-10);
    }

    #[test]
    fn rp_exponential_converges_and_stays_certified() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_hermitian(3, &mut rng);
        let w = random_hermitian(3, &mut rng);
        let v = RPOperator::certified_term(0.7, &w).unwrap();
        let mut last = f64::INFINITY;
        for &n in &[4usize, 16, 64] {
            let (out, report) = rp_exponential(&a, &v, 1.0, n, DEFAULT_TOL).unwrap();
            assert!(out.is_certified());
            assert!(
                report.matrix_error < last * 1.5,
                "error should not grow with n: {} after {}",
                report.matrix_error,
                last
            );
            last = report.matrix_error;
        }
        assert!(last < 1e-3, "final Trotter error {last}");
    }

    #[test]
    fn rejects_uncertified_interaction() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = random_hermitian(2, &mut rng);
        let b = random_op(2, &mut rng);
        let c = random_op(2, &mut rng);
        let v = RPOperator::term(1.0, &b, &c).unwrap();
        assert!(!v.is_certified());
        assert!(matches!(
            rp_exponential(&a, &v, 1.0, 4, DEFAULT_TOL),
            Err(CoreError::NotCertified(_))
        ));
    }

    #[test]
    fn involution_is_antilinear_and_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let theta = Involution::new(array![[0.0, 1.0], [1.0, 0.0]], tag()).unwrap();
        for _ in 0..10 {
            let v = Array1::from_shape_fn(2, |_| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let alpha = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let lhs = theta.apply(&v.mapv(|x| x * alpha));
            let rhs = theta.apply(&v).mapv(|x| x * alpha.conj());
            for (a, b) in lhs.iter().zip(rhs.iter()) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
            }
            let twice = theta.apply(&theta.apply(&v));
            for (a, b) in twice.iter().zip(v.iter()) {
                assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }
}
