//! Self-dual cones and the decidable positivity tests attached to them.
//!
//! Two kinds of cone cover every construction in the toolkit: the
//! nonnegative-coefficient cone over a distinguished orthonormal basis, and
//! the PSD cone of Hilbert–Schmidt space. For a coordinate cone,
//! "A preserves positivity" is decided by scanning matrix elements in the
//! distinguished basis; for the PSD cone it is not decidable entrywise, so
//! the toolkit reports sampled evidence instead and never claims a decision.
//!
//! Vectorization is row-major throughout: `vec(M)[i*d + j] = M[i][j]`.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::CoreError;
use crate::linalg::{hermitian_eig, BasisTag, Operator, C64};
use crate::tol::scaled;
use crate::Result;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConeKind {
    /// Nonnegative coefficients w.r.t. a distinguished orthonormal basis.
    /// The involution J is entrywise complex conjugation in that basis.
    Coordinate,
    /// PSD cone of Hilbert-Schmidt space over an underlying dim-dimensional
    /// space; the cone lives in the dim^2-dimensional vectorized space.
    /// The involution J is the operator adjoint.
    Psd,
}

/// A self-dual cone at desk scale.
#[derive(Clone, Debug)]
pub struct SelfDualCone {
    pub kind: ConeKind,
    /// Underlying Hilbert-space dimension (the ambient dimension is `dim`
    /// for coordinate cones and `dim^2` for the PSD kind).
    pub dim: usize,
    pub basis_tag: BasisTag,
}

impl SelfDualCone {
    pub fn coordinate(dim: usize, basis_tag: BasisTag) -> Self {
        SelfDualCone { kind: ConeKind::Coordinate, dim, basis_tag }
    }

    pub fn psd(dim: usize, basis_tag: BasisTag) -> Self {
        SelfDualCone { kind: ConeKind::Psd, dim, basis_tag }
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ConeKind::Coordinate => self.dim,
            ConeKind::Psd => self.dim * self.dim,
        }
    }

    /// A random cone member, used for self-duality evidence and sampling.
    pub fn random_member(&self, rng: &mut impl Rng) -> Array1<C64> {
        match self.kind {
            ConeKind::Coordinate => {
                Array1::from_iter((0..self.dim).map(|_| C64::new(rng.gen_range(0.0..1.0), 0.0)))
            }
            ConeKind::Psd => {
                let d = self.dim;
                let mut b = Array2::<C64>::zeros((d, d));
                for i in 0..d {
                    for j in 0..d {
                        b[[i, j]] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    }
                }
                let m = b.t().mapv(|x| x.conj()).dot(&b);
                vec_rowmajor(&m)
            }
        }
    }
}

/// Outcome of a cone membership or positivity test: the most negative
/// coefficient or eigenvalue found, and where it was found.
#[derive(Clone, Debug)]
pub struct ConeMargin {
    pub value: f64,
    pub witness: Option<String>,
}

impl ConeMargin {
    pub fn is_inside(&self, tol: f64) -> bool {
        self.value >= -tol
    }
}

/// Row-major vectorization of a matrix.
pub fn vec_rowmajor(m: &Array2<C64>) -> Array1<C64> {
    Array1::from_iter(m.iter().cloned())
}

/// Inverse of [`vec_rowmajor`].
pub fn unvec_rowmajor(v: &Array1<C64>, dim: usize) -> Result<Array2<C64>> {
    if v.len() != dim * dim {
        return Err(CoreError::DimensionMismatch(v.len(), dim * dim));
    }
    Ok(Array2::from_shape_fn((dim, dim), |(i, j)| v[i * dim + j]))
}

/// Membership margin of a vector in a cone.
///
/// Coordinate kind: imaginary parts above tolerance are rejected, the margin
/// is the minimum real coefficient over all coordinates. PSD kind: the
/// vector is reshaped to a matrix, which must be Hermitian to tolerance; the
/// margin is its minimal eigenvalue.
pub fn contains(cone: &SelfDualCone, v: &Array1<C64>, tol: f64) -> Result<ConeMargin> {
    if v.len() != cone.ambient_dim() {
        return Err(CoreError::DimensionMismatch(v.len(), cone.ambient_dim()));
    }
    match cone.kind {
        ConeKind::Coordinate => {
            let max = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let allowed = scaled(tol, max);
            for (k, x) in v.iter().enumerate() {
                if x.im.abs() > allowed {
                    return Err(CoreError::NotInRealSubspace(format!(
                        "coordinate {k} has imaginary part {:.3e}",
                        x.im
                    )));
                }
            }
            let (k, val) = v
                .iter()
                .enumerate()
                .map(|(k, x)| (k, x.re))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty vector");
            Ok(ConeMargin { value: val, witness: Some(format!("coordinate {k}")) })
        }
        ConeKind::Psd => {
            let m = unvec_rowmajor(v, cone.dim)?;
            let op = Operator::new(m, cone.basis_tag.clone())?;
            let asym = op.asymmetry();
            if asym > scaled(tol, op.max_abs()) {
                return Err(CoreError::NotInRealSubspace(format!(
                    "reshaped matrix is not Hermitian: asymmetry {asym:.3e}"
                )));
            }
            let herm = op.add(&op.adjoint()).scale_re(0.5);
            let spec = hermitian_eig(&herm)?;
            Ok(ConeMargin {
                value: spec.eigenvalues[0],
                witness: Some("minimal eigenvector".to_string()),
            })
        }
    }
}

/// Matrix-element criterion for positivity preservation w.r.t. a coordinate
/// cone: `A` maps the cone into itself iff every `<x_m|A x_n>` is
/// nonnegative in the distinguished basis.
pub fn preserves_positivity(a: &Operator, cone: &SelfDualCone, tol: f64) -> Result<ConeMargin> {
    entrywise_margin(a, cone, tol)
}

/// Strictly-positive-matrix-elements sufficient condition for positivity
/// improvement. For coordinate cones in finite dimension this coincides
/// with the definition quantified over all cone vectors: a matrix with all
/// entries strictly positive maps every nonzero nonnegative vector to a
/// strictly positive one, and conversely a zero entry `A_mn` makes `A e_n`
/// orthogonal to `e_m`. The caller certifies improvement when the returned
/// margin is strictly above tolerance.
pub fn improves_positivity(a: &Operator, cone: &SelfDualCone, tol: f64) -> Result<ConeMargin> {
    entrywise_margin(a, cone, tol)
}

fn entrywise_margin(a: &Operator, cone: &SelfDualCone, tol: f64) -> Result<ConeMargin> {
    match cone.kind {
        ConeKind::Psd => return Err(CoreError::UsePsdSampling),
        ConeKind::Coordinate => {}
    }
    if a.dim() != cone.dim {
        return Err(CoreError::DimensionMismatch(a.dim(), cone.dim));
    }
    let allowed = scaled(tol, a.max_abs());
    let mut min = f64::INFINITY;
    let mut witness = None;
    for ((m, n), x) in a.data().indexed_iter() {
        if x.im.abs() > allowed {
            return Err(CoreError::NotInRealSubspace(format!(
                "matrix element ({m},{n}) has imaginary part {:.3e}",
                x.im
            )));
        }
        if x.re < min {
            min = x.re;
            witness = Some(format!("element ({m},{n})"));
        }
    }
    Ok(ConeMargin { value: min, witness })
}

/// Sampled positivity evidence for a map on Hilbert-Schmidt space.
///
/// Applies the superoperator to every distinguished-basis projector and to
/// `trials` random rank-1 PSD inputs, and reports the worst minimal
/// eigenvalue of the (Hermitized) outputs. A margin above `-tol` is
/// necessary-condition evidence for positivity preservation w.r.t. the PSD
/// cone, never a decision.
pub fn sampled_positive_map(
    superop: &Operator,
    trials: usize,
    rng: &mut impl Rng,
    tol: f64,
) -> Result<ConeMargin> {
    let d2 = superop.dim();
    let dim = (d2 as f64).sqrt().round() as usize;
    if dim * dim != d2 {
        return Err(CoreError::DimensionMismatch(d2, dim * dim));
    }
    let mut worst = f64::INFINITY;
    let mut witness = None;

    let check = |input: &Array1<C64>, label: &str,
                     worst: &mut f64,
                     witness: &mut Option<String>|
     -> Result<()> {
        let out = superop.data().dot(input);
        let m = unvec_rowmajor(&out, dim)?;
        let op = Operator::new(m, superop.tag().clone())?;
        let asym = op.asymmetry();
        let herm = op.add(&op.adjoint()).scale_re(0.5);
        let spec = hermitian_eig(&herm)?;
        let mut margin = spec.eigenvalues[0];
        if asym > scaled(tol, op.max_abs()) {
            // A Hermiticity-breaking output can never come from a positive
            // map acting on a Hermitian input.
            margin = margin.min(-asym);
        }
        if margin < *worst {
            *worst = margin;
            *witness = Some(label.to_string());
        }
        Ok(())
    };

    for k in 0..dim {
        let mut proj = Array2::<C64>::zeros((dim, dim));
        proj[[k, k]] = C64::new(1.0, 0.0);
        let v = vec_rowmajor(&proj);
        check(&v, &format!("basis projector {k}"), &mut worst, &mut witness)?;
    }
    for t in 0..trials.max(1) {
        let mut v = Array1::<C64>::zeros(dim);
        let mut norm2 = 0.0;
        for x in v.iter_mut() {
            *x = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            norm2 += x.norm_sqr();
        }
        let inv = 1.0 / norm2.sqrt();
        let proj = Array2::from_shape_fn((dim, dim), |(i, j)| v[i] * v[j].conj() * inv * inv);
        let vv = vec_rowmajor(&proj);
        check(&vv, &format!("random rank-1 input {t}"), &mut worst, &mut witness)?;
    }
    Ok(ConeMargin { value: worst, witness })
}

/// Decomposition of a J-fixed vector into orthogonal positive and negative
/// parts, `v = v_plus - v_minus`, both in the cone.
pub fn haagerup_decompose(
    v: &Array1<C64>,
    cone: &SelfDualCone,
    tol: f64,
) -> Result<(Array1<C64>, Array1<C64>)> {
    if v.len() != cone.ambient_dim() {
        return Err(CoreError::DimensionMismatch(v.len(), cone.ambient_dim()));
    }
    let max = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    match cone.kind {
        ConeKind::Coordinate => {
            // J is conjugation in the distinguished basis, so J-fixed means
            // real coefficients.
            let residual = v.iter().map(|x| x.im.abs()).fold(0.0, f64::max);
            if residual > scaled(tol, max) {
                return Err(CoreError::NotJReal(residual));
            }
            let plus = v.mapv(|x| C64::new(x.re.max(0.0), 0.0));
            let minus = v.mapv(|x| C64::new((-x.re).max(0.0), 0.0));
            Ok((plus, minus))
        }
        ConeKind::Psd => {
            // J is the adjoint, so J-fixed means Hermitian.
            let m = unvec_rowmajor(v, cone.dim)?;
            let op = Operator::new(m, cone.basis_tag.clone())?;
            let residual = op.asymmetry();
            if residual > scaled(tol, max) {
                return Err(CoreError::NotJReal(residual));
            }
            let herm = op.add(&op.adjoint()).scale_re(0.5);
            let spec = hermitian_eig(&herm)?;
            let plus = spec.function(|lam| lam.max(0.0));
            let minus = spec.function(|lam| (-lam).max(0.0));
            Ok((vec_rowmajor(plus.data()), vec_rowmajor(minus.data())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm_hermitian;
    use crate::tol::DEFAULT_TOL;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tag() -> BasisTag {
        BasisTag::new("test")
    }

    fn sigma1() -> Operator {
        Operator::from_real(array![[0.0, 1.0], [1.0, 0.0]], tag()).unwrap()
    }

    fn sigma3() -> Operator {
        Operator::from_real(array![[1.0, 0.0], [0.0, -1.0]], tag()).unwrap()
    }

    #[test]
    fn coordinate_contains_basis_vector() {
        let cone = SelfDualCone::coordinate(3, tag());
        let mut v = Array1::<C64>::zeros(3);
        v[0] = C64::new(1.0, 0.0);
        let m = contains(&cone, &v, DEFAULT_TOL).unwrap();
        // The minimum over all coordinates is 0 (the unoccupied ones).
        assert_abs_diff_eq!(m.value, 0.0);
        assert!(m.is_inside(DEFAULT_TOL));
    }

    #[test]
    fn psd_contains_projector_and_rejects_sigma3() {
        let cone = SelfDualCone::psd(2, tag());
        let proj = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let m = contains(&cone, &vec_rowmajor(&proj), DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(m.value, 0.0, epsilon = 1e-12);

        let m = contains(&cone, &vec_rowmajor(sigma3().data()), DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(m.value, -1.0, epsilon = 1e-12);
        assert!(!m.is_inside(DEFAULT_TOL));
    }

    #[test]
    fn imaginary_coordinate_rejected() {
        let cone = SelfDualCone::coordinate(2, tag());
        let v = array![C64::new(1.0, 0.5), C64::new(0.0, 0.0)];
        assert!(matches!(
            contains(&cone, &v, DEFAULT_TOL),
            Err(CoreError::NotInRealSubspace(_))
        ));
    }

    #[test]
    fn preserves_positivity_paulis() {
        let cone = SelfDualCone::coordinate(2, tag());
        let m = preserves_positivity(&sigma1(), &cone, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(m.value, 0.0);
        let m = preserves_positivity(&Operator::identity(2, tag()), &cone, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(m.value, 0.0);
        let m = preserves_positivity(&sigma3(), &cone, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(m.value, -1.0);
        assert!(!m.is_inside(DEFAULT_TOL));
    }

    #[test]
    fn psd_cone_is_not_decided_entrywise() {
        let cone = SelfDualCone::psd(2, tag());
        assert!(matches!(
            preserves_positivity(&Operator::identity(4, tag()), &cone, DEFAULT_TOL),
            Err(CoreError::UsePsdSampling)
        ));
    }

    #[test]
    fn improves_positivity_expm_sigma1() {
        let cone = SelfDualCone::coordinate(2, tag());
        let beta = 0.8;
        let e = expm_hermitian(&sigma1(), beta).unwrap();
        let m = improves_positivity(&e, &cone, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(m.value, beta.sinh(), epsilon = 1e-10);
        assert!(m.value > DEFAULT_TOL);
        // The identity preserves but does not improve.
        let m = improves_positivity(&Operator::identity(2, tag()), &cone, DEFAULT_TOL).unwrap();
        assert!(m.value <= DEFAULT_TOL);
    }

    #[test]
    fn sampled_map_identity_and_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let id4 = Operator::identity(4, tag().hs());
        let m = sampled_positive_map(&id4, 25, &mut rng, DEFAULT_TOL).unwrap();
        assert!(m.value >= -1e-10, "identity superop margin {}", m.value);

        // Conjugation xi -> sigma3 xi sigma3 preserves PSD by congruence;
        // its superoperator is sigma3 (x) sigma3^T.
        let s3 = sigma3();
        let sup = crate::linalg::kron(&[&s3, &s3.transpose()])
            .unwrap()
            .retag(tag().hs());
        let m = sampled_positive_map(&sup, 25, &mut rng, DEFAULT_TOL).unwrap();
        assert!(m.value >= -1e-10, "conjugation margin {}", m.value);
    }

    #[test]
    fn haagerup_examples() {
        let cone = SelfDualCone::coordinate(2, tag());
        // A vector already in the cone splits as (v, 0).
        let v = array![C64::new(0.3, 0.0), C64::new(1.0, 0.0)];
        let (p, m) = haagerup_decompose(&v, &cone, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!((&p - &v).iter().map(|x| x.norm()).sum::<f64>(), 0.0);
        assert_abs_diff_eq!(m.iter().map(|x| x.norm()).sum::<f64>(), 0.0);

        let v = array![C64::new(1.0, 0.0), C64::new(-2.0, 0.0)];
        let (p, m) = haagerup_decompose(&v, &cone, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(p[0].re, 1.0);
        assert_abs_diff_eq!(p[1].re, 0.0);
        assert_abs_diff_eq!(m[0].re, 0.0);
        assert_abs_diff_eq!(m[1].re, 2.0);
        // Orthogonality of the parts.
        let ip: C64 = p.iter().zip(m.iter()).map(|(a, b)| a.conj() * b).sum();
        assert_abs_diff_eq!(ip.norm(), 0.0);
    }

    #[test]
    fn haagerup_psd_spectral_split() {
        let cone = SelfDualCone::psd(2, tag());
        let v = vec_rowmajor(sigma3().data());
        let (p, m) = haagerup_decompose(&v, &cone, DEFAULT_TOL).unwrap();
        // Positive part |+1><+1| = diag(1,0), negative part diag(0,1).
        assert_abs_diff_eq!(p[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[3].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m[0].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m[3].re, 1.0, epsilon = 1e-12);
        // Both parts are in the cone and orthogonal.
        assert!(contains(&cone, &p, DEFAULT_TOL).unwrap().is_inside(1e-10));
        assert!(contains(&cone, &m, DEFAULT_TOL).unwrap().is_inside(1e-10));
        let ip: C64 = p.iter().zip(m.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!(ip.norm() <= 1e-10);
    }

    #[test]
    fn haagerup_rejects_non_j_fixed() {
        let cone = SelfDualCone::coordinate(2, tag());
        let v = array![C64::new(0.0, 1.0), C64::new(0.0, 0.0)];
        assert!(matches!(
            haagerup_decompose(&v, &cone, DEFAULT_TOL),
            Err(CoreError::NotJReal(_))
        ));
    }

    #[test]
    fn haagerup_commutes_with_permutation() {
        let cone = SelfDualCone::coordinate(4, tag());
        let v = array![
            C64::new(0.5, 0.0),
            C64::new(-1.5, 0.0),
            C64::new(2.0, 0.0),
            C64::new(-0.1, 0.0)
        ];
        let (p, m) = haagerup_decompose(&v, &cone, DEFAULT_TOL).unwrap();
        // Recompose is the identity.
        for k in 0..4 {
            assert_abs_diff_eq!((p[k] - m[k]).re, v[k].re, epsilon = 1e-15);
        }
        // Permute then decompose equals decompose then permute.
        let perm = [2usize, 0, 3, 1];
        let vp = Array1::from_iter(perm.iter().map(|&k| v[k]));
        let (pp, mp) = haagerup_decompose(&vp, &cone, DEFAULT_TOL).unwrap();
        for (i, &k) in perm.iter().enumerate() {
            assert_abs_diff_eq!(pp[i].re, p[k].re, epsilon = 1e-15);
            assert_abs_diff_eq!(mp[i].re, m[k].re, epsilon = 1e-15);
        }
    }

    #[test]
    fn self_duality_evidence() {
        // >= 100 random member pairs have nonnegative inner product, and a
        // non-member is witnessed negative by some member.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for cone in [SelfDualCone::coordinate(5, tag()), SelfDualCone::psd(3, tag())] {
            for _ in 0..100 {
                let x = cone.random_member(&mut rng);
                let y = cone.random_member(&mut rng);
                let ip: C64 = x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum();
                assert!(ip.re >= -1e-10, "members must have nonnegative overlap");
                assert!(ip.im.abs() <= 1e-10 * (1.0 + ip.re.abs()));
            }
        }
        // Coordinate non-member.
        let cone = SelfDualCone::coordinate(3, tag());
        let mut v = Array1::<C64>::zeros(3);
        v[1] = C64::new(-1.0, 0.0);
        let mut e1 = Array1::<C64>::zeros(3);
        e1[1] = C64::new(1.0, 0.0);
        let ip: C64 = e1.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!(ip.re < 0.0);
        // PSD non-member sigma3 witnessed by the |-1><-1| projector.
        let cone_psd = SelfDualCone::psd(2, tag());
        let proj = array![
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        ];
        let w = vec_rowmajor(&proj);
        let v = vec_rowmajor(sigma3().data());
        let ip: C64 = w.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!(ip.re < 0.0);
        let _ = cone;
        let _ = cone_psd;
    }

    #[test]
    fn closure_under_sum_and_product() {
        // Prop-style closure: if A and B pass the entrywise test, so do
        // alpha A + beta B (alpha, beta >= 0) and AB.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cone = SelfDualCone::coordinate(4, tag());
        let rand_nonneg = |rng: &mut ChaCha8Rng| {
            Operator::from_real(
                Array2::from_shape_fn((4, 4), |_| rng.gen_range(0.0..1.0)),
                tag(),
            )
            .unwrap()
        };
        for _ in 0..20 {
            let a = rand_nonneg(&mut rng);
            let b = rand_nonneg(&mut rng);
            let alpha = rng.gen_range(0.0..2.0);
            let beta = rng.gen_range(0.0..2.0);
            let lin = a.scale_re(alpha).add(&b.scale_re(beta));
            let prod = a.mul(&b);
            assert!(preserves_positivity(&lin, &cone, DEFAULT_TOL).unwrap().is_inside(1e-10));
            let bound = 4.0 * 1e-10 * (a.max_abs() + b.max_abs());
            assert!(
                preserves_positivity(&prod, &cone, DEFAULT_TOL).unwrap().value >= -bound,
                "product margin must obey the dim-scaled bound"
            );
        }
    }

    #[test]
    fn exp_of_preserving_is_preserving() {
        // If A passes the entrywise test then so does exp(beta A), beta in
        // {0.1, 1, 10}.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cone = SelfDualCone::coordinate(3, tag());
        let mut data = Array2::<f64>::zeros((3, 3));
        for i in 0..3 {
            for j in i..3 {
                let x = rng.gen_range(0.0..0.5);
                data[[i, j]] = x;
                data[[j, i]] = x;
            }
        }
        let a = Operator::from_real(data, tag()).unwrap();
        assert!(preserves_positivity(&a, &cone, DEFAULT_TOL).unwrap().is_inside(1e-10));
        for &beta in &[0.1, 1.0, 10.0] {
            let e = expm_hermitian(&a, beta).unwrap();
            let m = preserves_positivity(&e, &cone, DEFAULT_TOL).unwrap();
            assert!(m.value >= -1e-9 * (1.0 + e.max_abs()), "beta={beta}: {}", m.value);
        }
    }

    #[test]
    fn trace_bound_from_preservation() {
        // Entrywise-nonnegative matrices have nonnegative trace; with margin
        // >= -tol the trace is >= -dim*tol.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let a = Operator::from_real(
                Array2::from_shape_fn((5, 5), |_| rng.gen_range(0.0..1.0)),
                tag(),
            )
            .unwrap();
            let cone = SelfDualCone::coordinate(5, tag());
            let m = preserves_positivity(&a, &cone, DEFAULT_TOL).unwrap();
            assert!(a.trace().re >= -(5.0) * (-m.value.min(0.0)));
        }
    }
}
