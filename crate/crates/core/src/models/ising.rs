//! Quantum Ising model builder.
//!
//! `H = - sum_{x,y} J_xy s3_x s3_y - sum_x mu_x s3_x - sum_x lambda_x s1_x`
//! on `(C^2)^(x n)`, with the spin-configuration basis `|+1> = (1,0)`,
//! `|-1> = (0,1)` per site. The ferromagnetic proofs run in the rotated
//! frame `U = (x)_x u`, where `u* s3 u = s1` and `u* s1 u = -s3`.
//!
//! For up to 3 sites the builder also materializes the doubled space
//! `K = (x)_x C^4`, with the per-site basis relabeled as
//! `e1 = |+,+>, e2 = |-,->, e3 = |+,->, e4 = |-,+>`, the per-site operators
//! `psi, phi, eta, xi`, the block unitary `Theta = (x)_x diag(u, u)`, and
//! every tilded image `X~ = Theta* X Theta` the structural suites check.

use std::collections::BTreeMap;

use ndarray::{array, Array2};

use crate::error::CoreError;
use crate::linalg::{kron, BasisTag, Operator, C64};
use crate::Result;

use super::{site_op, LatticeSpec, ModelInstance, ModelKind, Transform};

pub const MAX_SITES: usize = 8;
const MAX_DOUBLED_SITES: usize = 3;

fn spin_tag() -> BasisTag {
    BasisTag::new("ising-spin")
}

fn k_tag() -> BasisTag {
    BasisTag::new("ising-k")
}

pub(crate) fn pauli(which: usize) -> Operator {
    let t = BasisTag::new("spin-site");
    match which {
        1 => Operator::from_real(array![[0.0, 1.0], [1.0, 0.0]], t).unwrap(),
        2 => Operator::new(
            array![
                [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
                [C64::new(0.0, 1.0), C64::new(0.0, 0.0)]
            ],
            t,
        )
        .unwrap(),
        3 => Operator::from_real(array![[1.0, 0.0], [0.0, -1.0]], t).unwrap(),
        _ => panic!("pauli index must be 1, 2 or 3"),
    }
}

/// The rotation `u = (1/sqrt2) [[1, 1], [-1, 1]]`.
fn u_single() -> Operator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Operator::from_real(array![[s, s], [-s, s]], BasisTag::new("spin-site")).unwrap()
}

pub fn build(spec: &LatticeSpec) -> Result<ModelInstance> {
    spec.check_symmetry()?;
    let n = spec.n_sites();
    if n == 0 || n > MAX_SITES {
        return Err(CoreError::LatticeCondition(format!(
            "ising supports 1..={MAX_SITES} sites, got {n}"
        )));
    }
    let tag = spin_tag();
    let dim = 1usize << n;

    let mut ops: BTreeMap<String, Operator> = BTreeMap::new();
    for x in 0..n {
        for (k, name) in [(1, "sigma1"), (2, "sigma2"), (3, "sigma3")] {
            ops.insert(format!("{name}_{x}"), site_op(&pauli(k), x, n, &tag));
        }
        let tau = Operator::identity(dim, tag.clone())
            .add(&ops[&format!("sigma1_{x}")])
            .scale_re(0.5);
        ops.insert(format!("tau_{x}"), tau);
    }

    let mut h = Operator::zeros(dim, tag.clone());
    for x in 0..n {
        for y in 0..n {
            let j = spec.coupling(x, y);
            if j != 0.0 {
                let zz = ops[&format!("sigma3_{x}")].mul(&ops[&format!("sigma3_{y}")]);
                h = h.sub(&zz.scale_re(j));
            }
        }
        if spec.mu[x] != 0.0 {
            h = h.sub(&ops[&format!("sigma3_{x}")].scale_re(spec.mu[x]));
        }
        if spec.lambda[x] != 0.0 {
            h = h.sub(&ops[&format!("sigma1_{x}")].scale_re(spec.lambda[x]));
        }
    }

    let mut transforms = BTreeMap::new();
    let u_factors: Vec<Operator> = (0..n).map(|_| u_single()).collect();
    let u_refs: Vec<&Operator> = u_factors.iter().collect();
    transforms.insert("U".to_string(), Transform::Unitary(kron(&u_refs)?.retag(tag.clone())));

    let basis_labels = (0..dim)
        .map(|idx| {
            (0..n)
                .map(|x| if idx >> (n - 1 - x) & 1 == 0 { '+' } else { '-' })
                .collect::<String>()
        })
        .collect();

    let doubled = if n <= MAX_DOUBLED_SITES { Some(Box::new(build_doubled(spec, &h)?)) } else { None };

    let instance = ModelInstance {
        kind: ModelKind::Ising,
        spec: spec.clone(),
        hamiltonian: h,
        basis_labels,
        ops,
        aux_ops: BTreeMap::new(),
        transforms,
        rp_ops: BTreeMap::new(),
        doubled,
        truncation: None,
    };
    instance.validate()?;
    Ok(instance)
}

/// Product `sigma3_A = prod_{x in A} sigma3_x` over a site subset.
pub fn sigma3_subset(m: &ModelInstance, subset: &[usize]) -> Result<Operator> {
    let names: Vec<String> = subset.iter().map(|x| format!("sigma3_{x}")).collect();
    m.product(&names.iter().map(|s| s.as_str()).collect::<Vec<_>>())
}

/// Product `tau_A = prod_{x in A} tau_x`.
pub fn tau_subset(m: &ModelInstance, subset: &[usize]) -> Result<Operator> {
    let names: Vec<String> = subset.iter().map(|x| format!("tau_{x}")).collect();
    m.product(&names.iter().map(|s| s.as_str()).collect::<Vec<_>>())
}

/// Per-site doubled operators on C^4 in the relabeled basis
/// `e1, e2, e3, e4`, together with the permutation that carries the tensor
/// pair basis onto it.
fn doubled_site_ops() -> (Array2<C64>, Vec<(String, Operator)>) {
    let t = BasisTag::new("k-site");
    // e-label -> tensor pair index 2*w + w' (w = 0 for +1).
    let pair_of: [usize; 4] = [0, 3, 1, 2];
    let mut perm = Array2::<C64>::zeros((4, 4));
    for (e, &p) in pair_of.iter().enumerate() {
        perm[[e, p]] = C64::new(1.0, 0.0);
    }

    let s1 = pauli(1);
    let s3 = pauli(3);
    let id = Operator::identity(2, s1.tag().clone());
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let tensor = |a: &Operator, b: &Operator| kron(&[a, b]).unwrap().retag(t.clone());
    let sym = |s: &Operator| tensor(s, &id).add(&tensor(&id, s)).scale_re(inv_sqrt2);
    let antisym = |s: &Operator| tensor(s, &id).sub(&tensor(&id, s)).scale_re(inv_sqrt2);

    let reorder = |op: Operator| -> Operator {
        let p = Operator::new(perm.clone(), t.clone()).unwrap();
        p.mul(&op).mul(&p.transpose())
    };

    let psi = reorder(sym(&s3));
    let phi = reorder(antisym(&s3));
    let eta = reorder(sym(&s1));
    let xi = reorder(antisym(&s1));

    (perm, vec![
        ("psi".to_string(), psi),
        ("phi".to_string(), phi),
        ("eta".to_string(), eta),
        ("xi".to_string(), xi),
    ])
}

/// The block involution-like unitary `theta = diag(u, u)` in the e-basis.
fn theta_single() -> Operator {
    let u = u_single();
    let mut m = Array2::<C64>::zeros((4, 4));
    for i in 0..2 {
        for j in 0..2 {
            m[[i, j]] = u.data()[[i, j]];
            m[[2 + i, 2 + j]] = u.data()[[i, j]];
        }
    }
    Operator::new(m, BasisTag::new("k-site")).unwrap()
}

fn build_doubled(spec: &LatticeSpec, h: &Operator) -> Result<ModelInstance> {
    let n = spec.n_sites();
    let tag = k_tag();
    let dim = 4usize.pow(n as u32);
    let (site_perm, site_ops) = doubled_site_ops();

    // Global reshuffle W : H (x) H -> K_Lambda. K-index digits e_x map to
    // the pair (w_x, w'_x); the tensor index is (sum w_x 2^{n-1-x}) * 2^n +
    // (sum w'_x 2^{n-1-x}).
    let pair_of: [usize; 4] = [0, 3, 1, 2];
    let mut w = Array2::<C64>::zeros((dim, dim));
    for g in 0..dim {
        let mut left = 0usize;
        let mut right = 0usize;
        for x in 0..n {
            let e = g / 4usize.pow((n - 1 - x) as u32) % 4;
            let p = pair_of[e];
            left = left * 2 + (p >> 1);
            right = right * 2 + (p & 1);
        }
        w[[g, left * (1 << n) + right]] = C64::new(1.0, 0.0);
    }
    let w = Operator::new(w, tag.clone())?;
    let _ = site_perm;

    // H_ext = H (x) 1 + 1 (x) H, carried to the K basis.
    let one = Operator::identity(h.dim(), h.tag().clone());
    let h_ext_tensor = kron(&[h, &one])?.retag(tag.clone()).add(&kron(&[&one, h])?.retag(tag.clone()));
    let h_ext = w.mul(&h_ext_tensor).mul(&w.transpose());

    let theta_factors: Vec<Operator> = (0..n).map(|_| theta_single()).collect();
    let theta_refs: Vec<&Operator> = theta_factors.iter().collect();
    let theta = kron(&theta_refs)?.retag(tag.clone());

    let mut ops: BTreeMap<String, Operator> = BTreeMap::new();
    for x in 0..n {
        for (name, op) in &site_ops {
            let embedded = site_op(op, x, n, &tag);
            let tilded = embedded.conjugated_by(&theta);
            ops.insert(format!("{name}_{x}"), embedded);
            ops.insert(format!("t{name}_{x}"), tilded);
        }
    }
    ops.insert("ham_tilde".to_string(), h_ext.conjugated_by(&theta));

    let mut transforms = BTreeMap::new();
    transforms.insert("Theta".to_string(), Transform::Unitary(theta));
    transforms.insert("W".to_string(), Transform::Unitary(w));

    let basis_labels = (0..dim)
        .map(|idx| {
            (0..n)
                .map(|x| format!("e{}", idx / 4usize.pow((n - 1 - x) as u32) % 4 + 1))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();

    let instance = ModelInstance {
        kind: ModelKind::Ising,
        spec: spec.clone(),
        hamiltonian: h_ext,
        basis_labels,
        ops,
        aux_ops: BTreeMap::new(),
        transforms,
        rp_ops: BTreeMap::new(),
        doubled: None,
        truncation: None,
    };
    instance.validate()?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::preserves_positivity;
    use crate::linalg::{expm_hermitian, hermitian_eig};
    use crate::tol::DEFAULT_TOL;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_site_zero_fields_gives_zero_hamiltonian() {
        let spec = LatticeSpec::new(1);
        let m = build(&spec).unwrap();
        assert_eq!(m.dim(), 2);
        assert!(m.hamiltonian.max_abs() < 1e-15);
    }

    #[test]
    fn rotation_conjugates_sigma3_to_sigma1() {
        let spec = LatticeSpec::chain(2, 0.7);
        let m = build(&spec).unwrap();
        let u = m.unitary("U").unwrap();
        for x in 0..2 {
            let s3 = m.op(&format!("sigma3_{x}")).unwrap();
            let s1 = m.op(&format!("sigma1_{x}")).unwrap();
            assert!(s3.conjugated_by(u).max_abs_diff(s1) < 1e-12);
            assert!(s1.conjugated_by(u).max_abs_diff(&s3.scale_re(-1.0)) < 1e-12);
        }
    }

    #[test]
    fn two_site_spectrum_and_transformed_form() {
        // J12 = J with no fields: H = -2J s3 s3, eigenvalues {-2J x2, +2J x2}.
        let j = 0.9;
        let mut spec = LatticeSpec::new(2);
        spec.set_coupling(0, 1, j);
        let m = build(&spec).unwrap();
        let s = hermitian_eig(&m.hamiltonian).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], -2.0 * j, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[1], -2.0 * j, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[2], 2.0 * j, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[3], 2.0 * j, epsilon = 1e-12);
    }

    #[test]
    fn rotated_hamiltonian_matches_closed_form() {
        // U* H U = -sum J s1 s1 - sum mu s1 + sum lambda s3.
        let mut spec = LatticeSpec::chain(3, 0.8);
        spec.mu = vec![0.1, 0.2, 0.3];
        spec.lambda = vec![0.4, 0.5, 0.6];
        let m = build(&spec).unwrap();
        let u = m.unitary("U").unwrap();
        let rotated = m.hamiltonian.conjugated_by(u);

        let mut expect = Operator::zeros(m.dim(), m.tag().clone());
        for x in 0..3 {
            for y in 0..3 {
                let j = spec.coupling(x, y);
                if j != 0.0 {
                    let xx = m
                        .op(&format!("sigma1_{x}"))
                        .unwrap()
                        .mul(m.op(&format!("sigma1_{y}")).unwrap());
                    expect = expect.sub(&xx.scale_re(j));
                }
            }
            expect = expect.sub(&m.op(&format!("sigma1_{x}")).unwrap().scale_re(spec.mu[x]));
            expect = expect.add(&m.op(&format!("sigma3_{x}")).unwrap().scale_re(spec.lambda[x]));
        }
        assert!(rotated.max_abs_diff(&expect) < 1e-10);
    }

    #[test]
    fn rotated_semigroup_preserves_and_improves_positivity() {
        // e^{-beta H^} has nonnegative entries for ferromagnetic couplings,
        // and strictly positive entries once lambda > 0 and mu > 0 couple
        // everything (brute-force 4x4 exponential).
        let mut spec = LatticeSpec::new(2);
        spec.set_coupling(0, 1, 1.0);
        spec.mu = vec![0.3, 0.4];
        spec.lambda = vec![0.5, 0.6];
        let m = build(&spec).unwrap();
        let u = m.unitary("U").unwrap();
        let rotated = m.hamiltonian.conjugated_by(u);
        let cone = m.cone();
        for &beta in &[0.5, 1.0, 2.0] {
            let e = expm_hermitian(&rotated, -beta).unwrap();
            let margin = preserves_positivity(&e, &cone, DEFAULT_TOL).unwrap();
            assert!(margin.value >= -1e-10, "beta={beta}: margin {}", margin.value);
            assert!(margin.value > 1e-12, "strict positivity expected, got {}", margin.value);
        }
    }

    #[test]
    fn doubled_site_matrices_match_block_forms() {
        // psi = sqrt2 diag(s3, 0), phi = sqrt2 diag(0, s3) in the e-basis.
        let (_, site_ops) = doubled_site_ops();
        let by_name: BTreeMap<&str, &Operator> =
            site_ops.iter().map(|(n, o)| (n.as_str(), o)).collect();
        let s = 2.0f64.sqrt();
        let psi = by_name["psi"];
        assert_abs_diff_eq!(psi.data()[[0, 0]].re, s, epsilon = 1e-14);
        assert_abs_diff_eq!(psi.data()[[1, 1]].re, -s, epsilon = 1e-14);
        assert!(psi.data()[[2, 2]].norm() < 1e-14 && psi.data()[[3, 3]].norm() < 1e-14);
        let phi = by_name["phi"];
        assert_abs_diff_eq!(phi.data()[[2, 2]].re, s, epsilon = 1e-14);
        assert_abs_diff_eq!(phi.data()[[3, 3]].re, -s, epsilon = 1e-14);
        // eta couples the diagonal-pair block to the off-diagonal one with
        // uniform weight 1/sqrt2 (apply the defining sum to each e-vector),
        // and has no elements inside either block.
        let eta = by_name["eta"];
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..2 {
            for j in 2..4 {
                assert_abs_diff_eq!(eta.data()[[i, j]].re, inv, epsilon = 1e-14);
                assert_abs_diff_eq!(eta.data()[[j, i]].re, inv, epsilon = 1e-14);
            }
        }
        assert!(eta.data()[[0, 1]].norm() < 1e-14 && eta.data()[[2, 3]].norm() < 1e-14);
        // xi has the sign-split form on the same off-diagonal blocks.
        let xi = by_name["xi"];
        assert_abs_diff_eq!(xi.data()[[0, 2]].re, -inv, epsilon = 1e-14);
        assert_abs_diff_eq!(xi.data()[[0, 3]].re, inv, epsilon = 1e-14);
        assert_abs_diff_eq!(xi.data()[[1, 2]].re, inv, epsilon = 1e-14);
        assert_abs_diff_eq!(xi.data()[[1, 3]].re, -inv, epsilon = 1e-14);
    }

    #[test]
    fn doubled_hamiltonian_matches_psi_phi_eta_expansion() {
        // H_ext = -sum J (psi psi + phi phi) - sqrt2 sum mu psi
        //         - sqrt2 sum lambda eta.
        let mut spec = LatticeSpec::new(2);
        spec.set_coupling(0, 1, 0.6);
        spec.mu = vec![0.2, 0.1];
        spec.lambda = vec![0.3, 0.7];
        let m = build(&spec).unwrap();
        let d = m.doubled().unwrap();
        let s = 2.0f64.sqrt();
        let mut expect = Operator::zeros(d.dim(), d.tag().clone());
        for x in 0..2 {
            for y in 0..2 {
                let j = spec.coupling(x, y);
                if j != 0.0 {
                    let pp = d.op(&format!("psi_{x}")).unwrap().mul(d.op(&format!("psi_{y}")).unwrap());
                    let ff = d.op(&format!("phi_{x}")).unwrap().mul(d.op(&format!("phi_{y}")).unwrap());
                    expect = expect.sub(&pp.add(&ff).scale_re(j));
                }
            }
            expect = expect.sub(&d.op(&format!("psi_{x}")).unwrap().scale_re(s * spec.mu[x]));
            expect = expect.sub(&d.op(&format!("eta_{x}")).unwrap().scale_re(s * spec.lambda[x]));
        }
        assert!(d.hamiltonian.max_abs_diff(&expect) < 1e-10);
    }
}
