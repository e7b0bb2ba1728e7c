//! Bose-Hubbard model builder on the total-occupation-truncated Fock space.
//!
//! `H = sum_{x,y} (-t_xy) a_x* a_y + sum_x U_x n_x(n_x - 1)
//!      - sum_x lambda_x (a_x* + a_x) - mu N_b`
//! on occupation tuples with `sum_x N_x <= cutoff`, which is the
//! finite-projection window the positivity arguments run through: hoppings
//! and ladder insertions have nonnegative matrix elements and the
//! interaction is diagonal, so every entrywise claim holds for the
//! truncated operator exactly.
//!
//! The doubled construction lives on the symmetrized pair modes
//! `xi_x = (a_x (x) 1 + 1 (x) a_x)/sqrt2`,
//! `eta_x = -(a_x (x) 1 - 1 (x) a_x)/sqrt2`. Since the total xi/eta count
//! equals the total occupation across both copies, the joint window
//! `|M| + |N| <= cutoff` makes the doubled space itself a truncated Fock
//! space over `2 |Lambda|` modes, and the builders below work directly in
//! that picture. The sign-flip unitary `exp(-i pi/2 sum eta* eta)` turns
//! the pair-creation part of the interaction attractive.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::error::CoreError;
use crate::linalg::{BasisTag, Operator, C64};
use crate::Result;

use super::{BosonSpace, LatticeSpec, ModelInstance, ModelKind, Transform};

pub const MAX_SITES: usize = 3;
pub const MAX_CUTOFF: usize = 6;
const MAX_DOUBLED_DIM: usize = 600;

fn fock_tag() -> BasisTag {
    BasisTag::new("fock-occupation")
}

fn xieta_tag() -> BasisTag {
    BasisTag::new("bh-xieta")
}

pub fn build(spec: &LatticeSpec, total_n_max: usize) -> Result<ModelInstance> {
    spec.check_symmetry()?;
    let n = spec.n_sites();
    if n == 0 || n > MAX_SITES {
        return Err(CoreError::LatticeCondition(format!(
            "bose-hubbard supports 1..={MAX_SITES} sites, got {n}"
        )));
    }
    if total_n_max < 1 || total_n_max > MAX_CUTOFF {
        return Err(CoreError::LatticeCondition(format!(
            "total occupation cutoff must be in 1..={MAX_CUTOFF}, got {total_n_max}"
        )));
    }
    let space = BosonSpace::new(n, total_n_max as u32, fock_tag());
    let dim = space.dim();
    let tag = space.tag.clone();

    let mut ops: BTreeMap<String, Operator> = BTreeMap::new();
    let mut total_number = Operator::zeros(dim, tag.clone());
    for x in 0..n {
        let num = space.number(x);
        total_number = total_number.add(&num);
        ops.insert(format!("a_{x}"), space.annihilation(x));
        ops.insert(format!("adag_{x}"), space.creation(x));
        ops.insert(format!("n_{x}"), num);
    }
    ops.insert("Nb".to_string(), total_number.clone());

    let mut h = Operator::zeros(dim, tag.clone());
    for x in 0..n {
        for y in 0..n {
            let t = spec.coupling(x, y);
            if t != 0.0 {
                h = h.sub(&ops[&format!("adag_{x}")].mul(&ops[&format!("a_{y}")]).scale_re(t));
            }
        }
        let nx = &ops[&format!("n_{x}")];
        let one = Operator::identity(dim, tag.clone());
        h = h.add(&nx.mul(&nx.sub(&one)).scale_re(spec.u_site[x]));
        if spec.lambda[x] != 0.0 {
            let field = ops[&format!("adag_{x}")].add(&ops[&format!("a_{x}")]);
            h = h.sub(&field.scale_re(spec.lambda[x]));
        }
    }
    h = h.sub(&total_number.scale_re(spec.mu_chemical));

    let doubled_space = BosonSpace::new(2 * n, total_n_max as u32, xieta_tag());
    let doubled = if doubled_space.dim() <= MAX_DOUBLED_DIM {
        Some(Box::new(build_doubled(spec, doubled_space)?))
    } else {
        None
    };

    let instance = ModelInstance {
        kind: ModelKind::BoseHubbard,
        spec: spec.clone(),
        hamiltonian: h,
        basis_labels: space.labels(),
        ops,
        aux_ops: BTreeMap::new(),
        transforms: BTreeMap::new(),
        rp_ops: BTreeMap::new(),
        doubled,
        truncation: Some(total_n_max),
    };
    instance.validate()?;
    Ok(instance)
}

/// Ladder monomial `I(m; #) = prod_x (a_x^{#_x})^{m_x}`; `daggered[x]`
/// selects creation.
pub fn ladder_monomial(m: &ModelInstance, powers: &[u32], daggered: &[bool]) -> Result<Operator> {
    let mut acc = Operator::identity(m.dim(), m.tag().clone());
    for (x, (&p, &dag)) in powers.iter().zip(daggered.iter()).enumerate() {
        let name = if dag { format!("adag_{x}") } else { format!("a_{x}") };
        let op = m.op(&name)?;
        for _ in 0..p {
            acc = acc.mul(op);
        }
    }
    Ok(acc)
}

/// The doubled model in the xi/eta occupation picture, on the joint window
/// `|M| + |N| <= cutoff`.
///
/// The instance Hamiltonian is the *rotated* `H^_ext = -(T + U_o) + U_d`,
/// whose semigroup has nonnegative matrix elements; the unrotated
/// `H_ext = -T + U_d + U_o` is kept in `ops["Hext_raw"]`, and the rotation
/// `U = exp(-i pi/2 sum_x eta_x* eta_x)` in `transforms["U"]`.
fn build_doubled(spec: &LatticeSpec, space: BosonSpace) -> Result<ModelInstance> {
    let n = spec.n_sites();
    let dim = space.dim();
    let tag = space.tag.clone();

    let mut ops: BTreeMap<String, Operator> = BTreeMap::new();
    for x in 0..n {
        let xi_dag = space.creation(x);
        let eta_dag = space.creation(n + x);
        ops.insert(format!("xi_{x}"), xi_dag.adjoint());
        ops.insert(format!("xidag_{x}"), xi_dag);
        ops.insert(format!("eta_{x}"), eta_dag.adjoint());
        ops.insert(format!("etadag_{x}"), eta_dag);
    }

    let mut t_op = Operator::zeros(dim, tag.clone());
    for x in 0..n {
        for y in 0..n {
            let t = spec.coupling(x, y);
            if t != 0.0 {
                let hop = ops[&format!("xidag_{x}")]
                    .mul(&ops[&format!("xi_{y}")])
                    .add(&ops[&format!("etadag_{x}")].mul(&ops[&format!("eta_{y}")]));
                t_op = t_op.add(&hop.scale_re(t));
            }
        }
        if spec.lambda[x] != 0.0 {
            let field = ops[&format!("xi_{x}")].add(&ops[&format!("xidag_{x}")]);
            t_op = t_op.add(&field.scale_re(2.0f64.sqrt() * spec.lambda[x]));
        }
    }

    let mut u_d = Operator::zeros(dim, tag.clone());
    let mut u_o = Operator::zeros(dim, tag.clone());
    for x in 0..n {
        let nxi = ops[&format!("xidag_{x}")].mul(&ops[&format!("xi_{x}")]);
        let neta = ops[&format!("etadag_{x}")].mul(&ops[&format!("eta_{x}")]);
        let ux = spec.u_site[x];
        let quartic = nxi
            .mul(&nxi)
            .add(&nxi.mul(&neta).scale_re(4.0))
            .add(&neta.mul(&neta));
        u_d = u_d.add(&quartic.scale_re(ux / 2.0));
        u_d = u_d.sub(&nxi.add(&neta).scale_re(ux / 2.0 + spec.mu_chemical));
        let pair = ops[&format!("xidag_{x}")]
            .mul(&ops[&format!("xidag_{x}")])
            .mul(&ops[&format!("eta_{x}")])
            .mul(&ops[&format!("eta_{x}")]);
        u_o = u_o.add(&pair.add(&pair.adjoint()).scale_re(ux / 2.0));
    }

    // exp(-i pi/2 K) on eta-count K is diagonal with entries (-i)^K.
    let mut u_mat = Array2::<C64>::zeros((dim, dim));
    for (k, occ) in space.occupations.iter().enumerate() {
        let eta_count: u32 = occ[n..].iter().sum();
        let phase = match eta_count % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, -1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, 1.0),
        };
        u_mat[[k, k]] = phase;
    }
    let u_rot = Operator::new(u_mat, tag.clone())?;

    let h_ext_raw = t_op.scale_re(-1.0).add(&u_d).add(&u_o);
    let h_ext_hat = t_op.add(&u_o).scale_re(-1.0).add(&u_d);

    ops.insert("T".to_string(), t_op);
    ops.insert("Ud".to_string(), u_d);
    ops.insert("Uo".to_string(), u_o);
    ops.insert("Hext_raw".to_string(), h_ext_raw);

    let mut transforms = BTreeMap::new();
    transforms.insert("U".to_string(), Transform::Unitary(u_rot));

    let basis_labels = space
        .occupations
        .iter()
        .map(|occ| {
            let m: Vec<String> = occ[..n].iter().map(|v| v.to_string()).collect();
            let k: Vec<String> = occ[n..].iter().map(|v| v.to_string()).collect();
            format!("M=({}),N=({})", m.join(","), k.join(","))
        })
        .collect();

    let instance = ModelInstance {
        kind: ModelKind::BoseHubbard,
        spec: spec.clone(),
        hamiltonian: h_ext_hat,
        basis_labels,
        ops,
        aux_ops: BTreeMap::new(),
        transforms,
        rp_ops: BTreeMap::new(),
        doubled: None,
        truncation: Some(space.cutoff as usize),
    };
    instance.validate()?;
    Ok(instance)
}

/// `alpha^_{eps,x}^{#}` in the rotated doubled picture: `sqrt2 xi_x^{#}`
/// for `eps = +1`, `sqrt2 eta_x^{#}` for `eps = -1`.
pub fn alpha_hat(doubled: &ModelInstance, eps: i8, x: usize, dagger: bool) -> Result<Operator> {
    let base = match (eps, dagger) {
        (1, false) => doubled.op(&format!("xi_{x}"))?,
        (1, true) => doubled.op(&format!("xidag_{x}"))?,
        (-1, false) => doubled.op(&format!("eta_{x}"))?,
        (-1, true) => doubled.op(&format!("etadag_{x}"))?,
        _ => return Err(CoreError::MissingEntry(format!("alpha_hat eps {eps}"))),
    };
    Ok(base.scale_re(2.0f64.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::preserves_positivity;
    use crate::linalg::{expm_hermitian, kron};
    use crate::tol::DEFAULT_TOL;
    use approx::assert_abs_diff_eq;
    use ndarray::Array1;

    fn two_site_spec() -> LatticeSpec {
        let mut spec = LatticeSpec::new(2);
        spec.set_coupling(0, 1, 0.7);
        spec.u_site = vec![1.0, 1.2];
        spec.lambda = vec![0.5, 0.3];
        spec.mu_chemical = 0.2;
        spec
    }

    #[test]
    fn vacuum_annihilation_and_ladder_matrix() {
        let spec = LatticeSpec::new(1);
        let m = build(&spec, 2).unwrap();
        let a = m.op("a_0").unwrap();
        let mut vac = Array1::<C64>::zeros(m.dim());
        vac[0] = C64::new(1.0, 0.0);
        assert!(a.apply(&vac).iter().map(|x| x.norm()).sum::<f64>() < 1e-15);
        let adag = m.op("adag_0").unwrap();
        // Occupation order (0, 1, 2): a* = [[0,0,0],[1,0,0],[0,sqrt2,0]].
        assert_abs_diff_eq!(adag.data()[[1, 0]].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(adag.data()[[2, 1]].re, 2.0f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn creation_matrix_elements_are_nonnegative() {
        let m = build(&two_site_spec(), 4).unwrap();
        let cone = m.cone();
        for name in ["a_0", "adag_0", "a_1", "adag_1"] {
            let margin = preserves_positivity(m.op(name).unwrap(), &cone, DEFAULT_TOL).unwrap();
            assert!(margin.value >= 0.0, "{name} margin {}", margin.value);
        }
    }

    #[test]
    fn semigroup_preserves_positivity_under_truncation() {
        let m = build(&two_site_spec(), 4).unwrap();
        let cone = m.cone();
        for &beta in &[0.5, 1.0, 2.0] {
            let e = expm_hermitian(&m.hamiltonian, -beta).unwrap();
            let margin = preserves_positivity(&e, &cone, DEFAULT_TOL).unwrap();
            assert!(margin.value >= -1e-10, "beta={beta}: {}", margin.value);
        }
    }

    #[test]
    fn rotation_flips_pair_term_and_semigroup_is_entrywise_nonnegative() {
        let m = build(&two_site_spec(), 4).unwrap();
        let d = m.doubled().unwrap();
        let u = d.unitary("U").unwrap();
        let uo = d.op("Uo").unwrap();
        // U* Uo U = -Uo.
        assert!(uo.conjugated_by(u).max_abs_diff(&uo.scale_re(-1.0)) < 1e-10);
        // The rotated Hamiltonian is U* Hext_raw U.
        let raw = d.op("Hext_raw").unwrap();
        assert!(raw.conjugated_by(u).max_abs_diff(&d.hamiltonian) < 1e-10);
        // Its semigroup keeps the coordinate cone.
        let cone = d.cone();
        let e = expm_hermitian(&d.hamiltonian, -1.0).unwrap();
        let margin = preserves_positivity(&e, &cone, DEFAULT_TOL).unwrap();
        assert!(margin.value >= -1e-10, "{}", margin.value);
    }

    #[test]
    fn xieta_window_matches_product_space_compression() {
        // The joint window |M|+|N| <= cutoff and the product-truncated
        // H (x) 1 + 1 (x) H agree on all windowed matrix elements: the
        // pair-basis vectors built from truncated product-space xi*, eta*
        // strings reproduce Hext_raw entry by entry.
        let spec = two_site_spec();
        let cutoff = 3usize;
        let m = build(&spec, cutoff).unwrap();
        let d = m.doubled().unwrap();
        let single = BosonSpace::new(2, cutoff as u32, BasisTag::new("fock-occupation"));
        let sdim = single.dim();
        let pair_tag = BasisTag::new("bh-pair");
        let one = Operator::identity(sdim, single.tag.clone());

        let lift_l = |op: &Operator| kron(&[op, &one]).unwrap().retag(pair_tag.clone());
        let lift_r = |op: &Operator| kron(&[&one, op]).unwrap().retag(pair_tag.clone());

        // Product-space H_ext for the same single-copy Hamiltonian.
        let h_single = m.hamiltonian.clone();
        let h_ext = lift_l(&h_single).add(&lift_r(&h_single));

        let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
        let mut xi_dag = Vec::new();
        let mut eta_dag = Vec::new();
        for x in 0..2 {
            let ad = single.creation(x);
            xi_dag.push(lift_l(&ad).add(&lift_r(&ad)).scale_re(sqrt_half));
            eta_dag.push(lift_l(&ad).sub(&lift_r(&ad)).scale_re(-sqrt_half));
        }

        // Build |M, N>> vectors in the product space.
        let mut window_vectors = Vec::new();
        for occ in &d.basis_labels {
            let _ = occ;
        }
        let dspace = BosonSpace::new(4, cutoff as u32, BasisTag::new("bh-xieta"));
        for occ in &dspace.occupations {
            let mut v = Array1::<C64>::zeros(sdim * sdim);
            v[0] = C64::new(1.0, 0.0); // vacuum (x) vacuum is index 0
            let mut norm = 1.0f64;
            for x in 0..2 {
                for k in 0..occ[x] {
                    v = xi_dag[x].apply(&v);
                    norm *= (k + 1) as f64;
                }
            }
            for x in 0..2 {
                for k in 0..occ[2 + x] {
                    v = eta_dag[x].apply(&v);
                    norm *= (k + 1) as f64;
                }
            }
            window_vectors.push(v.mapv(|c| c / C64::new(norm.sqrt(), 0.0)));
        }
        // Orthonormality of the windowed pair basis.
        for (i, vi) in window_vectors.iter().enumerate() {
            for (j, vj) in window_vectors.iter().enumerate() {
                let ip: C64 = vi.iter().zip(vj.iter()).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::new(expect, 0.0)).norm() < 1e-10, "gram ({i},{j}) = {ip}");
            }
        }
        // Windowed compression of the product H_ext equals Hext_raw.
        let raw = d.op("Hext_raw").unwrap();
        for (i, vi) in window_vectors.iter().enumerate() {
            let hv: Vec<Array1<C64>> = vec![h_ext.apply(vi)];
            for (j, vj) in window_vectors.iter().enumerate() {
                let elem: C64 = vj.iter().zip(hv[0].iter()).map(|(a, b)| a.conj() * b).sum();
                let expect = raw.data()[[j, i]];
                assert!(
                    (elem - expect).norm() < 1e-9 * (1.0 + expect.norm()),
                    "element ({j},{i}): product-space {elem} vs xieta {expect}"
                );
            }
        }
    }

    #[test]
    fn alpha_hat_has_nonnegative_elements() {
        let m = build(&two_site_spec(), 3).unwrap();
        let d = m.doubled().unwrap();
        let cone = d.cone();
        for eps in [1i8, -1] {
            for dag in [false, true] {
                let a = alpha_hat(d, eps, 0, dag).unwrap();
                let margin = preserves_positivity(&a, &cone, DEFAULT_TOL).unwrap();
                assert!(margin.value >= 0.0, "eps={eps} dag={dag}: {}", margin.value);
            }
        }
    }
}
