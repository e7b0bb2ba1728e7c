//! Quantum rotor model builder, in the Fourier (number) picture.
//!
//! `H^ = sum_x U_x/2 n^_x^2 + (1/2) sum_{x,y} (-t_xy)(T^_x T^_y* + T^_x* T^_y)`
//! on the truncated number basis `{n in Z^Lambda : |n_x| <= n_max}`. The
//! shift `T^_x e_n = e_{n+delta_x}` drops transitions that leave the
//! window, so the truncated operator is not unitary; all suites are stated
//! for the truncated Hamiltonian, which is the object the cone arguments
//! apply to (the hopping has nonnegative matrix elements and the charging
//! term is diagonal, so positivity survives the window exactly).
//!
//! The half-angle change of coordinates behind the second inequality has no
//! faithful truncated unitary, so the phi-picture doubled model is built
//! independently on its own window: `H_ext = sum U_x/4 (L(nu^2) + R(nu^2))
//! - 2 sum t_xy L(cos(phi_x - phi_y)) R(cos(phi_x - phi_y))`, with the
//! observable certificates `2 L(cos phi x) R(cos phi_x)`,
//! `2 L(sin phi_x) R(sin phi_x)` and `L(nu_x) R(nu_x)` attached.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::doubling::{left_mult, right_mult, Involution, RPOperator};
use crate::error::CoreError;
use crate::linalg::{BasisTag, Operator, C64};
use crate::Result;

use super::{site_op, LatticeSpec, ModelInstance, ModelKind, Transform};

pub const MAX_SITES: usize = 3;
pub const MAX_N_MAX: usize = 4;
/// The doubled phi-model materializes superoperators of size `dim^2`, so it
/// is only attached while the single-copy dimension stays this small.
const MAX_DOUBLED_DIM: usize = 40;

fn number_tag() -> BasisTag {
    BasisTag::new("rotor-number")
}

fn phi_tag() -> BasisTag {
    BasisTag::new("rotor-phi")
}

/// Single-site truncated shift: `<n+1|T|n> = 1`, top of the window mapped
/// to zero.
fn shift_single(n_max: usize) -> Operator {
    let m = 2 * n_max + 1;
    let mut t = Array2::<C64>::zeros((m, m));
    for k in 0..m - 1 {
        t[[k + 1, k]] = C64::new(1.0, 0.0);
    }
    Operator::new(t, BasisTag::new("rotor-site")).unwrap()
}

fn number_single(n_max: usize) -> Operator {
    let m = 2 * n_max + 1;
    let mut d = Array2::<C64>::zeros((m, m));
    for k in 0..m {
        d[[k, k]] = C64::new(k as f64 - n_max as f64, 0.0);
    }
    Operator::new(d, BasisTag::new("rotor-site")).unwrap()
}

pub fn build(spec: &LatticeSpec, n_max: usize) -> Result<ModelInstance> {
    spec.check_symmetry()?;
    let n = spec.n_sites();
    if n == 0 || n > MAX_SITES {
        return Err(CoreError::LatticeCondition(format!(
            "rotor supports 1..={MAX_SITES} sites, got {n}"
        )));
    }
    if n_max < 1 || n_max > MAX_N_MAX {
        return Err(CoreError::LatticeCondition(format!(
            "rotor window needs 1 <= n_max <= {MAX_N_MAX}, got {n_max}"
        )));
    }
    let tag = number_tag();
    let m = 2 * n_max + 1;
    let dim = m.pow(n as u32);

    let mut ops: BTreeMap<String, Operator> = BTreeMap::new();
    for x in 0..n {
        let t = site_op(&shift_single(n_max), x, n, &tag);
        ops.insert(format!("Tdag_{x}"), t.adjoint());
        ops.insert(format!("C_{x}"), t.add(&t.adjoint()).scale_re(0.5));
        ops.insert(format!("T_{x}"), t);
        ops.insert(format!("n_{x}"), site_op(&number_single(n_max), x, n, &tag));
    }

    let mut h = Operator::zeros(dim, tag.clone());
    for x in 0..n {
        let nx = &ops[&format!("n_{x}")];
        h = h.add(&nx.mul(nx).scale_re(spec.u_site[x] / 2.0));
        for y in 0..n {
            let t = spec.coupling(x, y);
            if t != 0.0 {
                let hop = ops[&format!("T_{x}")]
                    .mul(&ops[&format!("Tdag_{y}")])
                    .add(&ops[&format!("Tdag_{x}")].mul(&ops[&format!("T_{y}")]));
                h = h.add(&hop.scale_re(-t / 2.0));
            }
        }
    }

    let basis_labels = (0..dim)
        .map(|idx| {
            let digits: Vec<String> = (0..n)
                .map(|x| {
                    let k = idx / m.pow((n - 1 - x) as u32) % m;
                    (k as i64 - n_max as i64).to_string()
                })
                .collect();
            format!("n=({})", digits.join(","))
        })
        .collect();

    let doubled =
        if dim <= MAX_DOUBLED_DIM { Some(Box::new(build_phi_doubled(spec, n_max)?)) } else { None };

    let instance = ModelInstance {
        kind: ModelKind::Rotor,
        spec: spec.clone(),
        hamiltonian: h,
        basis_labels,
        ops,
        aux_ops: BTreeMap::new(),
        transforms: BTreeMap::new(),
        rp_ops: BTreeMap::new(),
        doubled,
        truncation: Some(n_max),
    };
    instance.validate()?;
    Ok(instance)
}

/// `T^A = prod_x T_x^{m_x}` with negative exponents meaning adjoints.
pub fn t_monomial(m: &ModelInstance, exponents: &[i64]) -> Result<Operator> {
    let mut acc = Operator::identity(m.dim(), m.tag().clone());
    for (x, &e) in exponents.iter().enumerate() {
        let name = if e >= 0 { format!("T_{x}") } else { format!("Tdag_{x}") };
        let op = m.op(&name)?;
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(op);
        }
    }
    Ok(acc)
}

/// `C^A = prod_x C_x^{m_x}` for nonnegative exponents.
pub fn c_monomial(m: &ModelInstance, exponents: &[u32]) -> Result<Operator> {
    let mut acc = Operator::identity(m.dim(), m.tag().clone());
    for (x, &e) in exponents.iter().enumerate() {
        let op = m.op(&format!("C_{x}"))?;
        for _ in 0..e {
            acc = acc.mul(op);
        }
    }
    Ok(acc)
}

/// The phi-picture doubled model on its own truncated window.
fn build_phi_doubled(spec: &LatticeSpec, n_max: usize) -> Result<ModelInstance> {
    let n = spec.n_sites();
    let tag = phi_tag();
    let m = 2 * n_max + 1;
    let dim = m.pow(n as u32);

    // Position-space conjugation flips the number index per site.
    let mut flip = Array2::<f64>::zeros((m, m));
    for k in 0..m {
        flip[[k, m - 1 - k]] = 1.0;
    }
    let flip_op = Operator::from_real(flip, BasisTag::new("rotor-site")).unwrap();
    let mut full_flip = Operator::identity(1, tag.clone());
    for _ in 0..n {
        full_flip = crate::linalg::kron(&[&full_flip, &flip_op])?.retag(tag.clone());
    }
    let theta = Involution::new(full_flip.data().mapv(|x| x.re), tag.clone())?;

    let mut aux: BTreeMap<String, Operator> = BTreeMap::new();
    for x in 0..n {
        let t = site_op(&shift_single(n_max), x, n, &tag);
        let nu = site_op(&number_single(n_max), x, n, &tag);
        aux.insert(format!("cos_{x}"), t.add(&t.adjoint()).scale_re(0.5));
        aux.insert(
            format!("sin_{x}"),
            t.sub(&t.adjoint()).scale(C64::new(0.0, -0.5)),
        );
        aux.insert(format!("nu_{x}"), nu);
        aux.insert(format!("T_{x}"), t);
    }
    for x in 0..n {
        for y in x + 1..n {
            // cos(phi_x - phi_y) = (T_x T_y* + T_x* T_y)/2 in the Fourier
            // picture.
            let hop = aux[&format!("T_{x}")]
                .mul(&aux[&format!("T_{y}")].adjoint())
                .add(&aux[&format!("T_{x}")].adjoint().mul(&aux[&format!("T_{y}")]))
                .scale_re(0.5);
            aux.insert(format!("cosdiff_{x}_{y}"), hop);
        }
    }

    // Free part A with exp(-beta H0) = L(e^{-beta A}) R(e^{-beta A}).
    let mut lr_free = Operator::zeros(dim, tag.clone());
    for x in 0..n {
        let nu = &aux[&format!("nu_{x}")];
        lr_free = lr_free.add(&nu.mul(nu).scale_re(spec.u_site[x] / 4.0));
    }
    aux.insert("lr_free".to_string(), lr_free.clone());

    // Certified interaction V = 2 sum_{x,y} t_xy L(cos diff) R(cos diff),
    // summed over ordered pairs.
    let mut rp_ops: BTreeMap<String, RPOperator> = BTreeMap::new();
    let mut interaction = RPOperator::zero(dim, tag.clone());
    for x in 0..n {
        for y in x + 1..n {
            let t = spec.coupling(x, y);
            if t != 0.0 {
                let c = &aux[&format!("cosdiff_{x}_{y}")];
                // Hostile (negative) couplings lose the certificate but the
                // matrix form stays available for counterexample sweeps.
                interaction = interaction.add(&RPOperator::term(4.0 * t, c, &c.adjoint())?);
            }
        }
    }
    for x in 0..n {
        rp_ops.insert(
            format!("obs_cos_{x}"),
            RPOperator::certified_term(2.0, &aux[&format!("cos_{x}")])?,
        );
        rp_ops.insert(
            format!("obs_sin_{x}"),
            RPOperator::certified_term(2.0, &aux[&format!("sin_{x}")])?,
        );
        rp_ops.insert(
            format!("num_{x}"),
            RPOperator::certified_term(1.0, &aux[&format!("nu_{x}")])?,
        );
    }

    // Materialized H_ext = L(A) + R(A) - V on the vectorized space.
    let h_ext = left_mult(&lr_free)
        .add(&right_mult(&lr_free, &theta)?)
        .sub(&interaction.to_matrix());
    rp_ops.insert("V".to_string(), interaction);

    let basis_labels = (0..dim * dim).map(|k| format!("pair{k}")).collect();

    let mut transforms = BTreeMap::new();
    transforms.insert("theta".to_string(), Transform::Antiunitary(theta));

    let instance = ModelInstance {
        kind: ModelKind::Rotor,
        spec: spec.clone(),
        hamiltonian: h_ext,
        basis_labels,
        ops: BTreeMap::new(),
        aux_ops: aux,
        transforms,
        rp_ops,
        doubled: None,
        truncation: Some(n_max),
    };
    instance.validate()?;
    Ok(instance)
}
