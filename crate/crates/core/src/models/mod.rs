//! Builders for the four lattice model families.
//!
//! Each builder returns a [`ModelInstance`]: the Hamiltonian, structured
//! basis labels, a dictionary of named operators, the model's unitaries and
//! antilinear involutions, and (at small sizes) the doubled-space
//! construction the second-inequality proofs run on.
//!
//! Truncation policy: the rotor and Bose-Hubbard builders work in finite
//! windows cut by the total-quantum-number projection, the same projection
//! the positivity arguments are phrased through, so every cone claim holds
//! for the truncated Hamiltonian exactly rather than approximately. Site
//! counts are capped (Ising 8, rotor 3, Bose-Hubbard 3, Hubbard 4) because
//! the doubled spaces square the dimension.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::cones::SelfDualCone;
use crate::doubling::{Involution, RPOperator};
use crate::error::CoreError;
use crate::linalg::{kron, BasisTag, Operator, C64};
use crate::tol::DEFAULT_TOL;
use crate::Result;

pub mod bose_hubbard;
pub mod hubbard;
pub mod ising;
pub mod rotor;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModelKind {
    Ising,
    Rotor,
    BoseHubbard,
    Hubbard,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Ising => "ising",
            ModelKind::Rotor => "rotor",
            ModelKind::BoseHubbard => "bose_hubbard",
            ModelKind::Hubbard => "hubbard",
        };
        write!(f, "{s}")
    }
}

/// A finite labeled lattice with couplings, fields and (for the Hubbard
/// model) a bipartite edge set.
#[derive(Clone, Debug, Default)]
pub struct LatticeSpec {
    pub sites: Vec<String>,
    /// Symmetric coupling matrix (J_xy for Ising, t_xy elsewhere).
    pub couplings: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub u_site: Vec<f64>,
    /// Hubbard on-site repulsion U.
    pub u_hubbard: f64,
    /// Bose-Hubbard chemical potential.
    pub mu_chemical: f64,
    /// Hubbard edge set; hopping strength comes from `couplings`.
    pub edges: Vec<(usize, usize)>,
    /// Sublattice classes (0 = even, 1 = odd) for bipartite graphs.
    pub bipartition: Option<Vec<u8>>,
}

impl LatticeSpec {
    pub fn new(n: usize) -> Self {
        LatticeSpec {
            sites: (0..n).map(|i| format!("s{i}")).collect(),
            couplings: vec![vec![0.0; n]; n],
            mu: vec![0.0; n],
            lambda: vec![0.0; n],
            u_site: vec![1.0; n],
            u_hubbard: 0.0,
            mu_chemical: 0.0,
            edges: Vec::new(),
            bipartition: None,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Open chain with uniform nearest-neighbor coupling.
    pub fn chain(n: usize, coupling: f64) -> Self {
        let mut spec = LatticeSpec::new(n);
        for x in 0..n.saturating_sub(1) {
            spec.set_coupling(x, x + 1, coupling);
            spec.edges.push((x, x + 1));
        }
        spec.bipartition = Some((0..n).map(|x| (x % 2) as u8).collect());
        spec
    }

    /// Ring with uniform coupling (even n keeps the graph bipartite).
    pub fn ring(n: usize, coupling: f64) -> Self {
        let mut spec = LatticeSpec::chain(n, coupling);
        if n > 2 {
            spec.set_coupling(n - 1, 0, coupling);
            spec.edges.push((n - 1, 0));
        }
        spec
    }

    pub fn set_coupling(&mut self, x: usize, y: usize, value: f64) {
        self.couplings[x][y] = value;
        self.couplings[y][x] = value;
    }

    pub fn coupling(&self, x: usize, y: usize) -> f64 {
        self.couplings[x][y]
    }

    /// Structural requirements shared by every family: symmetric couplings
    /// with zero diagonal.
    pub fn check_symmetry(&self) -> Result<()> {
        let n = self.n_sites();
        if self.couplings.len() != n || self.couplings.iter().any(|row| row.len() != n) {
            return Err(CoreError::LatticeCondition("coupling matrix shape".into()));
        }
        for x in 0..n {
            if self.couplings[x][x] != 0.0 {
                return Err(CoreError::LatticeCondition(format!(
                    "coupling diagonal must vanish (site {x})"
                )));
            }
            for y in 0..n {
                if (self.couplings[x][y] - self.couplings[y][x]).abs() > 0.0 {
                    return Err(CoreError::LatticeCondition(format!(
                        "couplings must be symmetric ({x},{y})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Ferromagnetic sign condition on the couplings. Builders accept any
    /// signs so counterexample sweeps can run; the suites gate on this.
    pub fn couplings_nonnegative(&self) -> bool {
        self.couplings.iter().flatten().all(|&j| j >= 0.0)
    }

    /// Graph conditions for the Hubbard model: even site count, a declared
    /// bipartition every edge crosses, nonzero hopping on every edge.
    pub fn check_hubbard_graph(&self) -> Result<()> {
        self.check_symmetry()?;
        if self.n_sites() % 2 != 0 {
            return Err(CoreError::LatticeCondition("site count must be even".into()));
        }
        let classes = self
            .bipartition
            .as_ref()
            .ok_or_else(|| CoreError::LatticeCondition("bipartition missing".into()))?;
        if classes.len() != self.n_sites() {
            return Err(CoreError::LatticeCondition("bipartition length".into()));
        }
        for &(x, y) in &self.edges {
            if classes[x] == classes[y] {
                return Err(CoreError::LatticeCondition(format!(
                    "edge ({x},{y}) does not cross the bipartition"
                )));
            }
            if self.coupling(x, y) == 0.0 {
                return Err(CoreError::LatticeCondition(format!(
                    "edge ({x},{y}) must carry nonzero hopping"
                )));
            }
        }
        Ok(())
    }
}

/// A model transform: either a unitary matrix or an antilinear involution.
#[derive(Clone, Debug)]
pub enum Transform {
    Unitary(Operator),
    Antiunitary(Involution),
}

impl Transform {
    pub fn unitary(&self) -> Result<&Operator> {
        match self {
            Transform::Unitary(u) => Ok(u),
            Transform::Antiunitary(_) => Err(CoreError::MissingEntry("expected unitary".into())),
        }
    }

    pub fn involution(&self) -> Result<&Involution> {
        match self {
            Transform::Antiunitary(t) => Ok(t),
            Transform::Unitary(_) => Err(CoreError::MissingEntry("expected involution".into())),
        }
    }
}

/// A built lattice model: Hamiltonian, basis labels, operator dictionary
/// and model-specific transforms, plus the doubled construction when the
/// size allows materializing it.
pub struct ModelInstance {
    pub kind: ModelKind,
    pub spec: LatticeSpec,
    pub hamiltonian: Operator,
    pub basis_labels: Vec<String>,
    pub ops: BTreeMap<String, Operator>,
    /// Helper operators living on a *different* space than the Hamiltonian
    /// (e.g. single-copy factors of a doubled construction); exempt from
    /// the shared-basis invariant on `ops`.
    pub aux_ops: BTreeMap<String, Operator>,
    pub transforms: BTreeMap<String, Transform>,
    pub rp_ops: BTreeMap<String, RPOperator>,
    pub doubled: Option<Box<ModelInstance>>,
    /// Truncation parameter in use (n_max or total occupation cutoff).
    pub truncation: Option<usize>,
}

impl ModelInstance {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn tag(&self) -> &BasisTag {
        self.hamiltonian.tag()
    }

    pub fn op(&self, name: &str) -> Result<&Operator> {
        self.ops.get(name).ok_or_else(|| CoreError::MissingEntry(name.to_string()))
    }

    pub fn aux_op(&self, name: &str) -> Result<&Operator> {
        self.aux_ops.get(name).ok_or_else(|| CoreError::MissingEntry(name.to_string()))
    }

    pub fn unitary(&self, name: &str) -> Result<&Operator> {
        self.transforms
            .get(name)
            .ok_or_else(|| CoreError::MissingEntry(name.to_string()))?
            .unitary()
    }

    pub fn involution(&self, name: &str) -> Result<&Involution> {
        self.transforms
            .get(name)
            .ok_or_else(|| CoreError::MissingEntry(name.to_string()))?
            .involution()
    }

    pub fn rp(&self, name: &str) -> Result<&RPOperator> {
        self.rp_ops.get(name).ok_or_else(|| CoreError::MissingEntry(name.to_string()))
    }

    pub fn doubled(&self) -> Result<&ModelInstance> {
        self.doubled
            .as_deref()
            .ok_or_else(|| CoreError::MissingEntry("doubled instance (built for small lattices only)".into()))
    }

    /// Ordered product of named dictionary operators; the empty product is
    /// the identity.
    pub fn product(&self, names: &[&str]) -> Result<Operator> {
        let mut acc = Operator::identity(self.dim(), self.tag().clone());
        for name in names {
            acc = acc.mul(self.op(name)?);
        }
        Ok(acc)
    }

    /// The standard coordinate cone over this instance's distinguished
    /// basis.
    pub fn cone(&self) -> SelfDualCone {
        SelfDualCone::coordinate(self.dim(), self.tag().clone())
    }

    /// Builder post-conditions: Hermitian Hamiltonian, dictionary operators
    /// on the same space.
    pub fn validate(&self) -> Result<()> {
        if !self.hamiltonian.is_hermitian(DEFAULT_TOL) {
            return Err(CoreError::NotHermitian {
                asymmetry: self.hamiltonian.asymmetry(),
                allowed: DEFAULT_TOL * self.hamiltonian.max_abs(),
            });
        }
        if self.basis_labels.len() != self.dim() {
            return Err(CoreError::DimensionMismatch(self.basis_labels.len(), self.dim()));
        }
        for (name, op) in &self.ops {
            if op.dim() != self.dim() || op.tag() != self.tag() {
                return Err(CoreError::BasisMismatch(
                    format!("{name}@{}", op.tag()),
                    self.tag().to_string(),
                ));
            }
        }
        Ok(())
    }
}

/// Embed a single-site operator at `site` of an `n_sites` tensor product.
pub(crate) fn site_op(
    single: &Operator,
    site: usize,
    n_sites: usize,
    tag: &BasisTag,
) -> Operator {
    let id = Operator::identity(single.dim(), single.tag().clone());
    let factors: Vec<&Operator> =
        (0..n_sites).map(|x| if x == site { single } else { &id }).collect();
    kron(&factors).expect("nonempty").retag(tag.clone())
}

/// Jordan-Wigner annihilators for `n_modes` fermionic modes.
///
/// Basis vectors are occupation bitstrings, mode 0 varying slowest, built
/// by applying creation operators in ascending mode order to the vacuum;
/// `c_k` then carries the parity string over modes before `k`.
pub(crate) fn fermion_annihilators(n_modes: usize, tag: &BasisTag) -> Vec<Operator> {
    let local = BasisTag::new("mode");
    let a = Operator::from_real(ndarray::array![[0.0, 1.0], [0.0, 0.0]], local.clone()).unwrap();
    let z = Operator::from_real(ndarray::array![[1.0, 0.0], [0.0, -1.0]], local.clone()).unwrap();
    let id = Operator::identity(2, local);
    (0..n_modes)
        .map(|k| {
            let factors: Vec<&Operator> = (0..n_modes)
                .map(|j| {
                    if j < k {
                        &z
                    } else if j == k {
                        &a
                    } else {
                        &id
                    }
                })
                .collect();
            kron(&factors).expect("nonempty").retag(tag.clone())
        })
        .collect()
}

/// Bosonic occupation space over `n_modes` modes with the total-number
/// cutoff `sum N <= cutoff` (the P_ell window), in graded lexicographic
/// order.
pub(crate) struct BosonSpace {
    pub occupations: Vec<Vec<u32>>,
    pub cutoff: u32,
    pub tag: BasisTag,
}

impl BosonSpace {
    pub fn new(n_modes: usize, cutoff: u32, tag: BasisTag) -> Self {
        let mut occupations = Vec::new();
        let mut current = vec![0u32; n_modes];
        for total in 0..=cutoff {
            enumerate_totals(&mut occupations, &mut current, 0, total);
        }
        BosonSpace { occupations, cutoff, tag }
    }

    pub fn dim(&self) -> usize {
        self.occupations.len()
    }

    fn index_of(&self, occ: &[u32]) -> Option<usize> {
        // Graded lexicographic order allows a linear scan at desk scale;
        // dimensions stay in the hundreds.
        self.occupations.iter().position(|o| o == occ)
    }

    /// Truncated creation matrix for one mode: entries sqrt(N+1), rows that
    /// leave the window dropped.
    pub fn creation(&self, mode: usize) -> Operator {
        let d = self.dim();
        let mut m = Array2::<C64>::zeros((d, d));
        for (col, occ) in self.occupations.iter().enumerate() {
            let total: u32 = occ.iter().sum();
            if total + 1 > self.cutoff {
                continue;
            }
            let mut up = occ.clone();
            up[mode] += 1;
            if let Some(row) = self.index_of(&up) {
                m[[row, col]] = C64::new(((occ[mode] + 1) as f64).sqrt(), 0.0);
            }
        }
        Operator::new(m, self.tag.clone()).expect("square")
    }

    pub fn annihilation(&self, mode: usize) -> Operator {
        self.creation(mode).adjoint()
    }

    pub fn number(&self, mode: usize) -> Operator {
        let d = self.dim();
        let mut m = Array2::<C64>::zeros((d, d));
        for (i, occ) in self.occupations.iter().enumerate() {
            m[[i, i]] = C64::new(occ[mode] as f64, 0.0);
        }
        Operator::new(m, self.tag.clone()).expect("square")
    }

    pub fn labels(&self) -> Vec<String> {
        self.occupations
            .iter()
            .map(|occ| {
                let parts: Vec<String> = occ.iter().map(|n| n.to_string()).collect();
                format!("N=({})", parts.join(","))
            })
            .collect()
    }
}

fn enumerate_totals(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, mode: usize, remaining: u32) {
    if mode + 1 == current.len() {
        current[mode] = remaining;
        out.push(current.clone());
        current[mode] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        current[mode] = k;
        enumerate_totals(out, current, mode + 1, remaining - k);
    }
    current[mode] = 0;
}
