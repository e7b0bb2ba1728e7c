//! Thermal, time-ordered, Duhamel, doubled and ground-state expectation
//! values computed from spectral data.
//!
//! Every trace is evaluated in the eigenbasis with the max-eigenvalue shift
//! `e^{-beta(lambda - lambda_0)}`, so beta up to ~20 with spectra of width
//! ~50 stays far from overflow. `beta = infinity` replaces the Gibbs weight
//! by the ground projector, with propagators `e^{-(s_{j+1}-s_j)(H - E)}`
//! between chain operators.

use ndarray::{Array1, Array2};

use crate::error::CoreError;
use crate::linalg::{hermitian_eig, Operator, Spectral, C64};
use crate::Result;

/// Inverse temperature: finite (including 0, the uniform state) or the
/// ground-state limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn finite(self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(b),
            Beta::Infinite => None,
        }
    }
}

impl std::fmt::Display for Beta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => write!(f, "inf"),
        }
    }
}

/// An operator placed at an imaginary time `s` inside an ordered chain.
#[derive(Clone, Copy)]
pub struct TimedOp<'a> {
    pub op: &'a Operator,
    pub s: f64,
}

/// A thermal state of a Hamiltonian, carrying its spectral data and the
/// shift-stable log partition function.
pub struct ThermalState {
    pub spectral: Spectral,
    pub beta: Beta,
    /// `log Tr[e^{-beta H}]` for finite beta; `-infinity` at beta = infinity
    /// (use the ground projector instead).
    pub log_z: f64,
}

impl ThermalState {
    pub fn new(h: &Operator, beta: Beta) -> Result<Self> {
        let spectral = hermitian_eig(h)?;
        Ok(ThermalState::from_spectral(spectral, beta)?)
    }

    pub fn from_spectral(spectral: Spectral, beta: Beta) -> Result<Self> {
        if let Beta::Finite(b) = beta {
            if b < 0.0 || !b.is_finite() {
                return Err(CoreError::BetaRange(format!("beta = {b}")));
            }
        }
        let log_z = match beta {
            Beta::Finite(b) => {
                let e0 = spectral.ground_energy();
                let zp: f64 = spectral.eigenvalues.iter().map(|&lam| (-b * (lam - e0)).exp()).sum();
                -b * e0 + zp.ln()
            }
            Beta::Infinite => f64::NEG_INFINITY,
        };
        Ok(ThermalState { spectral, beta, log_z })
    }

    pub fn dim(&self) -> usize {
        self.spectral.dim()
    }

    /// Shifted Boltzmann weights `e^{-beta(lambda_i - lambda_0)}`; they sum
    /// to `Z' = Z e^{beta lambda_0}`.
    fn shifted_weights(&self, beta: f64) -> Vec<f64> {
        let e0 = self.spectral.ground_energy();
        self.spectral.eigenvalues.iter().map(|&lam| (-beta * (lam - e0)).exp()).collect()
    }

    /// Diagonal propagator `e^{-delta (lambda - lambda_0)}` as a vector.
    fn shifted_propagator(&self, delta: f64) -> Vec<f64> {
        let e0 = self.spectral.ground_energy();
        self.spectral.eigenvalues.iter().map(|&lam| (-delta * (lam - e0)).exp()).collect()
    }
}

fn check_times(times: &[f64], beta: Beta) -> Result<()> {
    let mut prev = 0.0;
    for (j, &s) in times.iter().enumerate() {
        if s < prev {
            return Err(CoreError::TimeGrid(format!(
                "times must be nondecreasing and nonnegative; s_{j} = {s} after {prev}"
            )));
        }
        prev = s;
    }
    if let Beta::Finite(b) = beta {
        if let Some(&last) = times.last() {
            // s_n = beta is allowed: by cyclicity it is the same value as
            // placing the operator at the end of the trace.
            if last > b {
                return Err(CoreError::TimeGrid(format!("s_n = {last} exceeds beta = {b}")));
            }
        }
    }
    Ok(())
}

/// `Tr[A_1(s_1) ... A_n(s_n) e^{-beta H}] / Z`, where
/// `A(s) = e^{-sH} A e^{sH}` and the chain times are nondecreasing.
///
/// At `beta = infinity` this becomes the ground-state sandwich
/// `<psi| A_1 e^{-(s_2-s_1)(H-E)} A_2 ... A_n |psi>`.
pub fn thermal_expectation(state: &ThermalState, chain: &[TimedOp]) -> Result<C64> {
    let times: Vec<f64> = chain.iter().map(|t| t.s).collect();
    check_times(&times, state.beta)?;
    if chain.is_empty() {
        return Ok(C64::new(1.0, 0.0));
    }
    let eig_ops: Vec<Array2<C64>> =
        chain.iter().map(|t| state.spectral.to_eigenbasis(t.op)).collect();
    match state.beta {
        Beta::Finite(beta) => Ok(chain_trace(state, &eig_ops, &times, beta)),
        Beta::Infinite => {
            let gs = ground_state(state)?;
            let psi_eig = to_eigen_vector(&state.spectral, &gs.vector);
            Ok(ground_chain(state, &psi_eig, &eig_ops, &times, gs.energy))
        }
    }
}

fn chain_trace(state: &ThermalState, eig_ops: &[Array2<C64>], times: &[f64], beta: f64) -> C64 {
    let n = state.dim();
    let zp: f64 = state.shifted_weights(beta).iter().sum();
    // M = G(s_1) A_1 G(s_2 - s_1) A_2 ... A_n G(beta - s_n), with G the
    // shifted diagonal propagator; the shift cancels against Z'.
    let mut m: Option<Array2<C64>> = None;
    let mut prev = 0.0;
    for (a, &s) in eig_ops.iter().zip(times.iter()) {
        let g = state.shifted_propagator(s - prev);
        let mut stage = a.clone();
        for (i, gi) in g.iter().enumerate() {
            for j in 0..n {
                stage[[i, j]] *= gi;
            }
        }
        m = Some(match m {
            None => stage,
            Some(acc) => acc.dot(&stage),
        });
        prev = s;
    }
    let acc = m.expect("nonempty chain");
    let g = state.shifted_propagator(beta - prev);
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..n {
        tr += acc[[i, i]] * g[i];
    }
    tr / zp
}

fn to_eigen_vector(spectral: &Spectral, v: &Array1<C64>) -> Array1<C64> {
    spectral.eigenvectors.t().mapv(|x| x.conj()).dot(v)
}

/// `<psi| A_1 e^{-(s_2-s_1)(H-E)} ... A_n |psi>` with everything expressed
/// in the eigenbasis. `e_ref` need not be the global minimum (sector ground
/// states sit above other sectors), so the propagator entries may exceed 1;
/// at desk-scale time grids this stays well within range.
pub fn ground_chain_raw(
    spectral: &Spectral,
    psi_eig: &Array1<C64>,
    eig_ops: &[Array2<C64>],
    times: &[f64],
    e_ref: f64,
) -> C64 {
    let mut vec = psi_eig.clone();
    // Apply from the right: ... A_n |psi>.
    for k in (0..eig_ops.len()).rev() {
        vec = eig_ops[k].dot(&vec);
        if k > 0 {
            let delta = times[k] - times[k - 1];
            for (i, x) in vec.iter_mut().enumerate() {
                *x *= C64::new((-delta * (spectral.eigenvalues[i] - e_ref)).exp(), 0.0);
            }
        }
    }
    psi_eig.iter().zip(vec.iter()).map(|(a, b)| a.conj() * b).sum()
}

fn ground_chain(
    state: &ThermalState,
    psi_eig: &Array1<C64>,
    eig_ops: &[Array2<C64>],
    times: &[f64],
    energy: f64,
) -> C64 {
    ground_chain_raw(&state.spectral, psi_eig, eig_ops, times, energy)
}

/// One factor of a doubled chain: a sum of elementary tensors
/// `sum_k c_k (A_k (x) B_k)` placed at imaginary time `s`.
pub struct DoubledFactor<'a> {
    pub s: f64,
    pub terms: Vec<(C64, &'a Operator, &'a Operator)>,
}

/// `<<X>>_beta = Tr[X e^{-beta H_ext}] / Z^2` for a chain of
/// [`DoubledFactor`]s, computed *without* materializing the doubled space:
/// the chain is expanded multilinearly into elementary tensors, and each
/// `prod_j (A_j (x) B_j)(s_j)` factorizes into a product of two single-copy
/// time-ordered traces.
pub fn doubled_expectation(state: &ThermalState, chain: &[DoubledFactor]) -> Result<C64> {
    let times: Vec<f64> = chain.iter().map(|f| f.s).collect();
    check_times(&times, state.beta)?;
    if chain.is_empty() {
        return Ok(C64::new(1.0, 0.0));
    }
    // Transform each distinct operator once.
    let mut cache: Vec<(*const Operator, Array2<C64>)> = Vec::new();
    let mut transformed = |op: &Operator, state: &ThermalState| -> usize {
        let ptr = op as *const Operator;
        if let Some(idx) = cache.iter().position(|(p, _)| *p == ptr) {
            return idx;
        }
        cache.push((ptr, state.spectral.to_eigenbasis(op)));
        cache.len() - 1
    };
    let factor_terms: Vec<Vec<(C64, usize, usize)>> = chain
        .iter()
        .map(|f| {
            f.terms
                .iter()
                .map(|(c, a, b)| (*c, transformed(a, state), transformed(b, state)))
                .collect()
        })
        .collect();

    let ground = match state.beta {
        Beta::Infinite => {
            let gs = ground_state(state)?;
            Some((to_eigen_vector(&state.spectral, &gs.vector), gs.energy))
        }
        Beta::Finite(_) => None,
    };

    let mut total = C64::new(0.0, 0.0);
    let mut selection = vec![0usize; chain.len()];
    loop {
        let mut coeff = C64::new(1.0, 0.0);
        let mut left: Vec<&Array2<C64>> = Vec::with_capacity(chain.len());
        let mut right: Vec<&Array2<C64>> = Vec::with_capacity(chain.len());
        for (f, &pick) in factor_terms.iter().zip(selection.iter()) {
            let (c, ai, bi) = f[pick];
            coeff *= c;
            left.push(&cache[ai].1);
            right.push(&cache[bi].1);
        }
        if coeff != C64::new(0.0, 0.0) {
            let (lv, rv) = match (&state.beta, &ground) {
                (Beta::Finite(beta), _) => (
                    chain_trace_arrays(state, &left, &times, *beta),
                    chain_trace_arrays(state, &right, &times, *beta),
                ),
                (Beta::Infinite, Some((psi, e))) => (
                    ground_chain_arrays(state, psi, &left, &times, *e),
                    ground_chain_arrays(state, psi, &right, &times, *e),
                ),
                (Beta::Infinite, None) => unreachable!(),
            };
            total += coeff * lv * rv;
        }
        // Advance the mixed-radix selection.
        let mut k = 0;
        loop {
            if k == chain.len() {
                return Ok(total);
            }
            selection[k] += 1;
            if selection[k] < factor_terms[k].len() {
                break;
            }
            selection[k] = 0;
            k += 1;
        }
    }
}

fn chain_trace_arrays(
    state: &ThermalState,
    eig_ops: &[&Array2<C64>],
    times: &[f64],
    beta: f64,
) -> C64 {
    let owned: Vec<Array2<C64>> = eig_ops.iter().map(|a| (*a).clone()).collect();
    chain_trace(state, &owned, times, beta)
}

fn ground_chain_arrays(
    state: &ThermalState,
    psi_eig: &Array1<C64>,
    eig_ops: &[&Array2<C64>],
    times: &[f64],
    e_ref: f64,
) -> C64 {
    let owned: Vec<Array2<C64>> = eig_ops.iter().map(|a| (*a).clone()).collect();
    ground_chain(state, psi_eig, &owned, times, e_ref)
}

/// The Duhamel two-point function
/// `(A, B)_beta = Z^{-1} int_0^1 Tr[A e^{-x beta H} B e^{-(1-x) beta H}] dx`
/// in its spectral closed form, with a first-order Taylor fallback in the
/// near-degenerate band where the divided difference loses precision.
pub fn duhamel(state: &ThermalState, a: &Operator, b: &Operator) -> Result<C64> {
    let beta = match state.beta {
        Beta::Finite(b) if b > 0.0 => b,
        Beta::Finite(_) => return Err(CoreError::BetaRange("duhamel needs beta > 0".into())),
        Beta::Infinite => return Err(CoreError::BetaRange("duhamel needs finite beta".into())),
    };
    let at = state.spectral.to_eigenbasis(a);
    let bt = state.spectral.to_eigenbasis(b);
    let n = state.dim();
    let e0 = state.spectral.ground_energy();
    let shifted: Vec<f64> = state.spectral.eigenvalues.iter().map(|&lam| lam - e0).collect();
    let diam = shifted.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let zp: f64 = shifted.iter().map(|&e| (-beta * e).exp()).sum();
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..n {
        let wm = (-beta * shifted[m]).exp();
        for nn in 0..n {
            let delta = shifted[nn] - shifted[m];
            let kernel = if delta.abs() <= 1e-12 * diam {
                wm
            } else if delta.abs() <= 1e-8 * diam {
                wm * (1.0 - beta * delta / 2.0)
            } else {
                (wm - (-beta * shifted[nn]).exp()) / (beta * delta)
            };
            acc += at[[m, nn]] * bt[[nn, m]] * kernel;
        }
    }
    Ok(acc / zp)
}

/// Exact coupling derivative `d<A>_beta/dg` for `H = H_0 - g W`, as
/// `beta [ (A, W)_beta - <A>_beta <W>_beta ]`.
pub fn coupling_derivative(state: &ThermalState, a: &Operator, w: &Operator) -> Result<f64> {
    let beta = match state.beta {
        Beta::Finite(b) if b > 0.0 => b,
        _ => return Err(CoreError::BetaRange("coupling derivative needs finite beta > 0".into())),
    };
    let duh = duhamel(state, a, w)?;
    let ea = thermal_expectation(state, &[TimedOp { op: a, s: 0.0 }])?;
    let ew = thermal_expectation(state, &[TimedOp { op: w, s: 0.0 }])?;
    let val = beta * (duh - ea * ew);
    let scale = 1.0 + val.norm();
    if val.im.abs() > 1e-8 * scale {
        return Err(CoreError::NotInRealSubspace(format!(
            "coupling derivative has imaginary part {:.3e}",
            val.im
        )));
    }
    Ok(val.re)
}

/// Lowest eigenpair with gap and degeneracy flag; the vector's phase is
/// fixed so its largest-magnitude coefficient is positive real.
pub struct GroundState {
    pub energy: f64,
    pub vector: Array1<C64>,
    pub gap: f64,
    pub degenerate: bool,
}

pub fn ground_state(state: &ThermalState) -> Result<GroundState> {
    ground_state_of(&state.spectral)
}

pub fn ground_state_of(spectral: &Spectral) -> Result<GroundState> {
    let n = spectral.dim();
    let energy = spectral.eigenvalues[0];
    let gap = if n > 1 { spectral.eigenvalues[1] - energy } else { f64::INFINITY };
    let diam = (spectral.eigenvalues[n - 1] - energy).abs().max(1.0);
    let mut vector = spectral.eigenvectors.column(0).to_owned();
    let (mut best, mut best_norm) = (0usize, 0.0f64);
    for (i, x) in vector.iter().enumerate() {
        if x.norm() > best_norm {
            best_norm = x.norm();
            best = i;
        }
    }
    if best_norm > 0.0 {
        let phase = vector[best] / best_norm;
        vector = vector.mapv(|x| x / phase);
    }
    Ok(GroundState { energy, vector, gap, degenerate: gap <= 1e-8 * diam })
}

/// Check that the chain-weight bookkeeping stays a probability vector.
pub fn weights_are_normalized(state: &ThermalState) -> bool {
    match state.beta {
        Beta::Finite(b) => {
            let w = state.shifted_weights(b);
            let z: f64 = w.iter().sum();
            (w.iter().map(|x| x / z).sum::<f64>() - 1.0).abs() <= 1e-12
        }
        Beta::Infinite => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, BasisTag};
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

    /// Two-site Ising with J12 = J and no fields: H = -2J s3 (x) s3.
    fn two_site_ising(j: f64) -> Operator {
        let zz = kron(&[&sigma3(), &sigma3()]).unwrap();
        let t = zz.tag().clone();
        zz.scale_re(-2.0 * j).retag(t)
    }

    #[test]
    fn empty_chain_is_one_and_identity_chain_is_one() {
        let state = ThermalState::new(&two_site_ising(1.0), Beta::Finite(1.0)).unwrap();
        assert_abs_diff_eq!(thermal_expectation(&state, &[]).unwrap().re, 1.0);
        let id = Operator::identity(4, state.spectral.basis_tag.clone());
        let v = thermal_expectation(&state, &[TimedOp { op: &id, s: 0.0 }]).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-13);
        assert!(weights_are_normalized(&state));
    }

    #[test]
    fn two_site_ising_matches_tanh() {
        // Hand diagonalization: spectrum {-2J, +2J} twice, sigma3 sigma3
        // eigenvalues {+1, -1, -1, +1}, so <s3 s3> = tanh(2 beta J).
        for &j in &[0.3, 1.0] {
            for &beta in &[0.5, 1.0, 2.0] {
                let h = two_site_ising(j);
                let zz = kron(&[&sigma3(), &sigma3()]).unwrap().retag(h.tag().clone());
                let state = ThermalState::new(&h, Beta::Finite(beta)).unwrap();
                let v = thermal_expectation(&state, &[TimedOp { op: &zz, s: 0.0 }]).unwrap();
                assert_abs_diff_eq!(v.re, (2.0 * beta * j).tanh(), epsilon = 1e-10);
                assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn uniform_state_tau_is_half() {
        let tau = Operator::identity(2, tag()).add(&sigma1()).scale_re(0.5);
        let state = ThermalState::new(&Operator::zeros(2, tag()), Beta::Finite(0.0)).unwrap();
        let v = thermal_expectation(&state, &[TimedOp { op: &tau, s: 0.0 }]).unwrap();
        assert_abs_diff_eq!(v.re, 0.5, epsilon = 1e-13);
    }

    #[test]
    fn rejects_decreasing_times_and_beyond_beta() {
        let h = two_site_ising(1.0);
        let state = ThermalState::new(&h, Beta::Finite(1.0)).unwrap();
        let id = Operator::identity(4, state.spectral.basis_tag.clone());
        let chain = [TimedOp { op: &id, s: 0.5 }, TimedOp { op: &id, s: 0.2 }];
        assert!(matches!(thermal_expectation(&state, &chain), Err(CoreError::TimeGrid(_))));
        let chain = [TimedOp { op: &id, s: 1.5 }];
        assert!(matches!(thermal_expectation(&state, &chain), Err(CoreError::TimeGrid(_))));
    }

    #[test]
    fn time_translation_invariance() {
        // <A(s) B(t)> depends only on t - s.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = random_hermitian(5, &mut rng);
        let a = random_hermitian(5, &mut rng);
        let b = random_hermitian(5, &mut rng);
        let state = ThermalState::new(&h, Beta::Finite(2.0)).unwrap();
        let v1 = thermal_expectation(
            &state,
            &[TimedOp { op: &a, s: 0.1 }, TimedOp { op: &b, s: 0.7 }],
        )
        .unwrap();
        let v2 = thermal_expectation(
            &state,
            &[TimedOp { op: &a, s: 0.9 }, TimedOp { op: &b, s: 1.5 }],
        )
        .unwrap();
        assert!((v1 - v2).norm() <= 1e-9 * (1.0 + v1.norm()));
    }

    #[test]
    fn positivity_of_a_star_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let h = random_hermitian(4, &mut rng);
            let a = random_op(4, &mut rng);
            let state = ThermalState::new(&h, Beta::Finite(1.0)).unwrap();
            let asa = a.adjoint().mul(&a);
            let v = thermal_expectation(&state, &[TimedOp { op: &asa, s: 0.0 }]).unwrap();
            assert!(v.re >= -1e-12);
            let d = duhamel(&state, &a.adjoint(), &a).unwrap();
            assert!(d.re >= -1e-12, "Duhamel (A*, A) must be nonnegative, got {}", d.re);
            // Standard bound: (A*, A) <= <A*A + AA*>/2.
            let sym = a.adjoint().mul(&a).add(&a.mul(&a.adjoint())).scale_re(0.5);
            let s = thermal_expectation(&state, &[TimedOp { op: &sym, s: 0.0 }]).unwrap();
            assert!(d.re <= s.re + 1e-10 * (1.0 + s.re.abs()));
        }
    }

    #[test]
    fn duhamel_of_identities_is_one_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = random_hermitian(4, &mut rng);
        let state = ThermalState::new(&h, Beta::Finite(1.3)).unwrap();
        let id = Operator::identity(4, tag());
        let v = duhamel(&state, &id, &id).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        for _ in 0..5 {
            let a = random_hermitian(4, &mut rng);
            let b = random_hermitian(4, &mut rng);
            let ab = duhamel(&state, &a, &b).unwrap();
            let ba = duhamel(&state, &b, &a).unwrap();
            assert!((ab - ba).norm() <= 1e-10 * (1.0 + ab.norm()));
        }
    }

    /// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration on
    /// the Legendre polynomial. Test-only oracle, independent of the
    /// spectral formula it checks.
    fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0f64, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes.push(0.5 * (x + 1.0));
            weights.push(0.5 * w);
        }
        (nodes, weights)
    }

    #[test]
    fn duhamel_matches_gauss_legendre_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let (nodes, weights) = gauss_legendre_01(64);
        for _ in 0..5 {
            let h = random_hermitian(4, &mut rng);
            let a = random_op(4, &mut rng);
            let b = random_op(4, &mut rng);
            let beta = rng.gen_range(0.2..2.5);
            let state = ThermalState::new(&h, Beta::Finite(beta)).unwrap();
            let fast = duhamel(&state, &a, &b).unwrap();
            // Quadrature of the defining integral.
            let spec = &state.spectral;
            let at = spec.to_eigenbasis(&a);
            let bt = spec.to_eigenbasis(&b);
            let e0 = spec.ground_energy();
            let zp: f64 = spec.eigenvalues.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
            let mut slow = C64::new(0.0, 0.0);
            for (&x, &w) in nodes.iter().zip(weights.iter()) {
                let mut inner = C64::new(0.0, 0.0);
                for m in 0..4 {
                    for nn in 0..4 {
                        let em = spec.eigenvalues[m] - e0;
                        let en = spec.eigenvalues[nn] - e0;
                        inner += at[[m, nn]]
                            * bt[[nn, m]]
                            * ((-x * beta * en).exp() * (-(1.0 - x) * beta * em).exp());
                    }
                }
                slow += inner * w;
            }
            slow /= zp;
            assert!(
                (fast - slow).norm() <= 1e-8 * (1.0 + fast.norm()),
                "duhamel {} vs quadrature {}",
                fast,
                slow
            );
        }
    }

    #[test]
    fn coupling_derivative_identity_and_finite_difference() {
        // d<1>/dg = 0, and for the 2-site Ising the Duhamel derivative
        // matches the central finite difference through the actual builder.
        let j = 0.8;
        let beta = 1.1;
        let state = ThermalState::new(&two_site_ising(j), Beta::Finite(beta)).unwrap();
        let one = Operator::identity(4, state.spectral.basis_tag.clone());
        let w = kron(&[&sigma3(), &sigma3()])
            .unwrap()
            .retag(state.spectral.basis_tag.clone())
            .scale_re(2.0);
        let d = coupling_derivative(&state, &one, &w).unwrap();
        assert_abs_diff_eq!(d, 0.0, epsilon = 1e-10);

        // A = s3 s3; H(g) = -2g zz so W = dH/d(-g)... H = H0 - g W with
        // W = 2 zz and g = J.
        let a = kron(&[&sigma3(), &sigma3()]).unwrap().retag(state.spectral.basis_tag.clone());
        let d = coupling_derivative(&state, &a, &w).unwrap();
        let h_step = 1e-4;
        let up = ThermalState::new(&two_site_ising(j + h_step), Beta::Finite(beta)).unwrap();
        let dn = ThermalState::new(&two_site_ising(j - h_step), Beta::Finite(beta)).unwrap();
        let vu = thermal_expectation(&up, &[TimedOp { op: &a, s: 0.0 }]).unwrap().re;
        let vd = thermal_expectation(&dn, &[TimedOp { op: &a, s: 0.0 }]).unwrap().re;
        let fd = (vu - vd) / (2.0 * h_step);
        assert_abs_diff_eq!(d, fd, epsilon = 1e-5);
        // And the closed form: d tanh(2 beta J)/dJ = 2 beta sech^2.
        let closed = 2.0 * beta / (2.0 * beta * j).cosh().powi(2);
        assert_abs_diff_eq!(d, closed, epsilon = 1e-8);
    }

    #[test]
    fn ground_state_basics() {
        let h = Operator::from_real(array![[0.0, 0.0], [0.0, 1.0]], tag()).unwrap();
        let state = ThermalState::new(&h, Beta::Infinite).unwrap();
        let gs = ground_state(&state).unwrap();
        assert_abs_diff_eq!(gs.energy, 0.0);
        assert_abs_diff_eq!(gs.gap, 1.0);
        assert!(!gs.degenerate);
        assert!(gs.vector[0].re > 0.0);
        assert_abs_diff_eq!(gs.vector[0].im, 0.0);
    }

    #[test]
    fn beta_infinity_consistency_with_large_beta() {
        // For gapped instances |<A>_beta - <A>_inf| <= C e^{-beta gap};
        // ratio test at beta 10 and 20.
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let h = random_hermitian(5, &mut rng);
        let a = random_hermitian(5, &mut rng);
        let inf = {
            let state = ThermalState::new(&h, Beta::Infinite).unwrap();
            thermal_expectation(&state, &[TimedOp { op: &a, s: 0.0 }]).unwrap()
        };
        let gap = {
            let spec = hermitian_eig(&h).unwrap();
            spec.eigenvalues[1] - spec.eigenvalues[0]
        };
        let d10 = {
            let state = ThermalState::new(&h, Beta::Finite(10.0)).unwrap();
            (thermal_expectation(&state, &[TimedOp { op: &a, s: 0.0 }]).unwrap() - inf).norm()
        };
        let d20 = {
            let state = ThermalState::new(&h, Beta::Finite(20.0)).unwrap();
            (thermal_expectation(&state, &[TimedOp { op: &a, s: 0.0 }]).unwrap() - inf).norm()
        };
        let predicted = (-10.0 * gap).exp();
        assert!(
            d20 <= d10 * predicted * 10.0 + 1e-12,
            "decay ratio off: d10={d10:.3e} d20={d20:.3e} gap={gap:.3}"
        );
    }

    #[test]
    fn doubled_expectation_reduces_to_single_copy() {
        // <<A (x) 1>> = <A>.
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let h = random_hermitian(4, &mut rng);
        let a = random_hermitian(4, &mut rng);
        let one = Operator::identity(4, tag());
        let state = ThermalState::new(&h, Beta::Finite(1.7)).unwrap();
        let lhs = doubled_expectation(
            &state,
            &[DoubledFactor { s: 0.0, terms: vec![(C64::new(1.0, 0.0), &a, &one)] }],
        )
        .unwrap();
        let rhs = thermal_expectation(&state, &[TimedOp { op: &a, s: 0.0 }]).unwrap();
        assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
    }

    #[test]
    fn doubled_expectation_gives_twice_centered_covariance() {
        // <<(A(x)1 - 1(x)A)(s) (B(x)1 - 1(x)B)(t)>> =
        //   2 (<A(s)B(t)> - <A><B>) by multilinear expansion.
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let h = random_hermitian(4, &mut rng);
        let a = random_hermitian(4, &mut rng);
        let b = random_hermitian(4, &mut rng);
        let one = Operator::identity(4, tag());
        let state = ThermalState::new(&h, Beta::Finite(1.2)).unwrap();
        let m1 = C64::new(-1.0, 0.0);
        let p1 = C64::new(1.0, 0.0);
        let (s, t) = (0.0, 0.6);
        let lhs = doubled_expectation(
            &state,
            &[
                DoubledFactor { s, terms: vec![(p1, &a, &one), (m1, &one, &a)] },
                DoubledFactor { s: t, terms: vec![(p1, &b, &one), (m1, &one, &b)] },
            ],
        )
        .unwrap();
        let ab = thermal_expectation(
            &state,
            &[TimedOp { op: &a, s }, TimedOp { op: &b, s: t }],
        )
        .unwrap();
        let ea = thermal_expectation(&state, &[TimedOp { op: &a, s: 0.0 }]).unwrap();
        let eb = thermal_expectation(&state, &[TimedOp { op: &b, s: 0.0 }]).unwrap();
        let rhs = (ab - ea * eb) * 2.0;
        assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn doubled_expectation_matches_materialized_h_ext() {
        // Cross-validate the factorized path against a literally
        // materialized H (x) 1 + 1 (x) H on the 2-site Ising.
        let h = two_site_ising(0.9);
        let ext_tag = BasisTag::new("ext");
        let one4 = Operator::identity(4, h.tag().clone());
        let h_ext = kron(&[&h, &one4])
            .unwrap()
            .retag(ext_tag.clone())
            .add(&kron(&[&one4, &h]).unwrap().retag(ext_tag.clone()));
        let zz = kron(&[&sigma3(), &sigma3()]).unwrap().retag(h.tag().clone());
        let a_ext = kron(&[&zz, &one4]).unwrap().retag(ext_tag.clone());
        let b_ext = kron(&[&one4, &zz]).unwrap().retag(ext_tag.clone());
        let x = a_ext.sub(&b_ext);

        let beta = 1.4;
        let state = ThermalState::new(&h, Beta::Finite(beta)).unwrap();
        let one = Operator::identity(4, h.tag().clone());
        let m1 = C64::new(-1.0, 0.0);
        let p1 = C64::new(1.0, 0.0);
        let fact = doubled_expectation(
            &state,
            &[
                DoubledFactor { s: 0.0, terms: vec![(p1, &zz, &one), (m1, &one, &zz)] },
                DoubledFactor { s: 0.5, terms: vec![(p1, &zz, &one), (m1, &one, &zz)] },
            ],
        )
        .unwrap();

        let ext_state = ThermalState::new(&h_ext, Beta::Finite(beta)).unwrap();
        let mat = thermal_expectation(
            &ext_state,
            &[TimedOp { op: &x, s: 0.0 }, TimedOp { op: &x, s: 0.5 }],
        )
        .unwrap();
        // Z_ext = Z^2 exactly, so the two normalizations agree.
        assert!(
            (fact - mat).norm() <= 1e-9 * (1.0 + mat.norm()),
            "factorized {fact} vs materialized {mat}"
        );
    }
}
