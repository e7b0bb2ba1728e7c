//! Executable inequality suites: each theorem-level claim becomes a
//! parameterized numerical check producing an [`InequalityReport`].
//!
//! Two independent evaluation routes back the generalized inequalities: the
//! doubled-chain expectation and the signed sum over subsets. They must
//! agree to 1e-9 on every generated instance, which tests the engine
//! against itself before it is trusted to test the theorems.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::CoreError;
use crate::expectations::{
    doubled_expectation, thermal_expectation, Beta, DoubledFactor, ThermalState, TimedOp,
};
use crate::linalg::{Operator, C64};
use crate::models::{ModelInstance, ModelKind};
use crate::Result;

pub mod bose_hubbard;
pub mod hubbard;
pub mod ising;
pub mod rotor;
pub mod structural;

/// Per-inequality record: the left-hand value, its margin against the
/// bound, and enough provenance to reproduce the check.
#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub theorem_id: String,
    pub model: String,
    pub beta: String,
    pub lhs: f64,
    pub margin: f64,
    pub passed: bool,
    pub witness: String,
    pub note: Option<String>,
    pub runtime_ms: f64,
}

impl InequalityReport {
    /// A `lhs >= 0` check.
    pub fn nonneg(
        theorem_id: &str,
        model: ModelKind,
        beta: Beta,
        lhs: f64,
        tol: f64,
        witness: String,
    ) -> Self {
        InequalityReport {
            theorem_id: theorem_id.to_string(),
            model: model.to_string(),
            beta: beta.to_string(),
            lhs,
            margin: lhs,
            passed: lhs >= -tol,
            witness,
            note: None,
            runtime_ms: 0.0,
        }
    }

    /// A `|lhs| <= tol` identity check; the margin is `tol - |lhs|`.
    pub fn identity(
        theorem_id: &str,
        model: ModelKind,
        beta: Beta,
        residual: f64,
        tol: f64,
        witness: String,
    ) -> Self {
        InequalityReport {
            theorem_id: theorem_id.to_string(),
            model: model.to_string(),
            beta: beta.to_string(),
            lhs: residual,
            margin: tol - residual.abs(),
            passed: residual.abs() <= tol,
            witness,
            note: None,
            runtime_ms: 0.0,
        }
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }

    /// A sweep-level record whose beta column reads "sweep".
    pub fn sweep_summary(
        theorem_id: &str,
        model: ModelKind,
        lhs: f64,
        tol: f64,
        witness: String,
    ) -> Self {
        InequalityReport {
            theorem_id: theorem_id.to_string(),
            model: model.to_string(),
            beta: "sweep".to_string(),
            lhs,
            margin: lhs,
            passed: lhs >= -tol,
            witness,
            note: None,
            runtime_ms: 0.0,
        }
    }
}

/// Common knobs for a suite run.
#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub betas: Vec<Beta>,
    pub tolerance: f64,
    pub seed: u64,
    /// Counterexample mode: preconditions are intentionally violated and
    /// the sweep must find at least one real violation.
    pub counterexample: bool,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            betas: vec![Beta::Finite(0.5), Beta::Finite(1.0), Beta::Finite(2.0)],
            tolerance: crate::tol::SUITE_TOL,
            seed: 7,
            counterexample: false,
        }
    }
}

impl SuiteParams {
    pub fn finite_betas(&self) -> Vec<f64> {
        self.betas.iter().filter_map(|b| b.finite()).collect()
    }
}

/// One factor `A_j (x) B_j + eps_j B_j (x) A_j` of a generalized chain.
pub struct GeneralizedFactor {
    pub s: f64,
    pub a: Operator,
    pub b: Operator,
    pub eps: i8,
    pub label: String,
}

/// Evaluate a generalized inequality by both routes: the doubled-chain
/// expectation and the 2^n signed sum `sum_I eps_I <T_I> <T_{I^c}>`.
/// The two complex values must agree; Hermitian inputs make them real.
pub fn generalized_two_routes(
    state: &ThermalState,
    factors: &[GeneralizedFactor],
) -> Result<(C64, C64)> {
    let n = factors.len();
    if n > 8 {
        return Err(CoreError::CombinatorialCap(n));
    }
    let chain: Vec<DoubledFactor> = factors
        .iter()
        .map(|f| DoubledFactor {
            s: f.s,
            terms: vec![
                (C64::new(1.0, 0.0), &f.a, &f.b),
                (C64::new(f.eps as f64, 0.0), &f.b, &f.a),
            ],
        })
        .collect();
    let doubled = doubled_expectation(state, &chain)?;

    let mut signed = C64::new(0.0, 0.0);
    for subset in 0..(1usize << n) {
        let mut eps_i = 1.0;
        let chain_i: Vec<TimedOp> = factors
            .iter()
            .enumerate()
            .map(|(j, f)| {
                if subset >> j & 1 == 1 {
                    eps_i *= f.eps as f64;
                    TimedOp { op: &f.a, s: f.s }
                } else {
                    TimedOp { op: &f.b, s: f.s }
                }
            })
            .collect();
        let chain_ic: Vec<TimedOp> = factors
            .iter()
            .enumerate()
            .map(|(j, f)| {
                if subset >> j & 1 == 1 {
                    TimedOp { op: &f.b, s: f.s }
                } else {
                    TimedOp { op: &f.a, s: f.s }
                }
            })
            .collect();
        let ti = thermal_expectation(state, &chain_i)?;
        let tic = thermal_expectation(state, &chain_ic)?;
        signed += ti * tic * eps_i;
    }
    Ok((doubled, signed))
}

/// Real-valued form of [`generalized_two_routes`] for Hermitian chains.
pub fn generalized_two_routes_real(
    state: &ThermalState,
    factors: &[GeneralizedFactor],
) -> Result<(f64, f64)> {
    let (d, s) = generalized_two_routes(state, factors)?;
    Ok((real_part(d, "doubled route")?, real_part(s, "signed sum")?))
}

pub(crate) fn real_part(v: C64, what: &str) -> Result<f64> {
    if v.im.abs() > 1e-8 * (1.0 + v.norm()) {
        return Err(CoreError::NotInRealSubspace(format!(
            "{what} has imaginary part {:.3e}",
            v.im
        )));
    }
    Ok(v.re)
}

/// Evaluate `<A(s) B(t)><C(s) D(t)> - <A(s) D(t)><C(s) B(t)>`.
pub fn second_inequality_value(
    state: &ThermalState,
    a: &Operator,
    b: &Operator,
    c: &Operator,
    d: &Operator,
    s: f64,
    t: f64,
) -> Result<f64> {
    let ab = thermal_expectation(state, &[TimedOp { op: a, s }, TimedOp { op: b, s: t }])?;
    let cd = thermal_expectation(state, &[TimedOp { op: c, s }, TimedOp { op: d, s: t }])?;
    let ad = thermal_expectation(state, &[TimedOp { op: a, s }, TimedOp { op: d, s: t }])?;
    let cb = thermal_expectation(state, &[TimedOp { op: c, s }, TimedOp { op: b, s: t }])?;
    real_part(ab * cd - ad * cb, "second inequality")
}

/// A registered suite: its runner name, the theorem ids it certifies, the
/// checked statement in formula form, and the models it applies to.
pub struct SuiteInfo {
    pub name: &'static str,
    pub theorem_ids: &'static [&'static str],
    pub statement: &'static str,
    pub models: &'static [ModelKind],
}

use ModelKind::{BoseHubbard, Hubbard, Ising, Rotor};

/// The machine-readable registry: every theorem id the toolkit certifies
/// maps to at least one executable suite.
pub static REGISTRY: &[SuiteInfo] = &[
    SuiteInfo {
        name: "griffiths1",
        theorem_ids: &["Thm2.3", "Thm2.5", "Thm4.1", "Thm5.2", "Thm6.2", "Thm7.4", "Eq7.HalfFilling"],
        statement: "<prod_j A_j(s_j)>_beta >= 0 for monomial chains from the model cone algebra",
        models: &[Ising, Rotor, BoseHubbard, Hubbard],
    },
    SuiteInfo {
        name: "griffiths2",
        theorem_ids: &[
            "Thm2.6", "Coro2.11", "Thm4.2", "Coro4.4", "Thm5.3", "Coro5.4", "Thm5.5", "Thm6.3",
            "Coro7.9", "Coro7.10", "Coro7.12",
        ],
        statement: "<A(s)B(t)><C(s)D(t)> - <A(s)D(t)><C(s)B(t)> >= 0 and its covariance forms",
        models: &[Ising, Rotor, BoseHubbard, Hubbard],
    },
    SuiteInfo {
        name: "generalized",
        theorem_ids: &[
            "Thm2.12", "Rem2.13", "Thm2.16", "Thm4.5", "Coro4.6", "Thm5.6", "Thm6.5", "Thm6.6",
            "Coro6.7", "Thm7.5", "Coro7.11",
        ],
        statement: "sum_{I subset [n]} eps_I <T_I><T_{I^c}> >= 0, evaluated by two routes",
        models: &[Ising, Rotor, BoseHubbard, Hubbard],
    },
    SuiteInfo {
        name: "duhamel",
        theorem_ids: &["Coro2.11", "Thm6.3"],
        statement: "(A, B)_beta - <A><B> >= 0 with the spectral kernel checked by quadrature",
        models: &[Ising, Rotor, BoseHubbard],
    },
    SuiteInfo {
        name: "monotonicity",
        theorem_ids: &["Ex4.7", "Ex5.8"],
        statement: "Duhamel coupling derivatives carry the predicted sign and match finite differences",
        models: &[Ising, Rotor],
    },
    SuiteInfo {
        name: "structural",
        theorem_ids: &[
            "Prop2.2", "Prop3.8", "Prop3.11", "Prop4.9", "Prop4.11", "Prop4.13", "Coro4.14",
            "Coro4.15", "Prop5.PP", "Prop5.PPMate", "Prop5.NumPP", "Coro5.SemiPP", "Prop6.BosonPP",
            "Prop6.BHExpPP", "Prop6.ExtAniPP", "Prop6.BHExtHPP", "Prop6.alphahat", "Prop6.U03",
            "Prop7.HubbardHami", "Prop7.HBasicPP", "Prop7.AnniCre", "Coro7.ElCorr", "Lemma7.HHH1",
            "Prop7.HHH4", "Coro7.HHH5", "Eq7.UnitaryQ", "LemmaA.11", "PropA.2", "PropA.4",
        ],
        statement: "each operator-level positivity claim holds entrywise or by sampled PSD evidence",
        models: &[Ising, Rotor, BoseHubbard, Hubbard],
    },
    SuiteInfo {
        name: "ground_state",
        theorem_ids: &["Thm2.4", "Thm2.8", "Thm3.14", "Thm7.13", "Thm7.14", "Thm7.15", "Thm8.2", "Thm8.4", "PropA.7"],
        statement: "ground-state positivity, uniqueness with a gap, E <= E0, and beta = inf limits",
        models: &[Ising, Hubbard],
    },
    SuiteInfo {
        name: "consistency",
        theorem_ids: &["Rem2.13", "Thm2.12"],
        statement: "doubled-chain evaluation equals the 2^n signed sum to 1e-9",
        models: &[Ising, Rotor, BoseHubbard, Hubbard],
    },
    SuiteInfo {
        name: "counterexample",
        theorem_ids: &["Thm4.1", "Coro5.4"],
        statement: "with preconditions violated on purpose, the checker finds a real violation",
        models: &[Ising, Rotor],
    },
];

pub fn suite_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|s| s.name).collect()
}

pub fn find_suite(name: &str) -> Option<&'static SuiteInfo> {
    REGISTRY.iter().find(|s| s.name == name)
}

/// Run one named suite against a model instance.
pub fn run_suite(
    suite: &str,
    m: &ModelInstance,
    params: &SuiteParams,
) -> Result<Vec<InequalityReport>> {
    let info = find_suite(suite).ok_or_else(|| {
        CoreError::Config(format!(
            "unknown suite `{suite}`; valid names: {}",
            suite_names().join(", ")
        ))
    })?;
    if !info.models.contains(&m.kind) {
        return Err(CoreError::Config(format!(
            "suite `{suite}` does not apply to model `{}`",
            m.kind
        )));
    }
    let start = Instant::now();
    let mut reports = match (suite, m.kind) {
        ("griffiths1", ModelKind::Ising) => ising::griffiths1(m, params)?,
        ("griffiths2", ModelKind::Ising) => ising::griffiths2(m, params)?,
        ("generalized", ModelKind::Ising) => ising::generalized(m, params)?,
        ("duhamel", ModelKind::Ising) => ising::duhamel_suite(m, params)?,
        ("monotonicity", ModelKind::Ising) => ising::monotonicity(m, params)?,
        ("counterexample", ModelKind::Ising) => ising::counterexample(m, params)?,
        ("griffiths1", ModelKind::Rotor) => rotor::griffiths1(m, params)?,
        ("griffiths2", ModelKind::Rotor) => rotor::griffiths2(m, params)?,
        ("generalized", ModelKind::Rotor) => rotor::generalized(m, params)?,
        ("duhamel", ModelKind::Rotor) => rotor::duhamel_suite(m, params)?,
        ("monotonicity", ModelKind::Rotor) => rotor::monotonicity(m, params)?,
        ("counterexample", ModelKind::Rotor) => rotor::counterexample(m, params)?,
        ("griffiths1", ModelKind::BoseHubbard) => bose_hubbard::griffiths1(m, params)?,
        ("griffiths2", ModelKind::BoseHubbard) => bose_hubbard::griffiths2(m, params)?,
        ("generalized", ModelKind::BoseHubbard) => bose_hubbard::generalized(m, params)?,
        ("duhamel", ModelKind::BoseHubbard) => bose_hubbard::duhamel_suite(m, params)?,
        ("griffiths1", ModelKind::Hubbard) => hubbard::griffiths1(m, params)?,
        ("griffiths2", ModelKind::Hubbard) => hubbard::griffiths2(m, params)?,
        ("generalized", ModelKind::Hubbard) => hubbard::generalized(m, params)?,
        ("ground_state", ModelKind::Ising) => ising::ground_state_suite(m, params)?,
        ("ground_state", ModelKind::Hubbard) => hubbard::ground_state_suite(m, params)?,
        ("structural", _) => structural::run(m, params)?,
        ("consistency", _) => consistency_suite(m, params)?,
        _ => {
            return Err(CoreError::Config(format!(
                "suite `{suite}` has no runner for model `{}`",
                m.kind
            )))
        }
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3 / reports.len().max(1) as f64;
    for r in &mut reports {
        r.runtime_ms = elapsed;
    }
    reports.sort_by(|a, b| (&a.theorem_id, &a.witness).cmp(&(&b.theorem_id, &b.witness)));
    Ok(reports)
}

/// Cross-engine consistency: the two routes of [`generalized_two_routes`]
/// agree on randomly generated chains over the model's dictionary.
pub fn consistency_suite(m: &ModelInstance, params: &SuiteParams) -> Result<Vec<InequalityReport>> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let names: Vec<&String> = m.ops.keys().collect();
    if names.is_empty() {
        return Ok(Vec::new());
    }
    let cases: Vec<(u64, f64)> = params
        .finite_betas()
        .iter()
        .flat_map(|&beta| (0..40u64).map(move |k| (k, beta)))
        .collect();
    let reports: Result<Vec<InequalityReport>> = cases
        .par_iter()
        .map(|&(k, beta)| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ (k * 7919) ^ beta.to_bits());
            let state = ThermalState::new(&m.hamiltonian, Beta::Finite(beta))?;
            let n = rng.gen_range(1..=3usize);
            let mut times: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..beta * 0.95)).collect();
            times.sort_by(f64::total_cmp);
            let factors: Vec<GeneralizedFactor> = times
                .iter()
                .map(|&s| {
                    let a = names[rng.gen_range(0..names.len())];
                    let b = names[rng.gen_range(0..names.len())];
                    let eps = if rng.gen_bool(0.5) { 1 } else { -1 };
                    GeneralizedFactor {
                        s,
                        a: m.ops[a.as_str()].clone(),
                        b: m.ops[b.as_str()].clone(),
                        eps,
                        label: format!("{a},{b},{eps:+}@{s:.3}"),
                    }
                })
                .collect();
            let (doubled, signed) = generalized_two_routes(&state, &factors)?;
            let scale = 1.0 + doubled.norm().max(signed.norm());
            let witness = factors.iter().map(|f| f.label.as_str()).collect::<Vec<_>>().join(";");
            Ok(InequalityReport::identity(
                "Rem2.13",
                m.kind,
                Beta::Finite(beta),
                (doubled - signed).norm() / scale,
                1e-9,
                format!("case{k}:{witness}"),
            ))
        })
        .collect();
    reports
}
