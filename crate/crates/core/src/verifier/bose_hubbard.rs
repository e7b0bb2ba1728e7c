//! Bose-Hubbard suites.
//!
//! Single-copy chains run on the truncated Fock space, where ladder
//! insertions and the semigroup are entrywise nonnegative, so the first
//! inequality is exact under truncation. Doubled claims are evaluated on
//! the joint xi/eta window (total pair occupation below the cutoff), the
//! projection the positivity proofs themselves are phrased through; the
//! product-window factorization merely converges to these values and is
//! not exactly protected at finite cutoff, so the margins asserted here
//! come from the joint-window traces.

use rayon::prelude::*;

use crate::error::CoreError;
use crate::expectations::{duhamel, thermal_expectation, Beta, ThermalState, TimedOp};
use crate::linalg::{hermitian_eig, Operator};
use crate::models::bose_hubbard::{alpha_hat, ladder_monomial};
use crate::models::ModelInstance;
use crate::Result;

use super::{real_part, InequalityReport, SuiteParams};

fn preconditions(m: &ModelInstance) -> bool {
    m.spec.couplings_nonnegative()
        && m.spec.u_site.iter().all(|&u| u > 0.0)
        && m.spec.lambda.iter().all(|&l| l >= 0.0)
}

fn preconditions_u0(m: &ModelInstance) -> bool {
    m.spec.couplings_nonnegative()
        && m.spec.u_site.iter().all(|&u| u == 0.0)
        && m.spec.lambda.iter().all(|&l| l >= 0.0)
}

fn precondition_report(m: &ModelInstance, theorem: &str) -> InequalityReport {
    InequalityReport::sweep_summary(theorem, m.kind, 0.0, 1.0, "skipped".into())
        .with_note("preconditions-failed")
}

/// First inequality: chains of ladder monomials `I(m; #)`.
pub fn griffiths1(m: &ModelInstance, params: &SuiteParams) -> Result<Vec<InequalityReport>> {
    if !preconditions(m) && !preconditions_u0(m) && !params.counterexample {
        return Ok(vec![precondition_report(m, "Thm6.2")]);
    }
    let n = m.spec.n_sites();
    let mut gens: Vec<(String, Operator)> = Vec::new();
    for x in 0..n {
        let mut powers = vec![0u32; n];
        powers[x] = 1;
        gens.push((format!("a_{x}"), ladder_monomial(m, &powers, &vec![false; n])?));
        gens.push((format!("adag_{x}"), ladder_monomial(m, &powers, &vec![true; n])?));
    }
    // A balanced two-site monomial exercises the product structure.
    if n >= 2 {
        let mut powers = vec![0u32; n];
        powers[0] = 1;
        powers[1] = 1;
        let mut dag = vec![false; n];
        dag[0] = true;
        gens.push(("adag_0 a_1".into(), ladder_monomial(m, &powers, &dag)?));
    }

    let mut chains: Vec<Vec<usize>> = vec![vec![]];
    let mut all = Vec::new();
    for _ in 0..3 {
        let mut next = Vec::new();
        for c in &chains {
            for g in 0..gens.len() {
                let mut cc = c.clone();
                cc.push(g);
                next.push(cc);
            }
        }
        all.extend(next.iter().cloned());
        chains = next;
    }

    let mut reports = Vec::new();
    for &beta in &params.finite_betas() {
        let state = ThermalState::new(&m.hamiltonian, Beta::Finite(beta))?;
        let chunk: Result<Vec<InequalityReport>> = all
            .par_iter()
            .map(|chain| {
                let k = chain.len();
                let ops: Vec<TimedOp> = chain
                    .iter()
                    .enumerate()
                    .map(|(j, &g)| TimedOp {
                        op: &gens[g].1,
                        s: beta * (j + 1) as f64 / (k + 2) as f64,
                    })
                    .collect();
                let v = thermal_expectation(&state, &ops)?;
                let lhs = real_part(v, "bh first inequality")?;
                let witness =
                    chain.iter().map(|&g| gens[g].0.as_str()).collect::<Vec<_>>().join(" ");
                Ok(InequalityReport::nonneg(
                    "Thm6.2",
                    m.kind,
                    Beta::Finite(beta),
                    lhs,
                    params.tolerance,
                    witness,
                ))
            })
            .collect();
        reports.extend(chunk?);
    }
    Ok(reports)
}

/// A doubled-window thermal state for the rotated pair Hamiltonian.
fn doubled_state(m: &ModelInstance, beta: f64) -> Result<(&ModelInstance, ThermalState)> {
    let d = m.doubled()?;
    let state = ThermalState::new(&d.hamiltonian, Beta::Finite(beta))?;
    Ok((d, state))
}

/// Whether a chain of ladder insertions can conserve the total pair
/// occupation (otherwise its trace vanishes identically).
fn balanced(daggers: &[bool]) -> bool {
    let ups = daggers.iter().filter(|&&d| d).count();
    2 * ups == daggers.len()
}

/// Second inequality (pair form): products
/// `[a^#(s) (x) 1 + eps 1 (x) a^#(s)] [a^#bar(t) (x) 1 + eps 1 (x) a^#bar(t)]`
/// become `2 xi^#(s) xi^#bar(t)` or `2 eta^#(s) eta^#bar(t)` in the rotated
/// pair picture (the two unit phases of the eta factors cancel within each
/// pair), so each pair contributes two nonnegative insertions.
pub fn griffiths2(m: &ModelInstance, params: &SuiteParams) -> Result<Vec<InequalityReport>> {
    if !preconditions(m) && !params.counterexample {
        return Ok(vec![precondition_report(m, "Thm6.3")]);
    }
    let n = m.spec.n_sites();
    let mut reports = Vec::new();
    for &beta in &params.finite_betas() {
        if beta == 0.0 {
            continue;
        }
        let (d, state) = doubled_state(m, beta)?;
        for x in 0..n {
            for y in 0..n {
                for eps in [1i8, -1] {
                    for dag in [false, true] {
                        let f1 = alpha_hat(d, eps, x, dag)?;
                        let f2 = alpha_hat(d, eps, y, !dag)?;
                        let chain = [
                            TimedOp { op: &f1, s: beta / 4.0 },
                            TimedOp { op: &f2, s: beta / 2.0 },
                        ];
                        let v = thermal_expectation(&state, &chain)?;
                        let lhs = real_part(v, "bh pair chain")?;
                        reports.push(InequalityReport::nonneg(
                            "Thm6.3",
                            m.kind,
                            Beta::Finite(beta),
                            lhs,
                            params.tolerance,
                            format!("x={x} y={y} eps={eps:+} dag={}", dag as u8),
                        ));
                    }
                }
            }
        }
    }
    Ok(reports)
}

/// Generalized alpha chains, the U = 0 strengthening, and its covariance
/// corollary.
pub fn generalized(m: &ModelInstance, params: &SuiteParams) -> Result<Vec<InequalityReport>> {
    let u0 = preconditions_u0(m);
    if !preconditions(m) && !u0 && !params.counterexample {
        return Ok(vec![precondition_report(m, "Thm6.5")]);
    }
    let n = m.spec.n_sites();
    let mut reports = Vec::new();

    for &beta in &params.finite_betas() {
        if beta == 0.0 {
            continue;
        }
        if !u0 {
            // Thm 6.5: chains of alpha^_{eps,x}^{#} insertions.
            let (d, state) = doubled_state(m, beta)?;
            let mut cases = Vec::new();
            for len in 2..=3usize {
                let per = n * 2 * 2; // site, eps, dagger
                let total = per.pow(len as u32);
                for code in 0..total {
                    let mut c = code;
                    let mut picks = Vec::with_capacity(len);
                    for _ in 0..len {
                        let p = c % per;
                        c /= per;
                        let x = p % n;
                        let eps = if (p / n) % 2 == 0 { 1i8 } else { -1 };
                        let dag = (p / (2 * n)) % 2 == 1;
                        picks.push((x, eps, dag));
                    }
                    cases.push(picks);
                }
            }
            let chunk: Result<Vec<InequalityReport>> = cases
                .par_iter()
                .map(|picks| {
                    let k = picks.len();
                    let ops: Vec<Operator> = picks
                        .iter()
                        .map(|&(x, eps, dag)| alpha_hat(d, eps, x, dag))
                        .collect::<Result<_>>()?;
                    let chain: Vec<TimedOp> = ops
                        .iter()
                        .enumerate()
                        .map(|(j, op)| TimedOp { op, s: beta * (j + 1) as f64 / (k + 2) as f64 })
                        .collect();
                    let v = thermal_expectation(&state, &chain)?;
                    let lhs = real_part(v, "bh alpha chain")?;
                    let daggers: Vec<bool> = picks.iter().map(|&(_, _, d)| d).collect();
                    let witness = picks
                        .iter()
                        .map(|&(x, eps, dag)| format!("a[{eps:+},{x}]{}", if dag { "+" } else { "-" }))
                        .collect::<Vec<_>>()
                        .join(" ");
                    let mut rep = InequalityReport::nonneg(
                        "Thm6.5",
                        m.kind,
                        Beta::Finite(beta),
                        lhs,
                        params.tolerance,
                        witness,
                    );
                    if !balanced(&daggers) && lhs.abs() <= params.tolerance {
                        rep = rep.with_note("trivially-zero");
                    }
                    Ok(rep)
                })
                .collect();
            reports.extend(chunk?);
        } else {
            // Thm 6.6 at U = 0: the unrotated pair semigroup is already
            // entrywise nonnegative; single factors a^# (x) 1 + eps 1 (x)
            // a^# map to sqrt2 xi^# and -sqrt2 eta^#.
            let d = m.doubled()?;
            let raw = d.op("Hext_raw")?;
            let state = ThermalState::new(raw, Beta::Finite(beta))?;
            if !hopping_matrix_positive_definite(m) {
                reports.push(
                    InequalityReport::nonneg(
                        "Thm6.6",
                        m.kind,
                        Beta::Finite(beta),
                        0.0,
                        1.0,
                        "(-t - mu delta) not positive definite".into(),
                    )
                    .with_note("trace-class-condition-fails-untruncated-only"),
                );
            }
            for len in 1..=3usize {
                let per = n * 2 * 2;
                let total = per.pow(len as u32);
                for code in 0..total {
                    let mut c = code;
                    let mut ops = Vec::with_capacity(len);
                    let mut witness = String::new();
                    for _ in 0..len {
                        let p = c % per;
                        c /= per;
                        let x = p % n;
                        let eps = if (p / n) % 2 == 0 { 1i8 } else { -1 };
                        let dag = (p / (2 * n)) % 2 == 1;
                        let name = match (eps, dag) {
                            (1, false) => format!("xi_{x}"),
                            (1, true) => format!("xidag_{x}"),
                            (-1, false) => format!("eta_{x}"),
                            _ => format!("etadag_{x}"),
                        };
                        let sign = if eps == 1 { 1.0 } else { -1.0 };
                        ops.push(d.op(&name)?.scale_re(sign * 2.0f64.sqrt()));
                        witness.push_str(&format!("[{eps:+},{x}]{} ", if dag { "+" } else { "-" }));
                    }
                    let chain: Vec<TimedOp> = ops
                        .iter()
                        .enumerate()
                        .map(|(j, op)| TimedOp { op, s: beta * (j + 1) as f64 / (len + 2) as f64 })
                        .collect();
                    let v = thermal_expectation(&state, &chain)?;
                    let lhs = real_part(v, "bh u0 chain")?;
                    reports.push(InequalityReport::nonneg(
                        "Thm6.6",
                        m.kind,
                        Beta::Finite(beta),
                        lhs,
                        params.tolerance,
                        witness.trim().to_string(),
                    ));
                }
            }
            // Coro 6.7: covariances of ladder monomials, in the doubled
            // difference representation.
            reports.extend(u0_covariances(m, beta, params)?);
        }
    }
    Ok(reports)
}

fn hopping_matrix_positive_definite(m: &ModelInstance) -> bool {
    let n = m.spec.n_sites();
    let mut mat = ndarray::Array2::<f64>::zeros((n, n));
    for x in 0..n {
        for y in 0..n {
            mat[[x, y]] = -m.spec.coupling(x, y);
        }
        mat[[x, x]] -= m.spec.mu_chemical;
    }
    let op = Operator::from_real(mat, m.tag().clone()).unwrap();
    match hermitian_eig(&op) {
        Ok(s) => s.eigenvalues[0] > 0.0,
        Err(_) => false,
    }
}

/// Pair-picture image of `A (x) 1` (`plus_copy = true`) or `1 (x) A`
/// for a ladder monomial: each `a_x^{#}` factor becomes
/// `(xi_x^{#} -/+ eta_x^{#})/sqrt2`.
fn monomial_pair_image(
    d: &ModelInstance,
    powers: &[u32],
    daggered: &[bool],
    left_copy: bool,
) -> Result<Operator> {
    let dim = d.dim();
    let mut acc = Operator::identity(dim, d.tag().clone());
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    for (x, (&p, &dag)) in powers.iter().zip(daggered.iter()).enumerate() {
        let xi = if dag { d.op(&format!("xidag_{x}"))? } else { d.op(&format!("xi_{x}"))? };
        let eta = if dag { d.op(&format!("etadag_{x}"))? } else { d.op(&format!("eta_{x}"))? };
        let factor = if left_copy {
            xi.sub(eta).scale_re(inv)
        } else {
            xi.add(eta).scale_re(inv)
        };
        for _ in 0..p {
            acc = acc.mul(&factor);
        }
    }
    Ok(acc)
}

fn u0_covariances(
    m: &ModelInstance,
    beta: f64,
    params: &SuiteParams,
) -> Result<Vec<InequalityReport>> {
    let n = m.spec.n_sites();
    let d = m.doubled()?;
    let raw = d.op("Hext_raw")?;
    let state = ThermalState::new(raw, Beta::Finite(beta))?;
    let mut monomials: Vec<(String, Vec<u32>, Vec<bool>)> = Vec::new();
    for x in 0..n {
        let mut p = vec![0u32; n];
        p[x] = 1;
        monomials.push((format!("a_{x}"), p.clone(), vec![false; n]));
        monomials.push((format!("adag_{x}"), p, vec![true; n]));
    }
    if n >= 2 {
        let mut p = vec![0u32; n];
        p[0] = 1;
        p[1] = 1;
        let mut dag = vec![false; n];
        dag[0] = true;
        monomials.push(("adag_0 a_1".into(), p, dag));
    }
    let mut reports = Vec::new();
    for (na, pa, da) in &monomials {
        for (nb, pb, db) in &monomials {
            // 2 cov(A, B) = <<(A (x) 1 - 1 (x) A)(s)(B (x) 1 - 1 (x) B)(t)>>.
            let a_diff = monomial_pair_image(d, pa, da, true)?
                .sub(&monomial_pair_image(d, pa, da, false)?);
            let b_diff = monomial_pair_image(d, pb, db, true)?
                .sub(&monomial_pair_image(d, pb, db, false)?);
            let chain = [
                TimedOp { op: &a_diff, s: beta / 4.0 },
                TimedOp { op: &b_diff, s: beta / 2.0 },
            ];
            let v = thermal_expectation(&state, &chain)?;
            let lhs = real_part(v, "u0 covariance")? / 2.0;
            reports.push(InequalityReport::nonneg(
                "Coro6.7",
                m.kind,
                Beta::Finite(beta),
                lhs,
                params.tolerance,
                format!("cov({na}, {nb})"),
            ));
        }
    }
    Ok(reports)
}

/// The Duhamel example `(a_x^*, a_y)_beta - <a_x^*><a_y> >= 0`, evaluated
/// through the doubled difference representation on the joint window (plus
/// the unconditional `(A^*, A) >= 0` on the single copy).
pub fn duhamel_suite(m: &ModelInstance, params: &SuiteParams) -> Result<Vec<InequalityReport>> {
    if !preconditions(m) && !preconditions_u0(m) && !params.counterexample {
        return Ok(vec![precondition_report(m, "Thm6.3")]);
    }
    let n = m.spec.n_sites();
    let mut reports = Vec::new();
    for &beta in &params.finite_betas() {
        if beta == 0.0 {
            continue;
        }
        let d = m.doubled()?;
        let raw = d.op("Hext_raw")?;
        let state_pair = ThermalState::new(raw, Beta::Finite(beta))?;
        for x in 0..n {
            for y in 0..n {
                // a*(x)1 - 1(x)a* = -sqrt2 eta^dag, a(x)1 - 1(x)a = -sqrt2 eta.
                let o1 = d.op(&format!("etadag_{x}"))?.scale_re(-(2.0f64.sqrt()));
                let o2 = d.op(&format!("eta_{y}"))?.scale_re(-(2.0f64.sqrt()));
                let v = duhamel(&state_pair, &o1, &o2)?;
                let lhs = real_part(v, "bh duhamel difference")? / 2.0;
                reports.push(InequalityReport::nonneg(
                    "Thm6.3",
                    m.kind,
                    Beta::Finite(beta),
                    lhs,
                    params.tolerance,
                    format!("(adag_{x}, a_{y}) - <adag_{x}><a_{y}>"),
                ));
            }
        }
        // (A*, A) >= 0 on the single copy for ladder monomials.
        let state = ThermalState::new(&m.hamiltonian, Beta::Finite(beta))?;
        for x in 0..n {
            let mut p = vec![0u32; n];
            p[x] = 1;
            let a = ladder_monomial(m, &p, &vec![false; n])?;
            let v = duhamel(&state, &a.adjoint(), &a)?;
            let lhs = real_part(v, "duhamel aa")?;
            reports.push(InequalityReport::nonneg(
                "Coro2.11",
                m.kind,
                Beta::Finite(beta),
                lhs,
                params.tolerance,
                format!("(a_{x}^*, a_{x})"),
            ));
        }
    }
    if reports.is_empty() {
        return Err(CoreError::Config("duhamel suite needs a finite beta > 0".into()));
    }
    Ok(reports)
}
