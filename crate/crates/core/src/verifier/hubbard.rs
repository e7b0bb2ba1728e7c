//! Hubbard suites: b-monomial first inequalities at half filling, the
//! doubled alpha chains in both sign patterns, the b-difference and
//! hole-occupation corollaries, sector ground-state checks and the
//! zero-temperature analogues.

use rayon::prelude::*;

use crate::expectations::{
    doubled_expectation, ground_chain_raw, ground_state_of, thermal_expectation, Beta,
    DoubledFactor, ThermalState, TimedOp,
};
use crate::linalg::{hermitian_eig, Operator, C64};
use crate::models::hubbard::{restrict_sector, sector_indices};
use crate::models::{fermion_annihilators, ModelInstance};
use crate::Result;

use super::{real_part, InequalityReport, SuiteParams};

/// A finite sum of elementary tensors on the doubled space, used to expand
/// the alpha-chain factors multilinearly.
#[derive(Clone)]
pub(crate) struct TermSum {
    pub terms: Vec<(C64, Operator, Operator)>,
}

impl TermSum {
    fn new(terms: Vec<(C64, Operator, Operator)>) -> Self {
        TermSum { terms }
    }

    fn scale(mut self, c: f64) -> Self {
        for t in &mut self.terms {
            t.0 *= c;
        }
        self
    }

    fn mul(&self, other: &TermSum) -> TermSum {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (c1, l1, r1) in &self.terms {
            for (c2, l2, r2) in &other.terms {
                terms.push((c1 * c2, l1.mul(l2), r1.mul(r2)));
            }
        }
        TermSum::new(terms)
    }

    fn factor_at(&self, s: f64) -> DoubledFactor<'_> {
        DoubledFactor { s, terms: self.terms.iter().map(|(c, l, r)| (*c, l, r)).collect() }
    }
}

fn alpha_sum(m: &ModelInstance, x: usize, sigma: &str, eps: i8, dagger: bool) -> Result<TermSum> {
    let name = if dagger { format!("cdag_{sigma}_{x}") } else { format!("c_{sigma}_{x}") };
    let c = m.op(&name)?.clone();
    let gamma = m.op("gamma")?.clone();
    let one = Operator::identity(m.dim(), m.tag().clone());
    Ok(TermSum::new(vec![
        (C64::new(1.0, 0.0), c.clone(), one),
        (C64::new(eps as f64, 0.0), gamma, c),
    ]))
}

/// The Thm 7.5 chain factor
/// `(-1)^{mu(x)} alpha_{x up; eps}^{#} (gamma_up (x) gamma_up)
///  alpha_{x dn; eps'}^{#bar}`.
fn d_factor(m: &ModelInstance, x: usize, eps: i8, eps_dn: i8, dagger: bool) -> Result<TermSum> {
    let classes = m.spec.bipartition.as_ref().expect("hubbard has a bipartition");
    let sign = if classes[x] == 0 { 1.0 } else { -1.0 };
    let up = alpha_sum(m, x, "up", eps, dagger)?;
    let gg = TermSum::new(vec![(
        C64::new(1.0, 0.0),
        m.op("gamma_up")?.clone(),
        m.op("gamma_up")?.clone(),
    )]);
    let dn = alpha_sum(m, x, "dn", eps_dn, !dagger)?;
    Ok(up.mul(&gg).mul(&dn).scale(sign))
}

/// First inequality: b-monomial chains, plus the half-filling identity the
/// symmetric interaction enforces.
pub fn griffiths1(m: &ModelInstance, params: &SuiteParams) -> Result<Vec<InequalityReport>> {
    let n = m.spec.n_sites();
    let max_len = if n <= 2 { 3 } else { 2 };
    let mut gens: Vec<(String, Operator)> = Vec::new();
    for x in 0..n {
        gens.push((format!("b_{x}"), m.op(&format!("b_{x}"))?.clone()));
        gens.push((format!("bdag_{x}"), m.op(&format!("bdag_{x}"))?.clone()));
    }
    let mut chains: Vec<Vec<usize>> = vec![vec![]];
    let mut all = Vec::new();
    for _ in 0..max_len {
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
        if beta == 0.0 {
            continue;
        }
        let state = ThermalState::new(&m.hamiltonian, Beta::Finite(beta))?;
        // Half filling: <n_x> = 1 exactly at the symmetric coupling.
        for x in 0..n {
            let nx = m.op(&format!("n_{x}"))?;
            let v = real_part(
                thermal_expectation(&state, &[TimedOp { op: nx, s: 0.0 }])?,
                "half filling",
            )?;
            reports.push(InequalityReport::identity(
                "Eq7.HalfFilling",
                m.kind,
                Beta::Finite(beta),
                v - 1.0,
                1e-10,
                format!("<n_{x}>"),
            ));
        }
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
                let lhs = real_part(v, "hubbard first inequality")?;
                let daggers = chain.iter().filter(|&&g| g % 2 == 1).count();
                let witness =
                    chain.iter().map(|&g| gens[g].0.as_str()).collect::<Vec<_>>().join(" ");
                let mut rep = InequalityReport::nonneg(
                    "Thm7.4",
                    m.kind,
                    Beta::Finite(beta),
                    lhs,
                    params.tolerance,
                    witness,
                );
                if 2 * daggers != chain.len() && lhs.abs() <= params.tolerance {
                    rep = rep.with_note("trivially-zero");
                }
                Ok(rep)
            })
            .collect();
        reports.extend(chunk?);
    }
    Ok(reports)
}

/// Second inequality: Thm 7.5 alpha chains in both sign patterns, the
/// Coro 7.9 b-difference chains, and the Coro 7.12 hole-occupation pair.
pub fn griffiths2(m: &ModelInstance, params: &SuiteParams) -> Result<Vec<InequalityReport>> {
    let n = m.spec.n_sites();
    let one = Operator::identity(m.dim(), m.tag().clone());
    let p1 = C64::new(1.0, 0.0);

    // Chain site lists: all pairs for 2 sites, nearest pairs for 4.
    let singles: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
    let mut pairs: Vec<Vec<usize>> = Vec::new();
    if n <= 2 {
        for x in 0..n {
            for y in 0..n {
                pairs.push(vec![x, y]);
            }
        }
    } else {
        pairs.push(vec![0, 1]);
        pairs.push(vec![1, 2]);
    }

    let mut reports = Vec::new();
    for &beta in &params.finite_betas() {
        if beta == 0.0 {
            continue;
        }
        let state = ThermalState::new(&m.hamiltonian, Beta::Finite(beta))?;

        // Thm 7.5, patterns eps' = eps (first display) and eps' = -eps
        // (second display).
        let mut cases: Vec<(Vec<usize>, i8, bool, bool)> = Vec::new();
        for sites in singles.iter().chain(pairs.iter()) {
            for eps in [1i8, -1] {
                for dagger in [false, true] {
                    for flip in [false, true] {
                        cases.push((sites.clone(), eps, dagger, flip));
                    }
                }
            }
        }
        let chunk: Result<Vec<InequalityReport>> = cases
            .par_iter()
            .map(|(sites, eps, dagger, flip)| {
                let k = sites.len();
                let eps_dn = if *flip { -eps } else { *eps };
                let sums: Vec<TermSum> = sites
                    .iter()
                    .map(|&x| d_factor(m, x, *eps, eps_dn, *dagger))
                    .collect::<Result<_>>()?;
                let chain: Vec<DoubledFactor> = sums
                    .iter()
                    .enumerate()
                    .map(|(j, t)| t.factor_at(beta * (j + 1) as f64 / (k + 2) as f64))
                    .collect();
                let v = doubled_expectation(&state, &chain)?;
                let lhs = real_part(v, "hubbard alpha chain")?;
                let theorem = "Thm7.5";
                let witness = format!(
                    "sites={sites:?} eps={eps:+} pattern={} dag={}",
                    if *flip { "opposed" } else { "aligned" },
                    *dagger as u8
                );
                Ok(InequalityReport::nonneg(
                    theorem,
                    m.kind,
                    Beta::Finite(beta),
                    lhs,
                    params.tolerance,
                    witness,
                ))
            })
            .collect();
        reports.extend(chunk?);

        // Coro 7.9: chains of b^{#} (x) gamma_up - gamma_up (x) b^{#}.
        let gamma_up = m.op("gamma_up")?.clone();
        for sites in singles.iter().chain(pairs.iter()) {
            for dagger in [false, true] {
                let k = sites.len();
                let sums: Vec<TermSum> = sites
                    .iter()
                    .map(|&x| {
                        let b = if dagger {
                            m.op(&format!("bdag_{x}"))?.clone()
                        } else {
                            m.op(&format!("b_{x}"))?.clone()
                        };
                        Ok(TermSum::new(vec![
                            (p1, b.clone(), gamma_up.clone()),
                            (-p1, gamma_up.clone(), b),
                        ]))
                    })
                    .collect::<Result<_>>()?;
                let chain: Vec<DoubledFactor> = sums
                    .iter()
                    .enumerate()
                    .map(|(j, t)| t.factor_at(beta * (j + 1) as f64 / (k + 2) as f64))
                    .collect();
                let v = doubled_expectation(&state, &chain)?;
                let lhs = real_part(v, "b difference chain")?;
                reports.push(InequalityReport::nonneg(
                    "Coro7.9",
                    m.kind,
                    Beta::Finite(beta),
                    lhs,
                    params.tolerance,
                    format!("sites={sites:?} dag={}", dagger as u8),
                ));
            }
        }

        // Coro 7.12: <<prod A_+>> >= <<prod A_->> >= 0 for the
        // hole-occupation pair.
        for sites in singles.iter().chain(pairs.iter()) {
            let k = sites.len();
            let mut plus_sums = Vec::new();
            let mut minus_sums = Vec::new();
            for &x in sites {
                let nbar = m.op(&format!("nbar_up_{x}"))?.clone();
                let ndn = m.op(&format!("n_dn_{x}"))?.clone();
                let prod = nbar.mul(&ndn);
                plus_sums.push(TermSum::new(vec![
                    (p1, prod.clone(), one.clone()),
                    (p1, one.clone(), prod),
                ]));
                minus_sums.push(TermSum::new(vec![
                    (p1, nbar.clone(), ndn.clone()),
                    (p1, ndn, nbar),
                ]));
            }
            let times: Vec<f64> =
                (0..k).map(|j| beta * (j + 1) as f64 / (k + 2) as f64).collect();
            let plus_chain: Vec<DoubledFactor> =
                plus_sums.iter().zip(&times).map(|(t, &s)| t.factor_at(s)).collect();
            let minus_chain: Vec<DoubledFactor> =
                minus_sums.iter().zip(&times).map(|(t, &s)| t.factor_at(s)).collect();
            let vp = real_part(doubled_expectation(&state, &plus_chain)?, "EQN plus")?;
            let vm = real_part(doubled_expectation(&state, &minus_chain)?, "EQN minus")?;
            reports.push(InequalityReport::nonneg(
                "Coro7.12",
                m.kind,
                Beta::Finite(beta),
                vp - vm,
                params.tolerance,
                format!("sites={sites:?} upper bound"),
            ));
            reports.push(InequalityReport::nonneg(
                "Coro7.12",
                m.kind,
                Beta::Finite(beta),
                vm,
                params.tolerance,
                format!("sites={sites:?} lower bound"),
            ));
        }
    }
    Ok(reports)
}

/// Generalized chains: the two-sided Coro 7.10/7.11 sandwich.
pub fn generalized(m: &ModelInstance, params: &SuiteParams) -> Result<Vec<InequalityReport>> {
    let n = m.spec.n_sites();
    let classes = m.spec.bipartition.as_ref().expect("hubbard has a bipartition").clone();
    let p1 = C64::new(1.0, 0.0);
    let gamma_up = m.op("gamma_up")?.clone();
    let gamma_dn = m.op("gamma_dn")?.clone();

    let mut site_pairs: Vec<(usize, usize)> = Vec::new();
    if n <= 2 {
        for x in 0..n {
            for y in 0..n {
                site_pairs.push((x, y));
            }
        }
    } else {
        site_pairs.push((0, 1));
        site_pairs.push((2, 3));
    }

    let mut reports = Vec::new();
    for &beta in &params.finite_betas() {
        if beta == 0.0 {
            continue;
        }
        let state = ThermalState::new(&m.hamiltonian, Beta::Finite(beta))?;
        for &(x, y) in &site_pairs {
            for daggers in [[false, true], [true, false]] {
                // A-factor: b^{#} (x) gamma_up - gamma_up (x) b^{#}.
                let a_sum = |site: usize, dag: bool| -> Result<TermSum> {
                    let b = if dag {
                        m.op(&format!("bdag_{site}"))?.clone()
                    } else {
                        m.op(&format!("b_{site}"))?.clone()
                    };
                    Ok(TermSum::new(vec![
                        (p1, b.clone(), gamma_up.clone()),
                        (-p1, gamma_up.clone(), b),
                    ]))
                };
                // K-factor: (-1)^{mu} [c^{#bar}_up gamma_dn (x) gamma_up
                // c^{#}_dn - gamma_dn c^{#}_dn (x) c^{#bar}_up gamma_up].
                let k_sum = |site: usize, dag: bool| -> Result<TermSum> {
                    let sign = if classes[site] == 0 { 1.0 } else { -1.0 };
                    let cu = if dag {
                        m.op(&format!("c_up_{site}"))?.clone()
                    } else {
                        m.op(&format!("cdag_up_{site}"))?.clone()
                    };
                    let cd = if dag {
                        m.op(&format!("cdag_dn_{site}"))?.clone()
                    } else {
                        m.op(&format!("c_dn_{site}"))?.clone()
                    };
                    Ok(TermSum::new(vec![
                        (p1 * sign, cu.mul(&gamma_dn), gamma_up.mul(&cd)),
                        (-p1 * sign, gamma_dn.mul(&cd), cu.mul(&gamma_up)),
                    ]))
                };
                let times = [beta / 4.0, beta / 2.0];
                let a_sums = [a_sum(x, daggers[0])?, a_sum(y, daggers[1])?];
                let k_sums = [k_sum(x, daggers[0])?, k_sum(y, daggers[1])?];
                let a_chain: Vec<DoubledFactor> =
                    a_sums.iter().zip(times.iter()).map(|(t, &s)| t.factor_at(s)).collect();
                let k_chain: Vec<DoubledFactor> =
                    k_sums.iter().zip(times.iter()).map(|(t, &s)| t.factor_at(s)).collect();
                let va = real_part(doubled_expectation(&state, &a_chain)?, "GGG upper")?;
                let vk = real_part(doubled_expectation(&state, &k_chain)?, "GGG middle")?;
                reports.push(InequalityReport::nonneg(
                    "Coro7.11",
                    m.kind,
                    Beta::Finite(beta),
                    va - vk,
                    params.tolerance,
                    format!("sites=({x},{y}) dags={daggers:?} upper"),
                ));
                reports.push(InequalityReport::nonneg(
                    "Coro7.10",
                    m.kind,
                    Beta::Finite(beta),
                    vk,
                    params.tolerance,
                    format!("sites=({x},{y}) dags={daggers:?} middle"),
                ));
            }
        }
    }
    Ok(reports)
}

/// Sector ground-state suite: uniqueness with a gap in every half-filled
/// spin sector, the zero-temperature first and second inequalities on the
/// sector ground state, and the energy comparison against the free part.
pub fn ground_state_suite(m: &ModelInstance, params: &SuiteParams) -> Result<Vec<InequalityReport>> {
    let n = m.spec.n_sites();
    let mut reports = Vec::new();

    // Thm 7.13: each M-sector at half filling has a unique ground state.
    // The uniqueness rests on the strict interaction (a connected bipartite
    // graph at half filling with U > 0); at U = 0 a degenerate
    // single-particle shell can and does produce degenerate sectors, so the
    // check is gated on the hypothesis and the zero-temperature chains are
    // skipped for degenerate sectors, where they are not defined.
    let full_spectral = hermitian_eig(&m.hamiltonian)?;
    for two_sz in (-(n as i64)..=n as i64).step_by(2) {
        let sector = restrict_sector(m, n, two_sz)?;
        let spec = hermitian_eig(&sector.hamiltonian)?;
        let gap = if spec.dim() > 1 { spec.eigenvalues[1] - spec.eigenvalues[0] } else { f64::INFINITY };
        let degenerate = gap <= 1e-8;
        // One-dimensional sectors report a capped gap so the JSON stays
        // finite.
        let gap_reported = gap.min(1e6);
        if m.spec.u_hubbard > 0.0 {
            reports.push(InequalityReport::nonneg(
                "Thm7.13",
                m.kind,
                Beta::Infinite,
                gap_reported - 1e-8,
                0.0,
                format!("sector 2Sz={two_sz}, gap {gap:.3e}"),
            ));
        } else {
            reports.push(
                InequalityReport::nonneg(
                    "Thm7.13",
                    m.kind,
                    Beta::Infinite,
                    gap_reported,
                    f64::MAX,
                    format!("sector 2Sz={two_sz}, gap {gap:.3e} (uniqueness needs U > 0)"),
                )
                .with_note("requires-positive-U"),
            );
        }
        if degenerate {
            reports.push(
                InequalityReport::nonneg(
                    "Thm7.14",
                    m.kind,
                    Beta::Infinite,
                    0.0,
                    f64::MAX,
                    format!("sector 2Sz={two_sz} skipped: degenerate ground state"),
                )
                .with_note("degenerate-ground-state"),
            );
            continue;
        }

        // Embed the sector ground state into the full space.
        let idx = sector_indices(m, n, two_sz)?;
        let gs = ground_state_of(&spec)?;
        let mut psi = ndarray::Array1::<C64>::zeros(m.dim());
        for (i, &g) in idx.iter().enumerate() {
            psi[g] = gs.vector[i];
        }
        let psi_eig = full_spectral.eigenvectors.t().mapv(|x| x.conj()).dot(&psi);

        // Thm 7.14: zero-temperature first inequality on balanced b-chains.
        for x in 0..n {
            for y in 0..n {
                for order in [true, false] {
                    let (o1, o2) = if order {
                        (m.op(&format!("bdag_{x}"))?, m.op(&format!("b_{y}"))?)
                    } else {
                        (m.op(&format!("b_{x}"))?, m.op(&format!("bdag_{y}"))?)
                    };
                    let ops = vec![
                        full_spectral.to_eigenbasis(o1),
                        full_spectral.to_eigenbasis(o2),
                    ];
                    let v = ground_chain_raw(&full_spectral, &psi_eig, &ops, &[0.1, 0.4], gs.energy);
                    let lhs = real_part(v, "sector chain")?;
                    reports.push(InequalityReport::nonneg(
                        "Thm7.14",
                        m.kind,
                        Beta::Infinite,
                        lhs,
                        params.tolerance,
                        format!("2Sz={two_sz} {} b_{y}{}", if order { format!("bdag_{x}") } else { format!("b_{x}") }, if order { "" } else { "+" }),
                    ));
                }
            }
        }

        // Thm 7.15: zero-temperature doubled chains, factorized over the
        // product ground state psi_M (x) psi_M.
        for x in 0..n.min(2) {
            for eps in [1i8, -1] {
                for flip in [false, true] {
                    let eps_dn = if flip { -eps } else { eps };
                    let sum = d_factor(m, x, eps, eps_dn, false)?;
                    let mut total = C64::new(0.0, 0.0);
                    for (c, l, r) in &sum.terms {
                        let lv = ground_chain_raw(
                            &full_spectral,
                            &psi_eig,
                            &[full_spectral.to_eigenbasis(l)],
                            &[0.2],
                            gs.energy,
                        );
                        let rv = ground_chain_raw(
                            &full_spectral,
                            &psi_eig,
                            &[full_spectral.to_eigenbasis(r)],
                            &[0.2],
                            gs.energy,
                        );
                        total += c * lv * rv;
                    }
                    let lhs = real_part(total, "sector doubled chain")?;
                    reports.push(InequalityReport::nonneg(
                        "Thm7.15",
                        m.kind,
                        Beta::Infinite,
                        lhs,
                        params.tolerance,
                        format!("2Sz={two_sz} x={x} eps={eps:+} pattern={}", if flip { "opposed" } else { "aligned" }),
                    ));
                }
            }
        }
    }

    // Summary for the abstract zero-temperature reflection-positive form
    // that the sector chains instantiate.
    let worst_rp_inf = reports
        .iter()
        .filter(|r| (r.theorem_id == "Thm7.14" || r.theorem_id == "Thm7.15") && r.note.is_none())
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min);
    if worst_rp_inf.is_finite() {
        reports.push(InequalityReport::sweep_summary(
            "Thm3.14",
            m.kind,
            worst_rp_inf,
            params.tolerance,
            "worst zero-temperature doubled-chain margin".into(),
        ));
    }

    // Thm 8.2: E <= E0 for the attractive form H^ = L(T) + R(T) - V.
    let u = m.unitary("Uhp")?;
    let hhat = u.mul(&m.hamiltonian).mul(&u.adjoint());
    let ftag = crate::linalg::BasisTag::new("hubbard-f");
    let c_single = fermion_annihilators(n, &ftag);
    let mut t_single = Operator::zeros(1 << n, ftag.clone());
    for &(x, y) in &m.spec.edges {
        let t = m.spec.coupling(x, y);
        let hop = c_single[x]
            .adjoint()
            .mul(&c_single[y])
            .add(&c_single[y].adjoint().mul(&c_single[x]));
        t_single = t_single.sub(&hop.scale_re(t));
    }
    let h0 = crate::doubling::left_mult(&t_single)
        .add(&crate::doubling::right_mult_raw(&t_single));
    let e = hermitian_eig(&hhat)?.eigenvalues[0];
    let e0 = hermitian_eig(&h0)?.eigenvalues[0];
    reports.push(InequalityReport::nonneg(
        "Thm8.2",
        m.kind,
        Beta::Infinite,
        e0 - e,
        params.tolerance,
        format!("E = {e:.6}, E0 = {e0:.6}"),
    ));
    Ok(reports)
}
