//! The registry is the machine-readable claim map: every theorem id it
//! lists must be produced by at least one executable suite instance.

use std::collections::BTreeSet;

use cgriff_core::expectations::Beta;
use cgriff_core::models::{bose_hubbard, hubbard, ising, rotor, LatticeSpec, ModelInstance};
use cgriff_core::verifier::{run_suite, SuiteParams, REGISTRY};

fn battery() -> Vec<ModelInstance> {
    let mut instances = Vec::new();
    // Single-site Ising exercises the one-site doubled claims.
    let mut sp = LatticeSpec::new(1);
    sp.mu = vec![0.3];
    sp.lambda = vec![0.5];
    instances.push(ising::build(&sp).unwrap());
    // Two-site Ising with everything on.
    let mut sp = LatticeSpec::new(2);
    sp.set_coupling(0, 1, 0.8);
    sp.mu = vec![0.2, 0.3];
    sp.lambda = vec![0.4, 0.5];
    instances.push(ising::build(&sp).unwrap());
    // Rotor.
    let mut sp = LatticeSpec::chain(2, 0.7);
    sp.u_site = vec![1.0, 1.0];
    instances.push(rotor::build(&sp, 2).unwrap());
    // Bose-Hubbard, interacting and free.
    let mut sp = LatticeSpec::chain(2, 0.8);
    sp.u_site = vec![1.0, 1.0];
    sp.lambda = vec![0.3, 0.3];
    instances.push(bose_hubbard::build(&sp, 3).unwrap());
    let mut sp = LatticeSpec::chain(2, 0.3);
    sp.u_site = vec![0.0, 0.0];
    sp.mu_chemical = -0.9;
    instances.push(bose_hubbard::build(&sp, 3).unwrap());
    // Hubbard.
    let mut sp = LatticeSpec::chain(2, 1.0);
    sp.u_hubbard = 1.0;
    instances.push(hubbard::build(&sp).unwrap());
    instances
}

#[test]
fn every_registry_id_is_emitted_by_some_suite() {
    let params = SuiteParams {
        betas: vec![Beta::Finite(0.5), Beta::Finite(1.0)],
        ..SuiteParams::default()
    };
    let mut emitted: BTreeSet<String> = BTreeSet::new();
    for m in battery() {
        for info in REGISTRY {
            if !info.models.contains(&m.kind) || info.name == "counterexample" {
                continue;
            }
            if let Ok(reports) = run_suite(info.name, &m, &params) {
                for r in reports {
                    emitted.insert(r.theorem_id);
                }
            }
        }
    }
    // Counterexample suites run on deliberately broken instances.
    let hostile = SuiteParams { counterexample: true, ..params.clone() };
    let m = ising::build(&LatticeSpec::chain(2, -1.0)).unwrap();
    for r in run_suite("counterexample", &m, &hostile).unwrap() {
        emitted.insert(r.theorem_id);
    }
    let mut sp = LatticeSpec::chain(2, -1.0);
    sp.u_site = vec![1.0, 1.0];
    let m = rotor::build(&sp, 2).unwrap();
    for r in run_suite("counterexample", &m, &hostile).unwrap() {
        emitted.insert(r.theorem_id);
    }

    let mut missing = Vec::new();
    for info in REGISTRY {
        for id in info.theorem_ids {
            if !emitted.contains(*id) {
                missing.push(format!("{} (suite {})", id, info.name));
            }
        }
    }
    assert!(missing.is_empty(), "registry ids never emitted: {missing:?}");
    // And the emitted set is not padded with ids outside the registry.
    let declared: BTreeSet<&str> =
        REGISTRY.iter().flat_map(|s| s.theorem_ids.iter().copied()).collect();
    for id in &emitted {
        assert!(declared.contains(id.as_str()), "undeclared theorem id `{id}` emitted");
    }
}
