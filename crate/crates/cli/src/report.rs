//! Report rendering: a versioned JSON document and a flat CSV, encoding
//! identical record sets. Given the same config and seed the JSON output is
//! byte-identical up to the `runtime_ms` fields.

use cgriff_core::verifier::InequalityReport;
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Serialize)]
struct JsonReport<'a> {
    schema: u32,
    meta: Meta<'a>,
    records: Vec<Record<'a>>,
}

#[derive(Serialize)]
struct Meta<'a> {
    model: &'a str,
    sites: usize,
    seed: u64,
    tolerance: f64,
    suites: &'a [String],
    betas: Vec<String>,
}

#[derive(Serialize)]
struct Record<'a> {
    theorem_id: &'a str,
    model: &'a str,
    beta: &'a str,
    lhs: f64,
    margin: f64,
    passed: bool,
    witness: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: &'a Option<String>,
    runtime_ms: f64,
}

pub fn to_json(cfg: &RunConfig, records: &[InequalityReport]) -> String {
    let doc = JsonReport {
        schema: 1,
        meta: Meta {
            model: &cfg.kind,
            sites: cfg.sites,
            seed: cfg.seed,
            tolerance: cfg.tolerance,
            suites: &cfg.suites,
            betas: cfg.betas.iter().map(|b| b.to_string()).collect(),
        },
        records: records
            .iter()
            .map(|r| Record {
                theorem_id: &r.theorem_id,
                model: &r.model,
                beta: &r.beta,
                lhs: r.lhs,
                margin: r.margin,
                passed: r.passed,
                witness: &r.witness,
                note: &r.note,
                runtime_ms: r.runtime_ms,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("report serialization")
}

pub fn to_csv(records: &[InequalityReport]) -> String {
    let mut out = String::from("theorem_id,model,beta,lhs,margin,passed,witness\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{:e},{:e},{},{}\n",
            r.theorem_id,
            r.model,
            r.beta,
            r.lhs,
            r.margin,
            r.passed,
            csv_escape(&r.witness)
        ));
    }
    out
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
