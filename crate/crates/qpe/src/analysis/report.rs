//! Plain-text report serialization: comma-separated tables with fixed
//! header rows, plus a structured metadata sidecar. All output is a pure
//! function of the inputs (no timestamps, hostnames, or paths), so repeated
//! runs are byte-identical.

use crate::analysis::{ClaimRow, PrecisionReport};

fn fmt_f(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    format!("{x:.12e}")
}

/// The discrepancy table: one row per (claim, parameter point).
pub fn claims_csv(rows: &[ClaimRow]) -> String {
    let mut out =
        String::from("formula_id,params,oracle,empirical,ci_low,ci_high,paper_value,verdict\n");
    for r in rows {
        let (emp, lo, hi) = match (r.empirical, r.ci) {
            (Some(e), Some((lo, hi))) => (fmt_f(e), fmt_f(lo), fmt_f(hi)),
            (Some(e), None) => (fmt_f(e), String::new(), String::new()),
            _ => (String::new(), String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.formula_id,
            r.params,
            fmt_f(r.oracle),
            emp,
            lo,
            hi,
            fmt_f(r.paper_value),
            r.verdict
        ));
    }
    out
}

const PRECISION_HEADER: &str = "strategy,basis,attack,d,n,nu,trials,completed,component,\
phi_true,phi_mean,rmse,crb,bound_id,bound_value,flags";

fn precision_rows(prefix: &str, r: &PrecisionReport, out: &mut String) {
    for j in 0..r.true_phases.len() {
        let crb = r.crb.as_ref().map(|c| fmt_f(c[j])).unwrap_or_default();
        let (bound_id, bound_value) = r
            .published_bound
            .as_ref()
            .map(|(id, v)| (id.clone(), fmt_f(v[j])))
            .unwrap_or_default();
        out.push_str(&format!(
            "{prefix}{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.strategy,
            r.basis,
            r.attack,
            r.d,
            r.n,
            r.nu,
            r.trials,
            r.completed,
            j + 1,
            fmt_f(r.true_phases[j]),
            fmt_f(r.mean_estimate[j]),
            fmt_f(r.rmse[j]),
            crb,
            bound_id,
            bound_value,
            r.flags.join(";"),
        ));
    }
}

/// Precision experiment results, one row per parameter component.
pub fn precision_csv(reports: &[PrecisionReport]) -> String {
    let mut out = String::from(PRECISION_HEADER);
    out.push('\n');
    for r in reports {
        precision_rows("", r, &mut out);
    }
    out
}

/// Sweep results: the varied axis value in front of the precision columns.
pub fn sweep_csv(axis: &str, points: &[(f64, PrecisionReport)]) -> String {
    let mut out = format!("{axis},{PRECISION_HEADER}\n");
    for (value, r) in points {
        precision_rows(&format!("{},", fmt_f(*value)), r, &mut out);
    }
    out
}

/// Structured-text metadata sidecar (key = "value" lines).
pub fn metadata_sidecar(entries: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        out.push_str(&format!("{k} = \"{v}\"\n"));
    }
    out
}
