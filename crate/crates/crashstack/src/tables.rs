//! CSV and plain-text tables for reports, GLM summaries, tuning results and
//! importance. Numbers in CSV keep full precision; text tables round.

use std::fmt::Write;

use crashstack_core::cart::CpRow;
use crashstack_core::dataset::ColumnSummary;
use crashstack_core::eval::MetricsReport;
use crashstack_core::glm::{Family, FittedGlm};
use crashstack_core::tuning::CvResult;

/// Shortest decimal that reads back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub const REPORT_HEADER: [&str; 10] = [
    "model",
    "role",
    "rmse",
    "mae",
    "pct_diff_rmse",
    "pct_diff_mae",
    "abs_err_mean",
    "abs_err_sd",
    "abs_err_min",
    "abs_err_max",
];

pub fn report_rows(report: &MetricsReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.model.clone(),
                r.role.as_str().to_string(),
                num(r.rmse),
                num(r.mae),
                num(r.pct_diff_rmse),
                num(r.pct_diff_mae),
                num(r.abs_error.mean),
                num(r.abs_error.sd),
                num(r.abs_error.min),
                num(r.abs_error.max),
            ]
        })
        .collect()
}

/// Out-of-sample comparison with percent differences to two decimals.
pub fn report_text(report: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Out-of-sample performance (n = {}, baseline {})", report.n, report.baseline);
    let _ = writeln!(
        out,
        "{:<12} {:<5} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "model", "role", "rmse", "mae", "%rmse", "%mae", "abs.mean", "abs.sd", "abs.min", "abs.max"
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:<12} {:<5} {:>9.3} {:>9.3} {:>+9.2} {:>+9.2} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            r.model,
            r.role.as_str(),
            r.rmse,
            r.mae,
            r.pct_diff_rmse,
            r.pct_diff_mae,
            r.abs_error.mean,
            r.abs_error.sd,
            r.abs_error.min,
            r.abs_error.max
        );
    }
    out
}

pub const GLM_HEADER: [&str; 5] = ["term", "coefficient", "std_error", "t_stat", "marginal_effect"];

/// One row per coefficient, then `alpha`, `loglik`, `aic`, `bic` and `n` rows
/// with the value in the coefficient column.
pub fn glm_rows(model: &FittedGlm, marginal: Option<&[f64]>) -> Vec<Vec<String>> {
    let t = model.t_stats();
    let mut rows = Vec::new();
    for (k, b) in model.beta.iter().enumerate() {
        let term = if k == 0 { "intercept".to_string() } else { model.column_names[k - 1].clone() };
        let me = match marginal {
            Some(m) if k > 0 => num(m[k - 1]),
            _ => String::new(),
        };
        rows.push(vec![term, num(*b), num(model.se[k]), num(t[k]), me]);
    }
    let stat = |name: &str, v: f64| vec![name.to_string(), num(v), String::new(), String::new(), String::new()];
    if let Some(a) = model.alpha {
        let se = model.alpha_se.map(num).unwrap_or_default();
        let t = model.alpha_se.map(|s| num(a / s)).unwrap_or_default();
        rows.push(vec!["alpha".into(), num(a), se, t, String::new()]);
    }
    rows.push(stat("loglik", model.loglik));
    rows.push(stat("aic", model.aic));
    rows.push(stat("bic", model.bic));
    rows.push(stat("n", model.n as f64));
    rows
}

pub fn glm_text(model: &FittedGlm, marginal: Option<&[f64]>) -> String {
    let family = match model.family {
        Family::Poisson => "Poisson",
        Family::NegativeBinomial => "Negative binomial",
    };
    let mut out = String::new();
    let _ = writeln!(out, "{family} regression (n = {})", model.n);
    let _ = writeln!(out, "{:<16} {:>10} {:>10} {:>9} {:>10}", "term", "coef", "se", "t", "ME");
    let t = model.t_stats();
    for (k, b) in model.beta.iter().enumerate() {
        let term = if k == 0 { "intercept" } else { model.column_names[k - 1].as_str() };
        let me = match marginal {
            Some(m) if k > 0 => format!("{:.3}", m[k - 1]),
            _ => String::from("-"),
        };
        let _ = writeln!(out, "{term:<16} {b:>10.3} {:>10.3} {:>9.3} {me:>10}", model.se[k], t[k]);
    }
    if let Some(a) = model.alpha {
        let se = model.alpha_se.map_or("-".to_string(), |s| format!("{s:.3}"));
        let _ = writeln!(out, "{:<16} {a:>10.3} {se:>10}", "alpha");
    }
    let _ = writeln!(out, "log-likelihood {:.3}", model.loglik);
    let _ = writeln!(out, "AIC {:.3}  BIC {:.3}", model.aic, model.bic);
    if let Some(note) = &model.note {
        let _ = writeln!(out, "note: {note}");
    }
    if !model.converged {
        let _ = writeln!(out, "warning: not converged after {} iterations", model.iterations);
    }
    out
}

pub fn cv_header(result: &CvResult) -> Vec<String> {
    let mut h = result.param_names.clone();
    h.extend(["rmse", "rmse_se", "r2", "r2_se", "rank", "error"].map(String::from));
    h
}

pub fn cv_rows(result: &CvResult) -> Vec<Vec<String>> {
    result
        .rows
        .iter()
        .map(|r| {
            let mut row: Vec<String> = r.values.iter().map(|v| num(*v)).collect();
            row.extend([
                num(r.rmse_mean),
                num(r.rmse_se),
                num(r.r2_mean),
                num(r.r2_se),
                r.rank.map(|k| k.to_string()).unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ]);
            row
        })
        .collect()
}

pub fn importance_rows(names: &[String], values: &[f64]) -> Vec<Vec<String>> {
    names.iter().zip(values).map(|(n, v)| vec![n.clone(), num(*v)]).collect()
}

pub const CP_HEADER: [&str; 5] = ["alpha", "cp", "n_leaves", "xerror", "xstd"];

pub fn cp_rows(table: &[CpRow]) -> Vec<Vec<String>> {
    table
        .iter()
        .map(|r| vec![num(r.alpha), num(r.cp), r.n_leaves.to_string(), num(r.xerror), num(r.xstd)])
        .collect()
}

pub const SUMMARY_HEADER: [&str; 6] = ["variable", "n", "mean", "sd", "min", "max"];

pub fn summary_rows(stats: &[ColumnSummary]) -> Vec<Vec<String>> {
    stats
        .iter()
        .map(|s| vec![s.name.clone(), s.n.to_string(), num(s.mean), num(s.sd), num(s.min), num(s.max)])
        .collect()
}

pub fn pairs_rows(a: &[f64], b: &[f64]) -> Vec<Vec<String>> {
    a.iter().zip(b).map(|(x, y)| vec![num(*x), num(*y)]).collect()
}
