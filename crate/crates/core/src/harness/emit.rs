//! Text output. Delimited output is comma-separated with LF line endings
//! and full-precision numbers (shortest representation that round-trips);
//! tables are aligned markdown with 4 significant digits. Missing values
//! are written as `NA`.
//!
//! Column schemas:
//!
//! * study: `model,estimator,quantile,n,replicates,k,run,reference_theta,rmse,abias,mean,successes,failures,reference_source`
//! * trajectory: `m,k,tau,s,r,statistic,value`
//! * report: `estimator,k,quantile,level,value,error`
//! * k selection: `k,d_k,p_k,backward_gap,forward_gap,recommended`
//! * series: a single `x` column
//! * estimates: `estimator,k,level,value,raw,n_exceedances,error`
//! * MM check: `k,holds,witness_l,witness_j,lhs,rhs`

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::diagnostics::{DiagnosticPoint, KSelectionReport};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorId, ThetaEstimate};
use crate::harness::report::ApplicationReport;
use crate::harness::study::StudyResult;
use crate::mm::DkCheck;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Table,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" | "delimited" => Ok(Format::Csv),
            "table" | "markdown" | "md" => Ok(Format::Table),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

fn full(x: f64) -> String {
    format!("{x}")
}

fn full_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), full)
}

/// 4 significant digits.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn sig4_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), sig4)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn markdown_table(header: &[String], rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len(), 3])
                .max()
                .unwrap_or(3)
        })
        .collect();
    let line = |cells: &[String]| {
        let body: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        format!("| {} |\n", body.join(" | "))
    };
    let mut out = line(header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

pub fn study_csv(result: &StudyResult) -> String {
    let cfg = &result.config;
    let mut out = String::from(
        "model,estimator,quantile,n,replicates,k,run,reference_theta,rmse,abias,mean,successes,failures,reference_source\n",
    );
    for c in &result.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            cfg.model.model.name(),
            c.estimator,
            full(c.quantile),
            cfg.n,
            cfg.replicates,
            cfg.k,
            cfg.run_length(),
            full(result.reference.value),
            full_opt(c.rmse),
            full_opt(c.abias),
            full_opt(c.mean),
            c.successes,
            c.failures,
            csv_field(&result.reference.provenance),
        );
    }
    out
}

/// One row per estimator; rmse columns for every quantile, then abias.
pub fn study_table(result: &StudyResult) -> String {
    let cfg = &result.config;
    let quantiles = &cfg.quantiles;
    let mut estimators = Vec::new();
    for c in &result.cells {
        if !estimators.contains(&c.estimator) {
            estimators.push(c.estimator);
        }
    }
    let mut header = vec![cfg.model.model.name().to_string()];
    header.extend(quantiles.iter().map(|q| format!("rmse q{q}")));
    header.extend(quantiles.iter().map(|q| format!("abias q{q}")));
    let rows: Vec<Vec<String>> = estimators
        .iter()
        .map(|&e| {
            let mut row = vec![e.to_string()];
            row.extend(
                quantiles
                    .iter()
                    .map(|&q| sig4_opt(result.cell(e, q).and_then(|c| c.rmse))),
            );
            row.extend(
                quantiles
                    .iter()
                    .map(|&q| sig4_opt(result.cell(e, q).and_then(|c| c.abias))),
            );
            row
        })
        .collect();
    let mut out = format!(
        "{} (n = {}, {} replicates, k = {}, run = {}, seed = {})\n\n",
        cfg.model.model.name(),
        cfg.n,
        cfg.replicates,
        cfg.k,
        cfg.run_length(),
        cfg.master_seed
    );
    out.push_str(&markdown_table(&header, &rows));
    let _ = writeln!(
        out,
        "\nreference theta = {} ({})",
        sig4(result.reference.value),
        result.reference.provenance
    );
    for c in result.cells.iter().filter(|c| c.failures > 0) {
        let _ = writeln!(
            out,
            "{} at q{}: {} of {} replicates failed",
            c.estimator, c.quantile, c.failures, cfg.replicates
        );
    }
    out
}

pub fn trajectory_csv(points: &[DiagnosticPoint]) -> String {
    let mut out = String::from("m,k,tau,s,r,statistic,value\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.m,
            p.k,
            full(p.tau),
            full(p.s),
            p.r,
            p.statistic,
            full_opt(p.value)
        );
    }
    out
}

pub fn trajectory_table(points: &[DiagnosticPoint]) -> String {
    let header: Vec<String> = ["m", "k", "tau", "s", "r", "statistic", "value"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![
                p.m.to_string(),
                p.k.to_string(),
                full(p.tau),
                full(p.s),
                p.r.to_string(),
                p.statistic.to_string(),
                sig4_opt(p.value),
            ]
        })
        .collect();
    markdown_table(&header, &rows)
}

pub fn report_csv(report: &ApplicationReport) -> String {
    let mut out = String::from("estimator,k,quantile,level,value,error\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.estimator,
            report.k,
            full(report.quantile),
            full(report.level),
            full_opt(r.value),
            csv_field(r.error.as_deref().unwrap_or(""))
        );
    }
    out
}

pub fn report_table(report: &ApplicationReport) -> String {
    let header = vec!["estimator".to_string(), "theta".to_string()];
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| vec![r.estimator.to_string(), sig4_opt(r.value)])
        .collect();
    let mut out = format!(
        "n = {}, quantile = {}, level = {}, k = {} (runs estimator with run {})\n\n",
        report.n,
        report.quantile,
        sig4(report.level),
        report.k,
        report.k
    );
    out.push_str(&markdown_table(&header, &rows));
    out
}

pub fn k_selection_csv(report: &KSelectionReport) -> String {
    let mut out = String::from("k,d_k,p_k,backward_gap,forward_gap,recommended\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            r.d_k,
            full(r.p_k),
            full_opt(r.backward_gap),
            full(r.forward_gap),
            report.recommended == Some(r.k)
        );
    }
    out
}

pub fn k_selection_table(report: &KSelectionReport) -> String {
    let header: Vec<String> = ["k", "d_k", "p_k", "backward gap", "forward gap"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                r.d_k.to_string(),
                sig4(r.p_k),
                sig4_opt(r.backward_gap),
                sig4(r.forward_gap),
            ]
        })
        .collect();
    let mut out = markdown_table(&header, &rows);
    let _ = writeln!(
        out,
        "\nrecommended k = {} (gap threshold {}, tau = {}, s = {}, r = {})\n{}",
        report
            .recommended
            .map_or_else(|| "none".to_string(), |k| k.to_string()),
        report.threshold,
        report.tau,
        report.s,
        report.r,
        KSelectionReport::ADVISORY
    );
    out
}

pub fn series_csv(values: &[f64]) -> String {
    let mut out = String::from("x\n");
    for &v in values {
        let _ = writeln!(out, "{}", full(v));
    }
    out
}

fn opt_display<T: ToString>(x: Option<T>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn estimates_csv(rows: &[(EstimatorId, Result<ThetaEstimate>)]) -> String {
    let mut out = String::from("estimator,k,level,value,raw,n_exceedances,error\n");
    for (id, res) in rows {
        let _ = match res {
            Ok(e) => writeln!(
                out,
                "{},{},{},{},{},{},",
                id,
                opt_display(e.k),
                full_opt(e.level),
                full(e.value),
                full(e.raw),
                e.n_exceedances
            ),
            Err(err) => writeln!(out, "{id},NA,NA,NA,NA,NA,{}", csv_field(&err.to_string())),
        };
    }
    out
}

pub fn estimates_table(rows: &[(EstimatorId, Result<ThetaEstimate>)]) -> String {
    let header: Vec<String> = ["estimator", "k", "level", "theta", "raw", "exceedances"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(id, res)| match res {
            Ok(e) => vec![
                id.to_string(),
                opt_display(e.k),
                sig4_opt(e.level),
                sig4(e.value),
                sig4(e.raw),
                e.n_exceedances.to_string(),
            ],
            Err(err) => {
                let mut r = vec![id.to_string()];
                r.extend(std::iter::repeat_n("NA".to_string(), 4));
                r.push(err.to_string());
                r
            }
        })
        .collect();
    markdown_table(&header, &cells)
}

pub fn mm_check_csv(checks: &[(usize, DkCheck)]) -> String {
    let mut out = String::from("k,holds,witness_l,witness_j,lhs,rhs\n");
    for (k, c) in checks {
        let w = c.witness;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            k,
            c.holds,
            opt_display(w.map(|w| w.l)),
            opt_display(w.map(|w| w.j)),
            full_opt(w.map(|w| w.lhs)),
            full_opt(w.map(|w| w.rhs))
        );
    }
    out
}

pub fn mm_check_table(checks: &[(usize, DkCheck)], theta: f64, min_k: Option<usize>) -> String {
    let header: Vec<String> = ["k", "D(k)", "witness (l, j)", "lhs", "rhs"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|(k, c)| {
            let w = c.witness;
            vec![
                k.to_string(),
                if c.holds { "holds" } else { "fails" }.to_string(),
                w.map_or_else(|| "-".to_string(), |w| format!("({}, {})", w.l, w.j)),
                sig4_opt(w.map(|w| w.lhs)),
                sig4_opt(w.map(|w| w.rhs)),
            ]
        })
        .collect();
    let mut out = markdown_table(&header, &rows);
    let _ = writeln!(
        out,
        "\ntheta = {}, smallest k = {}",
        sig4(theta),
        opt_display(min_k)
    );
    out
}

/// Writes `contents` to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| Error::io(p, e)),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}
