//! The four subcommands: construct, certify, solve, sweep. Each renders
//! its result to a string in the configured format; writing and
//! comparison happen in `main`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use indosc_core::certify::{certify_all, CertificationReport, CheckStatus, Verdict};
use indosc_core::solve::{SolutionGrid, Sample, Solver};
use indosc_core::{admissible_epsilon, validate_params, ExampleParams, Perturbation};

use crate::config::{OutputFormat, RunConfig};
use crate::report::{config_meta, csv_preamble, fmt_f64, fmt_opt, render_json, run_meta};

/// A rendered report plus the success flag that drives the exit status.
#[derive(Debug)]
pub struct CmdOutput {
    pub content: String,
    pub ok: bool,
}

fn status_label(status: CheckStatus) -> &'static str {
    match status {
        CheckStatus::Ok => "ok",
        CheckStatus::Failed => "failed",
        CheckStatus::OutOfPrecision => "out-of-precision",
    }
}

fn verdict_label(verdict: &Verdict) -> &'static str {
    match verdict {
        Verdict::Certified => "certified",
        Verdict::Failed(_) => "failed",
        Verdict::OutOfPrecision(_) => "out-of-precision",
    }
}

fn verdict_reasons(verdict: &Verdict) -> &[String] {
    match verdict {
        Verdict::Certified => &[],
        Verdict::Failed(reasons) | Verdict::OutOfPrecision(reasons) => reasons,
    }
}

/// Validates the configuration and fails with the complete violation
/// list, never just the first.
fn validated(cfg: &RunConfig) -> Result<(Perturbation, indosc_core::CoefficientP)> {
    let p = cfg.p_spec.build(cfg.params.s0)?;
    if let Err(errs) = validate_params(&cfg.params, &p) {
        let list: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        bail!("invalid parameters:\n  {}", list.join("\n  "));
    }
    Ok((Perturbation::new(cfg.params), p))
}

/// Clamps the requested index range to the constructed indices
/// `m >= m1` (below `m1` the forcing is identically zero).
fn effective_range(cfg: &RunConfig, pert: &Perturbation) -> Result<(u32, u32)> {
    let m_lo = cfg.m_lo.max(pert.switch.m1);
    if cfg.m_hi < m_lo {
        bail!(
            "m-hi ({}) is below the first constructed index m1 = {}",
            cfg.m_hi,
            pert.switch.m1
        );
    }
    Ok((m_lo, cfg.m_hi))
}

/// Summary of the construction: `m1`, the admissible epsilon, the
/// underflow horizon and the first `pairs` amplitude pairs.
pub fn cmd_construct(cfg: &RunConfig, pairs: u32) -> Result<CmdOutput> {
    let (pert, _p) = validated(cfg)?;
    let admissible = admissible_epsilon(cfg.params.alpha, cfg.params.beta).ok();
    let horizon = pert.underflow_horizon();
    let m1 = pert.switch.m1;

    let amplitudes: Vec<(u32, Option<f64>, Option<f64>)> = (m1..m1 + pairs)
        .map(|m| (m, pert.c(m).ok(), pert.d(m).ok()))
        .collect();

    let content = match cfg.format {
        OutputFormat::Json => {
            let rows: Vec<Value> = amplitudes
                .iter()
                .map(|(m, c, d)| json!({ "m": m, "c": c, "d": d }))
                .collect();
            render_json(&json!({
                "run": run_meta(),
                "meta": config_meta(cfg),
                "m1": m1,
                "epsilon_admissible": admissible,
                "underflow_horizon": horizon,
                "amplitudes": rows,
            }))
        }
        OutputFormat::Csv => {
            let mut out = csv_preamble(cfg);
            let _ = writeln!(out, "# m1: {m1}");
            let _ = writeln!(out, "# epsilon_admissible: {}", fmt_opt(admissible));
            let _ = writeln!(out, "# underflow_horizon: {horizon}");
            let _ = writeln!(out, "m,c,d");
            for (m, c, d) in &amplitudes {
                let _ = writeln!(out, "{m},{},{}", fmt_opt(*c), fmt_opt(*d));
            }
            out
        }
    };
    Ok(CmdOutput { content, ok: true })
}

fn certify_json(cfg: &RunConfig, report: &CertificationReport) -> String {
    let mut meta = config_meta(cfg);
    let map = meta.as_object_mut().expect("meta is an object");
    map.insert("m0".into(), json!(report.m0));
    map.insert("m1".into(), json!(report.m1));
    map.insert(
        "epsilon_admissible".into(),
        json!(report.epsilon_admissible),
    );
    map.insert("warnings".into(), json!(report.warnings));
    render_json(&json!({
        "run": run_meta(),
        "meta": meta,
        "per_m": report.per_m,
        "verdict": report.verdict,
    }))
}

fn certify_csv(cfg: &RunConfig, report: &CertificationReport) -> String {
    let mut out = csv_preamble(cfg);
    let _ = writeln!(out, "# m0: {}", report.m0);
    let _ = writeln!(out, "# m1: {}", report.m1);
    let _ = writeln!(
        out,
        "# epsilon_admissible: {}",
        fmt_opt(report.epsilon_admissible)
    );
    for w in &report.warnings {
        let _ = writeln!(out, "# warning: {w}");
    }
    let _ = writeln!(
        out,
        "m,margin_I,margin_II,margin_13,margin_14,margin_est11,margin_est12,status"
    );
    for r in &report.per_m {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.m,
            fmt_opt(r.margin_i),
            fmt_opt(r.margin_ii),
            fmt_opt(r.margin_13),
            fmt_opt(r.margin_14),
            fmt_opt(r.margin_est11),
            fmt_opt(r.margin_est12),
            status_label(r.status)
        );
    }
    let _ = writeln!(out, "# verdict: {}", verdict_label(&report.verdict));
    for reason in verdict_reasons(&report.verdict) {
        let _ = writeln!(out, "# reason: {reason}");
    }
    out
}

/// Runs every hypothesis check over the index range; exit status 0 iff
/// the verdict is certified. The report is written either way.
pub fn cmd_certify(cfg: &RunConfig) -> Result<CmdOutput> {
    let p = cfg.p_spec.build(cfg.params.s0)?;
    let pert = Perturbation::new(cfg.params);
    let (m_lo, m_hi) = effective_range(cfg, &pert)?;
    let report = certify_all(&pert, &p, m_lo, m_hi, &cfg.tol);
    let content = match cfg.format {
        OutputFormat::Json => certify_json(cfg, &report),
        OutputFormat::Csv => certify_csv(cfg, &report),
    };
    Ok(CmdOutput {
        content,
        ok: report.verdict.is_certified(),
    })
}

const GRID_HEADER: &str = "s,z,h,residual_ode1,residual_class0,identity_defect,envelope";

fn solve_csv(cfg: &RunConfig, grid: &SolutionGrid) -> String {
    let mut out = csv_preamble(cfg);
    let _ = writeln!(out, "{GRID_HEADER}");
    for r in &grid.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.s),
            fmt_f64(r.z),
            fmt_f64(r.h),
            fmt_f64(r.residual_ode1),
            fmt_f64(r.residual_class0),
            fmt_f64(r.identity_defect),
            fmt_f64(r.envelope)
        );
    }
    out
}

fn solve_json(cfg: &RunConfig, grid: &SolutionGrid) -> String {
    render_json(&json!({
        "run": run_meta(),
        "meta": config_meta(cfg),
        "samples": grid.samples,
        "sign_certificates": grid.sign_certificates,
        "decay_envelope": grid.decay_envelope,
    }))
}

/// The degenerate diagnostic grid for `q = 0`: the solution formula then
/// gives `z = 0` and `h = 0` identically, so every column except `s`
/// vanishes. Mirrors the sample geometry of the real grid.
fn zero_q_grid(params: &ExampleParams, m_lo: u32, m_hi: u32) -> SolutionGrid {
    let mut points: Vec<f64> = Vec::new();
    for j in 2 * m_lo..2 * m_hi + 2 {
        let a = j as f64 * PI;
        for i in 1..=64 {
            points.push(a + i as f64 * PI / 65.0);
        }
    }
    for j in 2 * m_lo..=2 * m_hi + 2 {
        let a = j as f64 * PI;
        let lo = a - PI / 100.0;
        if lo > params.s0 {
            points.push(lo);
        }
        points.push(a + PI / 100.0);
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    SolutionGrid {
        samples: points
            .into_iter()
            .map(|s| Sample {
                s,
                z: 0.0,
                h: 0.0,
                residual_ode1: 0.0,
                residual_class0: 0.0,
                identity_defect: 0.0,
                envelope: 0.0,
            })
            .collect(),
        sign_certificates: Vec::new(),
        decay_envelope: Vec::new(),
    }
}

/// Evaluates `z`, `h`, residuals and envelopes on the deterministic
/// sample grid.
pub fn cmd_solve(cfg: &RunConfig, zero_q: bool) -> Result<CmdOutput> {
    let grid = if zero_q {
        let pert = Perturbation::new(cfg.params);
        let (m_lo, m_hi) = effective_range(cfg, &pert)?;
        zero_q_grid(&cfg.params, m_lo, m_hi)
    } else {
        let (pert, p) = validated(cfg)?;
        let (m_lo, m_hi) = effective_range(cfg, &pert)?;
        let solver = Solver::new(&pert, &p, cfg.tol)?;
        solver.grid(m_lo, m_hi)?
    };
    let content = match cfg.format {
        OutputFormat::Json => solve_json(cfg, &grid),
        OutputFormat::Csv => solve_csv(cfg, &grid),
    };
    Ok(CmdOutput { content, ok: true })
}

/// One cell of the sensitivity sweep over the amplitude ratio and the
/// epsilon multiplier.
struct SweepCell {
    ratio: f64,
    multiplier: f64,
    epsilon: f64,
    epsilon_admissible: Option<f64>,
    verdict: &'static str,
    /// "guaranteed" when the cell sits strictly below the theoretical
    /// threshold; "uncertified-by-theory" otherwise. The threshold is
    /// sufficient, not necessary, so the latter is not a failure claim.
    theory: &'static str,
    min_margin: Option<f64>,
    notes: Vec<String>,
}

fn run_cell(cfg: &RunConfig, p: &indosc_core::CoefficientP, ratio: f64, multiplier: f64) -> SweepCell {
    let alpha = ratio * cfg.params.beta;
    let admissible = admissible_epsilon(alpha, cfg.params.beta).ok();
    // Below the ratio threshold no admissible epsilon exists; fall back
    // to the configured epsilon so the cell still produces a report.
    let epsilon = multiplier * admissible.unwrap_or(cfg.params.epsilon);
    let params = ExampleParams::new(alpha, cfg.params.beta, epsilon, cfg.params.s0);
    let theory = match admissible {
        Some(bound) if epsilon < bound => "guaranteed",
        _ => "uncertified-by-theory",
    };

    let pert = Perturbation::new(params);
    let m_lo = cfg.m_lo.max(pert.switch.m1);
    if cfg.m_hi < m_lo {
        return SweepCell {
            ratio,
            multiplier,
            epsilon,
            epsilon_admissible: admissible,
            verdict: "failed",
            theory,
            min_margin: None,
            notes: vec![format!("empty index range: m-hi < m1 = {}", pert.switch.m1)],
        };
    }
    let report = certify_all(&pert, p, m_lo, cfg.m_hi, &cfg.tol);
    let min_margin = report
        .per_m
        .iter()
        .flat_map(|r| {
            [
                r.margin_i,
                r.margin_ii,
                r.margin_13,
                r.margin_14,
                r.margin_est11,
                r.margin_est12,
            ]
        })
        .flatten()
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.min(v)))
        });
    let mut notes: Vec<String> = verdict_reasons(&report.verdict).to_vec();
    notes.extend(report.warnings.iter().cloned());
    SweepCell {
        ratio,
        multiplier,
        epsilon,
        epsilon_admissible: admissible,
        verdict: verdict_label(&report.verdict),
        theory,
        min_margin,
        notes,
    }
}

fn csv_quote(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "\"\""))
}

/// Certifies every `(ratio, epsilon-multiplier)` cell of the grid. Cells
/// run concurrently; output order is by cell index; the sweep never
/// aborts on a failing cell.
pub fn cmd_sweep(cfg: &RunConfig, ratios: &[f64], multipliers: &[f64]) -> Result<CmdOutput> {
    let cells = ratios.len() * multipliers.len();
    if cells > 10_000 {
        bail!("sweep grid has {cells} cells; the limit is 10000");
    }
    let p = cfg.p_spec.build(cfg.params.s0)?;
    let pairs: Vec<(f64, f64)> = ratios
        .iter()
        .flat_map(|&r| multipliers.iter().map(move |&u| (r, u)))
        .collect();
    let rows: Vec<SweepCell> = pairs
        .par_iter()
        .map(|&(ratio, multiplier)| run_cell(cfg, &p, ratio, multiplier))
        .collect();

    let content = match cfg.format {
        OutputFormat::Json => {
            let cells: Vec<Value> = rows
                .iter()
                .map(|c| {
                    json!({
                        "ratio": c.ratio,
                        "eps_multiplier": c.multiplier,
                        "epsilon": c.epsilon,
                        "epsilon_admissible": c.epsilon_admissible,
                        "verdict": c.verdict,
                        "theory": c.theory,
                        "min_margin": c.min_margin,
                        "notes": c.notes,
                    })
                })
                .collect();
            render_json(&json!({
                "run": run_meta(),
                "meta": config_meta(cfg),
                "cells": cells,
            }))
        }
        OutputFormat::Csv => {
            let mut out = csv_preamble(cfg);
            let _ = writeln!(
                out,
                "ratio,eps_multiplier,epsilon,epsilon_admissible,verdict,theory,min_margin,notes"
            );
            for c in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    fmt_f64(c.ratio),
                    fmt_f64(c.multiplier),
                    fmt_f64(c.epsilon),
                    fmt_opt(c.epsilon_admissible),
                    c.verdict,
                    c.theory,
                    fmt_opt(c.min_margin),
                    csv_quote(&c.notes.join("; "))
                );
            }
            out
        }
    };
    Ok(CmdOutput { content, ok: true })
}
