//! Numerical certification of the oscillation-lemma hypotheses.
//!
//! Every strict inequality is evaluated as a *scaled margin*: the
//! difference `LHS - RHS` divided by the local bump amplitude (`c_m` or
//! `d_m`). The inequalities are homogeneous in that amplitude, so the
//! scaling keeps pass/fail meaningful at indices where the absolute
//! magnitudes are 1e-40 and below. A margin certifies its inequality
//! only when it exceeds `margin_min`, not merely zero, so quadrature
//! noise cannot flip a verdict. Each side of an inequality is computed
//! both from its closed form and by quadrature; the two routes must
//! agree within `10 * quad_rel_tol`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::construct::{admissible_epsilon, Perturbation};
use crate::params::{validate_params, CoefficientP, ToleranceConfig};
use crate::quad::{improper_q_integral, integrate_finite, series_tail_bound, QIntegralMode, QuadError};

/// How a per-index certification attempt ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum CheckStatus {
    Ok,
    Failed,
    OutOfPrecision,
}

/// Scaled margins of every checked inequality at one index `m`.
///
/// `None` margins mark quantities that could not be computed because the
/// local amplitude underflowed.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerMRecord {
    pub m: u32,
    #[cfg_attr(feature = "serde", serde(rename = "margin_I"))]
    pub margin_i: Option<f64>,
    #[cfg_attr(feature = "serde", serde(rename = "margin_II"))]
    pub margin_ii: Option<f64>,
    pub margin_13: Option<f64>,
    pub margin_14: Option<f64>,
    pub margin_est11: Option<f64>,
    pub margin_est12: Option<f64>,
    pub status: CheckStatus,
}

/// Aggregate verdict over the requested index range.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", content = "reasons"))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Verdict {
    /// Every margin over the range exceeds `margin_min` and `epsilon`
    /// is below the admissible threshold.
    Certified,
    Failed(Vec<String>),
    /// No index in range could be checked at double precision.
    OutOfPrecision(Vec<String>),
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified)
    }
}

/// The full certification record for a `(forcing, coefficient)` pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CertificationReport {
    pub m0: u32,
    pub m1: u32,
    pub epsilon_admissible: Option<f64>,
    pub warnings: Vec<String>,
    pub per_m: Vec<PerMRecord>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertifyError {
    /// The local amplitude underflowed; the index cannot be certified.
    PrecisionExhausted { m: u32 },
    /// Closed-form and quadrature routes disagree beyond tolerance.
    RouteDisagreement { what: &'static str, closed: f64, quad: f64 },
    /// No index satisfies the tail condition (excluded by the type
    /// invariants of `CoefficientP`, kept for totality).
    NoSuchIndex,
    Quad(QuadError),
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::PrecisionExhausted { m } => {
                write!(f, "PrecisionExhausted: amplitude underflowed at m = {m}")
            }
            CertifyError::RouteDisagreement { what, closed, quad } => write!(
                f,
                "RouteDisagreement: {what}: closed form {closed} vs quadrature {quad}"
            ),
            CertifyError::NoSuchIndex => write!(f, "NoSuchIndex: p tail never drops below ln(3/2)"),
            CertifyError::Quad(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CertifyError {}

impl From<QuadError> for CertifyError {
    fn from(e: QuadError) -> Self {
        CertifyError::Quad(e)
    }
}

/// The smallest `m >= 1` with `integral_{a_{2m}}^oo p < ln(3/2)`; the
/// tail is nonincreasing, so every larger index qualifies too.
pub fn compute_m0(p: &CoefficientP) -> Result<u32, CertifyError> {
    let ln_3_2 = libm::log(1.5);
    let mut m = 1u32;
    while m <= 10_000_000 {
        if p.tail(2.0 * m as f64 * PI) < ln_3_2 {
            return Ok(m);
        }
        m += 1;
    }
    Err(CertifyError::NoSuchIndex)
}

fn amp_pair(pert: &Perturbation, m: u32) -> Result<(f64, f64), CertifyError> {
    let c = pert
        .c(m)
        .map_err(|_| CertifyError::PrecisionExhausted { m })?;
    let d = pert
        .d(m)
        .map_err(|_| CertifyError::PrecisionExhausted { m })?;
    Ok((c, d))
}

/// Unit-amplitude bump mass by quadrature, cross-checked against pi/2.
fn unit_mass_checked(a: f64, tol: &ToleranceConfig) -> Result<f64, CertifyError> {
    let v = integrate_finite(|s| libm::sin(s) * libm::sin(s), a, a + PI, tol)?.value;
    let closed = 0.5 * PI;
    if (v - closed).abs() > 10.0 * tol.quad_rel_tol * closed {
        return Err(CertifyError::RouteDisagreement { what: "bump mass", closed, quad: v });
    }
    Ok(v)
}

/// Unit-amplitude first moment by quadrature, cross-checked against pi^2/4.
fn unit_first_moment_checked(a: f64, tol: &ToleranceConfig) -> Result<f64, CertifyError> {
    let v = integrate_finite(|s| (s - a) * libm::sin(s) * libm::sin(s), a, a + PI, tol)?.value;
    let closed = 0.25 * PI * PI;
    if (v - closed).abs() > 10.0 * tol.quad_rel_tol * closed {
        return Err(CertifyError::RouteDisagreement { what: "bump first moment", closed, quad: v });
    }
    Ok(v)
}

/// Series tail `sum_{k>m} (c_k + d_k)` with a rigorous remainder bound
/// added on top (conservative for inequalities whose right-hand side it
/// feeds).
fn tail_cd(pert: &Perturbation, m: u32) -> f64 {
    let k_stop = m + 200;
    let mut t = 0.0;
    for k in m + 1..=k_stop {
        t += pert.c(k).unwrap_or(0.0) + pert.d(k).unwrap_or(0.0);
    }
    t + (pert.params.alpha + pert.params.beta) * series_tail_bound(pert.params.epsilon, k_stop)
}

/// Series tail `sum_{k>m} k * c_k` with its rigorous remainder.
fn tail_kc(pert: &Perturbation, m: u32) -> f64 {
    let k_stop = m + 200;
    let mut t = 0.0;
    for k in m + 1..=k_stop {
        t += k as f64 * pert.c(k).unwrap_or(0.0);
    }
    t + pert.params.alpha * series_tail_bound(pert.params.epsilon, k_stop)
}

/// First oscillation-lemma hypothesis:
/// `integral |q|` over the negative bump `> 3 * integral q` over the
/// positive bump. Returns `(LHS - RHS) / c_m`.
pub fn check_lemma1_i(pert: &Perturbation, m: u32, tol: &ToleranceConfig) -> Result<f64, CertifyError> {
    let (c, d) = amp_pair(pert, m)?;
    let a = 2.0 * m as f64 * PI;
    let lhs = c * unit_mass_checked(a, tol)?;
    let rhs = 3.0 * d * unit_mass_checked(a + PI, tol)?;
    Ok((lhs - rhs) / c)
}

/// Second oscillation-lemma hypothesis:
/// `integral q` over the positive bump `> 2 * integral_{a_{2m+2}}^oo |q|`.
/// Returns `(LHS - RHS) / d_m`, the tail summed by series plus a
/// rigorous remainder and cross-checked against direct quadrature.
pub fn check_lemma1_ii(
    pert: &Perturbation,
    m: u32,
    tol: &ToleranceConfig,
) -> Result<f64, CertifyError> {
    let (_, d) = amp_pair(pert, m)?;
    let a_pos = (2 * m + 1) as f64 * PI;
    let lhs = d * unit_mass_checked(a_pos, tol)?;
    let t = tail_cd(pert, m);
    let tail_closed = 0.5 * PI * t;
    if tail_closed > 1e-280 {
        let p0 = CoefficientP::zero(pert.params.s0);
        let quad = improper_q_integral(pert, &p0, a_pos + PI, QIntegralMode::Abs, tol)?;
        let agree = (quad.value - tail_closed).abs()
            <= 10.0 * tol.quad_rel_tol * tail_closed + quad.tail_bound + quad.abs_error_bound;
        if !agree {
            return Err(CertifyError::RouteDisagreement {
                what: "improper |q| tail",
                closed: tail_closed,
                quad: quad.value,
            });
        }
    }
    Ok((lhs - 2.0 * tail_closed) / d)
}

/// Weighted first-moment hypothesis for the negative bumps, certified
/// through the chain of estimates that bounds
/// `6 (a_{2m+1}^2 / a_{2m}) * integral_{a_{2m+1}}^oo |q|` from above by
/// `12 pi^2 (4 (beta/alpha) c_m + 6 sum_{k>m} k c_k)`. The margin is
/// `((pi^2/4) c_m - 12 pi^2 (4 (beta/alpha) c_m + 6 S)) / c_m`; it is
/// positive in the small-epsilon limit exactly when `alpha > 192 beta`,
/// the binding ratio constraint of the construction.
pub fn check_lemma2_13(
    pert: &Perturbation,
    m: u32,
    tol: &ToleranceConfig,
) -> Result<f64, CertifyError> {
    let (c, _) = amp_pair(pert, m)?;
    let a = 2.0 * m as f64 * PI;
    let lhs = c * unit_first_moment_checked(a, tol)?;
    let s_tail = tail_kc(pert, m);
    let ratio = pert.params.beta / pert.params.alpha;
    let rhs = 12.0 * PI * PI * (4.0 * ratio * c + 6.0 * s_tail);
    // Consistency of the chain: the bound must dominate the quantity it
    // replaces, 6 (a_{2m+1}^2/a_{2m}) * integral_{a_{2m+1}}^oo |q|.
    let a_odd = (2 * m + 1) as f64;
    let direct = 6.0 * a_odd * a_odd * PI / (2.0 * m as f64)
        * 0.5
        * PI
        * (pert.d(m).unwrap_or(0.0) + tail_cd(pert, m));
    if rhs > 0.0 && direct > rhs * (1.0 + 1e-9) {
        return Err(CertifyError::RouteDisagreement {
            what: "weighted-tail envelope",
            closed: rhs,
            quad: direct,
        });
    }
    Ok((lhs - rhs) / c)
}

/// Weighted first-moment hypothesis for the positive bumps:
/// `integral (s - a_{2m+1}) q ds > 4 (a_{2m+2}^2 / a_{2m+1}) *
/// integral_{a_{2m+2}}^oo |q|`. Returns `(LHS - RHS) / d_m`.
pub fn check_lemma2_14(
    pert: &Perturbation,
    m: u32,
    tol: &ToleranceConfig,
) -> Result<f64, CertifyError> {
    let (_, d) = amp_pair(pert, m)?;
    let a_pos = (2 * m + 1) as f64 * PI;
    let lhs = d * unit_first_moment_checked(a_pos, tol)?;
    let t = tail_cd(pert, m);
    let a_even = (2 * m + 2) as f64;
    let factor = a_even * a_even * PI / ((2 * m + 1) as f64);
    let rhs = 4.0 * factor * 0.5 * PI * t;
    Ok((lhs - rhs) / d)
}

/// The proof-internal exponential estimates enabled by the definition of
/// `m0`: returns the margins of
/// `3 > 2 exp(integral_{a_{2m}}^{a_{2m+2}} p)` and
/// `2 > exp(integral_{a_{2m+1}}^oo p)`.
pub fn check_exponential_estimates(pert: &Perturbation, p: &CoefficientP, m: u32) -> (f64, f64) {
    let a = pert.switch.a(2 * m);
    let est11 = 3.0 - 2.0 * libm::exp(p.cumulative(pert.switch.a(2 * m + 2)) - p.cumulative(a));
    let est12 = 2.0 - libm::exp(p.tail(pert.switch.a(2 * m + 1)));
    (est11, est12)
}

/// Runs every hypothesis check for `m` in `[m_lo, m_hi]` and aggregates
/// the margins, `m0`, `m1` and the admissible epsilon into a report.
/// Per-check errors are recorded in the report; the run never aborts
/// midway.
pub fn certify_all(
    pert: &Perturbation,
    p: &CoefficientP,
    m_lo: u32,
    m_hi: u32,
    tol: &ToleranceConfig,
) -> CertificationReport {
    debug_assert!(pert.switch.m1 <= m_lo && m_lo <= m_hi);
    let mut warnings: Vec<String> = Vec::new();
    let mut failures: Vec<String> = Vec::new();

    if let Err(errs) = validate_params(&pert.params, p) {
        for e in errs {
            failures.push(e.to_string());
        }
    }
    let epsilon_admissible = match admissible_epsilon(pert.params.alpha, pert.params.beta) {
        Ok(v) => Some(v),
        Err(e) => {
            warnings.push(format!("admissible epsilon undefined: {e}"));
            None
        }
    };
    let m0 = match compute_m0(p) {
        Ok(m0) => m0,
        Err(e) => {
            failures.push(e.to_string());
            u32::MAX
        }
    };
    let m1 = pert.switch.m1;

    let mut per_m = Vec::with_capacity((m_hi - m_lo + 1) as usize);
    for m in m_lo..=m_hi {
        if amp_pair(pert, m).is_err() {
            warnings.push(format!(
                "m = {m}: amplitude below the 1e-300 floor; excluded from certification"
            ));
            per_m.push(PerMRecord {
                m,
                margin_i: None,
                margin_ii: None,
                margin_13: None,
                margin_14: None,
                margin_est11: None,
                margin_est12: None,
                status: CheckStatus::OutOfPrecision,
            });
            continue;
        }

        let record_err = |what: &str, e: &CertifyError, failures: &mut Vec<String>| {
            failures.push(format!("m = {m}: {what}: {e}"));
        };
        let mut any_err = false;
        let mut get = |r: Result<f64, CertifyError>, what: &str| match r {
            Ok(v) => Some(v),
            Err(e) => {
                record_err(what, &e, &mut failures);
                any_err = true;
                None
            }
        };
        let margin_i = get(check_lemma1_i(pert, m, tol), "lemma-1 inequality I");
        let margin_ii = get(check_lemma1_ii(pert, m, tol), "lemma-1 inequality II");
        let margin_13 = get(check_lemma2_13(pert, m, tol), "lemma-2 inequality (13)");
        let margin_14 = get(check_lemma2_14(pert, m, tol), "lemma-2 inequality (14)");
        let (est11, est12) = check_exponential_estimates(pert, p, m);

        let gate_estimates = m >= m0;
        if !gate_estimates {
            warnings.push(format!(
                "m = {m}: below m0 = {m0}; exponential estimates reported but not gated"
            ));
        }
        let mut ok = !any_err;
        for (name, v) in [
            ("margin_I", margin_i),
            ("margin_II", margin_ii),
            ("margin_13", margin_13),
            ("margin_14", margin_14),
        ] {
            if let Some(v) = v {
                if !(v > tol.margin_min) {
                    failures.push(format!("m = {m}: {name} = {v} not above margin_min"));
                    ok = false;
                }
            }
        }
        if gate_estimates {
            for (name, v) in [("margin_est11", est11), ("margin_est12", est12)] {
                if !(v > tol.margin_min) {
                    failures.push(format!("m = {m}: {name} = {v} not above margin_min"));
                    ok = false;
                }
            }
        }
        per_m.push(PerMRecord {
            m,
            margin_i,
            margin_ii,
            margin_13,
            margin_14,
            margin_est11: Some(est11),
            margin_est12: Some(est12),
            status: if ok { CheckStatus::Ok } else { CheckStatus::Failed },
        });
    }

    let any_ok = per_m.iter().any(|r| r.status == CheckStatus::Ok);
    let all_oop = per_m.iter().all(|r| r.status == CheckStatus::OutOfPrecision);
    let verdict = if !failures.is_empty() {
        Verdict::Failed(failures)
    } else if all_oop {
        Verdict::OutOfPrecision(warnings.clone())
    } else if any_ok {
        Verdict::Certified
    } else {
        Verdict::Failed(Vec::new())
    };

    CertificationReport { m0, m1, epsilon_admissible, warnings, per_m, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{coefficient_inverse_square, ExampleParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn baseline() -> Perturbation {
        Perturbation::new(ExampleParams::baseline())
    }
    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn m0_for_builtin_coefficients() {
        assert_eq!(compute_m0(&CoefficientP::zero(PI)).unwrap(), 1);
        assert_eq!(compute_m0(&coefficient_inverse_square(0.1, PI)).unwrap(), 1);
        // 10/(2 m pi) < ln(3/2) first holds at m = 4.
        assert_eq!(compute_m0(&coefficient_inverse_square(10.0, PI)).unwrap(), 4);
    }

    #[test]
    fn lemma1_i_margin_baseline() {
        // (pi/2)(1 - 3 d_1/c_1) = (pi/2)(1 - 3/200).
        let m = check_lemma1_i(&baseline(), 1, &tol()).unwrap();
        assert_relative_eq!(m, 0.5 * PI * (1.0 - 3.0 / 200.0), max_relative = 1e-9);
        assert_relative_eq!(m, 1.5472, max_relative = 1e-4);
    }

    #[test]
    fn lemma1_i_reduces_to_alpha_m_vs_3beta() {
        // margin > 0 iff alpha * m > 3 beta.
        let good = Perturbation::new(ExampleParams::new(200.0, 1.0, 2.5e-5, PI));
        for m in 1..=6 {
            assert!(check_lemma1_i(&good, m, &tol()).unwrap() > 0.0);
        }
        let bad = Perturbation::new(ExampleParams::new(2.0, 1.0, 2.5e-5, PI));
        assert!(check_lemma1_i(&bad, 1, &tol()).unwrap() < 0.0);
    }

    #[test]
    fn lemma1_ii_margin_baseline() {
        // Tail is ~ c_2 = 200 eps^4, utterly negligible against d_1.
        let m = check_lemma1_ii(&baseline(), 1, &tol()).unwrap();
        assert_relative_eq!(m, 0.5 * PI, max_relative = 1e-6);
    }

    #[test]
    fn lemma1_ii_fails_for_large_epsilon() {
        let pert = Perturbation::new(ExampleParams::new(200.0, 1.0, 0.3, PI));
        assert!(check_lemma1_ii(&pert, 1, &tol()).unwrap() < 0.0);
    }

    #[test]
    fn lemma2_13_margin_baseline_and_ratio_control() {
        let m = check_lemma2_13(&baseline(), 1, &tol()).unwrap();
        // pi^2/4 - 12 pi^2 (4/200 + tiny) = pi^2 (1/4 - 0.24).
        assert_relative_eq!(m, PI * PI * (0.25 - 12.0 * 4.0 / 200.0), max_relative = 1e-6);
        assert!(m > 1e-3);

        // The ratio constraint is binding: alpha = 100 flips the sign.
        let bad = Perturbation::new(ExampleParams::new(100.0, 1.0, 2.5e-5, PI));
        assert!(check_lemma2_13(&bad, 1, &tol()).unwrap() < 0.0);
    }

    #[test]
    fn lemma2_14_margin_baseline() {
        let m = check_lemma2_14(&baseline(), 1, &tol()).unwrap();
        assert_relative_eq!(m, 0.25 * PI * PI, max_relative = 1e-6);
        // Far above the admissible bound the tail dominates.
        let bad = Perturbation::new(ExampleParams::new(200.0, 1.0, 0.2, PI));
        assert!(check_lemma2_14(&bad, 1, &tol()).unwrap() < 0.0);
    }

    #[test]
    fn lemma2_margins_positive_below_admissible() {
        let eps = 0.9 * admissible_epsilon(200.0, 1.0).unwrap();
        let pert = Perturbation::new(ExampleParams::new(200.0, 1.0, eps, PI));
        for m in 1..=6 {
            assert!(check_lemma2_13(&pert, m, &tol()).unwrap() > 0.0);
            assert!(check_lemma2_14(&pert, m, &tol()).unwrap() > 0.0);
        }
    }

    #[test]
    fn exponential_estimates() {
        let pert = baseline();
        let (e11, e12) = check_exponential_estimates(&pert, &CoefficientP::zero(PI), 1);
        assert_relative_eq!(e11, 1.0);
        assert_relative_eq!(e12, 1.0);

        let p = coefficient_inverse_square(0.1, PI);
        let (e11, _) = check_exponential_estimates(&pert, &p, 1);
        let expect = 3.0 - 2.0 * libm::exp(0.1 * (1.0 / (2.0 * PI) - 1.0 / (4.0 * PI)));
        assert_relative_eq!(e11, expect, max_relative = 1e-12);
        assert_relative_eq!(e11, 0.984, max_relative = 1e-2);
    }

    #[test]
    fn estimates_positive_beyond_m0() {
        for p in [
            CoefficientP::zero(PI),
            coefficient_inverse_square(0.1, PI),
            coefficient_inverse_square(10.0, PI),
        ] {
            let pert = baseline();
            let m0 = compute_m0(&p).unwrap();
            for m in m0..m0 + 20 {
                assert!(p.tail(2.0 * m as f64 * PI) < libm::log(1.5));
                let (e11, e12) = check_exponential_estimates(&pert, &p, m);
                assert!(e11 > 0.0 && e12 > 0.0, "m = {m}");
            }
        }
    }

    #[test]
    fn golden_scenario_certifies() {
        let pert = baseline();
        let p = coefficient_inverse_square(0.1, PI);
        let report = certify_all(&pert, &p, 1, 6, &tol());
        assert_eq!(report.m0, 1);
        assert_eq!(report.m1, 1);
        assert!(report.verdict.is_certified(), "{:?}", report.verdict);
        for r in &report.per_m {
            assert_eq!(r.status, CheckStatus::Ok);
            for v in [r.margin_i, r.margin_ii, r.margin_13, r.margin_14] {
                assert!(v.unwrap() > 1e-3);
            }
        }
    }

    #[test]
    fn epsilon_above_admissible_fails() {
        let pert = Perturbation::new(ExampleParams::new(200.0, 1.0, 1e-4, PI));
        let p = CoefficientP::zero(PI);
        let report = certify_all(&pert, &p, 1, 6, &tol());
        match &report.verdict {
            Verdict::Failed(reasons) => {
                assert!(reasons.iter().any(|r| r.contains("EpsilonTooLarge")));
            }
            v => panic!("expected failure, got {v:?}"),
        }
    }

    #[test]
    fn out_of_precision_indices_are_reported_not_fatal() {
        let pert = baseline();
        let p = coefficient_inverse_square(0.1, PI);
        let report = certify_all(&pert, &p, 1, 12, &tol());
        assert!(report.verdict.is_certified(), "{:?}", report.verdict);
        let oop: Vec<u32> = report
            .per_m
            .iter()
            .filter(|r| r.status == CheckStatus::OutOfPrecision)
            .map(|r| r.m)
            .collect();
        assert_eq!(oop, alloc::vec![9, 10, 11, 12]);
        assert!(!report.warnings.is_empty());
    }

    proptest! {
        // The weighted inequalities dominate the unweighted ones: a
        // positive margin_13 forces a positive margin_I, and margin_14
        // forces margin_II.
        #[test]
        fn margin_hierarchy(alpha in 60.0f64..2000.0, eps_frac in 0.05f64..3.0, m in 1u32..5) {
            let eps = (eps_frac * 2.6e-5).min(0.33);
            let pert = Perturbation::new(ExampleParams::new(alpha, 1.0, eps, PI));
            let tol = ToleranceConfig::default();
            let m13 = check_lemma2_13(&pert, m, &tol).unwrap();
            let m14 = check_lemma2_14(&pert, m, &tol).unwrap();
            if m13 > 0.0 {
                prop_assert!(check_lemma1_i(&pert, m, &tol).unwrap() > 0.0);
            }
            if m14 > 0.0 {
                prop_assert!(check_lemma1_ii(&pert, m, &tol).unwrap() > 0.0);
            }
        }

        #[test]
        fn m0_tail_condition_holds_beyond_m0(lambda in 0.0f64..50.0) {
            let p = coefficient_inverse_square(lambda, PI);
            let m0 = compute_m0(&p).unwrap();
            for m in m0..m0 + 20 {
                prop_assert!(p.tail(2.0 * m as f64 * PI) < libm::log(1.5));
            }
        }
    }
}
