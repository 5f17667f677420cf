//! Shared domain types: example parameters, the coefficient `p`, the
//! switch-point sequence and numeric tolerances, plus parameter validation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::construct;

/// The tuple `(alpha, beta, epsilon, s0)` fully determining the
/// piecewise-trigonometric forcing.
///
/// `alpha` scales the negative bumps, `beta` the positive ones,
/// `epsilon` is the decay base of the amplitude sequence
/// `epsilon^(m^2)`, and `s0 > 0` is the left endpoint of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExampleParams {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub s0: f64,
}

impl ExampleParams {
    pub fn new(alpha: f64, beta: f64, epsilon: f64, s0: f64) -> Self {
        Self { alpha, beta, epsilon, s0 }
    }

    /// The repository's golden parameter set: `alpha = 200`, `beta = 1`,
    /// `epsilon = 2.5e-5`, `s0 = pi`.
    pub fn baseline() -> Self {
        Self::new(200.0, 1.0, 2.5e-5, PI)
    }
}

/// Tabulated coefficient samples with precomputed trapezoidal cumulative
/// integrals. Outside the table (beyond the last abscissa) `p` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PTable {
    s: Vec<f64>,
    p: Vec<f64>,
    /// cum[i] = trapezoid integral of p over [s[0], s[i]].
    cum: Vec<f64>,
}

impl PTable {
    /// Builds a table from `(s, p(s))` pairs. The abscissae must be
    /// strictly increasing; values are linearly interpolated between them.
    pub fn new(points: &[(f64, f64)]) -> Result<Self, ParamError> {
        if points.len() < 2 {
            return Err(ParamError::BadTable(String::from(
                "table needs at least two (s, p) rows",
            )));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(ParamError::BadTable(format!(
                    "table abscissae must be strictly increasing (at s = {})",
                    w[1].0
                )));
            }
        }
        let s: Vec<f64> = points.iter().map(|r| r.0).collect();
        let p: Vec<f64> = points.iter().map(|r| r.1).collect();
        let mut cum = Vec::with_capacity(s.len());
        cum.push(0.0);
        for i in 1..s.len() {
            let piece = 0.5 * (p[i] + p[i - 1]) * (s[i] - s[i - 1]);
            let prev = cum[i - 1];
            cum.push(prev + piece);
        }
        Ok(Self { s, p, cum })
    }

    pub fn first_s(&self) -> f64 {
        self.s[0]
    }

    pub fn min_value(&self) -> f64 {
        self.p.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn eval(&self, x: f64) -> f64 {
        if x <= self.s[0] {
            return self.p[0];
        }
        if x >= *self.s.last().unwrap() {
            return 0.0;
        }
        let i = match self.s.partition_point(|&v| v <= x) {
            0 => 1,
            i => i,
        };
        let (s0, s1) = (self.s[i - 1], self.s[i]);
        let t = (x - s0) / (s1 - s0);
        self.p[i - 1] + t * (self.p[i] - self.p[i - 1])
    }

    /// Integral of the interpolant over [s[0], x], clamped to the table.
    fn cum_from_start(&self, x: f64) -> f64 {
        if x <= self.s[0] {
            return 0.0;
        }
        if x >= *self.s.last().unwrap() {
            return *self.cum.last().unwrap();
        }
        let i = self.s.partition_point(|&v| v <= x);
        let (s0, _s1) = (self.s[i - 1], self.s[i]);
        let p0 = self.p[i - 1];
        let px = self.eval(x);
        self.cum[i - 1] + 0.5 * (p0 + px) * (x - s0)
    }
}

/// The nonnegative, absolutely integrable coefficient `p` with its
/// cumulative integral `P(s)` (from `s0`) and tail `integral_s^oo p`.
///
/// The built-in kinds have closed-form integrals; the tabulated kind uses
/// trapezoidal integration and vanishes beyond the table.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientP {
    Zero { s0: f64 },
    InverseSquare { lambda: f64, s0: f64 },
    Table { table: PTable, s0: f64 },
}

impl CoefficientP {
    pub fn zero(s0: f64) -> Self {
        CoefficientP::Zero { s0 }
    }

    pub fn s0(&self) -> f64 {
        match self {
            CoefficientP::Zero { s0 }
            | CoefficientP::InverseSquare { s0, .. }
            | CoefficientP::Table { s0, .. } => *s0,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            CoefficientP::Zero { .. } => 0.0,
            CoefficientP::InverseSquare { lambda, .. } => lambda / (s * s),
            CoefficientP::Table { table, .. } => table.eval(s),
        }
    }

    /// `P(s) = integral_s0^s p(t) dt`.
    pub fn cumulative(&self, s: f64) -> f64 {
        match self {
            CoefficientP::Zero { .. } => 0.0,
            CoefficientP::InverseSquare { lambda, s0 } => lambda * (1.0 / s0 - 1.0 / s),
            CoefficientP::Table { table, s0 } => {
                table.cum_from_start(s) - table.cum_from_start(*s0)
            }
        }
    }

    /// `integral_s^oo p(t) dt`; finite for every supported kind.
    pub fn tail(&self, s: f64) -> f64 {
        match self {
            CoefficientP::Zero { .. } => 0.0,
            CoefficientP::InverseSquare { lambda, .. } => lambda / s,
            CoefficientP::Table { table, s0 } => {
                let total = table.cum_from_start(f64::INFINITY);
                let upto = table.cum_from_start(s.max(*s0));
                (total - upto).max(0.0)
            }
        }
    }
}

/// `p(s) = lambda / s^2`, the built-in nonzero coefficient. Its
/// cumulative integral `lambda (1/s0 - 1/s)` and tail `lambda / s` are
/// exact, which makes it the preferred oracle coefficient in tests.
pub fn coefficient_inverse_square(lambda: f64, s0: f64) -> CoefficientP {
    debug_assert!(lambda >= 0.0 && s0 > 0.0);
    CoefficientP::InverseSquare { lambda, s0 }
}

/// The switch points `a_m = m*pi` where the forcing changes sign, and the
/// first constructed index `m1 = max(1, ceil(s0 / 2pi))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SwitchSequence {
    pub m1: u32,
}

impl SwitchSequence {
    pub fn new(s0: f64) -> Self {
        let m1 = libm::ceil(s0 / (2.0 * PI)).max(1.0) as u32;
        Self { m1 }
    }

    /// `a_m = m * pi`.
    pub fn a(&self, m: u32) -> f64 {
        m as f64 * PI
    }
}

/// Numeric tolerances shared by quadrature, truncation and certification.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ToleranceConfig {
    /// Relative tolerance for finite-interval quadrature.
    pub quad_rel_tol: f64,
    /// Relative tolerance governing truncation of improper integrals and
    /// series tails.
    pub tail_rel_tol: f64,
    /// Minimum scaled margin for a strict inequality to count as
    /// certified; quadrature noise below this must not flip a verdict.
    pub margin_min: f64,
    /// Scale factor for finite-difference steps in residual checks.
    pub fd_step_scale: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            quad_rel_tol: 1e-10,
            tail_rel_tol: 1e-12,
            margin_min: 1e-6,
            fd_step_scale: 1.0,
        }
    }
}

/// A violated parameter constraint. `validate_params` reports every
/// violation it finds, never just the first.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamError {
    /// `alpha <= 192 * beta`; the ratio constraint is strict.
    RatioViolation { alpha: f64, beta: f64 },
    /// `epsilon` is outside `(0, 1/3)` or at/above the admissible bound.
    EpsilonTooLarge { epsilon: f64, admissible: f64 },
    /// A parameter that must be positive is not.
    NonPositive { name: &'static str, value: f64 },
    /// `p(s) < 0` at a sampled point.
    NegativeCoefficient { s: f64, value: f64 },
    /// `integral_s0^oo p` is not finite.
    DivergentTail,
    /// A tabulated coefficient is malformed.
    BadTable(String),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::RatioViolation { alpha, beta } => write!(
                f,
                "RatioViolation: alpha = {alpha} must exceed 192*beta = {}",
                192.0 * beta
            ),
            ParamError::EpsilonTooLarge { epsilon, admissible } => write!(
                f,
                "EpsilonTooLarge: epsilon = {epsilon} not in (0, min(1/3, {admissible}))"
            ),
            ParamError::NonPositive { name, value } => {
                write!(f, "NonPositive: {name} = {value} must be > 0")
            }
            ParamError::NegativeCoefficient { s, value } => {
                write!(f, "NegativeCoefficient: p({s}) = {value} < 0")
            }
            ParamError::DivergentTail => write!(f, "DivergentTail: integral of p is not finite"),
            ParamError::BadTable(msg) => write!(f, "BadTable: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParamError {}

/// Checks every invariant of `(params, p)` and returns the complete list
/// of violations. Total: never panics on finite inputs.
pub fn validate_params(params: &ExampleParams, p: &CoefficientP) -> Result<(), Vec<ParamError>> {
    let mut errs = Vec::new();
    for (name, value) in [
        ("alpha", params.alpha),
        ("beta", params.beta),
        ("s0", params.s0),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            errs.push(ParamError::NonPositive { name, value });
        }
    }
    let ratio_ok = params.alpha > 192.0 * params.beta;
    if !ratio_ok {
        errs.push(ParamError::RatioViolation { alpha: params.alpha, beta: params.beta });
    }
    let admissible = if ratio_ok {
        construct::admissible_epsilon(params.alpha, params.beta).unwrap_or(1.0 / 3.0)
    } else {
        // The Lemma 3 threshold is undefined without the ratio constraint;
        // only the unconditional 1/3 cap applies.
        1.0 / 3.0
    };
    if !(params.epsilon > 0.0 && params.epsilon < 1.0 / 3.0 && params.epsilon < admissible) {
        errs.push(ParamError::EpsilonTooLarge { epsilon: params.epsilon, admissible });
    }

    // Sample p on a modest grid past s0; the built-in kinds are
    // nonnegative by construction, the tabulated kind may not be.
    if let CoefficientP::Table { table, .. } = p {
        if table.min_value() < 0.0 {
            let (s, v) = {
                let mut worst = (0.0, 0.0);
                for i in 0..256 {
                    let s = params.s0 + i as f64 * 0.25;
                    let v = p.eval(s);
                    if v < worst.1 {
                        worst = (s, v);
                    }
                }
                worst
            };
            errs.push(ParamError::NegativeCoefficient { s, value: v });
        }
    }
    if !p.tail(params.s0).is_finite() {
        errs.push(ParamError::DivergentTail);
    }

    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn baseline_is_valid() {
        let p = CoefficientP::zero(PI);
        assert!(validate_params(&ExampleParams::baseline(), &p).is_ok());
    }

    #[test]
    fn ratio_boundary_is_rejected() {
        // The inequality alpha > 192*beta is strict.
        let params = ExampleParams::new(192.0, 1.0, 1e-6, PI);
        let errs = validate_params(&params, &CoefficientP::zero(PI)).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ParamError::RatioViolation { .. })));
    }

    #[test]
    fn epsilon_above_one_third_is_rejected() {
        let params = ExampleParams::new(200.0, 1.0, 0.4, PI);
        let errs = validate_params(&params, &CoefficientP::zero(PI)).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ParamError::EpsilonTooLarge { .. })));
    }

    #[test]
    fn epsilon_above_admissible_is_rejected() {
        // admissible_epsilon(200, 1) ~ 2.604e-5, so 1e-4 must fail even
        // though it is far below 1/3.
        let params = ExampleParams::new(200.0, 1.0, 1e-4, PI);
        let errs = validate_params(&params, &CoefficientP::zero(PI)).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ParamError::EpsilonTooLarge { .. })));
    }

    #[test]
    fn error_list_is_complete() {
        // Three violations at once: ratio, epsilon, nonpositive s0.
        let params = ExampleParams::new(10.0, 1.0, 0.5, -1.0);
        let errs = validate_params(&params, &CoefficientP::zero(PI)).unwrap_err();
        assert!(errs.len() >= 3, "got {errs:?}");
    }

    #[test]
    fn inverse_square_closed_forms() {
        let p = coefficient_inverse_square(0.1, PI);
        assert_relative_eq!(p.tail(2.0 * PI), 0.1 / (2.0 * PI), max_relative = 1e-15);
        // cumulative + tail is constant (= tail at s0).
        for i in 0..50 {
            let s = PI + i as f64 * 0.7;
            assert_relative_eq!(
                p.cumulative(s) + p.tail(s),
                0.1 / PI,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn zero_coefficient_has_zero_tail() {
        let p = coefficient_inverse_square(0.0, 1.0);
        assert_eq!(p.tail(1.0), 0.0);
    }

    #[test]
    fn table_coefficient_integrals() {
        // p = 0.5 constant on [1, 3], zero after: tail(1) = 1.0 exactly
        // under the trapezoid rule.
        let table = PTable::new(&[(1.0, 0.5), (2.0, 0.5), (3.0, 0.5)]).unwrap();
        let p = CoefficientP::Table { table, s0: 1.0 };
        assert_relative_eq!(p.tail(1.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(p.cumulative(2.5), 0.75, max_relative = 1e-15);
        assert_eq!(p.eval(10.0), 0.0);
        assert_relative_eq!(p.cumulative(2.5) + p.tail(2.5), p.tail(1.0), max_relative = 1e-15);
    }

    #[test]
    fn table_rejects_unsorted_abscissae() {
        assert!(PTable::new(&[(1.0, 0.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn switch_sequence_first_index() {
        // s0 = pi: ceil(1/2) = 1, and a(2*m1) = 2*pi >= s0.
        let sw = SwitchSequence::new(PI);
        assert_eq!(sw.m1, 1);
        assert!(sw.a(2 * sw.m1) >= PI);
        // s0 = 10*pi: m1 = 5.
        let sw = SwitchSequence::new(10.0 * PI);
        assert_eq!(sw.m1, 5);
        assert!(sw.a(2 * sw.m1) >= 10.0 * PI);
    }

    #[test]
    fn switch_points_are_pi_spaced() {
        let sw = SwitchSequence::new(PI);
        for m in 1..200 {
            assert_relative_eq!(sw.a(m + 1) - sw.a(m), PI, max_relative = 1e-12);
        }
    }
}
