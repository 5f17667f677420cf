//! Construction of the oscillation-inducing forcing: the amplitude
//! sequences `c_m = alpha * eps^(m^2)` and `d_m = beta * eps^(m^2) / m`,
//! the piecewise `sin^2` bumps switching sign at `a_m = m*pi`, the
//! epsilon threshold below which every required inequality is guaranteed,
//! and the closed-form bump moments used as exact quadrature oracles.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::params::{ExampleParams, SwitchSequence};
use crate::quad::series_tail_bound;
use crate::UNDERFLOW_FLOOR;

/// The piecewise forcing `q(alpha, beta)`:
///
/// ```text
/// q(s) = -c_m sin^2 s   on [a_{2m},   a_{2m+1}],
/// q(s) =  d_m sin^2 s   on [a_{2m+1}, a_{2m+2}],   m >= m1,
/// q(s) =  0             on [s0, a_{2*m1}]  (extension region),
/// ```
///
/// of class C^1: both `q` and `q'` vanish at every switch point, so the
/// zero extension joins smoothly.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub params: ExampleParams,
    pub switch: SwitchSequence,
}

/// Errors from the construction operations.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstructError {
    /// Evaluation below the domain start.
    DomainError { s: f64, s0: f64 },
    /// Amplitude index below the first constructed index `m1`.
    IndexBelowM1 { m: u32, m1: u32 },
    /// `epsilon^(m^2)` fell under the representable floor.
    PrecisionExhausted { m: u32 },
    /// The threshold constant must be positive.
    NonPositiveC { c: f64 },
    /// `alpha <= 192*beta`: the threshold constant `C1` is not positive.
    RatioViolation { alpha: f64, beta: f64 },
}

impl fmt::Display for ConstructError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructError::DomainError { s, s0 } => {
                write!(f, "DomainError: s = {s} below domain start s0 = {s0}")
            }
            ConstructError::IndexBelowM1 { m, m1 } => {
                write!(f, "IndexBelowM1: m = {m} below first constructed index m1 = {m1}")
            }
            ConstructError::PrecisionExhausted { m } => {
                write!(f, "PrecisionExhausted: amplitude at m = {m} underflowed")
            }
            ConstructError::NonPositiveC { c } => write!(f, "NonPositiveC: C = {c}"),
            ConstructError::RatioViolation { alpha, beta } => write!(
                f,
                "RatioViolation: alpha = {alpha} must exceed 192*beta = {}",
                192.0 * beta
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConstructError {}

/// Identifies which signed bump of an index pair a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpKind {
    /// `[a_{2m}, a_{2m+1}]`, amplitude `c_m`, sign negative.
    NegativeBump,
    /// `[a_{2m+1}, a_{2m+2}]`, amplitude `d_m`, sign positive.
    PositiveBump,
}

/// Which closed-form bump moment to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentOrder {
    /// `integral |q| ds` over the bump: `(pi/2) * amplitude`.
    Mass,
    /// `integral (s - a_left) |q| ds`: `(pi^2/4) * amplitude`.
    First,
}

impl Perturbation {
    pub fn new(params: ExampleParams) -> Self {
        let switch = SwitchSequence::new(params.s0);
        Self { params, switch }
    }

    /// `epsilon^(m^2) * scale`, computed in log space so the decay does
    /// not hit intermediate underflow until the final exponential.
    fn amplitude(&self, m: u32, scale: f64) -> f64 {
        let mm = m as f64;
        libm::exp(mm * mm * libm::log(self.params.epsilon) + libm::log(scale))
    }

    /// Negative-bump amplitude `c_m = alpha * epsilon^(m^2)`.
    ///
    /// Errors with `PrecisionExhausted` once the value falls below the
    /// representable floor; callers must not silently treat such indices
    /// as certified.
    pub fn c(&self, m: u32) -> Result<f64, ConstructError> {
        let v = self.amplitude(m, self.params.alpha);
        if v < UNDERFLOW_FLOOR {
            Err(ConstructError::PrecisionExhausted { m })
        } else {
            Ok(v)
        }
    }

    /// Positive-bump amplitude `d_m = beta * epsilon^(m^2) / m`.
    pub fn d(&self, m: u32) -> Result<f64, ConstructError> {
        let v = self.amplitude(m, self.params.beta) / m as f64;
        if v < UNDERFLOW_FLOOR {
            Err(ConstructError::PrecisionExhausted { m })
        } else {
            Ok(v)
        }
    }

    /// First index whose amplitudes underflow; certification past it is
    /// reported as out-of-precision.
    pub fn underflow_horizon(&self) -> u32 {
        let mut m = self.switch.m1;
        loop {
            if self.c(m).is_err() || self.d(m).is_err() {
                return m;
            }
            m += 1;
            if m > 100_000 {
                return m;
            }
        }
    }

    /// The `(amplitude, sign)` of the bump containing `s`, or `None` in
    /// the extension region `[s0, a_{2*m1})` / at underflowed indices.
    pub fn piece(&self, s: f64) -> Option<(f64, f64)> {
        let j = libm::floor(s / PI) as i64;
        if j < 2 * self.switch.m1 as i64 {
            return None;
        }
        let j = j as u32;
        let m = j / 2;
        if j % 2 == 0 {
            self.c(m).ok().map(|c| (c, -1.0))
        } else {
            self.d(m).ok().map(|d| (d, 1.0))
        }
    }

    /// The pair index `m` and left endpoint `a_{2m}` of the bump pair
    /// containing `s` (extension region maps to the first pair).
    pub fn pair_of(&self, s: f64) -> (u32, f64) {
        let m = (libm::floor(s / (2.0 * PI)) as i64).max(self.switch.m1 as i64) as u32;
        (m, 2.0 * m as f64 * PI)
    }

    /// Evaluates the forcing at `s >= s0`.
    pub fn eval_q(&self, s: f64) -> Result<f64, ConstructError> {
        if s < self.params.s0 - 1e-12 {
            return Err(ConstructError::DomainError { s, s0: self.params.s0 });
        }
        match self.piece(s) {
            None => Ok(0.0),
            Some((amp, sign)) => {
                let sn = libm::sin(s);
                Ok(sign * amp * sn * sn)
            }
        }
    }

    /// Exact bump moments: masses `(pi/2) c_m`, `(pi/2) d_m` and first
    /// moments `(pi^2/4) c_m`, `(pi^2/4) d_m`.
    pub fn moment_closed_form(
        &self,
        m: u32,
        kind: BumpKind,
        order: MomentOrder,
    ) -> Result<f64, ConstructError> {
        if m < self.switch.m1 {
            return Err(ConstructError::IndexBelowM1 { m, m1: self.switch.m1 });
        }
        let amp = match kind {
            BumpKind::NegativeBump => self.c(m)?,
            BumpKind::PositiveBump => self.d(m)?,
        };
        Ok(match order {
            MomentOrder::Mass => 0.5 * PI * amp,
            MomentOrder::First => 0.25 * PI * PI * amp,
        })
    }

    /// Exact `integral_s^oo |q| dt`: partial bump in closed form plus the
    /// amplitude series with a rigorous remainder bound. Used for decay
    /// envelopes and as the truncation oracle.
    pub fn abs_mass_from(&self, s: f64) -> f64 {
        let s = s.max(self.params.s0);
        let j = (libm::floor(s / PI) as i64).max(2 * self.switch.m1 as i64) as u32;
        let mut acc = 0.0;
        // Partial current interval [max(s, a_j), a_{j+1}], where
        // integral of sin^2 from x to (j+1)pi is (a_{j+1} - x)/2 + sin(2x)/4.
        let a_next = (j + 1) as f64 * PI;
        if s < a_next {
            if let Some((amp, _)) = self.piece(0.5 * (s.max(j as f64 * PI) + a_next)) {
                let x = s.max(j as f64 * PI);
                let unit = 0.5 * (a_next - x) + 0.25 * libm::sin(2.0 * x);
                acc += amp * unit;
            }
        }
        // Remaining half-pair when s sits in a negative bump.
        let mut m_full = j / 2 + 1;
        if j % 2 == 0 {
            let m = j / 2;
            if m >= self.switch.m1 {
                acc += 0.5 * PI * self.d(m).unwrap_or(0.0);
            }
            m_full = m + 1;
        }
        // Full pairs, then the rigorous series remainder.
        let k_stop = m_full + 200;
        for k in m_full..k_stop {
            acc += 0.5 * PI * (self.c(k).unwrap_or(0.0) + self.d(k).unwrap_or(0.0));
        }
        acc + 0.5
            * PI
            * (self.params.alpha + self.params.beta)
            * series_tail_bound(self.params.epsilon, k_stop)
    }
}

/// The Lemma 3 threshold for a single constant `C > 0`: the inequality
/// `C * eps^(m^2) / m > sum_{k>m} k eps^(k^2)` holds for every `m >= 1`
/// whenever `eps` is below the returned value, which is `1/3` for
/// `C >= 1` and `min(1/3, C/(1-C))` otherwise.
pub fn epsilon_zero(c: f64) -> Result<f64, ConstructError> {
    if !(c > 0.0) {
        return Err(ConstructError::NonPositiveC { c });
    }
    if c >= 1.0 {
        Ok(1.0 / 3.0)
    } else {
        Ok((c / (1.0 - c)).min(1.0 / 3.0))
    }
}

/// The admissible epsilon for `(alpha, beta)`: the smaller of the two
/// Lemma 3 thresholds for the constants
/// `C1 = (1/6)(1/48 - 4 beta/alpha)` and `C2 = (1/192)(beta/alpha)`,
/// capped at `1/3`. `C1 > 0` exactly because `alpha > 192 beta`.
pub fn admissible_epsilon(alpha: f64, beta: f64) -> Result<f64, ConstructError> {
    if !(alpha > 192.0 * beta) {
        return Err(ConstructError::RatioViolation { alpha, beta });
    }
    let c1 = (1.0 / 6.0) * (1.0 / 48.0 - 4.0 * beta / alpha);
    let c2 = (1.0 / 192.0) * (beta / alpha);
    let e1 = epsilon_zero(c1)?;
    let e2 = epsilon_zero(c2)?;
    Ok(e1.min(e2).min(1.0 / 3.0))
}

/// Per-index margin of the threshold inequality
/// `C * eps^(m^2)/m > sum_{k>m} k eps^(k^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lemma3Margin {
    pub m: u32,
    /// `LHS - RHS` with the tail summed by brute force plus a rigorous
    /// remainder bound; positive iff the inequality is certified at `m`.
    pub margin: f64,
}

/// Certifies the threshold inequality for `m = 1..=m_max` by brute-force
/// partial sums (200 terms) plus the rigorous geometric remainder.
pub fn check_lemma3(c: f64, epsilon: f64, m_max: u32) -> Vec<Lemma3Margin> {
    debug_assert!(epsilon > 0.0 && epsilon < 1.0 && m_max >= 1);
    let ln_eps = libm::log(epsilon);
    let mut out = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        let mm = m as f64;
        let lhs = c * libm::exp(mm * mm * ln_eps) / mm;
        let k_stop = m + 200;
        let mut rhs = 0.0;
        for k in m + 1..=k_stop {
            let kk = k as f64;
            rhs += kk * libm::exp(kk * kk * ln_eps);
        }
        rhs += series_tail_bound(epsilon, k_stop);
        out.push(Lemma3Margin { m, margin: lhs - rhs });
    }
    out
}
