//! Adaptive quadrature over finite intervals, improper integrals of the
//! piecewise forcing over `[s, oo)`, and the rigorous geometric tail
//! bound for series of the form `sum k * epsilon^(k^2)`.
//!
//! Panels are aligned to the `pi` grid so a quadrature panel never
//! straddles a piece boundary of the forcing, and bump amplitudes are
//! factored out of the integrand so that relative accuracy survives even
//! where `epsilon^(m^2)` is within a few orders of the underflow floor.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::construct::Perturbation;
use crate::params::{CoefficientP, ToleranceConfig};

/// A quadrature value together with its estimated finite-interval error
/// and a rigorous bound on any truncated improper part.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegralResult {
    pub value: f64,
    /// Estimated absolute error of the adaptive refinement.
    pub abs_error_bound: f64,
    /// Rigorous bound on the discarded remainder of an improper integral;
    /// zero for purely finite integrals.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadError {
    /// Refinement budget exhausted before the tolerance was met.
    NonConvergence { at: f64 },
    /// Evaluation below the domain start `s0`.
    DomainError { s: f64, s0: f64 },
}

impl fmt::Display for QuadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadError::NonConvergence { at } => {
                write!(f, "NonConvergence: quadrature did not converge near s = {at}")
            }
            QuadError::DomainError { s, s0 } => {
                write!(f, "DomainError: s = {s} is below the domain start s0 = {s0}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for QuadError {}

const MAX_DEPTH: u32 = 48;

/// One step of adaptive Simpson on `[a, b]` given precomputed endpoint
/// and midpoint values. Accumulates value and an error estimate.
#[allow(clippy::too_many_arguments)]
fn simpson_adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err_acc: &mut f64,
) -> Result<f64, QuadError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let h = b - a;
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || h < 1e-14 * (a.abs() + 1.0) {
        *err_acc += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(QuadError::NonConvergence { at: m });
    }
    let l = simpson_adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err_acc)?;
    let r = simpson_adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err_acc)?;
    Ok(l + r)
}

fn adaptive_panel<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(f64, f64), QuadError> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut err = 0.0;
    let v = simpson_adapt(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut err)?;
    Ok((v, err))
}

/// Integrates `f` over `[a, b]` to the configured relative tolerance.
///
/// The interval is first split at every interior multiple of `pi`, so
/// each `sin^2` lobe of the forcing is resolved by its own panels.
pub fn integrate_finite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: &ToleranceConfig,
) -> Result<IntegralResult, QuadError> {
    debug_assert!(a <= b);
    if a == b {
        return Ok(IntegralResult { value: 0.0, abs_error_bound: 0.0, tail_bound: 0.0 });
    }
    // Panel boundaries: a, interior multiples of pi, b.
    let mut cuts: Vec<f64> = Vec::new();
    cuts.push(a);
    let mut k = libm::floor(a / PI) as i64 + 1;
    while (k as f64) * PI < b {
        let c = k as f64 * PI;
        if c > a {
            cuts.push(c);
        }
        k += 1;
    }
    cuts.push(b);

    // Coarse scale estimate of the total |integral| to anchor the
    // relative tolerance; floored to avoid a zero absolute tolerance.
    let mut scale = 0.0_f64;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let m = 0.5 * (x0 + x1);
        scale += (x1 - x0) / 6.0 * (f(x0).abs() + 4.0 * f(m).abs() + f(x1).abs());
    }
    let scale = scale.max(f64::MIN_POSITIVE / tol.quad_rel_tol);

    let mut value = 0.0;
    let mut err = 0.0;
    let total_len = b - a;
    for w in cuts.windows(2) {
        let panel_tol = tol.quad_rel_tol * scale * (w[1] - w[0]) / total_len;
        let (v, e) = adaptive_panel(&f, w[0], w[1], panel_tol)?;
        value += v;
        err += e;
    }
    Ok(IntegralResult { value, abs_error_bound: err, tail_bound: 0.0 })
}

/// A rigorous upper bound on the series tail `sum_{k > K} k * epsilon^(k^2)`.
///
/// Writing `k = K + j`, the exponent satisfies
/// `k^2 >= K^2 + (2K + 1) j`, so with `r = epsilon^(2K+1)` the tail is
/// dominated by `epsilon^(K^2) * sum_j (K + j) r^j`, which sums to
/// `epsilon^(K^2) * [K r/(1-r) + r/(1-r)^2]`.
pub fn series_tail_bound(epsilon: f64, big_k: u32) -> f64 {
    debug_assert!(epsilon > 0.0 && epsilon < 1.0 && big_k >= 1);
    let kk = big_k as f64;
    let lead = libm::exp(kk * kk * libm::log(epsilon));
    if lead == 0.0 {
        return 0.0;
    }
    let r = libm::exp((2.0 * kk + 1.0) * libm::log(epsilon));
    let one_minus = 1.0 - r;
    lead * (kk * r / one_minus + r / (one_minus * one_minus))
}

/// Which integrand the improper integral uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QIntegralMode {
    /// `integral_s^oo q dt`.
    Signed,
    /// `integral_s^oo |q| dt`.
    Abs,
    /// `integral_s^oo q(t) exp(P(t)) dt`, the integrating-factor weighted
    /// integral behind the explicit solution `z`.
    WeightedSigned,
    /// `integral_s^oo |q(t)| exp(P(t)) dt`.
    WeightedAbs,
}

impl QIntegralMode {
    fn weighted(self) -> bool {
        matches!(self, QIntegralMode::WeightedSigned | QIntegralMode::WeightedAbs)
    }
    fn absolute(self) -> bool {
        matches!(self, QIntegralMode::Abs | QIntegralMode::WeightedAbs)
    }
}

/// Improper integral of the forcing from `s`, bump by bump, truncated
/// only when the rigorous series remainder is negligible relative to the
/// accumulated value. The discarded remainder is reported in
/// `tail_bound`, never silently dropped.
pub fn improper_q_integral(
    pert: &Perturbation,
    p: &CoefficientP,
    s: f64,
    mode: QIntegralMode,
    tol: &ToleranceConfig,
) -> Result<IntegralResult, QuadError> {
    let s0 = pert.params.s0;
    if s < s0 - 1e-12 {
        return Err(QuadError::DomainError { s, s0 });
    }
    let weight_cap = if mode.weighted() {
        libm::exp(p.tail(s0))
    } else {
        1.0
    };

    // First interval index j with a_{j+1} > s and j >= 2*m1.
    let j_start = {
        let j = libm::floor(s / PI).max(0.0) as u32;
        j.max(2 * pert.switch.m1)
    };

    let mut value = 0.0_f64;
    let mut err = 0.0_f64;
    let mut j = j_start;
    let cap = j_start + 1200;
    loop {
        // Truncation test at even switch points: the remaining mass from
        // a_{2M} onward is at most (pi/2) * (alpha+beta) * W *
        // (eps^(M^2) + tail-bound(M)).
        if j % 2 == 0 && j > j_start {
            let m = j / 2;
            let eps = pert.params.epsilon;
            let lead = libm::exp((m as f64) * (m as f64) * libm::log(eps));
            let remainder = 0.5
                * PI
                * weight_cap
                * (pert.params.alpha + pert.params.beta)
                * (lead + series_tail_bound(eps, m));
            if remainder <= tol.tail_rel_tol * value.abs() || remainder == 0.0 {
                return Ok(IntegralResult { value, abs_error_bound: err, tail_bound: remainder });
            }
        }
        if j >= cap {
            return Err(QuadError::NonConvergence { at: j as f64 * PI });
        }

        let a_lo = (j as f64 * PI).max(s.max(s0));
        let a_hi = (j + 1) as f64 * PI;
        if a_hi > a_lo {
            let piece = pert.piece(0.5 * (a_lo + a_hi));
            if let Some((amp, sign)) = piece {
                let signed_amp = if mode.absolute() { amp } else { sign * amp };
                if amp > 0.0 {
                    // Factor the amplitude out: integrate sin^2 (times the
                    // integrating factor when weighted) in O(1) units.
                    let r = if mode.weighted() {
                        integrate_finite(
                            |t| {
                                let sn = libm::sin(t);
                                sn * sn * libm::exp(p.cumulative(t))
                            },
                            a_lo,
                            a_hi,
                            tol,
                        )?
                    } else {
                        integrate_finite(
                            |t| {
                                let sn = libm::sin(t);
                                sn * sn
                            },
                            a_lo,
                            a_hi,
                            tol,
                        )?
                    };
                    value += signed_amp * r.value;
                    err += amp * r.abs_error_bound;
                }
            }
        }
        j += 1;
    }
}
