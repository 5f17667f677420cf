//! Evaluation of the explicit solutions and verification of their
//! differential identities.
//!
//! The solution of `z' + p z + q = 0` is
//! `z(s) = exp(-P(s)) * integral_s^oo q(t) exp(P(t)) dt`, and
//! `h(s) = -s * integral_s^oo z(t)/t^2 dt` solves
//! `h'' + p (h' - h/s) + q/s = 0`. Both improper integrals are anchored
//! at the switch points: the weighted forcing integrals `W(a_j)` and the
//! `z/t^2` integrals `I(a_j)` are accumulated once, backward from the
//! underflow horizon with a rigorous remainder bound, and any point
//! evaluation adds only a partial-bump quadrature on top of its anchor.
//! This keeps every evaluation's error local to its own bump (so sign
//! certificates at amplitude 1e-110 remain meaningful) and makes the
//! evaluated functions smooth enough for finite-difference residuals.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::construct::Perturbation;
use crate::params::{CoefficientP, ToleranceConfig};
use crate::quad::{integrate_finite, series_tail_bound, QuadError};

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    DomainError { s: f64, s0: f64 },
    Quad(QuadError),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::DomainError { s, s0 } => {
                write!(f, "DomainError: s = {s} below domain start s0 = {s0}")
            }
            SolveError::Quad(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolveError {}

impl From<QuadError> for SolveError {
    fn from(e: QuadError) -> Self {
        SolveError::Quad(e)
    }
}

/// A value with an accumulated absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Eval {
    pub value: f64,
    pub err: f64,
}

/// One row of the sampled solution grid.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub s: f64,
    pub z: f64,
    pub h: f64,
    pub residual_ode1: f64,
    pub residual_class0: f64,
    pub identity_defect: f64,
    pub envelope: f64,
}

/// Sign alternation record at one index pair: the lemmas predict
/// `z(a_{2m}) < 0`, `z(a_{2m+1}) > 0`, `h(a_{2m}) > 0`, `h(a_{2m+1}) < 0`.
/// A sign is certified only when its magnitude exceeds ten times the
/// accumulated quadrature error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignRecord {
    pub m: u32,
    pub z_at_a2m: f64,
    pub z_at_a2m1: f64,
    pub h_at_a2m: f64,
    pub h_at_a2m1: f64,
    pub z_at_a2m_err: f64,
    pub z_at_a2m1_err: f64,
    pub h_at_a2m_err: f64,
    pub h_at_a2m1_err: f64,
    pub all_signs_ok: bool,
}

/// One point of the rigorous decay envelopes
/// `|z(s)| <= exp(tail_p(s0)) * integral_s^oo |q|` and
/// `|h(s)| <= s * integral_s^oo envelope(t)/t^2 dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayPoint {
    pub s: f64,
    pub z_bound: f64,
    pub h_bound: f64,
}

/// The sampled solutions, residuals, sign certificates and envelopes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolutionGrid {
    pub samples: Vec<Sample>,
    pub sign_certificates: Vec<SignRecord>,
    pub decay_envelope: Vec<DecayPoint>,
}

/// Precomputed switch-point anchors for evaluating `z` and `h` anywhere
/// on `[s0, oo)`.
pub struct Solver<'a> {
    pert: &'a Perturbation,
    p: &'a CoefficientP,
    tol: ToleranceConfig,
    /// First anchored switch index (`2 * m1`).
    j0: u32,
    /// Last anchored switch index; beyond it every amplitude underflows.
    j_cut: u32,
    /// `w[i] = integral_{a_{j0+i}}^oo q exp(P)`, with error estimates.
    w: Vec<f64>,
    w_err: Vec<f64>,
    /// `i_anchor[i] = integral_{a_{j0+i}}^oo z(t)/t^2 dt`.
    i_anchor: Vec<f64>,
    i_err: Vec<f64>,
}

impl<'a> Solver<'a> {
    pub fn new(
        pert: &'a Perturbation,
        p: &'a CoefficientP,
        tol: ToleranceConfig,
    ) -> Result<Self, SolveError> {
        let j0 = 2 * pert.switch.m1;
        let j_cut = 2 * pert.underflow_horizon();
        let n = (j_cut - j0 + 1) as usize;

        // Remainder of the weighted forcing integral past the horizon.
        let eps = pert.params.epsilon;
        let m_cut = j_cut / 2;
        let lead = libm::exp((m_cut as f64) * (m_cut as f64) * libm::log(eps));
        let weight_cap = libm::exp(p.tail(pert.params.s0));
        let w_tail = 0.5
            * PI
            * weight_cap
            * (pert.params.alpha + pert.params.beta)
            * (lead + series_tail_bound(eps, m_cut));

        let mut w = alloc::vec![0.0; n];
        let mut w_err = alloc::vec![0.0; n];
        w_err[n - 1] = w_tail;
        for i in (0..n - 1).rev() {
            let a_lo = (j0 + i as u32) as f64 * PI;
            let a_hi = a_lo + PI;
            let (piece, perr) = match pert.piece(0.5 * (a_lo + a_hi)) {
                None => (0.0, 0.0),
                Some((amp, sign)) => {
                    let r = integrate_finite(
                        |t| {
                            let sn = libm::sin(t);
                            sn * sn * libm::exp(p.cumulative(t))
                        },
                        a_lo,
                        a_hi,
                        &tol,
                    )?;
                    (sign * amp * r.value, amp * r.abs_error_bound)
                }
            };
            w[i] = w[i + 1] + piece;
            w_err[i] = w_err[i + 1] + perr;
        }

        let mut solver = Self {
            pert,
            p,
            tol,
            j0,
            j_cut,
            w,
            w_err,
            i_anchor: Vec::new(),
            i_err: Vec::new(),
        };

        // Anchors for the outer integral of z/t^2, backward as well. The
        // remainder past the horizon is bounded through the z-envelope.
        let a_cut = j_cut as f64 * PI;
        let mut i_anchor = alloc::vec![0.0; n];
        let mut i_err = alloc::vec![0.0; n];
        i_err[n - 1] = (solver.envelope_z(a_cut) + w_tail) / a_cut;
        for i in (0..n - 1).rev() {
            let a_lo = (j0 + i as u32) as f64 * PI;
            let a_hi = a_lo + PI;
            let r = {
                let f = |t: f64| solver.z_unchecked(t).value / (t * t);
                integrate_finite(f, a_lo, a_hi, &solver.tol)?
            };
            let z_err_mid = solver.z_unchecked(0.5 * (a_lo + a_hi)).err;
            i_anchor[i] = i_anchor[i + 1] + r.value;
            i_err[i] =
                i_err[i + 1] + r.abs_error_bound + z_err_mid * (1.0 / a_lo - 1.0 / a_hi);
        }
        solver.i_anchor = i_anchor;
        solver.i_err = i_err;
        Ok(solver)
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.tol
    }

    fn check_domain(&self, s: f64) -> Result<(), SolveError> {
        if s < self.pert.params.s0 - 1e-12 {
            Err(SolveError::DomainError { s, s0: self.pert.params.s0 })
        } else {
            Ok(())
        }
    }

    /// `z(s)` without the domain check; `Eval.err` is the propagated
    /// quadrature + truncation error.
    fn z_unchecked(&self, s: f64) -> Eval {
        let damp = libm::exp(-self.p.cumulative(s));
        let j = libm::floor(s / PI) as i64;
        if j >= self.j_cut as i64 {
            let i = (self.j_cut - self.j0) as usize;
            return Eval { value: 0.0, err: damp * self.w_err[i] };
        }
        if j < self.j0 as i64 {
            // Extension region: no forcing mass between s and a_{j0}.
            return Eval { value: damp * self.w[0], err: damp * self.w_err[0] };
        }
        let j = j as u32;
        let a_next = (j + 1) as f64 * PI;
        let i_next = (j + 1 - self.j0) as usize;
        let (partial, perr) = match self.pert.piece(0.5 * (s + a_next)) {
            None => (0.0, 0.0),
            Some((amp, sign)) => {
                let r = integrate_finite(
                    |t| {
                        let sn = libm::sin(t);
                        sn * sn * libm::exp(self.p.cumulative(t))
                    },
                    s,
                    a_next,
                    &self.tol,
                )
                .unwrap_or(crate::quad::IntegralResult {
                    value: 0.0,
                    abs_error_bound: f64::INFINITY,
                    tail_bound: 0.0,
                });
                (sign * amp * r.value, amp * r.abs_error_bound)
            }
        };
        Eval {
            value: damp * (partial + self.w[i_next]),
            err: damp * (perr + self.w_err[i_next]),
        }
    }

    /// The explicit solution `z(s)` with its error estimate.
    pub fn z(&self, s: f64) -> Result<Eval, SolveError> {
        self.check_domain(s)?;
        Ok(self.z_unchecked(s))
    }

    /// `integral_s^oo z(t)/t^2 dt` anchored at the next switch point.
    fn outer_integral(&self, s: f64) -> Result<Eval, SolveError> {
        let j = libm::floor(s / PI) as i64;
        if j >= self.j_cut as i64 {
            let i = (self.j_cut - self.j0) as usize;
            // Past the horizon |z| is below its envelope at a_cut.
            return Ok(Eval { value: 0.0, err: self.i_err[i] });
        }
        let (a_next, i_next) = if j < self.j0 as i64 {
            (self.j0 as f64 * PI, 0usize)
        } else {
            ((j + 1) as f64 * PI, (j + 1 - self.j0 as i64) as usize)
        };
        let r = integrate_finite(|t| self.z_unchecked(t).value / (t * t), s, a_next, &self.tol)?;
        let z_err = self.z_unchecked(0.5 * (s + a_next)).err;
        Ok(Eval {
            value: r.value + self.i_anchor[i_next],
            err: r.abs_error_bound
                + self.i_err[i_next]
                + z_err * (1.0 / s - 1.0 / a_next).max(0.0),
        })
    }

    /// The oscillatory solution `h(s) = -s * integral_s^oo z/t^2 dt`.
    pub fn h(&self, s: f64) -> Result<Eval, SolveError> {
        self.check_domain(s)?;
        let outer = self.outer_integral(s)?;
        Ok(Eval { value: -s * outer.value, err: s * outer.err })
    }

    /// Rigorous decay envelope `|z(s)| <= exp(tail_p(s0)) * integral_s^oo |q|`,
    /// evaluated from the closed-form amplitude series.
    pub fn envelope_z(&self, s: f64) -> f64 {
        libm::exp(self.p.tail(self.pert.params.s0)) * self.pert.abs_mass_from(s)
    }

    /// Envelope for `h`: `s * integral_s^oo envelope_z(t)/t^2 dt`, with the
    /// part past the horizon bounded by `envelope_z(a_cut)/a_cut`.
    pub fn envelope_h(&self, s: f64) -> Result<f64, SolveError> {
        let a_cut = self.j_cut as f64 * PI;
        if s >= a_cut {
            return Ok(self.envelope_z(s));
        }
        let r = integrate_finite(|t| self.envelope_z(t) / (t * t), s, a_cut, &self.tol)?;
        Ok(s * (r.value + r.abs_error_bound + self.envelope_z(a_cut) / a_cut))
    }

    /// Amplitude of the bump containing `s`, used to scale residuals.
    fn local_scale(&self, s: f64) -> f64 {
        self.pert
            .piece(s)
            .map(|(amp, _)| amp)
            .unwrap_or_else(|| self.envelope_z(s).max(f64::MIN_POSITIVE))
    }

    /// Scaled residual of `z' + p z + q = 0` with `z'` by centered
    /// differences. Sample away from switch points (the grid offsets
    /// them by pi/100) so the stencil stays inside one bump.
    pub fn residual_ode1(&self, s: f64) -> Result<f64, SolveError> {
        let delta = self.tol.fd_step_scale * s.abs().max(1.0) * 6.055e-6; // eps^(1/3)
        self.check_domain(s - delta)?;
        let zp = self.z_unchecked(s + delta).value;
        let zm = self.z_unchecked(s - delta).value;
        let z0 = self.z_unchecked(s).value;
        let q = self.pert.eval_q(s).map_err(|_| SolveError::DomainError {
            s,
            s0: self.pert.params.s0,
        })?;
        let r = (zp - zm) / (2.0 * delta) + self.p.eval(s) * z0 + q;
        Ok(r / self.local_scale(s))
    }

    /// Exact second derivative of `h` via the identity
    /// `h'' = z'/s = -(p z + q)/s`, used to cross-check the FD residual.
    pub fn h_second_exact(&self, s: f64) -> Result<f64, SolveError> {
        let z = self.z(s)?.value;
        let q = self.pert.eval_q(s).map_err(|_| SolveError::DomainError {
            s,
            s0: self.pert.params.s0,
        })?;
        Ok(-(self.p.eval(s) * z + q) / s)
    }

    /// Scaled residual of `h'' + p (h' - h/s) + q/s = 0` with second-order
    /// centered differences, scaled by `c_m / a_{2m}`.
    pub fn residual_class0(&self, s: f64) -> Result<f64, SolveError> {
        let delta = self.tol.fd_step_scale * s.abs().max(1.0) * 1.221e-4; // eps^(1/4)
        self.check_domain(s - delta)?;
        let hp = self.h(s + delta)?.value;
        let h0 = self.h(s)?.value;
        let hm = self.h(s - delta)?.value;
        let h2 = (hp - 2.0 * h0 + hm) / (delta * delta);
        let h1 = (hp - hm) / (2.0 * delta);
        let q = self.pert.eval_q(s).map_err(|_| SolveError::DomainError {
            s,
            s0: self.pert.params.s0,
        })?;
        let r = h2 + self.p.eval(s) * (h1 - h0 / s) + q / s;
        let (_, a_pair) = self.pert.pair_of(s);
        Ok(r / (self.local_scale(s) / a_pair))
    }

    /// Scaled defect of the identity `d/ds (h/s) = z/s^2`, scaled by
    /// `c_m / a_{2m}^2`.
    pub fn identity_h_over_s(&self, s: f64) -> Result<f64, SolveError> {
        let delta = self.tol.fd_step_scale * s.abs().max(1.0) * 6.055e-6;
        self.check_domain(s - delta)?;
        let gp = self.h(s + delta)?.value / (s + delta);
        let gm = self.h(s - delta)?.value / (s - delta);
        let z = self.z_unchecked(s).value;
        let defect = (gp - gm) / (2.0 * delta) - z / (s * s);
        let (_, a_pair) = self.pert.pair_of(s);
        Ok(defect / (self.local_scale(s) / (a_pair * a_pair)))
    }

    /// Sign certificates at the switch points for `m` in `[m_lo, m_hi]`.
    pub fn sign_certificates(&self, m_lo: u32, m_hi: u32) -> Result<Vec<SignRecord>, SolveError> {
        let mut out = Vec::with_capacity((m_hi.saturating_sub(m_lo) + 1) as usize);
        for m in m_lo..=m_hi {
            let a2m = 2.0 * m as f64 * PI;
            let a2m1 = a2m + PI;
            let z0 = self.z(a2m)?;
            let z1 = self.z(a2m1)?;
            let h0 = self.h(a2m)?;
            let h1 = self.h(a2m1)?;
            let certified = |v: Eval| v.value.abs() > 10.0 * v.err;
            let all_signs_ok = z0.value < 0.0
                && z1.value > 0.0
                && h0.value > 0.0
                && h1.value < 0.0
                && certified(z0)
                && certified(z1)
                && certified(h0)
                && certified(h1);
            out.push(SignRecord {
                m,
                z_at_a2m: z0.value,
                z_at_a2m1: z1.value,
                h_at_a2m: h0.value,
                h_at_a2m1: h1.value,
                z_at_a2m_err: z0.err,
                z_at_a2m1_err: z1.err,
                h_at_a2m_err: h0.err,
                h_at_a2m1_err: h1.err,
                all_signs_ok,
            });
        }
        Ok(out)
    }

    /// The rigorous decay envelopes at the even switch points.
    pub fn decay_envelope(&self, m_lo: u32, m_hi: u32) -> Result<Vec<DecayPoint>, SolveError> {
        let mut out = Vec::new();
        for m in m_lo..=m_hi {
            let s = 2.0 * m as f64 * PI;
            out.push(DecayPoint {
                s,
                z_bound: self.envelope_z(s),
                h_bound: self.envelope_h(s)?,
            });
        }
        Ok(out)
    }

    /// Deterministic sample grid: 64 interior points per bump for `m` in
    /// `[m_lo, m_hi]`, plus every switch point offset by +-pi/100.
    pub fn grid(&self, m_lo: u32, m_hi: u32) -> Result<SolutionGrid, SolveError> {
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
            if lo > self.pert.params.s0 {
                points.push(lo);
            }
            points.push(a + PI / 100.0);
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut samples = Vec::with_capacity(points.len());
        for s in points {
            samples.push(Sample {
                s,
                z: self.z(s)?.value,
                h: self.h(s)?.value,
                residual_ode1: self.residual_ode1(s)?,
                residual_class0: self.residual_class0(s)?,
                identity_defect: self.identity_h_over_s(s)?,
                envelope: self.envelope_z(s),
            });
        }
        Ok(SolutionGrid {
            samples,
            sign_certificates: self.sign_certificates(m_lo, m_hi)?,
            decay_envelope: self.decay_envelope(m_lo, m_hi + 1)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{coefficient_inverse_square, ExampleParams};
    use approx::assert_relative_eq;

    fn baseline() -> Perturbation {
        Perturbation::new(ExampleParams::baseline())
    }

    #[test]
    fn z_matches_series_oracle_at_switch_points() {
        let pert = baseline();
        let p = CoefficientP::zero(PI);
        let solver = Solver::new(&pert, &p, ToleranceConfig::default()).unwrap();
        // p = 0: z(a_2) = (pi/2) sum (-c_k + d_k), dominated by -c_1 + d_1.
        let mut series = 0.0;
        for k in 1..40u32 {
            series += 0.5 * PI * (-pert.c(k).unwrap_or(0.0) + pert.d(k).unwrap_or(0.0));
        }
        let z2 = solver.z(2.0 * PI).unwrap();
        assert_relative_eq!(z2.value, series, max_relative = 1e-9);
        assert_relative_eq!(z2.value, -7.8147e-3, max_relative = 1e-3);

        let z3 = solver.z(3.0 * PI).unwrap();
        assert_relative_eq!(z3.value, 3.927e-5, max_relative = 1e-3);
    }

    #[test]
    fn z_zero_when_no_mass_remains() {
        let pert = baseline();
        let p = CoefficientP::zero(PI);
        let solver = Solver::new(&pert, &p, ToleranceConfig::default()).unwrap();
        let far = 40.0 * PI;
        let z = solver.z(far).unwrap();
        assert_eq!(z.value, 0.0);
        let h = solver.h(far).unwrap();
        assert_eq!(h.value, 0.0);
    }

    #[test]
    fn domain_is_enforced() {
        let pert = baseline();
        let p = CoefficientP::zero(PI);
        let solver = Solver::new(&pert, &p, ToleranceConfig::default()).unwrap();
        assert!(matches!(solver.z(1.0), Err(SolveError::DomainError { .. })));
    }

    #[test]
    fn h_signs_at_first_pair() {
        let pert = baseline();
        let p = coefficient_inverse_square(0.1, PI);
        let solver = Solver::new(&pert, &p, ToleranceConfig::default()).unwrap();
        let h2 = solver.h(2.0 * PI).unwrap();
        let h3 = solver.h(3.0 * PI).unwrap();
        assert!(h2.value > 0.0, "h(a_2) = {}", h2.value);
        assert!(h3.value < 0.0, "h(a_3) = {}", h3.value);
        assert!(h2.value.abs() > 10.0 * h2.err);
        assert!(h3.value.abs() > 10.0 * h3.err);
    }

    #[test]
    fn residual_ode1_small_inside_bumps() {
        let pert = baseline();
        let p = coefficient_inverse_square(0.1, PI);
        let solver = Solver::new(&pert, &p, ToleranceConfig::default()).unwrap();
        // Construction identity: z' = -p z - q, so only FD error remains.
        let r = solver.residual_ode1(2.5 * PI).unwrap();
        assert!(r.abs() < 1e-6, "scaled residual {r}");
    }

    #[test]
    fn residual_class0_cross_check() {
        let pert = baseline();
        let p = coefficient_inverse_square(0.1, PI);
        let solver = Solver::new(&pert, &p, ToleranceConfig::default()).unwrap();
        let s = 2.5 * PI;
        let r = solver.residual_class0(s).unwrap();
        assert!(r.abs() < 1e-5, "scaled residual {r}");
        // FD h'' against the exact identity h'' = -(p z + q)/s.
        let delta = s * 1.221e-4;
        let hp = solver.h(s + delta).unwrap().value;
        let h0 = solver.h(s).unwrap().value;
        let hm = solver.h(s - delta).unwrap().value;
        let fd = (hp - 2.0 * h0 + hm) / (delta * delta);
        let exact = solver.h_second_exact(s).unwrap();
        let scale = pert.c(1).unwrap() / (2.0 * PI);
        assert!(((fd - exact) / scale).abs() < 1e-5);
    }

    #[test]
    fn identity_defect_small() {
        let pert = baseline();
        let p = coefficient_inverse_square(0.1, PI);
        let solver = Solver::new(&pert, &p, ToleranceConfig::default()).unwrap();
        for i in 0..50 {
            let s = 2.0 * PI + (i as f64 + 0.5) / 50.0 * (4.0 * PI - 2.0 * PI / 50.0);
            let d = solver.identity_h_over_s(s).unwrap();
            assert!(d.abs() < 1e-6, "s = {s}: defect {d}");
        }
    }

    #[test]
    fn z_below_envelope() {
        let pert = baseline();
        let p = coefficient_inverse_square(0.1, PI);
        let solver = Solver::new(&pert, &p, ToleranceConfig::default()).unwrap();
        for i in 0..200 {
            let s = 2.0 * PI + i as f64 * 0.11;
            let z = solver.z(s).unwrap().value;
            assert!(z.abs() <= solver.envelope_z(s) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn envelope_strictly_decreasing() {
        let pert = baseline();
        let p = coefficient_inverse_square(0.1, PI);
        let solver = Solver::new(&pert, &p, ToleranceConfig::default()).unwrap();
        let env = solver.decay_envelope(1, 6).unwrap();
        for w in env.windows(2) {
            assert!(w[1].z_bound < w[0].z_bound);
        }
        // Ratio between consecutive even switch points collapses like
        // d_1/(c_1 + d_1).
        assert!(env[1].z_bound / env[0].z_bound < 1e-2);
    }

    #[test]
    fn sign_certificates_baseline() {
        let pert = baseline();
        let p = coefficient_inverse_square(0.1, PI);
        let solver = Solver::new(&pert, &p, ToleranceConfig::default()).unwrap();
        let recs = solver.sign_certificates(1, 5).unwrap();
        for r in &recs {
            assert!(r.all_signs_ok, "m = {}: {r:?}", r.m);
        }
    }
}
