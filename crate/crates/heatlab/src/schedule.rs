//! Dyadic cutoff schedule: the bookkeeping that turns a growth bound into a
//! uniqueness argument.
//!
//! Energy on the ball of radius `R_i = 2^i R₀` is controlled for a time
//! budget `τ`, and each doubling step spends `R_i² / (16 L(2R_i))` of it.
//! If the Osgood integral of `L` diverges the budget never runs out and the
//! estimate propagates to all of space; if it converges the schedule
//! exhausts after finitely many shells. The weight driving the estimate is
//! `ξ = -(r-R)₊² / (4(T-t))`, an exact solution of `∂ₜξ + |∇ξ|² = 0`.
//!
//! Radii grow past f64 range within ~10³ steps, so each row carries `ln R_i`
//! and the step switches to log-domain arithmetic once the real formula
//! would overflow. While everything is representable the budget update uses
//! plain f64 subtraction, so binary-exact cases (e.g. `L = r²`, where every
//! step is exactly 1/64) terminate in exactly the predicted step count.

use crate::growth::GrowthFunction;
use crate::logscalar::LogScalar;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("need r0 > 0, tau0 > 0 and max_steps >= 1, got r0={r0}, tau0={tau0}, max_steps={max_steps}")]
    BadParams { r0: f64, tau0: f64, max_steps: usize },
    #[error("cutoff order m={m} must exceed a+1={min} for the shell bound to vanish with tau")]
    OrderTooSmall { m: u32, min: f64 },
}

/// `ξ(r, t) = -(r-R)₊² / (4(T-t))` for t < T; zero inside the ball.
pub fn xi_weight(r: f64, t: f64, big_r: f64, big_t: f64) -> f64 {
    assert!(t < big_t, "weight needs t < T, got t={t}, T={big_t}");
    let excess = (r - big_r).max(0.0);
    -excess * excess / (4.0 * (big_t - t))
}

/// Residual of `∂ₜξ + |∇ξ|²` with `∂ₜ` replaced by a central difference of
/// width `h`; the gradient term is exact: `|∇ξ|² = (r-R)₊² / (4(T-t)²)`.
/// The true residual is zero, so what remains is the O(h²) difference error
/// `-(r-R)₊² h² / (4(T-t)⁴)` plus rounding.
pub fn xi_eikonal_residual(r: f64, t: f64, big_r: f64, big_t: f64, h: f64) -> f64 {
    assert!(h > 0.0 && t - h > -big_t && t + h < big_t);
    let dt = (xi_weight(r, t + h, big_r, big_t) - xi_weight(r, t - h, big_r, big_t)) / (2.0 * h);
    let excess = (r - big_r).max(0.0);
    let grad_sq = excess * excess / (4.0 * (big_t - t) * (big_t - t));
    dt + grad_sq
}

/// Iterated-cutoff constant `4^{2m-1} m^m` as an exact integer-valued f64,
/// available while `m^m` fits in 53 bits (m <= 13; powers of two rescale
/// exactly).
pub fn cutoff_constant_exact(m: u32) -> Option<f64> {
    assert!(m >= 1);
    if m > 13 {
        return None;
    }
    let mut v = 1.0f64;
    for _ in 0..(2 * m - 1) {
        v *= 4.0;
    }
    for _ in 0..m {
        v *= m as f64;
    }
    Some(v)
}

/// Iterated-cutoff constant `4^{2m-1} m^m` in log form, for any order.
pub fn cutoff_constant(m: u32) -> LogScalar {
    match cutoff_constant_exact(m) {
        Some(v) => LogScalar::from_real(v),
        None => {
            let m_f = m as f64;
            LogScalar::exp_ln((2.0 * m_f - 1.0) * 4.0f64.ln() + m_f * m_f.ln())
        }
    }
}

/// Shell bound `C(m) · τ^{m-1-a} / R^{2m}` in log form; needs m > a+1 so
/// the bound vanishes as τ → 0.
pub fn shell_bound_term(m: u32, a: f64, ln_tau: f64, ln_r: f64) -> Result<LogScalar, ScheduleError> {
    let m_f = m as f64;
    if !(m_f > a + 1.0) {
        return Err(ScheduleError::OrderTooSmall { m, min: a + 1.0 });
    }
    Ok(LogScalar::exp_ln(
        cutoff_constant(m).ln_mag() + (m_f - 1.0 - a) * ln_tau - 2.0 * m_f * ln_r,
    ))
}

/// Sum of the shell bounds over all dyadic shells `R_i = 2^i R₀` with a
/// common budget: the ratio between consecutive terms is at most 4^{-m},
/// so the series telescopes below `2 · C(m) · τ₀^{m-1-a} / R₀^{2m}`.
pub fn telescoped_bound(
    m: u32,
    a: f64,
    ln_tau0: f64,
    ln_r0: f64,
) -> Result<LogScalar, ScheduleError> {
    let first = shell_bound_term(m, a, ln_tau0, ln_r0)?;
    Ok(LogScalar::from_real(2.0) * first)
}

#[derive(Clone, Copy, Debug)]
pub struct ScheduleParams {
    /// Innermost radius R₀ > 0.
    pub r0: f64,
    /// Initial time budget τ₀ > 0.
    pub tau0: f64,
    /// Hard cap on the number of doubling steps.
    pub max_steps: usize,
}

/// One doubling step: the state *before* spending the step.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScheduleRow {
    pub i: usize,
    /// ln R_i (radii outgrow f64 quickly).
    pub ln_r: f64,
    /// Budget τ_i remaining before this step.
    pub tau: f64,
    /// ln of the step R_i²/(16 L(2R_i)).
    pub ln_step: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScheduleResult {
    pub rows: Vec<ScheduleRow>,
    /// Budget left after the last recorded step (0 iff exhausted).
    pub final_tau: f64,
    /// True if the budget hit zero before `max_steps`.
    pub exhausted: bool,
}

/// Greedy budget schedule `τ_{i+1} = max(0, τ_i - R_i²/(16 L(2R_i)))` over
/// `R_i = 2^i R₀`, stopping when the budget is spent or `max_steps` hit.
pub fn build_schedule(
    l: &GrowthFunction,
    params: ScheduleParams,
) -> Result<ScheduleResult, ScheduleError> {
    if !(params.r0 > 0.0) || !(params.tau0 > 0.0) || params.max_steps == 0 {
        return Err(ScheduleError::BadParams {
            r0: params.r0,
            tau0: params.tau0,
            max_steps: params.max_steps,
        });
    }
    let ln2 = std::f64::consts::LN_2;
    let ln_r0 = params.r0.ln();
    let mut tau = params.tau0;
    let mut r_real = Some(params.r0);
    let mut rows = Vec::new();
    let mut exhausted = false;
    for i in 0..params.max_steps {
        let ln_r = ln_r0 + i as f64 * ln2;
        // Real-domain step while R² and L(2R) stay inside f64; keeps
        // binary-exact growth laws binary exact.
        let ln_l2r = l.eval_ln(ln2 + ln_r);
        let step = match r_real {
            Some(r) if ln_r < 345.0 && ln_l2r < 700.0 && ln_l2r > -700.0 => {
                let l2r = l.eval(2.0 * r).expect("radius is positive");
                (r * r / (16.0 * l2r), 2.0 * ln_r - 16f64.ln() - ln_l2r)
            }
            _ => {
                let ln_step = 2.0 * ln_r - 16f64.ln() - ln_l2r;
                (ln_step.exp(), ln_step)
            }
        };
        rows.push(ScheduleRow {
            i,
            ln_r,
            tau,
            ln_step: step.1,
        });
        tau = (tau - step.0).max(0.0);
        if tau == 0.0 {
            exhausted = true;
            break;
        }
        r_real = match r_real {
            Some(r) if 2.0 * r < f64::MAX / 4.0 => Some(2.0 * r),
            _ => None,
        };
    }
    Ok(ScheduleResult {
        rows,
        final_tau: tau,
        exhausted,
    })
}

/// Anything that can report the squared mass it holds in a centered ball at
/// a given time.
pub trait SpaceTimeField {
    /// `∫_{B(0,R)} u(x, t)² dx` in log form.
    fn ball_energy(&self, radius: f64, t: f64) -> LogScalar;
}

#[derive(Clone, Copy, Debug)]
pub struct ProbeParams {
    pub radius: f64,
    /// Largest probe time; successive times halve.
    pub t0: f64,
    /// Number of halvings (>= 6 so the verdict window is meaningful).
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProbeVerdict {
    /// The scaled energy `t⁻¹ ∫_B u²` at least halves with each halving of
    /// t over the final window — what any field vanishing in L² near t = 0
    /// faster than √t must do.
    ConsistentWithVanishing,
    /// Scaled energy failed to halve at the recorded step index.
    Persistent { first_violation: usize },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProbeRow {
    pub t: f64,
    /// `t⁻¹ ∫_{B(R)} u(t)²`.
    pub scaled_energy: LogScalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    pub verdict: ProbeVerdict,
}

/// Probe the small-time behavior of `t⁻¹ ∫_{B(R)} u(t)²` along halving
/// times. The verdict looks only at the last five consecutive pairs, where
/// transients from the initial profile have died down; equality is allowed
/// (up to 1e-9 in ln) so exact borderline decay passes.
pub fn small_time_vanishing_probe(
    field: &dyn SpaceTimeField,
    params: ProbeParams,
) -> ProbeReport {
    assert!(params.radius > 0.0 && params.t0 > 0.0 && params.steps >= 6);
    let mut rows = Vec::with_capacity(params.steps + 1);
    for j in 0..=params.steps {
        let t = params.t0 * 0.5f64.powi(j as i32);
        let energy = field.ball_energy(params.radius, t);
        let scaled = energy * LogScalar::from_real(t).recip().expect("t > 0");
        rows.push(ProbeRow {
            t,
            scaled_energy: scaled,
        });
    }
    let mut verdict = ProbeVerdict::ConsistentWithVanishing;
    let first_checked = params.steps.saturating_sub(5);
    for j in first_checked..params.steps {
        let p = rows[j].scaled_energy;
        let p_next = rows[j + 1].scaled_energy;
        let halves = if p_next.is_zero() {
            true
        } else if p.is_zero() {
            false
        } else {
            p_next.ln_mag() <= p.ln_mag() - std::f64::consts::LN_2 + 1e-9
        };
        if !halves {
            verdict = ProbeVerdict::Persistent { first_violation: j };
            break;
        }
    }
    ProbeReport { rows, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthFunction;

    #[test]
    fn weight_values_and_support() {
        // Inside the ball the weight vanishes.
        assert_eq!(xi_weight(0.5, 0.2, 1.0, 1.0), 0.0);
        assert_eq!(xi_weight(1.0, 0.2, 1.0, 1.0), 0.0);
        // ξ(2, 1/2) with R = T = 1: -(1)²/(4·1/2) = -1/2.
        assert!((xi_weight(2.0, 0.5, 1.0, 1.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn eikonal_residual_matches_h2_prediction() {
        // Predicted residual -(r-R)₊² h²/(4(T-t)⁴).
        let (r, t, h) = (2.0, 0.5, 1e-4);
        let res = xi_eikonal_residual(r, t, 1.0, 1.0, h);
        let predicted = -1.0 * h * h / (4.0 * 0.5f64.powi(4));
        assert!(res.abs() < 1e-6, "residual {res} too large");
        assert!(
            (res - predicted).abs() < 0.05 * predicted.abs() + 1e-12,
            "residual {res} vs predicted {predicted}"
        );
        // Inside the ball everything is identically zero.
        assert_eq!(xi_eikonal_residual(0.3, 0.5, 1.0, 1.0, h), 0.0);
    }

    #[test]
    fn cutoff_constants_exact_small_orders() {
        // 4^3·2² = 256 and 4^5·3³ = 27648, exactly.
        assert_eq!(cutoff_constant_exact(2), Some(256.0));
        assert_eq!(cutoff_constant_exact(3), Some(27648.0));
        assert_eq!(cutoff_constant_exact(14), None);
        // Log route agrees with the exact route at the crossover.
        let exact = cutoff_constant(13).ln_mag();
        let via_ln = 25.0 * 4.0f64.ln() + 13.0 * 13.0f64.ln();
        assert!((exact - via_ln).abs() < 1e-12 * via_ln);
        // Far beyond f64: C(200) has ln = 399 ln4 + 200 ln200.
        let big = cutoff_constant(200).ln_mag();
        assert!((big - (399.0 * 4.0f64.ln() + 200.0 * 200.0f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn shell_bound_values() {
        // C(3)·(1/4)^{3-1-1}/2^6 = 27648·(1/4)/64 = 108 at m=3, a=1.
        let b = shell_bound_term(3, 1.0, 0.25f64.ln(), 2.0f64.ln()).unwrap();
        assert!((b.to_real().unwrap() - 108.0).abs() < 1e-10);
        // Telescoped sum doubles the leading term.
        let t = telescoped_bound(3, 1.0, 0.25f64.ln(), 2.0f64.ln()).unwrap();
        assert!((t.to_real().unwrap() - 216.0).abs() < 1e-10);
        // m too small for the budget exponent.
        assert_eq!(
            shell_bound_term(2, 1.5, 0.0, 0.0),
            Err(ScheduleError::OrderTooSmall { m: 2, min: 2.5 })
        );
    }

    #[test]
    fn quadratic_growth_spends_budget_in_exactly_64_steps() {
        // L = r²: each step is R²/(16·4R²) = 1/64 exactly in binary, so a
        // unit budget lasts exactly 64 steps.
        let l = GrowthFunction::power(1.0, 2.0).unwrap();
        let res = build_schedule(
            &l,
            ScheduleParams {
                r0: 1.0,
                tau0: 1.0,
                max_steps: 10_000,
            },
        )
        .unwrap();
        assert!(res.exhausted);
        assert_eq!(res.rows.len(), 64);
        assert_eq!(res.final_tau, 0.0);
        assert_eq!(res.rows[0].tau, 1.0);
        // Row 63 still holds exactly one step of budget.
        assert_eq!(res.rows[63].tau, 1.0 / 64.0);
        assert!((res.rows[63].ln_r - 63.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn cubic_growth_never_exhausts() {
        // L = r³: steps 2^{-i}/128 sum to 1/64 < 1, so the budget survives.
        let l = GrowthFunction::power(1.0, 3.0).unwrap();
        let res = build_schedule(
            &l,
            ScheduleParams {
                r0: 1.0,
                tau0: 1.0,
                max_steps: 500,
            },
        )
        .unwrap();
        assert!(!res.exhausted);
        assert_eq!(res.rows.len(), 500);
        assert!((res.final_tau - (1.0 - 1.0 / 64.0)).abs() < 1e-12);
    }

    #[test]
    fn hundred_thousand_steps_in_log_domain() {
        // L = r²·ln(e+r): steps ≈ 1/(64 ln 2R_i) shrink so slowly the
        // budget lasts ~e^44 steps; run 10⁵ and check the radii kept
        // doubling far past f64 range.
        let l = GrowthFunction::power_log(1.0, 2.0, 1.0).unwrap();
        let res = build_schedule(
            &l,
            ScheduleParams {
                r0: 1.0,
                tau0: 1.0,
                max_steps: 100_000,
            },
        )
        .unwrap();
        assert!(!res.exhausted);
        assert_eq!(res.rows.len(), 100_000);
        let last = res.rows.last().unwrap();
        assert!((last.ln_r - 99_999.0 * std::f64::consts::LN_2).abs() < 1e-6);
        assert!(res.final_tau > 0.5 && res.final_tau < 0.9, "final_tau = {}", res.final_tau);
        // Budget is nonincreasing along the schedule.
        for w in res.rows.windows(2) {
            assert!(w[1].tau <= w[0].tau);
        }
    }

    struct MockField {
        /// ball_energy(t) = coeff · t^power.
        coeff: f64,
        power: f64,
    }

    impl SpaceTimeField for MockField {
        fn ball_energy(&self, _radius: f64, t: f64) -> LogScalar {
            if self.coeff == 0.0 {
                LogScalar::zero()
            } else {
                LogScalar::exp_ln(self.coeff.ln() + self.power * t.ln())
            }
        }
    }

    #[test]
    fn probe_verdicts() {
        let params = ProbeParams {
            radius: 4.0,
            t0: 1.0,
            steps: 10,
        };
        // Identically zero field: vacuously vanishing.
        let zero = MockField { coeff: 0.0, power: 0.0 };
        assert_eq!(
            small_time_vanishing_probe(&zero, params).verdict,
            ProbeVerdict::ConsistentWithVanishing
        );
        // Energy ~ t²: scaled energy ~ t halves exactly each step — the
        // borderline case must pass.
        let borderline = MockField { coeff: 3.0, power: 2.0 };
        assert_eq!(
            small_time_vanishing_probe(&borderline, params).verdict,
            ProbeVerdict::ConsistentWithVanishing
        );
        // Energy → const as t → 0 (any nontrivial regular solution):
        // scaled energy doubles, violating at the first checked pair.
        let persistent = MockField { coeff: 1.0, power: 0.0 };
        let report = small_time_vanishing_probe(&persistent, params);
        assert_eq!(
            report.verdict,
            ProbeVerdict::Persistent { first_violation: 5 }
        );
        assert_eq!(report.rows.len(), 11);
    }
}
