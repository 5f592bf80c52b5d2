//! Growth-function families `L(r)` and curvature families `k(r)`, with
//! classification of the two divergence conditions that separate uniqueness
//! classes from non-uniqueness ones:
//!
//! * growth condition: `∫₁^∞ r / L(r) dr = ∞`
//! * curvature condition: `∫₁^∞ dr / k(r) = ∞`
//!
//! Every family is nondecreasing on `(0, ∞)` and positive, with one
//! deliberate exception: a constant growth budget may be any real, because
//! growth values are log-scale ceilings and a ceiling below 1 is a
//! legitimate membership bound (the divergence machinery rejects those).
//! Construction rejects parameterizations that would break monotonicity.
//! Closed-form
//! families are classified analytically from their `(power, log-power)`
//! asymptotics; tables fall back to a numeric doubling probe that is honest
//! about its limits — it returns `Inconclusive` when the increment pattern
//! sits too close to the decision boundary.

use crate::logscalar::LogScalar;
use crate::quad::integrate_ln;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GrowthError {
    #[error("parameter out of range: {0}")]
    InvalidParam(String),
    #[error("table must contain at least one point with increasing radii, positive nondecreasing values")]
    BadTable,
    #[error("evaluation requires r >= 0, got {0}")]
    NegativeRadius(f64),
    #[error("probe radius must be finite and >= 1, got {0}")]
    BadProbeRadius(f64),
    #[error("config: {0}")]
    BadConfig(String),
}

/// Piecewise-linear, positive, nondecreasing table. Below the first knot the
/// value is clamped to the first entry; beyond the last knot the final slope
/// is extrapolated. Both choices keep the function nondecreasing and defined
/// on all of `(0, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneTable {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl MonotoneTable {
    pub fn new(points: &[(f64, f64)]) -> Result<MonotoneTable, GrowthError> {
        if points.is_empty() {
            return Err(GrowthError::BadTable);
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                return Err(GrowthError::BadTable);
            }
        }
        if points.iter().any(|p| !(p.1 > 0.0) || p.0 < 0.0 || !p.0.is_finite() || !p.1.is_finite())
        {
            return Err(GrowthError::BadTable);
        }
        Ok(MonotoneTable {
            radii: points.iter().map(|p| p.0).collect(),
            values: points.iter().map(|p| p.1).collect(),
        })
    }

    fn eval(&self, r: f64) -> f64 {
        let n = self.radii.len();
        if r <= self.radii[0] {
            return self.values[0];
        }
        if r >= self.radii[n - 1] {
            if n == 1 {
                return self.values[0];
            }
            let slope = (self.values[n - 1] - self.values[n - 2])
                / (self.radii[n - 1] - self.radii[n - 2]);
            return self.values[n - 1] + slope * (r - self.radii[n - 1]);
        }
        let idx = self.radii.partition_point(|&x| x <= r) - 1;
        let t = (r - self.radii[idx]) / (self.radii[idx + 1] - self.radii[idx]);
        self.values[idx] + t * (self.values[idx + 1] - self.values[idx])
    }

    fn final_slope(&self) -> f64 {
        let n = self.radii.len();
        if n == 1 {
            0.0
        } else {
            (self.values[n - 1] - self.values[n - 2]) / (self.radii[n - 1] - self.radii[n - 2])
        }
    }
}

#[derive(Clone, Debug)]
enum Shape {
    /// c · r^beta
    Power { c: f64, beta: f64 },
    /// c · r^beta · ln(e + r)^gamma
    PowerLog { c: f64, beta: f64, gamma: f64 },
    /// c
    Constant { c: f64 },
    /// c · r · k(2r)
    FromCurvature { c: f64, k: Box<Shape> },
    Table(MonotoneTable),
}

impl Shape {
    fn validate(&self) -> Result<(), GrowthError> {
        match self {
            Shape::Power { c, beta } => {
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(GrowthError::InvalidParam(format!("c must be positive, got {c}")));
                }
                if *beta < 0.0 || !beta.is_finite() {
                    return Err(GrowthError::InvalidParam(format!(
                        "beta must be nonnegative, got {beta}"
                    )));
                }
                Ok(())
            }
            Shape::PowerLog { c, beta, gamma } => {
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(GrowthError::InvalidParam(format!("c must be positive, got {c}")));
                }
                if *beta < 0.0 || !beta.is_finite() || !gamma.is_finite() {
                    return Err(GrowthError::InvalidParam(format!(
                        "need beta >= 0 and finite gamma, got beta={beta}, gamma={gamma}"
                    )));
                }
                // d/dr [r^β ln(e+r)^γ] ∝ β·ln(e+r) + γ·r/(e+r); since
                // ln(e+r) >= 1 > r/(e+r), β + γ >= 0 keeps it nondecreasing.
                if *gamma < 0.0 && beta + gamma < 0.0 {
                    return Err(GrowthError::InvalidParam(format!(
                        "beta + gamma must be >= 0 to stay nondecreasing, got beta={beta}, gamma={gamma}"
                    )));
                }
                Ok(())
            }
            Shape::Constant { c } => {
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(GrowthError::InvalidParam(format!("c must be positive, got {c}")));
                }
                Ok(())
            }
            Shape::FromCurvature { c, k } => {
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(GrowthError::InvalidParam(format!("c must be positive, got {c}")));
                }
                k.validate()
            }
            Shape::Table(_) => Ok(()), // validated at table construction
        }
    }

    fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match self {
            Shape::Power { c, beta } => {
                if *beta == 0.0 {
                    *c
                } else {
                    c * r.powf(*beta)
                }
            }
            Shape::PowerLog { c, beta, gamma } => {
                c * r.powf(*beta) * (std::f64::consts::E + r).ln().powf(*gamma)
            }
            Shape::Constant { c } => *c,
            Shape::FromCurvature { c, k } => c * r * k.eval(2.0 * r),
            Shape::Table(t) => t.eval(r),
        }
    }

    /// ln of the value at r = exp(ln_r); stays finite for radii far beyond
    /// f64 range, which the schedule needs once R_i = 2^i R0 passes ~2^1024.
    fn eval_ln(&self, ln_r: f64) -> f64 {
        match self {
            Shape::Power { c, beta } => c.ln() + beta * ln_r,
            Shape::PowerLog { c, beta, gamma } => {
                c.ln() + beta * ln_r + gamma * ln_e_plus_exp(ln_r).ln()
            }
            Shape::Constant { c } => c.ln(),
            Shape::FromCurvature { c, k } => {
                c.ln() + ln_r + k.eval_ln(std::f64::consts::LN_2 + ln_r)
            }
            Shape::Table(t) => {
                if ln_r < 700.0 {
                    t.eval(ln_r.exp()).ln()
                } else {
                    let slope = t.final_slope();
                    if slope == 0.0 {
                        t.values[t.values.len() - 1].ln()
                    } else {
                        // slope·r dominates every other term out here.
                        slope.ln() + ln_r
                    }
                }
            }
        }
    }

    /// Whether values are strictly positive everywhere — true by
    /// construction for every family except a relaxed constant budget.
    fn positive(&self) -> bool {
        match self {
            Shape::Constant { c } => *c > 0.0,
            _ => true,
        }
    }

    /// `(p, q)` with `f(r) ~ A·r^p·(ln r)^q` as `r → ∞`, when closed-form.
    fn asymptotics(&self) -> Option<(f64, f64)> {
        match self {
            Shape::Power { beta, .. } => Some((*beta, 0.0)),
            Shape::PowerLog { beta, gamma, .. } => Some((*beta, *gamma)),
            Shape::Constant { .. } => Some((0.0, 0.0)),
            Shape::FromCurvature { k, .. } => k.asymptotics().map(|(p, q)| (p + 1.0, q)),
            Shape::Table(_) => None,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Power { c, beta } => write!(f, "power(c={c}, beta={beta})"),
            Shape::PowerLog { c, beta, gamma } => {
                write!(f, "powerlog(c={c}, beta={beta}, gamma={gamma})")
            }
            Shape::Constant { c } => write!(f, "constant(c={c})"),
            Shape::FromCurvature { c, k } => write!(f, "from_curvature(c={c}, k={k})"),
            Shape::Table(t) => write!(f, "table({} points)", t.radii.len()),
        }
    }
}

macro_rules! family_wrapper {
    ($name:ident) => {
        impl $name {
            pub fn power(c: f64, beta: f64) -> Result<$name, GrowthError> {
                let s = Shape::Power { c, beta };
                s.validate()?;
                Ok($name(s))
            }

            pub fn power_log(c: f64, beta: f64, gamma: f64) -> Result<$name, GrowthError> {
                let s = Shape::PowerLog { c, beta, gamma };
                s.validate()?;
                Ok($name(s))
            }

            pub fn table(points: &[(f64, f64)]) -> Result<$name, GrowthError> {
                Ok($name(Shape::Table(MonotoneTable::new(points)?)))
            }

            /// Value at radius `r >= 0`.
            pub fn eval(&self, r: f64) -> Result<f64, GrowthError> {
                if !(r >= 0.0) {
                    return Err(GrowthError::NegativeRadius(r));
                }
                Ok(self.0.eval(r))
            }

            /// ln of the value at `r = exp(ln_r)`; total in `ln_r`.
            pub fn eval_ln(&self, ln_r: f64) -> f64 {
                self.0.eval_ln(ln_r)
            }

            pub fn describe(&self) -> String {
                self.0.to_string()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

/// A growth bound `L(r)`: nondecreasing on `(0, ∞)`, and positive except
/// possibly for a constant budget (a log-scale ceiling).
#[derive(Clone, Debug)]
pub struct GrowthFunction(Shape);

/// A curvature-scale function `k(r)`: positive and nondecreasing.
#[derive(Clone, Debug)]
pub struct CurvatureFunction(Shape);

family_wrapper!(GrowthFunction);
family_wrapper!(CurvatureFunction);

impl GrowthFunction {
    /// `L(r) = c · r · k(2r)` — the growth function induced by a curvature
    /// scale; nondecreasing as a product of nonnegative nondecreasing parts.
    pub fn from_curvature(c: f64, k: CurvatureFunction) -> Result<GrowthFunction, GrowthError> {
        let s = Shape::FromCurvature { c, k: Box::new(k.0) };
        s.validate()?;
        Ok(GrowthFunction(s))
    }

    /// Constant budget `L(r) = c`, any finite real. Growth values are
    /// log-scale ceilings on integrals, so negative constants are
    /// meaningful (a ceiling below 1); the Osgood machinery still insists
    /// on positivity and errors out on non-positive constants.
    pub fn constant(c: f64) -> Result<GrowthFunction, GrowthError> {
        if !c.is_finite() {
            return Err(GrowthError::InvalidParam(format!("c must be finite, got {c}")));
        }
        Ok(GrowthFunction(Shape::Constant { c }))
    }
}

impl CurvatureFunction {
    pub fn from_curvature(c: f64, k: CurvatureFunction) -> Result<CurvatureFunction, GrowthError> {
        let s = Shape::FromCurvature { c, k: Box::new(k.0) };
        s.validate()?;
        Ok(CurvatureFunction(s))
    }

    /// Constant curvature scale `k(r) = c > 0` — curvature divides radii,
    /// so non-positive constants stay rejected here.
    pub fn constant(c: f64) -> Result<CurvatureFunction, GrowthError> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(GrowthError::InvalidParam(format!("c must be positive, got {c}")));
        }
        Ok(CurvatureFunction(Shape::Constant { c }))
    }
}

/// ln(e + r) given ln r, total in ln_r.
fn ln_e_plus_exp(ln_r: f64) -> f64 {
    if ln_r > 709.0 {
        ln_r
    } else if ln_r < -709.0 {
        1.0
    } else {
        (std::f64::consts::E + ln_r.exp()).ln()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Divergence {
    Divergent,
    Convergent,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    Analytic,
    NumericDoubling,
}

/// Verdict on one of the two divergence integrals.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OsgoodVerdict {
    pub divergence: Divergence,
    pub method: Method,
    /// Integral from 1 to `probe_radius` (saturates at f64::MAX).
    pub partial_integral: f64,
    pub probe_radius: f64,
}

/// One doubling step of the numeric probe, for reporting.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DoublingRow {
    pub k: u32,
    pub r_hi: f64,
    pub ln_increment: f64,
    pub partial_integral: f64,
}

const PROBE_K_LO: u32 = 4;
const PROBE_K_HI: u32 = 40; // probe radius 2^40
const RATIO_WINDOW: usize = 16;
/// |ln g| below this counts as "no geometric trend" and the decision moves
/// to the log-power estimate.
const GEOMETRIC_BAND: f64 = 0.01;
/// The log-power boundary sits at q = 1; the split point 1.5 with a ±0.15
/// dead zone keeps the probe decisive on q ∈ {0, 1} vs q >= 2 and honest in
/// between.
const Q_DIVERGENT_MAX: f64 = 1.35;
const Q_CONVERGENT_MIN: f64 = 1.65;

/// `∫₁^{r_max} r / L(r) dr` by adaptive quadrature after `r = e^u`.
pub fn osgood_integral(l: &GrowthFunction, r_max: f64) -> Result<f64, GrowthError> {
    if !(r_max >= 1.0) || !r_max.is_finite() {
        return Err(GrowthError::BadProbeRadius(r_max));
    }
    if !l.0.positive() {
        return Err(GrowthError::InvalidParam(format!(
            "divergence integral needs a positive growth function, got {l}"
        )));
    }
    let mut lnf = |u: f64| 2.0 * u - l.0.eval_ln(u);
    let q = integrate_ln(&mut lnf, 0.0, r_max.ln(), &[], 1e-9);
    Ok(q.ln_value.exp().min(f64::MAX))
}

/// `∫₁^{r_max} dr / k(r)` by adaptive quadrature after `r = e^u`.
pub fn curvature_integral(k: &CurvatureFunction, r_max: f64) -> Result<f64, GrowthError> {
    if !(r_max >= 1.0) || !r_max.is_finite() {
        return Err(GrowthError::BadProbeRadius(r_max));
    }
    let mut lnf = |u: f64| u - k.0.eval_ln(u);
    let q = integrate_ln(&mut lnf, 0.0, r_max.ln(), &[], 1e-9);
    Ok(q.ln_value.exp().min(f64::MAX))
}

/// Asymptotics `(p, q)` ⇒ `∫ r^{1-p} (ln r)^{-q}` diverges iff p < 2, or
/// p = 2 with q <= 1.
fn analytic_growth_verdict(p: f64, q: f64) -> Divergence {
    if p < 2.0 || (p == 2.0 && q <= 1.0) {
        Divergence::Divergent
    } else {
        Divergence::Convergent
    }
}

/// Asymptotics `(p, q)` ⇒ `∫ r^{-p} (ln r)^{-q}` diverges iff p < 1, or
/// p = 1 with q <= 1.
fn analytic_curvature_verdict(p: f64, q: f64) -> Divergence {
    if p < 1.0 || (p == 1.0 && q <= 1.0) {
        Divergence::Divergent
    } else {
        Divergence::Convergent
    }
}

/// Growth condition verdict; analytic for closed-form families, numeric
/// doubling otherwise.
pub fn classify_osgood(l: &GrowthFunction) -> Result<OsgoodVerdict, GrowthError> {
    if !l.0.positive() {
        return Err(GrowthError::InvalidParam(format!(
            "Osgood classification needs a positive growth function, got {l}"
        )));
    }
    match l.0.asymptotics() {
        Some((p, q)) => {
            let probe_radius = (1u64 << 20) as f64;
            Ok(OsgoodVerdict {
                divergence: analytic_growth_verdict(p, q),
                method: Method::Analytic,
                partial_integral: osgood_integral(l, probe_radius)?,
                probe_radius,
            })
        }
        None => Ok(classify_osgood_numeric(l).0),
    }
}

/// Curvature condition verdict; analytic for closed-form families, numeric
/// doubling otherwise.
pub fn classify_curvature(k: &CurvatureFunction) -> Result<OsgoodVerdict, GrowthError> {
    match k.0.asymptotics() {
        Some((p, q)) => {
            let probe_radius = (1u64 << 20) as f64;
            Ok(OsgoodVerdict {
                divergence: analytic_curvature_verdict(p, q),
                method: Method::Analytic,
                partial_integral: curvature_integral(k, probe_radius)?,
                probe_radius,
            })
        }
        None => Ok(classify_curvature_numeric(k).0),
    }
}

/// Force the numeric doubling probe on the growth condition (used to check
/// agreement with the analytic route, and for tables).
pub fn classify_osgood_numeric(l: &GrowthFunction) -> (OsgoodVerdict, Vec<DoublingRow>) {
    assert!(l.0.positive(), "doubling probe needs a positive growth function");
    doubling_probe(&mut |u| 2.0 * u - l.0.eval_ln(u))
}

/// Force the numeric doubling probe on the curvature condition.
pub fn classify_curvature_numeric(k: &CurvatureFunction) -> (OsgoodVerdict, Vec<DoublingRow>) {
    doubling_probe(&mut |u| u - k.0.eval_ln(u))
}

/// Doubling probe over r in [2^4, 2^40].
///
/// Increments Δ_k = ∫_{2^k}^{2^{k+1}} of the (positive) integrand behave
/// like g^k · k^{-q} for every family in scope. The consecutive log-ratios
/// ln ρ_k = ln Δ_{k+1} - ln Δ_k are then affine in ln((k+1)/k) with
/// intercept ln g and slope -q, so a least-squares fit over the tail window
/// recovers both. Decision: growing or flat-geometric increments (ln g
/// outside a small band around 0) settle it outright; on the band the
/// estimated log-power q decides, with a dead zone around the q = 1
/// boundary reported as Inconclusive. Increments that fall below integral
/// resolution mean the remaining tail is negligible: Convergent.
fn doubling_probe<F: FnMut(f64) -> f64>(ln_integrand: &mut F) -> (OsgoodVerdict, Vec<DoublingRow>) {
    let ln2 = std::f64::consts::LN_2;
    let mut rows = Vec::new();
    let mut ln_increments = Vec::new();
    let mut total = crate::logscalar::NonNegSum::new();
    // Lead-in [1, 2^4] so partial integrals start at r = 1.
    let lead = integrate_ln(ln_integrand, 0.0, PROBE_K_LO as f64 * ln2, &[], 1e-9);
    total.push_ln(lead.ln_value);
    for k in PROBE_K_LO..PROBE_K_HI {
        let q = integrate_ln(
            ln_integrand,
            k as f64 * ln2,
            (k + 1) as f64 * ln2,
            &[],
            1e-9,
        );
        ln_increments.push(q.ln_value);
        total.push_ln(q.ln_value);
        rows.push(DoublingRow {
            k,
            r_hi: ((k + 1) as f64 * ln2).exp(),
            ln_increment: q.ln_value,
            partial_integral: total.ln_value().exp().min(f64::MAX),
        });
    }
    let partial_integral = total.ln_value().exp().min(f64::MAX);
    let probe_radius = (PROBE_K_HI as f64 * ln2).exp();
    let divergence = classify_increments(&ln_increments, total.ln_value());
    (
        OsgoodVerdict {
            divergence,
            method: Method::NumericDoubling,
            partial_integral,
            probe_radius,
        },
        rows,
    )
}

fn classify_increments(ln_increments: &[f64], ln_total: f64) -> Divergence {
    let n = ln_increments.len();
    if n < RATIO_WINDOW + 1 {
        return Divergence::Inconclusive;
    }
    // Tail increments below integral resolution: remaining tail is noise.
    let resolution = ln_total.max(0.0) + (1e-6f64).ln();
    if ln_increments[n - 8..].iter().all(|&d| d < resolution) {
        return Divergence::Convergent;
    }
    // Least squares of ln ρ_k against x_k = ln((k+1)/k) over the tail.
    let mut xs = Vec::with_capacity(RATIO_WINDOW);
    let mut ys = Vec::with_capacity(RATIO_WINDOW);
    for j in (n - 1 - RATIO_WINDOW)..(n - 1) {
        let k = (PROBE_K_LO as usize + j) as f64;
        xs.push(((k + 1.0) / k).ln());
        ys.push(ln_increments[j + 1] - ln_increments[j]);
    }
    let m = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let det = m * sxx - sx * sx;
    if det == 0.0 {
        return Divergence::Inconclusive;
    }
    let slope = (m * sxy - sx * sy) / det;
    let intercept = (sy * sxx - sx * sxy) / det;
    if intercept > GEOMETRIC_BAND {
        return Divergence::Divergent; // increments grow geometrically
    }
    if intercept < -GEOMETRIC_BAND {
        return Divergence::Convergent; // geometric decay
    }
    let q = -slope;
    if q <= Q_DIVERGENT_MAX {
        Divergence::Divergent
    } else if q >= Q_CONVERGENT_MIN {
        Divergence::Convergent
    } else {
        Divergence::Inconclusive
    }
}

/// Constants in the two-sided envelope package: pointwise bound
/// `exp(c_pt · r · k(2r)) / t^a` and volume bound
/// `vol_prefactor · exp(vol_rate · R · k(R))`.
#[derive(Clone, Copy, Debug)]
pub struct EnvelopeConstants {
    pub c_pt: f64,
    pub a: f64,
    pub vol_prefactor: f64,
    pub vol_rate: f64,
}

/// Envelope evaluators induced by a curvature scale.
#[derive(Clone, Debug)]
pub struct Envelopes {
    k: CurvatureFunction,
    consts: EnvelopeConstants,
}

/// Package the pointwise/volume envelopes and the induced growth function
/// for a curvature scale `k`.
pub fn envelopes_from_curvature(
    k: CurvatureFunction,
    consts: EnvelopeConstants,
) -> Result<Envelopes, GrowthError> {
    if !(consts.c_pt > 0.0) || !(consts.a > 0.0) || !(consts.vol_prefactor > 0.0)
        || !(consts.vol_rate > 0.0)
    {
        return Err(GrowthError::InvalidParam(
            "envelope constants must be positive".into(),
        ));
    }
    Ok(Envelopes { k, consts })
}

impl Envelopes {
    /// `exp(c_pt · r · k(2r)) · t^{-a}` for r >= 0, t > 0.
    pub fn pointwise(&self, r: f64, t: f64) -> Result<LogScalar, GrowthError> {
        if !(t > 0.0) {
            return Err(GrowthError::InvalidParam(format!("t must be positive, got {t}")));
        }
        let k2r = self.k.eval(2.0 * r)?;
        Ok(LogScalar::exp_ln(
            self.consts.c_pt * r * k2r - self.consts.a * t.ln(),
        ))
    }

    /// `vol_prefactor · exp(vol_rate · R · k(R))` for R >= 0.
    pub fn volume(&self, radius: f64) -> Result<LogScalar, GrowthError> {
        let kr = self.k.eval(radius)?;
        Ok(LogScalar::exp_ln(
            self.consts.vol_prefactor.ln() + self.consts.vol_rate * radius * kr,
        ))
    }

    /// The induced growth function `L(r) = c_pt · r · k(2r)`.
    pub fn growth(&self) -> GrowthFunction {
        GrowthFunction::from_curvature(self.consts.c_pt, self.k.clone())
            .expect("constants validated at construction")
    }
}
