//! Heat kernel and pointwise evolution of axisymmetric initial data.
//!
//! Initial data is a radial base profile at the origin plus tent-shaped
//! spikes (constant plateau, linear ramp to zero) at points along a common
//! axis. Spike heights are log-domain scalars, so amplitudes like `e^{i³}`
//! never pass through a real exponential; negative heights are allowed and
//! carried as a sign next to the log magnitude. Everything downstream
//! (estimator, probes, examples) sees the solution only through
//! [`evolve_point`], which convolves each component with the kernel by
//! adaptive quadrature in log domain.
//!
//! For a radial profile at distance `d` the sphere average of the kernel
//! collapses the convolution to one radial integral. In three dimensions
//! the angular factor is exact — `sinh(ds/2t)/(ds/2t)` — so evolution costs
//! a single 1-D quadrature; in other dimensions `n >= 2` the angular
//! integral is done numerically ([`evolve_radial_shell`], which also serves
//! as the dimension-generic cross-check for the fast path).

use crate::logscalar::{LogScalar, NonNegSum, Sign};
use crate::quad::integrate_ln;
use crate::special::ln_gamma;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("dimension must be >= 1, got {0}")]
    BadDim(u32),
    #[error("spike needs finite center and 0 < inner <= outer, got center={center}, inner={inner}, outer={outer}")]
    BadSpike { center: f64, inner: f64, outer: f64 },
    #[error("spikes at {c1} and {c2} overlap")]
    OverlappingSpikes { c1: f64, c2: f64 },
    #[error("invalid base profile: {0}")]
    BadBase(String),
    #[error("exact norm needs disjoint supports or a single sign")]
    SupportsOverlap,
    #[error("constant base has no finite mass norm")]
    InfiniteMass,
}

/// Position in an axisymmetric field: coordinate along the symmetry axis
/// and distance from it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub axial: f64,
    pub perp: f64,
}

impl Point {
    pub fn on_axis(z: f64) -> Point {
        Point { axial: z, perp: 0.0 }
    }

    /// Distance to a point at `c` on the axis.
    pub fn dist_to_axis_point(&self, c: f64) -> f64 {
        ((self.axial - c) * (self.axial - c) + self.perp * self.perp).sqrt()
    }
}

/// Surface area of the unit sphere S^k in R^{k+1}: `2 π^{(k+1)/2} / Γ((k+1)/2)`.
pub fn sphere_area(k: u32) -> f64 {
    let half = (k as f64 + 1.0) / 2.0;
    (std::f64::consts::LN_2 + half * std::f64::consts::PI.ln() - ln_gamma(half)).exp()
}

/// Volume of the unit ball in R^n: `π^{n/2} / Γ(n/2 + 1)`.
pub fn ball_volume(n: u32) -> f64 {
    let half = n as f64 / 2.0;
    (half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0)).exp()
}

/// `ln G_t(x)` for the n-dimensional kernel, from the squared distance:
/// `-(n/2)·ln(4πt) - |x|²/4t`.
pub fn heat_kernel_ln(n: u32, dist_sq: f64, t: f64) -> f64 {
    debug_assert!(t > 0.0 && dist_sq >= 0.0);
    -(n as f64 / 2.0) * (4.0 * std::f64::consts::PI * t).ln() - dist_sq / (4.0 * t)
}

/// The kernel value itself as a log-domain scalar.
pub fn heat_kernel(n: u32, dist_sq: f64, t: f64) -> LogScalar {
    LogScalar::exp_ln(heat_kernel_ln(n, dist_sq, t))
}

/// One radial bump on the axis: plateau of `height` out to `inner_radius`,
/// linear ramp to zero at `outer_radius` (equal radii make a sharp
/// indicator). Height is signed and log-scaled, so `e^{i³}`-sized plateaus
/// and negative bumps are both representable.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpikeSpec {
    /// Center position on the symmetry axis.
    pub center: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub height: LogScalar,
}

impl SpikeSpec {
    fn valid(&self) -> bool {
        self.center.is_finite()
            && self.inner_radius > 0.0
            && self.inner_radius <= self.outer_radius
            && self.outer_radius.is_finite()
    }

    /// Sign and unit-sign radial profile of this spike.
    pub fn profile(&self) -> (Sign, RadialProfile) {
        (
            self.height.sign(),
            RadialProfile::Tent {
                inner: self.inner_radius,
                outer: self.outer_radius,
                ln_height: self.height.ln_mag(),
            },
        )
    }
}

/// Radial profile of the initial data around the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum BaseProfile {
    Zero,
    /// The same constant everywhere; evolves to itself exactly.
    Constant { level: f64 },
    /// `amplitude · exp(-|x|² / (2σ²))`.
    Gaussian { amplitude: f64, sigma: f64 },
    /// `height` inside the ball of `radius`, zero outside.
    BallIndicator { radius: f64, height: f64 },
    /// Piecewise-linear radial table `(radius, value)`: starts at radius 0,
    /// strictly increasing radii, nonnegative values, ends at value 0 —
    /// an arbitrary continuous compactly-supported radial profile with
    /// finite mass.
    Table { pts: Vec<(f64, f64)> },
}

/// A single radial piece of the initial data, abstracted from its center
/// and sign: all values are nonnegative magnitudes.
#[derive(Clone, Debug)]
pub enum RadialProfile {
    /// Plateau `e^{ln_height}` to `inner`, linear ramp to zero at `outer`.
    Tent { inner: f64, outer: f64, ln_height: f64 },
    Gaussian { amplitude: f64, sigma: f64 },
    /// Piecewise-linear `(radius, value)` table ending at value 0.
    Table { pts: Vec<(f64, f64)> },
}

impl RadialProfile {
    /// Profile magnitude at radius s >= 0 (plain f64; log-scaled heights
    /// overflow to inf here — quadrature paths use `ln_eval`).
    pub fn eval(&self, s: f64) -> f64 {
        let ln = self.ln_eval(s);
        if ln == f64::NEG_INFINITY {
            0.0
        } else {
            ln.exp()
        }
    }

    /// `ln` of the profile magnitude, −∞ outside the support.
    pub fn ln_eval(&self, s: f64) -> f64 {
        match self {
            RadialProfile::Tent { inner, outer, ln_height } => {
                if s <= *inner {
                    *ln_height
                } else if s < *outer {
                    ln_height + ((outer - s) / (outer - inner)).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            RadialProfile::Gaussian { amplitude, sigma } => {
                amplitude.ln() - s * s / (2.0 * sigma * sigma)
            }
            RadialProfile::Table { pts } => {
                let v = eval_table(pts, s);
                if v <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    v.ln()
                }
            }
        }
    }

    /// Integration range and seed radii for convolving this profile with
    /// a kernel sitting at distance `d`. Compact supports end exactly at
    /// their outer radius; Gaussians are truncated where both the profile
    /// and the kernel factor are ~e^{-400} below their peaks. Seeds mark
    /// profile breakpoints and the location/width of the product's peak.
    fn conv_range(&self, d: f64, t: f64) -> (f64, Vec<f64>) {
        let w = (2.0 * t).sqrt();
        let kernel_seeds = |seeds: &mut Vec<f64>| {
            for k in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
                seeds.push(d + k * w);
            }
        };
        match self {
            RadialProfile::Tent { inner, outer, .. } => {
                let mut seeds = vec![*inner];
                kernel_seeds(&mut seeds);
                (*outer, seeds)
            }
            RadialProfile::Gaussian { sigma, .. } => {
                // Peak of e^{-s²/2σ²}e^{-(d-s)²/4t} and its width.
                let s_star = d * sigma * sigma / (sigma * sigma + 2.0 * t);
                let w_c = 1.0 / (1.0 / (sigma * sigma) + 1.0 / (2.0 * t)).sqrt();
                let mut seeds = vec![*sigma, 3.0 * sigma, d, s_star];
                for k in [-3.0, -1.0, 1.0, 3.0] {
                    seeds.push(s_star + k * w_c);
                }
                (d + 40.0 * (sigma + t.sqrt()), seeds)
            }
            RadialProfile::Table { pts } => {
                let mut seeds: Vec<f64> = pts.iter().map(|p| p.0).collect();
                kernel_seeds(&mut seeds);
                (pts.last().map_or(0.0, |p| p.0), seeds)
            }
        }
    }
}

/// Piecewise-linear table lookup; zero outside the covered range.
fn eval_table(pts: &[(f64, f64)], s: f64) -> f64 {
    if pts.is_empty() || s < pts[0].0 || s > pts[pts.len() - 1].0 {
        return 0.0;
    }
    for w in pts.windows(2) {
        let ((s0, v0), (s1, v1)) = (w[0], w[1]);
        if s <= s1 {
            if s1 == s0 {
                return v1;
            }
            return v0 + (v1 - v0) * (s - s0) / (s1 - s0);
        }
    }
    pts[pts.len() - 1].1
}

/// A component with its position on the axis and its sign.
#[derive(Clone, Debug)]
pub struct RadialComponent {
    pub center: f64,
    pub sign: Sign,
    pub profile: RadialProfile,
}

/// Initial data: radial base at the origin plus disjoint tent spikes, all
/// axisymmetric about one axis.
#[derive(Clone, Debug, Serialize)]
pub struct InitialData {
    pub dim: u32,
    pub base: BaseProfile,
    pub spikes: Vec<SpikeSpec>,
}

impl InitialData {
    pub fn new(dim: u32, base: BaseProfile, spikes: Vec<SpikeSpec>) -> Result<InitialData, KernelError> {
        if dim < 1 {
            return Err(KernelError::BadDim(dim));
        }
        match &base {
            BaseProfile::Zero => {}
            BaseProfile::Constant { level } => {
                if !level.is_finite() {
                    return Err(KernelError::BadBase(format!("non-finite level {level}")));
                }
            }
            BaseProfile::Gaussian { amplitude, sigma } => {
                if !(amplitude > &0.0 && sigma > &0.0) || !amplitude.is_finite() || !sigma.is_finite() {
                    return Err(KernelError::BadBase(format!(
                        "gaussian needs finite amplitude > 0 and sigma > 0, got {amplitude}, {sigma}"
                    )));
                }
            }
            BaseProfile::BallIndicator { radius, height } => {
                if !(radius > &0.0) || !radius.is_finite() || !height.is_finite() {
                    return Err(KernelError::BadBase(format!(
                        "ball indicator needs finite radius > 0, got radius={radius}, height={height}"
                    )));
                }
            }
            BaseProfile::Table { pts } => {
                if pts.len() < 2 || pts[0].0 != 0.0 {
                    return Err(KernelError::BadBase("table must start at radius 0 with >= 2 points".into()));
                }
                for w in pts.windows(2) {
                    if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                        return Err(KernelError::BadBase("table radii must increase strictly".into()));
                    }
                }
                if pts.iter().any(|p| !(p.1 >= 0.0) || !p.1.is_finite()) {
                    return Err(KernelError::BadBase("table values must be finite and >= 0".into()));
                }
                if pts[pts.len() - 1].1 != 0.0 {
                    return Err(KernelError::BadBase("table must end at value 0".into()));
                }
            }
        }
        for s in &spikes {
            if !s.valid() {
                return Err(KernelError::BadSpike {
                    center: s.center,
                    inner: s.inner_radius,
                    outer: s.outer_radius,
                });
            }
        }
        for (i, a) in spikes.iter().enumerate() {
            for b in &spikes[i + 1..] {
                if (a.center - b.center).abs() < a.outer_radius + b.outer_radius {
                    return Err(KernelError::OverlappingSpikes { c1: a.center, c2: b.center });
                }
            }
        }
        Ok(InitialData { dim, base, spikes })
    }

    /// The constant part of the base (zero for every other family). It
    /// evolves to itself, so it is split off from the quadrature components.
    fn constant_level(&self) -> f64 {
        match self.base {
            BaseProfile::Constant { level } => level,
            _ => 0.0,
        }
    }

    /// Base as a radial component at the origin, when it needs quadrature.
    fn base_component(&self) -> Option<RadialComponent> {
        let (sign, profile) = match &self.base {
            BaseProfile::Zero | BaseProfile::Constant { .. } => return None,
            BaseProfile::Gaussian { amplitude, sigma } => (
                Sign::Positive,
                RadialProfile::Gaussian { amplitude: *amplitude, sigma: *sigma },
            ),
            BaseProfile::BallIndicator { radius, height } => {
                if *height == 0.0 {
                    return None;
                }
                let sign = if *height > 0.0 { Sign::Positive } else { Sign::Negative };
                (
                    sign,
                    RadialProfile::Tent { inner: *radius, outer: *radius, ln_height: height.abs().ln() },
                )
            }
            BaseProfile::Table { pts } => (Sign::Positive, RadialProfile::Table { pts: pts.clone() }),
        };
        Some(RadialComponent { center: 0.0, sign, profile })
    }

    /// All quadrature components (base, then spikes in order); zero-height
    /// spikes contribute nothing and are skipped.
    pub fn components(&self) -> Vec<RadialComponent> {
        let mut out = Vec::with_capacity(self.spikes.len() + 1);
        out.extend(self.base_component());
        for s in &self.spikes {
            if s.height.is_zero() {
                continue;
            }
            let (sign, profile) = s.profile();
            out.push(RadialComponent { center: s.center, sign, profile });
        }
        out
    }

    /// Initial value at a point, in log domain (signed).
    pub fn eval_ln(&self, p: Point) -> LogScalar {
        let mut acc = LogScalar::from_real(self.constant_level());
        for c in self.components() {
            let ln = c.profile.ln_eval(p.dist_to_axis_point(c.center));
            acc = acc + LogScalar::from_sign_ln(c.sign, ln);
        }
        acc
    }

    /// Initial value as a plain f64 (log-scaled heights overflow to ±inf).
    pub fn eval(&self, p: Point) -> f64 {
        let v = self.eval_ln(p);
        match v.sign() {
            Sign::Positive => v.ln_mag().exp(),
            Sign::Negative => -v.ln_mag().exp(),
            Sign::Zero => 0.0,
        }
    }

    /// `ln Σ ‖component‖₁` — the exact L¹ norm when all components share
    /// one sign, and an upper bound (triangle inequality) otherwise.
    /// `None` for a nonzero constant base, whose mass is infinite.
    fn l1_upper_ln(&self) -> Option<f64> {
        if self.constant_level() != 0.0 {
            return None;
        }
        let mut acc = NonNegSum::new();
        for c in self.components() {
            acc.push_ln(component_ln_l1(self.dim, &c.profile));
        }
        Some(acc.ln_value())
    }

    /// Exact L¹ norm. Errors: infinite for a nonzero constant base; spikes
    /// of mixed sign under a base are only exact when every spike clears
    /// the base support, since `∫|u|` sees cancellation on overlaps.
    pub fn l1_norm(&self) -> Result<LogScalar, KernelError> {
        if self.constant_level() != 0.0 {
            return Err(KernelError::InfiniteMass);
        }
        self.check_sign_disjointness()?;
        Ok(LogScalar::exp_ln(self.l1_upper_ln().unwrap()))
    }

    /// Exact squared L² norm; same disjointness caveat as [`l1_norm`], and
    /// additionally the base itself must not overlap any spike (cross
    /// terms appear in `u²` regardless of sign).
    ///
    /// [`l1_norm`]: InitialData::l1_norm
    pub fn l2_norm_sq(&self) -> Result<LogScalar, KernelError> {
        if self.constant_level() != 0.0 {
            return Err(KernelError::InfiniteMass);
        }
        if self.base_support_overlaps_spikes() {
            return Err(KernelError::SupportsOverlap);
        }
        let mut acc = NonNegSum::new();
        for c in self.components() {
            acc.push_ln(component_ln_l2_sq(self.dim, &c.profile));
        }
        Ok(LogScalar::exp_ln(acc.ln_value()))
    }

    /// Mixed-signed sums are exact per component only on disjoint supports.
    fn check_sign_disjointness(&self) -> Result<(), KernelError> {
        let comps = self.components();
        let mixed = comps.windows(2).any(|w| w[0].sign != w[1].sign);
        if mixed && self.base_support_overlaps_spikes() {
            return Err(KernelError::SupportsOverlap);
        }
        Ok(())
    }

    /// Whether the base support touches any spike ball (Gaussian bases
    /// touch everything; spikes themselves are pairwise disjoint by
    /// construction).
    fn base_support_overlaps_spikes(&self) -> bool {
        let base_radius = match &self.base {
            BaseProfile::Zero | BaseProfile::Constant { .. } => return false,
            BaseProfile::Gaussian { .. } => f64::INFINITY,
            BaseProfile::BallIndicator { radius, .. } => *radius,
            BaseProfile::Table { pts } => pts[pts.len() - 1].0,
        };
        self.spikes
            .iter()
            .any(|s| !s.height.is_zero() && s.center.abs() < base_radius + s.outer_radius)
    }

    /// Supremum of `|u₀|`: evaluated over all profile breakpoints (exact
    /// for piecewise-linear data, whose maximum sits on a kink) plus a
    /// bracketed refinement over each spike when a smooth Gaussian base
    /// makes interior maxima possible.
    pub fn linf_norm(&self) -> LogScalar {
        let mut zs: Vec<f64> = vec![0.0];
        match &self.base {
            BaseProfile::BallIndicator { radius, .. } => zs.extend([*radius, -*radius]),
            BaseProfile::Table { pts } => {
                for p in pts {
                    zs.extend([p.0, -p.0]);
                }
            }
            _ => {}
        }
        for s in &self.spikes {
            zs.extend([
                s.center,
                s.center - s.inner_radius,
                s.center + s.inner_radius,
                s.center - s.outer_radius,
                s.center + s.outer_radius,
            ]);
        }
        let mut best = LogScalar::zero();
        for &z in &zs {
            best = best.max_value(self.eval_ln(Point::on_axis(z)).abs());
        }
        if let BaseProfile::Gaussian { .. } = self.base {
            for s in &self.spikes {
                let m = self.golden_max_abs(s.center - s.outer_radius, s.center + s.outer_radius);
                best = best.max_value(m);
            }
        }
        best
    }

    /// Golden-section maximization of `|u₀|` on the axis over [lo, hi].
    fn golden_max_abs(&self, lo: f64, hi: f64) -> LogScalar {
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let mut fc = self.eval_ln(Point::on_axis(c)).abs();
        let mut fd = self.eval_ln(Point::on_axis(d)).abs();
        for _ in 0..64 {
            if fc.cmp_value(&fd) == std::cmp::Ordering::Greater {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = self.eval_ln(Point::on_axis(c)).abs();
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = self.eval_ln(Point::on_axis(d)).abs();
            }
        }
        fc.max_value(fd)
    }

    /// `min(‖u₀‖_∞, (4πt)^{-n/2}·Σ‖component‖₁)` — both sides of the
    /// standard supremum bound on the evolved solution (the mass side uses
    /// the triangle-inequality mass, so it stays a valid bound for signed
    /// data; it drops out for a constant base).
    pub fn sup_bound(&self, t: f64) -> LogScalar {
        let linf = self.linf_norm();
        if t <= 0.0 {
            return linf;
        }
        match self.l1_upper_ln() {
            None => linf,
            Some(ln_l1) => {
                let smoothed = LogScalar::exp_ln(heat_kernel_ln(self.dim, 0.0, t) + ln_l1);
                if smoothed.cmp_value(&linf) == std::cmp::Ordering::Less {
                    smoothed
                } else {
                    linf
                }
            }
        }
    }

    /// The mass-smoothing envelope `(4πt)^{-n/2}·‖u₀‖₁` alone. Not
    /// applicable to a nonzero constant base (infinite mass).
    pub fn linf_envelope(&self, t: f64) -> Result<LogScalar, KernelError> {
        assert!(t > 0.0, "envelope needs t > 0");
        match self.l1_upper_ln() {
            None => Err(KernelError::InfiniteMass),
            Some(ln_l1) => Ok(LogScalar::exp_ln(heat_kernel_ln(self.dim, 0.0, t) + ln_l1)),
        }
    }
}

/// `ln ∫ |profile| dx` over R^n.
pub(crate) fn component_ln_l1(n: u32, profile: &RadialProfile) -> f64 {
    match profile {
        RadialProfile::Tent { inner, outer, ln_height } => {
            ln_height + tent_unit_moment(n, *inner, *outer, 1).ln()
        }
        RadialProfile::Gaussian { amplitude, sigma } => {
            // ∫ A e^{-|x|²/2σ²} = A (2πσ²)^{n/2}.
            amplitude.ln()
                + (n as f64 / 2.0) * (2.0 * std::f64::consts::PI * sigma * sigma).ln()
        }
        RadialProfile::Table { pts } => radial_pl_moment(n, pts, 1).ln(),
    }
}

/// `ln ∫ profile² dx` over R^n.
fn component_ln_l2_sq(n: u32, profile: &RadialProfile) -> f64 {
    match profile {
        RadialProfile::Tent { inner, outer, ln_height } => {
            2.0 * ln_height + tent_unit_moment(n, *inner, *outer, 2).ln()
        }
        RadialProfile::Gaussian { amplitude, sigma } => {
            // ∫ A² e^{-|x|²/σ²} = A² (πσ²)^{n/2}.
            2.0 * amplitude.ln()
                + (n as f64 / 2.0) * (std::f64::consts::PI * sigma * sigma).ln()
        }
        RadialProfile::Table { pts } => radial_pl_moment(n, pts, 2).ln(),
    }
}

/// `∫ (unit tent)^p dx` exactly via the piecewise-linear moment.
fn tent_unit_moment(n: u32, inner: f64, outer: f64, p: u32) -> f64 {
    if inner == outer {
        return ball_volume(n) * inner.powi(n as i32);
    }
    radial_pl_moment(n, &[(0.0, 1.0), (inner, 1.0), (outer, 0.0)], p)
}

/// `σ_{n-1} ∫ s^{n-1} v(s)^p ds` for a piecewise-linear radial `v >= 0`
/// and p ∈ {1, 2}: each segment `v = a + b·s` integrates to a polynomial
/// with exact rational structure.
fn radial_pl_moment(n: u32, pts: &[(f64, f64)], p: u32) -> f64 {
    assert!(p == 1 || p == 2, "only first and second moments are closed-form here");
    let power_int = |k: u32, lo: f64, hi: f64| {
        let e = (k + 1) as f64;
        (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / e
    };
    let mut total = 0.0;
    for w in pts.windows(2) {
        let ((s0, v0), (s1, v1)) = (w[0], w[1]);
        if s1 <= s0 {
            continue;
        }
        let b = (v1 - v0) / (s1 - s0);
        let a = v0 - b * s0;
        total += match p {
            1 => a * power_int(n - 1, s0, s1) + b * power_int(n, s0, s1),
            _ => {
                a * a * power_int(n - 1, s0, s1)
                    + 2.0 * a * b * power_int(n, s0, s1)
                    + b * b * power_int(n + 1, s0, s1)
            }
        };
    }
    sphere_area(n - 1) * total
}

/// `ln[(1 - e^{-y})/y]` for y >= 0, stable through y = 0.
fn ln_expm1_ratio(y: f64) -> f64 {
    debug_assert!(y >= 0.0);
    if y < 1e-3 {
        (-y / 2.0 + y * y / 6.0 - y * y * y / 24.0).ln_1p()
    } else {
        (-(-y).exp()).ln_1p() - y.ln()
    }
}

/// Evolve one radial profile magnitude at distance `d` from its center,
/// 3-D fast path: the angular integral is `sinh(ds/2t)/(ds/2t)` exactly,
/// leaving `4π (4πt)^{-3/2} ∫ f(s) s² e^{-(d²+s²)/4t} sinhc(ds/2t) ds`.
/// The peak factor is carried as `e^{-(d-s)²/4t}·(1-e^{-ds/t})/(ds/t)` —
/// algebraically identical, but the exponent never cancels two huge terms,
/// which matters when `ds/t` reaches 10¹⁰ and beyond.
fn evolve_radial_3d(profile: &RadialProfile, d: f64, t: f64) -> LogScalar {
    let (s_max, seeds) = profile.conv_range(d, t);
    let ln_pref = (4.0 * std::f64::consts::PI).ln() + heat_kernel_ln(3, 0.0, t);
    let mut lnf = |s: f64| {
        if s <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let gap = d - s;
        profile.ln_eval(s) + 2.0 * s.ln() - gap * gap / (4.0 * t)
            + ln_expm1_ratio(d * s / t)
    };
    let q = integrate_ln(&mut lnf, 0.0, s_max, &seeds, 1e-10);
    LogScalar::exp_ln(ln_pref + q.ln_value)
}

/// Evolve in one dimension: mirror pair of kernels,
/// `∫ f(s) [G(d-s) + G(d+s)] ds`.
fn evolve_radial_1d(profile: &RadialProfile, d: f64, t: f64) -> LogScalar {
    let (s_max, seeds) = profile.conv_range(d, t);
    let mut lnf = |s: f64| {
        if s < 0.0 {
            return f64::NEG_INFINITY;
        }
        // G(d-s) + G(d+s) = G(d-s)(1 + e^{-ds/t}).
        profile.ln_eval(s) + heat_kernel_ln(1, (d - s) * (d - s), t)
            + (-d * s / t).exp().ln_1p()
    };
    let q = integrate_ln(&mut lnf, 0.0, s_max, &seeds, 1e-10);
    LogScalar::exp_ln(q.ln_value)
}

/// Dimension-generic shell quadrature (n >= 2): numeric angular integral
/// `σ_{n-2} ∫₀^π sin^{n-2}θ e^{2ds·cosθ/4t} dθ` inside the radial one.
/// The angular peak value `e^{ds/2t}` is pulled out and folded into the
/// radial exponent, turning `-(d²+s²)/4t + ds/2t` into the exactly
/// computed `-(d-s)²/4t`; the remaining angular integrand
/// `e^{-ds(1-cosθ)/2t} ≤ 1` is cancellation-free.
/// Production path for n = 2 and n >= 4; reference oracle for n = 3.
pub fn evolve_radial_shell(n: u32, profile: &RadialProfile, d: f64, t: f64) -> LogScalar {
    assert!(n >= 2, "shell quadrature needs n >= 2");
    let (s_max, seeds) = profile.conv_range(d, t);
    let ln_sigma = sphere_area(n - 2).ln();
    let nf = n as f64;
    let ln_kt = heat_kernel_ln(n, 0.0, t);
    let mut ln_outer = |s: f64| {
        if s <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let lf = profile.ln_eval(s);
        if lf == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        // Angular peak at θ = 0 has width ~ 2√(t/ds).
        let theta_w = 2.0 * (t / (d * s)).sqrt();
        let theta_seeds: Vec<f64> = if theta_w.is_finite() && theta_w < std::f64::consts::PI {
            [1.0, 2.0, 4.0, 8.0].iter().map(|k| k * theta_w).collect()
        } else {
            Vec::new()
        };
        let mut ln_ang = |theta: f64| {
            let sin = theta.sin();
            if sin <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let half_sin = (0.5 * theta).sin();
            (nf - 2.0) * sin.ln() - d * s * half_sin * half_sin / t
        };
        let ang = integrate_ln(&mut ln_ang, 0.0, std::f64::consts::PI, &theta_seeds, 1e-9);
        let gap = d - s;
        lf + (nf - 1.0) * s.ln() + ln_sigma + ln_kt - gap * gap / (4.0 * t) + ang.ln_value
    };
    let q = integrate_ln(&mut ln_outer, 0.0, s_max, &seeds, 1e-9);
    LogScalar::exp_ln(q.ln_value)
}

/// Evolve one radial profile magnitude at distance `d` from its center.
pub fn evolve_radial(n: u32, profile: &RadialProfile, d: f64, t: f64) -> LogScalar {
    assert!(t > 0.0 && d >= 0.0);
    match n {
        1 => evolve_radial_1d(profile, d, t),
        3 => evolve_radial_3d(profile, d, t),
        _ => evolve_radial_shell(n, profile, d, t),
    }
}

/// Standard normal density `φ(x) = e^{-x²/2}/√(2π)`.
fn norm_phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `∫_{xl}^{xh} φ` with each tail taken from `erfc`, so a segment far out
/// in either tail is a difference of two small numbers of the right scale
/// instead of two values rounding to 1.
fn norm_mass(xl: f64, xh: f64) -> f64 {
    debug_assert!(xl <= xh);
    let r = std::f64::consts::SQRT_2;
    if xl >= 0.0 {
        0.5 * (crate::special::erfc(xl / r) - crate::special::erfc(xh / r))
    } else if xh <= 0.0 {
        0.5 * (crate::special::erfc(-xh / r) - crate::special::erfc(-xl / r))
    } else {
        // Straddles zero: the two erf terms have opposite signs and add.
        0.5 * (crate::special::erf(xh / r) - crate::special::erf(xl / r))
    }
}

/// One linear piece `p + q·s` of a radial profile on `[l, h]`.
#[derive(Clone, Copy)]
struct LinSeg {
    l: f64,
    h: f64,
    p: f64,
    q: f64,
}

/// Piecewise-linear decomposition of a compact profile at unit scale,
/// plus the log factor pulled out (tent heights reach e^{x} for large x,
/// so they never enter the linear-domain sums). `None` for Gaussians.
fn pl_segments(profile: &RadialProfile) -> Option<(Vec<LinSeg>, f64)> {
    match profile {
        RadialProfile::Tent { inner, outer, ln_height } => {
            let mut segs = Vec::new();
            if *inner > 0.0 {
                segs.push(LinSeg { l: 0.0, h: *inner, p: 1.0, q: 0.0 });
            }
            if outer > inner {
                let ramp = outer - inner;
                segs.push(LinSeg { l: *inner, h: *outer, p: outer / ramp, q: -1.0 / ramp });
            }
            Some((segs, *ln_height))
        }
        RadialProfile::Table { pts } => {
            let mut segs = Vec::new();
            for w in pts.windows(2) {
                let ((s0, v0), (s1, v1)) = (w[0], w[1]);
                if s1 <= s0 {
                    continue;
                }
                let q = (v1 - v0) / (s1 - s0);
                segs.push(LinSeg { l: s0, h: s1, p: v0 - q * s0, q });
            }
            Some((segs, 0.0))
        }
        RadialProfile::Gaussian { .. } => None,
    }
}

/// 1-D closed form: `u(d) = ∫₀^∞ f(s)[G(d-s) + G(d+s)] ds` is the full-line
/// convolution of the even extension of `f`, and each linear piece against
/// a Gaussian integrates to `erf`/`φ` terms. Exact at every `t`, which the
/// quadrature path is not: once `√t` drops below the ulp of the support
/// radii, no grid can resolve the kernel peak.
fn pl_conv_1d(segs: &[LinSeg], d: f64, tau: f64) -> f64 {
    let mut acc = 0.0;
    for sg in segs {
        // The piece and its mirror across the origin: f(-s) = p - q·s.
        for (l, h, p, q) in [(sg.l, sg.h, sg.p, sg.q), (-sg.h, -sg.l, sg.p, -sg.q)] {
            // Beyond 40σ both φ and the tail mass are exact f64 zeros, so
            // clamping there is exact and keeps x² from overflowing.
            let xl = ((l - d) / tau).max(-40.0);
            let xh = ((h - d) / tau).min(40.0);
            if xl >= xh {
                continue;
            }
            let m0 = norm_mass(xl, xh);
            let m1 = norm_phi(xl) - norm_phi(xh);
            acc += p * m0 + q * (d * m0 + tau * m1);
        }
    }
    acc
}

/// 3-D closed form via the half-line trick: `w = r·u` solves the 1-D heat
/// equation with odd initial data `s·f(|s|)·sign(s)`, so
/// `d·u(d) = (F̃ * G)(d)` with `F̃` piecewise quadratic. Near the origin the
/// division cancels catastrophically, so below `d = 10⁻⁶·τ` the center value
/// `u(0) = 2∫ x² f(τx) φ(x) dx` is used instead (the error is O((d/τ)²)).
fn pl_conv_3d(segs: &[LinSeg], d: f64, tau: f64) -> f64 {
    if d < 1e-6 * tau {
        let mut acc = 0.0;
        for sg in segs {
            let (xl, xh) = (sg.l / tau, (sg.h / tau).min(40.0));
            if xl >= xh {
                continue; // piece fully ≥ 40σ out: φ is an exact f64 zero
            }
            let m0 = norm_mass(xl, xh);
            let (fl, fh) = (norm_phi(xl), norm_phi(xh));
            let m2 = m0 + xl * fl - xh * fh;
            let m3 = (xl * xl + 2.0) * fl - (xh * xh + 2.0) * fh;
            acc += 2.0 * (sg.p * m2 + sg.q * tau * m3);
        }
        return acc;
    }
    let mut acc = 0.0;
    for sg in segs {
        // s·f(s) = p·s + q·s² on [l, h]; the odd mirror flips the even
        // coefficient: s·f(-s)·… = p·s - q·s² on [-h, -l].
        for (l, h, b, c) in [(sg.l, sg.h, sg.p, sg.q), (-sg.h, -sg.l, sg.p, -sg.q)] {
            let xl = ((l - d) / tau).max(-40.0);
            let xh = ((h - d) / tau).min(40.0);
            if xl >= xh {
                continue; // piece fully ≥ 40σ out: φ is an exact f64 zero
            }
            let m0 = norm_mass(xl, xh);
            let (fl, fh) = (norm_phi(xl), norm_phi(xh));
            let m1 = fl - fh;
            let m2 = m0 + xl * fl - xh * fh;
            let j1 = d * m0 + tau * m1;
            let j2 = d * d * m0 + 2.0 * d * tau * m1 + tau * tau * m2;
            acc += b * j1 + c * j2;
        }
    }
    acc / d
}

/// Closed-form evolution where one exists: Gaussian profiles in any
/// dimension (variances add), piecewise-linear profiles in n = 1 and 3
/// (Gaussian moments of linear pieces). Exact and O(segments) at every t —
/// the only usable route once the kernel width `√(2t)` falls below the
/// floating-point spacing of the support radii, where quadrature grids
/// cannot even represent a point inside the peak. Returns `None` for
/// piecewise-linear profiles in other dimensions (shell quadrature).
pub(crate) fn evolve_radial_closed(
    n: u32,
    profile: &RadialProfile,
    d: f64,
    t: f64,
) -> Option<LogScalar> {
    assert!(t > 0.0 && d >= 0.0);
    if let RadialProfile::Gaussian { amplitude, sigma } = profile {
        return Some(gaussian_evolution_oracle(n, *amplitude, *sigma, d, t));
    }
    if n != 1 && n != 3 {
        return None;
    }
    let (segs, ln_scale) = pl_segments(profile)?;
    let tau = (2.0 * t).sqrt();
    let conv = match n {
        1 => pl_conv_1d(&segs, d, tau),
        _ => pl_conv_3d(&segs, d, tau),
    };
    // Mathematically >= 0 for nonnegative profiles; rounding can leave a
    // tiny negative residue in the far tail, which is an exact zero.
    Some(LogScalar::exp_ln(ln_scale + conv.max(0.0).ln()))
}

/// Contribution of a single spike to the solution at `(x, t)` — its evolved
/// tent, carrying the height's sign. `t = 0` returns the tent value itself.
pub fn spike_contribution(n: u32, spike: &SpikeSpec, x: Point, t: f64) -> LogScalar {
    assert!(spike.valid(), "invalid spike");
    if spike.height.is_zero() {
        return LogScalar::zero();
    }
    let (sign, profile) = spike.profile();
    let d = x.dist_to_axis_point(spike.center);
    let mag = if t == 0.0 {
        LogScalar::exp_ln(profile.ln_eval(d))
    } else {
        evolve_radial(n, &profile, d, t)
    };
    LogScalar::from_sign_ln(sign, mag.ln_mag())
}

/// Solution value `u(x, t)` by summing the evolved components (positive
/// and negative parts accumulated separately, then one signed subtraction);
/// `t = 0` returns the initial value itself.
pub fn evolve_point(u0: &InitialData, p: Point, t: f64) -> LogScalar {
    assert!(t >= 0.0);
    if t == 0.0 {
        return u0.eval_ln(p);
    }
    let mut pos = NonNegSum::new();
    let mut neg = NonNegSum::new();
    let level = u0.constant_level();
    if level != 0.0 {
        // A constant evolves to itself: the kernel has unit mass.
        if level > 0.0 {
            pos.push_ln(level.ln());
        } else {
            neg.push_ln((-level).ln());
        }
    }
    for c in u0.components() {
        let d = p.dist_to_axis_point(c.center);
        let v = evolve_radial(u0.dim, &c.profile, d, t);
        match c.sign {
            Sign::Positive => pos.push_ln(v.ln_mag()),
            Sign::Negative => neg.push_ln(v.ln_mag()),
            Sign::Zero => {}
        }
    }
    pos.value() - neg.value()
}

/// Kernel mass in the centered ball, `∫_{B(0,R)} G_t`, by radial
/// quadrature: `σ_{n-1} (4πt)^{-n/2} ∫₀^R s^{n-1} e^{-s²/4t} ds`. Closed
/// form for cross-checks: the regularized incomplete gamma `P(n/2, R²/4t)`.
pub fn kernel_ball_mass(n: u32, t: f64, radius: f64) -> f64 {
    assert!(n >= 1 && t > 0.0 && radius >= 0.0);
    let nf = n as f64;
    let ln_pref = sphere_area(n - 1).ln() + heat_kernel_ln(n, 0.0, t);
    let w = (2.0 * t).sqrt();
    let seeds = [w, 2.0 * w, 4.0 * w, 8.0 * w, 16.0 * w];
    let mut lnf = |s: f64| {
        if s <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (nf - 1.0) * s.ln() - s * s / (4.0 * t)
    };
    let q = integrate_ln(&mut lnf, 0.0, radius, &seeds, 1e-13);
    (ln_pref + q.ln_value).exp()
}

/// Gaussian measure of an off-center ball: `∫_{B(p,ρ)} G_t(x-y) dy` with
/// `|x-p| = d`, i.e. the evolved unit ball indicator. Log-domain, so deep
/// tails like `e^{-(d-ρ)²/4t}` at large separations stay representable.
pub fn ball_gaussian_mass(n: u32, d: f64, rho: f64, t: f64) -> LogScalar {
    assert!(n >= 1 && d >= 0.0 && rho > 0.0 && t > 0.0);
    let indicator = RadialProfile::Tent { inner: rho, outer: rho, ln_height: 0.0 };
    evolve_radial(n, &indicator, d, t)
}

/// Closed-form evolution of a centered Gaussian hump: variance grows by
/// 2t, `A (σ²/(σ²+2t))^{n/2} e^{-|x|²/(2(σ²+2t))}` — test oracle for the
/// quadrature path.
pub fn gaussian_evolution_oracle(n: u32, amplitude: f64, sigma: f64, dist: f64, t: f64) -> LogScalar {
    let s2 = sigma * sigma + 2.0 * t;
    LogScalar::exp_ln(
        amplitude.ln() + (n as f64 / 2.0) * (sigma * sigma / s2).ln() - dist * dist / (2.0 * s2),
    )
}
