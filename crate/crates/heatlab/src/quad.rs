//! Adaptive Gauss–Legendre quadrature in real and log domain.
//!
//! Integrands here are overwhelmingly positive and sharply peaked — heat
//! kernels at small times, `exp(i³)`-scale spike plateaus — so the workhorse
//! is [`integrate_ln`]: the integrand is supplied as `x ↦ ln f(x)` and panel
//! sums are accumulated by log-sum-exp. A panel is accepted when one level
//! of bisection moves its log value by less than the tolerance, or when its
//! contribution is provably negligible against the running total. Callers
//! seed initial split points at known features (kernel peaks, profile
//! breakpoints); refinement handles the rest.

use crate::logscalar::NonNegSum;
use std::sync::OnceLock;

/// Gauss–Legendre order for every panel.
const GL_ORDER: usize = 15;

/// Hard cap on bisection depth; 2^-48 of the original panel is far below
/// any feature width the lab produces.
const MAX_DEPTH: u32 = 48;

/// Every initial panel is bisected at least this often before acceptance,
/// so features a few hundredths of the panel width wide are found without
/// seeds. Anything narrower must be seeded by the caller.
const MIN_DEPTH: u32 = 2;

/// Panels this far (in ln) below the running total are accepted as-is.
fn negligible_offset(tol_ln: f64) -> f64 {
    tol_ln.ln() - 9.21 // tol / 10^4
}

fn gl_nodes() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static NODES: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    NODES.get_or_init(|| {
        // Roots of P_15 by Newton iteration; deterministic start from the
        // Chebyshev approximation to the k-th root.
        let n = GL_ORDER;
        let mut xs = [0.0; GL_ORDER];
        let mut ws = [0.0; GL_ORDER];
        for k in 0..n {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..60 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            xs[k] = x;
            ws[k] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (xs, ws)
    })
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0_f64;
    let mut p1 = x;
    for j in 2..=n {
        let j = j as f64;
        let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Result of a log-domain integration: `ln ∫ f` plus an `ln` error
/// indicator accumulated from the last bisection discrepancies.
#[derive(Clone, Copy, Debug)]
pub struct LnQuad {
    pub ln_value: f64,
    pub ln_error: f64,
    pub evals: usize,
}

impl LnQuad {
    /// Error relative to the value, in ordinary terms.
    pub fn rel_error(&self) -> f64 {
        if self.ln_value == f64::NEG_INFINITY {
            return 0.0;
        }
        (self.ln_error - self.ln_value).exp()
    }
}

/// Single Gauss–Legendre panel of `exp ∘ ln_f` over [a, b], in log domain.
fn panel_ln<F: FnMut(f64) -> f64>(ln_f: &mut F, a: f64, b: f64, evals: &mut usize) -> f64 {
    let (xs, ws) = gl_nodes();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = NonNegSum::new();
    for (x, w) in xs.iter().zip(ws.iter()) {
        let v = ln_f(mid + half * x);
        *evals += 1;
        debug_assert!(!v.is_nan(), "ln integrand returned NaN at {}", mid + half * x);
        acc.push_ln(v + w.ln());
    }
    acc.ln_value() + half.ln()
}

/// Adaptive log-domain integral of `exp ∘ ln_f` over [a, b].
///
/// `seeds` lists interior points where panels must break initially (feature
/// locations); `tol_ln` is the acceptance threshold on the per-panel log
/// discrepancy, roughly the relative tolerance on the final value.
pub fn integrate_ln<F: FnMut(f64) -> f64>(
    ln_f: &mut F,
    a: f64,
    b: f64,
    seeds: &[f64],
    tol_ln: f64,
) -> LnQuad {
    integrate_ln_depth(ln_f, a, b, seeds, tol_ln, MIN_DEPTH)
}

/// [`integrate_ln`] with an explicit forced-bisection depth. The default
/// depth exists to *detect* features nobody seeded; a caller whose seeds
/// provably bracket every feature can pass 1 and save most of the panel
/// budget on smooth stretches, still refining wherever the bisection
/// discrepancy says so.
pub fn integrate_ln_depth<F: FnMut(f64) -> f64>(
    ln_f: &mut F,
    a: f64,
    b: f64,
    seeds: &[f64],
    tol_ln: f64,
    min_depth: u32,
) -> LnQuad {
    assert!(a.is_finite() && b.is_finite() && b >= a);
    if a == b {
        return LnQuad {
            ln_value: f64::NEG_INFINITY,
            ln_error: f64::NEG_INFINITY,
            evals: 0,
        };
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(seeds.len() + 2);
    cuts.push(a);
    let mut sorted: Vec<f64> = seeds.iter().copied().filter(|s| *s > a && *s < b).collect();
    sorted.sort_by(|p, q| p.partial_cmp(q).unwrap());
    sorted.dedup();
    cuts.extend(sorted);
    cuts.push(b);

    let mut evals = 0usize;
    // Initial coarse sweep fixes the negligibility floor.
    let mut coarse_total = NonNegSum::new();
    let mut stack: Vec<(f64, f64, f64, u32)> = Vec::new();
    for w in cuts.windows(2) {
        let c = panel_ln(ln_f, w[0], w[1], &mut evals);
        coarse_total.push_ln(c);
        stack.push((w[0], w[1], c, 0));
    }
    let mut floor = coarse_total.ln_value() + negligible_offset(tol_ln);

    let mut accepted = NonNegSum::new();
    let mut err = NonNegSum::new();
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel_ln(ln_f, lo, mid, &mut evals);
        let right = panel_ln(ln_f, mid, hi, &mut evals);
        let mut fine = NonNegSum::new();
        fine.push_ln(left);
        fine.push_ln(right);
        let fine = fine.ln_value();
        if depth < min_depth && mid > lo && mid < hi {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
            continue;
        }
        let diff = ln_abs_diff(fine, coarse);
        let converged = diff <= fine + tol_ln.ln()
            || (fine == f64::NEG_INFINITY && coarse == f64::NEG_INFINITY);
        let negligible = fine < floor && coarse < floor;
        if converged || negligible || depth >= MAX_DEPTH || mid <= lo || mid >= hi {
            accepted.push_ln(fine);
            err.push_ln(diff);
            let acc_ln = accepted.ln_value();
            if acc_ln + negligible_offset(tol_ln) > floor {
                floor = acc_ln + negligible_offset(tol_ln);
            }
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    LnQuad {
        ln_value: accepted.ln_value(),
        ln_error: err.ln_value(),
        evals,
    }
}

/// ln |e^x - e^y| computed without leaving log domain.
fn ln_abs_diff(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let rel = -(lo - hi).exp_m1(); // 1 - e^{lo-hi} in [0, 1]
    if rel == 0.0 {
        f64::NEG_INFINITY
    } else {
        hi + rel.ln()
    }
}

/// Adaptive real-domain integral for signed, moderate-scale integrands.
pub fn integrate_real<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    seeds: &[f64],
    tol_rel: f64,
    tol_abs: f64,
) -> (f64, f64) {
    assert!(a.is_finite() && b.is_finite() && b >= a);
    if a == b {
        return (0.0, 0.0);
    }
    let (xs, ws) = gl_nodes();
    let panel = |lo: f64, hi: f64, f: &mut F| -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (lo + hi);
        let mut s = 0.0;
        for (x, w) in xs.iter().zip(ws.iter()) {
            s += w * f(mid + half * x);
        }
        s * half
    };
    let mut cuts: Vec<f64> = vec![a];
    let mut sorted: Vec<f64> = seeds.iter().copied().filter(|s| *s > a && *s < b).collect();
    sorted.sort_by(|p, q| p.partial_cmp(q).unwrap());
    sorted.dedup();
    cuts.extend(sorted);
    cuts.push(b);

    let mut stack: Vec<(f64, f64, f64, u32)> = cuts
        .windows(2)
        .map(|w| {
            let c = panel(w[0], w[1], f);
            (w[0], w[1], c, 0)
        })
        .collect();
    let mut total = 0.0;
    let mut err = 0.0;
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid, f);
        let right = panel(mid, hi, f);
        let fine = left + right;
        let diff = (fine - coarse).abs();
        if diff <= tol_abs + tol_rel * fine.abs() || depth >= MAX_DEPTH || mid <= lo || mid >= hi {
            total += fine;
            err += diff;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    (total, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        // Order-15 Gauss–Legendre is exact through degree 29.
        let mut f = |x: f64| x.powi(20) + 3.0 * x.powi(7);
        let (v, _) = integrate_real(&mut f, -1.0, 1.0, &[], 1e-14, 1e-15);
        // ∫ x^20 over [-1,1] = 2/21; odd part drops.
        assert!((v - 2.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn ln_integral_of_gaussian() {
        // ∫_{-∞}^{∞} e^{-x²} dx = √π; [-12, 12] carries all but ~1e-63.
        let mut lnf = |x: f64| -x * x;
        let q = integrate_ln(&mut lnf, -12.0, 12.0, &[], 1e-10);
        assert!((q.ln_value - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-10);
        assert!(q.rel_error() < 1e-8);
    }

    #[test]
    fn ln_integral_survives_huge_offsets() {
        // e^{1000} ∫₀¹ e^{-x²} dx: the offset would overflow f64 instantly.
        let mut lnf = |x: f64| 1000.0 - x * x;
        let q = integrate_ln(&mut lnf, 0.0, 1.0, &[], 1e-10);
        let base = 0.5 * std::f64::consts::PI.sqrt() * crate::special::erf(1.0);
        assert!((q.ln_value - (1000.0 + base.ln())).abs() < 1e-10);
    }

    #[test]
    fn seeded_narrow_peak_is_resolved() {
        // Width-1e-4 Gaussian at x = 0.618 inside [0, 4], seeded at the
        // center: both flanking panels must refine into the spike.
        let c = 0.618;
        let s = 1e-4;
        let mut lnf = |x: f64| -((x - c) / s).powi(2);
        let q = integrate_ln(&mut lnf, 0.0, 4.0, &[c], 1e-10);
        let want = (s * std::f64::consts::PI.sqrt()).ln();
        assert!(
            (q.ln_value - want).abs() < 1e-8,
            "got {}, want {}",
            q.ln_value,
            want
        );
    }

    #[test]
    fn unseeded_moderate_peak_is_found() {
        // Width-0.01 Gaussian with no seed: the forced minimum bisection
        // depth has to expose it.
        let c = 0.618;
        let s = 0.01;
        let mut lnf = |x: f64| -((x - c) / s).powi(2);
        let q = integrate_ln(&mut lnf, 0.0, 1.0, &[], 1e-10);
        let want = (s * std::f64::consts::PI.sqrt()).ln();
        assert!(
            (q.ln_value - want).abs() < 1e-8,
            "got {}, want {}",
            q.ln_value,
            want
        );
    }

    #[test]
    fn zero_integrand_gives_log_zero() {
        let mut lnf = |_x: f64| f64::NEG_INFINITY;
        let q = integrate_ln(&mut lnf, 0.0, 1.0, &[], 1e-8);
        assert_eq!(q.ln_value, f64::NEG_INFINITY);
    }

    #[test]
    fn seeded_breakpoints_handle_kinks() {
        // |x - 1/3| has a kink; exact value 5/18 over [0, 1].
        let mut f = |x: f64| (x - 1.0 / 3.0).abs();
        let (v, _) = integrate_real(&mut f, 0.0, 1.0, &[1.0 / 3.0], 1e-12, 1e-14);
        assert!((v - 5.0 / 18.0).abs() < 1e-12);
    }
}
