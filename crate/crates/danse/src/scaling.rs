//! Initial-width scaling: the reduced interaction strength `g̃ = g·L₀^(−s)`,
//! the rescaled survival `p̃ = p·L₀^ν`, interaction-regime classification,
//! and data-collapse exponent fitting across sweep curves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced interaction strength `g̃ = g·L₀^(−s)`.
pub fn scaled_g(g: f64, l0: usize, s: f64) -> f64 {
    debug_assert!(l0 >= 1);
    g * (l0 as f64).powf(-s)
}

/// Rescaled survival probability `p̃ = p·L₀^ν`.
pub fn scaled_p(p: f64, l0: usize, nu: f64) -> f64 {
    debug_assert!(l0 >= 1);
    p * (l0 as f64).powf(nu)
}

/// Interaction regime of a state characterized by its reduced strength `g̃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Localized,
    Chaotic,
    SelfTrapped,
}

/// Places `g̃ >= 0` into `[0, 0.1)` localized, `[0.1, 10]` chaotic, or
/// `(10, ∞)` self-trapped.
pub fn classify_regime(g_tilde: f64) -> Regime {
    debug_assert!(g_tilde >= 0.0);
    if g_tilde < 0.1 {
        Regime::Localized
    } else if g_tilde <= 10.0 {
        Regime::Chaotic
    } else {
        Regime::SelfTrapped
    }
}

impl Regime {
    /// The regime's `g̃` window as `(lo, hi)` in natural-log coordinates.
    pub fn log_window(self) -> (f64, f64) {
        match self {
            Regime::Localized => (f64::NEG_INFINITY, 0.1f64.ln()),
            Regime::Chaotic => (0.1f64.ln(), 10f64.ln()),
            Regime::SelfTrapped => (10f64.ln(), f64::INFINITY),
        }
    }
}

/// Final survival probability versus interaction strength at one initial
/// width, the raw material of a collapse fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub l0: usize,
    pub g_values: Vec<f64>,
    pub p_values: Vec<f64>,
}

impl SweepCurve {
    pub fn validate(&self) -> Result<()> {
        if self.l0 < 1 {
            return Err(Error::InvalidParameter("L0 must be >= 1".into()));
        }
        if self.g_values.len() != self.p_values.len() || self.g_values.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "curve needs >= 2 matched points, got {} g and {} p",
                self.g_values.len(),
                self.p_values.len()
            )));
        }
        let mut prev = 0.0;
        for &g in &self.g_values {
            if !(g > prev) || !g.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "g_values must be positive and strictly increasing; offending value {g}"
                )));
            }
            prev = g;
        }
        for &p in &self.p_values {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "p_values must lie in [0, 1]; offending value {p}"
                )));
            }
        }
        Ok(())
    }
}

/// A fitted collapse exponent with the residual dispersion at the optimum
/// and a bootstrap standard error. The same shape reports `s` (collapse in
/// `g̃`) and `ν` (collapse of the rescaled survival).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseFit {
    pub s: f64,
    pub objective: f64,
    pub s_stderr: f64,
}

/// Grid resolution used when comparing interpolated curves on an overlap.
const OVERLAP_GRID: usize = 129;
/// Resolution of the coarse exponent scans bracketing the golden search.
const SCAN_POINTS: usize = 81;
const BOOTSTRAP_SCAN_POINTS: usize = 41;
const BOOTSTRAP_RESAMPLES: usize = 200;
/// Fixed seed for bootstrap resampling: the fit is a deterministic function
/// of its input curves.
const BOOTSTRAP_SEED: u64 = 0xB007_57A9;

fn interp(xs: &[f64], ys: &[f64], u: f64) -> f64 {
    let j = xs.partition_point(|&x| x < u).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let w = if x1 > x0 { (u - x0) / (x1 - x0) } else { 0.0 };
    ys[j - 1] + w * (ys[j] - ys[j - 1])
}

/// Mean squared difference between every pair of curves, each given as
/// `(x, y)` with `x` strictly increasing, evaluated on a uniform grid over
/// the pair's overlap (optionally intersected with `window`). Averaged over
/// the pairs that overlap; errors if none do.
fn pairwise_msd(xs: &[Vec<f64>], ys: &[Vec<f64>], window: Option<(f64, f64)>) -> Result<f64> {
    let n = xs.len();
    let mut acc = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let mut lo = xs[i][0].max(xs[j][0]);
            let mut hi = xs[i].last().unwrap().min(*xs[j].last().unwrap());
            if let Some((wlo, whi)) = window {
                lo = lo.max(wlo);
                hi = hi.min(whi);
            }
            if !(hi > lo) {
                continue;
            }
            let mut msd = 0.0;
            for k in 0..OVERLAP_GRID {
                let u = lo + (hi - lo) * k as f64 / (OVERLAP_GRID - 1) as f64;
                let d = interp(&xs[i], &ys[i], u) - interp(&xs[j], &ys[j], u);
                msd += d * d;
            }
            acc += msd / OVERLAP_GRID as f64;
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::NoOverlap);
    }
    Ok(acc / pairs as f64)
}

fn log_abscissas(curve: &SweepCurve, s: f64) -> Vec<f64> {
    let shift = s * (curve.l0 as f64).ln();
    curve.g_values.iter().map(|g| g.ln() - shift).collect()
}

/// Collapse quality of the survival curves at exponent `s`: pairwise mean
/// squared difference on the common `ln g̃` support.
pub fn collapse_objective(curves: &[SweepCurve], s: f64) -> Result<f64> {
    let sorted = validated_sorted(curves)?;
    let xs: Vec<Vec<f64>> = sorted.iter().map(|c| log_abscissas(c, s)).collect();
    let ys: Vec<Vec<f64>> = sorted.iter().map(|c| c.p_values.clone()).collect();
    pairwise_msd(&xs, &ys, None)
}

/// Collapse quality of the rescaled survival `p̃ = p·L₀^ν` at fixed `s`,
/// restricted to one regime's `g̃` window.
///
/// Curves are compared in `ln p̃ = ln p + ν·ln L₀`, so the rescaling acts as
/// a per-curve vertical shift — the exact mirror of the way the `s` fit
/// shifts curves along `ln g̃`. Comparing in `p̃` directly would multiply
/// every residual by `L₀^ν` and inflate the mean squared difference by that
/// factor squared, so objectives at different `ν` would be measured with
/// different rulers and the comparison against `ν = 0` would be biased
/// toward no rescaling. The log comparison requires `p > 0` on every curve.
pub fn p_scaling_objective(
    curves: &[SweepCurve],
    s: f64,
    nu: f64,
    regime: Regime,
) -> Result<f64> {
    let sorted = validated_sorted(curves)?;
    require_positive_p(&sorted)?;
    let xs: Vec<Vec<f64>> = sorted.iter().map(|c| log_abscissas(c, s)).collect();
    let ys: Vec<Vec<f64>> = sorted.iter().map(|c| log_ordinates(c, nu)).collect();
    pairwise_msd(&xs, &ys, Some(regime.log_window()))
}

fn log_ordinates(curve: &SweepCurve, nu: f64) -> Vec<f64> {
    let shift = nu * (curve.l0 as f64).ln();
    curve.p_values.iter().map(|p| p.ln() + shift).collect()
}

fn require_positive_p(curves: &[SweepCurve]) -> Result<()> {
    for c in curves {
        if let Some(&p) = c.p_values.iter().find(|&&p| p <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "survival rescaling compares curves in ln p and needs p > 0 \
                 everywhere; curve L0 = {} has p = {p}",
                c.l0
            )));
        }
    }
    Ok(())
}

/// Curves sorted by `L0` so every downstream quantity is independent of the
/// order the caller supplies them in.
fn validated_sorted(curves: &[SweepCurve]) -> Result<Vec<SweepCurve>> {
    if curves.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "collapse needs >= 2 curves, got {}",
            curves.len()
        )));
    }
    for c in curves {
        c.validate()?;
    }
    let mut sorted = curves.to_vec();
    sorted.sort_by_key(|c| c.l0);
    if sorted.windows(2).any(|w| w[0].l0 == w[1].l0) {
        return Err(Error::InvalidParameter("curves must have distinct L0".into()));
    }
    Ok(sorted)
}

fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Coarse scan followed by golden-section refinement of `f` on `[lo, hi]`.
/// `f` reports non-overlapping exponents as `+∞`; errors if no exponent in
/// the interval yields an overlap.
fn scan_then_refine(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
) -> Result<f64> {
    let mut best = (f64::INFINITY, lo);
    for k in 0..points {
        let s = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let v = f(s);
        if v < best.0 {
            best = (v, s);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NoOverlap);
    }
    let h = (hi - lo) / (points - 1) as f64;
    let a = (best.1 - h).max(lo);
    let b = (best.1 + h).min(hi);
    Ok(golden_min(f, a, b, tol))
}

/// Fits the exponent `s` that best collapses the sweep curves onto a single
/// function of `g̃ = g·L₀^(−s)`, searching `search = (lo, hi)`. The standard
/// error comes from refitting 200 bootstrap resamples of each curve's points
/// (deterministic: the resampler is internally seeded).
pub fn fit_collapse_exponent(curves: &[SweepCurve], search: (f64, f64)) -> Result<CollapseFit> {
    let sorted = validated_sorted(curves)?;
    let (lo, hi) = search;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "search interval ({lo}, {hi}) is not a finite interval"
        )));
    }
    let eval = |cs: &[SweepCurve], s: f64| -> f64 {
        let xs: Vec<Vec<f64>> = cs.iter().map(|c| log_abscissas(c, s)).collect();
        let ys: Vec<Vec<f64>> = cs.iter().map(|c| c.p_values.clone()).collect();
        pairwise_msd(&xs, &ys, None).unwrap_or(f64::INFINITY)
    };
    let s_hat = scan_then_refine(|s| eval(&sorted, s), lo, hi, SCAN_POINTS, 1e-9)?;
    let objective = eval(&sorted, s_hat);
    if !objective.is_finite() {
        return Err(Error::NoOverlap);
    }

    let mut rng = ChaCha12Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut fitted = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let resampled: Vec<SweepCurve> = sorted.iter().map(|c| resample_curve(c, &mut rng)).collect();
        if let Ok(s_b) =
            scan_then_refine(|s| eval(&resampled, s), lo, hi, BOOTSTRAP_SCAN_POINTS, 1e-6)
        {
            fitted.push(s_b);
        }
    }
    if fitted.len() < 2 {
        return Err(Error::FitFailed(
            "bootstrap resamples lost curve overlap".into(),
        ));
    }
    let m = fitted.iter().sum::<f64>() / fitted.len() as f64;
    let var =
        fitted.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (fitted.len() - 1) as f64;
    Ok(CollapseFit { s: s_hat, objective, s_stderr: var.sqrt() })
}

/// Fits the survival-rescaling exponent `ν` on one regime's `g̃` window at a
/// fixed collapse exponent `s`, minimizing the [`p_scaling_objective`]
/// (pairwise dispersion of `ln p + ν·ln L₀`). Returns a [`CollapseFit`]
/// whose `s` field holds `ν`; the objective is in squared-`ln p` units.
pub fn fit_p_scaling_exponent(
    curves: &[SweepCurve],
    s: f64,
    regime: Regime,
    search: (f64, f64),
) -> Result<CollapseFit> {
    let sorted = validated_sorted(curves)?;
    require_positive_p(&sorted)?;
    let (lo, hi) = search;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "search interval ({lo}, {hi}) is not a finite interval"
        )));
    }
    let xs: Vec<Vec<f64>> = sorted.iter().map(|c| log_abscissas(c, s)).collect();
    let window = regime.log_window();
    let eval = |cs: &[SweepCurve], xs: &[Vec<f64>], nu: f64| -> f64 {
        let ys: Vec<Vec<f64>> = cs.iter().map(|c| log_ordinates(c, nu)).collect();
        pairwise_msd(xs, &ys, Some(window)).unwrap_or(f64::INFINITY)
    };
    let nu_hat = scan_then_refine(|nu| eval(&sorted, &xs, nu), lo, hi, SCAN_POINTS, 1e-9)?;
    let objective = eval(&sorted, &xs, nu_hat);
    if !objective.is_finite() {
        return Err(Error::NoOverlap);
    }

    let mut rng = ChaCha12Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut fitted = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let resampled: Vec<SweepCurve> = sorted.iter().map(|c| resample_curve(c, &mut rng)).collect();
        let rxs: Vec<Vec<f64>> = resampled.iter().map(|c| log_abscissas(c, s)).collect();
        if let Ok(nu_b) = scan_then_refine(
            |nu| eval(&resampled, &rxs, nu),
            lo,
            hi,
            BOOTSTRAP_SCAN_POINTS,
            1e-6,
        ) {
            fitted.push(nu_b);
        }
    }
    if fitted.len() < 2 {
        return Err(Error::FitFailed(
            "bootstrap resamples lost curve overlap".into(),
        ));
    }
    let m = fitted.iter().sum::<f64>() / fitted.len() as f64;
    let var =
        fitted.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (fitted.len() - 1) as f64;
    Ok(CollapseFit { s: nu_hat, objective, s_stderr: var.sqrt() })
}

/// Draws points with replacement and keeps the unique picks in `g` order
/// (duplicate picks carry the same `(g, p)` pair, so deduplication loses
/// nothing and keeps the abscissas strictly increasing).
fn resample_curve(curve: &SweepCurve, rng: &mut impl Rng) -> SweepCurve {
    let n = curve.g_values.len();
    loop {
        let mut picked = vec![false; n];
        for _ in 0..n {
            picked[rng.gen_range(0..n)] = true;
        }
        if picked.iter().filter(|&&b| b).count() >= 2 {
            let mut g = Vec::new();
            let mut p = Vec::new();
            for (i, &keep) in picked.iter().enumerate() {
                if keep {
                    g.push(curve.g_values[i]);
                    p.push(curve.p_values[i]);
                }
            }
            return SweepCurve { l0: curve.l0, g_values: g, p_values: p };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_g_closed_forms() {
        assert_eq!(scaled_g(7.5, 1, 0.76), 7.5);
        assert!((scaled_g(10.0, 21, 0.76) - 0.989).abs() < 1e-3);
        assert!((scaled_g(320.0, 3, 0.76) - 139.0).abs() < 0.5);
    }

    #[test]
    fn scaled_p_closed_forms() {
        assert_eq!(scaled_p(0.37, 1, 0.52), 0.37);
        assert!((scaled_p(0.5, 13, 0.52) - 1.900).abs() < 5e-3);
        assert_eq!(scaled_p(0.81, 17, 0.0), 0.81);
    }

    #[test]
    fn scaled_values_monotone() {
        assert!(scaled_g(2.0, 13, 0.76) > scaled_g(1.0, 13, 0.76));
        assert!(scaled_p(0.9, 13, 0.52) > scaled_p(0.5, 13, 0.52));
    }

    #[test]
    fn regime_thresholds() {
        assert_eq!(classify_regime(0.0), Regime::Localized);
        assert_eq!(classify_regime(0.05), Regime::Localized);
        assert_eq!(classify_regime(0.1), Regime::Chaotic);
        assert_eq!(classify_regime(1.0), Regime::Chaotic);
        assert_eq!(classify_regime(10.0), Regime::Chaotic);
        assert_eq!(classify_regime(10.000001), Regime::SelfTrapped);
        assert_eq!(classify_regime(139.0), Regime::SelfTrapped);
    }

    #[test]
    fn regime_depends_only_on_scaled_g() {
        // (g, L0) -> (g·λ^s, L0·λ) leaves g̃, and so the regime, unchanged.
        let s = 0.76;
        for lambda in [2usize, 3, 7] {
            for g in [0.01, 0.3, 5.0, 40.0, 500.0] {
                let before = classify_regime(scaled_g(g, 3, s));
                let after =
                    classify_regime(scaled_g(g * (lambda as f64).powf(s), 3 * lambda, s));
                assert_eq!(before, after, "g = {g}, lambda = {lambda}");
            }
        }
    }

    /// A dip-shaped master curve resembling a survival sweep: near 1 far
    /// from g̃ = 1, suppressed around it.
    fn master(u: f64) -> f64 {
        let x = u.ln();
        1.0 - 0.6 * (-x * x / 2.0).exp()
    }

    fn planted_curves(s: f64, widths: &[usize]) -> Vec<SweepCurve> {
        widths
            .iter()
            .map(|&l0| {
                let g_values: Vec<f64> =
                    (0..25).map(|k| 10f64.powf(-1.3 + 3.0 * k as f64 / 24.0)).collect();
                let p_values: Vec<f64> =
                    g_values.iter().map(|&g| master(scaled_g(g, l0, s))).collect();
                SweepCurve { l0, g_values, p_values }
            })
            .collect()
    }

    #[test]
    fn planted_exponent_recovered() {
        let curves = planted_curves(0.6, &[3, 7, 13, 21]);
        let fit = fit_collapse_exponent(&curves, (0.0, 2.0)).unwrap();
        assert!((fit.s - 0.6).abs() < 0.01, "s = {}", fit.s);
        assert!(fit.objective >= 0.0);
        assert!((0.0..=2.0).contains(&fit.s));
        assert!(fit.s_stderr < 0.05, "stderr = {}", fit.s_stderr);
    }

    #[test]
    fn planted_exponent_is_local_minimum() {
        let curves = planted_curves(0.6, &[3, 7, 13, 21]);
        let at = |s: f64| collapse_objective(&curves, s).unwrap();
        assert!(at(0.6) < at(0.5));
        assert!(at(0.6) < at(0.7));
        assert!(at(0.6) < 0.5 * at(0.0));
    }

    #[test]
    fn fit_invariant_under_curve_permutation() {
        let mut curves = planted_curves(0.6, &[3, 7, 13, 21]);
        let forward = fit_collapse_exponent(&curves, (0.0, 2.0)).unwrap();
        curves.reverse();
        curves.swap(1, 2);
        let shuffled = fit_collapse_exponent(&curves, (0.0, 2.0)).unwrap();
        assert_eq!(forward, shuffled);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let curves = planted_curves(0.6, &[3, 7]);
        let dup = vec![curves[0].clone(), curves[0].clone()];
        assert!(fit_collapse_exponent(&dup, (0.0, 2.0)).is_err());
        assert!(fit_collapse_exponent(&curves[..1], (0.0, 2.0)).is_err());
        let mut bad = curves.clone();
        bad[0].p_values.pop();
        assert!(fit_collapse_exponent(&bad, (0.0, 2.0)).is_err());
        let mut unsorted = curves.clone();
        unsorted[0].g_values.swap(3, 4);
        assert!(fit_collapse_exponent(&unsorted, (0.0, 2.0)).is_err());
        assert!(fit_collapse_exponent(&curves, (1.0, 1.0)).is_err());
    }

    #[test]
    fn disjoint_supports_error_as_no_overlap() {
        let low = SweepCurve {
            l0: 1,
            g_values: vec![0.001, 0.0015, 0.002],
            p_values: vec![0.9, 0.8, 0.7],
        };
        let high = SweepCurve {
            l0: 2,
            g_values: vec![1000.0, 1500.0, 2000.0],
            p_values: vec![0.5, 0.6, 0.7],
        };
        assert!(matches!(
            fit_collapse_exponent(&[low, high], (0.0, 2.0)),
            Err(Error::NoOverlap)
        ));
    }

    #[test]
    fn p_scaling_exponent_recovered_per_regime() {
        // Survival with an extra width dependence p = G(g̃)·L0^(−0.4):
        // rescaling by L0^ν undoes it exactly at ν = 0.4.
        let s = 0.76;
        let widths = [3usize, 7, 13, 21];
        let curves: Vec<SweepCurve> = widths
            .iter()
            .map(|&l0| {
                let g_values: Vec<f64> =
                    (0..30).map(|k| 10f64.powf(-1.0 + 4.0 * k as f64 / 29.0)).collect();
                let p_values: Vec<f64> = g_values
                    .iter()
                    .map(|&g| master(scaled_g(g, l0, s)) * (l0 as f64).powf(-0.4))
                    .collect();
                SweepCurve { l0, g_values, p_values }
            })
            .collect();
        for regime in [Regime::Chaotic, Regime::SelfTrapped] {
            let fit = fit_p_scaling_exponent(&curves, s, regime, (0.0, 1.0)).unwrap();
            assert!((fit.s - 0.4).abs() < 0.02, "{regime:?}: nu = {}", fit.s);
            let at_zero = p_scaling_objective(&curves, s, 0.0, regime).unwrap();
            assert!(fit.objective < at_zero);
        }
    }

    #[test]
    fn curve_validation_catches_bad_probability() {
        let c = SweepCurve { l0: 3, g_values: vec![1.0, 2.0], p_values: vec![0.5, 1.5] };
        assert!(c.validate().is_err());
    }
}
