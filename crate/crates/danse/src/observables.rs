//! Scalar and profile diagnostics: survival probability, density moments,
//! localization-length and shape fits, diffusion estimates, and the
//! nonlinear-energy regime diagnostic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{site_of_index, LatticeState};

/// A per-site density profile `|c_n|²`, possibly ensemble-averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub rho: Vec<f64>,
    /// Whether `Σρ_n` has been rescaled to 1.
    pub normalized: bool,
}

impl DensityProfile {
    pub fn from_state(state: &LatticeState) -> Self {
        Self { rho: state.densities(), normalized: false }
    }

    pub fn from_rho(rho: Vec<f64>) -> Self {
        Self { rho, normalized: false }
    }

    /// Total weight currently in the profile.
    pub fn total(&self) -> f64 {
        self.rho.iter().sum()
    }

    /// Rescales the profile to unit total weight.
    pub fn normalize(&mut self) -> Result<()> {
        let s = self.total();
        if s <= 0.0 {
            return Err(Error::EmptyDensity);
        }
        for r in &mut self.rho {
            *r /= s;
        }
        self.normalized = true;
        Ok(())
    }
}

/// Survival probability of a state: total probability on the lattice.
pub fn survival(state: &LatticeState) -> f64 {
    state.norm()
}

/// Survival probability read off a stored profile.
pub fn survival_of_profile(profile: &DensityProfile) -> f64 {
    profile.total()
}

/// Normalized spread `⟨x²⟩ = Σ n²ρ_n / Σ ρ_n`, summed as mirror pairs so a
/// profile and its reflection give exactly the same value.
pub fn second_moment(profile: &DensityProfile) -> Result<f64> {
    let l = profile.rho.len();
    if l % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "profiles have a center site and odd length, got {l}"
        )));
    }
    let center = (l - 1) / 2;
    let mut num = 0.0;
    let mut total = profile.rho[center];
    for d in 1..=center {
        let pair = profile.rho[center - d] + profile.rho[center + d];
        num += (d * d) as f64 * pair;
        total += pair;
    }
    if total <= 0.0 {
        return Err(Error::EmptyDensity);
    }
    Ok(num / total)
}

/// Result of an exponential-localization fit `ρ_n ∝ exp(-2|n|/ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocFit {
    /// Fitted localization length in sites.
    pub ell: f64,
    /// Coefficient of determination of the log-density line fit.
    pub r2: f64,
    /// `|n|` range used.
    pub window: (usize, usize),
}

/// Default fit window `3 <= |n| <= (L-1)/2 - n_abs - 2`: excludes the
/// center (which interactions depopulate) and the absorber skirt.
pub fn default_fit_window(l: usize, n_abs: usize) -> (usize, usize) {
    (3, (l - 1) / 2 - n_abs - 2)
}

/// Simple least squares of `y` on `x`; returns (slope, intercept, r2, mse).
fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 3 {
        return Err(Error::FitFailed(format!("only {} points", x.len())));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::FitFailed("degenerate abscissas".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok((slope, intercept, r2, ss_res / n))
}

/// Fits `log ρ_n` against `|n|` over the window (both signs of `n`
/// contribute) and converts the slope to a localization length
/// `ℓ = -2/slope`. Sites with `ρ_n = 0` are skipped.
pub fn fit_loc_length(profile: &DensityProfile, window: (usize, usize)) -> Result<LocFit> {
    let l = profile.rho.len();
    let (lo, hi) = window;
    if lo > hi || hi > (l - 1) / 2 {
        return Err(Error::InvalidParameter(format!(
            "fit window ({lo}, {hi}) does not fit a lattice of {l} sites"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &r) in profile.rho.iter().enumerate() {
        let n = site_of_index(i, l).unsigned_abs() as usize;
        if n >= lo && n <= hi && r > 0.0 {
            xs.push(n as f64);
            ys.push(r.ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::FitFailed(format!(
            "only {} usable sites in window ({lo}, {hi})",
            xs.len()
        )));
    }
    let (slope, _b, r2, _mse) = linear_fit(&xs, &ys)?;
    if slope >= 0.0 {
        return Err(Error::NoLocalization { slope });
    }
    Ok(LocFit { ell: -2.0 / slope, r2, window })
}

/// Band-center localization length of the disordered lattice, `ℓ₀ = 96/W²`.
pub fn theoretical_loc_length(w: f64) -> Result<f64> {
    if w == 0.0 {
        return Err(Error::InfiniteLocLength);
    }
    if !(w > 0.0) {
        return Err(Error::InvalidParameter(format!("W must be >= 0, got {w}")));
    }
    Ok(96.0 / (w * w))
}

/// Profile shape decided by competing fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeLabel {
    Exponential,
    Gaussian,
    Other,
}

/// Outcome of [`shape_classify`]: the winning model and the per-model mean
/// squared residuals of the log-density fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeClass {
    pub label: ShapeLabel,
    pub score_exp: f64,
    pub score_gauss: f64,
}

/// Minimum relative improvement over the constant fit for a shape to count.
const SHAPE_MIN_IMPROVEMENT: f64 = 0.05;

/// Classifies a profile as exponential (`log ρ ~ a|n| + b`), Gaussian
/// (`log ρ ~ a n² + b`), or other, by mean squared residual on all sites
/// with `ρ_n > 0`. Returns `Other` when neither model improves on a
/// constant fit by at least 5%, or when the profile is flat.
pub fn shape_classify(profile: &DensityProfile) -> Result<ShapeClass> {
    let l = profile.rho.len();
    let mut xs_abs = Vec::new();
    let mut xs_sq = Vec::new();
    let mut ys = Vec::new();
    for (i, &r) in profile.rho.iter().enumerate() {
        if r > 0.0 {
            let n = site_of_index(i, l) as f64;
            xs_abs.push(n.abs());
            xs_sq.push(n * n);
            ys.push(r.ln());
        }
    }
    if ys.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "shape classification needs >= 10 usable sites, got {}",
            ys.len()
        )));
    }
    let n = ys.len() as f64;
    let my = ys.iter().sum::<f64>() / n;
    let mse_const = ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>() / n;
    if mse_const < 1e-24 {
        return Ok(ShapeClass { label: ShapeLabel::Other, score_exp: 0.0, score_gauss: 0.0 });
    }
    let (_, _, _, score_exp) = linear_fit(&xs_abs, &ys)?;
    let (_, _, _, score_gauss) = linear_fit(&xs_sq, &ys)?;
    let best = score_exp.min(score_gauss);
    let label = if 1.0 - best / mse_const < SHAPE_MIN_IMPROVEMENT {
        ShapeLabel::Other
    } else if score_exp <= score_gauss {
        ShapeLabel::Exponential
    } else {
        ShapeLabel::Gaussian
    };
    Ok(ShapeClass { label, score_exp, score_gauss })
}

/// Result of a diffusion fit of `⟨x²⟩` vs `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionFit {
    /// Slope of the linear fit: the diffusion coefficient.
    pub d: f64,
    /// Coefficient of determination of the line.
    pub r2: f64,
    /// Mean squared residual of the line divided by that of a quadratic fit
    /// on the same window; values well above 1 flag curvature (ballistic or
    /// saturating growth) that invalidates a diffusive reading.
    pub curvature_ratio: f64,
}

/// Fits `⟨x²⟩ = D·t + const` over sample times within `window = (t_lo, t_hi)`.
pub fn estimate_diffusion_coefficient(
    times: &[f64],
    x2: &[f64],
    window: (f64, f64),
) -> Result<DiffusionFit> {
    if times.len() != x2.len() {
        return Err(Error::InvalidParameter(format!(
            "{} times but {} spread values",
            times.len(),
            x2.len()
        )));
    }
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (&t, &v) in times.iter().zip(x2) {
        if t >= window.0 && t <= window.1 {
            ts.push(t);
            vs.push(v);
        }
    }
    if ts.len() < 4 {
        return Err(Error::FitFailed(format!("only {} points in window", ts.len())));
    }
    let (slope, _b, r2, mse_line) = linear_fit(&ts, &vs)?;
    if slope <= 0.0 {
        return Err(Error::NoDiffusion { slope });
    }
    // Quadratic fit on centered, scaled abscissas for the curvature check.
    let mt = ts.iter().sum::<f64>() / ts.len() as f64;
    let span = ts.last().unwrap() - ts.first().unwrap();
    let u: Vec<f64> = ts.iter().map(|t| (t - mt) / span).collect();
    let mse_quad = quadratic_mse(&u, &vs);
    let curvature_ratio = mse_line / mse_quad.max(1e-30 * mse_line.max(1e-300));
    Ok(DiffusionFit { d: slope, r2, curvature_ratio })
}

/// Mean squared residual of the best-fit parabola through `(u, y)`.
fn quadratic_mse(u: &[f64], y: &[f64]) -> f64 {
    let n = u.len() as f64;
    // Normal equations for y = c0 + c1 u + c2 u²; u is centered and O(1).
    let s1: f64 = u.iter().sum();
    let s2: f64 = u.iter().map(|v| v * v).sum();
    let s3: f64 = u.iter().map(|v| v * v * v).sum();
    let s4: f64 = u.iter().map(|v| v * v * v * v).sum();
    let b0: f64 = y.iter().sum();
    let b1: f64 = u.iter().zip(y).map(|(a, b)| a * b).sum();
    let b2: f64 = u.iter().zip(y).map(|(a, b)| a * a * b).sum();
    let m = [[n, s1, s2], [s1, s2, s3], [s2, s3, s4]];
    let mut aug = [
        [m[0][0], m[0][1], m[0][2], b0],
        [m[1][0], m[1][1], m[1][2], b1],
        [m[2][0], m[2][1], m[2][2], b2],
    ];
    // Gaussian elimination with partial pivoting on the 3x3 system.
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        if p.abs() < 1e-300 {
            return f64::INFINITY;
        }
        for row in 0..3 {
            if row != col {
                let f = aug[row][col] / p;
                for k in col..4 {
                    aug[row][k] -= f * aug[col][k];
                }
            }
        }
    }
    let c: Vec<f64> = (0..3).map(|i| aug[i][3] / aug[i][i]).collect();
    let mut ss = 0.0;
    for (ui, yi) in u.iter().zip(y) {
        let fit = c[0] + c[1] * ui + c[2] * ui * ui;
        ss += (yi - fit) * (yi - fit);
    }
    ss / n
}

/// Decoherence-induced diffusion coefficient `D_SE = D · t_loc · γ` with the
/// localization time taken as `t_loc = 1/W²` (proportionality constant 1 by
/// convention).
pub fn estimate_d_se(d: f64, w: f64, gamma: f64) -> Result<f64> {
    if !(d >= 0.0) || !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "D and gamma must be >= 0, got D = {d}, gamma = {gamma}"
        )));
    }
    if !(w > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "W must be positive (no localization time at W = {w})"
        )));
    }
    Ok(d * gamma / (w * w))
}

/// Per-site nonlinear energy shift `v^NL_n = g|c_n|²` and its maximum, used
/// to place a state among the localized (`v^NL ≪ W`), chaotic (`∼ W`), and
/// self-trapped (`≫ W`) regimes.
pub fn nonlinear_energy(state: &LatticeState, g: f64) -> (Vec<f64>, f64) {
    let v: Vec<f64> = state.c.iter().map(|c| g * c.norm_sqr()).collect();
    let max = v.iter().cloned().fold(0.0, f64::max);
    (v, max)
}
