//! Lattice state, disorder, initial condition, absorbing boundary, and the
//! right-hand side of the equation of motion.
//!
//! Sites carry symmetric integer indices `n ∈ [-(L-1)/2, (L-1)/2]` with `L`
//! odd; storage index `i ∈ [0, L)` maps to site `n = i - (L-1)/2`. Ends are
//! hard walls (amplitudes beyond the box are identically zero); the
//! absorbing potential exists precisely so that no significant amplitude
//! ever reaches the wall.

use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Functional form of the absorbing ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AbsorberShape {
    /// `a(x) ∝ x²` across the ramp; standard complex-absorbing-potential
    /// practice and the only shape currently supported.
    #[default]
    Quadratic,
}

/// Imaginary absorbing potential at the box edges.
///
/// The ramp occupies the outermost `n_abs` sites on each side, rising from
/// zero at `|n| = n_edge ≡ (L-1)/2 - n_abs` to `amplitude` at the outermost
/// site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorberSpec {
    pub n_abs: usize,
    pub amplitude: f64,
    pub shape: AbsorberShape,
}

impl Default for AbsorberSpec {
    fn default() -> Self {
        Self {
            n_abs: 10,
            amplitude: 1.0,
            shape: AbsorberShape::Quadratic,
        }
    }
}

impl AbsorberSpec {
    fn validate(&self, l: usize) -> Result<()> {
        if self.n_abs == 0 {
            return Err(Error::InvalidParameter("absorber n_abs must be >= 1".into()));
        }
        if 2 * self.n_abs >= l {
            return Err(Error::InvalidParameter(format!(
                "absorber occupies 2*n_abs = {} sites, which does not fit in L = {l}",
                2 * self.n_abs
            )));
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "absorber amplitude must be positive and finite, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }
}

/// All physical and numerical parameters of one realization run.
///
/// Energies are in units of the hopping `T`, time in units of `ħ/T`.
/// `absorber: None` switches the boundary absorption off entirely (used by
/// conservation and oracle tests).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Site count; odd.
    pub l: usize,
    /// Initial-state width in sites; odd, `<= l`.
    pub l0: usize,
    /// Disorder amplitude: on-site energies uniform on `[-W/2, W/2]`.
    pub w: f64,
    /// Interaction (nonlinearity) strength, `>= 0`.
    pub g: f64,
    /// Spontaneous-emission rate per unit time.
    pub gamma: f64,
    /// Integration horizon.
    pub t_max: f64,
    /// Hard cap on the integrator step.
    pub dt_max: f64,
    /// Total norm drift allotted to the integrator over `t_max` under the
    /// worst-case assumption that all probability sits at the extreme
    /// instantaneous frequency `E_scale`; together with `dt_max` and the
    /// `0.1/E_scale` accuracy cap this fixes the step size. See
    /// [`SimulationConfig::base_dt`].
    pub norm_drift_budget: f64,
    /// Boundary absorber; `None` disables absorption.
    pub absorber: Option<AbsorberSpec>,
    /// Master seed for single-trajectory runs (ensembles derive
    /// per-realization seeds from their own master seed).
    pub seed: u64,
    /// Times at which full density snapshots are recorded; sorted, within
    /// `[0, t_max]`.
    pub snapshot_times: Vec<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            l: 101,
            l0: 3,
            w: 4.0,
            g: 0.0,
            gamma: 0.0,
            t_max: 1.0e4,
            dt_max: 0.02,
            norm_drift_budget: 1.0e-3,
            absorber: Some(AbsorberSpec::default()),
            seed: 0xDA45E,
            snapshot_times: Vec::new(),
        }
    }
}

impl SimulationConfig {
    /// Checks every invariant; returns the config back for call chaining.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.l % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "L must be odd and positive, got {}",
                self.l
            )));
        }
        if self.l0 % 2 == 0 || self.l0 == 0 {
            return Err(Error::InvalidParameter(format!("L0 must be odd, got {}", self.l0)));
        }
        if self.l0 > self.l {
            return Err(Error::InvalidParameter(format!(
                "L0 = {} exceeds L = {}",
                self.l0, self.l
            )));
        }
        if !(self.w >= 0.0) || !self.w.is_finite() {
            return Err(Error::InvalidParameter(format!("W must be >= 0, got {}", self.w)));
        }
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return Err(Error::InvalidParameter(format!("g must be >= 0, got {}", self.g)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 0 and finite, got {}",
                self.gamma
            )));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_max must be positive and finite, got {}",
                self.t_max
            )));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt_max must be positive, got {}",
                self.dt_max
            )));
        }
        if !(self.norm_drift_budget > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "norm_drift_budget must be positive, got {}",
                self.norm_drift_budget
            )));
        }
        if let Some(abs) = &self.absorber {
            abs.validate(self.l)?;
        }
        let mut prev = 0.0;
        for &t in &self.snapshot_times {
            if !(t >= prev) || t > self.t_max {
                return Err(Error::InvalidParameter(format!(
                    "snapshot_times must be sorted within [0, t_max], offending value {t}"
                )));
            }
            prev = t;
        }
        Ok(())
    }

    /// Worst-case instantaneous frequency scale: half the hopping bandwidth
    /// plus the extreme disorder energy plus the peak nonlinear shift of the
    /// initial state (`max_rho0 = max_n |c_n(0)|²`).
    pub fn e_scale(&self, max_rho0: f64) -> f64 {
        2.0 + self.w / 2.0 + self.g * max_rho0
    }

    /// Integrator step size: `min(dt_max, 0.1/E_scale, dt_budget)`.
    ///
    /// The last term bounds the cumulative RK4 norm decay. One RK4 step on a
    /// mode of frequency `ω` multiplies its norm by `1 - (ω dt)⁶/72 + O(dt⁸)`,
    /// so placing all probability at `ω = E_scale` (worst case) bounds the
    /// total drift over `t_max` by `t_max · E_scale⁶ · dt⁵ / 72`; solving
    /// for the requested budget gives the step.
    pub fn base_dt(&self, max_rho0: f64) -> f64 {
        let e = self.e_scale(max_rho0);
        let budget = (72.0 * self.norm_drift_budget / (self.t_max * e.powi(6))).powf(0.2);
        self.dt_max.min(0.1 / e).min(budget)
    }

    /// Site index of the leftmost lattice site, `-(L-1)/2`.
    pub fn n_min(&self) -> i64 {
        -((self.l as i64 - 1) / 2)
    }
}

/// Maps storage index `i ∈ [0, L)` to site index `n ∈ [-(L-1)/2, (L-1)/2]`.
pub fn site_of_index(i: usize, l: usize) -> i64 {
    i as i64 - (l as i64 - 1) / 2
}

/// Maps site index to storage index.
pub fn index_of_site(n: i64, l: usize) -> usize {
    (n + (l as i64 - 1) / 2) as usize
}

/// One draw of the on-site energies `{v_n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub v: Vec<f64>,
}

/// The complex amplitude vector `c_n` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    pub c: Vec<Complex64>,
    pub t: f64,
}

impl LatticeState {
    /// Total probability currently on the lattice, `Σ |c_n|²`.
    pub fn norm(&self) -> f64 {
        self.c.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Per-site densities `|c_n|²`.
    pub fn densities(&self) -> Vec<f64> {
        self.c.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Draws `L` on-site energies independently and uniformly from
/// `[-W/2, W/2]`.
pub fn sample_disorder(w: f64, l: usize, stream: &mut impl RngCore) -> Result<DisorderRealization> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::InvalidParameter(format!("W must be >= 0, got {w}")));
    }
    if l == 0 {
        return Err(Error::InvalidParameter("L must be positive".into()));
    }
    let half = w / 2.0;
    let v = (0..l).map(|_| rng::uniform_symmetric(stream, half)).collect();
    Ok(DisorderRealization { v })
}

/// Square random-phase wave packet: `c_n(0) = L0^{-1/2} e^{iθ_n}` on the
/// central `L0` sites, zero elsewhere, with phases i.i.d. uniform on
/// `[0, 2π)`. Phases are drawn left to right for reproducibility.
pub fn initial_state(l0: usize, l: usize, stream: &mut impl RngCore) -> Result<LatticeState> {
    if l0 % 2 == 0 || l0 == 0 {
        return Err(Error::InvalidParameter(format!("L0 must be odd, got {l0}")));
    }
    if l % 2 == 0 || l == 0 {
        return Err(Error::InvalidParameter(format!("L must be odd, got {l}")));
    }
    if l0 > l {
        return Err(Error::InvalidParameter(format!("L0 = {l0} exceeds L = {l}")));
    }
    let mut c = vec![Complex64::new(0.0, 0.0); l];
    let amp = 1.0 / (l0 as f64).sqrt();
    let first = index_of_site(-((l0 as i64 - 1) / 2), l);
    for site in c.iter_mut().skip(first).take(l0) {
        let theta = rng::uniform01(stream) * std::f64::consts::TAU;
        let (sin, cos) = theta.sin_cos();
        *site = Complex64::new(amp * cos, amp * sin);
    }
    Ok(LatticeState { c, t: 0.0 })
}

/// Absorbing-potential profile `a_n >= 0` over the lattice:
/// `a_n = amplitude · ((|n| - n_edge)/n_abs)²` for `|n| > n_edge`, zero
/// inside, with `n_edge = (L-1)/2 - n_abs`.
pub fn absorber_profile(spec: &AbsorberSpec, l: usize) -> Result<Vec<f64>> {
    spec.validate(l)?;
    let n_edge = (l as i64 - 1) / 2 - spec.n_abs as i64;
    let a = (0..l)
        .map(|i| {
            let n = site_of_index(i, l).abs();
            if n > n_edge {
                let x = (n - n_edge) as f64 / spec.n_abs as f64;
                spec.amplitude * (match spec.shape {
                    AbsorberShape::Quadratic => x * x,
                })
            } else {
                0.0
            }
        })
        .collect();
    Ok(a)
}

/// Time derivative of the amplitudes:
///
/// ```text
/// dc_n/dt = -i[(v_n - i a_n) c_n - c_{n-1} - c_{n+1} + g|c_n|² c_n]
/// ```
///
/// with hard-wall ends (`c` outside the box treated as zero). Pass an empty
/// absorber slice to mean `a = 0` everywhere.
pub fn rhs(
    state: &LatticeState,
    disorder: &DisorderRealization,
    g: f64,
    a: &[f64],
) -> Result<Vec<Complex64>> {
    let l = state.c.len();
    if disorder.v.len() != l || (!a.is_empty() && a.len() != l) {
        return Err(Error::InvalidParameter(format!(
            "length mismatch: c has {l} sites, v has {}, a has {}",
            disorder.v.len(),
            a.len()
        )));
    }
    let c = &state.c;
    let mut out = vec![Complex64::new(0.0, 0.0); l];
    for i in 0..l {
        let left = if i > 0 { c[i - 1] } else { Complex64::new(0.0, 0.0) };
        let right = if i + 1 < l { c[i + 1] } else { Complex64::new(0.0, 0.0) };
        let diag = disorder.v[i] + g * c[i].norm_sqr();
        let mut dc = Complex64::new(0.0, -1.0) * (diag * c[i] - left - right);
        if !a.is_empty() {
            dc -= a[i] * c[i];
        }
        out[i] = dc;
    }
    Ok(out)
}

/// Instantaneous energy of the conservative part of the dynamics:
/// `H = Σ v_n|c_n|² - 2 Re Σ c_n* c_{n+1} + (g/2) Σ |c_n|⁴`.
/// Conserved exactly when the absorber is off and no kicks occur.
pub fn energy(state: &LatticeState, disorder: &DisorderRealization, g: f64) -> f64 {
    let c = &state.c;
    let mut h = 0.0;
    for i in 0..c.len() {
        let rho = c[i].norm_sqr();
        h += disorder.v[i] * rho + 0.5 * g * rho * rho;
        if i + 1 < c.len() {
            h -= 2.0 * (c[i].conj() * c[i + 1]).re;
        }
    }
    h
}
