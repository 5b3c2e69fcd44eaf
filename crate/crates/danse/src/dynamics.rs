//! Time evolution of a single realization: fixed-step RK4 integration of the
//! lattice equation of motion between spontaneous-emission events, and exact
//! application of momentum kicks at the scheduled event times.
//!
//! The integrator never steps across a sample time, snapshot time, or kick
//! time: the segment between consecutive "boundary" times is divided into
//! equal steps no larger than the base step from
//! [`SimulationConfig::base_dt`], so kicks land at their scheduled instants
//! with zero time offset and the kick statistics are independent of the step
//! size.

use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{site_of_index, DisorderRealization, LatticeState, SimulationConfig};
use crate::rng;

/// Poisson schedule of spontaneous-emission events over one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeSchedule {
    times: Vec<f64>,
    angles: Vec<f64>,
}

impl SeSchedule {
    /// Validates strictly increasing positive times and one angle per event.
    pub fn new(times: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        if times.len() != angles.len() {
            return Err(Error::InvalidParameter(format!(
                "{} event times but {} angles",
                times.len(),
                angles.len()
            )));
        }
        let mut prev = 0.0;
        for &t in &times {
            if !(t > prev) || !t.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "event times must be strictly increasing and positive, offending value {t}"
                )));
            }
            prev = t;
        }
        Ok(Self { times, angles })
    }

    pub fn empty() -> Self {
        Self { times: Vec::new(), angles: Vec::new() }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Draws a homogeneous Poisson process of rate `gamma` on `(0, t_max]`:
/// i.i.d. exponential waiting times between events, plus one emission angle
/// per event, i.i.d. uniform on `[0, 2π)`. Each event consumes its waiting
/// time and then its angle from the stream, in that order.
pub fn sample_se_schedule(
    gamma: f64,
    t_max: f64,
    stream: &mut impl RngCore,
) -> Result<SeSchedule> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(SeSchedule::empty());
    }
    let mut times = Vec::new();
    let mut angles = Vec::new();
    let mut t = 0.0;
    loop {
        t += rng::exponential_gap(stream, gamma);
        if t > t_max {
            break;
        }
        times.push(t);
        angles.push(rng::uniform01(stream) * std::f64::consts::TAU);
    }
    SeSchedule::new(times, angles)
}

/// Applies one spontaneous-emission momentum kick:
/// `c_n ← c_n · exp(i π n cosθ)`. A momentum translation by `π cosθ` is
/// exactly this site-linear phase on the lattice, so per-site densities and
/// the norm are unchanged to the last bit.
pub fn apply_kick(state: &LatticeState, theta: f64) -> LatticeState {
    let l = state.c.len();
    let q = std::f64::consts::PI * theta.cos();
    let c = state
        .c
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (s, co) = (q * site_of_index(i, l) as f64).sin_cos();
            c * Complex64::new(co, s)
        })
        .collect();
    LatticeState { c, t: state.t }
}

/// Fixed-step RK4 integrator for one realization.
///
/// State is held as separate real/imaginary arrays padded with one ghost
/// zero at each end, which makes the hopping stencil branch-free and lets
/// the compiler vectorize the stage loops. The ghosts implement the
/// hard-wall boundary.
pub struct Stepper {
    l: usize,
    g: f64,
    t: f64,
    // Padded length l+2; indices 1..=l are live, 0 and l+1 are ghosts.
    x: Vec<f64>,
    y: Vec<f64>,
    v: Vec<f64>,
    a: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    k: [Vec<f64>; 8],
}

/// One derivative evaluation over the padded arrays. Works on exact-length
/// subslices with exclusive ranges so the stage loop vectorizes.
#[inline]
fn deriv(g: f64, v: &[f64], a: &[f64], x: &[f64], y: &[f64], kx: &mut [f64], ky: &mut [f64]) {
    let l = v.len() - 2;
    let vc = &v[1..l + 1];
    let ac = &a[1..l + 1];
    let (xm, xc, xp) = (&x[0..l], &x[1..l + 1], &x[2..l + 2]);
    let (ym, yc, yp) = (&y[0..l], &y[1..l + 1], &y[2..l + 2]);
    let kxc = &mut kx[1..l + 1];
    let kyc = &mut ky[1..l + 1];
    for j in 0..l {
        let xi = xc[j];
        let yi = yc[j];
        let b = vc[j] + g * (xi * xi + yi * yi);
        kxc[j] = b * yi - ym[j] - yp[j] - ac[j] * xi;
        kyc[j] = -(b * xi - xm[j] - xp[j]) - ac[j] * yi;
    }
}

/// Runs `f` with SSE flush-to-zero and denormals-are-zero enabled, restoring
/// the caller's floating-point environment afterward. Subnormals only arise
/// here in the far tails of localized states, where they carry no physics
/// but make every FMA take a microcode trap.
#[cfg(target_arch = "x86_64")]
fn with_flush_to_zero<T>(f: impl FnOnce() -> T) -> T {
    #[allow(deprecated)]
    use core::arch::x86_64::{_mm_getcsr, _mm_setcsr};
    const FTZ_DAZ: u32 = (1 << 15) | (1 << 6);
    #[allow(deprecated)]
    // Sound: MXCSR control bits only change rounding of subnormals, and the
    // prior mode is restored before returning.
    let saved = unsafe { _mm_getcsr() };
    #[allow(deprecated)]
    unsafe {
        _mm_setcsr(saved | FTZ_DAZ)
    };
    let out = f();
    #[allow(deprecated)]
    unsafe {
        _mm_setcsr(saved)
    };
    out
}

#[cfg(not(target_arch = "x86_64"))]
fn with_flush_to_zero<T>(f: impl FnOnce() -> T) -> T {
    f()
}

/// `dst = base + h * k` on the live range.
#[inline]
fn saxpy(l: usize, dst: &mut [f64], base: &[f64], h: f64, k: &[f64]) {
    let d = &mut dst[1..l + 1];
    let b = &base[1..l + 1];
    let kk = &k[1..l + 1];
    for j in 0..l {
        d[j] = b[j] + h * kk[j];
    }
}

impl Stepper {
    pub fn new(
        state: &LatticeState,
        disorder: &DisorderRealization,
        g: f64,
        absorber: &[f64],
    ) -> Result<Self> {
        let l = state.c.len();
        if l == 0 {
            return Err(Error::InvalidParameter("empty state".into()));
        }
        if disorder.v.len() != l || (!absorber.is_empty() && absorber.len() != l) {
            return Err(Error::InvalidParameter(format!(
                "length mismatch: c has {l} sites, v has {}, a has {}",
                disorder.v.len(),
                absorber.len()
            )));
        }
        let pad = |src: &[f64]| {
            let mut out = vec![0.0; l + 2];
            out[1..=l].copy_from_slice(src);
            out
        };
        let x: Vec<f64> = state.c.iter().map(|c| c.re).collect();
        let y: Vec<f64> = state.c.iter().map(|c| c.im).collect();
        Ok(Self {
            l,
            g,
            t: state.t,
            x: pad(&x),
            y: pad(&y),
            v: pad(&disorder.v),
            a: if absorber.is_empty() { vec![0.0; l + 2] } else { pad(absorber) },
            xs: vec![0.0; l + 2],
            ys: vec![0.0; l + 2],
            k: std::array::from_fn(|_| vec![0.0; l + 2]),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Total probability on the lattice.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 1..=self.l {
            s += self.x[i] * self.x[i] + self.y[i] * self.y[i];
        }
        s
    }

    /// Per-site densities in storage order.
    pub fn densities(&self) -> Vec<f64> {
        (1..=self.l)
            .map(|i| self.x[i] * self.x[i] + self.y[i] * self.y[i])
            .collect()
    }

    /// Normalized spread `Σ n²|c_n|² / Σ |c_n|²`, summed as mirror pairs so
    /// a symmetric profile gives exactly the same value as its reflection.
    pub fn second_moment(&self) -> f64 {
        let center = (self.l + 1) / 2; // padded index of site n=0
        let mut num = 0.0;
        let mut den = self.x[center] * self.x[center] + self.y[center] * self.y[center];
        let half = (self.l - 1) / 2;
        for d in 1..=half {
            let lo = self.x[center - d] * self.x[center - d] + self.y[center - d] * self.y[center - d];
            let hi = self.x[center + d] * self.x[center + d] + self.y[center + d] * self.y[center + d];
            num += (d * d) as f64 * (lo + hi);
            den += lo + hi;
        }
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    pub fn to_state(&self) -> LatticeState {
        LatticeState {
            c: (1..=self.l)
                .map(|i| Complex64::new(self.x[i], self.y[i]))
                .collect(),
            t: self.t,
        }
    }

    /// Applies the site-linear kick phase in place.
    pub fn kick(&mut self, theta: f64) {
        let q = std::f64::consts::PI * theta.cos();
        let offset = (self.l as i64 - 1) / 2;
        for i in 1..=self.l {
            let n = (i as i64 - 1) - offset;
            let (s, c) = (q * n as f64).sin_cos();
            let (xi, yi) = (self.x[i], self.y[i]);
            self.x[i] = xi * c - yi * s;
            self.y[i] = xi * s + yi * c;
        }
    }

    /// One classical RK4 step of size `dt`.
    pub fn step_once(&mut self, dt: f64) {
        let l = self.l;
        let g = self.g;
        let [k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y] = &mut self.k;
        deriv(g, &self.v, &self.a, &self.x, &self.y, k1x, k1y);
        saxpy(l, &mut self.xs, &self.x, 0.5 * dt, k1x);
        saxpy(l, &mut self.ys, &self.y, 0.5 * dt, k1y);
        deriv(g, &self.v, &self.a, &self.xs, &self.ys, k2x, k2y);
        saxpy(l, &mut self.xs, &self.x, 0.5 * dt, k2x);
        saxpy(l, &mut self.ys, &self.y, 0.5 * dt, k2y);
        deriv(g, &self.v, &self.a, &self.xs, &self.ys, k3x, k3y);
        saxpy(l, &mut self.xs, &self.x, dt, k3x);
        saxpy(l, &mut self.ys, &self.y, dt, k3y);
        deriv(g, &self.v, &self.a, &self.xs, &self.ys, k4x, k4y);
        let w = dt / 6.0;
        let xl = &mut self.x[1..l + 1];
        let yl = &mut self.y[1..l + 1];
        for j in 0..l {
            xl[j] += w * (k1x[j + 1] + 2.0 * (k2x[j + 1] + k3x[j + 1]) + k4x[j + 1]);
            yl[j] += w * (k1y[j + 1] + 2.0 * (k2y[j + 1] + k3y[j + 1]) + k4y[j + 1]);
        }
        self.t += dt;
    }

    /// Advances to exactly `t_target` using equal steps no larger than
    /// `dt_base`; the final time is set to `t_target` with no rounding
    /// accumulation.
    pub fn advance_to(&mut self, t_target: f64, dt_base: f64) {
        let gap = t_target - self.t;
        if gap <= 0.0 {
            self.t = t_target.max(self.t);
            return;
        }
        let n = ((gap / dt_base - 1e-9).ceil() as usize).max(1);
        let dt = gap / n as f64;
        // Localized states develop spatial tails far below 1e-308 whose
        // subnormal arithmetic is microcoded and order-of-magnitude slow;
        // physically those amplitudes are zero, so flush them.
        with_flush_to_zero(|| {
            for _ in 0..n {
                self.step_once(dt);
            }
        });
        self.t = t_target;
    }

    fn check_finite(&self) -> Result<()> {
        if self.norm().is_finite() {
            Ok(())
        } else {
            Err(Error::Diverged {
                t: self.t,
                detail: "non-finite amplitude; step size too large for this state".into(),
            })
        }
    }
}

/// Advances one state by a single RK4 step of size `dt` and returns the new
/// state. Pass an empty absorber slice to mean no absorption.
pub fn step(
    state: &LatticeState,
    disorder: &DisorderRealization,
    g: f64,
    absorber: &[f64],
    dt: f64,
) -> Result<LatticeState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let mut stepper = Stepper::new(state, disorder, g, absorber)?;
    stepper.step_once(dt);
    stepper.check_finite()?;
    Ok(stepper.to_state())
}

/// When and what to record along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Observers {
    /// Times at which survival and spread are sampled; sorted, unique.
    pub sample_times: Vec<f64>,
    /// Times at which the full density profile is stored; sorted, unique.
    pub snapshot_times: Vec<f64>,
}

/// Log-spaced sample points per decade used by the standard grid.
pub const LOG_SAMPLES_PER_DECADE: usize = 60;

impl Observers {
    /// The standard grid: linear samples every 0.5 up to `t = 10`, then 60
    /// logarithmically spaced samples per decade up to `t_max` (always
    /// including `t_max` itself), plus the configured snapshot times.
    pub fn standard(config: &SimulationConfig) -> Self {
        let t_max = config.t_max;
        let mut times = Vec::new();
        let mut k = 0usize;
        loop {
            let t = 0.5 * k as f64;
            if t > t_max || t > 10.0 {
                break;
            }
            times.push(t);
            k += 1;
        }
        if t_max > 10.0 {
            let mut j = 1usize;
            loop {
                let t = 10f64.powf(1.0 + j as f64 / LOG_SAMPLES_PER_DECADE as f64);
                if t >= t_max {
                    break;
                }
                times.push(t);
                j += 1;
            }
        }
        if *times.last().unwrap_or(&-1.0) < t_max {
            times.push(t_max);
        }
        Self {
            sample_times: times,
            snapshot_times: config.snapshot_times.clone(),
        }
    }

    /// A custom grid; both lists must be sorted, nonnegative, and at most
    /// `t_max`.
    pub fn from_times(
        sample_times: Vec<f64>,
        snapshot_times: Vec<f64>,
        t_max: f64,
    ) -> Result<Self> {
        for list in [&sample_times, &snapshot_times] {
            let mut prev = -1.0;
            for &t in list.iter() {
                if !(t >= 0.0) || t > t_max || t <= prev {
                    return Err(Error::InvalidParameter(format!(
                        "observer times must be sorted, unique, within [0, t_max]; offending value {t}"
                    )));
                }
                prev = t;
            }
        }
        Ok(Self { sample_times, snapshot_times })
    }
}

/// Time series of observables plus density snapshots for one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub sample_times: Vec<f64>,
    /// Survival probability `p = Σ|c_n|²` at each sample time.
    pub survival: Vec<f64>,
    /// Normalized spread `⟨n²⟩` at each sample time.
    pub second_moment: Vec<f64>,
    /// `(time, |c_n|² profile)` pairs at the requested snapshot times.
    pub snapshots: Vec<(f64, Vec<f64>)>,
    /// Number of spontaneous-emission kicks applied.
    pub se_event_count: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum BoundaryKind {
    Sample,
    Snapshot,
    Kick(usize),
}

/// Integrates one realization from `t = 0` to `config.t_max`.
///
/// The integration stops exactly at every kick time (the final sub-step is
/// shortened, never skipped), applies the kick, and resumes; observables
/// are recorded at the observer times. Kicks change no density, so a sample
/// coinciding with a kick is well defined.
pub fn evolve(
    config: &SimulationConfig,
    disorder: &DisorderRealization,
    state0: &LatticeState,
    schedule: &SeSchedule,
    observers: &Observers,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    if state0.c.len() != config.l || disorder.v.len() != config.l {
        return Err(Error::InvalidParameter(format!(
            "length mismatch: config L = {}, state has {}, disorder has {}",
            config.l,
            state0.c.len(),
            disorder.v.len()
        )));
    }
    if let Some(&last) = schedule.times().last() {
        if last > config.t_max {
            return Err(Error::InvalidParameter(format!(
                "schedule event at t = {last} exceeds t_max = {}",
                config.t_max
            )));
        }
    }
    let absorber = match &config.absorber {
        Some(spec) => crate::model::absorber_profile(spec, config.l)?,
        None => Vec::new(),
    };
    let max_rho0 = state0.c.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let dt_base = config.base_dt(max_rho0);

    // Merge sample, snapshot, and kick times into one ordered boundary list.
    let mut boundaries: Vec<(f64, BoundaryKind)> = Vec::new();
    boundaries.extend(observers.sample_times.iter().map(|&t| (t, BoundaryKind::Sample)));
    boundaries.extend(observers.snapshot_times.iter().map(|&t| (t, BoundaryKind::Snapshot)));
    boundaries.extend(
        schedule
            .times()
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, BoundaryKind::Kick(i))),
    );
    boundaries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite boundary times"));

    let mut stepper = Stepper::new(state0, disorder, config.g, &absorber)?;
    let mut record = TrajectoryRecord {
        sample_times: observers.sample_times.clone(),
        survival: Vec::with_capacity(observers.sample_times.len()),
        second_moment: Vec::with_capacity(observers.sample_times.len()),
        snapshots: Vec::with_capacity(observers.snapshot_times.len()),
        se_event_count: 0,
    };
    for (t, kind) in boundaries {
        stepper.advance_to(t, dt_base);
        stepper.check_finite()?;
        match kind {
            BoundaryKind::Sample => {
                record.survival.push(stepper.norm());
                record.second_moment.push(stepper.second_moment());
            }
            BoundaryKind::Snapshot => record.snapshots.push((t, stepper.densities())),
            BoundaryKind::Kick(i) => {
                stepper.kick(schedule.angles()[i]);
                record.se_event_count += 1;
            }
        }
    }
    stepper.advance_to(config.t_max, dt_base);
    stepper.check_finite()?;
    Ok(record)
}
