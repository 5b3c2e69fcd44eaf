//! Conversions between laboratory laser-atom parameters and the reduced
//! (hopping = 1) units of the lattice model. All frequencies are expected in
//! one consistent unit chosen by the caller; every formula here is a ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Far-detuned optical-lattice parameters: natural linewidth `Γ₀`, resonance
/// Rabi frequency `Ω`, detuning `Δ = ω_L − ω₀`, and the hopping rate `T/ħ`
/// that defines the reduced time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserAtomParams {
    pub gamma0: f64,
    pub omega: f64,
    pub delta: f64,
    pub t_over_hbar: f64,
}

impl LaserAtomParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma0 must be positive, got {}",
                self.gamma0
            )));
        }
        if !(self.omega >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must be >= 0, got {}",
                self.omega
            )));
        }
        if self.delta == 0.0 || !self.delta.is_finite() {
            return Err(Error::Resonance);
        }
        if !(self.t_over_hbar > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "T/hbar must be positive, got {}",
                self.t_over_hbar
            )));
        }
        Ok(())
    }
}

/// Spontaneous-emission rate of an atom in the lattice light.
///
/// Exact: `Γ_se = (Γ₀/4)·Ω² / (Δ² + Ω²/2 + Γ₀²/4)`. With `approximate`,
/// the large-detuning limit `Γ₀Ω²/(4Δ²)` is used instead; the exact value is
/// always the smaller of the two.
pub fn se_rate(params: &LaserAtomParams, approximate: bool) -> Result<f64> {
    params.validate()?;
    let o2 = params.omega * params.omega;
    if approximate {
        Ok(params.gamma0 * o2 / (4.0 * params.delta * params.delta))
    } else {
        let denom =
            params.delta * params.delta + o2 / 2.0 + params.gamma0 * params.gamma0 / 4.0;
        Ok(params.gamma0 / 4.0 * o2 / denom)
    }
}

/// Optical-potential amplitude `V₀ = Ω²/(8Δ)` in units of `ħ` (multiply by
/// `ħ` in the caller's unit system). Negative for red detuning.
pub fn potential_depth(omega: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::Resonance);
    }
    Ok(omega * omega / (8.0 * delta))
}

/// Spontaneous-emission rate per tunneling time: `γ = Γ_se / (T/ħ)`.
pub fn reduced_gamma(gamma_se: f64, t_over_hbar: f64) -> Result<f64> {
    if !(t_over_hbar > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "T/hbar must be positive, got {t_over_hbar}"
        )));
    }
    if !(gamma_se >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spontaneous-emission rate must be >= 0, got {gamma_se}"
        )));
    }
    Ok(gamma_se / t_over_hbar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma0: f64, omega: f64, delta: f64) -> LaserAtomParams {
        LaserAtomParams { gamma0, omega, delta, t_over_hbar: 1000.0 }
    }

    #[test]
    fn se_rate_far_detuned() {
        let p = params(1.0, 1.0, 100.0);
        let approx = se_rate(&p, true).unwrap();
        assert!((approx - 2.5e-5).abs() < 1e-12);
        let exact = se_rate(&p, false).unwrap();
        assert!((exact - 2.49998e-5).abs() / 2.5e-5 < 1e-4);
        assert!((exact - approx).abs() / approx < 1e-4);
    }

    #[test]
    fn se_rate_vanishes_without_light() {
        let p = params(1.0, 0.0, 100.0);
        assert_eq!(se_rate(&p, true).unwrap(), 0.0);
        assert_eq!(se_rate(&p, false).unwrap(), 0.0);
    }

    #[test]
    fn exact_rate_below_approximate_and_converging() {
        let mut prev_gap = f64::INFINITY;
        for delta in [3.0, 10.0, 30.0, 100.0, 1000.0] {
            for sign in [1.0, -1.0] {
                let p = params(1.0, 2.0, sign * delta);
                let exact = se_rate(&p, false).unwrap();
                let approx = se_rate(&p, true).unwrap();
                assert!(exact < approx, "delta = {}", sign * delta);
            }
            let p = params(1.0, 2.0, delta);
            let gap = (se_rate(&p, true).unwrap() - se_rate(&p, false).unwrap())
                / se_rate(&p, true).unwrap();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-5);
    }

    #[test]
    fn potential_depth_examples() {
        assert!((potential_depth(2.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(potential_depth(2.0, -1.0).unwrap() < 0.0);
        let v1 = potential_depth(1.5, 7.0).unwrap();
        let v2 = potential_depth(3.0, 7.0).unwrap();
        assert!((v2 - 4.0 * v1).abs() < 1e-15);
        assert!(matches!(potential_depth(2.0, 0.0), Err(Error::Resonance)));
    }

    #[test]
    fn reduced_gamma_examples() {
        assert!((reduced_gamma(10.0, 1000.0).unwrap() - 1e-2).abs() < 1e-16);
        assert_eq!(reduced_gamma(0.0, 1000.0).unwrap(), 0.0);
        assert!((reduced_gamma(1.0, 1000.0).unwrap() - 1e-3).abs() < 1e-17);
        assert!(reduced_gamma(1.0, 0.0).is_err());
        assert!(reduced_gamma(-1.0, 10.0).is_err());
    }

    #[test]
    fn validation_rejects_resonance_and_bad_linewidth() {
        assert!(params(0.0, 1.0, 100.0).validate().is_err());
        assert!(matches!(params(1.0, 1.0, 0.0).validate(), Err(Error::Resonance)));
        let ok = params(1.0, 1.0, -50.0);
        assert!(ok.validate().is_ok());
    }
}
