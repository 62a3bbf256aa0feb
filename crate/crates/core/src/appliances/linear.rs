//! Linear branches defined by their power at nominal voltage.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metering::{fundamental_phasor, synthesize, Waveform};

/// Impedance that draws `p_target` W and `q_target` var from a sinusoidal
/// supply of `v_nom` volts RMS. Positive `q_target` is inductive.
pub fn impedance_from_pq(p_target: f64, q_target: f64, v_nom: f64) -> Result<Complex64> {
    if !(p_target.is_finite() && q_target.is_finite() && v_nom.is_finite()) {
        return Err(Error::invalid("non-finite power target"));
    }
    let s2 = p_target * p_target + q_target * q_target;
    if s2 == 0.0 {
        return Err(Error::invalid("power target is zero; a branch needs p or q"));
    }
    if v_nom <= 0.0 {
        return Err(Error::invalid("nominal voltage must be positive"));
    }
    // S = |V|² / Z*  →  Z = |V|² · S / |S|²
    Ok(Complex64::new(p_target, q_target) * (v_nom * v_nom / s2))
}

/// A `(p, q)` operating point at nominal voltage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTarget {
    pub p_target: f64,
    #[serde(default)]
    pub q_target: f64,
}

impl PowerTarget {
    pub fn is_zero(&self) -> bool {
        self.p_target == 0.0 && self.q_target == 0.0
    }

    pub fn admittance(&self, v_nom: f64) -> Result<Complex64> {
        if self.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(impedance_from_pq(self.p_target, self.q_target, v_nom)?.inv())
    }
}

/// Current through admittance `y` driven by `u`, which spans `cycles` whole
/// mains cycles. A real admittance is applied sample by sample, so resistive
/// loads follow any voltage distortion exactly; a complex one goes through
/// the fundamental phasor.
pub fn branch_current(u: &Waveform, y: Complex64, cycles: usize) -> Vec<f64> {
    if y.im == 0.0 {
        return u.samples().iter().map(|v| v * y.re).collect();
    }
    let voltage = fundamental_phasor(u.samples(), cycles);
    synthesize(voltage * y, u.len(), cycles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resistive_target() {
        let z = impedance_from_pq(100.0, 0.0, 235.0).unwrap();
        assert!((z.re - 552.25).abs() < 1e-9);
        assert_eq!(z.im, 0.0);
    }

    #[test]
    fn reactive_target_is_pure_reactance() {
        let z = impedance_from_pq(0.0, 100.0, 235.0).unwrap();
        assert_eq!(z.re, 0.0);
        assert!((z.im - 552.25).abs() < 1e-9);
    }

    #[test]
    fn zero_target_is_invalid() {
        assert!(matches!(impedance_from_pq(0.0, 0.0, 235.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn magnitude_and_angle() {
        let (p, q, v) = (1097.25, 210.88, 235.0);
        let z = impedance_from_pq(p, q, v).unwrap();
        assert!((z.norm() - v * v / (p * p + q * q).sqrt()).abs() < 1e-9);
        assert!((z.arg() - q.atan2(p)).abs() < 1e-12);
    }
}
