//! First-order radio energy model.
//!
//! A transmission of `k` bits over `d` metres costs
//! `e_tx_elec * k + e_amp * k * d^n`, and receiving `k` bits costs
//! `e_rx_elec * k`. All energies are joules.

use serde::Serialize;
use thiserror::Error;

use crate::config::Violation;

/// Conversion factor from nanojoules to joules.
pub const NANO: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("distance must be finite and non-negative, got {0}")]
    InvalidDistance(f64),
    #[error("invalid radio parameters: {0}")]
    InvalidParams(String),
}

/// Energy coefficients of the radio, stored in joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadioParams {
    /// Transmitter electronics, J/bit.
    pub e_tx_elec: f64,
    /// Receiver electronics, J/bit.
    pub e_rx_elec: f64,
    /// Amplifier coefficient, J/bit/m^n.
    pub e_amp: f64,
    pub path_loss_exponent: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self { e_tx_elec: 16.7 * NANO, e_rx_elec: 36.1 * NANO, e_amp: 1.97 * NANO, path_loss_exponent: 3.38 }
    }
}

impl RadioParams {
    /// Path-loss exponent for line-of-sight on-body links.
    pub const LOS_EXPONENT: f64 = 3.38;
    /// Path-loss exponent for non-line-of-sight on-body links.
    pub const NLOS_EXPONENT: f64 = 5.9;

    pub fn new(e_tx_elec: f64, e_rx_elec: f64, e_amp: f64, path_loss_exponent: f64) -> Result<Self, RadioError> {
        let params = Self { e_tx_elec, e_rx_elec, e_amp, path_loss_exponent };
        match params.violations("radio").first() {
            None => Ok(params),
            Some(v) => Err(RadioError::InvalidParams(v.to_string())),
        }
    }

    /// Same coefficients with a different path-loss exponent.
    pub fn with_exponent(self, path_loss_exponent: f64) -> Self {
        Self { path_loss_exponent, ..self }
    }

    pub(crate) fn violations(&self, prefix: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, value) in [
            ("e_tx_elec", self.e_tx_elec),
            ("e_rx_elec", self.e_rx_elec),
            ("e_amp", self.e_amp),
            ("path_loss_exponent", self.path_loss_exponent),
        ] {
            if !(value.is_finite() && value > 0.0) {
                out.push(Violation::new(
                    format!("{prefix}.{name}"),
                    format!("RadioParams: {name} must be strictly positive and finite, got {value}"),
                ));
            }
        }
        if self.path_loss_exponent.is_finite() && !(2.0..=6.0).contains(&self.path_loss_exponent) {
            out.push(Violation::new(
                format!("{prefix}.path_loss_exponent"),
                format!("RadioParams: path_loss_exponent must lie in [2.0, 6.0], got {}", self.path_loss_exponent),
            ));
        }
        out
    }
}

/// Energy to transmit `bits` over `distance_m` metres.
pub fn transmit_energy(params: &RadioParams, bits: u64, distance_m: f64) -> Result<f64, RadioError> {
    if !(distance_m.is_finite() && distance_m >= 0.0) {
        return Err(RadioError::InvalidDistance(distance_m));
    }
    let k = bits as f64;
    let amplifier = params.e_amp * k * distance_m.powf(params.path_loss_exponent);
    Ok(params.e_tx_elec * k + amplifier)
}

/// Energy to receive `bits`.
pub fn receive_energy(params: &RadioParams, bits: u64) -> f64 {
    params.e_rx_elec * bits as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs())
    }

    #[test]
    fn zero_bits_cost_nothing() {
        let p = RadioParams::default();
        assert_eq!(transmit_energy(&p, 0, 5.0).unwrap(), 0.0);
        assert_eq!(receive_energy(&p, 0), 0.0);
    }

    #[test]
    fn zero_distance_drops_amplifier_term() {
        let p = RadioParams::default();
        let e = transmit_energy(&p, 240, 0.0).unwrap();
        assert!(rel_close(e, 4.008e-6, 1e-12), "{e}");
    }

    #[test]
    fn unit_distance_golden_values() {
        let p = RadioParams::default();
        assert!(rel_close(transmit_energy(&p, 2400, 1.0).unwrap(), 44.808e-6, 1e-12));
        assert!(rel_close(transmit_energy(&p, 240, 1.0).unwrap(), 4.4808e-6, 1e-12));
        // d^n = 1 regardless of the exponent
        let nlos = p.with_exponent(RadioParams::NLOS_EXPONENT);
        assert!(rel_close(transmit_energy(&nlos, 2400, 1.0).unwrap(), 44.808e-6, 1e-12));
    }

    #[test]
    fn receive_golden_values() {
        let p = RadioParams::default();
        assert!(rel_close(receive_energy(&p, 240), 8.664e-6, 1e-12));
        assert!(rel_close(receive_energy(&p, 2400), 86.64e-6, 1e-12));
    }

    #[test]
    fn bad_distance_is_rejected() {
        let p = RadioParams::default();
        assert_eq!(transmit_energy(&p, 10, -1.0), Err(RadioError::InvalidDistance(-1.0)));
        assert!(transmit_energy(&p, 10, f64::NAN).is_err());
        assert!(transmit_energy(&p, 10, f64::INFINITY).is_err());
    }

    #[test]
    fn params_constructor_validates() {
        assert!(RadioParams::new(16.7e-9, 36.1e-9, 1.97e-9, 3.38).is_ok());
        assert!(RadioParams::new(16.7e-9, 36.1e-9, -1.0, 3.38).is_err());
        assert!(RadioParams::new(16.7e-9, 0.0, 1.97e-9, 3.38).is_err());
        assert!(RadioParams::new(16.7e-9, 36.1e-9, 1.97e-9, 1.5).is_err());
        assert!(RadioParams::new(16.7e-9, 36.1e-9, 1.97e-9, 6.5).is_err());
        assert!(RadioParams::new(f64::NAN, 36.1e-9, 1.97e-9, 3.0).is_err());
    }

    proptest! {
        #[test]
        fn transmit_is_additive_in_bits(k1 in 0u64..100_000, k2 in 0u64..100_000, d in 0.0f64..10.0) {
            let p = RadioParams::default();
            let whole = transmit_energy(&p, k1 + k2, d).unwrap();
            let parts = transmit_energy(&p, k1, d).unwrap() + transmit_energy(&p, k2, d).unwrap();
            prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1e-300));
        }

        #[test]
        fn transmit_increases_with_distance(k in 1u64..100_000, d1 in 0.0f64..10.0, gap in 1e-3f64..5.0) {
            let p = RadioParams::default();
            let near = transmit_energy(&p, k, d1).unwrap();
            let far = transmit_energy(&p, k, d1 + gap).unwrap();
            prop_assert!(near < far);
        }

        #[test]
        fn nlos_costs_more_beyond_one_metre(k in 1u64..100_000, d in 1.001f64..10.0) {
            let los = RadioParams::default();
            let nlos = los.with_exponent(RadioParams::NLOS_EXPONENT);
            prop_assert!(transmit_energy(&nlos, k, d).unwrap() > transmit_energy(&los, k, d).unwrap());
        }

        #[test]
        fn receive_cost_per_bit_is_constant(k in 1u64..1_000_000) {
            let p = RadioParams::default();
            let per_bit = receive_energy(&p, k) / k as f64;
            prop_assert!(rel_close(per_bit, p.e_rx_elec, 1e-12));
        }
    }
}
