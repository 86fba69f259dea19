//! Current-model rotor flux observer in a synchronously rotating frame.
//!
//! This is the adjustable model of the resistance adaptation loop: an open
//! loop copy of the rotor circuit driven by stator current and slip speed,
//! whose only uncertain parameter is the rotor resistance estimate.
//!
//! ```text
//! d(lambda_dr)/dt = (Lm/Tr) ids - lambda_dr/Tr + w_sl lambda_qr
//! d(lambda_qr)/dt = (Lm/Tr) iqs - lambda_qr/Tr - w_sl lambda_dr
//! Tr = Lr / Rr_hat
//! ```
//!
//! Fluxes here are in V s. The motor model works in V (`F = omega_b * lambda`);
//! [`ObserverParams::flux_from_motor`] is the only place that conversion happens.

use crate::error::{Error, Result};
use crate::motor_model::MotorParams;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverParams<T> {
    /// Magnetizing inductance, H.
    pub lm: T,
    /// Rotor self inductance `Lm + Llr`, H.
    pub lr: T,
    omega_b: T,
}

impl<T: Real> ObserverParams<T> {
    pub fn new(lm: T, lr: T, omega_b: T) -> Self {
        Self { lm, lr, omega_b }
    }

    /// Inductances taken from the machine model so that the rotor
    /// resistance is the only parameter the observer does not share.
    pub fn from_motor(params: &MotorParams<T>) -> Self {
        Self {
            lm: params.lm(),
            lr: params.lr(),
            omega_b: params.omega_b,
        }
    }

    pub fn time_constant(&self, rr_hat: T) -> T {
        self.lr / rr_hat
    }

    /// Flux linkage per second (V) to flux linkage (V s).
    pub fn flux_from_motor(&self, f: T) -> T {
        f / self.omega_b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObserverState<T> {
    pub lambda_dr: T,
    pub lambda_qr: T,
    /// Rotor resistance used by the model, ohm.
    pub rr_hat: T,
}

impl<T: Real> ObserverState<T> {
    pub fn new(rr_hat: T) -> Self {
        Self {
            lambda_dr: T::zero(),
            lambda_qr: T::zero(),
            rr_hat,
        }
    }

    /// `|lambda_qr| / |lambda_dr|`, or `None` while the d-axis flux is zero.
    pub fn orientation_error(&self) -> Option<T> {
        if self.lambda_dr == T::zero() {
            None
        } else {
            Some((self.lambda_qr / self.lambda_dr).abs())
        }
    }
}

/// Time derivatives `(d lambda_dr/dt, d lambda_qr/dt)`.
pub fn observer_derivatives<T: Real>(
    obs: &ObserverState<T>,
    ids: T,
    iqs: T,
    omega_sl: T,
    params: &ObserverParams<T>,
) -> Result<(T, T)> {
    if obs.rr_hat.is_nan() || obs.rr_hat <= T::zero() {
        return Err(Error::Contract(format!(
            "observer rotor resistance must be > 0, got {}",
            obs.rr_hat
        )));
    }
    let inv_tr = obs.rr_hat / params.lr;
    let gain = params.lm * inv_tr;
    let d = gain * ids - inv_tr * obs.lambda_dr + omega_sl * obs.lambda_qr;
    let q = gain * iqs - inv_tr * obs.lambda_qr - omega_sl * obs.lambda_dr;
    Ok((d, q))
}

/// Fixed point `(lambda_dr, lambda_qr)` of the observer under constant inputs.
///
/// Setting both derivatives to zero gives a 2x2 system with determinant
/// `1/Tr^2 + w_sl^2 > 0`, so the solution is unique.
pub fn steady_state<T: Real>(ids: T, iqs: T, omega_sl: T, rr_hat: T, params: &ObserverParams<T>) -> (T, T) {
    let a = rr_hat / params.lr;
    let det = a * a + omega_sl * omega_sl;
    let scale = a * params.lm / det;
    (scale * (a * ids + omega_sl * iqs), scale * (a * iqs - omega_sl * ids))
}
