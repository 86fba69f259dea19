//! Model reference adaptation of the rotor resistance.
//!
//! The reference model is the field-oriented condition `lambda_qr = 0`; the
//! adjustable model is the current-model observer. Their difference drives a
//! discrete PI update of the resistance estimate, clamped to a physical band.
//!
//! The sensitivity of `lambda_qr` to a resistance error flips sign with the
//! torque direction, so the error is multiplied by `sign(iqs)` before the PI
//! update and the estimate is held while `|iqs|` sits inside a dead band.

use crate::error::{Error, Result};
use crate::flux_observer::ObserverState;
use crate::scalar::{sign_with_deadband, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateForm {
    /// `dR(k) = Kp e(k) + Ki e(k) T`
    #[default]
    Positional,
    /// `dR(k) = Kp (e(k) - e(k-1)) + Ki e(k) T`
    Incremental,
}

impl std::str::FromStr for UpdateForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positional" => Ok(UpdateForm::Positional),
            "incremental" => Ok(UpdateForm::Incremental),
            other => Err(Error::Config(format!("unknown adaptation form `{other}`"))),
        }
    }
}

impl std::fmt::Display for UpdateForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UpdateForm::Positional => "positional",
            UpdateForm::Incremental => "incremental",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptationGains<T> {
    /// Ohm per V s of flux error.
    pub kp: T,
    /// Ohm per V s per second.
    pub ki: T,
    /// Adaptation sampling period, s.
    pub period: T,
    pub rr_min: T,
    pub rr_max: T,
    pub form: UpdateForm,
    /// Hold the estimate while `|iqs|` is at or below this, A.
    pub iqs_deadband: T,
    /// Hold the estimate until `|lambda_dr_hat|` exceeds this fraction of the flux command.
    pub flux_gate: T,
}

impl<T: Real> Default for AdaptationGains<T> {
    fn default() -> Self {
        Self {
            kp: T::lit(2.0e-4),
            ki: T::lit(4.0),
            period: T::lit(50e-6),
            rr_min: T::lit(0.05),
            rr_max: T::lit(2.0),
            form: UpdateForm::Positional,
            iqs_deadband: T::lit(1.2),
            flux_gate: T::lit(0.5),
        }
    }
}

impl<T: Real> AdaptationGains<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > T::zero()) {
            return Err(Error::Config(format!("gains.T must be > 0, got {}", self.period)));
        }
        if !(self.rr_min.is_finite() && self.rr_min > T::zero()) {
            return Err(Error::Config(format!("gains.rr_min must be > 0, got {}", self.rr_min)));
        }
        if !(self.rr_max.is_finite() && self.rr_min < self.rr_max) {
            return Err(Error::Config(format!(
                "gains.rr_min ({}) must be below gains.rr_max ({})",
                self.rr_min, self.rr_max
            )));
        }
        for (name, v) in [
            ("kp", self.kp),
            ("ki", self.ki),
            ("iqs_deadband", self.iqs_deadband),
            ("flux_gate", self.flux_gate),
        ] {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::Config(format!("gains.{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn clamp(&self, rr: T) -> T {
        rr.max(self.rr_min).min(self.rr_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptationState<T> {
    pub rr_hat: T,
    /// Last sign-corrected error fed to the PI law, V s.
    pub epsilon_prev: T,
    pub enabled: bool,
}

impl<T: Real> AdaptationState<T> {
    pub fn new(rr_hat: T, enabled: bool) -> Self {
        Self {
            rr_hat,
            epsilon_prev: T::zero(),
            enabled,
        }
    }
}

/// Flux error against the zero q-axis reference.
pub fn flux_error<T: Real>(lambda_qr_hat: T) -> T {
    T::zero() - lambda_qr_hat
}

/// One PI update of the resistance estimate.
///
/// `torque_sign` is the sign of the torque current (-1, 0 or +1). Zero holds
/// the estimate. A disabled state is returned unchanged.
pub fn pi_update<T: Real>(
    state: AdaptationState<T>,
    epsilon: T,
    gains: &AdaptationGains<T>,
    torque_sign: i8,
) -> AdaptationState<T> {
    if !state.enabled || torque_sign == 0 {
        return state;
    }
    let e = if torque_sign > 0 { epsilon } else { -epsilon };
    let delta = match gains.form {
        UpdateForm::Positional => gains.kp * e + gains.ki * e * gains.period,
        UpdateForm::Incremental => gains.kp * (e - state.epsilon_prev) + gains.ki * e * gains.period,
    };
    AdaptationState {
        rr_hat: gains.clamp(state.rr_hat + delta),
        epsilon_prev: e,
        enabled: true,
    }
}

/// Error formation, gating and PI update for one adaptation period.
///
/// Returns the new adaptation state and the resistance the observer (and the
/// slip calculation) should use for the next period.
pub fn adaptation_step<T: Real>(
    obs: &ObserverState<T>,
    adapt: AdaptationState<T>,
    iqs: T,
    lambda_dr_command: T,
    gains: &AdaptationGains<T>,
) -> (AdaptationState<T>, T) {
    let fluxed = obs.lambda_dr.abs() > gains.flux_gate * lambda_dr_command.abs();
    let sign = if fluxed {
        sign_with_deadband(iqs, gains.iqs_deadband)
    } else {
        0
    };
    let next = pi_update(adapt, flux_error(obs.lambda_qr), gains, sign);
    (next, next.rr_hat)
}
