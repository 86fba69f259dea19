//! Indirect field-oriented control: speed loop, flux command, slip feedforward,
//! frame angle, and the current regulation stage that drives the machine.

use crate::error::{Error, Result};
use crate::motor_model::MotorParams;
use crate::scalar::Real;
use crate::transforms::{synchronous_to_abc, FrameAngle, QdSynchronous, ThreePhase};

/// Mechanical rpm to rotor electrical rad/s.
pub fn rpm_to_electrical<T: Real>(rpm: T, params: &MotorParams<T>) -> T {
    rpm * T::TAU() / T::lit(60.0) * params.pole_pairs()
}

/// Rotor electrical rad/s to mechanical rpm.
pub fn electrical_to_rpm<T: Real>(omega_r: T, params: &MotorParams<T>) -> T {
    omega_r / params.pole_pairs() * T::lit(60.0) / T::TAU()
}

/// Speed PI with output clamp and conditional-integration anti-windup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedPi<T> {
    /// A per (electrical rad/s).
    pub kp: T,
    /// A per (electrical rad/s) per s.
    pub ki: T,
    pub integ: T,
    /// Torque current limit, A.
    pub iqs_max: T,
}

impl<T: Real> SpeedPi<T> {
    pub fn new(kp: T, ki: T, iqs_max: T) -> Self {
        Self {
            kp,
            ki,
            integ: T::zero(),
            iqs_max,
        }
    }
}

/// Torque current command for one control period `dt`.
///
/// `omega_ref` is mechanical rad/s; `omega_r` is the measured rotor
/// electrical speed. The integrator is frozen while the output is saturated
/// and the error would push it further into saturation.
pub fn speed_loop<T: Real>(omega_ref: T, omega_r: T, pi: &mut SpeedPi<T>, params: &MotorParams<T>, dt: T) -> T {
    let error = omega_ref * params.pole_pairs() - omega_r;
    let p = pi.kp * error;
    let candidate = pi.integ + pi.ki * error * dt;
    let unclamped = p + candidate;
    let out = unclamped.max(-pi.iqs_max).min(pi.iqs_max);
    let winding_up = (unclamped > pi.iqs_max && error > T::zero()) || (unclamped < -pi.iqs_max && error < T::zero());
    if !winding_up {
        pi.integ = candidate.max(-pi.iqs_max).min(pi.iqs_max);
    }
    out
}

/// Flux current command: linear ramp to the rated value, then constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxCommand<T> {
    pub ids_rated: T,
    pub ramp_time: T,
}

impl<T: Real> FluxCommand<T> {
    /// Command in force over the control period ending at `t_end`.
    pub fn ids_ref(&self, t_end: T) -> T {
        if self.ramp_time <= T::zero() || t_end >= self.ramp_time {
            self.ids_rated
        } else {
            self.ids_rated * (t_end / self.ramp_time).max(T::zero())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IfocState<T> {
    /// Unwrapped synchronous frame angle, rad.
    pub theta_e: T,
    pub ids_ref: T,
    pub iqs_ref: T,
    pub omega_sl_ref: T,
    /// Frame speed used for the last advance, rad/s.
    pub omega_e: T,
    /// Rotor time constant behind the slip command, s.
    pub tr_cmd: T,
}

/// Slip feedforward `w_sl = iqs / (Tr ids)` and frame angle advance by
/// `(omega_r + w_sl) h`.
pub fn slip_and_angle<T: Real>(
    iqs_ref: T,
    ids_ref: T,
    tr_cmd: T,
    omega_r: T,
    h: T,
    state: IfocState<T>,
) -> Result<IfocState<T>> {
    if ids_ref.is_nan() || ids_ref <= T::zero() {
        return Err(Error::Contract(format!(
            "slip needs a positive flux current command, got ids_ref = {ids_ref}"
        )));
    }
    if tr_cmd.is_nan() || tr_cmd <= T::zero() {
        return Err(Error::Contract(format!(
            "slip needs a positive rotor time constant, got {tr_cmd}"
        )));
    }
    let omega_sl = iqs_ref / (tr_cmd * ids_ref);
    let omega_e = omega_r + omega_sl;
    Ok(IfocState {
        theta_e: state.theta_e + omega_e * h,
        ids_ref,
        iqs_ref,
        omega_sl_ref: omega_sl,
        omega_e,
        tr_cmd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegulationMode {
    /// Commanded currents are imposed on the machine directly.
    #[default]
    Ideal,
    /// Per-phase bang-bang comparators switching the DC link.
    Hysteresis,
}

impl std::str::FromStr for RegulationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ideal" => Ok(RegulationMode::Ideal),
            "hysteresis" => Ok(RegulationMode::Hysteresis),
            other => Err(Error::Config(format!("unknown regulation mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for RegulationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegulationMode::Ideal => "ideal",
            RegulationMode::Hysteresis => "hysteresis",
        })
    }
}

/// Three comparators with memory. Each phase leg sits at `+Vd/2` or `-Vd/2`
/// relative to the DC link midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisInverter<T> {
    pub band: T,
    pub vdc: T,
    legs: [T; 3],
}

impl<T: Real> HysteresisInverter<T> {
    pub fn new(band: T, vdc: T) -> Self {
        let low = -vdc * T::lit(0.5);
        Self {
            band,
            vdc,
            legs: [low; 3],
        }
    }

    /// Pole voltages for the next period.
    pub fn switch(&mut self, reference: ThreePhase<T>, measured: ThreePhase<T>) -> ThreePhase<T> {
        let half = self.vdc * T::lit(0.5);
        let refs = [reference.a, reference.b, reference.c];
        let meas = [measured.a, measured.b, measured.c];
        for k in 0..3 {
            let err = refs[k] - meas[k];
            if err > self.band {
                self.legs[k] = half;
            } else if err < -self.band {
                self.legs[k] = -half;
            }
        }
        ThreePhase::new(self.legs[0], self.legs[1], self.legs[2])
    }
}

/// What the regulation stage hands to the machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive<T> {
    /// Stator currents imposed in the controller frame.
    Currents(QdSynchronous<T>),
    /// Pole voltages (relative to the DC midpoint).
    PoleVoltages(ThreePhase<T>),
}

/// Regulation output together with the phase current references it tracks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regulated<T> {
    pub reference: ThreePhase<T>,
    pub drive: Drive<T>,
}

/// Turns synchronous current commands into a machine drive signal.
///
/// Ideal regulation imposes the command directly, so the phase currents equal
/// the references. Hysteresis regulation needs the inverter state and the
/// measured phase currents.
pub fn current_regulation<T: Real>(
    iqs_ref: T,
    ids_ref: T,
    theta_e: FrameAngle<T>,
    inverter: Option<&mut HysteresisInverter<T>>,
    measured: ThreePhase<T>,
) -> Regulated<T> {
    let command = QdSynchronous::new(iqs_ref, ids_ref);
    let reference = synchronous_to_abc(command, theta_e);
    let drive = match inverter {
        None => Drive::Currents(command),
        Some(inv) => Drive::PoleVoltages(inv.switch(reference, measured)),
    };
    Regulated { reference, drive }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> MotorParams<f64> {
        MotorParams::default()
    }

    #[test]
    fn speed_conversion() {
        let p = params();
        let w = rpm_to_electrical(250.0, &p);
        assert!((w - 78.539_816).abs() < 1e-5, "{w}");
        assert!((electrical_to_rpm(w, &p) - 250.0).abs() < 1e-12);
    }

    #[test]
    fn speed_loop_zero_error() {
        let p = params();
        let mut pi = SpeedPi::new(9.0, 45.0, 60.0);
        let w = rpm_to_electrical(100.0, &p);
        let iqs = speed_loop(w / p.pole_pairs(), w, &mut pi, &p, 50e-6);
        assert_eq!(iqs, 0.0);
        assert_eq!(pi.integ, 0.0);
    }

    #[test]
    fn speed_loop_saturates_without_windup() {
        let p = params();
        let mut pi = SpeedPi::new(9.0, 45.0, 60.0);
        for _ in 0..1000 {
            let iqs = speed_loop(100.0, 0.0, &mut pi, &p, 1e-3);
            assert_eq!(iqs, 60.0);
        }
        assert_eq!(pi.integ, 0.0);
        let iqs = speed_loop(-100.0, 0.0, &mut pi, &p, 1e-3);
        assert_eq!(iqs, -60.0);
    }

    #[test]
    fn flux_ramp() {
        let f = FluxCommand {
            ids_rated: 10.0f64,
            ramp_time: 0.1,
        };
        assert!((f.ids_ref(0.05) - 5.0).abs() < 1e-12);
        assert_eq!(f.ids_ref(0.2), 10.0);
        assert!(f.ids_ref(50e-6) > 0.0);
        let step = FluxCommand {
            ids_rated: 10.0,
            ramp_time: 0.0,
        };
        assert_eq!(step.ids_ref(0.0), 10.0);
    }

    #[test]
    fn slip_examples() {
        let s = slip_and_angle(0.0f64, 5.0, 0.1, 20.0, 1e-3, IfocState::default()).unwrap();
        assert_eq!(s.omega_sl_ref, 0.0);
        assert!((s.theta_e - 0.02).abs() < 1e-15);

        let s = slip_and_angle(7.0f64, 7.0, 0.1, 0.0, 1e-3, IfocState::default()).unwrap();
        assert!((s.omega_sl_ref - 10.0).abs() < 1e-12);

        let tuned = slip_and_angle(9.4f64, 14.7, 0.087, 0.0, 1e-3, IfocState::default()).unwrap();
        let detuned = slip_and_angle(9.4f64, 14.7, 4.0 * 0.087, 0.0, 1e-3, IfocState::default()).unwrap();
        assert!((detuned.omega_sl_ref * 4.0 - tuned.omega_sl_ref).abs() < 1e-12);
    }

    #[test]
    fn slip_requires_flux_command() {
        for ids in [0.0, -1.0] {
            assert!(matches!(
                slip_and_angle(1.0, ids, 0.1, 0.0, 1e-3, IfocState::default()),
                Err(Error::Contract(_))
            ));
        }
    }

    #[test]
    fn angle_is_monotone_for_positive_frame_speed() {
        let mut s = IfocState::default();
        let mut last = s.theta_e;
        for k in 0..1000 {
            s = slip_and_angle(5.0 * (k as f64 * 0.01).sin(), 10.0, 0.087, 30.0, 50e-6, s).unwrap();
            assert!(s.theta_e > last);
            last = s.theta_e;
        }
    }

    #[test]
    fn ideal_regulation_passes_commands() {
        let r = current_regulation(3.0, 4.0, FrameAngle(0.7), None, ThreePhase::default());
        assert_eq!(r.drive, Drive::Currents(QdSynchronous::new(3.0, 4.0)));
        let zero = current_regulation(0.0, 0.0, FrameAngle(0.7), None, ThreePhase::default());
        assert_eq!(zero.reference, ThreePhase::default());
    }

    #[test]
    fn hysteresis_switches_and_holds() {
        let mut inv = HysteresisInverter::new(0.5, 260.0);
        let reference = ThreePhase::new(2.0, -1.0, -1.0);
        let v = inv.switch(reference, ThreePhase::new(0.0, 0.0, 0.0));
        assert_eq!(v, ThreePhase::new(130.0, -130.0, -130.0));
        // Inside the band every leg keeps its last state.
        let v = inv.switch(reference, ThreePhase::new(2.2, -0.8, -1.3));
        assert_eq!(v, ThreePhase::new(130.0, -130.0, -130.0));
        let v = inv.switch(reference, ThreePhase::new(2.6, -1.6, -1.0));
        assert_eq!(v, ThreePhase::new(-130.0, 130.0, -130.0));
    }
}
