//! Induction machine dynamics in flux-linkage-per-second form.
//!
//! States are `F = omega_b * lambda` (volts). Reactances are evaluated at the
//! base frequency `omega_b`. The model is written for an arbitrary reference
//! frame rotating at `omega_e`; `omega_e = 0` gives the stationary frame.
//!
//! Stator coupling terms use the dissipative form `(Fm - Fs)`, the same shape
//! as the rotor terms. With that sign the stored magnetic energy
//! `0.5 * sum(F * i) / omega_b` can only fall when the terminals are shorted.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Electrical and mechanical constants of the machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorParams<T> {
    /// Stator resistance, ohm.
    pub rs: T,
    /// Rotor resistance referred to the stator, ohm.
    pub rr: T,
    /// Stator leakage reactance at `omega_b`, ohm.
    pub xls: T,
    /// Rotor leakage reactance at `omega_b`, ohm.
    pub xlr: T,
    /// Magnetizing reactance at `omega_b`, ohm.
    pub xm: T,
    /// Number of poles.
    pub poles: u32,
    /// Rotor plus load inertia, kg m^2.
    pub inertia: T,
    /// Base electrical angular frequency, rad/s.
    pub omega_b: T,
    /// DC link voltage, V. Only the hysteresis inverter uses it.
    pub vdc: T,
}

impl<T: Real> Default for MotorParams<T> {
    /// 60 Hz, 6-pole machine: Rs = 0.6, Rr = 0.412, Lls = Llr = 1.9 mH,
    /// Lm = 34 mH, J = 3, Vd = 260 V.
    fn default() -> Self {
        let omega_b = T::lit(2.0 * std::f64::consts::PI * 60.0);
        let leakage = T::lit(1.9e-3);
        Self {
            rs: T::lit(0.6),
            rr: T::lit(0.412),
            xls: omega_b * leakage,
            xlr: omega_b * leakage,
            xm: omega_b * T::lit(0.034),
            poles: 6,
            inertia: T::lit(3.0),
            omega_b,
            vdc: T::lit(260.0),
        }
    }
}

impl<T: Real> MotorParams<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rs", self.rs),
            ("rr", self.rr),
            ("xls", self.xls),
            ("xlr", self.xlr),
            ("xm", self.xm),
            ("inertia", self.inertia),
            ("omega_b", self.omega_b),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::Config(format!("motor.{name} must be finite and > 0, got {v}")));
            }
        }
        if self.poles < 2 || !self.poles.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "motor.poles must be even and >= 2, got {}",
                self.poles
            )));
        }
        if !self.vdc.is_finite() || self.vdc < T::zero() {
            return Err(Error::Config(format!(
                "motor.vdc must be finite and >= 0, got {}",
                self.vdc
            )));
        }
        Ok(())
    }

    /// Parallel combination `1 / (1/Xm + 1/Xls + 1/Xlr)`.
    pub fn xml_star(&self) -> T {
        T::one() / (T::one() / self.xm + T::one() / self.xls + T::one() / self.xlr)
    }

    pub fn pole_pairs(&self) -> T {
        T::lit(f64::from(self.poles) / 2.0)
    }

    pub fn lm(&self) -> T {
        self.xm / self.omega_b
    }

    pub fn lls(&self) -> T {
        self.xls / self.omega_b
    }

    pub fn llr(&self) -> T {
        self.xlr / self.omega_b
    }

    /// Rotor self inductance `Lm + Llr`.
    pub fn lr(&self) -> T {
        self.lm() + self.llr()
    }

    pub fn rotor_time_constant(&self) -> T {
        self.lr() / self.rr
    }

    pub fn with_rotor_resistance(mut self, rr: T) -> Self {
        self.rr = rr;
        self
    }
}

/// Flux linkages per second (V) in the simulation frame, plus rotor electrical speed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorState<T> {
    pub fqs: T,
    pub fds: T,
    pub fqr: T,
    pub fdr: T,
    /// Rotor electrical angular speed, rad/s.
    pub omega_r: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorInputs<T> {
    pub vqs: T,
    pub vds: T,
    pub vqr: T,
    pub vdr: T,
    /// Electrical speed of the frame the state is expressed in, rad/s.
    pub omega_e: T,
    /// Load torque, N m.
    pub load_torque: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Currents<T> {
    pub iqs: T,
    pub ids: T,
    pub iqr: T,
    pub idr: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorOutputs<T> {
    pub iqs: T,
    pub ids: T,
    pub iqr: T,
    pub idr: T,
    pub fmq: T,
    pub fmd: T,
    /// Electromagnetic torque, N m.
    pub te: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluxDerivatives<T> {
    pub fqs: T,
    pub fds: T,
    pub fqr: T,
    pub fdr: T,
}

/// Mutual flux linkages per second `(Fmq, Fmd)`.
pub fn magnetizing_flux<T: Real>(state: &MotorState<T>, params: &MotorParams<T>) -> (T, T) {
    let xml = params.xml_star();
    let fmq = xml * (state.fqs / params.xls + state.fqr / params.xlr);
    let fmd = xml * (state.fds / params.xls + state.fdr / params.xlr);
    (fmq, fmd)
}

pub fn currents_from_flux<T: Real>(state: &MotorState<T>, params: &MotorParams<T>) -> Currents<T> {
    let (fmq, fmd) = magnetizing_flux(state, params);
    Currents {
        iqs: (state.fqs - fmq) / params.xls,
        ids: (state.fds - fmd) / params.xls,
        iqr: (state.fqr - fmq) / params.xlr,
        idr: (state.fdr - fmd) / params.xlr,
    }
}

/// Electromagnetic torque from stator flux and stator current.
pub fn torque<T: Real>(state: &MotorState<T>, iqs: T, ids: T, params: &MotorParams<T>) -> T {
    T::lit(1.5) * params.pole_pairs() / params.omega_b * (state.fds * iqs - state.fqs * ids)
}

/// Rotor electrical acceleration, rad/s^2.
pub fn mechanical_acceleration<T: Real>(te: T, load_torque: T, params: &MotorParams<T>) -> T {
    params.pole_pairs() * (te - load_torque) / params.inertia
}

pub fn flux_derivatives<T: Real>(
    state: &MotorState<T>,
    inputs: &MotorInputs<T>,
    params: &MotorParams<T>,
) -> FluxDerivatives<T> {
    let (fmq, fmd) = magnetizing_flux(state, params);
    let wb = params.omega_b;
    let we = inputs.omega_e / wb;
    let wsl = (inputs.omega_e - state.omega_r) / wb;
    let ks = params.rs / params.xls;
    let kr = params.rr / params.xlr;
    FluxDerivatives {
        fqs: wb * (inputs.vqs - we * state.fds + ks * (fmq - state.fqs)),
        fds: wb * (inputs.vds + we * state.fqs + ks * (fmd - state.fds)),
        fqr: wb * (inputs.vqr - wsl * state.fdr + kr * (fmq - state.fqr)),
        fdr: wb * (inputs.vdr + wsl * state.fqr + kr * (fmd - state.fdr)),
    }
}

pub fn outputs<T: Real>(state: &MotorState<T>, params: &MotorParams<T>) -> MotorOutputs<T> {
    let (fmq, fmd) = magnetizing_flux(state, params);
    let i = currents_from_flux(state, params);
    MotorOutputs {
        iqs: i.iqs,
        ids: i.ids,
        iqr: i.iqr,
        idr: i.idr,
        fmq,
        fmd,
        te: torque(state, i.iqs, i.ids, params),
    }
}

/// Builds the full flux state of a current-fed machine from its rotor flux
/// and the imposed stator current.
///
/// The stator flux follows algebraically: `Fm = (is + Fr/Xlr) / (1/Xm + 1/Xlr)`
/// and `Fs = Xls * is + Fm`. Feeding the result back through
/// [`currents_from_flux`] returns the imposed stator current.
pub fn state_from_stator_current<T: Real>(
    fqr: T,
    fdr: T,
    iqs: T,
    ids: T,
    omega_r: T,
    params: &MotorParams<T>,
) -> MotorState<T> {
    let k = T::one() / (T::one() / params.xm + T::one() / params.xlr);
    let fmq = k * (iqs + fqr / params.xlr);
    let fmd = k * (ids + fdr / params.xlr);
    MotorState {
        fqs: params.xls * iqs + fmq,
        fds: params.xls * ids + fmd,
        fqr,
        fdr,
        omega_r,
    }
}

/// Rotor flux linkages per second reconstructed from terminal quantities
/// (stator flux and stator current) only.
pub fn rotor_flux_from_stator<T: Real>(fqs: T, fds: T, iqs: T, ids: T, params: &MotorParams<T>) -> (T, T) {
    let fmq = fqs - params.xls * iqs;
    let fmd = fds - params.xls * ids;
    let iqr = fmq / params.xm - iqs;
    let idr = fmd / params.xm - ids;
    (params.xlr * iqr + fmq, params.xlr * idr + fmd)
}

/// Magnetic energy stored in the machine, joules.
pub fn magnetic_energy<T: Real>(state: &MotorState<T>, params: &MotorParams<T>) -> T {
    let i = currents_from_flux(state, params);
    T::lit(0.5) / params.omega_b * (state.fqs * i.iqs + state.fds * i.ids + state.fqr * i.iqr + state.fdr * i.idr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> MotorParams<f64> {
        MotorParams::default()
    }

    #[test]
    fn defaults_are_valid() {
        let p = p();
        p.validate().unwrap();
        assert!((p.xls - 0.716_283).abs() < 1e-5);
        let xml = p.xml_star();
        assert!((1.0 / xml - (1.0 / p.xm + 1.0 / p.xls + 1.0 / p.xlr)).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_params() {
        let mut q = p();
        q.poles = 5;
        assert!(q.validate().is_err());
        let mut q = p();
        q.rr = 0.0;
        assert!(q.validate().is_err());
        let mut q = p();
        q.inertia = f64::NAN;
        assert!(q.validate().is_err());
    }

    #[test]
    fn magnetizing_flux_examples() {
        let p = p();
        assert_eq!(magnetizing_flux(&MotorState::default(), &p), (0.0, 0.0));

        let s = MotorState {
            fqs: p.xls,
            fqr: p.xlr,
            ..Default::default()
        };
        let (fmq, fmd) = magnetizing_flux(&s, &p);
        assert!((fmq - 2.0 * p.xml_star()).abs() < 1e-12);
        assert_eq!(fmd, 0.0);

        let s = MotorState {
            fds: p.xls,
            ..Default::default()
        };
        let (fmq, fmd) = magnetizing_flux(&s, &p);
        assert_eq!(fmq, 0.0);
        assert!((fmd - p.xml_star()).abs() < 1e-12);
    }

    #[test]
    fn currents_examples() {
        let p = p();
        assert_eq!(currents_from_flux(&MotorState::default(), &p), Currents::default());

        let s = MotorState {
            fqs: p.xls,
            fqr: p.xlr,
            ..Default::default()
        };
        let i = currents_from_flux(&s, &p);
        assert!((i.iqs - (p.xls - 2.0 * p.xml_star()) / p.xls).abs() < 1e-12);
    }

    #[test]
    fn torque_examples() {
        let mut p = p();
        p.omega_b = 377.0;
        let s = MotorState {
            fds: 1.0,
            ..Default::default()
        };
        let te = torque(&s, 1.0, 0.0, &p);
        assert!((te - 4.5 / 377.0).abs() < 1e-15);
        assert!((te - 0.011936).abs() < 1e-6);
        assert_eq!(torque(&MotorState::default(), 0.0, 0.0, &p), 0.0);

        let s = MotorState {
            fds: 2.0,
            fqs: 3.0,
            ..Default::default()
        };
        assert_eq!(torque(&s, 1.5, 1.0, &p), 0.0);
    }

    #[test]
    fn acceleration_examples() {
        let p = p();
        assert_eq!(mechanical_acceleration(5.0, 5.0, &p), 0.0);
        assert!((mechanical_acceleration(11.0, 10.0, &p) - 1.0).abs() < 1e-15);
        assert!(mechanical_acceleration(1.0, 2.0, &p) < 0.0);
    }

    #[test]
    fn derivative_examples() {
        let p = p();
        let d = flux_derivatives(&MotorState::default(), &MotorInputs::default(), &p);
        assert_eq!(d, FluxDerivatives::default());

        let inputs = MotorInputs {
            vqs: 100.0,
            ..Default::default()
        };
        let d = flux_derivatives(&MotorState::default(), &inputs, &p);
        assert!((d.fqs - p.omega_b * 100.0).abs() < 1e-9);
        assert_eq!((d.fds, d.fqr, d.fdr), (0.0, 0.0, 0.0));
    }

    #[test]
    fn current_fed_state_round_trips() {
        let p = p();
        let s = state_from_stator_current(12.0, -80.0, 9.5, 14.7, 60.0, &p);
        let i = currents_from_flux(&s, &p);
        assert!((i.iqs - 9.5).abs() < 1e-12);
        assert!((i.ids - 14.7).abs() < 1e-12);
        let (fqr, fdr) = rotor_flux_from_stator(s.fqs, s.fds, i.iqs, i.ids, &p);
        assert!((fqr - 12.0).abs() < 1e-10 && (fdr + 80.0).abs() < 1e-10);
    }

    #[test]
    fn field_oriented_torque_matches_rotor_flux_form() {
        // With lambda_qr = 0, Te = 1.5 (p/2) (Lm/Lr) lambda_dr iqs.
        let p = p();
        let (iqs, ids) = (9.0, 14.0);
        let fdr = p.xm * ids;
        let s = state_from_stator_current(0.0, fdr, iqs, ids, 0.0, &p);
        let te = torque(&s, iqs, ids, &p);
        let expected = 1.5 * p.pole_pairs() * p.lm() / p.lr() * (fdr / p.omega_b) * iqs;
        assert!((te - expected).abs() < 1e-9 * expected.abs());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn magnetizing_flux_consistent_with_currents(
                fqs in -500f64..500.0, fds in -500f64..500.0,
                fqr in -500f64..500.0, fdr in -500f64..500.0,
            ) {
                let p = MotorParams::<f64>::default();
                let s = MotorState { fqs, fds, fqr, fdr, omega_r: 0.0 };
                let (fmq, fmd) = magnetizing_flux(&s, &p);
                let i = currents_from_flux(&s, &p);
                let scale = 1.0 + fmq.abs().max(fmd.abs());
                prop_assert!((p.xm * (i.iqs + i.iqr) - fmq).abs() <= 1e-10 * scale);
                prop_assert!((p.xm * (i.ids + i.idr) - fmd).abs() <= 1e-10 * scale);
            }

            #[test]
            fn torque_scales_quadratically(
                fqs in -300f64..300.0, fds in -300f64..300.0,
                fqr in -300f64..300.0, fdr in -300f64..300.0, alpha in -4f64..4.0,
            ) {
                let p = MotorParams::<f64>::default();
                let s = MotorState { fqs, fds, fqr, fdr, omega_r: 0.0 };
                let scaled = MotorState { fqs: alpha * fqs, fds: alpha * fds, fqr: alpha * fqr, fdr: alpha * fdr, omega_r: 0.0 };
                let t1 = outputs(&s, &p).te;
                let t2 = outputs(&scaled, &p).te;
                prop_assert!((t2 - alpha * alpha * t1).abs() <= 1e-9 * (1.0 + t1.abs() * alpha * alpha));
            }

            #[test]
            fn shorted_machine_loses_energy(
                fqs in -300f64..300.0, fds in -300f64..300.0,
                fqr in -300f64..300.0, fdr in -300f64..300.0,
            ) {
                let p = MotorParams::<f64>::default();
                let s = MotorState { fqs, fds, fqr, fdr, omega_r: 0.0 };
                let d = flux_derivatives(&s, &MotorInputs::default(), &p);
                let i = currents_from_flux(&s, &p);
                // dE/dt = sum(i * dF/dt) / omega_b = -(Rs |is|^2 + Rr |ir|^2)
                let de = (i.iqs * d.fqs + i.ids * d.fds + i.iqr * d.fqr + i.idr * d.fdr) / p.omega_b;
                let loss = p.rs * (i.iqs * i.iqs + i.ids * i.ids) + p.rr * (i.iqr * i.iqr + i.idr * i.idr);
                prop_assert!(de <= 1e-9 * (1.0 + loss));
                prop_assert!((de + loss).abs() <= 1e-9 * (1.0 + loss));
            }
        }
    }
}
