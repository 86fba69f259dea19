//! Closed-loop drive simulation: machine, controller, observer and adaptation.
//!
//! The machine is integrated in the stationary frame. Controller, speed loop
//! and adaptation run once per integration step (adaptation every
//! `gains.T / h` steps) and hold their outputs over the step; the observer is
//! part of the integrated state.
//!
//! The observer runs in the rotor field frame sensed at the terminals: rotor
//! flux is rebuilt from stator flux and stator current, its angle defines the
//! frame and its rotation speed minus the shaft speed is the slip fed to the
//! observer. In that frame the true rotor flux has no q component, so the
//! observer's q-axis flux vanishes only when its resistance matches the
//! machine's.

use crate::error::{Error, Result};
use crate::flux_observer::{observer_derivatives, ObserverParams, ObserverState};
use crate::ifoc_controller::{
    current_regulation, electrical_to_rpm, rpm_to_electrical, slip_and_angle, speed_loop, Drive, FluxCommand,
    HysteresisInverter, IfocState, RegulationMode, SpeedPi,
};
use crate::integrator::Stepper;
use crate::motor_model::{
    currents_from_flux, flux_derivatives, mechanical_acceleration, rotor_flux_from_stator, state_from_stator_current,
    torque, MotorInputs, MotorParams, MotorState,
};
use crate::mras_adaptation::{adaptation_step, AdaptationState};
use crate::transforms::{
    abc_to_qd_stationary, abc_to_synchronous, phase_to_line_neutral, qd_stationary_to_abc, stationary_to_synchronous,
    synchronous_to_stationary, FrameAngle, QdStationary, QdSynchronous, ThreePhase,
};

use super::config::{profile_at, ScenarioConfig};

const FQS: usize = 0;
const FDS: usize = 1;
const FQR: usize = 2;
const FDR: usize = 3;
const WR: usize = 4;
const LDR: usize = 5;
const LQR: usize = 6;
const STATE_LEN: usize = 7;

const LABELS: &[&str] = &["Fqs", "Fds", "Fqr", "Fdr", "omega_r", "lambda_dr_hat", "lambda_qr_hat"];

/// Below this fraction of rated rotor flux the sensed field angle is not
/// trusted and the controller angle stands in for it.
const FIELD_SENSE_FRACTION: f64 = 0.02;

/// One logged row of the time series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub t: f64,
    pub iabc_ref: ThreePhase<f64>,
    pub iabc: ThreePhase<f64>,
    /// Measured stator currents in the controller frame.
    pub ids: f64,
    pub iqs: f64,
    pub rr_hat: f64,
    /// Stator flux linkage per second in the controller frame.
    pub fqs: f64,
    pub fds: f64,
    pub lambda_dr_hat: f64,
    pub lambda_qr_hat: f64,
    pub omega_r_rpm: f64,
    pub te: f64,
}

pub const CSV_COLUMNS: [&str; 16] = [
    "t",
    "ia_ref",
    "ib_ref",
    "ic_ref",
    "ia",
    "ib",
    "ic",
    "ids",
    "iqs",
    "Rr_hat",
    "Fqs",
    "Fds",
    "lambda_dr_hat",
    "lambda_qr_hat",
    "omega_r_rpm",
    "Te",
];

impl Sample {
    pub fn to_row(&self) -> [f64; 16] {
        [
            self.t,
            self.iabc_ref.a,
            self.iabc_ref.b,
            self.iabc_ref.c,
            self.iabc.a,
            self.iabc.b,
            self.iabc.c,
            self.ids,
            self.iqs,
            self.rr_hat,
            self.fqs,
            self.fds,
            self.lambda_dr_hat,
            self.lambda_qr_hat,
            self.omega_r_rpm,
            self.te,
        ]
    }

    pub fn from_row(r: &[f64; 16]) -> Self {
        Self {
            t: r[0],
            iabc_ref: ThreePhase::new(r[1], r[2], r[3]),
            iabc: ThreePhase::new(r[4], r[5], r[6]),
            ids: r[7],
            iqs: r[8],
            rr_hat: r[9],
            fqs: r[10],
            fds: r[11],
            lambda_dr_hat: r[12],
            lambda_qr_hat: r[13],
            omega_r_rpm: r[14],
            te: r[15],
        }
    }
}

/// Inputs held constant over one integration step.
#[derive(Debug, Clone, Copy)]
struct Hold {
    t0: f64,
    theta0: f64,
    omega_e: f64,
    command: QdSynchronous<f64>,
    v_stationary: QdStationary<f64>,
    load: f64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: ScenarioConfig,
    plant: MotorParams<f64>,
    observer: ObserverParams<f64>,
    flux_cmd: FluxCommand<f64>,
    x: [f64; STATE_LEN],
    /// Stator current as measured at the current instant (stationary frame).
    is: QdStationary<f64>,
    t: f64,
    k: u64,
    stride: u64,
    ctrl: IfocState<f64>,
    pi: SpeedPi<f64>,
    adapt: AdaptationState<f64>,
    inverter: Option<HysteresisInverter<f64>>,
    stepper: Stepper<f64>,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let plant = cfg.plant();
        let inverter = match cfg.regulation {
            RegulationMode::Ideal => None,
            RegulationMode::Hysteresis => Some(HysteresisInverter::new(cfg.hysteresis_band, plant.vdc)),
        };
        Ok(Self {
            plant,
            observer: ObserverParams::from_motor(&plant),
            flux_cmd: cfg.flux_command(),
            x: [0.0; STATE_LEN],
            is: QdStationary::default(),
            t: 0.0,
            k: 0,
            stride: cfg.adaptation_stride()?,
            ctrl: IfocState {
                tr_cmd: plant.lr() / cfg.cmd_rr,
                ..Default::default()
            },
            pi: SpeedPi::new(cfg.speed.kp, cfg.speed.ki, cfg.speed.iqs_max),
            adapt: AdaptationState::new(cfg.cmd_rr, cfg.adaptation_enabled),
            inverter,
            stepper: Stepper::new(STATE_LEN).with_labels(LABELS),
            cfg: cfg.clone(),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn rr_hat(&self) -> f64 {
        self.adapt.rr_hat
    }

    pub fn observer(&self) -> ObserverState<f64> {
        ObserverState {
            lambda_dr: self.x[LDR],
            lambda_qr: self.x[LQR],
            rr_hat: self.adapt.rr_hat,
        }
    }

    pub fn motor_state(&self) -> MotorState<f64> {
        MotorState {
            fqs: self.x[FQS],
            fds: self.x[FDS],
            fqr: self.x[FQR],
            fdr: self.x[FDR],
            omega_r: self.x[WR],
        }
    }

    pub fn controller(&self) -> IfocState<f64> {
        self.ctrl
    }

    /// Overrides the resistance estimate used by the observer and the slip calculation.
    pub fn set_rr_hat(&mut self, rr: f64) {
        self.adapt.rr_hat = self.cfg.gains.clamp(rr);
    }

    pub fn set_adaptation(&mut self, enabled: bool) {
        self.adapt.enabled = enabled;
    }

    /// Rotor flux of the machine in the controller frame, V s.
    pub fn rotor_flux_controller_frame(&self) -> QdSynchronous<f64> {
        let f = stationary_to_synchronous(
            QdStationary::new(self.x[FQR], self.x[FDR]),
            FrameAngle(self.ctrl.theta_e),
        );
        QdSynchronous::new(f.q / self.plant.omega_b, f.d / self.plant.omega_b)
    }

    pub fn sample(&self) -> Sample {
        let theta = FrameAngle(self.ctrl.theta_e);
        let state = self.motor_state();
        let is_sync = stationary_to_synchronous(self.is, theta);
        let fs = stationary_to_synchronous(QdStationary::new(state.fqs, state.fds), theta);
        let reference = match self.cfg.regulation {
            // The ideal source holds last period's command; log it at the present angle
            // exactly as it was imposed.
            RegulationMode::Ideal => qd_stationary_to_abc(self.is),
            RegulationMode::Hysteresis => qd_stationary_to_abc(synchronous_to_stationary(
                QdSynchronous::new(self.ctrl.iqs_ref, self.ctrl.ids_ref),
                theta,
            )),
        };
        Sample {
            t: self.t,
            iabc_ref: reference,
            iabc: qd_stationary_to_abc(self.is),
            ids: is_sync.d,
            iqs: is_sync.q,
            rr_hat: self.adapt.rr_hat,
            fqs: fs.q,
            fds: fs.d,
            lambda_dr_hat: self.x[LDR],
            lambda_qr_hat: self.x[LQR],
            omega_r_rpm: electrical_to_rpm(state.omega_r, &self.plant),
            te: torque(&state, self.is.q, self.is.d, &self.plant),
        }
    }

    /// Advances one integration step.
    pub fn step(&mut self) -> Result<()> {
        let h = self.cfg.integrator.h;
        let t0 = self.t;
        let omega_r = self.x[WR];
        let theta0 = self.ctrl.theta_e;

        if self.k.is_multiple_of(self.stride) {
            let iqs_meas = stationary_to_synchronous(self.is, FrameAngle(theta0)).q;
            let (next, _) = adaptation_step(
                &self.observer(),
                self.adapt,
                iqs_meas,
                self.cfg.rated_flux,
                &self.cfg.gains,
            );
            self.adapt = next;
        }

        let omega_ref =
            rpm_to_electrical(profile_at(&self.cfg.speed_profile, t0), &self.plant) / self.plant.pole_pairs();
        let iqs_ref = speed_loop(omega_ref, omega_r, &mut self.pi, &self.plant, h);
        let ids_ref = self.flux_cmd.ids_ref(t0 + h);
        let tr_cmd = self.observer.time_constant(self.adapt.rr_hat);
        let next_ctrl = slip_and_angle(iqs_ref, ids_ref, tr_cmd, omega_r, h, self.ctrl)?;

        let measured = qd_stationary_to_abc(self.is);
        let regulated = current_regulation(iqs_ref, ids_ref, FrameAngle(theta0), self.inverter.as_mut(), measured);
        let v_stationary = match regulated.drive {
            Drive::Currents(_) => QdStationary::default(),
            Drive::PoleVoltages(v) => abc_to_qd_stationary(phase_to_line_neutral(v)),
        };

        let hold = Hold {
            t0,
            theta0,
            omega_e: next_ctrl.omega_e,
            command: QdSynchronous::new(iqs_ref, ids_ref),
            v_stationary,
            load: profile_at(&self.cfg.load_profile, t0),
        };
        let rr_hat = self.adapt.rr_hat;
        let plant = self.plant;
        let observer = self.observer;
        let regulation = self.cfg.regulation;
        let sense_floor = FIELD_SENSE_FRACTION * self.cfg.rated_flux * plant.omega_b;

        self.stepper.step(t0, &mut self.x, &self.cfg.integrator, |t, x, dx| {
            derivatives(t, x, dx, &hold, regulation, &plant, &observer, rr_hat, sense_floor)
        })?;

        self.ctrl = next_ctrl;
        self.t = t0 + h;
        self.k += 1;

        match regulation {
            RegulationMode::Ideal => {
                self.is = synchronous_to_stationary(hold.command, FrameAngle(self.ctrl.theta_e));
                let s = state_from_stator_current(self.x[FQR], self.x[FDR], self.is.q, self.is.d, self.x[WR], &plant);
                self.x[FQS] = s.fqs;
                self.x[FDS] = s.fds;
            }
            RegulationMode::Hysteresis => {
                let i = currents_from_flux(&self.motor_state(), &plant);
                self.is = QdStationary::new(i.iqs, i.ids);
            }
        }
        if let Some(i) = self.x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                t: self.t,
                component: LABELS[i].to_string(),
            });
        }
        Ok(())
    }

    /// Steps until `t_end`, calling `record` with the initial sample and then
    /// every `decimation` steps.
    pub fn run_until(&mut self, t_end: f64, mut record: impl FnMut(&Sample)) -> Result<()> {
        let h = self.cfg.integrator.h;
        if self.k == 0 {
            record(&self.sample());
        }
        while self.t + 0.5 * h < t_end {
            self.step()?;
            if self.k.is_multiple_of(self.cfg.decimation as u64) {
                record(&self.sample());
            }
        }
        Ok(())
    }

    /// Phase currents as the hysteresis comparators see them.
    pub fn phase_currents(&self) -> ThreePhase<f64> {
        qd_stationary_to_abc(self.is)
    }

    /// Measured stator currents in the controller frame.
    pub fn controller_frame_currents(&self) -> QdSynchronous<f64> {
        abc_to_synchronous(self.phase_currents(), FrameAngle(self.ctrl.theta_e))
    }
}

#[allow(clippy::too_many_arguments)]
fn derivatives(
    t: f64,
    x: &[f64],
    dx: &mut [f64],
    hold: &Hold,
    regulation: RegulationMode,
    plant: &MotorParams<f64>,
    observer: &ObserverParams<f64>,
    rr_hat: f64,
    sense_floor: f64,
) -> Result<()> {
    let theta = hold.theta0 + hold.omega_e * (t - hold.t0);
    let omega_r = x[WR];

    let (state, is, inputs) = match regulation {
        RegulationMode::Ideal => {
            let is = synchronous_to_stationary(hold.command, FrameAngle(theta));
            let state = state_from_stator_current(x[FQR], x[FDR], is.q, is.d, omega_r, plant);
            (
                state,
                is,
                MotorInputs {
                    load_torque: hold.load,
                    ..Default::default()
                },
            )
        }
        RegulationMode::Hysteresis => {
            let state = MotorState {
                fqs: x[FQS],
                fds: x[FDS],
                fqr: x[FQR],
                fdr: x[FDR],
                omega_r,
            };
            let i = currents_from_flux(&state, plant);
            let inputs = MotorInputs {
                vqs: hold.v_stationary.q,
                vds: hold.v_stationary.d,
                load_torque: hold.load,
                ..Default::default()
            };
            (state, QdStationary::new(i.iqs, i.ids), inputs)
        }
    };

    let d = flux_derivatives(&state, &inputs, plant);
    let te = torque(&state, is.q, is.d, plant);
    match regulation {
        RegulationMode::Ideal => {
            dx[FQS] = 0.0;
            dx[FDS] = 0.0;
        }
        RegulationMode::Hysteresis => {
            dx[FQS] = d.fqs;
            dx[FDS] = d.fds;
        }
    }
    dx[FQR] = d.fqr;
    dx[FDR] = d.fdr;
    dx[WR] = mechanical_acceleration(te, hold.load, plant);

    // Sensed rotor field: angle and rotation speed of the rotor flux vector.
    let (fq, fd) = rotor_flux_from_stator(state.fqs, state.fds, is.q, is.d, plant);
    let mag2 = fq * fq + fd * fd;
    let (theta_f, omega_f) = if mag2.sqrt() > sense_floor {
        // Flux on the +d axis of the field frame: angle of (q - j d) plus a quarter turn.
        let angle = (-fd).atan2(fq) + std::f64::consts::FRAC_PI_2;
        (angle, (d.fqr * fd - d.fdr * fq) / mag2)
    } else {
        (theta, hold.omega_e)
    };
    let i_field = stationary_to_synchronous(is, FrameAngle(theta_f));
    let obs = ObserverState {
        lambda_dr: x[LDR],
        lambda_qr: x[LQR],
        rr_hat,
    };
    let (dl_d, dl_q) = observer_derivatives(&obs, i_field.d, i_field.q, omega_f - omega_r, observer)?;
    dx[LDR] = dl_d;
    dx[LQR] = dl_q;
    Ok(())
}
