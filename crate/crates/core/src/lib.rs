//! Induction motor drive simulation with indirect field-oriented control and
//! online rotor-resistance adaptation.
//!
//! The numerical building blocks ([`transforms`], [`motor_model`],
//! [`integrator`], [`flux_observer`], [`mras_adaptation`],
//! [`ifoc_controller`]) are generic over the scalar type through [`Real`].
//! The closed-loop [`scenario`] layer runs in `f64`; the aliases below name
//! the double-precision instantiations it uses.

pub mod error;
pub mod flux_observer;
pub mod ifoc_controller;
pub mod integrator;
pub mod motor_model;
pub mod mras_adaptation;
pub mod scalar;
pub mod scenario;
pub mod transforms;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ThreePhase = transforms::ThreePhase<f64>;
pub type QdStationary = transforms::QdStationary<f64>;
pub type QdSynchronous = transforms::QdSynchronous<f64>;
pub type FrameAngle = transforms::FrameAngle<f64>;
pub type MotorParams = motor_model::MotorParams<f64>;
pub type MotorState = motor_model::MotorState<f64>;
pub type MotorInputs = motor_model::MotorInputs<f64>;
pub type MotorOutputs = motor_model::MotorOutputs<f64>;
pub type IntegratorConfig = integrator::IntegratorConfig<f64>;
pub type ObserverParams = flux_observer::ObserverParams<f64>;
pub type ObserverState = flux_observer::ObserverState<f64>;
pub type AdaptationGains = mras_adaptation::AdaptationGains<f64>;
pub type AdaptationState = mras_adaptation::AdaptationState<f64>;
pub type SpeedPi = ifoc_controller::SpeedPi<f64>;
pub type IfocState = ifoc_controller::IfocState<f64>;

/// Single-precision motor constants, for embedded-style callers.
pub type MotorParamsF32 = motor_model::MotorParams<f32>;
