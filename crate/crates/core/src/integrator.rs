//! Fixed-step explicit integration (forward Euler and classical RK4).

use crate::error::{Error, Result};
use crate::motor_model::MotorParams;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    Euler,
    #[default]
    Rk4,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            other => Err(Error::Config(format!("unknown integration method `{other}`"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    /// Step size, s.
    pub h: T,
    pub method: Method,
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            h: T::lit(50e-6),
            method: Method::Rk4,
        }
    }
}

impl<T: Real> IntegratorConfig<T> {
    /// Checks `h > 0` and `h <= max_stable_step(params)`.
    pub fn validate(&self, params: &MotorParams<T>) -> Result<()> {
        if !(self.h.is_finite() && self.h > T::zero()) {
            return Err(Error::Config(format!("integrator.h must be > 0, got {}", self.h)));
        }
        let limit = max_stable_step(params);
        if self.h > limit {
            return Err(Error::Config(format!(
                "integrator.h = {} exceeds the stability bound {} for these motor parameters",
                self.h, limit
            )));
        }
        Ok(())
    }
}

/// Upper bound on the step size for the electrical modes.
///
/// The fastest flux mode decays no faster than
/// `omega_b * (Rs/Xls + Rr/Xlr)`. RK4 is stable on the negative real axis
/// up to `h * lambda ~ 2.78`; the bound keeps `h * lambda <= 1`, which also
/// keeps forward Euler inside its stability disc.
pub fn max_stable_step<T: Real>(params: &MotorParams<T>) -> T {
    T::one() / (params.omega_b * (params.rs / params.xls + params.rr / params.xlr))
}

/// Reusable stage buffers for stepping a state vector of fixed length.
#[derive(Debug, Clone)]
pub struct Stepper<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    scratch: Vec<T>,
    labels: Option<&'static [&'static str]>,
}

impl<T: Real> Stepper<T> {
    pub fn new(len: usize) -> Self {
        Self {
            k1: vec![T::zero(); len],
            k2: vec![T::zero(); len],
            k3: vec![T::zero(); len],
            k4: vec![T::zero(); len],
            scratch: vec![T::zero(); len],
            labels: None,
        }
    }

    /// Names used in non-finite diagnostics instead of bare indices.
    pub fn with_labels(mut self, labels: &'static [&'static str]) -> Self {
        self.labels = Some(labels);
        self
    }

    /// Advances `state` in place from `t` to `t + cfg.h`.
    ///
    /// `deriv(t, x, dxdt)` fills `dxdt`. A NaN or infinity in any stage
    /// derivative or in the result aborts with the offending component.
    pub fn step<F>(&mut self, t: T, state: &mut [T], cfg: &IntegratorConfig<T>, mut deriv: F) -> Result<()>
    where
        F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    {
        let n = state.len();
        assert_eq!(n, self.k1.len(), "state length does not match stepper");
        let h = cfg.h;
        match cfg.method {
            Method::Euler => {
                deriv(t, state, &mut self.k1)?;
                self.check(t, &self.k1)?;
                for (x, k) in state.iter_mut().zip(&self.k1) {
                    *x = *x + h * *k;
                }
            }
            Method::Rk4 => {
                let half = h * T::lit(0.5);
                deriv(t, state, &mut self.k1)?;
                self.check(t, &self.k1)?;

                for ((s, x), k) in self.scratch.iter_mut().zip(state.iter()).zip(&self.k1) {
                    *s = *x + half * *k;
                }
                deriv(t + half, &self.scratch, &mut self.k2)?;
                self.check(t + half, &self.k2)?;

                for ((s, x), k) in self.scratch.iter_mut().zip(state.iter()).zip(&self.k2) {
                    *s = *x + half * *k;
                }
                deriv(t + half, &self.scratch, &mut self.k3)?;
                self.check(t + half, &self.k3)?;

                for ((s, x), k) in self.scratch.iter_mut().zip(state.iter()).zip(&self.k3) {
                    *s = *x + h * *k;
                }
                deriv(t + h, &self.scratch, &mut self.k4)?;
                self.check(t + h, &self.k4)?;

                let sixth = h / T::lit(6.0);
                let two = T::lit(2.0);
                for (i, x) in state.iter_mut().enumerate() {
                    *x = *x + sixth * (self.k1[i] + two * self.k2[i] + two * self.k3[i] + self.k4[i]);
                }
            }
        }
        self.check(t + h, state)
    }

    fn check(&self, t: T, values: &[T]) -> Result<()> {
        match values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::NonFinite {
                t: t.to_f64_lossy(),
                component: match self.labels.and_then(|l| l.get(i)) {
                    Some(name) => (*name).to_string(),
                    None => format!("state[{i}]"),
                },
            }),
        }
    }
}

/// One-off step that allocates its own buffers.
pub fn step<T: Real, F>(state: &[T], deriv: F, t: T, cfg: &IntegratorConfig<T>) -> Result<Vec<T>>
where
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
{
    let mut next = state.to_vec();
    Stepper::new(state.len()).step(t, &mut next, cfg, deriv)?;
    Ok(next)
}
