//! Three-phase and two-axis reference frame conversions.
//!
//! All transforms are amplitude invariant. The two-axis convention is the
//! usual one: for a balanced set `a = cos(wt)` the stationary pair is
//! `(q, d) = (cos(wt), -sin(wt))`, and a vector on the synchronous d-axis
//! lags the q-axis by a quarter turn. Viewed as the complex number `q - j d`,
//! moving from the stationary to the synchronous frame multiplies by
//! `exp(-j theta_e)`.

use crate::scalar::Real;

/// Per-phase quantity (volts or amperes depending on the caller).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThreePhase<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

/// Quadrature/direct pair in the stator-fixed frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QdStationary<T> {
    pub q: T,
    pub d: T,
}

/// Quadrature/direct pair in a synchronously rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QdSynchronous<T> {
    pub q: T,
    pub d: T,
}

/// Electrical angle of a synchronous frame, radians.
///
/// The drive keeps this unwrapped; only its sine and cosine are ever used.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameAngle<T>(pub T);

impl<T: Real> ThreePhase<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self { a, b, c }
    }

    pub fn sum(&self) -> T {
        self.a + self.b + self.c
    }
}

impl<T: Real> QdStationary<T> {
    pub fn new(q: T, d: T) -> Self {
        Self { q, d }
    }

    pub fn norm_sqr(&self) -> T {
        self.q * self.q + self.d * self.d
    }
}

impl<T: Real> QdSynchronous<T> {
    pub fn new(q: T, d: T) -> Self {
        Self { q, d }
    }

    pub fn norm_sqr(&self) -> T {
        self.q * self.q + self.d * self.d
    }
}

/// Pole-to-midpoint voltages to line-to-neutral voltages (common mode removed).
pub fn phase_to_line_neutral<T: Real>(v: ThreePhase<T>) -> ThreePhase<T> {
    let two_thirds = T::lit(2.0 / 3.0);
    let third = T::lit(1.0 / 3.0);
    ThreePhase {
        a: two_thirds * v.a - third * v.b - third * v.c,
        b: -third * v.a + two_thirds * v.b - third * v.c,
        c: -third * v.a - third * v.b + two_thirds * v.c,
    }
}

/// Line-to-neutral phase quantities to the stationary q-d pair.
pub fn abc_to_qd_stationary<T: Real>(v: ThreePhase<T>) -> QdStationary<T> {
    let inv_sqrt3 = T::one() / T::lit(3.0).sqrt();
    QdStationary {
        q: v.a,
        d: (v.c - v.b) * inv_sqrt3,
    }
}

pub fn stationary_to_synchronous<T: Real>(v: QdStationary<T>, theta: FrameAngle<T>) -> QdSynchronous<T> {
    let (s, c) = theta.0.sin_cos();
    QdSynchronous {
        q: v.q * c - v.d * s,
        d: v.q * s + v.d * c,
    }
}

/// Exact inverse of [`stationary_to_synchronous`]; works for currents or voltages alike.
pub fn synchronous_to_stationary<T: Real>(v: QdSynchronous<T>, theta: FrameAngle<T>) -> QdStationary<T> {
    let (s, c) = theta.0.sin_cos();
    QdStationary {
        q: v.q * c + v.d * s,
        d: -v.q * s + v.d * c,
    }
}

pub fn qd_stationary_to_abc<T: Real>(i: QdStationary<T>) -> ThreePhase<T> {
    let half = T::lit(0.5);
    let half_sqrt3 = T::lit(3.0).sqrt() * half;
    ThreePhase {
        a: i.q,
        b: -half * i.q - half_sqrt3 * i.d,
        c: -half * i.q + half_sqrt3 * i.d,
    }
}

/// Convenience composition: synchronous pair straight to phase quantities.
pub fn synchronous_to_abc<T: Real>(v: QdSynchronous<T>, theta: FrameAngle<T>) -> ThreePhase<T> {
    qd_stationary_to_abc(synchronous_to_stationary(v, theta))
}

/// Convenience composition: phase quantities straight to a synchronous pair.
pub fn abc_to_synchronous<T: Real>(v: ThreePhase<T>, theta: FrameAngle<T>) -> QdSynchronous<T> {
    stationary_to_synchronous(abc_to_qd_stationary(v), theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOL
    }

    #[test]
    fn line_neutral_first_column() {
        let out = phase_to_line_neutral(ThreePhase::new(1.0, 0.0, 0.0));
        assert!(close(out.a, 2.0 / 3.0));
        assert!(close(out.b, -1.0 / 3.0));
        assert!(close(out.c, -1.0 / 3.0));
    }

    #[test]
    fn line_neutral_rejects_common_mode() {
        for c in [-7.5f64, 0.0, 1.0, 130.0] {
            let out = phase_to_line_neutral(ThreePhase::new(c, c, c));
            assert!(out.a.abs() < TOL && out.b.abs() < TOL && out.c.abs() < TOL);
        }
    }

    #[test]
    fn line_neutral_passes_balanced_set() {
        let out = phase_to_line_neutral(ThreePhase::new(1.0, -0.5, -0.5));
        assert!(close(out.a, 1.0) && close(out.b, -0.5) && close(out.c, -0.5));
    }

    #[test]
    fn abc_to_stationary_examples() {
        let z = abc_to_qd_stationary(ThreePhase::new(0.0, 0.0, 0.0));
        assert_eq!(z, QdStationary::new(0.0, 0.0));

        let v = abc_to_qd_stationary(ThreePhase::new(1.0, -0.5, -0.5));
        assert!(close(v.q, 1.0) && close(v.d, 0.0));

        let h = 3f64.sqrt() / 2.0;
        let v = abc_to_qd_stationary(ThreePhase::new(0.0, -h, h));
        assert!(close(v.q, 0.0) && close(v.d, 1.0));
    }

    #[test]
    fn rotation_examples() {
        let v = stationary_to_synchronous(QdStationary::new(1.0, 0.0), FrameAngle(0.0));
        assert!(close(v.q, 1.0) && close(v.d, 0.0));

        let v = stationary_to_synchronous(QdStationary::new(1.0, 0.0), FrameAngle(FRAC_PI_2));
        assert!(close(v.q, 0.0) && close(v.d, 1.0));

        let back = synchronous_to_stationary(QdSynchronous::new(0.0, 1.0), FrameAngle(FRAC_PI_2));
        assert!(close(back.q, 1.0) && close(back.d, 0.0));

        let x = QdSynchronous::new(0.3, -2.0);
        assert_eq!(
            synchronous_to_stationary(x, FrameAngle(0.0)),
            QdStationary::new(0.3, -2.0)
        );

        let x = QdStationary::new(-1.7, 0.25);
        let rt = synchronous_to_stationary(stationary_to_synchronous(x, FrameAngle(1.234)), FrameAngle(1.234));
        assert!(close(rt.q, x.q) && close(rt.d, x.d));
    }

    #[test]
    fn abc_columns() {
        let col1 = qd_stationary_to_abc(QdStationary::new(1.0, 0.0));
        assert_eq!(col1, ThreePhase::new(1.0, -0.5, -0.5));
        let col2 = qd_stationary_to_abc(QdStationary::new(0.0, 1.0));
        let h = 3f64.sqrt() / 2.0;
        assert!(close(col2.a, 0.0) && close(col2.b, -h) && close(col2.c, h));
        assert_eq!(qd_stationary_to_abc(QdStationary::new(0.0, 0.0)), ThreePhase::default());
    }

    #[test]
    fn balanced_set_lands_on_q_axis() {
        // a = cos(wt) should appear as a constant on the synchronous q-axis when theta = wt.
        for k in 0..50 {
            let wt = k as f64 * 0.37;
            let abc = ThreePhase::new(wt.cos(), (wt - 2.0 * PI / 3.0).cos(), (wt + 2.0 * PI / 3.0).cos());
            let s = abc_to_synchronous(abc, FrameAngle(wt));
            assert!(close(s.q, 1.0) && s.d.abs() < TOL, "{s:?}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let x = QdStationary::new(0.5f32, -1.25f32);
        let rt = abc_to_qd_stationary(qd_stationary_to_abc(x));
        assert!((rt.q - x.q).abs() < 1e-6 && (rt.d - x.d).abs() < 1e-6);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn abc_left_inverse(q in -1e3f64..1e3, d in -1e3f64..1e3) {
                let x = QdStationary::new(q, d);
                let abc = qd_stationary_to_abc(x);
                prop_assert!(abc.sum().abs() < 1e-9);
                let back = abc_to_qd_stationary(abc);
                prop_assert!((back.q - q).abs() <= 1e-12 * (1.0 + q.abs()));
                prop_assert!((back.d - d).abs() <= 1e-12 * (1.0 + d.abs()));
            }

            #[test]
            fn rotation_preserves_norm(q in -10f64..10.0, d in -10f64..10.0, th in -50f64..50.0) {
                let x = QdStationary::new(q, d);
                let y = stationary_to_synchronous(x, FrameAngle(th));
                prop_assert!((y.norm_sqr() - x.norm_sqr()).abs() < 1e-12 * (1.0 + x.norm_sqr()));
            }

            #[test]
            fn line_neutral_idempotent(a in -300f64..300.0, b in -300f64..300.0, c in -300f64..300.0) {
                let once = phase_to_line_neutral(ThreePhase::new(a, b, c));
                let twice = phase_to_line_neutral(once);
                prop_assert!(once.sum().abs() < 1e-12 * 300.0);
                prop_assert!((once.a - twice.a).abs() < 1e-12 * 300.0);
                prop_assert!((once.b - twice.b).abs() < 1e-12 * 300.0);
                prop_assert!((once.c - twice.c).abs() < 1e-12 * 300.0);
            }
        }
    }
}
