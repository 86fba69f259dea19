//! Scalar metrics over a logged time series.

use super::sim::Sample;

/// Relative band used for the resistance settling time.
pub const SETTLING_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub final_rr_hat: f64,
    /// First time after which the estimate stays within 5 % of the true value.
    pub rr_settling_time: Option<f64>,
    /// Mean `|lambda_qr_hat| / |lambda_dr_hat|` over the last 10 % of the run.
    pub steady_lambda_qr_ratio: f64,
    /// 10 %-90 % rise time of the shaft speed, s.
    pub speed_rise_time: Option<f64>,
    /// Peak speed above the final reference, percent (zero when none).
    pub max_speed_overshoot: f64,
    pub final_speed_rpm: f64,
}

/// Computes the summary. `speed_ref_rpm` is the final speed reference.
pub fn summarize(samples: &[Sample], true_rr: f64, speed_ref_rpm: f64) -> RunSummary {
    let Some(last) = samples.last() else {
        return RunSummary {
            final_rr_hat: f64::NAN,
            rr_settling_time: None,
            steady_lambda_qr_ratio: f64::NAN,
            speed_rise_time: None,
            max_speed_overshoot: 0.0,
            final_speed_rpm: f64::NAN,
        };
    };
    let t0 = samples[0].t;
    let tail_start = last.t - 0.1 * (last.t - t0);

    let within = |s: &Sample| (s.rr_hat - true_rr).abs() <= SETTLING_BAND * true_rr;
    let rr_settling_time = if within(last) {
        let first_outside_from_end = samples.iter().rposition(|s| !within(s));
        Some(match first_outside_from_end {
            None => t0,
            Some(i) => samples[i + 1].t,
        })
    } else {
        None
    };

    let tail: Vec<f64> = samples
        .iter()
        .filter(|s| s.t >= tail_start && s.lambda_dr_hat != 0.0)
        .map(|s| (s.lambda_qr_hat / s.lambda_dr_hat).abs())
        .collect();
    let steady_lambda_qr_ratio = if tail.is_empty() {
        f64::NAN
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    };

    let crossing = |level: f64| samples.iter().find(|s| s.omega_r_rpm >= level).map(|s| s.t);
    let speed_rise_time = if speed_ref_rpm > 0.0 {
        match (crossing(0.1 * speed_ref_rpm), crossing(0.9 * speed_ref_rpm)) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        }
    } else {
        None
    };

    let peak = samples.iter().map(|s| s.omega_r_rpm).fold(f64::NEG_INFINITY, f64::max);
    let max_speed_overshoot = if speed_ref_rpm > 0.0 {
        ((peak - speed_ref_rpm) / speed_ref_rpm * 100.0).max(0.0)
    } else {
        0.0
    };

    RunSummary {
        final_rr_hat: last.rr_hat,
        rr_settling_time,
        steady_lambda_qr_ratio,
        speed_rise_time,
        max_speed_overshoot,
        final_speed_rpm: last.omega_r_rpm,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "not settled".to_string(), |x| format!("{x:.4} s"))
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "final_Rr_hat            {:.6} ohm", self.final_rr_hat)?;
        writeln!(f, "Rr_settling_time        {}", opt(self.rr_settling_time))?;
        writeln!(f, "steady_lambda_qr_ratio  {:.6e}", self.steady_lambda_qr_ratio)?;
        writeln!(
            f,
            "speed_rise_time         {}",
            self.speed_rise_time
                .map_or_else(|| "n/a".to_string(), |x| format!("{x:.4} s"))
        )?;
        writeln!(f, "max_speed_overshoot     {:.3} %", self.max_speed_overshoot)?;
        write!(f, "final_speed             {:.4} rpm", self.final_speed_rpm)
    }
}
