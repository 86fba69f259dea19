//! Closed-loop experiments: built-in scenarios, runs, CSV output and sweeps.

mod config;
mod sim;
mod summary;

use std::io::Write;
use std::path::{Path, PathBuf};

pub use config::{profile_at, ScenarioConfig, SpeedLoopConfig, SCHEMA_VERSION};
pub use sim::{Sample, Simulation, CSV_COLUMNS};
pub use summary::{summarize, RunSummary, SETTLING_BAND};

use crate::error::{Error, Result};

pub const SCENARIO_NAMES: [&str; 4] = ["tuned", "half", "quarter", "adapt-quarter"];

/// The four reference experiments. They share every setting except the
/// commanded rotor resistance and whether adaptation runs.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    let base = ScenarioConfig::default();
    let ambient = base.true_rr;
    let make = |name: &str, cmd_rr: f64, adapt: bool| ScenarioConfig {
        name: name.to_string(),
        cmd_rr,
        adaptation_enabled: adapt,
        ..base.clone()
    };
    vec![
        make("tuned", ambient, false),
        make("half", ambient / 2.0, false),
        make("quarter", ambient / 4.0, false),
        make("adapt-quarter", ambient / 4.0, true),
    ]
}

pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    builtin_scenarios()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub samples: Vec<Sample>,
    pub summary: RunSummary,
}

/// Final speed reference of a profile, rpm.
pub fn final_speed_reference(cfg: &ScenarioConfig) -> f64 {
    cfg.speed_profile.last().map_or(0.0, |(_, v)| *v)
}

/// Runs a scenario to completion.
pub fn run(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let mut sim = Simulation::new(cfg)?;
    let mut samples = Vec::with_capacity((cfg.duration / cfg.integrator.h) as usize / cfg.decimation + 2);
    sim.run_until(cfg.duration, |s| samples.push(*s))?;
    let summary = summarize(&samples, cfg.true_rr, final_speed_reference(cfg));
    Ok(RunOutput { samples, summary })
}

/// `%.9g`-style rendering: nine significant digits, trailing zeros dropped.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(out: W, samples: &[Sample]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for s in samples {
        w.write_record(s.to_row().iter().map(|v| format_sig9(*v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, samples: &[Sample]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(file), samples)
}

/// Reads a time series written by [`write_csv`]; columns are matched by name.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<Sample>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let mut index = [0usize; 16];
    for (slot, name) in index.iter_mut().zip(CSV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Config(format!("CSV is missing column `{name}`")))?;
    }
    let mut samples = Vec::new();
    for (n, record) in r.records().enumerate() {
        let record = record?;
        let mut row = [0.0; 16];
        for (value, &col) in row.iter_mut().zip(&index) {
            let field = record.get(col).unwrap_or("");
            *value = field
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("CSV row {}: cannot parse `{field}`", n + 2)))?;
        }
        samples.push(Sample::from_row(&row));
    }
    Ok(samples)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<Sample>> {
    read_csv(std::fs::File::open(path)?)
}

/// Output location for a run: the explicit `output.path` if set, else `<dir>/<name>.csv`.
pub fn csv_path(cfg: &ScenarioConfig, dir: &Path) -> PathBuf {
    cfg.output
        .clone()
        .unwrap_or_else(|| dir.join(format!("{}.csv", cfg.name)))
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub value: String,
    pub config: ScenarioConfig,
    pub summary: RunSummary,
    pub csv: PathBuf,
}

/// Runs `base` once per value of `param`, writing one CSV each into `dir`.
///
/// Runs are independent and execute on separate threads.
pub fn sweep(base: &ScenarioConfig, param: &str, values: &[String], dir: &Path) -> Result<Vec<SweepResult>> {
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let mut cfg = base.clone();
        cfg.set(param, v)?;
        cfg.name = format!("{}_{}_{}", base.name, param, v);
        cfg.output = None;
        cfg.validate()?;
        configs.push((v.clone(), cfg));
    }
    std::fs::create_dir_all(dir)?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .into_iter()
            .map(|(value, cfg)| {
                scope.spawn(move || -> Result<SweepResult> {
                    let out = run(&cfg)?;
                    let csv = csv_path(&cfg, dir);
                    write_csv_file(&csv, &out.samples)?;
                    Ok(SweepResult {
                        value,
                        config: cfg,
                        summary: out.summary,
                        csv,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_match_reference_conditions() {
        let all = builtin_scenarios();
        let names: Vec<_> = all.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, SCENARIO_NAMES);
        assert_eq!(builtin("half").unwrap().cmd_rr, 0.206);
        assert_eq!(builtin("quarter").unwrap().cmd_rr, 0.103);
        assert_eq!(builtin("adapt-quarter").unwrap().cmd_rr, 0.103);
        for c in &all {
            assert_eq!(c.speed_profile.last().unwrap().1, 250.0);
            assert_eq!(c.true_rr, 0.412);
            c.validate().unwrap();
        }
        assert!(matches!(builtin("nonexistent"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn builtins_differ_only_in_resistance_command_and_adaptation() {
        let all = builtin_scenarios();
        let base = &all[0];
        for c in &all[1..] {
            let normalized = ScenarioConfig {
                name: base.name.clone(),
                cmd_rr: base.cmd_rr,
                adaptation_enabled: base.adaptation_enabled,
                ..c.clone()
            };
            assert_eq!(&normalized, base, "{}", c.name);
        }
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(250.0), "250");
        assert_eq!(format_sig9(0.412), "0.412");
        assert_eq!(format_sig9(-1.0 / 3.0), "-0.333333333");
        assert_eq!(format_sig9(123456789.4), "123456789");
        assert_eq!(format_sig9(1234567894.0), "1.23456789e+09");
        assert_eq!(format_sig9(1.5e-7), "1.5e-07");
        assert_eq!(format_sig9(5e-5), "0.00005");
        assert_eq!(format_sig9(9.9999999996), "10");
    }

    #[test]
    fn csv_round_trip_to_nine_digits() {
        let samples = vec![
            Sample {
                t: 0.0,
                rr_hat: 0.103,
                ..Default::default()
            },
            Sample {
                t: 0.001,
                rr_hat: 0.1234567891234,
                omega_r_rpm: 249.99,
                te: -3.5e-8,
                ..Default::default()
            },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "t,ia_ref,ib_ref,ic_ref,ia,ib,ic,ids,iqs,Rr_hat,Fqs,Fds,lambda_dr_hat,lambda_qr_hat,omega_r_rpm,Te\n"
        ));
        assert!(!text.contains('\r'));
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert!((back[1].rr_hat - 0.123456789).abs() < 1e-15);
        assert_eq!(back[1].te, -3.5e-8);
    }

    #[test]
    fn csv_reader_reports_missing_columns() {
        let err = read_csv("t,Rr_hat\n0,0.1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("missing column"));
    }
}
