use std::fs;
use std::path::Path;

use super::config::{RunSeeds, ScenarioConfig};
use super::montecarlo::{Aggregate, Campaign, SweepPoint};
use super::run::{EpochRecord, RunMetrics};
use crate::error::Result;
use crate::trajectory::csv_err;

pub const RADIAL_ERROR_FILE: &str = "radial_error_vs_time.csv";
pub const GRADIENT_ERROR_FILE: &str = "gradient_errors.csv";
pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.csv";
pub const RUN_SUMMARY_FILE: &str = "runs.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

/// Long-format `label,time_s,mean,std` rows for each aggregate.
pub fn write_radial_error<W: std::io::Write>(out: W, aggregates: &[&Aggregate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "time_s", "mean", "std"]).map_err(csv_err)?;
    for a in aggregates {
        for (k, (m, s)) in a.stats.mean.iter().zip(&a.stats.std).enumerate() {
            w.write_record([a.label.clone(), k.to_string(), m.to_string(), s.to_string()]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_gradient_errors<W: std::io::Write>(out: W, runs: &[RunMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run", "method", "time_s", "true", "estimated", "error"]).map_err(csv_err)?;
    for r in runs {
        for (method, series) in [("filter", &r.filter_gradient), ("ellipse_fit", &r.ellipse_gradient)] {
            for g in series {
                w.write_record([
                    r.run_index.to_string(),
                    method.to_string(),
                    g.time.to_string(),
                    g.truth.to_string(),
                    g.estimate.to_string(),
                    g.error().to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_summary<W: std::io::Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "parameter",
        "value",
        "runs",
        "mean_error_m",
        "std_error_m",
        "mean_error_settled_m",
        "std_error_settled_m",
    ])
    .map_err(csv_err)?;
    for p in points {
        w.write_record([
            p.parameter.name().to_string(),
            p.value.to_string(),
            p.aggregate.runs.len().to_string(),
            p.mean_error.to_string(),
            p.std_error.to_string(),
            p.mean_error_settled.to_string(),
            p.std_error_settled.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_run_summary<W: std::io::Write>(out: W, aggregates: &[&Aggregate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "run", "mean_error_m", "final_error_m", "failures", "underflows"]).map_err(csv_err)?;
    for a in aggregates {
        for r in &a.runs {
            w.write_record([
                a.label.clone(),
                r.run_index.to_string(),
                r.mean_radial_error.to_string(),
                r.final_radial_error.to_string(),
                r.failures.to_string(),
                r.underflows.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-epoch filter record of one run.
pub fn write_diagnostics<W: std::io::Write>(out: W, records: &[EpochRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time_s".to_string(), "n_eff".to_string(), "valid".to_string()];
    for prefix in ["mean", "applied"] {
        for c in ["d_north", "d_east", "d_u", "d_v", "d_w", "d_psi", "d_theta", "d_phi"] {
            header.push(format!("{prefix}_{c}"));
        }
    }
    header.extend(["estimated_gradient".to_string(), "true_gradient".to_string()]);
    w.write_record(&header).map_err(csv_err)?;
    for r in records {
        let mut row = vec![r.time.to_string(), r.n_eff.to_string(), (r.valid as u8).to_string()];
        row.extend(r.mean.to_array().iter().map(f64::to_string));
        row.extend(r.applied.to_array().iter().map(f64::to_string));
        row.push(r.estimated_gradient.to_string());
        row.push(r.true_gradient.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Resolved configuration as TOML, preceded by comment lines listing the
/// derived seeds of every run. Loading it back reproduces the campaign.
pub fn manifest(config: &ScenarioConfig) -> Result<String> {
    let mut text = String::from("# gravfix run manifest\n");
    for i in 0..config.runs {
        let s = RunSeeds::derive(config.base_seed, i);
        text.push_str(&format!(
            "# run {i}: imu={} gradiometer={} failure={} filter={} altimeter={}\n",
            s.imu, s.gradiometer, s.failure, s.filter, s.altimeter
        ));
    }
    text.push('\n');
    text.push_str(&config.to_toml()?);
    Ok(text)
}

/// Writes every CSV and the manifest into `dir`, creating it if needed.
pub fn export(campaign: &Campaign, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut all: Vec<&Aggregate> = vec![&campaign.main];
    all.extend(campaign.sweeps.iter().map(|p| &p.aggregate));
    write_radial_error(fs::File::create(dir.join(RADIAL_ERROR_FILE))?, &all)?;
    let mut runs: Vec<RunMetrics> = campaign.main.runs.clone();
    runs.sort_by_key(|r| r.run_index);
    write_gradient_errors(fs::File::create(dir.join(GRADIENT_ERROR_FILE))?, &runs)?;
    write_sweep_summary(fs::File::create(dir.join(SWEEP_SUMMARY_FILE))?, &campaign.sweeps)?;
    write_run_summary(fs::File::create(dir.join(RUN_SUMMARY_FILE))?, &all)?;
    for r in campaign.main.runs.iter().filter(|r| !r.diagnostics.is_empty()) {
        let name = format!("diagnostics_run_{:03}.csv", r.run_index);
        write_diagnostics(fs::File::create(dir.join(name))?, &r.diagnostics)?;
    }
    fs::write(dir.join(MANIFEST_FILE), manifest(&campaign.main.config)?)?;
    Ok(())
}
