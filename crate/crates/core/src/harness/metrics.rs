//! Metrics CSV files and their smoothed plot series.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::learners::EpisodeStats;

pub const METRICS_HEADER: [&str; 6] = [
    "episode",
    "total_energy_j",
    "reward",
    "feasible_count",
    "epsilon",
    "wall_ms",
];
pub const PLOT_HEADER: [&str; 3] = ["episode", "reward", "total_energy_j"];
pub const PLOT_WINDOW: usize = 50;

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        kind => Error::invalid(format!("csv: {kind:?}")),
    }
}

pub fn write_metrics<W: Write>(out: W, rows: &[EpisodeStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.episode.to_string(),
            r.total_energy.to_string(),
            r.reward.to_string(),
            r.feasible_count.to_string(),
            r.epsilon.to_string(),
            r.wall_ms.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<EpisodeStats>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(METRICS_HEADER) {
        return Err(Error::invalid(format!(
            "{}: header must be `{}`",
            path.display(),
            METRICS_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let bad =
            |col: &str| Error::invalid(format!("{}: row {}: bad `{col}`", path.display(), i + 2));
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| bad(METRICS_HEADER[k]))
        };
        rows.push(EpisodeStats {
            episode: rec[0].parse().map_err(|_| bad("episode"))?,
            total_energy: num(1)?,
            reward: num(2)?,
            feasible_count: rec[3].parse().map_err(|_| bad("feasible_count"))?,
            epsilon: num(4)?,
            wall_ms: num(5)?,
        });
    }
    if rows.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no metrics rows",
            path.display()
        )));
    }
    Ok(rows)
}

/// Trailing moving average. A window longer than the series collapses to its mean.
pub fn smooth(series: &[f64], window: usize) -> Vec<f64> {
    if series.is_empty() {
        return Vec::new();
    }
    let w = window.clamp(1, series.len());
    let mut sum: f64 = series[..w].iter().sum();
    let mut out = vec![sum / w as f64];
    for i in w..series.len() {
        sum += series[i] - series[i - w];
        out.push(sum / w as f64);
    }
    out
}

/// Smooth reward and total energy from a metrics file into `out`.
/// Each row is labelled with the last episode of its window. Returns the row count.
pub fn emit_plot_data(metrics: &Path, out: &Path, window: usize) -> Result<usize> {
    let rows = read_metrics(metrics)?;
    let reward = smooth(&rows.iter().map(|r| r.reward).collect::<Vec<_>>(), window);
    let energy = smooth(
        &rows.iter().map(|r| r.total_energy).collect::<Vec<_>>(),
        window,
    );
    let offset = rows.len() - reward.len();
    let mut w = csv::Writer::from_path(out).map_err(csv_err)?;
    w.write_record(PLOT_HEADER).map_err(csv_err)?;
    for (i, (r, e)) in reward.iter().zip(&energy).enumerate() {
        w.write_record([
            rows[i + offset].episode.to_string(),
            r.to_string(),
            e.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(reward.len())
}
