//! Writes campaign results to disk.

use std::path::{Path, PathBuf};

use crate::campaign::{emit_plot_data, summary_csv, CampaignResult, RunError};
use crate::config::{Format, PlotKind};

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Run(#[from] RunError),
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, OutputError> {
    std::fs::write(&path, contents).map_err(|source| OutputError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `<name>.json`, `<name>.csv` and `<name>.<plot>.csv` into `dir`,
/// returning the paths written.
pub fn write_result(
    result: &CampaignResult,
    dir: &Path,
    format: Format,
    plots: &[PlotKind],
) -> Result<Vec<PathBuf>, OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let name = &result.config.name;
    let mut written = Vec::new();
    if matches!(format, Format::Json | Format::Both) {
        let json = serde_json::to_string_pretty(result).expect("results serialize");
        written.push(write(dir.join(format!("{name}.json")), &json)?);
    }
    if matches!(format, Format::Csv | Format::Both) {
        written.push(write(dir.join(format!("{name}.csv")), &summary_csv(result))?);
    }
    for &kind in plots {
        let data = emit_plot_data(result, kind)?;
        written.push(write(dir.join(format!("{name}.{}.csv", plot_stem(kind))), &data)?);
    }
    Ok(written)
}

pub fn plot_stem(kind: PlotKind) -> &'static str {
    match kind {
        PlotKind::Trace => "trace",
        PlotKind::AlphaBeta => "alpha_beta",
        PlotKind::NakanoTerms => "nakano_terms",
    }
}
