//! Delimited-text emission of experiment results and the run directory
//! layout: `manifest.toml` plus one histogram and one cloud file per sweep
//! point, plus the derived series.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::experiment::{ExperimentResult, RunError};
use crate::units::Normalization;

pub const PLOT_KINDS: &[&str] = &["rate", "entropy", "clouds"];

/// Per-point summary persisted in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSummary {
    pub target_dbm: f64,
    pub achieved_dbm: f64,
    pub gain: f64,
    pub rate_bits: f64,
    pub awgn_bits: f64,
    pub conditional_entropy_bits: f64,
    pub probe_entropy_bits: f64,
    pub alpha: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
}

/// Everything needed to reproduce and audit a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub normalization: Normalization,
    pub noise_bandwidth: f64,
    pub runtime_seconds: f64,
    pub toolkit_version: String,
    pub points: Vec<PointSummary>,
}

impl From<&ExperimentResult> for Manifest {
    fn from(r: &ExperimentResult) -> Self {
        Manifest {
            config: r.config.clone(),
            normalization: r.normalization,
            noise_bandwidth: r.noise_bandwidth,
            runtime_seconds: r.runtime_seconds,
            toolkit_version: r.toolkit_version.clone(),
            points: r
                .points
                .iter()
                .zip(&r.awgn_bits)
                .map(|(p, &awgn)| PointSummary {
                    target_dbm: p.target_dbm,
                    achieved_dbm: p.achieved_dbm,
                    gain: p.gain,
                    rate_bits: p.rate_bits,
                    awgn_bits: awgn,
                    conditional_entropy_bits: p.conditional_entropy_bits,
                    probe_entropy_bits: p.probe_entropy_bits,
                    alpha: p.alpha,
                    trials_ok: p.trials_ok,
                    trials_failed: p.trials_failed,
                })
                .collect(),
        }
    }
}

fn rate_series(points: &[PointSummary]) -> String {
    let mut out = String::from(
        "# rate vs power\npower_dbm\tachieved_dbm\trate_bits_per_2d\tawgn_bits_per_2d\talpha\tfailures\n",
    );
    for p in points {
        out.push_str(&format!(
            "{:.6}\t{:.6}\t{:.9}\t{:.9}\t{:.6}\t{}\n",
            p.target_dbm, p.achieved_dbm, p.rate_bits, p.awgn_bits, p.alpha, p.trials_failed
        ));
    }
    out
}

fn entropy_series(points: &[PointSummary]) -> String {
    let mut out = String::from(
        "# conditional entropy vs power\npower_dbm\tconditional_entropy_bits\tprobe_entropy_bits\n",
    );
    for p in points {
        out.push_str(&format!(
            "{:.6}\t{:.9}\t{:.9}\n",
            p.target_dbm, p.conditional_entropy_bits, p.probe_entropy_bits
        ));
    }
    out
}

/// Render one plot kind to (filename, contents) pairs.
pub fn emit_plot_data(
    result: &ExperimentResult,
    kind: &str,
) -> Result<Vec<(String, String)>, RunError> {
    let manifest = Manifest::from(result);
    match kind {
        "rate" => Ok(vec![(
            "rate_vs_power.tsv".into(),
            rate_series(&manifest.points),
        )]),
        "entropy" => Ok(vec![(
            "entropy_vs_power.tsv".into(),
            entropy_series(&manifest.points),
        )]),
        "clouds" => {
            let mut files = Vec::new();
            for (i, p) in result.points.iter().enumerate() {
                let mut out = String::from("# received symbols\nsent_index\tre\tim\n");
                for (idx, y) in &p.clouds {
                    out.push_str(&format!("{idx}\t{:.12e}\t{:.12e}\n", y.re, y.im));
                }
                files.push((format!("clouds_p{i}.tsv"), out));
            }
            Ok(files)
        }
        other => Err(RunError::Validation(format!(
            "unknown plot kind '{other}'; available: {}",
            PLOT_KINDS.join(", ")
        ))),
    }
}

/// Persist a full run: manifest, histograms, clouds and derived series.
pub fn write_run_dir(result: &ExperimentResult, dir: &Path) -> Result<(), RunError> {
    let io = |e: std::io::Error| RunError::Validation(format!("cannot write run dir: {e}"));
    fs::create_dir_all(dir).map_err(io)?;

    let manifest = toml::to_string_pretty(&Manifest::from(result))
        .map_err(|e| RunError::Validation(format!("manifest serialization: {e}")))?;
    fs::write(dir.join("manifest.toml"), manifest).map_err(io)?;

    for (i, p) in result.points.iter().enumerate() {
        let mut buf = Vec::new();
        nft::rate::write_histogram(&p.histogram, &mut buf).map_err(io)?;
        fs::write(dir.join(format!("histogram_p{i}.tsv")), buf).map_err(io)?;
    }
    for kind in PLOT_KINDS {
        for (name, contents) in emit_plot_data(result, kind)? {
            fs::write(dir.join(name), contents).map_err(io)?;
        }
    }
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, RunError> {
    let text = fs::read_to_string(dir.join("manifest.toml"))
        .map_err(|e| RunError::Validation(format!("cannot read manifest: {e}")))?;
    toml::from_str(&text).map_err(|e| RunError::Validation(format!("manifest parse error: {e}")))
}

/// Regenerate one plot kind from a stored run directory; returns the file
/// names written (or verified, for raw cloud dumps).
pub fn reemit_from_run_dir(dir: &Path, kind: &str) -> Result<Vec<String>, RunError> {
    let io = |e: std::io::Error| RunError::Validation(format!("cannot write run dir: {e}"));
    let manifest = read_manifest(dir)?;
    match kind {
        "rate" => {
            fs::write(dir.join("rate_vs_power.tsv"), rate_series(&manifest.points)).map_err(io)?;
            Ok(vec![format!("{}", dir.join("rate_vs_power.tsv").display())])
        }
        "entropy" => {
            fs::write(
                dir.join("entropy_vs_power.tsv"),
                entropy_series(&manifest.points),
            )
            .map_err(io)?;
            Ok(vec![format!(
                "{}",
                dir.join("entropy_vs_power.tsv").display()
            )])
        }
        "clouds" => {
            let mut names = Vec::new();
            for i in 0..manifest.points.len() {
                let path = dir.join(format!("clouds_p{i}.tsv"));
                if !path.exists() {
                    return Err(RunError::Validation(format!(
                        "cloud dump {} missing; clouds are captured at run time",
                        path.display()
                    )));
                }
                names.push(format!("{}", path.display()));
            }
            Ok(names)
        }
        other => Err(RunError::Validation(format!(
            "unknown plot kind '{other}'; available: {}",
            PLOT_KINDS.join(", ")
        ))),
    }
}
