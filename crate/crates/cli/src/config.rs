//! The declarative run configuration.
//!
//! Every pipeline parameter lives in one TOML document; the CLI flags only
//! select the file and override the seed and output directory. Artifacts are
//! written under `out_dir/run-<digest>`, where the digest covers every field
//! that can change artifact content, so runs with different parameters never
//! mix outputs.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use regimes_core::backtest::pipeline::PipelineConfig;
use regimes_core::backtest::StrategyKind;
use regimes_core::classify::{ClassifierKind, CvMode, HyperParams};
use regimes_core::synth::SynthConfig;

use crate::error::{CliError, Result};

/// Number of hex digits of the config digest used in the run directory name.
const DIGEST_LEN: usize = 12;

/// Everything a run needs. Scalar and array fields come before the nested
/// tables so the struct serializes cleanly to TOML. Defaults are the
/// reference configuration; a config file may override any subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Feature panel CSV (a `date` column plus one column per series).
    pub panel_csv: PathBuf,
    /// Daily asset returns CSV (`date,sp500,crude,gold,bonds`).
    pub assets_csv: PathBuf,
    /// Root directory for run outputs.
    pub out_dir: PathBuf,
    /// Last in-sample date; later rows are held out.
    pub split_date: NaiveDate,
    /// Keep the fewest components explaining this fraction of variance.
    pub variance_threshold: f64,
    pub k_min: usize,
    pub k_max: usize,
    /// k-means restarts per candidate k.
    pub n_init: usize,
    pub cv_folds: usize,
    pub cv_mode: CvMode,
    pub classifiers: Vec<ClassifierKind>,
    pub strategies: Vec<StrategyKind>,
    pub seed: u64,
    /// Report excess kurtosis instead of the raw fourth-moment ratio.
    pub excess_kurtosis: bool,
    pub hyper: HyperParams,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            panel_csv: PathBuf::from("panel.csv"),
            assets_csv: PathBuf::from("assets.csv"),
            out_dir: PathBuf::from("out"),
            split_date: NaiveDate::from_ymd_opt(2013, 12, 31).expect("valid date"),
            variance_threshold: 0.90,
            k_min: 2,
            k_max: 6,
            n_init: 100,
            cv_folds: 10,
            cv_mode: CvMode::Block,
            classifiers: ClassifierKind::ALL.to_vec(),
            strategies: StrategyKind::ALL.to_vec(),
            seed: 42,
            excess_kurtosis: false,
            hyper: HyperParams::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// The core pipeline view of this configuration.
    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            split_date: self.split_date,
            variance_threshold: self.variance_threshold,
            k_min: self.k_min,
            k_max: self.k_max,
            n_init: self.n_init,
            cv_folds: self.cv_folds,
            cv_mode: self.cv_mode,
            hyper: self.hyper.clone(),
            stats: regimes_core::backtest::StatsOptions {
                excess_kurtosis: self.excess_kurtosis,
            },
            classifiers: self.classifiers.clone(),
            strategies: self.strategies.clone(),
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pipeline().validate()?;
        Ok(())
    }

    /// Hex digest of every content-determining field. `out_dir` is excluded:
    /// it decides where artifacts live, never what they contain.
    pub fn digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        value
            .as_object_mut()
            .expect("config is a map")
            .remove("out_dir");
        // serde_json maps are sorted by key, so this rendering is canonical.
        let canonical = value.to_string();
        let mut hex = String::with_capacity(DIGEST_LEN);
        for byte in Sha256::digest(canonical.as_bytes()) {
            if hex.len() >= DIGEST_LEN {
                break;
            }
            hex.push_str(&format!("{byte:02x}"));
        }
        hex.truncate(DIGEST_LEN);
        hex
    }
}

/// Resolve the effective configuration from the global flags.
pub fn effective(
    config: Option<&Path>,
    paper_defaults: bool,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<RunConfig> {
    let mut cfg = match (config, paper_defaults) {
        (Some(_), true) => {
            return Err(CliError::Usage(
                "--config and --paper-defaults are mutually exclusive".to_string(),
            ))
        }
        (Some(path), false) => RunConfig::load(path)?,
        (None, true) => RunConfig::default(),
        (None, false) => {
            return Err(CliError::Usage(
                "pass --config <path> or --paper-defaults".to_string(),
            ))
        }
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
        cfg.synth.seed = seed;
    }
    if let Some(out) = out {
        cfg.out_dir = out.to_path_buf();
    }
    Ok(cfg)
}

/// A prepared run directory: validated config plus its digest-named output
/// location with the effective config materialized inside.
pub struct Workspace {
    pub cfg: RunConfig,
    pub dir: PathBuf,
}

impl Workspace {
    pub fn prepare(cfg: RunConfig) -> Result<Workspace> {
        cfg.validate()?;
        let dir = cfg.out_dir.join(format!("run-{}", cfg.digest()));
        fs::create_dir_all(&dir).map_err(|e| CliError::Artifact {
            path: dir.clone(),
            detail: format!("cannot create run directory: {e}"),
        })?;
        let rendered = toml::to_string_pretty(&cfg)
            .map_err(|e| CliError::Usage(format!("config does not serialize: {e}")))?;
        let config_path = dir.join("config.toml");
        fs::write(&config_path, rendered).map_err(|e| CliError::Artifact {
            path: config_path,
            detail: format!("cannot write effective config: {e}"),
        })?;
        Ok(Workspace { cfg, dir })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// The artifact path if it exists, otherwise an error naming the command
    /// that produces it.
    pub fn require(&self, name: &str, producer: &'static str) -> Result<PathBuf> {
        let path = self.path(name);
        if path.is_file() {
            Ok(path)
        } else {
            Err(CliError::MissingArtifact { path, producer })
        }
    }
}
