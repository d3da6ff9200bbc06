//! End-to-end run: plan → simulate → analyze → report.

use std::fs;
use std::path::{Path, PathBuf};

use super::{
    build_report, plan_session, ExperimentConfig, ProtocolError, Provenance, ReportBundle,
};
use crate::io::{analyze_paths, collect_edf_paths, write_amplitudes_csv};
use crate::pipeline::PipelineConfig;
use crate::simulate::{synth_session, ResponseModel};
use crate::DEFAULT_CHANNEL;

pub const DEFAULT_SUBJECTS: u32 = 10;

/// Files written into the output directory.
pub const EDF_DIR: &str = "edf";
pub const PLAN_FILE: &str = "plan.csv";
pub const CONFIG_FILE: &str = "config.txt";
pub const AMPLITUDES_FILE: &str = "amplitudes.csv";
pub const REPORT_FILE: &str = "report.json";
pub const BOX_FILE: &str = "box_plots.csv";
const STAGING_DIR: &str = ".reproduce-partial";

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub config: ExperimentConfig,
    pub subjects: u32,
    pub model: ResponseModel,
    pub pipeline: PipelineConfig,
}

impl ReproduceOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            config: ExperimentConfig {
                seed,
                ..ExperimentConfig::default()
            },
            subjects: DEFAULT_SUBJECTS,
            model: ResponseModel::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

/// Default protocol, model and pipeline for ten subjects.
pub fn reproduce(seed: u64, out_dir: &Path) -> Result<ReportBundle, ProtocolError> {
    reproduce_with(&ReproduceOptions::with_seed(seed), out_dir)
}

fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> ProtocolError + '_ {
    move |source| ProtocolError::Fs {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs everything inside a staging directory and moves the results into
/// `out_dir` only on success; on failure the staging directory is removed.
pub fn reproduce_with(
    options: &ReproduceOptions,
    out_dir: &Path,
) -> Result<ReportBundle, ProtocolError> {
    fs::create_dir_all(out_dir).map_err(fs_err(out_dir))?;
    let staging = out_dir.join(STAGING_DIR);
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(fs_err(&staging))?;
    }
    fs::create_dir_all(&staging).map_err(fs_err(&staging))?;

    match run(options, &staging) {
        Ok(report) => {
            publish(&staging, out_dir)?;
            Ok(report)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            Err(e)
        }
    }
}

fn run(options: &ReproduceOptions, dir: &Path) -> Result<ReportBundle, ProtocolError> {
    let cfg = &options.config;
    let plan = plan_session(&cfg.plan, cfg.seed)?;
    let write = |name: &str, bytes: &[u8]| {
        let p = dir.join(name);
        fs::write(&p, bytes).map_err(fs_err(&p))
    };
    write(CONFIG_FILE, cfg.to_text().as_bytes())?;
    let mut plan_csv = Vec::new();
    plan.write_csv(&mut plan_csv)?;
    write(PLAN_FILE, &plan_csv)?;

    let subjects: Vec<u32> = (1..=options.subjects).collect();
    let edf_dir = dir.join(EDF_DIR);
    synth_session(
        &subjects,
        &options.model,
        &cfg.sim_config(),
        &plan,
        &edf_dir,
    )?;

    let paths = collect_edf_paths(&[edf_dir])?;
    let sets = analyze_paths(&paths, DEFAULT_CHANNEL, None, &options.pipeline)?;
    let mut amp_csv = Vec::new();
    write_amplitudes_csv(&mut amp_csv, &sets)?;
    write(AMPLITUDES_FILE, &amp_csv)?;

    let provenance = Provenance {
        seed: Some(cfg.seed),
        config_hash: Some(cfg.hash()),
        ..Provenance::default()
    };
    let report = build_report(&sets, None, provenance)?;
    write(REPORT_FILE, report.to_json().as_bytes())?;
    let mut box_csv = Vec::new();
    report.write_box_csv(&mut box_csv)?;
    write(BOX_FILE, &box_csv)?;
    Ok(report)
}

fn publish(staging: &Path, out_dir: &Path) -> Result<(), ProtocolError> {
    for name in [
        EDF_DIR,
        PLAN_FILE,
        CONFIG_FILE,
        AMPLITUDES_FILE,
        REPORT_FILE,
        BOX_FILE,
    ] {
        let from = staging.join(name);
        let to: PathBuf = out_dir.join(name);
        if to.is_dir() {
            fs::remove_dir_all(&to).map_err(fs_err(&to))?;
        } else if to.exists() {
            fs::remove_file(&to).map_err(fs_err(&to))?;
        }
        fs::rename(&from, &to).map_err(fs_err(&from))?;
    }
    fs::remove_dir_all(staging).map_err(fs_err(staging))
}
