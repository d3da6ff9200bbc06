use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use ssvep_core::edf::{extract_channel, read_edf_file, EdfRecording};
use ssvep_core::io::{
    analyze_paths, collect_edf_paths, read_amplitudes_csv, rows_to_sets, write_amplitudes_csv,
};
use ssvep_core::pipeline::{AmplitudeSet, PipelineConfig};
use ssvep_core::protocol::{
    analyze_sets, build_report, plan_session, reproduce_with, ComfortRatings, ExperimentConfig,
    Provenance, ReproduceOptions, Scope,
};
use ssvep_core::simulate::{synth_session, ResponseModel};
use ssvep_core::waveform::{
    build_edge_schedule, measure_schedule, StimulusSpec, DEFAULT_TICK_RATE_HZ,
};
use ssvep_core::DEFAULT_CHANNEL;

#[derive(Parser)]
#[command(
    name = "ssvep",
    version,
    about = "SSVEP duty-cycle stimulus, simulation and analysis tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a PWM edge schedule as `tick,level` CSV; the check goes to stderr.
    Stimgen {
        #[arg(long)]
        freq: f64,
        #[arg(long)]
        duty: f64,
        #[arg(long, default_value_t = DEFAULT_TICK_RATE_HZ)]
        tick_rate: u64,
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
    },
    /// Inspect or extract EDF recordings.
    Edf {
        #[command(subcommand)]
        command: EdfCommand,
    },
    /// Write the randomized trial schedule as CSV.
    Plan {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic trial recordings, one EDF file per trial.
    Simulate {
        #[arg(long, default_value_t = 10)]
        subjects: u32,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// CSV with columns frequency_hz,duty_pct,amplitude.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Extract per-epoch peak amplitudes from trial recordings.
    Analyze {
        /// Directories and/or EDF files.
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Only analyze recordings at this stimulus frequency.
        #[arg(long)]
        freq: Option<f64>,
        #[arg(long, default_value = DEFAULT_CHANNEL)]
        channel: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kruskal-Wallis across duty cycles, per subject or pooled.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ScopeArg::Pooled)]
        scope: ScopeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full report: box plots, pooled and per-subject tests, comfort means.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// CSV with columns subject,frequency_hz,duty_pct,rating.
        #[arg(long)]
        comfort: Option<PathBuf>,
        /// Config recorded in the provenance block.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write box-plot data as CSV.
        #[arg(long)]
        box_csv: Option<PathBuf>,
    },
    /// Plan, simulate, analyze and report in one go.
    Reproduce {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10)]
        subjects: u32,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum EdfCommand {
    /// Print the file and signal headers.
    Info { file: PathBuf },
    /// Write one channel as `index,physical_value` CSV.
    Extract {
        file: PathBuf,
        #[arg(long, default_value = DEFAULT_CHANNEL)]
        channel: String,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Subject,
    Pooled,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Subject => Scope::Subject,
            ScopeArg::Pooled => Scope::Pooled,
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        // A closed downstream pipe (`| head`) is not a failure.
        let broken_pipe = e
            .chain()
            .filter_map(|c| c.downcast_ref::<io::Error>())
            .any(|io| io.kind() == io::ErrorKind::BrokenPipe);
        if broken_pipe {
            return;
        }
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stimgen {
            freq,
            duty,
            tick_rate,
            duration,
        } => stimgen(freq, duty, tick_rate, duration),
        Command::Edf { command } => match command {
            EdfCommand::Info { file } => edf_info(&file),
            EdfCommand::Extract { file, channel, out } => {
                edf_extract(&file, &channel, out.as_deref())
            }
        },
        Command::Plan { config, seed, out } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let plan = plan_session(&cfg.plan, cfg.seed)?;
            let mut w = output(out.as_deref())?;
            plan.write_csv(&mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Simulate {
            subjects,
            seed,
            out,
            model,
            config,
        } => {
            let mut cfg = load_config(config.as_deref(), seed)?;
            if model.is_some() {
                cfg.model_path = model;
            }
            let model = load_model(&cfg)?;
            let plan = plan_session(&cfg.plan, cfg.seed)?;
            let ids: Vec<u32> = (1..=subjects).collect();
            let paths = synth_session(&ids, &model, &cfg.sim_config(), &plan, &out)?;
            log::info!("wrote {} recordings to {}", paths.len(), out.display());
            Ok(())
        }
        Command::Analyze {
            inputs,
            freq,
            channel,
            out,
        } => {
            let paths = collect_edf_paths(&inputs)?;
            let sets = analyze_paths(&paths, &channel, freq, &PipelineConfig::default())?;
            let file = create(&out)?;
            write_amplitudes_csv(BufWriter::new(file), &sets)?;
            Ok(())
        }
        Command::Stats { input, scope, out } => {
            let sets = load_sets(&input)?;
            let report = analyze_sets(&sets, scope.into())?;
            write_text(&out, &(serde_json::to_string_pretty(&report)? + "\n"))
        }
        Command::Report {
            input,
            comfort,
            config,
            out,
            box_csv,
        } => {
            let sets = load_sets(&input)?;
            let comfort = match comfort {
                Some(p) => Some(
                    ComfortRatings::from_csv(open(&p)?).with_context(|| p.display().to_string())?,
                ),
                None => None,
            };
            let provenance = match config {
                Some(p) => {
                    let cfg = load_config(Some(&p), None)?;
                    Provenance {
                        seed: Some(cfg.seed),
                        config_hash: Some(cfg.hash()),
                        ..Provenance::default()
                    }
                }
                None => Provenance::default(),
            };
            let report = build_report(&sets, comfort.as_ref(), provenance)?;
            write_text(&out, &report.to_json())?;
            if let Some(p) = box_csv {
                report.write_box_csv(BufWriter::new(create(&p)?))?;
            }
            Ok(())
        }
        Command::Reproduce {
            seed,
            subjects,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let options = ReproduceOptions {
                model: load_model(&cfg)?,
                config: cfg,
                subjects,
                pipeline: PipelineConfig::default(),
            };
            let report = reproduce_with(&options, &out)?;
            for b in &report.selected.per_frequency {
                println!(
                    "{} Hz: best duty {}% (mean rank {:.1})",
                    b.frequency_hz, b.duty_pct, b.mean_rank
                );
            }
            Ok(())
        }
    }
}

fn stimgen(freq: f64, duty: f64, tick_rate: u64, duration: f64) -> Result<()> {
    let spec = StimulusSpec::with_timing(freq, duty, tick_rate, duration)?;
    let schedule = build_edge_schedule(&spec)?;
    let m = measure_schedule(&schedule, &spec)?;
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    schedule.write_csv(&mut w)?;
    w.flush()?;
    eprintln!(
        "measured {:.6} Hz, {:.6}% over {} cycles; error {:.3e} Hz, {:.3e} pp; {}",
        m.measured_freq_hz,
        m.measured_duty_pct,
        m.cycles,
        m.freq_error_hz,
        m.duty_error_pp,
        if m.within_tolerance() {
            "within tolerance"
        } else {
            "OUT OF TOLERANCE"
        }
    );
    if !m.within_tolerance() {
        bail!("schedule misses the ±0.1 Hz / ±0.1 pp tolerance");
    }
    Ok(())
}

fn edf_info(path: &Path) -> Result<()> {
    let rec = read_edf_file(path).with_context(|| path.display().to_string())?;
    print!("{}", describe(&rec));
    Ok(())
}

fn describe(rec: &EdfRecording) -> String {
    let h = rec.header();
    let mut s = String::new();
    s += &format!("version:          {}\n", h.version);
    s += &format!("patient:          {}\n", h.patient_id);
    s += &format!("recording:        {}\n", h.recording_id);
    s += &format!("start:            {} {}\n", h.start_date, h.start_time);
    s += &format!("header bytes:     {}\n", h.header_bytes);
    s += &format!(
        "records:          {} × {} s\n",
        h.n_records, h.record_duration_s
    );
    s += &format!("signals:          {}\n", h.n_signals);
    for (i, sig) in rec.signals().iter().enumerate() {
        s += &format!(
            "  [{i}] {:<16} {} Hz  physical {}..{} {}  digital {}..{}  {}\n",
            sig.label,
            sig.samples_per_record as f64 / h.record_duration_s,
            sig.physical_min,
            sig.physical_max,
            sig.physical_dimension,
            sig.digital_min,
            sig.digital_max,
            sig.transducer,
        );
    }
    s
}

fn edf_extract(path: &Path, channel: &str, out: Option<&Path>) -> Result<()> {
    let rec = read_edf_file(path).with_context(|| path.display().to_string())?;
    let series = extract_channel(&rec, channel)?;
    let mut w = output(out)?;
    writeln!(w, "index,physical_value")?;
    for (i, v) in series.values().iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    w.flush()?;
    Ok(())
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let mut cfg =
                ExperimentConfig::parse(&text).with_context(|| p.display().to_string())?;
            // Relative model paths are taken from the config's directory.
            if let (Some(m), Some(dir)) = (&cfg.model_path, p.parent()) {
                if m.is_relative() {
                    cfg.model_path = Some(dir.join(m));
                }
            }
            cfg
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn load_model(cfg: &ExperimentConfig) -> Result<ResponseModel> {
    match &cfg.model_path {
        Some(p) => ResponseModel::from_csv(open(p)?).with_context(|| p.display().to_string()),
        None => Ok(ResponseModel::default()),
    }
}

fn load_sets(path: &Path) -> Result<Vec<AmplitudeSet>> {
    let rows = read_amplitudes_csv(open(path)?).with_context(|| path.display().to_string())?;
    Ok(rows_to_sets(&rows))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
