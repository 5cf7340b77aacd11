use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use atten_forge::attenuator::{enumerate_states, LabeledState};
use atten_forge::design::{
    band_metrics, calibrate_continuous, sweep_with_threads, synth_ttype, tune_chip, BandMetrics, CalibrationTable,
    SweepResult, TuneOptions,
};
use atten_forge::io::{self, ChipConfig, TouchstoneRow};
use atten_forge::Error;
use clap::{Args, Parser, Subcommand};

const THREADS_ENV: &str = "ATTEN_FORGE_THREADS";

#[derive(Parser)]
#[command(name = "atten-forge", version, about = "Design and analysis of a switched/continuous mm-wave attenuator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize matched-pad resistors for both switched units.
    Synth {
        #[command(flatten)]
        io: ConfigOut,
    },
    /// Tune shunt resistors and compensation capacitors; with --joint the
    /// inter-stage line lengths too.
    Optimize {
        #[command(flatten)]
        io: ConfigOut,
        #[arg(long)]
        joint: bool,
    },
    /// Write the continuous-unit calibration table.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "calibration.txt")]
        out: PathBuf,
    },
    /// Sweep all states and write the state and metrics CSV files.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Print band figures of merit, optionally checked against thresholds.
    Report {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated `name=value` list of il_max, rms_amp, rms_phase, rl_min.
        #[arg(long)]
        targets: Option<String>,
    },
    /// Write one state's S-parameters as a Touchstone file.
    Export {
        #[command(flatten)]
        run: RunArgs,
        /// State label such as `3.5dB` (the `dB` suffix is optional).
        #[arg(long)]
        state: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ConfigOut {
    #[arg(long)]
    config: PathBuf,
    /// Where to write the updated config; defaults to rewriting --config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// State step in dB, 0.5 or 0.1; defaults to the config's run.step.
    #[arg(long)]
    step: Option<f64>,
    /// Calibration table from `calibrate`; computed on the fly if absent.
    #[arg(long)]
    cal: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Numerical(String),
    TargetMiss,
}

impl Failure {
    fn numerical(e: Error) -> Self {
        Failure::Numerical(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::TargetMiss => 4,
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> Outcome<ChipConfig> {
    io::parse_config(&read_text(path)?).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, text).map_err(|e| Failure::Numerical(format!("{}: {e}", path.display())))
}

fn threads() -> Outcome<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("{THREADS_ENV} must be a whole number, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn calibration(cfg: &ChipConfig, path: Option<&Path>) -> Outcome<CalibrationTable> {
    match path {
        Some(p) => CalibrationTable::from_text(&read_text(p)?).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
        None => calibrate_continuous(&cfg.chip, cfg.f0_hz, cfg.cal_step_db, cfg.cal_range_db).map_err(Failure::numerical),
    }
}

struct Evaluation {
    sweep: SweepResult,
    metrics: BandMetrics,
}

fn states(cfg: &ChipConfig, run: &RunArgs) -> Outcome<Vec<LabeledState>> {
    let step = run.step.unwrap_or(cfg.step_db);
    if step != 0.5 && step != 0.1 {
        return Err(Failure::Config(format!("--step must be 0.5 or 0.1, got {step}")));
    }
    let cal = calibration(cfg, run.cal.as_deref())?;
    enumerate_states(&cfg.chip, step, cfg.f0_hz, &cal).map_err(Failure::numerical)
}

fn evaluate(run: &RunArgs) -> Outcome<(ChipConfig, Evaluation)> {
    let cfg = load_config(&run.config)?;
    let states = states(&cfg, run)?;
    let grid = cfg.grid().map_err(|e| Failure::Config(e.to_string()))?;
    let sweep = sweep_with_threads(&cfg.chip, &states, &grid, threads()?).map_err(Failure::numerical)?;
    let metrics = band_metrics(&sweep).map_err(Failure::numerical)?;
    Ok((cfg, Evaluation { sweep, metrics }))
}

fn synth(args: &ConfigOut) -> Outcome<()> {
    let text = read_text(&args.config)?;
    let cfg = io::parse_config_for_synth(&text).map_err(|e| Failure::Config(format!("{}: {e}", args.config.display())))?;
    for (name, target) in [("unit4", cfg.unit4_target_db), ("unit2", cfg.unit2_target_db)] {
        let (r1, r2) = synth_ttype(target, cfg.chip.z0).map_err(Failure::numerical)?;
        println!("{name}: target {target} dB  r1 = {r1:.4} ohm  r2 = {r2:.4} ohm");
    }
    write_file(args.out.as_ref().unwrap_or(&args.config), &io::write_config(&cfg))
}

fn optimize(args: &ConfigOut, joint: bool) -> Outcome<()> {
    let mut cfg = load_config(&args.config)?;
    let opts = TuneOptions {
        f0_hz: cfg.f0_hz,
        passes: cfg.tune_passes,
        unit4_db: cfg.unit4_target_db,
        unit2_db: cfg.unit2_target_db,
        tune_lines: joint,
        ..TuneOptions::default()
    };
    let band = cfg.tuning_band().map_err(|e| Failure::Config(e.to_string()))?;
    let (chip, report) = tune_chip(&cfg.chip, &band, &opts).map_err(Failure::numerical)?;
    for (i, p) in report.passes.iter().enumerate() {
        println!(
            "pass {}: unit4 r2 {:.3} ohm c_comp {:.3} fF | unit2 r2 {:.3} ohm c_comp {:.3} fF | theta {:.4} / {:.4} rad | objective {:.4}",
            i + 1,
            p.unit4_r2,
            p.unit4_c_comp * 1e15,
            p.unit2_r2,
            p.unit2_c_comp * 1e15,
            p.tl_a_theta,
            p.tl_b_theta,
            p.line_objective
        );
    }
    cfg.chip = chip;
    write_file(args.out.as_ref().unwrap_or(&args.config), &io::write_config(&cfg))
}

fn calibrate(config: &Path, out: &Path) -> Outcome<()> {
    let cfg = load_config(config)?;
    let table = calibration(&cfg, None)?;
    println!("{} entries at {} GHz", table.entries().len(), cfg.f0_hz / 1e9);
    write_file(out, &table.to_text())
}

fn sweep_cmd(run: &RunArgs, out_dir: &Path) -> Outcome<()> {
    let (_, ev) = evaluate(run)?;
    fs::create_dir_all(out_dir).map_err(|e| Failure::Numerical(format!("{}: {e}", out_dir.display())))?;
    let states = out_dir.join("states.csv");
    let metrics = out_dir.join("metrics.csv");
    io::write_report_csv(&ev.sweep, &ev.metrics, &states, &metrics).map_err(Failure::numerical)?;
    println!("wrote {} and {}", states.display(), metrics.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Target {
    IlMax(f64),
    RmsAmp(f64),
    RmsPhase(f64),
    RlMin(f64),
}

fn parse_targets(spec: &str) -> Outcome<Vec<Target>> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Failure::Config(format!("target `{item}` is not `name=value`")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Failure::Config(format!("target `{item}` has a non-numeric value")))?;
            match name.trim() {
                "il_max" => Ok(Target::IlMax(v)),
                "rms_amp" => Ok(Target::RmsAmp(v)),
                "rms_phase" => Ok(Target::RmsPhase(v)),
                "rl_min" => Ok(Target::RlMin(v)),
                other => Err(Failure::Config(format!("unknown target `{other}`"))),
            }
        })
        .collect()
}

fn report(run: &RunArgs, targets: Option<&str>) -> Outcome<()> {
    let targets = targets.map(parse_targets).transpose()?;
    let (_, ev) = evaluate(run)?;
    let m = &ev.metrics;
    println!("states           {}", ev.sweep.states.len());
    println!("IL               {:.3} .. {:.3} dB", m.il_min(), m.il_max());
    println!("worst RL         {:.3} dB", m.rl_worst());
    println!("max RMS amp err  {:.4} dB", m.rms_amp_max());
    println!("max RMS phase    {:.4} deg", m.rms_phase_max());
    let Some(targets) = targets else {
        return Ok(());
    };
    let mut all = true;
    for t in targets {
        let (name, value, limit, ok) = match t {
            Target::IlMax(x) => ("il_max", m.il_max(), x, m.il_max() <= x),
            Target::RmsAmp(x) => ("rms_amp", m.rms_amp_max(), x, m.rms_amp_max() <= x),
            Target::RmsPhase(x) => ("rms_phase", m.rms_phase_max(), x, m.rms_phase_max() <= x),
            Target::RlMin(x) => ("rl_min", m.rl_worst(), x, m.rl_worst() >= x),
        };
        all &= ok;
        println!("{} {name}: {value:.4} (limit {limit})", if ok { "PASS" } else { "FAIL" });
    }
    if all {
        Ok(())
    } else {
        Err(Failure::TargetMiss)
    }
}

fn export(run: &RunArgs, label: &str, out: &Path) -> Outcome<()> {
    let (cfg, ev) = evaluate(run)?;
    let wanted: f64 = label
        .trim()
        .trim_end_matches("dB")
        .trim_end_matches("db")
        .parse()
        .map_err(|_| Failure::Config(format!("state `{label}` is not a dB value")))?;
    let si = ev
        .sweep
        .states
        .iter()
        .position(|s| (s.nominal_db - wanted).abs() < 1e-9)
        .ok_or_else(|| Failure::Config(format!("no state labelled {label} at this step")))?;
    let rows: Vec<TouchstoneRow> = ev
        .sweep
        .grid
        .points()
        .iter()
        .zip(ev.sweep.state_rows(si))
        .map(|(&freq_hz, &s)| TouchstoneRow { freq_hz, s })
        .collect();
    io::write_touchstone(&rows, cfg.chip.z0, out).map_err(Failure::numerical)
}

fn run(cli: Cli) -> Outcome<()> {
    match &cli.command {
        Command::Synth { io } => synth(io),
        Command::Optimize { io, joint } => optimize(io, *joint),
        Command::Calibrate { config, out } => calibrate(config, out),
        Command::Sweep { run, out_dir } => sweep_cmd(run, out_dir),
        Command::Report { run, targets } => report(run, targets.as_deref()),
        Command::Export { run, state, out } => export(run, state, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(msg) => eprintln!("config error: {msg}"),
                Failure::Numerical(msg) => eprintln!("error: {msg}"),
                Failure::TargetMiss => eprintln!("one or more targets missed"),
            }
            ExitCode::from(f.code())
        }
    }
}
