//! Command-line front end: simulate / sweep / fit / analyze-error /
//! pipeline / check, mirroring the measurement workflow end to end.
//!
//! Exit codes: 0 ok, 1 input error, 2 convergence or fit error,
//! 3 validity-threshold failure in `check`.

use clap::{Args, Parser, Subcommand};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use three_omega::config::{NoiseSpec, RunConfig};
use three_omega::core_model::{condition_10, derive_thermal, Drive};
use three_omega::error::{Error, Result};
use three_omega::fitter::{fit_amplitude_with, fit_phase, FitOptions, SweepDataset};
use three_omega::report::{
    amplitude_plot_csv, error_table_csv, fit_report, phase_plot_csv, Report,
};
use three_omega::spectral::{error_curves, v3w_phasor_lossy, SeriesControl};
use three_omega::sweep::{generate_sweep, Engine};
use three_omega::{csvio, fdm, lockin};

#[derive(Parser)]
#[command(name = "three-omega", version, about = "3-omega thermal metrology toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory (overrides config and THREE_OMEGA_OUT).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum EngineArg {
    Spectral,
    Oracle,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Spectral => Engine::Spectral,
            EngineArg::Oracle => Engine::Oracle,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the time-domain model at one frequency and write the
    /// steady-periodic trace plus its demodulated harmonics.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Drive frequency (Hz); defaults to the first configured frequency.
        #[arg(long)]
        freq: Option<f64>,
    },
    /// Generate a synthetic frequency sweep and write it as CSV.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, value_enum, default_value = "spectral")]
        engine: EngineArg,
    },
    /// Ingest a sweep CSV, fit the configured model, write report and plots.
    Fit {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Sweep CSV; defaults to io.input_csv from the config.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Tabulate the series-truncation error curves A, B, A-B, (A-B)/A.
    AnalyzeError {
        /// Output CSV path.
        #[arg(long, default_value = "error_curves.csv")]
        out: PathBuf,
        /// Upper end of the 2 omega gamma grid.
        #[arg(long, default_value_t = 10.0)]
        max_reduced: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Batch generate + fit over the configured substrate-temperature points.
    Pipeline {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, value_enum, default_value = "spectral")]
        engine: EngineArg,
    },
    /// Evaluate the validity conditions only; exit 3 when any fails.
    Check {
        #[command(flatten)]
        cfg: ConfigArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as u8
        }
    };
    ExitCode::from(code)
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Simulate { cfg, freq } => cmd_simulate(&cfg, freq),
        Command::Sweep { cfg, engine } => cmd_sweep(&cfg, engine.into()),
        Command::Fit { cfg, input } => cmd_fit(&cfg, input),
        Command::AnalyzeError { out, max_reduced, points } => {
            cmd_analyze_error(&out, max_reduced, points)
        }
        Command::Pipeline { cfg, engine } => cmd_pipeline(&cfg, engine.into()),
        Command::Check { cfg } => cmd_check(&cfg),
    }
}

fn load(cfg: &ConfigArg) -> Result<(RunConfig, PathBuf)> {
    let config = RunConfig::load(&cfg.config)?;
    let dir = cfg.out_dir.clone().unwrap_or_else(|| config.output_dir());
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::Input(format!("{}: {e}", dir.display())))?;
    Ok((config, dir))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn cmd_simulate(cfg: &ConfigArg, freq: Option<f64>) -> Result<u8> {
    let (config, dir) = load(cfg)?;
    let spec = config.specimen.resolve()?;
    let i_rms = config.drive.i_rms()?;
    let f = match freq {
        Some(f) if f > 0.0 => f,
        Some(f) => return Err(Error::Input(format!("freq must be > 0, got {f}"))),
        None => config.drive.frequencies_hz()?[0],
    };
    let drive = Drive { i_rms, omega: 2.0 * PI * f };
    let g = config.simulation.loss.loss_rate(&spec)?;
    let grid = config.simulation.grid_for(&spec, &drive)?;
    let trace = fdm::solve(&spec, &drive, &grid, config.simulation.include_c_term, g)?;

    let mut csv = String::from("t_s,dr_ohm,v_volt,center_temp_k\n");
    for i in 0..trace.times.len() {
        use std::fmt::Write as _;
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            trace.times[i], trace.dr[i], trace.voltage[i], trace.center_temp[i]
        );
    }
    let trace_path = dir.join("trace.csv");
    write_text(&trace_path, &csv)?;

    let d3 = lockin::demodulate(&trace.times, &trace.voltage, drive.omega, 3)?;
    let ctl = SeriesControl::new(config.simulation.n_max)?;
    let predicted = v3w_phasor_lossy(&spec, &drive, ctl, g)?;
    let th = derive_thermal(&spec, &drive)?;

    let mut r = Report::new();
    r.push("freq_hz", f);
    r.push("two_omega_gamma", 2.0 * drive.omega * th.gamma);
    r.push("periodicity_defect", trace.periodicity_defect);
    r.push("v3w_vrms_oracle", d3.amplitude_rms);
    r.push("v3w_phase_deg_oracle", d3.phase * 180.0 / PI);
    r.push("v3w_vrms_spectral", predicted.amplitude_rms);
    r.push("v3w_phase_deg_spectral", predicted.phase * 180.0 / PI);
    r.push("trace_csv", trace_path.display());
    let report_path = dir.join("simulate.txt");
    r.write(&report_path)?;
    print!("{}", r.render());
    Ok(0)
}

fn cmd_sweep(cfg: &ConfigArg, engine: Engine) -> Result<u8> {
    let (config, dir) = load(cfg)?;
    let spec = config.specimen.resolve()?;
    let i_rms = config.drive.i_rms()?;
    let freqs = config.drive.frequencies_hz()?;
    let noise = config.noise.unwrap_or(NoiseSpec::NONE);
    let gen = generate_sweep(&spec, i_rms, &freqs, &config.simulation, engine, &noise)?;
    let path = dir.join("sweep.csv");
    csvio::emit_csv(&path, &gen.to_csv(), &gen.comments)?;
    println!("wrote {} ({} points, engine {})", path.display(), freqs.len(), engine.label());
    Ok(0)
}

fn cmd_fit(cfg: &ConfigArg, input: Option<PathBuf>) -> Result<u8> {
    let (config, dir) = load(cfg)?;
    let spec = config.specimen.resolve()?;
    let i_rms = config.drive.i_rms()?;
    let input = input
        .or_else(|| config.io.input_csv.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::Input("fit needs --input or io.input_csv".into()))?;
    let csv = csvio::ingest_csv(&input)?;
    let data = SweepDataset::new(csv.points, spec.clone(), i_rms)?;
    let (fit, report) = fit_and_report(&config, &data)?;

    let plot = amplitude_plot_csv(&data.points, |omega| {
        fitted_amplitude(&fit, &data, omega, &config)
    });
    write_text(&dir.join("amplitude_fit.csv"), &plot)?;
    if csv.has_phase {
        write_text(&dir.join("phase_fit.csv"), &phase_plot_csv(&data, fit.gamma))?;
    }
    report.write(&dir.join("fit.txt"))?;
    print!("{}", report.render());
    Ok(0)
}

fn fit_and_report(config: &RunConfig, data: &SweepDataset) -> Result<(three_omega::fitter::FitResult, Report)> {
    let model = config.fit.model()?;
    let opts = FitOptions {
        max_reduced_freq: config.fit.max_reduced_freq,
        ..Default::default()
    };
    let fit = fit_amplitude_with(data, model, &opts)?;
    let mut report = fit_report(&fit, &data.specimen);
    if data.points.iter().all(|p| p.phase.is_some()) {
        match fit_phase(data) {
            Ok(pf) => {
                report.push("gamma_s_from_phase", pf.gamma);
                report.push("phase_high_freq_bias_warning", pf.high_freq_bias_warning);
            }
            Err(e) => report.push("phase_fit_error", e),
        }
    }
    if let Some(c) = fit.condition_10 {
        let verdict = threshold_verdict(c, &config.fit.thresholds);
        report.push("condition_10_verdict", verdict);
    }
    if let Some(gg) = fit.g_gamma {
        report.push("g_gamma_verdict", threshold_verdict(gg, &config.fit.thresholds));
    }
    Ok((fit, report))
}

fn threshold_verdict(value: f64, th: &three_omega::core_model::ConditionThresholds) -> &'static str {
    if value >= th.fail {
        "fail"
    } else if value >= th.warn {
        "warn"
    } else {
        "ok"
    }
}

/// Fitted-model amplitude at `omega` for plot overlays.
fn fitted_amplitude(
    fit: &three_omega::fitter::FitResult,
    data: &SweepDataset,
    omega: f64,
    config: &RunConfig,
) -> f64 {
    // rebuild the closed-form model from the fitted (kappa, gamma)
    let s = &data.specimen;
    let pref = 4.0 * data.i_rms.powi(3) * s.length * s.resistance * s.rprime.abs()
        / (PI.powi(4) * s.area * fit.kappa);
    let x = 2.0 * omega * fit.gamma;
    let base = 1.0 / (1.0 + x * x).sqrt();
    match config.fit.model() {
        Ok(three_omega::fitter::AmplitudeModel::Eq24) => pref * (base + 0.01) / 1.01,
        Ok(three_omega::fitter::AmplitudeModel::Series(ctl)) => {
            pref * three_omega::spectral::normalized_amplitude(x, ctl)
        }
        _ => pref * base,
    }
}

fn cmd_analyze_error(out: &Path, max_reduced: f64, points: usize) -> Result<u8> {
    // `!(x > 0.0)` rather than `x <= 0.0` so NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if points < 2 || !(max_reduced > 0.0) {
        return Err(Error::Input("need points >= 2 and max_reduced > 0".into()));
    }
    let grid: Vec<f64> = (0..points)
        .map(|k| max_reduced * k as f64 / (points - 1) as f64)
        .collect();
    let rows = error_curves(&grid, SeriesControl::EXACT)?;
    write_text(out, &error_table_csv(&rows))?;
    println!(
        "wrote {} ({} rows); A-B at 0 = {:.5}",
        out.display(),
        rows.len(),
        rows[0].difference
    );
    Ok(0)
}

fn cmd_pipeline(cfg: &ConfigArg, engine: Engine) -> Result<u8> {
    let (config, dir) = load(cfg)?;
    let base = config.specimen.resolve()?;
    let i_rms = config.drive.i_rms()?;
    let freqs = config.drive.frequencies_hz()?;
    let noise = config.noise.unwrap_or(NoiseSpec::NONE);
    let pipeline = config
        .pipeline
        .as_ref()
        .ok_or_else(|| Error::Input("pipeline run needs a [pipeline] block".into()))?;

    // fan out across temperature points; results land in indexed slots so
    // the output order never depends on scheduling
    let mut rows: Vec<String> = vec![String::new(); pipeline.points.len()];
    let mut any_error = false;
    std::thread::scope(|scope| {
        let handles: Vec<_> = pipeline
            .points
            .iter()
            .map(|pt| {
                let config = &config;
                let base = &base;
                let freqs = &freqs;
                scope.spawn(move || -> std::result::Result<String, String> {
                    let spec = pt.apply(base).map_err(|e| e.to_string())?;
                    let gen = generate_sweep(
                        &spec,
                        i_rms,
                        freqs,
                        &config.simulation,
                        engine,
                        &noise,
                    )
                    .map_err(|e| e.to_string())?;
                    let (fit, _) = fit_and_report(config, &gen.dataset)
                        .map_err(|e| e.to_string())?;
                    Ok(format!(
                        "{},ok,{},{},{},{},{},{}",
                        spec.t0,
                        fit.kappa,
                        fit.gamma,
                        fit.cp,
                        fit.condition_10.unwrap_or(f64::NAN),
                        fit.g_gamma.unwrap_or(f64::NAN),
                        fit.residual_norm
                    ))
                })
            })
            .collect();
        for (slot, handle) in rows.iter_mut().zip(handles) {
            match handle.join().expect("pipeline worker panicked") {
                Ok(row) => *slot = row,
                Err(msg) => {
                    any_error = true;
                    *slot = format!("-,error,{},,,,,", msg.replace(',', ";"));
                }
            }
        }
    });

    let mut csv =
        String::from("t0_k,status,kappa_w_per_m_k,gamma_s,cp_j_per_kg_k,condition_10,g_gamma,residual_rel_rms\n");
    for row in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    let path = dir.join("pipeline.csv");
    write_text(&path, &csv)?;
    println!(
        "wrote {} ({} temperature points{})",
        path.display(),
        rows.len(),
        if any_error { ", with errors" } else { "" }
    );
    Ok(0)
}

fn cmd_check(cfg: &ConfigArg) -> Result<u8> {
    let (config, _) = load(cfg)?;
    let spec = config.specimen.resolve()?;
    let i_rms = config.drive.i_rms()?;
    let freqs = config.drive.frequencies_hz()?;
    let th = &config.fit.thresholds;

    let mut r = Report::new();
    let mut worst = 0.0f64;

    // condition (10) is frequency-independent; evaluate at the first point
    let drive = Drive { i_rms, omega: 2.0 * PI * freqs[0] };
    let c10 = condition_10(&spec, &drive, 1)?;
    r.push("condition_10_n1", c10);
    r.push("condition_10_verdict", threshold_verdict(c10, th));
    worst = worst.max(c10);

    let g = config.simulation.loss.loss_rate(&spec).unwrap_or(0.0);
    let gamma = derive_thermal(&spec, &drive)?.gamma;
    r.push("gamma_s", gamma);
    r.push("loss_g_per_s", g);
    r.push("g_gamma", g * gamma);
    r.push("g_gamma_verdict", threshold_verdict(g * gamma, th));
    worst = worst.max(g * gamma);

    if let Some(dev) = spec.cylindrical_mismatch(0.05) {
        r.push("cross_section_mismatch_rel", dev);
    }
    let reduced_max = 2.0 * (2.0 * PI * freqs[freqs.len() - 1]) * gamma;
    r.push("two_omega_gamma_max", reduced_max);

    print!("{}", r.render());
    Ok(if worst >= th.fail { 3 } else { 0 })
}
