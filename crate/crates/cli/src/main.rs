//! `smf`: mode analysis, gain calibration, delay scans and fits.

use clap::{Args, Parser, Subcommand};
use smf_core::error::Category;
use smf_core::experiment::{
    build_scenario, fit_dip, fit_visibility, preset_config, read_config, run_delay_scan, DelayScan, Observable,
    ScenarioConfig,
};
use smf_core::modes::{eigenvalue_curve, rect_rect_modes, bandwidth_for_c, DEFAULT_POINTS};
use smf_core::{Error, Result};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "smf", version, about = "Single-mode filtering and heralded two-photon interference simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the rectangular filter/gate kernel versus c = BT/4.
    Modes(ModesArgs),
    /// Pump pulse energy that reaches the configured pair probability.
    Calibrate(ScenarioArgs),
    /// Delay scan written as CSV.
    Scan(ScenarioArgs),
    /// Gaussian-dip fit of a scan CSV.
    Fit(FitArgs),
    /// Gaussian engine against the Fock-space oracle on random states.
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct ModesArgs {
    /// Range of c as start:stop:step (inclusive).
    #[arg(long, default_value = "0:5:0.1")]
    c_range: String,
    /// Eigenvalues per row.
    #[arg(long, default_value_t = 3)]
    modes: usize,
    /// Frequency grid points.
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Also write eigenmode samples at these c values (comma separated).
    #[arg(long, value_delimiter = ',')]
    eigenmodes_at: Vec<f64>,
    /// Destination of the eigenmode samples (stdout after the table if absent).
    #[arg(long)]
    eigenmodes_output: Option<PathBuf>,
    /// Output file (stdout if absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario configuration file.
    config: Option<PathBuf>,
    /// Built-in preset (multimode, single_mode) instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Override a configuration key, e.g. --set pump.pair_probability=0.05.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output file (stdout if absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Scan CSV.
    input: PathBuf,
    /// fourfold, twofold or twofold_accsub.
    #[arg(long, default_value = "fourfold")]
    observable: String,
    /// Weight points by Poisson errors of the expected counts for this many pulses.
    #[arg(long)]
    pulses: Option<f64>,
    /// Expected dip width (ps); the scan must span three of them.
    #[arg(long)]
    dip_width_ps: Option<f64>,
    /// Output file (stdout if absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Random states to compare.
    #[arg(long, default_value_t = 200)]
    states: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest acceptable deviation.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("c range `{s}` is not start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let (a, b, step) = (v[0], v[1], v[2]);
    if !(step > 0.0) || b < a {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| a + step * k as f64).collect())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io { path: p.to_path_buf(), source: e }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io { path: PathBuf::from("<stdout>"), source: e }),
    }
}

fn modes(a: &ModesArgs) -> Result<()> {
    let cs = parse_range(&a.c_range)?;
    let rows = eigenvalue_curve(&cs, a.modes, a.points)?;
    let mut text = String::from("c");
    for j in 0..a.modes {
        text += &format!(", chi{j}");
    }
    text.push('\n');
    for r in &rows {
        text += &format!("{:.4}", r.c);
        for x in &r.chi {
            text += &format!(", {x:.8}");
        }
        text.push('\n');
    }
    write_out(a.output.as_deref(), &text)?;
    if !a.eigenmodes_at.is_empty() {
        // samples against ω/B for T = 1
        let mut s = String::from("c, omega_over_b");
        for j in 0..a.modes {
            s += &format!(", phi{j}_re, phi{j}_im");
        }
        s.push('\n');
        for &c in &a.eigenmodes_at {
            if !(c > 0.0) {
                return Err(Error::Config(format!("eigenmode c = {c} must be positive")));
            }
            let b = bandwidth_for_c(c, 1.0);
            let basis = rect_rect_modes(b, 1.0, a.points)?;
            let k = a.modes.min(basis.len());
            for m in 0..basis.grid.n_points {
                s += &format!("{c:.4}, {:.6}", basis.grid.offset(m) / b);
                for j in 0..k {
                    let z = basis.eigenmodes[(m, j)];
                    s += &format!(", {:.8e}, {:.8e}", z.re, z.im);
                }
                s.push('\n');
            }
        }
        match &a.eigenmodes_output {
            Some(p) => write_out(Some(p), &s)?,
            None => write_out(None, &format!("\n{s}"))?,
        }
    }
    Ok(())
}

fn scenario_config(a: &ScenarioArgs) -> Result<ScenarioConfig> {
    match (&a.config, &a.preset) {
        (Some(path), _) => read_config(path, &a.overrides),
        (None, Some(name)) => preset_config(name, &a.overrides),
        (None, None) => Err(Error::Config("give a configuration file or --preset".into())),
    }
}

fn calibrate(a: &ScenarioArgs) -> Result<()> {
    let sc = build_scenario(&scenario_config(a)?)?;
    let c = sc.calibration;
    let text = format!(
        "label = {}\ngamma_l_per_w = {:.6e}\npump_energy_j = {:.6e}\npair_probability = {:.6e}\nsignal_modes = {}\nidler_modes = {}\n",
        sc.label,
        c.gamma_l,
        c.pump_energy,
        c.pair_probability,
        sc.bases[0].len(),
        sc.bases[2].len()
    );
    write_out(a.output.as_deref(), &text)
}

fn scan(a: &ScenarioArgs) -> Result<()> {
    let sc = build_scenario(&scenario_config(a)?)?;
    let s = run_delay_scan(&sc)?;
    log::info!("plateau relative change {:.3e}", s.plateau_slope());
    write_out(a.output.as_deref(), &s.to_csv_string())
}

fn fit(a: &FitArgs) -> Result<()> {
    let file = std::fs::File::open(&a.input).map_err(|e| Error::Io { path: a.input.clone(), source: e })?;
    let mut scan = DelayScan::read_csv(file, &a.input.display().to_string())?;
    scan.dip_width = a.dip_width_ps.map(|w| w * 1e-12);
    let obs = Observable::parse(&a.observable)?;
    let f = match a.pulses {
        None => fit_visibility(&scan, obs)?,
        Some(pulses) => {
            if !(pulses > 0.0) {
                return Err(Error::Config("--pulses must be positive".into()));
            }
            let vals = obs.values(&scan);
            let counts: Vec<f64> = vals.iter().map(|p| p * pulses).collect();
            let errs: Vec<f64> = counts.iter().map(|c| if *c > 0.0 { c.sqrt() } else { 1.0 }).collect();
            fit_dip(&scan.taus(), &counts, Some(&errs), scan.dip_width)?
        }
    };
    write_out(a.output.as_deref(), &f.to_text())
}

fn oracle(a: &OracleArgs) -> Result<()> {
    let r = smf_core::detection::oracle::oracle_check(a.states, a.seed)?;
    let text = format!(
        "states = {}\ncomparisons = {}\nmax_deviation = {:.3e}\nthermal_deviation = {:.3e}\nworst = {}\n",
        r.states, r.comparisons, r.max_deviation, r.thermal_deviation, r.worst
    );
    write_out(None, &text)?;
    if r.max_deviation > a.tolerance {
        return Err(Error::Numerical(format!(
            "engine and oracle differ by {:.3e} (> {:.1e})",
            r.max_deviation, a.tolerance
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Modes(a) => modes(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Scan(a) => scan(a),
        Command::Fit(a) => fit(a),
        Command::OracleCheck(a) => oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, kind) = match e.category() {
                Category::Config => (2, "config"),
                Category::Numerical => (3, "numerical"),
                Category::Io => (4, "io"),
            };
            eprintln!("error[{kind}]: {}", e.to_string().replace('\n', " "));
            ExitCode::from(code)
        }
    }
}
