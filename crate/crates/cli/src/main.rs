mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex;

use config::Config;
use secrecy_lab::channel::mean_snrs;
use secrecy_lab::montecarlo::{qpsk_signal, run_asc_mc, run_signal_mc, EveSnrModel, McConfig, Modulation};
use secrecy_lab::secrecy::AscMethod;
use secrecy_lab::sweep::{self, DbParams, Figure, ParamOverrides, SweepTable};
use secrecy_lab::validate::{run_validation, Level, ValidateOptions};
use secrecy_lab::wfrft::{self, Signal, Wfrft};
use secrecy_lab::EveMeanForm;

const SEED_ENV: &str = "SECRECY_LAB_SEED";

#[derive(Parser, Debug)]
#[command(name = "secrecy-lab", version, about = "Secrecy capacity of correlated Rayleigh wiretap links with antenna selection and 4-WFRFT")]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct GlobalOpts {
    /// Channel correlation, 0 <= rho < 1
    #[arg(long, global = true, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Transmit antennas
    #[arg(long, global = true)]
    na: Option<usize>,
    /// Receive antennas
    #[arg(long, global = true)]
    nb: Option<usize>,
    /// Transmit power (dBm)
    #[arg(long, global = true, allow_negative_numbers = true)]
    power_dbm: Option<f64>,
    /// Eavesdropper's transform order error
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta_alpha: Option<f64>,
    /// Main channel mean gain (dB)
    #[arg(long, global = true, allow_negative_numbers = true)]
    sigma_m2_db: Option<f64>,
    /// Eavesdropper channel mean gain (dB)
    #[arg(long, global = true, allow_negative_numbers = true)]
    sigma_e2_db: Option<f64>,
    /// Noise power at Bob (dBm)
    #[arg(long, global = true, allow_negative_numbers = true)]
    noise_m_dbm: Option<f64>,
    /// Noise power at Eve (dBm)
    #[arg(long, global = true, allow_negative_numbers = true)]
    noise_e_dbm: Option<f64>,
    /// Monte Carlo trials
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Random seed (default: $SECRECY_LAB_SEED, else 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Comma-separated subset of closed_form, quadrature, monte_carlo (or "all")
    #[arg(long, global = true)]
    methods: Option<String>,
    /// Output file (asc, wfrft) or directory (figure)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key = value file with defaults for any of the flags above
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Reproduce a figure: writes <name>.csv and a plot script <name>.py
    Figure {
        /// fig4, fig7, fig8, fig9, fig10 or fig11
        name: String,
    },
    /// Average secrecy capacity at one parameter point
    Asc,
    /// Monte Carlo estimate only
    Mc {
        /// mismatch (default) or mean-matched
        #[arg(long, default_value = "mismatch")]
        eve_model: String,
        /// Run the signal-level QPSK check with this many symbols instead
        #[arg(long)]
        symbols: Option<usize>,
    },
    /// Apply the 4-WFRFT to a signal, printed as re,im rows
    Wfrft {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        /// Demodulate with order beta afterwards, as an eavesdropper would
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// CSV of re,im (or re) rows; a random QPSK block when absent
        #[arg(long)]
        input: Option<PathBuf>,
        /// Length of the random block
        #[arg(long, default_value_t = 16)]
        len: usize,
    },
    /// The four weighting coefficients for an order, or a power table over [0, 4)
    Weights {
        /// Order (falls back to --delta-alpha)
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
    },
    /// Run the self-check suites
    Validate {
        /// fast or full
        #[arg(long, default_value = "fast")]
        level: String,
        #[arg(long, hide = true)]
        canary_flip_eve_sign: bool,
    },
}

/// Flags merged with the config file and environment.
#[derive(Debug)]
struct Settings {
    overrides: ParamOverrides,
    mc: McConfig,
    methods: Option<Vec<AscMethod>>,
    out: Option<PathBuf>,
}

fn parse_methods(s: &str) -> Result<Vec<AscMethod>> {
    if s.trim() == "all" {
        return Ok(AscMethod::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let m: AscMethod = part.parse().map_err(|e| anyhow!("invalid --methods: {e}"))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        bail!("invalid --methods: empty list");
    }
    Ok(out)
}

fn finite(flag: &str, v: Option<f64>) -> Result<Option<f64>> {
    match v {
        Some(x) if !x.is_finite() => bail!("invalid --{flag}: must be finite, got {x}"),
        _ => Ok(v),
    }
}

fn positive<T: PartialOrd + Default + std::fmt::Display + Copy>(flag: &str, v: Option<T>) -> Result<Option<T>> {
    match v {
        Some(x) if x <= T::default() => bail!("invalid --{flag}: must be at least 1, got {x}"),
        _ => Ok(v),
    }
}

fn resolve(o: &GlobalOpts) -> Result<Settings> {
    let cfg = match &o.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    macro_rules! pick {
        ($field:ident, $key:literal) => {
            match o.$field {
                Some(v) => Some(v),
                None => cfg.get($key)?,
            }
        };
    }
    let rho: Option<f64> = finite("rho", pick!(rho, "rho"))?;
    if let Some(r) = rho {
        if !(0.0..1.0).contains(&r) {
            bail!("invalid --rho: must satisfy 0 <= rho < 1, got {r}");
        }
    }
    let overrides = ParamOverrides {
        power_dbm: finite("power-dbm", pick!(power_dbm, "power_dbm"))?,
        sigma_m2_db: finite("sigma-m2-db", pick!(sigma_m2_db, "sigma_m2_db"))?,
        sigma_e2_db: finite("sigma-e2-db", pick!(sigma_e2_db, "sigma_e2_db"))?,
        noise_m_dbm: finite("noise-m-dbm", pick!(noise_m_dbm, "noise_m_dbm"))?,
        noise_e_dbm: finite("noise-e-dbm", pick!(noise_e_dbm, "noise_e_dbm"))?,
        rho,
        n_a: positive("na", pick!(na, "na"))?,
        n_b: positive("nb", pick!(nb, "nb"))?,
        delta_alpha: finite("delta-alpha", pick!(delta_alpha, "delta_alpha"))?,
    };
    let seed = match pick!(seed, "seed") {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|e| anyhow!("invalid {SEED_ENV} '{v}': {e}"))?,
            Err(_) => 0,
        },
    };
    let mut mc = McConfig::new(positive("trials", pick!(trials, "trials"))?.unwrap_or(McConfig::default().trials), seed);
    if let Some(w) = positive("workers", pick!(workers, "workers"))? {
        mc = mc.with_workers(w);
    }
    let methods = match (&o.methods, cfg.raw("methods")) {
        (Some(m), _) => Some(parse_methods(m)?),
        (None, Some(m)) => Some(parse_methods(m)?),
        (None, None) => None,
    };
    let out = o.out.clone().or_else(|| cfg.raw("out").map(PathBuf::from));
    Ok(Settings {
        overrides,
        mc,
        methods,
        out,
    })
}

/// Point defaults: reference losses, 20 dBm, rho = 0.5, single antennas.
fn point_params(s: &Settings) -> DbParams {
    s.overrides.apply(DbParams::reference(20.0, 0.5, 1, 1, 0.0))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_figure(name: &str, s: &Settings) -> Result<()> {
    let fig: Figure = name.parse().map_err(|e| anyhow!("{e}"))?;
    let methods = s.methods.clone().unwrap_or_else(|| vec![AscMethod::ClosedForm]);
    let table = sweep::run_figure(fig, &s.overrides, &methods, &s.mc)?;
    let dir = s.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_name = format!("{}.csv", fig.name());
    let csv_path = dir.join(&csv_name);
    let script_path = dir.join(format!("{}.py", fig.name()));
    write_text(&csv_path, &table.to_csv())?;
    write_text(
        &script_path,
        &sweep::plot_script(&table, &csv_name, fig.title(), fig.y_label()),
    )?;
    println!(
        "{}: {} rows x {} columns -> {}, {}",
        fig.name(),
        table.x.len(),
        table.columns.len(),
        csv_path.display(),
        script_path.display()
    );
    Ok(())
}

fn describe(p: &DbParams) -> Result<String> {
    let sp = p.to_params()?;
    let (gm, ge) = mean_snrs(&sp)?;
    Ok(format!(
        "P = {} dBm, rho = {}, N_A x N_B = {} x {}, delta_alpha = {}, mean SNR main = {gm:.6e}, eavesdropper = {ge:.6e}",
        p.power_dbm, p.rho, p.n_a, p.n_b, p.delta_alpha
    ))
}

fn cmd_asc(s: &Settings) -> Result<()> {
    let p = point_params(s);
    let sp = p.to_params()?;
    println!("{}", describe(&p)?);
    let methods = s
        .methods
        .clone()
        .unwrap_or_else(|| vec![AscMethod::ClosedForm, AscMethod::Quadrature]);
    let mut table = SweepTable::new("delta_alpha", vec![p.delta_alpha]);
    for m in methods {
        let (v, e) = sweep::evaluate(&sp, m, &s.mc)?;
        match m {
            AscMethod::MonteCarlo => println!(
                "{:<12} {v:.6} +- {e:.6} bits/s/Hz ({} trials, seed {})",
                m.name(),
                s.mc.trials,
                s.mc.seed
            ),
            _ => println!("{:<12} {v:.6} bits/s/Hz (error estimate {e:.1e})", m.name()),
        }
        table.push_column(m.name(), vec![v], vec![e])?;
    }
    if let Some(out) = &s.out {
        write_text(out, &table.to_csv())?;
    }
    Ok(())
}

fn cmd_mc(eve_model: &str, symbols: Option<usize>, s: &Settings) -> Result<()> {
    let p = point_params(s);
    let sp = p.to_params()?;
    if let Some(n) = symbols {
        let r = run_signal_mc(&sp, n, Modulation::Qpsk, &s.mc)?;
        let want = wfrft::mismatch_power_split(sp.delta_alpha).0;
        println!(
            "delta_alpha = {}: useful fraction {:.6} (|w0|^2 = {want:.6}), SIR {:.4}, {} blocks",
            p.delta_alpha, r.useful_fraction, r.sir, r.blocks
        );
        return Ok(());
    }
    let model = match eve_model {
        "mismatch" => EveSnrModel::Mismatch,
        "mean-matched" | "mean_matched" => EveSnrModel::MeanMatched,
        other => bail!("invalid --eve-model '{other}' (mismatch or mean-matched)"),
    };
    println!("{}", describe(&p)?);
    let r = run_asc_mc(&sp, &s.mc.with_eve_model(model))?;
    println!(
        "monte_carlo  {:.6} +- {:.6} bits/s/Hz ({} trials, seed {})",
        r.mean, r.std_error, r.trials, s.mc.seed
    );
    Ok(())
}

fn read_signal(path: &Path) -> Result<Signal<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let nums: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match nums {
            Ok(v) if v.len() == 1 => samples.push(Complex::new(v[0], 0.0)),
            Ok(v) if v.len() == 2 => samples.push(Complex::new(v[0], v[1])),
            // tolerate a header row
            Err(_) if i == 0 => continue,
            _ => bail!("{}: row {} must be 're' or 're,im'", path.display(), i + 1),
        }
    }
    Ok(Signal::new(samples)?)
}

fn cmd_wfrft(alpha: f64, beta: Option<f64>, input: Option<&Path>, len: usize, s: &Settings) -> Result<()> {
    let x = match input {
        Some(p) => read_signal(p)?,
        None => qpsk_signal(len, s.mc.seed)?,
    };
    let plan = Wfrft::new(x.len())?;
    let mut y = plan.apply(&x, alpha)?;
    if let Some(b) = beta {
        y = plan.apply(&y, -b)?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["re", "im"])?;
    for c in y.samples() {
        w.write_record([c.re.to_string(), c.im.to_string()])?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?;
    match &s.out {
        Some(p) => write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_weights(alpha: Option<f64>, s: &Settings) -> Result<()> {
    let Some(a) = alpha.or(s.overrides.delta_alpha) else {
        // No order given: the power table over one period.
        let t = sweep::run_figure(Figure::Fig4, &s.overrides, &[], &s.mc)?;
        return match &s.out {
            Some(out) => write_text(out, &t.to_csv()),
            None => {
                print!("{}", t.to_csv());
                Ok(())
            }
        };
    };
    let w = wfrft::weights(a);
    println!("alpha = {a} (reduced {})", w.order());
    println!("p,re,im,power");
    for (p, (c, pw)) in w.coefficients().iter().zip(w.powers()).enumerate() {
        println!("{p},{},{},{}", c.re, c.im, pw);
    }
    Ok(())
}

fn cmd_validate(level: &str, canary: bool, s: &Settings) -> Result<bool> {
    let opts = ValidateOptions {
        level: level.parse::<Level>().map_err(|e| anyhow!("invalid --level: {e}"))?,
        eve_form: if canary {
            EveMeanForm::FlippedSign
        } else {
            EveMeanForm::Exact
        },
        seed: s.mc.seed,
        workers: Some(s.mc.workers),
    };
    let mut ok = true;
    for r in run_validation(&opts) {
        ok &= r.passed;
        println!(
            "{} {:<28} {:>7.2}s  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.seconds,
            r.detail
        );
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    let s = resolve(&cli.opts)?;
    match cli.cmd {
        Cmd::Figure { name } => cmd_figure(&name, &s)?,
        Cmd::Asc => cmd_asc(&s)?,
        Cmd::Mc { eve_model, symbols } => cmd_mc(&eve_model, symbols, &s)?,
        Cmd::Wfrft {
            alpha,
            beta,
            input,
            len,
        } => cmd_wfrft(alpha, beta, input.as_deref(), len, &s)?,
        Cmd::Weights { alpha } => cmd_weights(alpha, &s)?,
        Cmd::Validate {
            level,
            canary_flip_eve_sign,
        } => return cmd_validate(&level, canary_flip_eve_sign, &s),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
