use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use semr_core::harness::experiments::{
    run_certify, run_concentration, run_lowerbound, verdict_passes,
};
use semr_core::harness::output::{
    certificate_csv, concentration_csv, lowerbound_csv, read_regret_series, sweep_csv,
};
use semr_core::harness::sweep::{regret_points, run_cell};
use semr_core::harness::{emit_svg, fit_slope, parse_config, run_sweep, Correction, ExperimentConfig, PlotSeries};
use semr_core::runner::with_workers;
use semr_core::{Error, Result};

#[derive(Parser)]
#[command(name = "semr", version, about = "Monte-Carlo lab for sequential estimation with multiple sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (defaults to the config's `output`, then `semr-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, env = "SEMR_WORKERS", default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Every configured policy at a single horizon.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
    },
    /// Horizon grid with log-log slope fits.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "sqrtlog")]
        correction: Correction,
    },
    /// Empirical tails of the trace estimator against the concentration bound.
    Concentration {
        #[command(flatten)]
        common: Common,
    },
    /// Pull-count and regret bounds for LCB.
    Certify {
        #[command(flatten)]
        common: Common,
    },
    /// Two-environment lower-bound construction.
    Lowerbound {
        #[command(flatten)]
        common: Common,
    },
    /// Slope fit of an existing sweep CSV.
    FitSlope {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "none")]
        correction: Correction,
        #[arg(long, default_value = "count_based_regret")]
        column: String,
        /// Writes fit.json and fit.svg here when given.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Check(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) => format!("config error: {m}"),
            Failure::Runtime(m) => format!("error: {m}"),
            Failure::Check(m) => format!("check failed: {m}"),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load(common: &Common) -> std::result::Result<(ExperimentConfig, PathBuf), Failure> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Failure::Config(format!("{}: {e}", common.config.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("semr-out"));
    fs::create_dir_all(&out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    Ok((config, out))
}

fn write(dir: &Path, name: &str, contents: &str) -> Outcome {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    write(dir, name, &(text + "\n"))
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn pooled<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> std::result::Result<T, Failure> {
    Ok(with_workers(workers, f)??)
}

fn simulate(common: &Common, n: usize) -> Outcome {
    let (config, out) = load(common)?;
    let rows = pooled(common.workers, || {
        let env = config.environment()?;
        let fisher = (0..env.k()).map(|i| env.fisher_info(i)).collect::<Result<Vec<_>>>()?;
        config
            .policy_kinds(&env)?
            .into_iter()
            .map(|p| {
                p.validate(env.k())?;
                run_cell(&env, &fisher, p, n, &config)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for r in &rows {
        println!(
            "{} n={} count_based_regret={:e} (se {:e})",
            r.policy, n, r.report.count_based_regret.mean, r.report.count_based_regret.se
        );
    }
    write(&out, "simulate.csv", &sweep_csv(&rows)?)?;
    write_json(&out, "simulate.json", &to_json(&rows))
}

fn sweep(common: &Common, correction: Correction) -> Outcome {
    let (config, out) = load(common)?;
    let rows = pooled(common.workers, || run_sweep(&config))?;
    write(&out, "sweep.csv", &sweep_csv(&rows)?)?;

    let mut names: Vec<String> = Vec::new();
    for r in &rows {
        if !names.contains(&r.policy) {
            names.push(r.policy.clone());
        }
    }
    let mut series = Vec::new();
    let mut fits = serde_json::Map::new();
    for name in names {
        let points = regret_points(&rows, &name);
        let fit = if points.len() >= 3 {
            match fit_slope(&points, correction) {
                Ok(f) => {
                    println!("{name}: slope {:.4} ± {:.4} ({correction:?})", f.slope, f.slope_se);
                    fits.insert(name.clone(), to_json(&f));
                    Some(f)
                }
                Err(e) => {
                    println!("{name}: no fit ({e})");
                    None
                }
            }
        } else {
            None
        };
        series.push(PlotSeries {
            label: name,
            points,
            fit,
        });
    }
    write_json(&out, "sweep.json", &json!({ "rows": to_json(&rows), "fits": fits }))?;
    match emit_svg(&series, "count-based regret") {
        Ok(svg) => write(&out, "sweep.svg", &svg),
        Err(Error::EmptyInput) => {
            eprintln!("no positive regret values; skipping sweep.svg");
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

fn concentration(common: &Common) -> Outcome {
    let (config, out) = load(common)?;
    let cells = pooled(common.workers, || run_concentration(&config))?;
    write(&out, "concentration.csv", &concentration_csv(&cells)?)?;
    let failed = cells.iter().filter(|(_, c)| !c.pass).count();
    println!("{} cells, {failed} failed", cells.len());
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} concentration cells exceed the bound")));
    }
    Ok(())
}

fn certify(common: &Common) -> Outcome {
    let (config, out) = load(common)?;
    let rows = pooled(common.workers, || run_certify(&config))?;
    let certs: Vec<_> = rows.iter().flat_map(|r| r.certificates.clone()).collect();
    write(&out, "certify.csv", &certificate_csv(&certs)?)?;
    write_json(&out, "certify.json", &to_json(&rows))?;
    let mut ok = true;
    for r in &rows {
        println!(
            "n={} counts {} regret {:e} <= {:e}: {}",
            r.n,
            if r.certificates.iter().all(|c| c.pass) { "pass" } else { "FAIL" },
            r.regret.mean,
            r.regret_bound,
            if r.regret_pass { "pass" } else { "FAIL" }
        );
        ok &= r.pass();
    }
    if !ok {
        return Err(Failure::Check("certificate failed".into()));
    }
    Ok(())
}

fn lowerbound(common: &Common) -> Outcome {
    let (config, out) = load(common)?;
    let verdicts = pooled(common.workers, || run_lowerbound(&config))?;
    write(&out, "lowerbound.csv", &lowerbound_csv(&verdicts)?)?;
    write_json(&out, "lowerbound.json", &to_json(&verdicts))?;
    let mut ok = true;
    for v in &verdicts {
        let pass = verdict_passes(v);
        println!(
            "k={} n={} {}: sum {:.3} vs {:.3}, bh {}, floor {} -> {}",
            v.k,
            v.n,
            v.policy,
            v.sum,
            v.threshold,
            v.bh.pass,
            v.floor_pass,
            if pass { "pass" } else { "FAIL" }
        );
        ok &= pass;
    }
    if !ok {
        return Err(Failure::Check("lower-bound verdict failed".into()));
    }
    Ok(())
}

fn fit_offline(input: &Path, correction: Correction, column: &str, out: Option<&Path>) -> Outcome {
    let text = fs::read_to_string(input).map_err(|e| Failure::Config(format!("{}: {e}", input.display())))?;
    let series = read_regret_series(&text, column)?;
    let mut plot = Vec::new();
    let mut fits = serde_json::Map::new();
    for (policy, points) in series {
        let fit = fit_slope(&points, correction)?;
        println!("{policy}: slope {:.4} ± {:.4}", fit.slope, fit.slope_se);
        fits.insert(policy.clone(), to_json(&fit));
        plot.push(PlotSeries {
            label: policy,
            points,
            fit: Some(fit),
        });
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
        write_json(dir, "fit.json", &serde_json::Value::Object(fits))?;
        write(dir, "fit.svg", &emit_svg(&plot, column)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { common, n } => simulate(common, *n),
        Command::Sweep { common, correction } => sweep(common, *correction),
        Command::Concentration { common } => concentration(common),
        Command::Certify { common } => certify(common),
        Command::Lowerbound { common } => lowerbound(common),
        Command::FitSlope {
            input,
            correction,
            column,
            out,
        } => fit_offline(input, *correction, column, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message());
            ExitCode::from(f.code())
        }
    }
}
