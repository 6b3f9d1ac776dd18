use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use irs_wpsn::channel::synth_channels;
use irs_wpsn::harness::{
    emit_csv, load_config, mean_throughput, run_sweep, run_validation, write_csv, Scheme,
    SweepParam, SweepSpec,
};
use irs_wpsn::SystemConfig;

#[derive(Parser)]
#[command(
    version,
    about = "Throughput maximization for IRS-assisted wireless powered sensor networks"
)]
struct Cli {
    /// TOML configuration; defaults to the reference deployment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Channel seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one channel realization and print the schedule.
    Solve {
        #[arg(long, default_value = "lc")]
        scheme: Scheme,
        /// Also write the channel realization as CSV.
        #[arg(long)]
        channels_out: Option<PathBuf>,
    },
    /// Monte Carlo sweep over one parameter, written as CSV.
    Sweep {
        /// Parameter to vary: p0_dbm, n_r, x_irs, p_c_irs, p_ck or k.
        #[arg(long)]
        param: Option<SweepParam>,
        /// Comma-separated values of the parameter.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Comma-separated schemes; all of them by default.
        #[arg(long, value_delimiter = ',')]
        scheme: Vec<Scheme>,
        #[arg(long)]
        trials: Option<usize>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in consistency checks.
    Validate {
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

fn print_solve(
    cfg: &SystemConfig,
    scheme: Scheme,
    seed: u64,
    channels_out: Option<PathBuf>,
) -> anyhow::Result<()> {
    let ch = synth_channels(cfg, seed)?;
    if let Some(path) = channels_out {
        let f = std::fs::File::create(&path).with_context(|| path.display().to_string())?;
        ch.write_table(std::io::BufWriter::new(f))?;
    }
    let sol = scheme.run(&ch, cfg, seed)?;
    println!("scheme      {scheme}");
    println!("seed        {seed}");
    println!(
        "throughput  {:.6} nats  ({:.6} bits)",
        sol.sum_throughput_nats,
        sol.throughput_bits()
    );
    println!("t01         {:.9}", sol.times.t01);
    println!("t02         {:.9}", sol.times.t02);
    for (k, (tau, p)) in sol.times.tau.iter().zip(&sol.powers).enumerate() {
        println!("sensor {k:<4} tau {tau:.9}  power {p:.6e} W");
    }
    if let Some(mu) = sol.mu {
        println!("mu          {mu:.9e}");
    }
    if let Some(mm) = &sol.mm {
        println!(
            "mm          {} iterations, converged {}",
            mm.iterations, mm.converged
        );
    }
    println!(
        "audit       {} (worst residual {:.2e})",
        if sol.audit.passes() { "pass" } else { "FAIL" },
        sol.audit.worst_violation()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let file = match &cli.config {
        Some(p) => Some(load_config(p)?),
        None => None,
    };
    let (mut cfg, file_sweep) = match file {
        Some(f) => (f.system, f.sweep),
        None => (SystemConfig::reference(), None),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }

    match cli.command {
        Command::Solve {
            scheme,
            channels_out,
        } => {
            print_solve(&cfg, scheme, cfg.seed, channels_out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            param,
            values,
            scheme,
            trials,
            out,
        } => {
            let mut spec = match (file_sweep, param) {
                (Some(s), None) => s,
                (base, Some(p)) => SweepSpec {
                    param: p,
                    values: Vec::new(),
                    schemes: base
                        .as_ref()
                        .map_or_else(|| Scheme::ALL.to_vec(), |b| b.schemes.clone()),
                    trials: base.as_ref().map_or(1, |b| b.trials),
                    base_seed: cfg.seed,
                },
                (None, None) => {
                    bail!("sweep needs --param and --values, or a [sweep] table in the config")
                }
            };
            if !values.is_empty() {
                spec.values = values;
            }
            if !scheme.is_empty() {
                spec.schemes = scheme;
            }
            if let Some(t) = trials {
                spec.trials = t;
            }
            if let Some(s) = cli.seed {
                spec.base_seed = s;
            }
            let records = run_sweep(&spec, &cfg)?;
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            match out {
                Some(path) => {
                    emit_csv(&records, &path)?;
                    for (v, s, mean) in mean_throughput(&records) {
                        eprintln!("{} = {v:<10} {s:<13} mean {mean:.6} nats", spec.param);
                    }
                }
                None => write_csv(&records, std::io::stdout().lock())?,
            }
            if failed > 0 {
                eprintln!("{failed} of {} runs failed; see the log", records.len());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { trials } => {
            let checks = run_validation(&cfg, trials);
            let mut ok = true;
            for c in &checks {
                println!(
                    "{} {:<45} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                ok &= c.passed;
            }
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
