use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use stmtevo_cli::{load_config, load_problems, prove, report, rewrite, run, BackendChoice};

#[derive(Parser)]
#[command(name = "stmtevo", version, about = "Budgeted evolutionary search over formal theorem statements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search every problem and write one event log per problem.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        problems: PathBuf,
        #[arg(long, value_enum, default_value = "sim")]
        backend: BackendChoice,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the metrics report from a run directory.
    Metrics {
        #[arg(long)]
        run: PathBuf,
        /// Budget prefix to score; defaults to the run's budget.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prove each problem's repertoire under a fixed attempt budget.
    Prove {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value_t = 64)]
        budget: usize,
        #[arg(long, value_enum, default_value = "sim")]
        backend: BackendChoice,
        /// Also prove the reference statements directly.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print rewrite variants of a statement file.
    Evolast {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_steps: usize,
        #[arg(long)]
        verify: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { config, problems, backend, parallelism, out } => {
            let cfg = match config {
                Some(p) => load_config(&p)?,
                None => Default::default(),
            };
            let text = std::fs::read_to_string(&problems).with_context(|| format!("reading {}", problems.display()))?;
            let list = load_problems(&problems)?;
            let m = run::cmd_run(&cfg, &list, &text, backend, parallelism, &out)?;
            let done = m.problems.iter().filter(|p| p.completed).count();
            println!("{}: {done}/{} problems completed their budget of {}", m.run_id, m.problems.len(), cfg.budget);
            Ok(if m.all_completed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Metrics { run, t, out } => {
            let r = report::cmd_metrics(&run, t, &out)?;
            let s = &r.summary;
            println!(
                "T={} N={} CH={:.3} SH={:.3} FY={:.3} SD={:.3} SY={:.3} Gini={:.3} Top10={:.3}",
                r.t, s.n, s.ch, s.sh, s.fy, s.sd, s.sy, s.gini, s.top10_share
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Prove { run, budget, backend, oracle, parallelism, out } => {
            let r = prove::cmd_prove(&run, budget, backend, oracle, parallelism, &out)?;
            for row in &r.rows {
                let u = &row.utility;
                println!(
                    "{}: attempted {}/{} pass {}/{} complete {}/{} theorem-complete {}/{}",
                    row.label, u.attempted, u.n, u.pass, u.n, u.complete, u.n, u.theorem_complete, u.n
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Evolast { file, n, seed, max_steps, verify } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let variants = rewrite::cmd_evolast(&text, n, seed, max_steps, verify)?;
            let mut failed = false;
            for v in &variants {
                let check = match v.verified {
                    Some(true) => " [equivalent]",
                    Some(false) => {
                        failed = true;
                        " [NOT EQUIVALENT]"
                    }
                    None if verify => " [too large to check]",
                    None => "",
                };
                println!("-- variant {}: {}{check}\n{}\n", v.index, v.steps.join(", "), v.text);
            }
            Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
    }
}
