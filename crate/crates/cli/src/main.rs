use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use eqweyl_cli::{commands, run, ExperimentConfig};
use eqweyl_core::TheoremKind;

/// Equivariant Weyl-law experiments on surfaces of revolution.
#[derive(Parser)]
#[command(name = "eqweyl", version)]
struct Cli {
    /// Write output files here instead of printing to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the built-in models.
    Models {
        /// Full JSON catalog with sampled profiles.
        #[arg(long)]
        json: bool,
    },
    /// Dump the eigenvalues of one mode.
    Spectrum {
        model: String,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        emax: f64,
        #[arg(long, default_value = "zero")]
        potential: String,
        /// Finite differences on this many points instead of the closed form.
        #[arg(long)]
        fd: Option<usize>,
    },
    /// Reduced volumes over a list of energies.
    Reduce {
        model: String,
        /// Energy level; repeatable.
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        c: Vec<f64>,
        /// Uniform grid `lo:hi:count`.
        #[arg(long)]
        c_grid: Option<String>,
        #[arg(long, default_value = "zero")]
        potential: String,
    },
    /// Run a window-sum experiment (any theorem except `trace`).
    Weyl(RunArgs),
    /// Run a trace-formula experiment.
    Trace(RunArgs),
    /// Refit an existing report CSV.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; overrides the config.
    #[arg(long)]
    jobs: Option<usize>,
    /// Reject parameters outside the proved range.
    #[arg(long, conflicts_with = "permissive")]
    strict: bool,
    /// Accept them and mark the run as exploratory.
    #[arg(long)]
    permissive: bool,
    #[arg(long)]
    seed: Option<u64>,
}

fn emit(out: Option<&Path>, name: &str, body: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        bail!("c-grid {text:?} is not lo:hi:count");
    };
    let (lo, hi): (f64, f64) = (lo.parse()?, hi.parse()?);
    let n: usize = n.parse()?;
    Ok(match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    })
}

fn experiment(args: &RunArgs, trace: bool, out: Option<&Path>) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.strict {
        cfg.strict = true;
    }
    if args.permissive {
        cfg.strict = false;
    }
    match (trace, cfg.theorem) {
        (true, t) if t != TheoremKind::Trace => {
            bail!("`trace` needs theorem = trace, found {}", t.as_str())
        }
        (false, TheoremKind::Trace) => bail!("use `trace` for theorem = trace"),
        _ => {}
    }
    let result = run(&cfg)?;
    match out {
        Some(dir) => {
            let stem = cfg
                .outputs
                .stem
                .clone()
                .unwrap_or_else(|| cfg.theorem.as_str().to_string());
            for p in result.write(dir, &stem, cfg.outputs.error_table)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => {
            print!("{}", result.csv);
            eprint!("{}", result.json);
        }
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let out = cli.out.as_deref();
    match &cli.cmd {
        Cmd::Models { json } => emit(out, "models.csv", &commands::models(*json)?),
        Cmd::Spectrum {
            model,
            k,
            h,
            emax,
            potential,
            fd,
        } => {
            let m = commands::surface(model, potential)?;
            emit(
                out,
                "spectrum.csv",
                &commands::spectrum(&m, *k, *h, *emax, *fd)?,
            )
        }
        Cmd::Reduce {
            model,
            c,
            c_grid,
            potential,
        } => {
            let m = commands::surface(model, potential)?;
            let mut cs = c.clone();
            if let Some(g) = c_grid {
                cs.extend(parse_grid(g)?);
            }
            if cs.is_empty() {
                bail!("give at least one energy with --c or --c-grid");
            }
            emit(out, "reduce.csv", &commands::reduce(&m, &cs)?)
        }
        Cmd::Weyl(args) => experiment(args, false, out),
        Cmd::Trace(args) => experiment(args, true, out),
        Cmd::Fit { csv, delta, theta } => {
            let text =
                fs::read_to_string(csv).with_context(|| format!("reading {}", csv.display()))?;
            let report = commands::fit(&text, *delta, *theta)?;
            let json = serde_json::to_string_pretty(&report.summary())? + "\n";
            emit(out, "fit.json", &json)
        }
    }
}
