use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dimbound::commands::{self, core};
use dimbound::config::{Entry, FamilyConfig, Mode, PsiConfig, RunConfig};
use dimbound::format::{parse_grid, sig9};
use dimbound::presets;
use dimbound_core::dimension::formulas::{
    formula_counterexample, formula_diagonalizable, formula_example1, formula_hat, formula_jordan,
};
use dimbound_core::dimension::series::{critical_exponent_check, formula_1d, ASeq};
use dimbound_core::lattice::MinimaOptions;
use dimbound_core::spectra::{MatrixFamily, PsiSpec};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "dimbound", version, about = "Dimension bounds for matrix-driven shrinking-target limsup sets")]
struct Cli {
    /// Run configuration (JSON, "schema": 1).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files; results go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Seed for random sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Enumeration budget of the chosen command (preimages, cells or minima-search nodes).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-n and limsup dimension bounds for a configured family.
    Bounds {
        #[command(flatten)]
        source: Source,
        /// Print the JSON summary instead of the CSV table.
        #[arg(long)]
        json: bool,
    },
    /// Upper and lower curves for the scaled-power counterexample over a tau grid.
    Fig1 {
        /// "start:end:step" or a comma list.
        #[arg(long, default_value = "0:3:0.1")]
        taus: String,
    },
    /// The three bounds of the block example over a tau grid below l_2 - 2 l_1.
    Fig2 {
        #[arg(long, default_value_t = presets::EXAMPLE_K)]
        k: u64,
        #[arg(long)]
        taus: Option<String>,
    },
    /// Successive minima and reduced bases of A_n^{-1} Z^d.
    Lattice {
        #[arg(value_enum)]
        action: LatticeAction,
        /// Preset name or a JSON matrix such as "[[2,1],[1,1]]" (powers of it).
        #[arg(long, default_value = "fig1")]
        matrix: String,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// Closed-form dimension formulas.
    Formula {
        #[command(subcommand)]
        which: FormulaCommand,
    },
    /// Desk-scale empirical checks.
    Empirical {
        #[command(subcommand)]
        which: EmpiricalCommand,
    },
}

#[derive(Args, Clone)]
struct Source {
    /// Preset family (ignored when --config is given).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    k: Option<u64>,
    /// Overrides the exponential rate of psi.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    n0: Option<u64>,
    #[arg(long)]
    n1: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeAction {
    Minima,
    Report,
}

#[derive(Subcommand)]
enum FormulaCommand {
    /// Real Jordan form: blocks as "lambda:size,...".
    Jordan {
        #[arg(long)]
        blocks: String,
        #[arg(long)]
        tau: f64,
    },
    /// Diagonalizable over Q: eigenvalue moduli as a comma list.
    Diagonalizable {
        #[arg(long)]
        moduli: String,
        #[arg(long)]
        tau: f64,
    },
    Hat {
        #[arg(long)]
        moduli: String,
        #[arg(long)]
        tau: f64,
    },
    /// (lambda A)^n with A symmetric unimodular.
    Counterexample {
        #[arg(long, default_value_t = 5)]
        lambda: i64,
        #[arg(long, default_value = "[[2,1],[1,1]]")]
        base: String,
        #[arg(long)]
        tau: f64,
    },
    /// The block example diag(5[[2,1],[1,1]], k).
    Example1 {
        #[arg(long, default_value_t = presets::EXAMPLE_K)]
        k: u64,
        #[arg(long)]
        tau: f64,
    },
    /// One-dimensional limsup formula for a_n and psi = e^{-tau n}.
    OneD {
        #[command(flatten)]
        seq: SeqArgs,
    },
    /// Critical exponent of sum a_n (psi(n)/a_n)^s against the one-dimensional formula.
    Critical {
        #[command(flatten)]
        seq: SeqArgs,
    },
}

#[derive(Args, Clone)]
struct SeqArgs {
    /// a_n = b^n.
    #[arg(long, conflicts_with = "polynomial")]
    geometric: Option<f64>,
    /// a_n = n^p.
    #[arg(long)]
    polynomial: Option<f64>,
    /// psi(n) = e^{-tau n}.
    #[arg(long, conflicts_with = "alpha")]
    tau: Option<f64>,
    /// psi(n) = n^{-alpha}.
    #[arg(long)]
    alpha: Option<f64>,
    /// psi(n) = constant.
    #[arg(long, conflicts_with_all = ["tau", "alpha"])]
    constant: Option<f64>,
    #[arg(long, default_value_t = 4000)]
    horizon: u64,
}

#[derive(Subcommand)]
enum EmpiricalCommand {
    /// Counts F_n(y) and compares it with |det A_n|.
    Preimages {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// Direct membership in W_n(psi) against the union of enumerated ellipsoids.
    Membership {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 2)]
        n: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Box-counting slope of the truncated limsup set.
    Boxcount {
        #[command(flatten)]
        source: Source,
    },
    /// Fiber intervals of the scaled-power counterexample.
    Fiber {
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        /// Fiber coordinate as a rational.
        #[arg(long, default_value = "1/3")]
        x: String,
        #[arg(long, default_value_t = 4)]
        n0: u64,
        #[arg(long, default_value_t = 12)]
        n1: u64,
        /// Intervals aimed for in each window.
        #[arg(long, default_value_t = 4000.0)]
        target: f64,
    },
    /// Exact check that integer points stay 1/M away from a segment of quadratic-irrational slope.
    Liouville {
        /// Slope (p + q sqrt(D)) / r as "p,q,D,r".
        #[arg(long, default_value = "1,1,5,2")]
        slope: String,
        #[arg(long, default_value_t = 100)]
        m: u64,
        #[arg(long, default_value = "0,0")]
        z: String,
    },
    /// Formula N_n against a constructive parallelepiped cover.
    Covering {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1)]
        n: u64,
        /// 1-based pivot.
        #[arg(long, default_value_t = 1)]
        pivot: usize,
    },
}

fn emit(out: Option<&Path>, name: &str, content: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Config from --config, else from the preset with command-line overrides.
fn resolve(cli: &Cli, source: &Source, default_preset: &str) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?
        }
        None => {
            let name = source.preset.as_deref().unwrap_or(default_preset);
            presets::config(name, source.k).map_err(|e| anyhow!(e))?
        }
    };
    if let Some(tau) = source.tau {
        cfg.psi = PsiConfig::Exponential { tau, coefficient: 1.0 };
    }
    if let Some(n0) = source.n0 {
        cfg.n_range[0] = n0;
    }
    if let Some(n1) = source.n1 {
        cfg.n_range[1] = n1;
    }
    if let Some(mode) = cli.mode {
        cfg.mode = mode;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&RunConfig>) -> Option<PathBuf> {
    cli.out.clone().or_else(|| cfg.and_then(|c| c.output.clone()).map(PathBuf::from))
}

fn list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("not a number: {t:?}"))).collect()
}

fn parse_matrix(s: &str) -> Result<Vec<Vec<Entry>>> {
    serde_json::from_str(s).map_err(|e| anyhow!("matrix {s:?}: {e}"))
}

fn seq_inputs(seq: &SeqArgs) -> Result<(ASeq, PsiSpec)> {
    let a = match (seq.geometric, seq.polynomial) {
        (Some(b), None) => ASeq::Geometric(b),
        (None, Some(p)) => ASeq::Polynomial(p),
        _ => bail!("give exactly one of --geometric or --polynomial"),
    };
    let psi = match (seq.tau, seq.alpha, seq.constant) {
        (Some(t), None, None) => PsiSpec::exponential(t),
        (None, Some(al), None) => PsiSpec::power_law(al),
        (None, None, Some(c)) => PsiSpec::Exponential { tau: 0.0, coeff: c },
        _ => bail!("give exactly one of --tau, --alpha or --constant"),
    };
    Ok((a, psi))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Bounds { source, json: as_json } => {
            let cfg = resolve(cli, source, "diagonal")?;
            let (csv, summary) = commands::bounds(&cfg)?;
            let out = out_dir(cli, Some(&cfg));
            if out.is_some() {
                emit(out.as_deref(), "bounds.csv", &csv)?;
                emit(out.as_deref(), "bounds.json", &json(&summary)?)?;
            } else if *as_json {
                print!("{}", json(&summary)?);
            } else {
                print!("{csv}");
            }
        }
        Command::Fig1 { taus } => {
            let grid = parse_grid(taus).map_err(|e| anyhow!(e))?;
            emit(out_dir(cli, None).as_deref(), "fig1.csv", &commands::fig1_csv(&commands::fig1(&grid)?)?)?;
        }
        Command::Fig2 { k, taus } => {
            let grid = match taus {
                Some(t) => parse_grid(t).map_err(|e| anyhow!(e))?,
                None => commands::fig2_default_grid(*k),
            };
            emit(out_dir(cli, None).as_deref(), "fig2.csv", &commands::fig2_csv(&commands::fig2(*k, &grid)?)?)?;
        }
        Command::Lattice { action, matrix, k, n } => {
            let family = if matrix.trim_start().starts_with('[') {
                FamilyConfig::Power { matrix: parse_matrix(matrix)? }
                    .build(false, Default::default())
                    .map_err(|e| anyhow!(e))?
            } else {
                presets::family(matrix, *k).map_err(|e| anyhow!(e))?
            };
            let mut opts = MinimaOptions::default();
            if let Some(b) = cli.budget {
                opts.node_budget = b;
            }
            let report = commands::lattice(&family, *n, &opts)?;
            let text = match action {
                LatticeAction::Minima => serde_json::to_string(&report.minima)? + "\n",
                LatticeAction::Report => json(&report)?,
            };
            emit(out_dir(cli, None).as_deref(), "lattice.json", &text)?;
        }
        Command::Formula { which } => run_formula(which)?,
        Command::Empirical { which } => run_empirical(cli, which)?,
    }
    Ok(())
}

fn run_formula(which: &FormulaCommand) -> Result<()> {
    let value = match which {
        FormulaCommand::Jordan { blocks, tau } => {
            let blocks: Vec<(f64, usize)> = blocks
                .split(',')
                .map(|b| {
                    let (l, s) = b.split_once(':').ok_or_else(|| anyhow!("block {b:?} is not lambda:size"))?;
                    Ok((l.trim().parse::<f64>()?, s.trim().parse::<usize>()?))
                })
                .collect::<Result<_>>()?;
            core("dimension", formula_jordan(&blocks, *tau))?
        }
        FormulaCommand::Diagonalizable { moduli, tau } => core("dimension", formula_diagonalizable(&list(moduli)?, *tau))?,
        FormulaCommand::Hat { moduli, tau } => core("dimension", formula_hat(&list(moduli)?, *tau))?,
        FormulaCommand::Counterexample { lambda, base, tau } => {
            let base = FamilyConfig::ScaledPower { lambda: 1, base: parse_matrix(base)? };
            let m = match base.build(false, Default::default()) {
                Ok(MatrixFamily { kind: dimbound_core::spectra::FamilyKind::ScaledPower { base, .. }, .. }) => base,
                Ok(_) => unreachable!("scaled power config builds a scaled power family"),
                Err(e) => bail!("dimension: invalid counterexample family: {e}"),
            };
            core("dimension", formula_counterexample(*lambda, &m, *tau))?.value
        }
        FormulaCommand::Example1 { k, tau } => core("dimension", formula_example1(*k, *tau))?.value,
        FormulaCommand::OneD { seq } => {
            let (a, psi) = seq_inputs(seq)?;
            let f = core("dimension", formula_1d(&a, &psi, seq.horizon))?;
            print!(
                "{}",
                json(&serde_json::json!({
                    "value": f.value, "alpha": f.alpha, "exact": f.exact, "lower_bound_only": f.lower_bound_only
                }))?
            );
            return Ok(());
        }
        FormulaCommand::Critical { seq } => {
            let (a, psi) = seq_inputs(seq)?;
            let c = core("dimension", critical_exponent_check(&a, &psi, seq.horizon))?;
            print!(
                "{}",
                json(&serde_json::json!({
                    "formula": c.formula, "exponent": c.exponent, "agree": c.agree,
                    "bracket": [c.bracket.0, c.bracket.1], "notes": c.notes
                }))?
            );
            return Ok(());
        }
    };
    println!("{}", sig9(value));
    Ok(())
}

fn run_empirical(cli: &Cli, which: &EmpiricalCommand) -> Result<()> {
    match which {
        EmpiricalCommand::Preimages { source, n } => {
            let cfg = resolve(cli, source, "fig1")?;
            let family = cfg.family().map_err(|e| anyhow!(e))?;
            let budget = cli.budget.unwrap_or(cfg.budgets.preimages);
            let r = commands::preimages(&family, *n, &vec![0.0; family.d], budget)?;
            emit(out_dir(cli, Some(&cfg)).as_deref(), "preimages.json", &json(&r)?)?;
        }
        EmpiricalCommand::Membership { source, n, samples } => {
            let cfg = resolve(cli, source, "fig1")?;
            let family = cfg.family().map_err(|e| anyhow!(e))?;
            let budget = cli.budget.unwrap_or(cfg.budgets.preimages);
            let y = vec![0.0; family.d];
            let r = commands::membership(&family, &cfg.psi_spec(), *n, &y, *samples, cfg.seed, budget)?;
            emit(out_dir(cli, Some(&cfg)).as_deref(), "membership.json", &json(&r)?)?;
        }
        EmpiricalCommand::Boxcount { source } => {
            let cfg = resolve(cli, source, "cor18")?;
            let family = cfg.family().map_err(|e| anyhow!(e))?;
            let y = vec![0.0; family.d];
            let (csv, summary) = commands::boxcount(&family, &cfg.psi_spec(), &y, (cfg.n_range[0], cfg.n_range[1]))?;
            let out = out_dir(cli, Some(&cfg));
            if out.is_some() {
                emit(out.as_deref(), "boxcount.csv", &csv)?;
            }
            emit(out.as_deref(), "boxcount.json", &json(&summary)?)?;
        }
        EmpiricalCommand::Fiber { tau, x, n0, n1, target } => {
            let r = commands::fiber(*tau, x, (*n0, *n1), *target)?;
            emit(out_dir(cli, None).as_deref(), "fiber.json", &json(&r)?)?;
        }
        EmpiricalCommand::Liouville { slope, m, z } => {
            let p: Vec<i64> = slope.split(',').map(|t| t.trim().parse()).collect::<Result<_, _>>()?;
            let zv: Vec<i64> = z.split(',').map(|t| t.trim().parse()).collect::<Result<_, _>>()?;
            let (Ok(pqdr), [z0, z1]) = (<[i64; 4]>::try_from(p), zv.as_slice()) else {
                bail!("--slope needs four integers and --z two");
            };
            let r = commands::liouville(pqdr, *m, (*z0, *z1))?;
            emit(out_dir(cli, None).as_deref(), "liouville.json", &json(&r)?)?;
        }
        EmpiricalCommand::Covering { source, n, pivot } => {
            let cfg = resolve(cli, source, "diagonal")?;
            let family = cfg.family().map_err(|e| anyhow!(e))?;
            let r = commands::covering(&family, &cfg.psi_spec(), *n, *pivot)?;
            emit(out_dir(cli, Some(&cfg)).as_deref(), "covering.json", &json(&r)?)?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn argument_table_is_consistent() {
        super::Cli::command().debug_assert();
    }
}
