use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use teamflat::analysis::{self, Universe, UniverseConfig};
use teamflat::experiments::{self, Settings, Status};
use teamflat::{
    automorphisms, check_magma_hypothesis, eval_with_stats, flatten, gen_a, gen_b, gen_cycle, parse,
    simplify_f, EvalBudget, ExclusionMode, Formula, PropertyReport, Strategy, Structure, Team,
};

#[derive(Parser)]
#[command(name = "teamflat", version, about = "Model checking for team logics with the flattening operator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula on a team.
    Eval {
        /// Model file.
        model: PathBuf,
        formula: String,
        /// Team file; without it the team holding only the empty assignment is used.
        #[arg(long, conflicts_with = "empty_team")]
        team: Option<PathBuf>,
        /// Evaluate on the team holding only the empty assignment (sentences).
        #[arg(long)]
        empty_team: bool,
        #[command(flatten)]
        opts: EvalOpts,
    },
    /// Check a property over the generated universe of small structures.
    Check {
        /// flat, dc, uc, df, uf, ept, coherent:N, equiv or entails.
        property: String,
        formulas: Vec<String>,
        #[command(flatten)]
        opts: EvalOpts,
        #[command(flatten)]
        universe: UniverseOpts,
    },
    /// Write a model file for a graph family: cycle:L, A:n or B:n.
    Gen {
        family: String,
        /// Directed edges for cycle:L.
        #[arg(long)]
        directed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the flattening of a formula.
    Flatten {
        formula: String,
        #[arg(long = "exclusion-flattening", default_value = "top")]
        exclusion: ExclusionMode,
    },
    /// Push F inward with the atom rules.
    SimplifyF { formula: String },
    /// List the automorphisms of a model.
    Automorphisms {
        model: PathBuf,
        /// Largest domain to search.
        #[arg(long, default_value_t = teamflat::structure::AUTOMORPHISM_DOMAIN_CAP)]
        cap: usize,
    },
    /// Run the reproduction experiments.
    Experiments {
        /// `all` or one experiment id.
        #[arg(long, default_value = "all")]
        select: String,
        /// Write the machine-readable report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// List experiment ids with citations.
        #[arg(long)]
        list: bool,
        #[arg(long = "exclusion-flattening", default_value = "top")]
        exclusion: ExclusionMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        opts: EvalOpts,
        #[command(flatten)]
        universe: UniverseOpts,
    },
}

#[derive(Args)]
struct EvalOpts {
    #[arg(long, default_value = "optimized")]
    strategy: Strategy,
    #[arg(long)]
    budget_rows: Option<usize>,
    #[arg(long)]
    budget_branches: Option<u64>,
    #[arg(long)]
    timeout_ms: Option<u64>,
}

impl EvalOpts {
    fn budget(&self) -> EvalBudget {
        let mut b = EvalBudget::default();
        if let Some(r) = self.budget_rows {
            b.max_rows = r;
        }
        if let Some(n) = self.budget_branches {
            b.max_branches = n;
        }
        b.timeout = self.timeout_ms.map(Duration::from_millis);
        b
    }
}

#[derive(Args)]
struct UniverseOpts {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    universe_max_domain: u8,
    /// Relation interpretations per domain size.
    #[arg(long)]
    universe_structures: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn truth(b: bool) -> ExitCode {
    ExitCode::from(if b { 0 } else { 1 })
}

fn run(command: Command) -> Res<ExitCode> {
    match command {
        Command::Eval {
            model,
            formula,
            team,
            empty_team: _,
            opts,
        } => {
            let s = Structure::parse(&read(&model)?)?;
            let phi = parse(&formula)?;
            let x = match team {
                Some(path) => Team::parse(&read(&path)?, &s)?,
                None => Team::unit(),
            };
            let (v, stats) = eval_with_stats(&s, &x, &phi, opts.strategy, &opts.budget())?;
            println!("{v}");
            println!(
                "strategy {}: {} branches, {} cache hits, {} cache misses",
                opts.strategy, stats.branches, stats.cache_hits, stats.cache_misses
            );
            Ok(truth(v))
        }
        Command::Check {
            property,
            formulas,
            opts,
            universe,
        } => {
            let phis = formulas.iter().map(|f| parse(f)).collect::<Result<Vec<_>, _>>()?;
            let report = check(&property, &phis, &opts, &universe)?;
            print!("{report}");
            Ok(truth(report.holds()))
        }
        Command::Gen { family, directed, out } => {
            let s = generate(&family, directed)?;
            let text = s.to_model_text();
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Flatten { formula, exclusion } => {
            println!("{}", flatten(&parse(&formula)?, exclusion)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::SimplifyF { formula } => {
            println!("{}", simplify_f(&parse(&formula)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Automorphisms { model, cap } => {
            let s = Structure::parse(&read(&model)?)?;
            let maps = automorphisms(&s, cap)?;
            for m in &maps {
                println!("{m}");
            }
            let magma = check_magma_hypothesis(&s, &maps)?;
            eprintln!(
                "{} automorphisms; magma hypothesis {}",
                maps.len(),
                if magma.holds() { "holds" } else { "fails" }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiments {
            select,
            report,
            list,
            exclusion,
            seed,
            opts,
            universe,
        } => {
            if list {
                for e in experiments::catalog() {
                    println!("{}\t{}", e.id, e.citation);
                }
                return Ok(ExitCode::SUCCESS);
            }
            let mut settings = Settings {
                strategy: opts.strategy,
                budget: opts.budget(),
                exclusion,
                max_domain: universe.universe_max_domain as usize,
                seed,
                ..Settings::default()
            };
            if let Some(n) = universe.universe_structures {
                settings.structures_per_size = n;
            }
            run_experiments(&select, report.as_deref(), &settings)
        }
    }
}

fn run_experiments(select: &str, report: Option<&Path>, settings: &Settings) -> Res<ExitCode> {
    let outcomes = experiments::run_selected(Some(select), settings)?;
    let body: String = outcomes.iter().map(|o| o.record() + "\n").collect();
    match report {
        Some(path) => fs::write(path, &body).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{body}"),
    }
    let mut failed = 0;
    for o in &outcomes {
        eprintln!("{:<24} {:<12} {:>8.2}s", o.id, o.status.to_string(), o.elapsed.as_secs_f64());
        failed += usize::from(o.status == Status::Fail);
    }
    eprintln!("{} experiments, {failed} failed", outcomes.len());
    Ok(if failed > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn check(property: &str, phis: &[Formula], opts: &EvalOpts, u: &UniverseOpts) -> Res<PropertyReport> {
    let mut config = UniverseConfig {
        max_domain: u.universe_max_domain as usize,
        strategy: opts.strategy,
        budget: opts.budget(),
        ..UniverseConfig::default()
    };
    if let Some(n) = u.universe_structures {
        config.structures_per_size = n;
    }
    let refs: Vec<&Formula> = phis.iter().collect();
    let universe = Universe::for_formulas(&config, &refs)?;
    let arity = if matches!(property, "equiv" | "entails") { 2 } else { 1 };
    if phis.len() != arity {
        return Err(format!("{property} takes {arity} formula(s), got {}", phis.len()).into());
    }
    let phi = &phis[0];
    let report = match property {
        "flat" => analysis::is_flat(phi, &universe)?,
        "dc" => analysis::is_downwards_closed(phi, &universe)?,
        "uc" => analysis::is_union_closed(phi, &universe)?,
        "df" => analysis::is_downwards_flat(phi, &universe)?,
        "uf" => analysis::is_upwards_flat(phi, &universe)?,
        "ept" => analysis::has_empty_team_property(phi, &universe)?,
        "equiv" => analysis::equivalent(phi, &phis[1], &universe)?,
        "entails" => analysis::entails(phi, &phis[1], &universe)?,
        other => match other.strip_prefix("coherent:").map(str::parse::<usize>) {
            Some(Ok(n)) => analysis::is_n_coherent(phi, n, &universe)?,
            _ => return Err(format!("unknown property {other}").into()),
        },
    };
    Ok(report)
}

fn generate(family: &str, directed: bool) -> Res<Structure> {
    let (kind, arg) = family
        .split_once(':')
        .ok_or_else(|| format!("family must look like cycle:L, A:n or B:n, got {family}"))?;
    let n: u32 = arg.parse().map_err(|_| format!("bad size in {family}"))?;
    Ok(match kind {
        "cycle" => gen_cycle(n as usize, !directed)?,
        "A" => gen_a(n)?,
        "B" => gen_b(n)?,
        _ => return Err(format!("unknown family {kind}").into()),
    })
}
