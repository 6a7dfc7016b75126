use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gridseg::attacker::{apply_segmentation, derive_effects, worst_attack_enumerate, worst_attack_milp, SegmentedForest};
use gridseg::dcopf::{check_strong_duality, solve_operator, Attack};
use gridseg::defender::{solve_with, Oracle, PlanOptions, SegmentationPlan, SolveRecord};
use gridseg::ingest::{self, instance_digest, load_instance, parse_plan, write_plan};
use gridseg::model::{DefenderBudget, Instance};
use gridseg::render::render_dot;
use gridseg::Error;

/// Exact solver for trilevel network-segmentation interdiction.
#[derive(Parser, Debug)]
#[command(name = "gridseg", version)]
struct Cli {
    /// Worker threads for plan and attack searches.
    #[arg(long, global = true, env = "GRIDSEG_WORKERS")]
    workers: Option<usize>,
    /// Print timings and search counters on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug)]
struct InstanceArgs {
    /// Grid case (MATPOWER subset or native schema).
    #[arg(long)]
    grid: PathBuf,
    /// Communication forest file.
    #[arg(long)]
    comm: PathBuf,
}

#[derive(Args, Debug)]
struct Output {
    /// Results file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// DOT rendering of the forest with the worst attack.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Best segmentation plan for a designer budget.
    Solve {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 0)]
        new_ss: usize,
        #[arg(long, default_value_t = 0)]
        new_cc: usize,
        #[arg(long, default_value_t = 0)]
        new_ba: usize,
        #[arg(long)]
        attack_budget: usize,
        #[arg(long, default_value = "enumerate")]
        oracle: Oracle,
        /// Forbid new control-center and balancing-authority enclaves without children.
        #[arg(long)]
        no_childless: bool,
        /// Write the best plan here.
        #[arg(long)]
        plan_out: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Worst attack on one plan (the unsegmented forest by default).
    Attack {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        attack_budget: usize,
        #[arg(long, default_value = "enumerate")]
        oracle: Oracle,
        #[command(flatten)]
        output: Output,
    },
    /// Operator dispatch after a given attack.
    Dcopf {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Attacked enclaves, comma separated; must be ancestor-closed.
        #[arg(long, value_delimiter = ',')]
        attack: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One solve per designer budget.
    Sweep {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Budgets as SS,CC,BA; repeat the flag for more rows.
        #[arg(long = "budget", value_parser = parse_budget, default_values = ["0,1,0", "1,0,0", "1,1,1", "0,2,0", "0,0,2"])]
        budgets: Vec<DefenderBudget>,
        #[arg(long)]
        attack_budget: usize,
        #[arg(long, default_value = "enumerate")]
        oracle: Oracle,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// DOT rendering of a forest, optionally with an attack.
    Render {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        attack: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Attack list from a comma-separated flag; blank entries are dropped so
/// `--attack ""` means the empty attack.
fn attacked(names: Vec<String>) -> Vec<String> {
    names.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn parse_budget(s: &str) -> Result<DefenderBudget, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected SS,CC,BA, got {s:?}"));
    };
    let n = |t: &str| t.parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok(DefenderBudget::new(n(a)?, n(b)?, n(c)?))
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { 1 } else { 2 };
        Failure { code, message: format!("{}: {e}", e.code()) }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 1, message: format!("{}: {e}", path.display()) }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure { code: 2, message: format!("{}: {e}", p.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(args: &InstanceArgs) -> Result<Instance, Failure> {
    Ok(load_instance(&read(&args.grid)?, &read(&args.comm)?)?)
}

fn forest_for(inst: &Instance, plan: Option<&Path>) -> Result<(SegmentationPlan, SegmentedForest), Failure> {
    let plan = match plan {
        Some(p) => parse_plan(&read(p)?)?,
        None => SegmentationPlan::identity(inst)?,
    };
    let forest = apply_segmentation(inst, &plan)?;
    Ok((plan, forest))
}

fn worst(inst: &Instance, forest: &SegmentedForest, budget: usize, oracle: Oracle) -> Result<(Attack, f64), Failure> {
    Ok(match oracle {
        Oracle::Enumerate => worst_attack_enumerate(forest, &inst.grid, budget)?,
        Oracle::Milp => worst_attack_milp(inst, forest, budget)?,
    })
}

fn log_solve(verbose: bool, rec: &SolveRecord, started: Instant) {
    if verbose {
        eprintln!(
            "budget {} U={} -> {:.6} MW over {} plans in {:.3} s",
            rec.defender_budget,
            rec.attack_budget,
            rec.load_shed,
            rec.plan_count,
            started.elapsed().as_secs_f64()
        );
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let started = Instant::now();
    match cli.cmd {
        Command::Solve { inst, new_ss, new_cc, new_ba, attack_budget, oracle, no_childless, plan_out, output } => {
            let inst = load(&inst)?;
            let opts = PlanOptions { allow_childless: !no_childless };
            let cache = gridseg::dcopf::ShedCache::new();
            let budget = DefenderBudget::new(new_ss, new_cc, new_ba);
            let (rec, stats) = solve_with(&inst, budget, attack_budget, oracle, opts, &cache)?;
            log_solve(cli.verbose, &rec, started);
            if cli.verbose {
                eprintln!("{} plans valued, {} operator solves", stats.plans_valued, stats.shed_evaluations);
            }
            if let Some(p) = plan_out {
                emit(Some(&p), &write_plan(&rec.plan))?;
            }
            if let Some(p) = &output.dot {
                let forest = apply_segmentation(&inst, &rec.plan)?;
                emit(Some(p), &render_dot(&forest, Some(&rec.attack)))?;
            }
            emit(output.out.as_deref(), &ingest::write_results(&inst.grid, &rec))
        }
        Command::Attack { inst, plan, attack_budget, oracle, output } => {
            let inst = load(&inst)?;
            let (plan, forest) = forest_for(&inst, plan.as_deref())?;
            let (attack, shed) = worst(&inst, &forest, attack_budget, oracle)?;
            if cli.verbose {
                eprintln!("worst attack {:.6} MW in {:.3} s", shed, started.elapsed().as_secs_f64());
            }
            if let Some(p) = &output.dot {
                emit(Some(p), &render_dot(&forest, Some(&attack)))?;
            }
            let text = ingest::write_attack_results(&inst.grid, &instance_digest(&inst), &plan, attack_budget, &attack, shed);
            emit(output.out.as_deref(), &text)
        }
        Command::Dcopf { inst, plan, attack, out } => {
            let inst = load(&inst)?;
            let (_, forest) = forest_for(&inst, plan.as_deref())?;
            let attack = derive_effects(&forest, &inst.grid, &attacked(attack))?;
            let (dispatch, dual) = solve_operator(&inst.grid, &attack)?;
            let gap = check_strong_duality(&inst.grid, &attack, &dispatch, &dual)?;
            if cli.verbose {
                eprintln!("strong-duality residual {gap:.3e} MW");
            }
            emit(out.as_deref(), &ingest::write_dispatch(&inst.grid, &instance_digest(&inst), &attack, &dispatch))
        }
        Command::Sweep { inst, budgets, attack_budget, oracle, out } => {
            let inst = load(&inst)?;
            let cache = gridseg::dcopf::ShedCache::new();
            let mut recs = Vec::with_capacity(budgets.len());
            for b in budgets {
                let t = Instant::now();
                let (rec, _) = solve_with(&inst, b, attack_budget, oracle, PlanOptions::default(), &cache)?;
                log_solve(cli.verbose, &rec, t);
                eprintln!("{:<12} {:>12.6} MW", rec.defender_budget.to_string(), rec.load_shed);
                recs.push(rec);
            }
            emit(out.as_deref(), &ingest::write_sweep(&inst.grid, &recs))
        }
        Command::Render { inst, plan, attack, out } => {
            let inst = load(&inst)?;
            let (_, forest) = forest_for(&inst, plan.as_deref())?;
            let attack = attacked(attack);
            let attack = if attack.is_empty() { None } else { Some(derive_effects(&forest, &inst.grid, &attack)?) };
            emit(out.as_deref(), &render_dot(&forest, attack.as_ref()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("INTERNAL_ERROR: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
