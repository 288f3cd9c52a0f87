use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quasiprop_core::solver::oracle_tol;
use quasiprop_core::{
    best_response, solve, AuctionInstance, BidVector, InstanceRecord, Method, PaymentRule,
    SolverConfig, StepRule, WeightSpec,
};
use quasiprop_harness::format::significant;
use quasiprop_harness::verify::{self, Verifier};
use quasiprop_harness::{run_sweep, write_csv, AlphaGrid, HarnessError, SweepSpec, WORKERS_ENV};

#[derive(Parser)]
#[command(
    name = "quasiprop",
    version,
    about = "Equilibria of quasi-proportional auctions"
)]
struct Cli {
    /// Worker threads for sweeps and verification (default: all cores).
    #[arg(long, global = true, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance for its equilibrium bids.
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the result as JSON to this path (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Best response of one bidder to the others' bids.
    BestResponse {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Current bids, comma separated, in the order of --values.
        #[arg(long, value_delimiter = ',', required = true)]
        bids: Vec<f64>,
        /// Index of the responding bidder in --values.
        #[arg(long)]
        bidder: usize,
        /// Oracle bracket width relative to max(value, 1).
        #[arg(long, default_value_t = 1e-12)]
        oracle_tol: f64,
    },
    /// Solve a grid of (alpha, 1, ..., 1) profiles and write CSV.
    Sweep(SweepArgs),
    /// Run the acceptance checks.
    Verify {
        /// Criteria to run, by number or name (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// List the criteria and exit.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// Payment rule: all_pay or winners_pay.
    rule: PaymentRule,
    /// Weight: linear, sqrt, power:<gamma>, log1p, loglog, iterlog:<k>.
    weight: WeightSpec,
    /// Bidder values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
}

impl InstanceArgs {
    fn build(&self) -> Result<AuctionInstance, HarnessError> {
        Ok(AuctionInstance::from_values(
            self.rule,
            self.values.clone(),
            self.weight,
        )?)
    }
}

#[derive(Args)]
struct SolverArgs {
    /// giga or br (best-response iteration).
    #[arg(long, default_value = "br")]
    method: Method,
    /// Target best-response gap.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<u64>,
    /// GIGA step constant: uniform, sqrt_value or value_scaled.
    #[arg(long, value_parser = parse_step_rule)]
    step_rule: Option<StepRule>,
}

impl SolverArgs {
    fn apply(&self, mut config: SolverConfig) -> SolverConfig {
        config.method = self.method;
        if let Some(t) = self.tolerance {
            config.tolerance = t;
        }
        if let Some(m) = self.max_iterations {
            config.max_iterations = m;
        }
        if let Some(s) = self.step_rule {
            config.step_rule = s;
        }
        config
    }
}

fn parse_step_rule(s: &str) -> Result<StepRule, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|e| e.to_string())
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep spec; other grid flags are ignored when given.
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// Built-in grid: allpay-two, winnerpay-two, winnerpay-many-linear, winnerpay-many-sqrt.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    rule: Option<PaymentRule>,
    #[arg(long, value_delimiter = ',')]
    weights: Vec<WeightSpec>,
    #[arg(long, default_value_t = 1.0)]
    alpha_start: f64,
    #[arg(long, default_value_t = 1e4)]
    alpha_stop: f64,
    /// Grid points (default: 25 per decade).
    #[arg(long)]
    points: Option<usize>,
    /// Bidder counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    low_value: f64,
    #[command(flatten)]
    solver: SolverArgs,
    /// CSV output path (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write the rows as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl SweepArgs {
    fn spec(&self) -> Result<SweepSpec, HarnessError> {
        if let Some(path) = &self.spec {
            return Ok(serde_json::from_reader(File::open(path)?)?);
        }
        let mut spec = match &self.preset {
            Some(name) => SweepSpec::preset(name)?,
            None => SweepSpec {
                rule: self.rule.ok_or_else(|| {
                    HarnessError::Validation("--rule is required without --spec or --preset".into())
                })?,
                weights: self.weights.clone(),
                alpha: AlphaGrid::new(self.alpha_start, self.alpha_stop, self.points),
                n: self.n.clone(),
                low_value: self.low_value,
                solver: SolverConfig::default(),
            },
        };
        spec.solver = self.solver.apply(spec.solver);
        Ok(spec)
    }
}

fn writer(path: &PathBuf) -> io::Result<Box<dyn Write>> {
    Ok(if path.as_os_str() == "-" {
        Box::new(io::stdout().lock())
    } else {
        Box::new(BufWriter::new(File::create(path)?))
    })
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter()
        .map(|&x| significant(x, 10))
        .collect::<Vec<_>>()
        .join(", ")
}

fn run_solve(
    instance: &InstanceArgs,
    solver: &SolverArgs,
    json: Option<&PathBuf>,
) -> Result<ExitCode, HarnessError> {
    let inst = instance.build()?;
    let config = solver.apply(SolverConfig::default());
    config.validate(&inst)?;
    let result = solve(&inst, &config)?;
    let profile = inst.values();
    println!("rule        {}", inst.rule());
    println!("weight      {}", inst.weight());
    println!(
        "values      {}",
        fmt_list(&profile.to_original(profile.values()))
    );
    println!(
        "bids        {}",
        fmt_list(&profile.to_original(result.bids.as_slice()))
    );
    println!("revenue     {}", significant(result.revenue, 10));
    println!("efficiency  {}", significant(result.efficiency, 10));
    println!("epsilon     {:.3e}", result.epsilon);
    println!("iterations  {} ({:?})", result.iterations, result.method);
    println!("converged   {}", result.converged);
    if let Some(path) = json {
        let record = InstanceRecord::from_instance(&inst, Some(&result.bids));
        let doc = serde_json::json!({
            "instance": record,
            "bids": profile.to_original(result.bids.as_slice()),
            "average_bids": profile.to_original(result.average_bids.as_slice()),
            "epsilon": result.epsilon,
            "revenue": result.revenue,
            "efficiency": result.efficiency,
            "iterations": result.iterations,
            "converged": result.converged,
            "method": result.method,
        });
        let mut w = writer(path)?;
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_best_response(
    instance: &InstanceArgs,
    bids: &[f64],
    bidder: usize,
    tol: f64,
) -> Result<ExitCode, HarnessError> {
    let inst = instance.build()?;
    let profile = inst.values();
    if bidder >= inst.n() {
        return Err(HarnessError::Validation(format!(
            "bidder {bidder} out of range for {} bidders",
            inst.n()
        )));
    }
    let bids = BidVector::from_original(bids, profile)?;
    let i = profile
        .original_order()
        .iter()
        .position(|&k| k == bidder)
        .expect("every caller index has a sorted position");
    let others = inst.sigma_others(&bids, i);
    let br = best_response(&inst, i, &bids, oracle_tol(&inst, i, tol))?;
    println!("best response  {}", significant(br, 12));
    println!("current bid    {}", significant(bids.get(i), 12));
    println!(
        "gain           {:.6e}",
        inst.utility_gain(i, bids.get(i), br, others)
    );
    Ok(ExitCode::SUCCESS)
}

fn run_sweep_command(args: &SweepArgs) -> Result<ExitCode, HarnessError> {
    let spec = args.spec()?;
    let rows = run_sweep(&spec)?;
    match &args.out {
        Some(path) => write_csv(&rows, writer(path)?)?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    if let Some(path) = &args.json {
        let mut w = writer(path)?;
        serde_json::to_writer_pretty(&mut w, &rows)?;
        writeln!(w)?;
    }
    let unconverged = rows.iter().filter(|r| !r.converged).count();
    if unconverged > 0 {
        eprintln!(
            "warning: {unconverged} of {} points did not certify",
            rows.len()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn run_verify(only: &[String], list: bool) -> Result<ExitCode, HarnessError> {
    if list {
        for c in verify::CRITERIA {
            println!("{:>2} {:<24} {}", c.id, c.slug, c.title);
        }
        return Ok(ExitCode::SUCCESS);
    }
    let ids = if only.is_empty() {
        verify::CRITERIA.iter().map(|c| c.id).collect()
    } else {
        only.iter()
            .map(|key| {
                verify::find(key)
                    .map(|c| c.id)
                    .ok_or_else(|| HarnessError::Validation(format!("unknown criterion {key:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    let verifier = Verifier::default();
    let mut failed = 0;
    for id in ids {
        let report = verifier.run(id);
        print!("{report}");
        io::stdout().flush()?;
        failed += !report.passed() as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        return Ok(ExitCode::from(2));
    }
    println!("all criteria passed");
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match &cli.command {
        Command::Solve {
            instance,
            solver,
            json,
        } => run_solve(instance, solver, json.as_ref()),
        Command::BestResponse {
            instance,
            bids,
            bidder,
            oracle_tol,
        } => run_best_response(instance, bids, *bidder, *oracle_tol),
        Command::Sweep(args) => run_sweep_command(args),
        Command::Verify { only, list } => run_verify(only, *list),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
