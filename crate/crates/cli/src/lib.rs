//! The `paamp` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use log::LevelFilter;

use paamp::analysis::{benchmark, metrics, svg_string, validate, BenchmarkOptions, PlanDocument};
use paamp::milp::to_lp_string;
use paamp::planner::{initial_joint_plans, plan, plan_naive, PlanStatus};
use paamp::region_graph::build_graph;
use paamp::scenario::{builtin_crossing_scenario, load_scenario, Scenario};
use paamp::transcription::{build_naive_model, build_paamp_model};
use paamp::pairs::{all_pairs, relevant_pairs};
use paamp::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "paamp", version, about = "Multi-agent trajectory planning over region sequences")]
pub struct Cli {
    /// More log output on stderr (repeatable)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan trajectories and write plan.json
    Plan(PlanArgs),
    /// Time PAAMP against the naive model and write benchmark.csv
    Benchmark(BenchmarkArgs),
    /// Re-check a saved plan file against its scenario
    Validate(ValidateArgs),
    /// Write the MILP as an LP file
    ExportLp(ExportArgs),
    /// Draw the scenario, and optionally a plan, as SVG
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Crossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Paamp,
    Naive,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Paamp => "paamp",
            Mode::Naive => "naive",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario file (JSON)
    #[arg(long, value_name = "PATH", conflicts_with = "builtin", required_unless_present = "builtin")]
    pub scenario: Option<PathBuf>,

    /// Use a built-in scenario
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,

    /// Number of segments T
    #[arg(long)]
    pub steps: Option<usize>,

    /// Per-axis speed limit
    #[arg(long)]
    pub v_max: Option<f64>,

    /// Minimum separation between agents
    #[arg(long)]
    pub d_min: Option<f64>,

    /// Number of separating directions L
    #[arg(long)]
    pub directions: Option<usize>,

    /// Separation threshold per direction
    #[arg(long)]
    pub d_sep: Option<f64>,

    /// Big-M constant
    #[arg(long)]
    pub big_m: Option<f64>,

    /// Weight of the acceleration term
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Obstacle clearance
    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Absolute optimality gap
    #[arg(long)]
    pub gap: Option<f64>,

    /// Maximum refinement iterations
    #[arg(long)]
    pub k_max: Option<usize>,

    /// Candidate sequences per agent
    #[arg(long)]
    pub k_candidates: Option<usize>,

    /// Wall-clock limit in seconds
    #[arg(long)]
    pub timeout: Option<f64>,

    /// Collision rows for every pair at every step
    #[arg(long)]
    pub all_pairs: bool,

    /// Seed for randomized runs (the planner itself draws no random numbers)
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ScenarioArgs {
    pub fn load(&self) -> paamp::Result<Scenario> {
        let mut s = match (&self.scenario, self.builtin) {
            (Some(path), _) => load_scenario(path)?,
            (None, Some(Builtin::Crossing)) => builtin_crossing_scenario(),
            (None, None) => return Err(Error::InvalidInput("no scenario given".into())),
        };
        let p = &mut s.params;
        if let Some(v) = self.steps {
            p.steps = v;
        }
        if let Some(v) = self.v_max {
            p.v_max = v;
        }
        if let Some(v) = self.d_min {
            p.d_min = v;
        }
        if let Some(v) = self.directions {
            p.num_directions = v;
        }
        if self.d_sep.is_some() {
            p.d_sep = self.d_sep;
        }
        if let Some(v) = self.big_m {
            p.big_m = v;
        }
        if let Some(v) = self.alpha {
            p.alpha = v;
        }
        if let Some(v) = self.epsilon {
            p.epsilon = v;
        }
        if let Some(v) = self.gap {
            p.gap = v;
        }
        if let Some(v) = self.k_max {
            p.k_max = v;
        }
        if let Some(v) = self.k_candidates {
            p.k_candidates = v;
        }
        if let Some(v) = self.timeout {
            p.timeout_s = v;
        }
        if self.all_pairs {
            p.all_pairs = true;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Directory for output files
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Model to solve
    #[arg(long, value_enum, default_value = "paamp")]
    pub mode: Mode,

    /// Also write plan.svg
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Directory for output files
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Horizons to run
    #[arg(long, value_delimiter = ',', default_value = "12,20")]
    pub t_values: Vec<usize>,

    /// Time limit per cell in seconds
    #[arg(long, default_value_t = 300.0)]
    pub cell_limit: f64,

    /// Separation for the infeasibility probe row (0 disables it)
    #[arg(long, default_value_t = 6.0)]
    pub probe_d_min: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Plan file written by `plan`
    #[arg(long, value_name = "PATH")]
    pub plan: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Directory for output files
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Model to export
    #[arg(long, value_enum, default_value = "paamp")]
    pub mode: Mode,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Directory for output files
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Plan file to draw on top of the scenario
    #[arg(long, value_name = "PATH")]
    pub plan: Option<PathBuf>,
}

pub fn command() -> clap::Command {
    Cli::command()
}

/// Parses `argv` (program name first), runs the subcommand and returns
/// the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    let mut out = std::io::stdout().lock();
    match dispatch(&cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        2 => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::SequenceTooLong { .. }
        | Error::BadName(_)
        | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_FAILED,
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> paamp::Result<i32> {
    match cmd {
        Command::Plan(a) => cmd_plan(a, out),
        Command::Benchmark(a) => cmd_benchmark(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::ExportLp(a) => cmd_export(a, out),
        Command::Render(a) => cmd_render(a, out),
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> paamp::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}

fn cmd_plan(a: &PlanArgs, out: &mut dyn Write) -> paamp::Result<i32> {
    let scenario = a.scenario.load()?;
    let result = match a.mode {
        Mode::Paamp => plan(&scenario)?,
        Mode::Naive => plan_naive(&scenario)?,
    };
    let doc = PlanDocument::from_result(&scenario, &result, a.mode.as_str());
    let path = write_file(&a.out_dir, "plan.json", &doc.to_json_string())?;
    writeln!(out, "status: {}", result.status.as_str())?;
    writeln!(out, "iterations: {}", result.iterations)?;
    if let Some(m) = &doc.metrics {
        writeln!(out, "objective: {:.4}", m.objective)?;
        for am in &m.agents {
            writeln!(
                out,
                "agent {}: manhattan {:.4}, max acceleration {:.4}",
                am.agent, am.manhattan, am.max_acceleration
            )?;
        }
    }
    if let Some(reason) = &result.diagnostics.reason {
        writeln!(out, "reason: {reason}")?;
    }
    writeln!(out, "wrote {}", path.display())?;
    if a.svg {
        let svg = svg_string(&scenario, &result.trajectories)?;
        let path = write_file(&a.out_dir, "plan.svg", &svg)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(match result.status {
        PlanStatus::Success => EXIT_OK,
        PlanStatus::Exhausted | PlanStatus::Timeout => EXIT_FAILED,
    })
}

fn cmd_benchmark(a: &BenchmarkArgs, out: &mut dyn Write) -> paamp::Result<i32> {
    let scenario = a.scenario.load()?;
    if a.t_values.is_empty() || a.t_values.iter().any(|&t| t == 0) {
        return Err(Error::InvalidInput("--t-values needs positive horizons".into()));
    }
    if !(a.cell_limit.is_finite() && a.cell_limit > 0.0) {
        return Err(Error::InvalidInput("--cell-limit must be positive".into()));
    }
    let opts = BenchmarkOptions {
        t_values: a.t_values.clone(),
        cell_limit: Duration::from_secs_f64(a.cell_limit),
        probe_d_min: (a.probe_d_min > 0.0).then_some(a.probe_d_min),
    };
    let table = benchmark(&scenario, &opts)?;
    let path = write_file(&a.out_dir, "benchmark.csv", &table.to_csv())?;
    write!(out, "{}", table.to_text())?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> paamp::Result<i32> {
    let scenario = a.scenario.load()?;
    let text = fs::read_to_string(&a.plan)?;
    let doc = PlanDocument::from_json_str(&text, &a.plan)?;
    if doc.status != PlanStatus::Success {
        writeln!(out, "plan status is {}, nothing to check", doc.status.as_str())?;
        return Ok(EXIT_FAILED);
    }
    let report = validate(&scenario, &doc.plans, &doc.agents);
    let m = metrics(&doc.agents, scenario.params.alpha);
    for v in &report.violations {
        writeln!(
            out,
            "{:?} agents {:?} step {}: shortfall {:.3e} ({})",
            v.kind, v.agents, v.step, v.margin, v.detail
        )?;
    }
    writeln!(out, "objective: {:.4}", m.objective)?;
    if report.passed() {
        writeln!(out, "ok: {} agents, no violations", doc.agents.len())?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "failed: {} violations", report.violations.len())?;
        Ok(EXIT_FAILED)
    }
}

fn cmd_export(a: &ExportArgs, out: &mut dyn Write) -> paamp::Result<i32> {
    let scenario = a.scenario.load()?;
    let model = match a.mode {
        Mode::Naive => build_naive_model(&scenario)?.0,
        Mode::Paamp => {
            let graph = build_graph(&scenario)?;
            let Some(plans) = initial_joint_plans(&scenario, &graph)? else {
                writeln!(out, "no admissible sequence for some agent")?;
                return Ok(EXIT_FAILED);
            };
            let pairs = if scenario.params.all_pairs {
                all_pairs(plans.len(), scenario.params.steps)
            } else {
                relevant_pairs(&plans, &graph)?
            };
            build_paamp_model(&scenario, &plans, &pairs)?.0
        }
    };
    let path = write_file(&a.out_dir, "model.lp", &to_lp_string(&model)?)?;
    writeln!(
        out,
        "{} model: {} variables, {} binaries, {} constraints",
        a.mode.as_str(),
        model.num_vars(),
        model.num_binaries(),
        model.constraints.len()
    )?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

fn cmd_render(a: &RenderArgs, out: &mut dyn Write) -> paamp::Result<i32> {
    let scenario = a.scenario.load()?;
    let trajectories = match &a.plan {
        Some(p) => PlanDocument::from_json_str(&fs::read_to_string(p)?, p)?.agents,
        None => Vec::new(),
    };
    let path = write_file(&a.out_dir, "render.svg", &svg_string(&scenario, &trajectories)?)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}
