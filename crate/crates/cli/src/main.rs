//! `rce`: command-line front end for rce-core.
//!
//! Exit codes: 0 success, 1 infeasible RCE answer, 2 usage, parse or file
//! error, 3 search budget exceeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rce_core::codec::{format_election, format_instance, read_election, read_instance};
use rce_core::exact::{enumerate_winners, DEFAULT_BUDGET};
use rce_core::experiment::{
    manifest_path, run_exp1, run_exp2, run_exp3, write_csv, Experiment, ExperimentConfig,
    Manifest, Preset,
};
use rce_core::greedy::{greedy_enumerate, greedy_run, TiePolicy};
use rce_core::reduction::{read_graph, reduce_is_to_rce, reduction_weights};
use rce_core::sampler::{perturb, sample_with_positions, ChangeOp, ChangeSpec, Model, SamplerSpec};
use rce_core::score::thiele_score;
use rce_core::solve::{committee_wins, solve, Solver};
use rce_core::{Committee, Error, RuleSpec};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "rce", version, about = "Committee elections under approval changes")]
struct Cli {
    /// Rule: av, pav, cc or owa=<w1,w2,...>, optionally prefixed by greedy-
    #[arg(long, global = true)]
    rule: Option<String>,
    /// Base seed; required by randomized subcommands
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (default: standard output)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress informational messages on standard error
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Thiele score of a committee
    Score {
        #[arg(long)]
        election: PathBuf,
        /// Candidate indices, comma or space separated
        #[arg(long)]
        committee: String,
    },
    /// All winning committees of size k
    Winners {
        #[arg(long)]
        election: PathBuf,
        #[arg(short)]
        k: usize,
        /// Most committees to list for greedy rules
        #[arg(long, default_value_t = 1000)]
        limit: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Greedy run with lexicographic tie-breaking, or tied outcomes
    Greedy {
        #[arg(long)]
        election: PathBuf,
        #[arg(short)]
        k: usize,
        /// List up to this many distinct committees over all tie-breaks
        #[arg(long)]
        enumerate: Option<usize>,
    },
    /// Closest winner after the change
    SolveRce {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "auto")]
        solver: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
        /// Skip checking that the committee wins the election before the change
        #[arg(long)]
        no_check: bool,
    },
    /// Sample a random election (.app)
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(short, default_value_t = 1000)]
        n: usize,
        #[arg(short, default_value_t = 100)]
        m: usize,
        /// Also write voter and candidate positions (Euclidean models)
        #[arg(long)]
        positions: Option<PathBuf>,
    },
    /// Random approval additions and removals
    Perturb {
        #[arg(long)]
        election: PathBuf,
        #[arg(long, value_enum)]
        op: OpArg,
        /// Change size in percent of all approvals
        #[arg(long, conflicts_with = "r", required_unless_present = "r")]
        pct: Option<f64>,
        /// Change size as a count of approval flips
        #[arg(long)]
        r: Option<usize>,
    },
    /// RCE instance from an independent-set instance
    ReduceIs {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        kappa: usize,
    },
    /// Distance between lexicographic winners under random changes
    Exp1(ExpArgs),
    /// Lexicographic vs closest of the tied winners
    Exp2(ExpArgs),
    /// Replacement rate of each committee member by round
    Exp3(ExpArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
    Res,
    #[value(name = "1d+res")]
    OneDRes,
    #[value(name = "2d+res")]
    TwoDRes,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Approval radius (default 0.051 in 1D, 0.195 in 2D)
    #[arg(long)]
    tau: Option<f64>,
    /// Approval probability of the resampling model
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Resampling probability (default 0.75, or 0.1 with Euclidean positions)
    #[arg(long)]
    phi: Option<f64>,
}

impl ModelArgs {
    fn model(&self) -> Model {
        let tau = |dim| self.tau.unwrap_or(if dim == 1 { 0.051 } else { 0.195 });
        match self.model {
            ModelKind::OneD => Model::OneD { radius: tau(1) },
            ModelKind::TwoD => Model::TwoD { radius: tau(2) },
            ModelKind::Res => Model::Resampling {
                p: self.p,
                phi: self.phi.unwrap_or(0.75),
            },
            ModelKind::OneDRes | ModelKind::TwoDRes => {
                let dim = if matches!(self.model, ModelKind::OneDRes) { 1 } else { 2 };
                Model::EuclidResampling {
                    dim,
                    radius: tau(dim),
                    phi: self.phi.unwrap_or(0.1),
                }
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Add,
    Remove,
    Mix,
}

impl From<OpArg> for ChangeOp {
    fn from(op: OpArg) -> Self {
        match op {
            OpArg::Add => ChangeOp::Add,
            OpArg::Remove => ChangeOp::Remove,
            OpArg::Mix => ChangeOp::Mix,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Full,
}

#[derive(Args)]
struct ExpArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "desk")]
    preset: PresetArg,
    /// Override the preset's number of base elections
    #[arg(long)]
    elections: Option<usize>,
    /// Override the preset's trials per point
    #[arg(long)]
    trials: Option<usize>,
    #[arg(short, default_value_t = 1000)]
    n: usize,
    #[arg(short, default_value_t = 100)]
    m: usize,
    #[arg(short, default_value_t = 10)]
    k: usize,
    /// Change sizes in percent, comma separated (default: the experiment's schedule)
    #[arg(long, value_delimiter = ',')]
    pcts: Option<Vec<f64>>,
    /// Operations for experiment 1 (default: all)
    #[arg(long, value_enum, value_delimiter = ',')]
    ops: Option<Vec<OpArg>>,
    /// Tied winners explored per trial in experiment 2
    #[arg(long)]
    cap: Option<usize>,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type Outcome = std::result::Result<u8, Failure>;

struct Ctx {
    rule: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Ctx {
    fn rule(&self) -> std::result::Result<RuleSpec, Failure> {
        let text = self.rule.as_deref().ok_or_else(|| usage("this subcommand needs --rule"))?;
        Ok(text.parse()?)
    }

    fn seed(&self) -> std::result::Result<u64, Failure> {
        self.seed.ok_or_else(|| usage("this subcommand is randomized and needs --seed"))
    }

    fn emit(&self, text: &str) -> std::result::Result<(), Failure> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn info(&self, text: &str) {
        if !self.quiet {
            eprintln!("{text}");
        }
    }
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Runs a file loader, naming the file in I/O and parse errors.
fn load<T>(path: &Path, f: impl FnOnce(PathBuf) -> rce_core::Result<T>) -> std::result::Result<T, Failure> {
    f(path.to_path_buf()).map_err(|e| {
        let mut fail = Failure::from(e);
        fail.message = format!("{}: {}", path.display(), fail.message);
        fail
    })
}

fn parse_committee(text: &str) -> std::result::Result<Committee, Failure> {
    let indices = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| usage(format!("bad candidate index `{t}`"))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Committee::from_indices(&indices)?)
}

fn indices(c: &Committee) -> String {
    c.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Outcome {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage(format!("thread pool: {e}")))?;
    }
    let ctx = Ctx {
        rule: cli.rule,
        seed: cli.seed,
        out: cli.out,
        quiet: cli.quiet,
    };
    match cli.cmd {
        Cmd::Score { election, committee } => {
            let spec = ctx.rule()?;
            let e = load(&election, read_election)?;
            let s = parse_committee(&committee)?;
            let w = spec.rule.weights(s.len())?;
            let score = thiele_score(&e, &s, &w)?;
            ctx.emit(&format!("{}\n", score.value()))?;
            Ok(0)
        }
        Cmd::Winners { election, k, limit, budget } => {
            let spec = ctx.rule()?;
            let e = load(&election, read_election)?;
            let w = spec.rule.weights(k)?;
            let mut text = String::new();
            if spec.greedy {
                if limit == 0 {
                    return Err(usage("--limit must be at least 1"));
                }
                let found = greedy_enumerate(&e, k, &w, limit, None)?;
                for c in &found.committees {
                    let _ = writeln!(text, "{}", indices(c));
                }
                if found.truncated {
                    ctx.info(&format!("stopped after {limit} committees"));
                }
            } else {
                let winners = enumerate_winners(&e, k, &w, budget)?;
                let score = thiele_score(&e, &winners[0], &w)?;
                ctx.info(&format!("score {}", score.value()));
                for c in &winners {
                    let _ = writeln!(text, "{}", indices(c));
                }
            }
            ctx.emit(&text)?;
            Ok(0)
        }
        Cmd::Greedy { election, k, enumerate } => {
            let spec = ctx.rule()?;
            let e = load(&election, read_election)?;
            let w = spec.rule.weights(k)?;
            let mut text = String::new();
            match enumerate {
                Some(cap) => {
                    let found = greedy_enumerate(&e, k, &w, cap.max(1), None)?;
                    for c in &found.committees {
                        let _ = writeln!(text, "{}", indices(c));
                    }
                    if found.truncated {
                        ctx.info(&format!("stopped after {cap} committees"));
                    }
                }
                None => {
                    let run = greedy_run(&e, k, &w, &TiePolicy::Lexicographic)?;
                    let _ = writeln!(text, "round candidate marginal ties");
                    for (r, c) in run.order.iter().enumerate() {
                        let ties: Vec<String> =
                            run.tie_sets[r].iter().map(|t| t.to_string()).collect();
                        let gain = w.to_rational(run.round_marginals[r]);
                        let _ = writeln!(text, "{} {c} {gain} {}", r + 1, ties.join(","));
                    }
                    let _ = writeln!(text, "committee {}", indices(&run.committee()));
                }
            }
            ctx.emit(&text)?;
            Ok(0)
        }
        Cmd::SolveRce { instance, solver, budget, no_check } => {
            let spec = ctx.rule()?;
            let solver: Solver = solver.parse()?;
            let inst = load(&instance, read_instance)?;
            if !no_check && !committee_wins(&inst.before, &inst.committee, &spec, budget)? {
                return Err(usage(format!(
                    "committee {} does not win the election before the change under {spec}",
                    indices(&inst.committee)
                )));
            }
            let (used, answer) = solve(&inst, &spec, solver, budget)?;
            let mut text = String::new();
            let _ = writeln!(text, "solver {used}");
            let _ = writeln!(text, "feasible {}", if answer.feasible { "yes" } else { "no" });
            if let Some(d) = answer.min_distance {
                let _ = writeln!(text, "min_distance {d}");
            }
            if let Some(w) = &answer.witness {
                let _ = writeln!(text, "witness {}", indices(w));
            }
            ctx.emit(&text)?;
            Ok(if answer.feasible { 0 } else { 1 })
        }
        Cmd::Sample { model, n, m, positions } => {
            let seed = ctx.seed()?;
            let spec = SamplerSpec {
                model: model.model(),
                n,
                m,
                seed,
            };
            let (e, pos) = sample_with_positions(&spec)?;
            ctx.emit(&format_election(&e))?;
            if let Some(path) = positions {
                let pos = pos.ok_or_else(|| usage("the resampling model has no positions"))?;
                write_file(&path, &pos.to_text())?;
            }
            Ok(0)
        }
        Cmd::Perturb { election, op, pct, r } => {
            let seed = ctx.seed()?;
            let e = load(&election, read_election)?;
            let op = ChangeOp::from(op);
            let change = match (pct, r) {
                (Some(p), _) => {
                    if !(0.0..=100.0).contains(&p) {
                        return Err(usage(format!("--pct {p} outside [0, 100]")));
                    }
                    ChangeSpec::from_fraction(op, &e, p / 100.0)
                }
                (None, Some(r)) => ChangeSpec { op, r },
                (None, None) => return Err(usage("need --pct or --r")),
            };
            let after = perturb(&e, change, seed)?;
            ctx.info(&format!("{op}: {} added, {} removed", change.adds(), change.removes()));
            ctx.emit(&format_election(&after))?;
            Ok(0)
        }
        Cmd::ReduceIs { graph, kappa } => {
            let spec = ctx.rule()?;
            if spec.greedy {
                return Err(usage("the reduction targets non-greedy rules"));
            }
            let g = load(&graph, read_graph)?;
            let w = reduction_weights(&spec.rule, kappa)?;
            let red = reduce_is_to_rce(&g, kappa, &w)?;
            ctx.info(&format!(
                "t = {}, k = {}, dummies {}, padding {}",
                red.t,
                red.instance.k,
                red.dummies.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
                red.padding.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","),
            ));
            ctx.emit(&format_instance(&red.instance))?;
            Ok(0)
        }
        Cmd::Exp1(args) => experiment(&ctx, Experiment::Exp1, args),
        Cmd::Exp2(args) => experiment(&ctx, Experiment::Exp2, args),
        Cmd::Exp3(args) => experiment(&ctx, Experiment::Exp3, args),
    }
}

fn experiment(ctx: &Ctx, which: Experiment, args: ExpArgs) -> Outcome {
    let spec = ctx.rule()?;
    let seed = ctx.seed()?;
    let preset = match args.preset {
        PresetArg::Desk => Preset::Desk,
        PresetArg::Full => Preset::Full,
    };
    let mut cfg = ExperimentConfig::new(which, spec, args.model.model(), preset, seed);
    cfg.n = args.n;
    cfg.m = args.m;
    cfg.k = args.k;
    if let Some(x) = args.elections {
        cfg.num_elections = x;
    }
    if let Some(x) = args.trials {
        cfg.trials = x;
    }
    if let Some(p) = args.pcts {
        cfg.pcts = p.iter().map(|x| x / 100.0).collect();
    }
    if let Some(ops) = args.ops {
        cfg.ops = ops.into_iter().map(ChangeOp::from).collect();
    }
    if let Some(cap) = args.cap {
        cfg.cap = cap;
    }
    cfg.validate()?;
    match which {
        Experiment::Exp1 => {
            let out = run_exp1(&cfg)?;
            finish(ctx, &cfg, &out.rows, &out.skipped)
        }
        Experiment::Exp2 => {
            let out = run_exp2(&cfg)?;
            finish(ctx, &cfg, &out.rows, &out.skipped)
        }
        Experiment::Exp3 => {
            let out = run_exp3(&cfg)?;
            finish(ctx, &cfg, &out.rows, &out.skipped)
        }
    }
}

fn finish<R: Serialize>(
    ctx: &Ctx,
    cfg: &ExperimentConfig,
    rows: &[R],
    skipped: &[rce_core::experiment::SkippedTrial],
) -> Outcome {
    let manifest = Manifest::new(cfg, rows.len(), skipped).to_json();
    match &ctx.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            write_csv(std::io::BufWriter::new(file), rows)?;
            let mpath = manifest_path(path);
            write_file(&mpath, &manifest)?;
            ctx.info(&format!("{} rows, manifest {}", rows.len(), mpath.display()));
        }
        None => {
            write_csv(std::io::stdout().lock(), rows)?;
            ctx.info(&format!("{} rows; no manifest without --out", rows.len()));
        }
    }
    if !skipped.is_empty() {
        ctx.info(&format!("{} trials skipped", skipped.len()));
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
