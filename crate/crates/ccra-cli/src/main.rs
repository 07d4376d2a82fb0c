//! Command-line front end: validate, unravel, tally, solve, reduce, certify,
//! gen, and bench over the canonical JSON formats.
//!
//! Exit codes: 0 on success (feasible for `solve`/`certify`), 3 when the
//! control question is infeasible, 2 on usage, parse, validation, or guard
//! errors.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use ccra::bench::{bench, rows_to_csv, BenchEntry};
use ccra::gen::{gen_random, BudgetPolicy, GenConfig};
use ccra::model::{Instance, ParseError, Redirection};
use ccra::preprocess::add_virtual_actives;
use ccra::reductions::{
    forward_certificate, parse_graph_json, parse_set_system_json, reduce_hitting_set,
    reduce_vertex_cover, HsVariant, ReductionCertificate, VcVariant,
};
use ccra::solvers::{solve, Algo, SolveOptions, DEFAULT_STEP_LIMIT};
use ccra::tally::{approval_scores, is_unique_winner};
use ccra::unravel::unravel;
use ccra::UnravelRule;

const EXIT_INFEASIBLE: u8 = 3;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "ccra", version, about = "Control by redirecting delegation arcs")]
struct Cli {
    /// Read input from this file instead of stdin.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance and report its structural parameters.
    Validate,
    /// Resolve all delegations into ballots.
    Unravel,
    /// Compute approval scores and the unique winner, if any.
    Tally,
    /// Find a cheapest redirection set making the preferred candidate win.
    Solve(SolveArgs),
    /// Generate hardness-construction instances.
    #[command(subcommand)]
    Reduce(ReduceCmd),
    /// Map a vertex cover / hitting set through a construction and check it.
    #[command(subcommand)]
    Certify(CertifyCmd),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Run a suite of instances and print a CSV report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum, default_value_t = AlgoArg::Auto)]
    algo: AlgoArg,
    /// Approximation parameter for --algo fptas.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Collapse equal approval classes before solving.
    #[arg(long)]
    preprocess: bool,
    /// Comma-separated voter names allowed as redirect targets (brute force).
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
    /// Work cap for the guarded solvers.
    #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
    step_limit: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Auto,
    Brute,
    TreeDp,
    Xp,
    Fptas,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Algo {
        match a {
            AlgoArg::Auto => Algo::Auto,
            AlgoArg::Brute => Algo::Brute,
            AlgoArg::TreeDp => Algo::TreeDp,
            AlgoArg::Xp => Algo::Xp,
            AlgoArg::Fptas => Algo::Fptas,
        }
    }
}

#[derive(Subcommand)]
enum ReduceCmd {
    /// Vertex Cover in cubic graphs -> control instance.
    Vc {
        #[arg(long, value_enum)]
        variant: VcVariantArg,
        /// Budget (the cover size threshold).
        #[arg(long)]
        k: u64,
    },
    /// Hitting Set -> control instance (threshold comes from the input).
    Hs {
        #[arg(long, value_enum)]
        variant: HsVariantArg,
    },
}

#[derive(Subcommand)]
enum CertifyCmd {
    Vc {
        #[arg(long, value_enum)]
        variant: VcVariantArg,
        #[arg(long)]
        k: u64,
        /// Comma-separated vertex names forming the cover.
        #[arg(long, value_delimiter = ',', required = true)]
        cover: Vec<String>,
    },
    Hs {
        #[arg(long, value_enum)]
        variant: HsVariantArg,
        #[arg(long, value_delimiter = ',', required = true)]
        cover: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VcVariantArg {
    MultiA,
    MultiB,
    SingleA,
    SingleB,
}

impl From<VcVariantArg> for VcVariant {
    fn from(v: VcVariantArg) -> VcVariant {
        match v {
            VcVariantArg::MultiA => VcVariant::MultiA,
            VcVariantArg::MultiB => VcVariant::MultiB,
            VcVariantArg::SingleA => VcVariant::SingleA,
            VcVariantArg::SingleB => VcVariant::SingleB,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum HsVariantArg {
    Multi,
    Single,
}

impl From<HsVariantArg> for HsVariant {
    fn from(v: HsVariantArg) -> HsVariant {
        match v {
            HsVariantArg::Multi => HsVariant::Multi,
            HsVariantArg::Single => HsVariant::Single,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 1)]
    max_out: u32,
    #[arg(long, default_value_t = 1)]
    max_ballot: u32,
    #[arg(long, default_value_t = 3)]
    max_cost: u64,
    /// Fixed budget; mutually exclusive with --budget-frac.
    #[arg(long, conflicts_with = "budget_frac")]
    budget: Option<u64>,
    /// Budget as a fraction "num/den" of the total arc cost.
    #[arg(long, default_value = "1/2")]
    budget_frac: String,
    #[arg(long, value_enum, default_value_t = RuleArg::Union)]
    rule: RuleArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Union,
    Approval,
    GreedyMrc,
}

impl From<RuleArg> for UnravelRule {
    fn from(r: RuleArg) -> UnravelRule {
        match r {
            RuleArg::Union => UnravelRule::Union,
            RuleArg::Approval => UnravelRule::Approval,
            RuleArg::GreedyMrc => UnravelRule::GreedyMrc,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
    step_limit: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let mut io = CliIo {
        input: cli.input,
        output: cli.output,
    };
    match cli.command {
        Command::Validate => validate_cmd(&mut io),
        Command::Unravel => unravel_cmd(&mut io),
        Command::Tally => tally_cmd(&mut io),
        Command::Solve(args) => solve_cmd(&mut io, args),
        Command::Reduce(cmd) => reduce_cmd(&mut io, cmd),
        Command::Certify(cmd) => certify_cmd(&mut io, cmd),
        Command::Gen(args) => gen_cmd(&mut io, args, cli.seed),
        Command::Bench(args) => bench_cmd(&mut io, args),
    }
}

struct CliIo {
    input: Option<PathBuf>,
    output: Option<PathBuf>,
}

impl CliIo {
    fn read_input(&mut self) -> Result<String> {
        match &self.input {
            Some(path) => {
                std::fs::read_to_string(path).with_context(|| format!("reading {path:?}"))
            }
            None => {
                let mut buf = String::new();
                std::io::stdin().read_to_string(&mut buf).context("reading stdin")?;
                Ok(buf)
            }
        }
    }

    fn write_output(&mut self, text: &str) -> Result<()> {
        let text = if text.ends_with('\n') {
            text.to_owned()
        } else {
            format!("{text}\n")
        };
        match &self.output {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {path:?}")),
            None => {
                std::io::stdout()
                    .write_all(text.as_bytes())
                    .context("writing stdout")
            }
        }
    }
}

fn read_instance(io: &mut CliIo) -> Result<Instance> {
    let text = io.read_input()?;
    Instance::from_json_str(&text).map_err(|e| anyhow!("{e}"))
}

fn validate_cmd(io: &mut CliIo) -> Result<u8> {
    let text = io.read_input()?;
    match Instance::from_json_str(&text) {
        Ok(instance) => {
            let out = json!({ "valid": true, "stats": instance.stats() });
            io.write_output(&serde_json::to_string_pretty(&out)?)?;
            Ok(0)
        }
        Err(ParseError::Invalid(e)) => {
            let out = json!({
                "valid": false,
                "violations": e.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            });
            io.write_output(&serde_json::to_string_pretty(&out)?)?;
            Ok(EXIT_ERROR)
        }
        Err(e) => Err(anyhow!("{e}")),
    }
}

fn unravel_cmd(io: &mut CliIo) -> Result<u8> {
    let instance = read_instance(io)?;
    let profile = unravel(&instance).map_err(|e| anyhow!("{e}"))?;
    let resolved: BTreeMap<&str, Vec<&str>> = profile
        .iter()
        .map(|(v, ballot)| {
            (
                instance.voter_name(v),
                ballot.iter().map(|&c| instance.candidate_name(c)).collect(),
            )
        })
        .collect();
    io.write_output(&serde_json::to_string_pretty(&json!({ "resolved": resolved }))?)?;
    Ok(0)
}

fn tally_cmd(io: &mut CliIo) -> Result<u8> {
    let instance = read_instance(io)?;
    let profile = unravel(&instance).map_err(|e| anyhow!("{e}"))?;
    let board = approval_scores(&profile, &instance);
    let scores: BTreeMap<&str, u64> = board
        .iter()
        .map(|(c, s)| (instance.candidate_name(c), s))
        .collect();
    let unique_winner = instance
        .candidates()
        .find(|&c| is_unique_winner(&board, c))
        .map(|c| instance.candidate_name(c).to_owned());
    let out = json!({ "scores": scores, "unique_winner": unique_winner });
    io.write_output(&serde_json::to_string_pretty(&out)?)?;
    Ok(0)
}

fn solve_cmd(io: &mut CliIo, args: SolveArgs) -> Result<u8> {
    let mut instance = read_instance(io)?;
    if args.preprocess {
        instance = add_virtual_actives(&instance).instance;
    }
    let target_whitelist = if args.targets.is_empty() {
        None
    } else {
        let mut set = BTreeSet::new();
        for name in &args.targets {
            set.insert(
                instance
                    .voter_by_name(name)
                    .ok_or_else(|| anyhow!("unknown voter `{name}` in --targets"))?,
            );
        }
        Some(set)
    };
    let options = SolveOptions {
        algo: args.algo.into(),
        epsilon: args.epsilon,
        step_limit: args.step_limit,
        target_whitelist,
    };
    let outcome = solve(&instance, &options).map_err(|e| anyhow!("{e}"))?;
    let feasible = outcome.solution.is_some();
    let out = json!({
        "feasible": feasible,
        "cost": outcome.solution.as_ref().map(|s| s.total_cost),
        "redirections": outcome.solution.as_ref().map(|s| redirections_json(&instance, &s.redirections)).unwrap_or_default(),
        "scores_after": outcome.solution.as_ref().map(|s| {
            s.resulting_scores
                .iter()
                .map(|(c, score)| (instance.candidate_name(*c).to_owned(), *score))
                .collect::<BTreeMap<String, u64>>()
        }),
        "algo": outcome.report.algo_used,
        "stats": {
            "n": outcome.report.stats.n,
            "m": outcome.report.stats.m,
            "t": outcome.report.stats.t,
            "max_out_degree": outcome.report.stats.max_out_degree,
            "guesses_explored": outcome.report.guesses_explored,
            "elapsed_ms": outcome.report.elapsed.as_millis() as u64,
            "hint": outcome.report.hint,
        },
    });
    io.write_output(&serde_json::to_string_pretty(&out)?)?;
    Ok(if feasible { 0 } else { EXIT_INFEASIBLE })
}

fn redirections_json(instance: &Instance, redirections: &[Redirection]) -> Vec<serde_json::Value> {
    redirections
        .iter()
        .map(|r| {
            let cost = instance
                .find_arc(r.from, r.old_to)
                .map(|a| instance.arc(a).cost);
            json!({
                "from": instance.voter_name(r.from),
                "old_to": instance.voter_name(r.old_to),
                "new_to": instance.voter_name(r.new_to),
                "cost": cost,
            })
        })
        .collect()
}

fn reduce_cmd(io: &mut CliIo, cmd: ReduceCmd) -> Result<u8> {
    let text = io.read_input()?;
    let (instance, _cert) = build_reduction(&text, &cmd).map_err(|e| anyhow!("{e}"))?;
    io.write_output(&instance.to_json_pretty())?;
    Ok(0)
}

fn build_reduction(
    text: &str,
    cmd: &ReduceCmd,
) -> Result<(Instance, ReductionCertificate), ccra::reductions::ReductionError> {
    match cmd {
        ReduceCmd::Vc { variant, k } => {
            let graph = parse_graph_json(text)?;
            reduce_vertex_cover(&graph, *k, (*variant).into())
        }
        ReduceCmd::Hs { variant } => {
            let system = parse_set_system_json(text)?;
            reduce_hitting_set(&system, (*variant).into())
        }
    }
}

fn certify_cmd(io: &mut CliIo, cmd: CertifyCmd) -> Result<u8> {
    let text = io.read_input()?;
    let (reduce, cover) = match cmd {
        CertifyCmd::Vc { variant, k, cover } => (ReduceCmd::Vc { variant, k }, cover),
        CertifyCmd::Hs { variant, cover } => (ReduceCmd::Hs { variant }, cover),
    };
    let (instance, cert) = build_reduction(&text, &reduce).map_err(|e| anyhow!("{e}"))?;
    let cover: BTreeSet<String> = cover.into_iter().collect();
    let redirections = forward_certificate(&cert, &cover).map_err(|e| anyhow!("{e}"))?;
    let cost = instance
        .redirection_cost(&redirections)
        .map_err(|e| anyhow!("{e}"))?;
    let applied = instance
        .apply_redirections(&redirections)
        .map_err(|e| anyhow!("{e}"))?;
    let board = approval_scores(&unravel(&applied).map_err(|e| anyhow!("{e}"))?, &applied);
    let unique = is_unique_winner(&board, applied.preferred());
    let out = json!({
        "cover": cover,
        "redirections": redirections_json(&instance, &redirections),
        "cost": cost,
        "within_budget": cost <= instance.budget(),
        "unique_winner": unique,
    });
    io.write_output(&serde_json::to_string_pretty(&out)?)?;
    Ok(if unique { 0 } else { EXIT_INFEASIBLE })
}

fn gen_cmd(io: &mut CliIo, args: GenArgs, seed: u64) -> Result<u8> {
    let budget = match args.budget {
        Some(b) => BudgetPolicy::Fixed(b),
        None => {
            let (num, den) = args
                .budget_frac
                .split_once('/')
                .ok_or_else(|| anyhow!("--budget-frac must look like \"1/2\""))?;
            BudgetPolicy::TotalCostFraction {
                num: num.trim().parse().context("fraction numerator")?,
                den: den.trim().parse().context("fraction denominator")?,
            }
        }
    };
    let cfg = GenConfig {
        n: args.n,
        m: args.m,
        max_out_degree: args.max_out,
        max_ballot_size: args.max_ballot,
        max_cost: args.max_cost,
        budget,
        rule: args.rule.into(),
        seed,
    };
    let instance = gen_random(&cfg).map_err(|e| anyhow!("{e}"))?;
    io.write_output(&instance.to_json_pretty())?;
    Ok(0)
}

#[derive(Deserialize)]
struct BenchEntryJson {
    id: String,
    #[serde(default)]
    algo: Option<String>,
    #[serde(default)]
    epsilon: Option<f64>,
    instance: serde_json::Value,
}

fn bench_cmd(io: &mut CliIo, args: BenchArgs) -> Result<u8> {
    let text = io.read_input()?;
    let raw: Vec<BenchEntryJson> = serde_json::from_str(&text).context("bench suite JSON")?;
    let mut entries = Vec::with_capacity(raw.len());
    for e in raw {
        let algo = match e.algo.as_deref() {
            None | Some("auto") => Algo::Auto,
            Some("brute") => Algo::Brute,
            Some("tree-dp") | Some("tree_dp") => Algo::TreeDp,
            Some("xp") => Algo::Xp,
            Some("fptas") => Algo::Fptas,
            Some(other) => bail!("unknown algo `{other}` in bench entry `{}`", e.id),
        };
        let instance = Instance::from_json_str(&serde_json::to_string(&e.instance)?)
            .map_err(|err| anyhow!("entry `{}`: {err}", e.id))?;
        entries.push(BenchEntry {
            id: e.id,
            instance,
            algo,
            epsilon: e.epsilon,
        });
    }
    let rows = bench(&entries, args.step_limit);
    io.write_output(&rows_to_csv(&rows))?;
    Ok(0)
}
