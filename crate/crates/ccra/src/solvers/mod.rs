//! The solver suite: exhaustive oracle, tree DP, the single-delegation /
//! single-approval polynomial algorithm, the XP algorithm in the number of
//! active voters, and the approximation scheme for the special setting.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::model::{ApplyError, Cost, Instance, InstanceStats, Solution, VoterId};
use crate::preprocess::add_virtual_actives;
use crate::unravel::UnravelError;

mod brute;
mod forest;
mod fptas;
mod single_single;
mod tree_dp;
mod xp;

pub use brute::{solve_brute_force, BruteOptions};
pub use fptas::{is_special_setting, solve_fptas};
pub use single_single::solve_single_single;
pub use tree_dp::{max_votes_under_budget, tree_min_cost_arrays, VoteArrays};
pub use xp::{multi_target_table, solve_xp_active, MultiTargetTable};

pub(crate) use forest::{Forest, Tree};

/// Default cap on enumeration work (elementary steps) for the guarded
/// solvers.
pub const DEFAULT_STEP_LIMIT: u64 = 100_000_000;

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("enumeration space (~{estimate} steps) exceeds the limit of {limit}")]
    InstanceTooLarge { estimate: u128, limit: u64 },
    #[error("guess space (~{estimate} steps) exceeds the limit of {limit}")]
    GuessSpaceTooLarge { estimate: u128, limit: u64 },
    #[error("solver requires out-degree at most one everywhere")]
    NotSingleDelegation,
    #[error("solver requires every ballot to have exactly one candidate")]
    NotSingleApproval,
    #[error("voter `{0}` is not an active voter")]
    NotActiveRoot(String),
    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("not in the special setting: exactly one active ballot may equal {{preferred}} and no other active ballot may contain it")]
    NotSpecialSetting,
    #[error(transparent)]
    Apply(#[from] ApplyError),
    #[error(transparent)]
    Unravel(#[from] UnravelError),
}

impl SolveError {
    /// Stable short code, used by the bench report and the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            SolveError::InstanceTooLarge { .. } => "instance_too_large",
            SolveError::GuessSpaceTooLarge { .. } => "guess_space_too_large",
            SolveError::NotSingleDelegation => "not_single_delegation",
            SolveError::NotSingleApproval => "not_single_approval",
            SolveError::NotActiveRoot(_) => "not_active_root",
            SolveError::InvalidEpsilon(_) => "invalid_epsilon",
            SolveError::NotSpecialSetting => "not_special_setting",
            SolveError::Apply(_) => "apply_error",
            SolveError::Unravel(_) => "unravel_error",
        }
    }
}

/// The parameters of the winning guess, for inspection and reporting.
#[derive(Debug, Clone, PartialEq)]
pub enum GuessLedger {
    /// Votes moved between trees, keyed by `(source root, target root)`.
    Xp {
        votes_moved: BTreeMap<(VoterId, VoterId), u32>,
    },
    /// Max-edge-cost guess plus the per-tree geometric budgets.
    Fptas {
        max_edge_cost: Cost,
        epsilon: f64,
        tree_budgets: BTreeMap<VoterId, Cost>,
    },
}

/// Result of one solver invocation.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub solution: Option<Solution>,
    /// Enumeration nodes / guesses evaluated, for reporting.
    pub guesses_explored: u64,
    pub winning_guess: Option<GuessLedger>,
}

impl SolverRun {
    pub(crate) fn new(solution: Option<Solution>, guesses_explored: u64) -> Self {
        SolverRun {
            solution,
            guesses_explored,
            winning_guess: None,
        }
    }
}

/// Algorithm selector for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Auto,
    Brute,
    TreeDp,
    Xp,
    Fptas,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Auto => "auto",
            Algo::Brute => "brute",
            Algo::TreeDp => "tree_dp",
            Algo::Xp => "xp",
            Algo::Fptas => "fptas",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub algo: Algo,
    /// Approximation parameter, required by [`Algo::Fptas`].
    pub epsilon: Option<f64>,
    /// Work cap for the guarded solvers.
    pub step_limit: u64,
    /// Restricts brute-force redirect targets.
    pub target_whitelist: Option<std::collections::BTreeSet<VoterId>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            algo: Algo::Auto,
            epsilon: None,
            step_limit: DEFAULT_STEP_LIMIT,
            target_whitelist: None,
        }
    }
}

/// What `solve` did and how much work it took.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub algo_used: &'static str,
    pub guesses_explored: u64,
    pub elapsed: Duration,
    pub stats: InstanceStats,
    pub winning_guess: Option<GuessLedger>,
    /// Advisory note, e.g. that the approximation scheme applies.
    pub hint: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Option<Solution>,
    pub report: SolveReport,
}

/// Solves an instance with the requested algorithm, or dispatches on the
/// instance's structural parameters in auto mode: single-delegation with
/// singleton ballots goes to the tree DP, single-delegation with few active
/// voters after preprocessing goes to the XP solver, everything else falls
/// back to guarded enumeration.
pub fn solve(instance: &Instance, options: &SolveOptions) -> Result<SolveOutcome, SolveError> {
    let start = Instant::now();
    let stats = *instance.stats();
    let single_delegation = stats.max_out_degree <= 1;
    let singleton_ballots = single_delegation
        && instance
            .active_voters()
            .all(|v| instance.ballot(v).map_or(false, |b| b.len() == 1));

    let mut hint = None;
    if single_delegation && stats.max_ballot_size > 1 && is_special_setting(instance) {
        hint = Some("special setting detected: the approximation scheme (fptas) applies".into());
    }

    let (algo_used, run) = match options.algo {
        Algo::Brute => (
            "brute",
            solve_brute_force(
                instance,
                &BruteOptions {
                    target_whitelist: options.target_whitelist.clone(),
                    step_limit: options.step_limit,
                },
            )?,
        ),
        Algo::TreeDp => ("tree_dp", solve_single_single(instance)?),
        Algo::Xp => ("xp", solve_xp_active(instance, options.step_limit)?),
        Algo::Fptas => {
            let eps = options.epsilon.ok_or(SolveError::InvalidEpsilon(0.0))?;
            ("fptas", solve_fptas(instance, eps, options.step_limit)?)
        }
        Algo::Auto => {
            if singleton_ballots {
                ("tree_dp", solve_single_single(instance)?)
            } else if single_delegation {
                match solve_xp_active(instance, options.step_limit) {
                    Ok(run) => ("xp", run),
                    Err(SolveError::GuessSpaceTooLarge { .. }) => (
                        "brute",
                        solve_brute_force(
                            instance,
                            &BruteOptions {
                                target_whitelist: options.target_whitelist.clone(),
                                step_limit: options.step_limit,
                            },
                        )?,
                    ),
                    Err(e) => return Err(e),
                }
            } else {
                (
                    "brute",
                    solve_brute_force(
                        instance,
                        &BruteOptions {
                            target_whitelist: options.target_whitelist.clone(),
                            step_limit: options.step_limit,
                        },
                    )?,
                )
            }
        }
    };

    Ok(SolveOutcome {
        solution: run.solution,
        report: SolveReport {
            algo_used,
            guesses_explored: run.guesses_explored,
            elapsed: start.elapsed(),
            stats,
            winning_guess: run.winning_guess,
            hint,
        },
    })
}

/// Preprocesses and returns it along with the forest of delegation trees,
/// shared by the structured solvers.
pub(crate) fn preprocessed_forest(
    instance: &Instance,
) -> Result<(crate::preprocess::Preprocessed, Forest), SolveError> {
    if instance.stats().max_out_degree > 1 {
        return Err(SolveError::NotSingleDelegation);
    }
    let pre = add_virtual_actives(instance);
    let forest = Forest::build(&pre.instance)?;
    Ok((pre, forest))
}

/// Translates witness arcs of a preprocessed instance back to redirections
/// of the original instance, aimed at `target`.
pub(crate) fn arcs_to_redirections(
    pre_instance: &Instance,
    arcs: impl IntoIterator<Item = usize>,
    target: VoterId,
) -> Vec<crate::model::Redirection> {
    arcs.into_iter()
        .map(|id| {
            let arc = pre_instance.arc(id);
            crate::model::Redirection {
                from: arc.from,
                old_to: arc.to,
                new_to: target,
            }
        })
        .collect()
}
