//! Shared helpers for the integration and acceptance suites: independent
//! oracles and deterministic random-instance streams.

use std::collections::BTreeSet;

use ccra::gen::{gen_random, BudgetPolicy, GenConfig};
use ccra::model::{Ballot, CandidateId, Instance, Solution, UnravelRule, VoterId};
use ccra::tally::{approval_scores, is_unique_winner};
use ccra::unravel::unravel;

/// Certifies a solver's output end to end: the redirections apply cleanly,
/// stay within budget, cost what the solution claims, and make the
/// preferred candidate the unique winner.
pub fn assert_valid_solution(instance: &Instance, solution: &Solution) {
    assert!(solution.total_cost <= instance.budget(), "budget respected");
    let cost = instance
        .redirection_cost(&solution.redirections)
        .expect("redirections reference existing arcs");
    assert_eq!(cost, solution.total_cost, "claimed cost matches the arcs");
    let applied = instance
        .apply_redirections(&solution.redirections)
        .expect("solution applies cleanly");
    let board = approval_scores(&unravel(&applied).expect("acyclic"), &applied);
    assert!(
        is_unique_winner(&board, instance.preferred()),
        "preferred candidate must win uniquely"
    );
    for c in instance.candidates() {
        assert_eq!(board.score(c), solution.resulting_scores[&c]);
    }
}

/// Voters whose declared ballots are reachable from `v` (including `v`
/// itself when active), via plain DFS; the union-rule resolution oracle.
pub fn reachable_active_union(instance: &Instance, v: VoterId) -> Ballot {
    let mut seen = BTreeSet::new();
    let mut stack = vec![v];
    let mut ballot = Ballot::new();
    while let Some(u) = stack.pop() {
        if !seen.insert(u) {
            continue;
        }
        match instance.ballot(u) {
            Some(b) => ballot.extend(b.iter().copied()),
            None => {
                for &a in instance.out_arcs(u) {
                    stack.push(instance.arc(a).to);
                }
            }
        }
    }
    ballot
}

/// Deterministic stream of small random instances.
pub fn instance_stream(
    count: usize,
    seed_base: u64,
    make_cfg: impl Fn(u64) -> GenConfig,
) -> Vec<Instance> {
    (0..count as u64)
        .map(|i| gen_random(&make_cfg(seed_base + i)).expect("valid config"))
        .collect()
}

/// Small single-delegation single-approval configs for the oracle harnesses.
pub fn single_single_cfg(seed: u64) -> GenConfig {
    GenConfig {
        n: 2 + (seed % 7) as u32,
        m: 2 + (seed % 3) as u32,
        max_out_degree: 1,
        max_ballot_size: 1,
        max_cost: 3,
        budget: if seed % 3 == 0 {
            BudgetPolicy::Fixed(seed % 5)
        } else {
            BudgetPolicy::TotalCostFraction { num: 1, den: 2 }
        },
        rule: UnravelRule::Union,
        seed,
    }
}

/// A random in-tree oracle fixture: a single active root plus delegators.
pub struct RandomTree {
    pub instance: Instance,
    pub root: VoterId,
}

pub fn random_tree(n_voters: u32, seed: u64) -> RandomTree {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    let mut ballots: Vec<Option<Ballot>> = vec![None; n_voters as usize];
    ballots[0] = Some(Ballot::from([CandidateId(0)]));
    for i in 1..n_voters {
        let to = rng.gen_range(0..i);
        arcs.push(ccra::model::Arc {
            from: VoterId(i),
            to: VoterId(to),
            cost: rng.gen_range(1..=5),
        });
    }
    let instance = Instance::new(
        vec!["c0".into(), "c1".into()],
        (0..n_voters).map(|i| format!("v{i}")).collect(),
        arcs,
        ballots,
        vec![false; n_voters as usize],
        CandidateId(0),
        1_000,
        UnravelRule::Union,
    )
    .expect("trees validate");
    RandomTree {
        instance,
        root: VoterId(0),
    }
}

/// Exhaustive-subset oracle for the tree arrays: the cheapest arc subset
/// moving at least `j` voters, where a voter moves when some arc on its
/// path to the root is redirected.
pub fn tree_oracle(tree: &RandomTree) -> Vec<u64> {
    let instance = &tree.instance;
    let arcs = instance.arcs();
    let n = instance.num_voters();
    let mut parent_arc: Vec<Option<usize>> = vec![None; n];
    for (id, arc) in arcs.iter().enumerate() {
        parent_arc[arc.from.idx()] = Some(id);
    }
    let mut oracle = vec![u64::MAX; n + 1];
    for mask in 0u32..(1 << arcs.len()) {
        let cost: u64 = (0..arcs.len())
            .filter(|&a| mask & (1 << a) != 0)
            .map(|a| arcs[a].cost)
            .sum();
        let mut votes = 0usize;
        for v in 0..n {
            let mut cur = v;
            loop {
                match parent_arc[cur] {
                    Some(a) if mask & (1 << a) != 0 => {
                        votes += 1;
                        break;
                    }
                    Some(a) => cur = arcs[a].to.idx(),
                    None => break,
                }
            }
        }
        for j in 0..=votes {
            oracle[j] = oracle[j].min(cost);
        }
    }
    oracle
}
