//! Exact solver for single-delegation instances, exponential only in the
//! number of active voters after preprocessing.
//!
//! Each delegation tree gets a table over demand vectors: one slot per
//! foreign tree, entry `d` holding the cheapest arc set that decomposes into
//! per-slot bundles moving exactly `d[q]` real votes each. Bundle counts are
//! exact rather than lower bounds so that a guessed vote matrix predicts the
//! final scores precisely; the matrix enumeration then just walks the
//! Cartesian product of the finite table entries.
//!
//! A redirected arc always sends the not-yet-moved remainder of its subtree,
//! so the per-vertex step either keeps extracting inside the subtree or adds
//! the parent arc to one bundle, crediting it with exactly the remaining
//! real voters.

use std::collections::BTreeMap;

use crate::model::{add_cost, Cost, Instance, Redirection, Solution, VoterId, INFINITE_COST};
use crate::solvers::{
    arcs_to_redirections, preprocessed_forest, Forest, GuessLedger, SolveError, SolverRun, Tree,
};

/// Demand vector: votes required per bundle slot.
type Demand = Vec<u32>;
/// Witness: arc ids per bundle slot, aligned with the demand vector.
type Bundles = Vec<Vec<usize>>;

type Table = BTreeMap<Demand, (Cost, Bundles)>;

fn merge_entry(table: &mut Table, key: Demand, cost: Cost, bundles: Bundles) {
    match table.get_mut(&key) {
        Some(existing) if existing.0 <= cost => {}
        Some(existing) => *existing = (cost, bundles),
        None => {
            table.insert(key, (cost, bundles));
        }
    }
}

/// Exact-decomposition table for one tree with `slots` bundle slots.
fn exact_table(instance: &Instance, tree: &Tree, slots: usize) -> Table {
    static NO_CHILDREN: Vec<VoterId> = Vec::new();
    let mut tables: BTreeMap<VoterId, Table> = BTreeMap::new();
    for &v in &tree.post_order {
        // Convolve the children's tables: bundle demands add slot-wise.
        let mut acc: Table = BTreeMap::new();
        acc.insert(vec![0; slots], (0, vec![Vec::new(); slots]));
        for child in tree.children.get(&v).unwrap_or(&NO_CHILDREN) {
            let child_table = tables.remove(child).expect("post-order");
            let mut merged: Table = BTreeMap::new();
            for (ka, (ca, wa)) in &acc {
                for (kb, (cb, wb)) in &child_table {
                    let cost = add_cost(*ca, *cb);
                    if cost == INFINITE_COST {
                        continue;
                    }
                    let key: Demand = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                    let bundles: Bundles = wa
                        .iter()
                        .zip(wb)
                        .map(|(a, b)| a.iter().chain(b).copied().collect())
                        .collect();
                    merge_entry(&mut merged, key, cost, bundles);
                }
            }
            acc = merged;
        }
        if v == tree.root {
            tables.insert(v, acc);
            break;
        }
        // Parent arc option: for any inner extraction, the parent arc can
        // join one bundle and contributes the remaining real voters of the
        // subtree, exactly.
        let arc_id = tree.parent_arc[&v];
        let arc_cost = instance.arc(arc_id).cost;
        let subtree = tree.real_in_subtree[&v] as u32;
        let mut with_parent: Vec<(Demand, Cost, Bundles)> = Vec::new();
        if arc_cost < INFINITE_COST {
            for (key, (cost, bundles)) in &acc {
                let moved: u32 = key.iter().sum();
                let remainder = subtree - moved;
                if remainder == 0 {
                    continue;
                }
                for q in 0..slots {
                    let mut k = key.clone();
                    k[q] += remainder;
                    let mut b = bundles.clone();
                    b[q].push(arc_id);
                    with_parent.push((k, add_cost(*cost, arc_cost), b));
                }
            }
        }
        for (k, c, b) in with_parent {
            merge_entry(&mut acc, k, c, b);
        }
        tables.insert(v, acc);
    }
    tables.remove(&tree.root).expect("root processed last")
}

/// Per-tree costs of bundle decompositions, exposed with at-least semantics:
/// the cost of serving a demand multiset is the cheapest exact entry that
/// dominates it bundle-for-bundle.
#[derive(Debug, Clone)]
pub struct MultiTargetTable {
    pub root: VoterId,
    pub max_bundles: usize,
    /// Exact decompositions: sorted demand multiset -> (cost, bundles).
    entries: BTreeMap<Vec<u32>, (Cost, Bundles)>,
}

impl MultiTargetTable {
    /// Minimum cost of an arc set decomposable into `demands.len()` bundles
    /// moving at least the respective demand each.
    pub fn min_cost_at_least(&self, demands: &[u32]) -> Cost {
        let mut want: Vec<u32> = demands.iter().copied().filter(|&d| d > 0).collect();
        want.sort_unstable();
        self.entries
            .iter()
            .filter(|(have, _)| {
                have.len() == want.len() && have.iter().zip(&want).all(|(h, w)| h >= w)
            })
            .map(|(_, (cost, _))| *cost)
            .min()
            .unwrap_or(if want.is_empty() { 0 } else { INFINITE_COST })
    }

    /// All exact decompositions as (sorted demand multiset, cost, bundles).
    pub fn entries(&self) -> impl Iterator<Item = (&[u32], Cost, &Bundles)> {
        self.entries
            .iter()
            .map(|(k, (c, b))| (k.as_slice(), *c, b))
    }
}

/// Builds the bundle table for the tree rooted at `root`, allowing up to
/// `max_bundles` simultaneous targets.
pub fn multi_target_table(
    instance: &Instance,
    root: VoterId,
    max_bundles: usize,
) -> Result<MultiTargetTable, SolveError> {
    if instance.stats().max_out_degree > 1 {
        return Err(SolveError::NotSingleDelegation);
    }
    if !instance.is_active(root) {
        return Err(SolveError::NotActiveRoot(
            instance.voter_name(root).to_owned(),
        ));
    }
    let forest = Forest::build(instance)?;
    let tree = forest
        .trees
        .iter()
        .find(|t| t.root == root)
        .expect("active voters root trees");
    let raw = exact_table(instance, tree, max_bundles);
    let mut entries: BTreeMap<Vec<u32>, (Cost, Bundles)> = BTreeMap::new();
    for (key, (cost, bundles)) in raw {
        // Sort slots by demand, carrying witnesses along, and drop empties.
        let mut paired: Vec<(u32, Vec<usize>)> = key.into_iter().zip(bundles).collect();
        paired.retain(|(d, _)| *d > 0);
        paired.sort();
        let (multiset, witness): (Vec<u32>, Bundles) = paired.into_iter().unzip();
        match entries.get_mut(&multiset) {
            Some(existing) if existing.0 <= cost => {}
            Some(existing) => *existing = (cost, witness),
            None => {
                entries.insert(multiset, (cost, witness));
            }
        }
    }
    Ok(MultiTargetTable {
        root,
        max_bundles,
        entries,
    })
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut out: u128 = 1;
    for i in 0..k {
        out = out.saturating_mul(n - i) / (i + 1);
        if out > 1 << 100 {
            return u128::MAX;
        }
    }
    out
}

/// Exact solver, exponential in the number of active voters.
///
/// Enumerates, for every ordered pair of trees, how many votes move between
/// them, looks up the cheapest exact decomposition per tree, verifies the
/// predicted scores, and keeps the cheapest winning guess.
pub fn solve_xp_active(instance: &Instance, step_limit: u64) -> Result<SolverRun, SolveError> {
    let (pre, forest) = preprocessed_forest(instance)?;
    let pinst = &pre.instance;
    let trees = &forest.trees;
    let t = trees.len();

    if t == 1 {
        // A single tree: every voter already resolves to the root's ballot
        // and no redirection can change that.
        let solution = predicted_win(pinst, trees, &[])
            .then(|| Solution::assemble(instance, Vec::new()))
            .transpose()?;
        return Ok(SolverRun::new(solution, 1));
    }

    let slots = t - 1;
    // Guess-space guard: the Cartesian product of table sizes, bounded by
    // compositions of each tree's vote capacity into the slots.
    let mut estimate: u128 = 1;
    for tree in trees {
        estimate = estimate.saturating_mul(binomial(
            tree.real_count as u128 + slots as u128,
            slots as u128,
        ));
    }
    if estimate > u128::from(step_limit) {
        return Err(SolveError::GuessSpaceTooLarge {
            estimate,
            limit: step_limit,
        });
    }

    let tables: Vec<Table> = trees
        .iter()
        .map(|tree| exact_table(pinst, tree, slots))
        .collect();
    let entry_lists: Vec<Vec<(&Demand, &(Cost, Bundles))>> =
        tables.iter().map(|t| t.iter().collect()).collect();

    // Walk the Cartesian product of per-tree entries.
    let mut cursor = vec![0usize; t];
    let mut guesses = 0u64;
    let mut best: Option<(Cost, Vec<(u32, u32, u32)>, Vec<Redirection>, BTreeMap<(VoterId, VoterId), u32>)> =
        None;
    'outer: loop {
        guesses += 1;
        let picked: Vec<&(&Demand, &(Cost, Bundles))> = cursor
            .iter()
            .enumerate()
            .map(|(i, &c)| &entry_lists[i][c])
            .collect();
        let cost = picked
            .iter()
            .fold(0, |acc, (_, (c, _))| add_cost(acc, *c));
        let within = cost <= instance.budget()
            && best.as_ref().map_or(true, |(bc, _, _, _)| cost <= *bc);
        if within && predicted_win(pinst, trees, &picked) {
            let (redirections, matrix) = realize(pinst, &pre, trees, &picked);
            let key = solution_key(&redirections);
            let better = match &best {
                Some((bc, bk, _, _)) => (cost, &key) < (*bc, bk),
                None => true,
            };
            if better {
                best = Some((cost, key, redirections, matrix));
            }
        }
        // Advance the mixed-radix cursor.
        for i in (0..t).rev() {
            cursor[i] += 1;
            if cursor[i] < entry_lists[i].len() {
                continue 'outer;
            }
            cursor[i] = 0;
            if i == 0 {
                break 'outer;
            }
        }
    }

    match best {
        Some((cost, _, redirections, matrix)) => {
            let solution = Solution::assemble(instance, redirections)?;
            debug_assert_eq!(solution.total_cost, cost);
            Ok(SolverRun {
                solution: Some(solution),
                guesses_explored: guesses,
                winning_guess: Some(GuessLedger::Xp {
                    votes_moved: matrix,
                }),
            })
        }
        None => Ok(SolverRun::new(None, guesses)),
    }
}

/// Slot `q` of tree `i` addresses the q-th other tree, in tree order.
fn slot_target(i: usize, q: usize) -> usize {
    if q < i {
        q
    } else {
        q + 1
    }
}

/// Checks whether the guessed vote movement makes the preferred candidate
/// the strict winner. Scores follow directly from the exact per-bundle
/// counts: a tree's candidates keep its real voters minus the votes leaving,
/// plus every vote arriving at its root.
fn predicted_win(
    pinst: &Instance,
    trees: &[Tree],
    picked: &[&(&Demand, &(Cost, Bundles))],
) -> bool {
    let t = trees.len();
    let mut score_of_tree: Vec<i64> = trees.iter().map(|tr| tr.real_count as i64).collect();
    for (i, (demand, _)) in picked.iter().enumerate() {
        for (q, &votes) in demand.iter().enumerate() {
            if votes > 0 {
                score_of_tree[i] -= i64::from(votes);
                score_of_tree[slot_target(i, q)] += i64::from(votes);
            }
        }
    }
    let mut scores = vec![0i64; pinst.num_candidates()];
    for i in 0..t {
        for &c in pinst.ballot(trees[i].root).expect("roots are active") {
            scores[c.idx()] += score_of_tree[i];
        }
    }
    let star = scores[pinst.preferred().idx()];
    scores
        .iter()
        .enumerate()
        .all(|(c, &s)| c == pinst.preferred().idx() || s < star)
}

/// Materializes the redirection set of a guess on the original instance and
/// records the realized vote matrix.
fn realize(
    pinst: &Instance,
    pre: &crate::preprocess::Preprocessed,
    trees: &[Tree],
    picked: &[&(&Demand, &(Cost, Bundles))],
) -> (Vec<Redirection>, BTreeMap<(VoterId, VoterId), u32>) {
    let mut redirections = Vec::new();
    let mut matrix = BTreeMap::new();
    for (i, (demand, (_, bundles))) in picked.iter().enumerate() {
        for (q, &votes) in demand.iter().enumerate() {
            if votes == 0 {
                continue;
            }
            let target_tree = slot_target(i, q);
            let target = pre.representative[&trees[target_tree].root];
            redirections.extend(arcs_to_redirections(
                pinst,
                bundles[q].iter().copied(),
                target,
            ));
            matrix.insert((trees[i].root, trees[target_tree].root), votes);
        }
    }
    (redirections, matrix)
}

fn solution_key(redirections: &[Redirection]) -> Vec<(u32, u32, u32)> {
    let mut key: Vec<_> = redirections
        .iter()
        .map(|r| (r.from.0, r.old_to.0, r.new_to.0))
        .collect();
    key.sort_unstable();
    key
}
