//! Bottom-up tree DP computing, for a delegation tree, the cheapest arc
//! subsets that move at least `j` votes out of the tree.
//!
//! Every non-root vertex `v` carries two arrays: `B_v[j]` is the cheapest way
//! to obtain `j` votes using only arcs strictly inside `v`'s subtree, and
//! `A_v[j]` additionally allows redirecting the arc from `v` to its parent,
//! which moves the whole remaining subtree at once. `B` arrays are built by
//! min-plus convolution over the children's `A` arrays. Vote counts are the
//! number of real (non-virtual) voters moved, so the DP stays correct on
//! preprocessed instances whose roots cast no vote.

use std::collections::BTreeMap;

use crate::model::{add_cost, Cost, Instance, VoterId, INFINITE_COST};
use crate::solvers::{Forest, SolveError, Tree};

/// Per-tree minimum redirection costs indexed by vote demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteArrays {
    pub root: VoterId,
    /// `costs[j]` = minimum cost moving at least `j` real votes out of the
    /// tree; `INFINITE_COST` when unattainable. Index runs to the tree's
    /// real voter count.
    costs: Vec<Cost>,
    /// Arc ids realizing each finite entry.
    witnesses: Vec<Vec<usize>>,
}

impl VoteArrays {
    /// Number of entries (real voter count + 1).
    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cost(&self, votes: usize) -> Cost {
        self.costs.get(votes).copied().unwrap_or(INFINITE_COST)
    }

    /// Witness arc set for a finite entry.
    pub fn witness(&self, votes: usize) -> Option<&[usize]> {
        (self.cost(votes) < INFINITE_COST).then(|| self.witnesses[votes].as_slice())
    }

    /// Largest vote count with a finite entry.
    pub fn max_votes(&self) -> usize {
        (0..self.costs.len())
            .rev()
            .find(|&j| self.costs[j] < INFINITE_COST)
            .unwrap_or(0)
    }
}

/// Largest `j` with `arrays.cost(j) <= budget`, with its witness arc set.
/// Always defined since zero votes cost nothing.
pub fn max_votes_under_budget(arrays: &VoteArrays, budget: Cost) -> (usize, &[usize]) {
    let j = (0..arrays.len())
        .rev()
        .find(|&j| arrays.cost(j) <= budget)
        .expect("entry 0 costs zero");
    (j, &arrays.witnesses[j])
}

/// Computes the vote arrays for the delegation tree rooted at `root`.
pub fn tree_min_cost_arrays(instance: &Instance, root: VoterId) -> Result<VoteArrays, SolveError> {
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
        .expect("every active voter roots a tree");
    Ok(arrays_for_tree(instance, tree, None))
}

/// Entry with its witness arcs.
type Entry = (Cost, Vec<usize>);

/// Min-plus convolution of two nondecreasing arrays, concatenating witnesses.
fn convolve(left: &[Entry], right: &[Entry]) -> Vec<Entry> {
    let len = left.len() + right.len() - 1;
    let mut out: Vec<Entry> = vec![(INFINITE_COST, Vec::new()); len];
    for (x, (cx, wx)) in left.iter().enumerate() {
        if *cx == INFINITE_COST {
            continue;
        }
        for (y, (cy, wy)) in right.iter().enumerate() {
            let c = add_cost(*cx, *cy);
            if c < out[x + y].0 {
                let mut w = wx.clone();
                w.extend_from_slice(wy);
                out[x + y] = (c, w);
            }
        }
    }
    out
}

/// Computes the root array for one tree. Arcs costing more than
/// `max_arc_cost` (when given) are treated as unredirectable, which the
/// approximation scheme uses to honor its max-edge guess.
pub(crate) fn arrays_for_tree(
    instance: &Instance,
    tree: &Tree,
    max_arc_cost: Option<Cost>,
) -> VoteArrays {
    let mut arrays: BTreeMap<VoterId, Vec<Entry>> = BTreeMap::new();
    static NO_CHILDREN: Vec<VoterId> = Vec::new();
    for &v in &tree.post_order {
        // B_v: convolution over children's A arrays.
        let mut b: Vec<Entry> = vec![(0, Vec::new())];
        for child in tree.children.get(&v).unwrap_or(&NO_CHILDREN) {
            let a_child = arrays.remove(child).expect("post-order");
            b = convolve(&b, &a_child);
        }
        if v == tree.root {
            arrays.insert(v, b);
            break;
        }
        // A_v: either extract from inside the subtree, or redirect the
        // parent arc and move all remaining real voters.
        let arc_id = tree.parent_arc[&v];
        let mut arc_cost = instance.arc(arc_id).cost;
        if max_arc_cost.is_some_and(|cap| arc_cost > cap) {
            arc_cost = INFINITE_COST;
        }
        let subtree_votes = tree.real_in_subtree[&v] as usize;
        let mut a: Vec<Entry> = Vec::with_capacity(subtree_votes + 1);
        for j in 0..=subtree_votes {
            let inner = b.get(j).cloned().unwrap_or((INFINITE_COST, Vec::new()));
            if arc_cost < inner.0 {
                a.push((arc_cost, vec![arc_id]));
            } else {
                a.push(inner);
            }
        }
        arrays.insert(v, a);
    }

    let mut root_array = arrays.remove(&tree.root).expect("root processed last");
    // Pad to the full real voter count; demands beyond what the subtrees
    // hold are unattainable.
    root_array.resize(tree.real_count as usize + 1, (INFINITE_COST, Vec::new()));
    let (costs, witnesses) = root_array.into_iter().unzip();
    VoteArrays {
        root: tree.root,
        costs,
        witnesses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Arc, Ballot, CandidateId, UnravelRule};

    fn single_tree_instance(arcs: Vec<Arc>, n: u32) -> Instance {
        let mut ballots: Vec<Option<Ballot>> = vec![None; n as usize];
        ballots[0] = Some(Ballot::from([CandidateId(0)]));
        Instance::new(
            vec!["c0".into(), "c1".into()],
            (0..n).map(|i| format!("v{i}")).collect(),
            arcs,
            ballots,
            vec![false; n as usize],
            CandidateId(0),
            10,
            UnravelRule::Union,
        )
        .unwrap()
    }

    #[test]
    fn chain_arrays() {
        // v2 -> v1 -> v0(root), cost(v1,v0)=2, cost(v2,v1)=1
        let inst = single_tree_instance(
            vec![
                Arc {
                    from: VoterId(1),
                    to: VoterId(0),
                    cost: 2,
                },
                Arc {
                    from: VoterId(2),
                    to: VoterId(1),
                    cost: 1,
                },
            ],
            3,
        );
        let arrays = tree_min_cost_arrays(&inst, VoterId(0)).unwrap();
        assert_eq!(arrays.len(), 4);
        assert_eq!(arrays.cost(0), 0);
        assert_eq!(arrays.cost(1), 1);
        assert_eq!(arrays.cost(2), 2);
        assert_eq!(arrays.cost(3), INFINITE_COST);
        // one vote via the leaf arc, two via the arc into the root
        let w1 = arrays.witness(1).unwrap();
        assert_eq!(inst.arc(w1[0]).from, VoterId(2));
        let w2 = arrays.witness(2).unwrap();
        assert_eq!(inst.arc(w2[0]).from, VoterId(1));
    }

    #[test]
    fn lonely_root() {
        let inst = single_tree_instance(vec![], 1);
        let arrays = tree_min_cost_arrays(&inst, VoterId(0)).unwrap();
        assert_eq!(arrays.len(), 2);
        assert_eq!(arrays.cost(0), 0);
        assert_eq!(arrays.cost(1), INFINITE_COST);
        assert_eq!(arrays.max_votes(), 0);
    }

    #[test]
    fn star_arrays() {
        let arcs = (1..=3)
            .map(|i| Arc {
                from: VoterId(i),
                to: VoterId(0),
                cost: 1,
            })
            .collect();
        let inst = single_tree_instance(arcs, 4);
        let arrays = tree_min_cost_arrays(&inst, VoterId(0)).unwrap();
        assert_eq!(
            (0..=3).map(|j| arrays.cost(j)).collect::<Vec<_>>(),
            vec![0, 1, 2, 3]
        );
        assert_eq!(arrays.cost(4), INFINITE_COST);
    }

    #[test]
    fn budget_queries() {
        let inst = single_tree_instance(
            vec![
                Arc {
                    from: VoterId(1),
                    to: VoterId(0),
                    cost: 2,
                },
                Arc {
                    from: VoterId(2),
                    to: VoterId(1),
                    cost: 1,
                },
            ],
            3,
        );
        let arrays = tree_min_cost_arrays(&inst, VoterId(0)).unwrap();
        assert_eq!(max_votes_under_budget(&arrays, 1).0, 1);
        assert_eq!(max_votes_under_budget(&arrays, 2).0, 2);
        assert_eq!(max_votes_under_budget(&arrays, 0).0, 0);
        assert!(max_votes_under_budget(&arrays, 0).1.is_empty());
    }

    #[test]
    fn rejects_inactive_root() {
        let inst = single_tree_instance(
            vec![Arc {
                from: VoterId(1),
                to: VoterId(0),
                cost: 1,
            }],
            2,
        );
        assert!(matches!(
            tree_min_cost_arrays(&inst, VoterId(1)),
            Err(SolveError::NotActiveRoot(_))
        ));
    }

    #[test]
    fn monotone_and_zero_based() {
        let inst = single_tree_instance(
            vec![
                Arc {
                    from: VoterId(1),
                    to: VoterId(0),
                    cost: 3,
                },
                Arc {
                    from: VoterId(2),
                    to: VoterId(0),
                    cost: 5,
                },
                Arc {
                    from: VoterId(3),
                    to: VoterId(1),
                    cost: 1,
                },
            ],
            4,
        );
        let arrays = tree_min_cost_arrays(&inst, VoterId(0)).unwrap();
        assert_eq!(arrays.cost(0), 0);
        for j in 1..arrays.len() {
            assert!(arrays.cost(j) >= arrays.cost(j - 1));
        }
        for j in 0..arrays.len() {
            if let Some(w) = arrays.witness(j) {
                let total: Cost = w.iter().map(|&a| inst.arc(a).cost).sum();
                assert_eq!(total, arrays.cost(j));
            }
        }
    }
}
