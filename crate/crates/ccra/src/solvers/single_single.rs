//! Exact polynomial algorithm for single-delegation instances with
//! singleton ballots.
//!
//! After preprocessing, each delegation tree belongs to a distinct
//! candidate. All redirections can be aimed at the preferred candidate's
//! tree root without loss of generality, so the problem reduces to a
//! knapsack-style DP over the rival trees: `table[k][x]` is the cheapest way
//! to pull at least `k` votes out of the rival trees seen so far while
//! leaving each of their candidates at most `x` votes. A pair `(k, x)` wins
//! when the preferred candidate's final score `base + k` strictly exceeds
//! `x`.

use crate::model::{add_cost, Cost, Instance, Redirection, Solution, INFINITE_COST};
use crate::solvers::tree_dp::arrays_for_tree;
use crate::solvers::{arcs_to_redirections, preprocessed_forest, SolveError, SolverRun};

pub fn solve_single_single(instance: &Instance) -> Result<SolverRun, SolveError> {
    if instance.stats().max_out_degree > 1 {
        return Err(SolveError::NotSingleDelegation);
    }
    if instance
        .active_voters()
        .any(|v| instance.ballot(v).map_or(true, |b| b.len() != 1))
    {
        return Err(SolveError::NotSingleApproval);
    }

    let (pre, forest) = preprocessed_forest(instance)?;
    let pinst = &pre.instance;

    // Preprocessing leaves one tree per approved candidate.
    let star_tree = forest.trees.iter().position(|t| {
        pinst.ballot(t.root).expect("roots are active")
            == &std::iter::once(pinst.preferred()).collect()
    });
    let Some(star_tree) = star_tree else {
        // Nobody approves the preferred candidate and no redirection can
        // change any resolved ballot's content, so this is hopeless.
        return Ok(SolverRun::new(None, 0));
    };
    let base = forest.trees[star_tree].real_count;

    let rivals: Vec<usize> = (0..forest.trees.len())
        .filter(|&i| i != star_tree)
        .collect();
    let arrays: Vec<_> = rivals
        .iter()
        .map(|&i| arrays_for_tree(pinst, &forest.trees[i], None))
        .collect();

    let max_votes: usize = arrays.iter().map(|a| a.max_votes()).sum();
    let max_left: usize = rivals
        .iter()
        .map(|&i| forest.trees[i].real_count as usize)
        .max()
        .unwrap_or(0);

    // table[k][x]: cheapest extraction of >= k votes from the rival trees
    // processed so far, leaving each of their candidates <= x votes.
    let width = max_left + 1;
    let mut table = vec![INFINITE_COST; (max_votes + 1) * width];
    let mut steps = 0u64;
    for x in 0..width {
        table[x] = 0;
    }
    let mut choices: Vec<Vec<u16>> = Vec::with_capacity(rivals.len());
    for (idx, &tree_idx) in rivals.iter().enumerate() {
        let tree = &forest.trees[tree_idx];
        let a = &arrays[idx];
        let r = tree.real_count as usize;
        let mut next = vec![INFINITE_COST; (max_votes + 1) * width];
        let mut choice = vec![u16::MAX; (max_votes + 1) * width];
        for x in 0..width {
            let j_min = r.saturating_sub(x);
            for j in j_min..a.len() {
                let arc_cost = a.cost(j);
                if arc_cost == INFINITE_COST {
                    continue;
                }
                for k in 0..=max_votes {
                    steps += 1;
                    let carry = table[k.saturating_sub(j) * width + x];
                    let total = add_cost(arc_cost, carry);
                    if total < next[k * width + x] {
                        next[k * width + x] = total;
                        choice[k * width + x] = j as u16;
                    }
                }
            }
        }
        table = next;
        choices.push(choice);
    }

    // Accept (k, x) when the preferred score base + k strictly beats x.
    let mut best: Option<(Cost, usize, usize)> = None;
    for k in 0..=max_votes {
        for x in 0..width {
            if base + k as u64 <= x as u64 {
                continue;
            }
            let cost = table[k * width + x];
            if cost < best.map_or(INFINITE_COST, |(c, _, _)| c) {
                best = Some((cost, k, x));
            }
        }
    }
    let Some((cost, mut k, x)) = best else {
        return Ok(SolverRun::new(None, steps));
    };
    if cost > instance.budget() {
        return Ok(SolverRun::new(None, steps));
    }

    // Walk the recorded choices back to the witness arc sets.
    let target = pre.representative[&forest.trees[star_tree].root];
    let mut redirections: Vec<Redirection> = Vec::new();
    for idx in (0..rivals.len()).rev() {
        let j = choices[idx][k * width + x];
        assert_ne!(j, u16::MAX, "reachable cells have recorded choices");
        let j = j as usize;
        if j > 0 {
            let witness = arrays[idx].witness(j).expect("chosen entries are finite");
            redirections.extend(arcs_to_redirections(pinst, witness.iter().copied(), target));
        }
        k = k.saturating_sub(j);
    }

    let solution = Solution::assemble(instance, redirections)?;
    debug_assert_eq!(solution.total_cost, cost);
    debug_assert!(
        solution.resulting_scores[&instance.preferred()]
            > solution
                .resulting_scores
                .iter()
                .filter(|(c, _)| **c != instance.preferred())
                .map(|(_, s)| *s)
                .max()
                .unwrap_or(0)
    );
    Ok(SolverRun::new(Some(solution), steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Arc, Ballot, CandidateId, UnravelRule, VoterId};
    use crate::solvers::{solve_brute_force, BruteOptions};

    fn b(ids: &[u32]) -> Ballot {
        ids.iter().map(|&i| CandidateId(i)).collect()
    }

    #[test]
    fn matches_brute_force_on_the_three_voter_instance() {
        let inst = Instance::new(
            vec!["cstar".into(), "c1".into()],
            vec!["a".into(), "b".into(), "p".into()],
            vec![Arc {
                from: VoterId(2),
                to: VoterId(1),
                cost: 1,
            }],
            vec![Some(b(&[0])), Some(b(&[1])), None],
            vec![false; 3],
            CandidateId(0),
            1,
            UnravelRule::Union,
        )
        .unwrap();
        let dp = solve_single_single(&inst).unwrap().solution.unwrap();
        let brute = solve_brute_force(&inst, &BruteOptions::with_limit(100_000))
            .unwrap()
            .solution
            .unwrap();
        assert_eq!(dp.total_cost, 1);
        assert_eq!(dp.total_cost, brute.total_cost);
        assert_eq!(dp.resulting_scores[&CandidateId(0)], 2);
    }

    #[test]
    fn already_winning_tree_costs_nothing() {
        // cstar's tree has three voters, the rival only one
        let inst = Instance::new(
            vec!["cstar".into(), "c1".into()],
            vec!["a".into(), "b".into(), "p".into(), "q".into()],
            vec![
                Arc {
                    from: VoterId(2),
                    to: VoterId(0),
                    cost: 1,
                },
                Arc {
                    from: VoterId(3),
                    to: VoterId(0),
                    cost: 1,
                },
            ],
            vec![Some(b(&[0])), Some(b(&[1])), None, None],
            vec![false; 4],
            CandidateId(0),
            0,
            UnravelRule::Union,
        )
        .unwrap();
        let sol = solve_single_single(&inst).unwrap().solution.unwrap();
        assert_eq!(sol.total_cost, 0);
        assert!(sol.redirections.is_empty());
    }

    #[test]
    fn no_preferred_supporter_is_infeasible() {
        let inst = Instance::new(
            vec!["cstar".into(), "c1".into()],
            vec!["a".into()],
            vec![],
            vec![Some(b(&[1]))],
            vec![false],
            CandidateId(0),
            10,
            UnravelRule::Union,
        )
        .unwrap();
        assert!(solve_single_single(&inst).unwrap().solution.is_none());
    }

    #[test]
    fn rejects_multi_delegation_and_multi_approval() {
        let multi_ballot = Instance::new(
            vec!["cstar".into(), "c1".into()],
            vec!["a".into()],
            vec![],
            vec![Some(b(&[0, 1]))],
            vec![false],
            CandidateId(0),
            0,
            UnravelRule::Union,
        )
        .unwrap();
        assert!(matches!(
            solve_single_single(&multi_ballot),
            Err(SolveError::NotSingleApproval)
        ));

        let multi_out = Instance::new(
            vec!["cstar".into()],
            vec!["a".into(), "b".into(), "p".into()],
            vec![
                Arc {
                    from: VoterId(2),
                    to: VoterId(0),
                    cost: 1,
                },
                Arc {
                    from: VoterId(2),
                    to: VoterId(1),
                    cost: 1,
                },
            ],
            vec![Some(b(&[0])), Some(b(&[0])), None],
            vec![false; 3],
            CandidateId(0),
            0,
            UnravelRule::Union,
        )
        .unwrap();
        assert!(matches!(
            solve_single_single(&multi_out),
            Err(SolveError::NotSingleDelegation)
        ));
    }
}
