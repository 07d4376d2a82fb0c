//! Exhaustive minimum-cost search over all acyclicity-preserving redirection
//! sets within budget. This is the ground-truth oracle the structured
//! solvers are tested against, so it deliberately explores raw target
//! assignments without any normalization.

use std::collections::BTreeSet;

use crate::model::{Ballot, Cost, Instance, Redirection, Solution, VoterId};
use crate::solvers::{SolveError, SolverRun};
use crate::unravel::apply_rule;

#[derive(Debug, Clone, Default)]
pub struct BruteOptions {
    /// When set, only these voters may become redirect targets. Mirrors the
    /// normalization used by the hardness constructions.
    pub target_whitelist: Option<BTreeSet<VoterId>>,
    /// Enumeration cap; exceeding it aborts with `InstanceTooLarge`.
    pub step_limit: u64,
}

impl BruteOptions {
    pub fn with_limit(step_limit: u64) -> Self {
        BruteOptions {
            target_whitelist: None,
            step_limit,
        }
    }
}

/// Enumerates every assignment of new targets to arc subsets and returns the
/// cheapest one making the preferred candidate the unique winner.
///
/// Ties are broken by the lexicographically smallest redirection list, so
/// the result is deterministic.
pub fn solve_brute_force(
    instance: &Instance,
    options: &BruteOptions,
) -> Result<SolverRun, SolveError> {
    let step_limit = if options.step_limit == 0 {
        crate::solvers::DEFAULT_STEP_LIMIT
    } else {
        options.step_limit
    };

    // Redirectable arcs: finite cost and affordable on their own. Infinite
    // arcs (from preprocessing) can never be part of a within-budget set.
    let arc_ids: Vec<usize> = (0..instance.arcs().len())
        .filter(|&a| instance.arc(a).cost <= instance.budget())
        .collect();

    // Per-arc candidate targets: any voter except the arc's own endpoints,
    // intersected with the whitelist when given.
    let targets: Vec<Vec<VoterId>> = arc_ids
        .iter()
        .map(|&a| {
            let arc = instance.arc(a);
            instance
                .voters()
                .filter(|v| *v != arc.from && *v != arc.to)
                .filter(|v| {
                    options
                        .target_whitelist
                        .as_ref()
                        .map_or(true, |wl| wl.contains(v))
                })
                .collect()
        })
        .collect();

    let mut estimate: u128 = 1;
    for t in &targets {
        estimate = estimate.saturating_mul(1 + t.len() as u128);
    }
    if estimate > u128::from(step_limit) {
        return Err(SolveError::InstanceTooLarge {
            estimate,
            limit: step_limit,
        });
    }

    let mut eval = Evaluator::new(instance);
    let mut search = Search {
        instance,
        arc_ids: &arc_ids,
        targets: &targets,
        chosen: Vec::new(),
        cost: 0,
        best: None,
        leaves: 0,
    };
    search.recurse(0, &mut eval);

    let best = search.best.map(|(_, _, redirections)| {
        Solution::assemble(instance, redirections).expect("enumerated solution certifies")
    });
    Ok(SolverRun::new(best, search.leaves))
}

struct Search<'a> {
    instance: &'a Instance,
    arc_ids: &'a [usize],
    targets: &'a [Vec<VoterId>],
    chosen: Vec<(usize, VoterId)>,
    cost: Cost,
    /// (cost, lexicographic key, redirections)
    best: Option<(Cost, Vec<(u32, u32, u32)>, Vec<Redirection>)>,
    leaves: u64,
}

impl Search<'_> {
    fn recurse(&mut self, idx: usize, eval: &mut Evaluator) {
        if idx == self.arc_ids.len() {
            self.leaves += 1;
            self.evaluate(eval);
            return;
        }
        // Leave this arc untouched.
        self.recurse(idx + 1, eval);
        let arc_id = self.arc_ids[idx];
        let arc_cost = self.instance.arc(arc_id).cost;
        if self.cost.saturating_add(arc_cost) > self.instance.budget() {
            return;
        }
        self.cost += arc_cost;
        for &target in &self.targets[idx] {
            self.chosen.push((arc_id, target));
            self.recurse(idx + 1, eval);
            self.chosen.pop();
        }
        self.cost -= arc_cost;
    }

    fn evaluate(&mut self, eval: &mut Evaluator) {
        if let Some((best_cost, best_key, _)) = &self.best {
            if self.cost > *best_cost {
                return;
            }
            if self.cost == *best_cost && !self.key_improves(best_key) {
                return;
            }
        }
        if !eval.winning(&self.chosen) {
            return;
        }
        let redirections: Vec<Redirection> = self
            .chosen
            .iter()
            .map(|&(a, new_to)| {
                let arc = self.instance.arc(a);
                Redirection {
                    from: arc.from,
                    old_to: arc.to,
                    new_to,
                }
            })
            .collect();
        let key = key_of(&redirections);
        match &self.best {
            Some((c, k, _)) if (*c, k.clone()) <= (self.cost, key.clone()) => {}
            _ => self.best = Some((self.cost, key, redirections)),
        }
    }

    fn key_improves(&self, best_key: &[(u32, u32, u32)]) -> bool {
        let key: Vec<(u32, u32, u32)> = self
            .chosen
            .iter()
            .map(|&(a, new_to)| {
                let arc = self.instance.arc(a);
                (arc.from.0, arc.to.0, new_to.0)
            })
            .collect();
        key.as_slice() < best_key
    }
}

fn key_of(redirections: &[Redirection]) -> Vec<(u32, u32, u32)> {
    let mut key: Vec<_> = redirections
        .iter()
        .map(|r| (r.from.0, r.old_to.0, r.new_to.0))
        .collect();
    key.sort();
    key
}

/// Evaluates a partial rewiring in place: checks acyclicity and the
/// no-parallel-arc rule, unravels, tallies, and tests the unique win,
/// without constructing intermediate instances.
struct Evaluator<'a> {
    instance: &'a Instance,
    /// Current target of each arc (by canonical arc id).
    arc_to: Vec<VoterId>,
}

impl<'a> Evaluator<'a> {
    fn new(instance: &'a Instance) -> Self {
        Evaluator {
            instance,
            arc_to: instance.arcs().iter().map(|a| a.to).collect(),
        }
    }

    fn winning(&mut self, chosen: &[(usize, VoterId)]) -> bool {
        for &(a, t) in chosen {
            self.arc_to[a] = t;
        }
        let ok = self.rewiring_valid() && self.preferred_wins();
        for &(a, _) in chosen {
            self.arc_to[a] = self.instance.arc(a).to;
        }
        ok
    }

    fn rewiring_valid(&self) -> bool {
        let n = self.instance.num_voters();
        // Parallel arcs: only voters with several out-arcs can clash.
        for v in self.instance.voters() {
            let arcs = self.instance.out_arcs(v);
            if arcs.len() > 1 {
                let mut ts: Vec<u32> = arcs.iter().map(|&a| self.arc_to[a].0).collect();
                ts.sort_unstable();
                if ts.windows(2).any(|w| w[0] == w[1]) {
                    return false;
                }
            }
        }
        // Cycle check over the rewired adjacency.
        let mut color = vec![0u8; n];
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color[start] = 1;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                let arcs = self.instance.out_arcs(VoterId(v as u32));
                if *next < arcs.len() {
                    let u = self.arc_to[arcs[*next]].idx();
                    *next += 1;
                    match color[u] {
                        0 => {
                            color[u] = 1;
                            stack.push((u, 0));
                        }
                        1 => return false,
                        _ => {}
                    }
                } else {
                    color[v] = 2;
                    stack.pop();
                }
            }
        }
        true
    }

    fn preferred_wins(&self) -> bool {
        let n = self.instance.num_voters();
        let mut resolved: Vec<Option<Ballot>> = vec![None; n];
        let mut scores = vec![0u64; self.instance.num_candidates()];
        for v in 0..n {
            let ballot = self.resolve(v, &mut resolved);
            if !self.instance.is_virtual(VoterId(v as u32)) {
                for c in ballot {
                    scores[c.idx()] += 1;
                }
            }
        }
        let star = scores[self.instance.preferred().idx()];
        scores
            .iter()
            .enumerate()
            .all(|(c, &s)| c == self.instance.preferred().idx() || s < star)
    }

    fn resolve(&self, v: usize, resolved: &mut Vec<Option<Ballot>>) -> Ballot {
        if let Some(b) = &resolved[v] {
            return b.clone();
        }
        let voter = VoterId(v as u32);
        let ballot = match self.instance.ballot(voter) {
            Some(b) => b.clone(),
            None => {
                let inputs: Vec<Ballot> = self
                    .instance
                    .out_arcs(voter)
                    .iter()
                    .map(|&a| self.resolve(self.arc_to[a].idx(), resolved))
                    .collect();
                apply_rule(self.instance.rule(), &inputs)
                    .expect("passive voters have delegates")
            }
        };
        resolved[v] = Some(ballot.clone());
        ballot
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Arc, CandidateId, UnravelRule};

    fn abp_instance(budget: Cost) -> Instance {
        // a approves {cstar}, b approves {c1}, p delegates to b at cost 1
        Instance::new(
            vec!["cstar".into(), "c1".into()],
            vec!["a".into(), "b".into(), "p".into()],
            vec![Arc {
                from: VoterId(2),
                to: VoterId(1),
                cost: 1,
            }],
            vec![
                Some(Ballot::from([CandidateId(0)])),
                Some(Ballot::from([CandidateId(1)])),
                None,
            ],
            vec![false; 3],
            CandidateId(0),
            budget,
            UnravelRule::Union,
        )
        .unwrap()
    }

    #[test]
    fn finds_single_redirection() {
        let inst = abp_instance(1);
        let run = solve_brute_force(&inst, &BruteOptions::with_limit(10_000)).unwrap();
        let sol = run.solution.unwrap();
        assert_eq!(sol.total_cost, 1);
        assert_eq!(
            sol.redirections,
            vec![Redirection {
                from: VoterId(2),
                old_to: VoterId(1),
                new_to: VoterId(0),
            }]
        );
        assert_eq!(sol.resulting_scores[&CandidateId(0)], 2);
        assert_eq!(sol.resulting_scores[&CandidateId(1)], 1);
    }

    #[test]
    fn infeasible_with_zero_budget() {
        let inst = abp_instance(0);
        let run = solve_brute_force(&inst, &BruteOptions::with_limit(10_000)).unwrap();
        assert!(run.solution.is_none());
    }

    #[test]
    fn already_winning_costs_nothing() {
        let inst = Instance::new(
            vec!["cstar".into(), "c1".into()],
            vec!["a".into(), "b".into()],
            vec![],
            vec![
                Some(Ballot::from([CandidateId(0)])),
                Some(Ballot::from([CandidateId(0), CandidateId(1)])),
            ],
            vec![false; 2],
            CandidateId(0),
            5,
            UnravelRule::Union,
        )
        .unwrap();
        let run = solve_brute_force(&inst, &BruteOptions::with_limit(10_000)).unwrap();
        let sol = run.solution.unwrap();
        assert_eq!(sol.total_cost, 0);
        assert!(sol.redirections.is_empty());
    }

    #[test]
    fn whitelist_restricts_targets() {
        let inst = abp_instance(1);
        let options = BruteOptions {
            target_whitelist: Some(BTreeSet::from([VoterId(1)])),
            step_limit: 10_000,
        };
        // only b is allowed as target, but the arc already points there
        let run = solve_brute_force(&inst, &options).unwrap();
        assert!(run.solution.is_none());
    }

    #[test]
    fn guard_rejects_large_instances() {
        let inst = abp_instance(1);
        let err = solve_brute_force(&inst, &BruteOptions::with_limit(1)).unwrap_err();
        assert!(matches!(err, SolveError::InstanceTooLarge { .. }));
    }
}
