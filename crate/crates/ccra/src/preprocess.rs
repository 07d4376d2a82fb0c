//! Equivalence-class preprocessing.
//!
//! Active voters with equal approval sets are funneled into one fresh
//! zero-vote "virtual" active voter per class, reached over infinite-cost
//! arcs. Scores and minimum feasible redirection costs are unchanged, and
//! afterwards the number of active voters is bounded by the number of
//! distinct approval sets.

use std::collections::BTreeMap;

use crate::model::{Arc, Ballot, Instance, VoterId, INFINITE_COST};

/// A preprocessed instance plus the bookkeeping needed to translate solver
/// output (which targets virtual voters) back to the original instance.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub instance: Instance,
    /// For every active voter of the preprocessed instance: the original
    /// voter with the same resolved ballot (itself, when it already existed).
    pub representative: BTreeMap<VoterId, VoterId>,
    /// Voters added by this pass.
    pub added: Vec<VoterId>,
}

/// Adds one virtual active voter per approval-set class.
///
/// Classes consisting solely of voters that already carry the zero-vote
/// marker are left untouched, which makes the pass idempotent.
pub fn add_virtual_actives(instance: &Instance) -> Preprocessed {
    let mut classes: BTreeMap<Ballot, Vec<VoterId>> = BTreeMap::new();
    for v in instance.active_voters() {
        classes
            .entry(instance.ballot(v).expect("active voters have ballots").clone())
            .or_default()
            .push(v);
    }

    let mut candidate_names: Vec<String> = instance
        .candidates()
        .map(|c| instance.candidate_name(c).to_owned())
        .collect();
    let mut voter_names: Vec<String> = instance
        .voters()
        .map(|v| instance.voter_name(v).to_owned())
        .collect();
    let mut arcs = instance.arcs().to_vec();
    let mut ballots: Vec<Option<Ballot>> = instance
        .voters()
        .map(|v| instance.ballot(v).cloned())
        .collect();
    let mut virtuals: Vec<bool> = instance.voters().map(|v| instance.is_virtual(v)).collect();

    let mut representative = BTreeMap::new();
    let mut added = Vec::new();
    for (ballot, members) in &classes {
        if members.iter().all(|&v| instance.is_virtual(v)) {
            for &v in members {
                representative.insert(v, v);
            }
            continue;
        }
        let name = virtual_name(&voter_names, instance, ballot);
        let id = VoterId(voter_names.len() as u32);
        voter_names.push(name);
        ballots.push(Some(ballot.clone()));
        virtuals.push(true);
        for &member in members {
            ballots[member.idx()] = None;
            arcs.push(Arc {
                from: member,
                to: id,
                cost: INFINITE_COST,
            });
        }
        // The first (lowest-index) real member stands in for the class when
        // mapping solutions back to the original instance.
        let rep = members
            .iter()
            .copied()
            .find(|&v| !instance.is_virtual(v))
            .expect("class has a real member");
        representative.insert(id, rep);
        added.push(id);
    }

    let instance = Instance::new(
        candidate_names.drain(..).collect(),
        voter_names,
        arcs,
        ballots,
        virtuals,
        instance.preferred(),
        instance.budget(),
        instance.rule(),
    )
    .expect("preprocessing preserves validity");
    Preprocessed {
        instance,
        representative,
        added,
    }
}

fn virtual_name(taken: &[String], instance: &Instance, ballot: &Ballot) -> String {
    let joined = ballot
        .iter()
        .map(|&c| instance.candidate_name(c))
        .collect::<Vec<_>>()
        .join("+");
    let mut name = format!("~{joined}");
    while taken.contains(&name) {
        name.push('~');
    }
    name
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CandidateId, UnravelRule};
    use crate::tally::approval_scores;
    use crate::unravel::unravel;

    fn b(ids: &[u32]) -> Ballot {
        ids.iter().map(|&i| CandidateId(i)).collect()
    }

    fn two_identical_actives() -> Instance {
        Instance::new(
            vec!["c0".into(), "c1".into()],
            vec!["a".into(), "b".into()],
            vec![],
            vec![Some(b(&[0])), Some(b(&[0]))],
            vec![false; 2],
            CandidateId(0),
            2,
            UnravelRule::Union,
        )
        .unwrap()
    }

    #[test]
    fn identical_ballots_collapse_to_one_class() {
        let inst = two_identical_actives();
        let pre = add_virtual_actives(&inst);
        assert_eq!(pre.added.len(), 1);
        assert_eq!(pre.instance.num_voters(), 3);
        assert_eq!(pre.instance.stats().t, 1);
        let v = pre.added[0];
        assert!(pre.instance.is_virtual(v));
        assert_eq!(pre.instance.ballot(v), Some(&b(&[0])));
        // both originals now delegate at infinite cost
        for orig in ["a", "b"] {
            let from = pre.instance.voter_by_name(orig).unwrap();
            let arc = pre.instance.find_arc(from, v).unwrap();
            assert_eq!(pre.instance.arc(arc).cost, INFINITE_COST);
        }
        assert_eq!(pre.representative[&v], VoterId(0));
        // scores unchanged
        let before = approval_scores(&unravel(&inst).unwrap(), &inst);
        let after = approval_scores(&unravel(&pre.instance).unwrap(), &pre.instance);
        for c in inst.candidates() {
            assert_eq!(before.score(c), after.score(c));
        }
    }

    #[test]
    fn distinct_ballots_get_one_virtual_each() {
        let inst = Instance::new(
            vec!["c0".into(), "c1".into()],
            vec!["a".into(), "b".into()],
            vec![],
            vec![Some(b(&[0])), Some(b(&[1]))],
            vec![false; 2],
            CandidateId(0),
            2,
            UnravelRule::Union,
        )
        .unwrap();
        let pre = add_virtual_actives(&inst);
        assert_eq!(pre.added.len(), 2);
        assert_eq!(pre.instance.stats().t, 2);
    }

    #[test]
    fn idempotent() {
        let inst = two_identical_actives();
        let once = add_virtual_actives(&inst);
        let twice = add_virtual_actives(&once.instance);
        assert!(twice.added.is_empty());
        assert_eq!(once.instance, twice.instance);
    }

    #[test]
    fn name_collision_resolved() {
        let inst = Instance::new(
            vec!["c0".into()],
            vec!["~c0".into()],
            vec![],
            vec![Some(b(&[0]))],
            vec![false],
            CandidateId(0),
            1,
            UnravelRule::Union,
        )
        .unwrap();
        let pre = add_virtual_actives(&inst);
        assert_eq!(pre.instance.voter_name(pre.added[0]), "~c0~");
    }
}
