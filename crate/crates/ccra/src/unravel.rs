//! Transitive resolution of delegations into ballots.
//!
//! Passive voters receive the ballot produced by the instance's unraveling
//! rule from the resolved ballots of their delegates, processed in reverse
//! topological order so delegatees resolve first. Delegate ballots are a
//! multiset: two delegates resolving to the same ballot count twice for the
//! approval and greedy rules.

use std::collections::BTreeMap;

use crate::model::{topological_order, Ballot, CandidateId, Instance, UnravelRule, VoterId};

/// Resolved ballots for every voter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnraveledProfile {
    resolved: Vec<Ballot>,
}

impl UnraveledProfile {
    pub fn ballot(&self, v: VoterId) -> &Ballot {
        &self.resolved[v.idx()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (VoterId, &Ballot)> {
        self.resolved
            .iter()
            .enumerate()
            .map(|(i, b)| (VoterId(i as u32), b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnravelError {
    #[error("unraveling rule applied to an empty ballot list")]
    EmptyInput,
    #[error("delegation graph contains a cycle")]
    CycleDetected,
}

/// Union rule: every candidate approved by some delegate.
pub fn rule_union(ballots: &[Ballot]) -> Result<Ballot, UnravelError> {
    if ballots.is_empty() {
        return Err(UnravelError::EmptyInput);
    }
    Ok(ballots.iter().flatten().copied().collect())
}

fn approval_counts(ballots: &[Ballot]) -> BTreeMap<CandidateId, usize> {
    let mut counts = BTreeMap::new();
    for b in ballots {
        for &c in b {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    counts
}

/// Approval rule: the candidates approved by the maximum number of delegates.
pub fn rule_approval(ballots: &[Ballot]) -> Result<Ballot, UnravelError> {
    if ballots.is_empty() {
        return Err(UnravelError::EmptyInput);
    }
    let counts = approval_counts(ballots);
    let max = counts.values().copied().max().unwrap_or(0);
    Ok(counts
        .into_iter()
        .filter(|&(_, k)| k == max)
        .map(|(c, _)| c)
        .collect())
}

/// GreedyMRC rule: repeatedly add all currently most-approved candidates and
/// drop every remaining delegate whose ballot meets the added set, until no
/// delegates remain.
pub fn rule_greedy_mrc(ballots: &[Ballot]) -> Result<Ballot, UnravelError> {
    if ballots.is_empty() {
        return Err(UnravelError::EmptyInput);
    }
    let mut remaining: Vec<&Ballot> = ballots.iter().collect();
    let mut chosen = Ballot::new();
    while !remaining.is_empty() {
        let counts = approval_counts(&remaining.iter().map(|b| (*b).clone()).collect::<Vec<_>>());
        let max = counts.values().copied().max().unwrap_or(0);
        if max == 0 {
            // Only empty ballots remain; nothing more can be covered.
            break;
        }
        let added: Ballot = counts
            .into_iter()
            .filter(|&(_, k)| k == max)
            .map(|(c, _)| c)
            .collect();
        remaining.retain(|b| b.is_disjoint(&added));
        chosen.extend(added);
    }
    Ok(chosen)
}

/// Applies one rule to a delegate ballot list.
pub fn apply_rule(rule: UnravelRule, ballots: &[Ballot]) -> Result<Ballot, UnravelError> {
    match rule {
        UnravelRule::Union => rule_union(ballots),
        UnravelRule::Approval => rule_approval(ballots),
        UnravelRule::GreedyMrc => rule_greedy_mrc(ballots),
    }
}

/// Resolves the ballot of every voter under the instance's rule.
pub fn unravel(instance: &Instance) -> Result<UnraveledProfile, UnravelError> {
    unravel_with(instance, instance.rule())
}

/// Resolves under an explicit rule (used to compare rules on one graph).
pub fn unravel_with(
    instance: &Instance,
    rule: UnravelRule,
) -> Result<UnraveledProfile, UnravelError> {
    let n = instance.num_voters();
    let order =
        topological_order(n, instance.arcs()).ok_or(UnravelError::CycleDetected)?;
    let mut resolved: Vec<Option<Ballot>> = vec![None; n];
    // Delegatees before delegators.
    for &v in order.iter().rev() {
        let voter = VoterId(v as u32);
        let ballot = match instance.ballot(voter) {
            Some(b) => b.clone(),
            None => {
                // Delegate ballots in voter-index order; out_arcs are sorted
                // by target already.
                let inputs: Vec<Ballot> = instance
                    .out_arcs(voter)
                    .iter()
                    .map(|&a| {
                        resolved[instance.arc(a).to.idx()]
                            .clone()
                            .expect("reverse topological order resolves delegatees first")
                    })
                    .collect();
                apply_rule(rule, &inputs)?
            }
        };
        resolved[v] = Some(ballot);
    }
    Ok(UnraveledProfile {
        resolved: resolved.into_iter().map(Option::unwrap).collect(),
    })
}
