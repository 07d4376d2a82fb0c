//! Approval scoring and winner determination.

use std::collections::BTreeMap;

use crate::model::{CandidateId, Instance};
use crate::unravel::UnraveledProfile;

/// Approval scores over the full candidate set. Virtual voters cast no vote.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreBoard {
    scores: Vec<u64>,
    /// Number of real (non-virtual) voters counted.
    pub counted_voters: usize,
}

impl ScoreBoard {
    pub fn score(&self, c: CandidateId) -> u64 {
        self.scores[c.idx()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (CandidateId, u64)> + '_ {
        self.scores
            .iter()
            .enumerate()
            .map(|(i, &s)| (CandidateId(i as u32), s))
    }

    /// All candidates attaining the maximum score.
    pub fn co_winners(&self) -> Vec<CandidateId> {
        let max = self.scores.iter().copied().max().unwrap_or(0);
        self.iter().filter(|&(_, s)| s == max).map(|(c, _)| c).collect()
    }

    pub fn as_map(&self) -> BTreeMap<CandidateId, u64> {
        self.iter().collect()
    }
}

/// Scores a resolved profile: `score(c)` counts the real voters whose
/// resolved ballot contains `c`.
pub fn approval_scores(profile: &UnraveledProfile, instance: &Instance) -> ScoreBoard {
    let mut scores = vec![0u64; instance.num_candidates()];
    let mut counted_voters = 0;
    for (v, ballot) in profile.iter() {
        if instance.is_virtual(v) {
            continue;
        }
        counted_voters += 1;
        for &c in ballot {
            scores[c.idx()] += 1;
        }
    }
    ScoreBoard {
        scores,
        counted_voters,
    }
}

/// Whether `c_star` strictly beats every other candidate. This is the winner
/// notion used throughout the solvers.
pub fn is_unique_winner(board: &ScoreBoard, c_star: CandidateId) -> bool {
    let s = board.score(c_star);
    board.iter().all(|(c, score)| c == c_star || score < s)
}

/// Co-winner variant: `c_star` attains the maximum score, possibly tied.
/// Exposed for experimentation; the solvers never use it.
pub fn is_co_winner(board: &ScoreBoard, c_star: CandidateId) -> bool {
    board.co_winners().contains(&c_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ballot, Instance, UnravelRule};
    use crate::unravel::unravel;

    fn b(ids: &[u32]) -> Ballot {
        ids.iter().map(|&i| CandidateId(i)).collect()
    }

    fn uniform_instance(n: u32) -> Instance {
        Instance::new(
            vec!["c0".into(), "c1".into()],
            (0..n).map(|i| format!("v{i}")).collect(),
            vec![],
            (0..n).map(|_| Some(b(&[0]))).collect(),
            vec![false; n as usize],
            CandidateId(0),
            0,
            UnravelRule::Union,
        )
        .unwrap()
    }

    #[test]
    fn identical_ballots_score_n() {
        let inst = uniform_instance(5);
        let board = approval_scores(&unravel(&inst).unwrap(), &inst);
        assert_eq!(board.score(CandidateId(0)), 5);
        assert_eq!(board.score(CandidateId(1)), 0);
        assert_eq!(board.counted_voters, 5);
        assert!(is_unique_winner(&board, CandidateId(0)));
        assert!(!is_unique_winner(&board, CandidateId(1)));
    }

    #[test]
    fn tie_is_not_unique() {
        let inst = Instance::new(
            vec!["c0".into(), "c1".into()],
            vec!["a".into(), "b".into()],
            vec![],
            vec![Some(b(&[0])), Some(b(&[1]))],
            vec![false; 2],
            CandidateId(0),
            0,
            UnravelRule::Union,
        )
        .unwrap();
        let board = approval_scores(&unravel(&inst).unwrap(), &inst);
        assert!(!is_unique_winner(&board, CandidateId(0)));
        assert!(is_co_winner(&board, CandidateId(0)));
        assert!(is_co_winner(&board, CandidateId(1)));
    }

    #[test]
    fn virtual_voters_do_not_count() {
        let inst = Instance::new(
            vec!["c0".into()],
            vec!["a".into(), "x".into()],
            vec![],
            vec![Some(b(&[0])), Some(b(&[0]))],
            vec![false, true],
            CandidateId(0),
            0,
            UnravelRule::Union,
        )
        .unwrap();
        let board = approval_scores(&unravel(&inst).unwrap(), &inst);
        assert_eq!(board.score(CandidateId(0)), 1);
        assert_eq!(board.counted_voters, 1);
    }

    #[test]
    fn unique_winner_is_unique_per_board() {
        let inst = uniform_instance(3);
        let board = approval_scores(&unravel(&inst).unwrap(), &inst);
        let winners: Vec<_> = inst
            .candidates()
            .filter(|&c| is_unique_winner(&board, c))
            .collect();
        assert!(winners.len() <= 1);
    }
}
