//! Core data model: delegation instances, validation, and redirections.
//!
//! An [`Instance`] is immutable once validated; every mutation (applying
//! redirections, preprocessing) builds a new instance and re-validates it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Redirection cost in abstract currency units.
///
/// `INFINITE_COST` is a sentinel that never fits any finite budget; it is
/// produced by preprocessing and must survive arithmetic, hence the
/// saturating helpers below.
pub type Cost = u64;

/// Sentinel for arcs that can never be redirected within a finite budget.
pub const INFINITE_COST: Cost = u64::MAX;

/// Saturating cost addition; `INFINITE_COST` absorbs.
pub fn add_cost(a: Cost, b: Cost) -> Cost {
    a.saturating_add(b)
}

/// Index of a candidate, dense in `0..m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateId(pub u32);

/// Index of a voter, dense in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VoterId(pub u32);

impl CandidateId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl VoterId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// An approval ballot: the set of approved candidates.
pub type Ballot = BTreeSet<CandidateId>;

/// A delegation arc with its redirection cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Arc {
    pub from: VoterId,
    pub to: VoterId,
    pub cost: Cost,
}

/// The three unraveling functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnravelRule {
    Union,
    Approval,
    GreedyMrc,
}

impl fmt::Display for UnravelRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UnravelRule::Union => "union",
            UnravelRule::Approval => "approval",
            UnravelRule::GreedyMrc => "greedy_mrc",
        };
        f.write_str(s)
    }
}

/// Replacing arc `(from, old_to)` by `(from, new_to)` at the original cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Redirection {
    pub from: VoterId,
    pub old_to: VoterId,
    pub new_to: VoterId,
}

/// A structural problem found while validating an instance.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("delegation graph contains a cycle through `{0}`")]
    CycleDetected(String),
    #[error("voter `{0}` has both a ballot and outgoing delegations")]
    BallotOnPassiveVoter(String),
    #[error("active voter `{0}` has no ballot")]
    MissingBallotOnActiveVoter(String),
    #[error("parallel arc from `{0}` to `{1}`")]
    ParallelArc(String, String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("voter `{0}` has an empty ballot")]
    EmptyBallot(String),
    #[error("voter `{0}` delegates to itself")]
    SelfDelegation(String),
    #[error("instance has no voters")]
    NoVoters,
    #[error("budget must be finite")]
    InfiniteBudget,
}

/// Validation failure carrying every violation found.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid instance: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Failure while applying a redirection set.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("no arc from `{0}` to `{1}`")]
    ArcNotFound(String, String),
    #[error("arc from `{0}` redirected more than once")]
    DuplicateArcRedirect(String),
    #[error("redirecting `{0}` -> `{1}` would create a cycle")]
    WouldCreateCycle(String, String),
    #[error("redirecting `{0}` -> `{1}` would create a parallel arc")]
    WouldCreateParallelArc(String, String),
    #[error("redirection target `{0}` is invalid for arc from `{1}`")]
    InvalidTarget(String, String),
    #[error("total redirection cost {cost} exceeds budget {budget}")]
    BudgetExceeded { cost: Cost, budget: Cost },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Aggregate structural parameters of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InstanceStats {
    /// Number of voters.
    pub n: usize,
    /// Number of candidates.
    pub m: usize,
    /// Number of active voters.
    pub t: usize,
    /// Maximum out-degree (the `#delegations` parameter).
    pub max_out_degree: usize,
    /// Maximum in-degree.
    pub max_in_degree: usize,
    /// Maximum number of arcs on a directed path.
    pub longest_path: usize,
    /// Maximum ballot size among active voters (the `#approvals` parameter).
    pub max_ballot_size: usize,
}

/// A validated, immutable control instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    candidate_names: Vec<String>,
    voter_names: Vec<String>,
    /// Sorted by `(from, to)`; index into this vec is the canonical arc id.
    arcs: Vec<Arc>,
    /// `Some` exactly for active voters.
    ballots: Vec<Option<Ballot>>,
    /// Zero-vote markers (set by preprocessing).
    virtual_voters: Vec<bool>,
    preferred: CandidateId,
    budget: Cost,
    rule: UnravelRule,
    /// Arc ids grouped by source voter.
    out_arcs: Vec<Vec<usize>>,
    stats: InstanceStats,
}

impl Instance {
    /// Validates the raw parts and builds an instance.
    ///
    /// All violations are collected rather than failing on the first one.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        candidate_names: Vec<String>,
        voter_names: Vec<String>,
        mut arcs: Vec<Arc>,
        ballots: Vec<Option<Ballot>>,
        virtual_voters: Vec<bool>,
        preferred: CandidateId,
        budget: Cost,
        rule: UnravelRule,
    ) -> Result<Self, ValidationError> {
        assert_eq!(voter_names.len(), ballots.len());
        assert_eq!(voter_names.len(), virtual_voters.len());
        let n = voter_names.len();
        let m = candidate_names.len();
        let mut violations = Vec::new();

        if n == 0 {
            violations.push(Violation::NoVoters);
        }
        if budget == INFINITE_COST {
            violations.push(Violation::InfiniteBudget);
        }
        let mut seen = BTreeSet::new();
        for name in candidate_names.iter().chain(voter_names.iter()) {
            if !seen.insert(name) {
                violations.push(Violation::DuplicateId(name.clone()));
            }
        }
        if preferred.idx() >= m {
            violations.push(Violation::UnknownId(format!(
                "candidate #{}",
                preferred.0
            )));
        }

        arcs.sort();
        let mut out_arcs = vec![Vec::new(); n];
        for (i, arc) in arcs.iter().enumerate() {
            if arc.from.idx() >= n || arc.to.idx() >= n {
                violations.push(Violation::UnknownId(format!(
                    "voter #{}",
                    arc.from.0.max(arc.to.0)
                )));
                continue;
            }
            if arc.from == arc.to {
                violations.push(Violation::SelfDelegation(
                    voter_names[arc.from.idx()].clone(),
                ));
                continue;
            }
            if i > 0 && arcs[i - 1].from == arc.from && arcs[i - 1].to == arc.to {
                violations.push(Violation::ParallelArc(
                    voter_names[arc.from.idx()].clone(),
                    voter_names[arc.to.idx()].clone(),
                ));
                continue;
            }
            out_arcs[arc.from.idx()].push(i);
        }

        for v in 0..n {
            let active = out_arcs[v].is_empty();
            match (&ballots[v], active) {
                (Some(_), false) => {
                    violations.push(Violation::BallotOnPassiveVoter(voter_names[v].clone()))
                }
                (None, true) => {
                    violations.push(Violation::MissingBallotOnActiveVoter(voter_names[v].clone()))
                }
                (Some(b), true) => {
                    if b.is_empty() {
                        violations.push(Violation::EmptyBallot(voter_names[v].clone()));
                    }
                    if let Some(c) = b.iter().find(|c| c.idx() >= m) {
                        violations.push(Violation::UnknownId(format!("candidate #{}", c.0)));
                    }
                }
                (None, false) => {}
            }
        }

        if let Some(v) = find_cycle(n, &arcs) {
            let name = voter_names
                .get(v)
                .cloned()
                .unwrap_or_else(|| format!("#{v}"));
            violations.push(Violation::CycleDetected(name));
        }

        if !violations.is_empty() {
            return Err(ValidationError { violations });
        }

        let stats = compute_stats(m, &arcs, &ballots, &out_arcs);
        Ok(Instance {
            candidate_names,
            voter_names,
            arcs,
            ballots,
            virtual_voters,
            preferred,
            budget,
            rule,
            out_arcs,
            stats,
        })
    }

    pub fn num_candidates(&self) -> usize {
        self.candidate_names.len()
    }

    pub fn num_voters(&self) -> usize {
        self.voter_names.len()
    }

    pub fn candidates(&self) -> impl Iterator<Item = CandidateId> {
        (0..self.candidate_names.len() as u32).map(CandidateId)
    }

    pub fn voters(&self) -> impl Iterator<Item = VoterId> {
        (0..self.voter_names.len() as u32).map(VoterId)
    }

    pub fn candidate_name(&self, c: CandidateId) -> &str {
        &self.candidate_names[c.idx()]
    }

    pub fn voter_name(&self, v: VoterId) -> &str {
        &self.voter_names[v.idx()]
    }

    pub fn candidate_by_name(&self, name: &str) -> Option<CandidateId> {
        self.candidate_names
            .iter()
            .position(|n| n == name)
            .map(|i| CandidateId(i as u32))
    }

    pub fn voter_by_name(&self, name: &str) -> Option<VoterId> {
        self.voter_names
            .iter()
            .position(|n| n == name)
            .map(|i| VoterId(i as u32))
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> Arc {
        self.arcs[id]
    }

    /// Canonical arc ids leaving `v`, sorted by target.
    pub fn out_arcs(&self, v: VoterId) -> &[usize] {
        &self.out_arcs[v.idx()]
    }

    pub fn find_arc(&self, from: VoterId, to: VoterId) -> Option<usize> {
        self.arcs
            .binary_search_by(|a| (a.from, a.to).cmp(&(from, to)))
            .ok()
    }

    pub fn is_active(&self, v: VoterId) -> bool {
        self.ballots[v.idx()].is_some()
    }

    /// Declared ballot of an active voter, `None` for passive voters.
    pub fn ballot(&self, v: VoterId) -> Option<&Ballot> {
        self.ballots[v.idx()].as_ref()
    }

    pub fn active_voters(&self) -> impl Iterator<Item = VoterId> + '_ {
        self.voters().filter(|v| self.is_active(*v))
    }

    /// Whether `v` carries the zero-vote marker set by preprocessing.
    pub fn is_virtual(&self, v: VoterId) -> bool {
        self.virtual_voters[v.idx()]
    }

    pub fn preferred(&self) -> CandidateId {
        self.preferred
    }

    pub fn budget(&self) -> Cost {
        self.budget
    }

    pub fn rule(&self) -> UnravelRule {
        self.rule
    }

    pub fn stats(&self) -> &InstanceStats {
        &self.stats
    }

    /// Returns a copy with a different budget (used by harnesses).
    pub fn with_budget(&self, budget: Cost) -> Result<Instance, ValidationError> {
        let mut parts = self.clone();
        parts.budget = budget;
        Instance::new(
            parts.candidate_names,
            parts.voter_names,
            parts.arcs,
            parts.ballots,
            parts.virtual_voters,
            parts.preferred,
            budget,
            parts.rule,
        )
    }

    /// Applies a redirection set, returning the rewired instance.
    ///
    /// Arc count, every out-degree, and the cost multiset are preserved; the
    /// result is re-validated so acyclicity and the no-parallel-arc rule are
    /// guaranteed to still hold.
    pub fn apply_redirections(&self, redirections: &[Redirection]) -> Result<Instance, ApplyError> {
        let mut new_arcs = self.arcs.clone();
        let mut touched = BTreeSet::new();
        for r in redirections {
            let id = self.find_arc(r.from, r.old_to).ok_or_else(|| {
                ApplyError::ArcNotFound(
                    self.voter_name(r.from).to_owned(),
                    self.voter_name(r.old_to).to_owned(),
                )
            })?;
            if !touched.insert(id) {
                return Err(ApplyError::DuplicateArcRedirect(
                    self.voter_name(r.from).to_owned(),
                ));
            }
            if r.new_to == r.from || r.new_to == r.old_to || r.new_to.idx() >= self.num_voters() {
                return Err(ApplyError::InvalidTarget(
                    format!("#{}", r.new_to.0),
                    self.voter_name(r.from).to_owned(),
                ));
            }
            new_arcs[id].to = r.new_to;
        }

        // Pre-check the two failure modes that re-validation would report,
        // so callers get the precise error.
        let mut pairs = BTreeSet::new();
        for arc in &new_arcs {
            if !pairs.insert((arc.from, arc.to)) {
                return Err(ApplyError::WouldCreateParallelArc(
                    self.voter_name(arc.from).to_owned(),
                    self.voter_name(arc.to).to_owned(),
                ));
            }
        }
        if find_cycle(self.num_voters(), &new_arcs).is_some() {
            let r = redirections.first().expect("cycle requires a redirection");
            return Err(ApplyError::WouldCreateCycle(
                self.voter_name(r.from).to_owned(),
                self.voter_name(r.new_to).to_owned(),
            ));
        }

        Instance::new(
            self.candidate_names.clone(),
            self.voter_names.clone(),
            new_arcs,
            self.ballots.clone(),
            self.virtual_voters.clone(),
            self.preferred,
            self.budget,
            self.rule,
        )
        .map_err(ApplyError::from)
    }

    /// Like [`Instance::apply_redirections`] but also enforces the budget.
    pub fn apply_redirections_within_budget(
        &self,
        redirections: &[Redirection],
    ) -> Result<Instance, ApplyError> {
        let cost = self.redirection_cost(redirections)?;
        if cost > self.budget {
            return Err(ApplyError::BudgetExceeded {
                cost,
                budget: self.budget,
            });
        }
        self.apply_redirections(redirections)
    }

    /// Total cost of a redirection set (the original arc costs).
    pub fn redirection_cost(&self, redirections: &[Redirection]) -> Result<Cost, ApplyError> {
        let mut total: Cost = 0;
        for r in redirections {
            let id = self.find_arc(r.from, r.old_to).ok_or_else(|| {
                ApplyError::ArcNotFound(
                    self.voter_name(r.from).to_owned(),
                    self.voter_name(r.old_to).to_owned(),
                )
            })?;
            total = add_cost(total, self.arcs[id].cost);
        }
        Ok(total)
    }
}

/// Returns some voter on a directed cycle, if any.
fn find_cycle(n: usize, arcs: &[Arc]) -> Option<usize> {
    let mut out = vec![Vec::new(); n];
    for arc in arcs {
        if arc.from.idx() < n && arc.to.idx() < n && arc.from != arc.to {
            out[arc.from.idx()].push(arc.to.idx());
        }
    }
    // Iterative three-color DFS.
    let mut color = vec![0u8; n];
    for start in 0..n {
        if color[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        color[start] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < out[v].len() {
                let u = out[v][*next];
                *next += 1;
                match color[u] {
                    0 => {
                        color[u] = 1;
                        stack.push((u, 0));
                    }
                    1 => return Some(u),
                    _ => {}
                }
            } else {
                color[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

fn compute_stats(
    m: usize,
    arcs: &[Arc],
    ballots: &[Option<Ballot>],
    out_arcs: &[Vec<usize>],
) -> InstanceStats {
    let n = ballots.len();
    let mut in_deg = vec![0usize; n];
    for arc in arcs {
        in_deg[arc.to.idx()] += 1;
    }
    let t = ballots.iter().filter(|b| b.is_some()).count();
    let max_out_degree = out_arcs.iter().map(Vec::len).max().unwrap_or(0);
    let max_in_degree = in_deg.iter().copied().max().unwrap_or(0);
    let max_ballot_size = ballots
        .iter()
        .filter_map(|b| b.as_ref().map(BTreeSet::len))
        .max()
        .unwrap_or(0);

    // Longest path in arcs, by DP over the DAG in reverse topological order.
    let order = topological_order(n, arcs).expect("validated instances are acyclic");
    let mut depth = vec![0usize; n];
    for &v in order.iter().rev() {
        for &a in &out_arcs[v] {
            depth[v] = depth[v].max(depth[arcs[a].to.idx()] + 1);
        }
    }
    let longest_path = depth.iter().copied().max().unwrap_or(0);

    InstanceStats {
        n,
        m,
        t,
        max_out_degree,
        max_in_degree,
        longest_path,
        max_ballot_size,
    }
}

/// Topological order of the delegation DAG (delegators before delegatees).
/// `None` if the graph has a cycle.
pub(crate) fn topological_order(n: usize, arcs: &[Arc]) -> Option<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    let mut in_deg = vec![0usize; n];
    for arc in arcs {
        out[arc.from.idx()].push(arc.to.idx());
        in_deg[arc.to.idx()] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| in_deg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop() {
        order.push(v);
        for &u in &out[v] {
            in_deg[u] -= 1;
            if in_deg[u] == 0 {
                queue.push(u);
            }
        }
    }
    (order.len() == n).then_some(order)
}

// ---------------------------------------------------------------------------
// JSON instance format
// ---------------------------------------------------------------------------

/// Error produced when decoding an instance from JSON.
#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("voter `{0}` must have exactly one of \"ballot\" or \"delegates\"")]
    BallotOrDelegates(String),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Serde-facing mirror of the canonical JSON instance format.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceJson {
    candidates: Vec<String>,
    preferred: String,
    budget: Cost,
    rule: UnravelRule,
    voters: Vec<VoterJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct VoterJson {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ballot: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delegates: Option<Vec<DelegateJson>>,
    #[serde(
        default,
        rename = "virtual",
        skip_serializing_if = "std::ops::Not::not"
    )]
    virtual_: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct DelegateJson {
    to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<CostJson>,
}

/// Arc cost in JSON: a nonnegative integer or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CostJson(Cost);

impl Serialize for CostJson {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        if self.0 == INFINITE_COST {
            ser.serialize_str("inf")
        } else {
            ser.serialize_u64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for CostJson {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = serde_json::Value::deserialize(de)?;
        match v {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(CostJson)
                .ok_or_else(|| D::Error::custom("cost must be a nonnegative integer")),
            serde_json::Value::String(s) if s == "inf" => Ok(CostJson(INFINITE_COST)),
            _ => Err(D::Error::custom("cost must be an integer or \"inf\"")),
        }
    }
}

impl Instance {
    /// Parses and validates an instance from its canonical JSON encoding.
    pub fn from_json_str(text: &str) -> Result<Instance, ParseError> {
        let raw: InstanceJson = serde_json::from_str(text)?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: InstanceJson) -> Result<Instance, ParseError> {
        // Name resolution happens before validation proper, so unknown or
        // duplicate names surface as violations with the offending string.
        let mut violations = Vec::new();
        let candidate_index: BTreeMap<&str, u32> = raw
            .candidates
            .iter()
            .enumerate()
            .map(|(i, name)| (name.as_str(), i as u32))
            .collect();
        let voter_index: BTreeMap<&str, u32> = raw
            .voters
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i as u32))
            .collect();

        let preferred = match candidate_index.get(raw.preferred.as_str()) {
            Some(&i) => CandidateId(i),
            None => {
                violations.push(Violation::UnknownId(raw.preferred.clone()));
                CandidateId(0)
            }
        };

        let mut arcs = Vec::new();
        let mut ballots = Vec::with_capacity(raw.voters.len());
        let mut virtuals = Vec::with_capacity(raw.voters.len());
        for (i, voter) in raw.voters.iter().enumerate() {
            virtuals.push(voter.virtual_);
            match (&voter.ballot, &voter.delegates) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(ParseError::BallotOrDelegates(voter.id.clone()));
                }
                (Some(ballot), None) => {
                    let mut set = Ballot::new();
                    for name in ballot {
                        match candidate_index.get(name.as_str()) {
                            Some(&c) => {
                                set.insert(CandidateId(c));
                            }
                            None => violations.push(Violation::UnknownId(name.clone())),
                        }
                    }
                    ballots.push(Some(set));
                }
                (None, Some(delegates)) => {
                    ballots.push(None);
                    for d in delegates {
                        match voter_index.get(d.to.as_str()) {
                            Some(&to) => arcs.push(Arc {
                                from: VoterId(i as u32),
                                to: VoterId(to),
                                cost: d.cost.map_or(1, |c| c.0),
                            }),
                            None => violations.push(Violation::UnknownId(d.to.clone())),
                        }
                    }
                }
            }
        }
        if !violations.is_empty() {
            return Err(ParseError::Invalid(ValidationError { violations }));
        }

        let voter_names = raw.voters.into_iter().map(|v| v.id).collect();
        Instance::new(
            raw.candidates,
            voter_names,
            arcs,
            ballots,
            virtuals,
            preferred,
            raw.budget,
            raw.rule,
        )
        .map_err(ParseError::from)
    }

    fn to_raw(&self) -> InstanceJson {
        let voters = self
            .voters()
            .map(|v| {
                let (ballot, delegates) = match self.ballot(v) {
                    Some(b) => (
                        Some(
                            b.iter()
                                .map(|c| self.candidate_name(*c).to_owned())
                                .collect(),
                        ),
                        None,
                    ),
                    None => (
                        None,
                        Some(
                            self.out_arcs(v)
                                .iter()
                                .map(|&a| DelegateJson {
                                    to: self.voter_name(self.arcs[a].to).to_owned(),
                                    cost: Some(CostJson(self.arcs[a].cost)),
                                })
                                .collect(),
                        ),
                    ),
                };
                VoterJson {
                    id: self.voter_name(v).to_owned(),
                    ballot,
                    delegates,
                    virtual_: self.is_virtual(v),
                }
            })
            .collect();
        InstanceJson {
            candidates: self.candidate_names.clone(),
            preferred: self.candidate_name(self.preferred).to_owned(),
            budget: self.budget,
            rule: self.rule,
            voters,
        }
    }

    /// Canonical JSON encoding (voters in index order, delegates by target).
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_raw()).expect("instance serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("instance serialization cannot fail")
    }
}

// ---------------------------------------------------------------------------
// Solutions
// ---------------------------------------------------------------------------

/// A costed redirection set certified to make the preferred candidate the
/// unique winner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Sorted by `(from, old_to, new_to)`.
    pub redirections: Vec<Redirection>,
    pub total_cost: Cost,
    /// Approval scores after applying the redirections and re-unraveling.
    pub resulting_scores: BTreeMap<CandidateId, u64>,
}

impl Solution {
    /// Builds a solution from a redirection set, re-running the full
    /// apply/unravel/tally pipeline as certification.
    pub fn assemble(
        instance: &Instance,
        mut redirections: Vec<Redirection>,
    ) -> Result<Solution, ApplyError> {
        redirections.sort();
        let total_cost = instance.redirection_cost(&redirections)?;
        if total_cost > instance.budget() {
            return Err(ApplyError::BudgetExceeded {
                cost: total_cost,
                budget: instance.budget(),
            });
        }
        let applied = instance.apply_redirections(&redirections)?;
        let profile = crate::unravel::unravel(&applied).expect("validated instance unravels");
        let board = crate::tally::approval_scores(&profile, &applied);
        let resulting_scores = applied
            .candidates()
            .map(|c| (c, board.score(c)))
            .collect();
        Ok(Solution {
            redirections,
            total_cost,
            resulting_scores,
        })
    }

    pub fn num_redirections(&self) -> usize {
        self.redirections.len()
    }

    /// Deterministic comparison key: cost first, then the sorted triple list.
    pub fn order_key(&self) -> (Cost, Vec<(u32, u32, u32)>) {
        (
            self.total_cost,
            self.redirections
                .iter()
                .map(|r| (r.from.0, r.old_to.0, r.new_to.0))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ballot(ids: &[u32]) -> Ballot {
        ids.iter().map(|&i| CandidateId(i)).collect()
    }

    fn two_voter_instance() -> Result<Instance, ValidationError> {
        Instance::new(
            vec!["c1".into(), "cstar".into()],
            vec!["a".into(), "p".into()],
            vec![Arc {
                from: VoterId(1),
                to: VoterId(0),
                cost: 2,
            }],
            vec![Some(ballot(&[0])), None],
            vec![false, false],
            CandidateId(1),
            3,
            UnravelRule::Union,
        )
    }

    #[test]
    fn minimal_instance_validates() {
        let inst = Instance::new(
            vec!["cstar".into()],
            vec!["v".into()],
            vec![],
            vec![Some(ballot(&[0]))],
            vec![false],
            CandidateId(0),
            0,
            UnravelRule::Union,
        )
        .unwrap();
        assert_eq!(inst.stats().n, 1);
        assert_eq!(inst.stats().t, 1);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err = Instance::new(
            vec!["c".into()],
            vec!["a".into(), "b".into()],
            vec![
                Arc {
                    from: VoterId(0),
                    to: VoterId(1),
                    cost: 1,
                },
                Arc {
                    from: VoterId(1),
                    to: VoterId(0),
                    cost: 1,
                },
            ],
            vec![None, None],
            vec![false, false],
            CandidateId(0),
            1,
            UnravelRule::Union,
        )
        .unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|v| matches!(v, Violation::CycleDetected(_))));
    }

    #[test]
    fn ballot_and_delegation_mismatches() {
        let err = Instance::new(
            vec!["c".into()],
            vec!["a".into(), "b".into()],
            vec![Arc {
                from: VoterId(0),
                to: VoterId(1),
                cost: 1,
            }],
            vec![Some(ballot(&[0])), None],
            vec![false, false],
            CandidateId(0),
            1,
            UnravelRule::Union,
        )
        .unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|v| matches!(v, Violation::BallotOnPassiveVoter(_))));
        assert!(err
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MissingBallotOnActiveVoter(_))));
    }

    #[test]
    fn empty_ballot_rejected() {
        let err = Instance::new(
            vec!["c".into()],
            vec!["a".into()],
            vec![],
            vec![Some(Ballot::new())],
            vec![false],
            CandidateId(0),
            1,
            UnravelRule::Union,
        )
        .unwrap_err();
        assert_eq!(err.violations, vec![Violation::EmptyBallot("a".into())]);
    }

    #[test]
    fn parallel_arcs_rejected() {
        let err = Instance::new(
            vec!["c".into()],
            vec!["a".into(), "b".into()],
            vec![
                Arc {
                    from: VoterId(1),
                    to: VoterId(0),
                    cost: 1,
                },
                Arc {
                    from: VoterId(1),
                    to: VoterId(0),
                    cost: 2,
                },
            ],
            vec![Some(ballot(&[0])), None],
            vec![false, false],
            CandidateId(0),
            1,
            UnravelRule::Union,
        )
        .unwrap_err();
        assert!(err
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ParallelArc(_, _))));
    }

    #[test]
    fn empty_redirection_set_is_identity() {
        let inst = two_voter_instance().unwrap();
        let applied = inst.apply_redirections(&[]).unwrap();
        assert_eq!(inst, applied);
    }

    #[test]
    fn redirection_preserves_structure() {
        let inst = Instance::new(
            vec!["c1".into(), "c2".into()],
            vec!["a".into(), "b".into(), "p".into()],
            vec![Arc {
                from: VoterId(2),
                to: VoterId(0),
                cost: 5,
            }],
            vec![Some(ballot(&[0])), Some(ballot(&[1])), None],
            vec![false; 3],
            CandidateId(1),
            10,
            UnravelRule::Union,
        )
        .unwrap();
        let applied = inst
            .apply_redirections(&[Redirection {
                from: VoterId(2),
                old_to: VoterId(0),
                new_to: VoterId(1),
            }])
            .unwrap();
        assert_eq!(applied.arcs().len(), inst.arcs().len());
        assert_eq!(applied.arcs()[0].cost, 5);
        assert_eq!(applied.arcs()[0].to, VoterId(1));
        assert_eq!(applied.stats().t, inst.stats().t);
    }

    #[test]
    fn forced_cycle_detected_on_apply() {
        // chain a -> b -> c; redirecting (b, c) to a closes a 2-cycle
        let inst = Instance::new(
            vec!["x".into()],
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                Arc {
                    from: VoterId(0),
                    to: VoterId(1),
                    cost: 1,
                },
                Arc {
                    from: VoterId(1),
                    to: VoterId(2),
                    cost: 1,
                },
            ],
            vec![None, None, Some(ballot(&[0]))],
            vec![false; 3],
            CandidateId(0),
            5,
            UnravelRule::Union,
        )
        .unwrap();
        let err = inst
            .apply_redirections(&[Redirection {
                from: VoterId(1),
                old_to: VoterId(2),
                new_to: VoterId(0),
            }])
            .unwrap_err();
        assert!(matches!(err, ApplyError::WouldCreateCycle(_, _)));
    }

    #[test]
    fn duplicate_redirect_rejected() {
        let inst = two_voter_instance().unwrap();
        let r = Redirection {
            from: VoterId(1),
            old_to: VoterId(0),
            new_to: VoterId(0),
        };
        let err = inst.apply_redirections(&[r, r]).unwrap_err();
        // new_to == old_to triggers first
        assert!(matches!(
            err,
            ApplyError::InvalidTarget(_, _) | ApplyError::DuplicateArcRedirect(_)
        ));
    }

    #[test]
    fn budget_enforcement() {
        let inst = Instance::new(
            vec!["c1".into(), "c2".into()],
            vec!["a".into(), "b".into(), "p".into()],
            vec![Arc {
                from: VoterId(2),
                to: VoterId(0),
                cost: 7,
            }],
            vec![Some(ballot(&[0])), Some(ballot(&[1])), None],
            vec![false; 3],
            CandidateId(1),
            3,
            UnravelRule::Union,
        )
        .unwrap();
        let err = inst
            .apply_redirections_within_budget(&[Redirection {
                from: VoterId(2),
                old_to: VoterId(0),
                new_to: VoterId(1),
            }])
            .unwrap_err();
        assert!(matches!(err, ApplyError::BudgetExceeded { cost: 7, .. }));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{ "candidates": ["c1","c2","cstar"], "preferred": "cstar", "budget": 3, "rule": "union",
          "voters": [ {"id":"v1","ballot":["c1"]}, {"id":"v2","delegates":[{"to":"v1","cost":2}]} ] }"#;
        let inst = Instance::from_json_str(text).unwrap();
        assert_eq!(inst.stats().n, 2);
        assert_eq!(inst.stats().t, 1);
        assert_eq!(inst.arcs()[0].cost, 2);
        let reparsed = Instance::from_json_str(&inst.to_json_string()).unwrap();
        assert_eq!(inst, reparsed);
    }

    #[test]
    fn json_default_cost_and_inf() {
        let text = r#"{ "candidates": ["c"], "preferred": "c", "budget": 1, "rule": "approval",
          "voters": [ {"id":"a","ballot":["c"]}, {"id":"p","delegates":[{"to":"a"}]},
                      {"id":"q","delegates":[{"to":"a","cost":"inf"}]} ] }"#;
        let inst = Instance::from_json_str(text).unwrap();
        let pa = inst
            .find_arc(inst.voter_by_name("p").unwrap(), inst.voter_by_name("a").unwrap())
            .unwrap();
        let qa = inst
            .find_arc(inst.voter_by_name("q").unwrap(), inst.voter_by_name("a").unwrap())
            .unwrap();
        assert_eq!(inst.arc(pa).cost, 1);
        assert_eq!(inst.arc(qa).cost, INFINITE_COST);
        let reparsed = Instance::from_json_str(&inst.to_json_string()).unwrap();
        assert_eq!(inst, reparsed);
    }

    #[test]
    fn json_requires_exactly_one_of_ballot_delegates() {
        let text = r#"{ "candidates": ["c"], "preferred": "c", "budget": 1, "rule": "union",
          "voters": [ {"id":"a"} ] }"#;
        assert!(matches!(
            Instance::from_json_str(text),
            Err(ParseError::BallotOrDelegates(_))
        ));
    }

    #[test]
    fn json_unknown_names_are_violations() {
        let text = r#"{ "candidates": ["c"], "preferred": "nope", "budget": 1, "rule": "union",
          "voters": [ {"id":"a","ballot":["c"]} ] }"#;
        match Instance::from_json_str(text) {
            Err(ParseError::Invalid(e)) => {
                assert!(e
                    .violations
                    .iter()
                    .any(|v| matches!(v, Violation::UnknownId(s) if s == "nope")));
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }
}
