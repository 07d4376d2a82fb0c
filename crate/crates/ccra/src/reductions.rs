//! Generators turning Vertex Cover (in cubic graphs) and Hitting Set
//! instances into control instances, plus the forward certificate
//! translation used to exercise the constructions end to end.
//!
//! Every variant is calibrated so that before any control action each
//! edge/set candidate scores exactly the budget `k` while the preferred
//! candidate scores 1 (the special voter). Dummy voters per edge/set are
//! sized as `k - base`, where `base` counts the non-dummy voters whose
//! resolved ballot contains that candidate, so the calibration holds by
//! construction. The only arcs affordable within the budget are the
//! per-element `(u, u')` arcs of cost 1; covering elements redirect them to
//! the special voter.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use crate::model::{
    Arc, Ballot, CandidateId, Cost, Instance, Redirection, UnravelRule, ValidationError, VoterId,
};

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error("vertex `{0}` does not have degree three")]
    NotCubic(String),
    #[error("budget {got} is below the calibration minimum {required}")]
    BudgetTooSmall { required: u64, got: u64 },
    #[error("set system contains an empty set")]
    EmptySet,
    #[error("source instance has no vertices/elements")]
    EmptyUniverse,
    #[error("edge endpoints coincide at `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}`")]
    DuplicateEdge(String),
    #[error("unknown vertex/element `{0}`")]
    UnknownElement(String),
    #[error("cover misses set #{1} (containing `{0}`)")]
    NotACover(String, usize),
    #[error("cover of size {size} exceeds the budget {budget}")]
    CoverTooLarge { size: usize, budget: u64 },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// A simple graph in which every vertex has degree exactly three.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicGraph {
    vertex_names: Vec<String>,
    /// Normalized `(low, high)` index pairs, sorted.
    edges: Vec<(usize, usize)>,
}

impl CubicGraph {
    pub fn new(
        vertex_names: Vec<String>,
        raw_edges: Vec<(usize, usize)>,
    ) -> Result<Self, ReductionError> {
        if vertex_names.is_empty() {
            return Err(ReductionError::EmptyUniverse);
        }
        let n = vertex_names.len();
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(raw_edges.len());
        for (a, b) in raw_edges {
            if a >= n || b >= n {
                return Err(ReductionError::UnknownElement(format!("#{}", a.max(b))));
            }
            if a == b {
                return Err(ReductionError::SelfLoop(vertex_names[a].clone()));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(ReductionError::DuplicateEdge(format!(
                "{}-{}",
                vertex_names[w[0].0], vertex_names[w[0].1]
            )));
        }
        let mut degree = vec![0usize; n];
        for &(a, b) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        if let Some(v) = degree.iter().position(|&d| d != 3) {
            return Err(ReductionError::NotCubic(vertex_names[v].clone()));
        }
        Ok(CubicGraph {
            vertex_names,
            edges,
        })
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Whether `cover` (by vertex index) touches every edge.
    pub fn is_vertex_cover(&self, cover: &BTreeSet<usize>) -> bool {
        self.edges
            .iter()
            .all(|&(a, b)| cover.contains(&a) || cover.contains(&b))
    }

    /// The complete graph on four vertices, the smallest cubic graph.
    pub fn complete4() -> CubicGraph {
        let names = (1..=4).map(|i| i.to_string()).collect();
        let edges = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        CubicGraph::new(names, edges).expect("K4 is cubic")
    }

    /// The Petersen graph: outer 5-cycle, inner pentagram, five spokes.
    pub fn petersen() -> CubicGraph {
        let names = (0..10).map(|i| format!("p{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
            edges.push((i, 5 + i));
        }
        CubicGraph::new(names, edges).expect("the Petersen graph is cubic")
    }
}

/// A Hitting Set instance: universe, family of subsets, and threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    element_names: Vec<String>,
    sets: Vec<BTreeSet<usize>>,
    pub threshold: u64,
}

impl SetSystem {
    pub fn new(
        element_names: Vec<String>,
        sets: Vec<BTreeSet<usize>>,
        threshold: u64,
    ) -> Result<Self, ReductionError> {
        if element_names.is_empty() {
            return Err(ReductionError::EmptyUniverse);
        }
        for set in &sets {
            if set.is_empty() {
                return Err(ReductionError::EmptySet);
            }
            if let Some(&e) = set.iter().find(|&&e| e >= element_names.len()) {
                return Err(ReductionError::UnknownElement(format!("#{e}")));
            }
        }
        Ok(SetSystem {
            element_names,
            sets,
            threshold,
        })
    }

    pub fn element_names(&self) -> &[String] {
        &self.element_names
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    pub fn is_hitting_set(&self, chosen: &BTreeSet<usize>) -> bool {
        self.sets.iter().all(|s| !s.is_disjoint(chosen))
    }
}

#[derive(Debug, Deserialize)]
struct GraphJson {
    vertices: Vec<String>,
    edges: Vec<(String, String)>,
}

/// Parses `{"vertices": [...], "edges": [["u","v"], ...]}`.
pub fn parse_graph_json(text: &str) -> Result<CubicGraph, ReductionError> {
    let raw: GraphJson = serde_json::from_str(text)?;
    let index: BTreeMap<&str, usize> = raw
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut edges = Vec::with_capacity(raw.edges.len());
    for (a, b) in &raw.edges {
        let ia = *index
            .get(a.as_str())
            .ok_or_else(|| ReductionError::UnknownElement(a.clone()))?;
        let ib = *index
            .get(b.as_str())
            .ok_or_else(|| ReductionError::UnknownElement(b.clone()))?;
        edges.push((ia, ib));
    }
    CubicGraph::new(raw.vertices, edges)
}

#[derive(Debug, Deserialize)]
struct SetSystemJson {
    universe: Vec<String>,
    sets: Vec<Vec<String>>,
    k: u64,
}

/// Parses `{"universe": [...], "sets": [[...], ...], "k": K}`.
pub fn parse_set_system_json(text: &str) -> Result<SetSystem, ReductionError> {
    let raw: SetSystemJson = serde_json::from_str(text)?;
    let index: BTreeMap<&str, usize> = raw
        .universe
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut sets = Vec::with_capacity(raw.sets.len());
    for set in &raw.sets {
        let mut s = BTreeSet::new();
        for e in set {
            s.insert(
                *index
                    .get(e.as_str())
                    .ok_or_else(|| ReductionError::UnknownElement(e.clone()))?,
            );
        }
        sets.push(s);
    }
    SetSystem::new(raw.universe, sets, raw.k)
}

/// Gadget layout for the Vertex Cover constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcVariant {
    /// Element gadgets delegate to edge voters directly; out-degree <= 3,
    /// paths <= 2, costs in {1, 2}.
    MultiA,
    /// Split gadgets and chained dummies; in- and out-degree <= 2.
    MultiB,
    /// Single delegation: the prime voter votes directly; paths <= 1, all
    /// costs 1, ballots of size <= 3.
    SingleA,
    /// Single delegation with chained dummies; in-degree <= 1.
    SingleB,
}

impl VcVariant {
    pub fn name(self) -> &'static str {
        match self {
            VcVariant::MultiA => "multi-a",
            VcVariant::MultiB => "multi-b",
            VcVariant::SingleA => "single-a",
            VcVariant::SingleB => "single-b",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsVariant {
    Multi,
    Single,
}

/// Bookkeeping mapping source covers to redirection sets.
#[derive(Debug, Clone)]
pub struct ReductionCertificate {
    pub element_names: Vec<String>,
    /// Source sets over element indices (edges become 2-element sets).
    pub sets: Vec<BTreeSet<usize>>,
    pub budget: u64,
    /// Per element: the cost-1 arc `(u, u')` that a cover redirects.
    pub element_arcs: Vec<(VoterId, VoterId)>,
    /// The special voter approving only the preferred candidate.
    pub special_voter: VoterId,
}

/// Incrementally assembles the gadget instance.
struct GadgetBuilder {
    candidates: Vec<String>,
    voters: Vec<String>,
    arcs: Vec<Arc>,
    ballots: Vec<Option<Ballot>>,
}

impl GadgetBuilder {
    fn new() -> Self {
        GadgetBuilder {
            candidates: Vec::new(),
            voters: Vec::new(),
            arcs: Vec::new(),
            ballots: Vec::new(),
        }
    }

    fn candidate(&mut self, name: String) -> CandidateId {
        self.candidates.push(name);
        CandidateId(self.candidates.len() as u32 - 1)
    }

    fn active(&mut self, name: String, ballot: Ballot) -> VoterId {
        self.voters.push(name);
        self.ballots.push(Some(ballot));
        VoterId(self.voters.len() as u32 - 1)
    }

    fn passive(&mut self, name: String) -> VoterId {
        self.voters.push(name);
        self.ballots.push(None);
        VoterId(self.voters.len() as u32 - 1)
    }

    fn arc(&mut self, from: VoterId, to: VoterId, cost: Cost) {
        self.arcs.push(Arc { from, to, cost });
    }

    fn build(self, preferred: CandidateId, budget: u64) -> Result<Instance, ReductionError> {
        let virtuals = vec![false; self.voters.len()];
        Instance::new(
            self.candidates,
            self.voters,
            self.arcs,
            self.ballots,
            virtuals,
            preferred,
            budget,
            UnravelRule::Union,
        )
        .map_err(ReductionError::from)
    }
}

fn check_budget(k: u64, base: u64) -> Result<(), ReductionError> {
    if k < base {
        Err(ReductionError::BudgetTooSmall {
            required: base,
            got: k,
        })
    } else {
        Ok(())
    }
}

/// Source data shared by both problems: labeled elements and labeled sets.
struct Source<'a> {
    element_names: &'a [String],
    sets: Vec<(String, BTreeSet<usize>)>,
}

impl Source<'_> {
    fn from_graph(g: &CubicGraph) -> Source<'_> {
        Source {
            element_names: g.vertex_names(),
            sets: g
                .edges()
                .iter()
                .map(|&(a, b)| {
                    (
                        format!("{}-{}", g.vertex_names()[a], g.vertex_names()[b]),
                        BTreeSet::from([a, b]),
                    )
                })
                .collect(),
        }
    }

    fn from_system(s: &SetSystem) -> Source<'_> {
        Source {
            element_names: s.element_names(),
            sets: s
                .sets()
                .iter()
                .enumerate()
                .map(|(i, set)| (format!("S{i}"), set.clone()))
                .collect(),
        }
    }
}

/// Multi-delegation direct layout: primes delegate to every incident
/// edge/set voter (cost 2), dummies attach directly (cost 2).
fn build_multi_direct(
    source: &Source,
    k: u64,
) -> Result<(Instance, ReductionCertificate), ReductionError> {
    let mut b = GadgetBuilder::new();
    let set_candidates: Vec<CandidateId> = source
        .sets
        .iter()
        .map(|(label, _)| b.candidate(format!("c_{label}")))
        .collect();
    let star = b.candidate("cstar".into());

    let mut element_arcs = Vec::new();
    let mut primes = Vec::new();
    for name in source.element_names {
        let u = b.passive(name.clone());
        let prime = b.passive(format!("{name}'"));
        b.arc(u, prime, 1);
        element_arcs.push((u, prime));
        primes.push(prime);
    }
    for (idx, (label, members)) in source.sets.iter().enumerate() {
        let base = 1 + 2 * members.len() as u64;
        check_budget(k, base)?;
        let voter = b.active(label.clone(), Ballot::from([set_candidates[idx]]));
        for &u in members {
            b.arc(primes[u], voter, 2);
        }
        for d in 0..k - base {
            let dummy = b.passive(format!("d:{label}:{d}"));
            b.arc(dummy, voter, 2);
        }
    }
    let special = b.active("vstar".into(), Ballot::from([star]));
    let instance = b.build(star, k)?;
    let cert = ReductionCertificate {
        element_names: source.element_names.to_vec(),
        sets: source.sets.iter().map(|(_, s)| s.clone()).collect(),
        budget: k,
        element_arcs,
        special_voter: special,
    };
    Ok((instance, cert))
}

/// Single-delegation direct layout: primes are active and approve every
/// incident candidate; all costs are 1.
fn build_single_direct(
    source: &Source,
    k: u64,
) -> Result<(Instance, ReductionCertificate), ReductionError> {
    let mut b = GadgetBuilder::new();
    let set_candidates: Vec<CandidateId> = source
        .sets
        .iter()
        .map(|(label, _)| b.candidate(format!("c_{label}")))
        .collect();
    let star = b.candidate("cstar".into());

    let incident: Vec<Ballot> = (0..source.element_names.len())
        .map(|u| {
            source
                .sets
                .iter()
                .enumerate()
                .filter(|(_, (_, members))| members.contains(&u))
                .map(|(i, _)| set_candidates[i])
                .collect()
        })
        .collect();

    let mut element_arcs = Vec::new();
    for (u_idx, name) in source.element_names.iter().enumerate() {
        let u = b.passive(name.clone());
        let prime = b.active(format!("{name}'"), incident[u_idx].clone());
        b.arc(u, prime, 1);
        element_arcs.push((u, prime));
    }
    for (idx, (label, members)) in source.sets.iter().enumerate() {
        let base = 1 + 2 * members.len() as u64;
        check_budget(k, base)?;
        let voter = b.active(label.clone(), Ballot::from([set_candidates[idx]]));
        for d in 0..k - base {
            let dummy = b.passive(format!("d:{label}:{d}"));
            b.arc(dummy, voter, 1);
        }
    }
    let special = b.active("vstar".into(), Ballot::from([star]));
    let instance = b.build(star, k)?;
    let cert = ReductionCertificate {
        element_names: source.element_names.to_vec(),
        sets: source.sets.iter().map(|(_, s)| s.clone()).collect(),
        budget: k,
        element_arcs,
        special_voter: special,
    };
    Ok((instance, cert))
}

/// Degree-bounded multi-delegation layout: the prime splits over hat and
/// tilde voters, edges get a passive/active pair, dummies form chains, and
/// every arc except `(u, u')` costs `k + 1`.
fn build_multi_b(g: &CubicGraph, k: u64) -> Result<(Instance, ReductionCertificate), ReductionError> {
    const BASE: u64 = 8;
    check_budget(k, BASE)?;
    let source = Source::from_graph(g);
    let expensive = k + 1;
    let mut b = GadgetBuilder::new();
    let set_candidates: Vec<CandidateId> = source
        .sets
        .iter()
        .map(|(label, _)| b.candidate(format!("c_{label}")))
        .collect();
    let star = b.candidate("cstar".into());

    // Edge gadgets first so element gadgets can reference them.
    let mut edge_passive = Vec::new();
    for (idx, (label, _)) in source.sets.iter().enumerate() {
        let e = b.passive(label.clone());
        let e_prime = b.active(format!("{label}'"), Ballot::from([set_candidates[idx]]));
        b.arc(e, e_prime, expensive);
        edge_passive.push(e);
        let mut prev: Option<VoterId> = None;
        for d in 0..k - BASE {
            let dummy = b.passive(format!("d:{label}:{d}"));
            if let Some(p) = prev {
                b.arc(p, dummy, expensive);
            }
            prev = Some(dummy);
        }
        if let Some(last) = prev {
            b.arc(last, e_prime, expensive);
        }
    }

    let mut element_arcs = Vec::new();
    for (u_idx, name) in source.element_names.iter().enumerate() {
        let u = b.passive(name.clone());
        let prime = b.passive(format!("{name}'"));
        let hat = b.passive(format!("{name}^"));
        let tilde = b.passive(format!("{name}~"));
        b.arc(u, prime, 1);
        b.arc(prime, hat, expensive);
        b.arc(prime, tilde, expensive);
        let incident: Vec<usize> = source
            .sets
            .iter()
            .enumerate()
            .filter(|(_, (_, members))| members.contains(&u_idx))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(incident.len(), 3, "cubic graphs have three incident edges");
        b.arc(hat, edge_passive[incident[0]], expensive);
        b.arc(hat, edge_passive[incident[1]], expensive);
        b.arc(tilde, edge_passive[incident[2]], expensive);
        element_arcs.push((u, prime));
    }
    let special = b.active("vstar".into(), Ballot::from([star]));
    let instance = b.build(star, k)?;
    let cert = ReductionCertificate {
        element_names: source.element_names.to_vec(),
        sets: source.sets.iter().map(|(_, s)| s.clone()).collect(),
        budget: k,
        element_arcs,
        special_voter: special,
    };
    Ok((instance, cert))
}

/// In-degree-one single-delegation layout: dummies chain through the
/// passive edge voter into the active one.
fn build_single_b(
    g: &CubicGraph,
    k: u64,
) -> Result<(Instance, ReductionCertificate), ReductionError> {
    const BASE: u64 = 6;
    check_budget(k, BASE)?;
    let source = Source::from_graph(g);
    let expensive = k + 1;
    let mut b = GadgetBuilder::new();
    let set_candidates: Vec<CandidateId> = source
        .sets
        .iter()
        .map(|(label, _)| b.candidate(format!("c_{label}")))
        .collect();
    let star = b.candidate("cstar".into());

    let incident: Vec<Ballot> = (0..source.element_names.len())
        .map(|u| {
            source
                .sets
                .iter()
                .enumerate()
                .filter(|(_, (_, members))| members.contains(&u))
                .map(|(i, _)| set_candidates[i])
                .collect()
        })
        .collect();

    let mut element_arcs = Vec::new();
    for (u_idx, name) in source.element_names.iter().enumerate() {
        let u = b.passive(name.clone());
        let prime = b.active(format!("{name}'"), incident[u_idx].clone());
        b.arc(u, prime, 1);
        element_arcs.push((u, prime));
    }
    for (idx, (label, _)) in source.sets.iter().enumerate() {
        let e = b.passive(label.clone());
        let e_prime = b.active(format!("{label}'"), Ballot::from([set_candidates[idx]]));
        b.arc(e, e_prime, expensive);
        let mut prev: Option<VoterId> = None;
        for d in 0..k - BASE {
            let dummy = b.passive(format!("d:{label}:{d}"));
            if let Some(p) = prev {
                b.arc(p, dummy, expensive);
            }
            prev = Some(dummy);
        }
        if let Some(last) = prev {
            b.arc(last, e, expensive);
        }
    }
    let special = b.active("vstar".into(), Ballot::from([star]));
    let instance = b.build(star, k)?;
    let cert = ReductionCertificate {
        element_names: source.element_names.to_vec(),
        sets: source.sets.iter().map(|(_, s)| s.clone()).collect(),
        budget: k,
        element_arcs,
        special_voter: special,
    };
    Ok((instance, cert))
}

/// Builds the control instance encoding Vertex Cover on a cubic graph.
pub fn reduce_vertex_cover(
    g: &CubicGraph,
    k: u64,
    variant: VcVariant,
) -> Result<(Instance, ReductionCertificate), ReductionError> {
    match variant {
        VcVariant::MultiA => build_multi_direct(&Source::from_graph(g), k),
        VcVariant::MultiB => build_multi_b(g, k),
        VcVariant::SingleA => build_single_direct(&Source::from_graph(g), k),
        VcVariant::SingleB => build_single_b(g, k),
    }
}

/// Builds the control instance encoding Hitting Set; the threshold of the
/// system is the budget.
pub fn reduce_hitting_set(
    s: &SetSystem,
    variant: HsVariant,
) -> Result<(Instance, ReductionCertificate), ReductionError> {
    let source = Source::from_system(s);
    match variant {
        HsVariant::Multi => build_multi_direct(&source, s.threshold),
        HsVariant::Single => build_single_direct(&source, s.threshold),
    }
}

/// Translates a vertex cover / hitting set into the redirection set of the
/// correctness proof: each covering element's `(u, u')` arc points at the
/// special voter instead.
///
/// Covers smaller than the budget are padded with the smallest non-cover
/// elements (up to the universe size), mirroring the proofs' assumption
/// that exactly `k` arcs move; without padding the preferred candidate can
/// end up tied instead of strictly ahead.
pub fn forward_certificate(
    cert: &ReductionCertificate,
    cover: &BTreeSet<String>,
) -> Result<Vec<Redirection>, ReductionError> {
    let index: BTreeMap<&str, usize> = cert
        .element_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut chosen = BTreeSet::new();
    for name in cover {
        match index.get(name.as_str()) {
            Some(&i) => {
                chosen.insert(i);
            }
            None => return Err(ReductionError::UnknownElement(name.clone())),
        }
    }
    for (i, set) in cert.sets.iter().enumerate() {
        if set.is_disjoint(&chosen) {
            let witness = set
                .iter()
                .next()
                .map(|&e| cert.element_names[e].clone())
                .unwrap_or_default();
            return Err(ReductionError::NotACover(witness, i));
        }
    }
    if chosen.len() as u64 > cert.budget {
        return Err(ReductionError::CoverTooLarge {
            size: chosen.len(),
            budget: cert.budget,
        });
    }

    let want = (cert.budget as usize).min(cert.element_names.len());
    for i in 0..cert.element_names.len() {
        if chosen.len() >= want {
            break;
        }
        chosen.insert(i);
    }

    Ok(chosen
        .into_iter()
        .map(|i| {
            let (from, old_to) = cert.element_arcs[i];
            Redirection {
                from,
                old_to,
                new_to: cert.special_voter,
            }
        })
        .collect())
}
