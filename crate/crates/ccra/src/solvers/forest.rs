//! Delegation forest of a single-delegation instance: one in-tree per active
//! voter, holding every voter whose delegation chain ends there.

use std::collections::BTreeMap;

use crate::model::{Instance, VoterId};
use crate::solvers::SolveError;

#[derive(Debug, Clone)]
pub(crate) struct Tree {
    pub root: VoterId,
    /// Children before parents; the root comes last.
    pub post_order: Vec<VoterId>,
    /// In-tree children of each vertex (delegators), sorted by voter index.
    pub children: BTreeMap<VoterId, Vec<VoterId>>,
    /// Arc id linking a non-root vertex to its parent.
    pub parent_arc: BTreeMap<VoterId, usize>,
    /// Real (non-virtual) voters in the subtree of each vertex, inclusive.
    pub real_in_subtree: BTreeMap<VoterId, u64>,
    /// Real voters in the whole tree: the root's initial approval weight.
    pub real_count: u64,
}

#[derive(Debug, Clone)]
pub(crate) struct Forest {
    /// Sorted by root voter index.
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn build(instance: &Instance) -> Result<Forest, SolveError> {
        if instance.stats().max_out_degree > 1 {
            return Err(SolveError::NotSingleDelegation);
        }
        let mut children: BTreeMap<VoterId, Vec<VoterId>> = BTreeMap::new();
        for arc in instance.arcs() {
            children.entry(arc.to).or_default().push(arc.from);
        }
        let trees = instance
            .active_voters()
            .map(|root| build_tree(instance, root, &children))
            .collect();
        Ok(Forest { trees })
    }

    #[cfg(test)]
    pub fn tree_of(&self, v: VoterId) -> Option<usize> {
        self.trees
            .iter()
            .position(|t| t.real_in_subtree.contains_key(&v))
    }
}

fn build_tree(
    instance: &Instance,
    root: VoterId,
    children: &BTreeMap<VoterId, Vec<VoterId>>,
) -> Tree {
    static NO_CHILDREN: Vec<VoterId> = Vec::new();
    let mut post_order = Vec::new();
    let mut parent_arc = BTreeMap::new();
    // Iterative post-order DFS.
    let mut stack = vec![(root, 0usize)];
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        let kids = children.get(&v).unwrap_or(&NO_CHILDREN);
        if *next < kids.len() {
            let child = kids[*next];
            *next += 1;
            let arc = instance
                .find_arc(child, v)
                .expect("child delegates to parent");
            parent_arc.insert(child, arc);
            stack.push((child, 0));
        } else {
            post_order.push(v);
            stack.pop();
        }
    }

    let mut real_in_subtree = BTreeMap::new();
    for &v in &post_order {
        let own = u64::from(!instance.is_virtual(v));
        let kids_total: u64 = children
            .get(&v)
            .unwrap_or(&NO_CHILDREN)
            .iter()
            .map(|c| real_in_subtree[c])
            .sum();
        real_in_subtree.insert(v, own + kids_total);
    }
    let real_count = real_in_subtree[&root];

    Tree {
        root,
        post_order,
        children: children
            .iter()
            .filter(|(v, _)| real_in_subtree.contains_key(v))
            .map(|(v, c)| (*v, c.clone()))
            .collect(),
        parent_arc,
        real_in_subtree,
        real_count,
    }
}
