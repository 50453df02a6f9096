//! Tree decompositions: validation, niceness, removable-vertex selection,
//! heuristic construction, and balanced separators.
//!
//! The reduction loop relies on three working assumptions maintained here:
//! no parallel edges in the graph (A1, enforced by the engine), no leaf bag
//! contained in its neighbor (A2, [`NiceTreeDecomposition::prune_subset_leaves`]),
//! and more than one bag (A3, the engine's single-bag endgame).

use crate::graph::{Graph, VertexId};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A tree of bags over the vertices of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<BTreeSet<VertexId>>,
    adj: Vec<BTreeSet<usize>>,
    root: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecompositionError {
    #[error("decomposition has no bags")]
    Empty,
    #[error("tree edge references unknown bag {0}")]
    UnknownBag(usize),
    #[error("bag edges do not form a tree")]
    NotATree,
    #[error("assumption {assumption} violated: {detail}")]
    AssumptionViolated { assumption: &'static str, detail: String },
    #[error("removal plan is inconsistent with the decomposition: {0}")]
    InconsistentPlan(String),
    #[error("no balanced separator bag found (graph too small for the separator path)")]
    NoBalancedSeparator,
}

/// One violated condition of the decomposition definition, with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompositionViolation {
    /// A graph vertex appears in no bag.
    MissingVertex(VertexId),
    /// A bag mentions a vertex that is not in the graph.
    ForeignVertex { bag: usize, vertex: VertexId },
    /// A graph edge has no bag containing both endpoints.
    UncoveredEdge(VertexId, VertexId),
    /// The bags containing a vertex do not form a connected subtree.
    DisconnectedOccurrences(VertexId),
}

impl fmt::Display for DecompositionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecompositionViolation::MissingVertex(v) => write!(f, "vertex {v} is in no bag"),
            DecompositionViolation::ForeignVertex { bag, vertex } => {
                write!(f, "bag {bag} contains unknown vertex {vertex}")
            }
            DecompositionViolation::UncoveredEdge(u, v) => {
                write!(f, "edge {u}-{v} is contained in no bag")
            }
            DecompositionViolation::DisconnectedOccurrences(v) => {
                write!(f, "bags containing {v} do not form a subtree")
            }
        }
    }
}

impl TreeDecomposition {
    /// Builds a decomposition from bags and tree edges, checking that the
    /// edges form a tree over the bag indices.
    pub fn new(
        bags: Vec<BTreeSet<VertexId>>,
        tree_edges: &[(usize, usize)],
    ) -> Result<Self, DecompositionError> {
        if bags.is_empty() {
            return Err(DecompositionError::Empty);
        }
        let n = bags.len();
        let mut adj = vec![BTreeSet::new(); n];
        for &(a, b) in tree_edges {
            if a >= n {
                return Err(DecompositionError::UnknownBag(a));
            }
            if b >= n {
                return Err(DecompositionError::UnknownBag(b));
            }
            if a == b {
                return Err(DecompositionError::NotATree);
            }
            adj[a].insert(b);
            adj[b].insert(a);
        }
        let td = TreeDecomposition { bags, adj, root: None };
        if !td.is_tree() {
            return Err(DecompositionError::NotATree);
        }
        Ok(td)
    }

    /// Single-bag decomposition.
    pub fn single_bag(bag: BTreeSet<VertexId>) -> Self {
        TreeDecomposition { bags: vec![bag], adj: vec![BTreeSet::new()], root: None }
    }

    fn is_tree(&self) -> bool {
        let n = self.bags.len();
        let edge_count: usize = self.adj.iter().map(|s| s.len()).sum::<usize>() / 2;
        if edge_count != n - 1 {
            return false;
        }
        // connected with n-1 edges ⇒ tree
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if seen[i] {
                continue;
            }
            seen[i] = true;
            stack.extend(self.adj[i].iter().copied().filter(|&j| !seen[j]));
        }
        seen.into_iter().all(|s| s)
    }

    pub fn bag_count(&self) -> usize {
        self.bags.len()
    }

    pub fn bag(&self, i: usize) -> &BTreeSet<VertexId> {
        &self.bags[i]
    }

    pub fn bags(&self) -> &[BTreeSet<VertexId>] {
        &self.bags
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i].iter().copied()
    }

    pub fn tree_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &j in nbrs {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn set_root(&mut self, root: Option<usize>) {
        self.root = root;
    }

    /// Maximum bag size minus one (0 for an all-empty decomposition).
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0).saturating_sub(1)
    }

    /// Checks the three defining conditions against `g` and reports every
    /// violation with a witness.
    pub fn validate(&self, g: &Graph) -> Vec<DecompositionViolation> {
        let mut out = Vec::new();
        let mut covered: BTreeSet<VertexId> = BTreeSet::new();
        for b in &self.bags {
            covered.extend(b.iter().copied());
        }
        for v in g.vertices() {
            if !covered.contains(&v) {
                out.push(DecompositionViolation::MissingVertex(v));
            }
        }
        for (i, b) in self.bags.iter().enumerate() {
            for v in b {
                if !g.has_vertex(*v) {
                    out.push(DecompositionViolation::ForeignVertex { bag: i, vertex: *v });
                }
            }
        }
        for e in g.edges() {
            let (u, v) = e.endpoints();
            if u == v {
                continue; // a self-loop is covered by any bag containing its vertex
            }
            if !self.bags.iter().any(|b| b.contains(&u) && b.contains(&v)) {
                let (a, b) = if u <= v { (u, v) } else { (v, u) };
                if !out.iter().any(|x| matches!(x, DecompositionViolation::UncoveredEdge(p, q) if *p == a && *q == b)) {
                    out.push(DecompositionViolation::UncoveredEdge(a, b));
                }
            }
        }
        // occurrence connectivity, one BFS per vertex over occurrence bags
        for v in covered {
            let occ: Vec<usize> =
                (0..self.bags.len()).filter(|&i| self.bags[i].contains(&v)).collect();
            if occ.len() <= 1 {
                continue;
            }
            let occ_set: BTreeSet<usize> = occ.iter().copied().collect();
            let mut seen = BTreeSet::new();
            let mut stack = vec![occ[0]];
            while let Some(i) = stack.pop() {
                if !seen.insert(i) {
                    continue;
                }
                for j in self.neighbors(i) {
                    if occ_set.contains(&j) && !seen.contains(&j) {
                        stack.push(j);
                    }
                }
            }
            if seen.len() != occ.len() {
                out.push(DecompositionViolation::DisconnectedOccurrences(v));
            }
        }
        out
    }

    /// True when every pair of adjacent bags is equal or differs by exactly
    /// one vertex.
    pub fn is_nice(&self) -> bool {
        self.tree_edges().into_iter().all(|(i, j)| {
            let a = &self.bags[i];
            let b = &self.bags[j];
            a.symmetric_difference(b).count() <= 1
        })
    }

    /// Converts into a nice decomposition by inserting intermediate bags
    /// along every tree edge whose endpoints differ by more than one vertex:
    /// first dropping, then adding, one vertex at a time. Width is unchanged
    /// and the bag count stays O(n·w).
    pub fn make_nice(&self) -> Result<NiceTreeDecomposition, DecompositionError> {
        if self.bags.is_empty() {
            return Err(DecompositionError::Empty);
        }
        let mut bags = self.bags.clone();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (i, j) in self.tree_edges() {
            let a = &self.bags[i];
            let b = &self.bags[j];
            if a.symmetric_difference(b).count() <= 1 {
                edges.push((i, j));
                continue;
            }
            // Walk from a to b: remove a \ b one vertex at a time, then add
            // b \ a one vertex at a time. The final insertion step is the
            // edge to bag j itself.
            let mut current = a.clone();
            let mut prev = i;
            let remove: Vec<VertexId> = a.difference(b).copied().collect();
            let add: Vec<VertexId> = b.difference(a).copied().collect();
            let mut chain: Vec<BTreeSet<VertexId>> = Vec::new();
            for v in remove {
                current.remove(&v);
                chain.push(current.clone());
            }
            for v in add {
                current.insert(v);
                chain.push(current.clone());
            }
            debug_assert_eq!(&current, b);
            // the last chain entry equals bag j; connect through the rest
            chain.pop();
            for bag in chain {
                bags.push(bag);
                let idx = bags.len() - 1;
                edges.push((prev, idx));
                prev = idx;
            }
            edges.push((prev, j));
        }
        let td = TreeDecomposition::new(bags, &edges)?;
        debug_assert!(td.is_nice());
        Ok(NiceTreeDecomposition { td })
    }

    /// Removes `v` from every bag. Preserves validity for the graph without
    /// `v` and preserves niceness.
    pub fn remove_vertex_everywhere(&mut self, v: VertexId) {
        for b in &mut self.bags {
            b.remove(&v);
        }
    }
}

/// Which of the removal cases produced a [`RemovalPlan`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RemovalCase {
    /// A leaf bag whose exclusive vertex is not a terminal; degree ≤ w.
    LeafBag,
    /// Path case, interior bag: the prefix up to `bag_index` merges into a
    /// single bag parented to `next_bag`.
    PathInterior { anchor_leaf: usize, next_bag: usize },
    /// Path case, root bag: everything collapses into one bag.
    PathRoot,
}

impl RemovalCase {
    pub fn tag(&self) -> &'static str {
        match self {
            RemovalCase::LeafBag => "leaf_bag",
            RemovalCase::PathInterior { .. } => "path_interior",
            RemovalCase::PathRoot => "path_root",
        }
    }
}

/// The next vertex to remove by a star-mesh transformation, with the case
/// that justified it and the degree bound it guarantees (≤ width + 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovalPlan {
    pub vertex: VertexId,
    pub bag_index: usize,
    pub case: RemovalCase,
    pub expected_degree_bound: usize,
}

/// A tree decomposition whose adjacent bags are equal or differ by exactly
/// one vertex. Constructed by [`TreeDecomposition::make_nice`]; every
/// operation here preserves the property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    td: TreeDecomposition,
}

impl NiceTreeDecomposition {
    /// Wraps an already-nice decomposition; errors if it is not nice.
    pub fn from_checked(td: TreeDecomposition) -> Result<Self, DecompositionError> {
        if !td.is_nice() {
            return Err(DecompositionError::AssumptionViolated {
                assumption: "nice",
                detail: "adjacent bags differ by more than one vertex".to_string(),
            });
        }
        Ok(NiceTreeDecomposition { td })
    }

    pub fn as_td(&self) -> &TreeDecomposition {
        &self.td
    }

    pub fn into_td(self) -> TreeDecomposition {
        self.td
    }

    pub fn bag_count(&self) -> usize {
        self.td.bag_count()
    }

    pub fn bag(&self, i: usize) -> &BTreeSet<VertexId> {
        self.td.bag(i)
    }

    pub fn width(&self) -> usize {
        self.td.width()
    }

    /// Leaf bag indices (single tree neighbor).
    fn leaves(&self) -> Vec<usize> {
        (0..self.td.bag_count()).filter(|&i| self.td.adj[i].len() == 1).collect()
    }

    /// Removes leaf bags that are subsets of their neighbor until none
    /// remain; never removes the last bag. In a nice decomposition adjacent
    /// bags are comparable or differ on both sides by nothing, so every
    /// surviving leaf is a strict superset of its neighbor.
    pub fn prune_subset_leaves(mut self) -> NiceTreeDecomposition {
        loop {
            if self.td.bag_count() == 1 {
                return self;
            }
            let mut removed = None;
            for i in self.leaves() {
                let parent = *self.td.adj[i].iter().next().unwrap();
                if self.td.bags[i].is_subset(&self.td.bags[parent]) {
                    removed = Some(i);
                    break;
                }
            }
            match removed {
                None => return self,
                Some(i) => self.remove_bag(i),
            }
        }
    }

    /// Removes leaf bag `i`, compacting indices (last bag moves into slot `i`).
    fn remove_bag(&mut self, i: usize) {
        debug_assert_eq!(self.td.adj[i].len(), 1);
        let parent = *self.td.adj[i].iter().next().unwrap();
        self.td.adj[parent].remove(&i);
        let last = self.td.bag_count() - 1;
        if i != last {
            // repoint neighbors of the moved bag
            let moved_nbrs: Vec<usize> = self.td.adj[last].iter().copied().collect();
            for n in moved_nbrs {
                self.td.adj[n].remove(&last);
                self.td.adj[n].insert(i);
            }
            self.td.bags.swap(i, last);
            self.td.adj.swap(i, last);
        }
        self.td.bags.pop();
        self.td.adj.pop();
        self.td.root = None;
    }

    /// The exclusive vertex of leaf `i`: the single element of
    /// `bag(i) \ bag(parent)`. Under A2 and niceness this always exists.
    fn leaf_exclusive(&self, i: usize) -> Result<VertexId, DecompositionError> {
        let parent = *self.td.adj[i].iter().next().unwrap();
        let mut excl = self.td.bags[i].difference(&self.td.bags[parent]);
        match (excl.next(), excl.next()) {
            (Some(v), None) => Ok(*v),
            _ => Err(DecompositionError::AssumptionViolated {
                assumption: "A2",
                detail: format!("leaf bag {i} does not exceed its neighbor by exactly one vertex"),
            }),
        }
    }

    /// Selects the next non-terminal vertex removable by a star-mesh
    /// transformation of degree at most width + 1.
    ///
    /// Case order: (i) a leaf bag whose exclusive vertex is not a terminal
    /// (bound w); otherwise the tree is a path whose endpoint exclusive
    /// vertices are both terminals, rooted at the endpoint owning the
    /// destination terminal: (ii) the vertex `X_j \ X_{j+1}` for the lowest
    /// j > 1 with `X_j ⊃ X_{j+1}` (bound w+1); (iii) when no such j exists,
    /// any non-terminal vertex of the root bag (bound w+1).
    ///
    /// Returns `None` iff only terminals remain. Ties among candidates break
    /// by (current distinct degree, vertex id).
    pub fn find_removal_plan(
        &self,
        g: &Graph,
    ) -> Result<Option<RemovalPlan>, DecompositionError> {
        if !g.parallel_groups().is_empty() {
            return Err(DecompositionError::AssumptionViolated {
                assumption: "A1",
                detail: "graph still has parallel edges".to_string(),
            });
        }
        if self.td.bag_count() < 2 {
            return Err(DecompositionError::AssumptionViolated {
                assumption: "A3",
                detail: "single-bag decompositions are the caller's base case".to_string(),
            });
        }
        let (s, d) = g.terminals();
        let is_terminal = |v: VertexId| v == s || v == d;

        // A2 must hold for every leaf
        for i in self.leaves() {
            let parent = *self.td.adj[i].iter().next().unwrap();
            if self.td.bags[i].is_subset(&self.td.bags[parent]) {
                return Err(DecompositionError::AssumptionViolated {
                    assumption: "A2",
                    detail: format!("leaf bag {i} is a subset of its neighbor"),
                });
            }
        }

        let degree = |v: VertexId| g.degree_distinct(v).unwrap_or(usize::MAX);

        // case (i): leaf bags with a non-terminal exclusive vertex
        let mut best: Option<(usize, VertexId, usize)> = None; // (deg, vertex, bag)
        for i in self.leaves() {
            let v = self.leaf_exclusive(i)?;
            if is_terminal(v) {
                continue;
            }
            let key = (degree(v), v, i);
            if best.is_none_or(|(bd, bv, bi)| key < (bd, bv, bi)) {
                best = Some(key);
            }
        }
        if let Some((_, v, i)) = best {
            return Ok(Some(RemovalPlan {
                vertex: v,
                bag_index: i,
                case: RemovalCase::LeafBag,
                expected_degree_bound: self.td.bags[i].len().saturating_sub(1),
            }));
        }

        // Otherwise the tree must be a path (three or more leaves would give
        // three exclusive vertices, at most two of which can be terminals).
        let leaves = self.leaves();
        if leaves.len() != 2 {
            return Err(DecompositionError::AssumptionViolated {
                assumption: "A2",
                detail: "non-path decomposition with only terminal leaf vertices".to_string(),
            });
        }
        let x1 = self.leaf_exclusive(leaves[0])?;
        let x2 = self.leaf_exclusive(leaves[1])?;
        if !(is_terminal(x1) && is_terminal(x2) && x1 != x2) {
            return Err(DecompositionError::AssumptionViolated {
                assumption: "A2",
                detail: "path endpoints do not own the two terminals exclusively".to_string(),
            });
        }
        // Root at the endpoint owning d, so the prefix endpoint owns s
        // (matching the source-side anchor deterministically).
        let (anchor, _root) = if x1 == s { (leaves[0], leaves[1]) } else { (leaves[1], leaves[0]) };
        let anchor_terminal = if x1 == s { x1 } else { x2 };
        debug_assert_eq!(anchor_terminal, s);

        let path = self.path_order_from(anchor);
        let m = path.len();
        debug_assert!(m >= 3, "two-bag paths always violate A2");
        // lowest j > 1 (1-based) with X_j ⊃ X_{j+1}
        for j in 1..m - 1 {
            let xj = &self.td.bags[path[j]];
            let xn = &self.td.bags[path[j + 1]];
            if xn.is_subset(xj) && xn.len() < xj.len() {
                let v = *xj.difference(xn).next().expect("strict superset");
                if is_terminal(v) {
                    return Err(DecompositionError::AssumptionViolated {
                        assumption: "A2",
                        detail: format!("path-interior vertex {v} is a terminal"),
                    });
                }
                return Ok(Some(RemovalPlan {
                    vertex: v,
                    bag_index: path[j],
                    case: RemovalCase::PathInterior {
                        anchor_leaf: anchor,
                        next_bag: path[j + 1],
                    },
                    expected_degree_bound: xj.len(),
                }));
            }
        }
        // root case: any non-terminal vertex of the root bag
        let root_bag_idx = path[m - 1];
        let candidates: Vec<VertexId> = self.td.bags[root_bag_idx]
            .iter()
            .copied()
            .filter(|&v| !is_terminal(v))
            .collect();
        let pick = candidates.into_iter().min_by_key(|&v| (degree(v), v));
        match pick {
            None => Ok(None), // only terminals remain
            Some(v) => Ok(Some(RemovalPlan {
                vertex: v,
                bag_index: root_bag_idx,
                case: RemovalCase::PathRoot,
                expected_degree_bound: self.td.bags[root_bag_idx].len(),
            })),
        }
    }

    /// Bag indices in path order starting from leaf `from`. Only valid when
    /// the tree is a path.
    fn path_order_from(&self, from: usize) -> Vec<usize> {
        let mut order = vec![from];
        let mut prev = usize::MAX;
        let mut cur = from;
        loop {
            let next = self.td.adj[cur].iter().copied().find(|&n| n != prev);
            match next {
                None => return order,
                Some(n) => {
                    order.push(n);
                    prev = cur;
                    cur = n;
                }
            }
        }
    }

    /// Restructures the decomposition after the planned vertex has been
    /// star-meshed out of the graph. The removed vertex appears in no bag of
    /// the result; validity and niceness are preserved and the width never
    /// increases.
    pub fn update_after_removal(
        mut self,
        plan: &RemovalPlan,
    ) -> Result<NiceTreeDecomposition, DecompositionError> {
        if plan.bag_index >= self.td.bag_count()
            || !self.td.bags[plan.bag_index].contains(&plan.vertex)
        {
            return Err(DecompositionError::InconsistentPlan(format!(
                "bag {} does not contain {}",
                plan.bag_index, plan.vertex
            )));
        }
        match &plan.case {
            RemovalCase::LeafBag => {
                // the vertex lives only in its leaf bag
                self.td.remove_vertex_everywhere(plan.vertex);
                Ok(self.prune_subset_leaves())
            }
            RemovalCase::PathInterior { anchor_leaf, next_bag } => {
                let path = self.path_order_from(*anchor_leaf);
                let j_pos = path.iter().position(|&b| b == plan.bag_index).ok_or_else(|| {
                    DecompositionError::InconsistentPlan("bag not on the anchored path".into())
                })?;
                if path.get(j_pos + 1) != Some(next_bag) {
                    return Err(DecompositionError::InconsistentPlan(
                        "successor bag mismatch".into(),
                    ));
                }
                // merge X_1..X_j into a single bag (minus the removed vertex)
                let mut merged: BTreeSet<VertexId> = BTreeSet::new();
                for &b in &path[..=j_pos] {
                    merged.extend(self.td.bags[b].iter().copied());
                }
                merged.remove(&plan.vertex);
                let mut bags: Vec<BTreeSet<VertexId>> = vec![merged];
                let mut edges: Vec<(usize, usize)> = Vec::new();
                let mut prev = 0usize;
                for &b in &path[j_pos + 1..] {
                    bags.push(self.td.bags[b].clone());
                    edges.push((prev, bags.len() - 1));
                    prev = bags.len() - 1;
                }
                let td = TreeDecomposition::new(bags, &edges)?;
                NiceTreeDecomposition::from_checked(td).map(|n| n.prune_subset_leaves())
            }
            RemovalCase::PathRoot => {
                let mut merged: BTreeSet<VertexId> = BTreeSet::new();
                for b in &self.td.bags {
                    merged.extend(b.iter().copied());
                }
                merged.remove(&plan.vertex);
                Ok(NiceTreeDecomposition { td: TreeDecomposition::single_bag(merged) })
            }
        }
    }

    /// Drops `v` from every bag (used by the single-bag endgame).
    pub fn remove_vertex_everywhere(&mut self, v: VertexId) {
        self.td.remove_vertex_everywhere(v);
    }
}

/// A balanced separator extracted from a tree decomposition bag.
#[derive(Debug, Clone)]
pub struct Separator {
    pub separator: BTreeSet<VertexId>,
    pub side_a: BTreeSet<VertexId>,
    pub side_b: BTreeSet<VertexId>,
}

/// Finds a bag whose removal splits the graph into components that can be
/// grouped into two sides of at most 2n/3 vertices each, with no edge
/// between the sides. Scans every bag for the one minimizing the largest
/// remaining component (ties: smaller bag, then lower index), then groups
/// components greedily, largest first onto the lighter side.
pub fn balanced_separator(
    g: &Graph,
    td: &TreeDecomposition,
) -> Result<Separator, DecompositionError> {
    let n = g.vertex_count();
    let mut best: Option<(usize, usize, usize)> = None; // (max_comp, bag_len, idx)
    for (i, bag) in td.bags().iter().enumerate() {
        let comps = components_without(g, bag);
        let max_comp = comps.iter().map(|c| c.len()).max().unwrap_or(0);
        let key = (max_comp, bag.len(), i);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    let (_, _, idx) = best.ok_or(DecompositionError::Empty)?;
    let separator = td.bag(idx).clone();
    let mut comps = components_without(g, &separator);
    comps.sort_by(|a, b| {
        b.len().cmp(&a.len()).then_with(|| a.iter().next().cmp(&b.iter().next()))
    });
    let mut side_a: BTreeSet<VertexId> = BTreeSet::new();
    let mut side_b: BTreeSet<VertexId> = BTreeSet::new();
    for c in comps {
        if side_a.len() <= side_b.len() {
            side_a.extend(c);
        } else {
            side_b.extend(c);
        }
    }
    if 3 * side_a.len() > 2 * n || 3 * side_b.len() > 2 * n {
        return Err(DecompositionError::NoBalancedSeparator);
    }
    debug_assert!(no_crossing_edge(g, &side_a, &side_b));
    Ok(Separator { separator, side_a, side_b })
}

fn components_without(g: &Graph, removed: &BTreeSet<VertexId>) -> Vec<BTreeSet<VertexId>> {
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    let mut out = Vec::new();
    for start in g.vertices() {
        if removed.contains(&start) || seen.contains(&start) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if !comp.insert(v) {
                continue;
            }
            for w in g.distinct_neighbors(v) {
                if !removed.contains(&w) && !comp.contains(&w) {
                    stack.push(w);
                }
            }
        }
        seen.extend(comp.iter().copied());
        out.push(comp);
    }
    out
}

fn no_crossing_edge(g: &Graph, a: &BTreeSet<VertexId>, b: &BTreeSet<VertexId>) -> bool {
    g.edges().all(|e| {
        let (u, v) = e.endpoints();
        !((a.contains(&u) && b.contains(&v)) || (a.contains(&v) && b.contains(&u)))
    })
}

/// Builds a valid tree decomposition with a min-fill elimination ordering.
/// The width is an upper bound on the treewidth, not necessarily optimal.
/// Fill ties break by lower degree, then lower vertex id.
pub fn heuristic_decomposition(g: &Graph) -> TreeDecomposition {
    if g.vertex_count() == 0 {
        return TreeDecomposition::single_bag(BTreeSet::new());
    }
    let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for v in g.vertices() {
        adj.insert(v, g.distinct_neighbors(v));
    }
    let fill = |adj: &BTreeMap<VertexId, BTreeSet<VertexId>>, v: VertexId| -> usize {
        let nbrs: Vec<VertexId> = adj[&v].iter().copied().collect();
        let mut missing = 0;
        for (i, a) in nbrs.iter().enumerate() {
            for b in &nbrs[i + 1..] {
                if !adj[a].contains(b) {
                    missing += 1;
                }
            }
        }
        missing
    };

    let mut bags: Vec<BTreeSet<VertexId>> = Vec::new();
    let mut eliminated_at: BTreeMap<VertexId, usize> = BTreeMap::new();
    while !adj.is_empty() {
        let v = adj
            .keys()
            .copied()
            .min_by_key(|&v| (fill(&adj, v), adj[&v].len(), v))
            .unwrap();
        let nbrs = adj[&v].clone();
        let mut bag: BTreeSet<VertexId> = nbrs.clone();
        bag.insert(v);
        eliminated_at.insert(v, bags.len());
        bags.push(bag);
        // connect the neighborhood into a clique and drop v
        let nv: Vec<VertexId> = nbrs.iter().copied().collect();
        for (i, a) in nv.iter().enumerate() {
            for b in &nv[i + 1..] {
                adj.get_mut(a).unwrap().insert(*b);
                adj.get_mut(b).unwrap().insert(*a);
            }
        }
        for u in &nv {
            adj.get_mut(u).unwrap().remove(&v);
        }
        adj.remove(&v);
    }
    // parent of bag i: the bag of the earliest-eliminated vertex among the
    // neighborhood recorded in bag i (all eliminated after i); roots chain up
    let order: Vec<VertexId> = {
        let mut o = vec![VertexId(0); bags.len()];
        for (v, i) in &eliminated_at {
            o[*i] = *v;
        }
        o
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for (i, bag) in bags.iter().enumerate() {
        let parent = bag
            .iter()
            .filter(|v| **v != order[i])
            .map(|v| eliminated_at[v])
            .min();
        match parent {
            Some(p) => edges.push((i, p)),
            None => roots.push(i),
        }
    }
    for w in roots.windows(2) {
        edges.push((w[0], w[1]));
    }
    TreeDecomposition::new(bags, &edges).expect("elimination order yields a tree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwl::PwlFunction;
    use crate::rational::rat_int;

    fn v(n: u32) -> VertexId {
        VertexId(n)
    }

    fn bag(vs: &[u32]) -> BTreeSet<VertexId> {
        vs.iter().map(|&n| v(n)).collect()
    }

    fn shift() -> PwlFunction {
        PwlFunction::shift(rat_int(1))
    }

    fn path_graph(n: u32) -> Graph {
        let mut g = Graph::new(v(1), v(n));
        for id in 2..n {
            g.add_vertex(v(id));
        }
        for id in 1..n {
            g.add_edge(v(id), v(id + 1), shift(), shift()).unwrap();
        }
        g
    }

    fn triangle() -> Graph {
        let mut g = Graph::new(v(1), v(3));
        g.add_vertex(v(2));
        g.add_edge(v(1), v(2), shift(), shift()).unwrap();
        g.add_edge(v(2), v(3), shift(), shift()).unwrap();
        g.add_edge(v(1), v(3), shift(), shift()).unwrap();
        g
    }

    #[test]
    fn single_bag_is_always_valid() {
        let g = triangle();
        let td = TreeDecomposition::single_bag(bag(&[1, 2, 3]));
        assert!(td.validate(&g).is_empty());
        assert_eq!(td.width(), 2);
    }

    #[test]
    fn uncovered_edge_detected() {
        let g = triangle();
        let td = TreeDecomposition::new(vec![bag(&[1, 2]), bag(&[2, 3])], &[(0, 1)]).unwrap();
        let violations = td.validate(&g);
        assert!(violations
            .iter()
            .any(|x| matches!(x, DecompositionViolation::UncoveredEdge(a, b) if *a == v(1) && *b == v(3))));
    }

    #[test]
    fn disconnected_occurrence_detected() {
        let g = path_graph(2);
        let td = TreeDecomposition::new(
            vec![bag(&[1, 2]), bag(&[2]), bag(&[1, 2])],
            &[(0, 1), (1, 2)],
        )
        .unwrap();
        let violations = td.validate(&g);
        assert!(violations
            .iter()
            .any(|x| matches!(x, DecompositionViolation::DisconnectedOccurrences(a) if *a == v(1))));
    }

    #[test]
    fn width_computation() {
        let td = TreeDecomposition::new(vec![bag(&[1, 2]), bag(&[2, 3])], &[(0, 1)]).unwrap();
        assert_eq!(td.width(), 1);
        let single = TreeDecomposition::single_bag(bag(&[1, 2, 3, 4, 5]));
        assert_eq!(single.width(), 4);
    }

    #[test]
    fn tree_structure_enforced() {
        assert!(TreeDecomposition::new(vec![bag(&[1]), bag(&[2])], &[]).is_err());
        assert!(TreeDecomposition::new(
            vec![bag(&[1]), bag(&[2]), bag(&[3])],
            &[(0, 1), (1, 2), (0, 2)]
        )
        .is_err());
        assert!(TreeDecomposition::new(vec![bag(&[1])], &[(0, 5)]).is_err());
        assert!(TreeDecomposition::new(vec![bag(&[1]), bag(&[2])], &[(0, 0), (0, 1)]).is_err());
    }

    #[test]
    fn make_nice_inserts_intermediates() {
        let g = {
            let mut g = Graph::new(v(1), v(4));
            g.add_vertex(v(2));
            g.add_vertex(v(3));
            g.add_edge(v(1), v(2), shift(), shift()).unwrap();
            g.add_edge(v(2), v(3), shift(), shift()).unwrap();
            g.add_edge(v(1), v(3), shift(), shift()).unwrap();
            g.add_edge(v(1), v(4), shift(), shift()).unwrap();
            g
        };
        let td = TreeDecomposition::new(vec![bag(&[1, 2, 3]), bag(&[1, 4])], &[(0, 1)]).unwrap();
        assert!(!td.is_nice());
        let nice = td.make_nice().unwrap();
        assert!(nice.as_td().is_nice());
        assert!(nice.as_td().validate(&g).is_empty());
        assert_eq!(nice.width(), td.width());
    }

    #[test]
    fn make_nice_keeps_already_nice() {
        let td = TreeDecomposition::new(vec![bag(&[1, 2]), bag(&[2])], &[(0, 1)]).unwrap();
        let nice = td.make_nice().unwrap();
        assert_eq!(nice.bag_count(), 2);

        let single = TreeDecomposition::single_bag(bag(&[1, 2]));
        assert_eq!(single.make_nice().unwrap().bag_count(), 1);
    }

    #[test]
    fn prune_removes_subset_leaves() {
        let td = TreeDecomposition::new(vec![bag(&[1, 2]), bag(&[1])], &[(0, 1)]).unwrap();
        let pruned = td.make_nice().unwrap().prune_subset_leaves();
        assert_eq!(pruned.bag_count(), 1);
        assert_eq!(pruned.bag(0), &bag(&[1, 2]));

        // strict-superset leaf is kept
        let td = TreeDecomposition::new(
            vec![bag(&[1, 2]), bag(&[1]), bag(&[1, 3])],
            &[(0, 1), (1, 2)],
        )
        .unwrap();
        let pruned = td.make_nice().unwrap().prune_subset_leaves();
        assert_eq!(pruned.bag_count(), 3);

        // all-equal chain collapses to one bag
        let td = TreeDecomposition::new(
            vec![bag(&[1, 2]), bag(&[1, 2]), bag(&[1, 2])],
            &[(0, 1), (1, 2)],
        )
        .unwrap();
        let pruned = td.make_nice().unwrap().prune_subset_leaves();
        assert_eq!(pruned.bag_count(), 1);
    }

    #[test]
    fn removal_plan_prefers_nonterminal_leaf() {
        // star of three leaf bags; terminals own two of the exclusive vertices
        let g = {
            let mut g = Graph::new(v(1), v(2));
            g.add_vertex(v(3));
            g.add_vertex(v(4));
            g.add_edge(v(1), v(4), shift(), shift()).unwrap();
            g.add_edge(v(2), v(4), shift(), shift()).unwrap();
            g.add_edge(v(3), v(4), shift(), shift()).unwrap();
            g
        };
        let td = TreeDecomposition::new(
            vec![bag(&[4]), bag(&[1, 4]), bag(&[2, 4]), bag(&[3, 4])],
            &[(0, 1), (0, 2), (0, 3)],
        )
        .unwrap();
        let nice = td.make_nice().unwrap().prune_subset_leaves();
        let plan = nice.find_removal_plan(&g).unwrap().unwrap();
        assert_eq!(plan.vertex, v(3));
        assert!(matches!(plan.case, RemovalCase::LeafBag));
        assert!(g.degree_distinct(plan.vertex).unwrap() <= plan.expected_degree_bound);
    }

    #[test]
    fn removal_plan_path_case() {
        // path instance: s=1, a=2, d=3; decomposition {s,a},{a,b=d} style
        let g = path_graph(3); // terminals (1, 3)
        let td = TreeDecomposition::new(
            vec![bag(&[1, 2]), bag(&[2, 3]), bag(&[3])],
            &[(0, 1), (1, 2)],
        )
        .unwrap();
        let nice = td.make_nice().unwrap().prune_subset_leaves();
        let plan = nice.find_removal_plan(&g).unwrap().unwrap();
        assert_eq!(plan.vertex, v(2));
        assert!(g.degree_distinct(plan.vertex).unwrap() <= plan.expected_degree_bound);
        assert!(plan.expected_degree_bound <= nice.width() + 1);
    }

    #[test]
    fn removal_plan_none_when_only_terminals() {
        // two isolated terminals; the only valid multi-bag nice shape has an
        // empty middle bag, and the path-root case finds no non-terminal
        let g = Graph::new(v(1), v(2));
        let td = TreeDecomposition::new(
            vec![bag(&[1]), bag(&[]), bag(&[2])],
            &[(0, 1), (1, 2)],
        )
        .unwrap();
        assert!(td.validate(&g).is_empty());
        let nice = td.make_nice().unwrap();
        let plan = nice.find_removal_plan(&g).unwrap();
        assert!(plan.is_none());
    }

    #[test]
    fn removal_plan_requires_a2() {
        let g = path_graph(3);
        // leaf {3} is a subset of {2,3}: prune was skipped
        let td = TreeDecomposition::new(
            vec![bag(&[1, 2]), bag(&[2]), bag(&[2, 3]), bag(&[3])],
            &[(0, 1), (1, 2), (2, 3)],
        )
        .unwrap();
        let nice = NiceTreeDecomposition::from_checked(td).unwrap();
        let err = nice.find_removal_plan(&g).unwrap_err();
        assert!(matches!(err, DecompositionError::AssumptionViolated { assumption: "A2", .. }));
    }

    #[test]
    fn update_rejects_inconsistent_plan() {
        let g = path_graph(3);
        let td = TreeDecomposition::new(
            vec![bag(&[1, 2]), bag(&[2, 3]), bag(&[3])],
            &[(0, 1), (1, 2)],
        )
        .unwrap();
        let nice = td.make_nice().unwrap().prune_subset_leaves();
        let plan = RemovalPlan {
            vertex: v(9),
            bag_index: 0,
            case: RemovalCase::LeafBag,
            expected_degree_bound: 1,
        };
        let _ = g;
        assert!(matches!(
            nice.update_after_removal(&plan),
            Err(DecompositionError::InconsistentPlan(_))
        ));
    }

    #[test]
    fn removal_plan_requires_a1() {
        let mut g = path_graph(3);
        g.add_edge(v(1), v(2), shift(), shift()).unwrap();
        let td = TreeDecomposition::new(vec![bag(&[1, 2]), bag(&[2, 3])], &[(0, 1)]).unwrap();
        let nice = td.make_nice().unwrap();
        let err = nice.find_removal_plan(&g).unwrap_err();
        assert!(matches!(err, DecompositionError::AssumptionViolated { assumption: "A1", .. }));
    }

    #[test]
    fn update_after_leaf_removal_is_valid() {
        let mut g = Graph::new(v(1), v(2));
        g.add_vertex(v(3));
        g.add_vertex(v(4));
        g.add_edge(v(1), v(4), shift(), shift()).unwrap();
        g.add_edge(v(2), v(4), shift(), shift()).unwrap();
        g.add_edge(v(3), v(4), shift(), shift()).unwrap();
        let td = TreeDecomposition::new(
            vec![bag(&[4]), bag(&[1, 4]), bag(&[2, 4]), bag(&[3, 4])],
            &[(0, 1), (0, 2), (0, 3)],
        )
        .unwrap();
        let nice = td.make_nice().unwrap().prune_subset_leaves();
        let plan = nice.find_removal_plan(&g).unwrap().unwrap();
        assert_eq!(plan.vertex, v(3));
        // apply the star-mesh by hand: degree-1 vertex just disappears
        let keys: Vec<_> = g.incident_edges(v(3)).collect();
        for k in keys {
            g.remove_edge(k).unwrap();
        }
        g.remove_vertex(v(3)).unwrap();
        let updated = nice.update_after_removal(&plan).unwrap();
        assert!(updated.as_td().validate(&g).is_empty());
        assert!(updated.as_td().is_nice());
        assert!(updated.as_td().bags().iter().all(|b| !b.contains(&v(3))));
    }

    #[test]
    fn update_after_path_interior_removal() {
        // path of bags over 1=s .. 5=d with an interior strict drop:
        // {1,2},{2},{2,3},{3},{3,4},{4},{4,5}; interior case removes 2
        let mut g = Graph::new(v(1), v(5));
        for id in 2..=4 {
            g.add_vertex(v(id));
        }
        g.add_edge(v(1), v(2), shift(), shift()).unwrap();
        g.add_edge(v(2), v(3), shift(), shift()).unwrap();
        g.add_edge(v(3), v(4), shift(), shift()).unwrap();
        g.add_edge(v(4), v(5), shift(), shift()).unwrap();
        let td = TreeDecomposition::new(
            vec![
                bag(&[1, 2]),
                bag(&[2]),
                bag(&[2, 3]),
                bag(&[3]),
                bag(&[3, 4]),
                bag(&[4]),
                bag(&[4, 5]),
            ],
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)],
        )
        .unwrap();
        assert!(td.validate(&g).is_empty());
        let nice = td.make_nice().unwrap().prune_subset_leaves();
        let plan = nice.find_removal_plan(&g).unwrap().unwrap();
        assert!(matches!(plan.case, RemovalCase::PathInterior { .. }), "{plan:?}");
        assert_eq!(plan.vertex, v(2));
        assert!(plan.expected_degree_bound <= nice.width() + 1);
        // apply the star-mesh: 2 has neighbors {1, 3}
        let keys: Vec<_> = g.incident_edges(v(2)).collect();
        for k in keys {
            g.remove_edge(k).unwrap();
        }
        g.remove_vertex(v(2)).unwrap();
        g.add_edge(v(1), v(3), PwlFunction::shift(rat_int(2)), PwlFunction::shift(rat_int(2)))
            .unwrap();
        let updated = nice.update_after_removal(&plan).unwrap();
        assert!(updated.as_td().is_nice());
        assert!(updated.as_td().validate(&g).is_empty());
        assert!(updated.as_td().width() <= 1 + 1);
        assert!(updated.as_td().bags().iter().all(|b| !b.contains(&v(2))));
    }

    #[test]
    fn update_after_path_root_removal_merges_everything() {
        // nested path: {1,2,3} ⊇ ... rooted case: bags {1,3},{3},{2,3},{2,3,5}
        // with terminals 1 and 5; no interior strict drop, remove from root
        let mut g = Graph::new(v(1), v(5));
        g.add_vertex(v(2));
        g.add_vertex(v(3));
        g.add_edge(v(1), v(3), shift(), shift()).unwrap();
        g.add_edge(v(3), v(2), shift(), shift()).unwrap();
        g.add_edge(v(2), v(5), shift(), shift()).unwrap();
        let td = TreeDecomposition::new(
            vec![bag(&[1, 3]), bag(&[3]), bag(&[2, 3]), bag(&[2, 3, 5])],
            &[(0, 1), (1, 2), (2, 3)],
        )
        .unwrap();
        assert!(td.validate(&g).is_empty());
        let nice = td.make_nice().unwrap().prune_subset_leaves();
        let width_before = nice.width();
        let plan = nice.find_removal_plan(&g).unwrap().unwrap();
        assert!(matches!(plan.case, RemovalCase::PathRoot), "{plan:?}");
        // min-degree tie-break picks 2 or 3; both have degree 2, id wins
        assert_eq!(plan.vertex, v(2));
        let keys: Vec<_> = g.incident_edges(v(2)).collect();
        for k in keys {
            g.remove_edge(k).unwrap();
        }
        g.remove_vertex(v(2)).unwrap();
        g.add_edge(v(3), v(5), PwlFunction::shift(rat_int(2)), PwlFunction::shift(rat_int(2)))
            .unwrap();
        let updated = nice.update_after_removal(&plan).unwrap();
        assert_eq!(updated.bag_count(), 1);
        assert!(updated.as_td().validate(&g).is_empty());
        assert!(updated.as_td().width() <= width_before);
    }

    #[test]
    fn heuristic_on_tree_has_width_one() {
        // a small tree: star with a path hung off it
        let mut g = Graph::new(v(1), v(5));
        for id in 2..=5 {
            g.add_vertex(v(id));
        }
        g.add_edge(v(1), v(2), shift(), shift()).unwrap();
        g.add_edge(v(2), v(3), shift(), shift()).unwrap();
        g.add_edge(v(2), v(4), shift(), shift()).unwrap();
        g.add_edge(v(4), v(5), shift(), shift()).unwrap();
        let td = heuristic_decomposition(&g);
        assert!(td.validate(&g).is_empty());
        assert_eq!(td.width(), 1);
    }

    #[test]
    fn heuristic_on_clique_is_forced() {
        let k = 5;
        let mut g = Graph::new(v(1), v(k));
        for id in 2..k {
            g.add_vertex(v(id));
        }
        for a in 1..=k {
            for b in (a + 1)..=k {
                g.add_edge(v(a), v(b), shift(), shift()).unwrap();
            }
        }
        let td = heuristic_decomposition(&g);
        assert!(td.validate(&g).is_empty());
        assert_eq!(td.width(), (k - 1) as usize);
    }

    #[test]
    fn heuristic_on_cycle_has_width_two() {
        for n in [3u32, 5, 8] {
            let mut g = Graph::new(v(1), v(n));
            for id in 2..n {
                g.add_vertex(v(id));
            }
            for id in 1..n {
                g.add_edge(v(id), v(id + 1), shift(), shift()).unwrap();
            }
            g.add_edge(v(n), v(1), shift(), shift()).unwrap();
            let td = heuristic_decomposition(&g);
            assert!(td.validate(&g).is_empty(), "n = {n}");
            assert_eq!(td.width(), 2, "n = {n}");
        }
    }

    #[test]
    fn heuristic_covers_disconnected_graphs() {
        let mut g = Graph::new(v(1), v(4));
        g.add_vertex(v(2));
        g.add_vertex(v(3));
        g.add_edge(v(1), v(2), shift(), shift()).unwrap();
        g.add_edge(v(3), v(4), shift(), shift()).unwrap();
        let td = heuristic_decomposition(&g);
        assert!(td.validate(&g).is_empty());
    }

    #[test]
    fn separator_on_long_path() {
        let g = path_graph(9);
        let td = heuristic_decomposition(&g);
        let sep = balanced_separator(&g, &td).unwrap();
        let n = g.vertex_count();
        assert!(3 * sep.side_a.len() <= 2 * n);
        assert!(3 * sep.side_b.len() <= 2 * n);
        assert!(sep.separator.len() <= td.width() + 1);
        // exhaustive separator check: no edge between the sides
        for e in g.edges() {
            let (a, b) = e.endpoints();
            let cross = (sep.side_a.contains(&a) && sep.side_b.contains(&b))
                || (sep.side_a.contains(&b) && sep.side_b.contains(&a));
            assert!(!cross);
        }
    }

    #[test]
    fn separator_prefers_shared_bag_of_two_cliques() {
        // cliques {1,2,3,4} and {3,4,5,6} sharing {3,4}
        let mut g = Graph::new(v(1), v(6));
        for id in 2..=5 {
            g.add_vertex(v(id));
        }
        for group in [[1u32, 2, 3, 4], [3, 4, 5, 6]] {
            for (i, a) in group.iter().enumerate() {
                for b in &group[i + 1..] {
                    if g.edges_between(v(*a), v(*b)).is_empty() {
                        g.add_edge(v(*a), v(*b), shift(), shift()).unwrap();
                    }
                }
            }
        }
        let td = TreeDecomposition::new(
            vec![bag(&[1, 2, 3, 4]), bag(&[3, 4]), bag(&[3, 4, 5, 6])],
            &[(0, 1), (1, 2)],
        )
        .unwrap();
        let sep = balanced_separator(&g, &td).unwrap();
        assert_eq!(sep.separator, bag(&[3, 4]));
    }

    #[test]
    fn separator_on_star_is_the_center() {
        let mut g = Graph::new(v(1), v(9));
        for id in 2..9 {
            g.add_vertex(v(id));
        }
        for id in 2..=9 {
            g.add_edge(v(1), v(id), shift(), shift()).unwrap();
        }
        let mut bags = vec![bag(&[1])];
        let mut edges = Vec::new();
        for id in 2..=9u32 {
            bags.push(bag(&[1, id]));
            edges.push((0, bags.len() - 1));
        }
        let td = TreeDecomposition::new(bags, &edges).unwrap();
        let sep = balanced_separator(&g, &td).unwrap();
        assert_eq!(sep.separator, bag(&[1]));
    }
}
