//! Two-terminal undirected multigraph with directional arrival functions.
//!
//! Each undirected edge carries a pair of [`PwlFunction`]s, one per travel
//! direction; a one-way edge has the infinite function in the blocked
//! direction. Self-loops and parallel edges are representable because they
//! arise mid-reduction. All containers are ordered so iteration is
//! deterministic.

use crate::pwl::{FifoViolation, PwlFunction};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Stable vertex identifier; survives edge mutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Edge identifier drawn from a monotone counter, so traces can reference
/// deleted edges unambiguously.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey(u64);

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// An undirected edge with one arrival function per direction.
#[derive(Debug, Clone)]
pub struct EdgeRecord {
    key: EdgeKey,
    endpoints: (VertexId, VertexId),
    /// Arrival function departing `endpoints.0` toward `endpoints.1`.
    forward: PwlFunction,
    /// Arrival function departing `endpoints.1` toward `endpoints.0`.
    backward: PwlFunction,
}

impl EdgeRecord {
    pub fn key(&self) -> EdgeKey {
        self.key
    }

    pub fn endpoints(&self) -> (VertexId, VertexId) {
        self.endpoints
    }

    pub fn forward(&self) -> &PwlFunction {
        &self.forward
    }

    pub fn backward(&self) -> &PwlFunction {
        &self.backward
    }

    pub fn is_self_loop(&self) -> bool {
        self.endpoints.0 == self.endpoints.1
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.endpoints.0 == v || self.endpoints.1 == v
    }

    /// The other endpoint when `v` is one of them.
    pub fn other_endpoint(&self, v: VertexId) -> Option<VertexId> {
        if self.endpoints.0 == v {
            Some(self.endpoints.1)
        } else if self.endpoints.1 == v {
            Some(self.endpoints.0)
        } else {
            None
        }
    }

    /// Arrival function for travel departing `from` along this edge.
    pub fn arrival_from(&self, from: VertexId) -> Option<&PwlFunction> {
        if self.endpoints.0 == from {
            Some(&self.forward)
        } else if self.endpoints.1 == from {
            Some(&self.backward)
        } else {
            None
        }
    }

    /// Endpoint pair normalized to `(min, max)`.
    pub fn normalized_endpoints(&self) -> (VertexId, VertexId) {
        let (u, v) = self.endpoints;
        if u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeKey),
    #[error("vertex {0} is not in the requested subset")]
    NotASubset(VertexId),
    #[error("vertex {0} still has incident edges")]
    VertexNotIsolated(VertexId),
    #[error("induced subgraph needs at least one vertex")]
    EmptySubset,
}

/// A FIFO violation on a specific edge direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphViolation {
    pub edge: EdgeKey,
    /// Departure endpoint of the offending direction.
    pub from: VertexId,
    pub to: VertexId,
    pub violation: FifoViolation,
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "edge {} direction {}->{}: {}", self.edge, self.from, self.to, self.violation)
    }
}

/// Two-terminal undirected multigraph.
#[derive(Debug, Clone)]
pub struct Graph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeKey, EdgeRecord>,
    incidence: BTreeMap<VertexId, BTreeSet<EdgeKey>>,
    terminals: (VertexId, VertexId),
    next_key: u64,
}

impl Graph {
    /// Creates a graph containing just the two terminals.
    pub fn new(source: VertexId, destination: VertexId) -> Self {
        let mut vertices = BTreeSet::new();
        vertices.insert(source);
        vertices.insert(destination);
        let mut incidence = BTreeMap::new();
        incidence.insert(source, BTreeSet::new());
        incidence.insert(destination, BTreeSet::new());
        Graph {
            vertices,
            edges: BTreeMap::new(),
            incidence,
            terminals: (source, destination),
            next_key: 0,
        }
    }

    pub fn terminals(&self) -> (VertexId, VertexId) {
        self.terminals
    }

    pub fn source(&self) -> VertexId {
        self.terminals.0
    }

    pub fn destination(&self) -> VertexId {
        self.terminals.1
    }

    pub fn set_terminals(&mut self, s: VertexId, d: VertexId) -> Result<(), GraphError> {
        if !self.vertices.contains(&s) {
            return Err(GraphError::UnknownVertex(s));
        }
        if !self.vertices.contains(&d) {
            return Err(GraphError::UnknownVertex(d));
        }
        self.terminals = (s, d);
        Ok(())
    }

    pub fn is_terminal(&self, v: VertexId) -> bool {
        self.terminals.0 == v || self.terminals.1 == v
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.vertices.insert(v);
        self.incidence.entry(v).or_default();
    }

    /// Allocates a fresh vertex id one past the current maximum.
    pub fn fresh_vertex(&mut self) -> VertexId {
        let id = VertexId(self.vertices.iter().next_back().map_or(0, |v| v.0 + 1));
        self.add_vertex(id);
        id
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_set(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn add_edge(
        &mut self,
        u: VertexId,
        v: VertexId,
        forward: PwlFunction,
        backward: PwlFunction,
    ) -> Result<EdgeKey, GraphError> {
        if !self.vertices.contains(&u) {
            return Err(GraphError::UnknownVertex(u));
        }
        if !self.vertices.contains(&v) {
            return Err(GraphError::UnknownVertex(v));
        }
        let key = EdgeKey(self.next_key);
        self.next_key += 1;
        self.edges.insert(key, EdgeRecord { key, endpoints: (u, v), forward, backward });
        self.incidence.get_mut(&u).unwrap().insert(key);
        self.incidence.get_mut(&v).unwrap().insert(key);
        Ok(key)
    }

    pub fn remove_edge(&mut self, key: EdgeKey) -> Result<EdgeRecord, GraphError> {
        let record = self.edges.remove(&key).ok_or(GraphError::UnknownEdge(key))?;
        self.incidence.get_mut(&record.endpoints.0).unwrap().remove(&key);
        self.incidence.get_mut(&record.endpoints.1).unwrap().remove(&key);
        Ok(record)
    }

    /// Removes an isolated vertex; errors if edges are still incident.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<(), GraphError> {
        let incident = self.incidence.get(&v).ok_or(GraphError::UnknownVertex(v))?;
        if !incident.is_empty() {
            return Err(GraphError::VertexNotIsolated(v));
        }
        self.incidence.remove(&v);
        self.vertices.remove(&v);
        Ok(())
    }

    pub fn edge(&self, key: EdgeKey) -> Option<&EdgeRecord> {
        self.edges.get(&key)
    }

    pub fn edges(&self) -> impl Iterator<Item = &EdgeRecord> {
        self.edges.values()
    }

    pub fn incident_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeKey> + '_ {
        self.incidence.get(&v).into_iter().flat_map(|s| s.iter().copied())
    }

    /// Distinct neighbors of `v`, ignoring self-loops and multiplicity.
    pub fn distinct_neighbors(&self, v: VertexId) -> BTreeSet<VertexId> {
        let mut out = BTreeSet::new();
        for key in self.incident_edges(v) {
            let e = &self.edges[&key];
            if let Some(w) = e.other_endpoint(v) {
                if w != v {
                    out.insert(w);
                }
            }
        }
        out
    }

    /// Number of distinct neighbors of `v` (self-loops and parallel edges
    /// do not count).
    pub fn degree_distinct(&self, v: VertexId) -> Result<usize, GraphError> {
        if !self.vertices.contains(&v) {
            return Err(GraphError::UnknownVertex(v));
        }
        Ok(self.distinct_neighbors(v).len())
    }

    /// All edges joining `u` and `v` in either stored orientation.
    pub fn edges_between(&self, u: VertexId, v: VertexId) -> Vec<EdgeKey> {
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        self.incident_edges(a)
            .filter(|k| self.edges[k].normalized_endpoints() == (a, b))
            .collect()
    }

    /// All self-loop edge keys.
    pub fn self_loops(&self) -> Vec<EdgeKey> {
        self.edges.values().filter(|e| e.is_self_loop()).map(|e| e.key).collect()
    }

    /// Maximal classes of parallel edges (two or more edges sharing both
    /// endpoints), self-loops excluded. Deterministic order by endpoint pair.
    pub fn parallel_groups(&self) -> Vec<Vec<EdgeKey>> {
        let mut by_pair: BTreeMap<(VertexId, VertexId), Vec<EdgeKey>> = BTreeMap::new();
        for e in self.edges.values() {
            if e.is_self_loop() {
                continue;
            }
            by_pair.entry(e.normalized_endpoints()).or_default().push(e.key);
        }
        by_pair.into_values().filter(|g| g.len() >= 2).collect()
    }

    /// The subgraph induced by `keep`: all edges with both endpoints inside.
    /// Original terminals are retained when present; a missing terminal is
    /// replaced by the smallest kept vertex (callers that need specific
    /// terminals call [`Graph::set_terminals`] afterwards).
    pub fn induced_subgraph(&self, keep: &BTreeSet<VertexId>) -> Result<Graph, GraphError> {
        for v in keep {
            if !self.vertices.contains(v) {
                return Err(GraphError::NotASubset(*v));
            }
        }
        let fallback = *keep.iter().next().ok_or(GraphError::EmptySubset)?;
        let pick = |t: VertexId| if keep.contains(&t) { t } else { fallback };
        let mut g = Graph::new(pick(self.terminals.0), pick(self.terminals.1));
        for v in keep {
            g.add_vertex(*v);
        }
        for e in self.edges.values() {
            if keep.contains(&e.endpoints.0) && keep.contains(&e.endpoints.1) {
                g.add_edge(e.endpoints.0, e.endpoints.1, e.forward.clone(), e.backward.clone())
                    .expect("endpoints were just added");
            }
        }
        Ok(g)
    }

    /// Total count of linear pieces over both directions of all edges;
    /// an infinite direction contributes zero.
    pub fn total_pieces(&self) -> usize {
        self.edges
            .values()
            .map(|e| e.forward.pieces().len() + e.backward.pieces().len())
            .sum()
    }

    /// Aggregated FIFO violations over all edges and directions.
    pub fn validate(&self) -> Vec<GraphViolation> {
        let mut out = Vec::new();
        for e in self.edges.values() {
            for v in e.forward.validate_fifo() {
                out.push(GraphViolation {
                    edge: e.key,
                    from: e.endpoints.0,
                    to: e.endpoints.1,
                    violation: v,
                });
            }
            for v in e.backward.validate_fifo() {
                out.push(GraphViolation {
                    edge: e.key,
                    from: e.endpoints.1,
                    to: e.endpoints.0,
                    violation: v,
                });
            }
        }
        out
    }

    /// Connected components (undirected, ignoring function direction),
    /// sorted by smallest member.
    pub fn components(&self) -> Vec<BTreeSet<VertexId>> {
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut out = Vec::new();
        for start in &self.vertices {
            if seen.contains(start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![*start];
            while let Some(v) = stack.pop() {
                if !comp.insert(v) {
                    continue;
                }
                for w in self.distinct_neighbors(v) {
                    if !comp.contains(&w) {
                        stack.push(w);
                    }
                }
            }
            seen.extend(comp.iter().copied());
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }
}
