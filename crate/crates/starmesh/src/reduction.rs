//! Arrival-function-preserving graph transformations and the full
//! reduction to a single terminal-to-terminal edge.
//!
//! The transformations are the classical catalog: self-loop deletion,
//! pendant deletion, parallel reduction (pointwise minimum per direction),
//! and the star-mesh transformation, which deletes a vertex `c` and adds
//! one edge per neighbor pair carrying the composed arrival functions
//! through `c`. Degree-two star-mesh is exactly the series reduction and
//! degree-three is the wye-delta step.
//!
//! [`reduce_to_terminals`] drives the whole reduction along a nice tree
//! decomposition so that every star-mesh has degree at most width + 1 and
//! the transformation counts stay linear.

use crate::decomposition::{
    DecompositionError, DecompositionViolation, TreeDecomposition,
};
use crate::graph::{EdgeKey, Graph, GraphError, VertexId};
use crate::pwl::PwlFunction;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    SelfLoop,
    Pendant,
    Series,
    Parallel,
    StarMesh,
    SeparatorContraction,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepKind::SelfLoop => "self_loop",
            StepKind::Pendant => "pendant",
            StepKind::Series => "series",
            StepKind::Parallel => "parallel",
            StepKind::StarMesh => "star_mesh",
            StepKind::SeparatorContraction => "separator_contraction",
        };
        write!(f, "{s}")
    }
}

/// One applied transformation, with enough detail to audit the reduction.
#[derive(Debug, Clone)]
pub struct ReductionStep {
    pub kind: StepKind,
    pub removed_vertex: Option<VertexId>,
    pub removed_edges: Vec<EdgeKey>,
    pub created_edges: Vec<EdgeKey>,
    /// Distinct degree of the removed vertex (star-mesh only).
    pub degree: Option<usize>,
    /// Breakpoints over both directions of the consumed edges.
    pub breakpoints_before: usize,
    /// Breakpoints over both directions of the created edges.
    pub breakpoints_after: usize,
}

impl fmt::Display for ReductionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(v) = self.removed_vertex {
            write!(f, " vertex={v}")?;
        }
        if let Some(d) = self.degree {
            write!(f, " degree={d}")?;
        }
        if !self.removed_edges.is_empty() {
            write!(f, " removed=")?;
            for (i, k) in self.removed_edges.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{k}")?;
            }
        }
        if !self.created_edges.is_empty() {
            write!(f, " created=")?;
            for (i, k) in self.created_edges.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{k}")?;
            }
        }
        write!(f, " bp={}->{}", self.breakpoints_before, self.breakpoints_after)
    }
}

/// Ordered log of transformations with the budget statistics.
#[derive(Debug, Clone, Default)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
    pub star_mesh_count: usize,
    /// Pairwise parallel reductions: a k-way merge counts as k − 1.
    pub parallel_count: usize,
    pub self_loop_count: usize,
    pub pendant_count: usize,
    pub series_count: usize,
    pub max_star_degree: usize,
    /// Largest breakpoint count seen in any single created function.
    pub max_breakpoints: usize,
}

impl ReductionTrace {
    fn record(&mut self, g: &Graph, step: ReductionStep) {
        match step.kind {
            StepKind::StarMesh => {
                self.star_mesh_count += 1;
                self.max_star_degree = self.max_star_degree.max(step.degree.unwrap_or(0));
            }
            StepKind::Parallel => {
                self.parallel_count += step.removed_edges.len().saturating_sub(1);
            }
            StepKind::SelfLoop => self.self_loop_count += 1,
            StepKind::Pendant => self.pendant_count += 1,
            StepKind::Series => self.series_count += 1,
            StepKind::SeparatorContraction => {}
        }
        for key in &step.created_edges {
            if let Some(e) = g.edge(*key) {
                self.max_breakpoints = self
                    .max_breakpoints
                    .max(e.forward().breakpoint_count())
                    .max(e.backward().breakpoint_count());
            }
        }
        self.steps.push(step);
    }

    /// Key-value summary lines for CLI output.
    pub fn summary(&self) -> String {
        format!(
            "star_mesh: {}\nparallel: {}\nself_loop: {}\npendant: {}\nseries: {}\nmax_star_degree: {}\nmax_breakpoints: {}",
            self.star_mesh_count,
            self.parallel_count,
            self.self_loop_count,
            self.pendant_count,
            self.series_count,
            self.max_star_degree,
            self.max_breakpoints
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReductionError {
    #[error("edge {0} is not a self-loop")]
    NotASelfLoop(EdgeKey),
    #[error("vertex {0} is a terminal and cannot be removed")]
    TerminalRemoval(VertexId),
    #[error("vertex {vertex} has distinct degree {degree}, expected a pendant")]
    NotPendant { vertex: VertexId, degree: usize },
    #[error("edges do not form a parallel class")]
    NotParallel,
    #[error("vertex {0} has parallel incident edges; reduce them first")]
    ParallelEdgesPresent(VertexId),
    #[error("vertex {0} has a self-loop; delete it first")]
    SelfLoopPresent(VertexId),
    #[error("decomposition is invalid for this graph: {0}")]
    InvalidDecomposition(String),
    #[error("separator does not split the graph: edge {0} crosses the sides")]
    NotASeparator(EdgeKey),
    #[error("separator sides overlap or miss vertices")]
    BadSeparatorSides,
    #[error("step verification failed: {0}")]
    StepCheck(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

/// Deletes a self-loop. FIFO edges never improve an arrival by waiting, so
/// pairwise arrival functions are unchanged.
pub fn delete_self_loop(g: &mut Graph, key: EdgeKey) -> Result<ReductionStep, ReductionError> {
    let edge = g.edge(key).ok_or(GraphError::UnknownEdge(key))?;
    if !edge.is_self_loop() {
        return Err(ReductionError::NotASelfLoop(key));
    }
    let removed = g.remove_edge(key)?;
    Ok(ReductionStep {
        kind: StepKind::SelfLoop,
        removed_vertex: None,
        removed_edges: vec![key],
        created_edges: vec![],
        degree: None,
        breakpoints_before: removed.forward().breakpoint_count()
            + removed.backward().breakpoint_count(),
        breakpoints_after: 0,
    })
}

/// Deletes a non-terminal vertex of distinct degree one together with its
/// incident edges.
pub fn pendant_reduce(g: &mut Graph, v: VertexId) -> Result<ReductionStep, ReductionError> {
    if g.is_terminal(v) {
        return Err(ReductionError::TerminalRemoval(v));
    }
    let degree = g.degree_distinct(v)?;
    if degree != 1 {
        return Err(ReductionError::NotPendant { vertex: v, degree });
    }
    let keys: Vec<EdgeKey> = g.incident_edges(v).collect();
    let mut before = 0;
    for k in &keys {
        let e = g.remove_edge(*k)?;
        before += e.forward().breakpoint_count() + e.backward().breakpoint_count();
    }
    g.remove_vertex(v)?;
    Ok(ReductionStep {
        kind: StepKind::Pendant,
        removed_vertex: Some(v),
        removed_edges: keys,
        created_edges: vec![],
        degree: Some(1),
        breakpoints_before: before,
        breakpoints_after: 0,
    })
}

/// Replaces a class of parallel edges by a single edge whose directional
/// functions are the pointwise minima of the class, direction by direction.
pub fn parallel_reduce(
    g: &mut Graph,
    group: &[EdgeKey],
) -> Result<(EdgeKey, ReductionStep), ReductionError> {
    if group.len() < 2 {
        return Err(ReductionError::NotParallel);
    }
    let first = g.edge(group[0]).ok_or(GraphError::UnknownEdge(group[0]))?;
    if first.is_self_loop() {
        return Err(ReductionError::NotParallel);
    }
    let (u, v) = first.normalized_endpoints();
    let mut fwd = PwlFunction::infinity();
    let mut bwd = PwlFunction::infinity();
    let mut before = 0;
    for key in group {
        let e = g.edge(*key).ok_or(GraphError::UnknownEdge(*key))?;
        if e.normalized_endpoints() != (u, v) {
            return Err(ReductionError::NotParallel);
        }
        let u_to_v = e.arrival_from(u).expect("u is an endpoint");
        let v_to_u = e.arrival_from(v).expect("v is an endpoint");
        fwd = fwd.minimum(u_to_v);
        bwd = bwd.minimum(v_to_u);
        before += u_to_v.breakpoint_count() + v_to_u.breakpoint_count();
    }
    for key in group {
        g.remove_edge(*key)?;
    }
    let after = fwd.breakpoint_count() + bwd.breakpoint_count();
    let new_key = g.add_edge(u, v, fwd, bwd)?;
    let step = ReductionStep {
        kind: StepKind::Parallel,
        removed_vertex: None,
        removed_edges: group.to_vec(),
        created_edges: vec![new_key],
        degree: None,
        breakpoints_before: before,
        breakpoints_after: after,
    };
    Ok((new_key, step))
}

/// Star-mesh transformation: deletes non-terminal vertex `c` with distinct
/// neighbors `v_1 < … < v_k` and adds, for every pair `i < j`, an edge
/// `v_i v_j` whose forward function is `A(c→v_j) ∘ A(v_i→c)` and whose
/// backward function is `A(c→v_i) ∘ A(v_j→c)`. Preexisting `v_i v_j` edges
/// stay, producing parallel classes for a subsequent parallel reduction.
///
/// Degree two is the series reduction, degree one degenerates to a pendant
/// deletion, and degree zero just deletes the vertex. Requires no parallel
/// edges or self-loops at `c`.
pub fn star_mesh(
    g: &mut Graph,
    c: VertexId,
) -> Result<(Vec<EdgeKey>, ReductionStep), ReductionError> {
    if g.is_terminal(c) {
        return Err(ReductionError::TerminalRemoval(c));
    }
    let incident: Vec<EdgeKey> = g.incident_edges(c).collect();
    let neighbors: Vec<VertexId> = g.distinct_neighbors(c).into_iter().collect();
    if incident.len() != neighbors.len() {
        // either a self-loop at c or parallel edges into c
        if incident.iter().any(|k| g.edge(*k).unwrap().is_self_loop()) {
            return Err(ReductionError::SelfLoopPresent(c));
        }
        return Err(ReductionError::ParallelEdgesPresent(c));
    }

    let mut into_c = Vec::with_capacity(neighbors.len());
    let mut out_of_c = Vec::with_capacity(neighbors.len());
    let mut before = 0;
    for &n in &neighbors {
        let key = g
            .edges_between(n, c)
            .first()
            .copied()
            .expect("neighbor has a connecting edge");
        let e = g.edge(key).unwrap();
        let inward = e.arrival_from(n).expect("n is an endpoint").clone();
        let outward = e.arrival_from(c).expect("c is an endpoint").clone();
        before += inward.breakpoint_count() + outward.breakpoint_count();
        into_c.push(inward);
        out_of_c.push(outward);
    }

    for key in &incident {
        g.remove_edge(*key)?;
    }
    g.remove_vertex(c)?;

    let mut created = Vec::new();
    let mut after = 0;
    for i in 0..neighbors.len() {
        for j in (i + 1)..neighbors.len() {
            let fwd = out_of_c[j].compose(&into_c[i]);
            let bwd = out_of_c[i].compose(&into_c[j]);
            after += fwd.breakpoint_count() + bwd.breakpoint_count();
            created.push(g.add_edge(neighbors[i], neighbors[j], fwd, bwd)?);
        }
    }
    let step = ReductionStep {
        kind: StepKind::StarMesh,
        removed_vertex: Some(c),
        removed_edges: incident,
        created_edges: created.clone(),
        degree: Some(neighbors.len()),
        breakpoints_before: before,
        breakpoints_after: after,
    };
    Ok((created, step))
}

/// Result of a full reduction: both directional end-to-end functions and
/// the transformation trace.
#[derive(Debug, Clone)]
pub struct Reduced {
    /// Arrival function departing the source terminal toward the destination.
    pub forward: PwlFunction,
    /// Arrival function in the opposite direction.
    pub backward: PwlFunction,
    pub trace: ReductionTrace,
    /// Width of the nice decomposition the reduction ran on.
    pub width: usize,
}

/// Observer invoked after each applied transformation with the current
/// graph; returning an error aborts the reduction.
pub type StepObserver<'a> = dyn FnMut(&Graph, &ReductionStep) -> Result<(), String> + 'a;

/// Reduces the graph to the two terminals and returns the exact end-to-end
/// arrival functions in both directions.
///
/// The loop keeps the working assumptions in order: delete self-loops,
/// parallel-reduce every class (A1), prune subset leaves (A2), then either
/// finish the single remaining bag by star-meshing its non-terminals (A3)
/// or remove the planned vertex and update the decomposition. Disconnected
/// terminals yield a pair of infinite functions with a completed trace.
pub fn reduce_to_terminals(g: &Graph, td: &TreeDecomposition) -> Result<Reduced, ReductionError> {
    reduce_with_observer(g, td, None)
}

/// [`reduce_to_terminals`] with a per-step observer hook.
pub fn reduce_with_observer(
    g: &Graph,
    td: &TreeDecomposition,
    mut observer: Option<&mut StepObserver<'_>>,
) -> Result<Reduced, ReductionError> {
    let violations = td.validate(g);
    if !violations.is_empty() {
        return Err(ReductionError::InvalidDecomposition(render_violations(&violations)));
    }
    let mut graph = g.clone();
    let mut nice = td.make_nice()?;
    let width = nice.width();
    let mut trace = ReductionTrace::default();
    let (s, d) = graph.terminals();

    let apply = |graph: &mut Graph,
                     trace: &mut ReductionTrace,
                     observer: &mut Option<&mut StepObserver<'_>>,
                     step: ReductionStep|
     -> Result<(), ReductionError> {
        trace.record(graph, step);
        if let Some(obs) = observer {
            let step = trace.steps.last().expect("just recorded");
            obs(graph, step).map_err(ReductionError::StepCheck)?;
        }
        Ok(())
    };

    if s == d {
        return Ok(Reduced {
            forward: PwlFunction::identity(),
            backward: PwlFunction::identity(),
            trace,
            width,
        });
    }

    // input self-loops go first; transformations never create new ones
    for key in graph.self_loops() {
        let step = delete_self_loop(&mut graph, key)?;
        apply(&mut graph, &mut trace, &mut observer, step)?;
    }

    loop {
        // A1: no parallel classes
        for group in graph.parallel_groups() {
            let (_, step) = parallel_reduce(&mut graph, &group)?;
            apply(&mut graph, &mut trace, &mut observer, step)?;
        }
        // A2: no leaf bag inside its neighbor
        nice = nice.prune_subset_leaves();

        if graph.vertex_count() == 2 {
            break;
        }

        if nice.bag_count() == 1 {
            // A3: single bag left; star-mesh its non-terminals smallest
            // degree first
            let pick = nice
                .bag(0)
                .iter()
                .copied()
                .filter(|&v| v != s && v != d)
                .min_by_key(|&v| (graph.degree_distinct(v).unwrap_or(usize::MAX), v));
            let Some(v) = pick else {
                debug_assert!(false, "two non-terminal vertices unaccounted for");
                break;
            };
            debug_assert!(graph.degree_distinct(v).unwrap() <= width + 1);
            let (_, step) = star_mesh(&mut graph, v)?;
            nice.remove_vertex_everywhere(v);
            apply(&mut graph, &mut trace, &mut observer, step)?;
        } else {
            let plan = nice
                .find_removal_plan(&graph)?
                .expect("non-terminal vertices remain while |V| > 2");
            let actual_degree = graph.degree_distinct(plan.vertex)?;
            debug_assert!(
                actual_degree <= plan.expected_degree_bound,
                "degree {actual_degree} exceeds planned bound {}",
                plan.expected_degree_bound
            );
            debug_assert!(plan.expected_degree_bound <= width + 1);
            let (_, step) = star_mesh(&mut graph, plan.vertex)?;
            nice = nice.update_after_removal(&plan)?;
            apply(&mut graph, &mut trace, &mut observer, step)?;
            debug_assert!(nice.as_td().validate(&graph).is_empty());
        }
    }

    // after the final A1 pass at most one edge joins the terminals
    let keys = graph.edges_between(s, d);
    debug_assert!(keys.len() <= 1);
    let (forward, backward) = match keys.first() {
        None => (PwlFunction::infinity(), PwlFunction::infinity()),
        Some(key) => {
            let e = graph.edge(*key).unwrap();
            (
                e.arrival_from(s).expect("s is an endpoint").clone(),
                e.arrival_from(d).expect("d is an endpoint").clone(),
            )
        }
    };
    Ok(Reduced { forward, backward, trace, width })
}

fn render_violations(violations: &[DecompositionViolation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// Builds the separator graph: vertices `S ∪ {s, d}`, and for each side
/// `V_i` one edge per pair `u < v` in `S ∪ ({s, d} ∩ V_i)` carrying the
/// exact pairwise arrival functions of the induced side graph
/// `G[V_i ∪ S]`, computed by recursively reducing that side graph with the
/// pair as terminals. Unreachable pairs get the infinite function. The
/// end-to-end arrival function between the terminals is preserved exactly.
pub fn contract_to_separator_graph(
    g: &Graph,
    separator: &BTreeSet<VertexId>,
    side_a: &BTreeSet<VertexId>,
    side_b: &BTreeSet<VertexId>,
) -> Result<Graph, ReductionError> {
    let (s, d) = g.terminals();
    // sides plus separator must partition the vertex set
    let mut union: BTreeSet<VertexId> = separator.clone();
    for v in side_a.iter().chain(side_b) {
        if !union.insert(*v) {
            return Err(ReductionError::BadSeparatorSides);
        }
    }
    if &union != g.vertex_set() {
        return Err(ReductionError::BadSeparatorSides);
    }
    for e in g.edges() {
        let (u, v) = e.endpoints();
        if (side_a.contains(&u) && side_b.contains(&v))
            || (side_a.contains(&v) && side_b.contains(&u))
        {
            return Err(ReductionError::NotASeparator(e.key()));
        }
    }

    let mut contracted = Graph::new(s, d);
    for v in separator {
        contracted.add_vertex(*v);
    }
    contracted.add_vertex(s);
    contracted.add_vertex(d);

    for side in [side_a, side_b] {
        let mut keep: BTreeSet<VertexId> = separator.clone();
        keep.extend(side.iter().copied());
        if keep.is_empty() {
            continue;
        }
        let side_graph = g.induced_subgraph(&keep)?;
        let side_td = crate::decomposition::heuristic_decomposition(&side_graph);
        let mut pairs: Vec<VertexId> = separator.iter().copied().collect();
        for t in [s, d] {
            if side.contains(&t) {
                pairs.push(t);
            }
        }
        pairs.sort();
        pairs.dedup();
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                let mut h = side_graph.clone();
                h.set_terminals(pairs[i], pairs[j])?;
                let reduced = reduce_to_terminals(&h, &side_td)?;
                contracted.add_edge(pairs[i], pairs[j], reduced.forward, reduced.backward)?;
            }
        }
    }
    Ok(contracted)
}
