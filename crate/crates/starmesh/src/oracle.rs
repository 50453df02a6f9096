//! Independent slow oracles for verifying the reduction engine.
//!
//! [`td_dijkstra`] is a label-setting shortest-arrival computation for one
//! departure time; [`enumerate_paths_arrival`] builds the full arrival
//! function by minimizing over every simple path. Both are deliberately
//! simple and share no code with the reduction path they check.

use crate::graph::{Graph, VertexId};
use crate::pwl::PwlFunction;
use crate::rational::{midpoint, rat_int, Arrival, Rat};
use num_traits::{Signed, Zero};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

/// Largest instance the exhaustive path enumeration will accept.
pub const ENUMERATION_VERTEX_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("departure time must be nonnegative")]
    NegativeDeparture,
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("edge {edge} direction {from}->{to} violates FIFO")]
    FifoViolation { edge: crate::graph::EdgeKey, from: VertexId, to: VertexId },
    #[error("instance has {vertices} vertices; path enumeration is limited to {limit}")]
    InstanceTooLarge { vertices: usize, limit: usize },
}

/// Result of an oracle computation, as exposed on the command line.
#[derive(Debug, Clone)]
pub enum OracleResult {
    /// Arrival times per vertex for each queried departure time.
    ArrivalTable(Vec<(Rat, BTreeMap<VertexId, Arrival>)>),
    /// Full end-to-end arrival function between the terminals.
    FullFunction(PwlFunction),
}

fn check_fifo(g: &Graph) -> Result<(), OracleError> {
    match g.validate().into_iter().next() {
        Some(violation) => Err(OracleError::FifoViolation {
            edge: violation.edge,
            from: violation.from,
            to: violation.to,
        }),
        None => Ok(()),
    }
}

/// Earliest arrival at every vertex when departing `source` at time
/// `departure`. Unreachable vertices map to [`Arrival::Infinite`].
/// Label-setting is valid because every edge is FIFO; the graph is checked
/// first and the offending edge reported otherwise. Priority ties break by
/// vertex id.
pub fn td_dijkstra(
    g: &Graph,
    source: VertexId,
    departure: &Rat,
) -> Result<BTreeMap<VertexId, Arrival>, OracleError> {
    if departure.is_negative() {
        return Err(OracleError::NegativeDeparture);
    }
    if !g.has_vertex(source) {
        return Err(OracleError::UnknownVertex(source));
    }
    check_fifo(g)?;

    let mut labels: BTreeMap<VertexId, Arrival> =
        g.vertices().map(|v| (v, Arrival::Infinite)).collect();
    let mut settled: BTreeSet<VertexId> = BTreeSet::new();
    let mut heap: BinaryHeap<Reverse<(Rat, VertexId)>> = BinaryHeap::new();
    labels.insert(source, Arrival::Finite(departure.clone()));
    heap.push(Reverse((departure.clone(), source)));

    while let Some(Reverse((t, u))) = heap.pop() {
        if !settled.insert(u) {
            continue;
        }
        for key in g.incident_edges(u) {
            let edge = g.edge(key).expect("incident edge exists");
            let Some(w) = edge.other_endpoint(u) else { continue };
            if w == u || settled.contains(&w) {
                continue;
            }
            let f = edge.arrival_from(u).expect("u is an endpoint");
            match f.eval(&t) {
                Arrival::Infinite => {}
                Arrival::Finite(arrive) => {
                    let better = match &labels[&w] {
                        Arrival::Infinite => true,
                        Arrival::Finite(cur) => arrive < *cur,
                    };
                    if better {
                        labels.insert(w, Arrival::Finite(arrive.clone()));
                        heap.push(Reverse((arrive, w)));
                    }
                }
            }
        }
    }
    Ok(labels)
}

/// The exact arrival function from `from` to `to`: the canonical pointwise
/// minimum, over every simple path, of the composition of the edge arrival
/// functions along the path. Returns the identity when `from == to` and the
/// infinite function when no path exists.
///
/// Exponential in the vertex count; guarded by
/// [`ENUMERATION_VERTEX_LIMIT`].
pub fn enumerate_paths_arrival(
    g: &Graph,
    from: VertexId,
    to: VertexId,
) -> Result<PwlFunction, OracleError> {
    if g.vertex_count() > ENUMERATION_VERTEX_LIMIT {
        return Err(OracleError::InstanceTooLarge {
            vertices: g.vertex_count(),
            limit: ENUMERATION_VERTEX_LIMIT,
        });
    }
    if !g.has_vertex(from) {
        return Err(OracleError::UnknownVertex(from));
    }
    if !g.has_vertex(to) {
        return Err(OracleError::UnknownVertex(to));
    }
    check_fifo(g)?;
    if from == to {
        return Ok(PwlFunction::identity());
    }

    let mut best = PwlFunction::infinity();
    let mut visited: BTreeSet<VertexId> = BTreeSet::new();
    visited.insert(from);
    let composed = PwlFunction::identity();
    explore(g, from, to, &mut visited, &composed, &mut best);
    Ok(best)
}

fn explore(
    g: &Graph,
    at: VertexId,
    to: VertexId,
    visited: &mut BTreeSet<VertexId>,
    composed: &PwlFunction,
    best: &mut PwlFunction,
) {
    for key in g.incident_edges(at) {
        let edge = g.edge(key).expect("incident edge exists");
        let Some(next) = edge.other_endpoint(at) else { continue };
        if next == at || visited.contains(&next) {
            continue;
        }
        let f = edge.arrival_from(at).expect("at is an endpoint");
        let extended = f.compose(composed);
        if extended.is_infinite() {
            continue;
        }
        if next == to {
            *best = best.minimum(&extended);
            continue;
        }
        visited.insert(next);
        explore(g, next, to, visited, &extended, best);
        visited.remove(&next);
    }
}

/// One disagreement between a claimed arrival function and the oracle.
#[derive(Debug, Clone)]
pub struct CrosscheckMismatch {
    pub t: Rat,
    pub function_value: Arrival,
    pub dijkstra_value: Arrival,
}

impl fmt::Display for CrosscheckMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t = {}: function says {}, oracle says {}",
            crate::rational::fmt_rat(&self.t),
            self.function_value,
            self.dijkstra_value
        )
    }
}

/// Outcome of [`crosscheck`].
#[derive(Debug, Clone)]
pub struct CrosscheckReport {
    pub checked_times: usize,
    pub mismatches: Vec<CrosscheckMismatch>,
}

impl CrosscheckReport {
    pub fn is_empty(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Evaluates `f` against [`td_dijkstra`] arrivals at the destination for a
/// grid of departure times: every breakpoint of `f`, midpoints between
/// consecutive breakpoints, t = 0, one point past the last breakpoint, and
/// any `extra_times`. Piecewise-linear functions that agree on such a grid
/// and share breakpoint structure are equal.
pub fn crosscheck(
    f: &PwlFunction,
    g: &Graph,
    extra_times: &[Rat],
) -> Result<CrosscheckReport, OracleError> {
    let (s, d) = g.terminals();
    let mut grid: BTreeSet<Rat> = BTreeSet::new();
    grid.insert(Rat::zero());
    let bps: Vec<Rat> = f.breakpoints().into_iter().map(|b| b.t).collect();
    for w in bps.windows(2) {
        grid.insert(midpoint(&w[0], &w[1]));
    }
    if let Some(last) = bps.last() {
        grid.insert(last + rat_int(1));
    } else {
        grid.insert(rat_int(1));
    }
    grid.extend(bps);
    for t in extra_times {
        if !t.is_negative() {
            grid.insert(t.clone());
        }
    }

    let mut mismatches = Vec::new();
    let checked_times = grid.len();
    for t in grid {
        let expected = f.eval(&t);
        let arrivals = td_dijkstra(g, s, &t)?;
        let got = arrivals[&d].clone();
        if expected != got {
            mismatches.push(CrosscheckMismatch { t, function_value: expected, dijkstra_value: got });
        }
    }
    Ok(CrosscheckReport { checked_times, mismatches })
}
