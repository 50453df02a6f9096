//! Text formats for graphs and tree decompositions.
//!
//! Graph format, line oriented, `c` lines are comments:
//!
//! ```text
//! c an optional comment
//! p graph <num_vertices> <num_edges>
//! t <source_id> <destination_id>
//! v <vertex_id>
//! e <u> <v> <forward_function> <backward_function>
//! ```
//!
//! Function tokens are the serialized [`PwlFunction`] form: `inf` or
//! `t0,v0;t1,v1;...@final_slope` with exact rational values (`p/q` or
//! integers). Writing then parsing reproduces the graph exactly.
//!
//! Tree decompositions use the PACE-style format:
//!
//! ```text
//! s td <num_bags> <max_bag_size> <num_vertices>
//! b <bag_id> <vertex> <vertex> ...
//! <bag_id> <bag_id>
//! ```
//!
//! Bag ids are 1-based; lines after the `b` block are tree edges.

use crate::decomposition::TreeDecomposition;
use crate::graph::{Graph, VertexId};
use crate::pwl::PwlFunction;
use std::collections::BTreeSet;
use std::fmt::Write as _;

/// A parse failure with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

/// Serializes a graph in the `p graph` format. Vertices and edges are
/// emitted in id order so output is deterministic.
pub fn write_graph(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "p graph {} {}", g.vertex_count(), g.edge_count()).unwrap();
    let (s, d) = g.terminals();
    writeln!(out, "t {s} {d}").unwrap();
    for v in g.vertices() {
        writeln!(out, "v {v}").unwrap();
    }
    for e in g.edges() {
        let (u, v) = e.endpoints();
        writeln!(out, "e {u} {v} {} {}", e.forward(), e.backward()).unwrap();
    }
    out
}

/// Parses the `p graph` format.
pub fn parse_graph(input: &str) -> Result<Graph, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut terminals: Option<(VertexId, VertexId)> = None;
    let mut vertices: Vec<VertexId> = Vec::new();
    let mut edges: Vec<(VertexId, VertexId, PwlFunction, PwlFunction)> = Vec::new();

    for (idx, raw) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "p" => {
                if header.is_some() {
                    return Err(ParseError::new(lineno, "duplicate p line"));
                }
                if fields.len() != 4 || fields[1] != "graph" {
                    return Err(ParseError::new(lineno, "expected `p graph <n> <m>`"));
                }
                let n = fields[2]
                    .parse::<usize>()
                    .map_err(|_| ParseError::new(lineno, "invalid vertex count"))?;
                let m = fields[3]
                    .parse::<usize>()
                    .map_err(|_| ParseError::new(lineno, "invalid edge count"))?;
                header = Some((n, m));
            }
            "t" => {
                if fields.len() != 3 {
                    return Err(ParseError::new(lineno, "expected `t <s> <d>`"));
                }
                let s = parse_vertex(fields[1], lineno)?;
                let d = parse_vertex(fields[2], lineno)?;
                terminals = Some((s, d));
            }
            "v" => {
                if fields.len() != 2 {
                    return Err(ParseError::new(lineno, "expected `v <id>`"));
                }
                vertices.push(parse_vertex(fields[1], lineno)?);
            }
            "e" => {
                if fields.len() != 5 {
                    return Err(ParseError::new(lineno, "expected `e <u> <v> <fwd> <bwd>`"));
                }
                let u = parse_vertex(fields[1], lineno)?;
                let v = parse_vertex(fields[2], lineno)?;
                let fwd: PwlFunction = fields[3]
                    .parse()
                    .map_err(|e| ParseError::new(lineno, format!("forward function: {e}")))?;
                let bwd: PwlFunction = fields[4]
                    .parse()
                    .map_err(|e| ParseError::new(lineno, format!("backward function: {e}")))?;
                edges.push((u, v, fwd, bwd));
            }
            other => {
                return Err(ParseError::new(lineno, format!("unknown record `{other}`")));
            }
        }
    }

    let (n, m) = header.ok_or_else(|| ParseError::new(input.lines().count().max(1), "missing p line"))?;
    let (s, d) = terminals
        .ok_or_else(|| ParseError::new(input.lines().count().max(1), "missing t line"))?;
    if vertices.len() != n {
        return Err(ParseError::new(1, format!("p line declares {n} vertices, found {}", vertices.len())));
    }
    if edges.len() != m {
        return Err(ParseError::new(1, format!("p line declares {m} edges, found {}", edges.len())));
    }
    let vertex_set: BTreeSet<VertexId> = vertices.iter().copied().collect();
    if !vertex_set.contains(&s) || !vertex_set.contains(&d) {
        return Err(ParseError::new(1, "terminals are not declared vertices"));
    }
    let mut g = Graph::new(s, d);
    for v in vertices {
        g.add_vertex(v);
    }
    for (u, v, fwd, bwd) in edges {
        if !vertex_set.contains(&u) || !vertex_set.contains(&v) {
            return Err(ParseError::new(1, format!("edge {u}-{v} references undeclared vertex")));
        }
        g.add_edge(u, v, fwd, bwd).expect("endpoints declared");
    }
    Ok(g)
}

fn parse_vertex(tok: &str, lineno: usize) -> Result<VertexId, ParseError> {
    tok.parse::<u32>()
        .map(VertexId)
        .map_err(|_| ParseError::new(lineno, format!("invalid vertex id `{tok}`")))
}

/// Serializes a tree decomposition in the PACE-style `s td` format.
pub fn write_td(td: &TreeDecomposition) -> String {
    let mut out = String::new();
    let max_bag = td.bags().iter().map(|b| b.len()).max().unwrap_or(0);
    let vertex_count: BTreeSet<VertexId> =
        td.bags().iter().flat_map(|b| b.iter().copied()).collect();
    writeln!(out, "s td {} {} {}", td.bag_count(), max_bag, vertex_count.len()).unwrap();
    for (i, bag) in td.bags().iter().enumerate() {
        write!(out, "b {}", i + 1).unwrap();
        for v in bag {
            write!(out, " {v}").unwrap();
        }
        writeln!(out).unwrap();
    }
    for (a, b) in td.tree_edges() {
        writeln!(out, "{} {}", a + 1, b + 1).unwrap();
    }
    out
}

/// Parses the PACE-style `s td` format.
pub fn parse_td(input: &str) -> Result<TreeDecomposition, ParseError> {
    let mut declared: Option<usize> = None;
    let mut bags: Vec<Option<BTreeSet<VertexId>>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    for (idx, raw) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "s" => {
                if declared.is_some() {
                    return Err(ParseError::new(lineno, "duplicate s line"));
                }
                if fields.len() != 5 || fields[1] != "td" {
                    return Err(ParseError::new(lineno, "expected `s td <bags> <max_bag> <n>`"));
                }
                let count = fields[2]
                    .parse::<usize>()
                    .map_err(|_| ParseError::new(lineno, "invalid bag count"))?;
                declared = Some(count);
                bags = vec![None; count];
            }
            "b" => {
                if declared.is_none() {
                    return Err(ParseError::new(lineno, "b line before s line"));
                }
                if fields.len() < 2 {
                    return Err(ParseError::new(lineno, "expected `b <id> <vertices...>`"));
                }
                let id = fields[1]
                    .parse::<usize>()
                    .map_err(|_| ParseError::new(lineno, "invalid bag id"))?;
                if id == 0 || id > bags.len() {
                    return Err(ParseError::new(lineno, format!("bag id {id} out of range")));
                }
                if bags[id - 1].is_some() {
                    return Err(ParseError::new(lineno, format!("duplicate bag {id}")));
                }
                let mut bag = BTreeSet::new();
                for tok in &fields[2..] {
                    bag.insert(parse_vertex(tok, lineno)?);
                }
                bags[id - 1] = Some(bag);
            }
            _ => {
                if fields.len() != 2 {
                    return Err(ParseError::new(lineno, "expected tree edge `<i> <j>`"));
                }
                let a = fields[0]
                    .parse::<usize>()
                    .map_err(|_| ParseError::new(lineno, "invalid bag id"))?;
                let b = fields[1]
                    .parse::<usize>()
                    .map_err(|_| ParseError::new(lineno, "invalid bag id"))?;
                if a == 0 || b == 0 || a > bags.len() || b > bags.len() {
                    return Err(ParseError::new(lineno, "tree edge out of range"));
                }
                edges.push((a - 1, b - 1));
            }
        }
    }

    if declared.is_none() {
        return Err(ParseError::new(input.lines().count().max(1), "missing s line"));
    }
    let bags: Vec<BTreeSet<VertexId>> = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| ParseError::new(1, format!("bag {} never declared", i + 1))))
        .collect::<Result<_, _>>()?;
    TreeDecomposition::new(bags, &edges)
        .map_err(|e| ParseError::new(1, format!("invalid decomposition: {e}")))
}
