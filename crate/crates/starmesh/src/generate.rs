//! Random instance generators for experiments and randomized testing.
//!
//! All generators are deterministic given the RNG state, produce connected
//! graphs, and build FIFO-valid arrival functions by construction: delays
//! above the identity are sampled at each breakpoint so slopes stay
//! nonnegative and the final slope is at least one.

use crate::decomposition::{heuristic_decomposition, TreeDecomposition};
use crate::graph::{Graph, VertexId};
use crate::pwl::PwlFunction;
use crate::rational::{rat, rat_int, Rat};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

/// A generated graph together with a matching tree decomposition.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub graph: Graph,
    pub decomposition: TreeDecomposition,
}

const DELAY_POOL: [(i64, i64); 7] = [(0, 1), (1, 2), (1, 1), (3, 2), (2, 1), (3, 1), (5, 1)];
const FINAL_SLOPE_POOL: [(i64, i64); 4] = [(1, 1), (3, 2), (2, 1), (3, 1)];

fn draw_delay<R: Rng + ?Sized>(rng: &mut R) -> Rat {
    let (n, d) = DELAY_POOL[rng.gen_range(0..DELAY_POOL.len())];
    rat(n, d)
}

/// A random FIFO-valid arrival function with at most `pieces` pieces.
///
/// Breakpoints sit at small integers and the delay `f(t) − t` at each
/// breakpoint is drawn from a small pool, clamped so the slope between
/// consecutive breakpoints never goes negative. Collinear draws may merge,
/// so the piece count is an upper bound.
pub fn random_fifo_function<R: Rng + ?Sized>(rng: &mut R, pieces: usize) -> PwlFunction {
    let pieces = pieces.max(1);
    let mut times: Vec<i64> = (1..=(3 * pieces as i64)).collect();
    times.shuffle(rng);
    let mut times: Vec<i64> = times.into_iter().take(pieces - 1).collect();
    times.sort_unstable();

    let mut points: Vec<(Rat, Rat)> = Vec::with_capacity(pieces);
    let mut delay = draw_delay(rng);
    points.push((rat_int(0), delay.clone()));
    let mut prev_t = rat_int(0);
    for t in times {
        let t = rat_int(t);
        let dt = &t - &prev_t;
        // keep the slope nonnegative: delay may drop by at most dt
        let floor = (&delay - &dt).max(rat_int(0));
        delay = draw_delay(rng).max(floor);
        points.push((t.clone(), &t + &delay));
        prev_t = t;
    }
    let (n, d) = FINAL_SLOPE_POOL[rng.gen_range(0..FINAL_SLOPE_POOL.len())];
    let f = PwlFunction::from_breakpoints(&points, rat(n, d)).expect("constructed in order");
    debug_assert!(f.is_fifo());
    f
}

/// Layered instance: terminal layers `{s}` and `{d}` around interior layers
/// of at most `width` vertices, consecutive layers completely joined, both
/// directions carrying independent random FIFO functions. Its natural path
/// decomposition has one bag per consecutive layer pair. With `width = 1`
/// the family degenerates to a chain whose reduction performs series
/// compositions only.
pub fn layered(rng: &mut impl Rng, n: usize, width: usize, pieces: usize) -> GeneratedInstance {
    assert!(n >= 2, "layered instances need both terminals");
    let width = width.max(1);
    let s = VertexId(1);
    let d = VertexId(n as u32);
    let mut g = Graph::new(s, d);
    let mut layers: Vec<Vec<VertexId>> = vec![vec![s]];
    let mut next = 2u32;
    let interior = n - 2;
    let mut placed = 0;
    while placed < interior {
        let take = width.min(interior - placed);
        let mut layer = Vec::with_capacity(take);
        for _ in 0..take {
            let v = VertexId(next);
            next += 1;
            g.add_vertex(v);
            layer.push(v);
        }
        placed += take;
        layers.push(layer);
    }
    layers.push(vec![d]);

    for pair in layers.windows(2) {
        for &u in &pair[0] {
            for &w in &pair[1] {
                let fwd = random_fifo_function(rng, pieces);
                let bwd = random_fifo_function(rng, pieces);
                g.add_edge(u, w, fwd, bwd).unwrap();
            }
        }
    }

    let bags: Vec<BTreeSet<VertexId>> = layers
        .windows(2)
        .map(|pair| pair[0].iter().chain(pair[1].iter()).copied().collect())
        .collect();
    let edges: Vec<(usize, usize)> = (1..bags.len()).map(|i| (i - 1, i)).collect();
    let decomposition = if bags.is_empty() {
        TreeDecomposition::single_bag([s, d].into_iter().collect())
    } else {
        TreeDecomposition::new(bags, &edges).expect("layer chain is a path")
    };
    debug_assert!(decomposition.validate(&g).is_empty());
    GeneratedInstance { graph: g, decomposition }
}

/// Random two-terminal series-parallel instance (treewidth ≤ 2). Starting
/// from the single terminal edge, each growth step picks an edge and either
/// subdivides it (series) or attaches a fresh two-edge detour between its
/// endpoints (parallel composition with a path, which keeps the graph
/// simple). The decomposition comes from the min-fill heuristic.
pub fn series_parallel(rng: &mut impl Rng, n: usize, pieces: usize) -> GeneratedInstance {
    assert!(n >= 2, "series-parallel instances need both terminals");
    let s = VertexId(1);
    let d = VertexId(2);
    let mut g = Graph::new(s, d);
    g.add_edge(s, d, random_fifo_function(rng, pieces), random_fifo_function(rng, pieces))
        .unwrap();
    let mut next = 3u32;
    while g.vertex_count() < n {
        let keys: Vec<_> = g.edges().map(|e| e.key()).collect();
        let key = keys[rng.gen_range(0..keys.len())];
        let (u, w) = g.edge(key).unwrap().endpoints();
        let mid = VertexId(next);
        next += 1;
        g.add_vertex(mid);
        if rng.gen_bool(0.5) {
            // series: replace u-w by u-mid-w
            g.remove_edge(key).unwrap();
        } // otherwise parallel: keep u-w and add the detour u-mid-w
        g.add_edge(u, mid, random_fifo_function(rng, pieces), random_fifo_function(rng, pieces))
            .unwrap();
        g.add_edge(mid, w, random_fifo_function(rng, pieces), random_fifo_function(rng, pieces))
            .unwrap();
    }
    let decomposition = heuristic_decomposition(&g);
    debug_assert!(decomposition.validate(&g).is_empty());
    GeneratedInstance { graph: g, decomposition }
}

/// Random connected partial k-tree with its width-k decomposition. Builds a
/// k-tree by repeatedly attaching a fresh vertex to a k-subset of an
/// existing bag, then drops some non-anchor edges; one edge per new vertex
/// always stays, so the graph remains connected. With probability 1/8 an
/// edge is one-way (one direction infinite).
pub fn random_partial_ktree(
    rng: &mut impl Rng,
    n: usize,
    k: usize,
    pieces: usize,
) -> GeneratedInstance {
    assert!(n >= 2);
    let k = k.max(1);
    let s = VertexId(1);
    let d = VertexId(n as u32);
    let mut g = Graph::new(s, d);
    let base = (k + 1).min(n);
    for id in 1..=base {
        g.add_vertex(VertexId(id as u32));
    }
    // base clique
    for a in 1..=base {
        for b in (a + 1)..=base {
            random_edge(&mut g, rng, VertexId(a as u32), VertexId(b as u32), pieces);
        }
    }
    let mut bags: Vec<BTreeSet<VertexId>> =
        vec![(1..=base).map(|i| VertexId(i as u32)).collect()];
    let mut tree_edges: Vec<(usize, usize)> = Vec::new();
    for id in (base + 1)..=n {
        let v = VertexId(id as u32);
        g.add_vertex(v);
        let parent = rng.gen_range(0..bags.len());
        let mut pool: Vec<VertexId> = bags[parent].iter().copied().collect();
        pool.shuffle(rng);
        let mut chosen: Vec<VertexId> = pool.into_iter().take(k.min(bags[parent].len())).collect();
        chosen.sort_unstable();
        // anchor edge keeps the graph connected; others may be dropped
        let anchor = chosen[0];
        for &u in &chosen {
            if u == anchor || rng.gen_bool(0.7) {
                random_edge(&mut g, rng, u, v, pieces);
            }
        }
        let mut bag: BTreeSet<VertexId> = chosen.into_iter().collect();
        bag.insert(v);
        bags.push(bag);
        tree_edges.push((parent, bags.len() - 1));
    }
    let decomposition = if bags.len() == 1 {
        TreeDecomposition::single_bag(bags.pop().unwrap())
    } else {
        TreeDecomposition::new(bags, &tree_edges).expect("attachment order is a tree")
    };
    debug_assert!(decomposition.validate(&g).is_empty());
    debug_assert!(g.is_connected());
    GeneratedInstance { graph: g, decomposition }
}

/// Adds a random FIFO edge; one direction becomes infinite with probability 1/8.
fn random_edge<R: Rng + ?Sized>(
    g: &mut Graph,
    rng: &mut R,
    u: VertexId,
    w: VertexId,
    pieces: usize,
) {
    let mut fwd = random_fifo_function(rng, pieces);
    let mut bwd = random_fifo_function(rng, pieces);
    if rng.gen_ratio(1, 8) {
        if rng.gen_bool(0.5) {
            fwd = PwlFunction::infinity();
        } else {
            bwd = PwlFunction::infinity();
        }
    }
    g.add_edge(u, w, fwd, bwd).unwrap();
}
