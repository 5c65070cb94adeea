//! Single-source shortest paths with lazy-deletion binary heap.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Roadmap;

/// Which edge attribute Dijkstra minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeWeight {
    Invasiveness,
    Length,
}

/// Cost-to-come and parent links from a single source.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    pub source: usize,
    /// `f64::INFINITY` for unreachable nodes.
    pub cost_to_come: Vec<f64>,
    /// `None` for the source and for unreachable nodes.
    pub parent: Vec<Option<usize>>,
}

impl ShortestPathTree {
    pub fn is_reachable(&self, node: usize) -> bool {
        self.cost_to_come.get(node).is_some_and(|c| c.is_finite())
    }

    pub fn reachable_count(&self) -> usize {
        self.cost_to_come.iter().filter(|c| c.is_finite()).count()
    }

    /// Node sequence from the source to `target`, or `None` if unreachable.
    pub fn path_to(&self, target: usize) -> Option<Vec<usize>> {
        if !self.is_reachable(target) {
            return None;
        }
        let mut path = vec![target];
        let mut node = target;
        while let Some(p) = self.parent[node] {
            path.push(p);
            node = p;
        }
        path.reverse();
        Some(path)
    }

    /// `(parent, child)` pairs of the tree, ordered by child id.
    pub fn tree_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(child, p)| p.map(|p| (p, child)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost, then on node id.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over an implicit graph of `node_count` nodes. `neighbors(u, f)`
/// must call `f(v, w)` for every out-edge `u -> v` with weight `w >= 0`.
///
/// Equal tentative costs prefer the smaller parent id, so trees are
/// deterministic regardless of edge enumeration order.
pub fn shortest_path_tree<N>(node_count: usize, source: usize, mut neighbors: N) -> ShortestPathTree
where
    N: FnMut(usize, &mut dyn FnMut(usize, f64)),
{
    let mut cost = vec![f64::INFINITY; node_count];
    let mut parent: Vec<Option<usize>> = vec![None; node_count];
    let mut settled = vec![false; node_count];
    let mut heap = BinaryHeap::new();
    cost[source] = 0.0;
    heap.push(Entry {
        cost: 0.0,
        node: source,
    });

    while let Some(Entry { cost: c, node: u }) = heap.pop() {
        if settled[u] || c > cost[u] {
            continue;
        }
        settled[u] = true;
        neighbors(u, &mut |v, w| {
            if settled[v] {
                return;
            }
            let candidate = c + w;
            let better =
                candidate < cost[v] || (candidate == cost[v] && parent[v].is_some_and(|p| u < p));
            if better {
                let improved = candidate < cost[v];
                cost[v] = candidate;
                parent[v] = Some(u);
                if improved {
                    heap.push(Entry {
                        cost: candidate,
                        node: v,
                    });
                }
            }
        });
    }
    ShortestPathTree {
        source,
        cost_to_come: cost,
        parent,
    }
}

/// Shortest-path tree over the roadmap's directed edges.
pub fn dijkstra(roadmap: &Roadmap, source: usize, weight: EdgeWeight) -> Result<ShortestPathTree> {
    if source >= roadmap.node_count() {
        return Err(Error::Contract(format!(
            "source node {source} out of range for {} nodes",
            roadmap.node_count()
        )));
    }
    Ok(shortest_path_tree(
        roadmap.node_count(),
        source,
        |u, visit| {
            for e in roadmap.out_edges(u) {
                visit(e.to, e.weight(weight));
            }
        },
    ))
}
