//! Minimum spanning tree over a [`SpatialGraph`] and its length.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{MstcError, Result};
use crate::graph::{connected_components, Edge, SpatialGraph};
use crate::threshold::Pixel;
use crate::union_find::UnionFind;

#[derive(Debug, Clone)]
pub struct SpanningTree {
    /// Tree edges in the order Kruskal accepted them: ascending `(weight, i, j)`.
    pub edges: Vec<Edge>,
    /// Sum of edge weights, accumulated in ascending weight order so the
    /// value does not depend on node numbering or edge input order.
    pub total_length: f64,
}

/// Kruskal over the explicit edge list with `(weight, i, j)` tie-breaking.
pub fn minimum_spanning_tree(graph: &SpatialGraph) -> Result<SpanningTree> {
    let n = graph.node_count();
    if n < 2 {
        return Err(MstcError::TooFewNodes(n));
    }

    let mut sorted = graph.edges.clone();
    sorted.par_sort_unstable_by(|a, b| {
        a.weight
            .total_cmp(&b.weight)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });

    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    for e in sorted {
        if uf.union(e.i, e.j) {
            edges.push(e);
            if edges.len() == n - 1 {
                break;
            }
        }
    }
    if edges.len() != n - 1 {
        return Err(MstcError::DisconnectedGraph {
            components: connected_components(graph).0,
            k: graph.k_effective,
        });
    }
    let total_length = edges.iter().map(|e| e.weight).sum();
    Ok(SpanningTree {
        edges,
        total_length,
    })
}

/// Graphviz rendering of a tree over pixel positions. Nodes are pinned with
/// `pos="col,row!"`; nodes are drawn as blue points, edges as red lines.
pub fn write_dot<W: Write>(nodes: &[Pixel], edges: &[Edge], mut out: W) -> io::Result<()> {
    writeln!(out, "graph mst {{")?;
    writeln!(out, "  graph [splines=false, outputorder=edgesfirst];")?;
    writeln!(
        out,
        "  node [shape=point, width=0.04, color=blue, fillcolor=blue];"
    )?;
    writeln!(out, "  edge [color=red, penwidth=0.6];")?;
    for (idx, p) in nodes.iter().enumerate() {
        writeln!(out, "  {idx} [pos=\"{},{}!\"];", p.col, p.row)?;
    }
    for e in edges {
        writeln!(out, "  {} -- {};", e.i, e.j)?;
    }
    writeln!(out, "}}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::knn_graph;

    fn px(v: &[(u32, u32)]) -> Vec<Pixel> {
        v.iter().map(|&p| p.into()).collect()
    }

    #[test]
    fn unit_square() {
        let g = knn_graph(&px(&[(0, 0), (0, 1), (1, 0), (1, 1)]), 3).unwrap();
        let t = minimum_spanning_tree(&g).unwrap();
        assert_eq!(t.edges.len(), 3);
        assert_eq!(t.total_length, 3.0);
    }

    #[test]
    fn right_triangle_skips_hypotenuse() {
        let g = knn_graph(&px(&[(0, 0), (0, 3), (4, 0)]), 2).unwrap();
        let t = minimum_spanning_tree(&g).unwrap();
        assert_eq!(t.total_length, 7.0);
        assert!(t.edges.iter().all(|e| e.weight != 5.0));
    }

    #[test]
    fn errors() {
        let g = knn_graph(&px(&[(1, 1)]), 1).unwrap();
        assert!(matches!(
            minimum_spanning_tree(&g),
            Err(MstcError::TooFewNodes(1))
        ));

        let g = knn_graph(&px(&[(0, 0), (0, 1), (50, 50), (50, 51)]), 1).unwrap();
        match minimum_spanning_tree(&g) {
            Err(MstcError::DisconnectedGraph { components, k }) => {
                assert_eq!((components, k), (2, 1));
            }
            other => panic!("expected DisconnectedGraph, got {other:?}"),
        }
    }

    #[test]
    fn dot_layout() {
        let nodes = px(&[(0, 0), (2, 3)]);
        let g = knn_graph(&nodes, 1).unwrap();
        let t = minimum_spanning_tree(&g).unwrap();
        let mut buf = Vec::new();
        write_dot(&nodes, &t.edges, &mut buf).unwrap();
        let dot = String::from_utf8(buf).unwrap();
        assert!(dot.contains("1 [pos=\"3,2!\"];"));
        assert_eq!(dot.matches(" -- ").count(), 1);
    }
}
