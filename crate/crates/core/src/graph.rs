//! Undirected Euclidean k-nearest-neighbour graphs over salient pixels.
//!
//! Neighbour search buckets points into a uniform grid and expands square
//! rings of cells around each query until the k-th candidate is provably
//! closer than anything outside the rings. Distances are compared as exact
//! integer squares with ties going to the lower node index, so the result is
//! identical to an all-pairs scan.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{MstcError, Result};
use crate::threshold::{Pixel, SalientPointSet};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub weight: f64,
}

/// Symmetrized kNN graph. Edges are unique, stored with `i < j`, sorted by
/// `(i, j)`.
#[derive(Debug, Clone)]
pub struct SpatialGraph {
    pub node_coords: Vec<Pixel>,
    pub edges: Vec<Edge>,
    /// Requested neighbourhood size.
    pub k: usize,
    /// `min(k, |V| - 1)`.
    pub k_effective: usize,
}

impl SpatialGraph {
    pub fn node_count(&self) -> usize {
        self.node_coords.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

pub fn build_knn_graph(points: &SalientPointSet, k: usize) -> Result<SpatialGraph> {
    knn_graph(&points.points, k)
}

/// Builds the union-symmetrized kNN graph over arbitrary distinct pixels.
pub fn knn_graph(points: &[Pixel], k: usize) -> Result<SpatialGraph> {
    if points.is_empty() {
        return Err(MstcError::EmptyPointSet);
    }
    let n = points.len();
    let k_eff = k.min(n - 1);

    let edges = if k_eff == 0 {
        Vec::new()
    } else if k_eff == n - 1 {
        complete_edges(points)
    } else {
        let grid = Grid::new(points, k_eff);
        let neighbours: Vec<Vec<u32>> = (0..n as u32)
            .into_par_iter()
            .map_init(Vec::new, |scratch, q| {
                grid.nearest(points, q, k_eff, scratch)
            })
            .collect();

        let mut pairs: Vec<u64> = Vec::with_capacity(n * k_eff);
        for (i, list) in neighbours.iter().enumerate() {
            let i = i as u32;
            pairs.extend(list.iter().map(|&j| pair_key(i, j)));
        }
        drop(neighbours);
        pairs.par_sort_unstable();
        pairs.dedup();
        pairs
            .into_par_iter()
            .map(|key| {
                let (i, j) = ((key >> 32) as u32, key as u32);
                Edge {
                    i,
                    j,
                    weight: points[i as usize].dist(points[j as usize]),
                }
            })
            .collect()
    };

    Ok(SpatialGraph {
        node_coords: points.to_vec(),
        edges,
        k,
        k_effective: k_eff,
    })
}

#[inline]
fn pair_key(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

fn complete_edges(points: &[Pixel]) -> Vec<Edge> {
    let n = points.len() as u32;
    (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (i + 1..n).map(move |j| Edge {
                i,
                j,
                weight: points[i as usize].dist(points[j as usize]),
            })
        })
        .collect()
}

/// Uniform bucket grid over the bounding box of the points.
struct Grid {
    min_row: u32,
    min_col: u32,
    cell: u32,
    rows: usize,
    cols: usize,
    /// CSR layout: points of cell `c` are `items[starts[c]..starts[c + 1]]`.
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl Grid {
    fn new(points: &[Pixel], k: usize) -> Self {
        let min_row = points.iter().map(|p| p.row).min().unwrap();
        let max_row = points.iter().map(|p| p.row).max().unwrap();
        let min_col = points.iter().map(|p| p.col).min().unwrap();
        let max_col = points.iter().map(|p| p.col).max().unwrap();
        let span_r = (max_row - min_row + 1) as f64;
        let span_c = (max_col - min_col + 1) as f64;

        // Aim for roughly k/4 points per cell so the search settles within
        // a few rings.
        let per_cell = (k as f64 / 4.0).max(2.0);
        let density = points.len() as f64 / (span_r * span_c);
        let cell = (per_cell / density).sqrt().ceil().max(1.0) as u32;

        let rows = ((max_row - min_row) / cell + 1) as usize;
        let cols = ((max_col - min_col) / cell + 1) as usize;

        let mut counts = vec![0u32; rows * cols + 1];
        let cell_of = |p: &Pixel| {
            ((p.row - min_row) / cell) as usize * cols + ((p.col - min_col) / cell) as usize
        };
        for p in points {
            counts[cell_of(p) + 1] += 1;
        }
        for c in 1..counts.len() {
            counts[c] += counts[c - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut items = vec![0u32; points.len()];
        for (idx, p) in points.iter().enumerate() {
            let c = cell_of(p);
            items[fill[c] as usize] = idx as u32;
            fill[c] += 1;
        }

        Self {
            min_row,
            min_col,
            cell,
            rows,
            cols,
            starts,
            items,
        }
    }

    fn cell_items(&self, r: usize, c: usize) -> &[u32] {
        let id = r * self.cols + c;
        &self.items[self.starts[id] as usize..self.starts[id + 1] as usize]
    }

    /// The `k` nearest other points of `q`, ordered by `(dist2, index)`.
    fn nearest(&self, points: &[Pixel], q: u32, k: usize, cand: &mut Vec<(u64, u32)>) -> Vec<u32> {
        cand.clear();
        let p = points[q as usize];
        let qr = ((p.row - self.min_row) / self.cell) as isize;
        let qc = ((p.col - self.min_col) / self.cell) as isize;
        let max_ring = self.rows.max(self.cols) as isize;
        let by_rank = |a: &(u64, u32), b: &(u64, u32)| a.cmp(b);

        let mut ring = 0isize;
        loop {
            let r_lo = (qr - ring).max(0);
            let r_hi = (qr + ring).min(self.rows as isize - 1);
            let c_lo = (qc - ring).max(0);
            let c_hi = (qc + ring).min(self.cols as isize - 1);
            for r in r_lo..=r_hi {
                let mut visit = |c: isize| {
                    for &j in self.cell_items(r as usize, c as usize) {
                        if j != q {
                            cand.push((p.dist2(points[j as usize]), j));
                        }
                    }
                };
                if (r - qr).abs() == ring {
                    (c_lo..=c_hi).for_each(&mut visit);
                } else {
                    // interior rows of the ring only touch its two side columns
                    if qc - ring >= 0 {
                        visit(qc - ring);
                    }
                    if qc + ring < self.cols as isize {
                        visit(qc + ring);
                    }
                }
            }

            if ring >= max_ring {
                break;
            }
            if cand.len() >= k {
                cand.select_nth_unstable_by(k - 1, by_rank);
                let kth = cand[k - 1].0;
                // Anything beyond this ring is at least ring * cell + 1 away.
                let reach = ring as u64 * self.cell as u64 + 1;
                if kth < reach * reach {
                    break;
                }
            }
            ring += 1;
        }

        if cand.len() > k {
            cand.select_nth_unstable_by(k - 1, by_rank);
            cand.truncate(k);
        }
        cand.sort_unstable();
        cand.iter().map(|&(_, j)| j).collect()
    }
}

/// Number of connected components and a canonical label per node; labels
/// are numbered in order of each component's smallest node index.
pub fn connected_components(graph: &SpatialGraph) -> (usize, Vec<usize>) {
    let n = graph.node_count();
    let mut uf = UnionFind::new(n);
    for e in &graph.edges {
        uf.union(e.i, e.j);
    }
    let mut root_label = vec![usize::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut next = 0;
    for v in 0..n as u32 {
        let root = uf.find(v) as usize;
        if root_label[root] == usize::MAX {
            root_label[root] = next;
            next += 1;
        }
        labels.push(root_label[root]);
    }
    (next, labels)
}

/// Writes `i,j,weight` rows with a header line.
pub fn write_edge_csv<W: Write>(edges: &[Edge], mut out: W) -> io::Result<()> {
    writeln!(out, "i,j,weight")?;
    for e in edges {
        writeln!(out, "{},{},{:?}", e.i, e.j, e.weight)?;
    }
    Ok(())
}
