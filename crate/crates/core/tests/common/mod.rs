//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's graph, tree or hull code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use mstc_core::{AttributionMap, Pixel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` distinct lattice points in `[0, side)^2`.
pub fn random_points(rng: &mut ChaCha8Rng, n: usize, side: u32) -> Vec<Pixel> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Pixel::new(rng.gen_range(0..side), rng.gen_range(0..side));
        if seen.insert(p) {
            out.push(p);
        }
    }
    out.shuffle(rng);
    out
}

fn d2(a: Pixel, b: Pixel) -> i64 {
    let (dr, dc) = (a.row as i64 - b.row as i64, a.col as i64 - b.col as i64);
    dr * dr + dc * dc
}

fn dist(a: Pixel, b: Pixel) -> f64 {
    (d2(a, b) as f64).sqrt()
}

/// All-pairs kNN: each node links to its `k` nearest others by
/// `(squared distance, index)`, then the union is taken.
pub fn brute_knn_edges(points: &[Pixel], k: usize) -> Vec<(u32, u32, f64)> {
    let n = points.len();
    let mut set = BTreeSet::new();
    for i in 0..n {
        let mut others: Vec<(i64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (d2(points[i], points[j]), j))
            .collect();
        let k = k.min(others.len());
        if k == 0 {
            continue;
        }
        others.select_nth_unstable(k - 1);
        for &(_, j) in &others[..k] {
            set.insert((i.min(j) as u32, i.max(j) as u32));
        }
    }
    set.into_iter()
        .map(|(i, j)| (i, j, dist(points[i as usize], points[j as usize])))
        .collect()
}

/// Dense Prim on the complete graph. Returns the tree weights.
pub fn prim_weights(points: &[Pixel]) -> Vec<f64> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![i64::MAX; n];
    best[0] = 0;
    let mut weights = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by_key(|&v| best[v])
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            weights.push((best[u] as f64).sqrt());
        }
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(d2(points[u], points[v]));
            }
        }
    }
    weights
}

/// Sum in ascending order, matching the library's accumulation order so
/// complete-graph comparisons can be exact.
pub fn sorted_sum(mut w: Vec<f64>) -> f64 {
    w.sort_by(f64::total_cmp);
    w.iter().sum()
}

/// Kruskal with a plain parent-array forest over an explicit edge list.
pub fn kruskal_weights(n: usize, edges: &[(u32, u32, f64)]) -> Option<Vec<f64>> {
    let mut sorted = edges.to_vec();
    sorted.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    }
    let mut out = Vec::new();
    for (i, j, w) in sorted {
        let (a, b) = (root(&mut parent, i as usize), root(&mut parent, j as usize));
        if a != b {
            parent[a] = b;
            out.push(w);
        }
    }
    (out.len() + 1 == n).then_some(out)
}

/// Minimum spanning tree length by enumerating every labelled tree on the
/// points (Prüfer sequences, `n^(n-2)` of them).
pub fn exhaustive_mst_length(points: &[Pixel]) -> f64 {
    let n = points.len();
    assert!((2..=8).contains(&n));
    if n == 2 {
        return dist(points[0], points[1]);
    }
    let m = n - 2;
    let total = n.pow(m as u32);
    let mut best = f64::INFINITY;
    let mut seq = vec![0usize; m];
    for code in 0..total {
        let mut c = code;
        for s in seq.iter_mut() {
            *s = c % n;
            c /= n;
        }
        let mut degree = vec![1usize; n];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut len = 0.0;
        for &s in &seq {
            let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
            len += dist(points[leaf], points[s]);
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
        len += dist(points[rest[0]], points[rest[1]]);
        best = best.min(len);
    }
    best
}

/// Jarvis march. Returns hull vertices (strict corners only).
pub fn gift_wrap(points: &[Pixel]) -> Vec<Pixel> {
    let pts: Vec<Pixel> = points
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Pixel, a: Pixel, b: Pixel| {
        (a.row as i64 - o.row as i64) * (b.col as i64 - o.col as i64)
            - (a.col as i64 - o.col as i64) * (b.row as i64 - o.row as i64)
    };
    let start = pts[0];
    let mut hull = vec![start];
    let mut current = start;
    loop {
        let mut next = if pts[0] == current { pts[1] } else { pts[0] };
        for &p in &pts {
            if p == current {
                continue;
            }
            let c = cross(current, next, p);
            // keep the most clockwise candidate, farthest on ties
            if c < 0 || (c == 0 && d2(current, p) > d2(current, next)) {
                next = p;
            }
        }
        if next == start {
            break;
        }
        hull.push(next);
        current = next;
        if hull.len() > pts.len() {
            panic!("gift wrapping did not close");
        }
    }
    hull
}

/// Area by fan triangulation from the first vertex, summing absolute
/// triangle areas in floating point.
pub fn fan_area(ring: &[Pixel]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    let o = ring[0];
    ring.windows(2)
        .skip(1)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let ar = a.row as f64 - o.row as f64;
            let ac = a.col as f64 - o.col as f64;
            let br = b.row as f64 - o.row as f64;
            let bc = b.col as f64 - o.col as f64;
            (ar * bc - ac * br).abs() / 2.0
        })
        .sum()
}

/// Everything a straight-line reimplementation of the scoring pipeline
/// produces.
#[derive(Debug)]
pub struct Reference {
    pub n_nodes: usize,
    pub mst_length: f64,
    pub hull_area: f64,
    pub mstc_scaled: f64,
}

/// Scores a map with brute-force selection, kNN, Kruskal and gift wrapping,
/// scale constant `100 * sqrt(h^2 + w^2)`.
pub fn reference_mstc(map: &AttributionMap, percentile: f64, k: usize) -> Reference {
    let (h, w) = (map.height(), map.width());
    let total = h * w;
    let keep = (((100.0 - percentile) * total as f64 / 100.0).round() as usize).clamp(1, total);
    let mut order: Vec<usize> = (0..total).collect();
    let abs: Vec<f64> = map.values().iter().map(|v| v.abs()).collect();
    order.sort_by(|&a, &b| abs[b].total_cmp(&abs[a]).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = order[..keep].to_vec();
    chosen.sort_unstable();
    let points: Vec<Pixel> = chosen
        .iter()
        .map(|&i| Pixel::new((i / w) as u32, (i % w) as u32))
        .collect();
    let n = points.len();

    let edges = brute_knn_edges(&points, k);
    let weights = kruskal_weights(n, &edges).expect("reference graph disconnected");
    let mst_length = sorted_sum(weights);
    let ring = gift_wrap(&points);
    let hull_area = fan_area(&ring);
    let diag = ((h * h + w * w) as f64).sqrt();
    let spread = if ring.len() >= 3 && hull_area > 0.0 {
        1.0 / hull_area.sqrt()
    } else {
        1.0 / diag
    };
    Reference {
        n_nodes: n,
        mst_length,
        hull_area,
        mstc_scaled: spread * (n as f64 / mst_length) * 100.0 * diag,
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
