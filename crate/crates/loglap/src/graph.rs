//! Finite weighted graphs: construction, validation, metric and volume
//! queries, and the formal Laplacian
//! `Δu(x) = (1/μ(x)) Σ_y w_{xy} (u(y) - u(x))`.
//!
//! Vertex ids are dense integers `0..n`. Adjacency is stored as sorted
//! neighbor lists so every sum has a reproducible order. A graph value is
//! immutable after construction; all operations here are pure.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex id {0} out of range (n = {1})")]
    InvalidVertex(usize, usize),
    #[error("edge ({0}, {1}) has non-positive or non-finite weight {2}")]
    BadWeight(usize, usize, f64),
    #[error("vertex {0} has non-positive or non-finite measure {1}")]
    BadMeasure(usize, f64),
    #[error("asymmetric weights for edge ({0}, {1}): {2} vs {3}")]
    AsymmetricWeights(usize, usize, f64, f64),
    #[error("edge ({0}, {1}) listed more than once with the same orientation")]
    DuplicateEdge(usize, usize),
    #[error("measure vector has length {0}, expected {1}")]
    MeasureLength(usize, usize),
    #[error("graph file, line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph has no vertices")]
    Empty,
}

/// Which vertex measure the Laplacian is normalized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// μ ≡ 1 (standard graph Laplacian).
    Standard,
    /// μ(x) = m(x) (normalized Laplacian; spectrum inside [0, 2]).
    Normalized,
    /// Arbitrary positive μ supplied by the caller.
    Custom,
}

/// How to assign the vertex measure at construction time.
#[derive(Debug, Clone)]
pub enum Measure {
    Uniform,
    Degree,
    Custom(Vec<f64>),
}

/// A finite weighted graph `(V, E, μ, w)` with symmetric positive weights.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    /// Sorted `(neighbor, weight)` lists; loops appear as `(x, w_xx)`.
    neighbors: Vec<Vec<(usize, f64)>>,
    measure: Vec<f64>,
    kind: LaplacianKind,
}

/// Exact diagnostics computed by [`WeightedGraph::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDiagnostics {
    pub connected: bool,
    pub mu_min: f64,
    pub mu_max: f64,
    /// Minimum edge weight (including loops); `inf` on an edgeless graph.
    pub w_min: f64,
    /// Largest α with `w_{xy} >= α m(x)` on all adjacent pairs, present only
    /// when every vertex carries a loop (the Δ(α) condition).
    pub delta_alpha: Option<f64>,
    pub locally_finite: bool,
}

impl WeightedGraph {
    /// Builds a graph from an edge list. Each undirected edge may be listed
    /// once or in both orientations; when both are present the weights must
    /// agree exactly. Loops `(x, x, w)` are permitted.
    pub fn build(
        n: usize,
        edges: &[(usize, usize, f64)],
        measure: Measure,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            if u >= n {
                return Err(GraphError::InvalidVertex(u, n));
            }
            if v >= n {
                return Err(GraphError::InvalidVertex(v, n));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(GraphError::BadWeight(u, v, w));
            }
            if seen[u].iter().any(|&(y, _)| y == v) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            seen[u].push((v, w));
        }
        // Symmetrize: a (v, u) listing must match (u, v); a single listing
        // implies its mirror.
        let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for u in 0..n {
            for &(v, w) in &seen[u] {
                if let Some(&(_, w2)) = seen[v].iter().find(|&&(y, _)| y == u) {
                    if w2 != w {
                        return Err(GraphError::AsymmetricWeights(u, v, w, w2));
                    }
                }
                neighbors[u].push((v, w));
                if u != v && !seen[v].iter().any(|&(y, _)| y == u) {
                    neighbors[v].push((u, w));
                }
            }
        }
        for list in &mut neighbors {
            list.sort_by_key(|&(y, _)| y);
        }

        let degrees: Vec<f64> = (0..n)
            .map(|x| neighbors[x].iter().map(|&(_, w)| w).sum())
            .collect();
        let (measure, kind) = match measure {
            Measure::Uniform => (vec![1.0; n], LaplacianKind::Standard),
            Measure::Degree => (degrees.clone(), LaplacianKind::Normalized),
            Measure::Custom(m) => {
                if m.len() != n {
                    return Err(GraphError::MeasureLength(m.len(), n));
                }
                (m, LaplacianKind::Custom)
            }
        };
        for (x, &mu) in measure.iter().enumerate() {
            if !(mu > 0.0) || !mu.is_finite() {
                return Err(GraphError::BadMeasure(x, mu));
            }
        }
        Ok(WeightedGraph {
            n,
            neighbors,
            measure,
            kind,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn measure(&self, x: usize) -> f64 {
        self.measure[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.neighbors[x]
    }

    fn check_vertex(&self, x: usize) -> Result<(), GraphError> {
        if x >= self.n {
            Err(GraphError::InvalidVertex(x, self.n))
        } else {
            Ok(())
        }
    }

    /// Vertex degree `m(x) = Σ_{y ~ x} w_{xy}` (a loop weight counts once).
    pub fn degree(&self, x: usize) -> Result<f64, GraphError> {
        self.check_vertex(x)?;
        Ok(self.neighbors[x].iter().map(|&(_, w)| w).sum())
    }

    /// Hop-count distance; `None` across components. Loops are not steps.
    pub fn graph_distance(&self, x: usize, y: usize) -> Result<Option<u64>, GraphError> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        if x == y {
            return Ok(Some(0));
        }
        let mut dist = vec![u64::MAX; self.n];
        dist[x] = 0;
        let mut frontier = vec![x];
        let mut d = 0u64;
        while !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for &v in &frontier {
                for &(z, _) in &self.neighbors[v] {
                    if z != v && dist[z] == u64::MAX {
                        if z == y {
                            return Ok(Some(d));
                        }
                        dist[z] = d;
                        next.push(z);
                    }
                }
            }
            frontier = next;
        }
        Ok(None)
    }

    /// Volume `V(x, r) = Σ_{d(x,y) <= r} μ(y)` of the closed ball.
    pub fn ball_volume(&self, x: usize, r: u64) -> Result<f64, GraphError> {
        self.check_vertex(x)?;
        let mut dist = vec![u64::MAX; self.n];
        dist[x] = 0;
        let mut frontier = vec![x];
        let mut volume = self.measure[x];
        let mut d = 0u64;
        while !frontier.is_empty() && d < r {
            d += 1;
            let mut next = Vec::new();
            for &v in &frontier {
                for &(z, _) in &self.neighbors[v] {
                    if z != v && dist[z] == u64::MAX {
                        dist[z] = d;
                        volume += self.measure[z];
                        next.push(z);
                    }
                }
            }
            frontier = next;
        }
        Ok(volume)
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut stack = vec![0usize];
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(z, _) in &self.neighbors[v] {
                if !seen[z] {
                    seen[z] = true;
                    count += 1;
                    stack.push(z);
                }
            }
        }
        count == self.n
    }

    /// The formal Laplacian `Δu(x) = (1/μ(x)) Σ_y w_{xy} (u(y) - u(x))`.
    pub fn laplacian_apply(&self, u: &[f64]) -> Result<Vec<f64>, GraphError> {
        if u.len() != self.n {
            return Err(GraphError::MeasureLength(u.len(), self.n));
        }
        let mut out = vec![0.0; self.n];
        for x in 0..self.n {
            let mut acc = 0.0;
            for &(y, w) in &self.neighbors[x] {
                acc += w * (u[y] - u[x]);
            }
            out[x] = acc / self.measure[x];
        }
        Ok(out)
    }

    /// Exact structural diagnostics, including the Δ(α) constant when every
    /// vertex has a loop.
    pub fn validate(&self) -> GraphDiagnostics {
        let mu_min = self.measure.iter().cloned().fold(f64::INFINITY, f64::min);
        let mu_max = self.measure.iter().cloned().fold(0.0, f64::max);
        let w_min = self
            .neighbors
            .iter()
            .flatten()
            .map(|&(_, w)| w)
            .fold(f64::INFINITY, f64::min);
        let all_loops = (0..self.n).all(|x| self.neighbors[x].iter().any(|&(y, _)| y == x));
        let delta_alpha = if all_loops {
            let mut alpha = f64::INFINITY;
            for x in 0..self.n {
                let m: f64 = self.neighbors[x].iter().map(|&(_, w)| w).sum();
                for &(_, w) in &self.neighbors[x] {
                    alpha = alpha.min(w / m);
                }
            }
            Some(alpha)
        } else {
            None
        };
        GraphDiagnostics {
            connected: self.is_connected(),
            mu_min,
            mu_max,
            w_min,
            delta_alpha,
            locally_finite: true,
        }
    }
}

/// Path graph `P_n` with unit weights and μ ≡ 1.
pub fn path_graph(n: usize) -> WeightedGraph {
    let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0)).collect();
    WeightedGraph::build(n, &edges, Measure::Uniform).expect("valid path")
}

/// Cycle graph `C_n` with unit weights and μ ≡ 1.
pub fn cycle_graph(n: usize) -> WeightedGraph {
    let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    if n > 2 {
        edges.push((n - 1, 0, 1.0));
    }
    WeightedGraph::build(n, &edges, Measure::Uniform).expect("valid cycle")
}

/// Star `K_{1,leaves}` with the center at vertex 0.
pub fn star_graph(leaves: usize) -> WeightedGraph {
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i, 1.0)).collect();
    WeightedGraph::build(leaves + 1, &edges, Measure::Uniform).expect("valid star")
}

/// Seeded random connected graph: a random spanning tree plus `~n/2` extra
/// edges, weights in `[0.5, 2)`, vertex measure in `[0.5, 2)`. Identical
/// seeds produce identical graphs on every platform.
pub fn random_connected_graph(n: usize, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        edges.push((parent, v, 0.5 + 1.5 * rng.gen::<f64>()));
    }
    for _ in 0..n / 2 {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v || edges.iter().any(|&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u)) {
            continue;
        }
        edges.push((u, v, 0.5 + 1.5 * rng.gen::<f64>()));
    }
    let measure: Vec<f64> = (0..n).map(|_| 0.5 + 1.5 * rng.gen::<f64>()).collect();
    WeightedGraph::build(n, &edges, Measure::Custom(measure)).expect("valid random graph")
}

/// Parses the line-oriented graph format:
/// `n <count>`, then `mu <x> <value>` lines, then `edge <x> <y> <w>` lines.
/// Vertices without an explicit `mu` line get μ = 1. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_graph_text(text: &str) -> Result<WeightedGraph, GraphError> {
    let mut n: Option<usize> = None;
    let mut mu: Vec<f64> = Vec::new();
    let mut custom_mu = false;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let parse_usize = |s: &str| {
            s.parse::<usize>().map_err(|_| GraphError::Parse {
                line,
                message: format!("expected an integer, got `{s}`"),
            })
        };
        let parse_f64 = |s: &str| {
            s.parse::<f64>().map_err(|_| GraphError::Parse {
                line,
                message: format!("expected a number, got `{s}`"),
            })
        };
        match fields[0] {
            "n" => {
                if fields.len() != 2 {
                    return Err(GraphError::Parse {
                        line,
                        message: "usage: n <count>".into(),
                    });
                }
                let count = parse_usize(fields[1])?;
                n = Some(count);
                mu = vec![1.0; count];
            }
            "mu" => {
                if fields.len() != 3 || n.is_none() {
                    return Err(GraphError::Parse {
                        line,
                        message: "usage: mu <x> <value> (after the n header)".into(),
                    });
                }
                let x = parse_usize(fields[1])?;
                let v = parse_f64(fields[2])?;
                if x >= mu.len() {
                    return Err(GraphError::Parse {
                        line,
                        message: format!("vertex {x} out of range"),
                    });
                }
                mu[x] = v;
                custom_mu = true;
            }
            "edge" => {
                if fields.len() != 4 || n.is_none() {
                    return Err(GraphError::Parse {
                        line,
                        message: "usage: edge <x> <y> <w> (after the n header)".into(),
                    });
                }
                edges.push((
                    parse_usize(fields[1])?,
                    parse_usize(fields[2])?,
                    parse_f64(fields[3])?,
                ));
            }
            other => {
                return Err(GraphError::Parse {
                    line,
                    message: format!("unknown directive `{other}`"),
                });
            }
        }
    }
    let n = n.ok_or(GraphError::Parse {
        line: 0,
        message: "missing `n <count>` header".into(),
    })?;
    let measure = if custom_mu {
        Measure::Custom(mu)
    } else {
        Measure::Uniform
    };
    WeightedGraph::build(n, &edges, measure)
}

/// Number of lattice points of `Z^d` at ℓ¹ distance exactly `k` from the
/// origin: `Σ_i 2^i C(d, i) C(k-1, i-1)` over the count `i` of nonzero
/// coordinates.
pub fn shell_count(d: u32, k: u64) -> u64 {
    if k == 0 {
        return 1;
    }
    let mut total: u128 = 0;
    for i in 1..=(d as u64).min(k) {
        total += (1u128 << i) * binomial(d as u64, i) * binomial(k - 1, i - 1);
    }
    total as u64
}

/// Volume of the closed ℓ¹ ball of radius `r` in `Z^d` with μ ≡ 1.
pub fn lattice_ball_volume(d: u32, r: u64) -> u64 {
    (0..=r).map(|k| shell_count(d, k)).sum()
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_two_vertex_path() {
        let g = path_graph(2);
        let d = g.validate();
        assert!(d.connected);
        assert_eq!(d.mu_min, 1.0);
        assert_eq!(d.w_min, 1.0);
        assert!(d.delta_alpha.is_none());
    }

    #[test]
    fn validate_with_loops_gives_delta_alpha() {
        let g = WeightedGraph::build(
            2,
            &[(0, 1, 1.0), (0, 0, 1.0), (1, 1, 1.0)],
            Measure::Uniform,
        )
        .unwrap();
        let d = g.validate();
        assert_eq!(d.delta_alpha, Some(0.5)); // m(x) = 2, min w/m = 1/2
    }

    #[test]
    fn asymmetric_weights_rejected() {
        let err = WeightedGraph::build(2, &[(0, 1, 1.0), (1, 0, 2.0)], Measure::Uniform);
        assert!(matches!(err, Err(GraphError::AsymmetricWeights(..))));
        // symmetric double listing is fine
        let ok = WeightedGraph::build(2, &[(0, 1, 1.0), (1, 0, 1.0)], Measure::Uniform);
        assert!(ok.is_ok());
    }

    #[test]
    fn nonpositive_inputs_rejected() {
        assert!(matches!(
            WeightedGraph::build(2, &[(0, 1, -1.0)], Measure::Uniform),
            Err(GraphError::BadWeight(..))
        ));
        assert!(matches!(
            WeightedGraph::build(2, &[(0, 1, 1.0)], Measure::Custom(vec![1.0, 0.0])),
            Err(GraphError::BadMeasure(..))
        ));
    }

    #[test]
    fn degrees() {
        assert_eq!(path_graph(2).degree(0).unwrap(), 1.0);
        let c4 = cycle_graph(4);
        for x in 0..4 {
            assert_eq!(c4.degree(x).unwrap(), 2.0);
        }
        assert_eq!(star_graph(3).degree(0).unwrap(), 3.0);
    }

    #[test]
    fn distances() {
        let p2 = path_graph(2);
        assert_eq!(p2.graph_distance(0, 0).unwrap(), Some(0));
        assert_eq!(p2.graph_distance(0, 1).unwrap(), Some(1));
        // two disjoint edges
        let g = WeightedGraph::build(4, &[(0, 1, 1.0), (2, 3, 1.0)], Measure::Uniform).unwrap();
        assert_eq!(g.graph_distance(0, 3).unwrap(), None);
        assert!(!g.is_connected());
    }

    #[test]
    fn ball_volumes_on_cycle() {
        let c4 = cycle_graph(4);
        assert_eq!(c4.ball_volume(0, 0).unwrap(), 1.0);
        assert_eq!(c4.ball_volume(0, 1).unwrap(), 3.0);
        assert_eq!(c4.ball_volume(0, 2).unwrap(), 4.0);
    }

    #[test]
    fn laplacian_closed_forms() {
        let p2 = path_graph(2);
        assert_eq!(p2.laplacian_apply(&[1.0, 0.0]).unwrap(), vec![-1.0, 1.0]);
        let c4 = cycle_graph(4);
        assert_eq!(
            c4.laplacian_apply(&[1.0, 0.0, 0.0, 0.0]).unwrap(),
            vec![-2.0, 1.0, 0.0, 1.0]
        );
        // constants are harmonic
        let g = random_connected_graph(17, 3);
        let out = g.laplacian_apply(&[2.5; 17]).unwrap();
        assert!(out.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn summation_by_parts_on_random_graphs() {
        // Σ_x μ(x) Δu(x) = 0
        for seed in 0..20 {
            let g = random_connected_graph(5 + (seed as usize * 7) % 46, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            let u: Vec<f64> = (0..g.n_vertices()).map(|_| rng.gen::<f64>() - 0.5).collect();
            let du = g.laplacian_apply(&u).unwrap();
            let total: f64 = (0..g.n_vertices()).map(|x| g.measure(x) * du[x]).sum();
            assert!(total.abs() < 1e-12, "seed {seed}: {total}");
        }
    }

    #[test]
    fn shell_counts() {
        assert_eq!(shell_count(1, 3), 2);
        assert_eq!(shell_count(3, 0), 1);
        // brute-force oracle for d = 2, k = 2
        let mut brute = 0;
        for x in -2i64..=2 {
            for y in -2i64..=2 {
                if x.abs() + y.abs() == 2 {
                    brute += 1;
                }
            }
        }
        assert_eq!(brute, 8);
        assert_eq!(shell_count(2, 2), 8);
        // full brute-force sweep for d <= 3, k <= 6
        for d in 1u32..=3 {
            for k in 0u64..=6 {
                let mut count = 0u64;
                let r = k as i64;
                for x in -r..=r {
                    for y in -r..=r {
                        for z in -r..=r {
                            let dist = match d {
                                1 => {
                                    if y != 0 || z != 0 {
                                        continue;
                                    }
                                    x.abs()
                                }
                                2 => {
                                    if z != 0 {
                                        continue;
                                    }
                                    x.abs() + y.abs()
                                }
                                _ => x.abs() + y.abs() + z.abs(),
                            };
                            if dist == r {
                                count += 1;
                            }
                        }
                    }
                }
                assert_eq!(shell_count(d, k), count, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn shell_growth_bound() {
        // shell_count(d, k) <= C k^{d-1} with a stable fitted C.
        for d in 1u32..=3 {
            let c = (1..=40)
                .map(|k| shell_count(d, k) as f64 / (k as f64).powi(d as i32 - 1))
                .fold(0.0, f64::max);
            for k in 41..=100u64 {
                assert!(
                    (shell_count(d, k) as f64) <= c * (k as f64).powi(d as i32 - 1) + 1e-9,
                    "d={d} k={k}"
                );
            }
        }
    }

    #[test]
    fn lattice_ball_volume_matches_shells() {
        assert_eq!(lattice_ball_volume(1, 4), 9);
        assert_eq!(lattice_ball_volume(2, 1), 5);
        assert_eq!(lattice_ball_volume(2, 2), 13);
    }

    #[test]
    fn triangle_inequality_small_graphs() {
        for seed in 0..6 {
            let g = random_connected_graph(4 + seed as usize, 100 + seed);
            let n = g.n_vertices();
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let (xy, xz, zy) = (
                            g.graph_distance(x, y).unwrap().unwrap(),
                            g.graph_distance(x, z).unwrap().unwrap(),
                            g.graph_distance(z, y).unwrap().unwrap(),
                        );
                        assert!(xy <= xz + zy);
                    }
                }
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        let text = "# toy graph\nn 3\nmu 0 2.0\nedge 0 1 1.5\nedge 1 2 0.5\n";
        let g = parse_graph_text(text).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.measure(0), 2.0);
        assert_eq!(g.degree(1).unwrap(), 2.0);
        let err = parse_graph_text("n 2\nedge 0 5 1.0\n");
        assert!(err.is_err());
        let err = parse_graph_text("edge 0 1 1.0\n");
        assert!(matches!(err, Err(GraphError::Parse { .. })));
    }
}
