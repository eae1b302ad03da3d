//! Finite metric measure spaces, ball queries and growth diagnostics.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative slack allowed in the triangle inequality and symmetry checks.
const METRIC_SLACK: f64 = 1e-12;

/// A finite metric measure space with cached, distance-sorted neighbour lists.
///
/// For each point `x` the other points are kept sorted by distance from `x`
/// together with running mass totals, so a ball query is a binary search.
#[derive(Debug, Clone)]
pub struct Space {
    name: String,
    n: usize,
    dist: Vec<f64>,
    mass: Vec<f64>,
    order: Vec<u32>,
    sorted: Vec<f64>,
    prefix: Vec<f64>,
}

/// Validate a dense distance matrix and mass vector and build a [`Space`].
pub fn build_space(dist: Vec<Vec<f64>>, mass: Vec<f64>) -> Result<Space> {
    let n = dist.len();
    for (row, r) in dist.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare { row, len: r.len(), n });
        }
    }
    let flat: Vec<f64> = dist.into_iter().flatten().collect();
    Space::from_flat(flat, mass, true)
}

impl Space {
    /// Build from a row-major `n × n` matrix. `check_triangle` may be switched
    /// off for metrics that hold by construction (shortest paths, norms).
    pub fn from_flat(dist: Vec<f64>, mass: Vec<f64>, check_triangle: bool) -> Result<Space> {
        let n = mass.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if dist.len() != n * n {
            return Err(Error::MassLength { got: n, expected: (dist.len() as f64).sqrt() as usize });
        }
        for (i, &m) in mass.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::NonpositiveMass(i));
            }
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::InvalidDistance(i, i));
            }
            for j in 0..n {
                let d = dist[i * n + j];
                if !(d >= 0.0 && d.is_finite()) || (i != j && d == 0.0) {
                    return Err(Error::InvalidDistance(i, j));
                }
            }
            for j in i + 1..n {
                let (a, b) = (dist[i * n + j], dist[j * n + i]);
                if (a - b).abs() > METRIC_SLACK * a.max(b).max(1.0) {
                    return Err(Error::AsymmetricDistance(i, j));
                }
            }
        }
        if check_triangle {
            for i in 0..n {
                let ri = &dist[i * n..(i + 1) * n];
                for j in 0..n {
                    let dij = ri[j];
                    let rj = &dist[j * n..(j + 1) * n];
                    for k in 0..n {
                        let dik = ri[k];
                        if dik > dij + rj[k] + METRIC_SLACK * dik.max(1.0) {
                            return Err(Error::TriangleInequalityViolation(i, j, k));
                        }
                    }
                }
            }
        }
        let mut order = vec![0u32; n * n];
        let mut sorted = vec![0.0; n * n];
        let mut prefix = vec![0.0; n * (n + 1)];
        let mut idx: Vec<u32> = (0..n as u32).collect();
        for x in 0..n {
            let row = &dist[x * n..(x + 1) * n];
            idx.sort_by(|&a, &b| {
                row[a as usize].total_cmp(&row[b as usize]).then(a.cmp(&b))
            });
            let mut acc = 0.0;
            prefix[x * (n + 1)] = 0.0;
            for (k, &y) in idx.iter().enumerate() {
                order[x * n + k] = y;
                sorted[x * n + k] = row[y as usize];
                acc += mass[y as usize];
                prefix[x * (n + 1) + k + 1] = acc;
            }
        }
        Ok(Space { name: String::new(), n, dist, mass, order, sorted, prefix })
    }

    /// Shortest-path metric of a weighted undirected graph.
    pub fn from_graph(n: usize, edges: &[(usize, usize, f64)], mass: Vec<f64>) -> Result<Space> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        if mass.len() != n {
            return Err(Error::MassLength { got: mass.len(), expected: n });
        }
        let mut adj = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n {
                return Err(Error::PointOutOfRange(i));
            }
            if j >= n {
                return Err(Error::PointOutOfRange(j));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidDistance(i, j));
            }
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        let mut dist = vec![f64::INFINITY; n * n];
        for s in 0..n {
            let row = &mut dist[s * n..(s + 1) * n];
            dijkstra(&adj, s, row);
            if let Some(y) = row.iter().position(|d| d.is_infinite()) {
                return Err(Error::DisconnectedGraph(if s == 0 { y } else { s }));
            }
        }
        Space::from_flat(dist, mass, false)
    }

    /// Points on the real line with the absolute-difference metric.
    pub fn from_line(coords: &[f64], mass: Vec<f64>) -> Result<Space> {
        let n = coords.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = (coords[i] - coords[j]).abs();
            }
        }
        Space::from_flat(dist, mass, false)
    }

    /// Points in the plane with the Euclidean metric.
    pub fn from_plane(coords: &[[f64; 2]], mass: Vec<f64>) -> Result<Space> {
        let n = coords.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (dx, dy) = (coords[i][0] - coords[j][0], coords[i][1] - coords[j][1]);
                dist[i * n + j] = dx.hypot(dy);
            }
        }
        Space::from_flat(dist, mass, false)
    }

    /// Path graph with `n` vertices, the given edge length and unit masses.
    /// Distances are `|i − j|·spacing`, so equal hop counts tie exactly.
    pub fn path(n: usize, spacing: f64) -> Result<Space> {
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = i.abs_diff(j) as f64 * spacing;
            }
        }
        Ok(Space::from_flat(dist, vec![1.0; n], false)?.named(format!("path{n}")))
    }

    /// `a × b` lattice with the L¹ (graph) metric and unit masses.
    pub fn grid(a: usize, b: usize) -> Result<Space> {
        let n = a * b;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (xi, yi) = ((i / b) as f64, (i % b) as f64);
                let (xj, yj) = ((j / b) as f64, (j % b) as f64);
                dist[i * n + j] = (xi - xj).abs() + (yi - yj).abs();
            }
        }
        Ok(Space::from_flat(dist, vec![1.0; n], false)?.named(format!("grid{a}x{b}")))
    }

    /// Complete binary tree of the given depth with unit edges and masses.
    pub fn binary_tree(depth: u32) -> Result<Space> {
        let n = (1usize << (depth + 1)) - 1;
        let edges: Vec<_> = (1..n).map(|i| ((i - 1) / 2, i, 1.0)).collect();
        Ok(Space::from_graph(n, &edges, vec![1.0; n])?.named(format!("tree{depth}")))
    }

    /// `n` points at mutual distance 1.
    pub fn clique(n: usize) -> Result<Space> {
        let mut dist = vec![1.0; n * n];
        for i in 0..n {
            dist[i * n + i] = 0.0;
        }
        Ok(Space::from_flat(dist, vec![1.0; n], false)?.named(format!("clique{n}")))
    }

    pub fn named(mut self, name: impl Into<String>) -> Space {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n + y]
    }

    pub fn dist_row(&self, x: usize) -> &[f64] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    #[inline]
    pub fn mass(&self, x: usize) -> f64 {
        self.mass[x]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.prefix[self.n]
    }

    /// Points sorted by distance from `x` (nearest first, `x` itself first).
    pub fn by_distance(&self, x: usize) -> (&[u32], &[f64]) {
        let s = x * self.n..(x + 1) * self.n;
        (&self.order[s.clone()], &self.sorted[s])
    }

    /// Number of points strictly closer to `x` than `r`.
    #[inline]
    pub fn ball_count(&self, x: usize, r: f64) -> usize {
        self.sorted[x * self.n..(x + 1) * self.n].partition_point(|&d| d < r)
    }

    /// Open ball `{y : ρ(x,y) < r}` in ascending index order.
    pub fn ball(&self, x: usize, r: f64) -> Vec<usize> {
        let k = self.ball_count(x, r);
        let mut v: Vec<usize> = self.order[x * self.n..x * self.n + k].iter().map(|&y| y as usize).collect();
        v.sort_unstable();
        v
    }

    /// Membership mask of the open ball.
    pub fn ball_mask(&self, x: usize, r: f64) -> Vec<bool> {
        let row = self.dist_row(x);
        row.iter().map(|&d| d < r).collect()
    }

    /// `V(x,r)`: mass of the open ball.
    #[inline]
    pub fn volume(&self, x: usize, r: f64) -> f64 {
        let k = self.ball_count(x, r);
        self.prefix[x * (self.n + 1) + k]
    }

    /// Mass of the closed ball `{ρ(x,·) ≤ r}`.
    pub fn closed_volume(&self, x: usize, r: f64) -> f64 {
        let k = self.sorted[x * self.n..(x + 1) * self.n].partition_point(|&d| d <= r);
        self.prefix[x * (self.n + 1) + k]
    }

    /// Distinct positive distances from `x`, ascending.
    pub fn distinct_distances(&self, x: usize) -> Vec<f64> {
        let (_, sorted) = self.by_distance(x);
        let mut out: Vec<f64> = Vec::new();
        for &d in sorted.iter().skip(1) {
            if out.last() != Some(&d) {
                out.push(d);
            }
        }
        out
    }

    /// `ρ(y, S^c)` for a membership mask `S`; `+∞` when the complement is empty.
    pub fn dist_to_complement(&self, y: usize, inside: &[bool]) -> f64 {
        let (order, sorted) = self.by_distance(y);
        for (k, &z) in order.iter().enumerate() {
            if !inside[z as usize] {
                return sorted[k];
            }
        }
        f64::INFINITY
    }

    /// `ρ(y, S)` for a membership mask `S`; `+∞` when `S` is empty.
    pub fn dist_to_set(&self, y: usize, set: &[bool]) -> f64 {
        let (order, sorted) = self.by_distance(y);
        for (k, &z) in order.iter().enumerate() {
            if set[z as usize] {
                return sorted[k];
            }
        }
        f64::INFINITY
    }

    pub fn diameter(&self) -> f64 {
        (0..self.n).map(|x| self.sorted[(x + 1) * self.n - 1]).fold(0.0, f64::max)
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], s: usize, out: &mut [f64]) {
    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    out[s] = 0.0;
    let mut heap = BinaryHeap::from([Item(0.0, s)]);
    while let Some(Item(d, v)) = heap.pop() {
        if d > out[v] {
            continue;
        }
        for &(u, w) in &adj[v] {
            let nd = d + w;
            if nd < out[u] {
                out[u] = nd;
                heap.push(Item(nd, u));
            }
        }
    }
}

// ---------------------------------------------------------------- JSON

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum SpaceDoc {
    Matrix {
        points: usize,
        dist: Vec<Vec<f64>>,
        mass: Vec<f64>,
        #[serde(default)]
        name: Option<String>,
    },
    Graph {
        graph: GraphDoc,
        mass: Vec<f64>,
        #[serde(default)]
        name: Option<String>,
    },
}

#[derive(Debug, Deserialize, Serialize)]
struct GraphDoc {
    edges: Vec<(usize, usize, f64)>,
}

impl Space {
    /// Parse either `{"points", "dist", "mass"}` or `{"graph": {"edges"}, "mass"}`.
    pub fn from_json(text: &str) -> Result<Space> {
        let doc: SpaceDoc = serde_json::from_str(text)?;
        match doc {
            SpaceDoc::Matrix { points, dist, mass, name } => {
                if dist.len() != points {
                    return Err(Error::NotSquare { row: dist.len(), len: dist.len(), n: points });
                }
                if mass.len() != points {
                    return Err(Error::MassLength { got: mass.len(), expected: points });
                }
                Ok(build_space(dist, mass)?.named(name.unwrap_or_default()))
            }
            SpaceDoc::Graph { graph, mass, name } => {
                let n = mass.len();
                Ok(Space::from_graph(n, &graph.edges, mass)?.named(name.unwrap_or_default()))
            }
        }
    }

    pub fn to_json(&self) -> String {
        let dist: Vec<Vec<f64>> = (0..self.n).map(|x| self.dist_row(x).to_vec()).collect();
        let doc = SpaceDoc::Matrix {
            points: self.n,
            dist,
            mass: self.mass.clone(),
            name: Some(self.name.clone()),
        };
        serde_json::to_string(&doc).expect("space serializes")
    }
}

// ---------------------------------------------------------------- growth

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScaleRow {
    pub b: f64,
    pub a_b: f64,
    pub kappa_b: f64,
}

/// Fitted constants of `V(x,αr) ≤ A α^κ e^{λ(α−1)r} V(x,r)`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Envelope {
    pub a: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub samples: usize,
}

/// Constants of the global condition `V(x,r+δ) ≤ A₀ V(x,r)` for `r ≥ b₀`,
/// and the exponential envelope they imply.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Dglo {
    pub a0: f64,
    pub b0: f64,
    pub delta: f64,
    /// `(log A₀)/δ`.
    pub lambda: f64,
    /// `A₀·A_{b₀}`, the envelope constant paired with `κ_{b₀}` and `lambda`.
    pub implied_a: f64,
    pub implied_kappa: f64,
    /// Whether the implied envelope holds at every sample used by the fit.
    pub implied_validates: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GrowthReport {
    pub space: String,
    pub scales: Vec<ScaleRow>,
    pub envelope: Envelope,
    pub dglo: Dglo,
}

/// Sampled triple `(x, r, α)` reduced to what the envelope inequality needs.
#[derive(Debug, Clone, Copy)]
pub struct GrowthSample {
    pub x: usize,
    pub r: f64,
    pub alpha: f64,
    /// `ln(V(x,αr)/V(x,r))`.
    pub log_ratio: f64,
}

const KAPPA_GRID: (f64, usize) = (0.5, 13);
const LAMBDA_GRID: (f64, usize) = (0.1, 51);
const MAX_CENTERS: usize = 64;
const MAX_RADII: usize = 48;

/// `A_b = max V(x,2r)/V(x,r)` over all `x` and `r ≤ b`.
///
/// The ratio is piecewise constant in `r` and left-continuous, with jumps only
/// where `r` or `2r` is a realized distance, so those points plus `b` suffice.
pub fn doubling_constant(s: &Space, b: f64) -> f64 {
    let mut best: f64 = 1.0;
    for x in 0..s.len() {
        let (_, sorted) = s.by_distance(x);
        let mut cands = vec![b];
        for &d in &sorted[1..] {
            if d <= b {
                cands.push(d);
            }
            if d / 2.0 <= b {
                cands.push(d / 2.0);
            }
        }
        for r in cands {
            best = best.max(s.volume(x, 2.0 * r) / s.volume(x, r));
        }
    }
    best
}

/// Centers used for sampling: all points for small spaces, an even spread otherwise.
fn sample_centers(s: &Space) -> Vec<usize> {
    let n = s.len();
    if n <= MAX_CENTERS {
        (0..n).collect()
    } else {
        (0..MAX_CENTERS).map(|i| i * n / MAX_CENTERS).collect()
    }
}

/// One radius per distinct ball around `x` (the distance where it closes) and
/// one inside each gap, thinned evenly to at most `MAX_RADII`.
fn sample_radii(s: &Space, x: usize) -> Vec<f64> {
    let d = s.distinct_distances(x);
    let mut r = Vec::with_capacity(2 * d.len() + 1);
    for (i, &di) in d.iter().enumerate() {
        r.push(di);
        let next = d.get(i + 1).copied().unwrap_or(di + 1.0);
        r.push(0.5 * (di + next));
    }
    if r.is_empty() {
        r.push(1.0);
    }
    if r.len() > MAX_RADII {
        let m = r.len();
        r = (0..MAX_RADII).map(|i| r[i * (m - 1) / (MAX_RADII - 1)]).collect();
        r.dedup();
    }
    r
}

/// The sampled `(x, r, α)` triples used by the envelope fit.
pub fn growth_samples(s: &Space) -> Vec<GrowthSample> {
    let mut out = Vec::new();
    for x in sample_centers(s) {
        let radii = sample_radii(s, x);
        for (i, &r) in radii.iter().enumerate() {
            let vr = s.volume(x, r);
            for &big in &radii[i..] {
                out.push(GrowthSample {
                    x,
                    r,
                    alpha: big / r,
                    log_ratio: (s.volume(x, big) / vr).ln(),
                });
            }
        }
    }
    out
}

/// Smallest `A` making the envelope hold at every sample for the given exponents.
pub fn envelope_constant(samples: &[GrowthSample], kappa: f64, lambda: f64) -> f64 {
    samples
        .iter()
        .map(|t| t.log_ratio - kappa * t.alpha.ln() - lambda * (t.alpha - 1.0) * t.r)
        .fold(0.0f64, f64::max)
        .exp()
}

fn fit_envelope(samples: &[GrowthSample]) -> Envelope {
    let mut best: Option<(f64, f64, f64)> = None;
    // λ outer, κ inner: the first grid point reaching the minimum wins ties.
    let mut table = Vec::with_capacity(KAPPA_GRID.1 * LAMBDA_GRID.1);
    for li in 0..LAMBDA_GRID.1 {
        let lambda = li as f64 * LAMBDA_GRID.0;
        for ki in 0..KAPPA_GRID.1 {
            let kappa = ki as f64 * KAPPA_GRID.0;
            table.push((envelope_constant(samples, kappa, lambda), kappa, lambda));
        }
    }
    let amin = table.iter().map(|t| t.0).fold(f64::INFINITY, f64::min);
    for &(a, kappa, lambda) in &table {
        if a <= amin * (1.0 + 1e-12) {
            best = Some((a, kappa, lambda));
            break;
        }
    }
    let (a, kappa, lambda) = best.unwrap_or((1.0, 0.0, 0.0));
    Envelope { a, kappa, lambda, samples: samples.len() }
}

/// `A₀ = max V(x,r+δ)/V(x,r)` over `r ≥ b₀`, swept at the ratio's jump points.
pub fn dglo_constant(s: &Space, b0: f64, delta: f64) -> f64 {
    let mut best: f64 = 1.0;
    for x in 0..s.len() {
        let (_, sorted) = s.by_distance(x);
        let mut cands = vec![b0];
        for &d in &sorted[1..] {
            if d >= b0 {
                cands.push(d);
            }
            if d - delta >= b0 {
                cands.push(d - delta);
            }
        }
        for r in cands {
            best = best.max(s.volume(x, r + delta) / s.volume(x, r));
        }
    }
    best
}

/// Growth constants at the requested scales plus the fitted global envelope.
pub fn fit_growth(s: &Space, scales: &[f64]) -> Result<GrowthReport> {
    fit_growth_with(s, scales, 1.0, 1.0)
}

pub fn fit_growth_with(s: &Space, scales: &[f64], b0: f64, delta: f64) -> Result<GrowthReport> {
    if s.is_empty() {
        return Err(Error::EmptySpace);
    }
    let mut rows = Vec::with_capacity(scales.len());
    for &b in scales {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidRadius(b));
        }
        let a_b = doubling_constant(s, b);
        rows.push(ScaleRow { b, a_b, kappa_b: a_b.log2() });
    }
    let samples = growth_samples(s);
    let envelope = fit_envelope(&samples);
    let a0 = dglo_constant(s, b0, delta);
    let a_b0 = doubling_constant(s, b0);
    let lambda = a0.ln() / delta;
    let implied_a = a0 * a_b0;
    let implied_kappa = a_b0.log2();
    let needed = envelope_constant(&samples, implied_kappa, lambda);
    Ok(GrowthReport {
        space: s.name().to_string(),
        scales: rows,
        envelope,
        dglo: Dglo {
            a0,
            b0,
            delta,
            lambda,
            implied_a,
            implied_kappa,
            implied_validates: needed <= implied_a * (1.0 + 1e-12),
        },
    })
}

// ---------------------------------------------------------------- homogeneity

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct Homogeneity {
    pub n_b: usize,
    /// False when some ball exceeded the exhaustive-search cap and only a
    /// greedy lower bound was available for it.
    pub exact: bool,
}

const EXACT_CAP: usize = 20;

/// Largest `r/2`-separated subset of a ball of radius `r ≤ b`, over all balls.
///
/// A ball `{ρ(x,·) ≤ d}` is realized for `r ∈ (d, d⁺]`; taking `r ↓ d` gives the
/// weakest separation requirement, pairwise distance `> d/2`. The ball of radius
/// exactly `b` is also examined with the requirement `≥ b/2`.
pub fn homogeneity_count(s: &Space, b: f64) -> Homogeneity {
    let mut best = 1;
    let mut exact = true;
    for x in 0..s.len() {
        let (order, sorted) = s.by_distance(x);
        let mut balls: Vec<(usize, f64, bool)> = Vec::new();
        let mut k = 1;
        while k < s.len() {
            let d = sorted[k];
            if d >= b {
                break;
            }
            let mut end = k;
            while end < s.len() && sorted[end] == d {
                end += 1;
            }
            balls.push((end, d / 2.0, true));
            k = end;
        }
        balls.push((s.ball_count(x, b), b / 2.0, false));
        for (size, thr, strict) in balls {
            let pts: Vec<usize> = order[..size].iter().map(|&y| y as usize).collect();
            let ok = |a: usize, c: usize| {
                let d = s.dist(a, c);
                if strict { d > thr } else { d >= thr }
            };
            let (count, ex) = max_separated(&pts, ok);
            best = best.max(count);
            exact &= ex;
        }
    }
    Homogeneity { n_b: best, exact }
}

/// Maximum subset with every pair `compatible`: exact up to `EXACT_CAP` points,
/// greedy farthest-point otherwise.
fn max_separated(pts: &[usize], compatible: impl Fn(usize, usize) -> bool) -> (usize, bool) {
    let m = pts.len();
    if m <= EXACT_CAP {
        let mut adj = vec![0u32; m];
        for i in 0..m {
            for j in 0..m {
                if i != j && compatible(pts[i], pts[j]) {
                    adj[i] |= 1 << j;
                }
            }
        }
        let all = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
        let mut best = 0;
        max_clique(&adj, 0, all, &mut best);
        (best, true)
    } else {
        let mut chosen = vec![pts[0]];
        let mut rest: Vec<usize> = pts[1..].to_vec();
        loop {
            rest.retain(|&p| chosen.iter().all(|&c| compatible(p, c)));
            if rest.is_empty() {
                break;
            }
            chosen.push(rest.remove(0));
        }
        (chosen.len(), false)
    }
}

fn max_clique(adj: &[u32], size: usize, cand: u32, best: &mut usize) {
    if cand == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + cand.count_ones() as usize <= *best {
        return;
    }
    let v = cand.trailing_zeros() as usize;
    max_clique(adj, size + 1, cand & adj[v], best);
    max_clique(adj, size, cand & !(1 << v), best);
}

/// Volume-by-radius table of one center, used by reports.
pub fn volume_profile(s: &Space, x: usize) -> Vec<(f64, f64)> {
    s.distinct_distances(x).into_iter().map(|d| (d, s.closed_volume(x, d))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p5() -> Space {
        Space::path(5, 1.0).unwrap()
    }

    #[test]
    fn single_point_volume_is_its_mass() {
        let s = build_space(vec![vec![0.0]], vec![7.0]).unwrap();
        for r in [1e-9, 0.5, 3.0, 1e9] {
            assert_eq!(s.volume(0, r), 7.0);
        }
    }

    #[test]
    fn path_distances_and_balls() {
        let s = p5();
        assert_eq!(s.dist(0, 4), 4.0);
        assert_eq!(s.ball(2, 1.5), vec![1, 2, 3]);
        assert_eq!(s.ball(2, 1.0), vec![2]);
        assert_eq!(s.ball(2, 1e12), vec![0, 1, 2, 3, 4]);
        assert_eq!(s.volume(2, 1.5), 3.0);
    }

    #[test]
    fn triangle_violation_detected() {
        let d = vec![vec![0.0, 1.0, 10.0], vec![1.0, 0.0, 1.0], vec![10.0, 1.0, 0.0]];
        let e = build_space(d, vec![1.0; 3]).unwrap_err();
        assert!(matches!(e, Error::TriangleInequalityViolation(..)));
    }

    #[test]
    fn asymmetric_and_mass_errors() {
        let d = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert_eq!(build_space(d, vec![1.0; 2]).unwrap_err(), Error::AsymmetricDistance(0, 1));
        let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(build_space(d, vec![1.0, 0.0]).unwrap_err(), Error::NonpositiveMass(1));
    }

    #[test]
    fn grid_ball_matches_count() {
        let s = Space::grid(11, 11).unwrap();
        let c = 5 * 11 + 5;
        let brute = (0..121)
            .filter(|&j| {
                let (x, y) = ((j / 11) as f64, (j % 11) as f64);
                (x - 5.0).abs() + (y - 5.0).abs() < 2.5
            })
            .count();
        assert_eq!(brute, 13);
        assert_eq!(s.volume(c, 2.5), 13.0);
    }

    #[test]
    fn graph_json_gives_shortest_paths() {
        let s = Space::from_json(
            r#"{"graph":{"edges":[[0,1,1.0],[1,2,1.0],[2,3,1.0],[3,4,1.0]]},"mass":[1,1,1,1,1]}"#,
        )
        .unwrap();
        assert_eq!(s.dist(0, 4), 4.0);
        let back = Space::from_json(&s.to_json()).unwrap();
        assert_eq!(back.dist(1, 3), 2.0);
    }

    #[test]
    fn matrix_json_checks_triangle() {
        let e = Space::from_json(r#"{"points":3,"dist":[[0,1,10],[1,0,1],[10,1,0]],"mass":[1,1,1]}"#)
            .unwrap_err();
        assert!(matches!(e, Error::TriangleInequalityViolation(..)));
    }

    #[test]
    fn single_point_growth_is_trivial() {
        let s = build_space(vec![vec![0.0]], vec![1.0]).unwrap();
        let g = fit_growth(&s, &[1.0, 2.0]).unwrap();
        for row in &g.scales {
            assert_eq!(row.a_b, 1.0);
            assert_eq!(row.kappa_b, 0.0);
        }
        assert_eq!(g.envelope.lambda, 0.0);
        assert_eq!(g.envelope.a, 1.0);
    }

    /// Exhaustive sweep of V(x,2r)/V(x,r) over a fine radius grid.
    fn brute_doubling(s: &Space, b: f64) -> f64 {
        let mut best: f64 = 1.0;
        for x in 0..s.len() {
            for i in 1..=4000 {
                let r = b * i as f64 / 4000.0;
                best = best.max(s.volume(x, 2.0 * r) / s.volume(x, r));
            }
        }
        best
    }

    #[test]
    fn segment_doubling_matches_sweep() {
        let s = Space::path(101, 1.0).unwrap();
        let g = fit_growth(&s, &[1.0]).unwrap();
        assert_eq!(g.scales[0].a_b, brute_doubling(&s, 1.0));
        assert_eq!(g.scales[0].kappa_b, g.scales[0].a_b.log2());
        // r = 1: V(x,2) = 3, V(x,1) = 1 in the interior.
        assert_eq!(g.scales[0].a_b, 3.0);
    }

    #[test]
    fn binary_tree_needs_exponential_rate() {
        let s = Space::binary_tree(9).unwrap();
        let g = fit_growth(&s, &[1.0]).unwrap();
        assert!(g.envelope.lambda > 0.0, "{:?}", g.envelope);
    }

    #[test]
    fn dglo_implies_envelope_on_tree_and_grid() {
        for s in [Space::binary_tree(6).unwrap(), Space::grid(9, 9).unwrap(), Space::path(40, 0.3).unwrap()] {
            let g = fit_growth(&s, &[1.0]).unwrap();
            assert!(g.dglo.implied_validates, "{}: {:?}", s.name(), g.dglo);
        }
    }

    /// Brute-force maximum separated subset by enumerating all subsets.
    fn brute_homogeneity(s: &Space, b: f64) -> usize {
        let mut best = 1;
        let n = s.len();
        for x in 0..n {
            let mut radii: Vec<f64> = (0..n).map(|y| s.dist(x, y) * (1.0 + 1e-12) + 1e-12).filter(|&r| r < b).collect();
            radii.push(b);
            for r in radii {
                let ball = s.ball(x, r);
                let m = ball.len();
                for mask in 0u32..(1 << m) {
                    let pts: Vec<usize> = (0..m).filter(|&j| mask >> j & 1 == 1).map(|j| ball[j]).collect();
                    let ok = pts.iter().enumerate().all(|(a, &p)| pts[a + 1..].iter().all(|&q| s.dist(p, q) >= r / 2.0));
                    if ok {
                        best = best.max(pts.len());
                    }
                }
            }
        }
        best
    }

    #[test]
    fn homogeneity_examples() {
        let one = build_space(vec![vec![0.0]], vec![1.0]).unwrap();
        assert_eq!(homogeneity_count(&one, 1.0).n_b, 1);
        let p5 = p5();
        let h = homogeneity_count(&p5, 2.0);
        assert!(h.exact);
        assert_eq!(h.n_b, brute_homogeneity(&p5, 2.0));
        assert_eq!(homogeneity_count(&Space::clique(6).unwrap(), 2.0).n_b, 6);
    }

    #[test]
    fn homogeneity_on_plane_matches_brute_force() {
        let pts: Vec<[f64; 2]> = (0..9).map(|i| [(i % 3) as f64 * 0.7, (i / 3) as f64 * 0.45 + 0.1 * i as f64]).collect();
        let s = Space::from_plane(&pts, vec![1.0; 9]).unwrap();
        for b in [0.5, 1.0, 2.0] {
            assert_eq!(homogeneity_count(&s, b).n_b, brute_homogeneity(&s, b), "b = {b}");
        }
    }

    #[test]
    fn large_balls_fall_back_to_greedy() {
        let s = Space::path(60, 0.1).unwrap();
        let h = homogeneity_count(&s, 3.0);
        assert!(!h.exact);
        assert!(h.n_b >= 3);
    }
}
