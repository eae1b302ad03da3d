//! Weighted simplicial complexes of dimension at most two, discrete forms, and
//! the Hodge–Dirac operator `D = d + d*`.

use std::collections::{HashMap, VecDeque};

use nalgebra::{ComplexField, DMatrix};
use serde::{Deserialize, Serialize};

use crate::space::Space;
use crate::{Error, Result, C64};

/// A coefficient vector over all simplices (vertices, then edges, then triangles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormField {
    pub coeffs: Vec<C64>,
}

impl FormField {
    pub fn new(coeffs: Vec<C64>) -> FormField {
        FormField { coeffs }
    }

    pub fn zeros(n: usize) -> FormField {
        FormField { coeffs: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn from_real(v: &[f64]) -> FormField {
        FormField { coeffs: v.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(Σ w_σ |u_σ|²)^{1/2}`.
    pub fn norm(&self, w: &[f64]) -> f64 {
        self.coeffs.iter().zip(w).map(|(u, w)| u.norm_sqr() * w).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &FormField, w: &[f64]) -> C64 {
        self.coeffs.iter().zip(&other.coeffs).zip(w).map(|((a, b), w)| a * b.conj() * *w).sum()
    }

    pub fn scale(&self, c: C64) -> FormField {
        FormField { coeffs: self.coeffs.iter().map(|v| v * c).collect() }
    }

    pub fn sub(&self, other: &FormField) -> FormField {
        FormField { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn add(&self, other: &FormField) -> FormField {
        FormField { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn conj(&self) -> FormField {
        FormField { coeffs: self.coeffs.iter().map(|v| v.conj()).collect() }
    }

    /// Restriction to a simplex set.
    pub fn restrict(&self, keep: &[bool]) -> FormField {
        FormField {
            coeffs: self.coeffs.iter().zip(keep).map(|(v, &k)| if k { *v } else { C64::new(0.0, 0.0) }).collect(),
        }
    }
}

/// Ingestion document for a complex.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexDescription {
    pub vertices: usize,
    #[serde(default)]
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub triangles: Vec<[usize; 3]>,
    #[serde(default)]
    pub weights: WeightSpec,
    /// Optional explicit triangle boundaries as `(edge index, ±1)` triples;
    /// derived from vertex order when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<[(usize, i8); 3]>>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
}

/// Per-degree weights; missing degrees default to 1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangles: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct WeightedComplex {
    name: String,
    nv: usize,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    boundaries: Vec<[(usize, i8); 3]>,
    weights: Vec<f64>,
    /// Hop distance between vertices along edges (`∞` across components).
    vdist: Vec<f64>,
}

/// Operators are dense, so complexes are capped at this many simplices.
pub const MAX_SIMPLICES: usize = 4096;

pub fn build_complex(desc: &ComplexDescription) -> Result<WeightedComplex> {
    let nv = desc.vertices;
    let total = nv.saturating_add(desc.edges.len()).saturating_add(desc.triangles.len());
    if total > MAX_SIMPLICES {
        return Err(Error::TooLarge { got: total, limit: MAX_SIMPLICES });
    }
    let mut edge_index = HashMap::new();
    for (e, &[i, j]) in desc.edges.iter().enumerate() {
        if i >= nv || j >= nv || i == j {
            return Err(Error::InconsistentIncidence(format!("edge {e} = [{i}, {j}]")));
        }
        if edge_index.insert((i.min(j), i.max(j)), e).is_some() {
            return Err(Error::InconsistentIncidence(format!("edge {e} repeats")));
        }
    }
    let boundaries = match &desc.boundaries {
        Some(b) => {
            if b.len() != desc.triangles.len() {
                return Err(Error::InconsistentIncidence("one boundary per triangle required".into()));
            }
            b.clone()
        }
        None => {
            let mut out = Vec::with_capacity(desc.triangles.len());
            for (t, &[a, b, c]) in desc.triangles.iter().enumerate() {
                let mut bd = [(0, 0); 3];
                for (slot, (p, q, sign)) in [(b, c, 1i8), (a, c, -1), (a, b, 1)].into_iter().enumerate() {
                    let e = *edge_index
                        .get(&(p.min(q), p.max(q)))
                        .ok_or_else(|| Error::InconsistentIncidence(format!("triangle {t} lacks edge [{p}, {q}]")))?;
                    let orient = if desc.edges[e] == [p, q] { 1 } else { -1 };
                    bd[slot] = (e, sign * orient);
                }
                out.push(bd);
            }
            out
        }
    };
    // ∂∂ = 0, checked in integers.
    for (t, bd) in boundaries.iter().enumerate() {
        let mut chain: HashMap<usize, i64> = HashMap::new();
        for &(e, sign) in bd {
            let [i, j] = *desc
                .edges
                .get(e)
                .ok_or_else(|| Error::InconsistentIncidence(format!("triangle {t} names edge {e}")))?;
            if sign != 1 && sign != -1 {
                return Err(Error::InconsistentIncidence(format!("triangle {t} has sign {sign}")));
            }
            *chain.entry(j).or_default() += sign as i64;
            *chain.entry(i).or_default() -= sign as i64;
        }
        if chain.values().any(|&c| c != 0) {
            return Err(Error::InconsistentIncidence(format!("boundary of triangle {t} is not a cycle")));
        }
    }
    let (ne, nt) = (desc.edges.len(), desc.triangles.len());
    let mut weights = Vec::with_capacity(nv + ne + nt);
    for (spec, count) in [(&desc.weights.vertices, nv), (&desc.weights.edges, ne), (&desc.weights.triangles, nt)] {
        match spec {
            Some(w) if w.len() != count => {
                return Err(Error::InconsistentIncidence(format!("{} weights for {count} simplices", w.len())))
            }
            Some(w) => weights.extend_from_slice(w),
            None => weights.extend(std::iter::repeat_n(1.0, count)),
        }
    }
    if let Some(i) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::NonpositiveWeight(i));
    }
    let vdist = hop_distances(nv, &desc.edges);
    Ok(WeightedComplex {
        name: desc.name.clone(),
        nv,
        edges: desc.edges.clone(),
        triangles: desc.triangles.clone(),
        boundaries,
        weights,
        vdist,
    })
}

fn hop_distances(nv: usize, edges: &[[usize; 2]]) -> Vec<f64> {
    let mut adj = vec![Vec::new(); nv];
    for &[i, j] in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut out = vec![f64::INFINITY; nv * nv];
    for s in 0..nv {
        out[s * nv + s] = 0.0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &u in &adj[v] {
                if out[s * nv + u].is_infinite() {
                    out[s * nv + u] = out[s * nv + v] + 1.0;
                    q.push_back(u);
                }
            }
        }
    }
    out
}

impl WeightedComplex {
    pub fn from_json(text: &str) -> Result<WeightedComplex> {
        let d: ComplexDescription = serde_json::from_str(text)?;
        build_complex(&d)
    }

    pub fn description(&self) -> ComplexDescription {
        let (nv, ne) = (self.nv, self.edges.len());
        ComplexDescription {
            vertices: nv,
            edges: self.edges.clone(),
            triangles: self.triangles.clone(),
            weights: WeightSpec {
                vertices: Some(self.weights[..nv].to_vec()),
                edges: Some(self.weights[nv..nv + ne].to_vec()),
                triangles: Some(self.weights[nv + ne..].to_vec()),
            },
            boundaries: Some(self.boundaries.clone()),
            name: self.name.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.description()).expect("complex serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Total simplex count.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn n_vertices(&self) -> usize {
        self.nv
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Degree (0, 1 or 2) of simplex `i`.
    pub fn degree(&self, i: usize) -> usize {
        if i < self.nv {
            0
        } else if i < self.nv + self.edges.len() {
            1
        } else {
            2
        }
    }

    pub fn vertices_of(&self, i: usize) -> Vec<usize> {
        match self.degree(i) {
            0 => vec![i],
            1 => self.edges[i - self.nv].to_vec(),
            _ => self.triangles[i - self.nv - self.edges.len()].to_vec(),
        }
    }

    /// Signed incidence pairs `(row, col, sign)` of `d`, rows of degree k+1.
    fn incidence(&self) -> Vec<(usize, usize, f64)> {
        let (nv, ne) = (self.nv, self.edges.len());
        let mut out = Vec::new();
        for (e, &[i, j]) in self.edges.iter().enumerate() {
            out.push((nv + e, i, -1.0));
            out.push((nv + e, j, 1.0));
        }
        for (t, bd) in self.boundaries.iter().enumerate() {
            for &(e, s) in bd {
                out.push((nv + ne + t, nv + e, s as f64));
            }
        }
        out
    }

    /// Exterior derivative on mixed-degree coefficients.
    pub fn coboundary(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut d = DMatrix::zeros(n, n);
        for (r, c, s) in self.incidence() {
            d[(r, c)] += s;
        }
        d
    }

    /// `d* = W_k^{-1} dᵀ W_{k+1}`, the weighted adjoint of `d`.
    pub fn codifferential(&self) -> DMatrix<f64> {
        let n = self.len();
        let w = &self.weights;
        let mut d = DMatrix::zeros(n, n);
        for (r, c, s) in self.incidence() {
            d[(c, r)] += w[r] * s / w[c];
        }
        d
    }

    pub fn dirac(&self) -> DiracOperator {
        let d = self.coboundary() + self.codifferential();
        let laplacian = &d * &d;
        DiracOperator { matrix: d, laplacian, weights: self.weights.clone(), degrees: (0..self.len()).map(|i| self.degree(i)).collect() }
    }

    /// Hop distance between nearest vertices of two simplices.
    pub fn simplex_distance(&self, a: usize, b: usize) -> f64 {
        let mut best = f64::INFINITY;
        for i in self.vertices_of(a) {
            for j in self.vertices_of(b) {
                best = best.min(self.vdist[i * self.nv + j]);
            }
        }
        best
    }

    /// All pairwise simplex distances, row-major.
    pub fn simplex_distances(&self) -> Vec<f64> {
        let n = self.len();
        let verts: Vec<Vec<usize>> = (0..n).map(|i| self.vertices_of(i)).collect();
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            for b in a..n {
                let mut best = f64::INFINITY;
                for &i in &verts[a] {
                    for &j in &verts[b] {
                        best = best.min(self.vdist[i * self.nv + j]);
                    }
                }
                out[a * n + b] = best;
                out[b * n + a] = best;
            }
        }
        out
    }

    /// Metric measure space on vertices: hop metric, vertex weights as masses.
    pub fn vertex_space(&self) -> Result<Space> {
        let edges: Vec<_> = self.edges.iter().map(|&[i, j]| (i, j, 1.0)).collect();
        Ok(Space::from_graph(self.nv, &edges, self.weights[..self.nv].to_vec())?.named(self.name.clone()))
    }

    /// Metric measure space on all simplices: a simplex and each of its facets
    /// are joined at length 1/2 (so vertex distances are the hop metric), and
    /// each simplex carries its weight as mass.
    pub fn form_space(&self) -> Result<Space> {
        let edges: Vec<_> = self.incidence().into_iter().map(|(r, c, _)| (r, c, 0.5)).collect();
        Ok(Space::from_graph(self.len(), &edges, self.weights.clone())?.named(format!("{}-forms", self.name)))
    }

    /// Multiplication by a vertex function, extended to simplices by averaging.
    pub fn mult_op(&self, eta: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let v = self.vertices_of(i);
                v.iter().map(|&x| eta[x]).sum::<f64>() / v.len() as f64
            })
            .collect()
    }

    /// Lipschitz constant of a vertex function in the hop metric.
    pub fn lipschitz(&self, eta: &[f64]) -> f64 {
        self.edges.iter().map(|&[i, j]| (eta[i] - eta[j]).abs()).fold(0.0, f64::max)
    }

    /// `[D, ηI]`, its locality and its size relative to `Lip(η)`.
    pub fn commutator_profile(&self, eta: &[f64]) -> (f64, CommutatorReport) {
        let d = self.dirac();
        let m = self.mult_op(eta);
        let n = self.len();
        let mut c = d.matrix.clone();
        for i in 0..n {
            for j in 0..n {
                c[(i, j)] = d.matrix[(i, j)] * (m[j] - m[i]);
            }
        }
        let dist = self.simplex_distances();
        let mut max_outside: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if dist[i * n + j] > 1.0 {
                    max_outside = max_outside.max(c[(i, j)].abs());
                }
            }
        }
        let norm = weighted_norm(&c, &self.weights);
        let lip = self.lipschitz(eta);
        let per_simplex = (0..n)
            .map(|i| {
                let row: f64 = (0..n).map(|j| c[(i, j)].powi(2) * self.weights[j]).sum();
                row.sqrt()
            })
            .collect();
        let measured = if lip > 0.0 { norm / lip } else { 0.0 };
        let pass = max_outside == 0.0 && (lip > 0.0 || norm == 0.0);
        (measured, CommutatorReport { operator_norm: norm, lipschitz: lip, locality_ok: max_outside == 0.0, max_outside, per_simplex, pass })
    }

    // ---------------------------------------------------------- generators

    pub fn path(n: usize) -> WeightedComplex {
        let edges = (1..n).map(|i| [i - 1, i]).collect();
        build_complex(&ComplexDescription { vertices: n, edges, name: format!("path{n}"), ..Default::default() })
            .expect("path is valid")
    }

    pub fn cycle(n: usize) -> WeightedComplex {
        let mut edges: Vec<[usize; 2]> = (1..n).map(|i| [i - 1, i]).collect();
        edges.push([0, n - 1]);
        build_complex(&ComplexDescription { vertices: n, edges, name: format!("cycle{n}"), ..Default::default() })
            .expect("cycle is valid")
    }

    /// `a × b` vertex lattice with horizontal and vertical edges.
    pub fn grid(a: usize, b: usize) -> WeightedComplex {
        let id = |i: usize, j: usize| i * b + j;
        let mut edges = Vec::new();
        for i in 0..a {
            for j in 0..b {
                if j + 1 < b {
                    edges.push([id(i, j), id(i, j + 1)]);
                }
                if i + 1 < a {
                    edges.push([id(i, j), id(i + 1, j)]);
                }
            }
        }
        build_complex(&ComplexDescription { vertices: a * b, edges, name: format!("grid{a}x{b}"), ..Default::default() })
            .expect("grid is valid")
    }

    /// Lattice with every square split along its diagonal into two triangles.
    pub fn triangulated_grid(a: usize, b: usize) -> WeightedComplex {
        let id = |i: usize, j: usize| i * b + j;
        let mut edges = Vec::new();
        let mut triangles = Vec::new();
        for i in 0..a {
            for j in 0..b {
                if j + 1 < b {
                    edges.push([id(i, j), id(i, j + 1)]);
                }
                if i + 1 < a {
                    edges.push([id(i, j), id(i + 1, j)]);
                }
                if i + 1 < a && j + 1 < b {
                    edges.push([id(i, j), id(i + 1, j + 1)]);
                    triangles.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
                    triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                }
            }
        }
        build_complex(&ComplexDescription {
            vertices: a * b,
            edges,
            triangles,
            name: format!("trigrid{a}x{b}"),
            ..Default::default()
        })
        .expect("triangulated grid is valid")
    }

    /// Disc made of `rings` concentric rings around a center vertex, ring `k`
    /// holding `sides·k` vertices, fully triangulated.
    pub fn triangulated_disc(sides: usize, rings: usize) -> WeightedComplex {
        let mut start = vec![0usize, 1];
        for k in 1..=rings {
            start.push(start[k] + sides * k);
        }
        let nv = start[rings + 1];
        let vid = |k: usize, i: usize| if k == 0 { 0 } else { start[k] + i % (sides * k) };
        let mut edge_set: Vec<[usize; 2]> = Vec::new();
        let mut triangles = Vec::new();
        let add_edge = |p: usize, q: usize, set: &mut Vec<[usize; 2]>| {
            let e = [p.min(q), p.max(q)];
            if !set.contains(&e) {
                set.push(e);
            }
        };
        for k in 1..=rings {
            let (inner, outer) = (sides * (k - 1), sides * k);
            for i in 0..outer {
                add_edge(vid(k, i), vid(k, i + 1), &mut edge_set);
            }
            // Walk both rings together, emitting triangles in angular order.
            let (mut a, mut b) = (0usize, 0usize);
            while a < inner.max(1) || b < outer {
                let inner_next = if inner == 0 { f64::INFINITY } else { (a as f64 + 1.0) / inner as f64 };
                let outer_next = (b as f64 + 1.0) / outer as f64;
                let p = vid(k - 1, a);
                let q = vid(k, b);
                add_edge(p, q, &mut edge_set);
                if outer_next <= inner_next && b < outer {
                    let r = vid(k, b + 1);
                    add_edge(p, r, &mut edge_set);
                    triangles.push([p, q, r]);
                    b += 1;
                } else {
                    let r = vid(k - 1, a + 1);
                    add_edge(r, q, &mut edge_set);
                    triangles.push([p, r, q]);
                    a += 1;
                }
                if inner == 0 && b == outer {
                    break;
                }
            }
        }
        build_complex(&ComplexDescription {
            vertices: nv,
            edges: edge_set,
            triangles,
            name: format!("disc{sides}r{rings}"),
            ..Default::default()
        })
        .expect("disc is valid")
    }

    /// Resolve a generator name: `path:N`, `cycle:N`, `grid:AxB`, `trigrid:AxB`,
    /// `disc:SIDES[xRINGS]`.
    pub fn generate(spec: &str) -> Result<WeightedComplex> {
        let bad = || Error::InconsistentIncidence(format!("unknown generator `{spec}`"));
        let (kind, arg) = spec.split_once(':').ok_or_else(bad)?;
        let nums: Vec<usize> = arg.split('x').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        // Upper bounds on the simplex count, checked before anything is built.
        let estimate = match (kind, nums.as_slice()) {
            ("path" | "cycle", [n]) => n.saturating_mul(2),
            ("grid", [a, b]) => a.saturating_mul(*b).saturating_mul(3),
            ("trigrid", [a, b]) => a.saturating_mul(*b).saturating_mul(6),
            ("disc", [s]) => s.saturating_mul(6).saturating_add(1),
            ("disc", [s, r]) => s.saturating_mul(*r).saturating_mul(r.saturating_add(1)).saturating_mul(3).saturating_add(1),
            _ => 0,
        };
        if estimate > MAX_SIMPLICES {
            return Err(Error::TooLarge { got: estimate, limit: MAX_SIMPLICES });
        }
        match (kind, nums.as_slice()) {
            ("path", [n]) if *n >= 1 => Ok(Self::path(*n)),
            ("cycle", [n]) if *n >= 3 => Ok(Self::cycle(*n)),
            ("grid", [a, b]) if *a >= 1 && *b >= 1 => Ok(Self::grid(*a, *b)),
            ("trigrid", [a, b]) if *a >= 1 && *b >= 1 => Ok(Self::triangulated_grid(*a, *b)),
            ("disc", [s]) if *s >= 3 => Ok(Self::triangulated_disc(*s, 1)),
            ("disc", [s, r]) if *s >= 3 && *r >= 1 => Ok(Self::triangulated_disc(*s, *r)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub operator_norm: f64,
    pub lipschitz: f64,
    pub locality_ok: bool,
    pub max_outside: f64,
    /// Weighted row norms of the commutator.
    pub per_simplex: Vec<f64>,
    pub pass: bool,
}

/// Dirac operator with its square, on the complex's weighted inner product.
#[derive(Debug, Clone)]
pub struct DiracOperator {
    pub matrix: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    pub weights: Vec<f64>,
    pub degrees: Vec<usize>,
}

impl DiracOperator {
    /// Wrap an arbitrary real matrix with weights (every simplex degree 0).
    pub fn from_matrix(matrix: DMatrix<f64>, weights: Vec<f64>) -> DiracOperator {
        let laplacian = &matrix * &matrix;
        let degrees = vec![0; weights.len()];
        DiracOperator { matrix, laplacian, weights, degrees }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn apply(&self, u: &FormField) -> FormField {
        let n = self.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                let a = self.matrix[(i, j)];
                if a != 0.0 {
                    acc += u.coeffs[j] * a;
                }
            }
            out[i] = acc;
        }
        FormField::new(out)
    }

    /// `max |⟨Du,v⟩_w − ⟨u,Dv⟩_w|` over basis pairs, i.e. `max |w_i D_ij − w_j D_ji|`.
    pub fn adjointness_defect(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.weights[i] * self.matrix[(i, j)] - self.weights[j] * self.matrix[(j, i)];
                worst = worst.max(a.abs());
            }
        }
        worst
    }

    /// Largest entry of `D²` linking simplices of different degrees.
    pub fn off_degree_defect(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if self.degrees[i] != self.degrees[j] {
                    worst = worst.max(self.laplacian[(i, j)].abs());
                }
            }
        }
        worst
    }

    /// Gershgorin bound on the spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.matrix[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// The symmetric matrix `W^{1/2} D W^{-1/2}`.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.len();
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        DMatrix::from_fn(n, n, |i, j| sw[i] * self.matrix[(i, j)] / sw[j])
    }
}

/// Operator norm in the weighted inner product: `σ_max(W^{1/2} T W^{-1/2})`.
pub fn weighted_norm<T: ComplexField<RealField = f64> + Copy>(t: &DMatrix<T>, w: &[f64]) -> f64 {
    let (r, c) = t.shape();
    if r == 0 || c == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(r, c, |i, j| t[(i, j)].scale(w[i].sqrt() / w[j].sqrt()));
    m.singular_values().iter().copied().fold(0.0, f64::max)
}
