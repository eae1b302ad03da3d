//! The discrete strip `X × (0,1]`: time grids, tent fields, local maximal,
//! Lusin and Carleson operators, tent norms and the `L²_•` pairing.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::covering::BallRef;
use crate::space::Space;
use crate::{Error, Result, C64};

/// How the `dt/t` measure is distributed over the grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightRule {
    /// Every node carries `ln(1/q)`.
    #[default]
    Uniform,
    /// Endpoint-corrected (Gregory) weights in `s = ln t`; same total as the
    /// trapezoid rule on `[t_{M−1}, 1]` and fourth-order accurate for smooth integrands.
    Gregory,
}

/// Geometric nodes `t_m = q^m`, `m = 0..M−1`, with `dt/t` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridDoc", into = "GridDoc")]
pub struct TimeGrid {
    q: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    rule: WeightRule,
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    q: f64,
    m: usize,
    #[serde(default)]
    rule: WeightRule,
}

impl TryFrom<GridDoc> for TimeGrid {
    type Error = Error;
    fn try_from(d: GridDoc) -> Result<TimeGrid> {
        TimeGrid::with_rule(d.q, d.m, d.rule)
    }
}

impl From<TimeGrid> for GridDoc {
    fn from(g: TimeGrid) -> GridDoc {
        GridDoc { q: g.q, m: g.nodes.len(), rule: g.rule }
    }
}

const GREGORY: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

impl TimeGrid {
    pub fn new(q: f64, m: usize) -> Result<TimeGrid> {
        TimeGrid::with_rule(q, m, WeightRule::Uniform)
    }

    pub fn gregory(q: f64, m: usize) -> Result<TimeGrid> {
        TimeGrid::with_rule(q, m, WeightRule::Gregory)
    }

    pub fn with_rule(q: f64, m: usize, rule: WeightRule) -> Result<TimeGrid> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidGrid(format!("ratio q = {q} outside (0,1)")));
        }
        if m == 0 || m > 1 << 16 {
            return Err(Error::InvalidGrid(format!("node count {m}")));
        }
        let h = (1.0 / q).ln();
        let nodes: Vec<f64> = (0..m).map(|k| q.powi(k as i32)).collect();
        let mut weights = vec![h; m];
        if rule == WeightRule::Gregory {
            if m >= 6 {
                for (k, g) in GREGORY.iter().enumerate() {
                    weights[k] = h * g;
                    weights[m - 1 - k] = h * g;
                }
            } else if m >= 2 {
                weights[0] = 0.5 * h;
                weights[m - 1] = 0.5 * h;
            }
        }
        Ok(TimeGrid { q, nodes, weights, rule })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn rule(&self) -> WeightRule {
        self.rule
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// First node index with `t_m ≤ t` (`len()` when there is none).
    pub fn first_at_most(&self, t: f64) -> usize {
        self.nodes.partition_point(|&v| v > t)
    }
}

impl Default for TimeGrid {
    fn default() -> TimeGrid {
        TimeGrid::new(2f64.powf(-0.25), 64).expect("valid default grid")
    }
}

/// A complex field on `X × grid`, stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TentField {
    grid: TimeGrid,
    n: usize,
    values: Vec<C64>,
}

impl TentField {
    pub fn new(grid: TimeGrid, n: usize, values: Vec<C64>) -> Result<TentField> {
        let expected = n.saturating_mul(grid.len());
        if values.len() != expected {
            return Err(Error::FieldLength { got: values.len(), expected });
        }
        Ok(TentField { grid, n, values })
    }

    pub fn zeros(grid: TimeGrid, n: usize) -> TentField {
        let len = n * grid.len();
        TentField { grid, n, values: vec![C64::new(0.0, 0.0); len] }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, y: usize, m: usize) -> C64 {
        self.values[y * self.grid.len() + m]
    }

    #[inline]
    pub fn set(&mut self, y: usize, m: usize, v: C64) {
        let k = self.grid.len();
        self.values[y * k + m] = v;
    }

    /// Time slice `m` as a vector over points.
    pub fn slice(&self, m: usize) -> Vec<C64> {
        (0..self.n).map(|y| self.get(y, m)).collect()
    }

    pub fn scale(&self, c: C64) -> TentField {
        TentField { grid: self.grid.clone(), n: self.n, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.norm_sqr() == 0.0)
    }

    /// `‖F‖_{L²_•} = (Σ |F|² mass w)^{1/2}`.
    pub fn l2_norm(&self, s: &Space) -> f64 {
        let w = self.grid.weights();
        let mut acc = 0.0;
        for y in 0..self.n {
            for (m, wm) in w.iter().enumerate() {
                acc += self.get(y, m).norm_sqr() * s.mass(y) * wm;
            }
        }
        acc.sqrt()
    }

    pub fn add_scaled(&mut self, c: C64, other: &TentField) -> Result<()> {
        if other.grid != self.grid || other.n != self.n {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = TentDoc {
            grid: self.grid.clone(),
            points: self.n,
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        };
        serde_json::to_string(&doc).expect("tent field serializes")
    }

    /// Parse `{"grid": {"q", "m", "rule"}, "points": n, "values": [[re, im], ...]}`.
    pub fn from_json(text: &str) -> Result<TentField> {
        let doc: TentDoc = serde_json::from_str(text)?;
        let values: Vec<C64> = doc.values.iter().map(|v| C64::new(v[0], v[1])).collect();
        let f = TentField::new(doc.grid, doc.points, values)?;
        if !f.is_finite() {
            return Err(Error::NonfiniteValues);
        }
        Ok(f)
    }
}

#[derive(Serialize, Deserialize)]
struct TentDoc {
    grid: TimeGrid,
    points: usize,
    values: Vec<[f64; 2]>,
}

fn check_points(s: &Space, f: &TentField) -> Result<()> {
    if f.points() != s.len() {
        return Err(Error::FieldLength { got: f.points(), expected: s.len() });
    }
    Ok(())
}

/// `M_loc f(x) = max_{0<r≤1} V(x,r)^{-1} Σ_{B(x,r)} |f| mass`.
///
/// Ball averages only change at realized distances, so those radii below 1
/// and `r = 1` itself are all that need checking.
pub fn maximal_local(s: &Space, f: &[f64]) -> Vec<f64> {
    (0..s.len())
        .map(|x| {
            let (order, sorted) = s.by_distance(x);
            let mut best: f64 = 0.0;
            let (mut num, mut den) = (0.0, 0.0);
            for k in 0..s.len() {
                if sorted[k] >= 1.0 {
                    break;
                }
                let y = order[k] as usize;
                num += f[y].abs() * s.mass(y);
                den += s.mass(y);
                if k + 1 == s.len() || sorted[k + 1] != sorted[k] {
                    best = best.max(num / den);
                }
            }
            best
        })
        .collect()
}

/// Measured constants of `M_loc` on a family of test functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalConstants {
    /// `sup_f sup_a a·μ{M_loc f > a} / ‖f‖₁`.
    pub weak: f64,
    /// `sup_f ‖M_loc f‖₂ / ‖f‖₂`.
    pub strong: f64,
}

/// Weak-(1,1) and `L²` ratios of `M_loc` over the given functions. The level
/// set `{M f > a}` only changes at values of `M f`, so letting `a` increase to
/// each value `v` gives the supremum `v·μ{M f ≥ v}`.
pub fn maximal_constants(s: &Space, fs: &[Vec<f64>]) -> MaximalConstants {
    let mut out = MaximalConstants { weak: 0.0, strong: 0.0 };
    for f in fs {
        let l1: f64 = f.iter().enumerate().map(|(x, v)| v.abs() * s.mass(x)).sum();
        if l1 == 0.0 {
            continue;
        }
        let l2 = f.iter().enumerate().map(|(x, v)| v * v * s.mass(x)).sum::<f64>().sqrt();
        let mf = maximal_local(s, f);
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| mf[b].total_cmp(&mf[a]));
        let mut measure = 0.0;
        for (i, &x) in order.iter().enumerate() {
            measure += s.mass(x);
            if i + 1 == order.len() || mf[order[i + 1]] != mf[x] {
                out.weak = out.weak.max(mf[x] * measure / l1);
            }
        }
        let m2 = mf.iter().enumerate().map(|(x, v)| v * v * s.mass(x)).sum::<f64>().sqrt();
        out.strong = out.strong.max(m2 / l2);
    }
    out
}

/// Local Lusin area function with aperture `α`.
pub fn lusin(s: &Space, f: &TentField, alpha: f64) -> Vec<f64> {
    let (n, m) = (s.len(), f.grid().len());
    let nodes = f.grid().nodes();
    let w = f.grid().weights();
    let e: Vec<f64> = (0..n * m).map(|i| f.values()[i].norm_sqr() * s.mass(i / m)).collect();
    (0..n)
        .map(|x| {
            let (order, _) = s.by_distance(x);
            let mut acc = 0.0;
            for k in 0..m {
                let cnt = s.ball_count(x, alpha * nodes[k]);
                let inner: f64 = order[..cnt].iter().map(|&y| e[y as usize * m + k]).sum();
                if inner > 0.0 {
                    acc += inner * w[k] / s.volume(x, nodes[k]);
                }
            }
            acc.sqrt()
        })
        .collect()
}

/// Local Carleson function: the largest normalized tent energy over balls of
/// radius at most 2 containing `x`.
pub fn carleson(s: &Space, f: &TentField) -> Vec<f64> {
    let (n, m) = (s.len(), f.grid().len());
    let grid = f.grid();
    // tail[y][j] = Σ_{k ≥ j} |F(y,k)|² mass(y) w_k, i.e. energy at t ≤ t_j.
    let mut tail = vec![0.0; n * (m + 1)];
    for y in 0..n {
        for k in (0..m).rev() {
            tail[y * (m + 1) + k] =
                tail[y * (m + 1) + k + 1] + f.get(y, k).norm_sqr() * s.mass(y) * grid.weights()[k];
        }
    }
    let mut out = vec![0.0f64; n];
    let mut pm = vec![0.0; n];
    for c in 0..n {
        let mut radii: Vec<f64> = s.distinct_distances(c).into_iter().filter(|&d| d <= 2.0).collect();
        if radii.last() != Some(&2.0) {
            radii.push(2.0);
        }
        let mut energy = vec![0.0; radii.len()];
        let crow = s.dist_row(c);
        for y in 0..n {
            let dy = crow[y];
            let first = radii.partition_point(|&r| r <= dy);
            if first == radii.len() {
                continue;
            }
            // ρ(y, B(c,r)^c) is the distance to the first point, in y's order,
            // whose distance from c reaches r; a running max finds it by bisection.
            let (order, sorted) = s.by_distance(y);
            let mut acc: f64 = 0.0;
            for (k, &z) in order.iter().enumerate() {
                acc = acc.max(crow[z as usize]);
                pm[k] = acc;
            }
            for (ri, &r) in radii.iter().enumerate().skip(first) {
                let k = pm.partition_point(|&v| v < r);
                let g = if k == n { f64::INFINITY } else { sorted[k] };
                energy[ri] += tail[y * (m + 1) + grid.first_at_most(g)];
            }
        }
        for (ri, &r) in radii.iter().enumerate() {
            if energy[ri] == 0.0 {
                continue;
            }
            let v = (energy[ri] / s.volume(c, r)).sqrt();
            let (order, _) = s.by_distance(c);
            for &x in &order[..s.ball_count(c, r)] {
                let x = x as usize;
                out[x] = out[x].max(v);
            }
        }
    }
    out
}

/// `t^p` norm: `L^p` norm of the Lusin function for finite `p`, the largest
/// Carleson value for `p = ∞`.
pub fn tent_norm(s: &Space, f: &TentField, p: f64) -> Result<f64> {
    check_points(s, f)?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidP(p));
    }
    if p.is_infinite() {
        return Ok(carleson(s, f).into_iter().fold(0.0, f64::max));
    }
    let a = lusin(s, f, 1.0);
    let sum: f64 = a.iter().enumerate().map(|(x, v)| v.powf(p) * s.mass(x)).sum();
    Ok(sum.powf(1.0 / p))
}

/// `⟨F, G⟩ = Σ F conj(G) mass w`.
pub fn pairing(s: &Space, f: &TentField, g: &TentField) -> Result<C64> {
    if f.grid() != g.grid() || f.points() != g.points() {
        return Err(Error::GridMismatch);
    }
    check_points(s, f)?;
    let w = f.grid().weights();
    let mut acc = C64::new(0.0, 0.0);
    for y in 0..f.points() {
        for (m, wm) in w.iter().enumerate() {
            acc += f.get(y, m) * g.get(y, m).conj() * (s.mass(y) * wm);
        }
    }
    Ok(acc)
}

/// Geometric regions of the strip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RegionSpec {
    /// `Γ_α(x) = {(y,t) : ρ(x,y) < αt}`.
    Cone { x: usize, aperture: f64 },
    /// `T_α(O) = {(y,t) : ρ(y,O^c) ≥ αt}`.
    Tent { open: Vec<usize>, aperture: f64 },
    /// `C(B) = B × {t ≤ min(r(B), 1)}`.
    Box { ball: BallRef },
}

impl RegionSpec {
    pub fn from_json(text: &str) -> Result<RegionSpec> {
        let v: Value = serde_json::from_str(text)?;
        match v.get("kind").and_then(Value::as_str) {
            Some("cone" | "tent" | "box") => Ok(serde_json::from_value(v)?),
            Some(other) => Err(Error::UnknownKind(other.to_string())),
            None => Err(Error::UnknownKind(String::new())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TentRegion {
    pub spec: RegionSpec,
    pub members: Vec<(usize, usize)>,
}

pub fn region(s: &Space, grid: &TimeGrid, spec: &RegionSpec) -> Result<TentRegion> {
    let mask = region_mask(s, grid, spec)?;
    let m = grid.len();
    let members = (0..mask.len()).filter(|&i| mask[i]).map(|i| (i / m, i % m)).collect();
    Ok(TentRegion { spec: spec.clone(), members })
}

/// Membership of every `(y, m)` (point-major) in the region.
pub fn region_mask(s: &Space, grid: &TimeGrid, spec: &RegionSpec) -> Result<Vec<bool>> {
    let (n, m) = (s.len(), grid.len());
    let t = grid.nodes();
    match spec {
        RegionSpec::Cone { x, aperture } => {
            if *x >= n {
                return Err(Error::PointOutOfRange(*x));
            }
            Ok((0..n * m).map(|i| s.dist(*x, i / m) < aperture * t[i % m]).collect())
        }
        RegionSpec::Tent { open, aperture } => {
            let o = crate::covering::set_mask(s, open)?;
            Ok(tent_mask(s, grid, &o, *aperture))
        }
        RegionSpec::Box { ball } => {
            if ball.center >= n {
                return Err(Error::PointOutOfRange(ball.center));
            }
            Ok(box_mask(s, grid, ball))
        }
    }
}

/// `T_α(O)` for a membership mask, with `ρ(y, ∅) = +∞`.
pub fn tent_mask(s: &Space, grid: &TimeGrid, open: &[bool], aperture: f64) -> Vec<bool> {
    let m = grid.len();
    let mut out = vec![false; s.len() * m];
    for y in 0..s.len() {
        let g = s.dist_to_complement(y, open);
        for k in grid.first_at_most(g / aperture)..m {
            out[y * m + k] = aperture * grid.nodes()[k] <= g;
        }
    }
    out
}

pub fn box_mask(s: &Space, grid: &TimeGrid, ball: &BallRef) -> Vec<bool> {
    let m = grid.len();
    let h = ball.radius.min(1.0);
    let from = grid.first_at_most(h);
    let mut out = vec![false; s.len() * m];
    for y in 0..s.len() {
        if ball.contains(s, y) {
            for k in from..m {
                out[y * m + k] = true;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use proptest::prelude::*;

    fn p(n: usize) -> Space {
        Space::path(n, 1.0).unwrap()
    }

    #[test]
    fn maximal_constants_examples() {
        // Unit spacing: every ball of radius ≤ 1 is a single point, so M f = |f|.
        let s = p(12);
        let f = corpus::random_real_vec(4, 12);
        let k = maximal_constants(&s, &[f]);
        assert!((k.strong - 1.0).abs() < 1e-14);
        assert!(k.weak <= 1.0 + 1e-14);
        // Brute-force threshold sweep on a denser space.
        let s = corpus::random_plane(3, 30, 0.3);
        let f: Vec<f64> = corpus::random_real_vec(9, 30).into_iter().map(|v| v.max(0.0)).collect();
        let mf = maximal_local(&s, &f);
        let l1: f64 = f.iter().enumerate().map(|(x, v)| v * s.mass(x)).sum();
        let mut brute: f64 = 0.0;
        for i in 0..4000 {
            let a = i as f64 / 4000.0 * 1.2;
            let m: f64 = (0..30).filter(|&x| mf[x] > a).map(|x| s.mass(x)).sum();
            brute = brute.max(a * m / l1);
        }
        let got = maximal_constants(&s, &[f]).weak;
        assert!(got >= brute && got <= brute * 1.01, "{got} vs {brute}");
    }

    #[test]
    fn grid_defaults() {
        let g = TimeGrid::default();
        assert_eq!(g.len(), 64);
        assert_eq!(g.nodes()[0], 1.0);
        assert!(g.nodes().windows(2).all(|w| w[1] < w[0]));
        let total: f64 = g.weights().iter().sum();
        assert!((total - 64.0 * 0.25 * 2f64.ln()).abs() < 1e-12);
        let gg = TimeGrid::gregory(g.q(), 64).unwrap();
        let tg: f64 = gg.weights().iter().sum();
        assert!((tg - 63.0 * 0.25 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gregory_weights_integrate_ds_accurately() {
        // ∫_{t_min}^1 t² dt/t = (1 − t_min²)/2; halving the step in s cuts the
        // error by about 2⁴ for the Gregory rule.
        let err = |q: f64, m: usize| {
            let g = TimeGrid::gregory(q, m).unwrap();
            let got: f64 = g.nodes().iter().zip(g.weights()).map(|(t, w)| t * t * w).sum();
            let tmin = g.nodes()[m - 1];
            (got - 0.5 * (1.0 - tmin * tmin)).abs()
        };
        let (coarse, fine) = (err(0.8, 41), err(0.8f64.sqrt(), 81));
        assert!(coarse < 1e-3);
        assert!(coarse / fine > 12.0, "{coarse} {fine}");
    }

    #[test]
    fn maximal_examples() {
        let s = p(5);
        assert!(maximal_local(&s, &[3.0; 5]).iter().all(|&v| (v - 3.0).abs() < 1e-15));
        let mut f = vec![0.0; 5];
        f[2] = 1.0;
        assert_eq!(maximal_local(&s, &f)[2], 1.0);
    }

    fn brute_maximal(s: &Space, f: &[f64]) -> Vec<f64> {
        (0..s.len())
            .map(|x| {
                let mut radii: Vec<f64> = (0..s.len()).map(|y| s.dist(x, y) * (1.0 + 1e-12) + 1e-15).filter(|&r| r <= 1.0).collect();
                radii.push(1.0);
                radii
                    .into_iter()
                    .map(|r| {
                        let (mut a, mut v) = (0.0, 0.0);
                        for y in 0..s.len() {
                            if s.dist(x, y) < r {
                                a += f[y].abs() * s.mass(y);
                                v += s.mass(y);
                            }
                        }
                        a / v
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    fn brute_lusin(s: &Space, f: &TentField, alpha: f64) -> Vec<f64> {
        let g = f.grid();
        (0..s.len())
            .map(|x| {
                let mut acc = 0.0;
                for y in 0..s.len() {
                    for k in 0..g.len() {
                        if s.dist(x, y) < alpha * g.nodes()[k] {
                            let v: f64 = (0..s.len()).filter(|&z| s.dist(x, z) < g.nodes()[k]).map(|z| s.mass(z)).sum();
                            acc += f.get(y, k).norm_sqr() * s.mass(y) * g.weights()[k] / v;
                        }
                    }
                }
                acc.sqrt()
            })
            .collect()
    }

    fn brute_carleson(s: &Space, f: &TentField) -> Vec<f64> {
        let g = f.grid();
        let n = s.len();
        let mut out = vec![0.0f64; n];
        for c in 0..n {
            let mut radii: Vec<f64> = (0..n).map(|y| s.dist(c, y)).filter(|&d| d > 0.0 && d <= 2.0).collect();
            radii.push(2.0);
            for r in radii {
                let inside: Vec<bool> = (0..n).map(|y| s.dist(c, y) < r).collect();
                let mu: f64 = (0..n).filter(|&y| inside[y]).map(|y| s.mass(y)).sum();
                let mut e = 0.0;
                for y in 0..n {
                    let dc = (0..n).filter(|&z| !inside[z]).map(|z| s.dist(y, z)).fold(f64::INFINITY, f64::min);
                    for k in 0..g.len() {
                        if dc >= g.nodes()[k] {
                            e += f.get(y, k).norm_sqr() * s.mass(y) * g.weights()[k];
                        }
                    }
                }
                let v = (e / mu).sqrt();
                for x in 0..n {
                    if inside[x] {
                        out[x] = out[x].max(v);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn maximal_matches_brute_force() {
        let s = Space::path(20, 0.15).unwrap();
        let f = corpus::random_real_vec(4, 20);
        let (a, b) = (maximal_local(&s, &f), brute_maximal(&s, &f));
        for x in 0..20 {
            assert!((a[x] - b[x]).abs() < 1e-14);
        }
    }

    #[test]
    fn lusin_examples() {
        let s = p(10);
        let g = TimeGrid::new(0.8, 16).unwrap();
        assert!(lusin(&s, &TentField::zeros(g.clone(), 10), 1.0).iter().all(|&v| v == 0.0));
        let mut f = TentField::zeros(g.clone(), 10);
        f.set(4, 0, C64::new(2.0, 0.0));
        let a = lusin(&s, &f, 1.0);
        for x in 0..10 {
            let want = if s.dist(x, 4) < 1.0 { 2.0 * (g.weights()[0] / s.volume(x, 1.0)).sqrt() } else { 0.0 };
            assert!((a[x] - want).abs() < 1e-15);
        }
        let s = Space::path(10, 0.2).unwrap();
        let f = corpus::random_tent_field(9, 10, &g, 0.5);
        let (a, b) = (lusin(&s, &f, 1.0), brute_lusin(&s, &f, 1.0));
        for x in 0..10 {
            assert!((a[x] - b[x]).abs() <= 1e-12 * b[x].max(1.0));
        }
    }

    #[test]
    fn carleson_examples() {
        let g = TimeGrid::new(0.7, 12).unwrap();
        let one = Space::path(1, 1.0).unwrap();
        let c = C64::new(0.0, 3.0);
        let f = TentField::new(g.clone(), 1, vec![c; 12]).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((carleson(&one, &f)[0] - 3.0 * total.sqrt()).abs() < 1e-13);
        assert!(carleson(&one, &TentField::zeros(g.clone(), 1))[0] == 0.0);
        for seed in 0..4 {
            let s = corpus::random_plane(seed, 14, 0.35);
            let f = corpus::random_tent_field(seed, 14, &g, 0.4);
            let (a, b) = (carleson(&s, &f), brute_carleson(&s, &f));
            for x in 0..14 {
                assert!((a[x] - b[x]).abs() <= 1e-12 * b[x].max(1.0), "seed {seed} x {x}: {} vs {}", a[x], b[x]);
            }
        }
    }

    #[test]
    fn regions() {
        let g = TimeGrid::new(0.5, 6).unwrap();
        let s = p(4);
        let all: Vec<usize> = (0..4).collect();
        let t = region(&s, &g, &RegionSpec::Tent { open: all, aperture: 1.0 }).unwrap();
        assert_eq!(t.members.len(), 24);
        let one = p(1);
        let c = region(&one, &g, &RegionSpec::Cone { x: 0, aperture: 1.0 }).unwrap();
        assert_eq!(c.members, (0..6).map(|k| (0, k)).collect::<Vec<_>>());
        let b = region(&s, &g, &RegionSpec::Box { ball: BallRef::new(1, 0.5) }).unwrap();
        assert!(b.members.iter().all(|&(y, k)| y == 1 && g.nodes()[k] <= 0.5));
        assert_eq!(b.members.len(), 5);
        let e = RegionSpec::from_json(r#"{"kind":"wedge","x":0}"#).unwrap_err();
        assert_eq!(e, Error::UnknownKind("wedge".into()));
        let spec = RegionSpec::from_json(r#"{"kind":"cone","x":2,"aperture":2.0}"#).unwrap();
        assert_eq!(spec, RegionSpec::Cone { x: 2, aperture: 2.0 });
    }

    #[test]
    fn norms_and_pairing() {
        let s = corpus::random_plane(3, 12, 0.3);
        let g = TimeGrid::new(0.75, 10).unwrap();
        let f = corpus::random_tent_field(1, 12, &g, 0.6);
        let zero = TentField::zeros(g.clone(), 12);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(tent_norm(&s, &zero, p).unwrap(), 0.0);
            let c = C64::new(-1.5, 2.0);
            let a = tent_norm(&s, &f.scale(c), p).unwrap();
            let b = c.norm() * tent_norm(&s, &f, p).unwrap();
            assert!((a - b).abs() < 1e-12 * b);
        }
        assert_eq!(tent_norm(&s, &f, 0.5).unwrap_err(), Error::InvalidP(0.5));
        let ff = pairing(&s, &f, &f).unwrap();
        assert!((ff.re - f.l2_norm(&s).powi(2)).abs() < 1e-12 * ff.re && ff.im.abs() < 1e-12 * ff.re);
        assert_eq!(pairing(&s, &f, &zero).unwrap(), C64::new(0.0, 0.0));
        let other = TentField::zeros(TimeGrid::new(0.75, 11).unwrap(), 12);
        assert_eq!(pairing(&s, &f, &other).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn tent_field_json_round_trip() {
        let g = TimeGrid::gregory(0.8, 7).unwrap();
        let f = corpus::random_tent_field(2, 3, &g, 0.7);
        let back = TentField::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        assert!(TentField::from_json(r#"{"grid":{"q":2.0,"m":3},"points":1,"values":[[0,0],[0,0],[0,0]]}"#).is_err());
        let huge = r#"{"grid":{"q":0.5,"m":3},"points":18446744073709551615,"values":[]}"#;
        assert!(matches!(TentField::from_json(huge), Err(Error::FieldLength { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn aperture_monotone(seed in 0u64..500, a1 in 0.2f64..3.0, extra in 0.0f64..3.0) {
            let s = corpus::random_plane(seed, 15, 0.3);
            let g = TimeGrid::new(0.7, 10).unwrap();
            let f = corpus::random_tent_field(seed, 15, &g, 0.5);
            let (l1, l2) = (lusin(&s, &f, a1), lusin(&s, &f, a1 + extra));
            for x in 0..15 {
                prop_assert!(l1[x] <= l2[x] * (1.0 + 1e-14));
            }
        }

        #[test]
        fn region_membership_recomputes(seed in 0u64..500, x in 0usize..15, r in 0.05f64..2.5) {
            let s = corpus::random_plane(seed, 15, 0.3);
            let g = TimeGrid::new(0.6, 8).unwrap();
            let m = g.len();
            let open = corpus::random_subset(seed, 15, 0.6);
            let tent = region(&s, &g, &RegionSpec::Tent { open: open.clone(), aperture: r }).unwrap();
            let mask = crate::covering::set_mask(&s, &open).unwrap();
            for y in 0..15 {
                let d = (0..15).filter(|&z| !mask[z]).map(|z| s.dist(y, z)).fold(f64::INFINITY, f64::min);
                for k in 0..m {
                    prop_assert_eq!(tent.members.contains(&(y, k)), d >= r * g.nodes()[k]);
                }
            }
            let cone = region(&s, &g, &RegionSpec::Cone { x, aperture: r }).unwrap();
            for &(y, k) in &cone.members {
                prop_assert!(s.dist(x, y) < r * g.nodes()[k]);
            }
        }
    }
}
