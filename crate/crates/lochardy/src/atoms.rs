//! Atomic decompositions of tent fields and of `L¹_Q` functions.

use serde::{Deserialize, Serialize};

use crate::covering::{unit_cubes, vitali_select, whitney_from_mask, BallRef, UnitCubeStructure};
use crate::space::Space;
use crate::tent::{box_mask, lusin, tent_mask, TentField};
use crate::{Error, Result, C64};

/// Relative tolerance on atom norm bounds.
pub const ATOM_TOL: f64 = 1e-12;

/// A tent atom `a` on a ball `B` together with its coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct TentAtomRecord {
    pub field: TentField,
    pub ball: BallRef,
    pub weight: C64,
}

/// A cube piece `a_j = 1_{Q_j} u / λ_j` with `λ_j = μ(Q_j)^{1/2} ‖1_{Q_j} u‖₂`.
///
/// `a_j` obeys `‖a_j‖₂ ≤ multiple · μ(B)^{-1/2}` on its radius-1 anchor ball,
/// where `multiple = (μ(B)/μ(Q_j))^{1/2}` is bounded by the doubling constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LQAtomRecord {
    pub field: Vec<C64>,
    pub ball: BallRef,
    pub weight: C64,
    pub multiple: f64,
    pub cube: usize,
}

impl LQAtomRecord {
    /// The same term written as (genuine atom, coefficient).
    pub fn normalized(&self) -> (Vec<C64>, C64) {
        let c = self.multiple;
        (self.field.iter().map(|v| v / c).collect(), self.weight * c)
    }
}

/// Stopping-time parameters; `gamma = None` derives `γ = 1 − c_η/2` from the space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub eta: f64,
    pub h: f64,
    pub alpha: f64,
    pub gamma: Option<f64>,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig { eta: 0.25, h: 0.5, alpha: 20.0, gamma: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub pass: bool,
    pub support_ok: bool,
    pub radius_ok: bool,
    pub norm_ok: bool,
    pub norm: f64,
    pub bound: f64,
    /// `norm / bound − 1`; positive values are violations.
    pub slack: f64,
}

/// Anything that can be checked against its atom definition.
pub trait Atom {
    fn validate(&self, s: &Space) -> AtomReport;
}

pub fn validate_atom<A: Atom + ?Sized>(s: &Space, a: &A) -> AtomReport {
    a.validate(s)
}

fn report(support_ok: bool, radius_ok: bool, norm: f64, bound: f64) -> AtomReport {
    let norm_ok = norm <= bound * (1.0 + ATOM_TOL);
    AtomReport {
        pass: support_ok && radius_ok && norm_ok,
        support_ok,
        radius_ok,
        norm_ok,
        norm,
        bound,
        slack: norm / bound - 1.0,
    }
}

impl Atom for TentAtomRecord {
    /// Support in `T¹(B)`, `r(B) ≤ 2`, `‖a‖_{L²_•} ≤ μ(B)^{-1/2}`.
    fn validate(&self, s: &Space) -> AtomReport {
        let ball_mask = self.ball.mask(s);
        let m = self.field.grid().len();
        let tent = tent_mask(s, self.field.grid(), &ball_mask, 1.0);
        let support_ok = self.field.points() == s.len()
            && (0..s.len() * m).all(|i| tent[i] || self.field.values()[i].norm_sqr() == 0.0);
        report(
            support_ok,
            self.ball.radius <= 2.0,
            self.field.l2_norm(s),
            self.ball.measure(s).powf(-0.5),
        )
    }
}

impl Atom for LQAtomRecord {
    fn validate(&self, s: &Space) -> AtomReport {
        let support_ok = self.field.len() == s.len()
            && (0..s.len()).all(|x| self.ball.contains(s, x) || self.field[x].norm_sqr() == 0.0);
        report(
            support_ok,
            self.ball.radius >= 1.0,
            l2(s, &self.field),
            self.multiple * self.ball.measure(s).powf(-0.5),
        )
    }
}

pub(crate) fn l2(s: &Space, u: &[C64]) -> f64 {
    u.iter().enumerate().map(|(x, v)| v.norm_sqr() * s.mass(x)).sum::<f64>().sqrt()
}

/// `F^γ = {x : μ(F ∩ B(x,r)) ≥ γ V(x,r) for every r ∈ (0,1]}`.
pub fn gamma_density(s: &Space, set: &[bool], gamma: f64) -> Vec<bool> {
    (0..s.len())
        .map(|x| {
            let (order, sorted) = s.by_distance(x);
            let (mut inside, mut total) = (0.0, 0.0);
            for k in 0..s.len() {
                if sorted[k] >= 1.0 {
                    break;
                }
                let y = order[k] as usize;
                total += s.mass(y);
                if set[y] {
                    inside += s.mass(y);
                }
                let closes = k + 1 == s.len() || sorted[k + 1] != sorted[k];
                if closes && inside < gamma * total {
                    return false;
                }
            }
            true
        })
        .collect()
}

/// The density dilation `O^γ = X \ (X \ O)^γ ⊇ O`.
pub fn density_dilation(s: &Space, open: &[bool], gamma: f64) -> Vec<bool> {
    let closed: Vec<bool> = open.iter().map(|&b| !b).collect();
    gamma_density(s, &closed, gamma).into_iter().map(|b| !b).collect()
}

/// `c_η = min V(ξ,ηt)/V(ξ,t)` over all `ξ` and `t ∈ (0,1]`.
pub fn density_constant(s: &Space, eta: f64) -> f64 {
    let mut best: f64 = 1.0;
    for x in 0..s.len() {
        let mut cands = vec![1.0];
        for d in s.distinct_distances(x) {
            if d <= 1.0 {
                cands.push(d);
            }
            if d / eta <= 1.0 {
                cands.push(d / eta);
            }
        }
        for t in cands {
            best = best.min(s.volume(x, eta * t) / s.volume(x, t));
        }
    }
    best
}

/// Resolved `γ` for a configuration on a space.
pub fn resolve_gamma(s: &Space, cfg: &DensityConfig) -> f64 {
    cfg.gamma.unwrap_or_else(|| 1.0 - density_constant(s, cfg.eta) / 2.0)
}

/// Decomposition of a tent field into atoms by the level-set stopping time.
///
/// With `O_k = {A F > 2^k}` and dilations `O_k*`, each layer
/// `T_{1−η}(O_k*) \ T_{1−η}(O_{k+1}*)` is cut by the Whitney partition of `O_k*`
/// and normalized on the enlarged ball `αB_j`.
pub fn t1_decompose(s: &Space, f: &TentField, cfg: &DensityConfig) -> Result<Vec<TentAtomRecord>> {
    if !f.is_finite() {
        return Err(Error::NonfiniteValues);
    }
    if f.points() != s.len() {
        return Err(Error::FieldLength { got: f.points(), expected: s.len() });
    }
    if !(cfg.eta > 0.0 && cfg.eta < 1.0 && cfg.h > 0.0 && cfg.alpha > 0.0) {
        return Err(Error::InvalidDensityConfig(format!("{cfg:?}")));
    }
    let gamma = resolve_gamma(s, cfg);
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidDensityConfig(format!("gamma = {gamma}")));
    }
    let area = lusin(s, f, 1.0);
    let positive: Vec<f64> = area.iter().copied().filter(|&v| v > 0.0).collect();
    if positive.is_empty() {
        return Ok(vec![]);
    }
    let lo = positive.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = positive.iter().copied().fold(0.0, f64::max);
    let mut k_lo = lo.log2().ceil() as i32 - 1;
    while 2f64.powi(k_lo) >= lo {
        k_lo -= 1;
    }
    let mut k_hi = hi.log2().ceil() as i32 - 1;
    while 2f64.powi(k_hi + 1) < hi {
        k_hi += 1;
    }
    let grid = f.grid();
    let m = grid.len();
    let n = s.len();
    let aperture = 1.0 - cfg.eta;
    let level = |k: i32| -> Vec<bool> {
        let thr = 2f64.powi(k);
        let o: Vec<bool> = area.iter().map(|&v| v > thr).collect();
        density_dilation(s, &o, gamma)
    };
    let mut atoms = Vec::new();
    let mut star = level(k_lo);
    let mut tent = tent_mask(s, grid, &star, aperture);
    for k in k_lo..=k_hi {
        let next_star = level(k + 1);
        let next_tent = tent_mask(s, grid, &next_star, aperture);
        if star.iter().any(|&b| b) {
            let cover = whitney_from_mask(s, &star, cfg.h);
            for (j, ball) in cover.balls.iter().enumerate() {
                let phi = &cover.partition[j];
                let mut g = TentField::zeros(grid.clone(), n);
                for y in 0..n {
                    if phi[y] == 0.0 {
                        continue;
                    }
                    for mm in 0..m {
                        let i = y * m + mm;
                        if tent[i] && !next_tent[i] {
                            g.values_mut()[i] = f.values()[i] * phi[y];
                        }
                    }
                }
                let big = ball.dilate(cfg.alpha);
                let lambda = (big.measure(s)).sqrt() * g.l2_norm(s);
                if lambda > 0.0 {
                    atoms.push(TentAtomRecord {
                        field: g.scale(C64::new(1.0 / lambda, 0.0)),
                        ball: big,
                        weight: C64::new(lambda, 0.0),
                    });
                }
            }
        }
        star = next_star;
        tent = next_tent;
    }
    Ok(atoms)
}

/// `Σ λ a` over a list of tent atoms.
pub fn reconstruct(atoms: &[TentAtomRecord], like: &TentField) -> TentField {
    let mut out = TentField::zeros(like.grid().clone(), like.points());
    for a in atoms {
        out.add_scaled(a.weight, &a.field).expect("atoms share the grid");
    }
    out
}

/// Split a Carleson-box atom into tent atoms of radius at most 2.
pub fn split_carleson_atom(s: &Space, a: &TentField, ball: BallRef) -> Result<Vec<TentAtomRecord>> {
    if a.points() != s.len() {
        return Err(Error::FieldLength { got: a.points(), expected: s.len() });
    }
    if !(ball.radius > 0.0) || ball.center >= s.len() {
        return Err(Error::NotACarlesonAtom(format!("bad ball {ball:?}")));
    }
    let grid = a.grid();
    let m = grid.len();
    let boxm = box_mask(s, grid, &ball);
    if let Some(i) = (0..boxm.len()).find(|&i| !boxm[i] && a.values()[i].norm_sqr() != 0.0) {
        return Err(Error::NotACarlesonAtom(format!("value at point {} node {} outside the box", i / m, i % m)));
    }
    let norm = a.l2_norm(s);
    let bound = ball.measure(s).powf(-0.5);
    if norm > bound * (1.0 + ATOM_TOL) {
        return Err(Error::NotACarlesonAtom(format!("norm {norm} exceeds {bound}")));
    }
    if ball.radius <= 1.0 {
        return Ok(vec![small_box_atom(s, a, ball, C64::new(1.0, 0.0))]);
    }
    let centers: Vec<BallRef> = ball.members(s).into_iter().map(|x| BallRef::new(x, 0.25)).collect();
    let cover: Vec<BallRef> = vitali_select(s, &centers).selected.iter().map(|b| b.dilate(4.0)).collect();
    let n = s.len();
    let count: Vec<f64> = (0..n).map(|y| cover.iter().filter(|b| b.contains(s, y)).count() as f64).collect();
    let mut out = Vec::with_capacity(cover.len());
    for b in &cover {
        // C¹(b) = b × grid since r(b) = 1.
        let mut piece = TentField::zeros(grid.clone(), n);
        for y in 0..n {
            if b.contains(s, y) {
                for k in 0..m {
                    piece.set(y, k, a.get(y, k) / count[y]);
                }
            }
        }
        let lambda = b.measure(s).sqrt() * piece.l2_norm(s);
        if lambda > 0.0 {
            let unit = piece.scale(C64::new(1.0 / lambda, 0.0));
            out.push(small_box_atom(s, &unit, *b, C64::new(lambda, 0.0)));
        }
    }
    Ok(out)
}

/// A box atom on a ball of radius `r ≤ 1` is, after dividing by `√c` with
/// `c = μ(2B)/μ(B)`, a tent atom on `2B`.
fn small_box_atom(s: &Space, a: &TentField, ball: BallRef, weight: C64) -> TentAtomRecord {
    let big = ball.dilate(2.0);
    let c = big.measure(s) / ball.measure(s);
    TentAtomRecord { field: a.scale(C64::new(1.0 / c.sqrt(), 0.0)), ball: big, weight: weight * c.sqrt() }
}

/// `‖u‖_{L^p_Q} = (Σ_j (μ(Q_j)^{1/p−1/2} ‖1_{Q_j} u‖₂)^p)^{1/p}`.
pub fn lq_norm(s: &Space, cubes: &UnitCubeStructure, u: &[C64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidP(p));
    }
    if u.len() != s.len() {
        return Err(Error::FieldLength { got: u.len(), expected: s.len() });
    }
    let mu = cubes.measures(s);
    let local: Vec<f64> = cubes
        .cubes
        .iter()
        .map(|q| q.iter().map(|&x| u[x].norm_sqr() * s.mass(x)).sum::<f64>().sqrt())
        .collect();
    if p.is_infinite() {
        return Ok(local.iter().zip(&mu).map(|(l, m)| l / m.sqrt()).fold(0.0, f64::max));
    }
    let e = 1.0 / p - 0.5;
    let sum: f64 = local.iter().zip(&mu).map(|(l, m)| (m.powf(e) * l).powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

/// Per-cube decomposition of `u` into `L¹_Q` pieces.
pub fn l1q_decompose(s: &Space, cubes: &UnitCubeStructure, u: &[C64]) -> Result<Vec<LQAtomRecord>> {
    if u.len() != s.len() {
        return Err(Error::FieldLength { got: u.len(), expected: s.len() });
    }
    if u.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonfiniteValues);
    }
    let mut out = Vec::new();
    for (j, q) in cubes.cubes.iter().enumerate() {
        let mu_q: f64 = q.iter().map(|&x| s.mass(x)).sum();
        let local = q.iter().map(|&x| u[x].norm_sqr() * s.mass(x)).sum::<f64>().sqrt();
        if local == 0.0 {
            continue;
        }
        let lambda = mu_q.sqrt() * local;
        let mut field = vec![C64::new(0.0, 0.0); s.len()];
        for &x in q {
            field[x] = u[x] / lambda;
        }
        let ball = cubes.anchors[j];
        out.push(LQAtomRecord {
            field,
            ball,
            weight: C64::new(lambda, 0.0),
            multiple: (ball.measure(s) / mu_q).sqrt(),
            cube: j,
        });
    }
    Ok(out)
}

/// Convenience: cubes and decomposition in one call.
pub fn l1q_decompose_space(s: &Space, u: &[C64]) -> Result<(UnitCubeStructure, Vec<LQAtomRecord>)> {
    let cubes = unit_cubes(s);
    let atoms = l1q_decompose(s, &cubes, u)?;
    Ok((cubes, atoms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::tent::{maximal_local, tent_norm, TimeGrid};
    use proptest::prelude::*;

    fn rel_err(a: &TentField, b: &TentField, s: &Space) -> f64 {
        let mut d = a.clone();
        d.add_scaled(C64::new(-1.0, 0.0), b).unwrap();
        d.l2_norm(s) / b.l2_norm(s).max(1e-300)
    }

    #[test]
    fn density_examples() {
        let s = Space::path(20, 0.2).unwrap();
        assert!(gamma_density(&s, &[true; 20], 0.9).iter().all(|&b| b));
        assert!(gamma_density(&s, &[false; 20], 0.9).iter().all(|&b| !b));
    }

    fn brute_density(s: &Space, set: &[bool], gamma: f64) -> Vec<bool> {
        (0..s.len())
            .map(|x| {
                let mut radii: Vec<f64> = (0..s.len()).map(|y| s.dist(x, y) * (1.0 + 1e-12) + 1e-15).filter(|&r| r <= 1.0).collect();
                radii.push(1.0);
                radii.into_iter().all(|r| {
                    let inside: f64 = (0..s.len()).filter(|&y| set[y] && s.dist(x, y) < r).map(|y| s.mass(y)).sum();
                    inside >= gamma * s.volume(x, r)
                })
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn density_matches_brute_force_and_maximal(seed in 0u64..10_000, gamma in 0.05f64..0.95) {
            let s = Space::path(20, 0.15).unwrap();
            let f = corpus::random_subset(seed, 20, 0.6);
            let mask = crate::covering::set_mask(&s, &f).unwrap();
            let got = gamma_density(&s, &mask, gamma);
            prop_assert_eq!(&got, &brute_density(&s, &mask, gamma));
            let open: Vec<bool> = mask.iter().map(|&b| !b).collect();
            let ind: Vec<f64> = open.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            let mo = maximal_local(&s, &ind);
            let star = density_dilation(&s, &open, gamma);
            for x in 0..20 {
                if (mo[x] - (1.0 - gamma)).abs() > 1e-12 {
                    prop_assert_eq!(star[x], mo[x] > 1.0 - gamma);
                }
            }
        }
    }

    #[test]
    fn zero_field_gives_nothing() {
        let s = Space::path(10, 0.3).unwrap();
        let f = TentField::zeros(TimeGrid::new(0.8, 8).unwrap(), 10);
        assert!(t1_decompose(&s, &f, &DensityConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn random_fields_reconstruct() {
        let s = Space::path(30, 0.25).unwrap();
        let g = TimeGrid::new(2f64.powf(-0.25), 32).unwrap();
        for seed in 0..5 {
            let f = corpus::random_tent_field(seed, 30, &g, 0.3);
            let atoms = t1_decompose(&s, &f, &DensityConfig::default()).unwrap();
            assert!(!atoms.is_empty());
            for a in &atoms {
                let r = validate_atom(&s, a);
                assert!(r.pass, "{r:?}");
                assert!(a.ball.radius <= 1.25 + 1e-12);
            }
            assert!(rel_err(&reconstruct(&atoms, &f), &f, &s) <= 1e-10);
            let ratio = atoms.iter().map(|a| a.weight.norm()).sum::<f64>() / tent_norm(&s, &f, 1.0).unwrap();
            assert!(ratio.is_finite() && ratio < 100.0, "ratio {ratio}");
        }
    }

    #[test]
    fn validate_reports_slack() {
        let s = Space::path(6, 0.5).unwrap();
        let g = TimeGrid::new(0.5, 4).unwrap();
        let ball = BallRef::new(2, 1.5);
        let zero = TentAtomRecord { field: TentField::zeros(g.clone(), 6), ball, weight: C64::new(1.0, 0.0) };
        assert!(validate_atom(&s, &zero).pass);
        let mut f = TentField::zeros(g.clone(), 6);
        // (2, t = 0.5) lies in T¹(B): distance to B^c is 1.5.
        f.set(2, 1, C64::new(1.0, 0.0));
        let target = 1.01 * ball.measure(&s).powf(-0.5);
        let f = f.scale(C64::new(target / f.l2_norm(&s), 0.0));
        let r = validate_atom(&s, &TentAtomRecord { field: f, ball, weight: C64::new(1.0, 0.0) });
        assert!(!r.pass && !r.norm_ok && r.support_ok);
        assert!((r.slack - 0.01).abs() < 1e-12);
    }

    fn carleson_atom(s: &Space, g: &TimeGrid, ball: BallRef, seed: u64) -> TentField {
        let mut f = corpus::random_tent_field(seed, s.len(), g, 0.8);
        let boxm = box_mask(s, g, &ball);
        for (i, v) in f.values_mut().iter_mut().enumerate() {
            if !boxm[i] {
                *v = C64::new(0.0, 0.0);
            }
        }
        let k = ball.measure(s).powf(-0.5) / f.l2_norm(s);
        f.scale(C64::new(k, 0.0))
    }

    #[test]
    fn carleson_split_branches() {
        let g = TimeGrid::new(0.7, 10).unwrap();
        let s = Space::path(20, 1.0).unwrap();
        let small = BallRef::new(5, 0.5);
        let a = carleson_atom(&s, &g, small, 1);
        let out = split_carleson_atom(&s, &a, small).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].ball, BallRef::new(5, 1.0));

        let one = Space::path(1, 1.0).unwrap();
        let b = BallRef::new(0, 3.0);
        let a = carleson_atom(&one, &g, b, 2);
        assert_eq!(split_carleson_atom(&one, &a, b).unwrap().len(), 1);

        let b = BallRef::new(9, 6.0);
        assert_eq!(b.members(&s).len(), 11);
        let b = BallRef::new(9, 6.5);
        assert_eq!(b.members(&s).len(), 13);
        let a = carleson_atom(&s, &g, b, 3);
        let out = split_carleson_atom(&s, &a, b).unwrap();
        assert!(out.len() > 1);
        for r in &out {
            assert!(validate_atom(&s, r).pass);
        }
        assert!(rel_err(&reconstruct(&out, &a), &a, &s) < 1e-13);
    }

    #[test]
    fn carleson_split_rejects_non_atoms() {
        let g = TimeGrid::new(0.7, 6).unwrap();
        let s = Space::path(8, 1.0).unwrap();
        let mut f = TentField::zeros(g, 8);
        f.set(7, 3, C64::new(0.1, 0.0));
        assert!(matches!(split_carleson_atom(&s, &f, BallRef::new(0, 2.0)), Err(Error::NotACarlesonAtom(_))));
    }

    #[test]
    fn lq_norm_examples() {
        let s = corpus::random_plane(5, 40, 0.4);
        let cubes = unit_cubes(&s);
        let u = corpus::random_complex_vec(8, 40);
        let two = lq_norm(&s, &cubes, &u, 2.0).unwrap();
        assert!((two - l2(&s, &u)).abs() < 1e-13 * two);
        assert_eq!(lq_norm(&s, &cubes, &vec![C64::new(0.0, 0.0); 40], 1.0).unwrap(), 0.0);
        let mut oracle = 0.0;
        for q in &cubes.cubes {
            let mu: f64 = q.iter().map(|&x| s.mass(x)).sum();
            let mut e = 0.0;
            for &x in q {
                e += u[x].norm_sqr() * s.mass(x);
            }
            oracle += mu.sqrt() * e.sqrt();
        }
        let one = lq_norm(&s, &cubes, &u, 1.0).unwrap();
        assert!((one - oracle).abs() < 1e-13 * oracle);
        assert_eq!(lq_norm(&s, &cubes, &u, 0.9).unwrap_err(), Error::InvalidP(0.9));
    }

    #[test]
    fn l1q_atoms() {
        let s = Space::path(40, 1.0).unwrap();
        let (cubes, atoms) = l1q_decompose_space(&s, &vec![C64::new(0.0, 0.0); 40]).unwrap();
        assert!(atoms.is_empty());
        let mut u = vec![C64::new(0.0, 0.0); 40];
        let q0 = cubes.cubes[3].clone();
        for &x in &q0 {
            u[x] = C64::new(1.0, 2.0);
        }
        let atoms = l1q_decompose(&s, &cubes, &u).unwrap();
        assert_eq!(atoms.len(), 1);
        let mu = q0.len() as f64;
        assert!((atoms[0].weight.re - mu.sqrt() * (5.0 * mu).sqrt()).abs() < 1e-12);
        let u = corpus::random_complex_vec(2, 40);
        let atoms = l1q_decompose(&s, &cubes, &u).unwrap();
        let total: f64 = atoms.iter().map(|a| a.weight.norm()).sum();
        let norm = lq_norm(&s, &cubes, &u, 1.0).unwrap();
        assert!((total - norm).abs() <= 1e-12 * norm);
        let mut back = vec![C64::new(0.0, 0.0); 40];
        for a in &atoms {
            assert!(validate_atom(&s, a).pass);
            let (f, w) = a.normalized();
            assert!(l2(&s, &f) <= a.ball.measure(&s).powf(-0.5) * (1.0 + 1e-12));
            for x in 0..40 {
                back[x] += f[x] * w;
            }
        }
        for x in 0..40 {
            assert!((back[x] - u[x]).norm() < 1e-14);
        }
    }
}
