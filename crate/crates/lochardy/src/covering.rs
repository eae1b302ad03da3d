//! Vitali selection, Whitney covers with a partition of unity, and unit cubes.

use serde::{Deserialize, Serialize};

use crate::space::Space;
use crate::{Error, Result};

/// An open ball `B(center, radius)` of a [`Space`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallRef {
    pub center: usize,
    pub radius: f64,
}

impl BallRef {
    pub fn new(center: usize, radius: f64) -> BallRef {
        BallRef { center, radius }
    }

    pub fn dilate(&self, factor: f64) -> BallRef {
        BallRef { center: self.center, radius: self.radius * factor }
    }

    #[inline]
    pub fn contains(&self, s: &Space, y: usize) -> bool {
        s.dist(self.center, y) < self.radius
    }

    pub fn members(&self, s: &Space) -> Vec<usize> {
        s.ball(self.center, self.radius)
    }

    pub fn mask(&self, s: &Space) -> Vec<bool> {
        s.ball_mask(self.center, self.radius)
    }

    pub fn measure(&self, s: &Space) -> f64 {
        s.volume(self.center, self.radius)
    }
}

/// Fixed-width bitset over the points of a space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct PointSet(Vec<u64>);

impl PointSet {
    pub(crate) fn of_ball(s: &Space, b: &BallRef) -> PointSet {
        let mut bits = vec![0u64; s.len().div_ceil(64)];
        let (order, _) = s.by_distance(b.center);
        for &y in &order[..s.ball_count(b.center, b.radius)] {
            bits[y as usize / 64] |= 1 << (y % 64);
        }
        PointSet(bits)
    }

    pub(crate) fn intersects(&self, o: &PointSet) -> bool {
        self.0.iter().zip(&o.0).any(|(a, b)| a & b != 0)
    }
}

/// Outcome of the greedy Vitali selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vitali {
    pub selected: Vec<BallRef>,
    /// Position of each selected ball in the input list.
    pub selected_index: Vec<usize>,
    /// For each input ball, the position in `selected` of the ball it is assigned to.
    pub assignment: Vec<usize>,
}

/// Ratio between consecutive radius classes of the selection.
pub const VITALI_DELTA: f64 = 2.0 / 3.0;

/// Radius class `k ≥ 1` with `δ^k R < r ≤ δ^{k−1} R`.
fn radius_class(r: f64, rmax: f64) -> u32 {
    let mut k = 1 + ((rmax / r).ln() / (1.0 / VITALI_DELTA).ln()).floor().max(0.0) as i32;
    while k > 1 && r > VITALI_DELTA.powi(k - 1) * rmax {
        k -= 1;
    }
    while r <= VITALI_DELTA.powi(k) * rmax {
        k += 1;
    }
    k as u32
}

/// Greedy disjoint selection, one radius class at a time from the largest.
///
/// Within a class candidates go by descending radius, then ascending center.
/// Each input ball is assigned to the first selected ball meeting it, which
/// lies in the same or a larger class, so the input sits inside its 4-fold dilate.
pub fn vitali_select(s: &Space, balls: &[BallRef]) -> Vitali {
    if balls.is_empty() {
        return Vitali { selected: vec![], selected_index: vec![], assignment: vec![] };
    }
    let rmax = balls.iter().map(|b| b.radius).fold(0.0, f64::max);
    let sets: Vec<PointSet> = balls.iter().map(|b| PointSet::of_ball(s, b)).collect();
    let mut idx: Vec<usize> = (0..balls.len()).collect();
    let class: Vec<u32> = balls.iter().map(|b| radius_class(b.radius, rmax)).collect();
    idx.sort_by(|&a, &b| {
        class[a]
            .cmp(&class[b])
            .then(balls[b].radius.total_cmp(&balls[a].radius))
            .then(balls[a].center.cmp(&balls[b].center))
            .then(a.cmp(&b))
    });
    let mut chosen: Vec<usize> = Vec::new();
    for &i in &idx {
        if chosen.iter().all(|&j| !sets[i].intersects(&sets[j])) {
            chosen.push(i);
        }
    }
    let assignment = (0..balls.len())
        .map(|i| {
            chosen
                .iter()
                .position(|&j| sets[i].intersects(&sets[j]))
                .expect("maximality leaves every ball meeting a selected one")
        })
        .collect();
    Vitali {
        selected: chosen.iter().map(|&i| balls[i]).collect(),
        selected_index: chosen,
        assignment,
    }
}

/// Whitney cover of an open set with its indicator partition of unity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhitneyCover {
    pub open_set: Vec<usize>,
    pub h: f64,
    pub balls: Vec<BallRef>,
    pub dilates: Vec<BallRef>,
    /// `partition[j][x] = φ_j(x)`.
    pub partition: Vec<Vec<f64>>,
    pub intersection_bound: usize,
}

/// Whitney cover of `O ⊊ X` with radii `r_j = min(ρ(x_j, O^c), h)/8`.
pub fn whitney_cover(s: &Space, o: &[usize], h: f64) -> Result<WhitneyCover> {
    let mask = set_mask(s, o)?;
    let count = mask.iter().filter(|&&b| b).count();
    if count == 0 {
        return Err(Error::OIsEmpty);
    }
    if count == s.len() {
        return Err(Error::OIsAllOfX);
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidRadius(h));
    }
    Ok(whitney_from_mask(s, &mask, h))
}

pub(crate) fn set_mask(s: &Space, o: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; s.len()];
    for &x in o {
        *mask.get_mut(x).ok_or(Error::PointOutOfRange(x))? = true;
    }
    Ok(mask)
}

/// Whitney cover for any nonempty mask, using `ρ(x, ∅) = +∞` when `O = X`.
pub(crate) fn whitney_from_mask(s: &Space, mask: &[bool], h: f64) -> WhitneyCover {
    let n = s.len();
    let open_set: Vec<usize> = (0..n).filter(|&x| mask[x]).collect();
    let candidates: Vec<BallRef> = open_set
        .iter()
        .map(|&x| BallRef::new(x, s.dist_to_complement(x, mask).min(h) / 8.0))
        .collect();
    let v = vitali_select(s, &candidates);
    let balls = v.selected;
    let dilates: Vec<BallRef> = balls.iter().map(|b| b.dilate(4.0)).collect();
    let mut psi: Vec<Vec<f64>> = dilates
        .iter()
        .map(|d| (0..n).map(|x| if mask[x] && d.contains(s, x) { 1.0 } else { 0.0 }).collect())
        .collect();
    for x in 0..n {
        let total: f64 = psi.iter().map(|p| p[x]).sum();
        if total > 0.0 {
            for p in psi.iter_mut() {
                p[x] /= total;
            }
        }
    }
    let sets: Vec<PointSet> = dilates.iter().map(|d| PointSet::of_ball(s, d)).collect();
    let intersection_bound = sets
        .iter()
        .map(|a| sets.iter().filter(|b| a.intersects(b)).count())
        .max()
        .unwrap_or(0);
    WhitneyCover { open_set, h, balls, dilates, partition: psi, intersection_bound }
}

/// Disjoint cubes sandwiched between radius-1/4 and radius-1 balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCubeStructure {
    pub cubes: Vec<Vec<usize>>,
    /// The radius-1 balls `B_j` with `δB_j ⊆ Q_j ⊆ B_j`.
    pub anchors: Vec<BallRef>,
    pub delta: f64,
    /// Cube index of every point.
    pub cube_of: Vec<usize>,
}

impl UnitCubeStructure {
    pub fn measures(&self, s: &Space) -> Vec<f64> {
        self.cubes.iter().map(|q| q.iter().map(|&x| s.mass(x)).sum()).collect()
    }
}

/// Unit cube structure from a Vitali selection of all radius-1/4 balls.
///
/// With selected balls `B_j`, the cubes are `Q_j = 4B_j \ ⋃_{k<j} Q_k \ ⋃_{k>j} B_k`.
pub fn unit_cubes(s: &Space) -> UnitCubeStructure {
    let n = s.len();
    let small: Vec<BallRef> = (0..n).map(|x| BallRef::new(x, 0.25)).collect();
    let sel = vitali_select(s, &small).selected;
    let mut cube_of = vec![usize::MAX; n];
    let mut cubes = Vec::with_capacity(sel.len());
    for (j, b) in sel.iter().enumerate() {
        let q: Vec<usize> = (0..n)
            .filter(|&x| {
                cube_of[x] == usize::MAX
                    && s.dist(b.center, x) < 1.0
                    && !sel[j + 1..].iter().any(|c| c.contains(s, x))
            })
            .collect();
        for &x in &q {
            cube_of[x] = j;
        }
        cubes.push(q);
    }
    UnitCubeStructure {
        cubes,
        anchors: sel.iter().map(|b| b.dilate(4.0)).collect(),
        delta: 0.25,
        cube_of,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> Space {
        Space::from_line(xs, vec![1.0; xs.len()]).unwrap()
    }

    fn check_vitali(s: &Space, balls: &[BallRef], v: &Vitali) {
        let sets: Vec<Vec<usize>> = v.selected.iter().map(|b| b.members(s)).collect();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                assert!(sets[i].iter().all(|x| !sets[j].contains(x)), "selected {i},{j} meet");
            }
        }
        for (i, b) in balls.iter().enumerate() {
            let big = v.selected[v.assignment[i]].dilate(4.0);
            for x in b.members(s) {
                assert!(big.contains(s, x), "ball {i} leaks out of its assigned dilate");
            }
        }
    }

    #[test]
    fn vitali_on_the_line() {
        let s = line(&[0.0, 0.5, 3.0]);
        let balls = [BallRef::new(0, 1.0), BallRef::new(1, 1.0), BallRef::new(2, 1.0)];
        let v = vitali_select(&s, &balls);
        assert_eq!(v.selected, vec![balls[0], balls[2]]);
        assert_eq!(v.assignment, vec![0, 0, 1]);
        check_vitali(&s, &balls, &v);
    }

    #[test]
    fn vitali_trivial_cases() {
        let s = line(&[0.0, 10.0]);
        assert!(vitali_select(&s, &[]).selected.is_empty());
        let one = [BallRef::new(1, 2.0)];
        let v = vitali_select(&s, &one);
        assert_eq!(v.selected, one.to_vec());
        assert_eq!(v.assignment, vec![0]);
        let two = [BallRef::new(0, 1.0), BallRef::new(1, 1.0)];
        assert_eq!(vitali_select(&s, &two).selected.len(), 2);
    }

    #[test]
    fn radius_classes_follow_the_ratio() {
        assert_eq!(radius_class(1.0, 1.0), 1);
        assert_eq!(radius_class(2.0 / 3.0 + 1e-12, 1.0), 1);
        assert_eq!(radius_class(2.0 / 3.0, 1.0), 2);
        assert_eq!(radius_class(0.3, 1.0), 3);
    }

    fn check_whitney(s: &Space, o: &[usize], w: &WhitneyCover) {
        let mask = set_mask(s, o).unwrap();
        for (j, b) in w.balls.iter().enumerate() {
            let expect = s.dist_to_complement(b.center, &mask).min(w.h) / 8.0;
            assert_eq!(b.radius, expect);
            for k in j + 1..w.balls.len() {
                let m = w.balls[k].members(s);
                assert!(b.members(s).iter().all(|x| !m.contains(x)));
            }
        }
        let mut union: Vec<usize> = w.dilates.iter().flat_map(|d| d.members(s)).collect();
        union.sort_unstable();
        union.dedup();
        let mut o = o.to_vec();
        o.sort_unstable();
        o.dedup();
        assert_eq!(union, o);
        for x in 0..s.len() {
            let total: f64 = w.partition.iter().map(|p| p[x]).sum();
            let want = if mask[x] { 1.0 } else { 0.0 };
            assert!((total - want).abs() <= 1e-12);
        }
        for (j, p) in w.partition.iter().enumerate() {
            for x in 0..s.len() {
                if p[x] > 0.0 {
                    assert!(w.dilates[j].contains(s, x));
                }
            }
            for x in w.balls[j].members(s) {
                assert!(p[x] > 0.0);
            }
        }
    }

    #[test]
    fn whitney_on_a_path() {
        let s = Space::path(21, 1.0).unwrap();
        let o: Vec<usize> = (5..=15).collect();
        let w = whitney_cover(&s, &o, 0.5).unwrap();
        for b in &w.balls {
            assert_eq!(b.radius, 1.0 / 16.0);
        }
        check_whitney(&s, &o, &w);
    }

    #[test]
    fn whitney_single_point_and_errors() {
        let s = line(&[0.0, 0.3, 2.0]);
        let w = whitney_cover(&s, &[0], 10.0).unwrap();
        assert_eq!(w.balls, vec![BallRef::new(0, 0.3 / 8.0)]);
        assert_eq!(whitney_cover(&s, &[], 1.0).unwrap_err(), Error::OIsEmpty);
        assert_eq!(whitney_cover(&s, &[0, 1, 2], 1.0).unwrap_err(), Error::OIsAllOfX);
    }

    fn check_cubes(s: &Space, u: &UnitCubeStructure) {
        let mut all: Vec<usize> = u.cubes.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..s.len()).collect::<Vec<_>>());
        for (q, b) in u.cubes.iter().zip(&u.anchors) {
            assert_eq!(b.radius, 1.0);
            for x in b.dilate(u.delta).members(s) {
                assert!(q.contains(&x));
            }
            for &x in q {
                assert!(b.contains(s, x));
            }
        }
    }

    #[test]
    fn unit_cube_examples() {
        let one = line(&[0.0]);
        let u = unit_cubes(&one);
        assert_eq!(u.cubes, vec![vec![0]]);
        assert_eq!(u.anchors[0].radius, 1.0);
        let p10 = Space::path(10, 1.0).unwrap();
        check_cubes(&p10, &unit_cubes(&p10));
        let far = line(&[0.0, 10.0]);
        assert_eq!(unit_cubes(&far).cubes.len(), 2);
    }

    fn plane(seed: u64, n: usize) -> Space {
        crate::corpus::random_plane(seed, n, 0.3)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn vitali_random_families(seed in 0u64..1000, n in 5usize..60, k in 1usize..80) {
            let s = plane(seed, n);
            let balls = crate::corpus::random_balls(&s, seed ^ 7, k, 0.05, 2.0);
            let v = vitali_select(&s, &balls);
            check_vitali(&s, &balls, &v);
        }

        #[test]
        fn whitney_random_open_sets(seed in 0u64..1000, n in 5usize..60, h in 0.05f64..3.0) {
            let s = plane(seed, n);
            let o = crate::corpus::random_subset(seed ^ 3, n, 0.5);
            prop_assume!(!o.is_empty() && o.len() < n);
            let w = whitney_cover(&s, &o, h).unwrap();
            check_whitney(&s, &o, &w);
        }

        #[test]
        fn unit_cubes_random(seed in 0u64..1000, n in 1usize..80) {
            let s = plane(seed, n);
            check_cubes(&s, &unit_cubes(&s));
        }
    }
}
