//! Seeded test corpora: random spaces, ball families, subsets, fields and vectors.
//!
//! Every generator draws from a ChaCha8 stream keyed by the seed, so a seed
//! reproduces the same object on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{FormField, WeightedComplex};
use crate::covering::BallRef;
use crate::space::Space;
use crate::tent::{TentField, TimeGrid};
use crate::C64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` uniform points in a square sized so the mean spacing is about `spacing`,
/// with masses in `[0.5, 2)`.
pub fn random_plane(seed: u64, n: usize, spacing: f64) -> Space {
    let mut r = rng(seed);
    let side = spacing * (n as f64).sqrt();
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = [r.gen::<f64>() * side, r.gen::<f64>() * side];
        if pts.iter().all(|q| (q[0] - p[0]).hypot(q[1] - p[1]) > 1e-9) {
            pts.push(p);
        }
    }
    let mass = (0..n).map(|_| r.gen_range(0.5..2.0)).collect();
    Space::from_plane(&pts, mass).expect("distinct points").named(format!("plane{n}s{seed}"))
}

/// Random connected graph: a random spanning tree plus extra chords, with edge
/// lengths in `[0.2, 1.5)` and masses in `[0.5, 2)`.
pub fn random_graph(seed: u64, n: usize, extra: usize) -> Space {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((r.gen_range(0..i), i, r.gen_range(0.2..1.5)));
    }
    for _ in 0..extra {
        let (a, b) = (r.gen_range(0..n), r.gen_range(0..n));
        if a != b {
            edges.push((a, b, r.gen_range(0.2..1.5)));
        }
    }
    let mass = (0..n).map(|_| r.gen_range(0.5..2.0)).collect();
    Space::from_graph(n, &edges, mass).expect("connected by construction").named(format!("graph{n}s{seed}"))
}

/// The covering corpus: a mix of planar clouds and random graphs, 25 seeds.
pub fn space_corpus(count: usize, max_n: usize) -> Vec<Space> {
    (0..count as u64)
        .map(|k| {
            let n = 20 + (k as usize * 97) % (max_n - 19);
            if k % 3 == 2 {
                random_graph(1000 + k, n, n / 4)
            } else {
                random_plane(1000 + k, n, 0.15 + 0.1 * (k % 4) as f64)
            }
        })
        .collect()
}

/// `k` balls with random centers and log-uniform radii in `[rmin, rmax]`.
pub fn random_balls(s: &Space, seed: u64, k: usize, rmin: f64, rmax: f64) -> Vec<BallRef> {
    let mut r = rng(seed);
    (0..k)
        .map(|_| {
            let t: f64 = r.gen();
            BallRef::new(r.gen_range(0..s.len()), rmin * (rmax / rmin).powf(t))
        })
        .collect()
}

/// Each index in `0..n` independently with probability `p`.
pub fn random_subset(seed: u64, n: usize, p: f64) -> Vec<usize> {
    let mut r = rng(seed);
    (0..n).filter(|_| r.gen_bool(p)).collect()
}

pub fn random_complex_vec(seed: u64, n: usize) -> Vec<C64> {
    let mut r = rng(seed);
    (0..n).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()
}

pub fn random_real_vec(seed: u64, n: usize) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

/// A random tent field: each (point, node) entry is nonzero with probability
/// `density`, with a profile that grows toward small `t` to exercise many levels.
pub fn random_tent_field(seed: u64, n: usize, grid: &TimeGrid, density: f64) -> TentField {
    let mut r = rng(seed);
    let m = grid.len();
    let mut values = vec![C64::new(0.0, 0.0); n * m];
    for x in 0..n {
        for k in 0..m {
            if r.gen_bool(density) {
                let amp = 10f64.powf(r.gen_range(-2.0..1.0));
                values[x * m + k] = C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * amp;
            }
        }
    }
    TentField::new(grid.clone(), n, values).expect("sized to fit")
}

/// Random complex form field with entries in the unit square.
pub fn random_form(seed: u64, c: &WeightedComplex) -> FormField {
    FormField::new(random_complex_vec(seed, c.len()))
}
