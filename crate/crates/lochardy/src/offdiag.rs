//! Off-diagonal decay of resolvents and functions of `D`, measured over
//! shells of simplex distance and compared against exponential bounds.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{weighted_norm, DiracOperator, WeightedComplex};
use crate::holo::{HoloFn, SpectralCalculus};
use crate::{Error, Result, C64};

/// Numerically zero block norms, excluded from rate fits.
pub const NORM_FLOOR: f64 = 1e-14;

/// `‖1_E T 1_F‖` in the weighted inner product.
pub fn block_norm(t: &DMatrix<C64>, e: &[usize], f: &[usize], w: &[f64]) -> Result<f64> {
    if e.is_empty() || f.is_empty() {
        return Err(Error::EmptySet);
    }
    let sub = DMatrix::from_fn(e.len(), f.len(), |i, j| t[(e[i], f[j])]);
    let we: Vec<f64> = e.iter().map(|&i| w[i]).collect();
    let wf: Vec<f64> = f.iter().map(|&j| w[j]).collect();
    let scaled = DMatrix::from_fn(e.len(), f.len(), |i, j| sub[(i, j)] * (we[i].sqrt() / wf[j].sqrt()));
    Ok(scaled.singular_values().iter().copied().fold(0.0, f64::max))
}

/// The weighted adjoint `W^{-1} T^H W`.
pub fn weighted_adjoint(t: &DMatrix<C64>, w: &[f64]) -> DMatrix<C64> {
    let n = t.nrows();
    DMatrix::from_fn(n, n, |i, j| t[(j, i)].conj() * (w[j] / w[i]))
}

/// `(zI − D)^{-1}` as a dense matrix.
pub fn resolvent(d: &DiracOperator, z: C64) -> Result<DMatrix<C64>> {
    let n = d.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let v = C64::new(-d.matrix[(i, j)], 0.0);
        if i == j {
            v + z
        } else {
            v
        }
    });
    let inv = m.try_inverse().ok_or(Error::ResolventSolveFailure(z))?;
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::ResolventSolveFailure(z));
    }
    Ok(inv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    /// `ρ(E, F_k)`.
    pub rho: f64,
    pub members: Vec<usize>,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub source: Vec<usize>,
    pub shells: Vec<Shell>,
    /// Least-squares slope of `−ln‖·‖` against `ρ`; `None` when fewer than
    /// two shells carry a nonzero norm (decay faster than measurable).
    pub rate: Option<f64>,
    pub prefactor: Option<f64>,
}

impl DecayProfile {
    /// Shell norms that are not numerically zero never increase with distance.
    pub fn is_monotone(&self) -> bool {
        self.shells.windows(2).all(|w| w[1].norm <= w[0].norm * (1.0 + 1e-12) + NORM_FLOOR)
    }

    /// Rows `(ρ, measured)`.
    pub fn rows(&self) -> Vec<(f64, f64)> {
        self.shells.iter().map(|s| (s.rho, s.norm)).collect()
    }
}

/// Split the simplices into bands `[kw, (k+1)w)` of distance from `E`.
pub fn shells(c: &WeightedComplex, e: &[usize], width: f64) -> Result<Vec<(f64, Vec<usize>)>> {
    if e.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = c.len();
    let dist = c.simplex_distances();
    let rho: Vec<f64> = (0..n).map(|y| e.iter().map(|&x| dist[x * n + y]).fold(f64::INFINITY, f64::min)).collect();
    let mut bands: Vec<Vec<usize>> = Vec::new();
    for (y, &r) in rho.iter().enumerate() {
        if !r.is_finite() {
            continue;
        }
        let k = (r / width).floor() as usize;
        if bands.len() <= k {
            bands.resize(k + 1, Vec::new());
        }
        bands[k].push(y);
    }
    Ok(bands
        .into_iter()
        .filter(|b| !b.is_empty())
        .map(|b| (b.iter().map(|&y| rho[y]).fold(f64::INFINITY, f64::min), b))
        .collect())
}

fn fit(shells: &[Shell]) -> (Option<f64>, Option<f64>) {
    let pts: Vec<(f64, f64)> = shells.iter().filter(|s| s.norm > NORM_FLOOR).map(|s| (s.rho, s.norm.ln())).collect();
    if pts.len() < 2 {
        return (None, None);
    }
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return (None, None);
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (Some(-slope), Some((my - slope * mx).exp()))
}

/// Shell profile of an arbitrary operator matrix.
pub fn operator_profile(c: &WeightedComplex, t: &DMatrix<C64>, e: &[usize], width: f64) -> Result<DecayProfile> {
    let w = c.weights();
    let mut out = Vec::new();
    for (rho, members) in shells(c, e, width)? {
        let norm = block_norm(t, e, &members, w)?;
        out.push(Shell { rho, members, norm });
    }
    let (rate, prefactor) = fit(&out);
    Ok(DecayProfile { source: e.to_vec(), shells: out, rate, prefactor })
}

pub fn resolvent_profile(c: &WeightedComplex, z: C64, e: &[usize], width: f64) -> Result<DecayProfile> {
    operator_profile(c, &resolvent(&c.dirac(), z)?, e, width)
}

/// Shell profile of `f(D)`, computed on the self-adjoint route.
pub fn psi_profile(c: &WeightedComplex, calc: &SpectralCalculus, f: &HoloFn, e: &[usize], width: f64) -> Result<DecayProfile> {
    operator_profile(c, &calc.matrix(f)?, e, width)
}

/// Constants entering the resolvent bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    /// `C_{θ,r}` (`1/sin θ` for self-adjoint `D`).
    pub c_theta_r: f64,
    pub c_d: f64,
    pub a: f64,
    pub b: f64,
}

/// `(C_{θ,r}/|z|) ⟨1/(ρ|z|)⟩^b exp(−aρ|z|/(C_D C_{θ,r}))` with `⟨x⟩ = min(1, x)`.
pub fn resolvent_bound(k: &BoundConstants, z: C64, rho: f64) -> f64 {
    let m = z.norm();
    let bracket = if rho == 0.0 { 1.0 } else { (1.0 / (rho * m)).min(1.0) };
    k.c_theta_r / m * bracket.powf(k.b) * (-k.a * rho * m / (k.c_d * k.c_theta_r)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub rho: f64,
    pub measured: f64,
    pub bound: f64,
    /// `measured / bound`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    /// Smallest `c` with `measured ≤ c·bound` on every shell.
    pub c_needed: f64,
    pub c_allowed: Option<f64>,
    /// First shell (by index) exceeding `c_allowed·bound`.
    pub offending: Option<usize>,
    pub pass: bool,
}

/// Check `measured ≤ c·bound(ρ)` shell by shell, where `bound` is any shape.
pub fn verify_shape(profile: &DecayProfile, bound: impl Fn(f64) -> f64, c_allowed: Option<f64>) -> BoundReport {
    let rows: Vec<BoundRow> = profile
        .shells
        .iter()
        .map(|s| {
            let b = bound(s.rho);
            let measured = if s.norm <= NORM_FLOOR { 0.0 } else { s.norm };
            let ratio = if measured == 0.0 { 0.0 } else { measured / b };
            BoundRow { rho: s.rho, measured, bound: b, ratio }
        })
        .collect();
    let c_needed = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let offending = c_allowed.and_then(|c| rows.iter().position(|r| r.ratio > c * (1.0 + 1e-12)));
    let pass = c_needed.is_finite() && offending.is_none();
    BoundReport { rows, c_needed, c_allowed, offending, pass }
}

/// The resolvent bound, checked on a profile measured at `z`.
pub fn verify_bound(profile: &DecayProfile, z: C64, k: &BoundConstants, c_allowed: Option<f64>) -> BoundReport {
    verify_shape(profile, |rho| resolvent_bound(k, z, rho), c_allowed)
}

/// `⟨t/ρ⟩^M exp(−a r ρ/(C_D C_{θ,r}))`, the shape for `ψ_t(D)` blocks.
pub fn psi_bound(t: f64, m: f64, r: f64, k: &BoundConstants, rho: f64) -> f64 {
    let bracket = if rho == 0.0 { 1.0 } else { (t / rho).min(1.0) };
    bracket.powf(m) * (-k.a * r * rho / (k.c_d * k.c_theta_r)).exp()
}

/// `c_needed` for each decay parameter `a`.
pub fn sweep_a(profile: &DecayProfile, z: C64, base: &BoundConstants, values: &[f64]) -> Vec<(f64, f64)> {
    values.iter().map(|&a| (a, verify_bound(profile, z, &BoundConstants { a, ..*base }, None).c_needed)).collect()
}

/// `max / min` over the positive entries (1 when fewer than two).
pub fn spread(values: &[f64]) -> f64 {
    let pos: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0 && v.is_finite()).collect();
    if pos.len() < 2 {
        return 1.0;
    }
    pos.iter().copied().fold(0.0, f64::max) / pos.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Points on `∂S_{θ,r}`: half on the rays `arg z = ±θ, π ± θ` beyond the
/// disc, half on the arcs of `|z| = r` outside the bisector.
pub fn boundary_samples(theta: f64, r: f64, count: usize) -> Vec<C64> {
    use std::f64::consts::PI;
    let arcs = count / 2;
    let rays = count - arcs;
    let mut out = Vec::with_capacity(count);
    for k in 0..arcs {
        let frac = (k / 2) as f64 / ((arcs + 1) / 2).max(1) as f64;
        let phi = theta + (PI - 2.0 * theta) * (0.5 * frac + 0.25);
        let z = C64::from_polar(r, phi);
        out.push(if k % 2 == 0 { z } else { z.conj() });
    }
    for k in 0..rays {
        let rho = r * 2f64.powi(1 + (k / 4) as i32);
        let a = [theta, PI - theta, -theta, PI + theta][k % 4];
        out.push(C64::from_polar(rho, a));
    }
    out
}

/// Measured commutator constant `sup_η ‖[D, ηI]‖/Lip(η)` over distance
/// functions from a few vertices and random vertex functions.
pub fn measured_commutator_constant(c: &WeightedComplex, seed: u64, samples: usize) -> f64 {
    let nv = c.n_vertices();
    if nv < 2 || c.n_edges() == 0 {
        return 0.0;
    }
    let mut r = crate::corpus::rng(seed);
    let mut best: f64 = 0.0;
    for k in 0..samples {
        let eta: Vec<f64> = if k % 2 == 0 {
            let v = r.gen_range(0..nv);
            (0..nv).map(|x| c.simplex_distance(v, x).min(1e6)).collect()
        } else {
            (0..nv).map(|_| r.gen_range(-1.0..1.0)).collect()
        };
        best = best.max(c.commutator_profile(&eta).0);
    }
    best
}

/// `‖T‖` on the whole space, for the spectral comparison `‖ψ_t(D)‖ ≤ sup|ψ_t|`.
pub fn full_norm(t: &DMatrix<C64>, w: &[f64]) -> f64 {
    weighted_norm(t, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holo::Calculus;
    use std::f64::consts::PI;

    fn all(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn block_norm_examples() {
        let n = 6;
        let diag = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) });
        let w = vec![1.0; n];
        assert_eq!(block_norm(&diag, &[0, 1], &[2, 3], &w).unwrap(), 0.0);
        let id = DMatrix::<C64>::identity(n, n);
        assert!((block_norm(&id, &all(n), &all(n), &[2.0, 1.0, 3.0, 1.0, 1.0, 5.0]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(block_norm(&id, &[], &[1], &w), Err(Error::EmptySet));
    }

    #[test]
    fn block_norm_matches_dense_svd_and_adjoint() {
        let c = WeightedComplex::path(20);
        let r = resolvent(&c.dirac(), C64::new(0.0, 2.0)).unwrap();
        let f: Vec<usize> = (c.len() - 5..c.len()).collect();
        let got = block_norm(&r, &[0], &f, c.weights()).unwrap();
        // Oracle: unit weights, so the plain 1×5 row norm.
        let want: f64 = f.iter().map(|&j| r[(0, j)].norm_sqr()).sum::<f64>().sqrt();
        assert!((got - want).abs() < 1e-10 * want.max(1e-300));
        let adj = weighted_adjoint(&r, c.weights());
        let back = block_norm(&adj, &f, &[0], c.weights()).unwrap();
        assert!((got - back).abs() < 1e-10 * got.max(1e-300));
    }

    #[test]
    fn diagonal_operator_profile_is_flagged() {
        let c = WeightedComplex::path(8);
        let id = DMatrix::<C64>::identity(c.len(), c.len());
        let p = operator_profile(&c, &id, &[0], 2.0).unwrap();
        assert!(p.shells[1..].iter().all(|s| s.norm == 0.0));
        assert_eq!(p.rate, None);
        let k = BoundConstants { c_theta_r: 2.0, c_d: 1.0, a: 0.5, b: 0.0 };
        let rep = verify_bound(&p, C64::new(0.0, 1.0), &k, Some(1.0));
        assert!(rep.pass);
    }

    #[test]
    fn path_resolvent_decays_and_scales() {
        let c = WeightedComplex::path(40);
        let z = C64::new(0.0, 1.0);
        let p = resolvent_profile(&c, z, &[0], 2.0).unwrap();
        assert!(p.shells.windows(2).all(|w| w[1].norm < w[0].norm));
        let p2 = resolvent_profile(&c, z * 2.0, &[0], 2.0).unwrap();
        let ratio = p2.rate.unwrap() / p.rate.unwrap();
        assert!(ratio > 1.0, "rate ratio {ratio}");
        let cd = measured_commutator_constant(&c, 1, 6);
        let k = BoundConstants { c_theta_r: 1.0 / (PI / 6.0).sin(), c_d: cd, a: 0.5, b: 0.0 };
        let rep = verify_bound(&p, z, &k, None);
        assert!(rep.pass && rep.c_needed > 0.0);
        // Shrinking C_D a hundredfold forces a much faster decay than measured.
        let wrong = BoundConstants { c_d: cd / 100.0, ..k };
        let bad = verify_bound(&p, z, &wrong, Some(rep.c_needed));
        assert!(!bad.pass && bad.offending.is_some());
        let sweep = sweep_a(&p, z, &k, &[0.3, 0.5, 0.8]);
        assert!(sweep.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn psi_profiles() {
        let c = WeightedComplex::path(40);
        let d = c.dirac();
        let sc = SpectralCalculus::new(&d).unwrap();
        let psi = HoloFn::z().mul(&HoloFn::exp_neg_z2());
        let t = 0.25;
        let n = c.len();
        // Whole-space norm is bounded by the spectral sup.
        let m = sc.matrix(&psi.dilate(t)).unwrap();
        assert!(full_norm(&m, c.weights()) <= sc.spectral_sup(&psi.dilate(t)).unwrap() * (1.0 + 1e-10));
        let p = psi_profile(&c, &sc, &psi.dilate(t), &[0], 2.0).unwrap();
        assert!(p.shells.last().unwrap().norm < 1e-6 * p.shells[0].norm);
        let k = BoundConstants { c_theta_r: 2.0, c_d: 1.0, a: 0.5, b: 0.0 };
        assert!(verify_shape(&p, |rho| psi_bound(t, 1.0, 1.0, &k, rho), None).c_needed.is_finite());
        // ‖ψ_tψ_s(D)‖ ∝ s/t for s ≪ t.
        let scaled: Vec<f64> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&div| {
                let s = t / div;
                let f = psi.dilate(t).mul(&psi.dilate(s));
                let mm = sc.matrix(&f).unwrap();
                block_norm(&mm, &all(n), &all(n), c.weights()).unwrap() / (s / t)
            })
            .collect();
        assert!(spread(&scaled) < 3.0, "{scaled:?}");
        let _ = sc.apply(&psi, &crate::corpus::random_form(1, &c)).unwrap();
    }

    #[test]
    fn boundary_samples_lie_on_boundary() {
        let (theta, r) = (PI / 6.0, 1.0);
        let zs = boundary_samples(theta, r, 12);
        assert_eq!(zs.len(), 12);
        for z in zs {
            let on_arc = (z.norm() - r).abs() < 1e-12 && z.arg().abs() >= theta - 1e-12 && z.arg().abs() <= PI - theta + 1e-12;
            let a = z.arg().abs();
            let on_ray = z.norm() >= r && ((a - theta).abs() < 1e-12 || (PI - a - theta).abs() < 1e-12);
            assert!(on_arc || on_ray, "{z}");
        }
    }
}
