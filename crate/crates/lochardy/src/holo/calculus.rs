//! Functional calculus of a Dirac operator: a contour-integral route and an
//! eigendecomposition route behind one trait, and the Q/S transforms built on it.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{HoloFn, SectorParams};
use crate::complex::{DiracOperator, FormField};
use crate::quad::gauss_legendre;
use crate::tent::{TentField, TimeGrid};
use crate::{Error, Result, C64};

/// Something that turns holomorphic functions into operators on forms.
pub trait Calculus {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn weights(&self) -> &[f64];

    /// `f(D)u` for every `f` in `fs`, sharing the work that depends only on `u`.
    fn apply_family(&self, fs: &[HoloFn], u: &FormField) -> Result<Vec<FormField>>;

    /// `Σ c_m f_m(D) u_m`.
    fn apply_combined(&self, terms: &[(&HoloFn, f64, &FormField)]) -> Result<FormField>;

    fn apply(&self, f: &HoloFn, u: &FormField) -> Result<FormField> {
        Ok(self.apply_family(std::slice::from_ref(f), u)?.remove(0))
    }
}

fn check_len(u: &FormField, n: usize) -> Result<()> {
    if u.len() != n {
        return Err(Error::FieldLength { got: u.len(), expected: n });
    }
    Ok(())
}

// ------------------------------------------------------------------ spectral

/// Eigendecomposition of the symmetric matrix `W^{1/2} D W^{-1/2}`.
#[derive(Debug, Clone)]
pub struct SpectralCalculus {
    sw: Vec<f64>,
    vectors: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralCalculus {
    pub fn new(d: &DiracOperator) -> Result<SpectralCalculus> {
        let a = d.symmetrized();
        let scale = a.amax().max(1.0);
        let defect = (&a - a.transpose()).amax();
        if defect > 1e-10 * scale {
            return Err(Error::NotSelfAdjoint(defect));
        }
        let sym = (&a + a.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(sym, 1e-15, 10_000).ok_or(Error::EigensolveFailure)?;
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigensolveFailure);
        }
        Ok(SpectralCalculus {
            sw: d.weights.iter().map(|w| w.sqrt()).collect(),
            vectors: eig.eigenvectors,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            weights: d.weights.clone(),
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn to_eig(&self, u: &FormField) -> Vec<C64> {
        let n = self.sw.len();
        let x: Vec<C64> = u.coeffs.iter().zip(&self.sw).map(|(v, s)| v * s).collect();
        (0..n).map(|k| (0..n).map(|i| x[i] * self.vectors[(i, k)]).sum()).collect()
    }

    fn from_eig(&self, c: &[C64]) -> FormField {
        let n = self.sw.len();
        FormField::new((0..n).map(|i| (0..n).map(|k| c[k] * self.vectors[(i, k)]).sum::<C64>() / self.sw[i]).collect())
    }

    fn symbol(&self, f: &HoloFn) -> Result<Vec<C64>> {
        self.eigenvalues.iter().map(|&l| f.eval_real(l)).collect()
    }

    /// `g(D)u` for a scalar symbol on the real spectrum.
    pub fn apply_symbol(&self, g: impl Fn(f64) -> C64, u: &FormField) -> Result<FormField> {
        check_len(u, self.len())?;
        let c = self.to_eig(u);
        let c: Vec<C64> = c.iter().zip(&self.eigenvalues).map(|(c, &l)| c * g(l)).collect();
        Ok(self.from_eig(&c))
    }

    /// The matrix of `f(D)`.
    pub fn matrix(&self, f: &HoloFn) -> Result<DMatrix<C64>> {
        let g = self.symbol(f)?;
        let n = self.len();
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += g[k] * (self.vectors[(i, k)] * self.vectors[(j, k)]);
                }
                m[(i, j)] = acc * (self.sw[j] / self.sw[i]);
            }
        }
        Ok(m)
    }

    /// `sup |f|` over the spectrum.
    pub fn spectral_sup(&self, f: &HoloFn) -> Result<f64> {
        Ok(self.symbol(f)?.iter().map(|v| v.norm()).fold(0.0, f64::max))
    }
}

impl Calculus for SpectralCalculus {
    fn len(&self) -> usize {
        self.sw.len()
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn apply_family(&self, fs: &[HoloFn], u: &FormField) -> Result<Vec<FormField>> {
        check_len(u, self.len())?;
        let c = self.to_eig(u);
        fs.iter()
            .map(|f| {
                let g = self.symbol(f)?;
                let c: Vec<C64> = c.iter().zip(&g).map(|(a, b)| a * b).collect();
                Ok(self.from_eig(&c))
            })
            .collect()
    }

    fn apply_combined(&self, terms: &[(&HoloFn, f64, &FormField)]) -> Result<FormField> {
        let mut acc = vec![C64::new(0.0, 0.0); self.len()];
        for &(f, coef, u) in terms {
            check_len(u, self.len())?;
            let g = self.symbol(f)?;
            for ((a, c), g) in acc.iter_mut().zip(self.to_eig(u)).zip(g) {
                *a += c * g * coef;
            }
        }
        Ok(self.from_eig(&acc))
    }
}

// ------------------------------------------------------------------- contour

/// Boundary `+∂S°_{θ̃,r̃}` and its quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    /// Ray angle `θ̃`.
    pub theta: f64,
    /// Arc radius `r̃`.
    pub r: f64,
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Panel width in `ln|z|` along rays and in angle along arcs.
    pub panel: f64,
    /// Requested absolute accuracy per unit `‖u‖`.
    pub tolerance: f64,
    /// Nodes with `|z| ≥ split·ρ_G` (Gershgorin bound) use the Neumann series.
    pub split: f64,
    /// Largest `ln(|z|/Z₀)` reached on the rays.
    pub max_extent: f64,
}

impl ContourSpec {
    /// `θ̃` three quarters of the way from `ω` to `θ`, `r̃` halfway from `R` to `r`.
    pub fn for_sector(sector: &SectorParams) -> Result<ContourSpec> {
        if sector.r <= 0.0 {
            return Err(Error::InvalidSector("the contour needs a disc radius r > 0".into()));
        }
        let theta = sector.omega + 0.75 * (sector.theta - sector.omega);
        Ok(ContourSpec {
            theta,
            r: sector.big_r + 0.5 * (sector.r - sector.big_r),
            order: 8,
            panel: theta.min(0.5),
            tolerance: 1e-10,
            split: 4.0,
            max_extent: 80.0,
        })
    }

    fn validate(&self) -> Result<()> {
        let ok = self.theta > 0.0
            && self.theta < PI / 2.0
            && self.r > 0.0
            && self.r.is_finite()
            && (1..=64).contains(&self.order)
            && self.panel > 0.0
            && self.tolerance > 0.0
            && self.split > 1.0
            && self.max_extent > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSector(format!("bad contour parameters {self:?}")))
        }
    }
}

impl Default for ContourSpec {
    fn default() -> ContourSpec {
        ContourSpec::for_sector(&SectorParams::default()).expect("default sector has r > 0")
    }
}

/// A node on the upper half of the contour with `dz` folded into the weight;
/// its mirror `z̄` carries weight `−w̄`.
#[derive(Debug, Clone, Copy)]
struct Node {
    z: C64,
    w: C64,
}

fn panels(a: f64, b: f64, width: f64, gl: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    if b <= a {
        return Vec::new();
    }
    let count = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / count as f64;
    let mut out = Vec::new();
    for p in 0..count {
        let lo = a + p as f64 * h;
        for (x, w) in gl.0.iter().zip(&gl.1) {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

/// Contour route: `f(D)u = (1/2πi)∫ f(z)(zI−D)^{-1}u dz`.
///
/// Nodes with `|z| < Z₀` each cost one dense LU; farther nodes use
/// `(z−D)^{-1} = Σ_k D^k/z^{k+1}`, so they only need scalar moments of `f`
/// and `K` matrix–vector products. Lower-half nodes come from upper-half
/// solves by conjugation, since `D` is real.
#[derive(Debug, Clone)]
pub struct ContourCalculus {
    d: DiracOperator,
    spec: ContourSpec,
    near: Vec<Node>,
    /// Far nodes shared by every function (arcs, when `r̃ ≥ Z₀`).
    far_static: Vec<Node>,
    z0: f64,
    gersh: f64,
    terms: usize,
    gl: (Vec<f64>, Vec<f64>),
}

/// Far-field data of one function: Neumann moments plus the scalar check.
struct FarPart {
    moments: Vec<C64>,
    tail: f64,
}

impl ContourCalculus {
    pub fn new(d: &DiracOperator, spec: ContourSpec) -> Result<ContourCalculus> {
        spec.validate()?;
        let gersh = d.spectral_bound();
        let z0 = (spec.split * gersh).max(spec.r);
        let terms = if gersh == 0.0 { 1 } else { ((17.0 * 10f64.ln()) / (z0 / gersh).ln()).ceil() as usize + 1 };
        let gl = gauss_legendre(spec.order);
        let (th, r) = (spec.theta, spec.r);
        let mut near = Vec::new();
        let mut far_static = Vec::new();
        // Arc from θ̃ to π−θ̃, anticlockwise.
        let arc: Vec<Node> = panels(th, PI - th, spec.panel, &gl)
            .into_iter()
            .map(|(phi, w)| {
                let z = C64::from_polar(r, phi);
                Node { z, w: C64::new(0.0, 1.0) * z * w }
            })
            .collect();
        if r < z0 {
            near.extend(arc);
        } else {
            far_static.extend(arc);
        }
        // Ray at θ̃ runs inward, ray at π−θ̃ outward.
        for (s, w) in panels(r.ln(), z0.ln(), spec.panel, &gl) {
            let za = C64::from_polar(s.exp(), th);
            let zb = C64::from_polar(s.exp(), PI - th);
            near.push(Node { z: za, w: -za * w });
            near.push(Node { z: zb, w: zb * w });
        }
        Ok(ContourCalculus { d: d.clone(), spec, near, far_static, z0, gersh, terms, gl })
    }

    pub fn spec(&self) -> &ContourSpec {
        &self.spec
    }

    /// Upper-half nodes that need a linear solve.
    pub fn solve_count(&self) -> usize {
        self.near.len()
    }

    fn far_part(&self, f: &HoloFn) -> Result<FarPart> {
        let k = self.terms;
        let mut moments = vec![C64::new(0.0, 0.0); k];
        let add = |node: Node, moments: &mut [C64]| -> Result<()> {
            let (z, zb) = (node.z, node.z.conj());
            let (fz, fzb) = (f.eval(z)?, f.eval(zb)?);
            let (mut pz, mut pzb) = (z.inv(), zb.inv());
            for m in moments.iter_mut() {
                *m += node.w * fz * pz - node.w.conj() * fzb * pzb;
                pz /= z;
                pzb /= zb;
            }
            Ok(())
        };
        for &node in &self.far_static {
            add(node, &mut moments)?;
        }
        let th = self.spec.theta;
        let dirs = [th, PI - th, -th, PI + th];
        let size = |s: f64| -> f64 { dirs.iter().filter_map(|&a| f.eval(C64::from_polar(s.exp(), a)).ok()).map(|v| v.norm()).fold(0.0, f64::max) };
        let beta = f.class().decay().max(0.5);
        let tail_of = |g: f64| 2.0 * g / (PI * th.sin() * beta);
        let h = self.spec.panel;
        let s0 = self.z0.ln();
        let mut s = s0;
        let mut prev = size(s);
        let mut falling = 0;
        let tail = loop {
            for (x, w) in panels(s, s + h, h, &self.gl) {
                let za = C64::from_polar(x.exp(), th);
                let zb = C64::from_polar(x.exp(), PI - th);
                add(Node { z: za, w: -za * w }, &mut moments)?;
                add(Node { z: zb, w: zb * w }, &mut moments)?;
            }
            s += h;
            let g = size(s);
            falling = if g <= prev { falling + 1 } else { 0 };
            prev = g;
            let tail = tail_of(g);
            if (falling >= 2 && tail <= 0.1 * self.spec.tolerance) || s - s0 >= self.spec.max_extent {
                break tail;
            }
        };
        Ok(FarPart { moments, tail })
    }

    fn scale() -> C64 {
        C64::new(0.0, -0.5 / PI)
    }

    /// `(z−D)^{-1}` applied to the columns of `rhs`.
    fn solve(&self, z: C64, rhs: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let n = self.d.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let v = C64::new(-self.d.matrix[(i, j)], 0.0);
            if i == j {
                v + z
            } else {
                v
            }
        });
        let x = m.lu().solve(rhs).ok_or(Error::ResolventSolveFailure(z))?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::ResolventSolveFailure(z));
        }
        Ok(x)
    }

    /// Solve at every near node in parallel; `rhs(node)` gives the upper and
    /// lower right-hand sides, and the result is `(x_up, x_down)` per node.
    fn solve_all<F>(&self, rhs: F) -> Result<Vec<(Vec<C64>, Vec<C64>)>>
    where
        F: Fn(usize) -> Result<(Vec<C64>, Vec<C64>)> + Sync,
    {
        let n = self.d.len();
        let work = |q: usize| -> Result<(Vec<C64>, Vec<C64>)> {
            let (up, down) = rhs(q)?;
            let mut b = DMatrix::from_element(n, 2, C64::new(0.0, 0.0));
            for i in 0..n {
                b[(i, 0)] = up[i];
                b[(i, 1)] = down[i].conj();
            }
            let x = self.solve(self.near[q].z, &b)?;
            Ok(((0..n).map(|i| x[(i, 0)]).collect(), (0..n).map(|i| x[(i, 1)].conj()).collect()))
        };
        let threads = std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1).min(16);
        let count = self.near.len();
        if threads <= 1 || count < 8 || n < 24 {
            return (0..count).map(work).collect();
        }
        let chunk = count.div_ceil(threads);
        let mut out: Vec<Result<(Vec<C64>, Vec<C64>)>> = Vec::with_capacity(count);
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..count)
                .step_by(chunk)
                .map(|lo| {
                    let work = &work;
                    scope.spawn(move || (lo..(lo + chunk).min(count)).map(work).collect::<Vec<_>>())
                })
                .collect();
            for h in handles {
                out.extend(h.join().expect("solver thread panicked"));
            }
        });
        out.into_iter().collect()
    }

    fn powers(&self, u: &[C64]) -> Vec<Vec<C64>> {
        let mut out = vec![u.to_vec()];
        for _ in 1..self.terms {
            let prev = out.last().expect("nonempty");
            out.push(self.matvec(prev));
        }
        out
    }

    fn matvec(&self, u: &[C64]) -> Vec<C64> {
        let n = self.d.len();
        (0..n)
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..n {
                    let a = self.d.matrix[(i, j)];
                    if a != 0.0 {
                        acc += u[j] * a;
                    }
                }
                acc
            })
            .collect()
    }

    /// Scalar version of the quadrature, `max_λ |Q[f](λ) − f(λ)|` over a
    /// grid of the Gershgorin interval: the exact discretization error for
    /// each eigenvalue of a self-adjoint `D`.
    fn symbol_error(&self, f: &HoloFn, near_vals: &[(C64, C64)], far: &FarPart) -> f64 {
        let samples = 41;
        let mut worst: f64 = 0.0;
        for j in 0..samples {
            let lam = if self.gersh == 0.0 { 0.0 } else { -self.gersh + 2.0 * self.gersh * j as f64 / (samples - 1) as f64 };
            let Ok(exact) = f.eval_real(lam) else { continue };
            let l = C64::new(lam, 0.0);
            let mut acc = C64::new(0.0, 0.0);
            for (node, &(fz, fzb)) in self.near.iter().zip(near_vals) {
                acc += node.w * fz / (node.z - l) - node.w.conj() * fzb / (node.z.conj() - l);
            }
            let mut p = C64::new(1.0, 0.0);
            for m in &far.moments {
                acc += m * p;
                p *= l;
            }
            worst = worst.max((acc * Self::scale() - exact).norm());
            if self.gersh == 0.0 {
                break;
            }
        }
        worst
    }

    /// `f(D)u` for each `f`, with an a-posteriori error estimate per result.
    pub fn apply_family_with_estimate(&self, fs: &[HoloFn], u: &FormField) -> Result<Vec<(FormField, f64)>> {
        let n = self.d.len();
        check_len(u, n)?;
        let sols = self.solve_all(|_| Ok((u.coeffs.clone(), u.coeffs.clone())))?;
        let pw = self.powers(&u.coeffs);
        let unorm = u.norm(&self.d.weights);
        let mut out = Vec::with_capacity(fs.len());
        for f in fs {
            let far = self.far_part(f)?;
            if far.tail > self.spec.tolerance {
                return Err(Error::TailToleranceUnmet { estimate: far.tail, tolerance: self.spec.tolerance });
            }
            let mut vals = Vec::with_capacity(self.near.len());
            let mut acc = vec![C64::new(0.0, 0.0); n];
            for (node, (xu, xd)) in self.near.iter().zip(&sols) {
                let (fz, fzb) = (f.eval(node.z)?, f.eval(node.z.conj())?);
                vals.push((fz, fzb));
                let (a, b) = (node.w * fz, node.w.conj() * fzb);
                for i in 0..n {
                    acc[i] += a * xu[i] - b * xd[i];
                }
            }
            for (m, p) in far.moments.iter().zip(&pw) {
                for i in 0..n {
                    acc[i] += m * p[i];
                }
            }
            let est = self.symbol_error(f, &vals, &far) * unorm;
            out.push((FormField::new(acc.into_iter().map(|v| v * Self::scale()).collect()), est));
        }
        Ok(out)
    }
}

impl Calculus for ContourCalculus {
    fn len(&self) -> usize {
        self.d.len()
    }

    fn weights(&self) -> &[f64] {
        &self.d.weights
    }

    fn apply_family(&self, fs: &[HoloFn], u: &FormField) -> Result<Vec<FormField>> {
        Ok(self.apply_family_with_estimate(fs, u)?.into_iter().map(|(v, _)| v).collect())
    }

    fn apply_combined(&self, terms: &[(&HoloFn, f64, &FormField)]) -> Result<FormField> {
        let n = self.d.len();
        for &(_, _, u) in terms {
            check_len(u, n)?;
        }
        let sols = self.solve_all(|q| {
            let z = self.near[q].z;
            let (mut up, mut down) = (vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n]);
            for &(f, c, u) in terms {
                let (a, b) = (f.eval(z)? * c, f.eval(z.conj())? * c);
                for i in 0..n {
                    up[i] += a * u.coeffs[i];
                    down[i] += b * u.coeffs[i];
                }
            }
            Ok((up, down))
        })?;
        let mut acc = vec![C64::new(0.0, 0.0); n];
        for (node, (xu, xd)) in self.near.iter().zip(&sols) {
            for i in 0..n {
                acc[i] += node.w * xu[i] - node.w.conj() * xd[i];
            }
        }
        // Far field: Σ_k D^k Y_k with Y_k = Σ_m c_m μ_{m,k} u_m, by Horner.
        let mut ys = vec![vec![C64::new(0.0, 0.0); n]; self.terms];
        for &(f, c, u) in terms {
            let far = self.far_part(f)?;
            if far.tail > self.spec.tolerance {
                return Err(Error::TailToleranceUnmet { estimate: far.tail, tolerance: self.spec.tolerance });
            }
            for (y, m) in ys.iter_mut().zip(&far.moments) {
                for i in 0..n {
                    y[i] += m * c * u.coeffs[i];
                }
            }
        }
        let mut v = ys.pop().expect("at least one term");
        while let Some(y) = ys.pop() {
            v = self.matvec(&v);
            for i in 0..n {
                v[i] += y[i];
            }
        }
        Ok(FormField::new(acc.iter().zip(&v).map(|(a, b)| (a + b) * Self::scale()).collect()))
    }
}

/// `f(D)u` by the contour route, with its a-posteriori error estimate.
pub fn contour_apply(f: &HoloFn, d: &DiracOperator, u: &FormField, spec: ContourSpec) -> Result<(FormField, f64)> {
    Ok(ContourCalculus::new(d, spec)?.apply_family_with_estimate(std::slice::from_ref(f), u)?.remove(0))
}

// ---------------------------------------------------------------- transforms

/// `Q_{ψ,φ}u = (ψ_{t_m}(D)u, φ(D)u)` on the grid.
pub fn q_transform<C: Calculus + ?Sized>(
    calc: &C,
    u: &FormField,
    psi: &HoloFn,
    phi: &HoloFn,
    grid: &TimeGrid,
) -> Result<(TentField, FormField)> {
    let n = calc.len();
    let mut fs: Vec<HoloFn> = grid.nodes().iter().map(|&t| psi.dilate(t)).collect();
    fs.push(phi.clone());
    let mut out = calc.apply_family(&fs, u)?;
    let low = out.pop().expect("phi slot");
    let m = grid.len();
    let mut values = vec![C64::new(0.0, 0.0); n * m];
    for (k, slice) in out.iter().enumerate() {
        for y in 0..n {
            values[y * m + k] = slice.coeffs[y];
        }
    }
    Ok((TentField::new(grid.clone(), n, values)?, low))
}

/// `S_{ψ,φ}(U,u) = Σ_m w_m ψ_{t_m}(D)U_m + φ(D)u`.
pub fn s_transform<C: Calculus + ?Sized>(
    calc: &C,
    big_u: &TentField,
    u: &FormField,
    psi: &HoloFn,
    phi: &HoloFn,
) -> Result<FormField> {
    let n = calc.len();
    if big_u.points() != n {
        return Err(Error::FieldLength { got: big_u.points(), expected: n });
    }
    let grid = big_u.grid();
    let slices: Vec<FormField> = (0..grid.len()).map(|m| FormField::new(big_u.slice(m))).collect();
    let fs: Vec<HoloFn> = grid.nodes().iter().map(|&t| psi.dilate(t)).collect();
    let mut terms: Vec<(&HoloFn, f64, &FormField)> = Vec::with_capacity(fs.len() + 1);
    for ((f, &w), s) in fs.iter().zip(grid.weights()).zip(&slices) {
        if s.coeffs.iter().any(|v| *v != C64::new(0.0, 0.0)) {
            terms.push((f, w, s));
        }
    }
    terms.push((phi, 1.0, u));
    calc.apply_combined(&terms)
}

/// `Σ_m w_m ⟨U_m, V_m⟩_w`, the inner product of the tent slot.
pub fn tent_inner(a: &TentField, b: &TentField, weights: &[f64]) -> Result<C64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let mut acc = C64::new(0.0, 0.0);
    for (y, w) in weights.iter().enumerate() {
        for (k, g) in a.grid().weights().iter().enumerate() {
            acc += a.get(y, k) * b.get(y, k).conj() * (w * g);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::WeightedComplex;
    use crate::corpus::random_form;
    use crate::holo::FnClass;

    fn swap2() -> DiracOperator {
        DiracOperator::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), vec![1.0, 1.0])
    }

    fn rel(a: &FormField, b: &FormField, w: &[f64]) -> f64 {
        a.sub(b).norm(w) / b.norm(w).max(1e-300)
    }

    fn theta(f: HoloFn, beta: f64) -> HoloFn {
        f.with_class(FnClass::Theta { beta })
    }

    #[test]
    fn contour_on_two_by_two() {
        let d = swap2();
        let u = FormField::new(vec![C64::new(1.0, 0.5), C64::new(-2.0, 0.0)]);
        let spec = ContourSpec::default();
        let (v, est) = contour_apply(&theta(HoloFn::pow_neg(4.0, 1.0), 2.0), &d, &u, spec).unwrap();
        assert!(rel(&v, &u.scale(C64::new(0.2, 0.0)), &d.weights) < 1e-8, "{v:?}");
        assert!(est < 1e-8);
        let (v, _) = contour_apply(&theta(HoloFn::exp_neg_z2(), 4.0), &d, &u, spec).unwrap();
        assert!(rel(&v, &u.scale(C64::new((-1f64).exp(), 0.0)), &d.weights) < 1e-8);
    }

    #[test]
    fn contour_matches_spectral_on_path() {
        let c = WeightedComplex::path(10);
        let d = c.dirac();
        let u = random_form(3, &c);
        let f = theta(HoloFn::pow_neg(1.0, 1.0), 2.0);
        let cc = ContourCalculus::new(&d, ContourSpec::default()).unwrap();
        let sc = SpectralCalculus::new(&d).unwrap();
        let a = cc.apply(&f, &u).unwrap();
        let b = sc.apply(&f, &u).unwrap();
        assert!(rel(&a, &b, &d.weights) < 1e-6);
    }

    #[test]
    fn contour_handles_zero_operator() {
        let d = WeightedComplex::path(1).dirac();
        let u = FormField::new(vec![C64::new(2.0, -1.0)]);
        let f = theta(HoloFn::exp_neg_sqrt(1.0), 1.0);
        let (v, _) = contour_apply(&f, &d, &u, ContourSpec::default()).unwrap();
        let want = u.scale(C64::new((-1f64).exp(), 0.0));
        assert!((v.coeffs[0] - want.coeffs[0]).norm() < 1e-9);
    }

    #[test]
    fn non_decaying_function_is_rejected_by_contour() {
        let d = swap2();
        let u = FormField::new(vec![C64::new(1.0, 0.0); 2]);
        let r = contour_apply(&HoloFn::real(1.0), &d, &u, ContourSpec::default());
        assert!(matches!(r, Err(Error::TailToleranceUnmet { .. })));
    }

    #[test]
    fn spectral_examples() {
        let d = swap2();
        let sc = SpectralCalculus::new(&d).unwrap();
        let u = FormField::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 3.0)]);
        let du = d.apply(&u);
        assert!(rel(&sc.apply(&HoloFn::z(), &u).unwrap(), &du, &d.weights) < 1e-14);
        assert!(rel(&sc.apply(&HoloFn::real(1.0), &u).unwrap(), &u, &d.weights) < 1e-14);
        let r = sc.apply(&HoloFn::riesz(1.0), &u).unwrap();
        assert!(rel(&r, &du.scale(C64::new(0.5f64.sqrt(), 0.0)), &d.weights) < 1e-14);
        let bad = DiracOperator::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]), vec![1.0, 1.0]);
        assert!(matches!(SpectralCalculus::new(&bad), Err(Error::NotSelfAdjoint(_))));
    }

    #[test]
    fn spectral_is_multiplicative() {
        let c = WeightedComplex::cycle(12);
        let d = c.dirac();
        let sc = SpectralCalculus::new(&d).unwrap();
        let u = random_form(5, &c);
        let (f, g) = (HoloFn::pow_neg(2.0, 0.5), HoloFn::exp_neg_z2().dilate(0.7));
        let fg = sc.apply(&f.mul(&g), &u).unwrap();
        let f_g = sc.apply(&f, &sc.apply(&g, &u).unwrap()).unwrap();
        assert!(rel(&fg, &f_g, &d.weights) < 1e-9);
    }

    #[test]
    fn resolvent_bound_outside_sector() {
        let c = WeightedComplex::triangulated_disc(5, 1);
        let d = c.dirac();
        let n = d.len();
        let theta = PI / 6.0;
        for k in 0..12 {
            let z = C64::from_polar(0.3 * 1.5f64.powi(k), theta + (PI - 2.0 * theta) * (k as f64 / 11.0));
            let m = DMatrix::from_fn(n, n, |i, j| if i == j { z - d.matrix[(i, j)] } else { C64::new(-d.matrix[(i, j)], 0.0) });
            let inv = m.try_inverse().unwrap();
            let norm = crate::complex::weighted_norm(&inv, &d.weights);
            assert!(norm <= (1.0 + 1e-9) / (z.norm() * theta.sin()), "z = {z}");
        }
    }

    #[test]
    fn transforms_on_single_vertex() {
        let d = WeightedComplex::path(1).dirac();
        let sc = SpectralCalculus::new(&d).unwrap();
        let grid = TimeGrid::new(0.5, 8).unwrap();
        let psi = HoloFn::z().mul(&HoloFn::exp_neg_z2()).times(2.0);
        let phi = HoloFn::exp_neg_z2();
        let u = FormField::new(vec![C64::new(1.5, 0.0)]);
        let (tf, low) = q_transform(&sc, &u, &psi, &phi, &grid).unwrap();
        assert!(tf.is_zero());
        assert_eq!(low, u);
        let zero = q_transform(&sc, &FormField::zeros(1), &psi, &phi, &grid).unwrap();
        assert!(zero.0.is_zero() && zero.1.coeffs[0] == C64::new(0.0, 0.0));
    }

    #[test]
    fn q_slices_match_spectral_and_s_adjoint() {
        let c = WeightedComplex::path(10);
        let d = c.dirac();
        let cc = ContourCalculus::new(&d, ContourSpec::default()).unwrap();
        let sc = SpectralCalculus::new(&d).unwrap();
        let grid = TimeGrid::new(0.5, 12).unwrap();
        let psi = HoloFn::z().mul(&HoloFn::exp_neg_z2()).times(2.0).with_class(FnClass::Psi { alpha: 1.0, beta: 4.0 });
        let phi = HoloFn::exp_neg_z2().with_class(FnClass::Phi { beta: 4.0 });
        let u = random_form(11, &c);
        let (qu, lu) = q_transform(&cc, &u, &psi, &phi, &grid).unwrap();
        for (m, &t) in grid.nodes().iter().enumerate() {
            let want = sc.apply(&psi.dilate(t), &u).unwrap();
            assert!(rel(&FormField::new(qu.slice(m)), &want, &d.weights) < 1e-6, "slice {m}");
        }
        assert!(rel(&lu, &sc.apply(&phi, &u).unwrap(), &d.weights) < 1e-6);

        // ⟨Qu, (V,v)⟩ = ⟨u, S_{ψ*,φ*}(V,v)⟩
        let v_field = crate::corpus::random_tent_field(4, c.len(), &grid, 0.7);
        let v = random_form(12, &c);
        let lhs = tent_inner(&qu, &v_field, &d.weights).unwrap() + lu.inner(&v, &d.weights);
        for calc in [&cc as &dyn Calculus, &sc] {
            let s = s_transform(calc, &v_field, &v, &psi.star(), &phi.star()).unwrap();
            let rhs = u.inner(&s, &d.weights);
            assert!((lhs - rhs).norm() < 1e-8 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn s_transform_single_slice() {
        let c = WeightedComplex::path(6);
        let d = c.dirac();
        let sc = SpectralCalculus::new(&d).unwrap();
        let grid = TimeGrid::new(0.5, 6).unwrap();
        let psi = HoloFn::z().mul(&HoloFn::exp_neg_z2());
        let phi = HoloFn::exp_neg_z2();
        let v = random_form(1, &c);
        let mut big = TentField::zeros(grid.clone(), c.len());
        for y in 0..c.len() {
            big.set(y, 2, v.coeffs[y]);
        }
        let got = s_transform(&sc, &big, &FormField::zeros(c.len()), &psi, &phi).unwrap();
        let want = sc.apply(&psi.dilate(grid.nodes()[2]), &v).unwrap().scale(C64::new(grid.weights()[2], 0.0));
        assert!(rel(&got, &want, &d.weights) < 1e-12);
        let only_low = s_transform(&sc, &TentField::zeros(grid, c.len()), &v, &psi, &phi).unwrap();
        assert!(rel(&only_low, &sc.apply(&phi, &v).unwrap(), &d.weights) < 1e-12);
    }
}
