//! Local Hardy space norms, molecules and their `h¹` images, the local Riesz
//! transform, and measured `H^∞` calculus bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::atoms::{lq_norm, validate_atom, LQAtomRecord, TentAtomRecord};
use crate::complex::{DiracOperator, FormField, WeightedComplex};
use crate::covering::{unit_cubes, BallRef, UnitCubeStructure};
use crate::holo::{
    contour_apply, default_pair, q_transform, sector_grid, Calculus, ContourSpec, FnClass, HoloFn, SectorParams,
    SpectralCalculus,
};
use crate::space::{fit_growth, Space};
use crate::tent::{tent_norm, TimeGrid};
use crate::{Error, Result, C64};

/// Relative slack allowed on every molecule bound.
pub const MOLECULE_TOL: f64 = 1e-10;

/// Everything needed to evaluate `‖u‖_{h^p}` on one complex.
#[derive(Debug, Clone)]
pub struct HardyConfig {
    pub space: Space,
    pub dirac: DiracOperator,
    pub calc: SpectralCalculus,
    pub sector: SectorParams,
    pub eta: HoloFn,
    pub phi: HoloFn,
    pub beta: f64,
    pub cubes: UnitCubeStructure,
    pub grid: TimeGrid,
    /// Fitted growth exponents of the form space.
    pub kappa: f64,
    pub lambda: f64,
    pub warnings: Vec<String>,
}

impl HardyConfig {
    /// Default pair with `β = 1` on a Gregory grid `t_m = 2^{−m/4}`, `m < 48`.
    /// Without an explicit sector the disc radius is chosen so that
    /// `r sin θ > λ/2`.
    pub fn new(c: &WeightedComplex, sector: Option<SectorParams>) -> Result<HardyConfig> {
        HardyConfig::with_grid(c, sector, TimeGrid::gregory(2f64.powf(-0.25), 48)?)
    }

    pub fn with_grid(c: &WeightedComplex, sector: Option<SectorParams>, grid: TimeGrid) -> Result<HardyConfig> {
        let space = c.form_space()?;
        let dirac = c.dirac();
        let calc = SpectralCalculus::new(&dirac)?;
        let growth = fit_growth(&space, &[1.0])?;
        let (kappa, lambda) = (growth.envelope.kappa, growth.envelope.lambda);
        let mut warnings = Vec::new();
        let sector = match sector {
            Some(s) => {
                if s.r * s.theta.sin() <= lambda / 2.0 {
                    warnings.push(format!(
                        "r sin(theta) = {:.4} does not exceed lambda/2 = {:.4}",
                        s.r * s.theta.sin(),
                        lambda / 2.0
                    ));
                }
                s
            }
            None => {
                let theta = PI / 6.0;
                SectorParams::new(theta, (lambda / (2.0 * theta.sin()) * 1.01).max(1.0))?
            }
        };
        let beta = 1.0;
        let (eta, phi) = default_pair(beta, &sector)?;
        let cubes = unit_cubes(&space);
        Ok(HardyConfig { space, dirac, calc, sector, eta, phi, beta, cubes, grid, kappa, lambda, warnings })
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    fn check(&self, u: &FormField) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::FieldLength { got: u.len(), expected: self.len() });
        }
        Ok(())
    }
}

/// `‖Q_{η,φ}u‖_{t^p ⊕ L^p_Q}`.
pub fn hp_norm(cfg: &HardyConfig, u: &FormField, p: f64) -> Result<f64> {
    cfg.check(u)?;
    hp_norm_with(cfg, &cfg.eta, &cfg.phi, u, p)
}

fn hp_norm_with(cfg: &HardyConfig, psi: &HoloFn, phi: &HoloFn, u: &FormField, p: f64) -> Result<f64> {
    let (tent, low) = q_transform(&cfg.calc, u, psi, phi, &cfg.grid)?;
    Ok(tent_norm(&cfg.space, &tent, p)? + lq_norm(&cfg.space, &cfg.cubes, &low.coeffs, p)?)
}

fn hp_parts(cfg: &HardyConfig, psi: &HoloFn, phi: &HoloFn, u: &FormField, p: f64) -> Result<(f64, f64)> {
    let (tent, low) = q_transform(&cfg.calc, u, psi, phi, &cfg.grid)?;
    Ok((tent_norm(&cfg.space, &tent, p)?, lq_norm(&cfg.space, &cfg.cubes, &low.coeffs, p)?))
}

// ------------------------------------------------------------------ molecules

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusRow {
    pub k: u32,
    pub norm: f64,
    pub bound: f64,
    /// Witness norm and bound on the same annulus, when a witness is present.
    pub witness: Option<(f64, f64)>,
}

impl AnnulusRow {
    /// Largest of `norm/bound` and the witness ratio.
    pub fn ratio(&self) -> f64 {
        let r = self.norm / self.bound;
        match self.witness {
            Some((n, b)) => r.max(n / b),
            None => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeRecord {
    pub field: FormField,
    pub ball: BallRef,
    pub order: u32,
    pub q: f64,
    /// `b` with `a = D^N b`, required when `r(B) < 1`.
    pub witness: Option<FormField>,
    pub annuli: Vec<AnnulusRow>,
}

impl MoleculeRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("molecule records serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeReport {
    pub rows: Vec<AnnulusRow>,
    pub first_fail: Option<u32>,
    /// `‖a‖₂ ≤ 2e^{−qr/2}μ(B)^{−1/2}`.
    pub global_ok: bool,
    pub witness_ok: bool,
    /// `‖D^N b − a‖₂ / ‖a‖₂`.
    pub witness_defect: Option<f64>,
    pub pass: bool,
}

fn l2(s: &Space, u: &FormField, mask: impl Fn(usize) -> bool) -> f64 {
    u.coeffs.iter().enumerate().filter(|(x, _)| mask(*x)).map(|(x, v)| v.norm_sqr() * s.mass(x)).sum::<f64>().sqrt()
}

/// `‖1_k(B)a‖₂`, `‖1_k(B)b‖₂` and their bounds for `k = 0, 1, …` until `2^kB ⊇ X`.
pub fn annulus_table(s: &Space, a: &FormField, b: Option<&FormField>, ball: &BallRef, n: u32, q: f64) -> Vec<AnnulusRow> {
    let r = ball.radius;
    let mut rows = Vec::new();
    let mut k = 0u32;
    loop {
        let scale = 2f64.powi(k as i32);
        let outer = ball.dilate(scale);
        let inner = (k > 0).then(|| ball.dilate(scale / 2.0));
        let in_annulus = |x: usize| outer.contains(s, x) && !inner.is_some_and(|i| i.contains(s, x));
        let bound = (-q * scale / 2.0 * r).exp() / scale * outer.measure(s).powf(-0.5);
        let witness = b.map(|b| (l2(s, b, in_annulus), r.powi(n as i32) * bound));
        rows.push(AnnulusRow { k, norm: l2(s, a, in_annulus), bound, witness });
        if outer.members(s).len() == s.len() || k >= 64 {
            break;
        }
        k += 1;
    }
    rows
}

/// Check a molecule against its definition. Without `d` the identity
/// `a = D^N b` is not checked.
pub fn validate_molecule(s: &Space, d: Option<&DiracOperator>, rec: &MoleculeRecord) -> MoleculeReport {
    let rows = annulus_table(s, &rec.field, rec.witness.as_ref(), &rec.ball, rec.order, rec.q);
    let slack = 1.0 + MOLECULE_TOL;
    let first_fail = rows.iter().find(|r| r.norm > r.bound * slack).map(|r| r.k);
    let norm = rec.field.norm(s.masses());
    let global_ok = norm <= 2.0 * (-rec.q * rec.ball.radius / 2.0).exp() * rec.ball.measure(s).powf(-0.5) * slack;
    let mut witness_defect = None;
    let witness_ok = match &rec.witness {
        None => rec.ball.radius >= 1.0 || norm == 0.0,
        Some(b) => {
            let rows_ok = rows.iter().all(|r| r.witness.is_none_or(|(n, bd)| n <= bd * slack));
            let ident_ok = match d {
                Some(d) if d.len() == b.len() => {
                    let mut y = b.clone();
                    for _ in 0..rec.order {
                        y = d.apply(&y);
                    }
                    let defect = y.sub(&rec.field).norm(s.masses());
                    let rel = if norm == 0.0 { defect } else { defect / norm };
                    witness_defect = Some(rel);
                    rel <= MOLECULE_TOL
                }
                Some(_) => false,
                None => true,
            };
            rows_ok && ident_ok
        }
    };
    let pass = first_fail.is_none() && global_ok && witness_ok;
    MoleculeReport { rows, first_fail, global_ok, witness_ok, witness_defect, pass }
}

/// Divide `a` (and `b`) by the largest annulus ratio so every bound holds,
/// returning that ratio (1 for the zero molecule).
fn normalize(s: &Space, a: FormField, b: Option<FormField>, ball: BallRef, n: u32, q: f64) -> (MoleculeRecord, f64) {
    let rows = annulus_table(s, &a, b.as_ref(), &ball, n, q);
    let worst = rows.iter().map(AnnulusRow::ratio).fold(0.0, f64::max);
    let c = if worst > 0.0 && worst.is_finite() { worst } else { 1.0 };
    let inv = C64::new(1.0 / c, 0.0);
    let (a, b) = (a.scale(inv), b.map(|b| b.scale(inv)));
    let annuli = annulus_table(s, &a, b.as_ref(), &ball, n, q);
    (MoleculeRecord { field: a, ball, order: n, q, witness: b, annuli }, c)
}

/// Result of turning an atom into a molecule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversion {
    pub molecule: MoleculeRecord,
    /// The synthesized form equals `c` times the molecule; `c` is the
    /// smallest such constant.
    pub c: f64,
    /// Disc radius satisfying `r̃/(C_D C_{θ,r̃}) > λ + q`.
    pub sector_radius: f64,
    pub warnings: Vec<String>,
}

/// `r̃` with `r̃ sin θ / C_D > λ + q` (`C_{θ,r̃} = 1/sin θ` for self-adjoint `D`).
fn enlarged_radius(cfg: &HardyConfig, q: f64, c_d: f64) -> f64 {
    ((cfg.lambda + q) * c_d / cfg.sector.theta.sin() * 1.01).max(cfg.sector.r)
}

/// `ψ̃ = z^{N+2}e^{−z²}`, which decays to order `β + N + 1` at the origin.
pub fn synthesis_psi(n: u32) -> HoloFn {
    HoloFn::z_pow(n + 2).mul(&HoloFn::exp_neg_z2()).with_class(FnClass::Psi { alpha: (n + 2) as f64, beta: 64.0 })
}

/// `∫_0^1 ψ̃_t(D)A_t dt/t` on the grid, as a multiple of a molecule of type
/// `(N, q)` on the atom's ball; when `r(B) < 1` the witness
/// `b = ∫_0^1 t^N (z²e^{−z²})_t(D)A_t dt/t` satisfies `D^N b = ∫ψ̃_t(D)A_t dt/t`.
pub fn tent_atom_to_molecule(cfg: &HardyConfig, atom: &TentAtomRecord, n: u32, q: f64, c_d: f64) -> Result<Conversion> {
    let rep = validate_atom(&cfg.space, atom);
    if !rep.pass {
        return Err(Error::AtomInvalid(format!("{rep:?}")));
    }
    let grid = atom.field.grid();
    let slices: Vec<FormField> = (0..grid.len()).map(|m| FormField::new(atom.field.slice(m))).collect();
    let psi = synthesis_psi(n);
    let plain = HoloFn::z_pow(2).mul(&HoloFn::exp_neg_z2());
    let mut terms_a = Vec::new();
    let mut terms_b = Vec::new();
    let fa: Vec<HoloFn> = grid.nodes().iter().map(|&t| psi.dilate(t)).collect();
    let fb: Vec<HoloFn> = grid.nodes().iter().map(|&t| plain.dilate(t)).collect();
    for (k, s) in slices.iter().enumerate() {
        if s.coeffs.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            continue;
        }
        let (t, w) = (grid.nodes()[k], grid.weights()[k]);
        terms_a.push((&fa[k], w, s));
        terms_b.push((&fb[k], w * t.powi(n as i32), s));
    }
    let zero = FormField::zeros(cfg.len());
    let (a, b) = if terms_a.is_empty() {
        (zero.clone(), zero)
    } else {
        (cfg.calc.apply_combined(&terms_a)?, cfg.calc.apply_combined(&terms_b)?)
    };
    let b = (atom.ball.radius < 1.0).then_some(b);
    let (molecule, c) = normalize(&cfg.space, a, b, atom.ball, n, q);
    Ok(Conversion { molecule, c, sector_radius: enlarged_radius(cfg, q, c_d), warnings: gating(cfg, n, q) })
}

/// `φ̃(D)a` with `φ̃ = e^{−z²}`, as a multiple of a molecule on the radius-1 anchor ball.
pub fn lq_atom_to_molecule(cfg: &HardyConfig, atom: &LQAtomRecord, n: u32, q: f64, c_d: f64) -> Result<Conversion> {
    let (field, _) = atom.normalized();
    let genuine = LQAtomRecord { field: field.clone(), multiple: 1.0, ..atom.clone() };
    let rep = validate_atom(&cfg.space, &genuine);
    if !rep.pass {
        return Err(Error::AtomInvalid(format!("{rep:?}")));
    }
    let a = cfg.calc.apply(&HoloFn::exp_neg_z2(), &FormField::new(field))?;
    let (molecule, c) = normalize(&cfg.space, a, None, atom.ball, n, q);
    Ok(Conversion { molecule, c, sector_radius: enlarged_radius(cfg, q, c_d), warnings: gating(cfg, n, q) })
}

fn gating(cfg: &HardyConfig, n: u32, q: f64) -> Vec<String> {
    let mut w = Vec::new();
    if n as f64 <= cfg.kappa / 2.0 {
        w.push(format!("N = {n} does not exceed kappa/2 = {:.4}", cfg.kappa / 2.0));
    }
    if q < cfg.lambda {
        w.push(format!("q = {q} is below lambda = {:.4}", cfg.lambda));
    }
    w
}

/// `(‖ψ_t(D)a‖_{t¹}, ‖φ(D)a‖_{L¹_Q})` with the default pair of order `β + N`.
pub fn molecule_h1_bound(cfg: &HardyConfig, rec: &MoleculeRecord) -> Result<(f64, f64)> {
    cfg.check(&rec.field)?;
    let (psi, phi) = default_pair(cfg.beta + rec.order as f64, &cfg.sector)?;
    hp_parts(cfg, &psi, &phi, &rec.field, 1.0)
}

// ---------------------------------------------------------------------- Riesz

/// `D(Δ + a)^{−1/2}u` with `(z² + a)^{−1/2}` applied by the contour route on
/// a sector whose disc stays inside `|z| < √a`.
pub fn riesz_local(d: &DiracOperator, u: &FormField, a: f64) -> Result<FormField> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::BadDescriptor(format!("Riesz parameter must be positive, got {a}")));
    }
    let g = HoloFn::pow_neg(a, 0.5).with_class(FnClass::Theta { beta: 1.0 });
    let sector = SectorParams::new(PI / 6.0, 0.9 * a.sqrt())?;
    let (v, _) = contour_apply(&g, d, u, ContourSpec::for_sector(&sector)?)?;
    Ok(d.apply(&v))
}

/// The same transform on the self-adjoint route.
pub fn riesz_local_spectral(calc: &SpectralCalculus, u: &FormField, a: f64) -> Result<FormField> {
    calc.apply_symbol(|x| C64::new(x / (x * x + a).sqrt(), 0.0), u)
}

// ---------------------------------------------------------------------- H^∞

/// `sup |f|` sampled on the sector.
pub fn sector_sup(f: &HoloFn, sector: &SectorParams) -> Result<f64> {
    let mut best: f64 = 0.0;
    for z in sector_grid(sector, 33, 9) {
        best = best.max(f.eval(z)?.norm());
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HinftyReport {
    pub p: f64,
    pub sup: f64,
    /// `max_u ‖f(D)u‖_{h^p} / (sup|f| ‖u‖_{h^p})`.
    pub ratio: f64,
    pub ratios: Vec<f64>,
}

pub fn hinfty_operator_norm(cfg: &HardyConfig, f: &HoloFn, p: f64, corpus: &[FormField]) -> Result<HinftyReport> {
    let sup = sector_sup(f, &cfg.sector)?;
    let mut ratios = Vec::with_capacity(corpus.len());
    for u in corpus {
        let base = hp_norm(cfg, u, p)?;
        if base == 0.0 || sup == 0.0 {
            ratios.push(0.0);
            continue;
        }
        let fu = cfg.calc.apply(f, u)?;
        ratios.push(hp_norm(cfg, &fu, p)? / (sup * base));
    }
    let ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(HinftyReport { p, sup, ratio, ratios })
}
