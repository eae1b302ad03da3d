//! Holomorphic functions on bisector-plus-disc regions `S°_{θ,r}`: an
//! evaluable expression tree with a JSON form, class diagnostics, and the
//! functional calculus of a Dirac operator.

mod calculus;
mod pairs;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::{Error, Result, C64};

pub use calculus::{
    contour_apply, q_transform, s_transform, tent_inner, Calculus, ContourCalculus, ContourSpec, SpectralCalculus,
};
pub use pairs::{calderon_pair, calderon_residual, default_pair, default_pair_residual, CalderonPair};

/// `S°_{θ,r}` together with the operator type `(ω, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorParams {
    pub theta: f64,
    pub r: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub big_r: f64,
}

impl SectorParams {
    /// Sector for a self-adjoint operator (`ω = R = 0`).
    pub fn new(theta: f64, r: f64) -> Result<SectorParams> {
        SectorParams::with_type(theta, r, 0.0, 0.0)
    }

    pub fn with_type(theta: f64, r: f64, omega: f64, big_r: f64) -> Result<SectorParams> {
        if !(theta > 0.0 && theta < PI / 2.0) {
            return Err(Error::InvalidSector(format!("theta = {theta} outside (0, pi/2)")));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidSector(format!("r = {r}")));
        }
        if !(omega >= 0.0 && omega < theta) {
            return Err(Error::InvalidSector(format!("omega = {omega} must lie in [0, theta)")));
        }
        if !(big_r >= 0.0 && (r == 0.0 || big_r < r)) {
            return Err(Error::InvalidSector(format!("R = {big_r} must lie in [0, r)")));
        }
        Ok(SectorParams { theta, r, omega, big_r })
    }

    /// Membership in the open region: disc interior or bisector interior.
    pub fn contains(&self, z: C64) -> bool {
        if z.norm() < self.r {
            return true;
        }
        if z == C64::new(0.0, 0.0) {
            return false;
        }
        let a = z.arg().abs();
        a < self.theta || PI - a < self.theta
    }
}

impl Default for SectorParams {
    fn default() -> SectorParams {
        SectorParams { theta: PI / 6.0, r: 1.0, omega: 0.0, big_r: 0.0 }
    }
}

/// Claimed membership, used by diagnostics and to size contour truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FnClass {
    /// `|f| ≲ min(|z|^α, |z|^{−β})`.
    Psi { alpha: f64, beta: f64 },
    /// `|f| ≲ (1+|z|)^{−β}`.
    Theta { beta: f64 },
    /// Nonvanishing `Θ^β` functions with disc and dilation control.
    Phi { beta: f64 },
    #[default]
    HInf,
}

impl FnClass {
    /// Declared decay exponent at infinity (0 for `H^∞`).
    pub fn decay(&self) -> f64 {
        match *self {
            FnClass::Psi { beta, .. } | FnClass::Theta { beta } | FnClass::Phi { beta } => beta,
            FnClass::HInf => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Monomial(u32),
    ExpNegZ2,
    /// `exp(−√(z²+a))`
    ExpNegSqrt(f64),
    /// `(z²+a)^{−β}`
    PowNeg(f64, f64),
    /// `z(z²+a)^{−1/2}`
    Riesz(f64),
    Const(C64),
    /// `e^{−z²}(Σ_{k<n} (2z²)^k/k!)^{1/2}`, the companion of `z^n e^{−z²}`.
    DefaultPhi(u32),
    Sum(Vec<Arc<Node>>),
    Product(Vec<Arc<Node>>),
    /// `f(tz)`
    Dilate(f64, Arc<Node>),
    Reflect(Arc<Node>),
    Star(Arc<Node>),
    Power(i32, Arc<Node>),
    Recip(Arc<Node>),
    /// `(1/φ(z))(1 − ∫₀¹ ψ̃(tz)ψ(tz) dt/t)`, evaluated by quadrature.
    CalderonPhi { psi_tilde: Arc<Node>, psi: Arc<Node>, phi: Arc<Node> },
}

/// An immutable holomorphic function descriptor with its claimed class.
#[derive(Debug, Clone, PartialEq)]
pub struct HoloFn {
    node: Arc<Node>,
    class: FnClass,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn on_cut(w: C64, z: C64) -> Result<()> {
    if w.re <= 0.0 && w.im.abs() <= 1e-15 * w.norm().max(1.0) {
        Err(Error::BranchCutHit(z))
    } else {
        Ok(())
    }
}

fn eval_node(node: &Node, z: C64) -> Result<C64> {
    Ok(match node {
        Node::Monomial(k) => z.powu(*k),
        Node::ExpNegZ2 => (-z * z).exp(),
        Node::ExpNegSqrt(a) => {
            let w = z * z + a;
            on_cut(w, z)?;
            (-w.sqrt()).exp()
        }
        Node::PowNeg(a, beta) => {
            let w = z * z + a;
            on_cut(w, z)?;
            (-beta * w.ln()).exp()
        }
        Node::Riesz(a) => {
            let w = z * z + a;
            on_cut(w, z)?;
            z / w.sqrt()
        }
        Node::Const(c) => *c,
        Node::DefaultPhi(n) => {
            let w = 2.0 * z * z;
            let (mut term, mut sum) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
            for k in 1..*n {
                term = term * w / k as f64;
                sum += term;
            }
            on_cut(sum, z)?;
            (-z * z).exp() * sum.sqrt()
        }
        Node::Sum(args) => {
            let mut acc = zero();
            for a in args {
                acc += eval_node(a, z)?;
            }
            acc
        }
        Node::Product(args) => {
            let mut acc = C64::new(1.0, 0.0);
            for a in args {
                acc *= eval_node(a, z)?;
                if acc == zero() {
                    break;
                }
            }
            acc
        }
        Node::Dilate(t, f) => eval_node(f, z * *t)?,
        Node::Reflect(f) => eval_node(f, -z)?,
        Node::Star(f) => eval_node(f, z.conj())?.conj(),
        Node::Power(k, f) => {
            let v = eval_node(f, z)?;
            if *k < 0 && v == zero() {
                return Err(Error::PhiVanishes(z));
            }
            v.powi(*k)
        }
        Node::Recip(f) => {
            let v = eval_node(f, z)?;
            if v == zero() || !v.is_finite() {
                return Err(Error::PhiVanishes(z));
            }
            v.inv()
        }
        Node::CalderonPhi { psi_tilde, psi, phi } => {
            let p = eval_node(phi, z)?;
            if p == zero() {
                return Err(Error::PhiVanishes(z));
            }
            let integral = pairs::truncated_reproducing_integral(psi_tilde, psi, z)?;
            (C64::new(1.0, 0.0) - integral) / p
        }
    })
}

impl HoloFn {
    fn wrap(node: Node) -> HoloFn {
        HoloFn { node: Arc::new(node), class: FnClass::HInf }
    }

    pub fn z_pow(k: u32) -> HoloFn {
        HoloFn::wrap(Node::Monomial(k))
    }

    /// The identity function `z`.
    pub fn z() -> HoloFn {
        HoloFn::z_pow(1)
    }

    pub fn exp_neg_z2() -> HoloFn {
        HoloFn::wrap(Node::ExpNegZ2)
    }

    pub fn exp_neg_sqrt(a: f64) -> HoloFn {
        HoloFn::wrap(Node::ExpNegSqrt(a))
    }

    pub fn pow_neg(a: f64, beta: f64) -> HoloFn {
        HoloFn::wrap(Node::PowNeg(a, beta))
    }

    pub fn riesz(a: f64) -> HoloFn {
        HoloFn::wrap(Node::Riesz(a))
    }

    pub fn constant(c: C64) -> HoloFn {
        HoloFn::wrap(Node::Const(c))
    }

    pub fn real(c: f64) -> HoloFn {
        HoloFn::constant(C64::new(c, 0.0))
    }

    pub(crate) fn default_phi(n: u32) -> HoloFn {
        if n <= 1 {
            HoloFn::exp_neg_z2()
        } else {
            HoloFn::wrap(Node::DefaultPhi(n))
        }
    }

    pub(crate) fn calderon_phi(psi_tilde: &HoloFn, psi: &HoloFn, phi: &HoloFn) -> HoloFn {
        HoloFn::wrap(Node::CalderonPhi {
            psi_tilde: psi_tilde.node.clone(),
            psi: psi.node.clone(),
            phi: phi.node.clone(),
        })
    }

    pub fn sum(fs: &[HoloFn]) -> HoloFn {
        HoloFn::wrap(Node::Sum(fs.iter().map(|f| f.node.clone()).collect()))
    }

    pub fn product(fs: &[HoloFn]) -> HoloFn {
        HoloFn::wrap(Node::Product(fs.iter().map(|f| f.node.clone()).collect()))
    }

    pub fn add(&self, g: &HoloFn) -> HoloFn {
        HoloFn::sum(&[self.clone(), g.clone()])
    }

    pub fn mul(&self, g: &HoloFn) -> HoloFn {
        HoloFn::product(&[self.clone(), g.clone()])
    }

    /// `c·f`.
    pub fn times(&self, c: f64) -> HoloFn {
        HoloFn::product(&[HoloFn::real(c), self.clone()]).with_class(self.class)
    }

    /// `f_t(z) = f(tz)`; class is kept.
    pub fn dilate(&self, t: f64) -> HoloFn {
        HoloFn { node: Arc::new(Node::Dilate(t, self.node.clone())), class: self.class }
    }

    /// `f_−(z) = f(−z)`.
    pub fn reflect(&self) -> HoloFn {
        let node = match &*self.node {
            Node::Reflect(inner) => inner.clone(),
            _ => Arc::new(Node::Reflect(self.node.clone())),
        };
        HoloFn { node, class: self.class }
    }

    /// `f*(z) = conj f(conj z)`.
    pub fn star(&self) -> HoloFn {
        let node = match &*self.node {
            Node::Star(inner) => inner.clone(),
            _ => Arc::new(Node::Star(self.node.clone())),
        };
        HoloFn { node, class: self.class }
    }

    pub fn powi(&self, k: i32) -> HoloFn {
        HoloFn::wrap(Node::Power(k, self.node.clone()))
    }

    pub fn recip(&self) -> HoloFn {
        HoloFn::wrap(Node::Recip(self.node.clone()))
    }

    pub fn with_class(mut self, class: FnClass) -> HoloFn {
        self.class = class;
        self
    }

    pub fn class(&self) -> FnClass {
        self.class
    }

    /// Tree evaluation with principal branches; only branch cuts are checked.
    pub fn eval(&self, z: C64) -> Result<C64> {
        eval_node(&self.node, z)
    }

    pub fn eval_real(&self, x: f64) -> Result<C64> {
        self.eval(C64::new(x, 0.0))
    }

    /// Evaluation restricted to the open region of `sector`.
    pub fn eval_in(&self, sector: &SectorParams, z: C64) -> Result<C64> {
        if !sector.contains(z) {
            return Err(Error::OutsideDomain(z));
        }
        self.eval(z)
    }

    pub fn to_value(&self) -> Value {
        let mut v = node_to_value(&self.node);
        if self.class != FnClass::HInf {
            v["class"] = serde_json::to_value(self.class).expect("class serializes");
        }
        v
    }

    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }

    pub fn from_value(v: &Value) -> Result<HoloFn> {
        let node = node_from_value(v, 0)?;
        let class = match v.get("class") {
            Some(c) => serde_json::from_value(c.clone()).map_err(|e| Error::BadDescriptor(e.to_string()))?,
            None => FnClass::HInf,
        };
        Ok(HoloFn { node: Arc::new(node), class })
    }

    pub fn from_json(text: &str) -> Result<HoloFn> {
        let v: Value = serde_json::from_str(text)?;
        HoloFn::from_value(&v)
    }
}

fn node_to_value(n: &Node) -> Value {
    let args = |v: &[Arc<Node>]| Value::Array(v.iter().map(|a| node_to_value(a)).collect());
    match n {
        Node::Monomial(k) => json!({"prim": "monomial", "k": k}),
        Node::ExpNegZ2 => json!({"prim": "expnegz2"}),
        Node::ExpNegSqrt(a) => json!({"prim": "expnegsqrt", "a": a}),
        Node::PowNeg(a, b) => json!({"prim": "powneg", "a": a, "beta": b}),
        Node::Riesz(a) => json!({"prim": "riesz", "a": a}),
        Node::Const(c) => json!({"prim": "const", "re": c.re, "im": c.im}),
        Node::DefaultPhi(k) => json!({"prim": "defaultphi", "n": k}),
        Node::Sum(v) => json!({"op": "sum", "args": args(v)}),
        Node::Product(v) => json!({"op": "product", "args": args(v)}),
        Node::Dilate(t, f) => json!({"op": "scale", "t": t, "arg": node_to_value(f)}),
        Node::Reflect(f) => json!({"op": "reflect", "arg": node_to_value(f)}),
        Node::Star(f) => json!({"op": "star", "arg": node_to_value(f)}),
        Node::Power(k, f) => json!({"op": "power", "k": k, "arg": node_to_value(f)}),
        Node::Recip(f) => json!({"op": "recip", "arg": node_to_value(f)}),
        Node::CalderonPhi { psi_tilde, psi, phi } => json!({
            "op": "calderon_phi",
            "psi_tilde": node_to_value(psi_tilde),
            "psi": node_to_value(psi),
            "phi": node_to_value(phi),
        }),
    }
}

const MAX_DEPTH: usize = 64;

fn node_from_value(v: &Value, depth: usize) -> Result<Node> {
    let bad = |m: &str| Error::BadDescriptor(m.to_string());
    if depth > MAX_DEPTH {
        return Err(bad("expression nested too deeply"));
    }
    let obj: &Map<String, Value> = v.as_object().ok_or_else(|| bad("expected an object"))?;
    let num = |key: &str| -> Result<f64> {
        let x = obj.get(key).and_then(Value::as_f64).ok_or_else(|| bad(&format!("missing number `{key}`")))?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(bad(&format!("`{key}` is not finite")))
        }
    };
    let int = |key: &str, lo: i64, hi: i64| -> Result<i64> {
        let x = obj.get(key).and_then(Value::as_i64).ok_or_else(|| bad(&format!("missing integer `{key}`")))?;
        if (lo..=hi).contains(&x) {
            Ok(x)
        } else {
            Err(bad(&format!("`{key}` = {x} outside [{lo}, {hi}]")))
        }
    };
    let sub = |key: &str| -> Result<Arc<Node>> {
        let a = obj.get(key).ok_or_else(|| bad(&format!("missing `{key}`")))?;
        Ok(Arc::new(node_from_value(a, depth + 1)?))
    };
    if let Some(p) = obj.get("prim") {
        return Ok(match p.as_str().ok_or_else(|| bad("`prim` must be a string"))? {
            "monomial" => Node::Monomial(int("k", 0, 64)? as u32),
            "expnegz2" => Node::ExpNegZ2,
            "expnegsqrt" => Node::ExpNegSqrt(num("a")?),
            "powneg" => Node::PowNeg(num("a")?, num("beta")?),
            "riesz" => Node::Riesz(num("a")?),
            "const" => Node::Const(C64::new(num("re")?, if obj.contains_key("im") { num("im")? } else { 0.0 })),
            "defaultphi" => Node::DefaultPhi(int("n", 1, 64)? as u32),
            other => return Err(bad(&format!("unknown primitive `{other}`"))),
        });
    }
    let op = obj.get("op").and_then(Value::as_str).ok_or_else(|| bad("expected `prim` or `op`"))?;
    Ok(match op {
        "sum" | "product" => {
            let list = obj.get("args").and_then(Value::as_array).ok_or_else(|| bad("missing `args` array"))?;
            let args = list.iter().map(|a| node_from_value(a, depth + 1).map(Arc::new)).collect::<Result<Vec<_>>>()?;
            if op == "sum" {
                Node::Sum(args)
            } else {
                Node::Product(args)
            }
        }
        "scale" => {
            let t = num("t")?;
            if t <= 0.0 {
                return Err(bad("scale `t` must be positive"));
            }
            Node::Dilate(t, sub("arg")?)
        }
        "reflect" => Node::Reflect(sub("arg")?),
        "star" => Node::Star(sub("arg")?),
        "power" => Node::Power(int("k", -64, 64)? as i32, sub("arg")?),
        "recip" => Node::Recip(sub("arg")?),
        "calderon_phi" => Node::CalderonPhi { psi_tilde: sub("psi_tilde")?, psi: sub("psi")?, phi: sub("phi")? },
        other => return Err(bad(&format!("unknown op `{other}`"))),
    })
}

impl Serialize for HoloFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HoloFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<HoloFn, D::Error> {
        let v = Value::deserialize(d)?;
        HoloFn::from_value(&v).map_err(serde::de::Error::custom)
    }
}

/// Diagnostics from sampling a function over `S°_{θ,r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: FnClass,
    /// `sup |f(z)| / bound(z)` over the grid.
    pub constant: f64,
    pub violations: Vec<String>,
    /// Smallest `|f|` on the bounded part of the grid (Φ only).
    pub min_modulus: Option<f64>,
    /// `inf_{D_r} |f|` (Φ only).
    pub disc_inf: Option<f64>,
    /// `sup_{t≥1} |f(tz)|/|f(z)|` outside `D_r` (Φ only).
    pub dilation_constant: Option<f64>,
    pub pass: bool,
}

/// Sample points of the open region: a log-radial sweep along interior rays
/// in all four quadrants, plus interior disc points.
pub fn sector_grid(sector: &SectorParams, radial: usize, angular: usize) -> Vec<C64> {
    let mut pts = Vec::new();
    for k in 0..radial {
        let rho = 10f64.powf(-4.0 + 8.0 * k as f64 / (radial - 1).max(1) as f64);
        for j in 0..angular {
            let phi = sector.theta * j as f64 / angular as f64;
            for a in [phi, -phi, PI - phi, PI + phi] {
                pts.push(C64::from_polar(rho, a));
                if phi == 0.0 {
                    break;
                }
            }
        }
    }
    if sector.r > 0.0 {
        for k in 1..6 {
            for j in 0..12 {
                pts.push(C64::from_polar(sector.r * k as f64 / 6.0, 2.0 * PI * j as f64 / 12.0));
            }
        }
    }
    pts
}

const GRID_RADIAL: usize = 81;
const GRID_ANGULAR: usize = 6;

/// Sweep `f` over the region and compare with its claimed class bounds.
///
/// Decay at `0` and `∞` is judged by trend: the ratio to the bound must not
/// keep growing across the last decade at either end of the radial sweep.
pub fn class_check(f: &HoloFn, sector: &SectorParams) -> ClassReport {
    let class = f.class;
    let (alpha, beta) = match class {
        FnClass::Psi { alpha, beta } => (Some(alpha), beta),
        FnClass::Theta { beta } | FnClass::Phi { beta } => (None, beta),
        FnClass::HInf => (None, 0.0),
    };
    let bound = |rho: f64| match alpha {
        Some(a) => rho.powf(a).min(rho.powf(-beta)),
        None => (1.0 + rho).powf(-beta),
    };
    let mut violations = Vec::new();
    let mut constant: f64 = 0.0;
    for z in sector_grid(sector, GRID_RADIAL, GRID_ANGULAR) {
        match f.eval(z) {
            Ok(v) if v.is_finite() => constant = constant.max(v.norm() / bound(z.norm())),
            Ok(_) => violations.push(format!("non-finite value at {z}")),
            Err(e) => violations.push(format!("{e}")),
        }
    }
    // Trend at the ends of the radial sweep along the interior rays.
    let ratio_at = |rho: f64| -> f64 {
        (0..GRID_ANGULAR)
            .flat_map(|j| {
                let phi = sector.theta * j as f64 / GRID_ANGULAR as f64;
                [phi, PI - phi]
            })
            .filter_map(|a| f.eval(C64::from_polar(rho, a)).ok())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
            / bound(rho)
    };
    let ends: &[(f64, f64, &str)] = if alpha.is_some() {
        &[(1e-4, 1e-3, "no decay at 0"), (1e4, 1e3, "no decay at infinity")]
    } else if beta > 0.0 {
        &[(1e4, 1e3, "no decay at infinity")]
    } else {
        &[]
    };
    for &(edge, inner, msg) in ends {
        let (a, b) = (ratio_at(edge), ratio_at(inner));
        if a > 2.0 * b && a > 1e-300 {
            violations.push(format!("{msg}: ratio {a:e} at |z| = {edge:e} vs {b:e} at {inner:e}"));
        }
    }
    let (mut min_modulus, mut disc_inf, mut dilation) = (None, None, None);
    if let FnClass::Phi { .. } = class {
        // Only where the values are representable: |z| ≤ 8.
        let pts: Vec<C64> = sector_grid(sector, GRID_RADIAL, GRID_ANGULAR).into_iter().filter(|z| z.norm() <= 8.0).collect();
        let m = pts.iter().filter_map(|&z| f.eval(z).ok()).map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if m <= 0.0 {
            violations.push("vanishes on the region".into());
        }
        min_modulus = Some(m);
        if sector.r > 0.0 {
            let d = pts.iter().filter(|z| z.norm() < sector.r).filter_map(|&z| f.eval(z).ok()).map(|v| v.norm()).fold(f64::INFINITY, f64::min);
            if d <= 0.0 {
                violations.push("infimum on the disc is zero".into());
            }
            disc_inf = Some(d);
        }
        let mut c: f64 = 0.0;
        for &z in pts.iter().filter(|z| z.norm() >= sector.r && z.norm() <= 4.0) {
            let Ok(base) = f.eval(z) else { continue };
            for k in 0..=16 {
                let t = 2f64.powf(k as f64 / 4.0);
                if let Ok(v) = f.eval(z * t) {
                    c = c.max(v.norm() / base.norm());
                }
            }
        }
        if !c.is_finite() {
            violations.push("dilation control fails".into());
        }
        dilation = Some(c);
    }
    let pass = violations.is_empty() && constant.is_finite();
    ClassReport { class, constant, violations, min_modulus, disc_inf, dilation_constant: dilation, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(HoloFn::z().eval(c(1.0, 1.0)).unwrap(), c(1.0, 1.0));
        assert_eq!(HoloFn::exp_neg_z2().eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let v = HoloFn::pow_neg(4.0, 1.0).eval(c(0.0, 1.0)).unwrap();
        assert!((v - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn branch_cut_and_domain() {
        assert!(matches!(HoloFn::exp_neg_sqrt(1.0).eval(c(0.0, 2.0)), Err(Error::BranchCutHit(_))));
        assert!(matches!(HoloFn::riesz(1.0).eval(c(0.0, 1.0)), Err(Error::BranchCutHit(_))));
        let s = SectorParams::new(PI / 6.0, 0.5).unwrap();
        assert!(matches!(HoloFn::z().eval_in(&s, c(0.0, 2.0)), Err(Error::OutsideDomain(_))));
        assert!(HoloFn::z().eval_in(&s, c(0.0, 0.4)).is_ok());
        assert!(HoloFn::z().eval_in(&s, c(-3.0, 0.5)).is_ok());
        assert!(SectorParams::new(2.0, 1.0).is_err());
        assert!(SectorParams::with_type(0.5, 1.0, 0.6, 0.0).is_err());
        assert!(SectorParams::with_type(0.5, 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn involutions_are_structural() {
        let f = HoloFn::exp_neg_sqrt(2.0).mul(&HoloFn::constant(c(1.0, 2.0)));
        assert_eq!(f.star().star(), f);
        assert_eq!(f.reflect().reflect(), f);
        let z = c(0.7, 0.2);
        let want = f.eval(z.conj()).unwrap().conj();
        assert_eq!(f.star().eval(z).unwrap(), want);
        assert_eq!(f.reflect().eval(z).unwrap(), f.eval(-z).unwrap());
        assert_eq!(f.dilate(0.5).eval(z).unwrap(), f.eval(z * 0.5).unwrap());
    }

    #[test]
    fn default_phi_matches_closed_forms() {
        let z = c(0.8, 0.3);
        let w = 2.0 * z * z;
        let p2 = (-z * z).exp() * (1.0 + w).sqrt();
        assert!((HoloFn::default_phi(2).eval(z).unwrap() - p2).norm() < 1e-15);
        assert_eq!(HoloFn::default_phi(1), HoloFn::exp_neg_z2());
    }

    #[test]
    fn json_round_trip() {
        let f = HoloFn::product(&[HoloFn::z(), HoloFn::exp_neg_z2()])
            .add(&HoloFn::riesz(0.5).dilate(0.25).star().reflect().powi(-2))
            .recip()
            .with_class(FnClass::Theta { beta: 1.0 });
        let back = HoloFn::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        let g = HoloFn::from_json(r#"{"op":"product","args":[{"prim":"monomial","k":1},{"prim":"expnegz2"}]}"#).unwrap();
        let z = c(0.3, 0.1);
        assert!((g.eval(z).unwrap() - z * (-z * z).exp()).norm() < 1e-16);
        for bad in [r#"{"prim":"nope"}"#, r#"{"op":"scale","t":-1,"arg":{"prim":"expnegz2"}}"#, r#"[1]"#, r#"{"prim":"monomial","k":1000}"#] {
            assert!(HoloFn::from_json(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn class_check_examples() {
        let s = SectorParams::new(PI / 8.0, 0.5).unwrap();
        let psi = HoloFn::z().mul(&HoloFn::pow_neg(1.0, 1.0)).with_class(FnClass::Psi { alpha: 1.0, beta: 1.0 });
        let r = class_check(&psi, &s);
        assert!(r.pass, "{r:?}");
        assert!(r.constant.is_finite() && r.constant < 10.0);

        let one = HoloFn::real(1.0).with_class(FnClass::Psi { alpha: 1.0, beta: 1.0 });
        let r = class_check(&one, &s);
        assert!(!r.pass);
        assert!(r.violations.iter().any(|v| v.contains("at 0")));

        let s6 = SectorParams::new(PI / 6.0, 0.5).unwrap();
        for beta in [0.5, 1.0, 3.0] {
            let phi = HoloFn::exp_neg_z2().with_class(FnClass::Phi { beta });
            let r = class_check(&phi, &s6);
            assert!(r.pass, "{r:?}");
            assert!(r.dilation_constant.unwrap() <= 1.0 + 1e-12);
        }
        for phi in [HoloFn::exp_neg_sqrt(1.0), HoloFn::pow_neg(1.0, 1.0)] {
            let r = class_check(&phi.with_class(FnClass::Phi { beta: 1.0 }), &s);
            assert!(r.pass, "{r:?}");
        }
    }
}
