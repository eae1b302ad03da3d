//! Reproducing pairs: the Gaussian default pair and the Calderón construction.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use super::{eval_node, FnClass, HoloFn, Node, SectorParams};
use crate::quad::adaptive;
use crate::{Error, Result, C64};

/// `ln t` below which `∫ … dt/t` integrands are treated as zero.
const S_FLOOR: f64 = -60.0;
const QUAD_TOL: f64 = 1e-14;

/// `∫_0^{t_max} a(tz) b(tz) dt/t` by adaptive quadrature in `s = ln t`.
fn product_integral(a: &Node, b: &Node, z: C64, t_max: f64) -> Result<C64> {
    let failure = RefCell::new(None);
    let f = |s: f64| {
        let w = z * s.exp();
        match (eval_node(a, w), eval_node(b, w)) {
            (Ok(x), Ok(y)) => x * y,
            (Err(e), _) | (_, Err(e)) => {
                failure.borrow_mut().get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let hi = t_max.ln();
    let mut total = C64::new(0.0, 0.0);
    // Unit-length pieces keep the adaptive rule from missing a localized bump.
    let mut lo = S_FLOOR;
    while lo < hi {
        let top = (lo + 4.0).min(hi);
        total += adaptive(&f, lo, top, QUAD_TOL);
        lo = top;
    }
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

pub(super) fn truncated_reproducing_integral(psi_tilde: &Arc<Node>, psi: &Arc<Node>, z: C64) -> Result<C64> {
    product_integral(psi_tilde, psi, z, 1.0)
}

/// `∫_0^{t_max} ψ̃(tz)ψ(tz) dt/t`.
pub fn reproducing_integral(psi_tilde: &HoloFn, psi: &HoloFn, z: C64, t_max: f64) -> Result<C64> {
    product_integral(&psi_tilde.node, &psi.node, z, t_max)
}

/// `η ∈ Ψ_β^β` and `φ ∈ Φ^β` with `∫_0^1 η_t² dt/t + φ² = 1`.
///
/// With `n = max(1, ⌈β⌉)`: `η = c_n z^n e^{−z²}`, `c_n² = 2^{n+1}/(n−1)!`, so
/// `∫_0^∞ η_t² dt/t = 1` and `∫_0^1 η_t(z)² dt/t = P(n, 2z²)` (regularized lower
/// incomplete gamma). Hence `φ² = Q(n, 2z²) = e^{−2z²} Σ_{k<n} (2z²)^k/k!`.
pub fn default_pair(beta: f64, sector: &SectorParams) -> Result<(HoloFn, HoloFn)> {
    if sector.theta >= PI / 4.0 {
        return Err(Error::ThetaTooLarge(sector.theta));
    }
    if !(beta > 0.0 && beta <= 64.0) {
        return Err(Error::BadDescriptor(format!("default pair needs beta in (0, 64], got {beta}")));
    }
    let n = (beta.ceil() as u32).max(1);
    let fact: f64 = (1..n).map(|k| k as f64).product();
    let c = (2f64.powi(n as i32 + 1) / fact).sqrt();
    let eta = HoloFn::product(&[HoloFn::real(c), HoloFn::z_pow(n), HoloFn::exp_neg_z2()])
        .with_class(FnClass::Psi { alpha: beta, beta });
    let phi = HoloFn::default_phi(n).with_class(FnClass::Phi { beta });
    Ok((eta, phi))
}

/// `|∫_0^1 η_t(z)² dt/t + φ(z)² − 1|`.
pub fn default_pair_residual(eta: &HoloFn, phi: &HoloFn, z: C64) -> Result<f64> {
    let i = reproducing_integral(eta, eta, z, 1.0)?;
    let p = phi.eval(z)?;
    Ok((i + p * p - 1.0).norm())
}

/// Output of the Calderón construction.
#[derive(Debug, Clone)]
pub struct CalderonPair {
    pub psi_tilde: HoloFn,
    pub phi_tilde: HoloFn,
    /// `∫_0^∞ |ψ(t)ψ(−t)|^{2M} |φ(t)φ(−t)|^{2N} dt/t`.
    pub c: f64,
}

/// `ψ̃ = c^{-1} ψ^{M−1} (ψ*ψ_−ψ_−*)^M (φφ*φ_−φ_−*)^N` and
/// `φ̃ = (1 − ∫_0^1 ψ̃_tψ_t dt/t)/φ`, so `∫_0^1 ψ̃_tψ_t dt/t + φ̃φ = 1`.
pub fn calderon_pair(psi: &HoloFn, phi: &HoloFn, m: u32, n: u32) -> Result<CalderonPair> {
    if m == 0 {
        return Err(Error::BadDescriptor("M must be at least 1".into()));
    }
    for x in [0.0, 1.0] {
        if phi.eval_real(x)?.norm() == 0.0 {
            return Err(Error::PhiVanishes(C64::new(x, 0.0)));
        }
    }
    let g = HoloFn::product(&[psi.star(), psi.reflect(), psi.reflect().star()]);
    let h = HoloFn::product(&[phi.clone(), phi.star(), phi.reflect(), phi.reflect().star()]);
    let integrand = |t: f64| -> Result<f64> {
        let a = (psi.eval_real(t)? * psi.eval_real(-t)?).norm();
        let b = (phi.eval_real(t)? * phi.eval_real(-t)?).norm();
        Ok(a.powi(2 * m as i32) * b.powi(2 * n as i32))
    };
    let failure = RefCell::new(None);
    let real = |s: f64| match integrand(s.exp()) {
        Ok(v) => C64::new(v, 0.0),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            C64::new(0.0, 0.0)
        }
    };
    let mut c = 0.0;
    let mut lo = S_FLOOR;
    while lo < -S_FLOOR {
        c += adaptive(&real, lo, lo + 4.0, QUAD_TOL).re;
        lo += 4.0;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::DegeneratePsi(c));
    }
    let class = match (psi.class(), phi.class().decay()) {
        (FnClass::Psi { alpha, beta }, gamma) => {
            let k = (4 * m - 1) as f64;
            FnClass::Psi { alpha: alpha * k, beta: beta * k + 4.0 * n as f64 * gamma }
        }
        _ => FnClass::HInf,
    };
    let mut parts = vec![HoloFn::real(1.0 / c)];
    if m > 1 {
        parts.push(psi.powi(m as i32 - 1));
    }
    parts.push(g.powi(m as i32));
    if n > 0 {
        parts.push(h.powi(n as i32));
    }
    let psi_tilde = HoloFn::product(&parts).with_class(class);
    let phi_tilde = HoloFn::calderon_phi(&psi_tilde, psi, phi);
    Ok(CalderonPair { psi_tilde, phi_tilde, c })
}

/// `|∫_0^1 ψ̃_t(z)ψ_t(z) dt/t + φ̃(z)φ(z) − 1|`.
pub fn calderon_residual(pair: &CalderonPair, psi: &HoloFn, phi: &HoloFn, z: C64) -> Result<f64> {
    let i = reproducing_integral(&pair.psi_tilde, psi, z, 1.0)?;
    Ok((i + pair.phi_tilde.eval(z)? * phi.eval(z)? - 1.0).norm())
}
