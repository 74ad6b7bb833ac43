//! The four-sigma identity
//!
//! ```text
//! σ(z)/σ(z - ξ0) · σ(z - ξ0 + p_j)/σ(z + p_j) = exp(v_j),
//! v_j = -3ξ0/p_j + ξ0·p_j²·S_j,    S_j = Σ_{λ ∈ L∖{0, -p_j}} 1/(λ(λ + p_j)²)
//! ```
//!
//! `v_j` is linear in `ξ0`; its slope is `-η_j`. The literal lattice sum is
//! available as [`VMethod::DirectSum`]; the default [`VMethod::ViaEta`] uses
//! the quasi-periods of the fast sigma backend.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Period};
use crate::logvalue::wrap_phase;
use crate::weierstrass::SigmaEvaluator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VMethod {
    /// Symmetrized lattice sum over `shells ≥ 2`.
    DirectSum { shells: usize },
    /// `v_j = -η_j·ξ0`.
    ViaEta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaConstant {
    pub xi0: Complex64,
    pub period: Period,
    pub v: Complex64,
    pub method: VMethod,
    /// Shells summed (zero for `ViaEta`).
    pub shells_used: usize,
    /// A-priori bound on `|v - v_exact|`.
    pub error_bound: f64,
}

/// `S_j` summed over the pairs `{λ, -λ - p_j}`.
///
/// Each pair contributes `-p_j/(λ²(λ + p_j)²)`. Representatives have a
/// non-negative coordinate along `p_j`, so the truncation box
/// `{a ∈ [-N-1, N], b ∈ [-N, N]}` (coordinates along `p_j` and the other
/// period) is closed under the involution. Since `p_j` is primitive,
/// `-p_j/2 ∉ L` and there is no unpaired fixed point.
///
/// Returns the sum and a bound on the truncation tail.
pub fn paired_lattice_sum(lattice: &Lattice, j: Period, shells: usize) -> (Complex64, f64) {
    let (p, other) = match j {
        Period::P1 => (lattice.p1(), lattice.p2()),
        Period::P2 => (lattice.p2(), lattice.p1()),
    };
    let n = shells as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    // Outermost rows first so that small terms accumulate before large ones.
    for a in (0..=n).rev() {
        for b in -n..=n {
            if a == 0 && b == 0 {
                continue;
            }
            let lam = p * a as f64 + other * b as f64;
            let lp = lam + p;
            acc -= p / (lam * lam * lp * lp);
        }
    }
    // Pairs outside the box have both |λ| and |λ + p| at least r·k with
    // k = sup-norm of λ > N; at most 8k representatives per k.
    let r = lattice.sup_norm_radius();
    let tail = if shells == 0 {
        f64::INFINITY
    } else {
        4.0 * p.norm() / (r.powi(4) * (shells * shells) as f64)
    };
    (acc, tail)
}

/// `η_j = 3/p_j - p_j²·S_j` from the paired lattice sum, with its error bound.
pub fn eta_direct_sum(lattice: &Lattice, j: Period, shells: usize) -> (Complex64, f64) {
    let p = lattice.period(j);
    let (s, tail) = paired_lattice_sum(lattice, j, shells);
    (3.0 / p - p * p * s, p.norm_sqr() * tail)
}

pub fn v_constant(
    lattice: &Lattice,
    xi0: Complex64,
    j: Period,
    method: VMethod,
) -> Result<LemmaConstant> {
    match method {
        VMethod::DirectSum { shells } => {
            if shells < 2 {
                return Err(Error::InvalidInput("direct sum needs at least two shells".into()));
            }
            let p = lattice.period(j);
            let (s, tail) = paired_lattice_sum(lattice, j, shells);
            Ok(LemmaConstant {
                xi0,
                period: j,
                v: -3.0 * xi0 / p + xi0 * p * p * s,
                method,
                shells_used: shells,
                error_bound: xi0.norm() * p.norm_sqr() * tail,
            })
        }
        VMethod::ViaEta => Ok(v_from_eta(&SigmaEvaluator::fast(lattice)?, xi0, j)),
    }
}

/// `v_j = -η_j·ξ0` with the evaluator's cached quasi-period.
pub fn v_from_eta(ev: &SigmaEvaluator, xi0: Complex64, j: Period) -> LemmaConstant {
    LemmaConstant {
        xi0,
        period: j,
        v: -ev.eta(j) * xi0,
        method: VMethod::ViaEta,
        shells_used: 0,
        error_bound: 0.0,
    }
}

/// ln of `σ(z)/σ(z - ξ0) · σ(z - ξ0 + p_j)/σ(z + p_j)`, any branch.
pub fn four_sigma_log_ratio(
    ev: &SigmaEvaluator,
    xi0: Complex64,
    j: Period,
    z: Complex64,
) -> Result<Complex64> {
    let p = ev.lattice().period(j);
    let mut logs = [Complex64::new(0.0, 0.0); 4];
    for (slot, w) in logs.iter_mut().zip([z, z - xi0, z - xi0 + p, z + p]) {
        let s = ev.sigma(w)?;
        if s.is_zero() {
            return Err(Error::PoleOrZeroHit(w));
        }
        *slot = s.ln();
    }
    Ok(logs[0] - logs[1] + logs[2] - logs[3])
}

/// `|R(z)·exp(-v_j) - 1|` for the four-sigma ratio `R` and `v_j = -η_j·ξ0`.
pub fn lemma_residual(ev: &SigmaEvaluator, xi0: Complex64, j: Period, z: Complex64) -> Result<f64> {
    let v = v_from_eta(ev, xi0, j).v;
    let w = four_sigma_log_ratio(ev, xi0, j, z)? - v;
    let w = Complex64::new(w.re, wrap_phase(w.im));
    Ok((w.exp() - 1.0).norm())
}
