//! Meromorphic functions with doubly periodic phase.
//!
//! Given zeros `Ξ`, poles `Γ` (equal in number) and integers `m1, m2`,
//!
//! ```text
//! f(z) = e^{a·z} · g(z) · σ(z)/σ(z - ξ0)
//! ```
//!
//! where `ξ0 ≡ ΣΓ - ΣΞ`, `g` is elliptic with zeros `{ξ0} ∪ Ξ` and poles
//! `{0} ∪ Γ`, and `a` solves `Im(a·p_j) = Im(v_j) + 2·m_j·π`. Then
//! `f(z + p_j) = e^{α_j}·f(z)` with `α_j = Re(a·p_j - v_j)` real, so the
//! phase `f/|f|` has both periods.
//!
//! The inverse direction starts from multipliers: [`xi0_from_multipliers`]
//! gives `ξ0`, after which any divisor with `ΣΓ - ΣΞ ≡ ξ0` and suitable
//! `m_j` reproduces them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divisor::{
    accumulate_sigma_factors, build_elliptic, point_value, Divisor, DivisorJson, EllipticFunction,
    EllipticJson,
};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Period};
use crate::lemma::v_from_eta;
use crate::logvalue::{LogValue, PointValue};
use crate::weierstrass::SigmaEvaluator;

/// Tolerance for the defining relations when a spec is loaded from JSON.
pub const SPEC_TOLERANCE: f64 = 1e-8;

/// Relative size of the exponent-system determinant below which the
/// lattice is treated as degenerate.
pub const ILL_CONDITIONED_RATIO: f64 = 1e-10;

pub fn xi0_from_multipliers(alpha1: f64, alpha2: f64, lattice: &Lattice) -> Complex64 {
    let w = (lattice.p2() * alpha1 - lattice.p1() * alpha2) / Complex64::new(0.0, 2.0 * PI);
    lattice.reduce(w).z0
}

pub fn xi0_from_divisor(d: &Divisor, lattice: &Lattice) -> Result<Complex64> {
    if d.zero_count() != d.pole_count() {
        return Err(Error::UnbalancedDivisor { zeros: d.zero_count(), poles: d.pole_count() });
    }
    Ok(lattice.reduce(d.pole_sum() - d.zero_sum()).z0)
}

/// Solves `x·Im(p_j) + y·Re(p_j) = Im(v_j) + 2·m_j·π` for `a = x + iy`.
pub fn solve_exponent(
    lattice: &Lattice,
    v1: Complex64,
    v2: Complex64,
    m1: i64,
    m2: i64,
) -> Result<Complex64> {
    let (p1, p2) = (lattice.p1(), lattice.p2());
    let det = p1.im * p2.re - p2.im * p1.re;
    if det.abs() < ILL_CONDITIONED_RATIO * p1.norm() * p2.norm() {
        return Err(Error::IllConditioned { determinant: det });
    }
    let t1 = v1.im + 2.0 * PI * m1 as f64;
    let t2 = v2.im + 2.0 * PI * m2 as f64;
    let x = (t1 * p2.re - t2 * p1.re) / det;
    let y = (p1.im * t2 - p2.im * t1) / det;
    Ok(Complex64::new(x, y))
}

/// Sigma factors of `f` after cancelling congruent numerator/denominator
/// pairs.
///
/// A pair `σ(z - n)/σ(z - d)` with `n = d + λ` is replaced by its closed
/// form, which is entire and zero-free, so `f` is finite wherever the
/// cancelled zero and pole would coincide.
#[derive(Debug, Clone, PartialEq)]
struct FactorPlan {
    numerator: Vec<Complex64>,
    denominator: Vec<Complex64>,
    /// `(d, m, n)`: factor `σ(z - d - λ)/σ(z - d)` with `λ = m·p1 + n·p2`.
    shifts: Vec<(Complex64, i64, i64)>,
}

impl FactorPlan {
    fn new(lattice: &Lattice, numerator: Vec<Complex64>, mut denominator: Vec<Complex64>) -> Self {
        let tol = 1e-9 * lattice.scale();
        let mut kept = Vec::new();
        let mut shifts = Vec::new();
        for n in numerator {
            match denominator.iter().position(|&d| lattice.distance_mod(n, d) <= tol) {
                Some(k) => {
                    let d = denominator.remove(k);
                    let lam = lattice.nearest_point(n - d);
                    shifts.push((d, lam.m, lam.n));
                }
                None => kept.push(n),
            }
        }
        FactorPlan { numerator: kept, denominator, shifts }
    }
}

/// A synthesized function together with the data that determines it.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseFunctionSpec {
    pub lattice: Lattice,
    pub xi0: Complex64,
    pub a: Complex64,
    pub m: [i64; 2],
    pub alpha: [f64; 2],
    pub v: [Complex64; 2],
    pub g: EllipticFunction,
    /// The intended zeros `Ξ` and poles `Γ` of `f`.
    pub divisor: Divisor,
    plan: FactorPlan,
}

pub fn synthesize(d: &Divisor, m1: i64, m2: i64, lattice: &Lattice) -> Result<PhaseFunctionSpec> {
    let ev = SigmaEvaluator::fast(lattice)?;
    synthesize_with(d, m1, m2, &ev)
}

/// [`synthesize`] reusing an evaluator for the quasi-periods.
pub fn synthesize_with(
    d: &Divisor,
    m1: i64,
    m2: i64,
    ev: &SigmaEvaluator,
) -> Result<PhaseFunctionSpec> {
    let lattice = ev.lattice();
    let xi0 = xi0_from_divisor(d, lattice)?;
    let v = Period::BOTH.map(|j| v_from_eta(ev, xi0, j).v);
    let a = solve_exponent(lattice, v[0], v[1], m1, m2)?;
    let zeros = std::iter::once((xi0, 1)).chain(d.zeros().iter().map(|p| (p.point, p.multiplicity)));
    let poles = std::iter::once((Complex64::new(0.0, 0.0), 1))
        .chain(d.poles().iter().map(|p| (p.point, p.multiplicity)));
    let g = build_elliptic(&Divisor::new(lattice, zeros, poles)?, lattice)?;
    let alpha = [0, 1].map(|k| (a * lattice.period(Period::BOTH[k]) - v[k]).re);
    Ok(PhaseFunctionSpec::assemble(*lattice, xi0, a, [m1, m2], alpha, v, g, d.clone()))
}

impl PhaseFunctionSpec {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        lattice: Lattice,
        xi0: Complex64,
        a: Complex64,
        m: [i64; 2],
        alpha: [f64; 2],
        v: [Complex64; 2],
        g: EllipticFunction,
        divisor: Divisor,
    ) -> Self {
        let numerator = g.zero_points.iter().copied().chain([Complex64::new(0.0, 0.0)]).collect();
        let denominator = g.pole_points.iter().copied().chain([xi0]).collect();
        let plan = FactorPlan::new(&lattice, numerator, denominator);
        PhaseFunctionSpec { lattice, xi0, a, m, alpha, v, g, divisor, plan }
    }

    /// Sigma-factor centers of `f` that remain zeros after cancellation.
    pub fn zero_factors(&self) -> &[Complex64] {
        &self.plan.numerator
    }

    /// Sigma-factor centers of `f` that remain poles after cancellation.
    pub fn pole_factors(&self) -> &[Complex64] {
        &self.plan.denominator
    }

    /// Largest violation of `Im(a·p_j) = Im(v_j) + 2·m_j·π` and
    /// `α_j = Re(a·p_j - v_j)`.
    pub fn relation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, j) in Period::BOTH.into_iter().enumerate() {
            let w = self.a * self.lattice.period(j) - self.v[k];
            worst = worst.max((w.im - 2.0 * PI * self.m[k] as f64).abs());
            worst = worst.max((w.re - self.alpha[k]).abs());
        }
        worst
    }

    pub fn to_json(&self) -> SpecJson {
        let c = |z: Complex64| [z.re, z.im];
        SpecJson {
            lattice: self.lattice,
            divisor: DivisorJson::from_divisor(&self.divisor),
            xi0: c(self.xi0),
            a: c(self.a),
            alpha: self.alpha,
            m: self.m,
            v: [c(self.v[0]), c(self.v[1])],
            g: EllipticJson::from(&self.g),
        }
    }

    /// Rebuilds a spec from JSON, rejecting data that violates the
    /// defining relations by more than [`SPEC_TOLERANCE`].
    pub fn from_json(j: &SpecJson) -> Result<Self> {
        let c = |z: [f64; 2]| Complex64::new(z[0], z[1]);
        let lattice = j.lattice;
        let g = j.g.to_elliptic(&lattice);
        if g.zero_points.len() != g.pole_points.len() {
            return Err(Error::InvalidInput("g must have as many zeros as poles".into()));
        }
        let spec = Self::assemble(
            lattice,
            c(j.xi0),
            c(j.a),
            j.m,
            j.alpha,
            [c(j.v[0]), c(j.v[1])],
            g,
            j.divisor.to_divisor(&lattice)?,
        );
        let defect = spec.relation_defect();
        if defect.is_nan() || defect > SPEC_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "spec is inconsistent: exponent relations violated by {defect:e}"
            )));
        }
        Ok(spec)
    }
}

/// JSON form of a [`PhaseFunctionSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecJson {
    pub lattice: Lattice,
    pub divisor: DivisorJson,
    pub xi0: [f64; 2],
    pub a: [f64; 2],
    pub alpha: [f64; 2],
    pub m: [i64; 2],
    pub v: [[f64; 2]; 2],
    pub g: EllipticJson,
}

fn check_lattice(spec: &PhaseFunctionSpec, ev: &SigmaEvaluator) -> Result<()> {
    if *ev.lattice() != spec.lattice {
        return Err(Error::InvalidInput("evaluator lattice differs from the spec lattice".into()));
    }
    Ok(())
}

/// `f(z)` in log form; zeros of `Ξ` and poles of `Γ` are reported as markers.
pub fn eval_f(spec: &PhaseFunctionSpec, ev: &SigmaEvaluator, z: Complex64) -> Result<PointValue> {
    check_lattice(spec, ev)?;
    let mut log = spec.a * z;
    for &(d, m, n) in &spec.plan.shifts {
        log += ev.shift_log_ratio(m, n, z - d);
    }
    let mut acc = LogValue::from_log(log) * LogValue::from_complex(spec.g.scale);
    let (mut zeros, mut poles) = (0, 0);
    accumulate_sigma_factors(ev, z, &spec.plan.numerator, &mut acc, &mut zeros, false)?;
    accumulate_sigma_factors(ev, z, &spec.plan.denominator, &mut acc, &mut poles, true)?;
    Ok(point_value(acc, zeros, poles))
}

/// Product of the uncancelled numerator factors; its zeros are those of `f`.
pub fn eval_zero_part(spec: &PhaseFunctionSpec, ev: &SigmaEvaluator, z: Complex64) -> Result<PointValue> {
    check_lattice(spec, ev)?;
    let (mut acc, mut hits) = (LogValue::ONE, 0);
    accumulate_sigma_factors(ev, z, &spec.plan.numerator, &mut acc, &mut hits, false)?;
    Ok(point_value(acc, hits, 0))
}

/// Product of the uncancelled denominator factors; its zeros are the poles of `f`.
pub fn eval_pole_part(spec: &PhaseFunctionSpec, ev: &SigmaEvaluator, z: Complex64) -> Result<PointValue> {
    check_lattice(spec, ev)?;
    let (mut acc, mut hits) = (LogValue::ONE, 0);
    accumulate_sigma_factors(ev, z, &spec.plan.denominator, &mut acc, &mut hits, false)?;
    Ok(point_value(acc, hits, 0))
}
