//! Numerical checks for functions with doubly periodic phase.
//!
//! Everything here treats the function as a black box returning
//! [`PointValue`]s. Contour integrals use composite Gauss–Legendre
//! quadrature of the logarithmic derivative, itself taken by finite
//! differences of `log f` so that nothing overflows.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Period};
use crate::lemma::four_sigma_log_ratio;
use crate::logvalue::{wrap_phase, LogValue, PointValue};
use crate::synthesis::{eval_f, eval_pole_part, eval_zero_part, PhaseFunctionSpec};
use crate::weierstrass::SigmaEvaluator;

/// Resamples allowed per grid point that lands on a zero or pole.
pub const MAX_RESAMPLES: usize = 10;
/// Contour offsets tried before giving up.
pub const MAX_OFFSET_RETRIES: usize = 10;
/// Largest distance to an integer accepted for a winding number.
pub const ROUNDING_GATE: f64 = 0.1;
/// Offsets are drawn with magnitude at most this fraction of `min |p_j|`.
pub const OFFSET_FRACTION: f64 = 0.13;

/// Anything that can be evaluated in log form at a point.
pub trait PhaseFunction {
    fn eval(&self, z: Complex64) -> Result<PointValue>;
}

impl<F: Fn(Complex64) -> Result<PointValue>> PhaseFunction for F {
    fn eval(&self, z: Complex64) -> Result<PointValue> {
        self(z)
    }
}

/// Analytic stand-ins used to test the harness itself.
pub mod stubs {
    use super::*;

    /// `exp(c·z)`.
    pub fn exp(c: Complex64) -> impl Fn(Complex64) -> Result<PointValue> {
        move |z| Ok(PointValue::Finite(LogValue::from_log(c * z)))
    }

    pub fn constant(c: Complex64) -> impl Fn(Complex64) -> Result<PointValue> {
        let v = LogValue::from_complex(c);
        move |_| Ok(if v.is_zero() { PointValue::Zero(1) } else { PointValue::Finite(v) })
    }
}

/// `f` of a synthesized spec as a [`PhaseFunction`].
pub fn spec_function<'a>(
    spec: &'a PhaseFunctionSpec,
    ev: &'a SigmaEvaluator,
) -> impl Fn(Complex64) -> Result<PointValue> + 'a {
    move |z| eval_f(spec, ev, z)
}

/// Jittered `nx × ny` sample grid over the parallelogram
/// `origin + s·span[0] + t·span[1]`, `s, t ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Complex64,
    pub span: [Complex64; 2],
    pub nx: usize,
    pub ny: usize,
    pub seed: u64,
}

impl GridSpec {
    /// The fundamental cell of `lattice`.
    pub fn cell(lattice: &Lattice, nx: usize, ny: usize, seed: u64) -> Self {
        GridSpec { origin: Complex64::new(0.0, 0.0), span: [lattice.p1(), lattice.p2()], nx, ny, seed }
    }

    fn point(&self, i: usize, k: usize, rng: &mut ChaCha8Rng) -> Complex64 {
        let s = (i as f64 + rng.random_range(0.05..0.95)) / self.nx as f64;
        let t = (k as f64 + rng.random_range(0.05..0.95)) / self.ny as f64;
        self.origin + self.span[0] * s + self.span[1] * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Periodicity {
    /// Largest deviation of a single `log f(z+p) - log f(z)` from the mean.
    pub residual: f64,
    /// Mean of `log f(z+p) - log f(z)`.
    pub log_multiplier: Complex64,
    pub samples: usize,
}

fn finite_pair(f: &impl PhaseFunction, z: Complex64, p: Complex64) -> Result<Option<(LogValue, LogValue)>> {
    match (f.eval(z)?, f.eval(z + p)?) {
        (PointValue::Finite(a), PointValue::Finite(b)) if !a.is_zero() && !b.is_zero() => Ok(Some((a, b))),
        _ => Ok(None),
    }
}

pub fn phase_periodicity(f: &impl PhaseFunction, p: Complex64, grid: &GridSpec) -> Result<Periodicity> {
    if grid.nx == 0 || grid.ny == 0 {
        return Err(Error::InvalidInput("grid needs at least one point per axis".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let mut diffs = Vec::with_capacity(grid.nx * grid.ny);
    for i in 0..grid.nx {
        for k in 0..grid.ny {
            let mut tries = 0;
            loop {
                let z = grid.point(i, k, &mut rng);
                if let Some((a, b)) = finite_pair(f, z, p)? {
                    diffs.push(b.log_ratio(&a));
                    break;
                }
                tries += 1;
                if tries > MAX_RESAMPLES {
                    return Err(Error::TooManyPoleHits(z));
                }
            }
        }
    }
    // Unwrap phases around the first sample so the mean is not torn at ±π.
    let reference = diffs[0].im;
    for d in diffs.iter_mut() {
        d.im = reference + wrap_phase(d.im - reference);
    }
    let mean = diffs.iter().sum::<Complex64>() / diffs.len() as f64;
    let mean = Complex64::new(mean.re, wrap_phase(mean.im));
    let residual = diffs
        .iter()
        .map(|d| Complex64::new(d.re - mean.re, wrap_phase(d.im - mean.im)).norm())
        .fold(0.0, f64::max);
    Ok(Periodicity { residual, log_multiplier: mean, samples: diffs.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub panels_per_side: usize,
    /// Finite-difference step for `(log f)'`, relative to the lattice scale.
    pub fd_step: f64,
    /// Per-panel absolute tolerance driving adaptive bisection.
    pub panel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { panels_per_side: 32, fd_step: 1e-5, panel_tol: 1e-11, max_depth: 24 }
    }
}

impl QuadratureSpec {
    pub fn with_panels(mut self, panels_per_side: usize) -> Self {
        self.panels_per_side = panels_per_side;
        self
    }
}

/// Nodes and weights of the 8-point Gauss–Legendre rule on `[-1, 1]`.
fn gauss_legendre_8() -> &'static [(f64, f64); 8] {
    use std::sync::OnceLock;
    static RULE: OnceLock<[(f64, f64); 8]> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 8;
        let mut rule = [(0.0, 0.0); N];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_N(x) and its derivative.
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

/// Signals that the contour passes too close to a zero or pole.
struct TooClose;

struct Integrator<'a, F: PhaseFunction> {
    f: &'a F,
    h: f64,
    spec: QuadratureSpec,
    weight: fn(Complex64) -> Complex64,
}

impl<F: PhaseFunction> Integrator<'_, F> {
    /// `(log f)'(z)` by the five-point central difference along the real axis.
    fn log_derivative(&self, z: Complex64) -> std::result::Result<Complex64, TooClose> {
        let at = |w: Complex64| match self.f.eval(w) {
            Ok(PointValue::Finite(v)) if !v.is_zero() && !v.is_pole() => Ok(v),
            _ => Err(TooClose),
        };
        let c = at(z)?;
        let mut d = [Complex64::new(0.0, 0.0); 4];
        for (slot, k) in d.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
            *slot = at(z + self.h * k)?.log_ratio(&c);
        }
        Ok((d[0] - 8.0 * d[1] + 8.0 * d[2] - d[3]) / (12.0 * self.h))
    }

    fn panel(&self, a: Complex64, b: Complex64) -> std::result::Result<Complex64, TooClose> {
        let mid = (a + b) / 2.0;
        let half = (b - a) / 2.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(x, w) in gauss_legendre_8() {
            let z = mid + half * x;
            acc += self.log_derivative(z)? * (self.weight)(z) * w;
        }
        Ok(acc * half)
    }

    fn adaptive(&self, a: Complex64, b: Complex64, whole: Complex64, depth: u32) -> std::result::Result<Complex64, TooClose> {
        let mid = (a + b) / 2.0;
        let left = self.panel(a, mid)?;
        let right = self.panel(mid, b)?;
        if (left + right - whole).norm() <= self.spec.panel_tol {
            return Ok(left + right);
        }
        if depth >= self.spec.max_depth {
            return Err(TooClose);
        }
        Ok(self.adaptive(a, mid, left, depth + 1)? + self.adaptive(mid, b, right, depth + 1)?)
    }

    fn boundary(&self, corners: [Complex64; 4]) -> std::result::Result<Complex64, TooClose> {
        let n = self.spec.panels_per_side;
        let mut total = Complex64::new(0.0, 0.0);
        for side in 0..4 {
            let (s, e) = (corners[side], corners[(side + 1) % 4]);
            for k in 0..n {
                let a = s + (e - s) * (k as f64 / n as f64);
                let b = s + (e - s) * ((k + 1) as f64 / n as f64);
                let whole = self.panel(a, b)?;
                total += self.adaptive(a, b, whole, 0)?;
            }
        }
        Ok(total)
    }
}

/// Contour offsets tried for a given seed, in order.
pub fn contour_offsets(lattice: &Lattice, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_max = OFFSET_FRACTION * lattice.p1().norm().min(lattice.p2().norm());
    (0..MAX_OFFSET_RETRIES)
        .map(|_| {
            let r = r_max * rng.random_range(0.1..1.0);
            Complex64::from_polar(r, rng.random_range(-PI..PI))
        })
        .collect()
}

/// `(1/2πi)·∮ weight(z)·f'/f dz` over `∂(F + offset)`, positively oriented.
fn contour_integral(
    f: &impl PhaseFunction,
    lattice: &Lattice,
    offset: Complex64,
    quad: &QuadratureSpec,
    weight: fn(Complex64) -> Complex64,
) -> Option<Complex64> {
    let it = Integrator { f, h: quad.fd_step * lattice.scale(), spec: *quad, weight };
    let (p1, p2) = (lattice.p1(), lattice.p2());
    let corners = [offset, offset + p1, offset + p1 + p2, offset + p2];
    let raw = it.boundary(corners).ok()?;
    Some(raw * lattice.orientation() / Complex64::new(0.0, 2.0 * PI))
}

fn unit(_: Complex64) -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn identity(z: Complex64) -> Complex64 {
    z
}

/// Rounded winding number with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingCount {
    pub value: i64,
    pub raw: Complex64,
    /// `|raw - value|`.
    pub distance: f64,
    /// `distance < ROUNDING_GATE`.
    pub reliable: bool,
    pub offset: Complex64,
}

/// Zeros minus poles of `f` in `F + offset`, by the argument principle.
///
/// Retries with the next offset from [`contour_offsets`] whenever the
/// boundary comes too close to a zero or pole.
pub fn count_zeros_poles(
    f: &impl PhaseFunction,
    lattice: &Lattice,
    offsets: &[Complex64],
    quad: &QuadratureSpec,
) -> Result<WindingCount> {
    for &offset in offsets {
        if let Some(raw) = contour_integral(f, lattice, offset, quad, unit) {
            let value = raw.re.round();
            let distance = (raw - value).norm();
            return Ok(WindingCount {
                value: value as i64,
                raw,
                distance,
                reliable: distance < ROUNDING_GATE,
                offset,
            });
        }
    }
    Err(Error::ContourTooClose)
}

/// `Σ zeros - Σ poles` of `f`, reduced into the half-open cell.
///
/// The residue sum over `F + offset` is congruent to the one over `F`, so
/// reducing it removes the dependence on the offset.
pub fn divisor_sum(
    f: &impl PhaseFunction,
    lattice: &Lattice,
    offsets: &[Complex64],
    quad: &QuadratureSpec,
) -> Result<(Complex64, Complex64)> {
    for &offset in offsets {
        if let Some(raw) = contour_integral(f, lattice, offset, quad, identity) {
            return Ok((lattice.reduce(raw).z0, offset));
        }
    }
    Err(Error::ContourTooClose)
}

/// Largest pairwise log-domain distance of the four-sigma ratio over samples.
pub fn ratio_z_independence(
    ev: &SigmaEvaluator,
    xi0: Complex64,
    j: Period,
    samples: &[Complex64],
) -> Result<f64> {
    let logs = samples
        .iter()
        .map(|&z| four_sigma_log_ratio(ev, xi0, j, z))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for (k, a) in logs.iter().enumerate() {
        for b in &logs[k + 1..] {
            worst = worst.max(Complex64::new(a.re - b.re, wrap_phase(a.im - b.im)).norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub nx: usize,
    pub ny: usize,
    pub seed: u64,
    pub tol: f64,
    pub quadrature: QuadratureSpec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { nx: 10, ny: 10, seed: 42, tol: 1e-6, quadrature: QuadratureSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub phase_residual_p1: f64,
    pub phase_residual_p2: f64,
    /// `|f(z + p_j)/f(z)|`.
    pub multiplier1: f64,
    pub multiplier2: f64,
    pub log_multiplier1: [f64; 2],
    pub log_multiplier2: [f64; 2],
    /// `max_j |Re(log multiplier_j) - α_j|`.
    pub alpha_error: f64,
    pub zero_count: i64,
    pub pole_count: i64,
    pub expected_zero_count: i64,
    pub expected_pole_count: i64,
    /// Zeros minus poles of `f` itself.
    pub winding: i64,
    /// Worst distance of any winding integral to its integer.
    pub winding_distance: f64,
    pub reliable: bool,
    pub divisor_sum_mod_l: [f64; 2],
    pub xi0_recovered: [f64; 2],
    /// `|xi0_recovered - ξ0|` modulo the lattice.
    pub xi0_error: f64,
    pub samples_used: usize,
    pub contour_offset: [f64; 2],
    pub tolerance: f64,
    pub passed: bool,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn verify_spec(spec: &PhaseFunctionSpec, ev: &SigmaEvaluator, opts: &VerifyOptions) -> Result<VerificationReport> {
    let lattice = &spec.lattice;
    let f = spec_function(spec, ev);
    let grid = GridSpec::cell(lattice, opts.nx, opts.ny, opts.seed);
    let per1 = phase_periodicity(&f, lattice.p1(), &grid)?;
    let per2 = phase_periodicity(&f, lattice.p2(), &grid)?;

    let offsets = contour_offsets(lattice, opts.seed);
    let quad = &opts.quadrature;
    let winding = count_zeros_poles(&f, lattice, &offsets, quad)?;
    // Use the same offset everywhere so the counts refer to one region.
    let offsets = [winding.offset];
    let zeros = count_zeros_poles(&|z| eval_zero_part(spec, ev, z), lattice, &offsets, quad)?;
    let poles = count_zeros_poles(&|z| eval_pole_part(spec, ev, z), lattice, &offsets, quad)?;
    let (dsum, _) = divisor_sum(&f, lattice, &offsets, quad)?;
    let xi0_recovered = lattice.reduce(-dsum).z0;

    let alpha_error = (per1.log_multiplier.re - spec.alpha[0])
        .abs()
        .max((per2.log_multiplier.re - spec.alpha[1]).abs());
    let xi0_error = lattice.distance_mod(xi0_recovered, spec.xi0);
    let winding_distance = winding.distance.max(zeros.distance).max(poles.distance);
    let reliable = winding.reliable && zeros.reliable && poles.reliable;
    let expected_zero_count = spec.divisor.zero_count() as i64;
    let expected_pole_count = spec.divisor.pole_count() as i64;
    let tol = opts.tol;
    let passed = reliable
        && per1.residual <= tol
        && per2.residual <= tol
        && per1.log_multiplier.im.abs() <= tol
        && per2.log_multiplier.im.abs() <= tol
        && alpha_error <= tol
        && xi0_error <= tol
        && winding.value == 0
        && zeros.value == expected_zero_count
        && poles.value == expected_pole_count;

    Ok(VerificationReport {
        phase_residual_p1: per1.residual,
        phase_residual_p2: per2.residual,
        multiplier1: per1.log_multiplier.re.exp(),
        multiplier2: per2.log_multiplier.re.exp(),
        log_multiplier1: pair(per1.log_multiplier),
        log_multiplier2: pair(per2.log_multiplier),
        alpha_error,
        zero_count: zeros.value,
        pole_count: poles.value,
        expected_zero_count,
        expected_pole_count,
        winding: winding.value,
        winding_distance,
        reliable,
        divisor_sum_mod_l: pair(dsum),
        xi0_recovered: pair(xi0_recovered),
        xi0_error,
        samples_used: per1.samples + per2.samples,
        contour_offset: pair(winding.offset),
        tolerance: tol,
        passed,
    })
}
