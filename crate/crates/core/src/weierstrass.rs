//! The Weierstrass sigma function and its quasi-periods.
//!
//! Two backends evaluate `σ(z) = z·Π_{λ≠0} (1 - z/λ)·exp(z/λ + z²/(2λ²))`:
//!
//! * [`Backend::DirectProduct`] multiplies the canonical factors over the
//!   first `N` square shells of lattice points. It converges slowly and
//!   serves as an oracle.
//! * [`Backend::FastSeries`] reduces the basis, evaluates
//!   `σ(z) = (p1/π)·exp(η1·z²/(2p1))·θ1(πz/p1)/θ1'(0)` on the centered cell
//!   with the nome `q = exp(iπω)` (`|q| ≤ exp(-π√3/2)` after reduction) and
//!   moves arbitrary arguments there with the quasi-periodicity
//!   `σ(z + λ) = ψ(λ)·σ(z)·exp(η(λ)(z + λ/2))`, where `ψ(λ) = +1` exactly when
//!   `λ/2 ∈ L`.
//!
//! Quasi-periods follow the full-period convention
//! `σ(z + p_j) = -σ(z)·exp(η_j(z + p_j/2))`, so that `η_j = 2ζ(p_j/2)` and
//! `η1·p2 - η2·p1 = 2πi` for a positively oriented basis.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{shell_coordinates, Lattice, Period};
use crate::logvalue::LogValue;

/// Default relative accuracy requested from the fast backend.
pub const DEFAULT_TARGET_REL_ERROR: f64 = 1e-12;

/// Relative distance to the lattice below which an argument is a zero of σ.
pub const SNAP_TOLERANCE: f64 = 1e-12;

const MAX_THETA_TERMS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    /// Truncated canonical product over `shells ≥ 1` square shells.
    DirectProduct { shells: usize },
    /// Nome series after basis reduction.
    FastSeries { target_rel_error: f64 },
}

impl Backend {
    pub fn fast() -> Self {
        Backend::FastSeries { target_rel_error: DEFAULT_TARGET_REL_ERROR }
    }

    pub fn direct(shells: usize) -> Self {
        Backend::DirectProduct { shells }
    }
}

/// `σ(z) = σ(z0)·correction` with `z = z0 + m·p1 + n·p2` and `z0` in the
/// centered cell of the evaluator's basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiReduction {
    pub z0: Complex64,
    pub m: i64,
    pub n: i64,
    pub correction: LogValue,
}

/// Configured sigma evaluator; quasi-periods are computed once at build time.
#[derive(Debug, Clone)]
pub struct SigmaEvaluator {
    lattice: Lattice,
    backend: Backend,
    reduced: Lattice,
    to_original: [[i64; 2]; 2],
    // (-1)^n q^{n(n+1)}
    coeffs: Vec<Complex64>,
    theta1_prime0: Complex64,
    eta_reduced: [Complex64; 2],
    eta: [Complex64; 2],
}

impl SigmaEvaluator {
    pub fn new(lattice: &Lattice, backend: Backend) -> Result<Self> {
        match backend {
            Backend::DirectProduct { shells } if shells < 1 => {
                return Err(Error::InvalidInput("direct product needs at least one shell".into()))
            }
            Backend::FastSeries { target_rel_error } if target_rel_error.is_nan() || target_rel_error < 1e-15 => {
                return Err(Error::AccuracyNotMet(format!(
                    "target relative error {target_rel_error:e} is below double precision"
                )))
            }
            _ => {}
        }
        let rb = lattice.reduce_basis();
        let reduced = rb.lattice;
        let tau = reduced.omega();
        if tau.im > 200.0 {
            return Err(Error::AccuracyNotMet(format!(
                "reduced period ratio has Im = {} and the theta series would overflow",
                tau.im
            )));
        }
        let q = (Complex64::i() * PI * tau).exp();
        let qn = q.norm();
        // Terms beyond n contribute at most |q|^{n²}(2n+1)³ relative to the leading one.
        let mut terms = 3;
        while qn.powi((terms * terms) as i32) * ((2 * terms + 1) as f64).powi(3) > 1e-20 {
            terms += 1;
            if terms > MAX_THETA_TERMS {
                return Err(Error::AccuracyNotMet("nome series does not converge".into()));
            }
        }
        let coeffs: Vec<Complex64> = (0..terms)
            .map(|n| {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                q.powu((n * (n + 1)) as u32) * sign
            })
            .collect();
        let odd = |n: usize| (2 * n + 1) as f64;
        let theta1_prime0: Complex64 = coeffs.iter().enumerate().map(|(n, c)| c * odd(n)).sum();
        let theta1_third0: Complex64 =
            coeffs.iter().enumerate().map(|(n, c)| c * odd(n).powi(3)).sum();

        let q1 = reduced.p1();
        // η1 = -(π²/(3 p1))·θ1'''(0)/θ1'(0)
        let eta1 = theta1_third0 / theta1_prime0 * (PI * PI / 3.0) / q1;
        // η2 = 2ζ(p2/2) = η1·τ + (2π/p1)·θ1'(πτ/2)/θ1(πτ/2)
        let v = tau * (PI / 2.0);
        let (mut num, mut den) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (n, c) in coeffs.iter().enumerate() {
            let arg = v * odd(n);
            num += c * odd(n) * arg.cos();
            den += c * arg.sin();
        }
        let eta2 = eta1 * tau + num / den * (2.0 * PI) / q1;
        let eta_reduced = [eta1, eta2];

        let m = rb.to_original;
        let eta = [
            eta1 * m[0][0] as f64 + eta2 * m[0][1] as f64,
            eta1 * m[1][0] as f64 + eta2 * m[1][1] as f64,
        ];
        Ok(SigmaEvaluator {
            lattice: *lattice,
            backend,
            reduced,
            to_original: rb.to_original,
            coeffs,
            theta1_prime0,
            eta_reduced,
            eta,
        })
    }

    /// Fast backend with the default accuracy target.
    pub fn fast(lattice: &Lattice) -> Result<Self> {
        Self::new(lattice, Backend::fast())
    }

    pub fn direct(lattice: &Lattice, shells: usize) -> Result<Self> {
        Self::new(lattice, Backend::direct(shells))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// The reduced basis used internally and its change-of-basis matrix.
    pub fn reduced_basis(&self) -> (&Lattice, [[i64; 2]; 2]) {
        (&self.reduced, self.to_original)
    }

    /// Quasi-period `η_j` of the evaluator's basis.
    pub fn eta(&self, j: Period) -> Complex64 {
        match j {
            Period::P1 => self.eta[0],
            Period::P2 => self.eta[1],
        }
    }

    /// `η(m·p1 + n·p2) = m·η1 + n·η2`.
    pub fn eta_of(&self, m: i64, n: i64) -> Complex64 {
        self.eta[0] * m as f64 + self.eta[1] * n as f64
    }

    /// `η1·p2 - η2·p1 - 2πi·orientation`; zero up to rounding.
    pub fn legendre_defect(&self) -> Complex64 {
        let l = &self.lattice;
        self.eta[0] * l.p2() - self.eta[1] * l.p1()
            - Complex64::new(0.0, 2.0 * PI * l.orientation())
    }

    fn is_lattice_point(&self, z: Complex64, z0: Complex64) -> bool {
        z0.norm() <= SNAP_TOLERANCE * (self.reduced.p1().norm() + z.norm())
    }

    /// σ(z) in log form; exactly [`LogValue::ZERO`] on the lattice.
    pub fn sigma(&self, z: Complex64) -> Result<LogValue> {
        Ok(self.sigma_with_bound(z)?.0)
    }

    /// σ(z) together with a bound on its relative error.
    ///
    /// The direct product reports its a-priori truncation bound, which is
    /// infinite when the truncated shells do not clear `|z|`.
    pub fn sigma_with_bound(&self, z: Complex64) -> Result<(LogValue, f64)> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma argument {z} is not finite")));
        }
        let cell = self.reduced.reduce_centered(z);
        if self.is_lattice_point(z, cell.z0) {
            return Ok((LogValue::ZERO, 0.0));
        }
        match self.backend {
            Backend::FastSeries { target_rel_error } => {
                let lambda = self.reduced.point(cell.m, cell.n);
                let eta = self.eta_reduced[0] * cell.m as f64 + self.eta_reduced[1] * cell.n as f64;
                let w = self.log_sigma_centered(cell.z0)?
                    + quasi_log(eta, lambda, cell.m, cell.n, cell.z0);
                Ok((LogValue::from_log(w), target_rel_error))
            }
            Backend::DirectProduct { shells } => {
                let w = log_sigma_product(&self.lattice, z, shells);
                let bound = direct_product_bound(&self.lattice, z, shells);
                Ok((LogValue::from_log(w), bound.exp_m1()))
            }
        }
    }

    /// ln σ(z0) for `z0` in the centered cell of the reduced basis.
    fn log_sigma_centered(&self, z0: Complex64) -> Result<Complex64> {
        let q1 = self.reduced.p1();
        let v = z0 * PI / q1;
        let series: Complex64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * (v * (2 * n + 1) as f64).sin())
            .sum();
        if !(series.re.is_finite() && series.im.is_finite()) || series.norm() == 0.0 {
            return Err(Error::AccuracyNotMet(format!("theta series degenerated at {z0}")));
        }
        let prefactor = (q1 / PI).ln() + self.eta_reduced[0] * z0 * z0 / (q1 * 2.0);
        Ok(prefactor + series.ln() - self.theta1_prime0.ln())
    }

    /// Range reduction into the centered cell of the evaluator's own basis.
    pub fn sigma_quasi_reduce(&self, z: Complex64) -> QuasiReduction {
        let cell = self.lattice.reduce_centered(z);
        let lambda = self.lattice.point(cell.m, cell.n);
        let eta = self.eta_of(cell.m, cell.n);
        QuasiReduction {
            z0: cell.z0,
            m: cell.m,
            n: cell.n,
            correction: LogValue::from_log(quasi_log(eta, lambda, cell.m, cell.n, cell.z0)),
        }
    }

    /// ln of `σ(w - λ)/σ(w)` for the lattice vector `λ = m·p1 + n·p2`.
    pub fn shift_log_ratio(&self, m: i64, n: i64, w: Complex64) -> Complex64 {
        // σ(w + μ) = ψ(μ)σ(w)exp(η(μ)(w + μ/2)) with μ = -λ
        let lambda = -self.lattice.point(m, n);
        quasi_log(self.eta_of(-m, -n), lambda, m, n, w)
    }
}

/// ln of `ψ(λ)·exp(η(λ)(w + λ/2))`, the factor in `σ(w + λ) = σ(w)·(...)`.
fn quasi_log(eta: Complex64, lambda: Complex64, m: i64, n: i64, w: Complex64) -> Complex64 {
    let sign = if m % 2 == 0 && n % 2 == 0 { 0.0 } else { PI };
    eta * (w + lambda / 2.0) + Complex64::new(0.0, sign)
}

/// `ln(1 - w) + w + w²/2`, the log of the genus-two canonical factor.
fn log_primary_factor(w: Complex64) -> Complex64 {
    if w.norm() < 0.05 {
        let mut power = w * w;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 3..=16 {
            power *= w;
            acc -= power / k as f64;
        }
        acc
    } else {
        (Complex64::new(1.0, 0.0) - w).ln() + w + w * w / 2.0
    }
}

/// ln σ(z) from the canonical product truncated to `shells` square shells.
pub fn log_sigma_product(lattice: &Lattice, z: Complex64, shells: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    // Outer shells first: their terms are the smallest.
    for k in (1..=shells as i64).rev() {
        for (m, n) in shell_coordinates(k) {
            acc += log_primary_factor(z / lattice.point(m, n));
        }
    }
    z.ln() + acc
}

/// A-priori bound on `|ln σ(z) - ln σ_N(z)|` for the `N`-shell product:
/// `Σ_{k>N} 8k·x_k³/(3(1 - x_k))` with `x_k = |z|/(r·k)`, summed in closed form.
pub fn direct_product_bound(lattice: &Lattice, z: Complex64, shells: usize) -> f64 {
    let r = lattice.sup_norm_radius();
    let n = shells as f64;
    let x = z.norm() / (r * (n + 1.0));
    if x >= 1.0 {
        return f64::INFINITY;
    }
    // Σ_{k>N} 1/k² ≤ 1/N
    8.0 * z.norm().powi(3) / (3.0 * r.powi(3) * (1.0 - x)) / n
}
