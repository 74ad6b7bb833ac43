//! Zero/pole multisets in the fundamental cell and the elliptic functions
//! they determine.
//!
//! A divisor with as many zeros as poles whose sums agree modulo `L` is the
//! divisor of an elliptic function, `g(z) = c·Π σ(z - ξ_i) / Π σ(z - γ_k)`,
//! once one zero is moved by a lattice vector so that the sums agree exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::logvalue::{LogValue, PointValue};
use crate::weierstrass::SigmaEvaluator;

/// Tolerance (relative to the lattice scale) for identifying two points.
pub const POINT_TOLERANCE: f64 = 1e-12;

/// Tolerance for the Abel congruence `Σ zeros - Σ poles ∈ L`.
pub const ABEL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisorPoint {
    pub point: Complex64,
    pub multiplicity: u32,
}

/// Zeros and poles with multiplicities, reduced into the half-open cell.
///
/// Congruent points are merged and common zero/pole points cancelled when
/// the divisor is built.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Divisor {
    zeros: Vec<DivisorPoint>,
    poles: Vec<DivisorPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelCheck {
    pub ok: bool,
    /// `Σ zeros - Σ poles` reduced into the cell (nearly zero when `ok`).
    pub defect: Complex64,
}

/// `g(z) = scale·Π σ(z - zero_points[i]) / Π σ(z - pole_points[k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticFunction {
    pub lattice: Lattice,
    pub zero_points: Vec<Complex64>,
    pub pole_points: Vec<Complex64>,
    pub scale: Complex64,
}

fn collect(
    lattice: &Lattice,
    points: impl IntoIterator<Item = (Complex64, u32)>,
) -> Result<Vec<DivisorPoint>> {
    let tol = POINT_TOLERANCE * lattice.scale();
    let mut out: Vec<DivisorPoint> = Vec::new();
    for (z, mult) in points {
        if mult == 0 {
            return Err(Error::InvalidInput(format!("point {z} has multiplicity 0")));
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("divisor point {z} is not finite")));
        }
        let z0 = lattice.reduce(z).z0;
        match out.iter_mut().find(|p| lattice.distance_mod(p.point, z0) <= tol) {
            Some(p) => p.multiplicity += mult,
            None => out.push(DivisorPoint { point: z0, multiplicity: mult }),
        }
    }
    Ok(out)
}

impl Divisor {
    pub fn new(
        lattice: &Lattice,
        zeros: impl IntoIterator<Item = (Complex64, u32)>,
        poles: impl IntoIterator<Item = (Complex64, u32)>,
    ) -> Result<Self> {
        let mut zeros = collect(lattice, zeros)?;
        let mut poles = collect(lattice, poles)?;
        let tol = POINT_TOLERANCE * lattice.scale();
        for z in zeros.iter_mut() {
            if let Some(p) = poles.iter_mut().find(|p| lattice.distance_mod(p.point, z.point) <= tol) {
                let common = z.multiplicity.min(p.multiplicity);
                z.multiplicity -= common;
                p.multiplicity -= common;
            }
        }
        zeros.retain(|p| p.multiplicity > 0);
        poles.retain(|p| p.multiplicity > 0);
        Ok(Divisor { zeros, poles })
    }

    /// Simple zeros and poles.
    pub fn simple(lattice: &Lattice, zeros: &[Complex64], poles: &[Complex64]) -> Result<Self> {
        Self::new(lattice, zeros.iter().map(|&z| (z, 1)), poles.iter().map(|&z| (z, 1)))
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn zeros(&self) -> &[DivisorPoint] {
        &self.zeros
    }

    pub fn poles(&self) -> &[DivisorPoint] {
        &self.poles
    }

    pub fn zero_count(&self) -> usize {
        self.zeros.iter().map(|p| p.multiplicity as usize).sum()
    }

    pub fn pole_count(&self) -> usize {
        self.poles.iter().map(|p| p.multiplicity as usize).sum()
    }

    pub fn zero_sum(&self) -> Complex64 {
        self.zeros.iter().map(|p| p.point * p.multiplicity as f64).sum()
    }

    pub fn pole_sum(&self) -> Complex64 {
        self.poles.iter().map(|p| p.point * p.multiplicity as f64).sum()
    }

    /// Zeros listed with repetition.
    pub fn expanded_zeros(&self) -> Vec<Complex64> {
        expand(&self.zeros)
    }

    pub fn expanded_poles(&self) -> Vec<Complex64> {
        expand(&self.poles)
    }
}

fn expand(points: &[DivisorPoint]) -> Vec<Complex64> {
    points
        .iter()
        .flat_map(|p| std::iter::repeat_n(p.point, p.multiplicity as usize))
        .collect()
}

pub fn validate_abel(d: &Divisor, lattice: &Lattice) -> AbelCheck {
    let diff = d.zero_sum() - d.pole_sum();
    let near = lattice.nearest_point(diff);
    let in_lattice = (diff - near.value).norm() <= ABEL_TOLERANCE;
    AbelCheck {
        ok: d.zero_count() == d.pole_count() && in_lattice,
        defect: if in_lattice { diff - near.value } else { lattice.reduce(diff).z0 },
    }
}

/// Builds `g` from a divisor satisfying the Abel condition.
///
/// The lexicographically largest zero (by real, then imaginary part) is
/// replaced by `ξ - δ` with `δ = Σ zeros - Σ poles`, making the sums equal.
pub fn build_elliptic(d: &Divisor, lattice: &Lattice) -> Result<EllipticFunction> {
    let check = validate_abel(d, lattice);
    if !check.ok {
        return Err(Error::AbelViolation { defect: check.defect });
    }
    let mut zero_points = d.expanded_zeros();
    let pole_points = d.expanded_poles();
    let delta = zero_points.iter().sum::<Complex64>() - pole_points.iter().sum::<Complex64>();
    if let Some(largest) = zero_points
        .iter_mut()
        .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
    {
        *largest -= delta;
    }
    Ok(EllipticFunction {
        lattice: *lattice,
        zero_points,
        pole_points,
        scale: Complex64::new(1.0, 0.0),
    })
}

impl EllipticFunction {
    pub fn constant(lattice: &Lattice, scale: Complex64) -> Self {
        EllipticFunction { lattice: *lattice, zero_points: vec![], pole_points: vec![], scale }
    }

    pub fn with_scale(mut self, scale: Complex64) -> Self {
        self.scale = scale;
        self
    }
}

/// Multiplies `acc` by `σ(z - a)^{±1}` for each point, counting lattice hits.
pub(crate) fn accumulate_sigma_factors(
    ev: &SigmaEvaluator,
    z: Complex64,
    points: &[Complex64],
    acc: &mut LogValue,
    hits: &mut u32,
    invert: bool,
) -> Result<()> {
    for &a in points {
        let s = ev.sigma(z - a)?;
        if s.is_zero() {
            *hits += 1;
        } else if invert {
            *acc = *acc / s;
        } else {
            *acc = *acc * s;
        }
    }
    Ok(())
}

/// Folds zero/pole hit counts and the remaining finite part into a value.
pub(crate) fn point_value(acc: LogValue, zero_hits: u32, pole_hits: u32) -> PointValue {
    match zero_hits.cmp(&pole_hits) {
        std::cmp::Ordering::Greater => PointValue::Zero(zero_hits - pole_hits),
        std::cmp::Ordering::Less => PointValue::Pole(pole_hits - zero_hits),
        std::cmp::Ordering::Equal => PointValue::Finite(acc),
    }
}

pub fn eval_elliptic(g: &EllipticFunction, ev: &SigmaEvaluator, z: Complex64) -> Result<PointValue> {
    let mut acc = LogValue::from_complex(g.scale);
    let (mut zeros, mut poles) = (0, 0);
    accumulate_sigma_factors(ev, z, &g.zero_points, &mut acc, &mut zeros, false)?;
    accumulate_sigma_factors(ev, z, &g.pole_points, &mut acc, &mut poles, true)?;
    Ok(point_value(acc, zeros, poles))
}

/// JSON encoding `{"zeros": [[re, im, mult], ...], "poles": [...]}`.
///
/// The multiplicity may be omitted and defaults to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivisorJson {
    #[serde(default)]
    pub zeros: Vec<Vec<f64>>,
    #[serde(default)]
    pub poles: Vec<Vec<f64>>,
}

fn parse_points(raw: &[Vec<f64>]) -> Result<Vec<(Complex64, u32)>> {
    raw.iter()
        .map(|e| match e.as_slice() {
            [re, im] => Ok((Complex64::new(*re, *im), 1)),
            [re, im, m] if *m >= 1.0 && m.fract() == 0.0 && *m <= u32::MAX as f64 => {
                Ok((Complex64::new(*re, *im), *m as u32))
            }
            _ => Err(Error::InvalidInput(format!(
                "divisor entries must be [re, im] or [re, im, multiplicity ≥ 1], got {e:?}"
            ))),
        })
        .collect()
}

impl DivisorJson {
    pub fn from_divisor(d: &Divisor) -> Self {
        let enc = |ps: &[DivisorPoint]| {
            ps.iter().map(|p| vec![p.point.re, p.point.im, p.multiplicity as f64]).collect()
        };
        DivisorJson { zeros: enc(&d.zeros), poles: enc(&d.poles) }
    }

    pub fn to_divisor(&self, lattice: &Lattice) -> Result<Divisor> {
        Divisor::new(lattice, parse_points(&self.zeros)?, parse_points(&self.poles)?)
    }
}

/// JSON encoding of an [`EllipticFunction`] (the lattice is stored alongside).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipticJson {
    pub zeros: Vec<[f64; 2]>,
    pub poles: Vec<[f64; 2]>,
    pub scale: [f64; 2],
}

impl From<&EllipticFunction> for EllipticJson {
    fn from(g: &EllipticFunction) -> Self {
        let enc = |ps: &[Complex64]| ps.iter().map(|p| [p.re, p.im]).collect();
        EllipticJson {
            zeros: enc(&g.zero_points),
            poles: enc(&g.pole_points),
            scale: [g.scale.re, g.scale.im],
        }
    }
}

impl EllipticJson {
    pub fn to_elliptic(&self, lattice: &Lattice) -> EllipticFunction {
        let dec = |ps: &[[f64; 2]]| ps.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        EllipticFunction {
            lattice: *lattice,
            zero_points: dec(&self.zeros),
            pole_points: dec(&self.poles),
            scale: Complex64::new(self.scale[0], self.scale[1]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weierstrass::testing::wp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> Lattice {
        Lattice::new(c(1.0, 0.0), c(0.0, 1.0)).unwrap()
    }

    #[test]
    fn abel_examples() {
        let l = square();
        assert_eq!(validate_abel(&Divisor::empty(), &l), AbelCheck { ok: true, defect: c(0.0, 0.0) });

        let d = Divisor::simple(&l, &[c(0.25, 0.0), c(0.75, 0.0)], &[c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        assert_eq!(d.poles().len(), 1);
        assert_eq!(d.pole_count(), 2);
        let chk = validate_abel(&d, &l);
        assert!(chk.ok && chk.defect.norm() < 1e-15);

        let d = Divisor::simple(&l, &[c(0.3, 0.0)], &[c(0.5, 0.0)]).unwrap();
        let chk = validate_abel(&d, &l);
        assert!(!chk.ok);
        assert!((chk.defect - c(0.8, 0.0)).norm() < 1e-12);

        let d = Divisor::simple(&l, &[c(0.3, 0.0), c(0.4, 0.0)], &[c(0.7, 0.0)]).unwrap();
        assert!(!validate_abel(&d, &l).ok);
    }

    #[test]
    fn construction_reduces_and_cancels() {
        let l = square();
        let d = Divisor::new(&l, [(c(1.25, -0.5), 2), (c(0.25, 0.5), 1)], [(c(0.25, 0.5), 1), (c(0.1, 0.1), 2)])
            .unwrap();
        assert_eq!(d.zeros(), &[DivisorPoint { point: c(0.25, 0.5), multiplicity: 2 }]);
        assert_eq!(d.poles(), &[DivisorPoint { point: c(0.1, 0.1), multiplicity: 2 }]);
        assert!(Divisor::new(&l, [(c(0.1, 0.1), 0)], []).is_err());
    }

    #[test]
    fn empty_divisor_is_constant_one() {
        let l = square();
        let g = build_elliptic(&Divisor::empty(), &l).unwrap();
        let ev = SigmaEvaluator::fast(&l).unwrap();
        assert_eq!(eval_elliptic(&g, &ev, c(0.3, 0.7)).unwrap(), PointValue::Finite(LogValue::ONE));
    }

    #[test]
    fn invalid_divisor_is_rejected() {
        let l = square();
        let d = Divisor::simple(&l, &[c(0.3, 0.0)], &[c(0.5, 0.0)]).unwrap();
        assert!(matches!(build_elliptic(&d, &l), Err(Error::AbelViolation { .. })));
    }

    #[test]
    fn delta_adjustment_keeps_divisor_class() {
        let l = Lattice::new(c(1.0, 0.2), c(0.3, 1.1)).unwrap();
        let zeros = [c(0.9, 0.8), c(0.7, 0.9)];
        let poles = [c(0.2, 0.1), l.reduce(zeros[0] + zeros[1] - c(0.2, 0.1)).z0];
        let d = Divisor::simple(&l, &zeros, &poles).unwrap();
        let g = build_elliptic(&d, &l).unwrap();
        let zs: Complex64 = g.zero_points.iter().sum();
        let ps: Complex64 = g.pole_points.iter().sum();
        assert!((zs - ps).norm() <= 1e-12);
        for (orig, adj) in d.expanded_zeros().iter().zip(&g.zero_points) {
            assert!((l.reduce(*adj).z0 - orig).norm() <= 1e-12);
        }
    }

    #[test]
    fn wp_like_function() {
        let l = square();
        let w = c(0.3, 0.1);
        let d = Divisor::new(&l, [(w, 1), (-w, 1)], [(c(0.0, 0.0), 2)]).unwrap();
        let g = build_elliptic(&d, &l).unwrap();
        let ev = SigmaEvaluator::fast(&l).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ratios = vec![];
        for _ in 0..10 {
            let z = c(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let gv = eval_elliptic(&g, &ev, z).unwrap().finite().unwrap().to_complex().unwrap();
            ratios.push(gv / (wp(&l, z) - wp(&l, w)));
        }
        for r in &ratios {
            assert!((r / ratios[0] - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn markers_and_periodicity() {
        let l = Lattice::new(c(1.0, 0.0), c(0.2, 1.3)).unwrap();
        let zeros = [c(0.3, 0.4), c(0.6, 0.2)];
        let poles = [c(0.5, 0.5), c(0.4, 0.1)];
        let d = Divisor::simple(&l, &zeros, &poles).unwrap();
        let g = build_elliptic(&d, &l).unwrap();
        let ev = SigmaEvaluator::fast(&l).unwrap();
        assert_eq!(eval_elliptic(&g, &ev, zeros[0]).unwrap(), PointValue::Zero(1));
        assert_eq!(eval_elliptic(&g, &ev, poles[1] + l.p2()).unwrap(), PointValue::Pole(1));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let base = eval_elliptic(&g, &ev, z).unwrap().finite().unwrap();
            for p in [l.p1(), l.p2()] {
                let shifted = eval_elliptic(&g, &ev, z + p).unwrap().finite().unwrap();
                assert!((shifted.log_ratio(&base).exp() - 1.0).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn json_encodings() {
        let l = square();
        let j: DivisorJson = serde_json::from_str(r#"{"zeros": [[0.25, 0, 2]], "poles": [[0.5, 0]]}"#).unwrap();
        let d = j.to_divisor(&l).unwrap();
        assert_eq!(d.zero_count(), 2);
        assert_eq!(d.pole_count(), 1);
        let j: DivisorJson = serde_json::from_str(r#"{"zeros": [[0.25, 0, 1.5]]}"#).unwrap();
        assert!(j.to_divisor(&l).is_err());
        let back = DivisorJson::from_divisor(&d).to_divisor(&l).unwrap();
        assert_eq!(back, d);
    }
}
