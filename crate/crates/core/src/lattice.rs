//! Period lattices `L = Z·p1 + Z·p2`.
//!
//! Besides construction this module owns the geometry every other module
//! leans on: barycentric coordinates, reduction of a point into the half-open
//! fundamental cell `{s·p1 + t·p2 : 0 ≤ s,t < 1}` (or the cell centered at the
//! origin), deterministic enumeration of lattice points by square shells, and
//! Gauss–Lagrange reduction of the basis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default threshold on `|Im(p2/p1)|` below which a period pair is rejected.
pub const DEFAULT_DEGENERACY_EPS: f64 = 1e-12;

/// Selects one of the two generating periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Period {
    P1,
    P2,
}

impl Period {
    pub const BOTH: [Period; 2] = [Period::P1, Period::P2];

    /// The 1-based index used on the command line and in JSON.
    pub fn index(self) -> u8 {
        match self {
            Period::P1 => 1,
            Period::P2 => 2,
        }
    }
}

impl TryFrom<u8> for Period {
    type Error = Error;

    fn try_from(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Period::P1),
            2 => Ok(Period::P2),
            _ => Err(Error::InvalidInput(format!("period index must be 1 or 2, got {j}"))),
        }
    }
}

/// A lattice given by an ordered basis `(p1, p2)` with `p2/p1` off the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    p1: Complex64,
    p2: Complex64,
    omega: Complex64,
}

/// Representative of a point in a fundamental cell together with the
/// integer translation: `z = z0 + m·p1 + n·p2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCoordinates {
    pub z0: Complex64,
    pub m: i64,
    pub n: i64,
}

/// A lattice point with its integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub m: i64,
    pub n: i64,
    pub value: Complex64,
}

/// Output of [`Lattice::reduce_basis`].
///
/// `to_original` maps the reduced basis back to the input basis:
/// `p1 = a·p1' + b·p2'` and `p2 = c·p1' + d·p2'` for `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedBasis {
    pub lattice: Lattice,
    pub to_original: [[i64; 2]; 2],
}

impl Lattice {
    /// Builds a lattice, rejecting period pairs with `|Im(p2/p1)| < 1e-12`.
    pub fn new(p1: Complex64, p2: Complex64) -> Result<Self> {
        Self::with_tolerance(p1, p2, DEFAULT_DEGENERACY_EPS)
    }

    pub fn with_tolerance(p1: Complex64, p2: Complex64, eps: f64) -> Result<Self> {
        if !(p1.re.is_finite() && p1.im.is_finite() && p2.re.is_finite() && p2.im.is_finite()) {
            return Err(Error::InvalidInput("periods must be finite".into()));
        }
        if p1 == Complex64::new(0.0, 0.0) || p2 == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidInput("periods must be non-zero".into()));
        }
        let omega = p2 / p1;
        if omega.im.is_nan() || omega.im.abs() < eps {
            return Err(Error::DegenerateLattice { im_omega: omega.im.abs() });
        }
        Ok(Lattice { p1, p2, omega })
    }

    pub fn p1(&self) -> Complex64 {
        self.p1
    }

    pub fn p2(&self) -> Complex64 {
        self.p2
    }

    /// Cached ratio `p2/p1`.
    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    pub fn period(&self, j: Period) -> Complex64 {
        match j {
            Period::P1 => self.p1,
            Period::P2 => self.p2,
        }
    }

    /// `+1` when `Im(p2/p1) > 0` (positively oriented basis), `-1` otherwise.
    pub fn orientation(&self) -> f64 {
        self.omega.im.signum()
    }

    pub fn point(&self, m: i64, n: i64) -> Complex64 {
        self.p1 * m as f64 + self.p2 * n as f64
    }

    /// Length of the shorter period; used to scale absolute tolerances.
    pub fn scale(&self) -> f64 {
        self.p1.norm().min(self.p2.norm())
    }

    /// Real coordinates `(s, t)` with `z = s·p1 + t·p2`.
    pub fn coordinates(&self, z: Complex64) -> (f64, f64) {
        let d = (self.p1.conj() * self.p2).im;
        let s = -(self.p2.conj() * z).im / d;
        let t = (self.p1.conj() * z).im / d;
        (s, t)
    }

    /// Reduces `z` into the half-open cell `{s·p1 + t·p2 : 0 ≤ s,t < 1}`.
    pub fn reduce(&self, z: Complex64) -> CellCoordinates {
        self.reduce_with(z, f64::floor)
    }

    /// Reduces `z` into the cell centered at the origin, `-1/2 ≤ s,t < 1/2`.
    pub fn reduce_centered(&self, z: Complex64) -> CellCoordinates {
        self.reduce_with(z, |x| (x + 0.5).floor())
    }

    fn reduce_with(&self, z: Complex64, pick: impl Fn(f64) -> f64) -> CellCoordinates {
        // Coordinates within rounding of an integer are taken as that integer,
        // which keeps the reduction idempotent on its own output.
        let snap = |x: f64| {
            let r = x.round();
            if (x - r).abs() <= 8.0 * f64::EPSILON * (1.0 + x.abs()) {
                r
            } else {
                x
            }
        };
        let pick = |x: f64| pick(snap(x));
        let (s, t) = self.coordinates(z);
        let m = pick(s);
        let n = pick(t);
        let mut cell = CellCoordinates {
            z0: z - self.p1 * m - self.p2 * n,
            m: m as i64,
            n: n as i64,
        };
        // The subtraction can push the representative just across an edge.
        let (s0, t0) = self.coordinates(cell.z0);
        let shift_s = pick(s0);
        let shift_t = pick(t0);
        if shift_s != 0.0 || shift_t != 0.0 {
            let moved = cell.z0 - self.p1 * shift_s - self.p2 * shift_t;
            let (s1, t1) = self.coordinates(moved);
            if pick(s1) == 0.0 && pick(t1) == 0.0 {
                cell.z0 = moved;
                cell.m += shift_s as i64;
                cell.n += shift_t as i64;
            }
        }
        cell
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        (z - self.nearest_point(z).value).norm()
    }

    /// Distance between `a` and `b` modulo the lattice.
    pub fn distance_mod(&self, a: Complex64, b: Complex64) -> f64 {
        self.distance_to_lattice(a - b)
    }

    /// Nearest lattice vector to `z`, in coordinates of this basis.
    pub fn nearest_point(&self, z: Complex64) -> LatticePoint {
        // The centered cell of a reduced basis lies within one cell of the
        // nearest lattice point; search its neighbours.
        let reduced = self.reduce_basis().lattice;
        let c = reduced.reduce_centered(z);
        let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
        for dm in -1..=1 {
            for dn in -1..=1 {
                let v = reduced.point(dm, dn);
                let d = (c.z0 - v).norm();
                if d < best.0 {
                    best = (d, v);
                }
            }
        }
        let (s, t) = self.coordinates(z - c.z0 + best.1);
        let (m, n) = (s.round() as i64, t.round() as i64);
        LatticePoint { m, n, value: self.point(m, n) }
    }

    /// All lattice points with `0 < max(|m|, |n|) ≤ shells`, shell by shell.
    pub fn shells(&self, shells: usize) -> Vec<LatticePoint> {
        (1..=shells as i64)
            .flat_map(shell_coordinates)
            .map(|(m, n)| LatticePoint { m, n, value: self.point(m, n) })
            .collect()
    }

    /// Smallest `r` with `|m·p1 + n·p2| ≥ r·max(|m|, |n|)` for all integers.
    ///
    /// Computed as the minimum of `|s·p1 + t·p2|` on the boundary of the real
    /// square `max(|s|, |t|) = 1`.
    pub fn sup_norm_radius(&self) -> f64 {
        let edge = |fixed: Complex64, free: Complex64| {
            let t = (-(fixed * free.conj()).re / free.norm_sqr()).clamp(-1.0, 1.0);
            (fixed + free * t).norm()
        };
        edge(self.p1, self.p2).min(edge(self.p2, self.p1))
    }

    /// Gauss–Lagrange reduction.
    ///
    /// The result generates the same lattice, is positively oriented and
    /// satisfies `|Re ω'| ≤ 1/2`, `|ω'| ≥ 1`.
    pub fn reduce_basis(&self) -> ReducedBasis {
        // Rows of `t` express the current basis in terms of (p1, p2).
        let (mut a, mut b) = (self.p1, self.p2);
        let mut t = [[1i64, 0], [0, 1]];
        if b.norm_sqr() < a.norm_sqr() {
            std::mem::swap(&mut a, &mut b);
            t.swap(0, 1);
        }
        for _ in 0..10_000 {
            let k = ((b * a.conj()).re / a.norm_sqr()).round();
            if k != 0.0 {
                b -= a * k;
                let k = k as i64;
                t[1][0] -= k * t[0][0];
                t[1][1] -= k * t[0][1];
            }
            if b.norm_sqr() < a.norm_sqr() {
                std::mem::swap(&mut a, &mut b);
                t.swap(0, 1);
            } else {
                break;
            }
        }
        if (b / a).im < 0.0 {
            b = -b;
            t[1][0] = -t[1][0];
            t[1][1] = -t[1][1];
        }
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        let to_original = [[det * t[1][1], -det * t[0][1]], [-det * t[1][0], det * t[0][0]]];
        ReducedBasis {
            lattice: Lattice { p1: a, p2: b, omega: b / a },
            to_original,
        }
    }
}

/// Integer coordinates on shell `k ≥ 1`, i.e. `max(|m|, |n|) = k`.
///
/// Order: bottom row left to right, top row left to right, then the left and
/// right columns bottom to top.
pub fn shell_coordinates(k: i64) -> impl Iterator<Item = (i64, i64)> {
    let rows = (-k..=k).flat_map(move |m| [(m, -k), (m, k)]);
    let cols = (-k + 1..k).flat_map(move |n| [(-k, n), (k, n)]);
    rows.chain(cols)
}

/// JSON encoding `{"p1": [re, im], "p2": [re, im]}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LatticeJson {
    pub p1: [f64; 2],
    pub p2: [f64; 2],
}

impl From<&Lattice> for LatticeJson {
    fn from(l: &Lattice) -> Self {
        LatticeJson { p1: [l.p1.re, l.p1.im], p2: [l.p2.re, l.p2.im] }
    }
}

impl TryFrom<LatticeJson> for Lattice {
    type Error = Error;

    fn try_from(j: LatticeJson) -> Result<Self> {
        Lattice::new(Complex64::new(j.p1[0], j.p1[1]), Complex64::new(j.p2[0], j.p2[1]))
    }
}

impl Serialize for Lattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = LatticeJson::deserialize(d)?;
        Lattice::try_from(j).map_err(serde::de::Error::custom)
    }
}
