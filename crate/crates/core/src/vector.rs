//! Coordinate vectors in `Z_p^d` and the chart ball `B_r(0)`, `r = p^-1`.
//!
//! [`CoordVector`] is an arbitrary vector of `Z_p` coordinates sharing one
//! absolute precision; its norm is the max-norm. [`ChartVector`] wraps it with
//! the ball invariant: every coordinate is divisible by `p`.

use std::fmt;
use std::ops::Deref;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::padic::{modulus, residue_valuation, validate_prime, NormExp, ZpInt};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoordVector {
    prime: u64,
    precision: u32,
    coords: Vec<BigUint>,
}

impl CoordVector {
    pub fn new(prime: u64, precision: u32, coords: Vec<BigUint>) -> Result<Self> {
        validate_prime(prime)?;
        if precision == 0 {
            return Err(Error::PrecisionExhausted { needed: 1, available: 0 });
        }
        Ok(Self::from_parts(prime, precision, coords))
    }

    pub fn from_i64(prime: u64, precision: u32, coords: &[i64]) -> Result<Self> {
        let zs = coords
            .iter()
            .map(|&c| ZpInt::from_i64(prime, precision, c))
            .collect::<Result<Vec<_>>>()?;
        Self::from_zp(prime, &zs)
    }

    /// Collects scalars into a vector at their common (minimal) precision.
    pub fn from_zp(prime: u64, coords: &[ZpInt]) -> Result<Self> {
        validate_prime(prime)?;
        let mut precision = u32::MAX;
        for c in coords {
            if c.prime() != prime {
                return Err(Error::PrimeMismatch(prime, c.prime()));
            }
            precision = precision.min(c.precision());
        }
        if coords.is_empty() {
            return Err(Error::Usage("empty coordinate list".into()));
        }
        Ok(Self::from_parts(prime, precision, coords.iter().map(|c| c.residue().clone()).collect()))
    }

    pub(crate) fn from_parts(prime: u64, precision: u32, mut coords: Vec<BigUint>) -> Self {
        let m = modulus(prime, precision);
        for c in coords.iter_mut() {
            if *c >= *m {
                *c %= &*m;
            }
        }
        CoordVector { prime, precision, coords }
    }

    pub fn zero(prime: u64, precision: u32, dim: usize) -> Self {
        CoordVector { prime, precision, coords: vec![BigUint::zero(); dim] }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn residues(&self) -> &[BigUint] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> ZpInt {
        ZpInt::from_parts(self.prime, self.precision, self.coords[i].clone())
    }

    pub fn to_zp(&self) -> Vec<ZpInt> {
        (0..self.dim()).map(|i| self.coord(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Max-norm exponent: minimum coordinate valuation.
    pub fn val(&self) -> NormExp {
        self.coords
            .iter()
            .map(|c| NormExp::from_valuation(residue_valuation(c, self.prime)))
            .min()
            .unwrap_or(NormExp::Floor)
    }

    /// Checks prime and dimension; returns the common precision.
    pub fn common_precision(&self, other: &CoordVector) -> Result<u32> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.precision.min(other.precision))
    }

    pub fn add(&self, other: &CoordVector) -> Result<CoordVector> {
        let n = self.common_precision(other)?;
        Ok(Self::from_parts(
            self.prime,
            n,
            self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &CoordVector) -> Result<CoordVector> {
        let n = self.common_precision(other)?;
        let m = modulus(self.prime, n);
        Ok(Self::from_parts(
            self.prime,
            n,
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a % &*m + &*m - b % &*m)
                .collect(),
        ))
    }

    pub fn neg(&self) -> CoordVector {
        let m = modulus(self.prime, self.precision);
        CoordVector {
            prime: self.prime,
            precision: self.precision,
            coords: self
                .coords
                .iter()
                .map(|c| if c.is_zero() { BigUint::zero() } else { &*m - c })
                .collect(),
        }
    }

    /// Coordinatewise `z·v`.
    pub fn scale(&self, z: &ZpInt) -> Result<CoordVector> {
        if z.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime, z.prime()));
        }
        let n = self.precision.min(z.precision());
        Ok(Self::from_parts(self.prime, n, self.coords.iter().map(|c| c * z.residue()).collect()))
    }

    /// Multiplies by `p^k` keeping the absolute precision.
    pub fn mul_pow_p(&self, k: u32) -> CoordVector {
        let pk = modulus(self.prime, k);
        Self::from_parts(self.prime, self.precision, self.coords.iter().map(|c| c * &*pk).collect())
    }

    /// Exact division by `p^k`, losing `k` digits.
    pub fn div_pow_p(&self, k: u32) -> Result<CoordVector> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k >= self.precision {
            return Err(Error::PrecisionExhausted { needed: k + 1, available: self.precision });
        }
        let pk = modulus(self.prime, k);
        let mut out = Vec::with_capacity(self.dim());
        for c in &self.coords {
            let (q, r) = c.div_rem(&pk);
            if !r.is_zero() {
                return Err(Error::NotDivisible(k));
            }
            out.push(q);
        }
        Ok(CoordVector { prime: self.prime, precision: self.precision - k, coords: out })
    }

    /// Truncates to a lower precision (never raises it).
    pub fn reduce(&self, precision: u32) -> CoordVector {
        if precision >= self.precision {
            return self.clone();
        }
        Self::from_parts(self.prime, precision, self.coords.clone())
    }

    /// Treats the stored residues as exact and widens the precision.
    pub(crate) fn lift(&self, precision: u32) -> CoordVector {
        CoordVector { prime: self.prime, precision: precision.max(self.precision), coords: self.coords.clone() }
    }

    /// Norm exponent of `self - other` at the common precision.
    pub fn distance(&self, other: &CoordVector) -> Result<NormExp> {
        Ok(self.sub(other)?.val())
    }

    /// Equality modulo `p^k`, clamped to the common precision.
    pub fn agrees_mod(&self, other: &CoordVector, k: u32) -> bool {
        if self.prime != other.prime || self.dim() != other.dim() {
            return false;
        }
        let k = k.min(self.precision).min(other.precision);
        let m = modulus(self.prime, k);
        self.coords.iter().zip(&other.coords).all(|(a, b)| a % &*m == b % &*m)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, prime: u64, precision: u32, dim: usize, min_valuation: u32) -> Self {
        let coords = (0..dim)
            .map(|_| ZpInt::random(rng, prime, precision, min_valuation).residue().clone())
            .collect();
        CoordVector { prime, precision, coords }
    }
}

impl fmt::Display for CoordVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "] + O({}^{})", self.prime, self.precision)
    }
}

/// A point of the chart ball: all coordinates divisible by `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChartVector(CoordVector);

impl ChartVector {
    pub fn new(v: CoordVector) -> Result<Self> {
        let p = v.prime;
        if v.coords.iter().any(|c| !(c % p).is_zero()) {
            return Err(Error::OutOfChart);
        }
        Ok(ChartVector(v))
    }

    pub fn from_i64(prime: u64, precision: u32, coords: &[i64]) -> Result<Self> {
        Self::new(CoordVector::from_i64(prime, precision, coords)?)
    }

    pub(crate) fn from_parts(prime: u64, precision: u32, coords: Vec<BigUint>) -> Self {
        let v = CoordVector::from_parts(prime, precision, coords);
        debug_assert!(v.coords.iter().all(|c| (c % prime).is_zero()));
        ChartVector(v)
    }

    pub fn zero(prime: u64, precision: u32, dim: usize) -> Self {
        ChartVector(CoordVector::zero(prime, precision, dim))
    }

    pub fn as_coords(&self) -> &CoordVector {
        &self.0
    }

    pub fn into_coords(self) -> CoordVector {
        self.0
    }

    pub fn reduce(&self, precision: u32) -> ChartVector {
        ChartVector(self.0.reduce(precision))
    }

    pub(crate) fn lift(&self, precision: u32) -> ChartVector {
        ChartVector(self.0.lift(precision))
    }

    /// Multiplication by `p^k` stays inside the ball.
    pub fn mul_pow_p(&self, k: u32) -> ChartVector {
        ChartVector(self.0.mul_pow_p(k))
    }

    /// Uniform sample with every coordinate of valuation >= `min_valuation` (>= 1).
    pub fn random<R: Rng + ?Sized>(rng: &mut R, prime: u64, precision: u32, dim: usize, min_valuation: u32) -> Self {
        ChartVector(CoordVector::random(rng, prime, precision, dim, min_valuation.max(1)))
    }
}

impl Deref for ChartVector {
    type Target = CoordVector;

    fn deref(&self) -> &CoordVector {
        &self.0
    }
}

impl TryFrom<CoordVector> for ChartVector {
    type Error = Error;

    fn try_from(v: CoordVector) -> Result<Self> {
        ChartVector::new(v)
    }
}

impl fmt::Display for ChartVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A `Z_p`-linear map `Z_p^cols -> Z_p^rows` given by a row-major matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMap {
    prime: u64,
    precision: u32,
    rows: usize,
    cols: usize,
    entries: Vec<BigUint>,
}

impl LinearMap {
    pub fn new(prime: u64, precision: u32, rows: usize, cols: usize, entries: Vec<BigUint>) -> Result<Self> {
        validate_prime(prime)?;
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: entries.len() });
        }
        let m = modulus(prime, precision);
        let entries = entries.into_iter().map(|e| e % &*m).collect();
        Ok(LinearMap { prime, precision, rows, cols, entries })
    }

    pub fn scalar(c: &ZpInt, dim: usize) -> Self {
        let mut entries = vec![BigUint::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = c.residue().clone();
        }
        LinearMap { prime: c.prime(), precision: c.precision(), rows: dim, cols: dim, entries }
    }

    pub fn identity(prime: u64, precision: u32, dim: usize) -> Self {
        Self::scalar(&ZpInt::one(prime, precision), dim)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Operator-norm exponent: minimum entry valuation.
    pub fn val(&self) -> NormExp {
        self.entries
            .iter()
            .map(|c| NormExp::from_valuation(residue_valuation(c, self.prime)))
            .min()
            .unwrap_or(NormExp::Floor)
    }

    pub fn apply(&self, v: &CoordVector) -> Result<CoordVector> {
        if v.prime != self.prime {
            return Err(Error::PrimeMismatch(self.prime, v.prime));
        }
        if v.dim() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: v.dim() });
        }
        let n = v.precision.min(self.precision);
        let coords = mat_vec(&self.entries, self.rows, self.cols, &v.coords);
        Ok(CoordVector::from_parts(self.prime, n, coords))
    }
}

/// Square-matrix product modulo `m`, row-major `k×k`.
pub(crate) fn mat_mul(a: &[BigUint], b: &[BigUint], k: usize, m: &BigUint) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); k * k];
    for i in 0..k {
        for l in 0..k {
            let ail = &a[i * k + l];
            if ail.is_zero() {
                continue;
            }
            for j in 0..k {
                out[i * k + j] += ail * &b[l * k + j];
            }
        }
    }
    for e in out.iter_mut() {
        *e %= m;
    }
    out
}

pub(crate) fn mat_vec(a: &[BigUint], rows: usize, cols: usize, v: &[BigUint]) -> Vec<BigUint> {
    (0..rows)
        .map(|i| (0..cols).map(|j| &a[i * cols + j] * &v[j]).sum())
        .collect()
}

/// Inverse of a `k×k` matrix over `Z/p^n` by Gauss–Jordan elimination with
/// unit pivots. `None` when the matrix is singular modulo `p`.
pub(crate) fn mat_inv_mod(a: &[BigUint], k: usize, p: u64, n: u32) -> Option<Vec<BigUint>> {
    let m = modulus(p, n);
    let mut a: Vec<BigUint> = a.iter().map(|x| x % &*m).collect();
    let mut inv = vec![BigUint::zero(); k * k];
    for i in 0..k {
        inv[i * k + i] = BigUint::one();
    }
    for col in 0..k {
        let pivot = (col..k).find(|&r| !(&a[r * k + col] % p).is_zero())?;
        if pivot != col {
            for j in 0..k {
                a.swap(pivot * k + j, col * k + j);
                inv.swap(pivot * k + j, col * k + j);
            }
        }
        let pinv = crate::padic::mod_inverse(&a[col * k + col], &m)?;
        for j in 0..k {
            a[col * k + j] = &a[col * k + j] * &pinv % &*m;
            inv[col * k + j] = &inv[col * k + j] * &pinv % &*m;
        }
        for r in 0..k {
            if r == col || a[r * k + col].is_zero() {
                continue;
            }
            let f = a[r * k + col].clone();
            for j in 0..k {
                let sa = &f * &a[col * k + j] % &*m;
                let si = &f * &inv[col * k + j] % &*m;
                a[r * k + j] = (&a[r * k + j] + &*m - sa) % &*m;
                inv[r * k + j] = (&inv[r * k + j] + &*m - si) % &*m;
            }
        }
    }
    Some(inv)
}
