//! Group models in chart coordinates on the ball `B_r(0)`, `r = p^-1`.
//!
//! All three laws are polynomials with integer coefficients, so reducing
//! coordinates modulo `p^N` is a group homomorphism and every group identity
//! holds exactly at each precision.
//!
//! * `mult`: the chart `1 + x ↦ x` of `1 + pZ_p`, so `x*y = x + y + xy`.
//! * `gl:m`: the congruence subgroup `1 + pM_m(Z_p)` with chart `1 + A ↦ A`.
//! * `heis`: `(a,b,c)*(a',b',c') = (a+a', b+b', c+c'+ab')`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::padic::{int_valuation, modulus, validate_prime};
use crate::vector::{mat_mul, ChartVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Multiplicative,
    GlCongruence(usize),
    Heisenberg,
}

impl GroupKind {
    pub fn dim(self) -> usize {
        match self {
            GroupKind::Multiplicative => 1,
            GroupKind::GlCongruence(m) => m * m,
            GroupKind::Heisenberg => 3,
        }
    }

    pub fn is_abelian(self) -> bool {
        matches!(self, GroupKind::Multiplicative | GroupKind::GlCongruence(1))
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mult" => Ok(GroupKind::Multiplicative),
            "heis" => Ok(GroupKind::Heisenberg),
            _ => {
                let m = s
                    .strip_prefix("gl:")
                    .and_then(|m| m.parse::<usize>().ok())
                    .filter(|&m| m >= 1)
                    .ok_or_else(|| Error::Usage(format!("unknown group {s:?}; expected mult, gl:<m> or heis")))?;
                Ok(GroupKind::GlCongruence(m))
            }
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Multiplicative => f.write_str("mult"),
            GroupKind::GlCongruence(m) => write!(f, "gl:{m}"),
            GroupKind::Heisenberg => f.write_str("heis"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChartGroup {
    kind: GroupKind,
    prime: u64,
}

impl ChartGroup {
    pub fn new(kind: GroupKind, prime: u64) -> Result<Self> {
        validate_prime(prime)?;
        if let GroupKind::GlCongruence(0) = kind {
            return Err(Error::Usage("gl:0 has no coordinates".into()));
        }
        Ok(ChartGroup { kind, prime })
    }

    pub fn multiplicative(prime: u64) -> Result<Self> {
        Self::new(GroupKind::Multiplicative, prime)
    }

    pub fn gl(m: usize, prime: u64) -> Result<Self> {
        Self::new(GroupKind::GlCongruence(m), prime)
    }

    pub fn heisenberg(prime: u64) -> Result<Self> {
        Self::new(GroupKind::Heisenberg, prime)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// `r = p^-radius_exponent`.
    pub fn radius_exponent(&self) -> u32 {
        1
    }

    pub fn identity(&self, precision: u32) -> ChartVector {
        ChartVector::zero(self.prime, precision, self.dim())
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, precision: u32, min_valuation: u32) -> ChartVector {
        ChartVector::random(rng, self.prime, precision, self.dim(), min_valuation)
    }

    pub fn check(&self, x: &ChartVector) -> Result<()> {
        if x.prime() != self.prime {
            return Err(Error::PrimeMismatch(self.prime, x.prime()));
        }
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() });
        }
        Ok(())
    }

    pub fn mul(&self, x: &ChartVector, y: &ChartVector) -> Result<ChartVector> {
        self.check(x)?;
        self.check(y)?;
        let n = x.precision().min(y.precision());
        let m = modulus(self.prime, n);
        Ok(ChartVector::from_parts(self.prime, n, self.mul_res(x.residues(), y.residues(), &m)))
    }

    pub fn inv(&self, x: &ChartVector) -> Result<ChartVector> {
        self.check(x)?;
        let n = x.precision();
        Ok(ChartVector::from_parts(self.prime, n, self.inv_res(x.residues(), n)))
    }

    /// `x*y*x⁻¹*y⁻¹`.
    pub fn commutator(&self, x: &ChartVector, y: &ChartVector) -> Result<ChartVector> {
        let xy = self.mul(x, y)?;
        let xyx = self.mul(&xy, &self.inv(x)?)?;
        self.mul(&xyx, &self.inv(y)?)
    }

    /// `xⁿ` by square-and-multiply.
    ///
    /// The result carries `v_p(n)` extra digits: if `x ≡ x' (mod p^N)` then
    /// `xⁿ ≡ x'ⁿ (mod p^(N + v_p(n)))`, because the p-th power map contracts
    /// differences by exactly one digit on the ball.
    pub fn power_int(&self, x: &ChartVector, n: i64) -> Result<ChartVector> {
        self.check(x)?;
        if n == 0 {
            return Ok(self.identity(x.precision()));
        }
        let gain = int_valuation(n as i128, self.prime).unwrap_or(0);
        let prec = x.precision() + gain;
        let base = if n < 0 { self.inv(x)? } else { x.clone() };
        let coords = self.pow_res(base.residues(), n.unsigned_abs(), prec);
        Ok(ChartVector::from_parts(self.prime, prec, coords))
    }

    /// `xⁿ` computed at the input precision only.
    pub(crate) fn power_at_precision(&self, x: &ChartVector, n: u64) -> ChartVector {
        ChartVector::from_parts(self.prime, x.precision(), self.pow_res(x.residues(), n, x.precision()))
    }

    pub(crate) fn mul_res(&self, x: &[BigUint], y: &[BigUint], m: &BigUint) -> Vec<BigUint> {
        match self.kind {
            GroupKind::Multiplicative => vec![(&x[0] + &y[0] + &x[0] * &y[0]) % m],
            GroupKind::GlCongruence(k) => {
                let prod = mat_mul(x, y, k, m);
                x.iter()
                    .zip(y)
                    .zip(prod)
                    .map(|((a, b), c)| (a + b + c) % m)
                    .collect()
            }
            GroupKind::Heisenberg => vec![
                (&x[0] + &y[0]) % m,
                (&x[1] + &y[1]) % m,
                (&x[2] + &y[2] + &x[0] * &y[1]) % m,
            ],
        }
    }

    pub(crate) fn inv_res(&self, x: &[BigUint], n: u32) -> Vec<BigUint> {
        let m = modulus(self.prime, n);
        let neg = |a: &BigUint| if a.is_zero() { BigUint::zero() } else { &*m - a };
        match self.kind {
            GroupKind::Multiplicative => {
                // ι(x) = -x(1+x)⁻¹
                let unit = (BigUint::one() + &x[0]) % &*m;
                let inv = crate::padic::mod_inverse(&unit, &m).expect("1 + pZ_p is a unit");
                vec![neg(&(&x[0] * inv % &*m))]
            }
            GroupKind::GlCongruence(k) => gl_chart_inverse(x, k, &m),
            GroupKind::Heisenberg => {
                vec![neg(&x[0]), neg(&x[1]), (&x[0] * &x[1] + &*m - &x[2]) % &*m]
            }
        }
    }

    pub(crate) fn pow_res(&self, x: &[BigUint], mut e: u64, n: u32) -> Vec<BigUint> {
        let m = modulus(self.prime, n);
        let mut acc = vec![BigUint::zero(); x.len()];
        let mut base: Vec<BigUint> = x.iter().map(|c| c % &*m).collect();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_res(&acc, &base, &m);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul_res(&base, &base, &m);
            }
        }
        acc
    }
}

impl fmt::Display for ChartGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (p = {})", self.kind, self.prime)
    }
}

/// `(1 + A)⁻¹ - 1` by Newton iteration `Y ← Y(2 - (1+A)Y)`.
fn gl_chart_inverse(a: &[BigUint], k: usize, m: &BigUint) -> Vec<BigUint> {
    let ident = |i: usize| if i / k == i % k { BigUint::one() } else { BigUint::zero() };
    let b: Vec<BigUint> = (0..k * k).map(|i| (&a[i] + ident(i)) % m).collect();
    // Y₀ = 1 - A is correct to second order.
    let mut y: Vec<BigUint> = (0..k * k).map(|i| (ident(i) + m - &a[i] % m) % m).collect();
    loop {
        let by = mat_mul(&b, &y, k, m);
        // E = 1 - BY
        let e: Vec<BigUint> = (0..k * k).map(|i| (ident(i) + m - &by[i]) % m).collect();
        if e.iter().all(Zero::is_zero) {
            break;
        }
        let ye = mat_mul(&y, &e, k, m);
        y = y.iter().zip(ye).map(|(a, b)| (a + b) % m).collect();
    }
    (0..k * k).map(|i| (&y[i] + m - ident(i)) % m).collect()
}
