//! Fixed absolute-precision arithmetic in `Z_p` and `Q_p`.
//!
//! A [`ZpInt`] is `x + O(p^N)`: a residue modulo `p^N` together with the prime
//! and the precision `N`. Binary operations combine at the smaller precision
//! and never invent digits. Valuations are integer exponents ([`NormExp`]);
//! nothing in this crate represents a p-adic norm as a float.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default absolute precision used when callers do not choose one.
pub const DEFAULT_PRECISION: u32 = 24;

thread_local! {
    static MODULI: RefCell<HashMap<(u64, u32), Rc<BigUint>>> = RefCell::new(HashMap::new());
}

/// `p^n`, cached per thread.
pub(crate) fn modulus(p: u64, n: u32) -> Rc<BigUint> {
    MODULI.with(|cache| {
        cache
            .borrow_mut()
            .entry((p, n))
            .or_insert_with(|| Rc::new(BigUint::from(p).pow(n)))
            .clone()
    })
}

/// Checks that `p` is an odd prime.
pub fn validate_prime(p: u64) -> Result<()> {
    if p < 3 || p.is_multiple_of(2) {
        return Err(Error::InvalidPrime(p));
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return Err(Error::InvalidPrime(p));
        }
        d += 2;
    }
    Ok(())
}

/// p-adic valuation of a residue, capped: `None` when the residue is zero.
pub(crate) fn residue_valuation(r: &BigUint, p: u64) -> Option<u32> {
    if r.is_zero() {
        return None;
    }
    let pb = BigUint::from(p);
    let mut v = 0;
    let mut cur = r.clone();
    loop {
        let (q, rem) = cur.div_rem(&pb);
        if !rem.is_zero() {
            return Some(v);
        }
        v += 1;
        cur = q;
    }
}

/// Valuation of a nonzero machine integer.
pub fn int_valuation(n: i128, p: u64) -> Option<u32> {
    if n == 0 {
        return None;
    }
    let p = p as i128;
    let mut v = 0;
    let mut m = n;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    Some(v)
}

/// Norm exponent: `‖x‖ = p^(-e)`. `Floor` means the value vanished at the
/// working precision, i.e. it is indistinguishable from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormExp {
    Finite(i64),
    Floor,
}

impl NormExp {
    pub fn from_valuation(v: Option<u32>) -> Self {
        match v {
            Some(v) => NormExp::Finite(v as i64),
            None => NormExp::Floor,
        }
    }

    pub fn is_floor(self) -> bool {
        matches!(self, NormExp::Floor)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            NormExp::Finite(e) => Some(e),
            NormExp::Floor => None,
        }
    }

    /// Exponent of a product of norms.
    pub fn plus(self, other: NormExp) -> NormExp {
        match (self, other) {
            (NormExp::Finite(a), NormExp::Finite(b)) => NormExp::Finite(a + b),
            _ => NormExp::Floor,
        }
    }

    pub fn shift(self, k: i64) -> NormExp {
        match self {
            NormExp::Finite(a) => NormExp::Finite(a + k),
            NormExp::Floor => NormExp::Floor,
        }
    }

    /// `‖x‖ <= p^(-k)`.
    pub fn at_least(self, k: i64) -> bool {
        match self {
            NormExp::Finite(a) => a >= k,
            NormExp::Floor => true,
        }
    }
}

impl PartialOrd for NormExp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormExp {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NormExp::Finite(a), NormExp::Finite(b)) => a.cmp(b),
            (NormExp::Finite(_), NormExp::Floor) => Ordering::Less,
            (NormExp::Floor, NormExp::Finite(_)) => Ordering::Greater,
            (NormExp::Floor, NormExp::Floor) => Ordering::Equal,
        }
    }
}

impl fmt::Display for NormExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormExp::Finite(e) => write!(f, "{e}"),
            NormExp::Floor => f.write_str("floor"),
        }
    }
}

impl Serialize for NormExp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormExp::Finite(e) => s.serialize_i64(*e),
            NormExp::Floor => s.serialize_str("floor"),
        }
    }
}

impl<'de> Deserialize<'de> for NormExp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(e) => Ok(NormExp::Finite(e)),
            Raw::Str(s) if s == "floor" => Ok(NormExp::Floor),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad norm exponent {s:?}"))),
        }
    }
}

/// An element of `Z_p` known modulo `p^precision`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZpInt {
    prime: u64,
    precision: u32,
    residue: BigUint,
}

impl ZpInt {
    /// Builds `residue mod p^precision`.
    pub fn new(prime: u64, precision: u32, residue: BigUint) -> Result<Self> {
        validate_prime(prime)?;
        if precision == 0 {
            return Err(Error::PrecisionExhausted { needed: 1, available: 0 });
        }
        Ok(Self::from_parts(prime, precision, residue))
    }

    pub fn from_i64(prime: u64, precision: u32, value: i64) -> Result<Self> {
        Self::from_bigint(prime, precision, &BigInt::from(value))
    }

    pub fn from_bigint(prime: u64, precision: u32, value: &BigInt) -> Result<Self> {
        validate_prime(prime)?;
        if precision == 0 {
            return Err(Error::PrecisionExhausted { needed: 1, available: 0 });
        }
        Ok(Self::from_parts(prime, precision, reduce_signed(value, prime, precision)))
    }

    pub(crate) fn from_parts(prime: u64, precision: u32, residue: BigUint) -> Self {
        let m = modulus(prime, precision);
        let residue = if residue < *m { residue } else { residue % &*m };
        ZpInt { prime, precision, residue }
    }

    pub fn zero(prime: u64, precision: u32) -> Self {
        ZpInt { prime, precision, residue: BigUint::zero() }
    }

    pub fn one(prime: u64, precision: u32) -> Self {
        Self::from_parts(prime, precision, BigUint::one())
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    /// The representative in `(-p^N/2, p^N/2]`.
    pub fn to_signed(&self) -> BigInt {
        let m = modulus(self.prime, self.precision);
        let r = BigInt::from(self.residue.clone());
        if &self.residue * 2u32 > *m {
            r - BigInt::from((*m).clone())
        } else {
            r
        }
    }

    fn check_prime(&self, other: &ZpInt) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    pub fn add(&self, other: &ZpInt) -> Result<ZpInt> {
        self.check_prime(other)?;
        let n = self.precision.min(other.precision);
        Ok(Self::from_parts(self.prime, n, &self.residue + &other.residue))
    }

    pub fn sub(&self, other: &ZpInt) -> Result<ZpInt> {
        self.check_prime(other)?;
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ZpInt {
        if self.residue.is_zero() {
            return self.clone();
        }
        let m = modulus(self.prime, self.precision);
        ZpInt { prime: self.prime, precision: self.precision, residue: &*m - &self.residue }
    }

    pub fn mul(&self, other: &ZpInt) -> Result<ZpInt> {
        self.check_prime(other)?;
        let n = self.precision.min(other.precision);
        Ok(Self::from_parts(self.prime, n, &self.residue * &other.residue))
    }

    /// Multiplicative inverse of a unit.
    pub fn inv(&self) -> Result<ZpInt> {
        if (&self.residue % self.prime).is_zero() {
            return Err(Error::NotAUnit);
        }
        let m = modulus(self.prime, self.precision);
        let inv = mod_inverse(&self.residue, &m).ok_or(Error::NotAUnit)?;
        Ok(ZpInt { prime: self.prime, precision: self.precision, residue: inv })
    }

    pub fn pow(&self, e: u64) -> ZpInt {
        let m = modulus(self.prime, self.precision);
        ZpInt {
            prime: self.prime,
            precision: self.precision,
            residue: self.residue.modpow(&BigUint::from(e), &m),
        }
    }

    /// Valuation; `Floor` when the residue vanishes (valuation >= N).
    pub fn val(&self) -> NormExp {
        NormExp::from_valuation(residue_valuation(&self.residue, self.prime))
    }

    /// Exact division by `p^k`, losing `k` digits of absolute precision.
    pub fn div_pow_p(&self, k: u32) -> Result<ZpInt> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k >= self.precision {
            return Err(Error::PrecisionExhausted { needed: k + 1, available: self.precision });
        }
        let pk = modulus(self.prime, k);
        let (q, r) = self.residue.div_rem(&pk);
        if !r.is_zero() {
            return Err(Error::NotDivisible(k));
        }
        Ok(ZpInt { prime: self.prime, precision: self.precision - k, residue: q })
    }

    /// Multiplication by `p^k` at unchanged precision.
    pub fn mul_pow_p(&self, k: u32) -> ZpInt {
        Self::from_parts(self.prime, self.precision, &self.residue * &*modulus(self.prime, k))
    }

    /// Truncates to a lower precision. Requests above the current precision
    /// are clamped: digits are never invented.
    pub fn reduce(&self, precision: u32) -> ZpInt {
        if precision >= self.precision {
            return self.clone();
        }
        Self::from_parts(self.prime, precision, self.residue.clone())
    }

    /// Reinterprets the residue at a higher precision (zero-padded digits).
    /// Only for values that are exact representatives by construction.
    pub(crate) fn lift(&self, precision: u32) -> ZpInt {
        ZpInt { prime: self.prime, precision: precision.max(self.precision), residue: self.residue.clone() }
    }

    /// Base-p digits, least significant first, exactly `precision` of them.
    pub fn digits(&self) -> Vec<u64> {
        let pb = BigUint::from(self.prime);
        let mut out = Vec::with_capacity(self.precision as usize);
        let mut cur = self.residue.clone();
        for _ in 0..self.precision {
            let (q, r) = cur.div_rem(&pb);
            out.push(r.to_u64().expect("digit below p"));
            cur = q;
        }
        out
    }

    pub fn from_digits(prime: u64, digits: &[u64]) -> Result<ZpInt> {
        let mut acc = BigUint::zero();
        for d in digits.iter().rev() {
            acc = acc * prime + *d;
        }
        ZpInt::new(prime, digits.len() as u32, acc)
    }

    /// `self ≡ other (mod p^k)`, with `k` clamped to the common precision.
    pub fn agrees_mod(&self, other: &ZpInt, k: u32) -> bool {
        let k = k.min(self.precision).min(other.precision);
        let m = modulus(self.prime, k);
        self.prime == other.prime && (&self.residue % &*m) == (&other.residue % &*m)
    }

    /// Uniform sample among residues with valuation >= `min_valuation`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, prime: u64, precision: u32, min_valuation: u32) -> ZpInt {
        if min_valuation >= precision {
            return ZpInt::zero(prime, precision);
        }
        let bound = modulus(prime, precision - min_valuation);
        let r = rng.gen_biguint_below(&bound);
        Self::from_parts(prime, precision, r * &*modulus(prime, min_valuation))
    }
}

impl fmt::Display for ZpInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.residue, self.prime, self.precision)
    }
}

/// Seeded sampler: identical arguments give identical output.
pub fn zp_random(prime: u64, precision: u32, seed: u64, min_valuation: u32) -> Result<ZpInt> {
    validate_prime(prime)?;
    if min_valuation > precision {
        return Err(Error::Usage(format!(
            "min_valuation {min_valuation} exceeds precision {precision}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ZpInt::random(&mut rng, prime, precision, min_valuation))
}

pub(crate) fn reduce_signed(value: &BigInt, prime: u64, precision: u32) -> BigUint {
    let m = BigInt::from((*modulus(prime, precision)).clone());
    let r = value.mod_floor(&m);
    r.to_biguint().expect("mod_floor is non-negative")
}

/// Inverse modulo `m` by the extended Euclidean algorithm.
pub(crate) fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    e.x.mod_floor(&m).to_biguint()
}

/// A `Q_p` scalar `p^valuation · unit`. The zero scalar has no valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QpScalar {
    prime: u64,
    valuation: Option<i64>,
    unit: ZpInt,
}

impl QpScalar {
    pub fn new(valuation: i64, unit: ZpInt) -> Result<Self> {
        if (unit.residue() % unit.prime()).is_zero() {
            return Err(Error::NotAUnit);
        }
        Ok(QpScalar { prime: unit.prime(), valuation: Some(valuation), unit })
    }

    pub fn zero(prime: u64, rel_precision: u32) -> Self {
        QpScalar { prime, valuation: None, unit: ZpInt::zero(prime, rel_precision) }
    }

    /// `p^k` with the given relative precision.
    pub fn pow_p(prime: u64, k: i64, rel_precision: u32) -> Self {
        QpScalar { prime, valuation: Some(k), unit: ZpInt::one(prime, rel_precision) }
    }

    /// Splits a `Z_p` element into valuation and unit part.
    pub fn from_zp(x: &ZpInt) -> Self {
        match x.val() {
            NormExp::Floor => QpScalar::zero(x.prime(), x.precision()),
            NormExp::Finite(v) => {
                let unit = x.div_pow_p(v as u32).expect("valuation divides");
                QpScalar { prime: x.prime(), valuation: Some(v), unit }
            }
        }
    }

    /// `num / den` as an exact p-adic scalar.
    pub fn from_ratio(prime: u64, rel_precision: u32, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Usage("zero denominator".into()));
        }
        if num == 0 {
            return Ok(QpScalar::zero(prime, rel_precision));
        }
        let split = |n: i64| -> Result<(i64, ZpInt)> {
            let v = int_valuation(n as i128, prime).unwrap_or(0);
            let u = n / (prime as i64).pow(v);
            Ok((v as i64, ZpInt::from_i64(prime, rel_precision, u)?))
        };
        let (vn, un) = split(num)?;
        let (vd, ud) = split(den)?;
        Ok(QpScalar { prime, valuation: Some(vn - vd), unit: un.mul(&ud.inv()?)? })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn valuation(&self) -> Option<i64> {
        self.valuation
    }

    pub fn unit(&self) -> &ZpInt {
        &self.unit
    }

    pub fn rel_precision(&self) -> u32 {
        self.unit.precision()
    }

    pub fn is_zero(&self) -> bool {
        self.valuation.is_none()
    }

    /// `|x|_p = p^(-valuation)`, exact regardless of precision.
    pub fn norm_exp(&self) -> NormExp {
        match self.valuation {
            Some(v) => NormExp::Finite(v),
            None => NormExp::Floor,
        }
    }

    pub fn mul(&self, other: &QpScalar) -> Result<QpScalar> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        let unit = self.unit.mul(&other.unit)?;
        Ok(match (self.valuation, other.valuation) {
            (Some(a), Some(b)) => QpScalar { prime: self.prime, valuation: Some(a + b), unit },
            _ => QpScalar::zero(self.prime, unit.precision()),
        })
    }

    pub fn inv(&self) -> Result<QpScalar> {
        let v = self.valuation.ok_or(Error::NotAUnit)?;
        Ok(QpScalar { prime: self.prime, valuation: Some(-v), unit: self.unit.inv()? })
    }

    /// Converts back to `Z_p` at absolute precision `precision`, when integral.
    pub fn to_zp(&self, precision: u32) -> Result<ZpInt> {
        match self.valuation {
            None => Ok(ZpInt::zero(self.prime, precision)),
            Some(v) if v < 0 => Err(Error::OutOfDomain(format!("valuation {v} is negative"))),
            Some(v) => {
                let abs = (v as u32).saturating_add(self.unit.precision()).min(precision);
                Ok(self.unit.lift(precision).mul_pow_p(v as u32).reduce(abs))
            }
        }
    }
}

impl fmt::Display for QpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.valuation {
            None => write!(f, "0"),
            Some(v) => write!(f, "{}^{} * ({})", self.prime, v, self.unit),
        }
    }
}

/// Parses a decimal integer (optionally signed) and reduces it mod `p^N`.
pub fn parse_residue(s: &str, prime: u64, precision: u32) -> Result<BigUint> {
    let v: BigInt = s
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("not a decimal integer: {s:?}")))?;
    Ok(reduce_signed(&v, prime, precision))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(p: u64, n: u32, r: u64) -> ZpInt {
        ZpInt::new(p, n, BigUint::from(r)).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(z(5, 3, 7).add(&z(5, 3, 118)).unwrap(), z(5, 3, 0));
        assert_eq!(z(5, 3, 7).add(&ZpInt::zero(5, 3)).unwrap(), z(5, 3, 7));
        let s = z(5, 3, 124).add(&z(5, 2, 1)).unwrap();
        assert_eq!(s, z(5, 2, 0));
        assert_eq!(s.precision(), 2);
    }

    #[test]
    fn prime_mismatch_is_usage() {
        let e = z(5, 3, 1).add(&z(7, 3, 1)).unwrap_err();
        assert_eq!(e, Error::PrimeMismatch(5, 7));
        assert!(e.is_usage());
        assert!(z(5, 3, 1).mul(&z(3, 3, 1)).is_err());
    }

    #[test]
    fn mul_examples() {
        assert_eq!(z(5, 4, 5).mul(&z(5, 4, 25)).unwrap(), z(5, 4, 125));
        assert_eq!(z(5, 4, 17).mul(&ZpInt::one(5, 4)).unwrap(), z(5, 4, 17));
        let a = z(5, 8, 50);
        let b = z(5, 8, 75);
        assert_eq!(a.mul(&b).unwrap().val(), NormExp::Finite(4));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(z(5, 3, 2).inv().unwrap(), z(5, 3, 63));
        assert_eq!(ZpInt::one(5, 3).inv().unwrap(), ZpInt::one(5, 3));
        assert_eq!(z(5, 3, 10).inv().unwrap_err(), Error::NotAUnit);
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(z(5, 6, 250).val(), NormExp::Finite(3));
        assert_eq!(z(5, 6, 0).val(), NormExp::Floor);
        assert_eq!(z(5, 6, 7).val(), NormExp::Finite(0));
    }

    #[test]
    fn div_pow_p_examples() {
        let q = z(5, 6, 250).div_pow_p(1).unwrap();
        assert_eq!(q, z(5, 5, 50));
        assert_eq!(z(5, 6, 250).div_pow_p(0).unwrap(), z(5, 6, 250));
        assert_eq!(z(5, 6, 7).div_pow_p(1).unwrap_err(), Error::NotDivisible(1));
        assert!(matches!(z(5, 6, 0).div_pow_p(7), Err(Error::PrecisionExhausted { .. })));
    }

    #[test]
    fn random_examples() {
        assert!(zp_random(5, 6, 1, 6).unwrap().is_zero());
        assert_eq!(zp_random(5, 6, 9, 2).unwrap(), zp_random(5, 6, 9, 2).unwrap());
        assert!(zp_random(5, 6, 9, 2).unwrap().val().at_least(2));
        assert!(zp_random(5, 6, 9, 7).is_err());
    }

    #[test]
    fn leading_digit_is_uniform() {
        // min_valuation = 1: digit 1 should be uniform over 0..p.
        let p = 5u64;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = [0usize; 5];
        let samples = 10_000;
        for _ in 0..samples {
            let x = ZpInt::random(&mut rng, p, 6, 1);
            let d = x.digits();
            assert_eq!(d[0], 0);
            counts[d[1] as usize] += 1;
        }
        let expected = samples as f64 / p as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 4 degrees of freedom, 99.9th percentile is 18.47.
        assert!(chi2 < 18.47, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn rejects_bad_primes() {
        for p in [0, 1, 2, 4, 9, 15, 21] {
            assert!(ZpInt::new(p, 3, BigUint::one()).is_err(), "{p}");
        }
        for p in [3, 5, 7, 11, 101] {
            assert!(ZpInt::new(p, 3, BigUint::one()).is_ok(), "{p}");
        }
    }

    #[test]
    fn digits_round_trip() {
        let x = z(5, 4, 11);
        assert_eq!(x.digits(), vec![1, 2, 0, 0]);
        assert_eq!(ZpInt::from_digits(5, &x.digits()).unwrap(), x);
    }

    #[test]
    fn negative_inputs_reduce() {
        let x = ZpInt::from_i64(5, 3, -1).unwrap();
        assert_eq!(x.residue(), &BigUint::from(124u32));
        assert_eq!(x.to_signed(), BigInt::from(-1));
    }

    #[test]
    fn qp_scalar_ratio() {
        let s = QpScalar::from_ratio(5, 6, 10, 3).unwrap();
        assert_eq!(s.valuation(), Some(1));
        let t = QpScalar::from_ratio(5, 6, 3, 25).unwrap();
        assert_eq!(t.valuation(), Some(-2));
        let prod = s.mul(&t).unwrap();
        assert_eq!(prod.valuation(), Some(-1));
        assert_eq!(prod.unit(), &ZpInt::from_i64(5, 6, 2).unwrap());
        assert!(QpScalar::zero(5, 4).inv().is_err());
        assert_eq!(s.to_zp(6).unwrap(), ZpInt::from_i64(5, 6, 10).unwrap().mul(&ZpInt::from_i64(5, 6, 3).unwrap().inv().unwrap()).unwrap());
    }

    #[test]
    fn norm_exp_order() {
        assert!(NormExp::Finite(3) < NormExp::Floor);
        assert!(NormExp::Finite(-2) < NormExp::Finite(1));
        assert_eq!(NormExp::Finite(2).plus(NormExp::Finite(3)), NormExp::Finite(5));
        assert_eq!(NormExp::Finite(2).plus(NormExp::Floor), NormExp::Floor);
        assert_eq!(serde_json::to_string(&NormExp::Floor).unwrap(), "\"floor\"");
        assert_eq!(serde_json::from_str::<NormExp>("4").unwrap(), NormExp::Finite(4));
    }
}
