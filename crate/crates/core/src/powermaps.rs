//! The p-th power map, its inverse, and `Z_p`-powers `x^z`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::ChartGroup;
use crate::padic::{NormExp, ZpInt};
use crate::vector::ChartVector;

/// `τ_p(x) = x^p`. Raises the norm exponent by exactly one and carries one
/// more digit of precision than `x`.
pub fn tau_p(group: &ChartGroup, x: &ChartVector) -> Result<ChartVector> {
    group.power_int(x, group.prime() as i64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PthRootResult {
    pub root: ChartVector,
    pub iterations: usize,
    /// `e(x - τ_p(y))` after each iterate, ending at the floor.
    pub residuals: Vec<NormExp>,
}

/// The unique `y` in the ball with `y^p = x`, for `e(x) >= 2`.
///
/// Iterates `y ← y + p⁻¹(x - τ_p(y))` from `y₀ = p⁻¹x`. Each step gains at
/// least one digit because `τ_p - p·id` is smaller than `p⁻¹` in operator
/// norm. The root is determined modulo `p^(N-1)` by `x` modulo `p^N`.
pub fn pth_root(group: &ChartGroup, x: &ChartVector) -> Result<PthRootResult> {
    group.check(x)?;
    if !x.val().at_least(2) {
        return Err(Error::OutOfDomain(format!("p-th root needs e(x) >= 2, got {}", x.val())));
    }
    let n = x.precision();
    if n < 2 {
        return Err(Error::PrecisionExhausted { needed: 2, available: n });
    }
    let p = group.prime();
    // Work with representatives modulo p^N: τ_p(y) mod p^N depends only on
    // y mod p^(N-1).
    let mut y = ChartVector::new(x.div_pow_p(1)?.lift(n))?;
    let mut residuals = Vec::new();
    let limit = n as usize + 1;
    for step in 0..limit {
        let ty = group.power_at_precision(&y, p);
        let r = x.sub(&ty)?;
        let e = r.val();
        if let Some(prev) = residuals.last() {
            if e <= *prev {
                return Err(Error::NonContraction { step });
            }
        }
        residuals.push(e);
        if e.is_floor() {
            let root = y.reduce(n - 1);
            return Ok(PthRootResult { root, iterations: step + 1, residuals });
        }
        let step_vec = r.div_pow_p(1)?.lift(n);
        y = ChartVector::new(y.add(&step_vec)?)?;
    }
    Err(Error::NonContraction { step: limit })
}

/// Applies [`pth_root`] `k` times.
pub fn pth_root_iter(group: &ChartGroup, x: &ChartVector, k: u32) -> Result<ChartVector> {
    let mut y = x.clone();
    for _ in 0..k {
        y = pth_root(group, &y)?.root;
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitOrder {
    LowFirst,
    HighFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PadicPower {
    pub value: ChartVector,
    /// Digits `z_i` with `i < cutoff` were used; later factors are trivial.
    pub cutoff: u32,
    pub result_precision: u32,
}

/// `x^z` for `z ∈ Z_p` as `Π (τ_p^i(x))^{z_i}` over the base-p digits of `z`.
pub fn power_padic(group: &ChartGroup, x: &ChartVector, z: &ZpInt) -> Result<PadicPower> {
    power_padic_ordered(group, x, z, DigitOrder::LowFirst)
}

pub fn power_padic_ordered(
    group: &ChartGroup,
    x: &ChartVector,
    z: &ZpInt,
    order: DigitOrder,
) -> Result<PadicPower> {
    group.check(x)?;
    if z.prime() != group.prime() {
        return Err(Error::PrimeMismatch(group.prime(), z.prime()));
    }
    let n = x.precision();
    let (cutoff, result_precision) = match x.val() {
        NormExp::Floor => (0, n),
        NormExp::Finite(e) => {
            let e = e as u32;
            (n.saturating_sub(e).min(z.precision()), n.min(e + z.precision()))
        }
    };
    let digits = z.digits();
    let p = group.prime();
    let mut factors = Vec::with_capacity(cutoff as usize);
    let mut t = x.clone();
    for (i, &d) in digits.iter().take(cutoff as usize).enumerate() {
        if d != 0 {
            factors.push(group.power_at_precision(&t, d));
        }
        if i + 1 < cutoff as usize {
            t = group.power_at_precision(&t, p);
        }
    }
    if order == DigitOrder::HighFirst {
        factors.reverse();
    }
    let mut acc = group.identity(n);
    for f in &factors {
        acc = group.mul(&acc, f)?;
    }
    Ok(PadicPower { value: acc.reduce(result_precision), cutoff, result_precision })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tau_examples() {
        let g = ChartGroup::multiplicative(5).unwrap();
        assert!(tau_p(&g, &g.identity(10)).unwrap().is_zero());
        let x = ChartVector::from_i64(5, 10, &[5]).unwrap();
        assert_eq!(tau_p(&g, &x).unwrap(), ChartVector::from_i64(5, 11, &[7775]).unwrap());
    }

    #[test]
    fn root_of_zero_takes_one_iteration() {
        let g = ChartGroup::heisenberg(5).unwrap();
        let r = pth_root(&g, &g.identity(10)).unwrap();
        assert!(r.root.is_zero());
        assert_eq!(r.iterations, 1);
        assert_eq!(r.root.precision(), 9);
    }

    #[test]
    fn root_domain_errors() {
        let g = ChartGroup::multiplicative(5).unwrap();
        let x = ChartVector::from_i64(5, 10, &[5]).unwrap();
        assert!(matches!(pth_root(&g, &x), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn root_round_trip_all_groups() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for p in [3u64, 5, 7] {
            for g in [
                ChartGroup::multiplicative(p).unwrap(),
                ChartGroup::gl(2, p).unwrap(),
                ChartGroup::heisenberg(p).unwrap(),
            ] {
                for _ in 0..100 {
                    let level = rng_level(&mut rng);
                    let x = g.random_element(&mut rng, 16, level);
                    let t = tau_p(&g, &x).unwrap();
                    let r = pth_root(&g, &t).unwrap();
                    assert!(r.root.agrees_mod(&x, 16), "{g}");
                    assert_eq!(r.root.precision(), 16);
                    // the root replays exactly at the input's precision
                    assert_eq!(tau_p(&g, &r.root).unwrap(), t.reduce(17));
                    assert!(r.residuals.windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }

    fn rng_level(rng: &mut ChaCha8Rng) -> u32 {
        use rand::Rng;
        rng.gen_range(1..=3)
    }

    #[test]
    fn root_matches_binomial_series() {
        use crate::padic::QpScalar;
        use crate::vector::CoordVector;
        // (1 + c)^(1/5) - 1 = Σ_{k≥1} C(1/5, k) c^k for c = 75.
        // C(1/5, k) = C(1/5, k-1) · (1 - 5(k-1)) / (5k); c is exact, so carry
        // plenty of relative precision through the series.
        let (p, n, work) = (5u64, 12u32, 120u32);
        let g = ChartGroup::multiplicative(p).unwrap();
        let c = ZpInt::from_i64(p, work, 75).unwrap();
        let mut coeff = QpScalar::from_ratio(p, work, 1, 1).unwrap();
        let mut acc = ZpInt::zero(p, n);
        for k in 1..40i64 {
            coeff = coeff.mul(&QpScalar::from_ratio(p, work, 1 - 5 * (k - 1), 5 * k).unwrap()).unwrap();
            let term = coeff.mul(&QpScalar::from_zp(&c.pow(k as u64))).unwrap();
            acc = acc.add(&term.to_zp(n).unwrap()).unwrap();
        }
        let x = ChartVector::from_i64(p, n, &[75]).unwrap();
        let r = pth_root(&g, &x).unwrap();
        let expected = CoordVector::from_zp(p, &[acc]).unwrap();
        assert!(r.root.agrees_mod(&expected, n - 1), "{} vs {}", r.root, expected);
        assert_eq!(r.root.residues()[0].clone() % 5u32, BigUint::from(0u32));
    }

    #[test]
    fn padic_power_extends_integer_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in [3u64, 5] {
            for g in [ChartGroup::gl(2, p).unwrap(), ChartGroup::heisenberg(p).unwrap()] {
                let x = g.random_element(&mut rng, 14, 1);
                for n in [2i64, 17, p as i64, (p * p) as i64, -1] {
                    let z = ZpInt::from_i64(p, 14, n).unwrap();
                    let a = power_padic(&g, &x, &z).unwrap().value;
                    let b = g.power_int(&x, n).unwrap();
                    assert!(a.agrees_mod(&b, 14), "{g} n={n}");
                }
                let one = ZpInt::one(p, 14);
                assert_eq!(power_padic(&g, &x, &one).unwrap().value, x);
            }
        }
    }

    #[test]
    fn padic_power_precision_annotation() {
        let g = ChartGroup::multiplicative(5).unwrap();
        let x = ChartVector::from_i64(5, 20, &[25]).unwrap();
        let z = ZpInt::from_i64(5, 6, 7).unwrap();
        let r = power_padic(&g, &x, &z).unwrap();
        assert_eq!(r.result_precision, 8);
        assert_eq!(r.cutoff, 6);
        let r0 = power_padic(&g, &g.identity(20), &z).unwrap();
        assert_eq!(r0.cutoff, 0);
        assert!(r0.value.is_zero());
    }
}
