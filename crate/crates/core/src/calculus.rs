//! Probes for ultrametric calculus: difference quotients, strict
//! differentiability, Taylor remainders, multilinear perturbation and the
//! digit-reindexing curve with vanishing derivative.
//!
//! Probes report exponent tables. Row `m` holds the worst (smallest) exponent
//! over the sampled pairs at scale `m`; a row at `floor` means every sampled
//! numerator vanished at the working precision.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::explog::{exp_chart, log_chart};
use crate::group::{ChartGroup, GroupKind};
use crate::padic::{modulus, NormExp, QpScalar, ZpInt};
use crate::powermaps::{pth_root, tau_p};
use crate::sampling::sample_rng;
use crate::vector::{mat_mul, ChartVector, CoordVector, LinearMap};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeKind {
    Identity,
    Tau,
    PthRoot,
    Log,
    Exp,
    /// `x ↦ a * x`
    MulLeft(ChartVector),
    /// `x ↦ x * a`
    MulRight(ChartVector),
    Linear(LinearMap),
}

/// A map on the chart ball drawn from the library's own operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeFunction {
    group: ChartGroup,
    kind: ProbeKind,
}

impl ProbeFunction {
    pub fn new(group: ChartGroup, kind: ProbeKind) -> Self {
        ProbeFunction { group, kind }
    }

    /// `identity`, `tau`, `root`, `log` or `exp`.
    pub fn named(group: ChartGroup, name: &str) -> Result<Self> {
        let kind = match name {
            "identity" | "id" => ProbeKind::Identity,
            "tau" => ProbeKind::Tau,
            "root" => ProbeKind::PthRoot,
            "log" => ProbeKind::Log,
            "exp" => ProbeKind::Exp,
            other => return Err(Error::Usage(format!("unknown probe function '{other}'"))),
        };
        Ok(ProbeFunction { group, kind })
    }

    pub fn group(&self) -> &ChartGroup {
        &self.group
    }

    pub fn kind(&self) -> &ProbeKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ProbeKind::Identity => "identity",
            ProbeKind::Tau => "tau",
            ProbeKind::PthRoot => "root",
            ProbeKind::Log => "log",
            ProbeKind::Exp => "exp",
            ProbeKind::MulLeft(_) => "mul_left",
            ProbeKind::MulRight(_) => "mul_right",
            ProbeKind::Linear(_) => "linear",
        }
    }

    /// Evaluates `f(x)`. Logarithm and exponential return `⌊N/2⌋` digits
    /// for an input known to `N` digits.
    pub fn eval(&self, x: &CoordVector) -> Result<CoordVector> {
        if let ProbeKind::Linear(a) = &self.kind {
            return a.apply(x);
        }
        let x = ChartVector::new(x.clone())?;
        self.group.check(&x)?;
        let g = &self.group;
        let out = match &self.kind {
            ProbeKind::Identity => x,
            ProbeKind::Tau => tau_p(g, &x)?,
            ProbeKind::PthRoot => pth_root(g, &x)?.root,
            ProbeKind::Log => log_chart(g, &x, x.precision() / 2)?.0,
            ProbeKind::Exp => exp_chart(g, &x, x.precision() / 2)?.0,
            ProbeKind::MulLeft(a) => g.mul(a, &x)?,
            ProbeKind::MulRight(a) => g.mul(&x, a)?,
            ProbeKind::Linear(_) => unreachable!(),
        };
        Ok(out.into_coords())
    }

    /// Closed-form derivative at `x0`, where one is available.
    pub fn jacobian(&self, x0: &ChartVector, precision: u32) -> Result<LinearMap> {
        let p = self.group.prime();
        let d = self.group.dim();
        let unavailable = || Error::Usage(format!("no closed-form derivative of {} on {}", self.name(), self.group));
        match (&self.kind, self.group.kind()) {
            (ProbeKind::Identity, _) => Ok(LinearMap::identity(p, precision, d)),
            (ProbeKind::Linear(a), _) => Ok(a.clone()),
            (ProbeKind::Tau, GroupKind::Multiplicative) => {
                let u = ZpInt::one(p, precision).add(&x0.coord(0).reduce(precision))?;
                let c = u.pow(p - 1).mul(&ZpInt::from_i64(p, precision, p as i64)?)?;
                Ok(LinearMap::scalar(&c, 1))
            }
            (ProbeKind::Tau, GroupKind::Heisenberg) => {
                let m = modulus(p, precision);
                let c = BigUint::from(p * (p - 1) / 2);
                let (a, b) = (&x0.residues()[0], &x0.residues()[1]);
                let pp = BigUint::from(p);
                let z = BigUint::from(0u32);
                let entries = vec![
                    pp.clone(), z.clone(), z.clone(),
                    z.clone(), pp.clone(), z,
                    &c * b % &*m, &c * a % &*m, pp,
                ];
                LinearMap::new(p, precision, 3, 3, entries)
            }
            (ProbeKind::Tau, GroupKind::GlCongruence(k)) => gl_tau_jacobian(x0, k, p, precision),
            (ProbeKind::Log, GroupKind::Multiplicative) => {
                let u = ZpInt::one(p, precision).add(&x0.coord(0).reduce(precision))?;
                Ok(LinearMap::scalar(&u.inv()?, 1))
            }
            (ProbeKind::Exp, GroupKind::Multiplicative) => {
                let e = exp_chart(&self.group, x0, x0.precision() / 2)?.0;
                let u = ZpInt::one(p, precision).add(&e.coord(0))?;
                Ok(LinearMap::scalar(&u, 1))
            }
            (ProbeKind::MulLeft(a), GroupKind::Multiplicative) | (ProbeKind::MulRight(a), GroupKind::Multiplicative) => {
                let u = ZpInt::one(p, precision).add(&a.coord(0).reduce(precision))?;
                Ok(LinearMap::scalar(&u, 1))
            }
            _ => Err(unavailable()),
        }
    }

    /// Built-in Taylor coefficients of order `k`, where available.
    pub fn expansion(&self, k: usize, precision: u32) -> Result<TaylorExpansion> {
        let p = self.group.prime();
        match (&self.kind, self.group.kind()) {
            (ProbeKind::Exp, GroupKind::Multiplicative) => Ok(TaylorExpansion::exp_multiplicative(p, k)),
            (ProbeKind::Tau, GroupKind::Multiplicative) => Ok(TaylorExpansion::tau_multiplicative(p, k)),
            (ProbeKind::Tau, GroupKind::Heisenberg) if k >= 2 => Ok(TaylorExpansion::tau_heisenberg(p)),
            (ProbeKind::Identity, _) => {
                Ok(TaylorExpansion::linear(LinearMap::identity(p, precision, self.group.dim())))
            }
            (ProbeKind::Linear(a), _) => Ok(TaylorExpansion::linear(a.clone())),
            _ => Err(Error::Usage(format!("no built-in expansion of {} on {}", self.name(), self.group))),
        }
    }
}

/// `H ↦ Σ_{i<p} (1+X)^i H (1+X)^(p-1-i)` as a `k²×k²` matrix.
fn gl_tau_jacobian(x0: &ChartVector, k: usize, p: u64, precision: u32) -> Result<LinearMap> {
    let m = modulus(p, precision);
    let kk = k * k;
    let mut base: Vec<BigUint> = x0.residues().iter().map(|c| c % &*m).collect();
    for i in 0..k {
        base[i * k + i] = (&base[i * k + i] + 1u32) % &*m;
    }
    let mut powers = vec![{
        let mut id = vec![BigUint::from(0u32); kk];
        for i in 0..k {
            id[i * k + i] = BigUint::from(1u32);
        }
        id
    }];
    for i in 1..p as usize {
        let next = mat_mul(&powers[i - 1], &base, k, &m);
        powers.push(next);
    }
    let mut entries = vec![BigUint::from(0u32); kk * kk];
    for col in 0..kk {
        let mut h = vec![BigUint::from(0u32); kk];
        h[col] = BigUint::from(1u32);
        let mut acc = vec![BigUint::from(0u32); kk];
        for i in 0..p as usize {
            let t = mat_mul(&mat_mul(&powers[i], &h, k, &m), &powers[p as usize - 1 - i], k, &m);
            for (a, b) in acc.iter_mut().zip(t) {
                *a = (&*a + b) % &*m;
            }
        }
        for (row, v) in acc.into_iter().enumerate() {
            entries[row * kk + col] = v;
        }
    }
    LinearMap::new(p, precision, kk, kk, entries)
}

fn scale_by(v: &CoordVector, t: &QpScalar) -> Result<CoordVector> {
    let val = t.valuation().ok_or_else(|| Error::Usage("difference quotient needs t != 0".into()))?;
    let u = v.scale(&t.unit().reduce(v.precision().max(1)))?;
    if val >= 0 {
        Ok(u.mul_pow_p(val as u32))
    } else {
        u.div_pow_p((-val) as u32)
    }
}

/// `f^[1](x, y, t) = t⁻¹(f(x + ty) - f(x))`. Division by `t` costs `v(t)`
/// digits; multiplication by `t⁻¹` with `v(t) < 0` gains them.
pub fn diff_quotient(f: &ProbeFunction, x: &CoordVector, y: &CoordVector, t: &QpScalar) -> Result<CoordVector> {
    if t.is_zero() {
        return Err(Error::Usage("difference quotient needs t != 0".into()));
    }
    let ty = scale_by(y, t)?;
    let num = f.eval(&x.add(&ty)?)?.sub(&f.eval(x)?)?;
    scale_by(&num, &t.inv()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecayRow {
    pub m: u32,
    pub ratio: NormExp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecayTable {
    pub probe: String,
    pub precision: u32,
    pub samples: usize,
    pub rows: Vec<DecayRow>,
}

impl DecayTable {
    pub fn row(&self, m: u32) -> Option<NormExp> {
        self.rows.iter().find(|r| r.m == m).map(|r| r.ratio)
    }

    /// Every row exceeds its predecessor, a floor row being followed only by
    /// floor rows.
    pub fn is_strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].ratio < w[1].ratio || (w[0].ratio.is_floor() && w[1].ratio.is_floor()))
    }

    pub fn reaches_floor(&self) -> bool {
        self.rows.last().is_some_and(|r| r.ratio.is_floor())
    }

    /// Finite rows have strictly increasing first differences (at least three
    /// finite rows required).
    pub fn is_superlinear(&self) -> bool {
        let finite: Vec<i64> = self.rows.iter().filter_map(|r| r.ratio.finite()).collect();
        finite.len() >= 3
            && finite.windows(2).all(|w| w[0] < w[1])
            && finite.windows(3).all(|w| w[2] - w[1] > w[1] - w[0])
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("m\tratio_exponent\n");
        for r in &self.rows {
            out.push_str(&format!("{}\t{}\n", r.m, r.ratio));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serializes")
    }
}

impl fmt::Display for DecayTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_tsv())
    }
}

/// Vector with exactly one coordinate a unit and all coordinates random.
fn unit_direction<R: Rng + ?Sized>(rng: &mut R, p: u64, precision: u32, dim: usize) -> CoordVector {
    let mut v = CoordVector::random(rng, p, precision, dim, 1);
    let i = rng.gen_range(0..dim);
    let mut coords = v.to_zp();
    let digit = ZpInt::from_i64(p, precision, rng.gen_range(1..p as i64)).expect("digit");
    coords[i] = coords[i].add(&digit).expect("same precision");
    v = CoordVector::from_zp(p, &coords).expect("uniform coordinates");
    v
}

/// Pair `(y, z)` in the ball of exponent `m` around `x0` with `e(z - y) = m`.
fn pair_at_scale<R: Rng + ?Sized>(rng: &mut R, x0: &CoordVector, m: u32) -> Result<(CoordVector, CoordVector)> {
    let (p, n, d) = (x0.prime(), x0.precision(), x0.dim());
    let y = x0.add(&CoordVector::random(rng, p, n, d, 0).mul_pow_p(m).reduce(n))?;
    let z = y.add(&unit_direction(rng, p, n, d).mul_pow_p(m).reduce(n))?;
    Ok((y, z))
}

fn scale_rows(
    m_max: u32,
    precision: u32,
    samples: usize,
    seed: u64,
    per_sample: impl Fn(u32, &mut rand_chacha::ChaCha8Rng) -> Result<NormExp> + Sync,
) -> Result<Vec<DecayRow>> {
    if m_max == 0 || m_max >= precision {
        return Err(Error::Usage(format!("scales 1..={m_max} do not fit precision {precision}")));
    }
    (1..=m_max)
        .map(|m| {
            let worst = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(seed, (m as u64) << 32 | i as u64);
                    per_sample(m, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min()
                .unwrap_or(NormExp::Floor);
            Ok(DecayRow { m, ratio: worst })
        })
        .collect()
}

/// Worst exponent of `f(z) - f(y) - A(z - y)` minus `e(z - y)` per scale.
pub fn strict_diff_probe(
    f: &ProbeFunction,
    x0: &ChartVector,
    a: &LinearMap,
    m_max: u32,
    samples: usize,
    seed: u64,
) -> Result<DecayTable> {
    f.group().check(x0)?;
    let rows = scale_rows(m_max, x0.precision(), samples, seed, |m, rng| {
        let (y, z) = pair_at_scale(rng, x0, m)?;
        let dz = z.sub(&y)?;
        let num = f.eval(&z)?.sub(&f.eval(&y)?)?.sub(&a.apply(&dz)?)?;
        Ok(num.val().shift(-(m as i64)))
    })?;
    let precision = f.eval(x0)?.precision();
    Ok(DecayTable { probe: format!("strict:{}", f.name()), precision, samples, rows })
}

/// `(x, h) ↦ a_i(x)(h)`, homogeneous of degree `i` in `h`.
pub type Coefficient = Arc<dyn Fn(&CoordVector, &CoordVector) -> Result<CoordVector> + Send + Sync>;

#[derive(Clone)]
pub struct TaylorExpansion {
    pub name: String,
    /// `coefficients[i - 1]` is `a_i`.
    pub coefficients: Vec<Coefficient>,
}

impl fmt::Debug for TaylorExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TaylorExpansion({}, order {})", self.name, self.order())
    }
}

fn factorial(i: usize) -> i64 {
    (1..=i as i64).product()
}

impl TaylorExpansion {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// `a_1 = A`, a linear map.
    pub fn linear(a: LinearMap) -> Self {
        let c: Coefficient = Arc::new(move |_x, h| a.apply(h));
        TaylorExpansion { name: "linear".into(), coefficients: vec![c] }
    }

    /// Multiplicative chart `exp(x) = e^x - 1`: `a_i(x)h = e^x hⁱ/i!`.
    pub fn exp_multiplicative(prime: u64, k: usize) -> Self {
        let group = ChartGroup::multiplicative(prime).expect("valid prime");
        let coefficients = (1..=k)
            .map(|i| {
                let c: Coefficient = Arc::new(move |x, h| {
                    let prec = x.precision() / 2;
                    let e = exp_chart(&group, &ChartVector::new(x.clone())?, prec)?.0;
                    let ex = ZpInt::one(prime, prec).add(&e.coord(0))?;
                    let hi = QpScalar::from_zp(&h.coord(0).pow(i as u64));
                    let term = hi.mul(&QpScalar::from_ratio(prime, prec + 1, 1, factorial(i))?)?.to_zp(prec)?;
                    CoordVector::from_zp(prime, &[ex.mul(&term)?])
                });
                c
            })
            .collect();
        TaylorExpansion { name: "exp".into(), coefficients }
    }

    /// `(1+x)^p - 1`: `a_i(x)h = C(p,i)(1+x)^(p-i)hⁱ`.
    pub fn tau_multiplicative(prime: u64, k: usize) -> Self {
        let coefficients = (1..=k)
            .map(|i| {
                let c: Coefficient = Arc::new(move |x, h| {
                    let prec = x.precision().min(h.precision());
                    if i as u64 > prime {
                        return Ok(CoordVector::zero(prime, prec, 1));
                    }
                    let binom: i64 = (0..i as i64).fold(1, |acc, j| acc * (prime as i64 - j) / (j + 1));
                    let u = ZpInt::one(prime, prec).add(&x.coord(0).reduce(prec))?;
                    let v = ZpInt::from_i64(prime, prec, binom)?
                        .mul(&u.pow(prime - i as u64))?
                        .mul(&h.coord(0).reduce(prec).pow(i as u64))?;
                    CoordVector::from_zp(prime, &[v])
                });
                c
            })
            .collect();
        TaylorExpansion { name: "tau".into(), coefficients }
    }

    /// Heisenberg `τ_p(a,b,c) = (pa, pb, pc + C(p,2)ab)`, exact at order two.
    pub fn tau_heisenberg(prime: u64) -> Self {
        let c2 = (prime * (prime - 1) / 2) as i64;
        let a1: Coefficient = Arc::new(move |x, h| {
            let prec = x.precision().min(h.precision());
            let (x, h) = (x.reduce(prec).to_zp(), h.reduce(prec).to_zp());
            let pz = ZpInt::from_i64(prime, prec, prime as i64)?;
            let cz = ZpInt::from_i64(prime, prec, c2)?;
            let cross = x[0].mul(&h[1])?.add(&x[1].mul(&h[0])?)?;
            CoordVector::from_zp(
                prime,
                &[pz.mul(&h[0])?, pz.mul(&h[1])?, pz.mul(&h[2])?.add(&cz.mul(&cross)?)?],
            )
        });
        let a2: Coefficient = Arc::new(move |x, h| {
            let prec = x.precision().min(h.precision());
            let h = h.reduce(prec).to_zp();
            let cz = ZpInt::from_i64(prime, prec, c2)?;
            let zero = ZpInt::zero(prime, prec);
            CoordVector::from_zp(prime, &[zero.clone(), zero, cz.mul(&h[0].mul(&h[1])?)?])
        });
        TaylorExpansion { name: "tau".into(), coefficients: vec![a1, a2] }
    }
}

/// Worst exponent of `R(y, z) = f(z) - f(y) - Σ a_i(y)(z - y)` minus
/// `k·e(z - y)` per scale.
pub fn taylor_probe(
    f: &ProbeFunction,
    x0: &ChartVector,
    expansion: &TaylorExpansion,
    m_max: u32,
    samples: usize,
    seed: u64,
) -> Result<DecayTable> {
    f.group().check(x0)?;
    let k = expansion.order() as i64;
    let rows = scale_rows(m_max, x0.precision(), samples, seed, |m, rng| {
        let (y, z) = pair_at_scale(rng, x0, m)?;
        let h = z.sub(&y)?;
        let mut r = f.eval(&z)?.sub(&f.eval(&y)?)?;
        for a in &expansion.coefficients {
            r = r.sub(&a(&y, &h)?)?;
        }
        Ok(r.val().shift(-k * m as i64))
    })?;
    let precision = f.eval(x0)?.precision();
    Ok(DecayTable { probe: format!("taylor{}:{}", k, f.name()), precision, samples, rows })
}

type MultilinEval = Arc<dyn Fn(&[CoordVector]) -> Result<CoordVector> + Send + Sync>;

/// A multilinear map `β: (Z_p^d)ⁿ → Z_p^e` with a known norm exponent.
#[derive(Clone)]
pub struct Multilinear {
    pub name: String,
    pub prime: u64,
    pub arity: usize,
    pub input_dim: usize,
    pub norm_exp: NormExp,
    eval: MultilinEval,
}

impl fmt::Debug for Multilinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multilinear({}, arity {})", self.name, self.arity)
    }
}

impl Multilinear {
    pub fn eval(&self, args: &[CoordVector]) -> Result<CoordVector> {
        if args.len() != self.arity {
            return Err(Error::DimensionMismatch { expected: self.arity, got: args.len() });
        }
        (self.eval)(args)
    }

    pub fn linear(a: LinearMap, prime: u64) -> Self {
        let norm_exp = a.val();
        let input_dim = a.cols();
        Multilinear {
            name: "linear".into(),
            prime,
            arity: 1,
            input_dim,
            norm_exp,
            eval: Arc::new(move |args| a.apply(&args[0])),
        }
    }

    /// `(A_1, …, A_n) ↦ A_1 ⋯ A_n` on `k×k` matrices, row-major.
    pub fn matrix_product(k: usize, n: usize, prime: u64) -> Self {
        Multilinear {
            name: format!("matmul{k}x{n}"),
            prime,
            arity: n,
            input_dim: k * k,
            norm_exp: NormExp::Finite(0),
            eval: Arc::new(move |args| {
                let prec = args.iter().map(CoordVector::precision).min().unwrap_or(0);
                let m = modulus(prime, prec);
                let mut acc = args[0].reduce(prec).residues().to_vec();
                for a in &args[1..] {
                    acc = mat_mul(&acc, a.residues(), k, &m);
                }
                CoordVector::new(prime, prec, acc)
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultilinInstance {
    pub sample: usize,
    pub lhs: NormExp,
    pub bound: NormExp,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultilinReport {
    pub name: String,
    pub arity: usize,
    pub eps_exponent: u32,
    pub norm_exponent: NormExp,
    pub instances: Vec<MultilinInstance>,
    pub passed: bool,
}

/// `e(β(u) - β(v)) >= e_β + ε` for `e(u_i) >= 0`, `e(u_i - v_i) >= ε`.
pub fn multilin_perturb_check(
    beta: &Multilinear,
    eps_exponent: u32,
    precision: u32,
    samples: usize,
    seed: u64,
) -> Result<MultilinReport> {
    let p = beta.prime;
    let instances = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let mut u = Vec::with_capacity(beta.arity);
            let mut v = Vec::with_capacity(beta.arity);
            for _ in 0..beta.arity {
                let ui = CoordVector::random(&mut rng, p, precision, beta.input_dim, 0);
                let di = CoordVector::random(&mut rng, p, precision, beta.input_dim, eps_exponent.min(precision));
                v.push(ui.add(&di)?);
                u.push(ui);
            }
            let lhs = beta.eval(&u)?.sub(&beta.eval(&v)?)?.val();
            let bound = beta.norm_exp.shift(eps_exponent as i64);
            Ok(MultilinInstance { sample: i, lhs, bound, passed: lhs >= bound })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = instances.iter().all(|i| i.passed);
    Ok(MultilinReport {
        name: beta.name.clone(),
        arity: beta.arity,
        eps_exponent,
        norm_exponent: beta.norm_exp,
        instances,
        passed,
    })
}

pub fn default_k_map(j: u32) -> u32 {
    j * j + j
}

/// Checks `k(j+1) > k(j) >= j` for every digit index that reaches below
/// `precision`.
fn validate_k_map(k_map: &dyn Fn(u32) -> u32, precision: u32) -> Result<()> {
    let mut j = 0;
    while j < precision && k_map(j) < precision {
        if k_map(j) < j || k_map(j + 1) <= k_map(j) {
            return Err(Error::Usage(format!("digit map must be strictly increasing with k(j) >= j (fails at j = {j})")));
        }
        j += 1;
    }
    Ok(())
}

/// `Σ a_j p^j ↦ Σ a_j p^k(j)`, keeping the digits with `k(j) < N`.
pub fn schikhof_curve(k_map: &dyn Fn(u32) -> u32, x: &ZpInt) -> Result<ZpInt> {
    let n = x.precision();
    validate_k_map(k_map, n)?;
    let mut out = vec![0u64; n as usize];
    for (j, d) in x.digits().into_iter().enumerate() {
        let k = k_map(j as u32);
        if k >= n {
            break;
        }
        out[k as usize] = d;
    }
    ZpInt::from_digits(x.prime(), &out)
}

/// Worst `e(γ(x) - γ(y)) - m` over pairs with `e(x - y) = m`.
pub fn curve_probe(
    k_map: &(dyn Fn(u32) -> u32 + Sync),
    prime: u64,
    precision: u32,
    m_max: u32,
    samples: usize,
    seed: u64,
) -> Result<DecayTable> {
    validate_k_map(k_map, precision)?;
    let rows = scale_rows(m_max, precision, samples, seed, |m, rng| {
        let x = ZpInt::random(rng, prime, precision, 0);
        let w = unit_direction(rng, prime, precision, 1).coord(0);
        let y = x.add(&w.mul_pow_p(m).reduce(precision))?;
        let d = schikhof_curve(k_map, &x)?.sub(&schikhof_curve(k_map, &y)?)?;
        Ok(d.val().shift(-(m as i64)))
    })?;
    Ok(DecayTable { probe: "curve".into(), precision, samples, rows })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InjectivityReport {
    /// Inputs are pairwise distinct modulo `p^classes_exponent`.
    pub classes_exponent: u32,
    /// Outputs are compared modulo `p^precision`, `precision = k(J-1) + 1`.
    pub precision: u32,
    pub samples: usize,
    pub distinct_outputs: usize,
    pub passed: bool,
}

/// Samples inputs pairwise distinct modulo `p^J`, with `p^J >= 2·samples`,
/// and counts distinct images. Images are taken at precision `k(J-1) + 1`,
/// the least at which digits `0..J` all survive.
pub fn curve_injectivity(
    k_map: &(dyn Fn(u32) -> u32 + Sync),
    prime: u64,
    samples: usize,
    seed: u64,
) -> Result<InjectivityReport> {
    let mut classes_exponent = 1u32;
    while (prime as f64).powi(classes_exponent as i32) < 2.0 * samples as f64 {
        classes_exponent += 1;
    }
    let precision = k_map(classes_exponent - 1) + 1;
    validate_k_map(k_map, precision)?;
    let class_mod = modulus(prime, classes_exponent);
    let mut rng = sample_rng(seed, 0);
    let mut seen = HashSet::new();
    let mut inputs = Vec::with_capacity(samples);
    while inputs.len() < samples {
        let x = ZpInt::random(&mut rng, prime, precision, 0);
        if seen.insert(x.residue() % &*class_mod) {
            inputs.push(x);
        }
    }
    let outputs: HashSet<BigUint> = inputs
        .par_iter()
        .map(|x| schikhof_curve(k_map, x).map(|y| y.residue().clone()))
        .collect::<Result<_>>()?;
    let distinct_outputs = outputs.len();
    Ok(InjectivityReport { classes_exponent, precision, samples, distinct_outputs, passed: distinct_outputs == samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_quotient_is_direction() {
        let g = ChartGroup::heisenberg(5).unwrap();
        let f = ProbeFunction::named(g, "identity").unwrap();
        let x = CoordVector::from_i64(5, 20, &[5, 10, 25]).unwrap();
        let y = CoordVector::from_i64(5, 20, &[3, 1, 4]).unwrap();
        for t in [QpScalar::from_ratio(5, 20, 25, 1).unwrap(), QpScalar::from_ratio(5, 20, 35, 1).unwrap()] {
            let q = diff_quotient(&f, &x, &y, &t).unwrap();
            assert!(q.agrees_mod(&y, q.precision()));
        }
        assert!(diff_quotient(&f, &x, &y, &QpScalar::zero(5, 20)).unwrap_err().is_usage());
    }

    #[test]
    fn linear_quotient_is_independent_of_t() {
        let g = ChartGroup::multiplicative(5).unwrap();
        let c = ZpInt::from_i64(5, 20, 3).unwrap();
        let f = ProbeFunction::new(g, ProbeKind::Linear(LinearMap::scalar(&c, 1)));
        let x = CoordVector::from_i64(5, 20, &[5]).unwrap();
        let y = CoordVector::from_i64(5, 20, &[2]).unwrap();
        let t = QpScalar::from_ratio(5, 20, 5, 1).unwrap();
        let q = diff_quotient(&f, &x, &y, &t).unwrap();
        assert!(q.agrees_mod(&CoordVector::from_i64(5, 20, &[6]).unwrap(), 19));
    }

    #[test]
    fn tau_quotient_matches_binomial_expansion() {
        // ((1+x+ty)^p - (1+x)^p)/t = Σ_{k>=1} C(p,k)(1+x)^(p-k) t^(k-1) y^k
        let p = 5u64;
        let g = ChartGroup::multiplicative(p).unwrap();
        let f = ProbeFunction::named(g, "tau").unwrap();
        let (x, y, t) = (10i64, 3i64, 25i64);
        let xv = CoordVector::from_i64(p, 20, &[x]).unwrap();
        let yv = CoordVector::from_i64(p, 20, &[y]).unwrap();
        let q = diff_quotient(&f, &xv, &yv, &QpScalar::from_ratio(p, 20, t, 1).unwrap()).unwrap();
        let binom = [1i128, 5, 10, 10, 5, 1];
        let expected: i128 = (1..=5)
            .map(|k| binom[k] * (1 + x as i128).pow(5 - k as u32) * (t as i128).pow(k as u32 - 1) * (y as i128).pow(k as u32))
            .sum();
        let e = CoordVector::from_i64(p, 18, &[(expected % 5i128.pow(18)) as i64]).unwrap();
        assert!(q.agrees_mod(&e, 18));
        let py = CoordVector::from_i64(p, 20, &[15]).unwrap();
        assert!(q.sub(&py).unwrap().val().at_least(2));
    }

    #[test]
    fn frozen_multiplication_recovers_direction_at_zero() {
        let g = ChartGroup::heisenberg(5).unwrap();
        let f = ProbeFunction::new(g, ProbeKind::MulLeft(g.identity(20)));
        let x = g.identity(20).into_coords();
        let y = CoordVector::from_i64(5, 20, &[1, 2, 3]).unwrap();
        let q = diff_quotient(&f, &x, &y, &QpScalar::from_ratio(5, 20, 5, 1).unwrap()).unwrap();
        assert!(q.agrees_mod(&y, 19));
    }

    #[test]
    fn strict_probe_identity_is_floor() {
        let g = ChartGroup::gl(2, 3).unwrap();
        let f = ProbeFunction::named(g, "identity").unwrap();
        let a = f.jacobian(&g.identity(16), 16).unwrap();
        let t = strict_diff_probe(&f, &g.identity(16), &a, 5, 20, 1).unwrap();
        assert!(t.rows.iter().all(|r| r.ratio.is_floor()));
    }

    #[test]
    fn strict_probe_tau_rows() {
        for g in [ChartGroup::multiplicative(5).unwrap(), ChartGroup::gl(2, 3).unwrap(), ChartGroup::heisenberg(7).unwrap()] {
            let f = ProbeFunction::named(g, "tau").unwrap();
            let x0 = g.identity(24);
            let a = LinearMap::scalar(&ZpInt::from_i64(g.prime(), 24, g.prime() as i64).unwrap(), g.dim());
            let t = strict_diff_probe(&f, &x0, &a, 8, 30, 2).unwrap();
            for r in &t.rows {
                assert!(r.ratio.at_least(r.m as i64 + 1), "{g}: {t}");
            }
        }
    }

    #[test]
    fn tau_jacobian_at_nonzero_base() {
        let mut rng = sample_rng(3, 0);
        for g in [ChartGroup::gl(2, 5).unwrap(), ChartGroup::heisenberg(5).unwrap(), ChartGroup::multiplicative(5).unwrap()] {
            let f = ProbeFunction::named(g, "tau").unwrap();
            let x0 = g.random_element(&mut rng, 24, 1);
            let a = f.jacobian(&x0, 24).unwrap();
            let t = strict_diff_probe(&f, &x0, &a, 8, 20, 5).unwrap();
            for r in &t.rows {
                assert!(r.ratio.at_least(r.m as i64 + 1), "{g}: {t}");
            }
        }
    }

    #[test]
    fn log_strict_probe_increases() {
        let g = ChartGroup::multiplicative(5).unwrap();
        let f = ProbeFunction::named(g, "log").unwrap();
        let x0 = ChartVector::from_i64(5, 24, &[5]).unwrap();
        let a = f.jacobian(&x0, 24).unwrap();
        let t = strict_diff_probe(&f, &x0, &a, 8, 20, 3).unwrap();
        assert!(t.is_strictly_increasing(), "{t}");
    }

    #[test]
    fn taylor_probes() {
        let g = ChartGroup::multiplicative(5).unwrap();
        let f = ProbeFunction::named(g, "exp").unwrap();
        let t = taylor_probe(&f, &g.identity(24), &f.expansion(2, 24).unwrap(), 8, 20, 4).unwrap();
        assert!(t.is_strictly_increasing() && t.reaches_floor(), "{t}");
        assert_eq!(t.row(1), Some(NormExp::Finite(1)));

        let h = ChartGroup::heisenberg(5).unwrap();
        let f = ProbeFunction::named(h, "tau").unwrap();
        let x0 = ChartVector::from_i64(5, 24, &[5, 10, 0]).unwrap();
        let t = taylor_probe(&f, &x0, &f.expansion(2, 24).unwrap(), 6, 20, 4).unwrap();
        assert!(t.rows.iter().all(|r| r.ratio.is_floor()), "{t}");

        let f = ProbeFunction::named(h, "identity").unwrap();
        let t = taylor_probe(&f, &x0, &f.expansion(1, 24).unwrap(), 6, 10, 4).unwrap();
        assert!(t.rows.iter().all(|r| r.ratio.is_floor()));
    }

    #[test]
    fn multilinear_checks() {
        let beta = Multilinear::matrix_product(2, 2, 5);
        let r = multilin_perturb_check(&beta, 3, 20, 200, 6).unwrap();
        assert!(r.passed);
        let lin = Multilinear::linear(LinearMap::scalar(&ZpInt::from_i64(5, 20, 25).unwrap(), 2), 5);
        assert_eq!(lin.norm_exp, NormExp::Finite(2));
        assert!(multilin_perturb_check(&lin, 4, 20, 50, 1).unwrap().passed);
        let r = multilin_perturb_check(&beta, 20, 20, 5, 1).unwrap();
        assert!(r.instances.iter().all(|i| i.lhs.is_floor()));
    }

    #[test]
    fn curve_examples() {
        let z = ZpInt::from_i64(5, 20, 11).unwrap();
        assert_eq!(schikhof_curve(&default_k_map, &z).unwrap(), ZpInt::from_i64(5, 20, 51).unwrap());
        assert!(schikhof_curve(&default_k_map, &ZpInt::zero(5, 20)).unwrap().is_zero());
        let bad = |j: u32| if j == 2 { 1 } else { j * 3 };
        assert!(schikhof_curve(&bad, &z).unwrap_err().is_usage());
    }

    #[test]
    fn curve_table_and_injectivity() {
        let t = curve_probe(&default_k_map, 5, 24, 6, 50, 2).unwrap();
        for m in 1..=4 {
            assert_eq!(t.row(m), Some(NormExp::Finite((m * m) as i64)));
        }
        assert!(t.is_superlinear());
        for p in [3u64, 5, 7] {
            let r = curve_injectivity(&default_k_map, p, 1000, 3).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }
}
