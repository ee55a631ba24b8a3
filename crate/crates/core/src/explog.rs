//! Logarithm and exponential of a chart group as explicit limits.
//!
//! * `log x = lim p^(-n) τ_pⁿ(x)`
//! * `exp v = lim τ_p^(-n)(pⁿ v)`, each `τ_p⁻¹` an exact [`pth_root`]
//! * Trotter: `x + y = lim log((exp(pⁿx) exp(pⁿy))^(p^-n))`
//! * second-kind coordinates `ψ(z) = exp(z₁p^(j+1)e₁) * … * exp(z_d p^(j+1)e_d)`
//!
//! Limits run at working precision `N >= 2M` for a target precision `M`. The
//! n-th term is known to `N - n` digits; the loop stops once two consecutive
//! successive-term distances reach `M`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::ChartGroup;
use crate::padic::{NormExp, ZpInt};
use crate::powermaps::{pth_root_iter, tau_p};
use crate::vector::{mat_inv_mod, mat_vec, ChartVector, CoordVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub n: u32,
    pub distance: NormExp,
}

/// Trace of a limit computation.
///
/// `steps[k]` holds `e(t_n - t_(n-1))` for `n = k + 2`; the result is
/// `t_(stabilized_at)`, known to `out_precision = working_precision -
/// stabilized_at` digits and returned truncated to the target precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergenceReport {
    pub working_precision: u32,
    pub target_precision: u32,
    pub steps: Vec<StepRecord>,
    pub stabilized_at: u32,
    pub out_precision: u32,
}

impl ConvergenceReport {
    pub fn is_monotone(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].distance <= w[1].distance)
    }

    pub fn accounting_holds(&self) -> bool {
        self.out_precision + self.stabilized_at == self.working_precision
            && self.out_precision >= self.target_precision
    }

    /// `n<TAB>distance_exponent` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\tdistance_exponent\n");
        for s in &self.steps {
            out.push_str(&format!("{}\t{}\n", s.n, s.distance));
        }
        out
    }
}

fn require_working_precision(working: u32, target: u32) -> Result<()> {
    if target == 0 {
        return Err(Error::Usage("target precision must be positive".into()));
    }
    if working < 2 * target {
        return Err(Error::PrecisionExhausted { needed: 2 * target, available: working });
    }
    Ok(())
}

fn run_limit(
    working: u32,
    target: u32,
    mut term: impl FnMut(u32) -> Result<ChartVector>,
) -> Result<(ChartVector, ConvergenceReport)> {
    require_working_precision(working, target)?;
    let mut prev: Option<ChartVector> = None;
    let mut steps = Vec::new();
    let mut hits = 0;
    let mut n = 1u32;
    while working - n >= target {
        let t = term(n)?;
        debug_assert_eq!(t.precision(), working - n);
        if let Some(prev) = &prev {
            let distance = t.distance(prev)?;
            steps.push(StepRecord { n, distance });
            hits = if distance.at_least(target as i64) { hits + 1 } else { 0 };
            if hits >= 2 {
                let report = ConvergenceReport {
                    working_precision: working,
                    target_precision: target,
                    steps,
                    stabilized_at: n,
                    out_precision: working - n,
                };
                return Ok((t.reduce(target), report));
            }
        }
        prev = Some(t);
        n += 1;
    }
    Err(Error::ConvergenceFailure { steps: n - 1 })
}

/// `log x` modulo `p^M`, computed at the precision of `x` (which must be at
/// least `2M`).
pub fn log_chart(group: &ChartGroup, x: &ChartVector, target: u32) -> Result<(ChartVector, ConvergenceReport)> {
    group.check(x)?;
    let working = x.precision();
    let mut power = x.clone();
    run_limit(working, target, |n| {
        // τ_pⁿ(x) is evaluated at the working precision, so the quotient by
        // pⁿ is known to N - n digits.
        power = tau_p(group, &power)?.reduce(working);
        ChartVector::new(power.div_pow_p(n)?)
    })
}

/// `exp v` modulo `p^M` via `n` successive p-th roots of `pⁿv`.
pub fn exp_chart(group: &ChartGroup, v: &ChartVector, target: u32) -> Result<(ChartVector, ConvergenceReport)> {
    group.check(v)?;
    run_limit(v.precision(), target, |n| {
        let scaled = v.mul_pow_p(n);
        debug_assert!(scaled.val().at_least(n as i64 + 1));
        pth_root_iter(group, &scaled, n)
    })
}

/// `ζ(z) = exp(z·v)`, the one-parameter subgroup through `v`.
pub fn one_param(group: &ChartGroup, v: &ChartVector, z: &ZpInt, target: u32) -> Result<ChartVector> {
    let zv = ChartVector::new(v.scale(z)?)?;
    Ok(exp_chart(group, &zv, target)?.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrotterReport {
    pub working_precision: u32,
    /// `e(t_n - (x + y))` for `n = 1..=n_max`, measured modulo `p^M`.
    pub steps: Vec<StepRecord>,
    /// First `n` from which every distance is at the floor.
    pub stabilized_at: Option<u32>,
    pub out_precision: u32,
    /// Reports of the final logarithm in each term.
    pub log_reports: Vec<ConvergenceReport>,
}

impl TrotterReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n\tdistance_exponent\n");
        for s in &self.steps {
            out.push_str(&format!("{}\t{}\n", s.n, s.distance));
        }
        out
    }
}

/// Working precision used by [`trotter_sum`].
pub fn trotter_working_precision(target: u32, n_max: u32) -> u32 {
    4 * target + 2 * n_max + 2
}

/// Terms `t_n = log((exp(pⁿx)·exp(pⁿy))^(p^-n))` for `n = 1..=n_max`.
///
/// The maps involved are 1-Lipschitz in `(x, y)`, so `t_n` modulo `p^M`
/// depends only on `x, y` modulo `p^M`; the terms are evaluated on the given
/// representatives at an internal working precision and truncated to `M`.
pub fn trotter_sum(
    group: &ChartGroup,
    x: &ChartVector,
    y: &ChartVector,
    n_max: u32,
    target: u32,
) -> Result<(ChartVector, TrotterReport)> {
    group.check(x)?;
    group.check(y)?;
    if n_max == 0 {
        return Err(Error::Usage("n_max must be at least 1".into()));
    }
    let input_precision = x.precision().min(y.precision());
    if target > input_precision {
        return Err(Error::PrecisionExhausted { needed: target, available: input_precision });
    }
    let working = trotter_working_precision(target, n_max);
    let xw = x.lift(working);
    let yw = y.lift(working);
    let sum = x.add(y)?.reduce(target);

    let mut steps = Vec::new();
    let mut log_reports = Vec::new();
    let mut last = None;
    for n in 1..=n_max {
        let inner = 2 * target + n;
        let (ex, _) = exp_chart(group, &xw.mul_pow_p(n), inner)?;
        let (ey, _) = exp_chart(group, &yw.mul_pow_p(n), inner)?;
        let prod = group.mul(&ex, &ey)?;
        debug_assert!(prod.val().at_least(n as i64 + 1));
        let root = pth_root_iter(group, &prod, n)?;
        let (t, report) = log_chart(group, &root, target)?;
        steps.push(StepRecord { n, distance: t.distance(&sum)? });
        log_reports.push(report);
        last = Some(t);
    }
    let stabilized_at = steps
        .iter()
        .rposition(|s| !s.distance.is_floor())
        .map_or(Some(1), |i| (i + 1 < steps.len()).then(|| steps[i + 1].n));
    let report = TrotterReport { working_precision: working, steps, stabilized_at, out_precision: target, log_reports };
    Ok((last.expect("n_max >= 1"), report))
}

/// A basis `e_1..e_d` of the coordinate space: norm-one vectors whose
/// reductions modulo `p` are linearly independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieBasis {
    prime: u64,
    precision: u32,
    vectors: Vec<CoordVector>,
}

impl LieBasis {
    pub fn new(vectors: Vec<CoordVector>) -> Result<Self> {
        let first = vectors.first().ok_or_else(|| Error::Usage("empty basis".into()))?;
        let (prime, d) = (first.prime(), vectors.len());
        let mut precision = u32::MAX;
        for v in &vectors {
            if v.prime() != prime {
                return Err(Error::PrimeMismatch(prime, v.prime()));
            }
            if v.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.dim() });
            }
            precision = precision.min(v.precision());
        }
        let basis = LieBasis { prime, precision, vectors };
        if mat_inv_mod(&basis.matrix(), d, prime, 1).is_none() {
            return Err(Error::SingularBasis);
        }
        Ok(basis)
    }

    pub fn standard(prime: u64, precision: u32, dim: usize) -> Result<Self> {
        let vectors = (0..dim)
            .map(|i| {
                let coords: Vec<i64> = (0..dim).map(|k| i64::from(k == i)).collect();
                CoordVector::from_i64(prime, precision, &coords)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn vectors(&self) -> &[CoordVector] {
        &self.vectors
    }

    /// Row-major matrix whose columns are the basis vectors.
    fn matrix(&self) -> Vec<num_bigint::BigUint> {
        let d = self.dim();
        let mut m = Vec::with_capacity(d * d);
        for row in 0..d {
            for col in 0..d {
                m.push(self.vectors[col].residues()[row].clone());
            }
        }
        m
    }

    fn lift(&self, precision: u32) -> LieBasis {
        LieBasis {
            prime: self.prime,
            precision: precision.max(self.precision),
            vectors: self.vectors.iter().map(|v| v.lift(precision)).collect(),
        }
    }
}

fn check_basis(group: &ChartGroup, basis: &LieBasis) -> Result<()> {
    if basis.prime() != group.prime() {
        return Err(Error::PrimeMismatch(group.prime(), basis.prime()));
    }
    if basis.dim() != group.dim() {
        return Err(Error::DimensionMismatch { expected: group.dim(), got: basis.dim() });
    }
    Ok(())
}

/// `ψ(z)` modulo `p^M`. Maps `Z_p^d` onto the ball of exponent `j + 1`.
pub fn second_kind(
    group: &ChartGroup,
    basis: &LieBasis,
    j: u32,
    z: &[ZpInt],
    target: u32,
) -> Result<ChartVector> {
    check_basis(group, basis)?;
    if z.len() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), got: z.len() });
    }
    let mut acc: Option<ChartVector> = None;
    for (e, zi) in basis.vectors().iter().zip(z) {
        let v = ChartVector::new(e.scale(zi)?.mul_pow_p(j + 1))?;
        let (f, _) = exp_chart(group, &v, target)?;
        acc = Some(match acc {
            None => f,
            Some(a) => group.mul(&a, &f)?,
        });
    }
    Ok(acc.expect("basis is nonempty"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SecondKindInverse {
    /// Coordinates modulo `p^(M - j - 1)`.
    pub z: Vec<ZpInt>,
    /// `e(ψ(z)⁻¹ * g)` per refinement step, ending at the floor.
    pub residuals: Vec<NormExp>,
}

/// Solves `ψ(z) = g (mod p^M)` by `z ← z + p^-(j+1) B⁻¹ ψ(z)⁻¹g`, with `B`
/// the basis matrix.
pub fn second_kind_inverse(
    group: &ChartGroup,
    basis: &LieBasis,
    j: u32,
    g: &ChartVector,
    target: u32,
) -> Result<SecondKindInverse> {
    check_basis(group, basis)?;
    group.check(g)?;
    if !g.val().at_least(j as i64 + 1) {
        return Err(Error::OutOfDomain(format!(
            "target has norm exponent {}, second-kind image needs >= {}",
            g.val(),
            j + 1
        )));
    }
    let prec = g.precision().min(target);
    if prec <= j + 1 {
        return Err(Error::PrecisionExhausted { needed: j + 2, available: prec });
    }
    let out_prec = prec - j - 1;
    let d = basis.dim();
    let p = group.prime();
    let b_inv = mat_inv_mod(&basis.matrix(), d, p, out_prec).ok_or(Error::SingularBasis)?;

    // z and the basis are exact representatives inside the iteration.
    let working = 2 * prec + 2;
    let basis_w = basis.lift(working);
    let g = g.reduce(prec);
    let mut z: Vec<ZpInt> = (0..d).map(|_| ZpInt::zero(p, working)).collect();
    let mut residuals: Vec<NormExp> = Vec::new();
    for step in 0..=prec as usize {
        let psi = second_kind(group, &basis_w, j, &z, prec)?;
        let r = group.mul(&group.inv(&psi)?, &g)?;
        let e = r.val();
        if residuals.last().is_some_and(|prev| e <= *prev) || !e.at_least(j as i64 + 1) {
            return Err(Error::NonContraction { step });
        }
        residuals.push(e);
        if e.is_floor() {
            let z = z.iter().map(|zi| zi.reduce(out_prec)).collect();
            return Ok(SecondKindInverse { z, residuals });
        }
        let scaled = r.div_pow_p(j + 1)?;
        let delta = mat_vec(&b_inv, d, d, scaled.residues());
        for (zi, di) in z.iter_mut().zip(delta) {
            *zi = zi.add(&ZpInt::from_parts(p, working, di))?;
        }
    }
    Err(Error::NonContraction { step: prec as usize + 1 })
}
