//! Exponent-level audit of the ball filtration of a chart group.
//!
//! Every inequality is checked on integer norm exponents `e(x)` with
//! `‖x‖ = p^(-e(x))`, in the unscaled form that holds literally for the
//! chart models in [`crate::group`]:
//!
//! | check            | inequality                          |
//! |------------------|-------------------------------------|
//! | `product_ball`   | `e(x*y) >= min(e(x), e(y))`         |
//! | `inverse_defect` | `e(ι(x) + x) >= 2e(x)`              |
//! | `product_defect` | `e(x*y - x - y) >= e(x) + e(y)`     |
//! | `commutator`     | `e([x,y]) >= e(x) + e(y)`           |
//! | `power_defect`   | `e(xⁿ - n·x) >= 2e(x)`, `|n| <= p³` |
//!
//! A left-hand side that vanished at the working precision passes with a
//! `floor` annotation.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::group::ChartGroup;
use crate::json::ChartVectorJson;
use crate::padic::{NormExp, ZpInt};
use crate::sampling::{mixed_element, sample_rng};
use crate::vector::ChartVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FiltrationCheck {
    ProductBall,
    InverseDefect,
    ProductDefect,
    Commutator,
    PowerDefect,
}

impl FiltrationCheck {
    pub const ALL: [FiltrationCheck; 5] = [
        FiltrationCheck::ProductBall,
        FiltrationCheck::InverseDefect,
        FiltrationCheck::ProductDefect,
        FiltrationCheck::Commutator,
        FiltrationCheck::PowerDefect,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exponents {
    pub lhs: NormExp,
    pub bound: NormExp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub x: ChartVectorJson,
    pub y: ChartVectorJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
}

/// One checked inequality instance; serialized as one JSON line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckInstance {
    pub check: FiltrationCheck,
    pub sample: usize,
    pub passed: bool,
    pub floor: bool,
    pub exponents: Exponents,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiltrationReport {
    pub group: String,
    pub prime: u64,
    pub precision: u32,
    pub seed: u64,
    pub samples: usize,
    pub instances: Vec<CheckInstance>,
}

impl FiltrationReport {
    pub fn passed(&self) -> bool {
        self.instances.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckInstance> {
        self.instances.iter().filter(|i| !i.passed)
    }

    pub fn count(&self, check: FiltrationCheck) -> usize {
        self.instances.iter().filter(|i| i.check == check).count()
    }

    /// One JSON document per checked instance.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for inst in &self.instances {
            out.push_str(&serde_json::to_string(inst).expect("report serializes"));
            out.push('\n');
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn instance(
    group: &ChartGroup,
    check: FiltrationCheck,
    sample: usize,
    lhs: NormExp,
    bound: NormExp,
    x: &ChartVector,
    y: &ChartVector,
    n: Option<i64>,
) -> CheckInstance {
    let passed = lhs >= bound;
    let witness = (!passed).then(|| Witness {
        x: ChartVectorJson::from_vector(group.kind(), x),
        y: ChartVectorJson::from_vector(group.kind(), y),
        n,
    });
    CheckInstance { check, sample, passed, floor: lhs.is_floor(), exponents: Exponents { lhs, bound }, witness }
}

/// Runs all five checks for one pair `(x, y)` and exponent `n`.
pub fn check_pair(
    group: &ChartGroup,
    sample: usize,
    x: &ChartVector,
    y: &ChartVector,
    n: i64,
) -> Result<Vec<CheckInstance>> {
    let ex = x.val();
    let ey = y.val();
    let xy = group.mul(x, y)?;
    let mut out = Vec::with_capacity(5);

    out.push(instance(group, FiltrationCheck::ProductBall, sample, xy.val(), ex.min(ey), x, y, None));

    let inv_defect = group.inv(x)?.add(x)?.val();
    out.push(instance(group, FiltrationCheck::InverseDefect, sample, inv_defect, ex.plus(ex), x, y, None));

    let prod_defect = xy.sub(x)?.sub(y)?.val();
    out.push(instance(group, FiltrationCheck::ProductDefect, sample, prod_defect, ex.plus(ey), x, y, None));

    let comm = group.commutator(x, y)?.val();
    out.push(instance(group, FiltrationCheck::Commutator, sample, comm, ex.plus(ey), x, y, None));

    let xn = group.power_int(x, n)?;
    let nx = x.scale(&ZpInt::from_i64(group.prime(), x.precision(), n)?)?;
    let pow_defect = xn.sub(&nx)?.val();
    out.push(instance(group, FiltrationCheck::PowerDefect, sample, pow_defect, ex.plus(ex), x, y, Some(n)));

    Ok(out)
}

/// Samples `sample_count` pairs and exponents and checks every inequality.
pub fn audit_filtration(
    group: &ChartGroup,
    precision: u32,
    sample_count: usize,
    seed: u64,
) -> Result<FiltrationReport> {
    let p3 = (group.prime() as i64).pow(3);
    let per_sample: Vec<Vec<CheckInstance>> = (0..sample_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let x = mixed_element(&mut rng, group, precision, 4, 25);
            let y = mixed_element(&mut rng, group, precision, 4, 25);
            let n = rng.gen_range(-p3..=p3);
            check_pair(group, i, &x, &y, n)
        })
        .collect::<Result<_>>()?;
    Ok(FiltrationReport {
        group: group.kind().to_string(),
        prime: group.prime(),
        precision,
        seed,
        samples: sample_count,
        instances: per_sample.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vectors_pass_vacuously() {
        let g = ChartGroup::heisenberg(5).unwrap();
        let z = g.identity(12);
        let inst = check_pair(&g, 0, &z, &z, 17).unwrap();
        assert_eq!(inst.len(), 5);
        assert!(inst.iter().all(|i| i.passed && i.floor));
    }

    #[test]
    fn multiplicative_and_heisenberg_audits_pass() {
        for g in [ChartGroup::multiplicative(5).unwrap(), ChartGroup::heisenberg(5).unwrap()] {
            let report = audit_filtration(&g, 24, 500, 1).unwrap();
            assert_eq!(report.instances.len(), 2500);
            assert!(report.passed(), "{:?}", report.failures().next());
            for c in FiltrationCheck::ALL {
                assert_eq!(report.count(c), 500);
            }
        }
    }

    #[test]
    fn failing_instance_records_witness() {
        let g = ChartGroup::multiplicative(5).unwrap();
        let x = ChartVector::from_i64(5, 8, &[5]).unwrap();
        let inst = instance(&g, FiltrationCheck::Commutator, 3, NormExp::Finite(1), NormExp::Finite(2), &x, &x, None);
        assert!(!inst.passed);
        let line = serde_json::to_string(&inst).unwrap();
        assert!(line.contains("\"check\":\"commutator\""));
        assert!(line.contains("\"witness\""));
    }

    #[test]
    fn report_is_deterministic() {
        let g = ChartGroup::gl(2, 3).unwrap();
        let a = audit_filtration(&g, 16, 50, 9).unwrap().to_json_lines();
        let b = audit_filtration(&g, 16, 50, 9).unwrap().to_json_lines();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 250);
    }
}
