//! Sampled audits of Lazard's conditions for the chart groups.
//!
//! * L1: at every level `j` up to the audited depth, `x*y ≡ x + y` modulo
//!   `p^(j+1)` for `e(x), e(y) >= j`, so each finite quotient of the
//!   filtration is an elementary abelian p-group.
//! * L2: targets in the ball of exponent `j + 1` are written as products of
//!   powers of the generators `exp(p^(j+1)e_i)` via second-kind coordinates.
//! * L3: on the ball of exponent 2, every commutator is the `p²`-th power of
//!   an explicit element obtained by two p-th roots.
//!
//! Certificates carry every checked instance in `replay`; [`verify`] re-runs
//! them through the public operations.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explog::{second_kind, second_kind_inverse, LieBasis};
use crate::group::{ChartGroup, GroupKind};
use crate::json::{ChartVectorJson, ZpIntJson};
use crate::padic::{parse_residue, NormExp, ZpInt};
use crate::powermaps::pth_root;
use crate::sampling::sample_rng;
use crate::vector::{ChartVector, CoordVector};

/// Level of the ball on which L3 is audited.
pub const L3_LEVEL: u32 = 2;

const ZERO_EVERY: u32 = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LazardCondition {
    L1,
    L2,
    L3,
}

impl FromStr for LazardCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(LazardCondition::L1),
            "l2" => Ok(LazardCondition::L2),
            "l3" => Ok(LazardCondition::L3),
            _ => Err(Error::Usage(format!("unknown condition '{s}', expected l1|l2|l3"))),
        }
    }
}

impl fmt::Display for LazardCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReplayEntry {
    /// `x*y = product` and `e(product - x - y) = defect_exponent >= level + 1`.
    Coset {
        level: u32,
        x: ChartVectorJson,
        y: ChartVectorJson,
        product: ChartVectorJson,
        defect_exponent: NormExp,
    },
    /// `ψ(z) = target`.
    Word { target: ChartVectorJson, z: Vec<ZpIntJson> },
    /// `[u, v] = commutator = witness^(p²)`.
    Commutator {
        u: ChartVectorJson,
        v: ChartVectorJson,
        commutator: ChartVectorJson,
        witness: ChartVectorJson,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub sample: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LazardCertificate {
    pub group: String,
    pub prime: u64,
    pub precision: u32,
    pub condition: LazardCondition,
    pub seed: u64,
    pub samples: usize,
    /// L1: deepest level audited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    /// L2: generators are `exp(p^(level+1) e_i)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<String>>>,
    pub verdict: Verdict,
    pub replay: Vec<ReplayEntry>,
    pub failures: Vec<Failure>,
}

impl LazardCertificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    fn assemble(
        group: &ChartGroup,
        precision: u32,
        condition: LazardCondition,
        seed: u64,
        outcomes: Vec<std::result::Result<ReplayEntry, Failure>>,
    ) -> Self {
        let samples = outcomes.len();
        let mut replay = Vec::new();
        let mut failures = Vec::new();
        for o in outcomes {
            match o {
                Ok(e) => replay.push(e),
                Err(f) => failures.push(f),
            }
        }
        let verdict = if failures.is_empty() { Verdict::Pass } else { Verdict::Fail };
        LazardCertificate {
            group: group.kind().to_string(),
            prime: group.prime(),
            precision,
            condition,
            seed,
            samples,
            depth: None,
            level: None,
            basis: None,
            verdict,
            replay,
            failures,
        }
    }
}

fn vjson(group: &ChartGroup, v: &CoordVector) -> ChartVectorJson {
    ChartVectorJson::from_vector(group.kind(), v)
}

fn maybe_zero<R: Rng + ?Sized>(rng: &mut R, group: &ChartGroup, precision: u32, level: u32) -> ChartVector {
    if rng.gen_range(0..ZERO_EVERY) == 0 {
        group.identity(precision)
    } else {
        group.random_element(rng, precision, level)
    }
}

/// L1 on levels `1..=depth`, `samples` pairs per level.
pub fn audit_l1(group: &ChartGroup, precision: u32, depth: u32, samples: usize, seed: u64) -> Result<LazardCertificate> {
    if depth == 0 || depth >= precision {
        return Err(Error::Usage(format!("depth must lie in 1..{precision}")));
    }
    let jobs: Vec<(u32, usize)> = (1..=depth).flat_map(|j| (0..samples).map(move |i| (j, i))).collect();
    let outcomes = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(j, i))| {
            let mut rng = sample_rng(seed, (j as u64) << 32 | i as u64);
            let x = maybe_zero(&mut rng, group, precision, j);
            let y = maybe_zero(&mut rng, group, precision, j);
            let product = group.mul(&x, &y)?;
            let defect = product.sub(&x)?.sub(&y)?.val();
            if !defect.at_least(j as i64 + 1) {
                return Ok(Err(Failure {
                    sample: k,
                    detail: format!("level {j}: e(x*y - x - y) = {defect} for x = {x}, y = {y}"),
                }));
            }
            Ok(Ok(ReplayEntry::Coset {
                level: j,
                x: vjson(group, &x),
                y: vjson(group, &y),
                product: vjson(group, &product),
                defect_exponent: defect,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cert = LazardCertificate::assemble(group, precision, LazardCondition::L1, seed, outcomes);
    cert.depth = Some(depth);
    Ok(cert)
}

/// L2 via second-kind coordinates at level `j`, on `targets` random targets.
pub fn audit_l2(
    group: &ChartGroup,
    basis: &LieBasis,
    j: u32,
    precision: u32,
    targets: usize,
    seed: u64,
) -> Result<LazardCertificate> {
    let outcomes = (0..targets)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let g = maybe_zero(&mut rng, group, precision, j + 1);
            Ok(match second_kind_inverse(group, basis, j, &g, precision) {
                Ok(inv) => Ok(ReplayEntry::Word {
                    target: vjson(group, &g),
                    z: inv.z.iter().map(ZpIntJson::from).collect(),
                }),
                Err(e) if e.is_usage() => return Err(e),
                Err(e) => Err(Failure { sample: i, detail: format!("target {g}: {e}") }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cert = LazardCertificate::assemble(group, precision, LazardCondition::L2, seed, outcomes);
    cert.level = Some(j);
    cert.basis = Some(
        basis
            .vectors()
            .iter()
            .map(|v| v.residues().iter().map(BigUint::to_string).collect())
            .collect(),
    );
    Ok(cert)
}

/// L3 on the ball of exponent [`L3_LEVEL`], on `samples` random pairs.
pub fn audit_l3(group: &ChartGroup, precision: u32, samples: usize, seed: u64) -> Result<LazardCertificate> {
    if precision < 2 * L3_LEVEL + 2 {
        return Err(Error::PrecisionExhausted { needed: 2 * L3_LEVEL + 2, available: precision });
    }
    let outcomes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let u = maybe_zero(&mut rng, group, precision, L3_LEVEL);
            let v = maybe_zero(&mut rng, group, precision, L3_LEVEL);
            let c = group.commutator(&u, &v)?;
            let bound = u.val().plus(v.val());
            if c.val() < bound {
                return Ok(Err(Failure { sample: i, detail: format!("e([u,v]) = {} < {bound}", c.val()) }));
            }
            let witness = match pth_root(group, &c).and_then(|r| pth_root(group, &r.root)) {
                Ok(r) => r.root,
                Err(e) => return Ok(Err(Failure { sample: i, detail: format!("root of {c}: {e}") })),
            };
            if group.power_int(&group.power_int(&witness, group.prime() as i64)?, group.prime() as i64)? != c {
                return Ok(Err(Failure { sample: i, detail: format!("witness {witness} does not reproduce {c}") }));
            }
            Ok(Ok(ReplayEntry::Commutator {
                u: vjson(group, &u),
                v: vjson(group, &v),
                commutator: vjson(group, &c),
                witness: vjson(group, &witness),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LazardCertificate::assemble(group, precision, LazardCondition::L3, seed, outcomes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayOutcome {
    pub checked: usize,
    /// Indices into `replay` whose identity did not reproduce.
    pub mismatches: Vec<usize>,
}

impl ReplayOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn chart(j: &ChartVectorJson, kind: GroupKind, p: u64) -> Result<ChartVector> {
    let prec = j.prec.ok_or_else(|| Error::Usage("replay vector without precision".into()))?;
    j.to_chart(kind, p, prec)
}

fn replay_one(group: &ChartGroup, cert: &LazardCertificate, basis: Option<&LieBasis>, e: &ReplayEntry) -> Result<bool> {
    let (kind, p) = (group.kind(), group.prime());
    match e {
        ReplayEntry::Coset { level, x, y, product, defect_exponent } => {
            let (x, y, product) = (chart(x, kind, p)?, chart(y, kind, p)?, chart(product, kind, p)?);
            let defect = product.sub(&x)?.sub(&y)?.val();
            Ok(group.mul(&x, &y)? == product && defect == *defect_exponent && defect.at_least(*level as i64 + 1))
        }
        ReplayEntry::Word { target, z } => {
            let basis = basis.ok_or_else(|| Error::Usage("word replay needs the certificate basis".into()))?;
            let j = cert.level.unwrap_or(0);
            let target = chart(target, kind, p)?;
            // z is known modulo p^(M-j-1); any representative gives ψ(z)
            // modulo p^M, so evaluate on exact representatives.
            let working = 2 * target.precision() + 2;
            let z = z
                .iter()
                .map(|zi| ZpInt::new(p, working, parse_residue(&zi.residue, p, working)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(second_kind(group, basis, j, &z, target.precision())? == target)
        }
        ReplayEntry::Commutator { u, v, commutator, witness } => {
            let (u, v) = (chart(u, kind, p)?, chart(v, kind, p)?);
            let (c, w) = (chart(commutator, kind, p)?, chart(witness, kind, p)?);
            let pp = p as i64;
            Ok(group.commutator(&u, &v)? == c
                && c.val() >= u.val().plus(v.val())
                && group.power_int(&group.power_int(&w, pp)?, pp)? == c)
        }
    }
}

/// Replays every recorded instance of a certificate.
pub fn verify(cert: &LazardCertificate) -> Result<ReplayOutcome> {
    let kind: GroupKind = cert.group.parse()?;
    let group = ChartGroup::new(kind, cert.prime)?;
    let basis = match &cert.basis {
        None => None,
        Some(rows) => {
            let working = 4 * cert.precision + 4;
            let vectors = rows
                .iter()
                .map(|r| {
                    let coords = r.iter().map(|c| parse_residue(c, cert.prime, working)).collect::<Result<Vec<_>>>()?;
                    CoordVector::new(cert.prime, working, coords)
                })
                .collect::<Result<Vec<_>>>()?;
            Some(LieBasis::new(vectors)?)
        }
    };
    let results = cert
        .replay
        .par_iter()
        .map(|e| replay_one(&group, cert, basis.as_ref(), e))
        .collect::<Result<Vec<_>>>()?;
    let mismatches = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i).collect();
    Ok(ReplayOutcome { checked: results.len(), mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn groups(p: u64) -> Vec<ChartGroup> {
        vec![
            ChartGroup::multiplicative(p).unwrap(),
            ChartGroup::gl(2, p).unwrap(),
            ChartGroup::heisenberg(p).unwrap(),
        ]
    }

    #[test]
    fn l1_passes_and_replays() {
        for g in groups(5) {
            let cert = audit_l1(&g, 24, 6, 40, 1).unwrap();
            assert!(cert.passed(), "{:?}", cert.failures.first());
            assert_eq!(cert.replay.len(), 240);
            assert!(verify(&cert).unwrap().passed());
        }
    }

    #[test]
    fn l1_zero_pair_is_vacuous() {
        let g = ChartGroup::heisenberg(3).unwrap();
        let cert = audit_l1(&g, 12, 3, 200, 4).unwrap();
        assert!(cert.replay.iter().any(|e| matches!(e, ReplayEntry::Coset { defect_exponent: NormExp::Floor, .. })));
    }

    #[test]
    fn l2_passes_and_replays() {
        for g in groups(3) {
            let basis = LieBasis::standard(3, 24, g.dim()).unwrap();
            let cert = audit_l2(&g, &basis, 0, 12, 15, 2).unwrap();
            assert!(cert.passed(), "{:?}", cert.failures.first());
            assert!(verify(&cert).unwrap().passed());
        }
    }

    #[test]
    fn l3_passes_and_replays() {
        for g in groups(7) {
            let cert = audit_l3(&g, 24, 30, 3).unwrap();
            assert!(cert.passed(), "{:?}", cert.failures.first());
            assert!(verify(&cert).unwrap().passed());
        }
        let g = ChartGroup::multiplicative(5).unwrap();
        let cert = audit_l3(&g, 24, 5, 3).unwrap();
        for e in &cert.replay {
            if let ReplayEntry::Commutator { witness, .. } = e {
                assert!(witness.coords.iter().all(|c| c == "0"));
            }
        }
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let g = ChartGroup::gl(2, 5).unwrap();
        let mut cert = audit_l3(&g, 20, 10, 8).unwrap();
        let text = cert.to_json();
        let back: LazardCertificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);
        if let Some(ReplayEntry::Commutator { witness, .. }) = cert.replay.iter_mut().find(|e| {
            matches!(e, ReplayEntry::Commutator { witness, .. } if witness.coords.iter().any(|c| c != "0"))
        }) {
            witness.coords[0] = "5".into();
        }
        assert!(!verify(&cert).unwrap().passed());
    }

    #[test]
    fn condition_parsing() {
        assert_eq!("L2".parse::<LazardCondition>().unwrap(), LazardCondition::L2);
        assert!("l4".parse::<LazardCondition>().unwrap_err().is_usage());
    }
}
