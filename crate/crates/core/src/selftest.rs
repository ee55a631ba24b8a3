//! Invariant suite run by `plie selftest`.
//!
//! Every check is a self-consistency law of the library at one prime and
//! precision; sample counts are small enough to finish in seconds.

use rand::Rng;
use serde::Serialize;

use crate::calculus::{
    curve_injectivity, curve_probe, default_k_map, strict_diff_probe, taylor_probe, ProbeFunction,
};
use crate::error::{Error, Result};
use crate::explog::{exp_chart, log_chart, second_kind, second_kind_inverse, trotter_sum, LieBasis};
use crate::filtration::audit_filtration;
use crate::group::ChartGroup;
use crate::lazard::{audit_l1, audit_l2, audit_l3, verify, LazardCertificate};
use crate::padic::ZpInt;
use crate::powermaps::{power_padic, tau_p};
use crate::sampling::sample_rng;
use crate::vector::LinearMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelftestCheck {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub prime: u64,
    pub precision: u32,
    pub target_precision: u32,
    pub seed: u64,
    pub checks: Vec<SelftestCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json_lines(&self) -> String {
        self.checks
            .iter()
            .map(|c| serde_json::to_string(c).expect("check serializes") + "\n")
            .collect()
    }
}

struct Runner {
    checks: Vec<SelftestCheck>,
}

impl Runner {
    fn run(&mut self, name: &str, group: Option<&ChartGroup>, f: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(SelftestCheck { name: name.into(), group: group.map(|g| g.kind().to_string()), passed, detail });
    }
}

fn lazard_ok(cert: LazardCertificate) -> Result<(bool, String)> {
    let replay = verify(&cert)?;
    Ok((
        cert.passed() && replay.passed(),
        format!("{} instances, {} failures, {} replay mismatches", cert.replay.len(), cert.failures.len(), replay.mismatches.len()),
    ))
}

/// Runs the suite for `mult`, `gl:2` and `heis` at `(p, N)` with target
/// precision `M = (N - 4) / 2`.
pub fn run_selftest(prime: u64, precision: u32, seed: u64) -> Result<SelftestReport> {
    if precision < 8 {
        return Err(Error::Usage(format!("selftest needs precision >= 8, got {precision}")));
    }
    let n = precision;
    let m = (n - 4) / 2;
    let groups = [ChartGroup::multiplicative(prime)?, ChartGroup::gl(2, prime)?, ChartGroup::heisenberg(prime)?];
    let mut r = Runner { checks: Vec::new() };

    for g in &groups {
        r.run("group_laws", Some(g), || {
            let mut rng = sample_rng(seed, 1);
            for _ in 0..50 {
                let (x, y, z) = (g.random_element(&mut rng, n, 1), g.random_element(&mut rng, n, 1), g.random_element(&mut rng, n, 1));
                if g.mul(&g.mul(&x, &y)?, &z)? != g.mul(&x, &g.mul(&y, &z)?)? || !g.mul(&x, &g.inv(&x)?)?.is_zero() {
                    return Ok((false, format!("law fails at x = {x}")));
                }
            }
            Ok((true, "50 triples".into()))
        });

        r.run("filtration", Some(g), || {
            let rep = audit_filtration(g, n, 200, seed)?;
            Ok((rep.passed(), format!("{} instances", rep.instances.len())))
        });

        r.run("log_exp", Some(g), || {
            let mut rng = sample_rng(seed, 2);
            for _ in 0..40 {
                let level = rng.gen_range(1..=3);
                let x = g.random_element(&mut rng, n, level);
                let (l, lr) = log_chart(g, &x, m)?;
                let (e, er) = exp_chart(g, &l.lift(n), m)?;
                let ok = e.agrees_mod(&x, m)
                    && l.val() == x.val()
                    && g.inv(&x)?.val() == x.val()
                    && tau_p(g, &x)?.val() == x.val().shift(1)
                    && [&lr, &er].iter().all(|r| r.accounting_holds() && r.is_monotone() && r.stabilized_at <= m);
                if !ok {
                    return Ok((false, format!("fails at x = {x}")));
                }
            }
            Ok((true, "40 samples".into()))
        });

        r.run("one_parameter", Some(g), || {
            let mut rng = sample_rng(seed, 3);
            for _ in 0..30 {
                let x = g.random_element(&mut rng, n, 1);
                let (z1, z2) = (ZpInt::random(&mut rng, prime, n, 0), ZpInt::random(&mut rng, prime, n, 0));
                let lhs = power_padic(g, &x, &z1.add(&z2)?)?.value;
                let rhs = g.mul(&power_padic(g, &x, &z1)?.value, &power_padic(g, &x, &z2)?.value)?;
                if lhs != rhs {
                    return Ok((false, format!("fails at x = {x}")));
                }
            }
            Ok((true, "30 samples".into()))
        });

        r.run("second_kind", Some(g), || {
            let mut rng = sample_rng(seed, 4);
            let basis = LieBasis::standard(prime, n, g.dim())?;
            for j in [0u32, 1] {
                for _ in 0..8 {
                    let z: Vec<ZpInt> = (0..g.dim()).map(|_| ZpInt::random(&mut rng, prime, n, 0)).collect();
                    let psi = second_kind(g, &basis, j, &z, m)?;
                    let back = second_kind_inverse(g, &basis, j, &psi, m)?;
                    if !back.z.iter().zip(&z).all(|(a, b)| a.agrees_mod(b, m - j - 1)) {
                        return Ok((false, format!("round trip fails at j = {j}")));
                    }
                }
            }
            Ok((true, "8 vectors per level".into()))
        });

        r.run("lazard_l1", Some(g), || lazard_ok(audit_l1(g, n, m.min(6), 30, seed)?));
        r.run("lazard_l2", Some(g), || {
            lazard_ok(audit_l2(g, &LieBasis::standard(prime, n, g.dim())?, 0, m, 20, seed)?)
        });
        r.run("lazard_l3", Some(g), || lazard_ok(audit_l3(g, n, 30, seed)?));

        r.run("strict_tau", Some(g), || {
            let f = ProbeFunction::named(*g, "tau")?;
            let a = LinearMap::scalar(&ZpInt::from_i64(prime, n, prime as i64)?, g.dim());
            let t = strict_diff_probe(&f, &g.identity(n), &a, 8.min(n - 1), 20, seed)?;
            Ok((t.rows.iter().all(|r| r.ratio.at_least(r.m as i64 + 1)), t.to_tsv().replace('\n', " ")))
        });
    }

    let heis = &groups[2];
    r.run("trotter", Some(heis), || {
        let mut rng = sample_rng(seed, 5);
        let n_max = 8.min(m - 1);
        for _ in 0..5 {
            let (x, y) = (heis.random_element(&mut rng, n, 1), heis.random_element(&mut rng, n, 1));
            let (t, rep) = trotter_sum(heis, &x, &y, n_max, m)?;
            let floor = x.val().min(y.val());
            let ok = rep.steps.iter().all(|s| s.distance >= floor.shift(s.n as i64))
                && t.agrees_mod(&x.add(&y)?, n_max + 1);
            if !ok {
                return Ok((false, rep.to_tsv().replace('\n', " ")));
            }
        }
        Ok((true, format!("5 pairs, n <= {n_max}")))
    });

    let mult = &groups[0];
    r.run("taylor_exp", Some(mult), || {
        let f = ProbeFunction::named(*mult, "exp")?;
        let t = taylor_probe(&f, &mult.identity(n), &f.expansion(2, n)?, 8.min(n - 1), 20, seed)?;
        Ok((t.is_strictly_increasing() && t.reaches_floor(), t.to_tsv().replace('\n', " ")))
    });
    r.run("curve", None, || {
        let t = curve_probe(&default_k_map, prime, n, 6.min(n - 1), 30, seed)?;
        let inj = curve_injectivity(&default_k_map, prime, 1000, seed)?;
        Ok((
            t.is_superlinear() && inj.passed,
            format!("{} distinct of {}; {}", inj.distinct_outputs, inj.samples, t.to_tsv().replace('\n', " ")),
        ))
    });

    Ok(SelftestReport { prime, precision, target_precision: m, seed, checks: r.checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let rep = run_selftest(5, 24, 7).unwrap();
        let failed: Vec<_> = rep.checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert_eq!(rep.target_precision, 10);
    }

    #[test]
    fn small_precision_is_usage_error() {
        assert!(run_selftest(5, 6, 1).unwrap_err().is_usage());
    }
}
