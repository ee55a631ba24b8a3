use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use plie_core::calculus::{
    curve_injectivity, curve_probe, default_k_map, multilin_perturb_check, strict_diff_probe, taylor_probe,
    Multilinear, ProbeFunction,
};
use plie_core::explog::{exp_chart, log_chart, second_kind, second_kind_inverse, trotter_sum, LieBasis};
use plie_core::filtration::audit_filtration;
use plie_core::json::{ChartVectorJson, ScalarInput};
use plie_core::lazard::{audit_l1, audit_l2, audit_l3, verify, LazardCertificate, LazardCondition};
use plie_core::padic::validate_prime;
use plie_core::powermaps::{power_padic, pth_root};
use plie_core::selftest::run_selftest;
use plie_core::{ChartGroup, ChartVector, Error, GroupKind, ZpInt};

const EXIT_DOMAIN: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "plie", version, about = "p-adic Lie group numerics in chart coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Odd prime p
    #[arg(long = "p")]
    p: u64,
    /// Absolute precision N (digits)
    #[arg(long, default_value_t = 24)]
    prec: u32,
    /// mult | gl:<m> | heis
    #[arg(long, default_value = "mult")]
    group: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    samples: Option<usize>,
    /// Target precision M of limit computations (default (N - 4) / 2)
    #[arg(long = "target-prec")]
    target_prec: Option<u32>,
    #[arg(long = "n-max", default_value_t = 8)]
    n_max: u32,
    /// Write data to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit convergence traces and decay tables as TSV
    #[arg(long)]
    table: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Chart logarithm of --x
    Log {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: String,
    },
    /// Chart exponential of --v
    Exp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        v: String,
    },
    /// x^z for z in Z_p
    Pow {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: String,
        #[arg(long)]
        z: String,
    },
    /// Unique p-th root of --x
    Root {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: String,
    },
    /// Trotter terms converging to x + y
    Trotter {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Second-kind coordinates psi(z) on the standard basis
    Psi {
        #[command(flatten)]
        common: Common,
        /// JSON array of d scalars
        #[arg(long)]
        z: String,
        #[arg(long, default_value_t = 0)]
        j: u32,
    },
    /// Inverse of psi
    PsiInv {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 0)]
        j: u32,
    },
    /// Sampled audit of the ball filtration, one JSON line per instance
    AuditFiltration {
        #[command(flatten)]
        common: Common,
    },
    /// Lazard condition certificate
    Lazard {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        condition: String,
        /// L1: deepest level
        #[arg(long, default_value_t = 6)]
        depth: u32,
        /// L2: generator level j
        #[arg(long, default_value_t = 0)]
        j: u32,
        /// Replay an existing certificate instead of auditing
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Calculus probes
    Probe {
        #[command(flatten)]
        common: Common,
        /// strict | taylor | multilin | curve
        kind: String,
        /// identity | tau | root | log | exp
        #[arg(long, default_value = "tau")]
        function: String,
        /// Base point (default: the identity)
        #[arg(long)]
        x0: Option<String>,
        #[arg(long = "m-max", default_value_t = 8)]
        m_max: u32,
        /// Taylor order
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Multilinear arity (products of 2x2 matrices)
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        eps: u32,
    },
    /// Invariant suite over mult, gl:2 and heis
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

enum Outcome {
    Ok,
    VerificationFailed(String),
}

struct Ctx {
    common: Common,
    group: ChartGroup,
}

impl Ctx {
    fn new(common: Common) -> Result<Self> {
        validate_prime(common.p)?;
        if common.prec < 4 {
            return Err(Error::Usage(format!("--prec must be at least 4, got {}", common.prec)).into());
        }
        let kind: GroupKind = common.group.parse()?;
        let group = ChartGroup::new(kind, common.p)?;
        Ok(Ctx { common, group })
    }

    fn target(&self) -> u32 {
        self.common.target_prec.unwrap_or((self.common.prec.saturating_sub(4) / 2).max(1))
    }

    fn samples(&self, default: usize) -> usize {
        self.common.samples.unwrap_or(default)
    }

    fn vector(&self, text: &str) -> Result<ChartVector> {
        let j: ChartVectorJson = parse_json(text)?;
        Ok(j.to_chart(self.group.kind(), self.common.p, self.common.prec)?)
    }

    fn scalar(&self, text: &str) -> Result<ZpInt> {
        let s: ScalarInput = parse_json(text)?;
        Ok(s.to_zp(self.common.p, self.common.prec)?)
    }

    fn emit(&self, data: &str) -> Result<()> {
        let mut data = data.to_owned();
        if !data.ends_with('\n') {
            data.push('\n');
        }
        match &self.common.out {
            Some(path) => fs::write(path, data).with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{data}");
                Ok(())
            }
        }
    }

    fn emit_json(&self, value: &serde_json::Value) -> Result<()> {
        let mut value = value.clone();
        tag_group(&mut value, &self.group.kind().to_string());
        self.emit(&serde_json::to_string_pretty(&value)?)
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Usage(format!("cannot parse '{text}': {e}")).into())
}

fn verdict(ok: bool, what: &str) -> Outcome {
    if ok {
        Outcome::Ok
    } else {
        Outcome::VerificationFailed(format!("{what} failed"))
    }
}

/// Adds `"group"` to every chart vector object that lacks it.
fn tag_group(value: &mut serde_json::Value, group: &str) {
    match value {
        serde_json::Value::Object(map) => {
            if map.contains_key("coords") && map.contains_key("prec") && !map.contains_key("group") {
                map.insert("group".into(), group.into());
            }
            map.values_mut().for_each(|v| tag_group(v, group));
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(|v| tag_group(v, group)),
        _ => {}
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Log { common, x } => {
            let ctx = Ctx::new(common)?;
            let (l, report) = log_chart(&ctx.group, &ctx.vector(&x)?, ctx.target())?;
            if ctx.common.table {
                ctx.emit(&report.to_tsv())?;
            } else {
                ctx.emit_json(&json!({ "result": l, "report": report }))?;
            }
        }
        Command::Exp { common, v } => {
            let ctx = Ctx::new(common)?;
            let (e, report) = exp_chart(&ctx.group, &ctx.vector(&v)?, ctx.target())?;
            if ctx.common.table {
                ctx.emit(&report.to_tsv())?;
            } else {
                ctx.emit_json(&json!({ "result": e, "report": report }))?;
            }
        }
        Command::Pow { common, x, z } => {
            let ctx = Ctx::new(common)?;
            let r = power_padic(&ctx.group, &ctx.vector(&x)?, &ctx.scalar(&z)?)?;
            ctx.emit_json(&serde_json::to_value(r)?)?;
        }
        Command::Root { common, x } => {
            let ctx = Ctx::new(common)?;
            let r = pth_root(&ctx.group, &ctx.vector(&x)?)?;
            ctx.emit_json(&serde_json::to_value(r)?)?;
        }
        Command::Trotter { common, x, y } => {
            let ctx = Ctx::new(common)?;
            let (x, y) = (ctx.vector(&x)?, ctx.vector(&y)?);
            let (t, report) = trotter_sum(&ctx.group, &x, &y, ctx.common.n_max, ctx.target())?;
            if ctx.common.table {
                ctx.emit(&report.to_tsv())?;
            } else {
                ctx.emit_json(&json!({ "result": t, "report": report }))?;
            }
        }
        Command::Psi { common, z, j } => {
            let ctx = Ctx::new(common)?;
            let items: Vec<serde_json::Value> = parse_json(&z)?;
            let z = items
                .iter()
                .map(|v| ctx.scalar(&v.to_string()))
                .collect::<Result<Vec<_>>>()?;
            let basis = LieBasis::standard(ctx.common.p, ctx.common.prec, ctx.group.dim())?;
            let psi = second_kind(&ctx.group, &basis, j, &z, ctx.target())?;
            ctx.emit_json(&json!({ "result": psi }))?;
        }
        Command::PsiInv { common, g, j } => {
            let ctx = Ctx::new(common)?;
            let basis = LieBasis::standard(ctx.common.p, ctx.common.prec, ctx.group.dim())?;
            let inv = second_kind_inverse(&ctx.group, &basis, j, &ctx.vector(&g)?, ctx.target())?;
            ctx.emit_json(&serde_json::to_value(inv)?)?;
        }
        Command::AuditFiltration { common } => {
            let ctx = Ctx::new(common)?;
            let report = audit_filtration(&ctx.group, ctx.common.prec, ctx.samples(500), ctx.common.seed)?;
            ctx.emit(&report.to_json_lines())?;
            return Ok(verdict(report.passed(), "filtration audit"));
        }
        Command::Lazard { common, condition, depth, j, replay } => {
            let ctx = Ctx::new(common)?;
            if let Some(path) = replay {
                let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                let cert: LazardCertificate = parse_json(&text)?;
                let outcome = verify(&cert)?;
                ctx.emit_json(&serde_json::to_value(&outcome)?)?;
                return Ok(verdict(outcome.passed() && cert.passed(), "certificate replay"));
            }
            let (p, n, seed) = (ctx.common.p, ctx.common.prec, ctx.common.seed);
            let cert = match condition.parse::<LazardCondition>()? {
                LazardCondition::L1 => audit_l1(&ctx.group, n, depth, ctx.samples(200), seed)?,
                LazardCondition::L2 => {
                    let basis = LieBasis::standard(p, n, ctx.group.dim())?;
                    audit_l2(&ctx.group, &basis, j, ctx.target(), ctx.samples(100), seed)?
                }
                LazardCondition::L3 => audit_l3(&ctx.group, n, ctx.samples(100), seed)?,
            };
            ctx.emit(&cert.to_json())?;
            return Ok(verdict(cert.passed(), "Lazard audit"));
        }
        Command::Probe { common, kind, function, x0, m_max, k, n, eps } => {
            let ctx = Ctx::new(common)?;
            let (p, prec, seed) = (ctx.common.p, ctx.common.prec, ctx.common.seed);
            let x0 = match &x0 {
                Some(text) => ctx.vector(text)?,
                None => ctx.group.identity(prec),
            };
            let samples = ctx.samples(50);
            match kind.as_str() {
                "strict" | "taylor" => {
                    let f = ProbeFunction::named(ctx.group, &function)?;
                    let table = if kind == "strict" {
                        let a = f.jacobian(&x0, prec)?;
                        strict_diff_probe(&f, &x0, &a, m_max, samples, seed)?
                    } else {
                        taylor_probe(&f, &x0, &f.expansion(k, prec)?, m_max, samples, seed)?
                    };
                    if ctx.common.table {
                        ctx.emit(&table.to_tsv())?;
                    } else {
                        ctx.emit(&table.to_json())?;
                    }
                    return Ok(verdict(table.is_strictly_increasing(), "decay table"));
                }
                "multilin" => {
                    let beta = Multilinear::matrix_product(2, n, p);
                    let report = multilin_perturb_check(&beta, eps, prec, samples, seed)?;
                    ctx.emit_json(&serde_json::to_value(&report)?)?;
                    return Ok(verdict(report.passed, "multilinear perturbation bound"));
                }
                "curve" => {
                    let table = curve_probe(&default_k_map, p, prec, m_max.min(prec - 1), samples, seed)?;
                    let inj = curve_injectivity(&default_k_map, p, ctx.samples(1000), seed)?;
                    if ctx.common.table {
                        ctx.emit(&table.to_tsv())?;
                    } else {
                        ctx.emit_json(&json!({ "table": table, "injectivity": inj }))?;
                    }
                    return Ok(verdict(table.is_superlinear() && inj.passed, "curve probe"));
                }
                other => {
                    return Err(Error::Usage(format!("unknown probe '{other}', expected strict|taylor|multilin|curve")).into())
                }
            }
        }
        Command::Selftest { common } => {
            let ctx = Ctx::new(common)?;
            let report = run_selftest(ctx.common.p, ctx.common.prec, ctx.common.seed)?;
            ctx.emit(&report.to_json_lines())?;
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("FAIL {} {}: {}", c.name, c.group.as_deref().unwrap_or("-"), c.detail);
            }
            return Ok(verdict(report.passed(), "selftest"));
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed(msg)) => {
            eprintln!("plie: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(e) => {
            eprintln!("plie: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(err) if err.is_usage() => ExitCode::from(EXIT_USAGE),
                Some(_) => ExitCode::from(EXIT_DOMAIN),
                None => ExitCode::from(EXIT_DOMAIN),
            }
        }
    }
}
