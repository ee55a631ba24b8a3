use std::process::{Command, Output};

fn plie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plie")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn mod_inv(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1, mut s0, mut s1) = (a.rem_euclid(m), m, 1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1);
    s0.rem_euclid(m)
}

/// log(1 + x) = Σ (-1)^(k+1) x^k / k modulo 5^prec, for x divisible by 5.
fn mercator_mod(x: i128, prec: u32) -> i128 {
    let m = 5i128.pow(prec);
    let mut acc = 0i128;
    for k in 1..=2 * prec as i128 {
        let (mut unit, mut v) = (k, 0u32);
        while unit % 5 == 0 {
            unit /= 5;
            v += 1;
        }
        // x^k / 5^v, computed on x/5 to stay small
        let term = (x / 5).pow(k as u32) * 5i128.pow(k as u32 - v) % m;
        let term = term * mod_inv(unit, m) % m;
        acc = if k % 2 == 1 { acc + term } else { acc - term };
    }
    acc.rem_euclid(m)
}

#[test]
fn log_matches_mercator_series() {
    let o = plie(&["log", "--group", "mult", "--p", "5", "--prec", "20", "--x", r#"{"coords":["5"]}"#]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let prec = v["result"]["prec"].as_u64().unwrap() as u32;
    let got: i128 = v["result"]["coords"][0].as_str().unwrap().parse().unwrap();
    assert_eq!(got, mercator_mod(5, prec));
    let report = &v["report"];
    assert_eq!(
        report["out_precision"].as_u64().unwrap() + report["stabilized_at"].as_u64().unwrap(),
        report["working_precision"].as_u64().unwrap()
    );
}

#[test]
fn table_mode_prints_tsv() {
    let o = plie(&["exp", "--p", "7", "--prec", "24", "--v", r#"{"coords":["49"]}"#, "--table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("n\tdistance_exponent\n"));
    assert!(text.lines().skip(1).all(|l| l.split('\t').count() == 2));
}

#[test]
fn missing_prime_is_usage_error() {
    let o = plie(&["log", "--x", r#"{"coords":["5"]}"#]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--p"));
}

#[test]
fn bad_flags_are_usage_errors() {
    for args in [
        &["log", "--p", "4", "--x", r#"{"coords":["4"]}"#][..],
        &["log", "--p", "5", "--prec", "3", "--x", r#"{"coords":["5"]}"#],
        &["log", "--p", "5", "--group", "sl:2", "--x", r#"{"coords":["5"]}"#],
        &["log", "--p", "5", "--x", "not json"],
        &["probe", "bogus", "--p", "5"],
    ] {
        assert_eq!(plie(args).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn domain_errors_exit_one() {
    let o = plie(&["log", "--p", "5", "--x", r#"{"coords":["1"]}"#]);
    assert_eq!(o.status.code(), Some(1));
    let o = plie(&["root", "--p", "5", "--x", r#"{"coords":["5"]}"#]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pow_and_root() {
    let o = plie(&["pow", "--p", "5", "--prec", "12", "--x", r#"{"coords":["5"]}"#, "--z", "5"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // 6^5 - 1 = 7775
    assert_eq!(v["value"]["coords"][0], "7775");
    let o = plie(&["root", "--p", "5", "--prec", "12", "--x", r#"{"coords":["7775"]}"#]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["root"]["coords"][0], "5");
}

#[test]
fn psi_round_trip() {
    let o = plie(&["psi", "--p", "5", "--group", "heis", "--z", r#"[3, "7", {"residue": "11"}]"#]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let g = serde_json::to_string(&v["result"]).unwrap();
    let o = plie(&["psi-inv", "--p", "5", "--group", "heis", "--g", &g]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let z: Vec<&str> = v["z"].as_array().unwrap().iter().map(|e| e["residue"].as_str().unwrap()).collect();
    assert_eq!(z, ["3", "7", "11"]);
}

#[test]
fn output_is_deterministic() {
    let args = ["audit-filtration", "--p", "3", "--group", "gl:2", "--samples", "40", "--seed", "11"];
    let a = plie(&args);
    let b = plie(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 200);
}

#[test]
fn trotter_reaches_sum() {
    let o = plie(&[
        "trotter", "--p", "5", "--group", "heis", "--target-prec", "6", "--n-max", "6",
        "--x", r#"{"coords":["5","10","0"]}"#, "--y", r#"{"coords":["15","5","25"]}"#,
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["coords"], serde_json::json!(["20", "15", "25"]));
}

#[test]
fn lazard_certificate_replays() {
    let dir = std::env::temp_dir().join(format!("plie-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cert.json");
    let p = path.to_str().unwrap();
    let o = plie(&["lazard", "--p", "5", "--group", "gl:2", "--condition", "l3", "--samples", "10", "--out", p]);
    assert!(o.status.success());
    let o = plie(&["lazard", "--p", "5", "--group", "gl:2", "--condition", "l3", "--replay", p]);
    assert!(o.status.success());

    let mut cert: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let entry = cert["replay"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|e| e["witness"]["coords"].as_array().unwrap().iter().any(|c| c != "0"))
        .expect("a nontrivial commutator");
    entry["witness"]["coords"][0] = "5".into();
    std::fs::write(&path, serde_json::to_string(&cert).unwrap()).unwrap();
    let o = plie(&["lazard", "--p", "5", "--group", "gl:2", "--condition", "l3", "--replay", p]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn probes() {
    let o = plie(&["probe", "strict", "--p", "5", "--group", "heis", "--table"]);
    assert!(o.status.success());
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(str::to_owned).collect();
    assert_eq!(rows.len(), 8);
    for (i, r) in rows.iter().enumerate() {
        let ratio = r.split('\t').nth(1).unwrap();
        assert!(ratio == "floor" || ratio.parse::<usize>().unwrap() >= i + 2, "{r}");
    }
    assert!(plie(&["probe", "taylor", "--p", "3", "--function", "exp"]).status.success());
    assert!(plie(&["probe", "multilin", "--p", "7", "--n", "3"]).status.success());
    assert!(plie(&["probe", "curve", "--p", "3"]).status.success());
    assert_eq!(plie(&["probe", "strict", "--p", "5", "--group", "gl:2", "--function", "log"]).status.code(), Some(3));
}

#[test]
fn selftest_passes() {
    let o = plie(&["selftest", "--p", "5", "--prec", "24", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().all(|l| l.contains("\"passed\":true")));
}
