use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_anisobesov"))
        .args(args)
        .output()
        .expect("binary runs");
    Outcome {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Runs `args` with `--config <fixture>` and checks the exit code.
fn expect(config: &str, args: &[&str], code: i32) -> Outcome {
    let cfg = fixture(config);
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--config", &cfg]);
    let o = run(&full);
    assert_eq!(
        o.code, code,
        "{args:?} with {config}: stdout={} stderr={}",
        o.stdout, o.stderr
    );
    o
}

#[test]
fn params_codes() {
    let o = expect("worked.toml", &["params"], 0);
    assert_eq!(
        o.stdout.lines().next(),
        Some("r=1.5 p=2 theta=1.3333333333333333 beta=0.75,0.25")
    );
    let o = expect("malformed.toml", &["params"], 1);
    assert!(o.stderr.contains("r has 1 entries"));
    let o = expect("bad_beta.toml", &["params"], 2);
    assert!(o.stderr.contains("beta_2"), "{}", o.stderr);
    assert_eq!(run(&["params"]).code, 1);
}

#[test]
fn target_codes() {
    let o = expect("worked.toml", &["target", "--q", "4,4"], 0);
    assert!(o.stdout.contains("kappa=0.6666666666666666,"));
    assert!(o.stdout.contains("theta_prime=1.0909090909090908,"));
    expect("worked.toml", &["target", "--q", "4"], 1);
    expect("aniso.toml", &["target"], 1);
    let o = expect("worked.toml", &["target", "--q", "1,4"], 2);
    assert!(o.stderr.contains("q_j = 1 > p_j = 2"));
}

#[test]
fn rearrange_codes() {
    let o = expect("samples.toml", &["rearrange"], 0);
    assert!(o.stdout.contains("steps=3"));
    assert!(o.stdout.contains("support=7.5000000000000000e-1"));
    expect("samples.toml", &["rearrange", "--res", "16"], 1);
    expect("box.toml", &["rearrange", "--res", "4,4"], 2);
}

#[test]
fn lorentz_codes() {
    let o = expect("box.toml", &["lorentz", "--q", "2"], 0);
    assert!(o.stdout.contains("norm=1.0000000000000000e0"));
    expect("box.toml", &["lorentz", "--q", "2", "--s", "abc"], 1);
    expect("box.toml", &["lorentz", "--q=-1"], 2);
}

#[test]
fn seminorm_codes() {
    let o = expect("box.toml", &["seminorm", "--axis", "1"], 0);
    assert!(o.stdout.contains("total=2.0000000000000000e0"));
    expect("box.toml", &["seminorm", "--axis", "3"], 1);
    let o = expect("worked.toml", &["seminorm", "--axis", "2", "--k", "2"], 2);
    assert!(o.stderr.contains("must exceed r = 3"));
}

#[test]
fn majorize_codes() {
    let ramp = fixture("ramp.csv");
    let o = run(&["majorize", "--psi", &ramp, "--alpha", "0.5", "--delta", "0.25"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("phi_norm=2.0000000000000000e0"));
    assert_eq!(run(&["majorize", "--psi", &fixture("none.csv"), "--alpha", "0.5", "--delta", "0.25"]).code, 1);
    assert_eq!(run(&["majorize", "--psi", &ramp, "--delta", "0.25"]).code, 1);
    let o = run(&["majorize", "--psi", &ramp, "--alpha", "2", "--delta", "0.25", "--theta", "1"]);
    assert_eq!(o.code, 2, "{}", o.stderr);
    let o = run(&["majorize", "--psi", &ramp, "--alpha", "0.5", "--delta", "0.25", "--max-ratio", "1.5"]);
    assert_eq!(o.code, 3, "{}", o.stderr);
    expect("box.toml", &["majorize", "--axis", "2"], 0);
}

#[test]
fn equilibrium_codes() {
    let phis = format!("{},{}", fixture("phi1.csv"), fixture("phi3.csv"));
    let base = ["equilibrium", "--phi", &phis, "--tgrid", "0.001:1000:8"];
    let o = expect("worked.toml", &base, 0);
    assert!(o.stdout.contains("nodes=49"));
    expect("worked.toml", &["equilibrium", "--phi", &fixture("phi1.csv")], 1);
    let mut wide = base.to_vec();
    wide.extend(["--delta", "5"]);
    let o = expect("worked.toml", &wide, 2);
    assert!(o.stderr.contains("delta"));
    let mut strict = base.to_vec();
    strict.extend(["--tol", "1e-30"]);
    expect("worked.toml", &strict, 3);
    expect("box.toml", &["equilibrium"], 0);
}

#[test]
fn verify_metrics_codes() {
    let o = expect("box.toml", &["verify", "metrics"], 0);
    assert!(o.stdout.contains("am_gm=true"));
    assert!(o.stdout.contains("lorentz_monotone=true"));
    expect("aniso.toml", &["verify", "metrics"], 1);
    expect("box.toml", &["verify", "metrics", "--q", "1,1"], 2);
    expect("box.toml", &["verify", "metrics", "--max-ratio", "1e-6"], 3);
}

#[test]
fn verify_limit_codes() {
    let o = expect("box.toml", &["verify", "limit"], 0);
    assert!(o.stdout.contains("lhs=1.0000000000000000e0"));
    expect("box.toml", &["verify", "limit", "--hgrid", "1:2"], 1);
    let o = expect("worked.toml", &["verify", "limit"], 2);
    assert!(o.stderr.contains("no limit exponent"));
    expect("box.toml", &["verify", "limit", "--max-ratio", "1e-6"], 3);
}

#[test]
fn verify_nolimit_codes() {
    expect("box.toml", &["verify", "nolimit", "--q", "1.2"], 0);
    expect("box.toml", &["verify", "nolimit", "--q", "1.2", "--s", "x"], 1);
    let o = expect("box.toml", &["verify", "nolimit", "--q", "1.5"], 2);
    assert!(o.stderr.contains("1/q"));
    expect("box.toml", &["verify", "nolimit", "--q", "1.2", "--max-ratio", "1e-6"], 3);
}

#[test]
fn verify_dilation_codes() {
    let o = expect("box.toml", &["verify", "dilation", "--lo", "-1", "--hi", "1"], 0);
    assert!(o.stdout.contains("instances=9"));
    expect("box.toml", &["verify", "dilation", "--lo", "1", "--hi", "0"], 1);
    expect("samples.toml", &["verify", "dilation"], 1);
    expect("box.toml", &["verify", "dilation", "--lo", "-5", "--hi", "-5"], 2);
    expect("aniso.toml", &["verify", "dilation", "--lo", "-1", "--hi", "1", "--tol", "1e-12"], 3);
}

#[test]
fn verify_lemma_codes() {
    for verb in ["lemma1", "lemma4"] {
        let o = expect("box.toml", &["verify", verb], 0);
        assert!(o.stdout.contains("c_max="));
        expect("box.toml", &["verify", verb, "--tgrid", "nope"], 1);
        expect("bad_beta.toml", &["verify", verb], 2);
        expect("box.toml", &["verify", verb, "--max-ratio", "1e-9"], 3);
    }
    expect("box.toml", &["verify", "lemma4", "--xi", "0.5"], 2);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let out = out.display().to_string();
        expect("worked.toml", &["verify", "metrics", "--out", &out], 0);
    }
    for name in ["verify_metrics.csv", "config.toml"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs between runs");
    }
    let resolved = std::fs::read_to_string(a.join("config.toml")).unwrap();
    assert!(resolved.contains("theta = [1, \"inf\"]"));
    assert!(resolved.contains("# defaults applied:"));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]).code, 0);
    assert_eq!(run(&["verify", "--help"]).code, 0);
    assert_eq!(run(&["frobnicate"]).code, 1);
}
