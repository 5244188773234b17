use std::process::{Command, Output};

fn xi_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xi-lab")).args(args).env_remove("XI_LAB_PRECISION").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn expand_riemann_prints_couplings() {
    let o = xi_lab(&["expand", "--kind", "riemann", "--p", "7"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("s_1 = 7.09865") && s.contains("a_2 = 9.36345"), "{s}");
}

#[test]
fn solve_json_carries_precision_and_is_reproducible() {
    let args = ["--precision", "40", "--json", "solve", "--kind", "explicit", "--p", "7", "--s", "1,0,3,0,3", "--N", "16"];
    let a = xi_lab(&args);
    let b = xi_lab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["precision_digits"], 40);
    assert_eq!(v["roots"]["n_complex_pairs"], 0);
    assert_eq!(v["q"]["N"], 16);
}

#[test]
fn precision_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_xi-lab"))
        .args(["--json", "zeros", "--reference", "riemann"])
        .env("XI_LAB_PRECISION", "25")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["precision_digits"], 25);
}

#[test]
fn table1_single_row_and_csv() {
    let dir = std::env::temp_dir().join(format!("xi-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("t.csv");
    let o = xi_lab(&["--json", "table1", "--rows", "airy", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
    assert_eq!(v["rows"][0]["row"]["on_cl_finite_n"], true);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("id,z1_est"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn table1_full_run_matches_published_column() {
    let o = xi_lab(&["--json", "table1", "--couplings", "published"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let want = [
        ("airy", -5.56709),
        ("riemann", 26.5505),
        ("ramanujan", 17.6636),
        ("airy7", 7.13834),
        ("airy7_m130", 8.50607),
        ("airy7_p133", 10.5535),
        ("kbessel", 5.80583),
        ("eta_gamma", 26.527),
    ];
    for (row, (id, z3)) in v["rows"].as_array().unwrap().iter().zip(want) {
        assert_eq!(row["id"], id);
        let got: f64 = row["row"]["z3_estimated"].as_str().unwrap().parse().unwrap();
        assert!(((got - z3) / z3).abs() < 1e-3, "{id}: {got} vs {z3}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(xi_lab(&["solve", "--kind", "nonsense", "--p", "7", "--N", "4"]).status.code(), Some(2));
    assert_eq!(xi_lab(&["--precision", "3", "expand", "--kind", "cosh", "--p", "7"]).status.code(), Some(2));
    assert_eq!(xi_lab(&["bogus-subcommand"]).status.code(), Some(2));
    assert_eq!(
        xi_lab(&["zeros", "--kind", "cosh", "--count", "5", "--z-max", "3"]).status.code(),
        Some(3)
    );
}

#[test]
fn saddle_and_master_run() {
    let o = xi_lab(&["--json", "master", "--kind", "explicit", "--p", "2", "--N", "2", "--restarts", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["obstruction"], false);
    let o = xi_lab(&["--json", "saddle", "--kind", "explicit", "--p", "4", "--s", "0,0,0", "--N", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
