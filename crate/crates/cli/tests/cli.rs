use serde_json::Value;

use polyquot_cli::{run_cli, EXIT_INVALID, EXIT_LIMIT, EXIT_OK};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("polyquot").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let r = run(args);
    assert_eq!(r.code, EXIT_OK, "{args:?}: {}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

#[test]
fn eval_matches_contract() {
    let r = run(&["eval", "--p", "5", "--w", "4", "--u", "2"]);
    assert_eq!(r.code, EXIT_OK);
    assert_eq!(r.stdout, "{\"p\":5,\"w\":4,\"u\":2,\"q\":3}\n");
    assert!(r.stderr.is_empty());
}

#[test]
fn invalid_arguments_exit_2() {
    for args in [
        &["eval", "--p", "4", "--w", "1", "--u", "1"][..],
        &["eval", "--p", "5", "--w", "0", "--u", "1"],
        &["eval", "--p", "5", "--w", "1"],
        &["eval", "--p", "5", "--w", "1", "--u", "1", "--bogus", "3"],
        &["batch", "--p", "5", "--w", "1", "--n", "6"],
        &["interp", "--p", "5", "--w", "1", "--n", "5", "--poly", "x"],
        &["sweep", "--theorem", "9"],
        &["verify", "--suite", "nope"],
        &["ff", "--p", "3", "--modulus", "1,1,1"],
        &["nosuch"],
        &[],
    ] {
        let r = run(args);
        assert_eq!(r.code, EXIT_INVALID, "{args:?}");
        assert!(r.stdout.is_empty(), "{args:?}");
        assert!(!r.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn caps_exit_3() {
    let r = run(&["repcount", "--p", "4099", "--w", "1", "--n", "10", "--s", "2"]);
    assert_eq!(r.code, EXIT_LIMIT);
    let r = run(&["valueset", "--p", "1000003", "--w", "1", "--n", "10"]);
    assert_eq!(r.code, EXIT_LIMIT);
    let r = run(&["sweep", "--theorem", "2", "--grid", "31,5003"]);
    assert_eq!(r.code, EXIT_LIMIT);
    let partial: Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(partial.as_array().unwrap().iter().all(|row| row["p"] == 31));
}

#[test]
fn waring_zero_map_is_infinite() {
    let v = json(&["waring", "--p", "5", "--w", "5", "--n", "5"]);
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys[0], "g");
    assert_eq!(v["g"], "infinite");
    let v = json(&["waring", "--p", "5", "--w", "4", "--n", "5"]);
    assert_eq!(v["g"], 2);
    assert_eq!(v["sizes"], serde_json::json!([3, 5]));
    assert_eq!(v["ell"], 2);
}

#[test]
fn spectrum_commands() {
    assert_eq!(
        json(&["batch", "--p", "5", "--w", "4", "--n", "5"])["values"],
        serde_json::json!([0, 0, 3, 1, 1])
    );
    let v = json(&["valueset", "--p", "5", "--w", "4", "--n", "5"]);
    assert_eq!(v["v"], 3);
    assert_eq!(v["values"], serde_json::json!([0, 1, 3]));
    assert_eq!(json(&["fixed", "--p", "5", "--w", "4", "--n", "5"])["count"], 1);
    assert_eq!(
        json(&["interp", "--p", "5", "--w", "4", "--n", "5", "--poly", "0,1"])["count"],
        1
    );
    assert_eq!(
        json(&["interp", "--p", "5", "--w", "4", "--n", "5", "--poly", "-5"])["count"],
        2
    );
    assert_eq!(json(&["lambda", "--p", "5"])["lambda"], 9);
    assert_eq!(json(&["ell", "--p", "5", "--w", "5"])["ell"], Value::Null);
    let classes = json(&["classes", "--p", "7", "--d", "3"]);
    assert_eq!(classes["classes"].as_array().unwrap().len(), 2);
    let h = json(&["primehist", "--p", "5", "--n", "5"]);
    assert_eq!(h["pi"], 2);
}

#[test]
fn large_integers_become_strings() {
    let v = json(&["repcount", "--p", "101", "--w", "1", "--n", "101", "--s", "10"]);
    let total = "110462212541120451001";
    assert_eq!(v["total"], total);
    let counts = v["counts"].as_array().unwrap();
    assert!(counts.iter().all(Value::is_string));
    let v = json(&["repcount", "--p", "5", "--w", "4", "--n", "5", "--s", "2"]);
    assert_eq!(v["counts"], serde_json::json!([4, 9, 4, 4, 4]));
    assert_eq!(v["total"], 25);
}

#[test]
fn charsum_rounds_to_nine_places() {
    let v = json(&["charsum", "--p", "5", "--w", "4", "--n", "5"]);
    assert_eq!(v["max_nontrivial"].as_f64().unwrap(), 2.236067977);
    assert_eq!(v["magnitudes"][0].as_f64().unwrap(), 5.0);
    let v = json(&["charsum", "--p", "5", "--w", "4", "--n", "5", "--a", "0"]);
    assert_eq!(v["magnitude"].as_f64().unwrap(), 5.0);
}

#[test]
fn funcfield_commands() {
    let v = json(&["ff", "--p", "3", "--n", "2"]);
    assert_eq!(v["modulus"], "1,0,1");
    assert_eq!(v["image_size"], 3);
    assert_eq!(v["zero_fiber_size"], 3);
    assert_eq!(v["relation_ok"], true);
    let v = json(&[
        "ff",
        "--p",
        "3",
        "--r",
        "2",
        "--conductor",
        "1,0,1",
        "--n",
        "2",
        "--w",
        "2",
    ]);
    assert_eq!(v["q"], 9);
    assert_eq!(v["companion_ok"], true);
    let v = json(&["ff", "--p", "3", "--modulus", "1,0,1", "--poly", "0,1", "--w", "3"]);
    assert_eq!(v["zero_map"], true);
    assert_eq!(v["value"], "0");
}

#[test]
fn csv_output() {
    let r = run(&[
        "sweep",
        "--theorem",
        "6",
        "--grid",
        "5",
        "--w",
        "4",
        "--n",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(r.code, EXIT_OK);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("theorem,p,w,N,stat,exact,bound,ratio,flag"));
    assert!(r.stdout.contains("6,5,4,5,g_cd_ceiling,2,2.0,1.0,ok"));
    assert!(!r.stdout.contains('\r'));
    assert!(r.stderr.starts_with("# theorem=6"));
    let r = run(&[
        "repcount", "--p", "5", "--w", "4", "--n", "5", "--s", "2", "--format", "csv",
    ]);
    assert_eq!(r.stdout, "p,w,n,s,covers_all,total,counts\n5,4,5,2,true,25,4;9;4;4;4\n");
}

#[test]
fn out_file() {
    let path = std::env::temp_dir().join(format!("polyquot-cli-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let r = run(&["eval", "--p", "7", "--w", "1", "--u", "8", "--out", p]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written, "{\"p\":7,\"w\":1,\"u\":8,\"q\":1}\n");
}

#[test]
fn verify_reports_each_suite() {
    let r = run(&["verify", "--suite", "all", "--grid", "3..13"]);
    assert_eq!(r.code, EXIT_OK);
    let rows: Value = serde_json::from_str(&r.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), polyquot::verifier::SUITES.len());
    assert!(rows.iter().all(|row| row["passed"] == true && row["witness"].is_null()));
    let r = run(&["verify", "--suite", "binomial", "--grid", "3..31", "--format", "csv"]);
    assert!(r.stdout.starts_with("suite,passed,checks,witness\nbinomial,true,"));
}

#[test]
fn sweep_output_is_deterministic() {
    let a = run(&[
        "sweep",
        "--theorem",
        "1",
        "--grid",
        "31,61",
        "--poly",
        "0,1",
        "--poly",
        "1,0,1",
    ]);
    let b = run(&[
        "sweep",
        "--theorem",
        "1",
        "--grid",
        "31,61",
        "--poly",
        "0,1",
        "--poly",
        "1,0,1",
    ]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
    let rows: Value = serde_json::from_str(&a.stdout).unwrap();
    assert!(rows.as_array().unwrap().iter().any(|r| r["stat"] == "F[1;0;1]"));
}
