mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use common::data;

fn axiomlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_axiomlab"))
        .args(args)
        .env_remove("AXIOMLAB_MAX_PROFILES")
        .output()
        .expect("binary runs")
}

fn p(name: &str) -> String {
    data(name).to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn rsd_prints_exact_weights() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("p.json");
    std::fs::write(&profile, r#"[["a","b","c"],["a","b","c"],["a","b","c"]]"#).unwrap();
    let out = axiomlab(&["rsd", "--instance", &p("n3k3.json"), "--profile", profile.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let lottery = json(&out)["lottery"].as_array().unwrap().clone();
    assert_eq!(lottery.len(), 6);
    assert!(lottery.iter().all(|e| e["weight"] == "1/6"));
}

#[test]
fn swap_example_exits_one_with_witness() {
    let out = axiomlab(&[
        "check-matching",
        "--axiom",
        "pairwise",
        "--instance",
        &p("n2k2.json"),
        "--profile",
        &p("swap_profile.json"),
        "--matching",
        &p("swap_matching.json"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let w = &json(&out)["report"]["witness"];
    assert_eq!(w["kind"], "swap");
    assert_eq!(w["agents"], serde_json::json!([0, 1]));
}

#[test]
fn verify_thm1_on_rsd_passes() {
    let out = axiomlab(&["verify-thm1", "--rule", "rsd", "--instance", &p("n3k3.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["status"], "verified");
    assert_eq!(v["report"]["theorem"], "thm1b");
}

#[test]
fn hypotheses_not_met_exits_one() {
    let out = axiomlab(&["verify-thm1", "--rule", "rsd", "--instance", &p("nb_instance.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["report"]["status"], "hypotheses_not_met");
}

#[test]
fn reports_are_byte_stable_across_worker_counts() {
    let run = |w: &str| {
        axiomlab(&["--workers", w, "check-rule", "--instance", &p("n3k3.json"), "--rule", "sd", "--axiom", "non-bossy"]).stdout
    };
    assert_eq!(run("1"), run("4"));
    let fail = |w: &str| {
        axiomlab(&["--workers", w, "check-rule", "--instance", &p("n3k3.json"), "--rule", &p("bossy_rule.json"), "--axiom", "non-bossy"])
    };
    let (a, b) = (fail("1"), fail("3"));
    assert_eq!(a.status.code(), Some(1));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"n\": 3,\n  \"objects\": [\n}").unwrap();
    let out = axiomlab(&["verify-thm1", "--rule", "rsd", "--instance", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn size_overflow_exits_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_axiomlab"))
        .args(["check-rule", "--instance", &p("n3k3.json"), "--rule", "sd", "--axiom", "sp"])
        .env("AXIOMLAB_MAX_PROFILES", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds"));
}

#[test]
fn gen_instance_is_reproducible_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let a = axiomlab(&["gen-instance", "--seed", "1", "--n", "3", "--k", "3"]);
    let b = axiomlab(&["gen-instance", "--seed", "1", "--n", "3", "--k", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let file = dir.path().join("gen.json");
    std::fs::write(&file, &a.stdout).unwrap();
    let f = file.to_str().unwrap();
    let out = axiomlab(&["ttc", "--instance", f, "--profile", f]);
    assert_eq!(out.status.code(), Some(0));

    let slack = json(&axiomlab(&["gen-instance", "--seed", "4", "--n", "4", "--k", "3", "--capacity-style", "slack"]));
    let total: u64 = slack["instance"]["objects"].as_array().unwrap().iter().map(|o| o["capacity"].as_u64().unwrap()).sum();
    assert!(total > 4);
    assert_eq!(axiomlab(&["gen-instance", "--n", "13", "--k", "3"]).status.code(), Some(2));
}

#[test]
fn replays_and_search_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("replay.json");
    let out = axiomlab(&[
        "replay-proof",
        "--instance",
        &p("figure2_instance.json"),
        "--profile",
        &p("figure2_profile.json"),
        "--matching",
        &p("figure2_mu.json"),
        "--dominating",
        &p("figure2_nu.json"),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["report"]["passed"], true);

    let hit = dir.path().join("hit.json");
    let out = axiomlab(&[
        "search-cex",
        "--instance",
        &p("n3k3.json"),
        "--require",
        "ex-post-pairwise,ex-post-non-wasteful",
        "--axiom",
        "ex-post-pareto",
        "--rule-out",
        hit.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(Path::new(&hit).exists());
    let again = axiomlab(&["check-rule", "--instance", &p("n3k3.json"), "--rule", hit.to_str().unwrap(), "--axiom", "ex-post-pareto"]);
    assert_eq!(again.status.code(), Some(1));
}

#[test]
fn appendix_replay_on_a_null_bottom_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let w = |name: &str, text: &str| {
        let f = dir.path().join(name);
        std::fs::write(&f, text).unwrap();
        f.to_str().unwrap().to_string()
    };
    let profile = w(
        "r.json",
        r#"[["b","a","c","none"],["c","b","a","none"],["a","c","b","none"],["a","b","c","none"]]"#,
    );
    let mu = w("mu.json", r#"["a","b","c","none"]"#);
    let nu = w("nu.json", r#"["b","c","a","none"]"#);
    let out = axiomlab(&[
        "replay-appendix",
        "--instance",
        &p("nb_instance.json"),
        "--profile",
        &profile,
        "--matching",
        &mu,
        "--dominating",
        &nu,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["report"]["case"], "full");
    assert_eq!(v["report"]["passed"], true);
}
