use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use warpgraph_cli::config::{parse_file_config, resolve, Command as Cmd, Overrides, Topo};
use warpgraph_cli::report::REPORT_KEYS;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_warpgraph"));
    c.env_remove("WARPGRAPH_OUT");
    c
}

fn run(args: &[&str], out: &Path) -> (i32, Value) {
    let o: Output = bin().args(args).arg("--out").arg(out).output().unwrap();
    let code = o.status.code().unwrap();
    let name = args[0];
    let text = std::fs::read_to_string(out.join(format!("{name}.json"))).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let stdout: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v, stdout);
    (code, v)
}

fn keys_ok(v: &Value) {
    let obj = v.as_object().unwrap();
    for k in REPORT_KEYS {
        assert!(obj.contains_key(k), "missing {k}");
    }
    assert_eq!(obj.len(), REPORT_KEYS.len());
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["exit_code"], v["exit_code"].as_i64().unwrap());
}

#[test]
fn classify_constant_preset() {
    let d = tempfile::tempdir().unwrap();
    let (code, v) = run(&["classify-warp", "--preset", "constant"], d.path());
    assert_eq!(code, 0);
    keys_ok(&v);
    assert_eq!(v["result"]["monotone"], "constant");
    assert_eq!(v["status"], "ok");
}

#[test]
fn counterexample_a_first_integral() {
    let d = tempfile::tempdir().unwrap();
    let (code, v) = run(&["verify-counterexamples", "--which", "a"], d.path());
    assert_eq!(code, 0);
    let case = &v["result"]["cases"][0];
    assert!(case["first_integral_deviation"].as_f64().unwrap() < 1e-10);
    assert_eq!(case["pass"], true);
}

#[test]
fn counterexample_b_and_unknown_case() {
    let d = tempfile::tempdir().unwrap();
    let (code, v) = run(&["verify-counterexamples", "--which", "b"], d.path());
    assert_eq!(code, 0);
    let r = v["result"]["cases"][0]["h_range"].as_array().unwrap();
    assert!(r[0].as_f64().unwrap() >= 5f64.sqrt() / 2.0 - 1e-12);
    let (code, v) = run(&["verify-counterexamples", "--which", "c"], d.path());
    assert_eq!(code, 2);
    assert!(v["error"].as_str().unwrap().contains("unknown counterexample"));
}

#[test]
fn solve_cosh_torus_reaches_zero() {
    let d = tempfile::tempdir().unwrap();
    let (code, v) = run(
        &["solve", "--preset", "cosh", "--grid", "torus2:64", "--init", "sincos:0.3"],
        d.path(),
    );
    assert_eq!(code, 0);
    keys_ok(&v);
    let rep = &v["result"]["report"];
    assert_eq!(rep["converged"], true);
    assert!(rep["mean"].as_f64().unwrap().abs() < 1e-6);
    assert!(rep.get("wall_time").is_none());
    assert!(d.path().join("u.csv").exists());
}

#[test]
fn non_convergence_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let (code, v) = run(
        &["solve", "--preset", "cosh", "--grid", "torus2:16", "--init", "sincos:0.3", "--max-iter", "1"],
        d.path(),
    );
    assert_eq!(code, 3);
    assert_eq!(v["status"], "not_converged");
}

#[test]
fn validation_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["solve", "--grid", "torus2:4"][..],
        &["solve", "--grid", "torus2:16", "--init", "wave:1"],
        &["solve", "--grid", "torus2:16", "--preset", "sinh"],
        &["solve", "--grid", "torus2:16", "--method", "bfgs"],
        &["solve"],
    ] {
        let (code, v) = run(args, d.path());
        assert_eq!(code, 2, "{args:?}");
        keys_ok(&v);
        assert!(v["error"].is_string());
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[grid]\nspec = \"torus2:16\"\n[warp]\npreset = \"cosh\"\n[init]\npreset = \"random:0.05\"\n[solver]\ntol_residual = 1e-9\nseed = 3\n",
    )
    .unwrap();
    let (code, v) = run(&["solve", "--config", cfg.to_str().unwrap(), "--tol", "1e-11"], d.path());
    assert_eq!(code, 0);
    assert_eq!(v["config"]["solver"]["tol_residual"], 1e-11);
    assert_eq!(v["config"]["solver"]["seed"], 3);
    assert_eq!(v["config"]["grid"]["resolution"], serde_json::json!([16, 16]));
}

#[test]
fn misspelled_key_is_named() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, "[grid]\nresoluton = [16, 16]\n").unwrap();
    let (code, v) = run(&["solve", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(code, 2);
    assert!(v["error"].as_str().unwrap().contains("resoluton"));
    std::fs::write(&cfg, "[grid]\nspec = 64\n").unwrap();
    let (code, _) = run(&["solve", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(code, 2);
}

#[test]
fn minimal_file_fills_defaults() {
    let file = parse_file_config("[grid]\nresolution = [16]\n").unwrap();
    let rc = resolve(Cmd::Solve, file, &Overrides::default()).unwrap();
    let g = rc.grid.unwrap();
    assert_eq!((g.topology, g.extents.clone()), (Topo::Torus, vec![1.0]));
    assert_eq!(rc.solver, warpgraph::SolverConfig::default());
    assert_eq!(rc.warp.preset, None);
    assert_eq!(rc.init.preset, "sincos:0.1");
    assert!(rc.warp.build().unwrap().is_preset(warpgraph::Preset::Cosh));
    let ov = Overrides {
        tol: Some(1e-10),
        ..Overrides::default()
    };
    let file = parse_file_config("[grid]\nresolution = [16]\n[solver]\ntol_residual = 1e-6\n").unwrap();
    assert_eq!(resolve(Cmd::Solve, file, &ov).unwrap().solver.tol_residual, 1e-10);
    assert!(parse_file_config("[plot]\nx = 1\n").is_err());
}

#[test]
fn out_dir_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["classify-warp", "--preset", "exp"])
        .env("WARPGRAPH_OUT", d.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(d.path().join("classify-warp.json").exists());
}

#[test]
fn repeated_solves_are_identical() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let args = ["solve", "--preset", "cosh", "--grid", "torus2:32", "--init", "random:0.05", "--seed", "9"];
    let (_, a) = run(&args, d1.path());
    let (_, b) = run(&args, d2.path());
    assert_eq!(a["result"]["report"], b["result"]["report"]);
    let ua = std::fs::read(d1.path().join("u.csv")).unwrap();
    let ub = std::fs::read(d2.path().join("u.csv")).unwrap();
    assert_eq!(ua, ub);
}

#[test]
fn flow_writes_snapshots_and_volumes() {
    let d = tempfile::tempdir().unwrap();
    let (code, v) = run(
        &["flow", "--preset", "constant", "--grid", "torus1:16", "--init", "sincos:0.2", "--tol", "1e-8", "--max-iter", "20000", "--snapshot-every", "200"],
        d.path(),
    );
    assert_eq!(code, 0, "{}", v["error"]);
    assert_eq!(v["config"]["solver"]["method"], "flow_relax");
    let vols: Vec<f64> = v["result"]["volumes"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(vols.windows(2).all(|w| w[1] <= w[0]));
    let snaps = v["result"]["snapshots"].as_array().unwrap();
    assert_eq!(snaps[0]["step"], 0);
    assert!(d.path().join("snapshots/u_000000.csv").exists());
}

#[test]
fn flow_blow_up_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let (code, v) = run(
        &["flow", "--preset", "exp", "--domain=-0.02,5", "--grid", "torus1:8", "--init", "zero", "--max-iter", "1000"],
        d.path(),
    );
    assert_eq!(code, 3);
    assert!(v["error"].as_str().unwrap().contains("blew up"));
}

#[test]
fn hypotheses_with_solve() {
    let d = tempfile::tempdir().unwrap();
    let (code, v) = run(
        &["hypotheses", "--preset", "cosh", "--grid", "torus2:16", "--init", "random:0.05", "--solve-first"],
        d.path(),
    );
    assert_eq!(code, 0);
    let r = &v["result"];
    assert_eq!(r["report"]["predicted_conclusion"], "constant");
    assert!(r["report"]["applicable_theorems"].as_array().unwrap().contains(&"propio".into()));
    assert_eq!(r["quasi_isometry"]["pass"], true);
    assert_eq!(r["solve"]["consistent_with_prediction"], true);
}

#[test]
fn area_growth_on_scherk_box() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("scherk.toml");
    std::fs::write(
        &cfg,
        "[grid]\ntopology = \"box\"\nresolution = [41, 41]\nextents = [4.0, 4.0]\norigin = [-2.0, -2.0]\n[warp]\npreset = \"constant\"\n[init]\npreset = \"scherk:0.5\"\n",
    )
    .unwrap();
    let (code, v) = run(&["area-growth", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(code, 0, "{}", v["error"]);
    assert_eq!(v["result"]["area"]["within"], true);
    let c: Vec<f64> = v["result"]["area"]["center"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(c.iter().all(|x| x.abs() < 1e-12), "{c:?}");
}

#[test]
fn identity_suite_and_failure_code() {
    let d = tempfile::tempdir().unwrap();
    let (code, v) = run(&["verify-identities", "--which", "dtau,lcos", "--counts", "32,64,128"], d.path());
    assert_eq!(code, 0, "{}", v["result"]);
    assert_eq!(v["result"]["reports"].as_array().unwrap().len(), 2);
    let cfg = d.path().join("strict.toml");
    std::fs::write(&cfg, "[analysis]\nrequired_order = 5.0\n").unwrap();
    let (code, v) = run(
        &["verify-identities", "--config", cfg.to_str().unwrap(), "--which", "dtau", "--counts", "16,32"],
        d.path(),
    );
    assert_eq!(code, 4);
    assert_eq!(v["status"], "check_failed");
}
