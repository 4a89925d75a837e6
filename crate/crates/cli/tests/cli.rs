use kbwave_cli::config::{parse_list, parse_real, JobConfig, KindName};
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn kbwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kbwave"))
        .args(args)
        .env_remove("KBWAVE_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// `(xi, f, f_prime, g)` rows of a profile CSV.
fn rows(text: &str) -> Vec<[f64; 4]> {
    text.lines()
        .skip(1)
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

#[test]
fn classify_examples() {
    let cases = [
        ("2,-7/4,-7/2,-3/2", "DoubleBetweenSimples: two solitary branches"),
        ("0,0,0,-1/8", "NoRealZeros: no real solution"),
        ("2,-25/16,-25/8,-39/32", "FourSimple: periodic"),
    ];
    for (params, line) in cases {
        let o = kbwave(&["classify", "--params", params]);
        assert!(o.status.success());
        assert!(stdout(&o).lines().any(|l| l == line), "{params}: {}", stdout(&o));
    }
    let o = kbwave(&["classify", "--roots", "-3,-2,-2,-1", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["case_tag"], "DoubleBetweenSimples");
    assert_eq!(v["zeros"][1]["multiplicity"], 2);
}

#[test]
fn solve_case1a_preset_is_the_shifted_sech() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c1a.csv");
    let o = kbwave(&["solve", "--preset", "fig-case1a", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(&out);
    assert!(text.starts_with("xi,f,f_prime,g\n"));
    assert!(!text.contains('\r'));
    let r = rows(&text);
    assert_eq!(r.len(), 2001);
    for [xi, f, fp, g] in r {
        assert!((f - (sech(xi) - 2.0)).abs() < 1e-12, "f at {xi}");
        assert!((fp + sech(xi) * xi.tanh()).abs() < 1e-12, "f' at {xi}");
        // g = −c f − ¾ f² + d₁ with c = 2, d₁ = −7/4
        assert!((g - (-2.0 * f - 0.75 * f * f - 1.75)).abs() < 1e-12);
        if xi == 0.0 {
            assert!((f + 1.0).abs() < 1e-12);
        }
    }
    let side: Value = serde_json::from_str(&read(&dir.path().join("c1a.json"))).unwrap();
    assert_eq!(side["schema"], 1);
    assert_eq!(side["kind"], "Case1Cn");
    assert_eq!(side["modulus"], 1.0);
    assert_eq!(side["decay_rate"], 1.0);
    assert_eq!(side["gates_passed"], true);
    assert!(side["residuals"]["ode"].as_f64().unwrap() < 1e-8);
}

#[test]
fn case2e_config_reproduces_the_sine_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    std::fs::write(
        &cfg,
        r#"{
  "params": {"c": -0.3333333333333333, "d1": 0.2777777777777778, "d2": -0.16666666666666666, "d3": 0.041666666666666664},
  "kind": "case2-inv-sn",
  "domain": [-6, 6],
  "n": 601
}"#,
    )
    .unwrap();
    let o = kbwave(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let w = 2.0 / 3f64.sqrt();
    for [xi, f, _, _] in rows(&stdout(&o)) {
        let s = (w * xi).sin();
        assert!((f - s / (s + 2.0)).abs() < 1e-12, "{xi}");
    }
}

#[test]
fn mismatched_roots_and_params_are_rejected_with_a_hint() {
    let o = kbwave(&["solve", "--params", "2,-7/4,-7/2,-1", "--roots", "-3,-2,-2,-1"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("do not match") && e.contains("pass params 2,-1.75,-3.5,-1.5"), "{e}");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    std::fs::write(&cfg, r#"{"params": {"c": 2, "d1": -1.75, "d2": -3.5, "d3": -1.5}, "roots": [-3, -2, -2, -0.5]}"#).unwrap();
    let o = kbwave(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // agreeing params and roots are accepted
    let o = kbwave(&["classify", "--params", "2,-7/4,-7/2,-3/2", "--roots", "-3,-2,-2,-1"]);
    assert!(o.status.success());
}

#[test]
fn infeasible_kind_lists_the_feasible_ones() {
    let o = kbwave(&["solve", "--params", "2,-7/4,-7/2,-3/2", "--kind", "general-sn2"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("feasible kinds:") && e.contains("solitary-double") && e.contains("case1-cn"), "{e}");

    let o = kbwave(&["solve", "--params", "0,0,0,-1/8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no real solution"));
}

#[test]
fn malformed_config_reports_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"params\": {\"c\": 2, \"d1\": -1.75, \"d2\": -3.5, \"d3\": -1.5},\n  \"domian\": [0, 1]\n}\n").unwrap();
    let o = kbwave(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("domian") && e.contains("line 3"), "{e}");

    for bad in [r#"{"roots": [1, 2, 3]}"#, r#"{"preset": "fig-case1a", "n": 1}"#, r#"{"preset": "fig-case1a", "domain": [1, 0]}"#] {
        std::fs::write(&cfg, bad).unwrap();
        let o = kbwave(&["solve", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
    let o = kbwave(&["solve", "--preset", "fig-nope"]);
    assert!(stderr(&o).contains("fig-case2bc-k1"));
}

#[test]
fn tolerance_override_drives_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_kbwave"))
            .args(["solve", "--preset", "fig-case1b-k05", "--out", out.to_str().unwrap()])
            .env("KBWAVE_TOL", tol)
            .output()
            .unwrap()
    };
    assert!(run("1e-8").status.success());
    let o = run("1e-40");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gate failed: ode residual"));
    let side: Value = serde_json::from_str(&read(&dir.path().join("p.json"))).unwrap();
    assert_eq!(side["gates_passed"], false);
    assert_eq!(run("zero").status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for fmt in ["csv", "json"] {
        let a = dir.path().join(format!("a.{fmt}"));
        let b = dir.path().join(format!("b.{fmt}"));
        for p in [&a, &b] {
            let o = kbwave(&["solve", "--preset", "fig-case2e", "--format", fmt, "--out", p.to_str().unwrap()]);
            assert!(o.status.success());
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
    // no temporary files are left behind
    let names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().all(|n| n.starts_with("a.") || n.starts_with("b.")), "{names:?}");
}

#[test]
fn golden_case1a_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig-case1a.csv");
    let o = kbwave(&["solve", "--preset", "fig-case1a", "--domain", "-2,2", "--n", "21", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    assert_eq!(read(&out), read(&golden.join("fig-case1a.csv")));
    assert_eq!(read(&dir.path().join("fig-case1a.json")), read(&golden.join("fig-case1a.json")));
    // the golden file itself agrees with sech(ξ) − 2
    for [xi, f, _, _] in rows(&read(&golden.join("fig-case1a.csv"))) {
        assert!((f - (sech(xi) - 2.0)).abs() < 1e-14);
    }
}

/// Coefficient of `f^(k+2) c^(4−k)` in `−f²(f + 2c)⁴/4` as a reduced fraction string.
fn l4_coefficient(k: u32) -> String {
    let binom = [1i64, 4, 6, 4, 1][k as usize];
    let num = -binom * 2i64.pow(4 - k);
    if num % 4 == 0 {
        format!("{}", num / 4)
    } else {
        let g = if num % 2 == 0 { 2 } else { 1 };
        format!("{}/{}", num / g, 4 / g)
    }
}

#[test]
fn reduce_four_emits_exact_coefficients() {
    let o = kbwave(&["reduce", "--ell", "4"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let terms = v["p_final"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 5);
    for k in 0..=4u32 {
        let t = terms
            .iter()
            .find(|t| t["f_power"] == k + 2 && t["c_power"] == 4 - k)
            .unwrap_or_else(|| panic!("missing f^{} c^{}", k + 2, 4 - k));
        assert_eq!(t["coefficient"], l4_coefficient(k));
    }
    assert_eq!(v["fields"].as_array().unwrap().len(), 4);
}

#[test]
fn reduce_seven_has_both_candidate_verdicts() {
    let o = kbwave(&["reduce", "--ell", "7"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["conjecture"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r["printed_match"].is_boolean() && r["pattern_match"].is_boolean());
    }
    let four = rows.iter().find(|r| r["ell"] == 4).unwrap();
    assert_eq!(four["printed_match"], false);
    assert_eq!(four["pattern_match"], true);
    assert_eq!(kbwave(&["reduce", "--ell", "1"]).status.code(), Some(2));
}

#[test]
fn evolve_reports_permanence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = kbwave(&["evolve", "--preset", "fig-case1a", "--t-end", "1", "--grid", "1024", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&read(&dir.path().join("run.json"))).unwrap();
    assert!(summary["linf_u"].as_f64().unwrap() < 1e-3);
    assert_eq!(summary["passed"], true);
    for part in ["run_initial.csv", "run_final.csv"] {
        let t = read(&dir.path().join(part));
        assert!(t.starts_with("x,u,v\n"));
        assert_eq!(t.lines().count(), 1025);
    }
}

#[test]
fn evolve_surfaces_blow_up_and_bad_grids() {
    let o = kbwave(&["evolve", "--preset", "fig-case1a", "--grid", "256", "--dt", "0.5", "--t-end", "50"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("blow-up") && e.contains("stable bound"), "{e}");
    assert_eq!(kbwave(&["evolve", "--preset", "fig-case1a", "--grid", "1000"]).status.code(), Some(2));
}

#[test]
fn oracle_follows_the_closed_form() {
    let o = kbwave(&["oracle", "--params", "2,-7/4,-7/2,-3/2", "--domain", "-8,8", "--n", "161"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 161);
    for [xi, f, _, _] in r {
        assert!((f - (sech(xi) - 2.0)).abs() < 1e-6, "{xi}");
    }
    let meta: Value = serde_json::from_str(&stderr(&o)).unwrap();
    assert!(meta["closed_form_linf"].as_f64().unwrap() < 1e-6);

    // explicit start inside the band of four simple zeros
    let o = kbwave(&["oracle", "--roots", "0,1,2,3", "--f0", "0.5", "--n", "101", "--domain", "0,10", "--xi0", "0"]);
    assert!(o.status.success());
    assert!(rows(&stdout(&o)).iter().all(|r| (-1e-9..=1.0 + 1e-9).contains(&r[1])));
}

#[test]
fn figures_write_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = kbwave(&["figures", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 8);
    let at0 = |name: &str| {
        rows(&read(&dir.path().join(format!("{name}.csv"))))
            .into_iter()
            .find(|r| r[0] == 0.0)
            .unwrap()[1]
    };
    assert!((at0("fig-case1a") + 1.0).abs() < 1e-12);
    assert!((at0("fig-case2f-k1") - 1.0 / 3.0).abs() < 1e-12);
    assert!((at0("fig-case2a") + 0.5).abs() < 1e-12);
    assert!((at0("fig-case2b") - 1.0 / (2.0 - 3f64.sqrt())).abs() < 1e-12);
    assert!((at0("fig-case1b-k05") + 1.0).abs() < 1e-12);
}

#[test]
fn verify_reports_every_residual() {
    let o = kbwave(&["verify", "--preset", "fig-case2f"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v["residuals"];
    for key in ["ode", "pde_u", "pde_v", "oracle_linf"] {
        assert!(r[key].as_f64().unwrap() < 1e-6, "{key}");
    }
}

#[test]
fn parsing_helpers() {
    assert_eq!(parse_real("-7/4").unwrap(), -1.75);
    assert_eq!(parse_real(" 1e-3 ").unwrap(), 1e-3);
    assert_eq!(parse_real("40pi").unwrap(), 40.0 * std::f64::consts::PI);
    assert!(parse_real("1/0").is_err());
    assert!(parse_real("x").is_err());
    assert_eq!(parse_list("1,2/4,-3", 3, "t").unwrap(), vec![1.0, 0.5, -3.0]);
    assert!(parse_list("1,2", 3, "t").is_err());
}

#[test]
fn config_defaults_and_validation() {
    let c = JobConfig::from_json(r#"{"roots": [-3, -2, -2, -1]}"#).unwrap();
    assert_eq!(c.kind, KindName::Auto);
    assert_eq!((c.domain, c.n), ((-10.0, 10.0), 2001));
    c.validate().unwrap();
    let r = c.resolve().unwrap();
    assert_eq!(r.roots.signature(), vec![1, 2, 1]);
    assert_eq!(r.params.d3, -1.5);

    assert!(JobConfig::from_json(r#"{}"#).unwrap().validate().is_err());
    let bad = JobConfig::from_json(r#"{"preset": "fig-case1a", "evolution": {"n": 100}}"#).unwrap();
    assert!(bad.validate().is_err());
    let e = JobConfig::from_json(r#"{"preset": "fig-case1a", "evolution": {"L": 10, "T": 2, "dt": 0.001}}"#).unwrap();
    assert_eq!((e.evolution.length, e.evolution.t_end, e.evolution.dt), (10.0, 2.0, Some(0.001)));
    assert_eq!(KindName::Case2InvSn.name(), "case2-inv-sn");
}
