use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkz-euler")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn builtin_verify_passes_and_is_deterministic() {
    let a = run(&["verify", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let v = json(&a);
    assert_eq!(v["passed"], true);
    let cases: Vec<&str> = v["items"].as_array().unwrap().iter().map(|i| i["case"].as_str().unwrap()).collect();
    assert_eq!(cases, ["gauss", "kummer", "f1", "phi1", "e36", "e36c"]);
    let b = Command::new(env!("CARGO_BIN_EXE_gkz-euler"))
        .args(["verify", "--seed", "3"])
        .env("GKZ_EULER_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout, "output depends on thread count");
}

#[test]
fn verify_exit_codes() {
    let resonant = run(&["verify", r#"[{"case":"gauss","params":[0.3,0.4,1.0]}]"#]);
    assert_eq!(resonant.status.code(), Some(3));
    assert_eq!(json(&resonant)["items"][0]["error"]["kind"], "SineZero");

    let coarse = run(&["verify", "--order", "10", r#"{"cases":[{"case":"e36","point":[0.3,0.3,0.3,0.3]}]}"#]);
    assert_eq!(coarse.status.code(), Some(1));
    assert_eq!(json(&coarse)["items"][0]["status"], "fail");

    let diverging = run(&["verify", "--order", "10", r#"[{"case":"e36","point":[0.5,0.5,0.5,0.5]}]"#]);
    assert_eq!(diverging.status.code(), Some(1));
    assert_eq!(json(&diverging)["items"][0]["error"]["kind"], "DivergentTail");

    let unknown = run(&["verify", r#"[{"case":"nope"}]"#]);
    assert_eq!(unknown.status.code(), Some(2));
    assert_eq!(run(&["verify", "{not json"]).status.code(), Some(2));
}

#[test]
fn fan_scan_and_triangulate() {
    let o = run(&["fan-scan", "--config", "g1", "--samples", "2000", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["count"], 5);
    let t = run(&["triangulate", "--config", "h4", "--seed", "5"]);
    assert_eq!(t.status.code(), Some(0));
    assert!(json(&t)["triangulation"]["simplices"].is_array());
    let bad = run(&["triangulate", "--config", "gamma2", "--omega", "0,0,0,0"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("DegenerateLifting"));
    assert_eq!(run(&["fan-scan", "--config", "nowhere.json"]).status.code(), Some(2));
}

#[test]
fn ladders_and_identities() {
    let l = json(&run(&["ladders", "2", "5"]));
    assert_eq!(l["count"], 6);
    assert_eq!(l["ladders"][0]["exponents"][2]["exponent"], "c0+c1+c5");
    let c = json(&run(&["ladders", "2", "5", "--confluent"]));
    assert_eq!(c["ladders"][0]["exponents"].as_array().unwrap().len(), 4);

    let ok = run(&["identities", "gauss", "--params", "1/3,2/7,5/11", "--n-max", "10"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(json(&ok)["rows"].as_array().unwrap().iter().all(|r| r["holds"] == true));
    let k = run(&["identities", "kummer", "--params", "3/5,4/9", "--n-max", "10"]);
    assert_eq!(k.status.code(), Some(0));
    let degenerate = run(&["identities", "gauss", "--params", "1/3,2/7,1"]);
    assert_eq!(degenerate.status.code(), Some(3));
    assert_eq!(json(&degenerate)["rows"][0]["error"]["kind"], "DegenerateParameter");
}

#[test]
fn series_and_out_file() {
    let dir = std::env::temp_dir().join(format!("gkz-euler-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let req = dir.join("req.json");
    std::fs::write(
        &req,
        r#"{"config":"gauss","sigma":[2,3,4],"z":[[0.3,0],[1,0],[1,0],[1,0]],"delta":[[0.21,0],[0.64,0],[0.38,0]],"order":40}"#,
    )
    .unwrap();
    let out = dir.join("series.json");
    let o = run(&["series", req.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // σ = 234 at z = (x,1,1,1): value is ₂F₁(α,β;γ;x)/(Γ(1−u_1)Γ(1−u_2)Γ(1−u_3)) up to the unit prefactor
    assert!(v["value"][0].as_f64().unwrap().is_finite());
    assert!(v["last_shell_max"].as_f64().unwrap() < 1e-15);
    std::fs::remove_dir_all(&dir).ok();
}
