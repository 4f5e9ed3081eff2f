use std::process::Command;

fn klr(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_klr")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn tsys_reports_pass() {
    let (code, out) = klr(&["--preset", "A2", "tsys", "--w", "1 2", "--v", "", "--i", "1"]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
    assert!(v["version"].is_string());
}

#[test]
fn precondition_errors_exit_nonzero() {
    let (code, _) = klr(&["tsys", "--w", "1 2", "--v", "", "--i", "2"]);
    assert_eq!(code, 2);
}

#[test]
fn scenario_reports_are_reproducible() {
    let strip = |s: String| {
        let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
        v.as_object_mut().unwrap().remove("wall_ms");
        v
    };
    let a = klr(&["suite", "run", "--scenario", "gent-commuting"]);
    let b = klr(&["suite", "run", "--scenario", "gent-commuting"]);
    assert_eq!(a.0, 0);
    assert_eq!(strip(a.1), strip(b.1));
}

#[test]
fn localized_hom_and_det_build() {
    let (code, out) = klr(&["loc", "hom", "--w", "1 2", "--v", "2", "--src", "1,1 0", "--dst", "C1,0 0"]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["checks"][0]["details"]["dim"], 1);
    let (code, out) = klr(&["det", "build", "--w", "1 2", "--v", "", "--weight", "L1"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn scenario_list_is_unique() {
    let (code, out) = klr(&["suite", "run", "--list"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let ids: Vec<&str> = v["checks"][0]["details"].as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(ids.len(), sorted.len());
}
