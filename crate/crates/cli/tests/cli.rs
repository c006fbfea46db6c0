use std::path::Path;
use std::process::{Command, Output};

fn lawson(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lawson"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_groups_reports_order_48() {
    let dir = tempfile::tempdir().unwrap();
    let o = lawson(dir.path(), &["verify", "--m", "3", "--k", "2", "--suite", "groups"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("full=48"));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(json["failed"], 0);
    assert_eq!(json["checks"][0]["witness"]["orders"][5][1], 48);
}

#[test]
fn assemble_level_five_has_genus_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = lawson(dir.path(), &["assemble", "--m", "3", "--k", "2", "--level", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("genus 2"), "{}", stdout(&o));
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("surface_3_2_l5.json")).unwrap()).unwrap();
    assert_eq!(doc["topology"]["euler_characteristic"], -2);
}

#[test]
fn disc_area_decreases_with_level() {
    let dir = tempfile::tempdir().unwrap();
    let area = |level: &str| -> f64 {
        let o = lawson(dir.path(), &["disc", "--m", "3", "--k", "2", "--level", level]);
        assert_eq!(o.status.code(), Some(0));
        let doc: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.path().join(format!("disc_l{level}.json"))).unwrap()).unwrap();
        assert_eq!(
            doc["mesh"]["triangles"].as_array().unwrap().len(),
            2 * 4usize.pow(level.parse().unwrap())
        );
        doc["report"]["area"].as_f64().unwrap()
    };
    assert!(area("3") < area("2"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        lawson(dir.path(), &["verify", "--m", "3", "--k", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(lawson(dir.path(), &["verify", "--level", "1"]).status.code(), Some(2));
    assert_eq!(lawson(dir.path(), &["unfold"]).status.code(), Some(2));
    assert_eq!(
        lawson(dir.path(), &["verify", "--colour", "red"]).status.code(),
        Some(2)
    );
    assert_eq!(
        lawson(dir.path(), &["verify", "--suite", "no-such-check"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lawson(dir.path(), &["export", "--format", "stl"]).status.code(),
        Some(2)
    );
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = lawson(
        dir.path(),
        &[
            "verify",
            "--level",
            "2",
            "--suite",
            "disc-symmetry",
            "--tol-sym",
            "1e-300",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "m = 4\nk = 3\nsuite = lattice-points\nseed = 5\n").unwrap();
    let o = lawson(
        dir.path(),
        &[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--k",
            "2",
            "--format",
            "json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        (json["m"].as_i64(), json["k"].as_i64(), json["seed"].as_u64()),
        (Some(4), Some(2), Some(5))
    );
    assert_eq!(json["checks"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_json_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "verify", "--m", "3", "--k", "2", "--level", "3", "--seed", "42", "--suite", "disc",
    ];
    lawson(a.path(), &args);
    lawson(b.path(), &args);
    let read = |d: &Path| std::fs::read(d.join("verify.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn export_writes_obj_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = lawson(dir.path(), &["export", "--m", "3", "--k", "2", "--level", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let obj = std::fs::read_to_string(dir.path().join("lawson_3_2_l2.obj")).unwrap();
    let sidecar: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("lawson_3_2_l2.json")).unwrap()).unwrap();
    let v = obj.lines().filter(|l| l.starts_with("v ")).count();
    let f: Vec<[usize; 3]> = obj
        .lines()
        .filter_map(|l| l.strip_prefix("f "))
        .map(|l| {
            let n: Vec<usize> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
            [n[0], n[1], n[2]]
        })
        .collect();
    assert_eq!(v, sidecar["mesh"]["vertices"].as_array().unwrap().len());
    assert_eq!(f.len(), sidecar["topology"]["faces"].as_u64().unwrap() as usize);
    assert!(f.iter().flatten().all(|&i| (1..=v).contains(&i)));
    assert_eq!(sidecar["topology"]["genus"], 2);
    assert_eq!(sidecar["basis"].as_array().unwrap().len(), 3);

    let json_only = tempfile::tempdir().unwrap();
    lawson(json_only.path(), &["export", "--level", "2", "--format", "json"]);
    assert!(!json_only.path().join("lawson_3_2_l2.obj").exists());
    assert!(json_only.path().join("lawson_3_2_l2.json").exists());
}

#[test]
fn tessellate_and_groups_write_json() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        lawson(dir.path(), &["tessellate", "--m", "4", "--k", "3"])
            .status
            .code(),
        Some(0)
    );
    let lat: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("lattice.json")).unwrap()).unwrap();
    assert_eq!(lat["cells"].as_array().unwrap().len() % 48, 0);
    let o = lawson(dir.path(), &["groups", "--m", "4", "--k", "3"]);
    assert!(stdout(&o).lines().any(|l| l.starts_with("full") && l.ends_with("96")));
    let groups: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("groups.json")).unwrap()).unwrap();
    assert_eq!(groups.as_array().unwrap().len(), 6);
}

#[test]
fn report_is_readable() {
    let dir = tempfile::tempdir().unwrap();
    let o = lawson(dir.path(), &["report", "--suite", "surface", "--level", "4"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("genus 2") && text.contains("[pass] umbilics"));
    assert_eq!(std::fs::read_to_string(dir.path().join("report.txt")).unwrap(), text);
}
