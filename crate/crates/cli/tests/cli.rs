use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rearrange"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// One object in a 10 m square with an optional known wall.
fn small_world(goal: [f64; 2], wall: Option<&str>) -> String {
    let walls = wall.map_or(String::new(), |w| format!("\"walls\": [{w}],"));
    format!(
        r#"{{
  "version": 1,
  "name": "small",
  "workspace": [[0, 0], [10, 0], [10, 10], [0, 10]],
  {walls}
  "objects": [{{"id": 1, "start": [3, 5], "radius": 0.3, "goal": [{}, {}]}}],
  "robot": {{"start": [1.5, 1.5], "heading": 0, "radius": 0.25, "lidar_range": 4}},
  "params": {{"eps": 0.1}}
}}"#,
        goal[0], goal[1]
    )
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let packed = scenarios().join("packed.json");
    let out = run(&["validate", packed.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("separation margin: 0.0500 m"), "{}", stdout(&out));

    let near_wall = write(tmp.path(), "near.json", &small_world([9.5, 5.0], None));
    let out = run(&["validate", near_wall.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("goal of object 1"));

    let overlap = scenarios().join("overlap.json");
    assert_eq!(code(&run(&["validate", overlap.to_str().unwrap()])), 2);

    let full = small_world([7.0, 5.0], None);
    let truncated = write(tmp.path(), "cut.json", &full[..full.len() / 2]);
    let out = run(&["validate", truncated.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let unknown = write(tmp.path(), "extra.json", &full.replace("\"name\"", "\"colour\": 1, \"name\""));
    assert_eq!(code(&run(&["validate", unknown.to_str().unwrap()])), 1);

    assert_eq!(code(&run(&["validate", "/nonexistent/file.json"])), 1);
}

#[test]
fn plan_prints_actions_and_reports_missing_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let walled = scenarios().join("walled.json");
    let out = run(&["plan", walled.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let kinds: Vec<String> = stdout(&out)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert_eq!(kinds, ["MoveToObject", "PositionObject", "MoveToObject", "PositionObject", "Move"]);

    let out = run(&["plan", walled.to_str().unwrap(), "--show-paths"]);
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with('#')).count(), 5 * 11);

    let dir = tmp.path().join("p");
    let out = run(&["plan", walled.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(dir.join("plan.txt").exists());

    // A known wall sealing off the goal side of the room.
    let sealed = write(
        tmp.path(),
        "sealed.json",
        &small_world([7.0, 5.0], Some("[[5, 0.2], [5.6, 0.2], [5.6, 9.8], [5, 9.8]]")),
    );
    assert_eq!(code(&run(&["plan", sealed.to_str().unwrap()])), 3);
}

#[test]
fn run_writes_identical_artifacts_on_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write(tmp.path(), "s.json", &small_world([7.0, 7.0], None));
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = run(&["run", file.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--svg"]);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        assert!(stdout(&out).contains("result: success"));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let csvs: Vec<_> = names
        .iter()
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    assert_eq!(csvs.len(), 2);
    for n in csvs {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap());
    }
    let svg = fs::read_to_string(a.join("run.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("viewBox"));
}

#[test]
fn run_honours_plan_file_and_step_cap() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write(tmp.path(), "s.json", &small_world([7.0, 7.0], None));
    let plan = write(tmp.path(), "plan.txt", "Move - 1.5,1.5 8,1.5\n");
    let out_dir = tmp.path().join("o");
    let out = run(&[
        "run",
        file.to_str().unwrap(),
        "--plan",
        plan.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out_dir.join("action_00_Move.csv").exists());

    let out = run(&[
        "run",
        file.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--max-steps",
        "10",
    ]);
    assert_eq!(code(&out), 4);
    assert!(stdout(&out).contains("step cap of 10 reached"));

    let bad = write(tmp.path(), "bad.txt", "PositionObject 1 0,0 1,1\n");
    let out = run(&["run", file.to_str().unwrap(), "--plan", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn sweep_of_empty_dir_writes_headers_only() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["sweep", input.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(out_dir.join("sweep.csv")).unwrap().lines().count(), 1);
    assert_eq!(fs::read_to_string(out_dir.join("sweep_summary.csv")).unwrap().lines().count(), 1);
}

#[test]
fn sweep_rows_follow_input_order_and_flag_large_bands() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    fs::copy(scenarios().join("single_disk.json"), input.join("a_disk.json")).unwrap();
    fs::copy(scenarios().join("single_square.json"), input.join("b_square.json")).unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "sweep",
        input.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--eps",
        "0.1,5",
        "--rays",
        "180",
        "--max-steps",
        "20000",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let detail = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = detail.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let order: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[1])).collect();
    assert_eq!(order, [("a_disk", "0.1"), ("a_disk", "5"), ("b_square", "0.1"), ("b_square", "5")]);
    for r in &rows {
        assert_eq!(r[3], "180");
        assert_eq!(r[6], if r[1] == "5" { "true" } else { "false" });
    }
    assert!(rows.iter().filter(|r| r[1] == "0.1").all(|r| r[7] == "success"));
    assert!(stdout(&out).contains("flagged: a_disk eps 5"));

    let summary = fs::read_to_string(out_dir.join("sweep_summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.1,default,180,default,2,2,1,"));
}

#[test]
fn sweep_grid_of_one_matches_run() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir(&input).unwrap();
    let file = write(&input, "s.json", &small_world([7.0, 7.0], None));
    let sweep_out = tmp.path().join("sw");
    assert_eq!(code(&run(&["sweep", input.to_str().unwrap(), "--out", sweep_out.to_str().unwrap()])), 0);
    let run_out = tmp.path().join("run");
    let out = run(&["run", file.to_str().unwrap(), "--out", run_out.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let row = fs::read_to_string(sweep_out.join("sweep.csv")).unwrap();
    let row: Vec<String> = row.lines().nth(1).unwrap().split(',').map(String::from).collect();
    assert_eq!(row[7], "success");
    let text = stdout(&out);
    let walls = text
        .lines()
        .find_map(|l| l.strip_prefix("wall-following episodes: "))
        .unwrap();
    assert_eq!(row[12], walls);
}
