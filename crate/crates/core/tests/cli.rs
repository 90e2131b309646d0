use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vcop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcop"))
        .args(args)
        .output()
        .expect("run vcop")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vcop-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SPEC: &str = r#"{
  "start": "2010-01",
  "communities": [
    {"members": 60, "months": 8, "posts_per_month": 30, "centralization": 0.7, "rotation": 0.2, "seed": 1},
    {"members": 50, "months": 7, "posts_per_month": 25, "centralization": 0.3, "rotation": 0.1, "seed": 2},
    {"members": 40, "months": 8, "posts_per_month": 20, "centralization": 0.5, "rotation": 0.3, "seed": 3}
  ]
}"#;

/// synth → metrics → panel; returns the panel path.
fn staged(dir: &Path) -> PathBuf {
    let spec = dir.join("spec.json");
    fs::write(&spec, SPEC).unwrap();
    let archive = dir.join("archive.jsonl");
    let o = vcop(&["synth", "--spec", s(&spec), "--out", s(&archive)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let metrics = dir.join("metrics");
    let graphs = dir.join("graphs");
    let o = vcop(&[
        "metrics", "--input", s(&archive), "--out", s(&metrics), "--dump-graphs", s(&graphs), "--jobs", "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_dir(&graphs).unwrap().count(), 23);
    let panel = dir.join("panel");
    let o = vcop(&["panel", "--metrics", s(&metrics), "--out", s(&panel)]);
    assert!(o.status.success(), "{}", stderr(&o));
    panel.join("panel.csv")
}

#[test]
fn staged_run_writes_fits_and_table() {
    let dir = scratch("staged");
    let panel = staged(&dir);
    let fits = dir.join("fits");
    let o = vcop(&["fit", "--panel", s(&panel), "--models", "null,full", "--out", s(&fits)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let null: serde_json::Value = serde_json::from_slice(&fs::read(fits.join("fit_null.json")).unwrap()).unwrap();
    let full: serde_json::Value = serde_json::from_slice(&fs::read(fits.join("fit_full.json")).unwrap()).unwrap();
    assert_eq!(null["n_groups"], 3);
    assert_eq!(full["coefficients"].as_array().unwrap().len(), 5);
    let table = fs::read_to_string(fits.join("fits.txt")).unwrap();
    assert!(table.starts_with("Variable"));
    assert!(table.contains("Group Betweenness Centrality"));
    assert!(table.contains("ICC"));
    assert_eq!(table, stdout(&o).split_once("Variable").map(|(_, t)| format!("Variable{t}")).unwrap());
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reruns_are_byte_identical() {
    let a = scratch("det-a");
    let b = scratch("det-b");
    let pa = staged(&a);
    let pb = staged(&b);
    assert_eq!(fs::read(&pa).unwrap(), fs::read(&pb).unwrap());
    for (dir, panel) in [(&a, &pa), (&b, &pb)] {
        let o = vcop(&["fit", "--panel", s(panel), "--models", "null,interaction", "--seasonal", "3", "--out", s(&dir.join("f"))]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["fit_null.json", "fit_interaction.json", "fits.txt"] {
        assert_eq!(fs::read(a.join("f").join(f)).unwrap(), fs::read(b.join("f").join(f)).unwrap(), "{f}");
    }
    let json = fs::read_to_string(a.join("f/fit_interaction.json")).unwrap();
    // No December in the fixture span: the dummy is all zero and rejected.
    let o = vcop(&["fit", "--panel", s(&pa), "--models", "interaction", "--seasonal", "12", "--out", s(&a.join("g"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("column `december` is zero on every complete row"));
    assert!(json.contains("\"march\""));
    fs::remove_dir_all(&a).unwrap();
    fs::remove_dir_all(&b).unwrap();
}

#[test]
fn report_on_published_fixture() {
    let o = vcop(&["report", "--published-fixture"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let gb_row = out.lines().find(|l| l.starts_with("9 Group Betweenness")).unwrap();
    assert!(gb_row.contains(".374**"));
    assert!(out.contains("**p<0.01; *p<0.05."));
    assert!(out.contains("10.61%"));
    assert!(out.contains("**p<0.01; *p<0.1."));
    assert!(out.contains("flag published_fixture: true"));
}

#[test]
fn report_on_panel_embeds_digest() {
    let dir = scratch("report");
    let panel = staged(&dir);
    let o = vcop(&["report", "--panel", s(&panel), "--models", "null,maturity", "--out", s(&dir)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.join("report.txt")).unwrap();
    assert_eq!(text, stdout(&o));
    assert!(text.contains("Pearson correlation coefficients (N=23)."));
    assert!(text.contains(": sha256 "));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ingest_reports_diagnostics() {
    let dir = scratch("ingest");
    let csv = dir.join("posts.csv");
    fs::write(
        &csv,
        "post_id,community_id,author_id,parent_post_id,timestamp,text\n\
         1,c,a,,2010-01-01T00:00:00Z,hello\n\
         2,c,b,99,2010-01-02T00:00:00Z,hi\n\
         2,c,b,,2010-01-03T00:00:00Z,dup\n",
    )
    .unwrap();
    let o = vcop(&["ingest", "--input", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("posts kept: 2"));
    assert!(out.contains("diagnostics: 2"));
    assert!(out.contains("unresolved parent_post_id `99`"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    let dir = scratch("exit");
    let bad = dir.join("bad.jsonl");
    fs::write(&bad, [0xff, 0xfe, b'\n']).unwrap();
    let o = vcop(&["ingest", "--input", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));

    let o = vcop(&["ingest", "--input", s(&bad), "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--frobnicate"));

    let o = vcop(&["metrics", "--input", s(&bad), "--out", s(&dir), "--lexicon-pos", "p.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--lexicon-neg"));

    let o = vcop(&["metrics", "--input", "x.jsonl", "--out", s(&dir), "--snapshot-days", "9", "--trail-days", "7"]);
    assert_eq!(o.status.code(), Some(1));

    let o = vcop(&["fit", "--panel", "nowhere.csv", "--out", s(&dir)]);
    assert_eq!(o.status.code(), Some(1));
    fs::remove_dir_all(&dir).unwrap();
}
