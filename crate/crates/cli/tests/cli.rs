//! End-to-end runs of the `pcf` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pcf_core::colouring::{Colouring, ColouringFile};
use pcf_core::dimacs::{parse_dimacs, write_dimacs};
use pcf_core::generate::gen_gnp;
use pcf_core::graph::{Adjacency, Graph};
use pcf_core::verify::check_pcf;
use tempfile::TempDir;

fn pcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcf")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_graph(dir: &Path, name: &str, g: &Graph) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, write_dimacs(g)).unwrap();
    p
}

fn read_colouring(p: &Path, n: usize) -> Colouring {
    let file: ColouringFile = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
    Colouring::from_file(&file, n).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn colour_exact_on_c5_uses_five_colours() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(dir.path(), "c5.col", &Graph::cycle(5));
    let out = dir.path().join("c.json");
    let o = pcf(&["colour", "--input", s(&g), "--mode", "exact", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let c = read_colouring(&out, 5);
    assert_eq!(c.distinct_colours(), 5);
    assert!(check_pcf(&Graph::cycle(5), &c).is_empty());
}

#[test]
fn colour_greedy_within_two_delta_plus_one() {
    let dir = TempDir::new().unwrap();
    for seed in 0..5 {
        let graph = gen_gnp(150, 0.08, seed);
        let g = write_graph(dir.path(), "g.col", &graph);
        let out = dir.path().join("c.json");
        let o = pcf(&["colour", "--input", s(&g), "--mode", "greedy", "--out", s(&out)]);
        assert_eq!(code(&o), 0);
        let c = read_colouring(&out, graph.vertex_count());
        assert!(c.distinct_colours() <= 2 * graph.max_degree() + 1);
        assert!(check_pcf(&graph, &c).is_empty());
    }
}

#[test]
fn colour_pipeline_writes_diagnostics_and_needs_a_seed() {
    let dir = TempDir::new().unwrap();
    let graph = gen_gnp(300, 0.1, 9);
    let g = write_graph(dir.path(), "g.col", &graph);
    let out = dir.path().join("c.json");
    let diag = dir.path().join("d.json");
    let o = pcf(&["colour", "--input", s(&g), "--out", s(&out), "--diagnostics", s(&diag)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--seed"));

    let o = pcf(&["colour", "--input", s(&g), "--seed", "4", "--out", s(&out), "--diagnostics", s(&diag)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d: serde_json::Value = serde_json::from_str(&fs::read_to_string(&diag).unwrap()).unwrap();
    assert_eq!(d["seed"], 4);
    assert_eq!(d["config"]["mode"], "scaled");
    assert!(d["result"]["stage_logs"]["low"].is_object());
    assert!(check_pcf(&graph, &read_colouring(&out, 300)).is_empty());
}

#[test]
fn paper_preset_falls_back_and_still_verifies() {
    let dir = TempDir::new().unwrap();
    let graph = gen_gnp(100, 0.1, 2);
    let g = write_graph(dir.path(), "g.col", &graph);
    let o = pcf(&["colour", "--input", s(&g), "--seed", "1", "--preset", "paper"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("fallback=greedy-pcf"));
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.col");
    let o = pcf(&["colour", "--input", s(&missing), "--mode", "greedy"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("cannot open"));

    let bad = dir.path().join("bad.col");
    fs::write(&bad, "p edge 3 1\ne 1 9\n").unwrap();
    assert_eq!(code(&pcf(&["colour", "--input", s(&bad), "--mode", "greedy"])), 2);

    let g = write_graph(dir.path(), "g.col", &Graph::path(4));
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "nearby_comon = 3\n").unwrap();
    let o = pcf(&["colour", "--input", s(&g), "--seed", "1", "--config", s(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown field"));

    fs::write(&cfg, "delta = 1\n").unwrap();
    let o = pcf(&["colour", "--input", s(&g), "--seed", "1", "--config", s(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("exceeds configured delta"));

    assert_eq!(code(&pcf(&["colour", "--input", s(&g), "--mode", "nonsense"])), 2);
}

#[test]
fn config_file_overrides_preset_fields() {
    let dir = TempDir::new().unwrap();
    let graph = gen_gnp(200, 0.1, 5);
    let g = write_graph(dir.path(), "g.col", &graph);
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "parts = 6\ny_prob = 0.4\nmax_rounds = 5000\n").unwrap();
    let diag = dir.path().join("d.json");
    let o = pcf(&["colour", "--input", s(&g), "--seed", "2", "--config", s(&cfg), "--diagnostics", s(&diag)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d: serde_json::Value = serde_json::from_str(&fs::read_to_string(&diag).unwrap()).unwrap();
    assert_eq!(d["config"]["parts"], 6);
    assert_eq!(d["config"]["y_prob"], 0.4);
    assert_eq!(d["config"]["max_rounds"], 5000);
    assert_eq!(d["config"]["delta"], graph.max_degree());
}

#[test]
fn verify_reports_violations_with_exit_one() {
    let dir = TempDir::new().unwrap();
    let g = write_graph(dir.path(), "p3.col", &Graph::path(3));
    let c = dir.path().join("c.json");
    // ends share a colour: proper but vertex 1 sees colour 0 twice
    fs::write(&c, r#"{"palettes":[{"name":"x","lo":0,"hi":5}],"assignment":{"0":0,"1":1,"2":0}}"#).unwrap();
    let o = pcf(&["verify", "--input", s(&g), "--colouring", s(&c)]);
    assert_eq!(code(&o), 1);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["cf_violations"], serde_json::json!([1]));
    assert_eq!(code(&pcf(&["verify", "--input", s(&g), "--colouring", s(&c), "--proper-only"])), 0);

    fs::write(&c, r#"{"palettes":[{"name":"x","lo":0,"hi":5}],"assignment":{"0":0,"1":1,"2":2}}"#).unwrap();
    assert_eq!(code(&pcf(&["verify", "--input", s(&g), "--colouring", s(&c)])), 0);

    fs::write(&c, r#"{"palettes":[],"assignment":{"7":0}}"#).unwrap();
    assert_eq!(code(&pcf(&["verify", "--input", s(&g), "--colouring", s(&c)])), 2);
    fs::write(&c, "not json").unwrap();
    assert_eq!(code(&pcf(&["verify", "--input", s(&g), "--colouring", s(&c)])), 2);
}

#[test]
fn exact_command_prints_the_number() {
    let dir = TempDir::new().unwrap();
    for (graph, expect) in [(Graph::cycle(5), "5"), (Graph::complete(4), "4"), (Graph::path(3), "3")] {
        let g = write_graph(dir.path(), "g.col", &graph);
        let o = pcf(&["exact", "--input", s(&g)]);
        assert_eq!(code(&o), 0);
        assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), expect);
    }
    let g = write_graph(dir.path(), "big.col", &Graph::cycle(40));
    assert_eq!(code(&pcf(&["exact", "--input", s(&g)])), 2);
}

#[test]
fn bounds_table_json_and_errors() {
    let o = pcf(&["bounds", "--delta", "1e60"]);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8_lossy(&o.stdout);
    let header = table.lines().next().unwrap();
    assert!(header.contains("holds") && header.contains("margin"));
    assert!(table.contains("stage4.B_v "));

    let o = pcf(&["bounds", "--delta", "2", "--json"]);
    assert_eq!(code(&o), 0);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rows.iter().any(|r| r["holds"] == false));
    let a_v = rows.iter().find(|r| r["name"] == "stage4.A_v").unwrap();
    assert_eq!(a_v["note"], "probability parameter exceeds 1");

    let o = pcf(&["bounds", "--delta", "lots"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&pcf(&["bounds"])), 2);
}

#[test]
fn bounds_config_changes_constants() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "y_prob_num = 1e200\n").unwrap();
    let o = pcf(&["bounds", "--delta", "1e60", "--json", "--config", s(&cfg)]);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    let p = rows.iter().find(|r| r["name"] == "stage4.Y.p_at_most_one").unwrap();
    assert_eq!(p["holds"], false);
    let o = pcf(&["bounds", "--find-delta0", "--config", s(&cfg)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn find_delta0_prints_one_integer() {
    let o = pcf(&["bounds", "--find-delta0"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].chars().all(|c| c.is_ascii_digit()) && lines[0].len() > 100);
}

#[test]
fn bench_rows_verify_and_repeat_exactly() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("b.csv");
    let args = |jobs: &'static str, out: &Path| {
        vec![
            "bench".to_string(), "--family".into(), "gnp".into(), "--n".into(), "200".into(),
            "--p-or-d".into(), "0.05".into(), "--trials".into(), "50".into(), "--seed".into(), "11".into(),
            "--solvers".into(), "greedy".into(), "--jobs".into(), jobs.into(), "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let run = |a: Vec<String>| Command::new(env!("CARGO_BIN_EXE_pcf")).args(a).output().unwrap();
    assert_eq!(code(&run(args("4", &out))), 0);
    let first = fs::read(&out).unwrap();
    let mut reader = csv::Reader::from_reader(first.as_slice());
    let headers = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 50);
    let pcf_col = headers.iter().position(|h| h == "pcf").unwrap();
    let trial_col = headers.iter().position(|h| h == "trial").unwrap();
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(&r[pcf_col], "true");
        assert_eq!(r[trial_col].parse::<usize>().unwrap(), i);
    }
    let other = dir.path().join("b2.csv");
    assert_eq!(code(&run(args("1", &other))), 0);
    assert_eq!(first, fs::read(&other).unwrap());
}

#[test]
fn bench_regular_with_all_solvers() {
    let o = pcf(&[
        "bench", "--family", "regular", "--n", "10", "--p-or-d", "3", "--trials", "3", "--seed", "5",
        "--solvers", "greedy,greedy-proper,pipeline,exact",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        assert_eq!(&r[7], "3");
        if &r[5] == "exact" {
            assert!(r[6].parse::<usize>().unwrap() <= 4);
        }
    }
}

#[test]
fn bench_edge_cases() {
    let o = pcf(&["bench", "--family", "gnp", "--n", "10", "--p-or-d", "0.3", "--trials", "0", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        String::from_utf8_lossy(&o.stdout),
        "family,n,param,trial,seed,solver,colours_used,max_degree,runtime_ms,fallback,proper,pcf\n"
    );
    for bad in [["gnp", "1.5"], ["gnp", "x"], ["regular", "3"], ["regular", "0.5"], ["regular", "9"]] {
        let o = pcf(&["bench", "--family", bad[0], "--n", "9", "--p-or-d", bad[1], "--trials", "1", "--seed", "1"]);
        assert_eq!(code(&o), 2, "{bad:?}");
    }
    let o = pcf(&[
        "bench", "--family", "gnp", "--n", "5", "--p-or-d", "0.5", "--trials", "2", "--seed", "1", "--timing",
    ]);
    let text = String::from_utf8_lossy(&o.stdout);
    let row = text.lines().nth(1).unwrap();
    assert!(!row.split(',').nth(8).unwrap().is_empty());
}

#[test]
fn colour_output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let graph = gen_gnp(400, 0.1, 77);
    let g = write_graph(dir.path(), "g.col", &graph);
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("c{i}.json"));
        let diag = dir.path().join(format!("d{i}.json"));
        let o = pcf(&["colour", "--input", s(&g), "--seed", "8", "--out", s(&out), "--diagnostics", s(&diag)]);
        assert_eq!(code(&o), 0);
        outputs.push((fs::read(&out).unwrap(), fs::read(&diag).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    // and the DIMACS writer is stable across a parse
    let text = fs::read_to_string(&g).unwrap();
    assert_eq!(write_dimacs(&parse_dimacs(&text).unwrap().graph), text);
}
