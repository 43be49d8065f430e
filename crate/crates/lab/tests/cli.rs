use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

use permuton_lab::envelope::Envelope;
use permuton_lab::verify::chi_square_p;
use permuton_lab_core::walks::params;
use permuton_lab_core::Family;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permuton-lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, idx: usize) -> Vec<String> {
    csv.lines().skip(1).map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn enumerate_small_counts() {
    let o = lab(&["enumerate", "--family", "strong", "--nmax", "4"]);
    assert!(o.status.success());
    assert_eq!(column(&stdout(&o), 1), ["1", "2", "6", "21"]);
    let o = lab(&["enumerate", "--family", "semi", "--nmax", "4"]);
    assert_eq!(column(&stdout(&o), 1), ["1", "2", "6", "23"]);
}

#[test]
fn enumerate_brute_agrees() {
    for f in ["strong", "semi"] {
        let o = lab(&["enumerate", "--family", f, "--nmax", "8", "--brute"]);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        assert_eq!(column(&out, 1), column(&out, 2));
    }
}

#[test]
fn params_machine_round_trip() {
    for f in Family::ALL {
        let o = lab(&["params", f.name(), "--machine"]);
        assert!(o.status.success());
        let kv: HashMap<String, String> = stdout(&o)
            .lines()
            .map(|l| {
                let (k, v) = l.split_once('=').unwrap();
                (k.to_string(), v.to_string())
            })
            .collect();
        let p = params(f);
        assert_eq!(kv["family"], f.name());
        let get = |k: &str| kv[k].parse::<f64>().unwrap();
        assert_eq!(get("rho"), p.rho);
        assert_eq!(get("q"), p.q);
        assert_eq!(get("beta"), p.beta);
        assert_eq!(get("gamma"), p.gamma);
        assert_eq!(kv.contains_key("theta"), p.theta.is_some());
    }
    let o = lab(&["params", "semi"]);
    assert!(stdout(&o).contains("-0.80901699"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    for method in ["exact", "rejection"] {
        let run = |out: &str, seed: &str| {
            let o = lab(&["sample", "--family", "semi", "--n", "12", "--count", "20", "--method", method, "--seed", seed, "--out", out]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            std::fs::read(out).unwrap()
        };
        let a = run(&path("a.json"), "7");
        let b = run(&path("b.json"), "7");
        let c = run(&path("c.json"), "8");
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
    let e = Envelope::read(Path::new(&path("a.json"))).unwrap();
    let meta = e.meta.unwrap();
    assert_eq!(meta["method"], "rejection");
    assert!(meta["acceptance_rate"].as_f64().unwrap() > 0.0);
}

#[test]
fn size_one_sample() {
    for f in ["strong", "semi"] {
        let o = lab(&["sample", "--family", f, "--n", "1"]);
        let e = Envelope::parse(&stdout(&o)).unwrap();
        assert_eq!(e.data, serde_json::json!([[1]]));
    }
}

#[test]
fn samples_belong_to_the_class() {
    let o = lab(&["sample", "--family", "strong", "--n", "9", "--count", "50", "--kind", "walk"]);
    let e = Envelope::parse(&stdout(&o)).unwrap();
    let class = Family::Strong.class();
    assert!(e.to_permutations().unwrap().iter().all(|s| class.contains(s)));
}

fn sample_counts(method: &str, count: usize) -> HashMap<String, u64> {
    let o = lab(&["sample", "--family", "strong", "--n", "5", "--count", &count.to_string(), "--method", method, "--seed", "3"]);
    let e = Envelope::parse(&stdout(&o)).unwrap();
    let mut m = HashMap::new();
    for p in e.data.as_array().unwrap() {
        *m.entry(p.to_string()).or_insert(0) += 1;
    }
    m
}

#[test]
fn exact_and_rejection_agree() {
    let count = 5000;
    let a = sample_counts("exact", count);
    let b = sample_counts("rejection", count);
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    assert_eq!(keys.len(), 82);
    let mut stat = 0.0;
    for k in &keys {
        let (x, y) = (*a.get(*k).unwrap_or(&0) as f64, *b.get(*k).unwrap_or(&0) as f64);
        stat += (x - y) * (x - y) / (x + y);
    }
    let p = chi_square_p(stat, keys.len() - 1);
    assert!(p > 0.01, "p = {p}");
}

fn well_formed(svg: &str) -> roxmltree::Document<'_> {
    roxmltree::Document::parse(svg).expect("well-formed XML")
}

#[test]
fn renders_are_well_formed_svg() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.json");
    let o = lab(&["sample", "--family", "strong", "--n", "60", "--count", "2", "--kind", "labels", "--out", input.to_str().unwrap()]);
    assert!(o.status.success());
    for mode in ["diagram", "coalescent"] {
        let out = dir.path().join(format!("{mode}.svg"));
        let o = lab(&["render", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap(), "--mode", mode, "--index", "1"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        let doc = well_formed(&text);
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        if mode == "diagram" {
            assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 60);
        }
    }
}

#[test]
fn single_dot_diagram() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.json");
    std::fs::write(&input, r#"{"schema":"permuton-lab/v1","family":"semi","kind":"permutation","data":[[1]]}"#).unwrap();
    let out = dir.path().join("one.svg");
    assert!(lab(&["render", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let doc = well_formed(&text);
    let dots: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("circle")).collect();
    assert_eq!(dots.len(), 1);
    assert_eq!(dots[0].attribute("cx"), Some("300.000"));
    assert_eq!(dots[0].attribute("cy"), Some("300.000"));
}

#[test]
fn exit_codes() {
    assert_eq!(lab(&["verify", "diagram", "--family", "semi", "--nmax", "6"]).status.code(), Some(0));
    assert_eq!(lab(&["verify", "lemma", "--family", "strong", "--nmax", "6"]).status.code(), Some(0));
    assert_eq!(lab(&["verify", "measure", "--family", "strong"]).status.code(), Some(0));
    // One step per trajectory cannot reproduce the limit law.
    let o = lab(&["verify", "skewness", "--family", "strong", "--n", "1", "--reps", "200"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));

    assert_eq!(lab(&["params", "baxter"]).status.code(), Some(2));
    assert_eq!(lab(&["enumerate", "--family", "semi", "--nmax", "10", "--brute"]).status.code(), Some(2));
    assert_eq!(lab(&["sample", "--family", "semi", "--n", "0"]).status.code(), Some(2));
    assert_eq!(lab(&["sample", "--family", "semi", "--n", "501"]).status.code(), Some(2));
    assert_eq!(lab(&["sample", "--family", "semi", "--n", "201", "--method", "rejection"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema\":\"permuton-lab/v1\",\"family\":\"semi\",\"kind\":\"walk\",\"data\":[[[0,0],[0,-1]]]}").unwrap();
    let out = dir.path().join("x.svg");
    let o = lab(&["render", "--input", bad.to_str().unwrap(), "--out", out.to_str().unwrap(), "--mode", "coalescent"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(lab(&["render", "--input", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn converge_emits_cross_row_deterministically() {
    let args = ["converge", "--family", "semi", "--sizes", "20,40,40", "--reps", "10", "--grid", "8", "--seed", "5"];
    let a = stdout(&lab(&args));
    assert_eq!(a, stdout(&lab(&args)));
    let rows: Vec<&str> = a.lines().collect();
    assert_eq!(rows[0], "kind,family,n_from,n_to,distance");
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2], "consecutive,semi,40,40,0.000000");
    assert!(rows[3].starts_with("cross,semi-strong,40,40,"));
}

#[test]
fn trajectories_and_permuton_tables() {
    let o = lab(&["trajectories", "--family", "strong", "--n", "10", "--starts", "10"]);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1 + (1..=10).sum::<usize>());
    assert!(out.lines().skip(1).all(|l| l.split(',').count() == 3));

    let o = lab(&["permuton", "--family", "semi", "--n", "30", "--reps", "4", "--grid", "5"]);
    let rows: Vec<Vec<f64>> = stdout(&o).lines().map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    let total: f64 = rows.iter().flatten().sum();
    assert!((total - 1.0).abs() < 1e-12);

    let o = lab(&["permuton", "--family", "semi", "--n", "30", "--reps", "4", "--grid", "5", "--format", "json"]);
    let p = Envelope::parse(&stdout(&o)).unwrap().to_permuton().unwrap();
    assert_eq!(p.k(), 5);
}
