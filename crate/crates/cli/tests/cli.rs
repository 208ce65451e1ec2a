use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn rankcot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankcot"))
        .args(args)
        .env_remove("RANKCOT_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn one_two_six_has_rank_two() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    let o = rankcot(&["family", "one", "--n", "6", "--k", "2", "--emit", "tree", "-o", path_str(&tree)]);
    assert!(o.status.success());
    let o = rankcot(&["rank", "yesdepth", path_str(&tree)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2");
}

#[test]
fn compile_then_eval_reproduces_the_tree() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    let machine = dir.path().join("machine.json");
    assert!(rankcot(&["family", "one", "--n", "6", "--k", "2", "--emit", "tree", "-o", path_str(&tree)]).status.success());
    assert!(rankcot(&["compile", "--tree", path_str(&tree), "-o", path_str(&machine)]).status.success());

    let words = std::fs::read_to_string(fixture("words6.txt")).unwrap();
    let mut tree_args = vec!["eval", "--tree", path_str(&tree)];
    let mut machine_args = vec!["eval", "--machine", path_str(&machine)];
    for w in words.lines() {
        tree_args.extend(["--word", w]);
        machine_args.extend(["--word", w]);
    }
    let by_tree = rankcot(&tree_args);
    let by_machine = rankcot(&machine_args);
    assert!(by_tree.status.success() && by_machine.status.success());
    assert_eq!(stdout(&by_tree), stdout(&by_machine));
    assert_eq!(stdout(&by_tree).lines().count(), words.lines().count());

    let back = dir.path().join("back.json");
    assert!(rankcot(&["extract", "--machine", path_str(&machine), "-o", path_str(&back)]).status.success());
    let mut back_args = vec!["eval", "--tree", path_str(&back)];
    for w in words.lines() {
        back_args.extend(["--word", w]);
    }
    assert_eq!(stdout(&rankcot(&back_args)), stdout(&by_tree));
}

#[test]
fn worked_instance_is_not_separable() {
    let o = rankcot(&["separate", path_str(&fixture("worked_instance.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "None");
}

#[test]
fn reduced_formula_feeds_separate() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    assert!(rankcot(&["reduce-nae", path_str(&fixture("one_var.nae")), "-o", path_str(&inst)]).status.success());
    let o = rankcot(&["separate", path_str(&inst)]);
    assert_eq!(o.status.code(), Some(0));
    let orders: Vec<Vec<String>> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(orders.len(), 2);
    assert_eq!(orders[0].len(), 5);
}

#[test]
fn xor_needs_depth_two() {
    let sample = fixture("xor2_sample.json");
    let o = rankcot(&["consistency", path_str(&sample), "--k", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "unsat");
    let o = rankcot(&["consistency", path_str(&sample), "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let tree: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(tree["depth"], 2);
}

#[test]
fn protocol_trace_matches_the_tree() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    assert!(rankcot(&["family", "one", "--n", "8", "--k", "2", "--emit", "tree", "-o", path_str(&tree)]).status.success());
    for (word, expect) in [("01010000", 3), ("00000001", 8), ("11000000", 1)] {
        let o = rankcot(&["protocol", "run", "--tree", path_str(&tree), "--split", "1,2,3,4", "--word", word, "--trace"]);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["output"], expect);
        assert!(v["transcript"]["total_bits"].as_u64().unwrap() <= 16);
        assert_eq!(v["transcript"]["rounds"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn learning_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.json");
    std::fs::write(&table, r#"{"sigma_sizes":[2,2,2],"out_size":2,"outputs":[0,0,0,0,1,1,1,1]}"#).unwrap();
    let a = rankcot(&["learn", path_str(&table), "--k", "1", "--seed", "7"]);
    let b = rankcot(&["learn", path_str(&table), "--k", "1", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["error"], 0.0);
}

#[test]
fn exit_codes_for_usage_and_budget() {
    assert_eq!(rankcot(&["rank", "yesdepth", "--no-such-flag", "x"]).status.code(), Some(2));
    assert_eq!(rankcot(&["rank", "yesdepth", "/no/such/file.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    assert!(rankcot(&["family", "comp", "--n", "3", "--t", "2", "--emit", "tree", "-o", path_str(&tree)]).status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_rankcot"))
        .args(["rank", "yesdepth", path_str(&tree)])
        .env("RANKCOT_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn gadget_verifies() {
    for m in 1..=4 {
        let o = rankcot(&["gadget-verify", "--m", &m.to_string()]);
        assert_eq!(o.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["separates"], true);
    }
}
