use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use sgvi::cli::{parse_number, EXIT_INPUT_ERROR, EXIT_ITERATION_CAPPED, EXIT_OK};
use sgvi::model::{gap, parse_game};

const COLLAPSE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/collapse.json");

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn sgvi(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_sgvi")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(run: &Run) -> Value {
    serde_json::from_str(&run.stdout).unwrap_or_else(|e| panic!("{e}: {}", run.stdout))
}

fn model_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sgvi-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn without_wall_time(text: &str) -> String {
    text.lines().filter(|l| !l.contains("\"wall_time_ms\"")).collect::<Vec<_>>().join("\n")
}

fn solve_collapse(extra: &[&str]) -> Run {
    let mut args = vec!["solve", "--model", COLLAPSE, "--objective", "reach", "--target", "t", "--s0", "p"];
    args.extend_from_slice(extra);
    sgvi(&args)
}

#[test]
fn local_solve_on_collapse() {
    let run = solve_collapse(&["--algorithm", "local", "--epsilon", "1e-6"]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    let doc = json(&run);
    assert_eq!(doc["status"], "converged");
    let lower = parse_number(&doc["lower"]).unwrap();
    let upper = parse_number(&doc["upper"]).unwrap();
    assert!(upper - lower <= 1e-6);
    assert!(lower <= 0.5 && 0.5 <= upper);
    assert_eq!(doc["states"].as_array().unwrap().len(), 4);
}

#[test]
fn gap_is_upper_minus_lower_to_the_bit() {
    for algorithm in ["global", "local", "si", "oracle"] {
        let doc = json(&solve_collapse(&["--algorithm", algorithm, "--epsilon", "1e-3"]));
        let (lower, upper) = (parse_number(&doc["lower"]).unwrap(), parse_number(&doc["upper"]).unwrap());
        assert_eq!(parse_number(&doc["gap"]).unwrap().to_bits(), gap(upper, lower).to_bits(), "{algorithm}");
    }
}

#[test]
fn output_is_deterministic() {
    for algorithm in ["global", "local", "si", "oracle"] {
        let a = solve_collapse(&["--algorithm", algorithm, "--trace"]);
        let b = solve_collapse(&["--algorithm", algorithm, "--trace"]);
        assert_eq!(without_wall_time(&a.stdout), without_wall_time(&b.stdout), "{algorithm}");
        assert!(a.stdout.contains("\"trace\""));
    }
    let a = sgvi(&["diagnose", "--model", COLLAPSE, "--objective", "reach", "--target", "t"]);
    let b = sgvi(&["diagnose", "--model", COLLAPSE, "--objective", "reach", "--target", "t"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(solve_collapse(&[]).code, EXIT_OK);
    let capped = solve_collapse(&["--algorithm", "local", "--epsilon", "1e-9", "--max-iterations", "1"]);
    assert_eq!(capped.code, EXIT_ITERATION_CAPPED);
    let doc = json(&capped);
    assert_eq!(doc["status"], "iteration-capped");
    assert!(parse_number(&doc["lower"]).unwrap() <= 0.5 && 0.5 <= parse_number(&doc["upper"]).unwrap());

    let zero = solve_collapse(&["--epsilon", "0"]);
    assert_eq!(zero.code, EXIT_INPUT_ERROR);
    assert!(zero.stderr.starts_with("error:"));
    assert_eq!(solve_collapse(&["--epsilon", "0", "--algorithm", "oracle"]).code, EXIT_OK);

    let si = sgvi(&["solve", "--model", COLLAPSE, "--objective", "total-reward", "--algorithm", "si"]);
    assert_eq!(si.code, EXIT_INPUT_ERROR);
    assert!(si.stderr.contains("SI unsupported for total reward"), "{}", si.stderr);

    let unknown = sgvi(&["solve", "--model", COLLAPSE, "--objective", "reach", "--target", "nowhere"]);
    assert_eq!(unknown.code, EXIT_INPUT_ERROR);
    assert_eq!(sgvi(&["solve", "--model", "/nonexistent/game.json", "--objective", "mp"]).code, EXIT_INPUT_ERROR);
    assert_eq!(sgvi(&["frobnicate"]).code, EXIT_INPUT_ERROR);
}

#[test]
fn text_format() {
    let run = solve_collapse(&["--format", "text"]);
    assert_eq!(run.code, EXIT_OK);
    assert!(serde_json::from_str::<Value>(&run.stdout).is_err());
    assert!(run.stdout.contains("converged"), "{}", run.stdout);
}

#[test]
fn diagnose_finds_the_spurious_fixpoint_of_collapse() {
    let run = sgvi(&["diagnose", "--model", COLLAPSE, "--objective", "reach", "--target", "t"]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    let doc = json(&run);
    assert!(doc["mecs"].as_array().unwrap().iter().any(|ec| ec["states"] == serde_json::json!(["p", "q"])));
    let spurious = &doc["spurious_fixpoint"];
    assert_eq!(spurious["start"], "upper");
    assert_eq!(spurious["fixpoint_reached"], true);
    assert_eq!(spurious["end_component"]["states"], serde_json::json!(["p", "q"]));
    let fixpoint: Vec<f64> =
        spurious["fixpoint"].as_array().unwrap().iter().map(|v| parse_number(v).unwrap()).collect();
    assert_eq!(fixpoint, vec![1.0, 1.0, 0.0, 1.0]);
}

#[test]
fn diagnose_trivial_game() {
    let path = model_file(
        "single.json",
        r#"{"states": [{"id": "only", "player": "max", "actions": [{"dist": {"only": 1}}]}]}"#,
    );
    let run = sgvi(&["diagnose", "--model", path.to_str().unwrap(), "--objective", "mp"]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    let doc = json(&run);
    assert_eq!(doc["mecs"].as_array().unwrap().len(), 1);
    assert_eq!(doc["mecs"][0]["states"], serde_json::json!(["only"]));
    assert!(doc["spurious_fixpoint"]["end_component"].is_null());
}

#[test]
fn diagnose_reports_infinite_total_reward() {
    let path = model_file(
        "loop.json",
        r#"{"states": [
            {"id": "a", "player": "max", "reward": 1, "actions": [{"dist": {"a": 1}}, {"dist": {"b": 1}}]},
            {"id": "b", "player": "min", "actions": [{"dist": {"b": 1}}]}]}"#,
    );
    let doc = json(&sgvi(&["diagnose", "--model", path.to_str().unwrap(), "--objective", "tr"]));
    assert_eq!(doc["infinite_total_reward_states"], serde_json::json!(["a"]));

    let only_loop = model_file(
        "only_loop.json",
        r#"{"states": [{"id": "a", "player": "max", "reward": 1, "actions": [{"dist": {"a": 1}}]}]}"#,
    );
    let run = sgvi(&["diagnose", "--model", only_loop.to_str().unwrap(), "--objective", "tr"]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    assert_eq!(json(&run)["infinite_total_reward_states"], serde_json::json!(["a"]));

    let solved = json(&sgvi(&["solve", "--model", path.to_str().unwrap(), "--objective", "tr", "--s0", "a"]));
    assert_eq!(solved["upper"], "inf");
    assert_eq!(solved["lower"], "inf");
}

#[test]
fn generate_is_deterministic_and_valid() {
    let a = sgvi(&["generate", "--seed", "7", "--max-states", "5"]);
    let b = sgvi(&["generate", "--seed", "7", "--max-states", "5"]);
    assert_eq!(a.stdout, b.stdout);
    let single = parse_game(&sgvi(&["generate", "--seed", "3", "--max-states", "1"]).stdout).unwrap();
    assert_eq!(single.num_states(), 1);
    assert_eq!(single.actions(0)[0].successors, vec![(0, 1.0)]);
}

#[test]
fn generated_games_parse() {
    for seed in 0..1000u64 {
        let doc = sgvi::cli::cmd_generate(&sgvi::cli::GenerateArgs {
            seed,
            max_states: 6,
            max_actions: 3,
            max_support: 3,
            max_reward: 3,
        });
        let game = parse_game(&doc).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!((1..=6).contains(&game.num_states()));
        assert!((0..game.num_states()).all(|s| (1..=3).contains(&game.actions(s).len())));
    }
}

#[test]
fn oracle_command() {
    let run = sgvi(&["oracle", "--model", COLLAPSE, "--objective", "reach", "--target", "t"]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    let doc = json(&run);
    let values: Vec<f64> =
        doc["values"].as_array().unwrap().iter().map(|v| parse_number(&v["value"]).unwrap()).collect();
    assert!((values[0] - 0.5).abs() < 1e-12 && values[3] == 1.0);
}
