//! End-to-end tests of the `lineq` binary: exit codes, output documents
//! and the parse/print round trip.

use std::process::{Command, Output};

use serde_json::Value;

fn lineq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lineq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("binary exits")
}

#[test]
fn typing_prints_source_and_target() {
    let out = lineq(&["type", "t[x;y;z]", "--theory", "m-leq"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["source"], "x<=y /\\ y<=z");
    assert_eq!(v["target"], "x<=z");
}

#[test]
fn a_positive_equality_exits_zero() {
    let out = lineq(&[
        "eq",
        "t[x;y;y] o (id{x<=y} /\\ r[y])",
        "del>{x<=y}",
        "--theory",
        "m-leq",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_json(&out)["equal"], true);
}

#[test]
fn a_negative_equality_exits_one() {
    let out = lineq(&[
        "eq",
        "id{x<=x /\\ x<=x}",
        "c{x<=x; x<=x}",
        "--theory",
        "s-leq",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(stdout_json(&out)["equal"], false);
}

#[test]
fn a_parse_error_exits_three() {
    let out = lineq(&["type", "t[x;y]", "--theory", "m-leq"]);
    assert_eq!(exit_code(&out), 3);
    assert_eq!(stdout_json(&out)["error"]["kind"], "parse");
}

#[test]
fn a_typing_error_exits_two() {
    let out = lineq(&["type", "t[x;y;z] o t[x;y;z]", "--theory", "m-leq"]);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["error"]["kind"], "type");
}

#[test]
fn a_missing_theory_exits_two() {
    let out = lineq(&["type", "r[x]"]);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["error"]["kind"], "usage");
}

#[test]
fn an_unknown_theory_exits_two() {
    let out = lineq(&["type", "r[x]", "--theory", "classical"]);
    assert_eq!(exit_code(&out), 2);
    let v = stdout_json(&out);
    assert_eq!(v["error"]["kind"], "usage");
    let message = v["error"]["message"].as_str().expect("message is text");
    assert!(message.contains("sdot-equiv"), "message lists the theories");
}

#[test]
fn the_reflexivity_diagram_matches_its_golden_document() {
    let out = lineq(&["diagram", "r[x]", "--theory", "m-equiv"]);
    assert_eq!(exit_code(&out), 0);
    let expected: Value = serde_json::json!({
        "source": [],
        "target": ["x", "x"],
        "edges": [[["t", 0], ["t", 1]]],
        "loops_discarded": 0,
    });
    assert_eq!(stdout_json(&out), expected);
}

#[test]
fn the_dot_rendering_is_a_graph_document() {
    let out = lineq(&["diagram", "t[x;y;z]", "--theory", "m-leq", "--format", "dot"]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).expect("dot output is text");
    assert!(text.starts_with("graph diagram {"));
    assert!(text.contains("s1 -- s2"));
}

#[test]
fn normalisation_reports_its_derivation_with_directions() {
    let out = lineq(&[
        "normalize",
        "--pass",
        "develop",
        "del>{x<=y}",
        "--theory",
        "m-leq",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["pass"], "develop");
    let steps = v["derivation"]["steps"].as_array().expect("steps listed");
    assert!(!steps.is_empty());
    for step in steps {
        let dir = step["dir"].as_str().expect("direction is text");
        assert!(dir == "L2R" || dir == "R2L");
    }
}

#[test]
fn an_exhausted_budget_exits_five() {
    let out = lineq(&[
        "normalize",
        "--pass",
        "develop",
        "del>{x<=y}",
        "--budget",
        "0",
        "--theory",
        "m-leq",
    ]);
    assert_eq!(exit_code(&out), 5);
    assert_eq!(stdout_json(&out)["error"]["kind"], "budget");
}

#[test]
fn diversification_reports_the_way_back() {
    let out = lineq(&["diversify", "t[x;x;x]", "--theory", "m-leq"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["arrow"], "t[v1;v2;v3]");
    assert_eq!(v["renaming"]["v1"], "x");
    assert_eq!(v["renaming"]["v2"], "x");
    assert_eq!(v["renaming"]["v3"], "x");
}

#[test]
fn a_generality_type_mismatch_exits_four() {
    let out = lineq(&["generality", "r[x]", "id{T}", "--theory", "m-leq"]);
    assert_eq!(exit_code(&out), 4);
    assert_eq!(stdout_json(&out)["error"]["kind"], "precondition");
}

#[test]
fn the_sequence_condition_holds_for_transitivity() {
    let out = lineq(&["star", "t[x;y;z]", "--theory", "m-leq"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_json(&out)["star"], true);
}

#[test]
fn the_sequence_condition_demands_reflexivity_free_input() {
    let out = lineq(&["star", "r[x]", "--theory", "m-leq"]);
    assert_eq!(exit_code(&out), 4);
    assert_eq!(stdout_json(&out)["error"]["kind"], "precondition");
}

#[test]
fn the_axiom_suite_passes_for_the_richest_theory() {
    let out = lineq(&["axioms", "--theory", "sdot-equiv"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["all_ok"], true);
    assert_eq!(v["theory"], "sdot-equiv");
    let rows = v["axioms"].as_array().expect("axioms listed");
    assert_eq!(rows.len(), 28);
}

#[test]
fn the_adjunction_laws_hold_from_the_command_line() {
    let out = lineq(&["adjoint", "--y", "y", "--z", "z", "--theory", "m-leq"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["all_hold"], true);
    assert!(!v["checks"].as_array().expect("checks listed").is_empty());
}

#[test]
fn a_repeated_adjunction_variable_exits_four() {
    let out = lineq(&["adjoint", "--y", "z", "--z", "z", "--theory", "m-leq"]);
    assert_eq!(exit_code(&out), 4);
    assert_eq!(stdout_json(&out)["error"]["kind"], "precondition");
}

#[test]
fn fuzzing_stays_sound_and_loop_free() {
    let out = lineq(&["fuzz", "--n", "50", "--theory", "s-equiv", "--seed", "7"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["soundness_failures"], 0);
    assert_eq!(v["max_loops_discarded"], 0);
}

#[test]
fn printed_arrows_parse_back_unchanged() {
    let vars = [
        lineq::syntax::Variable::new("x"),
        lineq::syntax::Variable::new("u"),
        lineq::syntax::Variable::new("w"),
    ];
    for theory in lineq::proofterm::Theory::ALL {
        for seed in 0..167u64 {
            let f = lineq::proofterm::random_term(theory, 12, 0xc11 + seed, &vars);
            let printed = f.to_string();
            let back = lineq::text::parse_arrow(&printed)
                .unwrap_or_else(|e| panic!("`{printed}` fails to reparse: {e}"));
            assert_eq!(back, f, "`{printed}` changes under the round trip");
        }
    }
}
