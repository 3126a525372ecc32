use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kontsevich"))
        .args(args)
        .output()
        .expect("spawn kontsevich")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn xn_r3_n3_has_nine_unit_terms() {
    let o = run(&["xn", "--r", "3", "--n", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines.iter().all(|l| l.starts_with("1 * x^1 y^1 x^-1")));
}

#[test]
fn stream_matches_sorted_output() {
    let sorted = stdout(&run(&["xn", "--r", "3", "--n", "4"]));
    let streamed = stdout(&run(&["xn", "--r", "3", "--n", "4", "--stream"]));
    let (body, tail) = streamed.trim_end().rsplit_once('\n').unwrap();
    assert_eq!(tail, "# 365 terms");
    let mut a: Vec<&str> = sorted.lines().collect();
    let mut b: Vec<&str> = body.lines().collect();
    a.sort_unstable();
    b.sort_unstable();
    assert_eq!(a, b);
}

#[test]
fn count_and_sequences() {
    assert_eq!(stdout(&run(&["count", "--r", "3", "--n", "4"])).trim(), "365");
    assert_eq!(stdout(&run(&["count", "--r", "2", "--n", "12"])).trim(), "28657");
    assert_eq!(stdout(&run(&["cseq", "--r", "3", "--n", "4", "--all"])), "0\n1\n3\n8\n");
    assert_eq!(stdout(&run(&["brow", "--r", "3", "--n", "3"])).trim(), "2,3,2");
}

#[test]
fn fmap_and_exceptional() {
    assert_eq!(
        stdout(&run(&["fmap", "--r", "3", "--n", "4", "--v", "1,3"])).trim(),
        "1,2,3,6,7,8"
    );
    assert_eq!(stdout(&run(&["fmap", "--r", "3", "--n", "4"])).trim(), "");
    assert_eq!(stdout(&run(&["exc", "--r", "3", "--s", "3,3,2"])).trim(), "true");
    assert_eq!(stdout(&run(&["exc", "--r", "3", "--s", "2"])).trim(), "false");
}

#[test]
fn json_output_parses() {
    let o = run(&["xn", "--r", "3", "--n", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["terms"].as_array().unwrap().len(), 9);
    let o = run(&[
        "specialize",
        "--r",
        "2",
        "--n",
        "4",
        "--source",
        "recurrence",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .all(|t| t["coeff"].as_str().is_some()));
}

#[test]
fn specialization_sources_agree() {
    let a = stdout(&run(&["specialize", "--r", "3", "--n", "4"]));
    let b = stdout(&run(&["specialize", "--r", "3", "--n", "4", "--source", "recurrence"]));
    assert_eq!(a, b);
}

#[test]
fn cz_matches_recurrence_text() {
    let a = stdout(&run(&["cz", "--n", "7"]));
    let b = stdout(&run(&["specialize", "--r", "2", "--n", "7", "--source", "recurrence"]));
    assert_eq!(a, b);
}

#[test]
fn verify_exit_codes() {
    let o = run(&["verify", "cz", "--n", "12"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS"));
    let o = run(&["verify", "formula", "--r", "3", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["verify", "lemma", "--r", "3", "--n", "3", "--all-wprime"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 8);
    // the oracle sees nothing below the cap, so the run is uncertified
    let o = run(&["verify", "formula", "--r", "3", "--n", "3", "--k", "0", "--b", "30"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("UNCERTIFIED"));
}

#[test]
fn lemma_counterexample_exits_one() {
    let o = run(&["verify", "lemma", "--r", "3", "--n", "4", "--wprime", "1,2,4,5,6,7,8"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["xn", "--r", "1", "--n", "3"]).status.code(), Some(2));
    assert_eq!(
        run(&["xn", "--r", "3", "--n", "4", "--max-terms", "10"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["fmap", "--r", "3", "--n", "3", "--v", "9"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["verify", "formula", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn output_is_independent_of_thread_count() {
    let a = run(&["xn", "--r", "4", "--n", "4", "--threads", "1"]);
    let b = run(&["xn", "--r", "4", "--n", "4", "--threads", "3"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("kontsevich-cli-{}.txt", std::process::id()));
    let o = run(&["count", "--r", "3", "--n", "5", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap().trim(), "5402933");
    std::fs::remove_file(path).ok();
}
