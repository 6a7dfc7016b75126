use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn gridseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridseg")).args(args).output().expect("binary runs")
}

fn with_case9<'a>(sub: &'a str, rest: &[&'a str]) -> Vec<String> {
    let mut v = vec![sub.to_string(), "--grid".into(), data("case9.m"), "--comm".into(), data("comm9.txt")];
    v.extend(rest.iter().map(|s| s.to_string()));
    v
}

fn run(args: &[String]) -> Output {
    gridseg(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_prints_the_record_and_repeats_byte_for_byte() {
    let args = with_case9("solve", &["--new-cc", "2", "--attack-budget", "5"]);
    let a = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(stdout(&a).contains("\"loadShedMW\": 225.000000"));
    assert_eq!(a.stdout, run(&args).stdout);
}

#[test]
fn plan_written_by_solve_feeds_attack() {
    let dir = std::env::temp_dir().join(format!("gridseg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let plan = dir.join("plan.txt");
    let plan_s = plan.to_string_lossy().into_owned();
    let solved = run(&with_case9("solve", &["--new-cc", "2", "--attack-budget", "5", "--plan-out", &plan_s]));
    assert!(solved.status.success());
    let attacked = run(&with_case9("attack", &["--plan", &plan_s, "--attack-budget", "5", "--oracle", "milp"]));
    assert!(attacked.status.success(), "{}", String::from_utf8_lossy(&attacked.stderr));
    assert!(stdout(&attacked).contains("\"loadShedMW\": 225.000000"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn dcopf_reports_dispatch_for_a_given_attack() {
    let o = run(&with_case9("dcopf", &["--attack", "BA1/0,CC2/0,B05/0"]));
    assert!(o.status.success());
    assert!(stdout(&o).contains("\"loadShedMW\": 125.000000"));
}

#[test]
fn render_without_attack_equals_render_with_empty_attack() {
    let plain = run(&with_case9("render", &[]));
    let empty = run(&with_case9("render", &["--attack", ""]));
    assert!(plain.status.success() && empty.status.success());
    assert!(stdout(&plain).starts_with("digraph forest {"));
    assert_eq!(plain.stdout, empty.stdout);
    let hit = run(&with_case9("render", &["--attack", "BA1/0"]));
    assert!(stdout(&hit).contains("fillcolor"));
}

#[test]
fn sweep_defaults_to_five_rows() {
    let o = run(&with_case9("sweep", &["--attack-budget", "3"]));
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches("\"defenderBudget\"").count(), 5);
}

#[test]
fn input_errors_exit_with_1() {
    let missing = gridseg(&["attack", "--grid", "/no/such/case.m", "--comm", &data("comm9.txt"), "--attack-budget", "1"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(gridseg(&["solve", "--bogus"]).status.code(), Some(1));
    let bad_attack = run(&with_case9("dcopf", &["--attack", "B05/0"]));
    assert_eq!(bad_attack.status.code(), Some(1), "unclosed attack is an input error");
    let bad_oracle = run(&with_case9("attack", &["--attack-budget", "1", "--oracle", "guess"]));
    assert_eq!(bad_oracle.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_with_2() {
    let o = run(&with_case9("attack", &["--attack-budget", "1", "--out", "/no/such/dir/out.json"]));
    assert_eq!(o.status.code(), Some(2));
}
