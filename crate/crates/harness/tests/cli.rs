use std::io::{BufRead, BufReader};
use std::process::{Command, Stdio};

fn ksubs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ksubs"))
}

fn run(args: &[&str]) -> String {
    let out = ksubs().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rubik_dataset(dir: &std::path::Path) -> String {
    let path = dir.join("rubik.tsv");
    run(&["gen-data", "rubik", "--count", "200", "--len", "6", "--seed", "3", "--out", path.to_str().unwrap()]);
    path.to_str().unwrap().to_string()
}

#[test]
fn sweep_writes_csv_to_stdout_and_file() {
    let stdout = run(&["sweep", "--env", "grid", "--provider", "synthetic:3", "--trials", "10", "--budgets", "50,100"]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "budget,method,success_rate,mean_graph_size,mean_path_length,trials,seed");
    assert_eq!(lines.len(), 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    run(&["sweep", "--env", "grid", "--provider", "synthetic:3", "--trials", "10", "--budgets", "50,100", "--out", path.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(path).unwrap(), stdout);
}

#[test]
fn config_file_with_cli_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, "env = \"rubik\"\ntrials = 5\nbudgets = [30]\n[instances]\nscramble_len = 3\n").unwrap();
    let stdout = run(&["sweep", "--config", path.to_str().unwrap(), "--trials", "4"]);
    let row = stdout.lines().nth(1).unwrap();
    assert!(row.starts_with("30,bf-ksubs,1.0,"), "{row}");
    assert!(row.ends_with(",4,0"), "{row}");
}

#[test]
fn solve_prints_the_solution() {
    let stdout = run(&["solve", "--env", "rubik", "--scramble-len", "3", "--budgets", "100", "--index", "2"]);
    assert!(stdout.contains("solved"), "{stdout}");
}

#[test]
fn ksweep_and_table4_emit_rows() {
    let k = run(&["ksweep", "--env", "grid", "--provider", "synthetic:10", "--trials", "5", "--budgets", "100", "--ks", "1,4"]);
    assert_eq!(k.lines().count(), 3);
    assert!(k.lines().next().unwrap().starts_with("k,"));
    let t = run(&["table4", "--trials", "5", "--sigmas", "3"]);
    assert_eq!(t.lines().count(), 3);
}

#[test]
fn analyses_emit_csv() {
    let delta = run(&["analyze", "delta"]);
    assert!(delta.lines().any(|l| l.starts_with("dead,")));
    let errors = run(&["analyze", "value-errors", "--sigma", "2"]);
    assert!(errors.lines().last().unwrap().starts_with("all,"));
    let mono = run(&["analyze", "monotonicity", "--sigma", "0"]);
    assert_eq!(mono.lines().count(), 5);
    let soko = run(&["gen-data", "sokoban"]);
    assert!(soko.lines().count() > 24);
}

#[test]
fn bridge_over_child_process() {
    let dir = tempfile::tempdir().unwrap();
    let data = rubik_dataset(dir.path());
    let exe = env!("CARGO_BIN_EXE_ksubs");
    let endpoint = format!("cmd:{exe} serve --env rubik --dataset {data} --transport stdio");
    let check = run(&["serve-check", "--env", "rubik", "--endpoint", &endpoint]);
    assert!(check.starts_with("ok:"), "{check}");

    let bridged = run(&["sweep", "--env", "rubik", "--provider", &format!("bridge:{endpoint}"), "--trials", "6", "--budgets", "60", "--scramble-len", "3"]);
    let local = run(&["sweep", "--env", "rubik", "--provider", &format!("tabular:{data}"), "--trials", "6", "--budgets", "60", "--scramble-len", "3"]);
    let strip = |s: &str| s.lines().skip(1).map(|l| l.split(',').skip(2).collect::<Vec<_>>().join(",")).collect::<Vec<_>>();
    assert_eq!(strip(&bridged), strip(&local));
}

#[test]
fn bridge_over_tcp() {
    let dir = tempfile::tempdir().unwrap();
    let data = rubik_dataset(dir.path());
    let mut server = ksubs()
        .args(["serve", "--env", "rubik", "--dataset", &data, "--transport", "tcp"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").unwrap().to_string();
    let endpoint = format!("tcp:{addr}");
    let check = run(&["serve-check", "--env", "rubik", "--endpoint", &endpoint]);
    assert!(check.starts_with("ok:"));
    let wrong = ksubs().args(["serve-check", "--env", "sokoban", "--endpoint", &endpoint]).output().unwrap();
    assert!(!wrong.status.success());
    server.kill().unwrap();
    server.wait().unwrap();
}

#[test]
fn unreachable_bridge_aborts_the_sweep() {
    let out = ksubs()
        .args(["sweep", "--env", "rubik", "--provider", "bridge:cmd:/nonexistent/server", "--trials", "2", "--budgets", "10"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
