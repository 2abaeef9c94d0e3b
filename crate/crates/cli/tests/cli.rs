use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn minimax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minimax"))
        .args(args)
        .output()
        .expect("spawn minimax")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const EPOCH: &str = "\
run_id = cli
family = scsc
d_x = 3
d_y = 3
mu = 1
lipschitz = 8
problem_seed = 1
solver = epoch_seg
n_epochs = 2
k_epochs = 2
sigma = 1
replications = 12
master_seed = 3
validate = true
";

#[test]
fn run_twice_gives_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "e.cfg", EPOCH);
    let a = minimax(&["run", &cfg]);
    let b = minimax(&["run", &cfg]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("# verdict,epoch_seg_distance,pass,"));
    assert_eq!(text.lines().filter(|l| l.starts_with("cli,epoch_seg,1,")).count(), 12 + 4);
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "e.cfg", EPOCH);
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_minimax"))
            .args(["run", &cfg])
            .env("MINIMAX_WORKERS", workers)
            .output()
            .unwrap()
    };
    let one = run("1");
    let three = run("3");
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
    let bad = run("zero");
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("MINIMAX_WORKERS"));
}

#[test]
fn output_key_and_flag_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_config.csv");
    let cfg = write(
        dir.path(),
        "e.cfg",
        &format!("{EPOCH}output = {}\n", target.display()),
    );
    assert!(minimax(&["run", &cfg]).status.success());
    let from_config = fs::read_to_string(&target).unwrap();
    let flag_target = dir.path().join("flag.csv");
    assert!(minimax(&["run", &cfg, "--output", flag_target.to_str().unwrap()]).status.success());
    assert_eq!(fs::read_to_string(flag_target).unwrap(), from_config);
}

#[test]
fn single_replication_reports_the_final_grad_norm() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "one.cfg",
        &EPOCH.replace("sigma = 1", "sigma = 0").replace("replications = 12", "replications = 1"),
    );
    let text = stdout(&minimax(&["run", &cfg]));
    let row: Vec<&str> = text.lines().find(|l| l.starts_with("cli,epoch_seg,1,0,")).unwrap().split(',').collect();
    let mean: Vec<&str> = text.lines().find(|l| l.contains("summary:mean")).unwrap().split(',').collect();
    assert_eq!(row[5], mean[5]);
    assert_eq!(row[7], "0.0000000000000000e0");
}

#[test]
fn invalid_configs_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.cfg", &format!("{EPOCH}colour = red\n"));
    let out = minimax(&["run", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key `colour`"));

    let bad_mu = write(dir.path(), "m.cfg", &EPOCH.replace("mu = 1", "mu = 10"));
    let out = minimax(&["run", &bad_mu]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`mu`"));
    assert!(out.stdout.is_empty());
}

#[test]
fn check_suites_print_one_line_per_check() {
    let out = minimax(&["check", "schedule"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("PASS schedule/")));

    let out = minimax(&["check", "oracle", "--sigma", "0", "--samples", "1000"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("PASS oracle/variance: mean ||noise||^2 = 0 (exact zero expected)"));

    let out = minimax(&["check", "lemmas", "--seed", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("PASS lemmas/")).count(), 5);

    assert!(!minimax(&["check", "nonsense"]).status.success());
}

#[test]
fn generated_problem_files_drive_runs() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.txt");
    let gen = minimax(&[
        "gen", "--family", "scsc", "--d-x", "2", "--d-y", "3", "--mu", "0.5", "--lipschitz", "4", "--seed", "9", "--out",
        problem.to_str().unwrap(),
    ]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let via_file = write(
        dir.path(),
        "f.cfg",
        &format!(
            "family = file\nproblem_file = {}\nproblem_seed = 9\nsolver = rain\neps = 2\nsigma = 0.3\nreplications = 2\n",
            problem.display()
        ),
    );
    let inline = write(
        dir.path(),
        "i.cfg",
        "family = scsc\nd_x = 2\nd_y = 3\nmu = 0.5\nlipschitz = 4\nproblem_seed = 9\nsolver = rain\neps = 2\n\
         sigma = 0.3\nreplications = 2\n",
    );
    let rows = |path: &str| -> Vec<String> {
        let out = minimax(&["run", path]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        stdout(&out).lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
    };
    assert_eq!(rows(&via_file), rows(&inline));

    let bilinear = minimax(&["gen", "--family", "bilinear", "--d-x", "2", "--d-y", "2", "--lipschitz", "2"]);
    assert!(stdout(&bilinear).contains("mu = 0.0000000000000000e0"));
    assert!(!minimax(&["gen", "--family", "scsc", "--d-x", "2", "--d-y", "2", "--lipschitz", "2"]).status.success());
}
