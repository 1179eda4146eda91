use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use onlinefwer::audit::audit_trace;
use onlinefwer::{ProcedureConfig, ProcedureKind, SeriesSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_onlinefwer"))
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Data rows of a CSV table, header dropped.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn three_rows_alpha_spending_q2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "p\n0.01\n0.5\n0.03\n");
    let o = exec(&["run", &input, "--procedure", "alpha-spending", "--alpha", "0.2", "--series", "q", "--q", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("index,p,alpha_i,rejected,selected,candidate\n"));
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    for (i, r) in rows(&text).iter().enumerate() {
        let want = 0.2 / ((i + 1) as f64).powi(2) / zeta2;
        let got: f64 = r[2].parse().unwrap();
        assert!((got - want).abs() < 1e-15, "row {i}: {got} vs {want}");
    }
    assert_eq!(rows(&text)[0][3], "1");
}

#[test]
fn empty_input_gives_empty_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "empty.csv", "");
    let o = exec(&["run", &input, "--procedure", "addis", "--alpha", "0.2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(rows(&stdout(&o)).is_empty());
}

#[test]
fn out_of_range_p_value_stops_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "p\n0.01\n0.2\n1.5\n0.03\n");
    let out = dir.path().join("out.csv");
    let o = exec(&["run", &input, "--procedure", "addis", "--alpha", "0.2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    let written = std::fs::read_to_string(out).unwrap();
    assert_eq!(rows(&written).len(), 2);
}

#[test]
fn unparsable_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "bad.csv", "p\nabc\n");
    assert_eq!(exec(&["run", &input, "--procedure", "addis", "--alpha", "0.2"]).status.code(), Some(2));
    let input = write(dir.path(), "nop.csv", "q\n0.1\n");
    assert_eq!(exec(&["run", &input, "--procedure", "addis", "--alpha", "0.2"]).status.code(), Some(2));
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "p.csv", "p\n0.1\n");
    assert_eq!(exec(&["run", &input, "--alpha", "0.2"]).status.code(), Some(3));
    assert_eq!(exec(&["run", &input, "--procedure", "bonferroni", "--alpha", "0.2"]).status.code(), Some(3));
    assert_eq!(
        exec(&["run", &input, "--procedure", "addis", "--alpha", "0.2", "--lambda", "0.6", "--tau", "0.5"]).status.code(),
        Some(3)
    );
}

#[test]
fn jsonl_input_matches_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "p.csv", "p\n0.001\n0.4\n0.02\n");
    let jsonl = write(dir.path(), "p.jsonl", "{\"p\": 0.001}\n{\"p\": 0.4}\n{\"p\": 0.02}\n");
    let a = exec(&["run", &csv, "--procedure", "online-fallback", "--alpha", "0.1"]);
    let b = exec(&["run", &jsonl, "--procedure", "online-fallback", "--alpha", "0.1"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn batch_fixture_runs_with_shipped_config() {
    let fixture = repo("fixtures/batches.csv");
    let config = repo("configs/local-batches.toml");
    let o = exec(&["run", fixture.to_str().unwrap(), "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&stdout(&o)).len(), 26);
}

#[test]
fn reappearing_batch_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "b.csv", "p,batch_id\n0.1,a\n0.2,b\n0.3,a\n");
    let o = exec(&["run", &input, "--procedure", "addis-local", "--alpha", "0.2", "--lags", "batch"]);
    assert_eq!(o.status.code(), Some(2));
}

/// Every procedure's CLI output matches the library run bit for bit, and
/// that run passes the audit.
#[test]
fn run_output_round_trips_through_the_audit() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for kind in ProcedureKind::ALL {
        for _ in 0..3 {
            let ps: Vec<f64> = (0..rng.gen_range(1..80))
                .map(|_| if rng.gen_bool(0.3) { rng.gen::<f64>() * 0.01 } else { rng.gen() })
                .collect();
            let text = std::iter::once("p".to_string())
                .chain(ps.iter().map(|p| p.to_string()))
                .collect::<Vec<_>>()
                .join("\n");
            let input = write(dir.path(), "fuzz.csv", &text);
            let o = exec(&["run", &input, "--procedure", kind.name(), "--alpha", "0.2", "--series", "q"]);
            assert_eq!(o.status.code(), Some(0), "{kind}");
            let cfg = ProcedureConfig::new(kind, 0.2).with_series(SeriesSpec::Q { q: 2.0 });
            let trace = cfg.build().unwrap().run(&ps).unwrap();
            assert!(audit_trace(&trace, &cfg).unwrap().passed());
            for (r, d) in rows(&stdout(&o)).iter().zip(&trace) {
                let level: f64 = r[2].parse().unwrap();
                assert_eq!(level.to_bits(), d.level.to_bits(), "{kind}");
                assert_eq!(r[3] == "1", d.rejected);
                assert_eq!(r[4] == "1", d.selected);
                assert_eq!(r[5] == "1", d.candidate);
            }
        }
    }
}

#[test]
fn run_output_is_byte_stable() {
    let fixture = repo("fixtures/batches.csv");
    let args = ["run", fixture.to_str().unwrap(), "--procedure", "addis", "--alpha", "0.2"];
    assert_eq!(exec(&args).stdout, exec(&args).stdout);
}

#[test]
fn fig1_preset_shape_and_determinism() {
    let args = ["experiment", "--preset", "fig1", "--trials", "1", "--seed", "5"];
    let a = exec(&args);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    assert!(text.starts_with("procedure,pi_A,r,mu_A,mu_N,T,alpha,fwer,fwer_se,pfer,power,power_se,fdr\n"));
    assert_eq!(rows(&text).len(), 2 * 9 * 4);
    assert_eq!(a.stdout, exec(&args).stdout);
}

#[test]
fn fig2_preset_covers_the_f_grid() {
    let o = exec(&["experiment", "--preset", "fig2", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 9 * 4);
    let fs: std::collections::BTreeSet<String> = r.iter().map(|row| row[1].clone()).collect();
    assert_eq!(fs.len(), 9);
}

#[test]
fn experiment_config_errors_exit_3() {
    assert_eq!(exec(&["experiment", "--preset", "fig9"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[experiment]\nprocedures = [\"addis\"]\nmu_a = [4.0]\nmu_n = [0.0]\nsignal = { kind = \"constant\", pi_a = [1.5] }\n",
    );
    assert_eq!(exec(&["experiment", "--config", &cfg]).status.code(), Some(3));
}

#[test]
fn solve_cstar_without_conservative_nulls_is_one() {
    let o = exec(&["solve", "cstar", "--mu-a", "4", "--mu-n", "0", "--pi-a", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][1], "1");
}

#[test]
fn solve_optimal_q_decreases_in_n() {
    let o = exec(&["solve", "optimal-q", "--n", "2,10,100", "--mu-a", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let qs: Vec<f64> = rows(&stdout(&o)).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(qs.len(), 3);
    assert!(qs[0] > qs[1] && qs[1] > qs[2], "{qs:?}");
}

#[test]
fn solve_expected_discoveries_without_signal() {
    let o = exec(&["solve", "expected-discoveries", "--mu-a", "0", "--pi-a", "0.5", "--q", "2", "--n", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = rows(&stdout(&o))[0][3].parse().unwrap();
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    let partial: f64 = (1..=10).map(|i| 1.0 / (i as f64).powi(2)).sum::<f64>() / zeta2;
    assert!((v - 0.5 * 0.2 * partial).abs() < 1e-14);
}

#[test]
fn solve_optimal_gamma_sums_to_one() {
    let o = exec(&["solve", "optimal-gamma", "--pi-a", "0.1,0.5,0.3", "--mu-a", "2,3,1", "--horizon", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let s: f64 = rows(&stdout(&o)).iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((s - 1.0).abs() < 1e-9);
}

#[test]
fn unknown_solver_exits_3() {
    assert_eq!(exec(&["solve", "bogus"]).status.code(), Some(3));
}

#[test]
fn validate_reports_findings() {
    let o = exec(&["validate", "--procedure", "addis", "--alpha", "0.2", "--lambda", "0.6", "--tau", "0.5"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("lambda (0.6) must be below tau (0.5)"));
    let o = exec(&["validate", "--procedure", "addis-local", "--alpha", "0.2", "--lags", "0,2,0"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("L_2 = 2 exceeds L_1 + 1"));
}

#[test]
fn shipped_configs_validate() {
    for name in ["default.toml", "local-batches.toml", "fig1.toml", "custom-grid.toml"] {
        let p = repo("configs").join(name);
        let o = exec(&["validate", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
    }
}
