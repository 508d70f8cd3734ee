use std::path::Path;
use std::process::{Command, Output};

fn pam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pam")).args(args).output().expect("spawn pam")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// `(route, value)` pairs of a moment CSV.
fn values(csv: &str) -> Vec<(String, f64)> {
    csv.lines()
        .skip(1)
        .take_while(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[5].to_string(), f[8].parse().unwrap())
        })
        .collect()
}

#[test]
fn moment_at_time_zero_is_the_initial_delta() {
    let o = pam(&["moment", "--t", "0", "--n", "0"]);
    assert!(o.status.success());
    assert_eq!(values(&stdout(&o))[0].1, 1.0);
    let o = pam(&["moment", "--t", "0", "--n", "1,0", "--route", "quadrature,ode"]);
    assert!(values(&stdout(&o)).iter().all(|(_, v)| *v == 0.0));
}

#[test]
fn one_sided_first_moment_at_origin() {
    let o = pam(&["moment", "--p", "2", "--q", "0", "--t", "1", "--n", "0"]);
    assert!(o.status.success());
    let v = values(&stdout(&o))[0].1;
    assert!((v - (-1.0f64).exp()).abs() < 1e-12);
}

#[test]
fn deterministic_routes_agree() {
    let o = pam(&["moment", "--p", "2", "--q", "0", "--t", "0.8", "--n", "1,1,1", "--route", "quadrature,partition,ode"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("p,q,beta,t,n,route,log_value,sign,value,error_estimate\n"));
    let diffs: Vec<f64> = text
        .split("route_a,route_b,rel_diff\n")
        .nth(1)
        .unwrap()
        .lines()
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(diffs.len(), 3);
    assert!(diffs.iter().all(|d| *d < 1e-8), "{diffs:?}");
}

#[test]
fn site_order_does_not_matter() {
    let a = pam(&["moment", "--t", "0.7", "--n", "0,2"]);
    let b = pam(&["moment", "--t", "0.7", "--n", "2,0"]);
    assert_eq!(values(&stdout(&a))[0].1, values(&stdout(&b))[0].1);
}

#[test]
fn overflow_keeps_the_log_value() {
    let o = pam(&["moment", "--p", "2", "--q", "0", "--beta", "5", "--t", "40", "--n", "100,100"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    let f: Vec<&str> = line.split(',').collect();
    assert_eq!(f[8], "inf");
    assert!(f[6].parse::<f64>().unwrap() > 709.0);
}

#[test]
fn ill_conditioned_contours_fail_instead_of_printing_noise() {
    // Z(t,0) is a geometric Brownian motion here, E = e^{480}, but the nested
    // contours cancel through ~e^{250}
    let o = pam(&["moment", "--p", "2", "--q", "0", "--beta", "3", "--t", "20", "--n", "0,0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ill-conditioned"));
}

#[test]
fn usage_and_computation_errors_have_distinct_codes() {
    assert_eq!(pam(&["validate", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(pam(&["moment", "--t", "-1", "--n", "0"]).status.code(), Some(2));
    assert_eq!(pam(&["moment", "--p", "1.5", "--q", "1", "--t", "1", "--n", "0"]).status.code(), Some(2));
    assert_eq!(pam(&["frobnicate"]).status.code(), Some(2));
    // three points need the one-sided model
    assert_eq!(pam(&["moment", "--t", "1", "--n", "0,0,0"]).status.code(), Some(1));
    assert_eq!(pam(&["figure2", "--kmax", "9"]).status.code(), Some(2));
}

#[test]
fn lyapunov_tables() {
    let she = stdout(&pam(&["lyapunov", "--model", "she", "--kmax", "4"]));
    let vals: Vec<f64> = she.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(vals, vec![0.0, 0.25, 1.0, 2.5]);
    let report = stdout(&pam(&["lyapunov", "--nu", "1", "--kmax", "5", "--report"]));
    let chain: Vec<&str> = report.split("lower,upper,margin,strict\n").nth(1).unwrap().lines().collect();
    assert_eq!(chain.len(), 5);
    assert!(chain.iter().all(|l| l.ends_with(",true")));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "command = moment\n# one-sided model\np = 2\nq = 0\nt = 1\nn = 1\n").unwrap();
    let from_file = pam(&["--config", cfg.to_str().unwrap()]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    assert!((values(&stdout(&from_file))[0].1 - (-1.0f64).exp()).abs() < 1e-12);
    let overridden = pam(&["--config", cfg.to_str().unwrap(), "--n", "0"]);
    assert!((values(&stdout(&overridden))[0].1 - (-1.0f64).exp()).abs() < 1e-12);
    let line = stdout(&overridden).lines().nth(1).unwrap().to_string();
    assert_eq!(line.split(',').nth(4), Some("0"));
}

#[test]
fn monte_carlo_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let args = ["moment", "--t", "0.5", "--n", "0,0", "--route", "mc,pinned", "--replicas", "2000", "--seed", "4"];
        let o = pam(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
        assert!(o.status.success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

fn figure(dir: &Path) -> (String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_pam"))
        .args(["figure2", "--points", "25"])
        .env("PAM_OUT_DIR", dir)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (
        std::fs::read_to_string(dir.join("figure2.csv")).unwrap(),
        std::fs::read_to_string(dir.join("figure2.svg")).unwrap(),
    )
}

#[test]
fn figure_files_from_the_environment_directory() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, svg) = figure(dir.path());
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("nu,gamma_tilde_norm,gamma_1_norm,gamma_2_over_2_norm,gamma_3_over_3_norm,gamma_4_over_4_norm,gamma_5_over_5_norm")
    );
    for l in lines {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v[2], 0.0);
        assert!(v[1] < v[2] && v[2..].windows(2).all(|w| w[0] < w[1]), "{l}");
    }
    assert_eq!(svg.matches("<polyline").count(), 6);
    let other = tempfile::tempdir().unwrap();
    assert_eq!(figure(other.path()).0, csv);
}
