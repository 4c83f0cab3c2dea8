use std::process::{Command, Output};

fn qet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qet")).args(args).output().expect("run qet")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn first_line(o: &Output) -> String {
    stdout(o).lines().next().unwrap_or_default().to_string()
}

#[test]
fn headers() {
    let cases: [(&[&str], &str); 4] = [
        (&["spectrum", "--h", "0.5"], "h,E_1,E_2,E_3,E_4,E_5,E_6,E_7,E_8"),
        (
            &["sweep", "--h", "0.5"],
            "h,C_AB,D_AB,hC_AB,hD_AB,dE_A_ry,dE_A_rx,dE_B_max,dE_BB_max,dE_B_at_dE_BB_opt",
        ),
        (
            &["thermo", "--h", "0.5"],
            "h,dE_BB_max,eps_B_1mcos2th,mhC_AB_sin2th,D_over_beta,IQC_over_beta,residual",
        ),
        (&["chain", "--L-list", "4,50"], "L,h,abs_C_AB,abs_D_AB,slope,r_squared,ed_residual"),
    ];
    for (args, header) in cases {
        let o = qet(args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(first_line(&o), header, "{args:?}");
    }
}

#[test]
fn output_is_reproducible() {
    let args = ["sweep", "--h-min", "0", "--h-max", "1", "--h-steps", "21"];
    let a = qet(&args);
    let b = qet(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 22);
    let seq = qet(&["sweep", "--h-min", "0", "--h-max", "1", "--h-steps", "21", "--sequential"]);
    assert_eq!(a.stdout, seq.stdout);
}

#[test]
fn bad_ranges_exit_two() {
    assert_eq!(qet(&["spectrum", "--h-min", "2", "--h-max", "1"]).status.code(), Some(2));
    assert_eq!(qet(&["sweep", "--h-steps", "1"]).status.code(), Some(2));
    assert_eq!(qet(&["thermo", "--h", "0"]).status.code(), Some(2));
    assert_eq!(qet(&["chain", "--L", "1"]).status.code(), Some(2));
    assert_eq!(qet(&["verify", "--grid", "8"]).status.code(), Some(2));
    assert_eq!(qet(&["spectrum", "--bogus"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_two() {
    let o = qet(&["spectrum", "--h", "0", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("qet-cli-test-{}.csv", std::process::id()));
    let o = qet(&["thermo", "--h-min", "0.1", "--h-max", "0.5", "--h-steps", "5", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let direct = qet(&["thermo", "--h-min", "0.1", "--h-max", "0.5", "--h-steps", "5"]);
    assert_eq!(written, direct.stdout);
}

#[test]
fn zero_field_spectrum_is_doubly_degenerate() {
    let o = qet(&["spectrum", "--h", "0"]);
    let row: Vec<f64> = stdout(&o).lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(row.len(), 9);
    assert!((row[1] + 5f64.sqrt()).abs() < 1e-10);
    assert!((row[1] - row[2]).abs() < 1e-10);
    assert!(row[1..].windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn chain_four_sites_matches_exact_diagonalization() {
    let o = qet(&["chain", "--L", "4", "--h", "0.3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "4");
    let residual: f64 = row[6].parse().unwrap();
    assert!(residual < 1e-10, "{residual}");
    let c_ab: f64 = row[2].parse().unwrap();
    assert!((c_ab - 0.76570).abs() < 5e-5);
}

#[test]
fn verify_passes() {
    let o = qet(&["verify", "--seed", "7"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.trim_end().ends_with("checks passed"));
}

fn rows(o: &Output) -> Vec<Vec<f64>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|s| if s.is_empty() { f64::NAN } else { s.parse().unwrap() }).collect())
        .collect()
}

#[test]
fn thermo_columns_satisfy_the_bound() {
    let o = qet(&["thermo", "--h-min", "0.05", "--h-max", "3", "--h-steps", "60"]);
    assert!(o.status.success());
    for r in rows(&o) {
        // h, dE_BB_max, eps_B_1mcos2th, mhC_AB_sin2th, D_over_beta, IQC_over_beta, residual
        assert!(r[6] < 1e-10, "{r:?}");
        assert!(r[3] >= r[1] - 1e-12, "{r:?}");
        assert!(r[4] >= 0.0 && r[5] >= 0.0, "{r:?}");
    }
    let at2 = rows(&qet(&["thermo", "--h", "2"])).remove(0);
    assert!(at2[4] < 0.05 * at2[5], "{at2:?}");
}

#[test]
fn chain_edge_correlators() {
    for r in rows(&qet(&["chain", "--h", "0", "--L-list", "4,10,50,200"])) {
        assert!((r[2] - 1.0).abs() < 1e-10, "{r:?}");
    }
    let d: Vec<f64> = rows(&qet(&["chain", "--L-list", "50,100,200,400"])).iter().map(|r| r[3]).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}
