use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gamma-zeno"))
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn exit_codes() {
    assert_eq!(
        bin().arg("spectrum").output().unwrap().status.code(),
        Some(0)
    );
    assert_eq!(
        bin().arg("frobnicate").output().unwrap().status.code(),
        Some(1)
    );
    assert_eq!(
        bin()
            .args(["decay", "--gamma", "-1"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        bin()
            .args(["pdf", "--ratio", "0.1,-2"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        bin()
            .args(["decay", "--initial", "bloch:0.9,0.9,0"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_documents_csv_schemas() {
    for (cmd, column) in [
        ("pdf", "t_prime_over_tau"),
        ("decay", "gamma_t"),
        ("compare", "dev_ode_approx"),
        ("spectrum", "log"),
    ] {
        let out = bin().args([cmd, "--help"]).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        assert!(
            String::from_utf8(out.stdout).unwrap().contains(column),
            "{cmd}"
        );
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = [
        "decay",
        "--method",
        "quadrature",
        "--steps",
        "41",
        "--initial",
        "bloch:0.6,0,0.8",
    ];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("gamma-zeno-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pdf.csv");
    let status = bin().args(["pdf", "--out"]).arg(&path).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let stdout = bin().arg("pdf").output().unwrap().stdout;
    assert_eq!(text.as_bytes(), stdout.as_slice());
    assert_eq!(text.lines().count(), 601);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn methods_agree() {
    let run = |method: &str| {
        let out = bin()
            .args([
                "decay",
                "--steps",
                "51",
                "--kappa",
                "0.2",
                "--initial",
                "bloch:0.3,-0.4,0.5",
                "--method",
                method,
            ])
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        rows(&String::from_utf8(out.stdout).unwrap())
    };
    let closed = run("closed");
    for method in ["matrixfn", "quadrature"] {
        for (a, b) in closed.iter().zip(run(method)) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-8, "{method}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn compare_reports_expansion_gap_without_failing() {
    let out = bin()
        .args(["compare", "--tau", "0.5", "--steps", "101"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let data = rows(&String::from_utf8(out.stdout).unwrap());
    let max = |col: usize| data.iter().map(|r| r[col]).fold(0.0, f64::max);
    for col in 3..=5 {
        assert!(max(col) <= 1e-8);
    }
    assert!(max(6) > 1e-3);
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn compare_collapses_at_zero_tau() {
    let out = bin()
        .args([
            "compare",
            "--tau",
            "0",
            "--steps",
            "101",
            "--initial",
            "bloch:0.6,0,0.8",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    for r in rows(&String::from_utf8(out.stdout).unwrap()) {
        assert!(r[3..].iter().all(|d| *d <= 1e-8), "{r:?}");
    }
}

#[test]
fn spectrum_examples() {
    let out = bin()
        .args(["spectrum", "--omega", "0", "--gamma", "0", "--tau", "0,1"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text
        .lines()
        .filter(|l| l.starts_with("G,") || l.starts_with("L,"))
    {
        let v: Vec<f64> = line
            .split(',')
            .skip(1)
            .map(|x| x.parse().unwrap())
            .collect();
        assert_eq!(v, vec![0.0, 0.0]);
    }
    let out = bin().args(["spectrum", "--tau", "50"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let rate: f64 = text
        .lines()
        .find(|l| l.starts_with("effective_rate"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((rate - 51f64.ln() / 50.0).abs() < 1e-14);
}
