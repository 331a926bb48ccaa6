use std::path::PathBuf;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nagumo_cli::expr::ExpressionField;
use nagumo_cli::report::{ErrorReport, Report};
use nagumo_cli::run;
use nagumo_core::checkers::{check_nonlinear_sampled, Certificate, CheckOptions, Decision, DynamicalSystem};
use nagumo_core::sets::{ConvexSet, Ellipsoid, HPolyhedron};
use nagumo_core::tangent::TangentCone;
use nagumo_core::Matrix;

fn problem(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "problems", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("nagumo").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report(args: &[&str]) -> (i32, Report) {
    let (code, out, _) = invoke(args);
    (code, serde_json::from_str(&out).unwrap())
}

fn problem_files() -> Vec<String> {
    let dir: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "problems"].iter().collect();
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    names
}

#[test]
fn rotation_on_the_disk_is_invariant_with_zero_eta() {
    let (code, r) = report(&["check", "--no-timing", &problem("ellipsoid_rotation.json")]);
    assert_eq!(code, 0);
    assert_eq!(r.decision, Some(Decision::Invariant));
    match r.verdict.unwrap().certificate {
        Some(Certificate::Eigen { eta, .. }) => assert!(eta.abs() < 1e-12, "eta = {eta}"),
        other => panic!("unexpected certificate {other:?}"),
    }
}

#[test]
fn orthant_counterexample_is_the_second_unit_vector() {
    let (code, r) = report(&["check", "--no-timing", &problem("orthant_not_metzler.json")]);
    assert_eq!(code, 1);
    let c = r.verdict.unwrap().counterexample.unwrap();
    assert_eq!(c.point, vec![0.0, 1.0]);
    assert_eq!(c.violation, -0.5);
}

#[test]
fn malformed_json_names_the_failing_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"schema": "nagumo/1", "set": {"ellipsoid": {"Q": [[1, 0], [0, "one"]]}}, "system": {"linear": {"A": [[0]]}}}"#,
    )
    .unwrap();
    let (code, out, err) = invoke(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 64);
    let e: ErrorReport = serde_json::from_str(&out).unwrap();
    assert_eq!(e.error.path.as_deref(), Some("set.ellipsoid.Q[1][1]"));
    assert!(err.contains("set.ellipsoid.Q[1][1]"));

    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(invoke(&["check", path.to_str().unwrap()]).0, 64);
    std::fs::write(&path, r#"{"schema": "nagumo/0", "set": {"orthant": {"n": 1}}}"#).unwrap();
    assert_eq!(invoke(&["check", path.to_str().unwrap()]).0, 64);
    assert_eq!(invoke(&["check", "/nonexistent/problem.json"]).0, 64);
}

#[test]
fn usage_errors_are_input_errors() {
    assert_eq!(invoke(&[]).0, 64);
    assert_eq!(invoke(&["frobnicate"]).0, 64);
    assert_eq!(invoke(&["check", "--seed", "minus-one", &problem("unit_box.json")]).0, 64);
    assert_eq!(invoke(&["check", "--step", "0", &problem("unit_box.json")]).0, 64);
    assert_eq!(invoke(&["check", &problem("ellipse_tangent.json")]).0, 64);
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("check"));
    let (code, out, _) = invoke(&["version"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), format!("nagumo {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn falsify_examples() {
    let (code, r) = report(&["falsify", "--no-timing", &problem("disk_saddle.json")]);
    assert_eq!(code, 1);
    let exit = r.falsification.unwrap().exit.unwrap();
    assert!(exit.t_exit > 0.0 && exit.t_exit <= 10.0);
    assert!(exit.x_exit.iter().map(|v| v * v).sum::<f64>() > 1.0);

    let (code, r) = report(&["falsify", "--no-timing", &problem("disk_contraction.json")]);
    assert_eq!(code, 0);
    let f = r.falsification.unwrap();
    assert_eq!(f.n_starts, 100);
    assert!(f.exit.is_none());

    let (code, _) = report(&["falsify", "--no-timing", "--starts", "20", &problem("single_vertex.json")]);
    assert_eq!(code, 0);
}

#[test]
fn tangent_examples() {
    let (code, r) = report(&["tangent", "--no-timing", &problem("unit_box.json"), "[1, 1]"]);
    assert_eq!(code, 0);
    assert_eq!(
        r.tangent.unwrap().cone,
        TangentCone::Halfspaces {
            normals: vec![vec![1.0, 0.0], vec![0.0, 1.0]]
        }
    );

    let (code, r) = report(&["tangent", "--no-timing", &problem("ellipse_tangent.json"), "[0, 0.5]"]);
    assert_eq!(code, 0);
    assert_eq!(
        r.tangent.unwrap().cone,
        TangentCone::QuadraticHalfspace {
            q_normal: vec![0.0, 2.0]
        }
    );

    assert_eq!(invoke(&["tangent", &problem("unit_box.json"), "[0.2, 0.3]"]).0, 65);
    assert_eq!(invoke(&["tangent", &problem("unit_box.json"), "[3, 0]"]).0, 65);
    assert_eq!(invoke(&["tangent", &problem("unit_box.json"), "[1]"]).0, 64);
    assert_eq!(invoke(&["tangent", &problem("unit_box.json"), "one"]).0, 64);
}

#[test]
fn expression_systems_go_through_sampling() {
    let (code, r) = report(&["check", "--no-timing", &problem("expression_rotation.json")]);
    assert_eq!(code, 2);
    assert!(r.falsification.unwrap().exit.is_none());

    let (code, r) = report(&["check", "--no-timing", &problem("expression_van_der_pol.json")]);
    assert_eq!(code, 1);
    assert!(r.verdict.unwrap().counterexample.is_some());
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    for name in problem_files() {
        let path = problem(&name);
        for cmd in ["check", "falsify"] {
            let args = [cmd, "--no-timing", "--starts", "50", "--horizon", "2", path.as_str()];
            let (c1, o1, _) = invoke(&args);
            let (c2, o2, _) = invoke(&args);
            assert_eq!((c1, &o1), (c2, &o2), "{cmd} {name}");
            if c1 <= 2 {
                let r: Report = serde_json::from_str(&o1).unwrap();
                assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", o1, "{cmd} {name}");
            }
        }
    }
}

#[test]
fn timing_is_reported_unless_disabled() {
    let (_, r) = report(&["check", &problem("unit_box.json")]);
    let phases: Vec<String> = r.timing.unwrap().into_iter().map(|p| p.name).collect();
    assert_eq!(phases, ["parse", "check"]);
    let (_, r) = report(&["check", "--no-timing", &problem("unit_box.json")]);
    assert!(r.timing.is_none());
}

#[test]
fn flags_override_file_options() {
    let (_, r) = report(&[
        "check",
        "--no-timing",
        "--tolerance",
        "1e-6",
        "--seed",
        "7",
        "--samples",
        "123",
        &problem("disk_contraction.json"),
    ]);
    assert_eq!(r.options.tolerances.boundary, 1e-6);
    assert_eq!(r.options.tolerances.cone, 1e-6);
    assert_eq!(r.options.seed, 7);
    assert_eq!(r.options.n_samples, 123);
    assert_eq!(r.options.n_starts, 100);
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let (code, out, _) = invoke(&["check", "--no-timing", "--output", target.to_str().unwrap(), &problem("unit_box.json")]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let (_, direct, _) = invoke(&["check", "--no-timing", &problem("unit_box.json")]);
    assert_eq!(std::fs::read_to_string(target).unwrap(), direct);
}

#[test]
fn binary_exit_codes_and_streams() {
    let bin = env!("CARGO_BIN_EXE_nagumo");
    for (name, code) in [
        ("ellipsoid_rotation.json", 0),
        ("orthant_not_metzler.json", 1),
        ("expression_rotation.json", 2),
    ] {
        let a = Command::new(bin).args(["check", "--no-timing", &problem(name)]).output().unwrap();
        let b = Command::new(bin).args(["check", "--no-timing", &problem(name)]).output().unwrap();
        assert_eq!(a.status.code(), Some(code), "{name}");
        assert_eq!(a.stdout, b.stdout);
        assert!(serde_json::from_slice::<Report>(&a.stdout).is_ok());
        assert!(String::from_utf8_lossy(&a.stderr).starts_with("check:"));
    }
    let bad = Command::new(bin).args(["check", "--bogus"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(64));
}

fn linear_formulas(a: &Matrix) -> Vec<String> {
    (0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .enumerate()
                .map(|(j, v)| format!("{v:?}*x{}", j + 1))
                .collect::<Vec<_>>()
                .join(" + ")
        })
        .collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::new(n, n, (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn expression_evaluator_matches_matrix_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in 1..=4 {
        let a = random_matrix(&mut rng, n);
        let field = ExpressionField::parse(&linear_formulas(&a)).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let direct = a.matvec(&x);
            let via = field.eval(0.0, &x);
            for (d, v) in direct.iter().zip(&via) {
                assert!((d - v).abs() <= 1e-12 * (1.0 + d.abs()), "{d} vs {v}");
            }
        }
    }
    let f = ExpressionField::parse(&["\u{2212}1*x1 + 2*x2", "x1"]).unwrap();
    assert_eq!(f.eval(0.0, &[3.0, 1.0]), vec![-1.0, 3.0]);
}

#[test]
fn expression_and_linear_forms_agree_on_the_sampled_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let opts = CheckOptions {
        n_samples: 500,
        ..CheckOptions::default()
    };
    let mut seen = [false; 3];
    for k in 0..40 {
        let n = 2 + k % 2;
        let set: ConvexSet = if k % 4 < 2 {
            Ellipsoid::new(Matrix::identity(n)).unwrap().into()
        } else {
            HPolyhedron::hyperrectangle(&vec![-1.0; n], &vec![1.0; n]).unwrap().into()
        };
        let mut a = random_matrix(&mut rng, n);
        if k % 3 == 0 {
            // Strongly contracting diagonal keeps some instances free of violations.
            a = a.sub(&Matrix::identity(n).scale(3.0));
        }
        let field = ExpressionField::parse(&linear_formulas(&a)).unwrap();
        let expr = DynamicalSystem::general(n, move |t, x| field.eval(t, x));
        let v_lin = check_nonlinear_sampled(&set, &DynamicalSystem::linear(a).unwrap(), &opts).unwrap();
        let v_expr = check_nonlinear_sampled(&set, &expr, &opts).unwrap();
        assert_eq!(v_lin.decision, v_expr.decision, "instance {k}");
        seen[v_lin.decision as usize] = true;
    }
    assert!(seen[1] && seen[2], "battery should produce both sampled outcomes");
}
