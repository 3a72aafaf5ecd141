use std::process::{Command, Output};

use serde_json::Value;

fn weakval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakval")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON report")
}

/// Direct ratio <post|A|pre> / <post|pre> with real inputs.
fn real_ratio(a: [[f64; 2]; 2], pre: [f64; 2], post: [f64; 2]) -> f64 {
    let num: f64 = (0..2).map(|i| post[i] * (a[i][0] * pre[0] + a[i][1] * pre[1])).sum();
    num / (post[0] * pre[0] + post[1] * pre[1])
}

#[test]
fn sigma_z_example_matches_direct_ratio() {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let expected = real_ratio([[1.0, 0.0], [0.0, -1.0]], [r, r], [1.0, 0.0]);
    for method in ["direct", "weak-operator"] {
        let v = json(&weakval(&[
            "weak-value",
            "--observable",
            "sigma_z",
            "--pre",
            "[0.7071067811865476, 0.7071067811865476]",
            "--post",
            "[1, 0]",
            "--method",
            method,
        ]));
        assert!((v["result"]["re"].as_f64().unwrap() - expected).abs() < 1e-12);
        assert!(v["result"]["im"].as_f64().unwrap().abs() < 1e-12);
        assert_eq!(v["meta"]["tool"], "weakval");
        assert_eq!(v["meta"]["subcommand"], "weak-value");
        assert!(v["meta"]["duration_ms"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn json_matrix_and_complex_states() {
    // ket (1, i)/sqrt2 is the +1 eigenvector of sigma_y, so the weak value is 1 for any pre
    let v = json(&weakval(&[
        "weak-value",
        "--observable",
        "[[0, [0, -1]], [[0, 1], 0]]",
        "--pre",
        "plus",
        "--post",
        "[1, [0, 1]]",
    ]));
    let value = &v["result"]["value"];
    assert!((value[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(value[1].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn orthogonal_states_exit_two_with_structured_error() {
    let out = weakval(&["weak-value", "--observable", "sigma_z", "--pre", "[1, 0]", "--post", "[0, 1]"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "OVERLAP_TOO_SMALL");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(weakval(&["weak-value", "--observable", "sigma_z", "--unknown"]).status.code(), Some(1));
    assert_eq!(weakval(&["no-such-command"]).status.code(), Some(1));
    let bad_json = weakval(&["weak-value", "--observable", "sigma_z", "--pre", "[1,", "--post", "zero"]);
    assert_eq!(bad_json.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&bad_json.stderr).unwrap();
    assert_eq!(err["error"]["code"], "INVALID_INPUT");
    assert_eq!(weakval(&["--help"]).status.code(), Some(0));
}

#[test]
fn undefined_simulation_exits_two() {
    let out = weakval(&[
        "aav-sim",
        "--observable",
        "projector0",
        "--pre",
        "zero",
        "--post",
        "one",
        "--attempts",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    let code = err["error"]["code"].as_str().unwrap();
    assert!(code == "OVERLAP_TOO_SMALL" || code == "ZERO_POSTSELECTION_PROBABILITY", "{code}");
}

/// Report with the wall-clock field removed.
fn without_duration(out: &Output) -> Value {
    let mut v = json(out);
    v["meta"].as_object_mut().unwrap().remove("duration_ms");
    v
}

#[test]
fn same_seed_gives_identical_reports() {
    let runs: [&[&str]; 4] = [
        &["aav-sim", "--observable", "sigma_z", "--pre", "plus", "--post", "plus_i", "--readout", "q", "--attempts", "2e5"],
        &["cheshire", "--attempts", "1e5"],
        &["bohmian", "--attempts", "2e5", "--tau", "0.1", "--sigma-q", "0.2"],
        &["bias", "--mode", "berkson"],
    ];
    for args in runs {
        let seeded: Vec<&str> = args.iter().copied().chain(["--seed", "42"]).collect();
        let a = weakval(&seeded);
        let b = weakval(&[seeded.as_slice(), &["--threads", "3"]].concat());
        assert_eq!(without_duration(&a), without_duration(&b), "{args:?}");
        let mut text_a = String::from_utf8(a.stdout.clone()).unwrap();
        let mut text_b = String::from_utf8(b.stdout.clone()).unwrap();
        for t in [&mut text_a, &mut text_b] {
            let start = t.find("\"duration_ms\"").unwrap();
            let end = start + t[start..].find('\n').unwrap();
            t.replace_range(start..end, "");
        }
        assert_eq!(text_a, text_b, "{args:?}");
        assert_eq!(json(&a)["meta"]["seed"], 42);
    }
    let other = weakval(&["bias", "--mode", "berkson", "--seed", "43"]);
    let base = weakval(&["bias", "--mode", "berkson", "--seed", "42"]);
    assert_ne!(without_duration(&other)["result"], without_duration(&base)["result"]);
}

#[test]
fn csv_outputs_have_fixed_columns() {
    let cases: [(&[&str], &str); 6] = [
        (
            &["cheshire", "--attempts", "1e4"],
            "label,exact_re,exact_im,estimate_re,estimate_im,stderr_re,stderr_im,postselected_p,postselected_q",
        ),
        (&["weak-value", "--observable", "sigma_x", "--pre", "zero", "--post", "plus"], "re,im,overlap_abs,method"),
        (
            &["aav-sim", "--observable", "sigma_z", "--pre", "plus", "--post", "zero", "--attempts", "1000"],
            "coordinate_or_momentum,density",
        ),
        (&["bohmian", "--mode", "exact"], "bin_center,velocity,count"),
        (&["bias", "--n", "1e5"], "t,target,reconstructed"),
        (
            &["bias", "--mode", "berkson"],
            "n,n_admitted,r_unconditional,r_conditional,r_conditional_expected",
        ),
    ];
    for (args, header) in cases {
        let out = weakval(&[args, &["--format", "csv"]].concat());
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(header), "{args:?}");
        let width = header.split(',').count();
        for line in lines {
            assert_eq!(line.split(',').count(), width, "{args:?}: {line}");
        }
    }
}

#[test]
fn report_written_to_file() {
    let path = std::env::temp_dir().join(format!("weakval-cli-{}.json", std::process::id()));
    let out = weakval(&[
        "weak-value",
        "--observable",
        "sigma_x",
        "--pre",
        "zero",
        "--post",
        "plus",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!((v["result"]["re"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn bohmian_exact_mode_tracks_oracle() {
    let v = json(&weakval(&["bohmian", "--mode", "exact"]));
    let dev = v["result"]["central_mean_abs_deviation"].as_f64().unwrap();
    assert!(dev < 0.02, "{dev}");
    let oracle = v["result"]["oracle"]["velocities"].as_array().unwrap();
    assert!(oracle.iter().all(|x| (x.as_f64().unwrap() - 1.0).abs() < 1e-3));
}
