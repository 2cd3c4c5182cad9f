//! End-to-end checks of the command-line binary: every subcommand runs
//! against real files, outputs parse, sidecars replay, and failures exit
//! nonzero with a single-line error.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_surftopo"))
}

struct Run {
    ok: bool,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = bin().args(args).output().expect("spawn surftopo");
    Run {
        ok: out.status.success(),
        stdout: String::from_utf8(out.stdout).expect("utf8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf8 stderr"),
    }
}

fn ok(args: &[&str]) -> String {
    let r = run(args);
    assert!(
        r.ok,
        "command {:?} failed\nstdout: {}\nstderr: {}",
        args, r.stdout, r.stderr
    );
    r.stdout
}

/// Value of `key=` in the first stdout line containing it.
fn field<'a>(stdout: &'a str, key: &str) -> &'a str {
    let probe = format!("{key}=");
    stdout
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(&probe))
        .unwrap_or_else(|| panic!("no {key}= field in output: {stdout}"))
}

fn s(p: &Path) -> String {
    p.to_str().expect("utf8 path").to_string()
}

#[test]
fn full_workflow_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let maps = dir.path().join("maps");

    // Generate two labeled surfaces.
    let stdout = ok(&[
        "generate",
        "--out-dir",
        &s(&maps),
        "--count",
        "2",
        "--height",
        "192",
        "--width",
        "192",
        "--pits",
        "25",
        "--seed",
        "7",
        "--overlay",
    ]);
    assert_eq!(stdout.matches("generated id=").count(), 2);
    let fraction: f64 = field(&stdout, "fraction").parse().unwrap();
    assert!((0.146..=0.186).contains(&fraction), "fraction {fraction}");
    for name in [
        "map_00_depth.png",
        "map_00_mask.png",
        "map_00_overlay.png",
        "map_01_depth.png",
        "map_01_mask.png",
        "generate.conf",
    ] {
        assert!(maps.join(name).is_file(), "missing {name}");
    }

    // Extract features for both maps, with diagram and cell dumps for the
    // first one.
    let train_csv = dir.path().join("train.csv");
    let test_csv = dir.path().join("test.csv");
    let dumps = dir.path().join("dumps");
    let cells = dir.path().join("cells");
    let extract_common = [
        "--patch-size",
        "64",
        "--patch-step",
        "32",
        "--pi-resolution",
        "8",
    ];
    let mut extract_args = vec![
        "extract",
        "--depth",
        &s(&maps.join("map_00_depth.png")),
        "--mask",
        &s(&maps.join("map_00_mask.png")),
        "--out",
        &s(&train_csv),
        "--dump-diagrams",
        &s(&dumps),
        "--dump-cells",
        &s(&cells),
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    extract_args.extend(extract_common.iter().map(|a| a.to_string()));
    let extract_args: Vec<&str> = extract_args.iter().map(String::as_str).collect();
    let stdout = ok(&extract_args);
    assert_eq!(field(&stdout, "rows"), "25");
    assert_eq!(field(&stdout, "features"), "76"); // 12 stats + 64 image pixels

    let diagram_csv = dumps.join("map_00_depth_r00000_c00000_depth.csv");
    let diagram_text = std::fs::read_to_string(&diagram_csv).unwrap();
    assert!(diagram_text.starts_with("dim,birth,death\n"));
    let cells_csv = cells.join("map_00_depth_r00000_c00000_cells.csv");
    let cells_text = std::fs::read_to_string(&cells_csv).unwrap();
    assert!(cells_text.starts_with("a,b,dim,value\n"));
    // 64x64 pixels double to a 129x129 cell grid.
    assert_eq!(cells_text.lines().count(), 1 + 129 * 129);

    let mut test_args = vec![
        "extract",
        "--depth",
        &s(&maps.join("map_01_depth.png")),
        "--mask",
        &s(&maps.join("map_01_mask.png")),
        "--out",
        &s(&test_csv),
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    test_args.extend(extract_common.iter().map(|a| a.to_string()));
    let test_args: Vec<&str> = test_args.iter().map(String::as_str).collect();
    ok(&test_args);

    // Extraction is deterministic across processes.
    let again_csv = dir.path().join("train_again.csv");
    let mut again_args: Vec<String> = extract_args.iter().map(|a| a.to_string()).collect();
    let out_pos = again_args.iter().position(|a| a == "--out").unwrap();
    again_args[out_pos + 1] = s(&again_csv);
    let again_args: Vec<&str> = again_args.iter().map(String::as_str).collect();
    ok(&again_args);
    assert_eq!(
        std::fs::read(&train_csv).unwrap(),
        std::fs::read(&again_csv).unwrap()
    );

    // Train with importances.
    let model = dir.path().join("model.json");
    let importance = dir.path().join("importance.csv");
    let stdout = ok(&[
        "train",
        "--features",
        &s(&train_csv),
        "--model",
        &s(&model),
        "--rounds",
        "10",
        "--importance-csv",
        &s(&importance),
    ]);
    assert!(field(&stdout, "trees").parse::<usize>().unwrap() >= 1);
    assert_eq!(field(&stdout, "rows"), "25");
    assert_eq!(field(&stdout, "degenerate"), "false");
    let imp_text = std::fs::read_to_string(&importance).unwrap();
    assert!(imp_text.starts_with("feature,importance\n"));
    assert_eq!(imp_text.lines().count(), 1 + 76);

    // Predict on the held-out table; ground truth present, so a Dice
    // score is reported.
    let pred = dir.path().join("pred.csv");
    let stdout = ok(&[
        "predict",
        "--features",
        &s(&test_csv),
        "--model",
        &s(&model),
        "--out",
        &s(&pred),
    ]);
    let dsc: f64 = field(&stdout, "dsc").parse().unwrap();
    assert!((0.0..=1.0).contains(&dsc));
    let pred_text = std::fs::read_to_string(&pred).unwrap();
    assert!(pred_text.starts_with("source_id,row,col,label,score,predicted\n"));
    assert_eq!(pred_text.lines().count(), 1 + 25);

    // Evaluate twice with different seeds and compare.
    let eval_a = dir.path().join("eval_a.csv");
    let eval_b = dir.path().join("eval_b.csv");
    let stdout = ok(&[
        "evaluate",
        "--train-features",
        &s(&train_csv),
        "--test-features",
        &s(&test_csv),
        "--out",
        &s(&eval_a),
        "--reps",
        "5",
        "--rounds",
        "5",
    ]);
    let median: f64 = field(&stdout, "median").parse().unwrap();
    assert!((0.0..=1.0).contains(&median));
    let eval_text = std::fs::read_to_string(&eval_a).unwrap();
    assert!(eval_text.starts_with("rep,dsc\n"));
    assert_eq!(eval_text.lines().count(), 1 + 5);
    let stdout = ok(&[
        "evaluate",
        "--train-features",
        &s(&train_csv),
        "--test-features",
        &s(&test_csv),
        "--out",
        &s(&eval_b),
        "--reps",
        "5",
        "--rounds",
        "5",
        "--seed",
        "9",
        "--compare-with",
        &s(&eval_a),
    ]);
    let n: usize = field(&stdout, "n").parse().unwrap();
    assert!(n <= 5);
    let p: f64 = field(&stdout, "p").parse().unwrap();
    assert!((0.0..=1.0).contains(&p));

    // Tune over a tiny grid.
    let cv = dir.path().join("cv.csv");
    let stdout = ok(&[
        "tune",
        "--features",
        &s(&train_csv),
        "--out",
        &s(&cv),
        "--folds",
        "2",
        "--rounds-grid",
        "5,10",
        "--depth-grid",
        "1,2",
    ]);
    let rounds: usize = field(&stdout, "rounds").parse().unwrap();
    assert!(rounds == 5 || rounds == 10);
    let cv_text = std::fs::read_to_string(&cv).unwrap();
    assert!(cv_text.starts_with("rounds,max_depth,mean_dsc,fold_0,fold_1\n"));
    assert_eq!(cv_text.lines().count(), 1 + 4);

    // Render every kind of picture.
    let diagram_in = s(&diagram_csv);
    let diagram_png = s(&dir.path().join("diagram.png"));
    let train_in = s(&train_csv);
    let pi_png = s(&dir.path().join("pi.png"));
    let model_in = s(&model);
    let importance_png = s(&dir.path().join("importance.png"));
    let fisher_png = s(&dir.path().join("fisher.png"));
    let depth_in = s(&maps.join("map_00_depth.png"));
    let mask_in = s(&maps.join("map_00_mask.png"));
    let overlay_png = s(&dir.path().join("overlay.png"));
    let renders: [&[&str]; 5] = [
        &[
            "render",
            "diagram",
            "--diagram",
            &diagram_in,
            "--out",
            &diagram_png,
            "--size",
            "128",
        ],
        &[
            "render",
            "grid",
            "--features",
            &train_in,
            "--row",
            "0",
            "--prefix",
            "pi_",
            "--out",
            &pi_png,
        ],
        &[
            "render",
            "importance",
            "--model",
            &model_in,
            "--prefix",
            "pi_",
            "--out",
            &importance_png,
        ],
        &[
            "render",
            "fisher",
            "--features",
            &train_in,
            "--prefix",
            "pi_",
            "--out",
            &fisher_png,
        ],
        &[
            "render",
            "overlay",
            "--depth",
            &depth_in,
            "--mask",
            &mask_in,
            "--out",
            &overlay_png,
        ],
    ];
    for args in renders {
        let stdout = ok(args);
        let out = Path::new(field(&stdout, "out"));
        assert!(out.is_file(), "missing render output {}", out.display());
    }

    // Replay the extract sidecar and confirm the result is bit-identical.
    let sidecar = dir.path().join("train.csv.conf");
    assert!(sidecar.is_file());
    let before = std::fs::read(&train_csv).unwrap();
    std::fs::remove_file(&train_csv).unwrap();
    ok(&["rerun", "--config", &s(&sidecar)]);
    assert_eq!(std::fs::read(&train_csv).unwrap(), before);
}

#[test]
fn failures_exit_nonzero_with_single_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let model = dir.path().join("model.json");
    let r = run(&["train", "--features", &s(&missing), "--model", &s(&model)]);
    assert!(!r.ok);
    assert!(r.stderr.starts_with("error: "), "stderr: {}", r.stderr);
    assert_eq!(r.stderr.trim_end().lines().count(), 1);
}

#[test]
fn mask_count_must_match_depth_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let m = dir.path().join("m.png");
    std::fs::write(&a, "0.0 1.0\n0.5 0.25\n").unwrap();
    std::fs::write(&b, "0.0 1.0\n0.5 0.25\n").unwrap();
    std::fs::write(&m, "not really a png").unwrap();
    let r = run(&[
        "extract",
        "--depth",
        &s(&a),
        "--depth",
        &s(&b),
        "--mask",
        &s(&m),
        "--format",
        "text",
        "--out",
        &s(&dir.path().join("out.csv")),
    ]);
    assert!(!r.ok);
    assert!(
        r.stderr.contains("2 depth maps but 1 masks"),
        "{}",
        r.stderr
    );
}

#[test]
fn rerun_refuses_nested_rerun_and_bad_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("nested.conf");
    std::fs::write(
        &nested,
        "command=rerun\narg0=rerun\narg1=--config\narg2=/nowhere.conf\n",
    )
    .unwrap();
    let r = run(&["rerun", "--config", &s(&nested)]);
    assert!(!r.ok);
    assert!(r.stderr.contains("refusing to replay"), "{}", r.stderr);

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "arg0=extract\n").unwrap();
    let r = run(&["rerun", "--config", &s(&bad)]);
    assert!(!r.ok, "sidecar without command key must fail");

    let unparsable = dir.path().join("unparsable.conf");
    std::fs::write(
        &unparsable,
        "command=extract\narg0=extract\narg1=--no-such-flag\n",
    )
    .unwrap();
    let r = run(&["rerun", "--config", &s(&unparsable)]);
    assert!(!r.ok);
    assert!(r.stderr.contains("does not parse"), "stderr: {}", r.stderr);
}

#[test]
fn text_matrix_extraction_without_mask_gives_unlabeled_rows() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("tiny.txt");
    // 4x4 gradient, plenty for a single 4x4 patch.
    let mut text = String::new();
    for r in 0..4 {
        for c in 0..4 {
            text.push_str(&format!("{} ", (r * 4 + c) as f64 / 16.0));
        }
        text.push('\n');
    }
    std::fs::write(&map, text).unwrap();
    let out = dir.path().join("tiny.csv");
    let stdout = ok(&[
        "extract",
        "--depth",
        &s(&map),
        "--format",
        "text",
        "--out",
        &s(&out),
        "--patch-size",
        "4",
        "--patch-step",
        "4",
        "--pi-resolution",
        "4",
        "--pd-agg",
        "false",
    ]);
    assert_eq!(field(&stdout, "rows"), "1");
    assert_eq!(field(&stdout, "features"), "16");
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().nth(1).unwrap();
    // Unlabeled rows carry the -1 sentinels.
    assert!(row.starts_with("tiny,0,0,-1,-1,"), "row: {row}");
}
