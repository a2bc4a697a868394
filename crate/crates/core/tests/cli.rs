use std::path::Path;

use frame_importance::cli::dispatch;
use frame_importance::formats::{load_demos, load_map, parse_map_csv};

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = format!("out_dir={}", dir.display());
    let mut argv = vec!["frame-importance"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--set", &out]);
    dispatch(argv)
}

#[test]
fn run_writes_map_and_runlog() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("keydoor.cfg");
    std::fs::write(
        &cfg,
        "# fixture\nenv=keydoor\nlearner=bc_tabular\nH=4\nT=20\nG=5\nenv_params.random_start=true\n",
    )
    .unwrap();
    let code = run(
        dir.path(),
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--set",
            "level=50",
            "--set",
            "n_masks=20",
        ],
    );
    assert_eq!(code, 0);
    let map = load_map(&dir.path().join("map.csv")).unwrap();
    assert_eq!((map.rows(), map.cols()), (4, 5));
    let pgm = std::fs::read_to_string(dir.path().join("map.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n5 4\n255\n"));
    let log = std::fs::read_to_string(dir.path().join("runlog.csv")).unwrap();
    assert_eq!(log.lines().count(), 21);
    assert!(log.lines().skip(1).all(|l| l.split(',').nth(2) == Some("10")));
    let saved = std::fs::read_to_string(dir.path().join("config.txt")).unwrap();
    assert!(saved.contains("n_masks=20\n") && saved.contains("env_params.random_start=true\n"));
}

#[test]
fn runs_are_reproducible_and_accept_demo_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let args = [
        "--set",
        "H=3",
        "--set",
        "n_masks=15",
        "--set",
        "env_params.random_start=true",
    ];
    assert_eq!(run(&a, &[&["gen-demos"][..], &args].concat()), 0);
    let demos = load_demos(&a.join("demos.csv")).unwrap();
    assert_eq!((demos.rows(), demos.frames()), (3, 20));
    assert_eq!(run(&a, &[&["run"][..], &args].concat()), 0);
    assert_eq!(run(&b, &[&["run"][..], &args].concat()), 0);
    let demo_path = a.join("demos.csv");
    assert_eq!(
        run(
            &c,
            &[&["run", "--demos", demo_path.to_str().unwrap()][..], &args].concat()
        ),
        0
    );
    let read = |p: &Path| std::fs::read(p.join("map.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
}

#[test]
fn analysis_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let base = [
        "--set",
        "H=4",
        "--set",
        "n_masks=10",
        "--set",
        "env_params.random_start=true",
    ];
    let s0 = d.join("s0");
    let s1 = d.join("s1");
    assert_eq!(run(&s0, &[&["run"][..], &base].concat()), 0);
    assert_eq!(run(&s1, &[&["run", "--set", "seed=1"][..], &base].concat()), 0);
    let m0 = s0.join("map.csv");
    let m1 = s1.join("map.csv");
    let (m0s, m1s) = (m0.to_str().unwrap(), m1.to_str().unwrap());

    assert_eq!(run(d, &["combine", m0s, m1s]), 0);
    let combined = load_map(&d.join("map_combined.csv")).unwrap();
    let (a, b) = (load_map(&m0).unwrap(), load_map(&m1).unwrap());
    for i in 0..20 {
        assert!((combined.values()[i] - (a.values()[i] + b.values()[i]) / 2.0).abs() < 1e-12);
    }

    assert_eq!(run(d, &["compare", m0s, m0s]), 0);
    let dev = parse_map_csv(&std::fs::read_to_string(d.join("deviation.csv")).unwrap()).unwrap();
    assert!(dev.values().iter().all(|&v| v == 0.0));

    assert_eq!(
        run(
            d,
            &[&["curves", "--map", m0s, "--percents", "20,60"][..], &base].concat()
        ),
        0
    );
    let curves = std::fs::read_to_string(d.join("curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 5);
    assert!(curves.lines().nth(1).unwrap().starts_with("0,20,top,"));

    assert_eq!(
        run(
            d,
            &[&["transfer", "--source-map", m0s, "--target-map", m1s][..], &base].concat()
        ),
        0
    );
    let transfer = std::fs::read_to_string(d.join("transfer.csv")).unwrap();
    let conditions: Vec<&str> = transfer
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(conditions, ["source_top", "target_top", "random"]);

    assert_eq!(run(d, &[&["probe"][..], &base].concat()), 0);
    assert_eq!(
        std::fs::read_to_string(d.join("probe.csv"))
            .unwrap()
            .lines()
            .count(),
        11
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["run", "--set", "level=100"]), 1);
    assert_eq!(run(d, &["run", "--set", "G=7"]), 1);
    assert_eq!(run(d, &["run", "--set", "env=pong"]), 1);
    assert_eq!(run(d, &["run", "--config", "/nonexistent/x.cfg"]), 1);
    assert_eq!(run(d, &["run", "--set", "colour=red"]), 2);
    assert_eq!(run(d, &["run", "--set", "learner_params.momentum=1"]), 2);
    assert_eq!(run(d, &["run", "--set", "no-equals"]), 2);
    assert_eq!(run(d, &["frobnicate"]), 2);
    assert_eq!(dispatch(["frame-importance"]), 2);
    assert_eq!(dispatch(["frame-importance", "--help"]), 0);
    std::fs::write(d.join("bad.csv"), "1,2\n3\n").unwrap();
    let bad = d.join("bad.csv");
    assert_eq!(run(d, &["combine", bad.to_str().unwrap()]), 1);
}
