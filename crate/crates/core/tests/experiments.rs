use std::fs;
use std::path::Path;

use odeheat::experiments::{
    parse_summary, preset, presets::preset_json, run_config, run_experiment, run_preset,
    ExperimentConfig,
};
use odeheat::{Coupling, Error, Execution, SpaceTimeGrid, StateSpace};

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn test1_preset_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_preset("test1", Some(tmp.path()), Execution::default()).unwrap();
    for f in [
        "summary.csv",
        "control.csv",
        "state_y.csv",
        "state_z.csv",
        "norms_over_time.csv",
        "config.json",
    ] {
        assert!(tmp.path().join(f).is_file(), "{f}");
    }
    assert!(!tmp.path().join("boundary_control.csv").exists());

    let rows = parse_summary(&read(tmp.path(), "summary.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    assert_eq!(eps, vec![1e-1, 1e-2, 1e-3, 1e-4]);
    assert!(rows
        .windows(2)
        .all(|w| w[1].norm_y_final < w[0].norm_y_final));
    assert!(report.unconverged().is_empty());

    let y = read(tmp.path(), "state_y.csv");
    let mut lines = y.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 32);
    assert_eq!(lines.count(), 121);
    assert!(!y.contains('\r'));

    let control = read(tmp.path(), "control.csv");
    let header: Vec<&str> = control.lines().next().unwrap().split(',').collect();
    assert_eq!(header[0], "t");
    assert_eq!(
        header[1..],
        ["9", "10", "11", "12", "13", "14", "15", "16", "17", "18", "19", "20", "21"]
    );
}

#[test]
fn emitted_norms_are_recomputable_from_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    run_preset("test2", Some(tmp.path()), Execution::default()).unwrap();
    let grid = SpaceTimeGrid::new(1.0, 0.6, 30, 120).unwrap();
    let space = StateSpace::new(&grid, &Coupling::new(1.0, 1.0).unwrap());

    let ys = csv_rows(&read(tmp.path(), "state_y.csv"));
    let zs = csv_rows(&read(tmp.path(), "state_z.csv"));
    let norms = csv_rows(&read(tmp.path(), "norms_over_time.csv"));
    assert_eq!(ys.len(), 121);
    for ((y, z), n) in ys.iter().zip(&zs).zip(&norms) {
        assert_eq!(y[0], n[0]);
        let ny = space.field_norm(&y[1..]);
        let h = (ny * ny + z[1] * z[1]).sqrt();
        for (got, want) in [(n[1], ny), (n[2], z[1].abs()), (n[3], h)] {
            assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1e-300),
                "{got} vs {want}"
            );
        }
    }

    // Final-time and control norms agree with the summary to its printed precision.
    let summary = parse_summary(&read(tmp.path(), "summary.csv")).unwrap();
    let last = summary.last().unwrap();
    let fin = norms.last().unwrap();
    assert!((fin[1] - last.norm_y_final).abs() <= 5e-6 * last.norm_y_final);
    assert!((fin[2] - last.abs_z_final).abs() <= 5e-6 * last.abs_z_final);

    let control = csv_rows(&read(tmp.path(), "control.csv"));
    let header = read(tmp.path(), "control.csv");
    let nodes: Vec<usize> = header
        .lines()
        .next()
        .unwrap()
        .split(',')
        .skip(1)
        .map(|s| s.parse().unwrap())
        .collect();
    let region = odeheat::ControlRegion::new(0.3, 0.7, &grid).unwrap();
    let tw = grid.time_weights(1.0);
    let sw = grid.space_weights();
    let mut total = 0.0;
    for (n, row) in control.iter().enumerate() {
        for (k, &j) in nodes.iter().enumerate() {
            total += tw[n] * sw[j] * region.mask()[j] * row[k + 1] * row[k + 1];
        }
    }
    assert!((total.sqrt() - last.norm_control).abs() <= 5e-6 * last.norm_control);
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let cfg = preset("test3").unwrap();
    let ra = run_experiment(&cfg, a.path(), Execution::Parallel).unwrap();
    run_experiment(&cfg, b.path(), Execution::Parallel).unwrap();
    run_experiment(&cfg, c.path(), Execution::Sequential).unwrap();
    for f in &ra.files {
        let name = f.file_name().unwrap();
        let first = fs::read(f).unwrap();
        assert_eq!(first, fs::read(b.path().join(name)).unwrap(), "{name:?}");
        assert_eq!(first, fs::read(c.path().join(name)).unwrap(), "{name:?}");
    }
}

#[test]
fn config_file_matches_preset() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("test1.json");
    fs::write(&path, preset_json("test1").unwrap()).unwrap();
    let from_file =
        run_config(&path, Some(&tmp.path().join("file")), Execution::default()).unwrap();
    let from_preset = run_preset(
        "test1",
        Some(&tmp.path().join("preset")),
        Execution::default(),
    )
    .unwrap();
    assert_eq!(
        fs::read(from_file.out_dir.join("summary.csv")).unwrap(),
        fs::read(from_preset.out_dir.join("summary.csv")).unwrap()
    );
    // The echoed config re-runs to the same result as well.
    let echoed = tmp.path().join("file").join("config.json");
    let again = run_config(
        &echoed,
        Some(&tmp.path().join("again")),
        Execution::default(),
    )
    .unwrap();
    assert_eq!(
        fs::read(again.out_dir.join("summary.csv")).unwrap(),
        fs::read(from_preset.out_dir.join("summary.csv")).unwrap()
    );
}

#[test]
fn halving_the_time_steps_changes_test1_norms_by_less_than_ten_percent() {
    let cfg = preset("test1").unwrap();
    let mut coarse = cfg.clone();
    coarse.grid.nt /= 2;
    let tmp = tempfile::tempdir().unwrap();
    let fine = run_experiment(&cfg, &tmp.path().join("fine"), Execution::default()).unwrap();
    let half = run_experiment(&coarse, &tmp.path().join("half"), Execution::default()).unwrap();
    for (f, h) in fine.rows.iter().zip(&half.rows) {
        for (a, b) in [
            (h.norm_y_final, f.norm_y_final),
            (h.abs_z_final, f.abs_z_final),
            (h.norm_control, f.norm_control),
        ] {
            assert!((a - b).abs() <= 0.1 * b, "eps {}: {a} vs {b}", f.epsilon);
        }
    }
}

#[test]
fn bad_inputs_are_reported() {
    assert!(matches!(
        run_preset("bogus", None, Execution::Sequential),
        Err(Error::UnknownPreset(_))
    ));

    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = preset("test1").unwrap();
    cfg.problem.mu = -1.0;
    let path = tmp.path().join("bad.json");
    fs::write(&path, cfg.to_json()).unwrap();
    let err = run_config(&path, Some(tmp.path()), Execution::Sequential).unwrap_err();
    assert!(matches!(err, Error::Validation(_)));
    assert!(err.to_string().contains("mu * kappa > 0"), "{err}");
    assert!(!tmp.path().join("summary.csv").exists());

    let broken = preset_json("test1")
        .unwrap()
        .replace("\"nt\": 120", "\"nt\": 120,,");
    fs::write(&path, broken).unwrap();
    match run_config(&path, None, Execution::Sequential) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }

    let unknown = preset_json("test1")
        .unwrap()
        .replace("\"tol\"", "\"tolerance\"");
    assert!(matches!(
        ExperimentConfig::from_json(&unknown),
        Err(Error::Parse { .. })
    ));

    assert!(matches!(
        run_config(
            &tmp.path().join("missing.json"),
            None,
            Execution::Sequential
        ),
        Err(Error::Io { .. })
    ));

    // A regular file where the output directory should be.
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let err = run_preset("test1", Some(&blocker.join("out")), Execution::Sequential).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn test3_writes_boundary_files() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_preset("test3", Some(tmp.path()), Execution::default()).unwrap();
    let u = csv_rows(&read(tmp.path(), "boundary_control.csv"));
    assert_eq!(u.len(), 121);
    assert!(u.iter().all(|r| r[1].is_finite()));
    // Trajectory files describe the re-solve on (0, ell).
    let y = read(tmp.path(), "state_y.csv");
    assert_eq!(y.lines().next().unwrap().split(',').count(), 32);

    let ver = read(tmp.path(), "verification.csv");
    assert_eq!(ver.lines().count(), 5);
    for (row, entry) in csv_rows(&ver).iter().zip(&report.entries) {
        let b = entry.boundary.as_ref().unwrap();
        assert!(row[8] < 1e-10, "restriction gap {}", row[8]);
        assert!((row[4] - b.verification.norm_control).abs() <= 5e-6 * row[4]);
    }
}
