use std::fs::File;
use std::io::BufReader;

use che::experiment::write_sweep_csv;
use che::{generate_trace, run_sweep, CanonicalIntensity, ExperimentConfig, RequestTrace};

#[test]
fn trace_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let t = generate_trace(30.0, &CanonicalIntensity::lomax_reference(), (0.0, 4.0), 12).unwrap();
    t.write_csv(File::create(&path).unwrap()).unwrap();
    let back = RequestTrace::read_csv(BufReader::new(File::open(&path).unwrap()), Some(t.window())).unwrap();
    assert_eq!(back.events(), t.events());
}

#[test]
fn small_sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("sweep.conf");
    std::fs::write(
        &cfg_path,
        "# small grid\ngamma_list = 20, 40\ncapacity_list = 1, 4\nreplications = 3\nseed = 5\nsim_time = 30\nexact = false\n",
    )
    .unwrap();
    let cfg = ExperimentConfig::from_file(&cfg_path).unwrap();
    let res = run_sweep(&cfg).unwrap();
    assert!(res.failures.is_empty());
    assert_eq!(res.rows.len(), 4);
    for r in &res.rows {
        assert!((0.0..=1.0).contains(&r.emp_hit));
        assert_eq!(r.n_reps, 3);
        assert!((r.theta - r.capacity as f64 / r.gamma).abs() < 1e-12);
    }
    assert!(res.rows.iter().all(|r| r.exact_hit.is_nan()));

    let csv = |rows| {
        let mut out = Vec::new();
        write_sweep_csv(&mut out, rows).unwrap();
        String::from_utf8(out).unwrap()
    };
    let text = csv(&res.rows);
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text, csv(&run_sweep(&cfg).unwrap().rows));
}
