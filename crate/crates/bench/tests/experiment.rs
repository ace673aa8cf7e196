use ris_bench::plot::PlotData;
use ris_bench::{run_experiment, ExperimentConfig, Family, ResultTable, SeedLabel};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

fn run(text: &str) -> ResultTable {
    run_experiment(&config(text)).unwrap().results
}

#[test]
fn single_seed_single_point() {
    let t = run(r#"
family = "rate_vs_M"
sweep = [8]
n_seeds = 1
methods = ["practical_pgm"]
[pgm]
max_outer = 50
"#);
    let data: Vec<_> = t.data_rows().collect();
    assert_eq!(data.len(), 1);
    assert_eq!(data[0].seed, SeedLabel::Index(0));
    assert_eq!(data[0].metric, "csec");
    let means: Vec<_> = t.rows.iter().filter(|r| r.seed == SeedLabel::Mean).collect();
    assert_eq!(means.len(), 1);
    assert_eq!(means[0].value, data[0].value);
    // one seed has no standard error
    assert!(t.rows.iter().all(|r| r.seed != SeedLabel::Stderr));
    assert!(t.missing.is_empty());
}

#[test]
fn adding_seeds_leaves_existing_rows_alone() {
    let base = r#"
family = "rate_vs_power"
sweep = [10, 20]
master_seed = 3
methods = ["practical_pgm", "random_ris", "no_ris"]
[system]
m = 8
[pgm]
max_outer = 40
"#;
    let few = run(&format!("n_seeds = 2\n{base}"));
    let more = run(&format!("n_seeds = 4\n{base}"));
    let small: Vec<_> = few.data_rows().cloned().collect();
    let large: Vec<_> = more
        .data_rows()
        .filter(|r| matches!(r.seed, SeedLabel::Index(i) if i < 2))
        .cloned()
        .collect();
    assert_eq!(small.len(), 2 * 3 * 2);
    assert_eq!(small, large);
}

#[test]
fn rate_plot_arrays_follow_the_sweep() {
    let t = run(r#"
family = "rate_vs_M"
sweep = [4, 8, 16]
n_seeds = 3
methods = ["practical_pgm", "no_ris"]
[pgm]
max_outer = 60
"#);
    let plot = PlotData::from_table(&t, Family::RateVsM, "csec");
    assert_eq!(plot.series.len(), 2);
    for s in &plot.series {
        assert_eq!(s.xs, vec![4.0, 8.0, 16.0]);
        assert_eq!(s.means.len(), 3);
        assert_eq!(s.stderrs.len(), 3);
        for (x, m) in s.xs.iter().zip(&s.means) {
            assert_eq!(Some(*m), t.aggregate(*x, &s.method, "csec", SeedLabel::Mean));
        }
    }
    // the direct links are drawn from their own stream, so without the
    // surface the rate does not depend on M
    let no_ris = plot.series.iter().find(|s| s.method == "no_ris").unwrap();
    assert!(no_ris.means.iter().all(|m| (m - no_ris.means[0]).abs() <= 1e-12 * m.abs()));
}

#[test]
fn convergence_trace_has_one_series_per_method() {
    let t = run(r#"
family = "convergence_trace"
sweep = [0, 5, 10, 40]
n_seeds = 2
methods = ["practical_pgm", "cpdm"]
[system]
m = 8
[pgm]
max_outer = 40
"#);
    let plot = PlotData::from_table(&t, Family::ConvergenceTrace, "csec");
    let names: Vec<_> = plot.series.iter().map(|s| s.method.as_str()).collect();
    assert_eq!(names, ["cpdm", "practical_pgm"]);
    for s in &plot.series {
        assert_eq!(s.xs, vec![0.0, 5.0, 10.0, 40.0]);
        assert!(s.means.windows(2).all(|w| w[1] >= w[0]), "{}: {:?}", s.method, s.means);
    }
    for seed in 0..2 {
        let v: Vec<f64> = [0.0, 5.0, 10.0, 40.0]
            .iter()
            .map(|x| t.values(*x, "practical_pgm", "csec")[seed].1)
            .collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn runtime_family_reports_counts_and_timings() {
    let out = run_experiment(&config(
        r#"
family = "runtime_vs_M"
sweep = [4]
n_seeds = 2
methods = ["practical_pgm"]
timing_repeats = 1
[pgm]
max_outer = 30
"#,
    ))
    .unwrap();
    let metrics: std::collections::BTreeSet<_> = out.results.data_rows().map(|r| r.metric.as_str()).collect();
    assert_eq!(metrics.into_iter().collect::<Vec<_>>(), ["objective_evals", "outer_iterations"]);
    let times: Vec<_> = out.timings.data_rows().collect();
    assert_eq!(times.len(), 2);
    assert!(times.iter().all(|r| r.metric == "wall_time_s" && r.value >= 0.0));
}
