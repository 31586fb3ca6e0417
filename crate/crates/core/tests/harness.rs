use lbsim::batch::{jobs, run_points, run_sequential};
use lbsim::preset::{preset, Preset, PRESET_NAMES};
use lbsim::report::{finalize, output_paths};
use lbsim::sim::run_scenario;
use lbsim::sweep::{expand, Axis};

fn tiny() -> Preset {
    let mut p = preset("smoke_k4").unwrap().with_seeds(&[1, 2]);
    p.points.truncate(3);
    for pt in &mut p.points {
        pt.scenario.workload.message_packets = 30;
    }
    p
}

#[test]
fn presets_share_seed_lists_within_a_preset() {
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let first = &p.points[0].scenario.seeds;
        assert!(p.points.iter().all(|x| &x.scenario.seeds == first), "{name}");
    }
}

#[test]
fn paper_grid_shapes() {
    assert_eq!(preset("fig4_failures").unwrap().points.len(), 3 * 7);
    assert_eq!(preset("fig1_rate_sweep").unwrap().points.len(), 2 * 10);
    let fig11 = preset("fig11_subflows").unwrap();
    assert!(fig11.points.iter().all(|p| p.scenario.workload.m <= 40));
    let sf: Vec<u32> = fig11
        .points
        .iter()
        .filter(|p| p.label.ends_with("sf_t3"))
        .map(|p| p.scenario.subflow_count())
        .collect();
    assert_eq!(sf.first(), Some(&11));
    assert_eq!(sf.last(), Some(&1));
    let big = preset("fig7_bigbuffer").unwrap();
    assert!(big.points.iter().all(|p| p.scenario.topology.buffer_bytes == 409_600));
}

#[test]
fn parallel_and_sequential_agree() {
    let p = tiny();
    let seq = run_sequential(&p.points, &|_| {});
    let par = run_points(&p.points, 0, &|_| {});
    assert_eq!(seq.len(), jobs(&p.points).len());
    for (a, b) in seq.iter().zip(&par) {
        assert_eq!((a.point, a.seed), (b.point, b.seed));
        assert_eq!(a.outcome.as_ref().unwrap(), b.outcome.as_ref().unwrap());
    }
}

#[test]
fn single_value_sweep_matches_direct_run() {
    let p = tiny();
    let axis: Axis = "rate_coefficient=1.0".parse().unwrap();
    let swept = expand(&p, &[axis]).unwrap();
    assert_eq!(swept.points.len(), p.points.len());
    for (a, b) in p.points.iter().zip(&swept.points) {
        assert_eq!(a.scenario, b.scenario);
        assert_eq!(run_scenario(&a.scenario, 1).unwrap(), run_scenario(&b.scenario, 1).unwrap());
    }
}

#[test]
fn sweeping_scheme_tags_switches_variants() {
    let p = tiny();
    let axis: Axis = "lb.scheme=ecmp,plb,flowlet_ar".parse().unwrap();
    let swept = expand(&p, &[axis]).unwrap();
    let names: Vec<_> = swept.points.iter().take(3).map(|x| x.scenario.lb.name()).collect();
    assert_eq!(names, ["ecmp", "plb", "flowlet_ar"]);
}

#[test]
fn csv_files_cover_every_run() {
    let p = tiny();
    let recs = run_points(&p.points, 1, &|_| {});
    let dir = tempfile::tempdir().unwrap();
    finalize(dir.path(), &p, &recs).unwrap();
    let (runs, agg) = output_paths(dir.path(), &p.name);
    let n_runs = csv::Reader::from_path(runs).unwrap().records().count();
    let n_agg = csv::Reader::from_path(agg).unwrap().records().count();
    assert_eq!(n_runs, p.total_runs());
    assert_eq!(n_agg, p.points.len());
}
