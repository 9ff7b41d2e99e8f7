use cornerfem::analysis::{
    compare_run, comparative_error, convergence_study, fit_order, grid_for, max_error_evolution, ErrorField,
    ReferencePolicy, StudyOptions,
};
use cornerfem::fem::UniformMesh;
use cornerfem::problem::{presets, CorrectionLevel};
use cornerfem::timestep::{integrate_level, SolverOptions, TimeGrid};
use cornerfem::Error;
use proptest::prelude::*;

#[test]
fn self_comparison_is_zero() {
    let spec = presets::burgers_paper();
    let mesh = UniformMesh::new(32).unwrap();
    let grid = grid_for(&spec, 32, 0.25).unwrap();
    let h = integrate_level(&spec, CorrectionLevel::C1, &mesh, &grid, &SolverOptions::default()).unwrap();
    let e = comparative_error(&h, &h).unwrap();
    assert!(e.e.iter().flatten().all(|&x| x == 0.0));
    assert!(max_error_evolution(&e).iter().all(|&(_, m)| m == 0.0));
    assert_eq!(max_error_evolution(&e).len(), h.n_times());
}

#[test]
fn nesting_violations() {
    let spec = presets::burgers_paper();
    let opts = StudyOptions { n_ref: 1000, ..StudyOptions::default() };
    assert!(matches!(compare_run(&spec, CorrectionLevel::None, 48, &opts), Err(Error::IncompatibleGrids(_))));

    let opts = SolverOptions::default();
    let a = integrate_level(&spec, CorrectionLevel::None, &UniformMesh::new(48).unwrap(), &TimeGrid::new(1e-3, 0.05).unwrap(), &opts).unwrap();
    let b = integrate_level(&spec, CorrectionLevel::None, &UniformMesh::new(100).unwrap(), &TimeGrid::new(1e-3, 0.05).unwrap(), &opts).unwrap();
    assert!(matches!(comparative_error(&a, &b), Err(Error::IncompatibleGrids(_))));
    let c = integrate_level(&spec, CorrectionLevel::None, &UniformMesh::new(96).unwrap(), &TimeGrid::from_steps(75, 0.05).unwrap(), &opts).unwrap();
    assert!(matches!(comparative_error(&a, &c), Err(Error::IncompatibleGrids(_))));

    let table = convergence_study(&spec, CorrectionLevel::None, &[32, 64], &StudyOptions::default(), &mut |_| {});
    assert!(table.is_err());
    assert!(convergence_study(&spec, CorrectionLevel::None, &[64, 32, 128], &StudyOptions::default(), &mut |_| {}).is_err());
}

#[test]
fn reference_samples_coincident_values() {
    let spec = presets::burgers_paper();
    let opts = StudyOptions { n_ref: 128, ..StudyOptions::default() };
    let run = compare_run(&spec, CorrectionLevel::C1, 32, &opts).unwrap();
    assert_eq!(run.reference.n_times() - 1, 4 * (run.coarse.n_times() - 1));
    for (k, row) in run.error.e.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            assert_eq!(run.reference.mesh.node(4 * j), run.coarse.mesh.node(j));
            assert_eq!(e, (run.coarse.u[k][j] - run.reference.u[4 * k][4 * j]).abs());
        }
    }
}

#[test]
fn uncorrected_error_peaks_at_the_left_corner_early() {
    let spec = presets::burgers_paper();
    let run = compare_run(&spec, CorrectionLevel::None, 64, &StudyOptions::default()).unwrap();
    let (_, k, j) = run.error.peak();
    assert!(j <= 2, "peak at node {j}");
    let series = max_error_evolution(&run.error);
    let t_peak = series.iter().fold((0.0, 0.0), |best, &(t, m)| if m > best.1 { (t, m) } else { best }).0;
    assert!(t_peak <= 0.1 * spec.t_final(), "peak at t = {t_peak}");
    assert_eq!(series[k].0, t_peak);
}

#[test]
fn correction_reduces_the_max_error() {
    let spec = presets::burgers_paper();
    let opts = StudyOptions::default();
    let none = compare_run(&spec, CorrectionLevel::None, 128, &opts).unwrap().max_over_time();
    let c1 = compare_run(&spec, CorrectionLevel::C1, 128, &opts).unwrap().max_over_time();
    assert!(c1 <= none / 10.0, "C1 {c1}, None {none}");
}

#[test]
fn pinned_reference_uses_c2() {
    assert_eq!(ReferencePolicy::Pinned(CorrectionLevel::C2).level_for(CorrectionLevel::None), CorrectionLevel::C2);
    assert_eq!(ReferencePolicy::Same.level_for(CorrectionLevel::C1), CorrectionLevel::C1);
    let spec = presets::rd_cubic_paper();
    let opts = StudyOptions { n_ref: 128, reference: ReferencePolicy::Pinned(CorrectionLevel::C2), ..StudyOptions::default() };
    let run = compare_run(&spec, CorrectionLevel::None, 32, &opts).unwrap();
    assert_eq!(run.reference.correction.level, CorrectionLevel::C2);
}

#[test]
fn heat_study_is_second_order() {
    let spec = presets::heat_sine();
    // at dt_factor 0.25 the time and space errors nearly cancel
    let opts = StudyOptions { n_ref: 512, dt_factor: 0.1, ..StudyOptions::default() };
    let mut seen = Vec::new();
    let table = convergence_study(&spec, CorrectionLevel::None, &[16, 32, 64], &opts, &mut |r| seen.push(r.n)).unwrap();
    assert_eq!(seen, [16, 32, 64]);
    assert!((1.7..=2.3).contains(&table.order_final_time), "{}", table.order_final_time);
}

#[test]
fn final_errors_improve_with_the_level() {
    let opts = StudyOptions::default();
    for spec in [presets::burgers_paper(), presets::rd_cubic_paper()] {
        for n in [32, 64, 128, 256] {
            let e: Vec<f64> = CorrectionLevel::ALL
                .iter()
                .map(|&l| *max_error_evolution(&compare_run(&spec, l, n, &opts).unwrap().error).last().map(|(_, m)| m).unwrap())
                .collect();
            assert!(e[0] >= e[1] && e[1] >= e[2], "N = {n}: {e:?}");
        }
    }
}

#[test]
fn error_field_peak_on_synthetic_data() {
    let field = ErrorField {
        mesh: UniformMesh::new(4).unwrap(),
        times: vec![0.0, 0.5, 1.0],
        e: vec![vec![0.0; 5], vec![0.0, 0.1, 0.3, 0.2, 0.0], vec![0.0, 0.4, 0.0, 0.0, 0.0]],
    };
    assert_eq!(field.peak(), (0.4, 2, 1));
    assert_eq!(max_error_evolution(&field), vec![(0.0, 0.0), (0.5, 0.3), (1.0, 0.4)]);
}

proptest! {
    #[test]
    fn order_fit_recovers_power_laws(p in -1.0f64..4.0, c in 1e-3f64..1e3) {
        let dx: [f64; 4] = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
        let err: Vec<f64> = dx.iter().map(|d| c * d.powf(p)).collect();
        prop_assert!((fit_order(&dx, &err) - p).abs() <= 1e-10);
    }
}
