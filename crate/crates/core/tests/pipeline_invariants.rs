use hpm_core::hypermodel::{HyperModel, TargetKind, UnderdeterminedPolicy};
use hpm_core::numeric::{linspace, Matrix};
use hpm_core::pipeline::{hm_baseline, hpm, hpm2, Method, ShapeConfig};
use hpm_core::regressors::{Regressor, RegressorFamily};
use hpm_core::ssm::ComponentSelection;
use hpm_core::{Condition, Error, SourceTask};
use proptest::prelude::*;

fn line_task(id: &str, c: f64) -> SourceTask {
    // y = (1 + c) + (2 − c)·x, linear in the condition.
    let r = Regressor::from_coefficients(RegressorFamily::Polynomial { degree: 1 }, vec![1.0 + c, 2.0 - c]).unwrap();
    SourceTask::new(id, r, Condition::new([c]))
}

fn line_tasks() -> Vec<SourceTask> {
    [0.0, 1.0, 2.0, 3.0].iter().map(|&c| line_task(&format!("t{c}"), c)).collect()
}

fn shape_config(hyper_degree: usize) -> ShapeConfig {
    ShapeConfig {
        landmarks: 11,
        selection: ComponentSelection::Count(1),
        hyper_degree,
        policy: UnderdeterminedPolicy::Reject,
        new_model_family: RegressorFamily::Polynomial { degree: 1 },
    }
}

#[test]
fn hm_and_hpm_agree_on_linear_tasks() {
    let tasks = line_tasks();
    let target = Condition::new([1.5]);
    let hm = hm_baseline(&tasks, &target, 1, UnderdeterminedPolicy::Reject).unwrap();
    let shape = hpm(&tasks, &target, &[0.0], &[1.0], shape_config(1)).unwrap();
    let x = linspace(0.0, 1.0, 11).unwrap();
    let (a, b) = (hm.regressor.predict(&x).unwrap(), shape.regressor.predict(&x).unwrap());
    for ((p, q), x) in a.iter().zip(&b).zip(&x) {
        let truth = 2.5 + 0.5 * x;
        assert!((p - truth).abs() < 1e-10 && (q - truth).abs() < 1e-10);
    }
    assert_eq!(hm.provenance.method, Method::Hm);
    assert_eq!(shape.provenance.method, Method::Hpm);
}

#[test]
fn hpm2_with_shared_ranges_matches_hpm() {
    let tasks = line_tasks();
    let target = Condition::new([2.5]);
    let n = tasks.len();
    let min = Matrix::from_rows(&vec![vec![0.0]; n]).unwrap();
    let max = Matrix::from_rows(&vec![vec![1.0]; n]).unwrap();
    let a = hpm(&tasks, &target, &[0.0], &[1.0], shape_config(1)).unwrap();
    let b = hpm2(&tasks, &target, &min, &max, shape_config(1)).unwrap();
    let x = linspace(0.0, 1.0, 11).unwrap();
    for (p, q) in a.regressor.predict(&x).unwrap().iter().zip(b.regressor.predict(&x).unwrap()) {
        assert!((p - q).abs() < 1e-9);
    }
    let inputs = b.inputs.unwrap();
    for (g, want) in inputs.iter().zip(&x) {
        assert!((g - want).abs() < 1e-12);
    }
    assert!(!b.provenance.non_monotone_inputs);
}

#[test]
fn hpm2_interpolates_input_ranges() {
    let flat = Regressor::from_coefficients(RegressorFamily::Polynomial { degree: 1 }, vec![1.0, 0.0]).unwrap();
    let tasks = vec![
        SourceTask::new("a", flat.clone(), Condition::new([0.0])),
        SourceTask::new("b", flat, Condition::new([1.0])),
    ];
    let min = Matrix::from_rows(&[vec![0.0], vec![0.0]]).unwrap();
    let max = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
    let g = hpm2(&tasks, &Condition::new([0.5]), &min, &max, shape_config(1)).unwrap();
    let x = g.inputs.unwrap();
    assert!(x[0].abs() < 1e-12);
    assert!((x[x.len() - 1] - 1.5).abs() < 1e-12);
}

#[test]
fn two_identical_sources_generate_the_shared_curve() {
    let r = Regressor::from_coefficients(RegressorFamily::Polynomial { degree: 2 }, vec![0.5, -1.0, 3.0]).unwrap();
    let tasks = vec![
        SourceTask::new("a", r.clone(), Condition::new([0.0, 1.0])),
        SourceTask::new("b", r.clone(), Condition::new([2.0, 5.0])),
    ];
    let config = ShapeConfig {
        landmarks: 20,
        selection: ComponentSelection::Count(1),
        hyper_degree: 1,
        policy: UnderdeterminedPolicy::MinimumNorm,
        new_model_family: RegressorFamily::Polynomial { degree: 2 },
    };
    let g = hpm(&tasks, &Condition::new([7.0, -3.0]), &[0.0], &[1.0], config).unwrap();
    let x = linspace(0.0, 1.0, 20).unwrap();
    for (p, q) in g.regressor.predict(&x).unwrap().iter().zip(r.predict(&x).unwrap()) {
        assert!((p - q).abs() < 1e-9);
    }
}

#[test]
fn hm_rejects_mixed_families() {
    let mut tasks = line_tasks();
    tasks[1].regressor = Regressor::from_coefficients(RegressorFamily::Gaussian, vec![1.0, 0.5, 0.1]).unwrap();
    let err = hm_baseline(&tasks, &Condition::new([1.0]), 1, UnderdeterminedPolicy::Reject).unwrap_err();
    assert!(matches!(err, Error::HeterogeneousFamilies { .. }), "{err:?}");
}

#[test]
fn target_dimension_must_match_sources() {
    let err = hpm(&line_tasks(), &Condition::new([1.0, 2.0]), &[0.0], &[1.0], shape_config(1)).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { .. }), "{err:?}");
}

#[test]
fn hyper_model_interpolates_when_square() {
    // Six conditions in 2-D and degree 2 give exactly six features.
    let conds: Vec<Condition> = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (2.0, 1.0), (1.0, 3.0), (3.0, 2.0)]
        .iter()
        .map(|&(a, b)| Condition::new([a, b]))
        .collect();
    let targets = Matrix::from_rows(
        &conds
            .iter()
            .map(|c| vec![c.0[0].sin(), (c.0[1] * 0.7).cos() + c.0[0]])
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let h = HyperModel::train(&conds, &targets, 2, TargetKind::DeformableParams, UnderdeterminedPolicy::Reject).unwrap();
    for (i, c) in conds.iter().enumerate() {
        let got = h.generate_params(c).unwrap();
        for (k, g) in got.iter().enumerate() {
            assert!((g - targets[(i, k)]).abs() <= 1e-8);
        }
    }
}

fn hyper_inputs() -> impl Strategy<Value = (Vec<Condition>, Matrix)> {
    (4usize..10).prop_flat_map(|n| {
        (
            prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), n),
            prop::collection::vec(-5.0..5.0f64, n * 3),
        )
            .prop_map(move |(c, t)| {
                (
                    c.into_iter().map(|(a, b)| Condition::new([a, b])).collect(),
                    Matrix::from_row_major(n, 3, t).unwrap(),
                )
            })
    })
}

proptest! {
    #[test]
    fn per_output_fits_are_independent((conds, targets) in hyper_inputs()) {
        let perm = [2, 0, 1];
        let permuted = Matrix::from_columns(&perm.iter().map(|&k| targets.column(k)).collect::<Vec<_>>()).unwrap();
        let kind = TargetKind::ModelCoefficients;
        let a = HyperModel::train(&conds, &targets, 1, kind, UnderdeterminedPolicy::MinimumNorm).unwrap();
        let b = HyperModel::train(&conds, &permuted, 1, kind, UnderdeterminedPolicy::MinimumNorm).unwrap();
        for (j, &k) in perm.iter().enumerate() {
            prop_assert_eq!(&b.per_output()[j], &a.per_output()[k]);
            prop_assert_eq!(b.r2_per_output()[j], a.r2_per_output()[k]);
        }
    }

    #[test]
    fn r2_never_exceeds_one((conds, targets) in hyper_inputs(), degree in 1usize..4) {
        let h = HyperModel::train(&conds, &targets, degree, TargetKind::DeformableParams, UnderdeterminedPolicy::MinimumNorm).unwrap();
        for r2 in h.r2_per_output() {
            prop_assert!(*r2 <= 1.0 + 1e-12);
        }
        let again = HyperModel::train(&conds, &targets, degree, TargetKind::DeformableParams, UnderdeterminedPolicy::MinimumNorm).unwrap();
        prop_assert_eq!(h, again);
    }
}
