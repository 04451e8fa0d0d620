//! Power iteration and Hutchinson's estimator on operators whose spectrum is
//! planted through a random orthogonal basis.

use nalgebra::{DMatrix, DVector};
use sgdf_core::diagnostics::{hutchinson_trace, power_iterate, power_iteration_topk};
use sgdf_core::objectives::noisy_quadratic;
use sgdf_core::{ParamVector, RngStream, StochasticObjective};

const DIM: usize = 50;
const TOP: [f64; 5] = [50.0, 40.0, 30.0, 20.0, 10.0];

fn planted(seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let mut rng = RngStream::new(seed, 0);
    let gauss = DMatrix::from_fn(DIM, DIM, |_, _| rng.standard_normal());
    let qmat = gauss.qr().q();
    let mut eig: Vec<f64> = TOP.to_vec();
    eig.extend((0..DIM - TOP.len()).map(|_| rng.uniform_range(0.01, 5.0)));
    let h = &qmat * DMatrix::from_diagonal(&DVector::from_vec(eig.clone())) * qmat.transpose();
    (0.5 * (&h + h.transpose()), eig)
}

fn apply(h: &DMatrix<f64>) -> impl FnMut(&[f64]) -> Vec<f64> + '_ {
    move |v: &[f64]| (h * DVector::from_column_slice(v)).as_slice().to_vec()
}

#[test]
fn top_five_eigenvalues_of_planted_spectrum() {
    for seed in [1, 2, 3] {
        let (h, _) = planted(seed);
        let report = power_iteration_topk(apply(&h), DIM, 5, 10_000, 1e-10).unwrap();
        assert!(report.all_converged(), "{report:?}");
        for (got, want) in report.top_eigenvalues.iter().zip(TOP) {
            assert!(((got - want) / want).abs() <= 1e-6, "seed {seed}: {got} vs {want}");
        }
    }
}

#[test]
fn hutchinson_trace_of_planted_spectrum() {
    let (h, eig) = planted(11);
    let trace: f64 = eig.iter().sum();
    assert!((h.trace() - trace).abs() < 1e-9);
    let est = hutchinson_trace(apply(&h), DIM, 10_000, &mut RngStream::new(5, 0)).unwrap();
    assert!(((est.estimate - trace) / trace).abs() <= 0.02, "{est:?} vs {trace}");
    assert!((est.estimate - trace).abs() <= 5.0 * est.std_error);
}

#[test]
fn rayleigh_quotients_increase_on_planted_spectrum() {
    let (h, _) = planted(4);
    let est = power_iterate(&mut apply(&h), DIM, &[], 2_000, 1e-12, 0);
    for w in est.rayleigh_history.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn quadratic_hessian_through_its_hvp() {
    let eig: Vec<f64> = (1..=20).map(|i| i as f64).collect();
    let obj = noisy_quadratic(eig.clone(), 0.1).unwrap();
    let theta = ParamVector::zeros(20);
    let hvp = |v: &[f64]| {
        obj.hvp(&theta, &ParamVector::new(v.to_vec()).unwrap()).unwrap().unwrap().into_vec()
    };
    let report = power_iteration_topk(hvp, 20, 3, 10_000, 1e-10).unwrap();
    for (got, want) in report.top_eigenvalues.iter().zip([20.0, 19.0, 18.0]) {
        assert!(((got - want) / want).abs() <= 1e-6, "{got} vs {want}");
    }
    let mut rng = RngStream::new(0, 0);
    let est = hutchinson_trace(hvp, 20, 1, &mut rng).unwrap();
    assert_eq!(est.estimate, 210.0);
}
