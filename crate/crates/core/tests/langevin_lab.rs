use sgdf_core::langevin::{
    analytic_stationary, count_crossings, langevin_sample, run_stationarity, Histogram, LangevinConfig, Potential1D,
};
use sgdf_core::RngStream;
use statrs::distribution::{ContinuousCDF, Normal};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn exact_gaussian_draws_sit_within_binning_tolerance() {
    // Calibrates the TV tolerance: i.i.d. N(0, 1) draws against the same bins.
    let pot = Potential1D::quadratic(-6.0, 6.0).unwrap();
    let analytic = analytic_stationary(&pot, 1.0, 48).unwrap();
    let mut rng = RngStream::new(3, 0);
    let draws: Vec<f64> = (0..1_000_000).map(|_| rng.standard_normal()).collect();
    let hist = Histogram::from_samples(-6.0, 6.0, 48, &draws).unwrap();
    let tv = sgdf_core::langevin::tv_distance(&hist.probabilities(), &analytic).unwrap();
    assert!(tv <= 0.005, "{tv}");
}

#[test]
fn analytic_gaussian_matches_erf() {
    let pot = Potential1D::quadratic(-6.0, 6.0).unwrap();
    let p = analytic_stationary(&pot, 2.0, 60).unwrap();
    let n = Normal::new(0.0, 2f64.sqrt()).unwrap();
    let z = n.cdf(6.0) - n.cdf(-6.0);
    for (i, m) in p.iter().enumerate() {
        let a = -6.0 + 0.2 * i as f64;
        assert!((m - (n.cdf(a + 0.2) - n.cdf(a)) / z).abs() <= 1e-9);
    }
}

#[test]
fn crossings_drop_as_diffusion_drops() {
    let pot = Potential1D::double_well(-2.5, 2.5).unwrap();
    let medians: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|&d| {
            let counts = (0..20)
                .map(|seed| {
                    let cfg = LangevinConfig {
                        diffusion: d,
                        floor: 0.25,
                        dt: 1e-3,
                        n_samples: 200_000,
                        burn_in: 0,
                        thin: 1,
                        initial: -1.0,
                    };
                    let s = langevin_sample(&pot, &cfg, &mut RngStream::new(seed, 1)).unwrap();
                    count_crossings(&s, 0.5) as f64
                })
                .collect();
            median(counts)
        })
        .collect();
    assert!(medians[2] > 0.0, "{medians:?}");
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}

#[test]
fn tv_shrinks_with_chain_length() {
    let pot = Potential1D::double_well(-2.5, 2.5).unwrap();
    let medians: Vec<f64> = [10_000usize, 100_000, 1_000_000]
        .iter()
        .map(|&n| {
            let tvs = (0..9)
                .map(|seed| {
                    let cfg = LangevinConfig {
                        diffusion: 0.5,
                        floor: 0.25,
                        dt: 1e-3,
                        n_samples: n,
                        burn_in: 1_000,
                        thin: 1,
                        initial: 0.0,
                    };
                    run_stationarity(&pot, &cfg, 40, &mut RngStream::new(seed, 2)).unwrap().tv_distance
                })
                .collect();
            median(tvs)
        })
        .collect();
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}

#[test]
fn report_is_consistent() {
    let pot = Potential1D::quadratic(-6.0, 6.0).unwrap();
    let cfg = LangevinConfig { diffusion: 1.0, floor: 0.5, dt: 1e-2, n_samples: 50_000, burn_in: 100, thin: 5, initial: 0.0 };
    let r = run_stationarity(&pot, &cfg, 30, &mut RngStream::new(1, 0)).unwrap();
    assert_eq!(r.samples, 50_000);
    assert_eq!(r.empirical_hist.iter().sum::<u64>(), 50_000);
    assert!((r.analytic_density.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((0.0..=1.0).contains(&r.tv_distance));
}
