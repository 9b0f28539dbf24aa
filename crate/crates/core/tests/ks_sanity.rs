use topix::rng::CounterRng;
use topix::stats::{ks_statistic, normal_quantile};

#[test]
fn ks_accepts_inverse_cdf_normals() {
    let r = 1000;
    let seeds = 200u64;
    let critical = 1.63 / (r as f64).sqrt();
    let mut failures = 0;
    for seed in 0..seeds {
        let rng = CounterRng::new(seed);
        let z: Vec<f64> = (0..r as u64).map(|k| normal_quantile(rng.uniform_open(0, k))).collect();
        if ks_statistic(&z) > critical {
            failures += 1;
        }
    }
    // at least 99% of seeds pass
    assert!(failures * 100 <= seeds, "{failures} of {seeds} seeds rejected");
}
