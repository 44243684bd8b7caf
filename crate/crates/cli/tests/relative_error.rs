//! On Pareto(1.5) at n = 1000 the change of scale pays off: the Bregman
//! estimates have smaller relative mean squared error than the classical one.

use std::path::Path;

use bregman_cli::cache::OracleCache;
use bregman_cli::convergence::run_convergence;
use bregman_cli::manifest::ManifestSource;

#[test]
fn bregman_estimates_beat_classical_on_heavy_tails() {
    let m = ManifestSource::parse(
        "distribution = pareto:1.5\nmeasures = superquantile, geometric, harmonic\nn_grid = 1000\nrepetitions = 200\nreference_n = 100000\nmaster_seed = 31\nscale = 1\n",
        Path::new("."),
    )
    .and_then(|s| s.resolve())
    .unwrap();
    let run = run_convergence(&m, &mut OracleCache::default()).unwrap();
    let rel_mse = |measure: &str| {
        let truth = run.summary.reference_for(measure).unwrap().reference;
        let errs: Vec<f64> = run
            .records
            .iter()
            .filter(|r| r.measure == measure)
            .map(|r| ((r.estimate.unwrap() - truth) / truth).powi(2))
            .collect();
        errs.iter().sum::<f64>() / errs.len() as f64
    };
    let classical = rel_mse("superquantile");
    let geometric = rel_mse("geometric");
    let harmonic = rel_mse("harmonic");
    assert!(geometric < classical, "geometric {geometric} vs classical {classical}");
    assert!(harmonic < classical, "harmonic {harmonic} vs classical {classical}");
}
