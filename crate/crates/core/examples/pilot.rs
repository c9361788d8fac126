//! Pilot campaign at the reference desk configuration: estimates the
//! free-energy rate, variance ratios, and moment shapes that the acceptance
//! bands depend on. Run: cargo run --release -p polymerlab-core --example pilot -- [N]

use polymerlab_core::config::ExperimentConfig;
use polymerlab_core::ensemble::{estimate_gamma, run_ensemble};
use polymerlab_core::stats::SampleMoments;
use std::time::Instant;

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let mut cfg = ExperimentConfig::desk_default();
    cfg.ensemble.n_realizations = n;
    cfg.validate().unwrap();

    // timing: one realization at T = 200
    let t0 = Instant::now();
    let _ = run_ensemble(&cfg, 200.0, 900_000, 1).unwrap();
    println!("one T=200 realization: {:.3} s", t0.elapsed().as_secs_f64());

    let mut per_t = Vec::new();
    let mut summaries = Vec::new();
    for (i, &t) in cfg.domain.t_grid.clone().iter().enumerate() {
        let t0 = Instant::now();
        let res = run_ensemble(&cfg, t, (i * n) as u64, n).unwrap();
        let s = res.summary.clone();
        let threshold = cfg.ensemble.boundary_mass_threshold;
        let logz: Vec<f64> = res.used_values(threshold, |r| r.log_z_t);
        let o: Vec<f64> = res.used_values(threshold, |r| r.o_t);
        let m: Vec<f64> = res.used_values(threshold, |r| r.m_t);
        let mo = SampleMoments::of(&o);
        let ml = SampleMoments::of(&logz);
        let mm = SampleMoments::of(&m);
        println!(
            "T={t:>5}: {:.1}s N_used={} failed={} rejected={} boundary_max={:.3e}",
            t0.elapsed().as_secs_f64(),
            s.n_used(),
            s.n_failed,
            s.n_boundary_rejected,
            s.boundary.max
        );
        println!(
            "   mean logZ {:+.5} (se {:.5})  Var logZ {:.5}  Var/T {:.6}  Var logT/T {:.6}",
            ml.mean,
            ml.se_mean(),
            ml.variance,
            ml.variance / t,
            ml.variance * t.ln() / t
        );
        println!(
            "   mean O {:.5} (se {:.5})  Var O {:.5}  skew(O) {:+.4}  exkurt(O) {:+.4}",
            mo.mean,
            mo.se_mean(),
            mo.variance,
            mo.skewness,
            mo.excess_kurtosis
        );
        println!(
            "   mean M {:+.5}  Var M {:.5}  skew(M/sqrtT) {:+.4}  mean M^2+2logZ {:+.6} (se {:.6})",
            mm.mean,
            mm.variance,
            mm.skewness,
            s.m_identity_diff.mean,
            s.m_identity_diff.se_mean()
        );
        println!(
            "   mean |residual| {:.6}  mean residual {:+.6}",
            s.abs_residual.mean, s.residual.mean
        );
        per_t.push((t, s.log_z));
        summaries.push((t, mo, mm, ml));
    }
    let gamma = estimate_gamma(&per_t).unwrap();
    let (lo, hi) = gamma.ci95();
    println!(
        "gamma_hat = {:.6e} (se {:.2e}) CI95 [{:.6e}, {:.6e}] intercept {:+.4}",
        gamma.gamma_hat, gamma.se, lo, hi, gamma.intercept
    );
    for (t, mo, mm, _ml) in &summaries {
        let beta = cfg.beta;
        let denom_o = t * 8.0 * gamma.gamma_hat / beta.powi(4);
        let denom_m = 2.0 * gamma.gamma_hat * t;
        let a = mo.mean * beta * beta / (2.0 * t);
        println!(
            "T={t:>5}: VarO ratio {:.4}  VarM ratio {:.4}  meanO beta^2/2T = {:.6e} vs gamma (diff {:+.3e})",
            mo.variance / denom_o,
            mm.variance / denom_m,
            a,
            a - gamma.gamma_hat
        );
    }
}
