//! The versioned acceptance manifest: fourteen deterministic checks with
//! fixed Monte Carlo sizes, seeds, and tolerances. Shared between the
//! `verify` CLI subcommand and the integration test suite so both run
//! exactly the same manifest.

use std::path::Path;
use std::process::Command;

use num_bigint::BigUint;

use crate::energy::make_model;
use crate::ensemble::{sample_batch, truncation_k};
use crate::error::Result;
use crate::oracles::{
    discrete_gaussian_norm, discrete_gaussian_tail, gamma_shape, gaussian_tail, ShapeOracle,
};
use crate::regime::classify;
use crate::scaling::make_plan;
use crate::series::{concentration_ratio, expected_mass, log_partition};
use crate::verify::{
    bell_number, check_divergence, check_poissonization, check_zero_shape, enumerate_profiles,
    estimate_curve, profile_log_weight, subsequence_profiles, sup_distance, test_poisson_counts,
    CurveKind,
};

pub const MANIFEST_VERSION: &str = "1";

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: &'static str,
    pub pass: bool,
    /// The worst observed value of whatever the check measures.
    pub statistic: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn report_line(&self) -> String {
        format!(
            "{},{},{:.6e},{:.6e}",
            self.id,
            if self.pass { "pass" } else { "FAIL" },
            self.statistic,
            self.threshold
        )
    }
}

fn finish(id: &'static str, threshold: f64, body: Result<(f64, String)>) -> CheckResult {
    match body {
        Ok((statistic, detail)) => CheckResult {
            id,
            pass: statistic < threshold,
            statistic,
            threshold,
            detail,
        },
        Err(e) => CheckResult {
            id,
            pass: false,
            statistic: f64::NAN,
            threshold,
            detail: format!("error: {e}"),
        },
    }
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).round() as usize;
    (0..=n).map(|i| a + i as f64 * step).collect()
}

/// 1. Profile multiplicities sum to Bell(M) for M = 1..12.
pub fn check_01_bell() -> CheckResult {
    finish("01_bell_identity", 0.5, (|| {
        let mut mismatches = 0.0;
        for m in 1..=12u64 {
            let total: BigUint = enumerate_profiles(m)?
                .profiles
                .iter()
                .map(|(_, mult)| mult.clone())
                .sum();
            if total != bell_number(m) {
                mismatches += 1.0;
            }
        }
        Ok((mismatches, "exact integer comparison, M=1..12".into()))
    })())
}

/// 2. Poissonization residual and the uniform-model closed form
/// ln Z = e^{e^{-mu}} - 1.
pub fn check_02_poissonization() -> CheckResult {
    finish("02_poissonization", 1.0, (|| {
        let model = make_model("uniform")?;
        let residual = check_poissonization(&model, 4f64.ln(), 12)?;
        let mut worst = residual / 1e-8;
        for mu in [0.0, 2f64.ln()] {
            let exact = (-mu).exp().exp() - 1.0; // ln Z = e^{e^{-mu}} - 1
            let got = log_partition(&model, mu, 1e-14)?.value;
            worst = worst.max((got - exact).abs() / 1e-9);
        }
        Ok((worst, format!("residual={residual:.3e}; worst ratio-to-tolerance {worst:.3}")))
    })())
}

/// 3. Exact profile probabilities equal products of Poisson pmfs (eq. 6).
pub fn check_03_multiplicativity() -> CheckResult {
    finish("03_multiplicativity", 1e-12, (|| {
        let model = make_model("uniform")?;
        let mu = 4f64.ln();
        let ln_z = log_partition(&model, mu, 1e-14)?.value;
        let mut worst = 0f64;
        for m in 1..=6u64 {
            for (counts, _) in &enumerate_profiles(m)?.profiles {
                let p_profile = (profile_log_weight(counts, &model, mu) - ln_z).exp();
                let mut ln_prod = -ln_z;
                for (&k, &p) in counts {
                    ln_prod += p as f64 * model.ln_alpha(mu, k)
                        - (1..=p).map(|t| (t as f64).ln()).sum::<f64>();
                }
                worst = worst.max((p_profile - ln_prod.exp()).abs());
            }
        }
        Ok((worst, "all profiles with M <= 6, uniform mu=ln 4".into()))
    })())
}

/// 4. Step-function limit: sup distance decreasing in kappa and < 0.05 at
/// kappa = 800.
pub fn check_04_step_limit() -> CheckResult {
    finish("04_step_limit", 0.05, (|| {
        let model = make_model("uniform")?;
        let report = classify(&model)?;
        let g = grid(0.0, 2.0, 0.05);
        let mut sups = Vec::new();
        for kappa in [50.0, 200.0, 800.0_f64] {
            let plan = make_plan(&model, &report, -kappa.ln())?;
            let curve = estimate_curve(
                &model, &plan, CurveKind::Rescaled, &g, Some((0.9, 1.1)), 200, 7, 1e-9,
            )?;
            sups.push(sup_distance(&curve, &ShapeOracle::Step)?);
        }
        let decreasing = sups[0] > sups[1] && sups[1] > sups[2];
        let stat = if decreasing { sups[2] } else { f64::INFINITY };
        Ok((stat, format!("sup distances {sups:?} (must decrease)")))
    })())
}

/// 5. Concentration of the part-size distribution around kappa.
pub fn check_05_concentration() -> CheckResult {
    finish("05_concentration", 1.0, (|| {
        let model = make_model("uniform")?;
        let mu = -(1e4f64.ln());
        let ratio = concentration_ratio(&model, mu, 0.9, 1.1)?;
        let kappa = crate::scaling::solve_kappa(&model, mu)?;
        let s = crate::series::sum_s(&model, mu, 1.0, f64::INFINITY, 1e-12)?;
        let em = expected_mass(&model, mu, 1e-12)?;
        let mass_ratio = (kappa.ln() + s.ln_value - em.ln_value).exp();
        let stat = ((1.0 - ratio) / 1e-3).max((mass_ratio - 1.0).abs() / 0.02);
        Ok((stat, format!("ratio={ratio:.6}, kappa*S/EM={mass_ratio:.4}")))
    })())
}

/// 6. Incomplete-gamma limit shape for the critical model d = 2.
pub fn check_06_gamma_shape() -> CheckResult {
    finish("06_gamma_shape", 1.0, (|| {
        let model = make_model("critical:mustar=0,d=2,v=const:0")?;
        let report = classify(&model)?;
        let plan = make_plan(&model, &report, 0.02)?;
        let g = grid(0.1, 6.0, 0.1);
        let curve =
            estimate_curve(&model, &plan, CurveKind::Rescaled, &g, None, 400, 11, 1e-9)?;
        let sup = sup_distance(&curve, &ShapeOracle::Gamma(2.0))?;
        let mu = 1e-3;
        let em = expected_mass(&model, mu, 1e-12)?.value;
        let mass_ratio = em * mu.powi(3) / 2.0; // Gamma(3) = 2
        let stat = (sup / 0.05).max((mass_ratio - 1.0).abs() / 0.02);
        Ok((stat, format!("sup={sup:.4}, EM*mu^3/Gamma(3)={mass_ratio:.4}")))
    })())
}

/// 7. Limit Poisson process of scaled part sizes mu k.
pub fn check_07_poisson_process() -> CheckResult {
    finish("07_poisson_process", 1.0, (|| {
        let model = make_model("critical:mustar=0,d=0,v=const:0")?;
        let mu = 0.01;
        let k_max = truncation_k(&model, mu, 1e-9)?;
        let batch = sample_batch(&model, mu, k_max, 2000, 13);
        let intervals = [(0.5, 1.0), (1.0, 2.0), (2.0, 4.0)];
        let report = test_poisson_counts(&batch, &model, mu, &intervals, 0.0)?;
        let mut stat = 0f64;
        let mut parts = Vec::new();
        for c in &report.intervals {
            let sd = (c.exact_mean / report.n as f64).sqrt();
            stat = stat.max((c.empirical_mean - c.exact_mean).abs() / (3.0 * sd));
            stat = stat.max((c.exact_mean / c.limit_mean - 1.0).abs() / 0.05);
            stat = stat.max((c.dispersion - 1.0).abs() / 0.1);
            stat = stat.max(0.01 / c.p_value.max(1e-300));
            parts.push(format!(
                "[{},{}): mean={:.4} exact={:.4} limit={:.4} disp={:.3} p={:.3}",
                c.interval.0, c.interval.1, c.empirical_mean, c.exact_mean, c.limit_mean,
                c.dispersion, c.p_value
            ));
        }
        Ok((stat, parts.join("; ")))
    })())
}

/// 8. Gaussian local profile for u = x^{3/2} at kappa = 10^4.
pub fn check_08_gaussian_profile() -> CheckResult {
    finish("08_gaussian_profile", 0.05, (|| {
        let model = make_model("power:p=1.5,a=1")?;
        let report = classify(&model)?;
        let plan = make_plan(&model, &report, -150.0)?; // u'(10^4) = 150
        let g = grid(-3.0, 3.0, 0.1);
        let curve = estimate_curve(&model, &plan, CurveKind::Local, &g, None, 400, 17, 1e-9)?;
        let sup = sup_distance(&curve, &ShapeOracle::Gaussian)?;
        Ok((sup, format!("kappa={:.1}, zeta={:.2}", plan.kappa, plan.zeta)))
    })())
}

/// 9. Discrete Gaussian local profile for u = x^2/2 at kappa = 40.
pub fn check_09_discrete_gaussian() -> CheckResult {
    finish("09_discrete_gaussian", 0.04, (|| {
        let model = make_model("power:p=2,a=0.5")?;
        let report = classify(&model)?;
        let plan = make_plan(&model, &report, -40.0)?;
        let g: Vec<f64> = (-2..=3).map(|i| i as f64).collect();
        let curve = estimate_curve(&model, &plan, CurveKind::Local, &g, None, 1000, 19, 1e-9)?;
        let mut worst = 0f64;
        for (x, m) in g.iter().zip(&curve.mean) {
            worst = worst.max((m - discrete_gaussian_tail(*x, 1.0)?).abs());
        }
        Ok((worst, format!("integer x in [-2,3], kappa={:.1}", plan.kappa)))
    })())
}

/// 10. Hard-step local profile for u = 0.3 x^3 at kappa = 30.
pub fn check_10_hard_step() -> CheckResult {
    finish("10_hard_step", 1.0, (|| {
        let model = make_model("power:p=3,a=0.3")?;
        let report = classify(&model)?;
        let mu = -model.du(30.0); // -810
        let plan = make_plan(&model, &report, mu)?;
        let k_max = truncation_k(&model, mu, 1e-9)?;
        let batch = sample_batch(&model, mu, k_max, 500, 23);
        // fraction of parts with |k - kappa| > 2, in log space (counts ~ e^16200)
        let mut frac_sum = 0.0;
        for p in &batch.partitions {
            let lse = |keep: &dyn Fn(u64) -> bool| {
                let terms: Vec<f64> = p
                    .ln_counts()
                    .iter()
                    .filter(|(&k, _)| keep(k))
                    .map(|(_, &l)| l)
                    .collect();
                let mx = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if mx == f64::NEG_INFINITY {
                    mx
                } else {
                    mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
                }
            };
            let out = lse(&|k| (k as f64 - plan.kappa).abs() > 2.0);
            let tot = lse(&|_| true);
            frac_sum += (out - tot).exp();
        }
        let frac = frac_sum / batch.partitions.len() as f64;
        let g = grid(-3.0, 3.0, 0.1);
        let curve = estimate_curve(
            &model, &plan, CurveKind::Local, &g, Some((-0.2, 0.2)), 500, 23, 1e-9,
        )?;
        let sup = sup_distance(&curve, &ShapeOracle::HardStep)?;
        let stat = (frac / 0.01).max(sup / 0.05);
        Ok((stat, format!("stray fraction={frac:.5}, sup={sup:.4}, u''(kappa)={:.1}", model.ddu(plan.kappa))))
    })())
}

/// 11. Dyadic counterexample: the two subsequences converge to different
/// local profiles.
pub fn check_11_counterexample() -> CheckResult {
    finish("11_counterexample", 1.0, (|| {
        let model = make_model("dyadic")?;
        let g = grid(-3.0, 3.0, 0.1);
        let pairs = subsequence_profiles(&model, &[12], 400, 29, &g)?;
        let p = &pairs[0];
        let d_gauss = sup_distance(&p.gaussian_seq, &ShapeOracle::Gaussian)?;
        let d_mixed = sup_distance(&p.mixed_seq, &ShapeOracle::MixedCounterexample)?;
        // the grid point nearest x = 1.2 must stay away from the Gaussian
        let j = g
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - 1.2).abs().total_cmp(&(b.1 - 1.2).abs()))
            .unwrap()
            .0;
        let gap = (p.mixed_seq.mean[j] - gaussian_tail(g[j])).abs();
        let stat = (d_gauss / 0.07).max(d_mixed / 0.07).max(0.03 / gap.max(1e-12));
        Ok((stat, format!(
            "seq1 vs gaussian {d_gauss:.4}; seq2 vs mixed {d_mixed:.4}; gap at 1.2 = {gap:.4}"
        )))
    })())
}

/// 12. No-limit-shape checks: divergence bound and vanishing rescaled sums.
pub fn check_12_no_shape() -> CheckResult {
    finish("12_no_shape", 1.0, (|| {
        let sub = make_model("expr:-1*x*(ln(x))^2")?;
        let bound = check_divergence(&sub, 0.0, 50, 10);
        let mut stat = bound / 1e-10;
        let mus = [0.1, 0.01, 0.001];
        let mut details = vec![format!("divergence bound {bound:.2e}")];
        for spec in [
            "critical:mustar=0,d=-0.5,v=const:0",
            "critical:mustar=0,d=0,v=logpow:c=1,q=0.5",
        ] {
            let m = make_model(spec)?;
            let vals = check_zero_shape(&m, &mus, 1.0, 2.0)?;
            let decreasing = vals[0] > vals[1] && vals[1] > vals[2];
            if !decreasing {
                stat = f64::INFINITY;
            }
            details.push(format!("{spec}: {vals:?}"));
        }
        Ok((stat, details.join("; ")))
    })())
}

/// 13. Frozen special-function values.
pub fn check_13_special_values() -> CheckResult {
    finish("13_special_values", 1.0, (|| {
        let mut stat = 0f64;
        for x in [0.1, 1.0, 5.0] {
            stat = stat.max((gamma_shape(x, 1.0)? - (-x).exp()).abs() / 1e-12);
        }
        stat = stat.max((gaussian_tail(1.96) - 0.024_997_9).abs() / 1e-6);
        stat = stat.max((discrete_gaussian_norm(2.0)? - 1.772_637_2).abs() / 1e-6);
        Ok((stat, "gamma_shape(x,1)=e^-x; Phi_c(1.96); M_2".into()))
    })())
}

/// 14. Byte-identical `curve` CSV across repeated runs and thread counts.
pub fn check_14_reproducibility(bin: &Path) -> CheckResult {
    finish("14_reproducibility", 0.5, (|| {
        let dir = std::env::temp_dir();
        let pid = std::process::id();
        let mut outputs = Vec::new();
        for (tag, threads) in [("a", "1"), ("b", "4"), ("c", "1")] {
            let out = dir.join(format!("gibbs-shapes-accept-{pid}-{tag}.csv"));
            let status = Command::new(bin)
                .args([
                    "curve", "--model", "uniform", "--mu", "-5.3", "--oracle", "auto",
                    "--grid", "0:2:0.05", "--exclude", "0.9,1.1", "--n", "200",
                    "--seed", "7", "--output",
                ])
                .arg(&out)
                .env("GIBBS_SHAPES_THREADS", threads)
                .status()
                .map_err(crate::error::Error::from)?;
            if !status.success() {
                return Ok((f64::INFINITY, format!("curve run exited with {status}")));
            }
            outputs.push(std::fs::read(&out)?);
            let _ = std::fs::remove_file(&out);
        }
        let mismatches =
            (outputs[0] != outputs[1]) as u32 as f64 + (outputs[0] != outputs[2]) as u32 as f64;
        Ok((mismatches, "3 runs, GIBBS_SHAPES_THREADS in {1,4}".into()))
    })())
}

/// Run the whole manifest. `bin` is the path of the CLI binary used by the
/// reproducibility check.
pub fn run_all(bin: &Path) -> Vec<CheckResult> {
    vec![
        check_01_bell(),
        check_02_poissonization(),
        check_03_multiplicativity(),
        check_04_step_limit(),
        check_05_concentration(),
        check_06_gamma_shape(),
        check_07_poisson_process(),
        check_08_gaussian_profile(),
        check_09_discrete_gaussian(),
        check_10_hard_step(),
        check_11_counterexample(),
        check_12_no_shape(),
        check_13_special_values(),
        check_14_reproducibility(bin),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    // The full manifest runs in tests/acceptance.rs; unit tests cover the
    // fast exact checks and the report format.
    #[test]
    fn fast_checks_pass() {
        for c in [
            check_01_bell(),
            check_02_poissonization(),
            check_03_multiplicativity(),
            check_05_concentration(),
            check_12_no_shape(),
            check_13_special_values(),
        ] {
            assert!(c.pass, "{}: {} ({})", c.id, c.statistic, c.detail);
        }
    }

    #[test]
    fn report_line_format() {
        let c = CheckResult {
            id: "01_bell_identity",
            pass: true,
            statistic: 0.0,
            threshold: 0.5,
            detail: String::new(),
        };
        assert_eq!(c.report_line(), "01_bell_identity,pass,0.000000e0,5.000000e-1");
    }
}
