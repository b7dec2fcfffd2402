//! Sampling from the grand-canonical measure: independent p_k ~
//! Poisson(alpha_k) up to a certified truncation, and the raw / rescaled /
//! shifted / randomly-scaled size distribution functions of each sample.
//!
//! Counts are stored as logarithms: in steep step regimes alpha_k reaches
//! e^800, far past f64 range, and curve values are ratios of such counts.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::regime::RegimeTag;
use crate::scaling::ScalingPlan;

/// A partition profile: part size k -> ln(p_k), p_k > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    counts: BTreeMap<u64, f64>,
    ln_mass: f64,
}

fn ln_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let mut shift = f64::NEG_INFINITY;
    let mut mantissa = 0.0;
    for t in terms {
        if t == f64::NEG_INFINITY {
            continue;
        }
        if t <= shift {
            mantissa += (t - shift).exp();
        } else {
            mantissa = mantissa * (shift - t).exp() + 1.0;
            shift = t;
        }
    }
    if mantissa == 0.0 {
        f64::NEG_INFINITY
    } else {
        shift + mantissa.ln()
    }
}

impl Partition {
    pub fn empty() -> Self {
        Partition {
            counts: BTreeMap::new(),
            ln_mass: f64::NEG_INFINITY,
        }
    }

    /// Build from integer counts; zero counts are dropped.
    pub fn from_counts(counts: &[(u64, u64)]) -> Self {
        let map: BTreeMap<u64, f64> = counts
            .iter()
            .filter(|(_, c)| *c > 0)
            .map(|&(k, c)| {
                assert!(k > 0, "part sizes are positive");
                (k, (c as f64).ln())
            })
            .collect();
        Self::from_ln_counts(map)
    }

    pub fn from_ln_counts(map: BTreeMap<u64, f64>) -> Self {
        let ln_mass = ln_sum_exp(map.iter().map(|(&k, &ln_c)| (k as f64).ln() + ln_c));
        Partition {
            counts: map,
            ln_mass,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn ln_counts(&self) -> &BTreeMap<u64, f64> {
        &self.counts
    }

    /// p_k in linear scale (0 when absent; may overflow to +inf).
    pub fn count(&self, k: u64) -> f64 {
        self.counts.get(&k).map(|ln| ln.exp()).unwrap_or(0.0)
    }

    /// M = sum k p_k, linear scale (may overflow to +inf).
    pub fn mass(&self) -> f64 {
        self.ln_mass.exp()
    }

    pub fn ln_mass(&self) -> f64 {
        self.ln_mass
    }

    /// ln of sum_{k >= threshold} p_k; -inf for an empty tail.
    pub fn ln_tail_count(&self, threshold: f64) -> f64 {
        let from = threshold.max(1.0).ceil() as u64;
        ln_sum_exp(self.counts.range(from..).map(|(_, &ln_c)| ln_c))
    }

    /// Raw size distribution f(x) = sum_{k >= x} p_k (eq. 7), linear scale.
    pub fn size_distribution(&self, x: f64) -> f64 {
        self.ln_tail_count(x).exp()
    }
}

/// F_mu(x; nu): the tail count above kappa x divided by the plan's vertical
/// factor (eq. 8); Critical-process plans count raw parts with mu k >= x
/// (eq. 25).
pub fn rescaled_f(p: &Partition, plan: &ScalingPlan, x: f64) -> Result<f64> {
    match plan.regime {
        RegimeTag::Supercritical | RegimeTag::Critical => {}
        _ => {
            return Err(Error::RegimeMismatch(
                "rescaled curves need a step or critical plan".into(),
            ))
        }
    }
    if plan.is_process_case() {
        return Ok(p.ln_tail_count(x / plan.mu).exp());
    }
    Ok((p.ln_tail_count(plan.kappa * x) - plan.ln_vertical).exp())
}

/// G_mu(x; nu) = (kappa/E M) sum_{k >= zeta x + kappa} p_k (eq. 32): the
/// boundary layer near kappa under the plan's local scale.
pub fn local_g(p: &Partition, plan: &ScalingPlan, x: f64) -> Result<f64> {
    if plan.regime != RegimeTag::Supercritical {
        return Err(Error::RegimeMismatch(
            "local profiles are defined for step plans only".into(),
        ));
    }
    // part sizes are integers and the profile may live on the lattice
    // (DiscreteGaussian): when the solved kappa sits an ulp above an
    // integer, ceil would drop a whole lattice site, so nudge the
    // threshold down by well more than the root-finding error
    let threshold = plan.zeta * x + plan.kappa - 1e-6;
    Ok((p.ln_tail_count(threshold) - plan.ln_vertical).exp())
}

/// F~_mu(x; nu) = number of parts of size >= x M(nu) (the random scaling of
/// section 2.3). Only meaningful when the mass is moderate.
pub fn random_scaled_f_tilde(p: &Partition, x: f64) -> Result<u64> {
    if p.is_empty() {
        return Err(Error::EmptyPartition);
    }
    let mass = p.mass();
    Ok(p.size_distribution(x * mass).round() as u64)
}

/// pi_mu(A; nu) = number of parts with mu k in [a, b), per interval.
pub fn interval_counts(
    p: &Partition,
    mu: f64,
    intervals: &[(f64, f64)],
) -> Result<Vec<u64>> {
    for (i, &(a, b)) in intervals.iter().enumerate() {
        if b < a {
            return Err(Error::Domain(format!("interval [{a}, {b}) is inverted")));
        }
        for &(a2, b2) in &intervals[i + 1..] {
            if a < b2 && a2 < b {
                return Err(Error::OverlappingIntervals);
            }
        }
    }
    Ok(intervals
        .iter()
        .map(|&(a, b)| {
            let lo = (a / mu).max(1.0).ceil() as u64;
            let sum: f64 = p
                .counts
                .range(lo..)
                .take_while(|(&k, _)| mu * (k as f64) < b)
                .map(|(_, &ln_c)| ln_c.exp())
                .sum();
            sum.round() as u64
        })
        .collect())
}

/// Smallest K with a certified bound sum_{k > K} alpha_k < eps_tail:
/// 64 explicit terms past K plus the geometric tail at K + 64.
pub fn truncation_k(model: &EnergyModel, mu: f64, eps_tail: f64) -> Result<u64> {
    let ln_eps = eps_tail.ln();
    let certify = |k: u64| -> bool {
        let ln_explicit = ln_sum_exp((1..=64u64).map(|j| model.ln_alpha(mu, k + j)));
        let edge = k + 64;
        let delta = mu + model.du(edge as f64);
        if !(delta > 0.0) {
            return false;
        }
        let ln_geo = model.ln_alpha(mu, edge) - delta - (-(-delta).exp()).ln_1p();
        ln_sum_exp([ln_explicit, ln_geo].into_iter()) < ln_eps
    };
    let mut hi = 1u64;
    while !certify(hi) {
        hi *= 2;
        if hi > 1_000_000_000 {
            return Err(Error::NonConvergedTail(hi));
        }
    }
    let mut lo = hi / 2; // 0 when hi = 1; lo is never certified
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if certify(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

// Above this ln(mean), Poisson(mean) is replaced by its normal
// approximation evaluated directly in log space: mean + z sqrt(mean) has
// relative skew error O(1/sqrt(mean)) < 1e-5 there.
const LN_EXACT_POISSON_MAX: f64 = 23.0; // mean ~ 9.7e9

fn draw_ln_count(ln_lambda: f64, rng: &mut ChaCha8Rng) -> Option<f64> {
    if ln_lambda < -700.0 {
        // P{p_k >= 1} < 1e-304: part sizes this deep never appear
        return None;
    }
    if ln_lambda <= LN_EXACT_POISSON_MAX {
        let lambda = ln_lambda.exp();
        let d = Poisson::new(lambda).expect("positive finite mean");
        let c: f64 = d.sample(rng);
        if c == 0.0 {
            None
        } else {
            Some(c.ln())
        }
    } else {
        let z: f64 = StandardNormal.sample(rng);
        // ln(lambda + z sqrt(lambda)) = ln lambda + ln(1 + z/sqrt(lambda))
        Some(ln_lambda + (z * (-0.5 * ln_lambda).exp()).ln_1p())
    }
}

/// One draw from the product measure (eq. 6), truncated at k_max.
pub fn sample_partition(
    model: &EnergyModel,
    mu: f64,
    k_max: u64,
    rng: &mut ChaCha8Rng,
) -> Partition {
    let mut map = BTreeMap::new();
    for k in 1..=k_max {
        if let Some(ln_c) = draw_ln_count(model.ln_alpha(mu, k), rng) {
            map.insert(k, ln_c);
        }
    }
    Partition::from_ln_counts(map)
}

/// A reproducible batch: sample i always uses ChaCha8 stream i of `seed`,
/// so results are identical across thread counts and batch sizes.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub seed: u64,
    pub n: usize,
    pub k_max: u64,
    pub mu: f64,
    pub model_spec: String,
    pub partitions: Vec<Partition>,
}

pub fn sample_batch(
    model: &EnergyModel,
    mu: f64,
    k_max: u64,
    n: usize,
    seed: u64,
) -> SampleBatch {
    let partitions: Vec<Partition> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            sample_partition(model, mu, k_max, &mut rng)
        })
        .collect();
    SampleBatch {
        seed,
        n,
        k_max,
        mu,
        model_spec: model.spec_string().to_string(),
        partitions,
    }
}

/// Format a log-scale count: exact integer text when small enough,
/// mantissa/exponent notation beyond that.
pub fn format_ln_count(ln_c: f64) -> String {
    if ln_c == f64::NEG_INFINITY {
        return "0".into();
    }
    if ln_c < 34.0 {
        format!("{:.0}", ln_c.exp())
    } else {
        let d = ln_c / std::f64::consts::LN_10;
        let e = d.floor();
        let m = 10f64.powf(d - e);
        format!("{m:.9}e+{e:.0}")
    }
}

impl SampleBatch {
    /// One line per sample: "sample_index,mass,k:count;k:count;...".
    pub fn export_lines(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.partitions.iter().enumerate() {
            let parts: Vec<String> = p
                .ln_counts()
                .iter()
                .map(|(k, &ln_c)| format!("{k}:{}", format_ln_count(ln_c)))
                .collect();
            out.push_str(&format!(
                "{i},{},{}\n",
                format_ln_count(p.ln_mass()),
                parts.join(";")
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::make_model;
    use crate::regime::classify;
    use crate::scaling::make_plan;

    fn paper_example() -> Partition {
        // nu = (1,3,0,2,0,1): 21 = 1 + 2+2+2 + 4+4 + 6
        Partition::from_counts(&[(1, 1), (2, 3), (3, 0), (4, 2), (5, 0), (6, 1)])
    }

    #[test]
    fn size_distribution_hand_counts() {
        let p = paper_example();
        assert!((p.size_distribution(2.5) - 3.0).abs() < 1e-9);
        assert!((p.size_distribution(1.0) - 7.0).abs() < 1e-9);
        assert!((p.mass() - 21.0).abs() < 1e-9);
        assert_eq!(Partition::empty().size_distribution(0.5), 0.0);
    }

    #[test]
    fn f_tilde_hand_counts() {
        let p = paper_example();
        assert_eq!(random_scaled_f_tilde(&p, 1.0).unwrap(), 0);
        assert_eq!(random_scaled_f_tilde(&p, 6.0 / 21.0).unwrap(), 1);
        assert_eq!(random_scaled_f_tilde(&p, 4.0 / 21.0).unwrap(), 3);
        assert!(matches!(
            random_scaled_f_tilde(&Partition::empty(), 0.5),
            Err(Error::EmptyPartition)
        ));
    }

    #[test]
    fn interval_count_semantics() {
        let p = Partition::from_counts(&[(3, 2)]);
        let c = interval_counts(&p, 0.5, &[(1.0, 2.0)]).unwrap();
        assert_eq!(c, vec![2]);
        let c = interval_counts(&p, 0.5, &[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(c, vec![0, 0]);
        assert!(matches!(
            interval_counts(&p, 0.5, &[(0.0, 2.0), (1.0, 3.0)]),
            Err(Error::OverlappingIntervals)
        ));
        assert_eq!(
            interval_counts(&Partition::empty(), 0.1, &[(0.0, 5.0)]).unwrap(),
            vec![0]
        );
    }

    #[test]
    fn truncation_examples() {
        let m = make_model("uniform").unwrap();
        assert_eq!(truncation_k(&m, 0.0, 1e-9).unwrap(), 12);
        assert_eq!(truncation_k(&m, 0.0, 1.0).unwrap(), 1);
        // quadratic at eps = 1e-12: tail past 7 is ~1.3e-14, past 6 is
        // ~2.3e-11, so the smallest certified cut is 7
        let m = make_model("power:p=2,a=0.5").unwrap();
        assert_eq!(truncation_k(&m, 0.0, 1e-12).unwrap(), 7);
    }

    #[test]
    fn sampling_moments_uniform() {
        let m = make_model("uniform").unwrap();
        let k_max = truncation_k(&m, 0.0, 1e-9).unwrap();
        let n = 100_000;
        let batch = sample_batch(&m, 0.0, k_max, n, 42);
        let nf = n as f64;

        // E p_1 = 1, Var p_1 = 1
        let mean_p1: f64 = batch.partitions.iter().map(|p| p.count(1)).sum::<f64>() / nf;
        assert!((mean_p1 - 1.0).abs() < 3.0 / nf.sqrt(), "mean p1 = {mean_p1}");

        // E M = e, Var M = sum k^2/k! = 2e
        let mean_mass: f64 = batch.partitions.iter().map(|p| p.mass()).sum::<f64>() / nf;
        let sd_mass = (2.0 * std::f64::consts::E / nf).sqrt();
        assert!(
            (mean_mass - std::f64::consts::E).abs() < 3.0 * sd_mass,
            "mean mass = {mean_mass}"
        );

        // Var p_3 = alpha_3 = 1/6; sd of the variance estimator for
        // Poisson(l) is sqrt((l + 2 l^2)/n)
        let lam = 1.0 / 6.0;
        let mean_p3: f64 = batch.partitions.iter().map(|p| p.count(3)).sum::<f64>() / nf;
        let var_p3: f64 = batch
            .partitions
            .iter()
            .map(|p| (p.count(3) - mean_p3).powi(2))
            .sum::<f64>()
            / (nf - 1.0);
        let sd_var = ((lam + 2.0 * lam * lam) / nf).sqrt();
        assert!((var_p3 - lam).abs() < 3.0 * sd_var, "var p3 = {var_p3}");
    }

    #[test]
    fn joint_law_matches_poisson_products() {
        // k_max = 2 with alpha_1 = e^-2, alpha_2 = e^-2.7...: empirical
        // P{p1=a, p2=b} vs the product pmf, 4 sd over 1e5 samples
        let m = make_model("expr:x,beta=1").unwrap(); // u = x + lgamma(x+1)
        let mu = 1.0;
        let a1 = m.alpha(mu, 1).unwrap();
        let a2 = m.alpha(mu, 2).unwrap();
        let n = 100_000;
        let batch = sample_batch(&m, mu, 2, n, 7);
        for (a, b) in [(0u64, 0u64), (1, 0), (0, 1), (1, 1), (2, 0)] {
            let pmf = |lam: f64, j: u64| {
                (-lam + j as f64 * lam.ln()
                    - (1..=j).map(|t| (t as f64).ln()).sum::<f64>())
                .exp()
            };
            let expect = pmf(a1, a) * pmf(a2, b);
            let hits = batch
                .partitions
                .iter()
                .filter(|p| {
                    p.count(1).round() as u64 == a && p.count(2).round() as u64 == b
                })
                .count() as f64
                / n as f64;
            let sd = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!(
                (hits - expect).abs() < 4.0 * sd,
                "P{{p1={a},p2={b}}}: {hits} vs {expect}"
            );
        }
    }

    #[test]
    fn batches_are_reproducible_and_stream_indexed() {
        let m = make_model("uniform").unwrap();
        let a = sample_batch(&m, 0.0, 12, 10, 99);
        let b = sample_batch(&m, 0.0, 12, 10, 99);
        assert_eq!(a.export_lines(), b.export_lines());
        // sample i does not depend on batch size
        let small = sample_batch(&m, 0.0, 12, 4, 99);
        assert_eq!(small.partitions[3], a.partitions[3]);
        // different seed differs
        let c = sample_batch(&m, 0.0, 12, 10, 100);
        assert_ne!(a.export_lines(), c.export_lines());
    }

    #[test]
    fn rescaled_f_shape_and_monotonicity() {
        let m = make_model("uniform").unwrap();
        let r = classify(&m).unwrap();
        let mu = -(200f64.ln());
        let plan = make_plan(&m, &r, mu).unwrap();
        let k_max = truncation_k(&m, mu, 1e-9).unwrap();
        let batch = sample_batch(&m, mu, k_max, 200, 3);
        let mut mean_at_half = 0.0;
        for p in &batch.partitions {
            let mut last = f64::INFINITY;
            for i in 0..=20 {
                let x = i as f64 * 0.1;
                let f = rescaled_f(p, &plan, x).unwrap();
                assert!(f <= last + 1e-12);
                last = f;
            }
            mean_at_half += rescaled_f(p, &plan, 0.5).unwrap();
        }
        mean_at_half /= batch.partitions.len() as f64;
        assert!(
            (mean_at_half - 1.0).abs() < 0.05,
            "mean F(0.5) = {mean_at_half}"
        );
    }

    #[test]
    fn huge_mean_normal_approximation_path() {
        // u = x^2/2 at mu = -40: alpha_40 = e^800, far past exact sampling
        let m = make_model("power:p=2,a=0.5").unwrap();
        let r = classify(&m).unwrap();
        let plan = make_plan(&m, &r, -40.0).unwrap();
        let k_max = truncation_k(&m, -40.0, 1e-9).unwrap();
        let batch = sample_batch(&m, -40.0, k_max, 4, 11);
        for p in &batch.partitions {
            assert!(p.ln_mass() > 790.0);
            let f = rescaled_f(p, &plan, 0.5).unwrap();
            assert!((f - 1.0).abs() < 0.05, "F(0.5) = {f}");
            let g0 = local_g(p, &plan, 0.0).unwrap();
            assert!(g0 > 0.3 && g0 < 0.9, "G(0) = {g0}");
        }
    }

    #[test]
    fn curve_evaluators_reject_wrong_regimes() {
        let m = make_model("critical:mustar=0,d=2,v=const:0").unwrap();
        let r = classify(&m).unwrap();
        let plan = make_plan(&m, &r, 0.1).unwrap();
        let p = paper_example();
        assert!(rescaled_f(&p, &plan, 0.5).is_ok());
        assert!(matches!(
            local_g(&p, &plan, 0.0),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn export_format() {
        let p = paper_example();
        let batch = SampleBatch {
            seed: 0,
            n: 1,
            k_max: 6,
            mu: 0.0,
            model_spec: "uniform".into(),
            partitions: vec![p],
        };
        assert_eq!(batch.export_lines(), "0,21,1:1;2:3;4:2;6:1\n");
        assert_eq!(format_ln_count(f64::NEG_INFINITY), "0");
        assert_eq!(format_ln_count(800.0), "2.726374572e+347");
    }
}
