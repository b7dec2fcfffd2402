//! Stable evaluation of the Poisson-parameter sums S_mu(a,b), E[M], and the
//! log partition function. Terms reach e^800 in the step regimes, so every
//! sum runs in log space with a single streaming max-exponent shift.

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::scaling::ScalingPlan;
use crate::special::exp_integral_e1;

pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// A certified series value. `value` is the actual sum (may overflow to
/// +inf); `ln_value` is always finite for nonempty sums; `log_scale` is the
/// max-exponent shift used internally; `tail_bound` bounds the truncation
/// error (same scale as `value`).
#[derive(Debug, Clone, Copy)]
pub struct SeriesResult {
    pub value: f64,
    pub ln_value: f64,
    pub terms_used: u64,
    pub tail_bound: f64,
    pub log_scale: f64,
}

impl SeriesResult {
    fn empty() -> Self {
        SeriesResult {
            value: 0.0,
            ln_value: f64::NEG_INFINITY,
            terms_used: 0,
            tail_bound: 0.0,
            log_scale: f64::NEG_INFINITY,
        }
    }
}

const DIVERGENCE_TERMS: u64 = 1_000_000;
const MAX_TERMS: u64 = 1_000_000_000;

/// Streaming log-sum-exp accumulator: sum = mantissa * e^shift.
struct LseSum {
    shift: f64,
    mantissa: f64,
}

impl LseSum {
    fn new() -> Self {
        LseSum {
            shift: f64::NEG_INFINITY,
            mantissa: 0.0,
        }
    }

    fn add(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term <= self.shift {
            self.mantissa += (ln_term - self.shift).exp();
        } else {
            self.mantissa = self.mantissa * (self.shift - ln_term).exp() + 1.0;
            self.shift = ln_term;
        }
    }

    fn ln_value(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.shift + self.mantissa.ln()
        }
    }
}

/// Core summation of e^{ln_term(k)} for integer k in [a, b), with geometric
/// tail certification for b = infinity: truncate at K once
/// delta_K = -d/dk ln_term(K) > 0 and
/// term(K) e^{-delta}/(1 - e^{-delta}) <= rel_tol * partial_sum.
fn sum_certified(
    ln_term: impl Fn(u64) -> f64,
    delta_at: impl Fn(u64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<SeriesResult> {
    let start = a.max(1.0).ceil() as u64;
    if b.is_finite() {
        let end = b.ceil() as u64; // k in [a, b): stop below ceil(b)
        let mut acc = LseSum::new();
        let mut terms = 0;
        for k in start..end {
            if (k as f64) < b {
                acc.add(ln_term(k));
                terms += 1;
            }
        }
        let ln_v = acc.ln_value();
        return Ok(SeriesResult {
            value: ln_v.exp(),
            ln_value: ln_v,
            terms_used: terms,
            tail_bound: 0.0,
            log_scale: acc.shift,
        });
    }
    let mut acc = LseSum::new();
    let first_ln = ln_term(start);
    let mut k = start;
    loop {
        let ln_t = ln_term(k);
        acc.add(ln_t);
        // divergence sentinel: a million terms without net decay (terms may
        // legitimately grow toward a peak near kappa first)
        if k - start >= DIVERGENCE_TERMS && ln_t >= first_ln {
            return Err(Error::DivergentSeries(format!(
                "terms not decaying by k = {k} (mu below mu*?)"
            )));
        }
        let delta = delta_at(k);
        if delta > 0.0 {
            // ln( e^{-delta} / (1 - e^{-delta}) )
            let ln_tail = ln_t - delta - (-(-delta).exp()).ln_1p();
            let ln_partial = acc.ln_value();
            if ln_partial > f64::NEG_INFINITY && ln_tail <= rel_tol.ln() + ln_partial {
                let ln_v = ln_partial;
                return Ok(SeriesResult {
                    value: ln_v.exp(),
                    ln_value: ln_v,
                    terms_used: k - start + 1,
                    tail_bound: ln_tail.exp(),
                    log_scale: acc.shift,
                });
            }
            // everything from here on is below representable relevance
            if ln_partial > f64::NEG_INFINITY && ln_t < ln_partial - 750.0 {
                let ln_v = ln_partial;
                return Ok(SeriesResult {
                    value: ln_v.exp(),
                    ln_value: ln_v,
                    terms_used: k - start + 1,
                    tail_bound: ln_tail.exp(),
                    log_scale: acc.shift,
                });
            }
        }
        if k - start >= MAX_TERMS {
            return Err(Error::NonConvergedTail(k));
        }
        k += 1;
    }
}

/// S_mu(a, b) = sum over integer k in [a, b) of alpha_k = e^{-mu k - u(k)}.
/// b may be f64::INFINITY.
pub fn sum_s(
    model: &EnergyModel,
    mu: f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<SeriesResult> {
    if a >= b {
        return Ok(SeriesResult::empty());
    }
    sum_certified(
        |k| model.ln_alpha(mu, k),
        |k| mu + model.du(k as f64),
        a,
        b,
        rel_tol,
    )
}

/// E[M] = sum of k alpha_k (eq. 11); the extra factor of k is absorbed
/// into the exponent, shifting the decay rate by -1/k.
pub fn expected_mass(model: &EnergyModel, mu: f64, rel_tol: f64) -> Result<SeriesResult> {
    sum_certified(
        |k| model.ln_alpha(mu, k) + (k as f64).ln(),
        |k| mu + model.du(k as f64) - 1.0 / k as f64,
        1.0,
        f64::INFINITY,
        rel_tol,
    )
}

/// ln Z(mu) = sum of alpha_k over all k (eq. 6 product normalization).
pub fn log_partition(model: &EnergyModel, mu: f64, rel_tol: f64) -> Result<SeriesResult> {
    sum_s(model, mu, 1.0, f64::INFINITY, rel_tol)
}

/// E[F_mu(x)] (eq. 9): the alpha tail above kappa x divided by the plan's
/// vertical factor. Critical-process plans (d = 0, v -> C) use the raw
/// count normalization of eq. (25).
pub fn expected_f(model: &EnergyModel, mu: f64, plan: &ScalingPlan, x: f64) -> Result<f64> {
    let tail = sum_s(model, mu, (plan.kappa * x).max(1.0), f64::INFINITY, DEFAULT_REL_TOL)?;
    let ln_vertical = if plan.is_process_case() {
        0.0
    } else {
        plan.ln_vertical
    };
    Ok((tail.ln_value - ln_vertical).exp())
}

/// S_mu(kappa l1, kappa l2) / S_mu(1, inf) (Lemma 2.2 concentration).
/// Supercritical only; kappa is solved internally.
pub fn concentration_ratio(
    model: &EnergyModel,
    mu: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    let kappa = crate::scaling::solve_kappa(model, mu)?;
    let num = sum_s(model, mu, kappa * lambda1, kappa * lambda2, DEFAULT_REL_TOL)?;
    let den = sum_s(model, mu, 1.0, f64::INFINITY, DEFAULT_REL_TOL)?;
    Ok((num.ln_value - den.ln_value).exp())
}

/// e^{-C} int_a^b e^{-t}/t dt (eq. 26), via exponential integrals;
/// b = infinity allowed.
pub fn poisson_process_mean(c: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b >= a, "need 0 < a <= b");
    if a == b {
        return 0.0;
    }
    let e1 = |x: f64| exp_integral_e1(x).expect("x > 0 checked");
    let upper = if b.is_finite() { e1(b) } else { 0.0 };
    (-c).exp() * (e1(a) - upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::make_model;

    #[test]
    fn uniform_sums_match_exponential_identities() {
        let m = make_model("uniform").unwrap();
        // sum 1/k! = e - 1
        let s = sum_s(&m, 0.0, 1.0, f64::INFINITY, 1e-12).unwrap();
        assert!((s.value - 1.718_281_828_459_045_235_4_f64).abs() < 1e-11);
        assert!(s.tail_bound <= 1e-12 * s.value * 1.0000001);
        // sum k/k! = e
        let em = expected_mass(&m, 0.0, 1e-12).unwrap();
        assert!((em.value - std::f64::consts::E).abs() < 1e-11);
        // sum k 2^k/k! = 2 e^2
        let em2 = expected_mass(&m, -(2f64.ln()), 1e-12).unwrap();
        assert!((em2.value - 14.778_112_197_861_300_454).abs() < 1e-10);
        // log partition at mu = ln 2: e^{1/2} - 1
        let lp = log_partition(&m, 2f64.ln(), 1e-12).unwrap();
        assert!((lp.value - 0.648_721_270_700_128_146_85).abs() < 1e-11);
    }

    #[test]
    fn empty_range_is_zero() {
        let m = make_model("uniform").unwrap();
        let s = sum_s(&m, 0.0, 5.0, 5.0, 1e-10).unwrap();
        assert_eq!(s.value, 0.0);
        assert_eq!(s.terms_used, 0);
    }

    #[test]
    fn critical_log_series() {
        // u = ln x, mu = 1: sum e^{-k}/k = -ln(1 - e^{-1})
        let m = make_model("critical:mustar=0,d=0,v=const:0").unwrap();
        let s = sum_s(&m, 1.0, 1.0, f64::INFINITY, 1e-12).unwrap();
        assert!((s.value - 0.458_675_145_387_081_891_02).abs() < 1e-11);
    }

    #[test]
    fn critical_mass_asymptotics() {
        // d = 2 (u = -ln x): E M = sum k^2 e^{-mu k} ~ Gamma(3)/mu^3
        let m = make_model("critical:mustar=0,d=2,v=const:0").unwrap();
        let em = expected_mass(&m, 0.01, 1e-10).unwrap();
        // exact polylog value: sum k^2 e^{-k/100}
        assert!((em.value - 1_999_999.999_916_667_328).abs() < 1e-3);
        assert!((em.value * 0.01f64.powi(3) / 2.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn divergent_series_detected() {
        // u = -ln x at mu = 0: terms alpha_k = k grow without bound
        let m = make_model("critical:mustar=0,d=2,v=const:0").unwrap();
        match sum_s(&m, 0.0, 1.0, f64::INFINITY, 1e-10) {
            Err(Error::DivergentSeries(_)) => {}
            other => panic!("expected DivergentSeries, got {other:?}"),
        }
    }

    #[test]
    fn huge_exponents_stay_in_log_space() {
        // uniform at mu = -ln 800: peak term alpha_800 ~ e^795
        let m = make_model("uniform").unwrap();
        let s = sum_s(&m, -(800f64.ln()), 1.0, f64::INFINITY, 1e-10).unwrap();
        // sum 800^k/k! = e^800 - 1; ln of that is 800
        assert!((s.ln_value - 800.0).abs() < 1e-9);
        assert_eq!(s.value, f64::INFINITY);
        assert!(s.log_scale > 700.0);
    }

    #[test]
    fn stability_across_tolerances() {
        let m = make_model("uniform").unwrap();
        for mu in [0.0, -(100f64.ln())] {
            let a = sum_s(&m, mu, 1.0, f64::INFINITY, 1e-10).unwrap();
            let b = sum_s(&m, mu, 1.0, f64::INFINITY, 1e-12).unwrap();
            assert!(((a.ln_value - b.ln_value).exp() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn poisson_process_mean_matches_e1_values() {
        let v = poisson_process_mean(0.0, 1.0, 2.0);
        assert!((v - 0.170_483_423_687_459_154_11).abs() < 1e-13);
        let half = poisson_process_mean(2f64.ln(), 1.0, 2.0);
        assert!((half - v / 2.0).abs() < 1e-14);
        assert_eq!(poisson_process_mean(0.0, 1.0, 1.0), 0.0);
        let tail = poisson_process_mean(0.0, 2.0, f64::INFINITY);
        assert!((tail - exp_integral_e1(2.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn concentration_near_kappa() {
        let m = make_model("uniform").unwrap();
        let r = concentration_ratio(&m, -(1e4f64.ln()), 0.9, 1.1).unwrap();
        assert!(r >= 0.999, "ratio = {r}");

        // kappa = 50: k = 55 sits exactly on kappa*lambda2 and is excluded
        // by the half-open [a, b) of eq. 14, so the complement keeps one
        // e^{-12.5}-sized term: ratio = 1 - 1.5e-6
        let m = make_model("power:p=2,a=0.5").unwrap();
        let r = concentration_ratio(&m, -50.0, 0.9, 1.1).unwrap();
        assert!(r >= 1.0 - 1e-5, "ratio = {r}");

        // full range is everything
        let m = make_model("uniform").unwrap();
        let r = concentration_ratio(&m, -(100f64.ln()), 1e-9, f64::INFINITY).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poissonization_identity() {
        // log_partition(uniform, mu) = e^{e^{-mu}} - 1
        let m = make_model("uniform").unwrap();
        for mu in [0.0, 2f64.ln()] {
            let lp = log_partition(&m, mu, 1e-12).unwrap();
            let closed = ((-mu).exp().exp()) - 1.0;
            assert!((lp.value - closed).abs() < 1e-9, "mu = {mu}");
        }
    }
}
