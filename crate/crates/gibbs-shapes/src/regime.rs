//! Regime classification: mu*, gamma = lim x^2 u''(x), the critical
//! decomposition (d, v), and the local profile for step-type models.

use crate::energy::EnergyModel;
use crate::error::{Error, Result};

/// Tail behavior of the sublinear remainder v(x).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VBehavior {
    ToPlusInf,
    ToMinusInf,
    ToConst,
}

impl VBehavior {
    pub fn name(&self) -> &'static str {
        match self {
            VBehavior::ToPlusInf => "ToPlusInf",
            VBehavior::ToMinusInf => "ToMinusInf",
            VBehavior::ToConst => "ToConst",
        }
    }
}

/// Local limit shape of the rescaled boundary near kappa (step regimes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalProfile {
    /// u''(kappa) -> 0: standard Gaussian tail profile.
    Gaussian,
    /// u'' -> c in (0, inf): lattice effects survive, profile depends on c.
    DiscreteGaussian(f64),
    /// u''(kappa) -> inf: hard step.
    HardStep,
}

impl LocalProfile {
    pub fn name(&self) -> String {
        match self {
            LocalProfile::Gaussian => "Gaussian".into(),
            LocalProfile::DiscreteGaussian(c) => format!("DiscreteGaussian({c})"),
            LocalProfile::HardStep => "HardStep".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    /// gamma = -inf, mu* = +inf: no admissible chemical potential window.
    SubcriticalA,
    /// gamma = -inf, mu* finite.
    SubcriticalB,
    /// gamma = +inf: step limit shape.
    Supercritical,
    /// gamma finite: gamma-function-type limit shapes.
    Critical,
}

impl RegimeTag {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeTag::SubcriticalA => "SubcriticalA",
            RegimeTag::SubcriticalB => "SubcriticalB",
            RegimeTag::Supercritical => "Supercritical",
            RegimeTag::Critical => "Critical",
        }
    }
}

/// Output of [`decompose_critical`]: u(x) = -mu* x + (1-d) ln x + v(x).
#[derive(Debug, Clone, Copy)]
pub struct CriticalDecomposition {
    pub d: f64,
    pub v_behavior: VBehavior,
    /// The limit C of v, present only when v_behavior is ToConst.
    pub c: Option<f64>,
}

/// One probe row: (x, x^2 u''(x), -u'(x)).
#[derive(Debug, Clone, Copy)]
pub struct ProbeRow {
    pub x: f64,
    pub x2_ddu: f64,
    pub neg_du: f64,
}

#[derive(Debug, Clone)]
pub struct RegimeReport {
    /// lim x^2 u''(x); +-inf encoded as f64 infinities.
    pub gamma_limit: f64,
    /// mu* = -lim u'(x).
    pub mu_star: f64,
    pub regime: RegimeTag,
    pub critical: Option<CriticalDecomposition>,
    pub local_profile: Option<LocalProfile>,
    /// x^2 u'' diverges but oscillates between subsequences (dyadic family):
    /// local profiles are then only defined along subsequences.
    pub non_monotone: bool,
    pub evidence: Vec<ProbeRow>,
}

fn fmt_ext(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

impl RegimeReport {
    /// Flat key=value block, one pair per line, evidence rows included.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("regime={}\n", self.regime.name()));
        out.push_str(&format!("gamma_limit={}\n", fmt_ext(self.gamma_limit)));
        out.push_str(&format!("mu_star={}\n", fmt_ext(self.mu_star)));
        if let Some(c) = &self.critical {
            out.push_str(&format!("critical.d={}\n", c.d));
            out.push_str(&format!("critical.v_behavior={}\n", c.v_behavior.name()));
            if let Some(cc) = c.c {
                out.push_str(&format!("critical.C={cc}\n"));
            }
        }
        if let Some(p) = &self.local_profile {
            out.push_str(&format!("local_profile={}\n", p.name()));
        }
        out.push_str(&format!("non_monotone={}\n", self.non_monotone));
        for row in &self.evidence {
            out.push_str(&format!(
                "evidence.x={} x2_ddu={} neg_du={}\n",
                row.x,
                fmt_ext(row.x2_ddu),
                fmt_ext(row.neg_du)
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        fn ext(x: f64) -> serde_json::Value {
            if x.is_finite() {
                serde_json::json!(x)
            } else {
                serde_json::json!(fmt_ext(x))
            }
        }
        let mut obj = serde_json::json!({
            "regime": self.regime.name(),
            "gamma_limit": ext(self.gamma_limit),
            "mu_star": ext(self.mu_star),
            "non_monotone": self.non_monotone,
            "evidence": self.evidence.iter().map(|r| serde_json::json!({
                "x": r.x, "x2_ddu": ext(r.x2_ddu), "neg_du": ext(r.neg_du),
            })).collect::<Vec<_>>(),
        });
        if let Some(c) = &self.critical {
            obj["critical"] = serde_json::json!({
                "d": c.d,
                "v_behavior": c.v_behavior.name(),
                "C": c.c,
            });
        }
        if let Some(p) = &self.local_profile {
            obj["local_profile"] = serde_json::json!(p.name());
        }
        obj
    }
}

/// Fixed dyadic probe points x = 2^j, j = 10..=40.
pub const PROBE_EXPONENTS: std::ops::RangeInclusive<i32> = 10..=40;

const AGREE_TOL: f64 = 1e-6;
const HUGE: f64 = 1e12;

fn probe_points() -> impl Iterator<Item = f64> {
    PROBE_EXPONENTS.map(|j| 2f64.powi(j))
}

/// Estimate lim f(x) at the fixed probe points. Returns a finite value,
/// +-inf, or InconclusiveLimit with the probe table attached.
///
/// Rules, in order: (1) last 5 probes agree within 1e-6 absolute ->
/// converged; the returned value is the Richardson extrapolation
/// 2 f(2^J) - f(2^(J-1)), which cancels a c/x correction term exactly
/// (plain averaging leaves an O(1/x) bias that the critical decomposition
/// later multiplies by x); (2) tail monotone and either |last| > 1e12 or
/// successive differences not shrinking (ratio >= 0.8) -> signed infinity;
/// (3) tail monotone with shrinking magnitude and |last| <= 1e-6 -> 0.
fn limit_from_probes(probes: &[(f64, f64)], context: &str) -> Result<f64> {
    let vals: Vec<f64> = probes.iter().map(|p| p.1).collect();
    let n = vals.len();
    debug_assert!(n >= 10);
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InconclusiveLimit {
            context: format!("{context}: non-finite probe value"),
            probes: probes.to_vec(),
        });
    }
    let last5 = &vals[n - 5..];
    let (lo, hi) = last5
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi - lo <= AGREE_TOL {
        return Ok(2.0 * vals[n - 1] - vals[n - 2]);
    }
    // monotone over the final 10 probes
    let tail = &vals[n - 10..];
    let nondec = tail.windows(2).all(|w| w[1] >= w[0]);
    let noninc = tail.windows(2).all(|w| w[1] <= w[0]);
    if nondec || noninc {
        let last = vals[n - 1];
        let diffs: Vec<f64> = tail.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let shrinking = diffs
            .windows(2)
            .rev()
            .take(3)
            .all(|w| w[1] < 0.8 * w[0] + f64::MIN_POSITIVE);
        if last.abs() > HUGE || !shrinking {
            return Ok(if nondec {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            });
        }
        let mags: Vec<f64> = tail.iter().map(|v| v.abs()).collect();
        let mag_shrink = mags.windows(2).all(|w| w[1] <= w[0]);
        if mag_shrink && last.abs() <= AGREE_TOL {
            return Ok(0.0);
        }
    }
    Err(Error::InconclusiveLimit {
        context: context.to_string(),
        probes: probes.to_vec(),
    })
}

fn probe_limit(f: impl Fn(f64) -> f64, context: &str) -> Result<f64> {
    let probes: Vec<(f64, f64)> = probe_points().map(|x| (x, f(x))).collect();
    limit_from_probes(&probes, context)
}

/// mu* = -lim u'(x) (analytic hint if present, else dyadic probing).
pub fn estimate_mu_star(model: &EnergyModel) -> Result<f64> {
    if let Some(h) = model.hints() {
        if let Some(ms) = h.mu_star {
            return Ok(ms);
        }
    }
    probe_limit(|x| -model.du(x), "mu_star = -lim u'(x)")
}

fn gamma_limit(model: &EnergyModel) -> Result<f64> {
    if let Some(h) = model.hints() {
        if let Some(g) = h.gamma_limit {
            return Ok(g);
        }
    }
    probe_limit(|x| x * x * model.ddu(x), "gamma = lim x^2 u''(x)")
}

/// The remainder v(x) = u(x) + mu* x - (1-d) ln x.
pub fn critical_v(model: &EnergyModel, mu_star: f64, d: f64) -> impl Fn(f64) -> f64 + '_ {
    move |x| model.u(x) + mu_star * x - (1.0 - d) * x.ln()
}

/// Split a critical-regime u into (d, v_behavior, C). d = gamma + 1, since
/// the log term (1-d) ln x contributes x^2 u'' -> -(1-d) = d - 1.
pub fn decompose_critical(model: &EnergyModel, mu_star: f64) -> Result<CriticalDecomposition> {
    if let Some(h) = model.hints() {
        if let (Some(d), Some(vb)) = (h.d, h.v_behavior) {
            return Ok(CriticalDecomposition {
                d,
                v_behavior: vb,
                c: h.c,
            });
        }
    }
    let gamma = gamma_limit(model)?;
    if !gamma.is_finite() {
        return Err(Error::RegimeMismatch(format!(
            "decompose_critical needs finite gamma, got {}",
            fmt_ext(gamma)
        )));
    }
    let d = gamma + 1.0;
    let v = critical_v(model, mu_star, d);
    // v is probed only up to 2^25: the -mu* x term cancels against an
    // *estimated* mu*, and even ulp-level estimation error grows linearly
    // in x, swamping v itself near 2^40.
    let probes: Vec<(f64, f64)> = (10..=25)
        .map(|j| {
            let x = 2f64.powi(j);
            (x, v(x))
        })
        .collect();
    match limit_from_probes(&probes, "v(x) tail") {
        Ok(c) if c.is_finite() => Ok(CriticalDecomposition {
            d,
            v_behavior: VBehavior::ToConst,
            c: Some(c),
        }),
        Ok(c) => Ok(CriticalDecomposition {
            d,
            v_behavior: if c > 0.0 {
                VBehavior::ToPlusInf
            } else {
                VBehavior::ToMinusInf
            },
            c: None,
        }),
        Err(e) => {
            // slow monotone divergence past +-1e3 still counts
            let last = probes[probes.len() - 1].1;
            let tail: Vec<f64> = probes[probes.len() - 10..].iter().map(|p| p.1).collect();
            let nondec = tail.windows(2).all(|w| w[1] >= w[0]);
            let noninc = tail.windows(2).all(|w| w[1] <= w[0]);
            if nondec && last > 1e3 {
                Ok(CriticalDecomposition {
                    d,
                    v_behavior: VBehavior::ToPlusInf,
                    c: None,
                })
            } else if noninc && last < -1e3 {
                Ok(CriticalDecomposition {
                    d,
                    v_behavior: VBehavior::ToMinusInf,
                    c: None,
                })
            } else {
                Err(e)
            }
        }
    }
}

/// Full classification. Hints short-circuit probing; the evidence table is
/// recorded either way (at every fourth probe point to keep reports small).
pub fn classify(model: &EnergyModel) -> Result<RegimeReport> {
    let evidence: Vec<ProbeRow> = PROBE_EXPONENTS
        .step_by(4)
        .map(|j| {
            let x = 2f64.powi(j);
            ProbeRow {
                x,
                x2_ddu: x * x * model.ddu(x),
                neg_du: -model.du(x),
            }
        })
        .collect();
    let gamma = gamma_limit(model)?;
    let mu_star = estimate_mu_star(model)?;
    let non_monotone = model.hints().map(|h| h.non_monotone).unwrap_or(false);
    let (regime, critical, local_profile) = if gamma == f64::NEG_INFINITY {
        let tag = if mu_star == f64::INFINITY {
            RegimeTag::SubcriticalA
        } else {
            RegimeTag::SubcriticalB
        };
        (tag, None, None)
    } else if gamma == f64::INFINITY {
        let profile = match model.hints().and_then(|h| h.local_profile) {
            Some(p) => p,
            None => {
                let c = probe_limit(|x| model.ddu(x), "lim u''(x)")?;
                if c == f64::INFINITY {
                    LocalProfile::HardStep
                } else if c == 0.0 || c.abs() <= AGREE_TOL {
                    LocalProfile::Gaussian
                } else if c.is_finite() && c > 0.0 {
                    LocalProfile::DiscreteGaussian(c)
                } else {
                    return Err(Error::RegimeMismatch(format!(
                        "supercritical model with lim u'' = {} < 0",
                        fmt_ext(c)
                    )));
                }
            }
        };
        (RegimeTag::Supercritical, None, Some(profile))
    } else {
        let dec = decompose_critical(model, mu_star)?;
        (RegimeTag::Critical, Some(dec), None)
    };
    Ok(RegimeReport {
        gamma_limit: gamma,
        mu_star,
        regime,
        critical,
        local_profile,
        non_monotone,
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::make_model;

    #[test]
    fn mu_star_examples() {
        let m = make_model("expr:-2*x + ln(x)").unwrap();
        assert!((estimate_mu_star(&m).unwrap() - 2.0).abs() < 1e-6);

        let m = make_model("uniform").unwrap();
        assert_eq!(estimate_mu_star(&m).unwrap(), f64::NEG_INFINITY);

        let m = make_model("critical:mustar=0,d=2,v=const:0").unwrap();
        assert_eq!(estimate_mu_star(&m).unwrap(), 0.0);
    }

    #[test]
    fn classify_uniform_is_supercritical_gaussian() {
        let m = make_model("uniform").unwrap();
        let r = classify(&m).unwrap();
        assert_eq!(r.regime, RegimeTag::Supercritical);
        assert_eq!(r.gamma_limit, f64::INFINITY);
        assert_eq!(r.local_profile, Some(LocalProfile::Gaussian));
        assert!(!r.evidence.is_empty());
    }

    #[test]
    fn classify_quadratic_is_discrete_gaussian() {
        let m = make_model("power:p=2,a=0.5").unwrap();
        let r = classify(&m).unwrap();
        assert_eq!(r.regime, RegimeTag::Supercritical);
        assert_eq!(r.local_profile, Some(LocalProfile::DiscreteGaussian(1.0)));
    }

    #[test]
    fn classify_cubic_is_hard_step() {
        let m = make_model("power:p=3,a=1").unwrap();
        let r = classify(&m).unwrap();
        assert_eq!(r.local_profile, Some(LocalProfile::HardStep));
    }

    #[test]
    fn classify_log_model_is_critical_const() {
        // probe path: expression, no hints
        let m = make_model("expr:ln(x)").unwrap();
        let r = classify(&m).unwrap();
        assert_eq!(r.regime, RegimeTag::Critical);
        assert!((r.gamma_limit - (-1.0)).abs() < 1e-9);
        let c = r.critical.unwrap();
        assert!((c.d - 0.0).abs() < 1e-9);
        assert_eq!(c.v_behavior, VBehavior::ToConst);
        assert!(c.c.unwrap().abs() < 1e-9);
    }

    #[test]
    fn decompose_matches_constructor_parameters() {
        // u = -x + 3 ln x: mu* = 1, 1-d = 3 -> d = -2, v = 0
        let m = make_model("expr:-1*x + 3*ln(x)").unwrap();
        let mu_star = estimate_mu_star(&m).unwrap();
        assert!((mu_star - 1.0).abs() < 1e-6);
        let dec = decompose_critical(&m, mu_star).unwrap();
        assert!((dec.d - (-2.0)).abs() < 1e-8);
        assert_eq!(dec.v_behavior, VBehavior::ToConst);
        assert!(dec.c.unwrap().abs() < 1e-6);

        // hint path recovers all constructor parameters exactly
        let m = make_model("critical:mustar=0.5,d=2,v=const:1.25").unwrap();
        let dec = decompose_critical(&m, 0.5).unwrap();
        assert_eq!(dec.d, 2.0);
        assert_eq!(dec.c, Some(1.25));
    }

    #[test]
    fn slow_log_divergence_is_detected() {
        // u = ln x - sqrt(ln x): d = 0, v = -sqrt(ln x) -> -inf very slowly.
        // x^2 u'' converges to -1 too slowly for the probe window (the
        // remainder decays like 1/ln x), so gamma comes in as a hint and
        // only the v tail is probed.
        let m = make_model("expr:ln(x) - (ln(x))^0.5")
            .unwrap()
            .with_hints(crate::energy::AnalyticHints {
                mu_star: Some(0.0),
                gamma_limit: Some(-1.0),
                ..Default::default()
            });
        let dec = decompose_critical(&m, 0.0).unwrap();
        assert_eq!(dec.d, 0.0);
        assert_eq!(dec.v_behavior, VBehavior::ToMinusInf);
    }

    #[test]
    fn subcritical_b_from_squared_log() {
        let m = make_model("expr:(ln(x))^2").unwrap();
        let r = classify(&m).unwrap();
        assert_eq!(r.gamma_limit, f64::NEG_INFINITY);
        assert!(r.mu_star.abs() < 1e-6);
        assert_eq!(r.regime, RegimeTag::SubcriticalB);
    }

    #[test]
    fn subcritical_a_from_negative_xlogx() {
        // u = -x ln x: u' = -ln x - 1 -> -inf, so mu* = +inf
        let m = make_model("expr:-1*x*ln(x)").unwrap();
        let r = classify(&m).unwrap();
        assert_eq!(r.regime, RegimeTag::SubcriticalA);
        assert_eq!(r.mu_star, f64::INFINITY);
    }

    #[test]
    fn dyadic_hints_short_circuit() {
        let m = make_model("dyadic").unwrap();
        let r = classify(&m).unwrap();
        assert_eq!(r.regime, RegimeTag::Supercritical);
        assert_eq!(r.local_profile, Some(LocalProfile::Gaussian));
        assert!(r.non_monotone);
    }

    #[test]
    fn oscillatory_model_is_inconclusive() {
        let m = make_model("expr:sin(ln(x))").unwrap();
        match classify(&m) {
            Err(Error::InconclusiveLimit { probes, .. }) => {
                assert_eq!(probes.len(), 31);
            }
            other => panic!("expected InconclusiveLimit, got {other:?}"),
        }
    }

    #[test]
    fn classification_is_deterministic() {
        let a = classify(&make_model("uniform").unwrap()).unwrap();
        let b = classify(&make_model("uniform").unwrap()).unwrap();
        assert_eq!(a.to_key_values(), b.to_key_values());
    }

    #[test]
    fn report_serialization() {
        let r = classify(&make_model("expr:ln(x)").unwrap()).unwrap();
        let kv = r.to_key_values();
        assert!(kv.contains("regime=Critical"));
        assert!(kv.contains("critical.d="));
        assert!(kv.contains("evidence.x=1024 "));
        let j = r.to_json();
        assert_eq!(j["regime"], "Critical");
        assert_eq!(j["critical"]["v_behavior"], "ToConst");

        let r = classify(&make_model("uniform").unwrap()).unwrap();
        assert_eq!(r.to_json()["gamma_limit"], "inf");
        assert!(r.to_key_values().contains("mu_star=-inf"));
    }
}
