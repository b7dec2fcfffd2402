//! Horizontal scaling kappa(mu), the mass mode kappa-hat, the local scale
//! zeta, and the ScalingPlan that every curve evaluation carries.

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::regime::{CriticalDecomposition, LocalProfile, RegimeReport, RegimeTag, VBehavior};
use crate::series;

/// Everything needed to rescale a sampled partition into curve coordinates.
/// The vertical factor E[M]/kappa is stored as a logarithm: it reaches
/// e^16000 for steep step models.
#[derive(Debug, Clone)]
pub struct ScalingPlan {
    pub mu: f64,
    pub kappa: f64,
    pub kappa_hat: Option<f64>,
    pub zeta: f64,
    /// ln(E[M] / kappa); equals ln((mu - mu*) E[M]) in the critical regime.
    pub ln_vertical: f64,
    pub regime: RegimeTag,
    pub critical: Option<CriticalDecomposition>,
    pub local_profile: Option<LocalProfile>,
}

impl ScalingPlan {
    /// Vertical factor in linear scale (may overflow to +inf).
    pub fn vertical(&self) -> f64 {
        self.ln_vertical.exp()
    }

    /// Critical case (c): d = 0 and v -> C, where curves use raw counts
    /// (eq. 25) instead of the 1/(mu E[M]) normalization.
    pub fn is_process_case(&self) -> bool {
        matches!(
            self.critical,
            Some(CriticalDecomposition {
                d,
                v_behavior: VBehavior::ToConst,
                ..
            }) if d.abs() < 1e-9
        )
    }
}

/// Smallest dyadic probe X0 = 2^j with u'' positive there and at the next
/// three probes: the start of the eventual-convexity region where the root
/// of u'(x) = -mu is unique.
fn convexity_start(model: &EnergyModel) -> Result<f64> {
    for j in 0..=60 {
        let ok = (j..j + 4).all(|i| model.ddu(2f64.powi(i)) > 0.0);
        if ok {
            return Ok(2f64.powi(j));
        }
    }
    Err(Error::NoRoot(f64::NAN))
}

fn bisect_increasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // invariant: f(lo) <= 0 < f(hi)
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn solve_on_convex_tail(model: &EnergyModel, g: impl Fn(f64) -> f64) -> Result<f64> {
    let x0 = convexity_start(model)?;
    if g(x0) > 0.0 {
        // g already positive at the convexity start: root is at or below x0;
        // bracket downward (g increasing on the convex tail)
        let mut lo = x0 / 2.0;
        while lo > 1e-12 && g(lo) > 0.0 {
            lo /= 2.0;
        }
        return Ok(bisect_increasing(g, lo, x0));
    }
    let mut hi = x0;
    loop {
        hi *= 2.0;
        if g(hi) > 0.0 {
            break;
        }
        if hi > 2f64.powi(60) {
            return Err(Error::NoRoot(hi));
        }
    }
    Ok(bisect_increasing(g, hi / 2.0, hi))
}

/// Largest root of u'(kappa) = -mu (eq. 13), located in the eventual-
/// convexity region by doubling + bisection to 1e-12 relative.
pub fn solve_kappa(model: &EnergyModel, mu: f64) -> Result<f64> {
    solve_on_convex_tail(model, |x| model.du(x) + mu)
}

/// Root of u'(x) - 1/x = -mu: the mode of the mass summand (Lemma 2.3).
pub fn solve_kappa_hat(model: &EnergyModel, mu: f64) -> Result<f64> {
    solve_on_convex_tail(model, |x| model.du(x) - 1.0 / x + mu)
}

/// Build the full plan for a step (Supercritical) or Critical model.
/// `zeta_override` supplies the caller's scale for HardStep profiles
/// (default sqrt(kappa)).
pub fn make_plan_with_zeta(
    model: &EnergyModel,
    report: &RegimeReport,
    mu: f64,
    zeta_override: Option<f64>,
) -> Result<ScalingPlan> {
    match report.regime {
        RegimeTag::SubcriticalA | RegimeTag::SubcriticalB => Err(Error::RegimeMismatch(
            "no limit shape (and no plan) in the subcritical regime".into(),
        )),
        RegimeTag::Supercritical => {
            let kappa = solve_kappa(model, mu)?;
            let kappa_hat = solve_kappa_hat(model, mu)?;
            let zeta = match zeta_override {
                Some(z) => z,
                None => match report.local_profile {
                    Some(LocalProfile::Gaussian) | None => 1.0 / model.ddu(kappa).sqrt(),
                    Some(LocalProfile::DiscreteGaussian(_)) => 1.0,
                    Some(LocalProfile::HardStep) => kappa.sqrt(),
                },
            };
            let em = series::expected_mass(model, mu, series::DEFAULT_REL_TOL)?;
            Ok(ScalingPlan {
                mu,
                kappa,
                kappa_hat: Some(kappa_hat),
                zeta,
                ln_vertical: em.ln_value - kappa.ln(),
                regime: report.regime,
                critical: None,
                local_profile: report.local_profile,
            })
        }
        RegimeTag::Critical => {
            if !(mu > report.mu_star) {
                return Err(Error::InvalidParameter(format!(
                    "critical plan needs mu > mu* (mu = {mu}, mu* = {})",
                    report.mu_star
                )));
            }
            let kappa = 1.0 / (mu - report.mu_star);
            let em = series::expected_mass(model, mu, series::DEFAULT_REL_TOL)?;
            Ok(ScalingPlan {
                mu,
                kappa,
                kappa_hat: None,
                zeta: 1.0,
                ln_vertical: em.ln_value - kappa.ln(),
                regime: report.regime,
                critical: report.critical,
                local_profile: None,
            })
        }
    }
}

pub fn make_plan(model: &EnergyModel, report: &RegimeReport, mu: f64) -> Result<ScalingPlan> {
    make_plan_with_zeta(model, report, mu, None)
}
