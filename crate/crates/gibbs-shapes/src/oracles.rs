//! Analytic limit shapes and local profiles the simulations are checked
//! against: step, incomplete gamma, Gaussian tail, discrete Gaussian tail,
//! hard step, the dyadic mixed tail, and the Poisson-process intensity tail.

use crate::error::{Error, Result};
use crate::series::poisson_process_mean;
use crate::special::{self, ln_gamma, regularized_gamma_q};

/// F(x) = 1 on [0, 1], 0 beyond (Theorem 2.1).
pub fn step_shape(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else {
        0.0
    }
}

/// G(x) = 1 on (-inf, 0], 0 beyond (hard step local profile).
pub fn hard_step(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Gamma(x; d) = int_x^inf y^{d-1} e^{-y} dy, d > 0.
pub fn upper_incomplete_gamma(x: f64, d: f64) -> Result<f64> {
    if d <= 0.0 {
        return Err(Error::Domain(format!(
            "upper incomplete gamma needs d > 0, got {d}"
        )));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!("need x >= 0, got {x}")));
    }
    special::upper_incomplete_gamma(x, d)
}

/// F(x) = Gamma(x; d) / Gamma(d+1) (Theorem 2.5). At d = 0 the shape
/// degenerates to the exponential integral E1(x).
pub fn gamma_shape(x: f64, d: f64) -> Result<f64> {
    if d == 0.0 {
        if x <= 0.0 {
            return Err(Error::Domain("gamma_shape at d = 0 needs x > 0".into()));
        }
        return special::exp_integral_e1(x);
    }
    Ok(upper_incomplete_gamma(x, d)? * (-ln_gamma(d + 1.0)).exp())
}

/// G(x) = P{N(0,1) > x}, evaluated through the regularized incomplete
/// gamma: Phi_c(x) = Q(x^2/2; 1/2) / 2 for x > 0.
pub fn gaussian_tail(x: f64) -> f64 {
    if x == 0.0 {
        0.5
    } else if x > 0.0 {
        0.5 * regularized_gamma_q(0.5 * x * x, 0.5).expect("d > 0")
    } else {
        1.0 - gaussian_tail(-x)
    }
}

/// M_c = sum over all integers of e^{-c k^2 / 2}.
pub fn discrete_gaussian_norm(c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::Domain(format!("discrete Gaussian needs c > 0, got {c}")));
    }
    let mut total = 1.0; // k = 0
    let mut k = 1.0f64;
    loop {
        let t = (-0.5 * c * k * k).exp();
        total += 2.0 * t;
        if t < 1e-18 * total {
            return Ok(total);
        }
        k += 1.0;
    }
}

/// G(x) = (1/M_c) sum_{k >= x, k integer} e^{-c k^2 / 2} (discrete
/// Gaussian local profile, lattice spacing 1).
pub fn discrete_gaussian_tail(x: f64, c: f64) -> Result<f64> {
    let norm = discrete_gaussian_norm(c)?;
    let k0 = x.ceil();
    if k0 <= 0.0 {
        // sum_{k >= k0} = M_c - sum_{k < k0} = M_c - sum_{j >= 1-k0} (by
        // k -> -k symmetry), and 1 - k0 >= 1 keeps the recursion one-deep
        return Ok(1.0 - discrete_gaussian_tail(1.0 - k0, c)?);
    }
    let mut k = k0;
    let mut sum = 0.0;
    loop {
        let t = (-0.5 * c * k * k).exp();
        sum += t;
        if t == 0.0 || t < 1e-18 * sum {
            return Ok(sum / norm);
        }
        k += 1.0;
    }
}

/// The section 3.4 counterexample tail along kappa~_n = 2^n:
/// G~(x) = A int_x^inf h, h = e^{-t^2/4} (t > 0) / e^{-t^2/2} (t <= 0),
/// A = sqrt(2)/((1+sqrt(2)) sqrt(pi)).
pub fn mixed_counterexample_tail(x: f64) -> f64 {
    let s2 = std::f64::consts::SQRT_2;
    if x >= 0.0 {
        // A * sqrt(2) * sqrt(2 pi) * Phi_c(x / sqrt(2))
        2.0 * s2 / (1.0 + s2) * gaussian_tail(x / s2)
    } else {
        ((s2 - 1.0) + 2.0 * gaussian_tail(x)) / (1.0 + s2)
    }
}

/// The named limit shapes; `eval` is the analytic curve each kind
/// predicts for the matching estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeOracle {
    Step,
    /// Incomplete-gamma shape with parameter d (Critical case b).
    Gamma(f64),
    /// Identically zero (Critical case a).
    Zero,
    Gaussian,
    DiscreteGaussian(f64),
    HardStep,
    MixedCounterexample,
    /// Poisson point process with intensity e^{-C-x}/x (Critical case c);
    /// eval gives the expected count above x, e^{-C}(E1(x)).
    PoissonProcessLaw(f64),
}

impl ShapeOracle {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            ShapeOracle::Step => Ok(step_shape(x)),
            ShapeOracle::Gamma(d) => gamma_shape(x, *d),
            ShapeOracle::Zero => Ok(0.0),
            ShapeOracle::Gaussian => Ok(gaussian_tail(x)),
            ShapeOracle::DiscreteGaussian(c) => discrete_gaussian_tail(x, *c),
            ShapeOracle::HardStep => Ok(hard_step(x)),
            ShapeOracle::MixedCounterexample => Ok(mixed_counterexample_tail(x)),
            ShapeOracle::PoissonProcessLaw(c) => {
                if x <= 0.0 {
                    return Err(Error::Domain(
                        "process-law tail defined for x > 0".into(),
                    ));
                }
                Ok(poisson_process_mean(*c, x, f64::INFINITY))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            ShapeOracle::Step => "step".into(),
            ShapeOracle::Gamma(d) => format!("gamma(d={d})"),
            ShapeOracle::Zero => "zero".into(),
            ShapeOracle::Gaussian => "gaussian".into(),
            ShapeOracle::DiscreteGaussian(c) => format!("discrete_gaussian(c={c})"),
            ShapeOracle::HardStep => "hard_step".into(),
            ShapeOracle::MixedCounterexample => "mixed".into(),
            ShapeOracle::PoissonProcessLaw(c) => format!("process(C={c})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_and_hard_step() {
        assert_eq!(step_shape(0.5), 1.0);
        assert_eq!(step_shape(1.0), 1.0);
        assert_eq!(step_shape(1.5), 0.0);
        assert_eq!(hard_step(-1.0), 1.0);
        assert_eq!(hard_step(0.0), 1.0);
        assert_eq!(hard_step(0.1), 0.0);
    }

    #[test]
    fn incomplete_gamma_values() {
        assert!((upper_incomplete_gamma(1.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-13);
        assert!((upper_incomplete_gamma(0.0, 2.0).unwrap() - 1.0).abs() < 1e-13);
        assert!(
            (upper_incomplete_gamma(1.0, 2.0).unwrap() - 0.735_758_882_342_884_643_19).abs()
                < 1e-13
        );
        assert!(upper_incomplete_gamma(1.0, 0.0).is_err());
        assert!(upper_incomplete_gamma(-1.0, 1.0).is_err());
    }

    #[test]
    fn gamma_shape_values() {
        assert!((gamma_shape(0.0, 2.0).unwrap() - 0.5).abs() < 1e-13);
        assert!((gamma_shape(1.0, 1.0).unwrap() - (-1f64).exp()).abs() < 1e-13);
        assert!((gamma_shape(1.0, 2.0).unwrap() - (-1f64).exp()).abs() < 1e-13);
        // d = 1 identity on a few points
        for x in [0.1, 1.0, 5.0] {
            assert!((gamma_shape(x, 1.0).unwrap() - (-x).exp()).abs() < 1e-12);
        }
        // gamma_shape(0, d) = 1/d
        for d in [0.5, 1.0, 2.0, 3.5] {
            assert!((gamma_shape(0.0, d).unwrap() - 1.0 / d).abs() < 1e-12);
        }
        // d = 0 degenerates to E1
        assert!(
            (gamma_shape(1.0, 0.0).unwrap() - 0.219_383_934_395_520_273_68).abs() < 1e-12
        );
    }

    #[test]
    fn gamma_shape_is_decreasing() {
        let d = 1.7;
        let mut last = f64::INFINITY;
        for i in 0..60 {
            let x = i as f64 * 0.1;
            let v = gamma_shape(x, d).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn gaussian_tail_reference_values() {
        assert_eq!(gaussian_tail(0.0), 0.5);
        assert!((gaussian_tail(1.96) - 0.024_997_895_148_220_434_137).abs() < 1e-12);
        assert!((gaussian_tail(0.5) - 0.308_537_538_725_986_896_36).abs() < 1e-12);
        assert!(
            (gaussian_tail(8.0) - 6.220_960_574_271_784_123_5e-16).abs() < 1e-27
        );
        assert!((gaussian_tail(-1.5) - 0.933_192_798_731_141_934).abs() < 1e-12);
        assert!((gaussian_tail(-40.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn discrete_gaussian_values() {
        // M_2 = 1 + 2(e^-1 + e^-4 + e^-9 + ...)
        let m2 = discrete_gaussian_norm(2.0).unwrap();
        assert!((m2 - 1.772_637_204_826_652_153).abs() < 1e-12);
        let g1 = discrete_gaussian_tail(1.0, 2.0).unwrap();
        assert!((g1 - 0.217_934_386_890_578_962_7).abs() < 1e-12);
        assert!((discrete_gaussian_tail(-50.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(discrete_gaussian_tail(0.0, -1.0).is_err());
    }

    #[test]
    fn discrete_gaussian_partitions_the_lattice() {
        // tail from x plus strict complement (tail from -x+1 mirrored) is 1
        for x in [-3.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
            let a = discrete_gaussian_tail(x, 1.0).unwrap();
            let b = discrete_gaussian_tail(-x + 1.0, 1.0).unwrap();
            assert!((a + b - 1.0).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn discrete_gaussian_riemann_limit() {
        // sqrt(c/2pi) M_c -> 1 as c -> 0
        let c = 1e-4;
        let m = discrete_gaussian_norm(c).unwrap();
        let scaled = (c / (2.0 * std::f64::consts::PI)).sqrt() * m;
        assert!((scaled - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mixed_tail_values() {
        let s2 = std::f64::consts::SQRT_2;
        assert!((mixed_counterexample_tail(0.0) - s2 / (1.0 + s2)).abs() < 1e-13);
        assert!((mixed_counterexample_tail(-60.0) - 1.0).abs() < 1e-13);
        assert!(mixed_counterexample_tail(60.0).abs() < 1e-13);
        // frozen reference at the acceptance separation point
        assert!(
            (mixed_counterexample_tail(1.2) - 0.232_055_729_329_789_743_02).abs() < 1e-12
        );
        // gap to the plain Gaussian tail there is ~0.117
        let gap = mixed_counterexample_tail(1.2) - gaussian_tail(1.2);
        assert!((gap - 0.116_986_059_108_081_474_99).abs() < 1e-12);
        // continuity at 0
        let eps = 1e-9;
        assert!(
            (mixed_counterexample_tail(eps) - mixed_counterexample_tail(-eps)).abs() < 1e-8
        );
    }

    #[test]
    fn oracle_eval_dispatch() {
        assert_eq!(ShapeOracle::Step.eval(0.3).unwrap(), 1.0);
        assert_eq!(ShapeOracle::Zero.eval(5.0).unwrap(), 0.0);
        let p = ShapeOracle::PoissonProcessLaw(0.0).eval(1.0).unwrap();
        assert!((p - 0.219_383_934_395_520_273_68).abs() < 1e-12);
        assert!(ShapeOracle::PoissonProcessLaw(0.0).eval(0.0).is_err());
        assert_eq!(ShapeOracle::Gamma(2.0).name(), "gamma(d=2)");
    }
}
