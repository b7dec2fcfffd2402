//! Energy functions u(x) with exact first and second derivatives.
//!
//! u absorbs the inverse temperature and the ln Gamma(k+1) background weight,
//! so the Poisson parameter of the part count at size k is
//! alpha_k = exp(-mu k - u(k)).

use crate::error::{Error, Result};
use crate::expr::{differentiate, parse_energy_expression, ExpressionAst};
use crate::regime::{LocalProfile, VBehavior};
use crate::special::{digamma, ln_gamma, trigamma};

/// Sublinear correction v(x) in the critical decomposition
/// u(x) = -mu_star x + (1 - d) ln x + v(x).
#[derive(Debug, Clone, PartialEq)]
pub enum VSpec {
    /// v(x) = C
    Const(f64),
    /// v(x) = c (ln x)^q with 0 < q < 1
    LogPow { c: f64, q: f64 },
    /// v(x) = -ln ln x
    NegLogLog,
}

impl VSpec {
    fn eval(&self, x: f64) -> f64 {
        match self {
            VSpec::Const(c) => *c,
            VSpec::LogPow { c, q } => c * x.ln().powf(*q),
            VSpec::NegLogLog => -x.ln().ln(),
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        match self {
            VSpec::Const(_) => 0.0,
            VSpec::LogPow { c, q } => c * q * x.ln().powf(q - 1.0) / x,
            VSpec::NegLogLog => -1.0 / (x * x.ln()),
        }
    }

    fn deriv2(&self, x: f64) -> f64 {
        match self {
            VSpec::Const(_) => 0.0,
            VSpec::LogPow { c, q } => {
                let l = x.ln();
                c * q * (q - 1.0) * l.powf(q - 2.0) / (x * x) - c * q * l.powf(q - 1.0) / (x * x)
            }
            VSpec::NegLogLog => {
                let l = x.ln();
                (l + 1.0) / (x * x * l * l)
            }
        }
    }

    pub fn behavior(&self) -> (VBehavior, Option<f64>) {
        match self {
            VSpec::Const(c) => (VBehavior::ToConst, Some(*c)),
            VSpec::LogPow { c, .. } if *c > 0.0 => (VBehavior::ToPlusInf, None),
            VSpec::LogPow { .. } => (VBehavior::ToMinusInf, None),
            VSpec::NegLogLog => (VBehavior::ToMinusInf, None),
        }
    }
}

/// Built-in families plus parsed expressions.
#[derive(Debug, Clone)]
pub enum Family {
    /// u(x) = ln Gamma(x+1): uniform measure on set partitions (beta = 0).
    Uniform,
    /// u(x) = a x^p
    Power { p: f64, a: f64 },
    /// u(x) = x (ln x)^p
    XLogPower { p: f64 },
    /// u(x) = -mu_star x + (1 - d) ln x + v(x)
    Critical { mu_star: f64, d: f64, v: VSpec },
    /// The piecewise family with u''(x) = 2^-n on (2^{n-1}, 2^n]
    /// (u''= 1 on (0,1]), u'(1) = u(1) = 0.
    Dyadic,
    /// u given by a parsed expression, differentiated symbolically.
    Expression {
        u: ExpressionAst,
        du: ExpressionAst,
        ddu: ExpressionAst,
    },
}

/// Analytic truth a caller (or a built-in constructor) supplies to bypass
/// numeric limit estimation. Infinities are encoded as f64 infinities.
#[derive(Debug, Clone, Default)]
pub struct AnalyticHints {
    pub mu_star: Option<f64>,
    pub gamma_limit: Option<f64>,
    pub d: Option<f64>,
    pub c: Option<f64>,
    pub v_behavior: Option<VBehavior>,
    pub local_profile: Option<LocalProfile>,
    /// Set when x^2 u''(x) diverges but not monotonically, so local-profile
    /// limits are only defined along subsequences.
    pub non_monotone: bool,
}

/// An energy function with exact derivatives. Immutable after construction.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    family: Family,
    beta: f64,
    hints: Option<AnalyticHints>,
    spec: String,
}

// Dyadic closed form: for x in (2^{n-1}, 2^n], u''(x) = 2^-n,
// u'(x) = (n-1)/2 + (x - 2^{n-1}) 2^-n, and u accumulates per block.
fn dyadic_block(x: f64) -> i32 {
    debug_assert!(x > 1.0);
    // smallest n with x <= 2^n
    let n = x.log2().ceil() as i32;
    if x <= 2f64.powi(n - 1) {
        n - 1
    } else {
        n
    }
}

fn dyadic_du(x: f64) -> f64 {
    if x <= 1.0 {
        return x - 1.0;
    }
    let n = dyadic_block(x);
    let lo = 2f64.powi(n - 1);
    0.5 * (n as f64 - 1.0) + (x - lo) * 2f64.powi(-n)
}

fn dyadic_u(x: f64) -> f64 {
    if x <= 1.0 {
        return 0.5 * (x - 1.0) * (x - 1.0);
    }
    let n = dyadic_block(x);
    // u(2^m) from u(2^{m-1}) plus the block integral
    let mut u_lo = 0.0;
    for m in 1..n {
        u_lo += (m as f64 - 1.0) * 2f64.powi(m - 2) + 2f64.powi(m - 3);
    }
    let lo = 2f64.powi(n - 1);
    let t = x - lo;
    u_lo + 0.5 * (n as f64 - 1.0) * t + 0.5 * t * t * 2f64.powi(-n)
}

fn dyadic_ddu(x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else {
        2f64.powi(-dyadic_block(x))
    }
}

impl EnergyModel {
    pub fn new(family: Family, beta: f64, spec: String) -> Self {
        let hints = match &family {
            Family::Critical { mu_star, d, v } => {
                let (vb, c) = v.behavior();
                Some(AnalyticHints {
                    mu_star: Some(*mu_star),
                    gamma_limit: Some(d - 1.0),
                    d: Some(*d),
                    c,
                    v_behavior: Some(vb),
                    local_profile: None,
                    non_monotone: false,
                })
            }
            Family::Dyadic => Some(AnalyticHints {
                mu_star: Some(f64::NEG_INFINITY),
                gamma_limit: Some(f64::INFINITY),
                d: None,
                c: None,
                v_behavior: None,
                local_profile: Some(LocalProfile::Gaussian),
                non_monotone: true,
            }),
            _ => None,
        };
        EnergyModel {
            family,
            beta,
            hints,
            spec,
        }
    }

    /// Attach (or override) analytic hints.
    pub fn with_hints(mut self, hints: AnalyticHints) -> Self {
        self.hints = Some(hints);
        self
    }

    pub fn hints(&self) -> Option<&AnalyticHints> {
        self.hints.as_ref()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The model-spec string this model was built from.
    pub fn spec_string(&self) -> &str {
        &self.spec
    }

    /// u(x), x > 0.
    pub fn u(&self, x: f64) -> f64 {
        match &self.family {
            Family::Uniform => ln_gamma(x + 1.0),
            Family::Power { p, a } => a * x.powf(*p),
            Family::XLogPower { p } => x * x.ln().powf(*p),
            Family::Critical { mu_star, d, v } => {
                -mu_star * x + (1.0 - d) * x.ln() + v.eval(x)
            }
            Family::Dyadic => dyadic_u(x),
            Family::Expression { u, .. } => u.eval(x),
        }
    }

    /// u'(x).
    pub fn du(&self, x: f64) -> f64 {
        match &self.family {
            Family::Uniform => digamma(x + 1.0),
            Family::Power { p, a } => a * p * x.powf(p - 1.0),
            Family::XLogPower { p } => {
                let l = x.ln();
                l.powf(*p) + p * l.powf(p - 1.0)
            }
            Family::Critical { mu_star, d, v } => -mu_star + (1.0 - d) / x + v.deriv(x),
            Family::Dyadic => dyadic_du(x),
            Family::Expression { du, .. } => du.eval(x),
        }
    }

    /// u''(x).
    pub fn ddu(&self, x: f64) -> f64 {
        match &self.family {
            Family::Uniform => trigamma(x + 1.0),
            Family::Power { p, a } => a * p * (p - 1.0) * x.powf(p - 2.0),
            Family::XLogPower { p } => {
                let l = x.ln();
                // skip the second term when its coefficient vanishes (p = 1):
                // 0 * l^{-1} would be 0 * inf = NaN at x = 1
                let c2 = p * (p - 1.0);
                let t2 = if c2 == 0.0 { 0.0 } else { c2 * l.powf(p - 2.0) };
                (p * l.powf(p - 1.0) + t2) / x
            }
            Family::Critical { d, v, .. } => -(1.0 - d) / (x * x) + v.deriv2(x),
            Family::Dyadic => dyadic_ddu(x),
            Family::Expression { ddu, .. } => ddu.eval(x),
        }
    }

    /// ln alpha_k = -mu k - u(k); never overflows.
    pub fn ln_alpha(&self, mu: f64, k: u64) -> f64 {
        let x = k as f64;
        -mu * x - self.u(x)
    }

    /// alpha_k = exp(-mu k - u(k)). Underflows to 0 gracefully; overflow
    /// past f64 range is a range error.
    pub fn alpha(&self, mu: f64, k: u64) -> Result<f64> {
        let ln_a = self.ln_alpha(mu, k);
        let a = ln_a.exp();
        if a.is_infinite() {
            return Err(Error::Range(format!(
                "alpha overflows: ln alpha = {ln_a} at k = {k}"
            )));
        }
        Ok(a)
    }
}

fn parse_kv(token: &str, key: &str) -> Result<f64> {
    let rest = token
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::Config(format!("expected `{key}=<number>`, got `{token}`")))?;
    rest.parse::<f64>()
        .map_err(|_| Error::Config(format!("bad number in `{token}`")))
}

/// Build a model from the mini-language:
/// `uniform`, `power:p=<r>,a=<r>`, `xlogpower:p=<r>`,
/// `critical:mustar=<r>,d=<r>,v=const:<r>|logpow:c=<r>,q=<r>|negloglog`,
/// `dyadic`, `expr:<expression>[,beta=<r>]` (the expression may be quoted).
///
/// For `expr` without `beta`, the expression is taken as u(x) itself; with
/// `beta=<r>` it is treated as the energy E(x) and
/// u(x) = beta * E(x) + ln Gamma(x+1).
pub fn make_model(spec: &str) -> Result<EnergyModel> {
    let spec_trim = spec.trim();
    let (head, rest) = match spec_trim.find(':') {
        Some(i) => (&spec_trim[..i], &spec_trim[i + 1..]),
        None => (spec_trim, ""),
    };
    match head {
        "uniform" => {
            if !rest.is_empty() {
                return Err(Error::Config("uniform takes no parameters".into()));
            }
            Ok(EnergyModel::new(Family::Uniform, 0.0, "uniform".into()))
        }
        "dyadic" => {
            if !rest.is_empty() {
                return Err(Error::Config("dyadic takes no parameters".into()));
            }
            Ok(EnergyModel::new(Family::Dyadic, 1.0, "dyadic".into()))
        }
        "power" => {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::Config("power needs p=<r>,a=<r>".into()));
            }
            let p = parse_kv(parts[0], "p")?;
            let a = parse_kv(parts[1], "a")?;
            if p <= 0.0 || a <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "power family needs p > 0 and a > 0, got p={p}, a={a}"
                )));
            }
            Ok(EnergyModel::new(
                Family::Power { p, a },
                1.0,
                spec_trim.to_string(),
            ))
        }
        "xlogpower" => {
            let p = parse_kv(rest, "p")?;
            if p <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "xlogpower needs p > 0, got {p}"
                )));
            }
            Ok(EnergyModel::new(
                Family::XLogPower { p },
                1.0,
                spec_trim.to_string(),
            ))
        }
        "critical" => {
            let parts: Vec<&str> = rest.split(',').collect();
            let mut mu_star = None;
            let mut d = None;
            let mut v = None;
            let mut i = 0;
            while i < parts.len() {
                let t = parts[i];
                if t.starts_with("mustar=") {
                    mu_star = Some(parse_kv(t, "mustar")?);
                } else if t.starts_with("d=") {
                    d = Some(parse_kv(t, "d")?);
                } else if let Some(vs) = t.strip_prefix("v=") {
                    if vs == "negloglog" {
                        v = Some(VSpec::NegLogLog);
                    } else if let Some(c) = vs.strip_prefix("const:") {
                        let c = c
                            .parse::<f64>()
                            .map_err(|_| Error::Config(format!("bad number in `{t}`")))?;
                        v = Some(VSpec::Const(c));
                    } else if let Some(cpart) = vs.strip_prefix("logpow:") {
                        let c = parse_kv(cpart, "c")?;
                        i += 1;
                        let qtok = parts.get(i).ok_or_else(|| {
                            Error::Config("logpow needs c=<r>,q=<r>".into())
                        })?;
                        let q = parse_kv(qtok, "q")?;
                        if !(0.0 < q && q < 1.0) {
                            return Err(Error::InvalidParameter(format!(
                                "logpow needs 0 < q < 1, got {q}"
                            )));
                        }
                        v = Some(VSpec::LogPow { c, q });
                    } else {
                        return Err(Error::Config(format!("unknown v spec `{vs}`")));
                    }
                } else {
                    return Err(Error::Config(format!("unknown critical key `{t}`")));
                }
                i += 1;
            }
            let mu_star =
                mu_star.ok_or_else(|| Error::Config("critical needs mustar=<r>".into()))?;
            let d = d.ok_or_else(|| Error::Config("critical needs d=<r>".into()))?;
            let v = v.ok_or_else(|| Error::Config("critical needs v=...".into()))?;
            Ok(EnergyModel::new(
                Family::Critical { mu_star, d, v },
                1.0,
                spec_trim.to_string(),
            ))
        }
        "expr" => {
            let (text, beta) = split_expr_spec(rest)?;
            let ast = parse_energy_expression(&text)?;
            let (u, beta_val) = match beta {
                None => (ast, 1.0),
                Some(b) => {
                    // u = beta * E(x) + lgamma(x+1)
                    let scaled = ExpressionAst::Add(
                        Box::new(ExpressionAst::Mul(
                            Box::new(ExpressionAst::Num(b)),
                            Box::new(ast),
                        )),
                        Box::new(parse_energy_expression("lgamma(x+1)")?),
                    );
                    (scaled, b)
                }
            };
            let du = differentiate(&u)?;
            let ddu = differentiate(&du)?;
            Ok(EnergyModel::new(
                Family::Expression { u, du, ddu },
                beta_val,
                spec_trim.to_string(),
            ))
        }
        other => Err(Error::Config(format!("unknown model family `{other}`"))),
    }
}

/// Split `expr:` payload into (expression text, optional beta). The
/// expression may be wrapped in single or double quotes; unquoted text
/// ends at a trailing `,beta=<r>` if present.
fn split_expr_spec(rest: &str) -> Result<(String, Option<f64>)> {
    let rest = rest.trim();
    if rest.is_empty() {
        return Err(Error::Config("expr needs an expression".into()));
    }
    let (text, tail) = if let Some(q) = rest.strip_prefix('"') {
        let end = q
            .find('"')
            .ok_or_else(|| Error::Config("unterminated quote in expr".into()))?;
        (q[..end].to_string(), &q[end + 1..])
    } else if let Some(q) = rest.strip_prefix('\'') {
        let end = q
            .find('\'')
            .ok_or_else(|| Error::Config("unterminated quote in expr".into()))?;
        (q[..end].to_string(), &q[end + 1..])
    } else if let Some(i) = rest.rfind(",beta=") {
        (rest[..i].to_string(), &rest[i..])
    } else {
        (rest.to_string(), "")
    };
    let tail = tail.trim_start_matches(',').trim();
    let beta = if tail.is_empty() {
        None
    } else {
        Some(parse_kv(tail, "beta")?)
    };
    Ok((text, beta))
}
