//! Command-line interface: classify, simulate, curve, local, verify, and
//! enumerate subcommands. Options come from flags and an optional flat
//! key=value config file; flags override the file. Exit codes: 0 success,
//! 1 verify failure, 2 config error, 3 numeric failure.

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::acceptance::{run_all, MANIFEST_VERSION};
use crate::energy::{make_model, EnergyModel};
use crate::ensemble::{sample_batch, truncation_k};
use crate::error::{Error, Result};
use crate::oracles::ShapeOracle;
use crate::regime::{classify, LocalProfile, RegimeReport, RegimeTag, VBehavior};
use crate::scaling::{make_plan, ScalingPlan};
use crate::verify::{enumerate_profiles, estimate_curve, CurveKind, EmpiricalCurve};

pub fn version_string() -> String {
    format!(
        "gibbs-shapes {} manifest {}",
        env!("CARGO_PKG_VERSION"),
        MANIFEST_VERSION
    )
}

/// Every tunable a run can carry, merged from config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Option<String>,
    pub mu: Option<f64>,
    pub mu_list: Option<Vec<f64>>,
    pub seed: u64,
    pub n: Option<usize>,
    /// (start, end, step)
    pub grid: Option<(f64, f64, f64)>,
    pub exclude: Option<(f64, f64)>,
    pub eps_tail: f64,
    pub rel_tol: f64,
    pub output: Option<PathBuf>,
    pub oracle: Option<String>,
    /// Mass for `enumerate`.
    pub m: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: None,
            mu: None,
            mu_list: None,
            seed: 0,
            n: None,
            grid: None,
            exclude: None,
            eps_tail: 1e-9,
            rel_tol: 1e-10,
            output: None,
            oracle: None,
            m: None,
        }
    }
}

fn parse_grid_spec(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("grid must be a:b:step, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let vals: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, step) = (vals[0], vals[1], vals[2]);
    if !(step > 0.0 && b >= a) {
        return Err(bad());
    }
    Ok((a, b, step))
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let bad = || Error::Config(format!("{what} must be lo,hi, got {s:?}"));
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo = parts[0].parse().map_err(|_| bad())?;
    let hi = parts[1].parse().map_err(|_| bad())?;
    if lo >= hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

impl RunConfig {
    /// Parse a flat key=value file. Unknown keys are rejected; '#' lines
    /// and blank lines are ignored.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad =
                |k: &str| Error::Config(format!("line {}: bad value for {k}", lineno + 1));
            match key {
                "model" => cfg.model = Some(value.to_string()),
                "mu" => cfg.mu = Some(value.parse().map_err(|_| bad("mu"))?),
                "mu_list" => {
                    cfg.mu_list = Some(
                        value
                            .split(',')
                            .map(|v| v.trim().parse().map_err(|_| bad("mu_list")))
                            .collect::<Result<_>>()?,
                    )
                }
                "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
                "n" => cfg.n = Some(value.parse().map_err(|_| bad("n"))?),
                "grid" => cfg.grid = Some(parse_grid_spec(value)?),
                "exclude" => cfg.exclude = Some(parse_pair(value, "exclude")?),
                "eps_tail" => cfg.eps_tail = value.parse().map_err(|_| bad("eps_tail"))?,
                "rel_tol" => cfg.rel_tol = value.parse().map_err(|_| bad("rel_tol"))?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                "oracle" => cfg.oracle = Some(value.to_string()),
                "M" => cfg.m = Some(value.parse().map_err(|_| bad("M"))?),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    /// Inverse of [`RunConfig::parse`]: a flat key=value block.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        if let Some(m) = &self.model {
            out.push_str(&format!("model={m}\n"));
        }
        if let Some(mu) = self.mu {
            out.push_str(&format!("mu={mu}\n"));
        }
        if let Some(l) = &self.mu_list {
            let joined: Vec<String> = l.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("mu_list={}\n", joined.join(",")));
        }
        out.push_str(&format!("seed={}\n", self.seed));
        if let Some(n) = self.n {
            out.push_str(&format!("n={n}\n"));
        }
        if let Some((a, b, s)) = self.grid {
            out.push_str(&format!("grid={a}:{b}:{s}\n"));
        }
        if let Some((l, h)) = self.exclude {
            out.push_str(&format!("exclude={l},{h}\n"));
        }
        out.push_str(&format!("eps_tail={}\n", self.eps_tail));
        out.push_str(&format!("rel_tol={}\n", self.rel_tol));
        if let Some(p) = &self.output {
            out.push_str(&format!("output={}\n", p.display()));
        }
        if let Some(o) = &self.oracle {
            out.push_str(&format!("oracle={o}\n"));
        }
        if let Some(m) = self.m {
            out.push_str(&format!("M={m}\n"));
        }
        out
    }
}

#[derive(Debug, Args, Default)]
struct CommonOpts {
    /// Flat key=value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model spec, e.g. "uniform", "power:p=2,a=0.5", "expr:x^2/2".
    #[arg(long)]
    model: Option<String>,
    /// Chemical potential.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Comma-separated list of chemical potentials (simulate only).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    mu_list: Option<Vec<f64>>,
    /// RNG seed; sample i always uses stream i of this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte Carlo samples.
    #[arg(long)]
    n: Option<usize>,
    /// Evaluation grid "start:end:step".
    #[arg(long)]
    grid: Option<String>,
    /// Window "lo,hi" excluded from sup-distance comparison.
    #[arg(long)]
    exclude: Option<String>,
    /// Certified bound on the neglected alpha tail.
    #[arg(long)]
    eps_tail: Option<f64>,
    /// Relative tolerance for series sums.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Oracle curve: auto, step, zero, gaussian, hard_step, mixed,
    /// gamma:d=<d>, discrete_gaussian:c=<c>, process:C=<C>.
    #[arg(long)]
    oracle: Option<String>,
}

impl CommonOpts {
    fn merge(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::parse(&std::fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.model {
            cfg.model = Some(v.clone());
        }
        if let Some(v) = self.mu {
            cfg.mu = Some(v);
        }
        if let Some(v) = &self.mu_list {
            cfg.mu_list = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.n {
            cfg.n = Some(v);
        }
        if let Some(v) = &self.grid {
            cfg.grid = Some(parse_grid_spec(v)?);
        }
        if let Some(v) = &self.exclude {
            cfg.exclude = Some(parse_pair(v, "exclude")?);
        }
        if let Some(v) = self.eps_tail {
            cfg.eps_tail = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = &self.output {
            cfg.output = Some(v.clone());
        }
        if let Some(v) = &self.oracle {
            cfg.oracle = Some(v.clone());
        }
        Ok(cfg)
    }
}

#[derive(Debug, Parser)]
#[command(name = "gibbs-shapes", version, about = "Gibbs ensembles of set partitions: regime classification, sampling, and limit-shape verification")]
pub struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Classify the asymptotic regime of an energy model.
    Classify {
        #[command(flatten)]
        opts: CommonOpts,
        /// Emit the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Sample partitions and export them as text.
    Simulate {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Monte Carlo estimate of the rescaled size-distribution curve.
    Curve {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Monte Carlo estimate of the local profile near kappa.
    Local {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run the full acceptance manifest.
    Verify {
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Exact profile enumeration at a fixed mass.
    Enumerate {
        #[command(flatten)]
        opts: CommonOpts,
        /// Partition mass (1..=14).
        #[arg(long = "M")]
        m: Option<u64>,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::UnsupportedDerivative(_)
        | Error::InvalidParameter(_)
        | Error::Config(_)
        | Error::Io(_) => 2,
        _ => 3,
    }
}

fn require<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::Config(format!("missing required option --{name}")))
}

fn build_grid(cfg: &RunConfig) -> Result<Vec<f64>> {
    let (a, b, step) = require(&cfg.grid, "grid")?;
    let n = ((b - a) / step).round() as usize;
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// The oracle the classified regime predicts for this curve kind.
fn auto_oracle(kind: CurveKind, plan: &ScalingPlan) -> Result<ShapeOracle> {
    match kind {
        CurveKind::Local => match plan.local_profile {
            Some(LocalProfile::Gaussian) => Ok(ShapeOracle::Gaussian),
            Some(LocalProfile::DiscreteGaussian(c)) => Ok(ShapeOracle::DiscreteGaussian(c)),
            Some(LocalProfile::HardStep) => Ok(ShapeOracle::HardStep),
            None => Err(Error::RegimeMismatch(
                "no local profile in this regime".into(),
            )),
        },
        CurveKind::Rescaled => match plan.regime {
            RegimeTag::Supercritical => Ok(ShapeOracle::Step),
            RegimeTag::Critical => {
                let c = plan.critical.ok_or_else(|| {
                    Error::RegimeMismatch("critical plan without decomposition".into())
                })?;
                if c.d > 0.0 || (c.d == 0.0 && c.v_behavior == VBehavior::ToMinusInf) {
                    Ok(ShapeOracle::Gamma(c.d))
                } else if c.d == 0.0 && c.v_behavior == VBehavior::ToConst {
                    Ok(ShapeOracle::PoissonProcessLaw(c.c.unwrap_or(0.0)))
                } else {
                    Ok(ShapeOracle::Zero)
                }
            }
            _ => Err(Error::RegimeMismatch(
                "rescaled curves need a step or critical plan".into(),
            )),
        },
    }
}

fn parse_oracle_name(s: &str) -> Result<ShapeOracle> {
    let param = |spec: &str, prefix: &str| -> Result<f64> {
        spec[prefix.len()..]
            .parse()
            .map_err(|_| Error::Config(format!("bad oracle parameter in {spec:?}")))
    };
    match s {
        "step" => Ok(ShapeOracle::Step),
        "zero" => Ok(ShapeOracle::Zero),
        "gaussian" => Ok(ShapeOracle::Gaussian),
        "hard_step" => Ok(ShapeOracle::HardStep),
        "mixed" => Ok(ShapeOracle::MixedCounterexample),
        _ if s.starts_with("gamma:d=") => Ok(ShapeOracle::Gamma(param(s, "gamma:d=")?)),
        _ if s.starts_with("discrete_gaussian:c=") => Ok(ShapeOracle::DiscreteGaussian(
            param(s, "discrete_gaussian:c=")?,
        )),
        _ if s.starts_with("process:C=") => {
            Ok(ShapeOracle::PoissonProcessLaw(param(s, "process:C=")?))
        }
        _ => Err(Error::Config(format!("unknown oracle {s:?}"))),
    }
}

/// Resolve --oracle. "auto" follows the regime; a manual oracle of a
/// different shape family than the regime predicts is a config error
/// (mixed is allowed for any local curve: it is a subsequence limit).
fn resolve_oracle(name: &str, kind: CurveKind, plan: &ScalingPlan) -> Result<ShapeOracle> {
    let auto = auto_oracle(kind, plan)?;
    if name == "auto" {
        return Ok(auto);
    }
    let manual = parse_oracle_name(name)?;
    let compatible = std::mem::discriminant(&manual) == std::mem::discriminant(&auto)
        || (matches!(manual, ShapeOracle::MixedCounterexample)
            && matches!(kind, CurveKind::Local));
    if !compatible {
        return Err(Error::Config(format!(
            "oracle {name:?} does not match the classified regime (expected {})",
            auto.name()
        )));
    }
    Ok(manual)
}

fn classify_text(report: &RegimeReport, json: bool) -> String {
    if json {
        return format!("{:#}\n", report.to_json());
    }
    let mut first = format!("regime={}", report.regime.name());
    if let Some(p) = &report.local_profile {
        first.push_str(&format!(" local={}", p.name()));
    }
    let mu_star = if report.mu_star == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if report.mu_star == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{}", report.mu_star)
    };
    first.push_str(&format!(" mu_star={mu_star}"));
    let rest: String = report
        .to_key_values()
        .lines()
        .filter(|l| {
            !(l.starts_with("regime=")
                || l.starts_with("mu_star=")
                || l.starts_with("local_profile="))
        })
        .map(|l| format!("{l}\n"))
        .collect();
    format!("{first}\n{rest}")
}

fn batch_text(model: &EnergyModel, cfg: &RunConfig, mu: f64) -> Result<String> {
    let n = require(&cfg.n, "n")?;
    let k_max = truncation_k(model, mu, cfg.eps_tail)?;
    let batch = sample_batch(model, mu, k_max, n, cfg.seed);
    let mut out = String::new();
    out.push_str(&format!("# model={}\n", model.spec_string()));
    out.push_str(&format!("# mu={mu}\n"));
    out.push_str(&format!("# k_max={k_max}\n"));
    out.push_str(&format!("# seed={}\n", cfg.seed));
    out.push_str(&format!("# version={}\n", version_string()));
    out.push_str(&batch.export_lines());
    Ok(out)
}

fn curve_csv(
    model: &EnergyModel,
    cfg: &RunConfig,
    kind: CurveKind,
) -> Result<String> {
    let mu = require(&cfg.mu, "mu")?;
    let n = require(&cfg.n, "n")?;
    let grid = build_grid(cfg)?;
    let report = classify(model)?;
    let plan = make_plan(model, &report, mu)?;
    let oracle_name = cfg.oracle.clone().unwrap_or_else(|| "auto".into());
    let oracle = resolve_oracle(&oracle_name, kind, &plan)?;
    let curve: EmpiricalCurve = estimate_curve(
        model,
        &plan,
        kind,
        &grid,
        cfg.exclude,
        n,
        cfg.seed,
        cfg.eps_tail,
    )?;
    let mut out = String::new();
    out.push_str(&format!("# model={}\n", model.spec_string()));
    out.push_str(&format!("# mu={mu}\n"));
    out.push_str(&format!("# regime={}\n", plan.regime.name()));
    out.push_str(&format!("# kappa={}\n", plan.kappa));
    out.push_str(&format!("# zeta={}\n", plan.zeta));
    out.push_str(&format!("# ln_vertical={}\n", plan.ln_vertical));
    out.push_str(&format!("# seed={}\n", cfg.seed));
    out.push_str(&format!("# oracle={}\n", oracle.name()));
    if let Some((l, h)) = cfg.exclude {
        out.push_str(&format!("# exclude={l},{h}\n"));
    }
    out.push_str(&format!("# version={}\n", version_string()));
    out.push_str("x,empirical_mean,empirical_sd,oracle,n\n");
    for (j, &x) in curve.grid.iter().enumerate() {
        let o = oracle.eval(x).unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{x},{},{},{o},{n}\n",
            curve.mean[j], curve.sd[j]
        ));
    }
    Ok(out)
}

fn execute(cmd: &Cmd) -> Result<i32> {
    match cmd {
        Cmd::Classify { opts, json } => {
            let cfg = opts.merge()?;
            let model = make_model(&require(&cfg.model, "model")?)?;
            let report = classify(&model)?;
            emit(&cfg, &classify_text(&report, *json))?;
            Ok(0)
        }
        Cmd::Simulate { opts } => {
            let cfg = opts.merge()?;
            let model = make_model(&require(&cfg.model, "model")?)?;
            let mus = match (&cfg.mu_list, cfg.mu) {
                (Some(list), _) if !list.is_empty() => list.clone(),
                (_, Some(mu)) => vec![mu],
                _ => return Err(Error::Config("missing required option --mu".into())),
            };
            let mut out = String::new();
            for mu in mus {
                out.push_str(&batch_text(&model, &cfg, mu)?);
            }
            emit(&cfg, &out)?;
            Ok(0)
        }
        Cmd::Curve { opts } => {
            let cfg = opts.merge()?;
            let model = make_model(&require(&cfg.model, "model")?)?;
            emit(&cfg, &curve_csv(&model, &cfg, CurveKind::Rescaled)?)?;
            Ok(0)
        }
        Cmd::Local { opts } => {
            let cfg = opts.merge()?;
            let model = make_model(&require(&cfg.model, "model")?)?;
            emit(&cfg, &curve_csv(&model, &cfg, CurveKind::Local)?)?;
            Ok(0)
        }
        Cmd::Verify { opts } => {
            let cfg = opts.merge()?;
            let bin = std::env::current_exe()?;
            let results = run_all(&bin);
            let mut out = String::new();
            let mut all_pass = true;
            for r in &results {
                out.push_str(&r.report_line());
                out.push('\n');
                if !r.pass {
                    all_pass = false;
                    eprintln!("check {} failed: {}", r.id, r.detail);
                }
            }
            emit(&cfg, &out)?;
            Ok(if all_pass { 0 } else { 1 })
        }
        Cmd::Enumerate { opts, m } => {
            let cfg = opts.merge()?;
            let mass = m
                .or(cfg.m)
                .ok_or_else(|| Error::Config("missing required option --M".into()))?;
            let e = enumerate_profiles(mass)?;
            let mut out = String::from("profile,multiplicity\n");
            for (counts, mult) in &e.profiles {
                let profile: Vec<String> =
                    counts.iter().map(|(k, p)| format!("{k}:{p}")).collect();
                out.push_str(&format!("{},{mult}\n", profile.join(";")));
            }
            emit(&cfg, &out)?;
            Ok(0)
        }
    }
}

/// Parse argv and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig {
            model: Some("power:p=2,a=0.5".into()),
            mu: Some(-40.0),
            mu_list: Some(vec![0.1, 0.01]),
            seed: 7,
            n: Some(200),
            grid: Some((0.0, 2.0, 0.05)),
            exclude: Some((0.9, 1.1)),
            eps_tail: 1e-9,
            rel_tol: 1e-10,
            output: Some(PathBuf::from("out.csv")),
            oracle: Some("auto".into()),
            m: Some(4),
        };
        assert_eq!(RunConfig::parse(&cfg.to_key_values()).unwrap(), cfg);
        let d = RunConfig::default();
        assert_eq!(RunConfig::parse(&d.to_key_values()).unwrap(), d);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            RunConfig::parse("bogus=1\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse("mu=abc\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::parse("grid=0:2\n"),
            Err(Error::Config(_))
        ));
        assert!(RunConfig::parse("# comment\n\nmu=1.5\n").is_ok());
    }

    #[test]
    fn oracle_resolution() {
        let model = make_model("uniform").unwrap();
        let report = classify(&model).unwrap();
        let plan = make_plan(&model, &report, -(50f64.ln())).unwrap();
        assert_eq!(
            resolve_oracle("auto", CurveKind::Rescaled, &plan).unwrap(),
            ShapeOracle::Step
        );
        assert_eq!(
            resolve_oracle("auto", CurveKind::Local, &plan).unwrap(),
            ShapeOracle::Gaussian
        );
        assert_eq!(
            resolve_oracle("mixed", CurveKind::Local, &plan).unwrap(),
            ShapeOracle::MixedCounterexample
        );
        // a zero oracle contradicts a supercritical regime
        assert!(matches!(
            resolve_oracle("zero", CurveKind::Rescaled, &plan),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            resolve_oracle("nonsense", CurveKind::Rescaled, &plan),
            Err(Error::Config(_))
        ));

        let crit = make_model("critical:mustar=0,d=2,v=const:0").unwrap();
        let report = classify(&crit).unwrap();
        let plan = make_plan(&crit, &report, 0.05).unwrap();
        assert_eq!(
            resolve_oracle("auto", CurveKind::Rescaled, &plan).unwrap(),
            ShapeOracle::Gamma(2.0)
        );
        assert!(resolve_oracle("auto", CurveKind::Local, &plan).is_err());
    }

    #[test]
    fn classify_text_matches_expected_summary() {
        let model = make_model("uniform").unwrap();
        let report = classify(&model).unwrap();
        let text = classify_text(&report, false);
        assert!(
            text.starts_with("regime=Supercritical local=Gaussian mu_star=-inf\n"),
            "{text}"
        );
        assert!(text.contains("gamma_limit=inf"));
        let json = classify_text(&report, true);
        assert!(json.contains("\"regime\""));
    }

    #[test]
    fn curve_csv_shape() {
        let cfg = RunConfig {
            model: Some("uniform".into()),
            mu: Some(-5.3),
            n: Some(50),
            grid: Some((0.0, 2.0, 0.05)),
            exclude: Some((0.9, 1.1)),
            seed: 7,
            ..RunConfig::default()
        };
        let model = make_model("uniform").unwrap();
        let csv = curve_csv(&model, &cfg, CurveKind::Rescaled).unwrap();
        let data: Vec<&str> = csv
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("x,"))
            .collect();
        assert_eq!(data.len(), 41);
        assert!(csv.contains("# oracle=step\n"));
        assert!(csv.contains("x,empirical_mean,empirical_sd,oracle,n\n"));
        // oracle column: step values are 1 then 0
        assert!(data[0].ends_with(",1,50"));
        assert!(data[40].ends_with(",0,50"));
    }
}
