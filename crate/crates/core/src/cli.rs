//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 input error, 3 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bounds::{self, Figure, FigureTable};
use crate::channels::{ChannelFamily, ChannelSpec, Choi};
use crate::divergences as dv;
use crate::error::Error;
use crate::ext::ExtReal;
use crate::fisher::{self, FisherKind, Shift};
use crate::sdp;
use crate::selftest;
use crate::tolerance::{self, Tolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "geofish", version, about = "Quantum Fisher information, geometric Rényi divergences and channel bounds")]
pub struct Cli {
    #[command(flatten)]
    pub tol: TolFlags,
    #[command(subcommand)]
    pub command: Command,
}

/// Tolerance overrides; each wins over the matching `QDB_TOL_*` variable.
#[derive(Debug, Args)]
pub struct TolFlags {
    /// Relative eigenvalue cutoff for support detection [env: QDB_TOL_RANK]
    #[arg(long, global = true, display_order = 100, value_name = "REL")]
    pub tol_rank: Option<f64>,
    /// Relative duality-gap target of the SDP solver [env: QDB_TOL_SDP]
    #[arg(long, global = true, display_order = 101, value_name = "REL")]
    pub tol_sdp: Option<f64>,
    /// Base slack of the selftest invariants [env: QDB_TOL_CONSISTENCY]
    #[arg(long, global = true, display_order = 102, value_name = "SLACK")]
    pub tol_consistency: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fisher information of a channel family.
    Fisher(FisherArgs),
    /// Divergences between two channels.
    Divergence(DivergenceArgs),
    /// Error-exponent bounds for discriminating two channels.
    Discriminate(DiscriminateArgs),
    /// Regenerate figure data as CSV.
    Figures(FiguresArgs),
    /// Run the randomized invariant suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FisherQuantity {
    RldChannel,
    SldChannel,
    Heisenberg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Sdp,
    Seesaw,
    Limit,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Closed => "closed",
            MethodArg::Sdp => "sdp",
            MethodArg::Seesaw => "seesaw",
            MethodArg::Limit => "limit",
        }
    }
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    #[arg(long, value_enum)]
    pub quantity: FisherQuantity,
    /// Channel descriptor JSON, or `@path` to read it from a file.
    #[arg(long)]
    pub channel: String,
    /// Parameter value; defaults to the value in the descriptor.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// One method, or two separated by a comma for a cross-check.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub method: Vec<MethodArg>,
    /// Seesaw iterations.
    #[arg(long, default_value_t = bounds::FIGURE_SEESAW_ITERS)]
    pub iters: usize,
    /// Parameter shift of the limit method.
    #[arg(long, default_value_t = fisher::DEFAULT_LIMIT_DELTA)]
    pub delta: f64,
    /// Relative tolerance of the cross-method check; per-pair default when absent.
    #[arg(long)]
    pub cross_tol: Option<f64>,
    /// Omit `runtime_ms` so that output is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DivergenceQuantity {
    GeometricRenyi,
    Bs,
    Fidelity,
    GeometricFidelity,
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    #[arg(long, value_enum)]
    pub quantity: DivergenceQuantity,
    /// First channel descriptor, JSON or `@path`.
    #[arg(long)]
    pub channel: String,
    /// Second channel descriptor, JSON or `@path`.
    #[arg(long)]
    pub channel2: String,
    /// Rényi order, required for geometric-renyi.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Omit `runtime_ms` so that output is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct DiscriminateArgs {
    /// First channel descriptor, JSON or `@path`.
    #[arg(long)]
    pub channel: String,
    /// Second channel descriptor, JSON or `@path`.
    #[arg(long)]
    pub channel2: String,
    /// Number of channel uses for the non-asymptotic bound.
    #[arg(long)]
    pub n: Option<u64>,
    /// Prior probability of the first channel.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Type-II exponent rate for the Hoeffding bound.
    #[arg(long)]
    pub r: Option<f64>,
    /// Skip the pure-input optimization of the Chernoff lower bound.
    #[arg(long)]
    pub skip_lower: bool,
    /// Omit `runtime_ms` so that output is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    EstimateLoss,
    EstimateNoise,
    EstimatePhase,
    #[value(alias = "ch-disc")]
    ChDiscLoss,
    ChDiscNoise,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(long, value_enum)]
    pub name: FigureName,
    /// `start:stop:step`, inclusive of `stop`.
    #[arg(long, default_value = "0.05:0.95:0.05")]
    pub grid: String,
    /// Fixed noise for estimate-loss and estimate-phase.
    #[arg(long = "N", alias = "n", default_value_t = 0.2)]
    pub n: f64,
    /// Fixed loss for estimate-noise.
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Phase parameter at which estimate-phase is evaluated.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub phi: f64,
    /// Fixed loss of the first channel in ch-disc-loss.
    #[arg(long, default_value_t = 0.8)]
    pub gamma1: f64,
    /// Fixed loss of the second channel in ch-disc-loss.
    #[arg(long, default_value_t = 0.7)]
    pub gamma2: f64,
    /// Fixed noise of the first channel in ch-disc-noise.
    #[arg(long = "N1", alias = "n1", default_value_t = 0.2)]
    pub n1: f64,
    /// Fixed noise of the second channel in ch-disc-noise.
    #[arg(long = "N2", alias = "n2", default_value_t = 0.2)]
    pub n2: f64,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Random instances per invariant.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
    fn invariant(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INVARIANT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence(_) | Error::Infeasible(_) | Error::MaxIterations { .. } => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args`, runs the command, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    install_tolerances(&cli.tol)?;
    match &cli.command {
        Command::Fisher(a) => emit(out, &cmd_fisher(a)?),
        Command::Divergence(a) => emit(out, &cmd_divergence(a)?),
        Command::Discriminate(a) => emit(out, &cmd_discriminate(a)?),
        Command::Figures(a) => cmd_figures(a, out),
        Command::Selftest(a) => cmd_selftest(a, out),
    }
}

fn emit(out: &mut dyn Write, v: &Value) -> CliResult<i32> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::input(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| Failure::input(e.to_string()))?;
    Ok(EXIT_OK)
}

fn install_tolerances(flags: &TolFlags) -> CliResult<()> {
    let mut t = Tolerances::from_env().map_err(Failure::input)?;
    for (name, flag, slot) in [
        ("--tol-rank", flags.tol_rank, &mut t.rank_rel),
        ("--tol-sdp", flags.tol_sdp, &mut t.sdp),
        ("--tol-consistency", flags.tol_consistency, &mut t.consistency),
    ] {
        if let Some(v) = flag {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::input(format!("{name}: tolerance must be positive, got {v}")));
            }
            *slot = v;
        }
    }
    if !tolerance::install(t) && tolerance::get() != t {
        return Err(Failure::input("tolerances were already fixed for this process"));
    }
    Ok(())
}

fn parse_channel(arg: &str, flag: &str) -> CliResult<ChannelSpec> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{flag}: cannot read {path}: {e}")))?,
        None => arg.to_owned(),
    };
    ChannelSpec::from_json(&text).map_err(|e| Failure::input(format!("{flag}: {e}")))
}

fn millis(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

fn rel_diff(a: ExtReal, b: ExtReal) -> f64 {
    match (a, b) {
        (ExtReal::Infinite, ExtReal::Infinite) => 0.0,
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).abs() / (1.0 + x.abs().max(y.abs())),
        _ => f64::INFINITY,
    }
}

struct FisherEval {
    method: MethodArg,
    value: ExtReal,
    residual: f64,
    extra: Value,
    runtime_ms: f64,
}

fn fisher_eval(q: FisherQuantity, m: MethodArg, fam: &ChannelFamily, theta: f64, a: &FisherArgs) -> CliResult<FisherEval> {
    let start = Instant::now();
    let (choi, deriv) = fam.at(theta)?;
    let (value, residual, extra) = match (q, m) {
        (FisherQuantity::RldChannel, MethodArg::Closed) => {
            let r = fisher::rld_channel(fam, theta)?;
            (r.value, r.finiteness.residual, Value::Null)
        }
        (FisherQuantity::RldChannel, MethodArg::Sdp) => {
            let rep = fisher::finiteness_report(choi.op(), &deriv, FisherKind::Rld)?;
            let s = sdp::rld_channel_sdp(fam, theta)?;
            (s.value, rep.residual, json!({ "duality_gap": s.gap, "iterations": s.iterations }))
        }
        (FisherQuantity::SldChannel, MethodArg::Seesaw) => {
            let rep = fisher::finiteness_report(choi.op(), &deriv, FisherKind::Sld)?;
            let s = sdp::seesaw::sld_channel_seesaw(fam, theta, a.iters)?;
            (s.value, rep.residual, json!({ "iterations": s.trace.len(), "converged": s.converged }))
        }
        (FisherQuantity::SldChannel, MethodArg::Limit) => {
            let rep = fisher::finiteness_report(choi.op(), &deriv, FisherKind::Sld)?;
            let l = fisher::sld_channel_limit(fam, theta, a.delta, Shift::Central)?;
            let value = if rep.finite { ExtReal::Finite(l.value) } else { ExtReal::Infinite };
            (value, rep.residual, json!({ "delta": l.delta, "extrapolated": l.extrapolated, "richardson_change": l.richardson_change() }))
        }
        (q, m) => {
            return Err(Failure::input(format!(
                "method '{}' is not available for {}; use {}",
                m.name(),
                quantity_name(q),
                allowed_methods(q).iter().map(|m| m.name()).collect::<Vec<_>>().join("|")
            )))
        }
    };
    Ok(FisherEval { method: m, value, residual, extra, runtime_ms: millis(start) })
}

fn quantity_name(q: FisherQuantity) -> &'static str {
    match q {
        FisherQuantity::RldChannel => "rld-channel",
        FisherQuantity::SldChannel => "sld-channel",
        FisherQuantity::Heisenberg => "heisenberg",
    }
}

fn allowed_methods(q: FisherQuantity) -> &'static [MethodArg] {
    match q {
        FisherQuantity::RldChannel | FisherQuantity::Heisenberg => &[MethodArg::Closed, MethodArg::Sdp],
        FisherQuantity::SldChannel => &[MethodArg::Seesaw, MethodArg::Limit],
    }
}

fn default_cross_tol(a: MethodArg, b: MethodArg) -> f64 {
    match (a, b) {
        (MethodArg::Closed, MethodArg::Sdp) | (MethodArg::Sdp, MethodArg::Closed) => 1e-6,
        _ => 1e-2,
    }
}

fn with_fields(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

pub fn cmd_fisher(a: &FisherArgs) -> CliResult<Value> {
    let spec = parse_channel(&a.channel, "--channel")?;
    let fam = spec.family()?;
    let theta = a.theta.unwrap_or_else(|| spec.default_theta());
    if !fam.contains(theta) {
        let (lo, hi) = fam.interval();
        return Err(Failure::input(format!("--theta: {theta} outside parameter interval ({lo}, {hi})")));
    }
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(Failure::input(format!("--delta: must lie in (0, 1), got {}", a.delta)));
    }
    if a.quantity == FisherQuantity::Heisenberg {
        let v = bounds::heisenberg_verdict(&fam, theta)?;
        return Ok(json!({
            "quantity": "heisenberg",
            "theta": theta,
            "blocked": v.blocked,
            "rld": v.rld.to_json(),
            "finiteness_residual": v.residual,
            "tolerance": v.tolerance,
        }));
    }
    let methods = if a.method.is_empty() { vec![allowed_methods(a.quantity)[0]] } else { a.method.clone() };
    if methods.len() > 2 {
        return Err(Failure::input("--method: at most two methods"));
    }
    let evals = methods
        .iter()
        .map(|&m| fisher_eval(a.quantity, m, &fam, theta, a))
        .collect::<CliResult<Vec<_>>>()?;
    let record = |e: &FisherEval| {
        let mut v = json!({
            "method": e.method.name(),
            "value": e.value.to_json(),
            "finiteness_residual": e.residual,
        });
        if !a.no_timing {
            v["runtime_ms"] = json!(e.runtime_ms);
        }
        with_fields(v, e.extra.clone())
    };
    let head = json!({ "quantity": quantity_name(a.quantity), "theta": theta });
    if let [e] = evals.as_slice() {
        return Ok(with_fields(head, record(e)));
    }
    let diff = rel_diff(evals[0].value, evals[1].value);
    let tol = a.cross_tol.unwrap_or_else(|| default_cross_tol(evals[0].method, evals[1].method));
    let abs = match (evals[0].value, evals[1].value) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => json!((x - y).abs()),
        (ExtReal::Infinite, ExtReal::Infinite) => json!(0.0),
        _ => json!("inf"),
    };
    Ok(with_fields(
        head,
        json!({
            "method": methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
            "value": evals[0].value.to_json(),
            "results": evals.iter().map(record).collect::<Vec<_>>(),
            "abs_difference": abs,
            "rel_difference": if diff.is_finite() { json!(diff) } else { json!("inf") },
            "cross_tolerance": tol,
            "consistent": diff <= tol,
        }),
    ))
}

fn channel_pair(a: &str, b: &str) -> CliResult<(Choi, Choi)> {
    let cn = parse_channel(a, "--channel")?.channel()?;
    let cm = parse_channel(b, "--channel2")?.channel()?;
    if cn.dims() != cm.dims() {
        return Err(Failure::input(format!(
            "--channel2: dimensions {:?} differ from --channel {:?}",
            cm.dims(),
            cn.dims()
        )));
    }
    Ok((cn, cm))
}

pub fn cmd_divergence(a: &DivergenceArgs) -> CliResult<Value> {
    let (cn, cm) = channel_pair(&a.channel, &a.channel2)?;
    let start = Instant::now();
    let mut v = match a.quantity {
        DivergenceQuantity::GeometricRenyi => {
            let alpha = a.alpha.ok_or_else(|| Failure::input("--alpha is required for geometric-renyi"))?;
            if alpha == 1.0 {
                json!({
                    "quantity": "bs",
                    "alpha": 1.0,
                    "value": dv::bs_channel(&cn, &cm)?.to_json(),
                    "note": "alpha = 1 routed to the Belavkin-Staszewski relative entropy",
                })
            } else if !(alpha > 0.0 && alpha <= 2.0) {
                return Err(Failure::input(format!(
                    "alpha outside data-processing interval (0, 1) ∪ (1, 2]: got {alpha}"
                )));
            } else {
                let d = dv::geometric_renyi_channel(&cn, &cm, alpha)?;
                let mut v = json!({
                    "quantity": "geometric-renyi",
                    "alpha": alpha,
                    "value": d.value.to_json(),
                    "support_case": d.support_case,
                    "regularization": d.regularization,
                });
                if let Some(w) = d.warning {
                    v["warning"] = json!(w);
                }
                v
            }
        }
        DivergenceQuantity::Bs => json!({ "quantity": "bs", "value": dv::bs_channel(&cn, &cm)?.to_json() }),
        DivergenceQuantity::Fidelity => {
            let s = sdp::root_fidelity_channel_sdp(&cn, &cm)?;
            json!({ "quantity": "fidelity", "root_fidelity": s.value.to_json(), "value": s.value.map(|x| x * x).to_json(), "duality_gap": s.gap })
        }
        DivergenceQuantity::GeometricFidelity => {
            let s = sdp::geo_fidelity_channel_sdp(&cn, &cm)?;
            json!({ "quantity": "geometric-fidelity", "root_fidelity": s.value.to_json(), "value": s.value.map(|x| x * x).to_json(), "duality_gap": s.gap })
        }
    };
    if !a.no_timing {
        v["runtime_ms"] = json!(millis(start));
    }
    Ok(v)
}

pub fn cmd_discriminate(a: &DiscriminateArgs) -> CliResult<Value> {
    let (cn, cm) = channel_pair(&a.channel, &a.channel2)?;
    if !(a.p > 0.0 && a.p < 1.0) {
        return Err(Failure::input(format!("--p: prior must lie in (0, 1), got {}", a.p)));
    }
    let start = Instant::now();
    let upper = bounds::geometric_chernoff_upper(&cn, &cm)?;
    let half = dv::geometric_renyi_channel(&cn, &cm, 0.5)?.value;
    let mut v = json!({
        "geometric_chernoff_upper": upper,
        "geometric_renyi_half": half.to_json(),
    });
    if !a.skip_lower {
        let lower = bounds::chernoff_lower(&cn, &cm)?;
        v["chernoff_lower"] = json!(lower);
        v["gap"] = json!(upper - lower);
    }
    if let Some(n) = a.n {
        bounds::DiscriminationSetting::new(a.p, n, a.r.unwrap_or(0.0))?;
        v["n"] = json!(n);
        v["p"] = json!(a.p);
        v["exponent_upper"] = bounds::chernoff_nonasymptotic_upper(&cn, &cm, n, a.p)?.to_json();
    }
    if let Some(r) = a.r {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Failure::input(format!("--r: rate must be a nonnegative number, got {r}")));
        }
        let h = bounds::hoeffding_upper(&cn, &cm, r)?;
        v["hoeffding"] = json!({
            "r": r,
            "value": h.value.to_json(),
            "alpha": h.alpha,
            "clamped": h.clamped,
            "note": h.note,
        });
    }
    if !a.no_timing {
        v["runtime_ms"] = json!(millis(start));
    }
    Ok(v)
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Failure::input(format!("--grid: expected start:stop:step, got '{spec}'"));
    let [a, b, s] = parts.as_slice() else { return Err(bad()) };
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let (a, b, s) = (parse(a)?, parse(b)?, parse(s)?);
    if !(s > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(Failure::input(format!("--grid: need start <= stop and step > 0, got '{spec}'")));
    }
    let count = ((b - a) / s + 1e-9).floor() as usize + 1;
    // Round away accumulated binary error so that CSV x values print cleanly.
    Ok((0..count).map(|k| ((a + k as f64 * s) * 1e12).round() / 1e12).collect())
}

/// Relative agreement required between the two Fisher columns at `N = 1/2`.
pub const COINCIDENCE_TOL: f64 = 1e-3;

/// Gap slack for the discrimination figures.
pub const GAP_SLACK: f64 = 1e-6;

fn figure_of(a: &FiguresArgs) -> Figure {
    match a.name {
        FigureName::EstimateLoss => Figure::EstimateLoss { n: a.n },
        FigureName::EstimateNoise => Figure::EstimateNoise { gamma: a.gamma },
        FigureName::EstimatePhase => Figure::EstimatePhase { n: a.n, phi: a.phi },
        FigureName::ChDiscLoss => Figure::DiscLoss { gamma1: a.gamma1, gamma2: a.gamma2 },
        FigureName::ChDiscNoise => Figure::DiscNoise { n1: a.n1, n2: a.n2 },
    }
}

/// Adds a `coincide` column to estimate-loss tables at `N = 1/2`. Returns the
/// number of rows that fail the check.
fn add_coincidence(table: &mut FigureTable) -> usize {
    table.columns.push("coincide");
    let mut failures = 0;
    for row in &mut table.rows {
        let (rld, sld) = ((-row[1]).exp(), (-row[2]).exp());
        let ok = (rld - sld).abs() <= COINCIDENCE_TOL * rld;
        failures += usize::from(!ok);
        row.push(if ok { 1.0 } else { 0.0 });
    }
    failures
}

pub fn cmd_figures(a: &FiguresArgs, out: &mut dyn Write) -> CliResult<i32> {
    let grid = parse_grid(&a.grid)?;
    let figure = figure_of(a);
    let mut table = bounds::figure_data(&figure, &grid).map_err(|e| match e {
        Error::ParamOutOfRange { .. } => Failure::from(e),
        other => Failure { code: EXIT_NUMERICAL, message: format!("grid point failed: {other}") },
    })?;
    let mut violation = None;
    match figure {
        Figure::EstimateLoss { n: 0.5 } => {
            let bad = add_coincidence(&mut table);
            if bad > 0 {
                violation = Some(format!("{bad} rows where the RLD and SLD values do not coincide at N = 1/2"));
            }
        }
        Figure::DiscLoss { .. } | Figure::DiscNoise { .. } => {
            let bad = table.rows.iter().filter(|r| r[4] < -GAP_SLACK).count();
            if bad > 0 {
                violation = Some(format!("{bad} rows with negative gap"));
            }
        }
        _ => {}
    }
    let csv = table.to_csv();
    match &a.out {
        Some(path) => write_atomic(path, csv.as_bytes())
            .map_err(|e| Failure { code: EXIT_NUMERICAL, message: format!("writing {}: {e}", path.display()) })?,
        None => out.write_all(csv.as_bytes()).map_err(|e| Failure::input(e.to_string()))?,
    }
    match violation {
        Some(msg) => Err(Failure::invariant(msg)),
        None => Ok(EXIT_OK),
    }
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = std::fs::write(&tmp, bytes).and_then(|_| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

pub fn cmd_selftest(a: &SelftestArgs, out: &mut dyn Write) -> CliResult<i32> {
    if a.trials == 0 {
        return Err(Failure::input("--trials: must be positive"));
    }
    let report = selftest::run(a.seed, a.trials);
    out.write_all(report.render().as_bytes()).map_err(|e| Failure::input(e.to_string()))?;
    if report.passed() {
        Ok(EXIT_OK)
    } else {
        Err(Failure::invariant(format!("failed invariants: {}", report.failures().join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.05:0.95:0.05").unwrap().len(), 19);
        assert_eq!(parse_grid("0.1:0.9:0.1").unwrap(), vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        assert_eq!(parse_grid("0.5:0.5:1").unwrap(), vec![0.5]);
        for bad in ["0.1:0.9", "a:b:c", "0.9:0.1:0.1", "0.1:0.9:0"] {
            assert_eq!(parse_grid(bad).unwrap_err().code, EXIT_INPUT, "{bad}");
        }
    }

    #[test]
    fn error_codes() {
        assert_eq!(Failure::from(Error::Descriptor("x".into())).code, EXIT_INPUT);
        assert_eq!(Failure::from(Error::MaxIterations { iterations: 1, gap: 1.0 }).code, EXIT_NUMERICAL);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("geofish-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("a.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
