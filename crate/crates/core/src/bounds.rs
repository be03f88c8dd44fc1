//! Estimation and discrimination bounds.
//!
//! Estimation: Cramér–Rao variance bounds from Fisher information, the RLD
//! verdict on Heisenberg scaling, and GADC closed forms. Discrimination: the
//! Chernoff information of channels as an achievable exponent, geometric Rényi
//! upper bounds on Chernoff and Hoeffding exponents, and figure sweeps.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{apply_channel, gadc_choi, gadc_choi_phase, gadc_family, ChannelFamily, Choi, GadcParam};
use crate::divergences;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::fisher;
use crate::linalg::{self, c, CMat, HermOp};
use crate::optim;
use crate::sdp::sld_channel_seesaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// Variance `≥ 1/(n I)`.
    Standard,
    /// Variance `≥ 1/(n² I)`.
    Heisenberg,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationBound {
    pub n: u64,
    pub fisher: ExtReal,
    pub var_lower: ExtReal,
    pub scaling: Scaling,
}

/// Cramér–Rao lower bound on the variance of an unbiased estimator after `n` uses.
/// Infinite Fisher information gives the vacuous bound 0; zero gives `+∞`.
pub fn cramer_rao(fisher: ExtReal, n: u64, scaling: Scaling) -> ExtReal {
    let uses = match scaling {
        Scaling::Standard => n as f64,
        Scaling::Heisenberg => (n as f64).powi(2),
    };
    match fisher {
        ExtReal::Infinite => ExtReal::Finite(0.0),
        ExtReal::Finite(f) if f <= 0.0 => ExtReal::Infinite,
        ExtReal::Finite(f) => ExtReal::Finite(1.0 / (uses * f)),
    }
}

pub fn estimation_bound(fisher: ExtReal, n: u64, scaling: Scaling) -> Result<EstimationBound> {
    if n == 0 {
        return Err(Error::ParamOutOfRange {
            name: "n",
            value: 0.0,
            range: "n ≥ 1".into(),
        });
    }
    Ok(EstimationBound {
        n,
        fisher,
        var_lower: cramer_rao(fisher, n, scaling),
        scaling,
    })
}

/// Whether a finite RLD Fisher information rules out Heisenberg scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergVerdict {
    /// `true` when the RLD channel Fisher information is finite, limiting every
    /// sequential protocol to `n · Î_F`.
    pub blocked: bool,
    pub rld: ExtReal,
    /// Residual of the support condition `Π⊥_Γ ∂Γ = 0`.
    pub residual: f64,
    pub tolerance: f64,
}

pub fn heisenberg_verdict(fam: &ChannelFamily, theta: f64) -> Result<HeisenbergVerdict> {
    let r = fisher::rld_channel(fam, theta)?;
    Ok(HeisenbergVerdict {
        blocked: r.value.is_finite(),
        rld: r.value,
        residual: r.finiteness.residual,
        tolerance: r.finiteness.tolerance,
    })
}

fn check_open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name,
            value: v,
            range: "(0, 1)".into(),
        })
    }
}

/// Closed-form RLD Fisher information of the GADC in one parameter.
pub fn gadc_closed_form(param: GadcParam, gamma: f64, n: f64) -> Result<f64> {
    check_open_unit("gamma", gamma)?;
    check_open_unit("N", n)?;
    let g2 = gamma * gamma;
    Ok(match param {
        GadcParam::Loss if n <= 0.5 => (1.0 / (n - gamma * n) + 1.0 / (1.0 - n) - 4.0) / (4.0 * g2),
        GadcParam::Loss => (1.0 / ((1.0 - gamma) * (1.0 - n)) + 1.0 / n - 4.0) / (4.0 * g2),
        GadcParam::Noise => 1.0 / (n * (1.0 - n)),
        GadcParam::Phase => {
            let step = if 2.0 * n - 1.0 > 0.0 { 1.0 } else { 0.0 };
            4.0 * (1.0 - gamma) * (1.0 - gamma * (n + (1.0 - 2.0 * n) * step)) / ((1.0 - n) * n * g2)
        }
    })
}

/// Prior, number of channel uses and Type-II rate of a discrimination task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminationSetting {
    pub p: f64,
    pub n: u64,
    pub r: f64,
}

impl DiscriminationSetting {
    pub fn new(p: f64, n: u64, r: f64) -> Result<Self> {
        check_open_unit("p", p)?;
        if n == 0 {
            return Err(Error::ParamOutOfRange {
                name: "n",
                value: 0.0,
                range: "n ≥ 1".into(),
            });
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::ParamOutOfRange {
                name: "r",
                value: r,
                range: "(0, ∞)".into(),
            });
        }
        Ok(Self { p, n, r })
    }
}

fn check_pair(cn: &Choi, cm: &Choi) -> Result<()> {
    if cn.dims() != cm.dims() {
        return Err(Error::DimMismatch(format!(
            "channels with dimensions {:?} and {:?}",
            cn.dims(),
            cm.dims()
        )));
    }
    Ok(())
}

/// Support spectra of a pair of states, for fast evaluation of
/// `Q_α = Tr[ρ^α σ^{1−α}] = Σ λ_i^α μ_j^{1−α} |⟨u_i|v_j⟩|²`.
struct PetzPair {
    lam: Vec<f64>,
    mu: Vec<f64>,
    overlap: Vec<f64>,
}

impl PetzPair {
    fn new(rho: &HermOp, sigma: &HermOp) -> Result<Self> {
        let er = linalg::eig_hermitian(rho)?;
        let es = linalg::eig_hermitian(sigma)?;
        let (tr, ts) = (er.default_rank_tol(), es.default_rank_tol());
        let ir: Vec<usize> = (0..er.dim()).filter(|&i| er.values[i] > tr).collect();
        let is: Vec<usize> = (0..es.dim()).filter(|&j| es.values[j] > ts).collect();
        let cross = er.vectors.adjoint() * &es.vectors;
        let mut overlap = Vec::with_capacity(ir.len() * is.len());
        for &i in &ir {
            for &j in &is {
                overlap.push(cross[(i, j)].norm_sqr());
            }
        }
        Ok(PetzPair {
            lam: ir.iter().map(|&i| er.values[i]).collect(),
            mu: is.iter().map(|&j| es.values[j]).collect(),
            overlap,
        })
    }

    fn quasi(&self, alpha: f64) -> f64 {
        let m = self.mu.len();
        let mut acc = 0.0;
        for (i, l) in self.lam.iter().enumerate() {
            let la = l.powf(alpha);
            for (j, mu) in self.mu.iter().enumerate() {
                acc += la * mu.powf(1.0 - alpha) * self.overlap[i * m + j];
            }
        }
        acc
    }

    /// `max_{α ∈ [0,1]} −ln Q_α` and its maximizer.
    fn chernoff(&self, tol: f64) -> (f64, f64) {
        optim::golden_max(|a| -self.quasi(a).max(f64::MIN_POSITIVE).ln(), 0.0, 1.0, tol)
    }
}

/// Chernoff information `−ln min_{α ∈ [0,1]} Tr[ρ^α σ^{1−α}]` of two states.
pub fn chernoff_states(rho: &HermOp, sigma: &HermOp) -> Result<f64> {
    Ok(PetzPair::new(rho, sigma)?.chernoff(1e-8).1)
}

/// Pure bipartite input on `R ⊗ A`: `|ψ⟩ = Σ_i (M)_{ij} |i⟩|j⟩` normalized.
fn input_from_matrix(m: &CMat) -> HermOp {
    let v = linalg::vec_gamma(m);
    let n = v.norm();
    HermOp::projector(&(v / c(n, 0.0)))
}

/// Qubit input `√s |0⟩U|0⟩ + √(1−s) |1⟩U|1⟩` with `U = R_z(a) R_y(b)`.
fn qubit_input(s: f64, a: f64, b: f64) -> HermOp {
    let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
    let ph = c(0.0, a / 2.0).exp();
    let u = CMat::from_row_slice(2, 2, &[ph.conj() * cb, -ph.conj() * sb, ph * sb, ph * cb]);
    let s = s.clamp(0.0, 1.0);
    let d = CMat::from_row_slice(2, 2, &[c(s.sqrt(), 0.0), linalg::ZERO, linalg::ZERO, c((1.0 - s).sqrt(), 0.0)]);
    input_from_matrix(&(d * u.transpose()))
}

fn general_input(x: &[f64], d: usize) -> HermOp {
    let m = CMat::from_fn(d, d, |i, j| c(x[2 * (i * d + j)], x[2 * (i * d + j) + 1]));
    input_from_matrix(&m)
}

/// Grid points per coordinate of the qubit input search.
pub const CHERNOFF_GRID: usize = 12;

/// Objective tolerance of the Nelder–Mead refinement.
pub const CHERNOFF_FTOL: f64 = 1e-5;

/// Achievable Chernoff exponent
/// `C(N‖M) = sup_{ψ, α} −ln Tr[N(ψ)^α M(ψ)^{1−α}]` over pure inputs.
///
/// Qubit inputs are searched on a Schmidt-coefficient/angle grid and refined by
/// Nelder–Mead; larger inputs use Nelder–Mead from several seeded starts.
pub fn chernoff_lower(cn: &Choi, cm: &Choi) -> Result<f64> {
    check_pair(cn, cm)?;
    let d = cn.d_in();
    let value = |psi: &HermOp| -> f64 {
        let run = || -> Result<f64> {
            let a = apply_channel(cn, psi, d)?;
            let b = apply_channel(cm, psi, d)?;
            Ok(PetzPair::new(&a, &b)?.chernoff(1e-7).1)
        };
        run().unwrap_or(f64::NEG_INFINITY)
    };
    if d == 2 {
        let k = CHERNOFF_GRID;
        let mut best = (vec![0.5, 0.0, 0.0], f64::NEG_INFINITY);
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    let p = vec![
                        i as f64 / (k - 1) as f64,
                        2.0 * PI * j as f64 / k as f64,
                        PI * l as f64 / (k - 1) as f64,
                    ];
                    let v = value(&qubit_input(p[0], p[1], p[2]));
                    if v > best.1 {
                        best = (p, v);
                    }
                }
            }
        }
        // s = sin²t keeps the Schmidt coefficient in range during refinement.
        let start = [best.0[0].sqrt().asin(), best.0[1], best.0[2]];
        let (_, refined) = optim::nelder_mead_max(
            |x| value(&qubit_input(x[0].sin().powi(2), x[1], x[2])),
            &start,
            0.1,
            400,
            CHERNOFF_FTOL,
        );
        return Ok(refined.max(best.1).max(0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut starts: Vec<Vec<f64>> = vec![(0..d * d)
        .flat_map(|k| [if k / d == k % d { 1.0 } else { 0.0 }, 0.0])
        .collect()];
    for _ in 0..4 {
        let m = crate::random::complex_gaussian(d, d, &mut rng);
        starts.push(m.iter().flat_map(|z| [z.re, z.im]).collect());
    }
    let mut best = 0.0f64;
    for s in starts {
        let (_, v) = optim::nelder_mead_max(|x| value(&general_input(x, d)), &s, 0.3, 2000, CHERNOFF_FTOL);
        best = best.max(v);
    }
    Ok(best)
}

/// `α`-tolerance of the golden-section searches over `[0, 1]`.
pub const ALPHA_TOL: f64 = 1e-6;

/// Geometric Chernoff bound `Ĉ(N‖M) = sup_{α ∈ [0,1]} (1−α) D̂_α(N‖M)`,
/// i.e. `sup_α −ln λ_min(Tr_B G_α(Γ^M, Γ^N))`.
pub fn geometric_chernoff_upper(cn: &Choi, cm: &Choi) -> Result<f64> {
    check_pair(cn, cm)?;
    divergences::channel_quasi_min(cn, cm, 0.5)?;
    let phi = |a: f64| {
        divergences::channel_quasi_min(cn, cm, a)
            .map(|q| -q.max(f64::MIN_POSITIVE).ln())
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (_, v) = optim::golden_max(phi, 0.0, 1.0, ALPHA_TOL);
    Ok(v.max(0.0))
}

/// Non-asymptotic Chernoff exponent bound `D̂_{1/2}(N‖M) − ln[p(1−p)]/n`.
pub fn chernoff_nonasymptotic_upper(cn: &Choi, cm: &Choi, n: u64, p: f64) -> Result<ExtReal> {
    check_pair(cn, cm)?;
    check_open_unit("p", p)?;
    if n == 0 {
        return Err(Error::ParamOutOfRange {
            name: "n",
            value: 0.0,
            range: "n ≥ 1".into(),
        });
    }
    let d = divergences::geometric_renyi_channel(cn, cm, 0.5)?.value;
    Ok(d.map(|d| d - (p * (1.0 - p)).ln() / n as f64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoeffdingBound {
    pub value: ExtReal,
    /// Maximizing `α`, absent when the bound is infinite.
    pub alpha: Option<f64>,
    pub clamped: bool,
    pub note: Option<String>,
}

/// Hoeffding exponent bound `sup_{α ∈ (0,1)} ((α−1)/α)(r − D̂_α(N‖M))`.
///
/// Writing `φ(α) = (1−α) D̂_α`, the objective is `(φ(α) − (1−α) r)/α`; it is
/// unbounded as `α → 0` exactly when `r < φ(0)`. Negative suprema are clamped to 0.
pub fn hoeffding_upper(cn: &Choi, cm: &Choi, r: f64) -> Result<HoeffdingBound> {
    check_pair(cn, cm)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::ParamOutOfRange {
            name: "r",
            value: r,
            range: "(0, ∞)".into(),
        });
    }
    let phi = |a: f64| -> Result<f64> { Ok(-divergences::channel_quasi_min(cn, cm, a)?.max(f64::MIN_POSITIVE).ln()) };
    let phi0 = phi(0.0)?;
    if phi0 > r * (1.0 + 1e-12) + 1e-12 {
        return Ok(HoeffdingBound {
            value: ExtReal::Infinite,
            alpha: None,
            clamped: false,
            note: Some(format!("r = {r} is below lim_(α→0) (1−α)D̂_α = {phi0}; the objective is unbounded")),
        });
    }
    let obj = |a: f64| phi(a).map(|p| (p - (1.0 - a) * r) / a).unwrap_or(f64::NEG_INFINITY);
    let mut best = (0.01, obj(0.01));
    for k in 2..100 {
        let a = k as f64 / 100.0;
        let v = obj(a);
        if v > best.1 {
            best = (a, v);
        }
    }
    let (lo, hi) = ((best.0 - 0.01).max(1e-4), (best.0 + 0.01).min(1.0 - 1e-4));
    let refined = optim::golden_max(obj, lo, hi, ALPHA_TOL);
    if refined.1 > best.1 {
        best = refined;
    }
    if best.1 < 0.0 {
        return Ok(HoeffdingBound {
            value: ExtReal::Finite(0.0),
            alpha: Some(best.0),
            clamped: true,
            note: Some(format!("supremum {:.6e} is negative; clamped to 0", best.1)),
        });
    }
    Ok(HoeffdingBound {
        value: ExtReal::Finite(best.1),
        alpha: Some(best.0),
        clamped: false,
        note: None,
    })
}

/// Figures that can be regenerated as CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum Figure {
    /// Sweep `γ` at fixed noise `N`.
    EstimateLoss { n: f64 },
    /// Sweep `N` at fixed loss `γ`.
    EstimateNoise { gamma: f64 },
    /// Sweep `γ` at fixed `N`, estimating `φ` at the given point.
    EstimatePhase { n: f64, phi: f64 },
    /// Sweep `(N₁, N₂)` for GADC pairs with fixed losses.
    DiscLoss { gamma1: f64, gamma2: f64 },
    /// Sweep `(γ₁, γ₂)` for GADC pairs with fixed noises.
    DiscNoise { n1: f64, n2: f64 },
}

/// Seesaw iterations used for the SLD column.
pub const FIGURE_SEESAW_ITERS: usize = 500;

/// Rows of a regenerated figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl FigureTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_cell(*v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

fn format_cell(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// `n` evenly spaced points strictly inside `(0, 1)`: `k/(n+1)`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

fn parallel_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> Result<U> + Sync) -> Result<Vec<U>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(workers.max(1)).max(1);
    let f = &f;
    let parts: Vec<Result<Vec<U>>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(f).collect::<Result<Vec<U>>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn log_bound(fisher: ExtReal) -> f64 {
    cramer_rao(fisher, 1, Scaling::Standard).finite().map_or(f64::INFINITY, f64::ln)
}

fn estimation_row(fam: &ChannelFamily, x: f64, theta: f64) -> Result<Vec<f64>> {
    let rld = fisher::rld_channel(fam, theta)?.value;
    let sld = sld_channel_seesaw(fam, theta, FIGURE_SEESAW_ITERS)?.value;
    Ok(vec![x, log_bound(rld), log_bound(sld)])
}

/// Figure data: `x, rld_bound_log, sld_bound_log` for estimation figures, with
/// bounds `1/I` for a single channel use, and `x1, x2, upper, lower, gap` for
/// discrimination figures, with `upper = D̂_{1/2}(N‖M)` and `lower = C(N‖M)`.
pub fn figure_data(figure: &Figure, grid: &[f64]) -> Result<FigureTable> {
    for &x in grid {
        check_open_unit("grid point", x)?;
    }
    let est = ["x", "rld_bound_log", "sld_bound_log"];
    match *figure {
        Figure::EstimateLoss { n } => {
            check_open_unit("N", n)?;
            let fam = gadc_family(GadcParam::Loss, 0.5, n)?;
            let rows = parallel_map(grid, |&g| estimation_row(&fam, g, g))?;
            Ok(FigureTable { columns: est.to_vec(), rows })
        }
        Figure::EstimateNoise { gamma } => {
            check_open_unit("gamma", gamma)?;
            let fam = gadc_family(GadcParam::Noise, gamma, 0.5)?;
            let rows = parallel_map(grid, |&nn| estimation_row(&fam, nn, nn))?;
            Ok(FigureTable { columns: est.to_vec(), rows })
        }
        Figure::EstimatePhase { n, phi } => {
            check_open_unit("N", n)?;
            let rows = parallel_map(grid, |&g| {
                let fam = gadc_family(GadcParam::Phase, g, n)?;
                estimation_row(&fam, g, phi)
            })?;
            Ok(FigureTable { columns: est.to_vec(), rows })
        }
        Figure::DiscLoss { gamma1, gamma2 } => {
            check_open_unit("gamma1", gamma1)?;
            check_open_unit("gamma2", gamma2)?;
            disc_table(grid, |x1, x2| Ok((gadc_choi(gamma1, x1)?, gadc_choi(gamma2, x2)?)))
        }
        Figure::DiscNoise { n1, n2 } => {
            check_open_unit("N1", n1)?;
            check_open_unit("N2", n2)?;
            disc_table(grid, |x1, x2| Ok((gadc_choi(x1, n1)?, gadc_choi(x2, n2)?)))
        }
    }
}

fn disc_table(grid: &[f64], pair: impl Fn(f64, f64) -> Result<(Choi, Choi)> + Sync) -> Result<FigureTable> {
    let points: Vec<(f64, f64)> = grid.iter().flat_map(|&a| grid.iter().map(move |&b| (a, b))).collect();
    let rows = parallel_map(&points, |&(x1, x2)| {
        let (cn, cm) = pair(x1, x2)?;
        let upper = divergences::geometric_renyi_channel(&cn, &cm, 0.5)?.value.to_f64();
        let lower = chernoff_lower(&cn, &cm)?;
        Ok(vec![x1, x2, upper, lower, upper - lower])
    })?;
    Ok(FigureTable {
        columns: vec!["x1", "x2", "upper", "lower", "gap"],
        rows,
    })
}

/// RLD–SLD comparison for GADC estimation at one point: `(Î_F, I_F)`.
pub fn gadc_rld_sld(param: GadcParam, gamma: f64, n: f64, phi: f64) -> Result<(f64, f64)> {
    let (fam, theta) = match param {
        GadcParam::Loss => (gadc_family(param, gamma, n)?, gamma),
        GadcParam::Noise => (gadc_family(param, gamma, n)?, n),
        GadcParam::Phase => (gadc_family(param, gamma, n)?, phi),
    };
    let rld = fisher::rld_channel(&fam, theta)?.value.to_f64();
    let sld = sld_channel_seesaw(&fam, theta, FIGURE_SEESAW_ITERS)?.value.to_f64();
    Ok((rld, sld))
}

/// `(GADC(γ₁,N₁), GADC(γ₂,N₂))` with a common phase.
pub fn gadc_pair(g1: f64, n1: f64, g2: f64, n2: f64, phi: f64) -> Result<(Choi, Choi)> {
    Ok((gadc_choi_phase(g1, n1, phi)?, gadc_choi_phase(g2, n2, phi)?))
}
