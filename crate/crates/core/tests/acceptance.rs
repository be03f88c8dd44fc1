//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::time::Instant;

use geofish::bounds::{self, Figure};
use geofish::channels::{cq_channel, gadc_choi, gadc_family, Choi, CqFamily, GadcParam, StateFamily};
use geofish::divergences as dv;
use geofish::fisher::{self, LimitRoute, Shift};
use geofish::linalg::CMat;
use geofish::{random, sdp, HermOp, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

fn eigh(m: &HermOp) -> (Vec<f64>, CMat) {
    let e = nalgebra::SymmetricEigen::new(m.matrix().clone());
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// `2 Σ |∂_ij|² / (λ_i + λ_j)` in the eigenbasis of `ρ`.
fn sld_oracle(rho: &HermOp, drho: &HermOp) -> f64 {
    let (l, u) = eigh(rho);
    let d = u.adjoint() * drho.matrix() * &u;
    let cut = 1e-12 * l.iter().cloned().fold(0.0, f64::max);
    let mut s = 0.0;
    for i in 0..l.len() {
        for j in 0..l.len() {
            if l[i] + l[j] > cut {
                s += 2.0 * d[(i, j)].norm_sqr() / (l[i] + l[j]);
            }
        }
    }
    s
}

/// `Σ |∂_ij|² / λ_j` for full-rank `ρ`.
fn rld_oracle(rho: &HermOp, drho: &HermOp) -> f64 {
    let (l, u) = eigh(rho);
    let d = u.adjoint() * drho.matrix() * &u;
    let mut s = 0.0;
    for i in 0..l.len() {
        for j in 0..l.len() {
            s += d[(i, j)].norm_sqr() / l[j];
        }
    }
    s
}

fn gadc_oracle(param: GadcParam, g: f64, n: f64) -> f64 {
    match param {
        GadcParam::Loss if n <= 0.5 => {
            let f = 1.0 / ((1.0 - g) * n) + 1.0 / (1.0 - n) - 4.0;
            f / (4.0 * g * g)
        }
        GadcParam::Loss => {
            let f = 1.0 / ((1.0 - g) * (1.0 - n)) + 1.0 / n - 4.0;
            f / (4.0 * g * g)
        }
        GadcParam::Noise => 1.0 / (n * (1.0 - n)),
        GadcParam::Phase => {
            let u = if n > 0.5 { 1.0 } else { 0.0 };
            4.0 * (1.0 - g) * (1.0 - g * (n + (1.0 - 2.0 * n) * u)) / ((1.0 - n) * n * g * g)
        }
    }
}

/// `ln Tr[σ (σ^{-1/2} ρ σ^{-1/2})^α] / (α − 1)` for full-rank `σ`.
fn geometric_oracle(rho: &HermOp, sigma: &HermOp, alpha: f64) -> f64 {
    let (l, u) = eigh(sigma);
    let isq = &u * CMat::from_diagonal(&nalgebra::DVector::from_iterator(l.len(), l.iter().map(|x| (1.0 / x.sqrt()).into())))
        * u.adjoint();
    let x = HermOp::new(&isq * rho.matrix() * &isq).unwrap();
    let (lx, ux) = eigh(&x);
    let w = ux.adjoint() * sigma.matrix() * &ux;
    let q: f64 = lx.iter().enumerate().map(|(i, v)| v.powf(alpha) * w[(i, i)].re).sum();
    q.ln() / (alpha - 1.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Relative violation of `lhs ≤ rhs`.
fn excess(lhs: f64, rhs: f64) -> f64 {
    ((lhs - rhs) / (1.0 + rhs.abs())).max(0.0)
}

fn full_rank_family(rng: &mut ChaCha8Rng, d: usize) -> StateFamily {
    let rho = random::density(d, rng).scale(0.7).add(&HermOp::identity(d).scale(0.3 / d as f64));
    StateFamily::unitary_orbit(rho, random::hermitian(d, rng)).unwrap()
}

fn random_channel(rng: &mut ChaCha8Rng, d_in: usize, d_out: usize) -> Choi {
    let k = rng.random_range(1..=d_in * d_out);
    Choi::from_kraus(&random::kraus_channel(d_in, d_out, k, rng)).unwrap()
}

fn diag(p: &[f64]) -> HermOp {
    HermOp::from_real_diag(p)
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

fn c1_gadc_closed_forms() -> Outcome {
    let start = Instant::now();
    let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut worst = 0.0f64;
    for param in [GadcParam::Loss, GadcParam::Noise, GadcParam::Phase] {
        for &g in &grid {
            for &n in &grid {
                let fam = gadc_family(param, g, n).unwrap();
                let theta = match param {
                    GadcParam::Loss => g,
                    GadcParam::Noise => n,
                    GadcParam::Phase => 0.1,
                };
                let want = gadc_oracle(param, g, n);
                let closed = fisher::rld_channel(&fam, theta).unwrap().value.to_f64();
                let via_sdp = sdp::rld_channel_sdp(&fam, theta).unwrap().value.to_f64();
                worst = worst.max(rel(closed, want)).max(rel(via_sdp, want));
            }
        }
    }
    let anchors = [
        (GadcParam::Loss, 0.5, 0.2, 0.5, 7.25),
        (GadcParam::Loss, 0.5, 0.6, 0.5, 8.0 / 3.0),
        (GadcParam::Noise, 0.5, 0.2, 0.2, 6.25),
        (GadcParam::Noise, 0.5, 0.5, 0.5, 4.0),
        (GadcParam::Phase, 0.5, 0.2, 0.1, 45.0),
    ];
    let mut anchor_worst = 0.0f64;
    for (param, g, n, theta, want) in anchors {
        let fam = gadc_family(param, g, n).unwrap();
        anchor_worst = anchor_worst
            .max(rel(fisher::rld_channel(&fam, theta).unwrap().value.to_f64(), want))
            .max(rel(sdp::rld_channel_sdp(&fam, theta).unwrap().value.to_f64(), want));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-5 && anchor_worst <= 1e-5 && secs < 30.0,
        format!("75 points max_rel={worst:.2e} anchors max_rel={anchor_worst:.2e} (tol 1e-5) runtime={secs:.1}s (< 30s)"),
    )
}

fn c2_sdp_vs_spectral() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut worst_gap) = (0.0f64, 0.0f64);
    for k in 0..200 {
        let d = 2 + k % 3;
        let rho = random::density(d, &mut rng);
        let drho = random::traceless_hermitian(d, &mut rng);
        let s = sdp::sld_state_sdp(&rho, &drho).unwrap();
        let r = sdp::rld_state_sdp(&rho, &drho).unwrap();
        worst = worst
            .max(rel(s.value.to_f64(), sld_oracle(&rho, &drho)))
            .max(rel(r.value.to_f64(), rld_oracle(&rho, &drho)));
        worst_gap = worst_gap.max(s.gap).max(r.gap);
    }
    outcome(
        worst <= 1e-6 && worst_gap <= 1e-8,
        format!("200 families max_rel={worst:.2e} (tol 1e-6) max_gap={worst_gap:.2e} (tol 1e-8)"),
    )
}

fn c3_orderings() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for k in 0..500 {
        let d = 2 + k % 3;
        let rho = random::density(d, &mut rng);
        let drho = random::traceless_hermitian(d, &mut rng);
        let sigma = random::density(d, &mut rng);
        let sld = fisher::sld_state(&rho, &drho).unwrap().value.to_f64();
        let rld = fisher::rld_state(&rho, &drho).unwrap().value.to_f64();
        worst = worst.max(excess(sld, rld));
        for alpha in [0.3, 1.5, 2.0] {
            let sw = dv::sandwiched_renyi(&rho, &sigma, alpha).unwrap().to_f64();
            let pz = dv::petz_renyi(&rho, &sigma, alpha).unwrap().to_f64();
            let gm = dv::geometric_renyi(&rho, &sigma, alpha).unwrap().value.to_f64();
            worst = worst.max(excess(sw, pz)).max(excess(pz, gm));
        }
        let gf = dv::geometric_fidelity(&rho, &sigma).unwrap();
        let f = dv::fidelity(&rho, &sigma).unwrap();
        worst = worst.max(excess(gf, f));
    }
    outcome(worst <= 1e-9, format!("500 instances max_violation={worst:.2e} (slack 1e-9)"))
}

fn c4_data_processing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (d_in, d_out) = (rng.random_range(2..=3), rng.random_range(2..=3));
        let ch = random_channel(&mut rng, d_in, d_out);
        let rho = random::density(d_in, &mut rng);
        let drho = random::traceless_hermitian(d_in, &mut rng);
        let sigma = random::density(d_in, &mut rng);
        let (r2, s2) = (ch.apply(&rho, 1).unwrap(), ch.apply(&sigma, 1).unwrap());
        let dr2 = geofish::channels::apply_map(ch.op(), ch.dims(), &drho, 1).unwrap();
        let pairs = [
            (fisher::sld_state(&r2, &dr2).unwrap().value, fisher::sld_state(&rho, &drho).unwrap().value),
            (fisher::rld_state(&r2, &dr2).unwrap().value, fisher::rld_state(&rho, &drho).unwrap().value),
        ];
        for (after, before) in pairs {
            if after.is_finite() {
                worst = worst.max(excess(after.to_f64(), before.to_f64()));
            } else if before.is_finite() {
                worst = f64::INFINITY;
            }
        }
        for alpha in [0.3, 0.7, 1.5, 2.0] {
            let after = dv::geometric_renyi(&r2, &s2, alpha).unwrap().value;
            let before = dv::geometric_renyi(&rho, &sigma, alpha).unwrap().value;
            if after.is_finite() {
                worst = worst.max(excess(after.to_f64(), before.to_f64()));
            } else if before.is_finite() {
                worst = f64::INFINITY;
            }
        }
    }
    outcome(worst <= 1e-7, format!("100 channels max_violation={worst:.2e} (slack 1e-7)"))
}

fn random_gadc(rng: &mut ChaCha8Rng) -> (geofish::channels::ChannelFamily, f64) {
    let g = rng.random_range(0.1..0.9);
    let n = rng.random_range(0.1..0.9);
    match rng.random_range(0..3) {
        0 => (gadc_family(GadcParam::Loss, g, n).unwrap(), g),
        1 => (gadc_family(GadcParam::Noise, g, n).unwrap(), n),
        _ => (gadc_family(GadcParam::Phase, g, n).unwrap(), rng.random_range(-1.0..1.0)),
    }
}

fn c5_chain_rule_amortization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut chain, mut amort) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (fam, theta) = random_gadc(&mut rng);
        let chan = fisher::rld_channel(&fam, theta).unwrap().value.to_f64();
        let d_ref = rng.random_range(1..=2);
        let input = full_rank_family(&mut rng, 2 * d_ref);
        let (r, dr) = input.at(theta).unwrap();
        let (o, dout) = input.through_family(&fam, d_ref).at(theta).unwrap();
        let out = fisher::rld_state(&o, &dout).unwrap().value.to_f64();
        let inp = rld_oracle(&r, &dr);
        chain = chain.max(excess(out, chan + inp));
        amort = amort.max(excess(out - inp, chan));
    }
    outcome(
        chain <= 1e-6 && amort <= 1e-6,
        format!("100 instances chain_rule_violation={chain:.2e} amortization_violation={amort:.2e} (slack 1e-6)"),
    )
}

/// `ρ_θ = U_θ (ρ₀ + θ D) U_θ†` with `U_θ = e^{−iθH}` on `|θ| < 1`, kept full
/// rank by scaling `D` against `λ_min(ρ₀)`.
fn generic_family(rng: &mut ChaCha8Rng, d: usize) -> StateFamily {
    let rho0 = random::density(d, rng).scale(0.7).add(&HermOp::identity(d).scale(0.3 / d as f64));
    let dir = random::traceless_hermitian(d, rng);
    let lmin = eigh(&rho0).0.into_iter().fold(f64::INFINITY, f64::min);
    let norm = eigh(&dir).0.into_iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let dir = dir.scale(0.5 * lmin / norm);
    let (hl, hv) = eigh(&random::hermitian(d, rng));
    StateFamily::new(d, (-1.0, 1.0), move |t| {
        let phases = nalgebra::DVector::from_iterator(hl.len(), hl.iter().map(|l| C64::new(0.0, -l * t).exp()));
        let u = &hv * CMat::from_diagonal(&phases) * hv.adjoint();
        let h = &hv * CMat::from_diagonal(&nalgebra::DVector::from_iterator(hl.len(), hl.iter().map(|l| C64::from(*l)))) * hv.adjoint();
        let inner = rho0.add(&dir.scale(t));
        let rho = &u * inner.matrix() * u.adjoint();
        let i = C64::new(0.0, 1.0);
        let drho = (&h * &rho - &rho * &h) * (-i) + &u * dir.matrix() * u.adjoint();
        Ok((HermOp::new(rho)?, HermOp::new(drho)?))
    })
}

fn c6_limit_formulas() -> Outcome {
    const EPS: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst, mut worst_ratio) = (0.0f64, f64::INFINITY);
    for k in 0..20 {
        let fam = generic_family(&mut rng, 2 + k % 2);
        let theta = rng.random_range(-0.5..0.5);
        let (rho, drho) = fam.at(theta).unwrap();
        // The δ → 0 limit at fixed ε is the Fisher information of the smoothed
        // family; Richardson acts on the distance to that limit.
        let (rs, drs) = fam.smoothed(EPS).at(theta).unwrap();
        for (route, want, want_eps) in [
            (LimitRoute::Fidelity, sld_oracle(&rho, &drho), sld_oracle(&rs, &drs)),
            (LimitRoute::Geometric(2.0), rld_oracle(&rho, &drho), rld_oracle(&rs, &drs)),
        ] {
            let e = fisher::state_fisher_limits(&fam, theta, 1e-3, EPS, route, Shift::Forward).unwrap();
            worst = worst.max(rel(e.value, want));
            let ratio = (e.value - want_eps).abs() / (e.extrapolated - want_eps).abs().max(1e-300);
            worst_ratio = worst_ratio.min(ratio);
        }
    }
    outcome(
        worst <= 1e-2 && worst_ratio >= 3.0,
        format!("20 families max_rel={worst:.2e} (tol 1e-2) min_richardson_reduction={worst_ratio:.1}x (need 3x)"),
    )
}

fn c7_coincidence() -> Outcome {
    let grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let table = bounds::figure_data(&Figure::EstimateLoss { n: 0.5 }, &grid).unwrap();
    let (mut worst, mut closed) = (0.0f64, 0.0f64);
    for row in &table.rows {
        let (rld, sld) = ((-row[1]).exp(), (-row[2]).exp());
        worst = worst.max((rld - sld).abs() / rld);
        closed = closed.max(rel(rld, 1.0 / (2.0 * row[0] * (1.0 - row[0]))));
    }
    outcome(
        worst <= 1e-3 && closed <= 1e-8,
        format!("9 points max |RLD−SLD|/RLD={worst:.2e} (tol 1e-3) RLD vs 1/(2γ(1−γ)) max_rel={closed:.2e}"),
    )
}

fn c8_divergence_limits() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut near_one, mut to_max, mut exact, mut far) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..20 {
        let d = 2 + k % 2;
        let (rho, sigma) = (random::density(d, &mut rng), random::density(d, &mut rng));
        let bs = dv::bs_relative_entropy(&rho, &sigma).unwrap().to_f64();
        for alpha in [1.0 - 1e-4, 1.0 + 1e-4] {
            near_one = near_one.max((dv::geometric_renyi(&rho, &sigma, alpha).unwrap().value.to_f64() - bs).abs());
        }
        let dmax = dv::dmax(&rho, &sigma).unwrap().to_f64();
        let d50 = dv::geometric_renyi(&rho, &sigma, 50.0).unwrap().value.to_f64();
        to_max = to_max.max((d50 - dmax).abs());
        exact = exact.max((d50 - geometric_oracle(&rho, &sigma, 50.0)).abs());
        far = far.max((dv::geometric_renyi(&rho, &sigma, 5000.0).unwrap().value.to_f64() - dmax).abs());
    }

    let mut classical = 0.0f64;
    for _ in 0..20 {
        let d = rng.random_range(2..=4);
        let mut p: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let mut q: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let (sp, sq) = (p.iter().sum::<f64>(), q.iter().sum::<f64>());
        p.iter_mut().for_each(|x| *x /= sp);
        q.iter_mut().for_each(|x| *x /= sq);
        let (rho, sigma) = (diag(&p), diag(&q));
        let quasi = |a: f64| p.iter().zip(&q).map(|(x, y)| x.powf(a) * y.powf(1.0 - a)).sum::<f64>();
        for alpha in [0.3, 0.7, 1.5, 2.0] {
            let want = quasi(alpha).ln() / (alpha - 1.0);
            for got in [
                dv::geometric_renyi(&rho, &sigma, alpha).unwrap().value.to_f64(),
                dv::petz_renyi(&rho, &sigma, alpha).unwrap().to_f64(),
                dv::sandwiched_renyi(&rho, &sigma, alpha).unwrap().to_f64(),
            ] {
                classical = classical.max((got - want).abs());
            }
        }
        let kl: f64 = p.iter().zip(&q).map(|(x, y)| x * (x / y).ln()).sum();
        for got in [
            dv::relative_entropy(&rho, &sigma).unwrap().to_f64(),
            dv::bs_relative_entropy(&rho, &sigma).unwrap().to_f64(),
        ] {
            classical = classical.max((got - kl).abs());
        }
        // Ternary search on the convex function α ↦ Σ pᵅq¹⁻ᵅ.
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if quasi(m1) < quasi(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let chernoff = -quasi(0.5 * (lo + hi)).ln();
        classical = classical.max((bounds::chernoff_states(&rho, &sigma).unwrap() - chernoff).abs());
    }
    outcome(
        near_one <= 1e-3 && to_max <= 1e-2 && exact <= 1e-10 && classical <= 1e-10,
        format!(
            "|D̂(1±1e-4) − D_BS|={near_one:.2e} (tol 1e-3) |D̂_50 − D_max|={to_max:.2e} (tol 1e-2) \
             |D̂_5000 − D_max|={far:.2e} D̂_50 vs exact={exact:.1e} classical={classical:.2e} (tol 1e-10)"
        ),
    )
}

fn c9_discrimination_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let cn = gadc_choi(rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)).unwrap();
        let cm = gadc_choi(rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)).unwrap();
        let upper = bounds::geometric_chernoff_upper(&cn, &cm).unwrap();
        let lower = bounds::chernoff_lower(&cn, &cm).unwrap();
        worst = worst.max(lower - upper);
    }
    let grid: Vec<f64> = (1..=5).map(|k| k as f64 / 6.0).collect();
    let mut min_gap = f64::INFINITY;
    for fig in [Figure::DiscLoss { gamma1: 0.8, gamma2: 0.7 }, Figure::DiscNoise { n1: 0.2, n2: 0.2 }] {
        let t = bounds::figure_data(&fig, &grid).unwrap();
        min_gap = t.rows.iter().map(|r| r[4]).fold(min_gap, f64::min);
    }
    outcome(
        worst <= 1e-9 && min_gap >= -1e-9,
        format!("50 pairs max(lower − upper)={worst:.2e} figure min_gap={min_gap:.2e} (slack 1e-9)"),
    )
}

fn c10_classical_reductions() -> Outcome {
    let zero = diag(&[1.0, 0.0]);
    let mixed = diag(&[0.5, 0.5]);
    let cn = Choi::replacer(2, &zero).unwrap();
    let cm = Choi::replacer(2, &mixed).unwrap();
    let c = bounds::chernoff_lower(&cn, &cm).unwrap();
    let replacer_err = (c - 2f64.ln()).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let letters: Vec<StateFamily> = (0..3)
            .map(|_| {
                let rho = random::density(2, &mut rng);
                StateFamily::unitary_orbit(rho, random::hermitian(2, &mut rng)).unwrap()
            })
            .collect();
        let f = CqFamily::new(letters.clone()).unwrap();
        let theta = rng.random_range(-1.0..1.0);
        let want = letters
            .iter()
            .map(|l| {
                let (r, dr) = l.at(theta).unwrap();
                sld_oracle(&r, &dr)
            })
            .fold(0.0, f64::max);
        let seesaw = sdp::sld_channel_seesaw(&cq_channel(&f), theta, bounds::FIGURE_SEESAW_ITERS).unwrap();
        worst = worst.max(rel(seesaw.value.to_f64(), want));
    }
    outcome(
        replacer_err <= 1e-6 && worst <= 1e-3,
        format!("|C − ln 2|={replacer_err:.2e} (tol 1e-6) cq seesaw vs max_x I_F max_rel={worst:.2e} (tol 1e-3)"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("gadc-closed-forms", c1_gadc_closed_forms),
        ("sdp-vs-spectral", c2_sdp_vs_spectral),
        ("ordering-suite", c3_orderings),
        ("data-processing", c4_data_processing),
        ("chain-rule-amortization", c5_chain_rule_amortization),
        ("limit-formulas", c6_limit_formulas),
        ("n-half-coincidence", c7_coincidence),
        ("divergence-limits", c8_divergence_limits),
        ("discrimination-ordering", c9_discrimination_ordering),
        ("classical-reductions", c10_classical_reductions),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!(
            "{status} [{:>2}] {name:<24} {} [{:.1}s]",
            k + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
