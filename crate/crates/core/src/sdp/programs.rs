//! Semi-definite programs for Fisher information and channel fidelities.
//!
//! Every program is first restricted to the relevant supports so that it is
//! strictly feasible; infinite values are decided by the finiteness test, not
//! by the solver.

use crate::channels::{ChannelFamily, Choi};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::fisher::{self, FisherKind};
use crate::linalg::{self, CMat, HermOp, Keep};

use super::lmi::{block2, LmiBuilder};
use super::solver::{solve, SdpSolution, SdpStatus, SolverOptions};

/// Optimal value of one of the programs together with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpValue {
    pub value: ExtReal,
    pub gap: f64,
    pub iterations: usize,
}

impl SdpValue {
    fn infinite() -> Self {
        SdpValue {
            value: ExtReal::Infinite,
            gap: 0.0,
            iterations: 0,
        }
    }
}

fn accept(sol: &SdpSolution, opts: &SolverOptions) -> Result<()> {
    match sol.status {
        SdpStatus::Optimal => Ok(()),
        _ if sol.residual() <= 100.0 * opts.tol => Ok(()),
        SdpStatus::Infeasible => Err(Error::Infeasible(format!(
            "residual stalled at {:.3e}",
            sol.residual()
        ))),
        SdpStatus::MaxIterations => Err(Error::MaxIterations {
            iterations: sol.iterations,
            gap: sol.residual(),
        }),
    }
}

fn finish(sol: SdpSolution, opts: &SolverOptions, scale: f64) -> Result<SdpValue> {
    accept(&sol, opts)?;
    Ok(SdpValue {
        value: ExtReal::Finite(scale * sol.value()),
        gap: sol.gap,
        iterations: sol.iterations,
    })
}

fn support_basis(h: &HermOp) -> Result<CMat> {
    Ok(linalg::support_split(h, None)?.support_basis)
}

/// SLD Fisher information `2 inf{μ : [[μ, ⟨Γ|(∂ρ⊗I)], [(∂ρ⊗I)|Γ⟩, ρ⊗I + I⊗ρᵀ]] ⪰ 0}`.
pub fn sld_state_sdp(rho: &HermOp, drho: &HermOp) -> Result<SdpValue> {
    sld_state_sdp_with(rho, drho, &SolverOptions::default())
}

pub fn sld_state_sdp_with(rho: &HermOp, drho: &HermOp, opts: &SolverOptions) -> Result<SdpValue> {
    fisher::validate_state_pair(rho, drho)?;
    if !fisher::finiteness_report(rho, drho, FisherKind::Sld)?.finite {
        return Ok(SdpValue::infinite());
    }
    let d = rho.dim();
    let k = rho.kron(&HermOp::identity(d)).add(&HermOp::identity(d).kron(&rho.transpose()));
    let v = support_basis(&k)?;
    let cvec = v.adjoint() * linalg::vec_gamma(drho.matrix());
    let kred = v.adjoint() * k.matrix() * &v;
    let r = kred.nrows();

    let mut b = LmiBuilder::new();
    let mu = b.scalar(2.0);
    let one = CMat::zeros(1, 1);
    let cm = CMat::from_fn(r, 1, |i, _| cvec[i]);
    let blk = b.block(block2(&one, &cm, &kred));
    let mut e = CMat::zeros(r + 1, r + 1);
    e[(0, 0)] = linalg::c(1.0, 0.0);
    b.add_term(blk, mu, e);
    finish(solve(&b.compile(), opts)?, opts, 1.0)
}

/// RLD Fisher information `inf{Tr M : [[M, ∂ρ], [∂ρ, ρ]] ⪰ 0}`.
pub fn rld_state_sdp(rho: &HermOp, drho: &HermOp) -> Result<SdpValue> {
    rld_state_sdp_with(rho, drho, &SolverOptions::default())
}

pub fn rld_state_sdp_with(rho: &HermOp, drho: &HermOp, opts: &SolverOptions) -> Result<SdpValue> {
    fisher::validate_state_pair(rho, drho)?;
    if !fisher::finiteness_report(rho, drho, FisherKind::Rld)?.finite {
        return Ok(SdpValue::infinite());
    }
    let v = support_basis(rho)?;
    let r = v.ncols();
    let rr = v.adjoint() * rho.matrix() * &v;
    let dr = v.adjoint() * drho.matrix() * &v;
    let zero = CMat::zeros(r, r);

    let mut b = LmiBuilder::new();
    let m = b.hermitian(r);
    b.add_group_cost(&m, |e| e.trace().re);
    let blk = b.block(block2(&zero, &dr, &rr));
    b.add_group(blk, &m, |e| block2(e, &zero, &zero));
    finish(solve(&b.compile(), opts)?, opts, 1.0)
}

/// Channel RLD Fisher information `inf{λ : λI_R ⪰ Tr_B M, [[M, ∂Γ], [∂Γ, Γ]] ⪰ 0}`.
pub fn rld_channel_sdp(fam: &ChannelFamily, theta: f64) -> Result<SdpValue> {
    rld_channel_sdp_with(fam, theta, &SolverOptions::default())
}

pub fn rld_channel_sdp_with(fam: &ChannelFamily, theta: f64, opts: &SolverOptions) -> Result<SdpValue> {
    let (g, dg) = fam.at(theta)?;
    if !fisher::finiteness_report(g.op(), &dg, FisherKind::Rld)?.finite {
        return Ok(SdpValue::infinite());
    }
    if dg.fro_norm() == 0.0 {
        return Ok(SdpValue {
            value: ExtReal::Finite(0.0),
            gap: 0.0,
            iterations: 0,
        });
    }
    let dims = g.dims();
    let v = support_basis(g.op())?;
    let r = v.ncols();
    let gr = v.adjoint() * g.op().matrix() * &v;
    let dr = v.adjoint() * dg.matrix() * &v;
    let zero = CMat::zeros(r, r);

    let mut b = LmiBuilder::new();
    let lam = b.scalar(1.0);
    let m = b.hermitian(r);
    let norm_blk = b.block(CMat::zeros(dims.0, dims.0));
    b.add_term(norm_blk, lam, CMat::identity(dims.0, dims.0));
    b.add_group(norm_blk, &m, |e| {
        let full = &v * e * v.adjoint();
        -linalg::partial_trace_mat(&full, dims, Keep::First).expect("dims checked")
    });
    let blk = b.block(block2(&zero, &dr, &gr));
    b.add_group(blk, &m, |e| block2(e, &zero, &zero));
    finish(solve(&b.compile(), opts)?, opts, 1.0)
}

fn check_same_dims(a: &Choi, b: &Choi) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch(format!(
            "channels have dims {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

/// Root channel fidelity `sup{λ : λI_R ⪯ Re Tr_B Q, [[Γ^N, Q†], [Q, Γ^M]] ⪰ 0}`.
pub fn root_fidelity_channel_sdp(cn: &Choi, cm: &Choi) -> Result<SdpValue> {
    root_fidelity_channel_sdp_with(cn, cm, &SolverOptions::default())
}

pub fn root_fidelity_channel_sdp_with(cn: &Choi, cm: &Choi, opts: &SolverOptions) -> Result<SdpValue> {
    check_same_dims(cn, cm)?;
    let dims = cn.dims();
    let vn = support_basis(cn.op())?;
    let vm = support_basis(cm.op())?;
    let gn = vn.adjoint() * cn.op().matrix() * &vn;
    let gm = vm.adjoint() * cm.op().matrix() * &vm;
    let (rn, rm) = (vn.ncols(), vm.ncols());

    let mut b = LmiBuilder::new();
    let lam = b.scalar(-1.0);
    let q = b.complex(rm, rn);
    let fid_blk = b.block(CMat::zeros(dims.0, dims.0));
    b.add_term(fid_blk, lam, -CMat::identity(dims.0, dims.0));
    b.add_group(fid_blk, &q, |e| {
        let full = &vm * e * vn.adjoint();
        let t = linalg::partial_trace_mat(&full, dims, Keep::First).expect("dims checked");
        (&t + t.adjoint()).scale(0.5)
    });
    let zn = CMat::zeros(rn, rn);
    let zm = CMat::zeros(rm, rm);
    let blk = b.block(block2(&gn, &CMat::zeros(rm, rn), &gm));
    b.add_group(blk, &q, |e| block2(&zn, e, &zm));
    finish(solve(&b.compile(), opts)?, opts, -1.0)
}

/// Smoothing applied to a rank-deficient second argument of the geometric channel fidelity.
pub const GEO_FIDELITY_SMOOTHING: f64 = 1e-9;

/// `(1 − ε)Γ + ε I_R ⊗ I_B / d_B`, the Choi operator of the smoothed channel.
pub fn smooth_choi(ch: &Choi, eps: f64) -> Result<Choi> {
    let db = ch.d_out() as f64;
    Choi::new(ch.op().scale(1.0 - eps).shift(eps / db), ch.dims())
}

/// Root geometric channel fidelity
/// `sup{μ : [[Γ^N, X], [X, Γ^M]] ⪰ 0, μI_R ⪯ Tr_B X, X ⪰ 0}`.
pub fn geo_fidelity_channel_sdp(cn: &Choi, cm: &Choi) -> Result<SdpValue> {
    geo_fidelity_channel_sdp_with(cn, cm, &SolverOptions::default())
}

pub fn geo_fidelity_channel_sdp_with(cn: &Choi, cm: &Choi, opts: &SolverOptions) -> Result<SdpValue> {
    check_same_dims(cn, cm)?;
    let dims = cn.dims();
    let cm = if linalg::support_split(cm.op(), None)?.is_full_rank() {
        cm.clone()
    } else {
        smooth_choi(cm, GEO_FIDELITY_SMOOTHING)?
    };
    let vn = support_basis(cn.op())?;
    let rn = vn.ncols();
    let n = cm.op().dim();
    let gn = vn.adjoint() * cn.op().matrix() * &vn;

    let mut b = LmiBuilder::new();
    let mu = b.scalar(-1.0);
    let x = b.hermitian(rn);
    let fid_blk = b.block(CMat::zeros(dims.0, dims.0));
    b.add_term(fid_blk, mu, -CMat::identity(dims.0, dims.0));
    b.add_group(fid_blk, &x, |e| {
        linalg::partial_trace_mat(&(&vn * e * vn.adjoint()), dims, Keep::First).expect("dims checked")
    });
    let zn = CMat::zeros(rn, rn);
    let zm = CMat::zeros(n, n);
    let blk = b.block(block2(&gn, &CMat::zeros(n, rn), cm.op().matrix()));
    b.add_group(blk, &x, |e| block2(&zn, &(&vn * e), &zm));
    let pos = b.block(zn.clone());
    b.add_group(pos, &x, |e| e.clone());
    finish(solve(&b.compile(), opts)?, opts, -1.0)
}
