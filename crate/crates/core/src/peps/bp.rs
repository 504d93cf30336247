//! Belief-propagation messages on the norm network and the gauge they
//! induce.
//!
//! The message `m(v→w)` lives on the bond `(v, w)`, ket index first. It
//! contracts `Γ_v`, `Γ_v*` and every other message entering `v`, then
//! includes the bond weight of `(v, w)` on both the ket and bra side.

use super::PepsState;
use crate::error::{invalid, Error, Result};
use crate::tensor::{apply_on_axis, contract, eigh, svd_truncate, Tensor, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BpOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for BpOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 500 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BpReport {
    /// Sweeps that still moved some message by at least `tol`.
    pub iterations: usize,
    /// Largest elementwise change in the final sweep.
    pub residual: f64,
}

/// Fixed-point messages, Hermitian with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct BpMessages {
    /// `[m(a→b), m(b→a)]` for each edge `(a, b)` with `a < b`.
    msgs: Vec<[Tensor; 2]>,
    edges: Vec<(usize, usize)>,
}

impl BpMessages {
    /// Message sent from `from` to its neighbor `to`.
    pub fn message(&self, from: usize, to: usize) -> Option<&Tensor> {
        let key = (from.min(to), from.max(to));
        let e = self.edges.binary_search(&key).ok()?;
        Some(&self.msgs[e][usize::from(from > to)])
    }

    fn incoming(&self, e: usize, into: usize) -> &Tensor {
        // the message *into* `into` was sent by the other endpoint
        &self.msgs[e][usize::from(self.edges[e].0 == into)]
    }
}

fn hermitian_unit_trace(m: Tensor) -> Result<Tensor> {
    let d = m.shape()[0];
    let herm = Tensor::from_fn(&[d, d], |ix| (m.get(&[ix[0], ix[1]]) + m.get(&[ix[1], ix[0]]).conj()) * 0.5);
    let tr: f64 = (0..d).map(|i| herm.get(&[i, i]).re).sum();
    if !(tr > 0.0 && tr.is_finite()) {
        return Err(Error::Numeric(format!("message trace {tr}")));
    }
    let mut out = herm;
    out.scale(C64::new(1.0 / tr, 0.0));
    Ok(out)
}

/// `sqrt(m)` and its pseudo-inverse for a positive semidefinite `m`;
/// eigenvalues below `floor * max` count as zero.
fn psd_sqrt_pinv(m: &Tensor, floor: f64) -> Result<(Tensor, Tensor)> {
    let (vals, vecs) = eigh(m)?;
    let top = vals.iter().copied().fold(0.0, f64::max);
    let root: Vec<f64> = vals.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let inv: Vec<f64> = vals.iter().map(|&x| if x > floor * top { 1.0 / x.sqrt() } else { 0.0 }).collect();
    let vh = vecs.adjoint()?;
    let mut a = vecs.clone();
    a.scale_axis(1, &root);
    let mut b = vecs;
    b.scale_axis(1, &inv);
    Ok((a.matmul(&vh)?, b.matmul(&vh)?))
}

impl PepsState {
    /// Contraction of `Γ_v Γ_v*` with all messages entering `v` except
    /// through leg `skip`; shape `[D, D]` on that leg, without its λ.
    fn environment(&self, v: usize, skip: usize, msgs: &BpMessages) -> Result<Tensor> {
        let gamma = &self.sites[v];
        let mut k = gamma.clone();
        for (leg, &e) in self.legs[v].iter().enumerate() {
            if leg != skip {
                k = apply_on_axis(&k, leg + 1, msgs.incoming(e, v))?;
            }
        }
        let pairs: Vec<(usize, usize)> = (0..gamma.rank()).filter(|&i| i != skip + 1).map(|i| (i, i)).collect();
        contract(&k, &gamma.conj(), &pairs)
    }

    fn outgoing(&self, v: usize, leg: usize, msgs: &BpMessages) -> Result<Tensor> {
        let mut m = self.environment(v, leg, msgs)?;
        let lam = &self.lambdas[self.legs[v][leg]];
        m.scale_axis(0, lam);
        m.scale_axis(1, lam);
        hermitian_unit_trace(m)
    }

    /// Iterates messages synchronously from `I/D` until no entry moves by
    /// `tol` or more.
    pub fn bp_messages(&self, opts: BpOptions) -> Result<(BpMessages, BpReport)> {
        if self.infinite {
            return invalid("belief propagation needs a finite graph");
        }
        let edges = self.graph.edges().to_vec();
        let init = |d: usize| {
            let mut t = Tensor::eye(d);
            t.scale(C64::new(1.0 / d as f64, 0.0));
            t
        };
        let mut msgs = BpMessages {
            msgs: self.lambdas.iter().map(|l| [init(l.len()), init(l.len())]).collect(),
            edges: edges.clone(),
        };
        let mut moving = 0;
        let mut residual = f64::INFINITY;
        for _ in 0..opts.max_iters {
            let mut next = Vec::with_capacity(edges.len());
            residual = 0.0f64;
            for (e, &(a, b)) in edges.iter().enumerate() {
                let ab = self.outgoing(a, self.leg_of(a, b).expect("edge"), &msgs)?;
                let ba = self.outgoing(b, self.leg_of(b, a).expect("edge"), &msgs)?;
                residual = residual.max(ab.max_abs_diff(&msgs.msgs[e][0])).max(ba.max_abs_diff(&msgs.msgs[e][1]));
                next.push([ab, ba]);
            }
            msgs.msgs = next;
            if residual < opts.tol {
                return Ok((msgs, BpReport { iterations: moving, residual }));
            }
            moving += 1;
        }
        Err(Error::Convergence { iterations: opts.max_iters, residual })
    }

    /// Brings the state into the gauge defined by the BP fixed point. The
    /// represented state changes by at most a global factor.
    pub fn bp_gauge(&mut self, opts: BpOptions) -> Result<BpReport> {
        let (msgs, report) = self.bp_messages(opts)?;
        let floor = self.lambda_floor;
        let mut plan = Vec::with_capacity(self.graph.num_edges());
        for (e, &(v, w)) in self.graph.edges().iter().enumerate() {
            let (lv, lw) = (self.leg_of(v, w).expect("edge"), self.leg_of(w, v).expect("edge"));
            let m_vw = msgs.message(v, w).expect("edge message");
            let env_w = hermitian_unit_trace(self.environment(w, lw, &msgs)?)?;
            let (r_v, r_v_inv) = psd_sqrt_pinv(&m_vw.conj(), floor)?;
            let (r_w, r_w_inv) = psd_sqrt_pinv(&env_w.conj(), floor)?;
            let bond = r_v.matmul(&r_w.permute(&[1, 0])?)?;
            let svd = svd_truncate(&bond, &[0], usize::MAX, floor)?;
            let s0 = svd.singular_values[0];
            if !(s0 > 0.0 && s0.is_finite()) {
                return Err(Error::Numeric(format!("degenerate bond ({v}, {w}) while gauging")));
            }
            let mut left = r_v_inv;
            left.scale_axis(0, &self.lambdas[e]);
            let t_v = left.matmul(&svd.left)?;
            let t_w = r_w_inv.matmul(&svd.right.permute(&[1, 0])?)?;
            let lam: Vec<f64> = svd.singular_values.iter().map(|s| s / s0).collect();
            plan.push((e, v, lv, t_v, w, lw, t_w, lam));
        }
        for (e, v, lv, t_v, w, lw, t_w, lam) in plan {
            self.sites[v] = apply_on_axis(&self.sites[v], lv + 1, &t_v)?;
            self.sites[w] = apply_on_axis(&self.sites[w], lw + 1, &t_w)?;
            self.lambdas[e] = lam;
        }
        Ok(report)
    }
}
