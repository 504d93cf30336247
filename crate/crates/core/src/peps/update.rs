//! QR-reduced simple update.

use super::PepsState;
use crate::circuit::Matrix4;
use crate::error::{invalid, Error, Result};
use crate::tensor::{contract, qr_thin, svd_truncate, Tensor};

/// `1/λ` with entries below `floor * max` mapped to 0. Bond weights have
/// maximum 1, so the cutoff is just `floor`.
pub(crate) fn pseudo_inverse(lambda: &[f64], floor: f64) -> Vec<f64> {
    lambda.iter().map(|&l| if l >= floor { 1.0 / l } else { 0.0 }).collect()
}

/// One side of a gate after isolating the bond: `Γ λ_ext = Q R`.
struct Reduced {
    /// `(ext_dim, r)`, or `None` for the identity.
    q: Option<Tensor>,
    /// `(r, 2, D)`.
    r: Tensor,
    ext_dims: Vec<usize>,
    ext_edges: Vec<usize>,
}

impl PepsState {
    fn reduce(&self, v: usize, leg: usize) -> Result<Reduced> {
        let mut t = self.sites[v].clone();
        let deg = self.legs[v].len();
        let mut perm = Vec::with_capacity(deg + 1);
        let mut ext_edges = Vec::with_capacity(deg - 1);
        for k in (0..deg).filter(|&k| k != leg) {
            let e = self.legs[v][k];
            t.scale_axis(k + 1, &self.lambdas[e]);
            perm.push(k + 1);
            ext_edges.push(e);
        }
        perm.extend([0, leg + 1]);
        let t = t.permute(&perm)?;
        let ext_dims: Vec<usize> = t.shape()[..deg - 1].to_vec();
        let ext: usize = ext_dims.iter().product();
        let bond = t.shape()[deg];
        let mat = t.reshape(vec![ext, 2 * bond])?;
        let (q, r) = if ext > 2 * bond {
            let (q, r) = qr_thin(&mat)?;
            (Some(q), r)
        } else {
            (None, mat)
        };
        let rows = r.shape()[0];
        Ok(Reduced { q, r: r.reshape(vec![rows, 2, bond])?, ext_dims, ext_edges })
    }

    /// Rebuilds `Γ_v` from `(r, 2, k)` isometry factor `x`, restoring the
    /// external bond weights and the canonical leg order.
    fn restore(&mut self, v: usize, leg: usize, red: Reduced, x: Tensor) -> Result<()> {
        let k = x.shape()[2];
        let full = match &red.q {
            Some(q) => contract(q, &x, &[(1, 0)])?,
            None => x,
        };
        let mut shape = red.ext_dims.clone();
        shape.extend([2, k]);
        let mut t = full.reshape(shape)?;
        for (i, &e) in red.ext_edges.iter().enumerate() {
            t.scale_axis(i, &pseudo_inverse(&self.lambdas[e], self.lambda_floor));
        }
        // current axes: [ext..., phys, bond]
        let deg = self.legs[v].len();
        let mut perm = vec![deg - 1];
        for j in 0..deg {
            perm.push(match j.cmp(&leg) {
                std::cmp::Ordering::Less => j,
                std::cmp::Ordering::Equal => deg,
                std::cmp::Ordering::Greater => j - 1,
            });
        }
        self.sites[v] = t.permute(&perm)?;
        Ok(())
    }

    /// Applies `gate` on the edge `(a, b)` (the first qubit of the gate basis
    /// is `a`) and truncates the bond to `chi_max`. Returns the relative
    /// weight discarded by the χ cap.
    pub fn apply_two_site(&mut self, a: usize, b: usize, gate: &Matrix4) -> Result<f64> {
        self.check_site(a)?;
        self.check_site(b)?;
        let Some(e) = self.graph.edge_index(a, b) else {
            return invalid(format!("({a}, {b}) is not an edge"));
        };
        let leg_a = self.leg_of(a, b).expect("edge endpoint");
        let leg_b = self.leg_of(b, a).expect("edge endpoint");
        if !self.sites[a].is_finite() || !self.sites[b].is_finite() {
            return Err(Error::Numeric(format!("non-finite site tensor on edge ({a}, {b})")));
        }

        let red_a = self.reduce(a, leg_a)?;
        let red_b = self.reduce(b, leg_b)?;
        let mut ra = red_a.r.clone();
        ra.scale_axis(2, &self.lambdas[e]);
        // theta[ra, sa, rb, sb]
        let theta = contract(&ra, &red_b.r, &[(2, 2)])?;
        let g = Tensor::new(vec![2, 2, 2, 2], gate.iter().flatten().copied().collect())?;
        // [ra, rb, sa', sb']
        let theta = contract(&theta, &g, &[(1, 2), (3, 3)])?;
        let svd = svd_truncate(&theta, &[0, 2], self.chi_max, self.lambda_floor)?;

        let s0 = svd.singular_values[0];
        if !(s0 > 0.0 && s0.is_finite()) {
            return Err(Error::Numeric(format!("degenerate bond ({a}, {b}) after gate")));
        }
        self.lambdas[e] = svd.singular_values.iter().map(|s| s / s0).collect();
        let left = svd.left;
        let right = svd.right.permute(&[1, 2, 0])?;
        self.restore(a, leg_a, red_a, left)?;
        self.restore(b, leg_b, red_b, right)?;
        // only weight cut by the χ cap counts; sub-floor values are zeros
        if self.lambdas[e].len() < self.chi_max {
            Ok(0.0)
        } else {
            Ok(svd.truncation_error)
        }
    }
}
