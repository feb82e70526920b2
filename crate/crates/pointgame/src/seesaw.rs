//! Alternating (see-saw) ascent over one party's unitaries with the other party fixed.
//!
//! The state space is `outer ⊗ local` (or `local ⊗ outer`); the cheater's unitaries act on
//! `local` between fixed linear maps, and the objective is `‖P ψ_final‖²`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub trait SlotModel {
    fn dim(&self) -> usize;
    fn local_dim(&self) -> usize;
    fn outer_dim(&self) -> usize;
    /// `ops[0]`, slot 0, `ops[1]`, slot 1, ..., `ops[last]`.
    fn ops(&self) -> &[DMatrix<f64>];
    fn init(&self) -> &DVector<f64>;
    /// Projector whose weight on the final state is maximized.
    fn target(&self) -> &DMatrix<f64>;
    /// `true` when the local factor is the trailing tensor factor.
    fn slot_on_tail(&self) -> bool;
}

/// Orthogonal factor of the QR decomposition of a uniform random matrix.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

fn as_matrix<M: SlotModel + ?Sized>(m: &M, v: &DVector<f64>) -> DMatrix<f64> {
    let (o, l) = (m.outer_dim(), m.local_dim());
    if m.slot_on_tail() {
        DMatrix::from_fn(o, l, |i, j| v[i * l + j])
    } else {
        DMatrix::from_fn(l, o, |i, j| v[i * o + j])
    }
}

fn from_matrix(x: &DMatrix<f64>) -> DVector<f64> {
    let (r, c) = x.shape();
    DVector::from_fn(r * c, |k, _| x[(k / c, k % c)])
}

fn apply_slot<M: SlotModel + ?Sized>(m: &M, v: &DMatrix<f64>, psi: &DVector<f64>) -> DVector<f64> {
    let x = as_matrix(m, psi);
    if m.slot_on_tail() {
        from_matrix(&(x * v.transpose()))
    } else {
        from_matrix(&(v * x))
    }
}

/// State just before slot `j`, or the final state when `j == slots`.
fn state_before<M: SlotModel + ?Sized>(m: &M, vs: &[DMatrix<f64>], j: usize) -> DVector<f64> {
    let ops = m.ops();
    let mut psi = m.init().clone();
    for k in 0..=j.min(ops.len() - 1) {
        psi = &ops[k] * psi;
        if k == j {
            break;
        }
        psi = apply_slot(m, &vs[k], &psi);
    }
    psi
}

pub fn final_state<M: SlotModel + ?Sized>(m: &M, vs: &[DMatrix<f64>]) -> DVector<f64> {
    state_before(m, vs, vs.len())
}

/// `‖P ψ_final‖²`
pub fn value<M: SlotModel + ?Sized>(m: &M, vs: &[DMatrix<f64>]) -> f64 {
    let psi = final_state(m, vs);
    (m.target() * psi).norm_squared()
}

/// Pulls `phi` back from the final state to just after slot `j`.
fn pull_back<M: SlotModel + ?Sized>(m: &M, vs: &[DMatrix<f64>], j: usize, phi: &DVector<f64>) -> DVector<f64> {
    let ops = m.ops();
    let mut lam = m.target().transpose() * phi;
    for k in (j + 1..ops.len()).rev() {
        lam = ops[k].transpose() * lam;
        if k > j + 1 {
            lam = apply_slot(m, &vs[k - 1].transpose(), &lam);
        }
    }
    lam
}

/// Runs sweeps until the gain falls below `1e-12`; returns `(value, sweeps, converged)`.
pub fn ascend<M: SlotModel + ?Sized>(m: &M, vs: &mut [DMatrix<f64>], iters: usize) -> (f64, usize, bool) {
    let mut last = value(m, vs);
    for it in 0..iters {
        for j in 0..vs.len() {
            let k = state_before(m, vs, j);
            let out = m.target() * final_state(m, vs);
            let nrm = out.norm();
            let phi = if nrm > 1e-300 { out / nrm } else { m.target() * DVector::from_element(m.dim(), 1.0) };
            let lam = pull_back(m, vs, j, &phi);
            let (km, lm) = (as_matrix(m, &k), as_matrix(m, &lam));
            let g = if m.slot_on_tail() { km.transpose() * lm } else { km * lm.transpose() };
            let svd = g.svd(true, true);
            let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            vs[j] = vt.transpose() * u.transpose();
        }
        let now = value(m, vs);
        if now - last < 1e-12 {
            return (now, it + 1, true);
        }
        last = now;
    }
    (last, iters, false)
}
