//! Unitaries for single-line transitions.
//!
//! Canonical space: basis `|j, s⟩` (`j ∈ {0,1}`, `s ∈ S`) at index `j·|S| + idx(s)`,
//! with `Z = Σ s|0,s⟩⟨0,s|` and `P₁ = Σ |1,s⟩⟨1,s|`.

use crate::error::{precondition, Error, Result};
use crate::exactmath::{format_rational, to_f64, Rational};
use crate::points::{check_transition_1d, PointFn1D};
use crate::seesaw::random_orthogonal;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Tolerance on `‖Uψ_q − ψ_p‖`.
pub const STATE_TOL: f64 = 1e-9;
/// Relative PSD slack: accept when `λ_min ≥ −PSD_TOL·(1+Λ)`.
pub const PSD_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Identity,
    ClosedForm,
    Numeric,
}

/// `X = UᵀZU`, `Y = Z + ΛP₁`, `ψ = Σ√q(s)|0,s⟩`, with the achieved residuals.
#[derive(Clone, Debug)]
pub struct Realization {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub psi: DVector<f64>,
    pub branch: Branch,
    pub state_residual: f64,
    /// Smallest eigenvalue of `Y − X`.
    pub psd_slack: f64,
    pub unitarity_error: f64,
    pub iterations: usize,
}

pub(crate) fn z_diag(s: &[f64]) -> DVector<f64> {
    DVector::from_fn(2 * s.len(), |k, _| if k < s.len() { s[k] } else { 0.0 })
}

pub(crate) fn y_diag(s: &[f64], lambda: f64) -> DVector<f64> {
    DVector::from_fn(2 * s.len(), |k, _| if k < s.len() { s[k] } else { lambda })
}

fn index_of(s: &[Rational], z: &Rational) -> Result<usize> {
    s.binary_search(z).map_err(|_| Error::Precondition(format!("coordinate {} not in S", format_rational(z))))
}

fn amplitudes(f: &PointFn1D, s: &[Rational]) -> Result<DVector<f64>> {
    let mut v = DVector::zeros(2 * s.len());
    for (z, w) in f.iter() {
        v[index_of(s, z)?] = to_f64(w).sqrt();
    }
    Ok(v)
}

/// Orthogonal symmetric `H` with `H e₁ = u` for a unit vector `u`.
fn householder(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let mut v = -u.clone();
    v[0] += 1.0;
    let vv = v.dot(&v);
    if vv < 1e-30 {
        return DMatrix::identity(n, n);
    }
    DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv)
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Tag {
    /// Eigenvalue `s_i`, mapped to `|0, s_i⟩`.
    Level(usize),
    /// `0` for X, `Λ` for Y; mapped to some `|1, ·⟩`.
    Extra,
}

struct Spectral {
    tags: Vec<Tag>,
    vecs: Vec<DVector<f64>>,
}

/// Pads a block realization with one-dimensional blocks so both spectra become the
/// canonical ones, then maps eigenvectors to canonical slots. Returns `U = W_Xᵀ W_Y`.
fn standardize(s: &[f64], lambda: f64, xb: Spectral, yb: Spectral) -> DMatrix<f64> {
    let ns = s.len();
    let d = xb.vecs.first().map_or(0, |v| v.len());
    let remaining = |b: &Spectral| {
        let mut have = vec![false; ns];
        let mut extras = 0;
        for t in &b.tags {
            match t {
                Tag::Level(i) => have[*i] = true,
                Tag::Extra => extras += 1,
            }
        }
        let mut rem: Vec<Tag> = (0..ns).filter(|&i| !have[i]).map(Tag::Level).collect();
        rem.extend(std::iter::repeat_n(Tag::Extra, ns - extras));
        rem
    };
    let value = |t: &Tag, extra: f64| match t {
        Tag::Level(i) => s[*i],
        Tag::Extra => extra,
    };
    let mut xr = remaining(&xb);
    let mut yr = remaining(&yb);
    xr.sort_by(|a, b| value(a, 0.0).total_cmp(&value(b, 0.0)));
    yr.sort_by(|a, b| value(a, lambda).total_cmp(&value(b, lambda)));
    debug_assert_eq!(xr.len(), yr.len());
    debug_assert_eq!(d + xr.len(), 2 * ns);
    let total = 2 * ns;
    let embed = |v: &DVector<f64>| DVector::from_fn(total, |k, _| if k < d { v[k] } else { 0.0 });
    let build = |b: &Spectral, pads: &[Tag]| {
        let mut w = DMatrix::zeros(total, total);
        let mut next_extra = ns;
        let mut place = |t: &Tag, v: DVector<f64>, w: &mut DMatrix<f64>| {
            let col = match t {
                Tag::Level(i) => *i,
                Tag::Extra => {
                    next_extra += 1;
                    next_extra - 1
                }
            };
            w.set_column(col, &v);
        };
        for (t, v) in b.tags.iter().zip(&b.vecs) {
            place(t, embed(v), &mut w);
        }
        for (k, t) in pads.iter().enumerate() {
            let mut e = DVector::zeros(total);
            e[d + k] = 1.0;
            place(t, e, &mut w);
        }
        w
    };
    let wx = build(&xb, &xr);
    let wy = build(&yb, &yr);
    wx.transpose() * wy
}

/// `p → q` with `|S(q)| = 1`: `X` diagonal on the points of `p`, `Y = z'·ψ̂ψ̂ᵀ + Λ(I − ψ̂ψ̂ᵀ)`.
fn merge_unitary(p: &PointFn1D, z: &Rational, s: &[Rational], sf: &[f64], lambda: f64) -> Result<DMatrix<f64>> {
    let m = p.len();
    let psi = DVector::from_iterator(m, p.iter().map(|(_, w)| to_f64(w).sqrt()));
    let h = householder(&psi.normalize());
    let mut xb = Spectral { tags: vec![], vecs: vec![] };
    for (k, (x, _)) in p.iter().enumerate() {
        xb.tags.push(Tag::Level(index_of(s, x)?));
        let mut e = DVector::zeros(m);
        e[k] = 1.0;
        xb.vecs.push(e);
    }
    let mut yb = Spectral { tags: vec![Tag::Level(index_of(s, z)?)], vecs: vec![h.column(0).into_owned()] };
    for k in 1..m {
        yb.tags.push(Tag::Extra);
        yb.vecs.push(h.column(k).into_owned());
    }
    Ok(standardize(sf, lambda, xb, yb))
}

/// `p → q` with `|S(p)| = 1`: `Y` diagonal on the points of `q`, `X = z·ψ̂ψ̂ᵀ`.
fn split_unitary(z: &Rational, q: &PointFn1D, s: &[Rational], sf: &[f64], lambda: f64) -> Result<DMatrix<f64>> {
    let m = q.len();
    let psi = DVector::from_iterator(m, q.iter().map(|(_, w)| to_f64(w).sqrt()));
    let h = householder(&psi.normalize());
    let mut yb = Spectral { tags: vec![], vecs: vec![] };
    for (k, (y, _)) in q.iter().enumerate() {
        yb.tags.push(Tag::Level(index_of(s, y)?));
        let mut e = DVector::zeros(m);
        e[k] = 1.0;
        yb.vecs.push(e);
    }
    let mut xb = Spectral { tags: vec![Tag::Level(index_of(s, z)?)], vecs: vec![h.column(0).into_owned()] };
    for k in 1..m {
        xb.tags.push(Tag::Extra);
        xb.vecs.push(h.column(k).into_owned());
    }
    Ok(standardize(sf, lambda, xb, yb))
}

fn slack_matrix(u: &DMatrix<f64>, z: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64> {
    let zu = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| z[i] * u[(i, j)]);
    let f = DMatrix::from_diagonal(y) - u.transpose() * zu;
    (&f + f.transpose()) * 0.5
}

/// Hinge² loss on the spectrum of `Y − UᵀZU` and its gradient in `U`.
fn loss_and_grad(u: &DMatrix<f64>, z: &DVector<f64>, y: &DVector<f64>, tau: f64) -> (f64, f64, DMatrix<f64>) {
    let e = SymmetricEigen::new(slack_matrix(u, z, y));
    let n = u.nrows();
    let mut loss = 0.0;
    let mut g = DMatrix::zeros(n, n);
    for k in 0..n {
        let mu = e.eigenvalues[k];
        if mu < tau {
            loss += (tau - mu) * (tau - mu);
            let v = e.eigenvectors.column(k);
            g -= (&v * v.transpose()) * (2.0 * (tau - mu));
        }
    }
    // ∂L/∂U = −2 Z U G
    let ug = u * &g;
    let grad = DMatrix::from_fn(n, n, |i, j| -2.0 * z[i] * ug[(i, j)]);
    (loss, e.eigenvalues.min(), grad)
}

fn cayley(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    let i = DMatrix::<f64>::identity(n, n);
    let lhs = &i - b * 0.5;
    let rhs = &i + b * 0.5;
    lhs.lu().solve(&rhs).expect("Cayley transform of a skew matrix is always defined")
}

pub const NUMERIC_RESTARTS: usize = 8;
pub const NUMERIC_ITERS: usize = 4000;

/// Searches `U = R_p·diag(1, O)·R_qᵀ` over `O` orthogonal, so the state equation holds by construction.
fn numeric_unitary(psi_p: &DVector<f64>, psi_q: &DVector<f64>, z: &DVector<f64>, y: &DVector<f64>, lambda: f64, seed: u64) -> Result<(DMatrix<f64>, usize)> {
    let n = psi_p.len();
    let rp = householder(&psi_p.normalize());
    let rq = householder(&psi_q.normalize());
    let accept = -1e-11 * (1.0 + lambda);
    let tau = 1e-9 * (1.0 + lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::NEG_INFINITY, 0usize);
    let assemble = |o: &DMatrix<f64>| {
        let mut d = DMatrix::identity(n, n);
        d.view_mut((1, 1), (n - 1, n - 1)).copy_from(o);
        &rp * d * rq.transpose()
    };
    let mut total_iters = 0;
    for restart in 0..NUMERIC_RESTARTS {
        let mut o = if restart == 0 { DMatrix::identity(n - 1, n - 1) } else { random_orthogonal(n - 1, &mut rng) };
        let mut u = assemble(&o);
        let (mut loss, mut minev, mut grad) = loss_and_grad(&u, z, y, tau);
        let mut eta = 1.0;
        for _ in 0..NUMERIC_ITERS {
            total_iters += 1;
            if minev >= accept {
                return Ok((u, total_iters));
            }
            let go = (rp.transpose() * &grad * &rq).view((1, 1), (n - 1, n - 1)).into_owned();
            let a = o.transpose() * &go;
            let omega = (&a - a.transpose()) * 0.5;
            let mut improved = false;
            while eta > 1e-14 {
                let o2 = &o * cayley(&(&omega * -eta));
                let u2 = assemble(&o2);
                let (l2, m2, g2) = loss_and_grad(&u2, z, y, tau);
                if l2 < loss {
                    (o, u, loss, minev, grad) = (o2, u2, l2, m2, g2);
                    eta *= 2.0;
                    improved = true;
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if minev > best.0 {
            best = (minev, restart);
        }
        if minev >= accept {
            return Ok((u, total_iters));
        }
    }
    Err(Error::NoConvergence(format!(
        "numeric realization: best λ_min(Z + ΛP₁ − UᵀZU) = {:.3e} after {} restarts (Λ = {lambda})",
        best.0, NUMERIC_RESTARTS
    )))
}

/// Finds `U` with `U Σ√q(s)|0,s⟩ = Σ√p(s)|0,s⟩` and `Z + ΛP₁ ≥ UᵀZU`.
///
/// `s` must be sorted, duplicate free and contain both supports. `p = q` gives the identity;
/// otherwise `p → q` must be strictly valid.
pub fn realize_transition(p: &PointFn1D, q: &PointFn1D, s: &[Rational], lambda: f64, seed: u64) -> Result<(Realization, DMatrix<f64>)> {
    if s.windows(2).any(|w| w[0] >= w[1]) {
        return precondition("coordinate set must be sorted and duplicate free");
    }
    let sf: Vec<f64> = s.iter().map(to_f64).collect();
    if lambda <= sf.iter().cloned().fold(0.0, f64::max) {
        return precondition("Λ must exceed every coordinate");
    }
    let psi_p = amplitudes(p, s)?;
    let psi_q = amplitudes(q, s)?;
    let z = z_diag(&sf);
    let y = y_diag(&sf, lambda);
    let n = 2 * s.len();
    let (u, branch, iterations) = if p == q {
        (DMatrix::identity(n, n), Branch::Identity, 0)
    } else {
        let v = check_transition_1d(p, q, true);
        if !v.strictly_valid {
            return precondition(format!("transition is not strictly valid ({})", v.reason()));
        }
        if let Some((zq, _)) = q.iter().next().filter(|_| q.len() == 1) {
            (merge_unitary(p, zq, s, &sf, lambda)?, Branch::ClosedForm, 0)
        } else if let Some((zp, _)) = p.iter().next().filter(|_| p.len() == 1) {
            (split_unitary(zp, q, s, &sf, lambda)?, Branch::ClosedForm, 0)
        } else {
            // U is the identity away from the support levels and a few j = 1 slots
            let mut levels: Vec<usize> = p.iter().chain(q.iter()).map(|(x, _)| index_of(s, x)).collect::<Result<_>>()?;
            levels.sort_unstable();
            levels.dedup();
            let ancilla = (2 * levels.len()).min(s.len());
            let keep: Vec<usize> = levels.iter().copied().chain((0..ancilla).map(|k| k + s.len())).collect();
            let pick = |v: &DVector<f64>| DVector::from_iterator(keep.len(), keep.iter().map(|&k| v[k]));
            let (w, it) = numeric_unitary(&pick(&psi_p), &pick(&psi_q), &pick(&z), &pick(&y), lambda, seed)?;
            let mut u = DMatrix::identity(n, n);
            for (a, &r) in keep.iter().enumerate() {
                for (b, &c) in keep.iter().enumerate() {
                    u[(r, c)] = w[(a, b)];
                }
            }
            (u, Branch::Numeric, it)
        }
    };
    let state_residual = (&u * &psi_q - &psi_p).norm();
    let unitarity_error = (u.transpose() * &u - DMatrix::<f64>::identity(n, n)).amax();
    let zu = DMatrix::from_fn(n, n, |i, j| z[i] * u[(i, j)]);
    let x = u.transpose() * zu;
    let x = (&x + x.transpose()) * 0.5;
    let ym = DMatrix::from_diagonal(&y);
    // independent pass: full eigen-decomposition of Y − X, not the search's own bookkeeping
    let psd_slack = SymmetricEigen::new(&ym - &x).eigenvalues.min();
    let r = Realization { x, y: ym, psi: psi_q, branch, state_residual, psd_slack, unitarity_error, iterations };
    if state_residual > STATE_TOL || unitarity_error > 1e-10 {
        return Err(Error::NoConvergence(format!(
            "realization residuals too large: state {state_residual:.3e}, unitarity {unitarity_error:.3e}"
        )));
    }
    if psd_slack < -PSD_TOL * (1.0 + lambda) {
        return Err(Error::NoConvergence(format!("λ_min(Z + ΛP₁ − UᵀZU) = {psd_slack:.3e} with Λ = {lambda}")));
    }
    Ok((r, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{frac, int};

    fn f(pts: &[(Rational, Rational)]) -> PointFn1D {
        PointFn1D::from_points(pts.iter().cloned()).unwrap()
    }

    fn oracle_ok(r: &Realization, u: &DMatrix<f64>, p: &PointFn1D, s: &[Rational], lambda: f64) {
        // direct check of the matrix inequality with a dense eigensolver on the unsymmetrized form
        let n = u.nrows();
        let sf: Vec<f64> = s.iter().map(to_f64).collect();
        let z = DMatrix::from_diagonal(&z_diag(&sf));
        let p1 = DMatrix::from_fn(n, n, |i, j| if i == j && i >= s.len() { 1.0 } else { 0.0 });
        let m = &z + p1 * lambda - u.transpose() * &z * u;
        let ev = m.symmetric_eigenvalues();
        assert!(ev.min() >= -1e-8 * (1.0 + lambda), "{}", ev.min());
        let out = u * &r.psi;
        for (zz, w) in p.iter() {
            let i = s.binary_search(zz).unwrap();
            assert!((out[i] - to_f64(w).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn merge_closed_form() {
        let s = vec![int(0), frac(1, 2) + frac(1, 100), int(1)];
        let p = f(&[(int(0), frac(1, 2)), (int(1), frac(1, 2))]);
        let q = f(&[(frac(51, 100), int(1))]);
        // the Schur complement needs Λ − 1/2 ≥ (1/4)/(1/100)
        assert!(matches!(realize_transition(&p, &q, &s, 4.0, 0), Err(Error::NoConvergence(_))));
        let (r, u) = realize_transition(&p, &q, &s, 32.0, 0).unwrap();
        assert_eq!(r.branch, Branch::ClosedForm);
        oracle_ok(&r, &u, &p, &s, 32.0);
        // the exact merge without the shift is not strict
        let q0 = f(&[(frac(1, 2), int(1))]);
        let s0 = vec![int(0), frac(1, 2), int(1)];
        assert!(matches!(realize_transition(&p, &q0, &s0, 4.0, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn split_and_raise() {
        let s = vec![frac(3, 4), int(1), int(3)];
        let p = f(&[(int(1), frac(1, 2))]);
        let q = f(&[(frac(3, 4), frac(1, 3)), (int(3), frac(1, 6))]);
        // Σq/y = w/z exactly: Y − X is singular but still PSD
        let (r, u) = realize_transition(&p, &q, &s, 12.0, 0).unwrap();
        oracle_ok(&r, &u, &p, &s, 12.0);
        let s2 = vec![frac(3, 4), int(1), frac(31, 10)];
        let q2 = f(&[(frac(3, 4), frac(1, 3)), (frac(31, 10), frac(1, 6))]);
        let (r, u) = realize_transition(&p, &q2, &s2, 12.4, 0).unwrap();
        assert_eq!(r.branch, Branch::ClosedForm);
        oracle_ok(&r, &u, &p, &s2, 12.4);
        let pr = f(&[(int(1), frac(1, 2))]);
        let qr = f(&[(int(3), frac(1, 2))]);
        let (r, u) = realize_transition(&pr, &qr, &s, 12.0, 0).unwrap();
        oracle_ok(&r, &u, &pr, &s, 12.0);
    }

    #[test]
    fn identity_variant() {
        let s = vec![int(0), int(1)];
        let p = f(&[(int(1), frac(1, 2))]);
        let (r, u) = realize_transition(&p, &p, &s, 4.0, 0).unwrap();
        assert_eq!(r.branch, Branch::Identity);
        assert_eq!(u, DMatrix::identity(4, 4));
    }

    #[test]
    fn numeric_branch() {
        // two points to two points: both raised, so strictly valid, neither side a single point
        let s: Vec<Rational> = [int(1), int(2), int(3), int(4)].into();
        let p = f(&[(int(1), int(1)), (int(3), int(1))]);
        let q = f(&[(int(2), int(1)), (int(4), int(1))]);
        let (r, u) = realize_transition(&p, &q, &s, 16.0, 7).unwrap();
        assert_eq!(r.branch, Branch::Numeric);
        oracle_ok(&r, &u, &p, &s, 16.0);
        // three-point rung: 1/2[1] + 1/2[3] → 1/4[1.5] + 1/2[2.2] + 1/4[3.5]
        let s: Vec<Rational> = [int(1), frac(3, 2), frac(11, 5), int(3), frac(7, 2)].into();
        let p = f(&[(int(1), frac(1, 2)), (int(3), frac(1, 2))]);
        let q = f(&[(frac(3, 2), frac(1, 4)), (frac(11, 5), frac(1, 2)), (frac(7, 2), frac(1, 4))]);
        let (r, u) = realize_transition(&p, &q, &s, 14.0, 7).unwrap();
        assert_eq!(r.branch, Branch::Numeric);
        oracle_ok(&r, &u, &p, &s, 14.0);
    }

    #[test]
    fn rejects_invalid() {
        let s = vec![int(1), int(2)];
        let p = f(&[(int(2), int(1))]);
        let q = f(&[(int(1), int(1))]);
        assert!(matches!(realize_transition(&p, &q, &s, 8.0, 0), Err(Error::Precondition(_))));
    }
}
