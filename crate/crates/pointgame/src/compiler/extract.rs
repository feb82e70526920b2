//! Reading point games back out of a UBP.

use super::protocol::{honest_run, Ubp};
use super::sparse::SparseMat;
use crate::error::{input, Error, Result};
use crate::exactmath::{rationalize, Rational};
use crate::games::{verify_tdpg, GameReport, Tdpg};
use crate::points::Config2D;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// A state on the operator's space: a pure vector or a density matrix.
pub enum State<'a> {
    Vector(&'a DVector<f64>),
    Density(&'a DMatrix<f64>),
}

/// Gaps in `(tol, AMBIGUITY_FACTOR·tol)` are neither clearly equal nor clearly distinct.
pub const AMBIGUITY_FACTOR: f64 = 100.0;

/// Groups sorted `(value, payload)` pairs whose consecutive gaps are at most `tol`.
fn cluster<T>(mut items: Vec<(f64, T)>, tol: f64) -> Result<Vec<(f64, Vec<T>)>> {
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(Vec<f64>, Vec<T>)> = vec![];
    let mut last = f64::NEG_INFINITY;
    for (v, t) in items {
        let gap = v - last;
        if gap <= tol {
            let c = out.last_mut().unwrap();
            c.0.push(v);
            c.1.push(t);
        } else {
            if gap < AMBIGUITY_FACTOR * tol {
                return Err(Error::Rejected(format!("ambiguous eigenvalue clustering: gap {gap:.3e} between {last} and {v} (cluster_tol {tol:.1e})")));
            }
            out.push((vec![v], vec![t]));
        }
        last = v;
    }
    Ok(out.into_iter().map(|(vs, ts)| (vs.iter().sum::<f64>() / vs.len() as f64, ts)).collect())
}

/// `Prob(Z, σ)`: eigenvalues of `Z` (clustered) with the weight of `σ` on each eigenspace.
/// Points with weight below `1e-14` are dropped.
pub fn prob_extract(z: &SparseMat, state: State<'_>, cluster_tol: f64) -> Result<Vec<(f64, f64)>> {
    let asym = z.asymmetry();
    if asym > 1e-9 {
        return input(format!("operator is not symmetric (asymmetry {asym:.3e})"));
    }
    let dim = match &state {
        State::Vector(v) => v.len(),
        State::Density(m) => m.nrows(),
    };
    if dim != z.rows {
        return input(format!("state dimension {dim} does not match operator dimension {}", z.rows));
    }
    let pairs = z.sym_eigen();
    let weight = |v: &[(usize, f64)]| match &state {
        State::Vector(psi) => v.iter().map(|&(i, x)| x * psi[i]).sum::<f64>().powi(2),
        State::Density(rho) => v.iter().flat_map(|&(i, x)| v.iter().map(move |&(j, y)| x * y * rho[(i, j)])).sum(),
    };
    let items: Vec<(f64, f64)> = pairs.iter().map(|(l, v)| (*l, weight(v))).collect();
    Ok(cluster(items, cluster_tol)?
        .into_iter()
        .map(|(z, ws)| (z, ws.iter().sum::<f64>()))
        .filter(|(_, w)| *w > 1e-14)
        .collect())
}

/// Two-party version on `A⊗M⊗B`: weights of `ψ` on the joint eigenspaces of `Z_A ⊗ I ⊗ Z_B`.
pub fn prob_extract_2d(za: &SparseMat, zb: &SparseMat, dm: usize, psi: &DVector<f64>, cluster_tol: f64) -> Result<Vec<(f64, f64, f64)>> {
    let (da, db) = (za.rows, zb.rows);
    if psi.len() != da * dm * db {
        return input("state dimension does not match the operators");
    }
    let ea = cluster(za.sym_eigen(), cluster_tol)?;
    let eb = cluster(zb.sym_eigen(), cluster_tol)?;
    let mut out = vec![];
    // weight(x, y) = Σ_{u∈x, v∈y} Σ_m (Σ_{ia,ib} u[ia] v[ib] ψ[ia,m,ib])²
    for (x, us) in &ea {
        for (y, vs) in &eb {
            let mut w = 0.0;
            for u in us {
                // contract A: t[m, ib]
                let mut t = vec![0.0; dm * db];
                for &(ia, ua) in u {
                    let base = ia * dm * db;
                    for (k, tk) in t.iter_mut().enumerate() {
                        *tk += ua * psi[base + k];
                    }
                }
                for v in vs {
                    for m in 0..dm {
                        let s: f64 = v.iter().map(|&(ib, vb)| vb * t[m * db + ib]).sum();
                        w += s * s;
                    }
                }
            }
            if w > 1e-14 {
                out.push((*x, *y, w));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveredGame {
    /// Frames in reverse time as `(x, y, weight)` triples.
    pub float_frames: Vec<Vec<(f64, f64, f64)>>,
    /// Largest change made by rationalization (coordinates and weights).
    pub rationalization_error: f64,
    #[serde(skip)]
    pub tdpg: Tdpg,
    pub report: GameReport,
}

/// Denominator bound used when rationalizing recovered frames.
pub const RECOVER_MAX_DEN: u64 = 1_000_000;

/// Reads the frames `Prob(Z_{A,n−j} ⊗ Z_{B,n−j}, ψ_{n−j})`, rationalizes them and verifies the result.
pub fn ubp_to_tdpg(u: &Ubp, cluster_tol: f64) -> Result<RecoveredGame> {
    let run = honest_run(&u.protocol)?;
    let n = u.protocol.n;
    let dm = u.protocol.dims[1];
    let mut float_frames = vec![];
    for j in 0..=n {
        let k = n - j;
        float_frames.push(prob_extract_2d(&u.z_a[k], &u.z_b[k], dm, &run.states[k], cluster_tol)?);
    }
    let mut err: f64 = 0.0;
    let mut snap = |x: f64| -> Rational {
        let r = rationalize(x, RECOVER_MAX_DEN);
        err = err.max((crate::exactmath::to_f64(&r) - x).abs());
        r
    };
    let mut frames = vec![];
    for f in &float_frames {
        let mut c = Config2D::new();
        for &(x, y, w) in f {
            c.add(snap(x.max(0.0)), snap(y.max(0.0)), snap(w));
        }
        frames.push(c);
    }
    let pa = frames[0].get(&crate::exactmath::int(0), &crate::exactmath::int(1));
    let pb = frames[0].get(&crate::exactmath::int(1), &crate::exactmath::int(0));
    let tdpg = Tdpg::new(pa, pb, frames);
    let report = verify_tdpg(&tdpg);
    Ok(RecoveredGame { float_frames, rationalization_error: err, tdpg, report })
}

/// Largest weight difference between a float frame and an exact one (points matched within `1e-7`).
pub fn frame_distance(f: &[(f64, f64, f64)], c: &Config2D) -> f64 {
    let exact: Vec<(f64, f64, f64)> = c.iter().map(|(p, w)| (crate::exactmath::to_f64(&p.x), crate::exactmath::to_f64(&p.y), crate::exactmath::to_f64(w))).collect();
    let close = |a: &(f64, f64, f64), b: &(f64, f64, f64)| (a.0 - b.0).abs() < 1e-7 && (a.1 - b.1).abs() < 1e-7;
    let mut d: f64 = 0.0;
    for a in f {
        let w: f64 = exact.iter().filter(|b| close(a, b)).map(|b| b.2).sum();
        d = d.max((a.2 - w).abs());
    }
    for b in &exact {
        let w: f64 = f.iter().filter(|a| close(a, b)).map(|a| a.2).sum();
        d = d.max((b.2 - w).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{Protocol, Tolerances, UbpHeader, UBP_SCHEMA};

    #[test]
    fn one_party_examples() {
        let h = 0.5f64.sqrt();
        let psi = DVector::from_vec(vec![h, h]);
        let r = prob_extract(&SparseMat::diag(&[1.0, 0.0]), State::Vector(&psi), 1e-7).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].0 - 0.0).abs() < 1e-15 && (r[0].1 - 0.5).abs() < 1e-12);
        assert!((r[1].0 - 1.0).abs() < 1e-15 && (r[1].1 - 0.5).abs() < 1e-12);
        let r = prob_extract(&SparseMat::identity(2), State::Vector(&psi), 1e-7).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].0 - 1.0).abs() < 1e-15 && (r[0].1 - 1.0).abs() < 1e-12);
        let rho = DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 0.75]));
        let r = prob_extract(&SparseMat::diag(&[2.0, 3.0]), State::Density(&rho), 1e-7).unwrap();
        assert!((r[1].1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn clustering() {
        let psi = DVector::from_vec(vec![0.6, 0.8]);
        let r = prob_extract(&SparseMat::diag(&[1.0, 1.0 + 1e-9]), State::Vector(&psi), 1e-7).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].1 - 1.0).abs() < 1e-12);
        assert!(prob_extract(&SparseMat::diag(&[1.0, 1.0 + 1e-6]), State::Vector(&psi), 1e-7).is_err());
        let skew = SparseMat::from_triplets(2, 2, vec![(0, 1, 1.0)]);
        assert!(prob_extract(&skew, State::Vector(&psi), 1e-7).is_err());
    }

    #[test]
    fn constant_frames() {
        let pi_a1 = SparseMat::diag(&[0.0, 1.0]);
        let pi_b0 = SparseMat::diag(&[1.0, 0.0]);
        let p = Protocol {
            dims: [2, 1, 2],
            n: 2,
            psi_a0: vec![0.0, 1.0],
            psi_m0: vec![1.0],
            psi_b0: vec![1.0, 0.0],
            unitaries: vec![SparseMat::identity(2), SparseMat::identity(2)],
            projections: None,
            pi_a1: pi_a1.clone(),
            pi_b0: pi_b0.clone(),
        };
        let u = Ubp {
            schema: UBP_SCHEMA.into(),
            header: UbpHeader::default(),
            tolerances: Tolerances::default(),
            protocol: p,
            z_a: vec![pi_a1; 3],
            z_b: vec![pi_b0; 3],
            beta: 1.0,
            alpha: 1.0,
        };
        let rec = ubp_to_tdpg(&u, 1e-7).unwrap();
        assert_eq!(rec.float_frames.len(), 3);
        assert!(rec.float_frames.iter().all(|f| f == &vec![(1.0, 1.0, 1.0)]));
    }
}
