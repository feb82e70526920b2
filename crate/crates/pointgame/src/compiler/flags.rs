//! Replacing projection steps by unitaries that write a flag, with the matching dual.
//!
//! Each party gets a flag register spanned by `|0⟩` (no abort yet) and `|k⟩` for each of
//! its own steps `k`; step `k` only acts while the flag is `|0⟩`, so the register never
//! leaves this span and a single flag dimension per step suffices.

use super::protocol::{verify_ubp, Protocol, Ubp};
use super::sparse::SparseMat;
use crate::error::{precondition, Error, Result};

/// Flag index of own step `i` (`0` is reserved for "no abort").
fn flag_of(own: &[usize], i: usize) -> usize {
    1 + own.iter().position(|&k| k == i).expect("own step")
}

/// `M(I⊗U)` written on `flag ⊗ space` (`flag_outer`) or `space ⊗ flag`.
fn flagged_unitary(u: &SparseMat, e: &SparseMat, nf: usize, fi: usize, flag_outer: bool) -> SparseMat {
    let d = u.rows;
    let eu = e.mul(u);
    let ceu = u.add_scaled(&eu, -1.0);
    let pos = |f: usize, r: usize| if flag_outer { f * d + r } else { r * nf + f };
    let mut trips = vec![];
    let mut put = |fr: usize, fc: usize, m: &SparseMat| {
        for (r, c, v) in m.triplets() {
            trips.push((pos(fr, r), pos(fc, c), v));
        }
    };
    put(0, 0, &eu);
    put(fi, 0, &ceu);
    put(0, fi, &ceu);
    put(fi, fi, &eu);
    for f in 1..nf {
        if f != fi {
            put(f, f, u);
        }
    }
    SparseMat::from_triplets(d * nf, d * nf, trips)
}

/// `Σ_{f∈flags} |f⟩⟨f| ⊗ I` (flag first) or `I ⊗ |f⟩⟨f|`.
fn flag_projector(flags: &[usize], nf: usize, d: usize, flag_outer: bool) -> SparseMat {
    let mut diag = vec![0.0; nf * d];
    for &f in flags {
        for r in 0..d {
            diag[if flag_outer { f * d + r } else { r * nf + f }] = 1.0;
        }
    }
    SparseMat::diag(&diag)
}

fn zero_flag(z: &SparseMat, nf: usize, flag_outer: bool) -> SparseMat {
    let mut f0 = SparseMat::zeros(nf, nf);
    f0.data[0].push((0, 1.0));
    if flag_outer {
        f0.kron(z)
    } else {
        z.kron(&f0)
    }
}

/// Largest-eigenvalue growth allowed for the flag terms.
const MAX_FLAG_DOUBLINGS: u32 = 10;

/// Turns a projection-form UBP into a plain one with bound `(β + nε, α + nε)`.
pub fn projections_to_unitary(u: &Ubp, eps: f64) -> Result<Ubp> {
    let p = &u.protocol;
    let Some(es) = &p.projections else {
        return Ok(u.clone());
    };
    if eps <= 0.0 {
        return precondition("ε must be positive");
    }
    let rep = verify_ubp(u);
    if !rep.accepted {
        return precondition(format!("projection-form UBP rejected: {}", rep.failures.first().cloned().unwrap_or_default()));
    }
    let n = p.n;
    if n == 0 {
        let mut c = u.clone();
        c.protocol.projections = None;
        return Ok(c);
    }
    let [da, dm, db] = p.dims;
    let own_a: Vec<usize> = (1..=n).filter(|&i| Protocol::is_alice_step(i)).collect();
    let own_b: Vec<usize> = (1..=n).filter(|&i| !Protocol::is_alice_step(i)).collect();
    let (nfa, nfb) = (1 + own_a.len(), 1 + own_b.len());

    let mut unitaries = vec![];
    for i in 1..=n {
        let (uu, e) = (&p.unitaries[i - 1], &es[i - 1]);
        if Protocol::is_alice_step(i) {
            // A'⊗M = F ⊗ (A⊗M)
            unitaries.push(flagged_unitary(uu, e, nfa, flag_of(&own_a, i), true));
        } else {
            // M⊗B' = (M⊗B) ⊗ F
            unitaries.push(flagged_unitary(uu, e, nfb, flag_of(&own_b, i), false));
        }
    }
    let pad = |v: &[f64], nf: usize, outer: bool| -> Vec<f64> {
        let mut out = vec![0.0; v.len() * nf];
        for (k, x) in v.iter().enumerate() {
            out[if outer { k } else { k * nf }] = *x;
        }
        out
    };
    let protocol = Protocol {
        dims: [da * nfa, dm, db * nfb],
        n,
        psi_a0: pad(&p.psi_a0, nfa, true),
        psi_m0: p.psi_m0.clone(),
        psi_b0: pad(&p.psi_b0, nfb, false),
        unitaries,
        projections: None,
        pi_a1: zero_flag(&p.pi_a1, nfa, true),
        pi_b0: zero_flag(&p.pi_b0, nfb, false),
    };

    // Λ_j must dominate ‖Y‖ + ‖Y‖²/(2ε) for the operator Y of the following own step.
    let norm = |z: &SparseMat| z.spectral_norm_sym();
    let mut scale = 2.0;
    for _ in 0..=MAX_FLAG_DOUBLINGS {
        let mut z_a = vec![SparseMat::zeros(0, 0); n + 1];
        let mut z_b = vec![SparseMat::zeros(0, 0); n + 1];
        // Alice: defined at even j, copied to j − 1
        let mut lam_next = 0.0;
        let mut j = n;
        loop {
            let shift = (n - j) as f64 * eps;
            let later: Vec<usize> = own_a.iter().filter(|&&k| k > j).map(|&k| flag_of(&own_a, k)).collect();
            let lam = if j == n {
                0.0
            } else {
                let y = norm(&u.z_a[j + 2]) + (n - j).saturating_sub(2) as f64 * eps;
                f64::max(lam_next, scale * (y + y * y / (2.0 * eps)))
            };
            let base = zero_flag(&u.z_a[j].add_scaled(&SparseMat::identity(da), shift), nfa, true);
            let z = base.add_scaled(&flag_projector(&later, nfa, da, true), lam);
            z_a[j] = z.clone();
            if j > 0 {
                z_a[j - 1] = z;
            }
            lam_next = lam;
            if j < 2 {
                break;
            }
            j -= 2;
        }
        // Bob: defined at odd j with shift (n − j + 1)ε, copied to j − 1; Z'_{B,n} = Π'
        z_b[n] = protocol.pi_b0.clone();
        let mut lam_next = 0.0;
        let mut j = n - 1;
        loop {
            let shift = (n - j + 1) as f64 * eps;
            let later: Vec<usize> = own_b.iter().filter(|&&k| k > j).map(|&k| flag_of(&own_b, k)).collect();
            let y = norm(&u.z_b[(j + 2).min(n)]) + (n - j).saturating_sub(1) as f64 * eps;
            let lam = f64::max(lam_next, scale * (y + y * y / (2.0 * eps)));
            let base = zero_flag(&u.z_b[j].add_scaled(&SparseMat::identity(db), shift), nfb, false);
            let z = base.add_scaled(&flag_projector(&later, nfb, db, false), lam);
            z_b[j] = z.clone();
            z_b[j - 1] = z;
            lam_next = lam;
            if j < 2 {
                break;
            }
            j -= 2;
        }
        let mut header = u.header.clone();
        header.flag_shift = Some(n as f64 * eps);
        let out = Ubp {
            schema: u.schema.clone(),
            header,
            tolerances: u.tolerances.clone(),
            protocol: protocol.clone(),
            z_a,
            z_b,
            beta: u.beta + n as f64 * eps,
            alpha: u.alpha + n as f64 * eps,
        };
        let rep = verify_ubp(&out);
        if rep.accepted {
            return Ok(out);
        }
        if rep.failures.iter().any(|f| !f.contains("step")) {
            return Err(Error::Rejected(format!("flagged UBP rejected: {}", rep.failures[0])));
        }
        scale *= 2.0;
    }
    Err(Error::NoConvergence(format!("flag-term Λ ladder still infeasible after {MAX_FLAG_DOUBLINGS} doublings")))
}
