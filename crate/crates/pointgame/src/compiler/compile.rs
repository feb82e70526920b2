//! Strictified TDPG → protocol with projections + dual certificate.

use super::protocol::{Protocol, Tolerances, Ubp, UbpHeader, UBP_SCHEMA};
use super::realize::{realize_transition, Branch};
use super::sparse::SparseMat;
use crate::error::{precondition, Error, Result};
use crate::exactmath::{format_rational, int, to_f64, Rational};
use crate::games::{alternating_direction, coin_flip_start, strict_failures, verify_tdpg, Tdpg};
use crate::points::{Config2D, Direction, PointFn1D};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub seed: u64,
    /// Starting `Λ`; defaults to `4·max(S_A ∪ S_B)`.
    pub lambda0: Option<f64>,
    pub max_doublings: u32,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { seed: 0, lambda0: None, max_doublings: 10 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LineSummary {
    pub step: usize,
    pub line: String,
    pub branch: Branch,
    pub psd_slack: f64,
    pub state_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub ubp: Ubp,
    pub lines: Vec<LineSummary>,
    pub s_a: Vec<Rational>,
    pub s_b: Vec<Rational>,
}

/// Largest explicit game the compiler accepts.
pub const MAX_COMPILE_FRAMES: usize = 2_000;
/// Largest `d_A·d_M·d_B` the compiler will build.
pub const MAX_STATE_DIM: usize = 1 << 22;

struct Job {
    step: usize,
    /// Index of the fixed coordinate in `S_B` (Alice) or `S_A` (Bob).
    line: usize,
    p: PointFn1D,
    q: PointFn1D,
}

fn sorted_coords(frames: &[&Config2D], pick: impl Fn(&Config2D) -> Vec<Rational>) -> Vec<Rational> {
    let mut v: Vec<Rational> = frames.iter().flat_map(|f| pick(f)).chain([int(0), int(1)]).collect();
    v.sort();
    v.dedup();
    v
}

/// Compiles a strictified, alternating (vertical first, ends horizontal) coin-flipping TDPG.
pub fn compile_tdpg(g: &Tdpg, opts: &CompileOptions) -> Result<Compiled> {
    if g.start.is_some() {
        return precondition("only coin-flipping games (default start) can be compiled");
    }
    let frames = g.explicit_frames().map_err(|_| Error::Precondition("compile needs an explicit game; expand repeat blocks first".into()))?;
    let n = frames.len() - 1;
    if n > MAX_COMPILE_FRAMES {
        return precondition(format!("{n} transitions exceed the compile limit of {MAX_COMPILE_FRAMES}"));
    }
    if n % 2 == 1 {
        return precondition("transition count must be even (normalize alternation first)");
    }
    let rep = verify_tdpg(g);
    if !rep.accepted {
        return Err(Error::Rejected(format!("TDPG rejected: {}", rep.failures.first().map(|f| f.to_string()).unwrap_or_default())));
    }
    if frames[0] != &coin_flip_start(&g.pa, &g.pb) {
        return precondition("first frame must be P_B[1,0] + P_A[0,1]");
    }
    if let Some(f) = strict_failures(g)?.first() {
        return precondition(format!("game is not strict (apply strictify first): {f}"));
    }
    let (beta_r, alpha_r) = rep.final_point.clone().ok_or_else(|| Error::Precondition("final frame is not a single point".into()))?;
    let s_a = sorted_coords(&frames, |f| f.xs());
    let s_b = sorted_coords(&frames, |f| f.ys());
    let (na, nb) = (s_a.len(), s_b.len());
    let (da, dm, db) = (2 * na, na * nb, 2 * nb);
    if da * dm * db > MAX_STATE_DIM {
        return precondition(format!(
            "protocol dimension {da}·{dm}·{db} exceeds {MAX_STATE_DIM} (|S_A| = {na}, |S_B| = {nb})"
        ));
    }
    let max_s = s_a.iter().chain(&s_b).map(to_f64).fold(0.0, f64::max);
    let idx = |s: &[Rational], z: &Rational| s.binary_search(z).expect("coordinate collected");

    let mut jobs = vec![];
    for i in 1..=n {
        let t = n - i;
        let dir = alternating_direction(t);
        debug_assert_eq!(dir == Direction::Horizontal, Protocol::is_alice_step(i));
        let (lines_p, lines_q) = (frames[t].lines(dir), frames[t + 1].lines(dir));
        let fixed = if dir == Direction::Horizontal { &s_b } else { &s_a };
        for (k, c) in fixed.iter().enumerate() {
            let p = lines_p.get(c).cloned().unwrap_or_default();
            let q = lines_q.get(c).cloned().unwrap_or_default();
            if p != q {
                jobs.push(Job { step: i, line: k, p, q });
            }
        }
    }

    // raising Λ only adds ΛP₁ ≥ 0 to each line's slack, so realized lines are kept
    let mut lambda = opts.lambda0.unwrap_or(4.0 * max_s);
    let mut attempt = 0;
    let mut done: Vec<Option<(DMatrix<f64>, LineSummary)>> = vec![None; jobs.len()];
    loop {
        let todo: Vec<usize> = (0..jobs.len()).filter(|&k| done[k].is_none()).collect();
        let results: Vec<(usize, Result<(DMatrix<f64>, LineSummary)>)> = todo
            .par_iter()
            .map(|&k| {
                let job = &jobs[k];
                let alice = Protocol::is_alice_step(job.step);
                let s = if alice { &s_a } else { &s_b };
                let seed = opts.seed ^ ((job.step as u64) << 32 | job.line as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let coord = if alice { &s_b[job.line] } else { &s_a[job.line] };
                let locator = format!("{} = {}", if alice { "y" } else { "x" }, format_rational(coord));
                let r = realize_transition(&job.p, &job.q, s, lambda, seed)
                    .map(|(r, u)| (u, LineSummary { step: job.step, line: locator.clone(), branch: r.branch, psd_slack: r.psd_slack, state_residual: r.state_residual }))
                    .map_err(|e| match e {
                        Error::NoConvergence(m) => Error::NoConvergence(format!("step {} line {locator}: {m}", job.step)),
                        Error::Precondition(m) => Error::Precondition(format!("step {} line {locator}: {m}", job.step)),
                        other => other,
                    });
                (k, r)
            })
            .collect();
        let mut stuck = None;
        for (k, r) in results {
            match r {
                Ok(v) => done[k] = Some(v),
                Err(Error::NoConvergence(m)) => stuck = stuck.or(Some(m)),
                Err(e) => return Err(e),
            }
        }
        match stuck {
            None => break,
            Some(_) if attempt < opts.max_doublings => {
                attempt += 1;
                lambda *= 2.0;
            }
            Some(m) => return Err(Error::NoConvergence(format!("{m} (after {attempt} doublings of Λ)"))),
        }
    }
    let realized: Vec<(DMatrix<f64>, LineSummary)> = done.into_iter().map(|d| d.expect("every line realized")).collect();

    let mut per_step: Vec<Vec<(usize, &DMatrix<f64>)>> = vec![vec![]; n + 1];
    for (job, (u, _)) in jobs.iter().zip(&realized) {
        per_step[job.step].push((job.line, u));
    }
    let mut unitaries = vec![];
    let mut projections = vec![];
    for (i, blocks) in per_step.iter().enumerate().skip(1) {
        let mut trips = vec![];
        let mut covered: Vec<bool>;
        if Protocol::is_alice_step(i) {
            // |j,a⟩_A |a',b⟩_M ↦ (j·na + a)·dm + a'·nb + b
            let at = |j: usize, a: usize, a2: usize, b: usize| (j * na + a) * dm + a2 * nb + b;
            covered = vec![false; nb];
            for &(b, u) in blocks {
                covered[b] = true;
                for r in 0..2 * na {
                    for c in 0..2 * na {
                        let v = u[(r, c)];
                        if v != 0.0 {
                            trips.push((at(r / na, r % na, r % na, b), at(c / na, c % na, c % na, b), v));
                        }
                    }
                }
            }
            for j in 0..2 {
                for a in 0..na {
                    for a2 in 0..na {
                        for (b, &cov) in covered.iter().enumerate() {
                            if a != a2 || !cov {
                                trips.push((at(j, a, a2, b), at(j, a, a2, b), 1.0));
                            }
                        }
                    }
                }
            }
            let e = (0..na).flat_map(|a| (0..nb).map(move |b| (a, b))).map(|(a, b)| (at(0, a, a, b), at(0, a, a, b), 1.0));
            unitaries.push(SparseMat::from_triplets(da * dm, da * dm, trips));
            projections.push(SparseMat::from_triplets(da * dm, da * dm, e.collect::<Vec<_>>()));
        } else {
            // |a,b'⟩_M |b,j⟩_B ↦ (a·nb + b')·db + 2b + j
            let at = |a: usize, b2: usize, b: usize, j: usize| (a * nb + b2) * db + 2 * b + j;
            covered = vec![false; na];
            for &(a, u) in blocks {
                covered[a] = true;
                for r in 0..2 * nb {
                    for c in 0..2 * nb {
                        let v = u[(r, c)];
                        if v != 0.0 {
                            trips.push((at(a, r % nb, r % nb, r / nb), at(a, c % nb, c % nb, c / nb), v));
                        }
                    }
                }
            }
            for (a, &cov) in covered.iter().enumerate() {
                for b2 in 0..nb {
                    for b in 0..nb {
                        for j in 0..2 {
                            if b != b2 || !cov {
                                trips.push((at(a, b2, b, j), at(a, b2, b, j), 1.0));
                            }
                        }
                    }
                }
            }
            let e = (0..na).flat_map(|a| (0..nb).map(move |b| (a, b))).map(|(a, b)| (at(a, b, b, 0), at(a, b, b, 0), 1.0));
            unitaries.push(SparseMat::from_triplets(dm * db, dm * db, trips));
            projections.push(SparseMat::from_triplets(dm * db, dm * db, e.collect::<Vec<_>>()));
        }
    }

    let beta = to_f64(&beta_r);
    let alpha = to_f64(&alpha_r);
    let basis = |d: usize, k: usize| {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        v
    };
    let one = int(1);
    let ia1 = idx(&s_a, &one);
    let ib1 = idx(&s_b, &one);
    let pi_a1 = SparseMat::from_triplets(da, da, vec![(ia1, ia1, 1.0)]);
    let pi_b0 = SparseMat::from_triplets(db, db, vec![(2 * ib1, 2 * ib1, 1.0)]);
    let protocol = Protocol {
        dims: [da, dm, db],
        n,
        psi_a0: basis(da, idx(&s_a, &beta_r)),
        psi_m0: basis(dm, idx(&s_a, &beta_r) * nb + idx(&s_b, &alpha_r)),
        psi_b0: basis(db, 2 * idx(&s_b, &alpha_r)),
        unitaries,
        projections: Some(projections),
        pi_a1: pi_a1.clone(),
        pi_b0: pi_b0.clone(),
    };
    let za = SparseMat::diag(&(0..da).map(|k| if k < na { to_f64(&s_a[k]) } else { lambda }).collect::<Vec<_>>());
    let zb = SparseMat::diag(&(0..db).map(|k| if k % 2 == 0 { to_f64(&s_b[k / 2]) } else { lambda }).collect::<Vec<_>>());
    let z_a = (0..=n).map(|i| if i + 1 >= n { pi_a1.clone() } else { za.clone() }).collect();
    let z_b = (0..=n).map(|i| if i == n { pi_b0.clone() } else { zb.clone() }).collect();
    let header = UbpHeader {
        seed: opts.seed,
        lambda,
        source_bound: Some((format_rational(&beta_r), format_rational(&alpha_r))),
        flag_shift: None,
        notes: vec![],
    };
    let ubp = Ubp { schema: UBP_SCHEMA.into(), header, tolerances: Tolerances::default(), protocol, z_a, z_b, beta, alpha };
    Ok(Compiled { ubp, lines: realized.into_iter().map(|r| r.1).collect(), s_a, s_b })
}
