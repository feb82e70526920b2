//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use common::{mutate, random_config, random_move, sample_refutes, Mutation};
use num_traits::Zero;
use pointgame::compiler::{compile_tdpg, frame_distance, honest_run, ubp_to_tdpg, verify_ubp, CompileOptions};
use pointgame::ddb::{ddb_dual_bound_pb, ddb_dual_bound_pb_f64, ddb_dual_certificate_check, ddb_primal_seesaw_pb, DdbGame};
use pointgame::exactmath::{frac, int, to_f64, Rational};
use pointgame::games::{alice_announces, spekkens_rudolph, strictify_tdpg, tipg_to_tdpg, verify_tdpg, verify_tipg, Tdpg};
use pointgame::ladders::{bias_sixth_delta, build_bias_sixth_tipg, build_family_tipg, continuum_cutoff, search_family_params, SearchBudget};
use pointgame::points::{apply_move, check_valid_fn_2d, Config2D, Direction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

struct Outcome {
    ok: bool,
    detail: String,
}

fn run(n: usize, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let el = t.elapsed();
    let in_time = limit.is_none_or(|l| el <= l);
    let ok = out.ok && in_time;
    let budget = limit.map(|l| format!(" (limit {}s)", l.as_secs())).unwrap_or_default();
    println!("criterion {n}: {} {} [{:.2}s{budget}]", if ok { "PASS" } else { "FAIL" }, out.detail, el.as_secs_f64());
    ok
}

fn sixth() -> Outcome {
    let t = build_bias_sixth_tipg(100).unwrap();
    let rep = verify_tipg(&t);
    let z = (int(2) + bias_sixth_delta(100)) / int(3);
    let want = Some((z.clone(), z));
    let ok = rep.accepted && rep.final_point == want && bias_sixth_delta(100) == frac(8, 299);
    Outcome { ok, detail: format!("accepted={} final={}", rep.accepted, rep.final_point_string().unwrap_or_default()) }
}

fn family(k: u32) -> Outcome {
    let gap = frac(1, 50);
    let found = match search_family_params(k, &gap, SearchBudget::default()) {
        Ok(f) => f,
        Err(e) => return Outcome { ok: false, detail: format!("k={k}: {e}") },
    };
    let p = &found.params;
    let limit = continuum_cutoff(k).unwrap() + &gap;
    let rep = match build_family_tipg(p) {
        Ok(f) => verify_tipg(&f.to_tipg()),
        Err(e) => return Outcome { ok: false, detail: format!("k={k}: build failed: {e}") },
    };
    let ok = rep.accepted && p.zstar <= limit;
    Outcome {
        ok,
        detail: format!("k={k} z*={} eps={} gamma={} accepted={} final={}", p.zstar, p.eps, p.gamma, rep.accepted, rep.final_point_string().unwrap_or_default()),
    }
}

fn ddb_bound() -> Outcome {
    let h = 0.5f64.sqrt();
    let u = ddb_dual_bound_pb_f64(&[1.0 - h, h, 1.0]).unwrap();
    let g = DdbGame::new(vec![frac(1, 3), frac(3, 4), int(1)]).unwrap();
    let exact = ddb_dual_bound_pb(&g).unwrap();
    let cert = ddb_dual_certificate_check(&g).unwrap();
    let ok = (u - h).abs() <= 1e-12 && exact == frac(2, 3) && cert.accepted;
    Outcome { ok, detail: format!("u0(f64)-1/sqrt2={:.1e} u0(1/3,3/4,1)={exact} certificate={}", u - h, cert.accepted) }
}

fn sandwich() -> Outcome {
    let mut games = vec![];
    for j in 1..=20 {
        games.push(DdbGame::fair3(frac(j, 42)).unwrap());
    }
    for (a, b, c) in [(1, 3, 1), (1, 4, 2), (1, 5, 1), (1, 6, 1)] {
        let p1 = frac(a, 4 * b + 1);
        let p2 = frac(b, 2 * b + 1);
        let p3 = frac(c, 5);
        if let Ok(g) = DdbGame::fair5(p1, p2, p3) {
            games.push(g);
        }
    }
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut failures = 0;
    for (i, g) in games.iter().enumerate() {
        let bound = to_f64(&ddb_dual_bound_pb(g).unwrap());
        let s = ddb_primal_seesaw_pb(g, 300, i as u64, 4).unwrap();
        worst = worst.max(s.value - bound);
        if s.value > bound + 1e-6 {
            failures += 1;
        }
    }
    let h = 0.5f64.sqrt();
    let fix_a = ddb_primal_seesaw_pb(&DdbGame::new(vec![frac(1, 3), frac(3, 4), int(1)]).unwrap(), 300, 7, 4).unwrap().value;
    let fix_b = pointgame::ddb::ddb_primal_seesaw_pb_f64(&[1.0 - h, h, 1.0], 300, 7, 4).unwrap().value;
    let gap_a = (fix_a - 2.0 / 3.0).abs();
    let gap_b = (fix_b - h).abs();
    let ok = games.len() >= 20 && failures == 0 && gap_a <= 1e-3 && gap_b <= 1e-3;
    Outcome {
        ok,
        detail: format!("{} instances, max(seesaw-bound)={worst:.2e}, fixture gaps {gap_a:.1e} {gap_b:.1e}", games.len()),
    }
}

fn compile_one(g: &Tdpg, eps: Rational) -> Result<String, String> {
    let s = strictify_tdpg(g, &eps).map_err(|e| e.to_string())?;
    let c = compile_tdpg(&s, &CompileOptions::default()).map_err(|e| e.to_string())?;
    let rep = verify_ubp(&c.ubp);
    let run = honest_run(&c.ubp.protocol).map_err(|e| e.to_string())?;
    let rec = ubp_to_tdpg(&c.ubp, 1e-7).map_err(|e| e.to_string())?;
    let frames = s.explicit_frames().map_err(|e| e.to_string())?;
    let dist = if rec.float_frames.len() == frames.len() {
        rec.float_frames.iter().zip(&frames).map(|(f, e)| frame_distance(f, e)).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let honest = (run.pa - 0.5).abs().max((run.pb - 0.5).abs());
    let summary = format!("slack={:.1e} honest_err={honest:.1e} frame_dist={dist:.1e}", rep.min_slack);
    if rep.accepted && rep.min_slack >= -1e-8 && honest <= 1e-10 && dist <= 1e-6 {
        Ok(summary)
    } else {
        Err(format!("{summary} accepted={}", rep.accepted))
    }
}

fn compiler() -> Outcome {
    let a = compile_one(&alice_announces(), frac(1, 10));
    let b = compile_one(&spekkens_rudolph(&frac(3, 4)).unwrap(), frac(1, 100));
    let ok = a.is_ok() && b.is_ok();
    let show = |r: Result<String, String>| r.unwrap_or_else(|e| e);
    Outcome { ok, detail: format!("trivial: {}; S-R(3/4): {}", show(a), show(b)) }
}

fn conversion() -> Outcome {
    let t = build_bias_sixth_tipg(100).unwrap();
    let eps = frac(1, 100);
    let g = match tipg_to_tdpg(&t, &eps) {
        Ok(g) => g,
        Err(e) => return Outcome { ok: false, detail: e.to_string() },
    };
    let rep = verify_tdpg(&g);
    let src = verify_tipg(&t).final_point.unwrap();
    let Some((b, a)) = rep.final_point.clone() else {
        return Outcome { ok: false, detail: format!("no final point; accepted={}", rep.accepted) };
    };
    let (eb, ea) = (&b - &src.0, &a - &src.1);
    let ok = rep.accepted && eb <= eps && ea <= eps && eb >= Rational::zero() && ea >= Rational::zero();
    Outcome { ok, detail: format!("accepted={} frames={} excess=({}, {})", rep.accepted, g.logical_len(), to_f64(&eb), to_f64(&ea)) }
}

fn refuted_2d(d: &Config2D, dir: Direction) -> bool {
    d.lines(dir).values().any(|f| sample_refutes(f, 10_000))
}

fn valid_2d(p: &Config2D, q: &Config2D, dir: Direction) -> bool {
    check_valid_fn_2d(&q.minus(p), dir, &Rational::zero(), false).valid
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut moves_ok = 0;
    let mut pairs = vec![];
    for _ in 0..1000 {
        let c = random_config(&mut rng);
        let (m, dir) = random_move(&mut rng, &c);
        let q = apply_move(&c, &m).expect("generated move applies");
        if valid_2d(&c, &q, dir) {
            moves_ok += 1;
        }
        pairs.push((c, q, dir));
    }
    let kinds = [Mutation::WeightDecrease, Mutation::Lower, Mutation::BrokenConservation];
    let mut rejected = 0;
    let mut mutated = vec![];
    for (i, (p, q, dir)) in pairs.iter().enumerate() {
        let (bad, d) = mutate(&mut rng, p, q, *dir, kinds[i % 3]);
        if !valid_2d(p, &bad, d) {
            rejected += 1;
        }
        mutated.push((p.clone(), bad, d));
    }
    // mixed: valid moves, mutations and rescaled random pairs with equal totals
    let mut contradictions = 0;
    let mut refuted = 0;
    for i in 0..200 {
        let (p, q, dir) = match i % 3 {
            0 => pairs[i].clone(),
            1 => mutated[i].clone(),
            _ => {
                let p = random_config(&mut rng);
                let q = random_config(&mut rng);
                let q = q.scale(&(p.total() / q.total()));
                let dir = if rng.random_bool(0.5) { Direction::Horizontal } else { Direction::Vertical };
                (p, q, dir)
            }
        };
        let r = refuted_2d(&q.minus(&p), dir);
        refuted += r as usize;
        if r && valid_2d(&p, &q, dir) {
            contradictions += 1;
        }
    }
    let ok = moves_ok == 1000 && rejected == 1000 && contradictions == 0;
    Outcome {
        ok,
        detail: format!("moves accepted {moves_ok}/1000, mutations rejected {rejected}/1000, oracle contradictions {contradictions}/200 ({refuted} refuted)"),
    }
}

fn main() {
    let mut all = true;
    all &= run(1, Some(Duration::from_secs(10)), sixth);
    let t = Instant::now();
    let mut fam = vec![];
    for k in 1..=3 {
        let t = Instant::now();
        let o = family(k);
        let el = t.elapsed();
        fam.push((o.ok && el <= Duration::from_secs(300), format!("{} ({:.1}s)", o.detail, el.as_secs_f64())));
    }
    let fam_ok = fam.iter().all(|f| f.0);
    let details: Vec<String> = fam.into_iter().map(|f| f.1).collect();
    println!(
        "criterion 2: {} {} [{:.2}s (limit 300s per k)]",
        if fam_ok { "PASS" } else { "FAIL" },
        details.join("; "),
        t.elapsed().as_secs_f64()
    );
    all &= fam_ok;
    all &= run(3, None, ddb_bound);
    all &= run(4, Some(Duration::from_secs(120)), sandwich);
    all &= run(5, None, compiler);
    all &= run(6, Some(Duration::from_secs(60)), conversion);
    all &= run(7, None, properties);
    println!("acceptance: {}", if all { "all criteria pass" } else { "some criteria fail" });
    if !all {
        std::process::exit(1);
    }
}
