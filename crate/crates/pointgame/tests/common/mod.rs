//! Shared generators and the sampling refutation oracle.
#![allow(dead_code)]

use num_traits::{Signed, Zero};
use pointgame::exactmath::{frac, int, to_f64, Rational};
use pointgame::points::{Config2D, Direction, MoveSpec, PointFn1D, Pt};
use rand::Rng;

/// Looks for `λ` on a log grid over `[1e-6, 1e6]` where `Σ −d(z)/(λ+z)` is clearly negative,
/// or a conservation failure. `true` means the function is refuted.
pub fn sample_refutes(d: &PointFn1D, samples: usize) -> bool {
    let pts: Vec<(f64, f64)> = d.iter().map(|(z, w)| (to_f64(z), to_f64(w))).collect();
    if !d.total().is_zero() {
        return true;
    }
    (0..samples).any(|k| {
        let lambda = 10f64.powf(-6.0 + 12.0 * k as f64 / (samples - 1) as f64);
        let (mut s, mut scale) = (0.0, 0.0);
        for &(z, w) in &pts {
            s -= w / (lambda + z);
            scale += w.abs() / (lambda + z);
        }
        s < -1e-9 * scale
    })
}

pub fn small_rational<R: Rng>(rng: &mut R, max_num: i64, den: i64) -> Rational {
    frac(rng.random_range(1..=max_num), den)
}

/// A configuration with 1–4 points on a few lines.
pub fn random_config<R: Rng>(rng: &mut R) -> Config2D {
    let mut c = Config2D::new();
    for _ in 0..rng.random_range(1..=4) {
        c.add(frac(rng.random_range(0..=8), 4), frac(rng.random_range(0..=8), 4), small_rational(rng, 6, 6));
    }
    c
}

/// A random basic move (raise, merge with optional raise, split with optional raise) that
/// applies to `c`, with its direction.
pub fn random_move<R: Rng>(rng: &mut R, c: &Config2D) -> (MoveSpec, Direction) {
    let dir = if rng.random_bool(0.5) { Direction::Horizontal } else { Direction::Vertical };
    let pts: Vec<_> = c.iter().map(|(p, w)| (p.clone(), w.clone())).collect();
    let (p, w) = pts[rng.random_range(0..pts.len())].clone();
    let (line, z) = (p.across(dir).clone(), p.along(dir).clone());
    let lines = c.lines(dir);
    let on_line: Vec<(Rational, Rational)> = lines[&line].iter().map(|(a, b)| (a.clone(), b.clone())).collect();
    let part = &w * frac(rng.random_range(1..=4), 4);
    match rng.random_range(0..3) {
        0 => {
            let to = &z + frac(rng.random_range(0..=6), 3);
            (MoveSpec::raise(dir, line, z, to, part), dir)
        }
        1 if on_line.len() >= 2 => {
            let (z2, w2) = on_line.iter().find(|(a, _)| a != &z).unwrap().clone();
            let p2 = &w2 * frac(rng.random_range(1..=4), 4);
            (MoveSpec::merge(dir, line, (z, part), (z2, p2)), dir)
        }
        _ if z.is_positive() => {
            // z1 < z < z2 with p1/z1 + p2/z2 = part/z
            let z1 = &z * frac(rng.random_range(1..=3), 4);
            let z2 = &z * frac(rng.random_range(5..=12), 4);
            let p1 = &part * (z.recip() - z2.recip()) / (z1.recip() - z2.recip());
            let p2 = &part - &p1;
            (MoveSpec::split(dir, line, z, (z1, p1), (z2, p2)), dir)
        }
        _ => {
            let to = &z + int(1);
            (MoveSpec::raise(dir, line, z, to, part), dir)
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Mutation {
    WeightDecrease,
    Lower,
    BrokenConservation,
}

/// An invalid transition derived from the valid move `p → q` along `dir`. Lowering moves part
/// of a point of `p` to a smaller coordinate (the mean strictly drops); it switches direction
/// when every point sits at 0 along `dir`. Returns the target and the direction to check.
pub fn mutate<R: Rng>(rng: &mut R, p: &Config2D, q: &Config2D, dir: Direction, m: Mutation) -> (Config2D, Direction) {
    let pick = |c: &Config2D, rng: &mut R| {
        let pts: Vec<_> = c.iter().map(|(p, w)| (p.clone(), w.clone())).collect();
        pts[rng.random_range(0..pts.len())].clone()
    };
    match m {
        Mutation::WeightDecrease => {
            let (pt, w) = pick(q, rng);
            let mut out = q.clone();
            out.add_at(pt, -(&w * frac(1, 2)));
            (out, dir)
        }
        Mutation::BrokenConservation => {
            let (pt, _) = pick(q, rng);
            let mut out = q.clone();
            out.add_at(pt, small_rational(rng, 3, 7));
            (out, dir)
        }
        Mutation::Lower => {
            for d in [dir, dir.other()] {
                let movable: Vec<_> = p.iter().filter(|(pt, _)| pt.along(d).is_positive()).map(|(pt, w)| (pt.clone(), w.clone())).collect();
                if movable.is_empty() {
                    continue;
                }
                let (pt, w) = movable[rng.random_range(0..movable.len())].clone();
                let part = &w * frac(rng.random_range(1..=4), 4);
                let lower = pt.along(d) * frac(rng.random_range(0..=3), 4);
                let mut out = p.clone();
                out.add_at(pt.clone(), -part.clone());
                out.add_at(Pt::on_line(d, pt.across(d).clone(), lower), part);
                return (out, d);
            }
            // everything at the origin: nothing can move down
            let (pt, w) = pick(p, rng);
            let mut out = p.clone();
            out.add_at(pt, -(&w * frac(1, 2)));
            (out, dir)
        }
    }
}
