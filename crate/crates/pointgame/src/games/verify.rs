use super::{bias_of, check_split, coin_flip_start, final_point_of, Frame, Tdpg, Tipg};
use crate::exactmath::{format_rational, Rational};
use crate::points::{check_transition_2d, check_valid_fn_2d, Config2D, Direction, PointFn2D, TransitionKind};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub at: String,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.at, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameReport {
    pub accepted: bool,
    #[serde(serialize_with = "ser_point")]
    pub final_point: Option<(Rational, Rational)>,
    #[serde(serialize_with = "ser_opt")]
    pub bias: Option<Rational>,
    /// Transition counts (horizontal, vertical, identity or both).
    pub transitions: TransitionCounts,
    pub failures: Vec<Failure>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TransitionCounts {
    pub horizontal: u128,
    pub vertical: u128,
    pub both: u128,
}

fn ser_point<S: serde::Serializer>(p: &Option<(Rational, Rational)>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some((b, a)) => [format_rational(b), format_rational(a)].serialize(s),
        None => s.serialize_none(),
    }
}

fn ser_opt<S: serde::Serializer>(p: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

impl GameReport {
    fn finish(final_point: Option<(Rational, Rational)>, transitions: TransitionCounts, failures: Vec<Failure>) -> Self {
        let bias = final_point.as_ref().map(|(b, a)| bias_of(b, a));
        GameReport { accepted: failures.is_empty() && final_point.is_some(), final_point, bias, transitions, failures }
    }

    pub fn final_point_string(&self) -> Option<String> {
        self.final_point.as_ref().map(|(b, a)| format!("[{},{}]", format_rational(b), format_rational(a)))
    }
}

impl fmt::Display for GameReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "accepted: {}", self.accepted)?;
        if let Some(p) = self.final_point_string() {
            writeln!(f, "final point: {p}")?;
        }
        if let Some(b) = &self.bias {
            writeln!(f, "bias: {} (~{:.6})", format_rational(b), crate::exactmath::to_f64(b))?;
        }
        for x in &self.failures {
            writeln!(f, "failure: {x}")?;
        }
        Ok(())
    }
}

fn first_failures(d: &PointFn2D) -> String {
    let zero = Rational::zero();
    let h = check_valid_fn_2d(d, Direction::Horizontal, &zero, false);
    let v = check_valid_fn_2d(d, Direction::Vertical, &zero, false);
    let show = |r: &crate::points::LineReport| r.failures.first().map(|x| format!("{} {x}", r.direction)).unwrap_or_default();
    format!("neither horizontal ({}) nor vertical ({})", show(&h), show(&v))
}

fn negative_point(c: &Config2D) -> Option<String> {
    c.iter().find(|(_, w)| *w < &Rational::zero()).map(|(p, w)| format!("negative weight {} at {p}", format_rational(w)))
}

/// Checks the boundary frames and every transition of a TDPG.
pub fn verify_tdpg(g: &Tdpg) -> GameReport {
    let mut failures = vec![];
    let mut counts = TransitionCounts::default();
    if let Err(e) = check_split(&g.pa, &g.pb) {
        failures.push(Failure { at: "header".into(), detail: e.to_string() });
    }
    let start = g.start.clone().unwrap_or_else(|| coin_flip_start(&g.pa, &g.pb));
    let first = match g.frames.first() {
        Some(Frame::Explicit(c)) => c.clone(),
        _ => {
            failures.push(Failure { at: "frame 0".into(), detail: "the first frame must be explicit".into() });
            return GameReport::finish(None, counts, failures);
        }
    };
    if first != start {
        failures.push(Failure { at: "frame 0".into(), detail: format!("expected start {start}, found {first}") });
    }

    // Explicit-to-explicit transitions are independent; check them in parallel.
    let mut pairs: Vec<(u128, Config2D, Config2D)> = vec![];
    let mut cur = first;
    let mut index: u128 = 0;
    for f in &g.frames[1..] {
        match f {
            Frame::Explicit(c) => {
                pairs.push((index, cur.clone(), c.clone()));
                cur = c.clone();
                index += 1;
            }
            Frame::Repeat { repeat, steps } => {
                let n = *repeat as u128;
                if n == 0 || steps.is_empty() {
                    continue;
                }
                let mut partial = PointFn2D::new();
                let mut partials = vec![];
                for (j, s) in steps.iter().enumerate() {
                    let at = format!("transition {} (repeat block step {j}, {} times)", index + j as u128, n);
                    let r = check_valid_fn_2d(&s.delta, s.direction, &Rational::zero(), false);
                    if !r.valid {
                        failures.push(Failure { at, detail: format!("not {}: {}", s.direction, r.failures[0]) });
                    } else if s.delta.is_empty() {
                        counts.both += n;
                    } else if s.direction == Direction::Horizontal {
                        counts.horizontal += n;
                    } else {
                        counts.vertical += n;
                    }
                    partial.add_fn(&s.delta);
                    partials.push(partial.clone());
                }
                // Weights are affine in the repetition index, so the first and last pass suffice.
                for k in [0, n - 1] {
                    let base = cur.plus(&partial.scale(&Rational::from_integer(k.into())));
                    for (j, p) in partials.iter().enumerate() {
                        if let Some(neg) = negative_point(&base.plus(p)) {
                            let t = index + k * steps.len() as u128 + j as u128;
                            failures.push(Failure { at: format!("frame {}", t + 1), detail: neg });
                        }
                    }
                }
                cur.add_scaled(&partial, &Rational::from_integer(n.into()));
                index += n * steps.len() as u128;
            }
        }
    }
    let results: Vec<_> = pairs
        .par_iter()
        .map(|(i, p, q)| {
            let mut fs = vec![];
            if let Some(neg) = negative_point(q) {
                fs.push(Failure { at: format!("frame {}", i + 1), detail: neg });
            }
            let r = check_transition_2d(p, q);
            if r.kind == TransitionKind::Neither {
                fs.push(Failure { at: format!("transition {i} (frame {i} -> {})", i + 1), detail: first_failures(&q.minus(p)) });
            }
            (r.kind, fs)
        })
        .collect();
    for (kind, fs) in results {
        match kind {
            TransitionKind::Horizontal => counts.horizontal += 1,
            TransitionKind::Vertical => counts.vertical += 1,
            TransitionKind::Both => counts.both += 1,
            TransitionKind::Neither => {}
        }
        failures.extend(fs);
    }
    failures.sort_by_key(|f| sort_key(&f.at));

    let final_point = final_point_of(&cur);
    if final_point.is_none() {
        failures.push(Failure { at: format!("frame {index}"), detail: format!("last frame is not a single point of weight 1: {cur}") });
    }
    GameReport::finish(final_point, counts, failures)
}

fn sort_key(at: &str) -> (u128, String) {
    let n = at.split(|c: char| !c.is_ascii_digit()).find(|s| !s.is_empty()).and_then(|s| s.parse().ok()).unwrap_or(0);
    (n, at.to_string())
}

/// Checks `h` horizontally valid, `v` vertically valid and the sum identity.
pub fn verify_tipg(t: &Tipg) -> GameReport {
    let mut failures = vec![];
    if let Err(e) = check_split(&t.pa, &t.pb) {
        failures.push(Failure { at: "header".into(), detail: e.to_string() });
    }
    let zero = Rational::zero();
    let (h, v) = rayon::join(
        || check_valid_fn_2d(&t.h, Direction::Horizontal, &zero, false),
        || check_valid_fn_2d(&t.v, Direction::Vertical, &zero, false),
    );
    for f in h.failures {
        failures.push(Failure { at: format!("h line y={}", format_rational(&f.line)), detail: f.reason });
    }
    for f in v.failures {
        failures.push(Failure { at: format!("v line x={}", format_rational(&f.line)), detail: f.reason });
    }
    let s = t.h.plus(&t.v).plus(&coin_flip_start(&t.pa, &t.pb));
    let final_point = final_point_of(&s);
    if final_point.is_none() {
        failures.push(Failure { at: "sum".into(), detail: format!("h + v + P_B[1,0] + P_A[0,1] is not a single point of weight 1: {s}") });
    }
    let counts = TransitionCounts { horizontal: u128::from(!t.h.is_empty()), vertical: u128::from(!t.v.is_empty()), both: 0 };
    GameReport::finish(final_point, counts, failures)
}
