use super::{coin_flip_start, verify_tdpg, verify_tipg, Frame, Step, Tdpg, Tipg};
use crate::error::{precondition, rejected, Result};
use crate::exactmath::{int, Rational};
use crate::points::{check_transition_2d, Config2D, Direction, PointFn2D, TransitionKind};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Sums horizontal differences into `h` and vertical ones into `v`; transitions valid
/// both ways go to `h`.
pub fn tdpg_to_tipg(g: &Tdpg) -> Result<Tipg> {
    let rep = verify_tdpg(g);
    if !rep.accepted {
        return rejected(format!("input TDPG rejected: {}", rep.failures.first().map(|f| f.to_string()).unwrap_or_default()));
    }
    let mut h = PointFn2D::new();
    let mut v = PointFn2D::new();
    let mut cur: Option<Config2D> = None;
    for f in &g.frames {
        match f {
            Frame::Explicit(c) => {
                if let Some(p) = &cur {
                    let d = c.minus(p);
                    if !d.is_empty() {
                        match check_transition_2d(p, c).kind {
                            TransitionKind::Vertical => v.add_fn(&d),
                            _ => h.add_fn(&d),
                        }
                    }
                }
                cur = Some(c.clone());
            }
            Frame::Repeat { repeat, steps } => {
                let n = Rational::from_integer((*repeat).into());
                let c = cur.as_mut().expect("verified game starts explicit");
                for s in steps {
                    match s.direction {
                        Direction::Horizontal => h.add_scaled(&s.delta, &n),
                        Direction::Vertical => v.add_scaled(&s.delta, &n),
                    }
                    c.add_scaled(&s.delta, &n);
                }
            }
        }
    }
    Ok(Tipg { pa: g.pa.clone(), pb: g.pb.clone(), h, v })
}

/// Deltas creating the catalyst `r` from `c·p0`, plus `c`.
struct Creation {
    vertical: PointFn2D,
    horizontal: PointFn2D,
    c: Rational,
}

fn creation(r: &PointFn2D, pa: &Rational, pb: &Rational) -> Result<Creation> {
    let one = Rational::one();
    let two = int(2);
    let mut cv = PointFn2D::new();
    let mut ch = PointFn2D::new();
    let mut c = Rational::zero();
    for (pt, q) in r.iter() {
        let (x, y) = (&pt.x, &pt.y);
        if x.is_positive() {
            let m = if *x >= one { q.clone() } else { &two * q / x };
            c += &m / pb;
            cv.add(one.clone(), int(0), -&m);
            cv.add(one.clone(), y.clone(), m.clone());
            ch.add(one.clone(), y.clone(), -&m);
            ch.add(x.clone(), y.clone(), q.clone());
            if *x < one {
                ch.add(&two - x, y.clone(), &m - q);
            }
        } else if y.is_positive() {
            let m = if *y >= one { q.clone() } else { &two * q / y };
            c += &m / pa;
            cv.add(int(0), one.clone(), -&m);
            cv.add(int(0), y.clone(), q.clone());
            if *y < one {
                cv.add(int(0), &two - y, &m - q);
            }
        } else {
            return precondition("catalyst has weight at the origin");
        }
    }
    Ok(Creation { vertical: cv, horizontal: ch, c })
}

fn push_delta(frames: &mut Vec<Frame>, cur: &mut Config2D, d: &PointFn2D) {
    if !d.is_empty() {
        cur.add_fn(d);
        frames.push(Frame::Explicit(cur.clone()));
    }
}

/// Builds a TDPG ending within `ε` of the TIPG's final point, using a catalyst `r = v⁻`.
///
/// The equal scaled repetitions of the catalysed step are stored as one repeat block.
pub fn tipg_to_tdpg(t: &Tipg, eps: &Rational) -> Result<Tdpg> {
    if !eps.is_positive() {
        return precondition("ε must be positive");
    }
    let rep = verify_tipg(t);
    let Some((beta, alpha)) = rep.final_point.clone().filter(|_| rep.accepted) else {
        return rejected(format!("input TIPG rejected: {}", rep.failures.first().map(|f| f.to_string()).unwrap_or_default()));
    };
    let zero = Rational::zero();
    if !t.h.get(&zero, &zero).is_zero() || !t.v.get(&zero, &zero).is_zero() {
        return precondition("h and v must vanish at the origin");
    }
    let p0 = coin_flip_start(&t.pa, &t.pb);
    let mut cur = p0.clone();
    let mut frames = vec![Frame::Explicit(p0.clone())];
    let r = t.v.negative_part();
    if r.is_empty() {
        push_delta(&mut frames, &mut cur, &t.v);
        push_delta(&mut frames, &mut cur, &t.h);
        return finish(t, frames);
    }
    if !t.pa.is_positive() || !t.pb.is_positive() {
        return precondition("catalyst construction needs P_A, P_B > 0");
    }
    let cr = creation(&r, &t.pa, &t.pb)?;

    // After creation the frame is (1−δ)p0 + s·junk.
    let junk = cr.vertical.plus(&cr.horizontal).plus(&p0.scale(&cr.c));
    let mut x2 = junk.xs().into_iter().max().unwrap_or_default();
    let mut y2 = junk.ys().into_iter().max().unwrap_or_default();
    if x2 <= &beta + eps {
        x2 = &beta + eps * int(2);
    }
    if y2 <= &alpha + eps {
        y2 = &alpha + eps * int(2);
    }
    let delta1 = eps / (&y2 - &alpha);
    let delta = &delta1 * eps / (&x2 - &beta);
    let s = &delta / &cr.c;

    push_delta(&mut frames, &mut cur, &cr.vertical.scale(&s));
    push_delta(&mut frames, &mut cur, &cr.horizontal.scale(&s));

    let budget = Rational::one() - &delta;
    let full = (&budget / &s).floor();
    let rest = &budget - &full * &s;
    let Some(times) = full.to_integer().to_u64() else {
        return precondition("repetition count does not fit in 64 bits");
    };
    if times > 0 {
        let steps = vec![
            Step { direction: Direction::Vertical, delta: t.v.scale(&s) },
            Step { direction: Direction::Horizontal, delta: t.h.scale(&s) },
        ];
        frames.push(Frame::Repeat { repeat: times, steps });
        cur.add_scaled(&t.v.plus(&t.h), &(&full * &s));
    }
    if rest.is_positive() {
        push_delta(&mut frames, &mut cur, &t.v.scale(&rest));
        push_delta(&mut frames, &mut cur, &t.h.scale(&rest));
    }

    // Cleanup: raise the junk to [x'', y''], then raise-merge-merge into [β+ε, α+ε].
    let junk = junk.scale(&s);
    let mut up = PointFn2D::new();
    let mut right = PointFn2D::new();
    for (p, w) in junk.iter() {
        up.add(p.x.clone(), p.y.clone(), -w);
        up.add(p.x.clone(), y2.clone(), w.clone());
        right.add(p.x.clone(), y2.clone(), -w);
        right.add(x2.clone(), y2.clone(), w.clone());
    }
    push_delta(&mut frames, &mut cur, &up);
    push_delta(&mut frames, &mut cur, &right);
    let mut d = PointFn2D::new();
    d.add(beta.clone(), alpha.clone(), -(&delta1 - &delta));
    d.add(beta.clone(), y2.clone(), &delta1 - &delta);
    push_delta(&mut frames, &mut cur, &d);
    let b1 = &beta + eps;
    let mut d = PointFn2D::new();
    d.add(beta.clone(), y2.clone(), -(&delta1 - &delta));
    d.add(x2.clone(), y2.clone(), -&delta);
    d.add(b1.clone(), y2.clone(), delta1.clone());
    d.add(beta.clone(), alpha.clone(), -(Rational::one() - &delta1));
    d.add(b1.clone(), alpha.clone(), Rational::one() - &delta1);
    push_delta(&mut frames, &mut cur, &d);
    let d = Config2D::point(b1.clone(), &alpha + eps, int(1)).minus(&cur);
    push_delta(&mut frames, &mut cur, &d);
    finish(t, frames)
}

fn finish(t: &Tipg, frames: Vec<Frame>) -> Result<Tdpg> {
    let g = Tdpg { pa: t.pa.clone(), pb: t.pb.clone(), start: None, frames };
    let rep = verify_tdpg(&g);
    if !rep.accepted {
        return rejected(format!("constructed TDPG failed verification: {}", rep.failures[0]));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::frac;
    use crate::games::{alice_announces, spekkens_rudolph, Frame};

    #[test]
    fn trivial_tdpg_to_tipg() {
        let t = tdpg_to_tipg(&alice_announces()).unwrap();
        let v = Config2D::from_points([(int(1), int(0), frac(-1, 2)), (int(1), int(1), frac(1, 2))]).unwrap();
        let h = Config2D::from_points([(int(1), int(1), frac(-1, 2)), (int(0), int(1), frac(-1, 2)), (frac(1, 2), int(1), int(1))]).unwrap();
        assert_eq!(t.v, v);
        assert_eq!(t.h, h);
        assert!(verify_tipg(&t).accepted);
    }

    #[test]
    fn identity_padding_is_dropped() {
        let g = alice_announces();
        let mut padded = g.clone();
        let f1 = padded.frames[1].clone();
        padded.frames.insert(1, f1);
        padded.frames.insert(0, padded.frames[0].clone());
        assert_eq!(tdpg_to_tipg(&padded).unwrap(), tdpg_to_tipg(&g).unwrap());
    }

    #[test]
    fn round_trip_trivial_with_catalyst() {
        let t = tdpg_to_tipg(&alice_announces()).unwrap();
        for eps in [frac(1, 10), frac(1, 100)] {
            let g = tipg_to_tdpg(&t, &eps).unwrap();
            let r = verify_tdpg(&g);
            assert!(r.accepted, "{r}");
            let (b, a) = r.final_point.unwrap();
            assert!(b <= frac(1, 2) + &eps && a <= int(1) + &eps);
            assert!(g.frames.iter().any(|f| matches!(f, Frame::Repeat { .. })));
        }
    }

    #[test]
    fn spekkens_rudolph_round_trip() {
        let t = tdpg_to_tipg(&spekkens_rudolph(&frac(3, 4)).unwrap()).unwrap();
        let r = verify_tipg(&t);
        assert_eq!(r.final_point, Some((frac(3, 4), frac(2, 3))));
        let g = tipg_to_tdpg(&t, &frac(1, 10)).unwrap();
        let r = verify_tdpg(&g);
        assert!(r.accepted, "{r}");
        let back = tdpg_to_tipg(&g).unwrap();
        assert!(verify_tipg(&back).accepted);
    }

    #[test]
    fn no_negative_vertical_part_gives_direct_game() {
        let t = Tipg {
            pa: int(1),
            pb: int(0),
            h: Config2D::from_points([(int(0), int(1), int(-1)), (int(1), int(1), int(1))]).unwrap(),
            v: PointFn2D::new(),
        };
        let g = tipg_to_tdpg(&t, &frac(1, 10)).unwrap();
        assert_eq!(g.frames.len(), 2);
        assert_eq!(verify_tdpg(&g).final_point, Some((int(1), int(1))));
    }

    #[test]
    fn catalyst_needs_both_sides() {
        let t = Tipg {
            pa: int(1),
            pb: int(0),
            h: Config2D::from_points([(int(0), int(2), int(-1)), (int(1), int(2), int(1))]).unwrap(),
            v: Config2D::from_points([(int(0), int(1), int(-1)), (int(0), int(2), int(1))]).unwrap(),
        };
        assert!(verify_tipg(&t).accepted);
        assert!(matches!(tipg_to_tdpg(&t, &frac(1, 10)), Err(crate::Error::Precondition(_))));
    }

    #[test]
    fn zero_split_side_needs_direct_path() {
        let t = Tipg { pa: int(1), pb: int(0), h: PointFn2D::new(), v: PointFn2D::new() };
        let g = tipg_to_tdpg(&t, &frac(1, 10)).unwrap();
        assert_eq!(g.frames.len(), 1);
        assert!(tipg_to_tdpg(&t, &int(0)).is_err());
    }
}
