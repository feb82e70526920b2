use super::{verify_tdpg, Failure, Tdpg};
use crate::error::{precondition, rejected, Result};
use crate::exactmath::{format_rational, int, Rational};
use crate::points::{check_transition_2d, check_valid_fn_2d, Config2D, Direction};
use num_traits::{Signed, Zero};

/// Largest game `strictify_tdpg` will unroll.
pub const MAX_EXPLICIT_FRAMES: usize = 200_000;

/// Direction of transition `i` in an alternating game (vertical first).
pub fn alternating_direction(i: usize) -> Direction {
    if i % 2 == 0 {
        Direction::Vertical
    } else {
        Direction::Horizontal
    }
}

/// Inserts identity frames so transitions alternate vertical, horizontal, ... and end horizontal.
pub fn normalize_alternation(g: &Tdpg) -> Result<Tdpg> {
    let g = g.expand(MAX_EXPLICIT_FRAMES)?;
    let frames: Vec<Config2D> = g.explicit_frames()?.into_iter().cloned().collect();
    let mut out = vec![frames[0].clone()];
    let mut expected = Direction::Vertical;
    for (i, q) in frames.iter().enumerate().skip(1) {
        let p = out.last().unwrap().clone();
        let kind = check_transition_2d(&p, q).kind;
        if !kind.allows(expected) {
            if !kind.allows(expected.other()) {
                return rejected(format!("transition {} is neither horizontal nor vertical", i - 1));
            }
            out.push(p);
            expected = expected.other();
        }
        out.push(q.clone());
        expected = expected.other();
    }
    if expected == Direction::Horizontal {
        out.push(out.last().unwrap().clone());
    }
    Ok(Tdpg::new(g.pa.clone(), g.pb.clone(), out).with_start(g.start))
}

impl Tdpg {
    pub fn with_start(mut self, start: Option<Config2D>) -> Self {
        self.start = start;
        self
    }
}

/// Checks that an explicit alternating game has every non-trivial line transition strictly valid.
pub fn strict_failures(g: &Tdpg) -> Result<Vec<Failure>> {
    let frames = g.explicit_frames()?;
    let mut out = vec![];
    for (i, w) in frames.windows(2).enumerate() {
        let dir = alternating_direction(i);
        let d = w[1].minus(w[0]);
        let r = check_valid_fn_2d(&d, dir, &Rational::zero(), true);
        for f in r.failures {
            out.push(Failure { at: format!("transition {i} ({dir})"), detail: f.to_string() });
        }
    }
    Ok(out)
}

/// Shifts frame `i` by `(⌊i/2⌋ε/n, ⌈i/2⌉ε/n)` after normalizing alternation.
pub fn strictify_tdpg(g: &Tdpg, eps: &Rational) -> Result<Tdpg> {
    if !eps.is_positive() {
        return precondition("ε must be positive");
    }
    let rep = verify_tdpg(g);
    if !rep.accepted {
        return rejected(format!("input TDPG rejected: {}", rep.failures.first().map(|f| f.to_string()).unwrap_or_default()));
    }
    let norm = normalize_alternation(g)?;
    let frames = norm.explicit_frames()?;
    let n = frames.len() - 1;
    if n == 0 {
        return Ok(norm);
    }
    let step = eps / int(n as i64);
    let shifted: Vec<Config2D> = frames
        .iter()
        .enumerate()
        .map(|(i, f)| f.shifted(&(&step * int((i / 2) as i64)), &(&step * int(i.div_ceil(2) as i64))))
        .collect();
    let out = Tdpg::new(g.pa.clone(), g.pb.clone(), shifted).with_start(g.start.clone());
    let fails = strict_failures(&out)?;
    if let Some(f) = fails.first() {
        return rejected(format!("strictified game not strict at {f} (ε = {})", format_rational(eps)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::frac;
    use crate::games::{alice_announces, bob_announces, spekkens_rudolph};

    #[test]
    fn trivial_strictified() {
        let g = strictify_tdpg(&alice_announces(), &frac(1, 10)).unwrap();
        let r = verify_tdpg(&g);
        assert!(r.accepted);
        assert_eq!(r.final_point, Some((frac(1, 2) + frac(1, 20), int(1) + frac(1, 20))));
        assert!(strict_failures(&g).unwrap().is_empty());
        assert!(!strict_failures(&normalize_alternation(&alice_announces()).unwrap()).unwrap().is_empty());
    }

    #[test]
    fn bob_needs_padding() {
        let n = normalize_alternation(&bob_announces()).unwrap();
        assert_eq!(n.frames.len(), 5);
        let g = strictify_tdpg(&bob_announces(), &frac(1, 10)).unwrap();
        let r = verify_tdpg(&g);
        assert_eq!(r.final_point, Some((int(1) + frac(1, 20), frac(1, 2) + frac(1, 20))));
    }

    #[test]
    fn strict_twice() {
        let g = strictify_tdpg(&spekkens_rudolph(&frac(3, 4)).unwrap(), &frac(1, 100)).unwrap();
        let g2 = strictify_tdpg(&g, &frac(1, 100)).unwrap();
        assert!(verify_tdpg(&g2).accepted);
        assert!(strictify_tdpg(&g, &int(0)).is_err());
    }
}
