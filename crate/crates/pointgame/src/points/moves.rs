use super::{Config2D, Direction, Pt};
use crate::error::{input, precondition, Result};
use crate::exactmath::{format_rational as fr, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// One of the three basic moves, acting along a single line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MoveKind {
    /// `w[from] → w[to]`, `from ≤ to`.
    Raise {
        #[serde(with = "crate::exactmath::serde_rational")]
        from: Rational,
        #[serde(with = "crate::exactmath::serde_rational")]
        to: Rational,
        #[serde(with = "crate::exactmath::serde_rational")]
        weight: Rational,
    },
    /// `p₁[z₁] + p₂[z₂] → (p₁+p₂)[target]` with the exact mean as target.
    Merge {
        #[serde(with = "crate::exactmath::serde_rational")]
        z1: Rational,
        #[serde(with = "crate::exactmath::serde_rational")]
        p1: Rational,
        #[serde(with = "crate::exactmath::serde_rational")]
        z2: Rational,
        #[serde(with = "crate::exactmath::serde_rational")]
        p2: Rational,
        #[serde(with = "crate::exactmath::serde_rational")]
        target: Rational,
    },
    /// `(p₁+p₂)[from] → p₁[z1] + p₂[z2]` conserving `Σp` and `Σp/z`.
    Split {
        #[serde(with = "crate::exactmath::serde_rational")]
        from: Rational,
        #[serde(with = "crate::exactmath::serde_rational")]
        z1: Rational,
        #[serde(with = "crate::exactmath::serde_rational")]
        p1: Rational,
        #[serde(with = "crate::exactmath::serde_rational")]
        z2: Rational,
        #[serde(with = "crate::exactmath::serde_rational")]
        p2: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveSpec {
    pub direction: Direction,
    /// The coordinate held fixed.
    #[serde(with = "crate::exactmath::serde_rational")]
    pub line: Rational,
    #[serde(flatten)]
    pub kind: MoveKind,
}

impl MoveSpec {
    pub fn raise(direction: Direction, line: Rational, from: Rational, to: Rational, weight: Rational) -> Self {
        MoveSpec { direction, line, kind: MoveKind::Raise { from, to, weight } }
    }

    /// Merge whose target is the exact weighted mean.
    pub fn merge(direction: Direction, line: Rational, (z1, p1): (Rational, Rational), (z2, p2): (Rational, Rational)) -> Self {
        let target = (&z1 * &p1 + &z2 * &p2) / (&p1 + &p2);
        MoveSpec { direction, line, kind: MoveKind::Merge { z1, p1, z2, p2, target } }
    }

    pub fn split(direction: Direction, line: Rational, from: Rational, (z1, p1): (Rational, Rational), (z2, p2): (Rational, Rational)) -> Self {
        MoveSpec { direction, line, kind: MoveKind::Split { from, z1, p1, z2, p2 } }
    }
}

fn take(c: &mut Config2D, p: Pt, w: &Rational) -> Result<()> {
    if !w.is_positive() {
        return precondition(format!("move weight must be positive, got {}", fr(w)));
    }
    let have = c.get_at(&p);
    if &have < w {
        return precondition(format!("insufficient weight at {p}: have {}, need {}", fr(&have), fr(w)));
    }
    c.add_at(p, -w);
    Ok(())
}

/// Applies a basic move, checking its defining equations exactly.
pub fn apply_move(c: &Config2D, m: &MoveSpec) -> Result<Config2D> {
    let at = |z: &Rational| Pt::on_line(m.direction, m.line.clone(), z.clone());
    let mut out = c.clone();
    match &m.kind {
        MoveKind::Raise { from, to, weight } => {
            if to < from {
                return input(format!("raise must not lower: {} → {}", fr(from), fr(to)));
            }
            take(&mut out, at(from), weight)?;
            out.add_at(at(to), weight.clone());
        }
        MoveKind::Merge { z1, p1, z2, p2, target } => {
            if z1 == z2 {
                return input("merge needs two distinct points");
            }
            let mean = (z1 * p1 + z2 * p2) / (p1 + p2);
            if &mean != target {
                return input(format!("merge target {} is not the weighted mean {}", fr(target), fr(&mean)));
            }
            take(&mut out, at(z1), p1)?;
            take(&mut out, at(z2), p2)?;
            out.add_at(at(target), p1 + p2);
        }
        MoveKind::Split { from, z1, p1, z2, p2 } => {
            if from.is_zero() {
                if !(z1.is_zero() && z2.is_zero()) {
                    return input("a point at 0 may only split into points at 0");
                }
            } else {
                if z1.is_zero() || z2.is_zero() {
                    return input("split target at 0 from a nonzero point");
                }
                let before = (p1 + p2) / from;
                let after = p1 / z1 + p2 / z2;
                if before != after {
                    return input(format!("split does not conserve Σp/z: {} vs {}", fr(&before), fr(&after)));
                }
            }
            take(&mut out, at(from), &(p1 + p2))?;
            out.add_at(at(z1), p1.clone());
            out.add_at(at(z2), p2.clone());
        }
    }
    Ok(out)
}
