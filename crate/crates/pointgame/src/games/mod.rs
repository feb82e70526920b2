//! Time-dependent and time-independent point games, their verifiers and conversions.

mod convert;
mod examples;
mod strictify;
mod verify;

pub use convert::{tdpg_to_tipg, tipg_to_tdpg};
pub use examples::{alice_announces, bob_announces, spekkens_rudolph};
pub use strictify::{alternating_direction, normalize_alternation, strict_failures, strictify_tdpg, MAX_EXPLICIT_FRAMES};
pub use verify::{verify_tdpg, verify_tipg, Failure, GameReport};

use crate::error::{input, Result};
use crate::exactmath::{int, Rational};
use crate::points::{Config2D, Direction, PointFn2D};
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

/// One increment inside a repeated block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub direction: Direction,
    pub delta: PointFn2D,
}

/// A TDPG entry: an explicit frame, or a block of increments applied repeatedly
/// to the previous frame (each increment yields one frame).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Frame {
    Explicit(Config2D),
    Repeat { repeat: u64, steps: Vec<Step> },
}

/// Time-dependent point game, frames in reverse time (frame 0 is the start).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tdpg {
    pub pa: Rational,
    pub pb: Rational,
    /// Custom multi-outcome start `Σ qᵢ[bᵢ,aᵢ]`; `None` means `P_B[1,0] + P_A[0,1]`.
    pub start: Option<Config2D>,
    pub frames: Vec<Frame>,
}

/// Time-independent point game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tipg {
    pub pa: Rational,
    pub pb: Rational,
    pub h: PointFn2D,
    pub v: PointFn2D,
}

/// `P_B[1,0] + P_A[0,1]`
pub fn coin_flip_start(pa: &Rational, pb: &Rational) -> Config2D {
    let mut c = Config2D::new();
    c.add(int(1), int(0), pb.clone());
    c.add(int(0), int(1), pa.clone());
    c
}

impl Tdpg {
    pub fn new(pa: Rational, pb: Rational, frames: Vec<Config2D>) -> Self {
        Tdpg { pa, pb, start: None, frames: frames.into_iter().map(Frame::Explicit).collect() }
    }

    pub fn expected_start(&self) -> Config2D {
        self.start.clone().unwrap_or_else(|| coin_flip_start(&self.pa, &self.pb))
    }

    /// Number of frames after unrolling repeats (saturating).
    pub fn logical_len(&self) -> u128 {
        self.frames
            .iter()
            .map(|f| match f {
                Frame::Explicit(_) => 1u128,
                Frame::Repeat { repeat, steps } => *repeat as u128 * steps.len() as u128,
            })
            .sum()
    }

    pub fn is_explicit(&self) -> bool {
        self.frames.iter().all(|f| matches!(f, Frame::Explicit(_)))
    }

    /// Unrolls repeat blocks, refusing beyond `max_frames`.
    pub fn expand(&self, max_frames: usize) -> Result<Tdpg> {
        if self.logical_len() > max_frames as u128 {
            return input(format!("game has {} frames, more than the limit {max_frames}", self.logical_len()));
        }
        let mut out: Vec<Config2D> = vec![];
        for f in &self.frames {
            match f {
                Frame::Explicit(c) => out.push(c.clone()),
                Frame::Repeat { repeat, steps } => {
                    let Some(mut cur) = out.last().cloned() else {
                        return input("repeat block before the first frame");
                    };
                    for _ in 0..*repeat {
                        for s in steps {
                            cur.add_fn(&s.delta);
                            out.push(cur.clone());
                        }
                    }
                }
            }
        }
        Ok(Tdpg { pa: self.pa.clone(), pb: self.pb.clone(), start: self.start.clone(), frames: out.into_iter().map(Frame::Explicit).collect() })
    }

    /// Explicit frames; errors if the game holds repeat blocks.
    pub fn explicit_frames(&self) -> Result<Vec<&Config2D>> {
        self.frames
            .iter()
            .map(|f| match f {
                Frame::Explicit(c) => Ok(c),
                Frame::Repeat { .. } => input("game contains repeat blocks; expand it first"),
            })
            .collect()
    }

    /// The configuration reached at the end.
    pub fn last_config(&self) -> Option<Config2D> {
        let mut cur: Option<Config2D> = None;
        for f in &self.frames {
            match f {
                Frame::Explicit(c) => cur = Some(c.clone()),
                Frame::Repeat { repeat, steps } => {
                    let c = cur.as_mut()?;
                    let total = steps.iter().fold(PointFn2D::new(), |a, s| a.plus(&s.delta));
                    c.add_scaled(&total, &Rational::from_integer((*repeat).into()));
                }
            }
        }
        cur
    }
}

pub(crate) fn final_point_of(c: &Config2D) -> Option<(Rational, Rational)> {
    let (p, w) = c.single_point()?;
    if w.is_one() {
        Some((p.x.clone(), p.y.clone()))
    } else {
        None
    }
}

pub(crate) fn check_split(pa: &Rational, pb: &Rational) -> Result<()> {
    if pa.is_negative() || pb.is_negative() || pa + pb != Rational::one() {
        return input("honest split must satisfy P_A + P_B = 1 with both nonnegative");
    }
    Ok(())
}

pub(crate) fn bias_of(beta: &Rational, alpha: &Rational) -> Rational {
    let m = if beta >= alpha { beta } else { alpha };
    m - crate::exactmath::frac(1, 2)
}

#[allow(dead_code)]
pub(crate) fn to_u64(r: &Rational) -> Option<u64> {
    r.to_integer().to_u64()
}

// JSON documents

#[derive(Serialize, Deserialize)]
struct TdpgDoc {
    #[serde(rename = "type")]
    kind: String,
    #[serde(with = "crate::exactmath::serde_rational")]
    pa: Rational,
    #[serde(with = "crate::exactmath::serde_rational")]
    pb: Rational,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    start: Option<Config2D>,
    frames: Vec<Frame>,
}

#[derive(Serialize, Deserialize)]
struct TipgDoc {
    #[serde(rename = "type")]
    kind: String,
    #[serde(with = "crate::exactmath::serde_rational")]
    pa: Rational,
    #[serde(with = "crate::exactmath::serde_rational")]
    pb: Rational,
    h: PointFn2D,
    v: PointFn2D,
}

impl Serialize for Tdpg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TdpgDoc { kind: "tdpg".into(), pa: self.pa.clone(), pb: self.pb.clone(), start: self.start.clone(), frames: self.frames.clone() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tdpg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = TdpgDoc::deserialize(d)?;
        if doc.kind != "tdpg" {
            return Err(D::Error::custom(format!("expected type \"tdpg\", got {:?}", doc.kind)));
        }
        check_split(&doc.pa, &doc.pb).map_err(D::Error::custom)?;
        Ok(Tdpg { pa: doc.pa, pb: doc.pb, start: doc.start, frames: doc.frames })
    }
}

impl Serialize for Tipg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TipgDoc { kind: "tipg".into(), pa: self.pa.clone(), pb: self.pb.clone(), h: self.h.clone(), v: self.v.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tipg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = TipgDoc::deserialize(d)?;
        if doc.kind != "tipg" {
            return Err(D::Error::custom(format!("expected type \"tipg\", got {:?}", doc.kind)));
        }
        check_split(&doc.pa, &doc.pb).map_err(D::Error::custom)?;
        Ok(Tipg { pa: doc.pa, pb: doc.pb, h: doc.h, v: doc.v })
    }
}

/// Either kind of game document.
#[derive(Clone, Debug)]
pub enum GameDoc {
    Tdpg(Tdpg),
    Tipg(Tipg),
}

impl GameDoc {
    pub fn from_json(s: &str) -> Result<GameDoc> {
        let v: serde_json::Value = serde_json::from_str(s).map_err(|e| crate::Error::Parse(e.to_string()))?;
        match v.get("type").and_then(|t| t.as_str()) {
            Some("tdpg") => serde_json::from_value(v).map(GameDoc::Tdpg).map_err(|e| crate::Error::Parse(e.to_string())),
            Some("tipg") => serde_json::from_value(v).map(GameDoc::Tipg).map_err(|e| crate::Error::Parse(e.to_string())),
            other => Err(crate::Error::Parse(format!("unknown game type {other:?}"))),
        }
    }
}
