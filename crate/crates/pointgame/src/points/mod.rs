//! Finitely supported point functions on the half-line and the quarter-plane.

mod moves;
mod valid;

pub use moves::{apply_move, MoveKind, MoveSpec};
pub use valid::{
    check_transition_1d, check_transition_2d, check_valid_fn_1d, check_valid_fn_2d, FnVerdict,
    LineFailure, LineReport, TransitionKind, TransitionReport,
};

use crate::error::{input, Result};
use crate::exactmath::{format_rational, parse_rational, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Which coordinate a line holds fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Fixed `y`, points move along `x`.
    Horizontal,
    /// Fixed `x`, points move along `y`.
    Vertical,
}

impl Direction {
    pub fn other(self) -> Self {
        match self {
            Direction::Horizontal => Direction::Vertical,
            Direction::Vertical => Direction::Horizontal,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Horizontal => "horizontal",
            Direction::Vertical => "vertical",
        })
    }
}

/// A point `[x, y]`; ordered by `(y, x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pt {
    pub y: Rational,
    pub x: Rational,
}

impl Pt {
    pub fn new(x: Rational, y: Rational) -> Self {
        Pt { y, x }
    }

    pub fn transposed(&self) -> Self {
        Pt { x: self.y.clone(), y: self.x.clone() }
    }

    /// Coordinate along a line of the given direction.
    pub fn along(&self, dir: Direction) -> &Rational {
        match dir {
            Direction::Horizontal => &self.x,
            Direction::Vertical => &self.y,
        }
    }

    /// Coordinate held fixed by a line of the given direction.
    pub fn across(&self, dir: Direction) -> &Rational {
        match dir {
            Direction::Horizontal => &self.y,
            Direction::Vertical => &self.x,
        }
    }

    pub fn on_line(dir: Direction, line: Rational, along: Rational) -> Self {
        match dir {
            Direction::Horizontal => Pt::new(along, line),
            Direction::Vertical => Pt::new(line, along),
        }
    }
}

impl fmt::Display for Pt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", format_rational(&self.x), format_rational(&self.y))
    }
}

/// Finitely supported `z ↦ weight` on `[0, ∞)`; zero weights are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PointFn1D {
    map: BTreeMap<Rational, Rational>,
}

impl PointFn1D {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points<I: IntoIterator<Item = (Rational, Rational)>>(pts: I) -> Result<Self> {
        let mut f = Self::new();
        for (z, w) in pts {
            if z.is_negative() {
                return input(format!("negative coordinate {}", format_rational(&z)));
            }
            f.add(z, w);
        }
        Ok(f)
    }

    /// Adds `w` at `z`. Panics on a negative coordinate.
    pub fn add(&mut self, z: Rational, w: Rational) {
        assert!(!z.is_negative(), "negative coordinate");
        if w.is_zero() {
            return;
        }
        match self.map.get_mut(&z) {
            Some(e) => {
                *e += w;
                if e.is_zero() {
                    self.map.remove(&z);
                }
            }
            None => {
                self.map.insert(z, w);
            }
        }
    }

    pub fn get(&self, z: &Rational) -> Rational {
        self.map.get(z).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.map.values().fold(Rational::zero(), |a, b| a + b)
    }

    /// `Σ z·w`
    pub fn first_moment(&self) -> Rational {
        self.map.iter().fold(Rational::zero(), |a, (z, w)| a + z * w)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.map.values().all(|w| w.is_positive())
    }

    pub fn scale(&self, a: &Rational) -> Self {
        let mut f = Self::new();
        for (z, w) in &self.map {
            f.add(z.clone(), w * a);
        }
        f
    }

    pub fn plus(&self, o: &Self) -> Self {
        let mut f = self.clone();
        for (z, w) in &o.map {
            f.add(z.clone(), w.clone());
        }
        f
    }

    pub fn minus(&self, o: &Self) -> Self {
        let mut f = self.clone();
        for (z, w) in &o.map {
            f.add(z.clone(), -w);
        }
        f
    }

    pub fn to_points(&self) -> Vec<(Rational, Rational)> {
        self.map.iter().map(|(z, w)| (z.clone(), w.clone())).collect()
    }
}

impl fmt::Display for PointFn1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.map.iter().map(|(z, w)| (format!("[{}]", format_rational(z)), w)))
    }
}

fn write_terms<'a>(f: &mut fmt::Formatter<'_>, terms: impl Iterator<Item = (String, &'a Rational)>) -> fmt::Result {
    let mut first = true;
    for (p, w) in terms {
        let s = format_rational(&w.abs());
        let sign = if w.is_negative() { "-" } else if first { "" } else { "+" };
        if first {
            write!(f, "{sign}{s}{p}")?;
        } else {
            write!(f, " {sign} {s}{p}")?;
        }
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// Finitely supported `[x, y] ↦ weight` on the quarter-plane.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PointFn2D {
    map: BTreeMap<Pt, Rational>,
}

/// A nonnegative point function: a TDPG frame.
pub type Config2D = PointFn2D;

impl PointFn2D {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point(x: Rational, y: Rational, w: Rational) -> Self {
        let mut f = Self::new();
        f.add(x, y, w);
        f
    }

    pub fn from_points<I: IntoIterator<Item = (Rational, Rational, Rational)>>(pts: I) -> Result<Self> {
        let mut f = Self::new();
        for (x, y, w) in pts {
            if x.is_negative() || y.is_negative() {
                return input(format!("negative coordinate in [{},{}]", format_rational(&x), format_rational(&y)));
            }
            f.add(x, y, w);
        }
        Ok(f)
    }

    /// Adds `w` at `[x, y]`. Panics on negative coordinates.
    pub fn add(&mut self, x: Rational, y: Rational, w: Rational) {
        self.add_at(Pt::new(x, y), w);
    }

    pub fn add_at(&mut self, p: Pt, w: Rational) {
        assert!(!p.x.is_negative() && !p.y.is_negative(), "negative coordinate");
        if w.is_zero() {
            return;
        }
        match self.map.get_mut(&p) {
            Some(e) => {
                *e += w;
                if e.is_zero() {
                    self.map.remove(&p);
                }
            }
            None => {
                self.map.insert(p, w);
            }
        }
    }

    pub fn get(&self, x: &Rational, y: &Rational) -> Rational {
        self.map.get(&Pt::new(x.clone(), y.clone())).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn get_at(&self, p: &Pt) -> Rational {
        self.map.get(p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Pt, &Rational)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.map.values().fold(Rational::zero(), |a, b| a + b)
    }

    /// All weights strictly positive.
    pub fn is_configuration(&self) -> bool {
        self.map.values().all(|w| w.is_positive())
    }

    pub fn scale(&self, a: &Rational) -> Self {
        if a.is_zero() {
            return Self::new();
        }
        PointFn2D { map: self.map.iter().map(|(p, w)| (p.clone(), w * a)).collect() }
    }

    pub fn plus(&self, o: &Self) -> Self {
        let mut f = self.clone();
        f.add_fn(o);
        f
    }

    pub fn minus(&self, o: &Self) -> Self {
        let mut f = self.clone();
        f.sub_fn(o);
        f
    }

    pub fn add_fn(&mut self, o: &Self) {
        for (p, w) in &o.map {
            self.add_at(p.clone(), w.clone());
        }
    }

    pub fn add_scaled(&mut self, o: &Self, a: &Rational) {
        for (p, w) in &o.map {
            self.add_at(p.clone(), w * a);
        }
    }

    pub fn sub_fn(&mut self, o: &Self) {
        for (p, w) in &o.map {
            self.add_at(p.clone(), -w);
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&(-crate::exactmath::one()))
    }

    /// `(x, y) ↦ f(y, x)`
    pub fn transpose(&self) -> Self {
        PointFn2D { map: self.map.iter().map(|(p, w)| (p.transposed(), w.clone())).collect() }
    }

    /// `max(f, 0)`
    pub fn positive_part(&self) -> Self {
        PointFn2D { map: self.map.iter().filter(|(_, w)| w.is_positive()).map(|(p, w)| (p.clone(), w.clone())).collect() }
    }

    /// `max(−f, 0)`
    pub fn negative_part(&self) -> Self {
        PointFn2D { map: self.map.iter().filter(|(_, w)| w.is_negative()).map(|(p, w)| (p.clone(), -w)).collect() }
    }

    /// Restriction to each line of the given direction, keyed by the fixed coordinate.
    pub fn lines(&self, dir: Direction) -> BTreeMap<Rational, PointFn1D> {
        let mut out: BTreeMap<Rational, PointFn1D> = BTreeMap::new();
        for (p, w) in &self.map {
            out.entry(p.across(dir).clone()).or_default().add(p.along(dir).clone(), w.clone());
        }
        out
    }

    pub fn line(&self, dir: Direction, at: &Rational) -> PointFn1D {
        let mut f = PointFn1D::new();
        for (p, w) in &self.map {
            if p.across(dir) == at {
                f.add(p.along(dir).clone(), w.clone());
            }
        }
        f
    }

    pub fn xs(&self) -> Vec<Rational> {
        let mut v: Vec<_> = self.map.keys().map(|p| p.x.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn ys(&self) -> Vec<Rational> {
        let mut v: Vec<_> = self.map.keys().map(|p| p.y.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Shifts every point by `(dx, dy)`.
    pub fn shifted(&self, dx: &Rational, dy: &Rational) -> Self {
        PointFn2D {
            map: self.map.iter().map(|(p, w)| (Pt::new(&p.x + dx, &p.y + dy), w.clone())).collect(),
        }
    }

    /// The single point of a one-point function.
    pub fn single_point(&self) -> Option<(&Pt, &Rational)> {
        if self.map.len() == 1 {
            self.map.iter().next()
        } else {
            None
        }
    }
}

impl fmt::Display for PointFn2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.map.iter().map(|(p, w)| (p.to_string(), w)))
    }
}

#[derive(Serialize, Deserialize)]
struct PointJson {
    x: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    y: Option<String>,
    w: String,
}

#[derive(Serialize, Deserialize)]
struct PointsJson {
    points: Vec<PointJson>,
}

impl Serialize for PointFn2D {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointsJson {
            points: self
                .map
                .iter()
                .map(|(p, w)| PointJson { x: format_rational(&p.x), y: Some(format_rational(&p.y)), w: format_rational(w) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointFn2D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PointsJson::deserialize(d)?;
        let mut pts = vec![];
        for p in raw.points {
            let y = p.y.ok_or_else(|| D::Error::custom("2-D point without \"y\""))?;
            pts.push((
                parse_rational(&p.x).map_err(D::Error::custom)?,
                parse_rational(&y).map_err(D::Error::custom)?,
                parse_rational(&p.w).map_err(D::Error::custom)?,
            ));
        }
        PointFn2D::from_points(pts).map_err(D::Error::custom)
    }
}

impl Serialize for PointFn1D {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointsJson {
            points: self
                .map
                .iter()
                .map(|(z, w)| PointJson { x: format_rational(z), y: None, w: format_rational(w) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointFn1D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PointsJson::deserialize(d)?;
        let mut pts = vec![];
        for p in raw.points {
            pts.push((parse_rational(&p.x).map_err(D::Error::custom)?, parse_rational(&p.w).map_err(D::Error::custom)?));
        }
        PointFn1D::from_points(pts).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{frac, int};

    #[test]
    fn zero_weights_vanish() {
        let mut f = PointFn2D::new();
        f.add(int(1), int(0), frac(1, 2));
        f.add(int(1), int(0), frac(-1, 2));
        assert!(f.is_empty());
        let mut g = PointFn1D::new();
        g.add(int(2), int(1));
        g.add(int(3), int(1));
        g.add(int(2), int(-1));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn ordering_is_y_then_x() {
        let f = PointFn2D::from_points([(int(2), int(0), int(1)), (int(0), int(1), int(1)), (int(1), int(0), int(1))]).unwrap();
        let order: Vec<_> = f.iter().map(|(p, _)| p.to_string()).collect();
        assert_eq!(order, ["[1,0]", "[2,0]", "[0,1]"]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let f = PointFn2D::from_points([(frac(2, 3), int(1), frac(-7, 11)), (int(0), frac(1, 3), int(5))]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"points":[{"x":"0","y":"1/3","w":"5"},{"x":"2/3","y":"1","w":"-7/11"}]}"#);
        let g: PointFn2D = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        let h = PointFn1D::from_points([(frac(1, 3), int(1))]).unwrap();
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"points":[{"x":"1/3","w":"1"}]}"#);
        assert_eq!(serde_json::from_str::<PointFn1D>(&s).unwrap(), h);
    }

    #[test]
    fn negative_coordinates_rejected() {
        assert!(PointFn2D::from_points([(int(-1), int(0), int(1))]).is_err());
        assert!(serde_json::from_str::<PointFn2D>(r#"{"points":[{"x":"-1","y":"0","w":"1"}]}"#).is_err());
    }

    #[test]
    fn parts_and_lines() {
        let f = PointFn2D::from_points([(int(1), int(0), int(-1)), (int(2), int(0), int(1)), (int(2), int(3), int(4))]).unwrap();
        assert_eq!(f.negative_part(), PointFn2D::point(int(1), int(0), int(1)));
        assert_eq!(f.positive_part().total(), int(5));
        let h = f.lines(Direction::Horizontal);
        assert_eq!(h.len(), 2);
        assert_eq!(h[&int(0)].total(), int(0));
        let v = f.lines(Direction::Vertical);
        assert_eq!(v[&int(2)].len(), 2);
        assert_eq!(f.transpose().get(&int(3), &int(2)), int(4));
    }
}
