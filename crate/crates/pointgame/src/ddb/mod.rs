//! The Dip-Dip-Boom protocol: honest recursions, state-vector simulation,
//! the closed-form dual bound on Bob's cheating probability and its certificate.

mod seesaw;
mod sim;

pub use seesaw::{ddb_primal_seesaw_pb, ddb_primal_seesaw_pb_f64, SeesawResult};
pub use sim::{ddb_simulate_honest, DdbState, HonestRun};

use crate::error::{input, precondition, Result};
use crate::exactmath::{format_rational, frac, Rational};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// `p₁..pₙ`: probability that message `i` is "Boom".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DdbGame {
    p: Vec<Rational>,
}

impl DdbGame {
    pub fn new(p: Vec<Rational>) -> Result<Self> {
        if p.is_empty() {
            return input("need at least one message");
        }
        if !p.last().unwrap().is_one() {
            return input("the last probability must be 1");
        }
        for (i, x) in p[..p.len() - 1].iter().enumerate() {
            if !x.is_positive() || *x >= Rational::one() {
                return input(format!("p_{} must lie strictly between 0 and 1", i + 1));
            }
        }
        Ok(DdbGame { p })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[Rational] {
        &self.p
    }

    pub fn p_f64(&self) -> Vec<f64> {
        self.p.iter().map(crate::exactmath::to_f64).collect()
    }

    pub fn is_fair(&self) -> bool {
        let r = ddb_recursion(self);
        r.pa[self.n()] == frac(1, 2) && r.pb[self.n()] == frac(1, 2)
    }

    /// Fair three-message game with `p₁ ∈ (0, 1/2)`.
    pub fn fair3(p1: Rational) -> Result<Self> {
        let p2 = (Rational::from_integer(2.into()) * (Rational::one() - &p1)).recip();
        DdbGame::new(vec![p1, p2, Rational::one()])
    }

    /// Fair five-message game; `p₄` is solved from `P_B(4) = 1/2`.
    pub fn fair5(p1: Rational, p2: Rational, p3: Rational) -> Result<Self> {
        let pu3 = (Rational::one() - &p1) * (Rational::one() - &p2) * (Rational::one() - &p3);
        let pb2 = (Rational::one() - &p1) * &p2;
        let p4 = (frac(1, 2) - pb2) / pu3;
        DdbGame::new(vec![p1, p2, p3, p4, Rational::one()])
    }
}

/// `P_A(i), P_B(i), P_U(i)` for `i = 0..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DdbRecursion {
    pub pa: Vec<Rational>,
    pub pb: Vec<Rational>,
    pub pu: Vec<Rational>,
}

pub fn ddb_recursion(g: &DdbGame) -> DdbRecursion {
    let mut r = DdbRecursion { pa: vec![Rational::zero()], pb: vec![Rational::zero()], pu: vec![Rational::one()] };
    for (idx, p) in g.p.iter().enumerate() {
        let i = idx + 1;
        let (a, b, u) = (r.pa[idx].clone(), r.pb[idx].clone(), r.pu[idx].clone());
        let boom = p * &u;
        if i % 2 == 1 {
            r.pa.push(a + &boom);
            r.pb.push(b);
        } else {
            r.pa.push(a);
            r.pb.push(b + &boom);
        }
        r.pu.push(u - boom);
    }
    r
}

/// Double-precision recursion, for irrational parameters.
pub fn ddb_recursion_f64(p: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mut pa, mut pb, mut pu) = (vec![0.0], vec![0.0], vec![1.0]);
    for (idx, x) in p.iter().enumerate() {
        let boom = x * pu[idx];
        if idx % 2 == 0 {
            pa.push(pa[idx] + boom);
            pb.push(pb[idx]);
        } else {
            pa.push(pa[idx]);
            pb.push(pb[idx] + boom);
        }
        pu.push(pu[idx] - boom);
    }
    (pa, pb, pu)
}

/// `u₀ = 2 Σ_{j even} p_j Π_{k<j}(1−p_k) Π_{k<j, k odd}(1−p_k)`, valid when `P_B(n) = 1/2`.
pub fn ddb_dual_bound_pb(g: &DdbGame) -> Result<Rational> {
    if !g.is_fair() {
        return precondition("the closed form assumes a fair game (P_A(n) = P_B(n) = 1/2)");
    }
    let one = Rational::one();
    let mut sum = Rational::zero();
    let (mut all, mut odd) = (one.clone(), one.clone());
    for (idx, p) in g.p.iter().enumerate() {
        let j = idx + 1;
        if j % 2 == 0 {
            sum += p * &all * &odd;
        } else {
            odd *= &one - p;
        }
        all *= &one - p;
    }
    Ok(sum * Rational::from_integer(2.into()))
}

/// Double-precision version of [`ddb_dual_bound_pb`]; fairness is checked to `1e-12`.
pub fn ddb_dual_bound_pb_f64(p: &[f64]) -> Result<f64> {
    if p.is_empty() || (p[p.len() - 1] - 1.0).abs() > 1e-12 {
        return input("the last probability must be 1");
    }
    let (_, pb, _) = ddb_recursion_f64(p);
    if (pb[p.len()] - 0.5).abs() > 1e-12 {
        return precondition("the closed form assumes a fair game (P_B(n) = 1/2)");
    }
    let (mut sum, mut all, mut odd) = (0.0, 1.0, 1.0);
    for (idx, x) in p.iter().enumerate() {
        if idx % 2 == 1 {
            sum += x * all * odd;
        } else {
            odd *= 1.0 - x;
        }
        all *= 1.0 - x;
    }
    Ok(2.0 * sum)
}

/// A diagonal entry that may be `+∞`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ext {
    Finite(Rational),
    Infinite,
}

impl Ext {
    fn recip(&self) -> Rational {
        match self {
            Ext::Finite(x) => x.recip(),
            Ext::Infinite => Rational::zero(),
        }
    }
}

impl Serialize for Ext {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ext::Finite(x) => s.serialize_str(&format_rational(x)),
            Ext::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub accepted: bool,
    #[serde(with = "crate::exactmath::serde_rational")]
    pub u0: Rational,
    /// `(b_i, u_i)` for `i = 0..=n`; `a_i = 0` throughout.
    pub diagonals: Vec<(Ext, Ext)>,
    pub failures: Vec<String>,
}

/// Builds the diagonal dual `Z_i = diag(0, b_i, u_i)` and checks every constraint exactly.
pub fn ddb_dual_certificate_check(g: &DdbGame) -> Result<CertificateReport> {
    let u0 = ddb_dual_bound_pb(g)?;
    let n = g.n();
    let rec = ddb_recursion(g);
    let one = Rational::one();
    let mut failures = vec![];

    // u: odd steps are equalities u_{i-1} = (1−p_i)u_i; even steps keep u constant.
    let mut u: Vec<Ext> = vec![Ext::Finite(u0.clone())];
    for i in 1..=n {
        let prev = match &u[i - 1] {
            Ext::Finite(x) => x.clone(),
            Ext::Infinite => unreachable!(),
        };
        let p = &g.p[i - 1];
        let next = if i % 2 == 1 {
            if p.is_one() {
                // u_{n-1} = a_n = 0 is forced only if p_n = 1 at an odd step; u_n is free.
                Rational::zero()
            } else {
                prev / (&one - p)
            }
        } else {
            prev
        };
        u.push(Ext::Finite(next));
    }
    if n % 2 == 1 {
        // Z_{n-1} = diag(a_n, b_n, a_n): the odd last step needs u_{n-1} = a_n = 0.
        u[n - 1] = Ext::Finite(Rational::zero());
    }
    let uf = |i: usize| match &u[i] {
        Ext::Finite(x) => x.clone(),
        Ext::Infinite => unreachable!(),
    };

    // b: b₀ = b₁ = ∞, odd steps copy, even steps minimize the 2×2 determinant.
    let mut b: Vec<Ext> = vec![Ext::Infinite];
    for i in 1..=n {
        let next = if i % 2 == 1 {
            b[i - 1].clone()
        } else {
            let pt = &g.p[i - 1] * &rec.pu[i - 1] / &rec.pb[i];
            let inv = &pt / uf(i - 1) + (&one - &pt) * b[i - 1].recip();
            Ext::Finite(inv.recip())
        };
        b.push(next);
    }
    if n == 1 {
        b = vec![Ext::Finite(one.clone()), Ext::Finite(one.clone())];
    }

    // Even steps: u_{i-1} ≥ u_i and the 2×2 block is PSD.
    for i in (2..=n).step_by(2) {
        let pt = &g.p[i - 1] * &rec.pu[i - 1] / &rec.pb[i];
        let Ext::Finite(bi) = &b[i] else { unreachable!() };
        if uf(i - 1) < uf(i) {
            failures.push(format!("step {i}: u_{} < u_{i}", i - 1));
        }
        let d22 = uf(i - 1) - &pt * bi;
        let off2 = &pt * (&one - &pt) * bi * bi;
        match &b[i - 1] {
            Ext::Infinite => {
                if d22.is_negative() {
                    failures.push(format!("step {i}: lower diagonal entry {} < 0", format_rational(&d22)));
                }
            }
            Ext::Finite(bp) => {
                let d11 = bp - (&one - &pt) * bi;
                let det = &d11 * &d22 - off2;
                if d11.is_negative() || d22.is_negative() || det.is_negative() {
                    failures.push(format!(
                        "step {i}: 2x2 block not PSD (diagonal {}, {}; determinant {})",
                        format_rational(&d11),
                        format_rational(&d22),
                        format_rational(&det)
                    ));
                }
            }
        }
    }
    // Odd steps hold with equality by construction; check it for the u entries.
    for i in (1..=n).step_by(2) {
        let p = &g.p[i - 1];
        let lhs = uf(i - 1);
        let rhs = (&one - p) * uf(i);
        if lhs != rhs && !(p.is_one() && lhs.is_zero()) {
            failures.push(format!("step {i}: odd-step equality fails"));
        }
    }
    match &b[n] {
        Ext::Finite(x) if x.is_one() => {}
        other => failures.push(format!("terminal condition b_n = 1 fails (b_n = {})", match other {
            Ext::Finite(x) => format_rational(x),
            Ext::Infinite => "inf".into(),
        })),
    }
    Ok(CertificateReport { accepted: failures.is_empty(), u0, diagonals: b.into_iter().zip(u).collect(), failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::int;

    fn game(p: &[(i64, i64)]) -> DdbGame {
        DdbGame::new(p.iter().map(|(a, b)| frac(*a, *b)).collect()).unwrap()
    }

    /// Independent re-implementation: Alice wins when the first Boom comes on an odd message.
    fn first_boom(p: &[Rational]) -> (Rational, Rational) {
        let (mut a, mut b) = (Rational::zero(), Rational::zero());
        for (i, pi) in p.iter().enumerate() {
            let undecided: Rational = p[..i].iter().map(|x| Rational::one() - x).product();
            if i % 2 == 0 {
                a += pi * undecided;
            } else {
                b += pi * undecided;
            }
        }
        (a, b)
    }

    #[test]
    fn recursions() {
        let g = game(&[(1, 2), (1, 2), (1, 1)]);
        let r = ddb_recursion(&g);
        assert_eq!((r.pa[3].clone(), r.pb[3].clone()), (frac(3, 4), frac(1, 4)));
        assert_eq!(first_boom(g.p()), (frac(3, 4), frac(1, 4)));
        let r = ddb_recursion(&game(&[(1, 1)]));
        assert_eq!(r.pa[1], int(1));
        let g = game(&[(1, 3), (1, 2), (1, 1)]);
        let r = ddb_recursion(&g);
        assert_eq!((r.pa[3].clone(), r.pb[3].clone()), (frac(2, 3), frac(1, 3)));
        for i in 0..=3 {
            assert_eq!(&r.pa[i] + &r.pb[i] + &r.pu[i], int(1));
        }
        assert!(r.pu[3].is_zero());
    }

    #[test]
    fn invalid_games() {
        assert!(DdbGame::new(vec![frac(1, 2)]).is_err());
        assert!(DdbGame::new(vec![int(0), int(1)]).is_err());
        assert!(DdbGame::new(vec![]).is_err());
    }

    #[test]
    fn rational_bound() {
        let g = game(&[(1, 3), (3, 4), (1, 1)]);
        assert!(g.is_fair());
        assert_eq!(ddb_dual_bound_pb(&g).unwrap(), frac(2, 3));
        // Independent evaluation of the double-product sum.
        let p = g.p();
        let u0 = int(2) * &p[1] * (int(1) - &p[0]) * (int(1) - &p[0]);
        assert_eq!(u0, frac(2, 3));
        let c = ddb_dual_certificate_check(&g).unwrap();
        assert!(c.accepted, "{:?}", c.failures);
        assert!(ddb_dual_bound_pb(&game(&[(1, 3), (2, 3), (1, 1)])).is_err());
    }

    #[test]
    fn irrational_bound() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u0 = ddb_dual_bound_pb_f64(&[1.0 - s, s, 1.0]).unwrap();
        assert!((u0 - s).abs() < 1e-12);
    }

    #[test]
    fn fair_sweep_certificates() {
        for j in 1..=20 {
            let g = DdbGame::fair3(frac(j, 42)).unwrap();
            assert!(g.is_fair());
            let c = ddb_dual_certificate_check(&g).unwrap();
            assert!(c.accepted, "{:?}", c.failures);
        }
        for (a, b, c) in [((1, 5), (1, 4), (1, 3)), ((1, 10), (1, 10), (1, 10)), ((1, 4), (1, 5), (1, 10))] {
            let g = DdbGame::fair5(frac(a.0, a.1), frac(b.0, b.1), frac(c.0, c.1)).unwrap();
            let cert = ddb_dual_certificate_check(&g).unwrap();
            assert!(cert.accepted, "{:?}", cert.failures);
        }
    }

    #[test]
    fn even_length_certificate() {
        // Four messages: p₄ = 1 decides for Bob.
        let p1 = frac(1, 3);
        let p2 = frac(1, 4);
        let pu2 = (int(1) - &p1) * (int(1) - &p2);
        // P_A(3) = 1/2 fixes p₃.
        let p3 = (frac(1, 2) - &p1) / &pu2;
        let g = DdbGame::new(vec![p1, p2, p3, int(1)]).unwrap();
        assert!(g.is_fair());
        let c = ddb_dual_certificate_check(&g).unwrap();
        assert!(c.accepted, "{:?}", c.failures);
    }
}
