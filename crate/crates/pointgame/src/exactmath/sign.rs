use super::{Polynomial, Rational};
use crate::error::{input, Result};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

/// Outcome of a sign decision on an interval `(Λ, ∞)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignVerdict {
    pub nonnegative: bool,
    pub strictly_positive: bool,
    /// A point where the polynomial is negative (if not nonnegative) or zero
    /// (if nonnegative but not strictly positive). Zeros at irrational roots
    /// are reported by a rational point of their isolating interval.
    pub witness: Option<Rational>,
}

impl SignVerdict {
    pub fn positive() -> Self {
        SignVerdict { nonnegative: true, strictly_positive: true, witness: None }
    }
}

/// Right end of a root-counting interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Upper {
    Finite(Rational),
    Infinity,
}

/// `N(λ) = Σⱼ (−dⱼ) Π_{k≠j} (λ + z_k)`.
pub fn clear_denominators(points: &[(Rational, Rational)]) -> Result<Polynomial> {
    let mut seen = BTreeSet::new();
    for (z, _) in points {
        if z.is_negative() {
            return input(format!("negative coordinate {}", super::format_rational(z)));
        }
        if !seen.insert(z.clone()) {
            return input(format!("duplicate support point {}", super::format_rational(z)));
        }
    }
    let n = points.len();
    // prefix[i] = Π_{k<i}(λ+z_k), suffix[i] = Π_{k≥i}(λ+z_k)
    let mut prefix = vec![Polynomial::constant(Rational::one())];
    for (z, _) in points {
        let next = prefix.last().unwrap() * &Polynomial::linear_root_shift(z.clone());
        prefix.push(next);
    }
    let mut suffix = vec![Polynomial::constant(Rational::one()); n + 1];
    for i in (0..n).rev() {
        suffix[i] = &suffix[i + 1] * &Polynomial::linear_root_shift(points[i].0.clone());
    }
    let mut acc = Polynomial::zero();
    for (j, (_, d)) in points.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        let term = (&prefix[j] * &suffix[j + 1]).scale(&-d);
        acc = &acc + &term;
    }
    Ok(acc)
}

fn sturm_chain(f: &Polynomial) -> Vec<Polynomial> {
    let mut chain = vec![f.clone()];
    if f.degree().unwrap_or(0) == 0 {
        return chain;
    }
    chain.push(f.derivative());
    loop {
        let k = chain.len();
        let r = chain[k - 2].rem(&chain[k - 1]);
        if r.is_zero() {
            break;
        }
        // Positive rescaling keeps the chain's signs intact.
        let lc = r.leading().abs();
        chain.push((-&r).scale(&(Rational::one() / lc)));
    }
    chain
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn sgn(r: &Rational) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

fn variations_at(chain: &[Polynomial], x: &Upper) -> usize {
    match x {
        Upper::Finite(x) => sign_changes(chain.iter().map(|p| sgn(&p.eval(x)))),
        Upper::Infinity => sign_changes(chain.iter().map(|p| sgn(&p.leading()))),
    }
}

struct Counter {
    chain: Vec<Polynomial>,
}

impl Counter {
    fn new(f: &Polynomial) -> Self {
        Counter { chain: sturm_chain(&f.square_free_part()) }
    }

    fn count(&self, a: &Rational, b: &Upper) -> usize {
        if self.chain[0].degree().unwrap_or(0) == 0 {
            return 0;
        }
        let va = variations_at(&self.chain, &Upper::Finite(a.clone()));
        let vb = variations_at(&self.chain, b);
        va.saturating_sub(vb)
    }
}

/// Number of distinct real roots of `n` in `(a, b]`.
pub fn sturm_root_count(n: &Polynomial, a: &Rational, b: &Upper) -> usize {
    if n.is_zero() {
        return 0;
    }
    Counter::new(n).count(a, b)
}

fn cauchy_bound(f: &Polynomial) -> Rational {
    let lc = f.leading().abs();
    let m = f
        .coeffs()
        .iter()
        .map(|c| c.abs() / &lc)
        .fold(Rational::zero(), |a, b| if b > a { b } else { a });
    m + Rational::one()
}

/// Disjoint intervals `(l, r]`, each holding exactly one root of `f` in `(lo, hi]`.
fn isolate(counter: &Counter, lo: Rational, hi: Rational) -> Vec<(Rational, Rational)> {
    let mut out = vec![];
    let mut stack = vec![(lo, hi)];
    while let Some((l, r)) = stack.pop() {
        let c = counter.count(&l, &Upper::Finite(r.clone()));
        if c == 0 {
            continue;
        }
        if c == 1 {
            out.push((l, r));
            continue;
        }
        let m = (&l + &r) / Rational::from_integer(2.into());
        stack.push((m.clone(), r));
        stack.push((l, m));
    }
    out.sort();
    out
}

/// A point strictly between `a` (a root or the left end) and the unique root in `(l, r]`.
fn point_before(f: &Polynomial, counter: &Counter, a: &Rational, mut l: Rational, mut r: Rational) -> Rational {
    let two = Rational::from_integer(2.into());
    loop {
        if &l > a {
            return l;
        }
        if f.eval(&r).is_zero() {
            return (a + &r) / &two;
        }
        let m = (&l + &r) / &two;
        if f.eval(&m).is_zero() {
            return (a + &m) / &two;
        }
        if counter.count(&l, &Upper::Finite(m.clone())) == 0 {
            l = m;
        } else {
            r = m;
        }
    }
}

/// Sign decision for `N` on `(Λ, ∞)`.
pub fn sign_on_shifted_axis(n: &Polynomial, lambda0: &Rational) -> SignVerdict {
    if n.is_zero() {
        return SignVerdict {
            nonnegative: true,
            strictly_positive: false,
            witness: Some(lambda0 + Rational::one()),
        };
    }
    if n.degree() == Some(0) {
        let pos = n.leading().is_positive();
        return SignVerdict {
            nonnegative: pos,
            strictly_positive: pos,
            witness: if pos { None } else { Some(lambda0 + Rational::one()) },
        };
    }
    let factors = n.square_free_factors();
    let odd = factors
        .iter()
        .filter(|(m, _)| m % 2 == 1)
        .fold(Polynomial::constant(Rational::one()), |acc, (_, f)| &acc * f);
    let odd_roots = sturm_root_count(&odd, lambda0, &Upper::Infinity);
    let lc_pos = n.leading().is_positive();
    let nonnegative = odd_roots == 0 && lc_pos;
    let counter = Counter::new(n);
    let all_roots = counter.count(lambda0, &Upper::Infinity);
    let strictly_positive = nonnegative && all_roots == 0;
    if strictly_positive {
        return SignVerdict::positive();
    }
    let hi = cauchy_bound(n).max(lambda0 + Rational::one());
    let iso = isolate(&counter, lambda0.clone(), hi);
    let witness = if !nonnegative {
        let mut samples = vec![];
        let mut prev_root_exact: Option<Rational> = Some(lambda0.clone());
        for (l, r) in &iso {
            match &prev_root_exact {
                Some(a) => samples.push(point_before(n, &counter, a, l.clone(), r.clone())),
                None => {}
            }
            if n.eval(r).is_zero() {
                prev_root_exact = Some(r.clone());
            } else {
                samples.push(r.clone());
                prev_root_exact = None;
            }
        }
        if let Some(a) = prev_root_exact {
            samples.push(a + Rational::one());
        }
        samples.into_iter().find(|s| n.eval(s).is_negative())
    } else if let Some(root) = factors
        .iter()
        .filter(|(_, f)| f.degree() == Some(1))
        .map(|(_, f)| -&f.coeffs()[0] / &f.coeffs()[1])
        .filter(|z| z > lambda0)
        .min()
    {
        Some(root)
    } else {
        iso.first().map(|(l, r)| {
            if n.eval(r).is_zero() {
                r.clone()
            } else {
                let mut l = l.clone();
                let mut r = r.clone();
                // Shrink toward the irrational root for a tight witness.
                for _ in 0..40 {
                    let m = (&l + &r) / Rational::from_integer(2.into());
                    if n.eval(&m).is_zero() {
                        return m;
                    }
                    if counter.count(&l, &Upper::Finite(m.clone())) == 1 {
                        r = m;
                    } else {
                        l = m;
                    }
                }
                r
            }
        })
    };
    SignVerdict { nonnegative, strictly_positive, witness }
}

pub fn sign_on_open_positive_axis(n: &Polynomial) -> SignVerdict {
    sign_on_shifted_axis(n, &Rational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{frac, int};

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::new(c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn clears_three_point_merge() {
        let n = clear_denominators(&[(int(0), frac(-1, 2)), (frac(1, 3), int(1)), (frac(2, 3), frac(-1, 2))]).unwrap();
        // Hand expansion: ½(λ+⅓)(λ+⅔) − λ(λ+⅔) + ½λ(λ+⅓) = 1/9.
        assert_eq!(n, Polynomial::constant(frac(1, 9)));
    }

    #[test]
    fn clears_four_point_rung() {
        let n = clear_denominators(&[
            (frac(2, 3), int(-1)),
            (int(1), int(2)),
            (frac(5, 3), int(-2)),
            (int(2), int(1)),
        ])
        .unwrap();
        assert_eq!(n, Polynomial::constant(frac(4, 9)));
    }

    #[test]
    fn duplicate_support_rejected() {
        assert!(clear_denominators(&[(int(1), int(1)), (int(1), int(-1))]).is_err());
    }

    #[test]
    fn sign_examples() {
        let v = sign_on_open_positive_axis(&p(&[0, 0, 1]));
        assert!(v.nonnegative && v.strictly_positive && v.witness.is_none());
        let v = sign_on_open_positive_axis(&p(&[-1, 1]));
        assert!(!v.nonnegative);
        assert_eq!(v.witness, Some(frac(1, 2)));
        let v = sign_on_open_positive_axis(&p(&[1, -2, 1]));
        assert!(v.nonnegative && !v.strictly_positive);
        assert_eq!(v.witness, Some(int(1)));
        assert!(sign_on_shifted_axis(&p(&[-1, 1]), &int(2)).nonnegative);
        assert!(!sign_on_shifted_axis(&p(&[-1, 1]), &int(0)).nonnegative);
        assert!(sign_on_shifted_axis(&Polynomial::constant(frac(4, 9)), &int(7)).strictly_positive);
        let z = sign_on_open_positive_axis(&Polynomial::zero());
        assert!(z.nonnegative && !z.strictly_positive);
    }

    #[test]
    fn negative_leading_coefficient_rejected() {
        // -(λ+1): no positive roots but negative at infinity
        let v = sign_on_open_positive_axis(&p(&[-1, -1]));
        assert!(!v.nonnegative);
        assert!(v.witness.unwrap() > int(0));
    }

    #[test]
    fn irrational_double_root() {
        // (λ² - 2)²
        let q = p(&[-2, 0, 1]);
        let v = sign_on_open_positive_axis(&(&q * &q));
        assert!(v.nonnegative && !v.strictly_positive);
        let w = crate::exactmath::to_f64(&v.witness.unwrap());
        assert!((w - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn root_counts() {
        assert_eq!(sturm_root_count(&p(&[-1, 0, 1]), &int(0), &Upper::Infinity), 1);
        assert_eq!(sturm_root_count(&p(&[1, 0, 1]), &int(0), &Upper::Infinity), 0);
        let f = &(&p(&[-1, 1]) * &p(&[-2, 1])) * &p(&[3, 1]);
        assert_eq!(sturm_root_count(&f, &int(0), &Upper::Infinity), 2);
        assert_eq!(sturm_root_count(&f, &int(-5), &Upper::Finite(int(1))), 2);
        assert_eq!(sturm_root_count(&f, &int(1), &Upper::Finite(int(2))), 1);
    }
}
