use super::Rational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Univariate polynomial with rational coefficients, ascending degree.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![] }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `x + a`
    pub fn linear_root_shift(a: Rational) -> Self {
        Self::new(vec![a, Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn scale(&self, a: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * a).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading();
        self.scale(&(Rational::one() / lc))
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.coeffs.len() - 1;
        let lc = d.leading();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] / &lc;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[i + j] = &r[i + j] - &c * dc;
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.div_rem(d).1
    }

    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r.primitive_scaled();
        }
        a.monic()
    }

    /// Positive rescaling that keeps coefficient sizes in check; sign preserved.
    fn primitive_scaled(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading().abs();
        self.scale(&(Rational::one() / lc))
    }

    /// Square-free decomposition (Yun): `self = c · Π fᵢ^i`, returns `(i, fᵢ)` with nonconstant fᵢ.
    pub fn square_free_factors(&self) -> Vec<(usize, Polynomial)> {
        let mut out = vec![];
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a = Polynomial::gcd(&f, &fp);
        let mut b = f.div_rem(&a).0;
        let mut c = fp.div_rem(&a).0;
        let mut d = &c - &b.derivative();
        let mut i = 1;
        loop {
            let ai = Polynomial::gcd(&b, &d);
            if ai.degree().unwrap_or(0) > 0 {
                out.push((i, ai.clone()));
            }
            b = b.div_rem(&ai).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_rem(&ai).0;
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    pub fn square_free_part(&self) -> Polynomial {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = Polynomial::gcd(self, &self.derivative());
        self.div_rem(&g).0
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = Rational::zero();
        Polynomial::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        self + &(-o)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        if self.is_zero() || o.is_zero() {
            return Polynomial::zero();
        }
        let mut r = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                r[i + j] += a * b;
            }
        }
        Polynomial::new(r)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let s = super::format_rational(&c.abs());
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let body = match i {
                0 => s,
                1 if c.abs().is_one() => "λ".to_string(),
                1 => format!("{s}·λ"),
                _ if c.abs().is_one() => format!("λ^{i}"),
                _ => format!("{s}·λ^{i}"),
            };
            if first {
                write!(f, "{sign}{body}")?;
            } else {
                write!(f, " {sign} {body}")?;
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{frac, int};

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::new(c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn arithmetic() {
        let a = p(&[1, 1]);
        let b = p(&[-1, 1]);
        assert_eq!(&a * &b, p(&[-1, 0, 1]));
        assert_eq!(&a + &b, p(&[0, 2]));
        assert_eq!((&a - &a).degree(), None);
        assert_eq!(p(&[-1, 0, 1]).eval(&frac(1, 2)), frac(-3, 4));
    }

    #[test]
    fn division_and_gcd() {
        let f = &(&p(&[1, 1]) * &p(&[-2, 1])) * &p(&[3, 1]);
        let (q, r) = f.div_rem(&p(&[-2, 1]));
        assert!(r.is_zero());
        assert_eq!(q, &p(&[1, 1]) * &p(&[3, 1]));
        let g = Polynomial::gcd(&f, &(&p(&[-2, 1]) * &p(&[5, 1])));
        assert_eq!(g, p(&[-2, 1]));
    }

    #[test]
    fn yun_factorization() {
        // (x-1)^2 (x+2)^3 (x-5)
        let a = p(&[-1, 1]);
        let b = p(&[2, 1]);
        let c = p(&[-5, 1]);
        let f = &(&(&(&a * &a) * &(&b * &b)) * &b) * &c;
        let fs = f.scale(&frac(7, 3)).square_free_factors();
        assert_eq!(fs, vec![(1, c.clone()), (2, a.clone()), (3, b.clone())]);
        assert_eq!(f.square_free_part(), &(&a * &b) * &c);
    }

    #[test]
    fn display() {
        assert_eq!(p(&[-1, 0, 1]).to_string(), "λ^2 - 1");
        assert_eq!(Polynomial::constant(frac(4, 9)).to_string(), "4/9");
    }
}
