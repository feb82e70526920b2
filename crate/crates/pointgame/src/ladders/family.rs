use crate::error::{input, Result};
use crate::exactmath::{format_rational, frac, int, serde_rational, to_f64, Rational};
use crate::games::Tipg;
use crate::points::PointFn2D;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Parameters `Υ = {k, ε, Γ, z*}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub k: u32,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    pub gamma: u64,
    #[serde(with = "serde_rational")]
    pub zstar: Rational,
}

/// Which rung weight to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyVariant {
    /// Rung weight carries the extra factor `i`, matching the polynomial-rung construction.
    Corrected,
    /// Rung weight exactly as printed (no factor `i`); fails the sum identity.
    Literal,
}

impl FamilyParams {
    pub fn new(k: u32, eps: Rational, gamma: u64, zstar: Rational) -> Self {
        FamilyParams { k, eps, gamma, zstar }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return input("k must be a positive integer");
        }
        if !self.eps.is_positive() {
            return input("ε must be positive");
        }
        if int(self.k as i64) * &self.eps >= frac(1, 2) {
            return input("kε must be below 1/2");
        }
        if self.gamma <= 4 * self.k as u64 {
            return input("Γ must exceed 4k");
        }
        if self.zstar <= frac(1, 2) || self.zstar >= Rational::one() {
            return input("z* must lie in (1/2, 1)");
        }
        let j = &self.zstar / &self.eps;
        if !j.is_integer() {
            return input("z*/ε must be an integer");
        }
        if j.to_integer() > self.gamma.into() {
            return input("z*/ε must not exceed Γ (empty sum)");
        }
        Ok(())
    }

    /// `z*/ε`
    pub fn j0(&self) -> u64 {
        (&self.zstar / &self.eps).to_integer().try_into().expect("validated")
    }

    fn at(&self, j: i64) -> Rational {
        &self.eps * int(j)
    }

    pub fn g(&self, z: &Rational) -> Rational {
        let mut acc = Rational::one();
        for j in 1..self.k as i64 {
            let a = &self.zstar - self.at(j);
            acc *= (&a - z) / &a;
        }
        for j in 1..=self.k as i64 {
            let a = self.at(self.gamma as i64 + j);
            acc *= (&a - z) / &a;
        }
        acc
    }

    pub fn p(&self, z: &Rational) -> Rational {
        let k = self.k as i64;
        let mut den = Rational::one();
        for j in -k..=k {
            den *= z + self.at(j);
        }
        let s = if (k - 1) % 2 == 0 { Rational::one() } else { -Rational::one() };
        s * self.g(z) / den
    }

    pub fn d(&self, i: i64) -> Rational {
        let k = self.k as i64;
        let mut acc = num_traits::pow(self.eps.clone(), (2 * k - 1) as usize);
        for l in -k..=k {
            if l != i {
                acc *= int(l - i);
            }
        }
        acc
    }

    fn range(&self) -> std::ops::RangeInclusive<u64> {
        self.j0()..=self.gamma
    }

    /// `Σ_j p(jε)` and `Σ_j p(jε)/(jε)`.
    fn sums(&self) -> (Rational, Rational) {
        let terms: Vec<(Rational, Rational)> = self
            .range()
            .map(|j| {
                let z = self.at(j as i64);
                let p = self.p(&z);
                let q = &p / &z;
                (p, q)
            })
            .collect();
        (pairwise(terms.iter().map(|t| t.0.clone()).collect()), pairwise(terms.into_iter().map(|t| t.1).collect()))
    }

    pub fn c(&self) -> Rational {
        self.sums().0.recip()
    }

    /// `C Σ p(jε)/(jε)` in double precision.
    pub fn feasibility_ratio_f64(&self) -> f64 {
        let k = self.k as i64;
        let eps = to_f64(&self.eps);
        let zs = to_f64(&self.zstar);
        let gamma = self.gamma as f64;
        let (mut s0, mut s1) = (0.0f64, 0.0f64);
        for j in self.range() {
            let z = j as f64 * eps;
            let mut g = 1.0;
            for i in 1..k {
                let a = zs - i as f64 * eps;
                g *= (a - z) / a;
            }
            for i in 1..=k {
                let a = (gamma + i as f64) * eps;
                g *= (a - z) / a;
            }
            let mut p = g;
            for i in -k..=k {
                p /= (z + i as f64 * eps) / eps;
            }
            if (k - 1) % 2 == 1 {
                p = -p;
            }
            s0 += p;
            s1 += p / z;
        }
        s1 / s0
    }
}

/// Balanced summation keeps intermediate denominators small.
fn pairwise(mut v: Vec<Rational>) -> Rational {
    if v.is_empty() {
        return Rational::zero();
    }
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        v = next;
    }
    v.pop().unwrap()
}

/// Exact test of `1 ≥ C Σ_j p(jε)/(jε)`.
pub fn check_family_feasibility(params: &FamilyParams) -> Result<bool> {
    params.validate()?;
    let (s0, s1) = params.sums();
    Ok(s0.is_positive() && s0 >= s1)
}

#[derive(Clone, Debug)]
pub struct FamilyFns {
    pub params: FamilyParams,
    pub variant: FamilyVariant,
    pub c: Rational,
    /// Halved weights: `h = h_Υ`, where the definition writes `2h_Υ`.
    pub h: PointFn2D,
    pub v: PointFn2D,
}

impl FamilyFns {
    pub fn to_tipg(&self) -> Tipg {
        Tipg { pa: frac(1, 2), pb: frac(1, 2), h: self.h.clone(), v: self.v.clone() }
    }

    pub fn describe(&self) -> String {
        let p = &self.params;
        format!("k={} eps={} Gamma={} z*={} C={}", p.k, format_rational(&p.eps), p.gamma, format_rational(&p.zstar), format_rational(&self.c))
    }
}

pub fn build_family_tipg(params: &FamilyParams) -> Result<FamilyFns> {
    build_family_variant(params, FamilyVariant::Corrected)
}

pub fn build_family_variant(params: &FamilyParams, variant: FamilyVariant) -> Result<FamilyFns> {
    params.validate()?;
    let k = params.k as i64;
    let c = params.c();
    let zero = Rational::zero();
    let mut h2 = PointFn2D::new();
    h2.add(int(1), zero.clone(), int(-1));
    h2.add(&params.zstar - params.at(k), params.zstar.clone(), int(-1));
    h2.add(params.zstar.clone(), params.zstar.clone(), int(1));
    let sign = if k % 2 == 0 { Rational::one() } else { -Rational::one() };
    let ds: Vec<Rational> = (-k..=k).map(|i| params.d(i)).collect();
    for j in params.range() {
        let j = j as i64;
        let y = params.at(j);
        let py = params.p(&y);
        let gy = params.g(&y);
        h2.add(y.clone(), zero.clone(), &c * &py);
        h2.add(zero.clone(), y.clone(), -&c * &py);
        for i in -k..=k {
            if i == 0 {
                continue;
            }
            let x = params.at(j + i);
            let factor = match variant {
                FamilyVariant::Corrected => int(i),
                FamilyVariant::Literal => Rational::one(),
            };
            let w = &c * &sign * factor * params.g(&x) * &gy / (&y * &x * &ds[(i + k) as usize]);
            h2.add(x, y.clone(), w);
        }
    }
    let h = h2.scale(&frac(1, 2));
    let v = h.transpose();
    Ok(FamilyFns { params: params.clone(), variant, c, h, v })
}
