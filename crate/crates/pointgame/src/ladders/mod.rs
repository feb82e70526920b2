//! Generators for explicit TIPGs: polynomial rungs, the bias-1/6 ladder and the
//! `(k+1)/(2k+1)` family with its parameter search.

mod family;
mod search;
mod sixth;

pub use family::{build_family_tipg, build_family_variant, check_family_feasibility, FamilyFns, FamilyParams, FamilyVariant};
pub use search::{search_family_params, SearchOutcome, SearchStep, SearchBudget};
pub use sixth::{bias_sixth_delta, build_bias_sixth_tipg};

use crate::error::{input, precondition, Result};
use crate::exactmath::{frac, sign_on_open_positive_axis, Polynomial, Rational};
use crate::points::PointFn1D;
use num_traits::{One, Zero};

/// `p = Σᵢ −f(xᵢ)/Π_{j≠i}(xⱼ − xᵢ) [xᵢ]` for a polynomial `f` of degree `≤ n − 2` given by its values,
/// with `f(−λ) ≥ 0` for `λ > 0`.
pub fn rung_from_polynomial(xs: &[Rational], f_values: &[Rational]) -> Result<PointFn1D> {
    if xs.len() < 2 || xs.len() != f_values.len() {
        return input("need at least two points and one value per point");
    }
    let mut sorted = xs.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return input("duplicate support point");
    }
    if xs.iter().any(|x| *x < Rational::zero()) {
        return input("support points must be nonnegative");
    }
    let f = interpolate(xs, f_values);
    if f.degree().is_some_and(|d| d + 2 > xs.len()) {
        return precondition("values do not come from a polynomial of degree at most n − 2");
    }
    let reflected = Polynomial::new(f.coeffs().iter().enumerate().map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() }).collect());
    if !sign_on_open_positive_axis(&reflected).nonnegative {
        return precondition("f(−λ) is negative somewhere on λ > 0");
    }
    let mut p = PointFn1D::new();
    for (i, (x, fx)) in xs.iter().zip(f_values).enumerate() {
        let den = xs.iter().enumerate().filter(|(j, _)| *j != i).fold(Rational::one(), |a, (_, xj)| a * (xj - x));
        p.add(x.clone(), -fx / den);
    }
    Ok(p)
}

/// Lagrange interpolation.
fn interpolate(xs: &[Rational], ys: &[Rational]) -> Polynomial {
    let mut acc = Polynomial::zero();
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        let mut basis = Polynomial::constant(yi.clone());
        for (j, xj) in xs.iter().enumerate() {
            if j != i {
                let lin = Polynomial::linear_root_shift(-xj.clone()).scale(&(xi - xj).recip());
                basis = &basis * &lin;
            }
        }
        acc = &acc + &basis;
    }
    acc
}

/// `(k+1)/(2k+1)`
pub fn continuum_cutoff(k: u32) -> Result<Rational> {
    if k < 1 {
        return input("k must be at least 1");
    }
    let k = k as i64;
    Ok(frac(k + 1, 2 * k + 1))
}



#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::int;
    use crate::points::check_valid_fn_1d;

    #[test]
    fn sixth_rung_weights() {
        let xs = [frac(2, 3), int(1), frac(5, 3), int(2)];
        let p = rung_from_polynomial(&xs, &[frac(4, 9), frac(4, 9), frac(4, 9), frac(4, 9)]).unwrap();
        let w: Vec<_> = p.iter().map(|(_, w)| w.clone()).collect();
        assert_eq!(w, [int(-1), int(2), int(-2), int(1)]);
        assert!(check_valid_fn_1d(&p, &int(0), false).valid);
    }

    #[test]
    fn zero_and_linear() {
        assert!(rung_from_polynomial(&[int(0), int(1)], &[int(0), int(0)]).unwrap().is_empty());
        let p = rung_from_polynomial(&[int(1), int(2), int(3)], &[int(2), int(1), int(0)]).unwrap();
        assert_eq!(p.to_points(), vec![(int(1), int(-1)), (int(2), int(1))]);
        assert!(check_valid_fn_1d(&p, &int(0), false).valid);
    }

    #[test]
    fn rung_preconditions() {
        assert!(rung_from_polynomial(&[int(1), int(1)], &[int(0), int(0)]).is_err());
        // degree 2 on three points
        assert!(rung_from_polynomial(&[int(1), int(2), int(3)], &[int(1), int(4), int(9)]).is_err());
        // f(x) = x − 1 gives f(−λ) < 0
        assert!(rung_from_polynomial(&[int(1), int(2), int(3)], &[int(0), int(1), int(2)]).is_err());
    }

    #[test]
    fn cutoffs() {
        assert_eq!(continuum_cutoff(1).unwrap(), frac(2, 3));
        assert_eq!(continuum_cutoff(2).unwrap(), frac(3, 5));
        for k in 1..50u32 {
            assert!(continuum_cutoff(k).unwrap() < frac(1, 2) + frac(1, 2 * k as i64));
        }
        assert!(continuum_cutoff(0).is_err());
    }
}
