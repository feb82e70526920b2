use super::{check_family_feasibility, continuum_cutoff, FamilyParams};
use crate::error::{input, Error, Result};
use crate::exactmath::{int, Rational};
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

/// Float ratios above `1 + SKIP_MARGIN` are not checked exactly.
const SKIP_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    /// Largest `z*/ε` tried; candidates are `10·2ᵐ`.
    pub max_j0: u64,
    /// Largest `Γ` tried; candidates are `2ʲ·4k`.
    pub max_gamma: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_j0: 320, max_gamma: 1 << 15 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchStep {
    pub j0: u64,
    pub gamma: u64,
    /// `C Σ p(jε)/(jε)` in double precision; feasible iff `≤ 1`.
    pub ratio: f64,
    /// Exact verdict, when the float filter let the candidate through.
    pub exact: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub params: FamilyParams,
    pub trace: Vec<SearchStep>,
}

/// First feasible `(z*/ε, Γ)` in lexicographic order for `z* = (k+1)/(2k+1) + gap`.
pub fn search_family_params(k: u32, gap: &Rational, budget: SearchBudget) -> Result<SearchOutcome> {
    if k < 1 {
        return input("k must be at least 1");
    }
    if !gap.is_positive() {
        return input("gap must be positive: the limit is only approached, never attained");
    }
    let zstar = continuum_cutoff(k)? + gap;
    if zstar >= Rational::one() {
        return input("gap too large: z* must stay below 1");
    }
    let mut trace = vec![];
    let mut j0 = 10u64;
    while j0 <= budget.max_j0 {
        let eps = &zstar / int(j0 as i64);
        if int(k as i64) * &eps < Rational::new(1.into(), 2.into()) {
            let gammas: Vec<u64> = (1..)
                .map(|j| (4 * k as u64) << j)
                .take_while(|g| *g <= budget.max_gamma)
                .filter(|g| *g >= j0)
                .collect();
            let ratios: Vec<f64> = gammas
                .par_iter()
                .map(|g| FamilyParams::new(k, eps.clone(), *g, zstar.clone()).feasibility_ratio_f64())
                .collect();
            for (g, ratio) in gammas.into_iter().zip(ratios) {
                let params = FamilyParams::new(k, eps.clone(), g, zstar.clone());
                let mut step = SearchStep { j0, gamma: g, ratio, exact: None };
                if ratio <= 1.0 + SKIP_MARGIN {
                    let ok = check_family_feasibility(&params)?;
                    step.exact = Some(ok);
                    trace.push(step);
                    if ok {
                        return Ok(SearchOutcome { params, trace });
                    }
                } else {
                    trace.push(step);
                }
            }
        }
        j0 *= 2;
    }
    let best = trace.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    Err(Error::NoConvergence(format!(
        "no feasible parameters within z*/ε ≤ {}, Γ ≤ {} ({} candidates, best ratio {best:.9})",
        budget.max_j0,
        budget.max_gamma,
        trace.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::frac;

    #[test]
    fn k1_gap_fiftieth() {
        let out = search_family_params(1, &frac(1, 50), SearchBudget::default()).unwrap();
        assert!(out.params.zstar <= frac(2, 3) + frac(1, 50));
        assert!(check_family_feasibility(&out.params).unwrap());
        assert_eq!((out.params.j0(), out.params.gamma), (20, 4096));
    }

    #[test]
    fn zero_gap_and_small_budget() {
        assert!(search_family_params(1, &frac(0, 1), SearchBudget::default()).is_err());
        let tiny = SearchBudget { max_j0: 20, max_gamma: 64 };
        let e = search_family_params(1, &frac(1, 50), tiny).unwrap_err();
        assert!(matches!(e, Error::NoConvergence(_)), "{e}");
    }
}
