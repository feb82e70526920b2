use super::{coin_flip_start, Tdpg};
use crate::error::{input, Result};
use crate::exactmath::{frac, int, Rational};
use crate::points::Config2D;
use num_traits::{One, Zero};

fn pts(p: &[(Rational, Rational, Rational)]) -> Config2D {
    Config2D::from_points(p.iter().cloned()).expect("valid points")
}

/// Alice flips and announces: final point `[1/2, 1]`.
pub fn alice_announces() -> Tdpg {
    let h = frac(1, 2);
    Tdpg::new(
        h.clone(),
        h.clone(),
        vec![
            coin_flip_start(&h, &h),
            pts(&[(int(1), int(1), h.clone()), (int(0), int(1), h.clone())]),
            pts(&[(h.clone(), int(1), int(1))]),
        ],
    )
}

/// Bob flips and announces: final point `[1, 1/2]`.
pub fn bob_announces() -> Tdpg {
    let h = frac(1, 2);
    Tdpg::new(
        h.clone(),
        h.clone(),
        vec![
            coin_flip_start(&h, &h),
            pts(&[(int(1), int(0), h.clone()), (int(1), int(1), h.clone())]),
            pts(&[(int(1), h.clone(), int(1))]),
        ],
    )
}

/// Four-move game (split, raise, merge, merge) ending at `[x, 1/(2x)]`, `1/2 < x < 1`.
pub fn spekkens_rudolph(x: &Rational) -> Result<Tdpg> {
    let half = frac(1, 2);
    if *x <= half || *x >= Rational::one() {
        return input("x must lie in (1/2, 1)");
    }
    let alpha = (x * int(2)).recip();
    let p1 = Rational::one() - &alpha;
    let p2 = &half - &p1;
    // split 1/2[1] -> p1[x] + p2[z2] conserving Σ p/z
    let inv = &half - &p1 / x;
    if inv <= Rational::zero() {
        return input("split target out of range");
    }
    let z2 = &p2 / inv;
    let merged_x = &p2 * &z2 / (&half + &p2);
    if &merged_x != x {
        return input("merge does not land on x");
    }
    let start = coin_flip_start(&half, &half);
    let f1 = pts(&[(x.clone(), int(0), p1.clone()), (z2.clone(), int(0), p2.clone()), (int(0), int(1), half.clone())]);
    let f2 = pts(&[(x.clone(), int(0), p1.clone()), (z2.clone(), int(1), p2.clone()), (int(0), int(1), half.clone())]);
    let f3 = pts(&[(x.clone(), int(0), p1.clone()), (x.clone(), int(1), &half + &p2)]);
    let f4 = pts(&[(x.clone(), alpha, int(1))]);
    Ok(Tdpg::new(half.clone(), half, vec![start, f1, f2, f3, f4]))
}
