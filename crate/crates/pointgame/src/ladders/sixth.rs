use crate::error::{input, Result};
use crate::exactmath::{frac, int, Rational};
use crate::games::Tipg;
use crate::points::PointFn2D;

/// `δ = 8/(3Γ − 1)`
pub fn bias_sixth_delta(gamma: u64) -> Rational {
    Rational::new(8.into(), (3 * gamma as i128 - 1).into())
}

/// Truncated ladder with final point `[(2+δ)/3, (2+δ)/3]`.
pub fn build_bias_sixth_tipg(gamma: u64) -> Result<Tipg> {
    if gamma < 4 {
        return input("Γ must be at least 4");
    }
    let g = Rational::from_integer(gamma.into());
    let three = int(3);
    let c = frac(4, 9) * (&three / &g) * (&three / (&g + int(1))) * (&three / (&g - int(2))) * (&three / (&g - int(1)));
    let a1 = (&g + int(1)) / &three;
    let a2 = (&g + int(2)) / &three;
    let f = |x: &Rational, y: &Rational| &c * (&a1 - x) * (&a2 - x) * (&a1 - y) * (&a2 - y);

    let mut lad = PointFn2D::new();
    for k in 3..=gamma as i64 {
        let y = frac(k, 3);
        for (dx, w) in [(-2, frac(-9, 4)), (-1, frac(9, 2)), (1, frac(-9, 2)), (2, frac(9, 4))] {
            let x = frac(k + dx, 3);
            let v = w * f(&x, &y);
            lad.add(x, y.clone(), v);
        }
    }
    let delta = bias_sixth_delta(gamma);
    let a = (int(2) + &delta) / &three;
    let half = frac(1, 2);
    let mut h = lad.clone();
    h.add(int(0), int(1), -&half);
    h.add(frac(1, 3), int(1), int(1));
    h.add(frac(2, 3), int(1), -&half);
    h.add(a.clone(), frac(2, 3), half.clone());
    h.add(int(1), frac(2, 3), &half - lad.get(&frac(2, 3), &int(1)));
    h.add(frac(4, 3), frac(2, 3), -lad.get(&frac(2, 3), &frac(4, 3)));
    h.add(frac(2, 3), a.clone(), -&half);
    h.add(a.clone(), a, half.clone());
    let v = h.transpose();
    Ok(Tipg { pa: half.clone(), pb: half, h, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::verify_tipg;

    #[test]
    fn anchor_weights() {
        let t = build_bias_sixth_tipg(20).unwrap();
        // The ladder has weight −1 at [1/3,1], 38/21 at [2/3,1] and −17/21 at [2/3,4/3].
        assert!(t.h.get(&frac(1, 3), &int(1)) == int(0));
        assert_eq!(t.h.get(&frac(2, 3), &int(1)), frac(38, 21) - frac(1, 2));
        assert_eq!(t.h.get(&int(1), &frac(2, 3)), frac(1, 2) - frac(38, 21));
        assert_eq!(t.h.get(&frac(4, 3), &frac(2, 3)), frac(17, 21));
        assert_eq!(verify_tipg(&t).final_point, Some((frac(42, 59), frac(42, 59))));
    }

    #[test]
    fn gamma_100() {
        let t = build_bias_sixth_tipg(100).unwrap();
        let r = verify_tipg(&t);
        assert!(r.accepted, "{r}");
        assert_eq!(bias_sixth_delta(100), frac(8, 299));
        assert_eq!(r.final_point, Some((frac(606, 897), frac(606, 897))));
    }

    #[test]
    fn smallest_and_too_small() {
        assert!(verify_tipg(&build_bias_sixth_tipg(4).unwrap()).accepted);
        assert!(build_bias_sixth_tipg(3).is_err());
    }
}
