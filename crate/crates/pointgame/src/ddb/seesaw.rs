use super::sim::{BOOM, DIP, QA, QB, QU};
use super::{ddb_recursion_f64, DdbGame};
use crate::error::{input, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct SeesawResult {
    /// Best winning probability found for cheating Bob against honest Alice.
    pub value: f64,
    pub restarts: usize,
    pub iterations: usize,
    /// Whether the best run's last sweep improved by less than `1e-12`.
    pub converged: bool,
}

/// Alternating ascent over cheating Bob's unitaries (one per even message), with a
/// memory register of dimension `mem`; returns a lower bound on `P_B*`.
pub fn ddb_primal_seesaw_pb(g: &DdbGame, iters: usize, seed: u64, mem: usize) -> Result<SeesawResult> {
    ddb_primal_seesaw_pb_f64(&g.p_f64(), iters, seed, mem)
}

/// [`ddb_primal_seesaw_pb`] for parameters given in double precision.
pub fn ddb_primal_seesaw_pb_f64(p: &[f64], iters: usize, seed: u64, mem: usize) -> Result<SeesawResult> {
    if p.is_empty() || p.len() > 7 {
        return input("the see-saw is limited to n ≤ 7");
    }
    if !(1..=18).contains(&mem) {
        return input("memory register dimension must lie in 1..=18");
    }
    let model = Model::new(p, mem);
    if model.slots.is_empty() {
        let v = model.value(&[]);
        return Ok(SeesawResult { value: v, restarts: 0, iterations: 0, converged: true });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let restarts = 8;
    let mut best = SeesawResult { value: f64::NEG_INFINITY, restarts, iterations: 0, converged: false };
    for _ in 0..restarts {
        let mut vs: Vec<DMatrix<f64>> = model.slots.iter().map(|_| crate::seesaw::random_orthogonal(2 * mem, &mut rng)).collect();
        let (value, it, conv) = crate::seesaw::ascend(&model, &mut vs, iters);
        if value > best.value {
            best = SeesawResult { value, restarts, iterations: it, converged: conv };
        }
    }
    Ok(best)
}

/// Honest Alice's operations interleaved with Bob's unitary slots.
pub(crate) struct Model {
    pub(crate) dim: usize,
    pub(crate) mem: usize,
    /// `ops[k]` is applied after slot `k − 1` (and before slot `k`).
    pub(crate) ops: Vec<DMatrix<f64>>,
    pub(crate) slots: Vec<()>,
    pub(crate) init: DVector<f64>,
    pub(crate) target: DMatrix<f64>,
}

impl Model {
    fn new(p: &[f64], mem: usize) -> Self {
        let dim = 6 * mem;
        let at = |a: usize, m: usize, r: usize| a * 2 * mem + m * mem + r;
        let (_, pb, pu) = ddb_recursion_f64(p);
        let rot = |i: usize, j: usize, eps: f64| {
            let mut u = DMatrix::<f64>::identity(dim, dim);
            let (c, s) = ((1.0 - eps).max(0.0).sqrt(), eps.max(0.0).sqrt());
            u[(i, i)] = c;
            u[(j, j)] = c;
            u[(i, j)] = -s;
            u[(j, i)] = s;
            u
        };
        let mut ops = vec![DMatrix::<f64>::identity(dim, dim)];
        let mut slots = vec![];
        for i in 1..=p.len() {
            let pi = p[i - 1];
            let cur = ops.last_mut().unwrap();
            if i % 2 == 1 {
                for r in 0..mem {
                    *cur = rot(at(QU, DIP, r), at(QA, BOOM, r), pi) * &*cur;
                }
            } else {
                slots.push(());
                let tilde = pi * pu[i - 1] / pb[i];
                let mut op = DMatrix::<f64>::identity(dim, dim);
                for r in 0..mem {
                    op = rot(at(QU, BOOM, r), at(QB, DIP, r), tilde) * op;
                }
                for a in 0..3 {
                    for r in 0..mem {
                        let k = at(a, BOOM, r);
                        op.row_mut(k).fill(0.0);
                    }
                }
                ops.push(op);
            }
        }
        let mut init = DVector::zeros(dim);
        init[at(QU, DIP, 0)] = 1.0;
        let mut target = DMatrix::zeros(dim, dim);
        for m in 0..2 {
            for r in 0..mem {
                let k = at(QB, m, r);
                target[(k, k)] = 1.0;
            }
        }
        Model { dim, mem, ops, slots, init, target }
    }
}

impl crate::seesaw::SlotModel for Model {
    fn dim(&self) -> usize {
        self.dim
    }
    fn local_dim(&self) -> usize {
        2 * self.mem
    }
    fn outer_dim(&self) -> usize {
        3
    }
    fn ops(&self) -> &[DMatrix<f64>] {
        &self.ops
    }
    fn init(&self) -> &DVector<f64> {
        &self.init
    }
    fn target(&self) -> &DMatrix<f64> {
        &self.target
    }
    /// Bob's unitary acts on the trailing `M ⊗ R` factor.
    fn slot_on_tail(&self) -> bool {
        true
    }
}

impl Model {
    fn value(&self, vs: &[DMatrix<f64>]) -> f64 {
        crate::seesaw::value(self, vs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddb::ddb_dual_bound_pb;
    use crate::exactmath::frac;

    #[test]
    fn rational_fixture_sandwich() {
        let g = DdbGame::new(vec![frac(1, 3), frac(3, 4), frac(1, 1)]).unwrap();
        let r = ddb_primal_seesaw_pb(&g, 300, 7, 4).unwrap();
        let bound = crate::exactmath::to_f64(&ddb_dual_bound_pb(&g).unwrap());
        assert!(r.value <= bound + 1e-6, "{} > {bound}", r.value);
        assert!(r.value >= bound - 1e-3, "{} < {bound}", r.value);
    }

    #[test]
    fn irrational_fixture() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = ddb_primal_seesaw_pb_f64(&[1.0 - s, s, 1.0], 300, 1, 4).unwrap();
        assert!(r.value >= s - 1e-3 && r.value <= s + 1e-6, "{}", r.value);
    }

    #[test]
    fn single_message_is_zero() {
        let g = DdbGame::new(vec![frac(1, 1)]).unwrap();
        assert_eq!(ddb_primal_seesaw_pb(&g, 10, 0, 2).unwrap().value, 0.0);
    }
}
