//! See-saw search for cheating strategies against a compiled protocol.

use super::protocol::Protocol;
use crate::error::{input, Result};
use crate::seesaw::{ascend, random_orthogonal, SlotModel};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cheater {
    Alice,
    Bob,
}

struct CheatModel {
    ops: Vec<DMatrix<f64>>,
    init: DVector<f64>,
    target: DMatrix<f64>,
    local: usize,
    outer: usize,
    tail: bool,
}

impl SlotModel for CheatModel {
    fn dim(&self) -> usize {
        self.local * self.outer
    }
    fn local_dim(&self) -> usize {
        self.local
    }
    fn outer_dim(&self) -> usize {
        self.outer
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
    fn slot_on_tail(&self) -> bool {
        self.tail
    }
}

/// Largest full dimension the dense see-saw accepts.
pub const MAX_CHEAT_DIM: usize = 2048;

/// Best winning probability found for the cheater, whose private register has the
/// dimension of the honest one. Honest-party steps include their projections.
pub fn cheat_seesaw(p: &Protocol, who: Cheater, restarts: usize, iters: usize, seed: u64) -> Result<f64> {
    let [da, dm, db] = p.dims;
    let dim = da * dm * db;
    if dim > MAX_CHEAT_DIM {
        return input(format!("protocol dimension {dim} exceeds the see-saw limit {MAX_CHEAT_DIM}"));
    }
    let honest_op = |i: usize| {
        let u = p.unitaries[i - 1].to_dense();
        match &p.projections {
            Some(es) => es[i - 1].to_dense() * u,
            None => u,
        }
    };
    let init = p.initial_state();
    let model = match who {
        Cheater::Bob => {
            let ib = DMatrix::identity(db, db);
            let mut ops: Vec<DMatrix<f64>> = (1..=p.n).filter(|&i| Protocol::is_alice_step(i)).map(|i| honest_op(i).kronecker(&ib)).collect();
            ops.push(DMatrix::identity(dim, dim));
            let target = p.pi_a1.to_dense().kronecker(&DMatrix::identity(dm * db, dm * db));
            CheatModel { ops, init, target, local: dm * db, outer: da, tail: true }
        }
        Cheater::Alice => {
            let ia = DMatrix::identity(da, da);
            let mut ops = vec![DMatrix::identity(dim, dim)];
            ops.extend((1..=p.n).filter(|&i| !Protocol::is_alice_step(i)).map(|i| ia.kronecker(&honest_op(i))));
            let target = DMatrix::identity(da * dm, da * dm).kronecker(&p.pi_b0.to_dense());
            CheatModel { ops, init, target, local: da * dm, outer: db, tail: false }
        }
    };
    let slots = model.ops.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..restarts.max(1) {
        let mut vs: Vec<DMatrix<f64>> = (0..slots).map(|_| random_orthogonal(model.local, &mut rng)).collect();
        let (v, _, _) = ascend(&model, &mut vs, iters);
        best = best.max(v);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile_tdpg, verify_ubp, CompileOptions};
    use crate::exactmath::frac;
    use crate::games::{alice_announces, strictify_tdpg};

    #[test]
    fn seesaw_respects_the_certificate() {
        let g = strictify_tdpg(&alice_announces(), &frac(1, 10)).unwrap();
        let u = compile_tdpg(&g, &CompileOptions::default()).unwrap().ubp;
        assert!(verify_ubp(&u).accepted);
        let pb = cheat_seesaw(&u.protocol, Cheater::Bob, 3, 200, 1).unwrap();
        let pa = cheat_seesaw(&u.protocol, Cheater::Alice, 3, 200, 1).unwrap();
        assert!(pb <= u.beta + 1e-6, "{pb} > {}", u.beta);
        assert!(pa <= u.alpha + 1e-6, "{pa} > {}", u.alpha);
        // Alice announces: Bob cannot beat her coin, Alice wins outright
        assert!(pb > 0.5 - 1e-6);
        assert!(pa > 1.0 - 1e-6);
    }
}
