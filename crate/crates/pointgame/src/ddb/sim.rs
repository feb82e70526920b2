use super::{ddb_recursion, DdbGame};
use crate::error::{rejected, Result};
use crate::exactmath::to_f64;

pub(crate) const QA: usize = 0;
pub(crate) const QB: usize = 1;
pub(crate) const QU: usize = 2;
pub(crate) const DIP: usize = 0;
pub(crate) const BOOM: usize = 1;

fn idx(a: usize, m: usize, b: usize) -> usize {
    a * 6 + m * 3 + b
}

/// Alice's qutrit ⊗ message qubit ⊗ Bob's qutrit.
#[derive(Clone, Debug, PartialEq)]
pub struct DdbState {
    pub amps: [f64; 18],
    /// Probability an honest projection step would have aborted.
    pub abort_prob: f64,
}

impl DdbState {
    fn rot(&mut self, i: usize, j: usize, eps: f64) {
        let (c, s) = ((1.0 - eps).max(0.0).sqrt(), eps.max(0.0).sqrt());
        let (x, y) = (self.amps[i], self.amps[j]);
        self.amps[i] = c * x - s * y;
        self.amps[j] = s * x + c * y;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|x| x * x).sum()
    }

    /// `|⟨a,m,b|ψ⟩|²`
    pub fn prob(&self, a: usize, m: usize, b: usize) -> f64 {
        self.amps[idx(a, m, b)].powi(2)
    }
}

#[derive(Clone, Debug)]
pub struct HonestRun {
    /// State at the end of each iteration, `ψ₀..ψₙ`.
    pub states: Vec<DdbState>,
    /// `(P_A, P_B)` from the final qutrit measurement.
    pub outcome: (f64, f64),
    /// Largest deviation from the closed-form honest state.
    pub closed_form_error: f64,
    pub max_abort_prob: f64,
}

/// Plays both parties honestly on the 18-dimensional state vector.
pub fn ddb_simulate_honest(g: &DdbGame) -> Result<HonestRun> {
    let rec = ddb_recursion(g);
    let mut st = DdbState { amps: [0.0; 18], abort_prob: 0.0 };
    st.amps[idx(QU, DIP, QU)] = 1.0;
    let mut states = vec![st.clone()];
    let mut err: f64 = 0.0;
    let mut max_abort: f64 = 0.0;
    for i in 1..=g.n() {
        let p = to_f64(&g.p()[i - 1]);
        let alice = i % 2 == 1;
        let px = if alice { &rec.pa[i] } else { &rec.pb[i] };
        let tilde = if px.numer().sign() == num_bigint::Sign::NoSign {
            0.0
        } else {
            to_f64(&(&g.p()[i - 1] * &rec.pu[i - 1] / px))
        };
        for o in 0..3 {
            if alice {
                st.rot(idx(QU, DIP, o), idx(QA, BOOM, o), p);
            } else {
                st.rot(idx(o, DIP, QU), idx(o, BOOM, QB), p);
            }
        }
        for o in 0..3 {
            if alice {
                st.rot(idx(o, BOOM, QU), idx(o, DIP, QA), tilde);
            } else {
                st.rot(idx(QU, BOOM, o), idx(QB, DIP, o), tilde);
            }
        }
        let mut abort = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                abort += st.prob(a, BOOM, b);
                st.amps[idx(a, BOOM, b)] = 0.0;
            }
        }
        st.abort_prob = abort;
        max_abort = max_abort.max(abort);
        let expect = [
            (idx(QA, DIP, QA), to_f64(&rec.pa[i]).sqrt()),
            (idx(QB, DIP, QB), to_f64(&rec.pb[i]).sqrt()),
            (idx(QU, DIP, QU), to_f64(&rec.pu[i]).sqrt()),
        ];
        let mut want = [0.0; 18];
        for (k, v) in expect {
            want[k] = v;
        }
        for (x, y) in st.amps.iter().zip(want) {
            err = err.max((x - y).abs());
        }
        states.push(st.clone());
    }
    if max_abort > 1e-12 {
        return rejected(format!("honest play aborted with probability {max_abort:e}"));
    }
    let mut pa = 0.0;
    let mut pb = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let w = st.prob(a, DIP, b);
            // Alice's reading decides; U counts as her own win.
            if a == QB {
                pb += w;
            } else {
                pa += w;
            }
        }
    }
    Ok(HonestRun { states, outcome: (pa, pb), closed_form_error: err, max_abort_prob: max_abort })
}
