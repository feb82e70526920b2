//! Protocol and UBP data, honest execution and constraint verification.

use super::sparse::SparseMat;
use crate::error::{input, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub const UBP_SCHEMA: &str = "pointgame.ubp/1";

/// Alice acts on `A⊗M` at odd steps, Bob on `M⊗B` at even steps (steps counted from 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    /// `(d_A, d_M, d_B)`
    pub dims: [usize; 3],
    pub n: usize,
    pub psi_a0: Vec<f64>,
    pub psi_m0: Vec<f64>,
    pub psi_b0: Vec<f64>,
    /// `U_1..U_n`
    pub unitaries: Vec<SparseMat>,
    /// `E_1..E_n`, each on the same space as the matching unitary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections: Option<Vec<SparseMat>>,
    /// `Π_{A,1}` (Alice declares Bob the winner); `Π_{A,0} = I − Π_{A,1}`.
    pub pi_a1: SparseMat,
    /// `Π_{B,0}` (Bob declares Alice the winner); `Π_{B,1} = I − Π_{B,0}`.
    pub pi_b0: SparseMat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// PSD checks accept `λ_min ≥ −psd·(1 + ‖Z‖)`.
    pub psd: f64,
    /// Eigenvector, equality and honest-run residuals.
    pub residual: f64,
    pub unitarity: f64,
    pub cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { psd: 1e-8, residual: 1e-9, unitarity: 1e-10, cluster: 1e-7 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UbpHeader {
    pub seed: u64,
    /// Largest-eigenvalue parameter of the dual operators.
    pub lambda: f64,
    /// Exact final point of the source game, as reduced rationals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_bound: Option<(String, String)>,
    /// Shift added by `projections_to_unitary` per coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag_shift: Option<f64>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ubp {
    pub schema: String,
    pub header: UbpHeader,
    pub tolerances: Tolerances,
    pub protocol: Protocol,
    /// `Z_{A,0}..Z_{A,n}`
    pub z_a: Vec<SparseMat>,
    /// `Z_{B,0}..Z_{B,n}`
    pub z_b: Vec<SparseMat>,
    pub beta: f64,
    pub alpha: f64,
}

impl Ubp {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("UBP serializes")
    }

    pub fn from_json(s: &str) -> Result<Ubp> {
        let u: Ubp = serde_json::from_str(s).map_err(|e| crate::Error::Parse(e.to_string()))?;
        if u.schema != UBP_SCHEMA {
            return input(format!("unsupported schema {:?}", u.schema));
        }
        Ok(u)
    }
}

fn kron3(a: &[f64], m: &[f64], b: &[f64]) -> DVector<f64> {
    let mut v = DVector::zeros(a.len() * m.len() * b.len());
    let mut k = 0;
    for x in a {
        for y in m {
            for z in b {
                v[k] = x * y * z;
                k += 1;
            }
        }
    }
    v
}

impl Protocol {
    pub fn is_alice_step(i: usize) -> bool {
        i % 2 == 1
    }

    /// Dimension of the space step `i` acts on.
    pub fn step_dim(&self, i: usize) -> usize {
        let [a, m, b] = self.dims;
        if Self::is_alice_step(i) {
            a * m
        } else {
            m * b
        }
    }

    /// Structural problems: shapes, norms, unitarity, projector properties.
    pub fn problems(&self, tol: &Tolerances) -> Vec<String> {
        let mut out = vec![];
        let [da, dm, db] = self.dims;
        if da == 0 || dm == 0 || db == 0 {
            out.push("dimensions must be positive".into());
            return out;
        }
        for (name, v, d) in [("psi_a0", &self.psi_a0, da), ("psi_m0", &self.psi_m0, dm), ("psi_b0", &self.psi_b0, db)] {
            if v.len() != d {
                out.push(format!("{name} has length {} (expected {d})", v.len()));
            } else if (v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() > tol.residual {
                out.push(format!("{name} is not a unit vector"));
            }
        }
        if self.unitaries.len() != self.n {
            out.push(format!("{} unitaries for n = {}", self.unitaries.len(), self.n));
            return out;
        }
        for (k, u) in self.unitaries.iter().enumerate() {
            let d = self.step_dim(k + 1);
            if u.rows != d || u.cols != d {
                out.push(format!("U_{} is {}x{} (expected {d}x{d})", k + 1, u.rows, u.cols));
                continue;
            }
            let e = u.orthogonality_error();
            if e > tol.unitarity {
                out.push(format!("U_{} is not unitary (‖UᵀU − I‖ = {e:.3e})", k + 1));
            }
        }
        if let Some(es) = &self.projections {
            if es.len() != self.n {
                out.push(format!("{} projections for n = {}", es.len(), self.n));
            }
            for (k, e) in es.iter().enumerate() {
                let d = self.step_dim(k + 1);
                if e.rows != d || e.cols != d {
                    out.push(format!("E_{} has the wrong shape", k + 1));
                } else if e.asymmetry() > tol.unitarity || e.mul(e).max_abs_diff(e) > tol.unitarity {
                    out.push(format!("E_{} is not an orthogonal projection", k + 1));
                }
            }
        }
        for (name, p, d) in [("pi_a1", &self.pi_a1, da), ("pi_b0", &self.pi_b0, db)] {
            if p.rows != d || p.cols != d {
                out.push(format!("{name} has the wrong shape"));
            } else if p.asymmetry() > tol.unitarity || p.mul(p).max_abs_diff(p) > tol.unitarity {
                out.push(format!("{name} is not an orthogonal projection"));
            }
        }
        out
    }

    pub fn initial_state(&self) -> DVector<f64> {
        kron3(&self.psi_a0, &self.psi_m0, &self.psi_b0)
    }

    /// Applies `U_i` (and `E_i` if present) to a full state; returns the new state and the
    /// squared norm removed by the projection.
    pub fn apply_step(&self, i: usize, psi: &DVector<f64>) -> (DVector<f64>, f64) {
        let [da, _, db] = self.dims;
        let u = &self.unitaries[i - 1];
        let e = self.projections.as_ref().map(|es| &es[i - 1]);
        let alice = Self::is_alice_step(i);
        let apply = |m: &SparseMat, v: &DVector<f64>| if alice { m.apply_left(v, db) } else { m.apply_right(v, da) };
        let v = apply(u, psi);
        match e {
            Some(e) => {
                let w = apply(e, &v);
                let lost = (v.norm_squared() - w.norm_squared()).max(0.0);
                (w, lost)
            }
            None => (v, 0.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HonestRun {
    /// `ψ_0..ψ_n` on `A⊗M⊗B`.
    pub states: Vec<DVector<f64>>,
    pub pa: f64,
    pub pb: f64,
    /// Probability mass removed by each projection step.
    pub projection_failures: Vec<f64>,
    /// `max(‖Π_{A,1}⊗I⊗Π_{B,0}ψ_n‖, ‖Π_{A,0}⊗I⊗Π_{B,1}ψ_n‖)`
    pub disagreement: f64,
}

/// Runs the protocol with both parties honest.
pub fn honest_run(p: &Protocol) -> Result<HonestRun> {
    let probs = p.problems(&Tolerances::default());
    if let Some(first) = probs.first() {
        return input(format!("invalid protocol: {first}"));
    }
    let [da, dm, db] = p.dims;
    let mut states = vec![p.initial_state()];
    let mut fails = vec![];
    for i in 1..=p.n {
        let (next, lost) = p.apply_step(i, states.last().unwrap());
        fails.push(lost);
        states.push(next);
    }
    let last = states.last().unwrap();
    let a1 = p.pi_a1.apply_left(last, dm * db);
    let a0 = last - &a1;
    let a1b0 = p.pi_b0.apply_right(&a1, da * dm);
    let a1b1 = &a1 - &a1b0;
    let a0b0 = p.pi_b0.apply_right(&a0, da * dm);
    let a0b1 = &a0 - &a0b0;
    Ok(HonestRun {
        pa: a0b0.norm_squared(),
        pb: a1b1.norm_squared(),
        disagreement: a1b0.norm().max(a0b1.norm()),
        projection_failures: fails,
        states,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintCheck {
    pub name: String,
    /// Smallest eigenvalue for PSD checks, residual norm otherwise.
    pub value: f64,
    /// PSD checks pass when `value ≥ threshold`, residual checks when `value ≤ threshold`.
    pub threshold: f64,
    pub psd: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UbpReport {
    pub accepted: bool,
    pub beta: f64,
    pub alpha: f64,
    /// Smallest eigenvalue over all step inequalities.
    pub min_slack: f64,
    pub honest: Option<(f64, f64)>,
    pub checks: Vec<ConstraintCheck>,
    pub failures: Vec<String>,
}

impl std::fmt::Display for UbpReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", if self.accepted { "ACCEPTED" } else { "REJECTED" })?;
        writeln!(f, "bound (β, α) = ({:.12}, {:.12})", self.beta, self.alpha)?;
        if let Some((pa, pb)) = self.honest {
            writeln!(f, "honest (P_A, P_B) = ({pa:.12}, {pb:.12})")?;
        }
        writeln!(f, "min step slack = {:.3e} over {} checks", self.min_slack, self.checks.len())?;
        for x in &self.failures {
            writeln!(f, "  {x}")?;
        }
        Ok(())
    }
}

struct Checks {
    list: Vec<ConstraintCheck>,
    tol: Tolerances,
}

impl Checks {
    fn psd(&mut self, name: String, m: &SparseMat, norm: f64) {
        let value = m.min_eigenvalue();
        let threshold = -self.tol.psd * (1.0 + norm);
        self.list.push(ConstraintCheck { name, value, threshold, psd: true, ok: value >= threshold });
    }

    fn residual(&mut self, name: String, value: f64) {
        let threshold = self.tol.residual;
        self.list.push(ConstraintCheck { name, value, threshold, psd: false, ok: value <= threshold });
    }
}

/// Checks every constraint of the dual certificate, plus the honest-run conditions.
pub fn verify_ubp(u: &Ubp) -> UbpReport {
    let p = &u.protocol;
    let mut checks = Checks { list: vec![], tol: u.tolerances.clone() };
    let mut failures: Vec<String> = p.problems(&u.tolerances);
    let n = p.n;
    let [da, dm, db] = p.dims;
    let shapes_ok = failures.is_empty()
        && u.z_a.len() == n + 1
        && u.z_b.len() == n + 1
        && u.z_a.iter().all(|z| z.rows == da && z.cols == da)
        && u.z_b.iter().all(|z| z.rows == db && z.cols == db);
    if !shapes_ok {
        if failures.is_empty() {
            failures.push("dual operators have the wrong count or shape".into());
        }
        return UbpReport { accepted: false, beta: u.beta, alpha: u.alpha, min_slack: f64::NAN, honest: None, checks: vec![], failures };
    }
    let norms_a: Vec<f64> = u.z_a.iter().map(|z| z.spectral_norm_sym()).collect();
    let norms_b: Vec<f64> = u.z_b.iter().map(|z| z.spectral_norm_sym()).collect();
    for (k, z) in u.z_a.iter().enumerate() {
        checks.residual(format!("Z_A,{k} symmetric"), z.asymmetry());
        checks.psd(format!("Z_A,{k} ⪰ 0"), z, norms_a[k]);
    }
    for (k, z) in u.z_b.iter().enumerate() {
        checks.residual(format!("Z_B,{k} symmetric"), z.asymmetry());
        checks.psd(format!("Z_B,{k} ⪰ 0"), z, norms_b[k]);
    }
    let a0 = DVector::from_column_slice(&p.psi_a0);
    let b0 = DVector::from_column_slice(&p.psi_b0);
    checks.residual("Z_A,0 ψ_A,0 = β ψ_A,0".into(), (u.z_a[0].matvec(&a0) - &a0 * u.beta).norm());
    checks.residual("Z_B,0 ψ_B,0 = α ψ_B,0".into(), (u.z_b[0].matvec(&b0) - &b0 * u.alpha).norm());
    let first_psd = checks.list.len();
    let im = SparseMat::identity(dm);
    for i in 1..=n {
        let uu = &p.unitaries[i - 1];
        let e = p.projections.as_ref().map(|es| &es[i - 1]);
        let sandwich = |z: &SparseMat| {
            let inner = match e {
                Some(e) => e.mul(z).mul(e),
                None => z.clone(),
            };
            uu.transpose().mul(&inner).mul(uu)
        };
        if Protocol::is_alice_step(i) {
            let lhs = u.z_a[i - 1].kron(&im);
            let rhs = sandwich(&u.z_a[i].kron(&im));
            checks.psd(format!("step {i}: Z_A,{}⊗I ⪰ U†E(Z_A,{i}⊗I)EU", i - 1), &lhs.add_scaled(&rhs, -1.0), norms_a[i - 1].max(norms_a[i]));
            checks.residual(format!("step {i}: Z_B,{} = Z_B,{i}", i - 1), u.z_b[i - 1].max_abs_diff(&u.z_b[i]));
        } else {
            let lhs = im.kron(&u.z_b[i - 1]);
            let rhs = sandwich(&im.kron(&u.z_b[i]));
            checks.psd(format!("step {i}: I⊗Z_B,{} ⪰ U†E(I⊗Z_B,{i})EU", i - 1), &lhs.add_scaled(&rhs, -1.0), norms_b[i - 1].max(norms_b[i]));
            checks.residual(format!("step {i}: Z_A,{} = Z_A,{i}", i - 1), u.z_a[i - 1].max_abs_diff(&u.z_a[i]));
        }
    }
    let min_slack = checks.list[first_psd..].iter().filter(|c| c.psd).map(|c| c.value).fold(f64::INFINITY, f64::min);
    checks.residual("Z_A,n = Π_A,1".into(), u.z_a[n].max_abs_diff(&p.pi_a1));
    checks.residual("Z_B,n = Π_B,0".into(), u.z_b[n].max_abs_diff(&p.pi_b0));
    let mut honest = None;
    match honest_run(p) {
        Ok(run) => {
            for (k, f) in run.projection_failures.iter().enumerate() {
                if p.projections.is_some() {
                    checks.residual(format!("honest projection at step {}", k + 1), *f);
                }
            }
            checks.residual("honest agreement".into(), run.disagreement);
            checks.residual("honest P_A + P_B = 1".into(), (run.pa + run.pb - 1.0).abs());
            // ⟨ψ_i|Z_A,i⊗I⊗Z_B,i|ψ_i⟩ must not increase
            let mut prev = f64::INFINITY;
            let mut worst: f64 = 0.0;
            for (i, s) in run.states.iter().enumerate() {
                let za = u.z_a[i].apply_left(s, dm * db);
                let zab = u.z_b[i].apply_right(&za, da * dm);
                let val = s.dot(&zab);
                worst = worst.max(val - prev);
                prev = val;
            }
            let t = checks.tol.psd;
            checks.list.push(ConstraintCheck { name: "certificate chain non-increasing".into(), value: worst, threshold: t, psd: false, ok: worst <= t });
            honest = Some((run.pa, run.pb));
        }
        Err(e) => failures.push(e.to_string()),
    }
    for c in &checks.list {
        if !c.ok {
            failures.push(format!("{}: {:.3e} (threshold {:.3e})", c.name, c.value, c.threshold));
        }
    }
    UbpReport { accepted: failures.is_empty(), beta: u.beta, alpha: u.alpha, min_slack, honest, checks: checks.list, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compile_tdpg, CompileOptions};
    use crate::exactmath::frac;
    use crate::games::{alice_announces, strictify_tdpg};
    use crate::seesaw::random_orthogonal;
    use rand::SeedableRng;

    fn trivial() -> Ubp {
        let g = strictify_tdpg(&alice_announces(), &frac(1, 10)).unwrap();
        compile_tdpg(&g, &CompileOptions::default()).unwrap().ubp
    }

    #[test]
    fn perturbed_bound_fails_eigenvector_check() {
        let mut u = trivial();
        u.beta -= 1e-3;
        let rep = verify_ubp(&u);
        assert!(!rep.accepted);
        assert!(rep.failures.iter().any(|f| f.starts_with("Z_A,0 ψ_A,0")));
    }

    #[test]
    fn random_unitary_breaks_an_odd_step() {
        let mut u = trivial();
        let d = u.protocol.unitaries[0].rows;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        u.protocol.unitaries[0] = SparseMat::from_dense(&random_orthogonal(d, &mut rng));
        let rep = verify_ubp(&u);
        assert!(!rep.accepted);
        let step1 = rep.checks.iter().find(|c| c.name.starts_with("step 1:") && c.psd).unwrap();
        assert!(!step1.ok, "{}", step1.value);
    }

    #[test]
    fn json_round_trip() {
        let u = trivial();
        let back = Ubp::from_json(&u.to_json()).unwrap();
        assert_eq!(back, u);
        assert!(Ubp::from_json(&u.to_json().replace(UBP_SCHEMA, "other/9")).is_err());
    }

    #[test]
    fn readout_only() {
        let p = Protocol {
            dims: [2, 1, 2],
            n: 0,
            psi_a0: vec![0.0, 1.0],
            psi_m0: vec![1.0],
            psi_b0: vec![0.0, 1.0],
            unitaries: vec![],
            projections: None,
            pi_a1: SparseMat::diag(&[0.0, 1.0]),
            pi_b0: SparseMat::diag(&[1.0, 0.0]),
        };
        let r = honest_run(&p).unwrap();
        assert_eq!((r.pa, r.pb, r.disagreement), (0.0, 1.0, 0.0));
        assert_eq!(r.states.len(), 1);
        let mut bad = p.clone();
        bad.psi_a0 = vec![1.0, 1.0];
        assert!(honest_run(&bad).is_err());
    }
}
