//! Browser bindings. Every call returns a JSON string; failures come back as `{"error": ...}`.

use pointgame::ddb::{ddb_dual_bound_pb, ddb_dual_certificate_check, ddb_recursion, DdbGame};
use pointgame::exactmath::{format_rational, parse_rational, to_f64, Rational};
use pointgame::games::verify_tipg;
use pointgame::ladders::{bias_sixth_delta, build_bias_sixth_tipg, check_family_feasibility, continuum_cutoff, FamilyParams};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest ladder the page will build.
pub const MAX_GAMMA: u32 = 2000;

fn reply(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

fn rat(s: &str) -> Result<Rational, String> {
    parse_rational(s.trim()).map_err(|e| e.to_string())
}

fn exact(r: &Rational) -> Value {
    json!({ "exact": format_rational(r), "approx": to_f64(r) })
}

/// Builds and verifies the truncated bias-1/6 ladder with `Γ` rungs.
#[wasm_bindgen]
pub fn sixth(gamma: u32) -> String {
    reply((|| {
        if gamma > MAX_GAMMA {
            return Err(format!("Γ is capped at {MAX_GAMMA} here"));
        }
        let t = build_bias_sixth_tipg(gamma as u64).map_err(|e| e.to_string())?;
        let rep = verify_tipg(&t);
        let (b, a) = rep.final_point.clone().ok_or("no final point")?;
        Ok(json!({
            "gamma": gamma,
            "delta": exact(&bias_sixth_delta(gamma as u64)),
            "accepted": rep.accepted,
            "final_point": [exact(&b), exact(&a)],
            "bias": rep.bias.as_ref().map(exact),
            "points": t.h.len() + t.v.len(),
        }))
    })())
}

/// Exact feasibility of family parameters `(k, ε, Γ, z*)`.
#[wasm_bindgen]
pub fn family_check(k: u32, eps: &str, gamma: u32, zstar: &str) -> String {
    reply((|| {
        let p = FamilyParams::new(k, rat(eps)?, gamma as u64, rat(zstar)?);
        p.validate().map_err(|e| e.to_string())?;
        let feasible = check_family_feasibility(&p).map_err(|e| e.to_string())?;
        let cutoff = continuum_cutoff(k).map_err(|e| e.to_string())?;
        Ok(json!({
            "feasible": feasible,
            "ratio": p.feasibility_ratio_f64(),
            "limit": exact(&cutoff),
            "zstar": exact(&p.zstar),
        }))
    })())
}

/// Recursions, dual bound and certificate for comma-separated `p₁..pₙ`.
#[wasm_bindgen]
pub fn ddb(p: &str) -> String {
    reply((|| {
        let ps = p.split(',').map(rat).collect::<Result<Vec<_>, _>>()?;
        let g = DdbGame::new(ps).map_err(|e| e.to_string())?;
        let rec = ddb_recursion(&g);
        let rows: Vec<Value> = (0..=g.n())
            .map(|i| json!({ "i": i, "pa": format_rational(&rec.pa[i]), "pb": format_rational(&rec.pb[i]), "pu": format_rational(&rec.pu[i]) }))
            .collect();
        let fair = g.is_fair();
        let (bound, cert) = if fair {
            let u0 = ddb_dual_bound_pb(&g).map_err(|e| e.to_string())?;
            let c = ddb_dual_certificate_check(&g).map_err(|e| e.to_string())?;
            (Some(exact(&u0)), Some(c.accepted))
        } else {
            (None, None)
        };
        Ok(json!({ "fair": fair, "recursion": rows, "u0": bound, "certificate": cert }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn sixth_slider_values() {
        let v = parse(sixth(100));
        assert_eq!(v["accepted"], true);
        assert_eq!(v["final_point"][0]["exact"], "202/299");
        assert_eq!(v["delta"]["exact"], "8/299");
        assert!(parse(sixth(3))["error"].is_string());
        assert!(parse(sixth(MAX_GAMMA + 1))["error"].is_string());
    }

    #[test]
    fn family_and_ddb() {
        let v = parse(family_check(1, "23/300", 64, "23/30"));
        assert_eq!(v["feasible"], true);
        assert_eq!(v["limit"]["exact"], "2/3");
        let v = parse(ddb("1/3, 3/4, 1"));
        assert_eq!(v["u0"]["exact"], "2/3");
        assert_eq!(v["certificate"], true);
        let v = parse(ddb("1/3,2/3,1"));
        assert_eq!(v["fair"], false);
        assert!(v["u0"].is_null());
        assert!(parse(ddb("x"))["error"].is_string());
    }
}
