use crate::{Budget, Command, Global};
use pointgame::compiler::{
    cheat_seesaw, compile_tdpg, frame_distance, projections_to_unitary, ubp_to_tdpg, verify_ubp, Cheater, CompileOptions, Ubp,
};
use pointgame::ddb::{ddb_dual_bound_pb, ddb_dual_certificate_check, ddb_primal_seesaw_pb, ddb_recursion, DdbGame};
use pointgame::exactmath::{format_rational, parse_rational, to_f64, Rational};
use pointgame::games::{strict_failures, strictify_tdpg, tdpg_to_tipg, tipg_to_tdpg, verify_tdpg, verify_tipg, GameDoc, GameReport, Tdpg, Tipg};
use pointgame::ladders::{
    bias_sixth_delta, build_bias_sixth_tipg, build_family_tipg, check_family_feasibility, search_family_params, FamilyParams, SearchBudget,
};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

pub struct Failure {
    pub code: u8,
    pub message: String,
}

type Res<T> = Result<T, Failure>;

impl From<pointgame::Error> for Failure {
    fn from(e: pointgame::Error) -> Self {
        use pointgame::Error::*;
        let code = match e {
            Rejected(_) | NoConvergence(_) => 1,
            Input(_) | Precondition(_) | Parse(_) => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure { code: 2, message: msg.into() })
}

fn context(step: &str) -> impl Fn(pointgame::Error) -> Failure + '_ {
    move |e| {
        let f = Failure::from(e);
        Failure { code: f.code, message: format!("{step}: {}", f.message) }
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).or_else(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Res<GameDoc> {
    Ok(GameDoc::from_json(&read(path)?)?)
}

fn load_tdpg(path: &Path) -> Res<Tdpg> {
    match load(path)? {
        GameDoc::Tdpg(g) => Ok(g),
        GameDoc::Tipg(_) => usage(format!("{} holds a TIPG, expected a TDPG", path.display())),
    }
}

fn rat(s: &str) -> Res<Rational> {
    Ok(parse_rational(s.trim())?)
}

fn point(p: &Option<(Rational, Rational)>) -> Value {
    match p {
        Some((b, a)) => json!([format_rational(b), format_rational(a)]),
        None => Value::Null,
    }
}

fn human(rep: &GameReport) -> String {
    let mut s = String::from(if rep.accepted { "ACCEPTED\n" } else { "REJECTED\n" });
    if let Some((b, a)) = &rep.final_point {
        let _ = writeln!(s, "final point: ({}, {})", format_rational(b), format_rational(a));
    }
    if let Some(b) = &rep.bias {
        let _ = writeln!(s, "bias: {} (~{:.6})", format_rational(b), to_f64(b));
    }
    let t = &rep.transitions;
    let _ = writeln!(s, "transitions: {} horizontal, {} vertical, {} either", t.horizontal, t.vertical, t.both);
    for f in &rep.failures {
        let _ = writeln!(s, "failure at {}: {}", f.at, f.detail);
    }
    s
}

/// Writes a generated document to `-o` or stdout; the report then goes to stderr.
struct Out<'a> {
    g: &'a Global,
}

impl Out<'_> {
    fn doc(&self, text: &str) -> Res<()> {
        match &self.g.output {
            Some(p) => std::fs::write(p, format!("{text}\n")).or_else(|e| usage(format!("cannot write {}: {e}", p.display()))),
            None => {
                out(&format!("{text}\n"));
                Ok(())
            }
        }
    }

    fn report(&self, v: Value, text: &str, doc_on_stdout: bool) {
        let body = if self.g.json { serde_json::to_string_pretty(&v).expect("report serializes") } else { text.trim_end().to_string() };
        if doc_on_stdout && self.g.output.is_none() {
            eprintln!("{body}");
        } else {
            out(&format!("{body}\n"));
        }
    }
}

/// Stdout write that tolerates a closed pipe.
pub fn out(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

fn code(ok: bool) -> u8 {
    if ok {
        0
    } else {
        1
    }
}

fn budget(b: Budget) -> SearchBudget {
    SearchBudget { max_j0: b.max_j0, max_gamma: b.max_gamma }
}

fn with_header(mut v: Value, header: Value) -> String {
    v["header"] = header;
    serde_json::to_string(&v).expect("document serializes")
}

pub fn run(g: &Global, cmd: Command) -> Res<u8> {
    let out = Out { g };
    match cmd {
        Command::VerifyTdpg { file, strict } => {
            let game = load_tdpg(&file)?;
            let rep = verify_tdpg(&game);
            let strict_fail = if strict { Some(strict_failures(&game)?) } else { None };
            let ok = rep.accepted && strict_fail.as_ref().is_none_or(|f| f.is_empty());
            let mut text = human(&rep);
            for f in strict_fail.iter().flatten() {
                let _ = writeln!(text, "not strict at {}: {}", f.at, f.detail);
            }
            if rep.accepted && !ok {
                text = text.replacen("ACCEPTED", "REJECTED (not strict)", 1);
            }
            out.report(json!({"command": "verify-tdpg", "accepted": ok, "report": rep, "strict_failures": strict_fail}), &text, false);
            Ok(code(ok))
        }
        Command::VerifyTipg { file } => {
            let t = match load(&file)? {
                GameDoc::Tipg(t) => t,
                GameDoc::Tdpg(_) => return usage(format!("{} holds a TDPG, expected a TIPG", file.display())),
            };
            let rep = verify_tipg(&t);
            out.report(json!({"command": "verify-tipg", "accepted": rep.accepted, "report": rep}), &human(&rep), false);
            Ok(code(rep.accepted))
        }
        Command::GenSixth { gamma } => {
            let t = build_bias_sixth_tipg(gamma)?;
            let rep = verify_tipg(&t);
            let delta = bias_sixth_delta(gamma);
            out.doc(&with_header(json!(t), json!({"generator": "sixth", "gamma": gamma, "delta": format_rational(&delta)})))?;
            let text = format!("gamma = {gamma}, delta = {}\n{}", format_rational(&delta), human(&rep));
            out.report(json!({"command": "gen-sixth", "gamma": gamma, "delta": format_rational(&delta), "accepted": rep.accepted, "final_point": point(&rep.final_point)}), &text, true);
            Ok(code(rep.accepted))
        }
        Command::GenFamily { k, gap, eps, gamma, zstar, budget: b } => {
            let gap = rat(&gap)?;
            let params = match (eps, gamma, zstar) {
                (Some(e), Some(gm), Some(z)) => {
                    let p = FamilyParams::new(k, rat(&e)?, gm, rat(&z)?);
                    p.validate()?;
                    if !check_family_feasibility(&p)? {
                        return Err(Failure { code: 1, message: "family parameters are infeasible".into() });
                    }
                    p
                }
                (None, None, None) => search_family_params(k, &gap, budget(b))?.params,
                _ => return usage("give all of --eps, --gamma and --zstar, or none of them"),
            };
            let fam = build_family_tipg(&params)?;
            let t = fam.to_tipg();
            let rep = verify_tipg(&t);
            out.doc(&with_header(json!(t), json!({"generator": "family", "params": params, "gap": format_rational(&gap)})))?;
            let text = format!(
                "k = {k}, z* = {}, eps = {}, gamma = {}\n{}",
                format_rational(&params.zstar),
                format_rational(&params.eps),
                params.gamma,
                human(&rep)
            );
            out.report(json!({"command": "gen-family", "params": params, "accepted": rep.accepted, "final_point": point(&rep.final_point)}), &text, true);
            Ok(code(rep.accepted))
        }
        Command::SearchFamily { k, gap, budget: b } => {
            let o = search_family_params(k, &rat(&gap)?, budget(b))?;
            let p = &o.params;
            let text = format!(
                "k = {k}: z* = {} (~{:.6}), eps = {}, gamma = {} after {} candidates",
                format_rational(&p.zstar),
                to_f64(&p.zstar),
                format_rational(&p.eps),
                p.gamma,
                o.trace.len()
            );
            out.report(json!({"command": "search-family", "params": p, "trace": o.trace}), &text, false);
            Ok(0)
        }
        Command::Convert { file, to, eps } => {
            let eps = rat(&eps)?;
            let (text, rep) = match (load(&file)?, to.as_deref()) {
                (GameDoc::Tdpg(d), None | Some("tipg")) => {
                    let t = tdpg_to_tipg(&d)?;
                    (serde_json::to_string(&t).expect("serializes"), verify_tipg(&t))
                }
                (GameDoc::Tipg(t), None | Some("tdpg")) => {
                    let d = tipg_to_tdpg(&t, &eps)?;
                    (serde_json::to_string(&d).expect("serializes"), verify_tdpg(&d))
                }
                (GameDoc::Tdpg(d), Some("strict")) => {
                    let s = strictify_tdpg(&d, &eps)?;
                    (serde_json::to_string(&s).expect("serializes"), verify_tdpg(&s))
                }
                (_, Some(t)) => return usage(format!("cannot convert this document to {t}")),
            };
            out.doc(&text)?;
            out.report(json!({"command": "convert", "accepted": rep.accepted, "final_point": point(&rep.final_point)}), &human(&rep), true);
            Ok(code(rep.accepted))
        }
        Command::Compile { file, lambda0, flags } => {
            let game = load_tdpg(&file)?;
            let opts = CompileOptions { seed: g.seed, lambda0, ..CompileOptions::default() };
            let c = compile_tdpg(&game, &opts)?;
            let mut ubp = c.ubp;
            if let Some(e) = flags {
                ubp = projections_to_unitary(&ubp, e)?;
            }
            if let Some(t) = g.tol {
                ubp.tolerances.psd = t;
            }
            let rep = verify_ubp(&ubp);
            out.doc(&ubp.to_json())?;
            let p = &ubp.protocol;
            let text = format!(
                "compiled {} steps, dims {:?}, {} lines\nbound (beta, alpha) = ({:.12}, {:.12})\n{}",
                p.n,
                p.dims,
                c.lines.len(),
                ubp.beta,
                ubp.alpha,
                rep
            );
            out.report(
                json!({"command": "compile", "n": p.n, "dims": p.dims, "beta": ubp.beta, "alpha": ubp.alpha, "lines": c.lines, "verification": rep}),
                &text,
                true,
            );
            Ok(code(rep.accepted))
        }
        Command::VerifyUbp { file, extract, cheat, iters } => {
            let mut u = Ubp::from_json(&read(&file)?)?;
            if let Some(t) = g.tol {
                u.tolerances.psd = t;
            }
            let rep = verify_ubp(&u);
            let mut ok = rep.accepted;
            let mut text = rep.to_string();
            let mut v = json!({"command": "verify-ubp", "report": rep});
            if extract {
                let rec = ubp_to_tdpg(&u, u.tolerances.cluster)?;
                ok &= rec.report.accepted;
                let _ = write!(text, "recovered game ({} frames, rationalization error {:.1e}):\n{}", rec.float_frames.len(), rec.rationalization_error, human(&rec.report));
                v["recovered"] = json!(rec);
            }
            if cheat {
                let pb = cheat_seesaw(&u.protocol, Cheater::Bob, 4, iters, g.seed)?;
                let pa = cheat_seesaw(&u.protocol, Cheater::Alice, 4, iters, g.seed)?;
                let fine = pb <= u.beta + 1e-6 && pa <= u.alpha + 1e-6;
                ok &= fine;
                let _ = writeln!(text, "see-saw cheating: P_B >= {pb:.9} (beta {:.9}), P_A >= {pa:.9} (alpha {:.9}){}", u.beta, u.alpha, if fine { "" } else { " EXCEEDS BOUND" });
                v["seesaw"] = json!({"pb": pb, "pa": pa, "within_bound": fine});
            }
            v["accepted"] = json!(ok);
            out.report(v, &text, false);
            Ok(code(ok))
        }
        Command::Ddb { p, report, seesaw, iters, mem } => {
            let ps = p.iter().map(|s| rat(s)).collect::<Res<Vec<_>>>()?;
            let game = DdbGame::new(ps)?;
            let rec = ddb_recursion(&game);
            let fair = game.is_fair();
            let bound = ddb_dual_bound_pb(&game)?;
            let cert = ddb_dual_certificate_check(&game)?;
            let mut ok = cert.accepted;
            let mut text = String::new();
            let ps: Vec<String> = game.p().iter().map(format_rational).collect();
            let _ = writeln!(text, "p = ({})", ps.join(", "));
            if report {
                let _ = writeln!(text, "{:>3}  {:>14}  {:>14}  {:>14}", "i", "P_A(i)", "P_B(i)", "P_U(i)");
                for i in 0..=game.n() {
                    let _ = writeln!(text, "{i:>3}  {:>14}  {:>14}  {:>14}", format_rational(&rec.pa[i]), format_rational(&rec.pb[i]), format_rational(&rec.pu[i]));
                }
            }
            let _ = writeln!(text, "fair: {fair}");
            let _ = writeln!(text, "dual bound on P_B*: u0 = {} (~{:.12})", format_rational(&bound), to_f64(&bound));
            let _ = writeln!(text, "certificate: {}", if cert.accepted { "accepted" } else { "rejected" });
            for f in &cert.failures {
                let _ = writeln!(text, "  {f}");
            }
            let table: Vec<Value> = (0..=game.n())
                .map(|i| json!({"i": i, "pa": format_rational(&rec.pa[i]), "pb": format_rational(&rec.pb[i]), "pu": format_rational(&rec.pu[i])}))
                .collect();
            let mut v = json!({"command": "ddb", "p": ps, "fair": fair, "u0": format_rational(&bound), "certificate": cert, "recursion": table});
            if seesaw {
                let s = ddb_primal_seesaw_pb(&game, iters, g.seed, mem)?;
                let within = s.value <= to_f64(&bound) + 1e-6;
                ok &= within;
                let _ = writeln!(text, "see-saw lower bound (mem {mem}): {:.12}{}", s.value, if within { "" } else { " EXCEEDS DUAL BOUND" });
                v["seesaw"] = json!({"mem": mem, "result": s, "within_bound": within});
            }
            v["accepted"] = json!(ok);
            out.report(v, &text, false);
            Ok(code(ok))
        }
        Command::Roundtrip { file, eps } => roundtrip(&out, g, &file, &rat(&eps)?),
    }
}

fn roundtrip(out: &Out<'_>, g: &Global, file: &Path, eps: &Rational) -> Res<u8> {
    let mut steps: Vec<Value> = vec![];
    let mut text = String::new();
    let mut log = |step: &str, ok: bool, detail: String| {
        let _ = writeln!(text, "{step:<11} {} {detail}", if ok { "ok  " } else { "FAIL" });
        steps.push(json!({"step": step, "ok": ok, "detail": detail}));
        ok
    };
    let mut ok = true;
    let tdpg = match load(file)? {
        GameDoc::Tdpg(d) => d,
        GameDoc::Tipg(t) => {
            let rep = verify_tipg(&t);
            ok &= log("verify-tipg", rep.accepted, format!("final point {}", rep.final_point_string().unwrap_or_default()));
            tipg_to_tdpg(&t, eps).map_err(context("convert"))?
        }
    };
    let rep = verify_tdpg(&tdpg);
    ok &= log("verify", rep.accepted, rep.final_point_string().unwrap_or_default());
    let tipg: Tipg = tdpg_to_tipg(&tdpg).map_err(context("convert"))?;
    let trep = verify_tipg(&tipg);
    ok &= log("convert", trep.accepted && trep.final_point == rep.final_point, format!("TIPG final point {}", trep.final_point_string().unwrap_or_default()));
    let strict = strictify_tdpg(&tdpg, eps).map_err(context("strictify"))?;
    let srep = verify_tdpg(&strict);
    let sfail = strict_failures(&strict).map_err(context("strictify"))?;
    ok &= log("strictify", srep.accepted && sfail.is_empty(), srep.final_point_string().unwrap_or_default());
    if ok {
        let c = compile_tdpg(&strict, &CompileOptions { seed: g.seed, ..CompileOptions::default() }).map_err(context("compile"))?;
        let mut ubp = c.ubp;
        if let Some(t) = g.tol {
            ubp.tolerances.psd = t;
        }
        log("compile", true, format!("{} steps, dims {:?}", ubp.protocol.n, ubp.protocol.dims));
        let urep = verify_ubp(&ubp);
        ok &= log("verify-ubp", urep.accepted, format!("bound ({:.9}, {:.9}), min slack {:.1e}", urep.beta, urep.alpha, urep.min_slack));
        let rec = ubp_to_tdpg(&ubp, ubp.tolerances.cluster).map_err(context("extract"))?;
        let frames = strict.explicit_frames().map_err(context("extract"))?;
        let dist = if rec.float_frames.len() == frames.len() {
            rec.float_frames.iter().zip(&frames).map(|(f, e)| frame_distance(f, e)).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        ok &= log("extract", rec.report.accepted && dist <= 1e-6 && rec.report.final_point == srep.final_point, format!("frame distance {dist:.1e}, final point {}", rec.report.final_point_string().unwrap_or_default()));
    }
    out.report(json!({"command": "roundtrip", "accepted": ok, "steps": steps}), &text, false);
    Ok(code(ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pointgame::Error;

    #[test]
    fn error_kinds_map_to_exit_codes() {
        let c = |e: Error| Failure::from(e).code;
        assert_eq!(c(Error::Rejected("x".into())), 1);
        assert_eq!(c(Error::NoConvergence("x".into())), 1);
        assert_eq!(c(Error::Input("x".into())), 2);
        assert_eq!(c(Error::Precondition("x".into())), 2);
        assert_eq!(c(Error::Parse("x".into())), 2);
        let f = context("compile")(Error::Precondition("not strict".into()));
        assert!(f.message.starts_with("compile: "));
    }
}
