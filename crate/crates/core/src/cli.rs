//! Command-line front end: zeta, lift, cup, plan, oracle and check.

use std::io::Write;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::{json, Value};

use crate::error::{Error, EXIT_OK};
use crate::laurent::LaurentSeries;
use crate::model::CurveSpec;
use crate::oracle::{from_spec, oracle_p1};
use crate::padic::ZqElement;
use crate::pairing::{exact_form_pairings, random_poly};
use crate::planner::weil_precision;
use crate::specfile::parse_spec_with;
use crate::zeta::{
    compute_zeta, lift_at_end, plan_ends, Matrix, ZetaError, ZetaOptions, ZetaResult,
};

#[derive(Debug, Parser)]
#[command(
    name = "zetalift",
    version,
    about = "Zeta functions of curves over finite fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Extra p-adic digits on top of the Weil precision.
    #[arg(long, global = true)]
    pub margin: Option<u32>,
    /// Worker threads for per-end and per-pair work.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Extra expansion coefficients beyond the planned depth.
    #[arg(long, global = true)]
    pub depth_guard: Option<i64>,
    /// Print only machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for the randomized checks of `check`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute P1(T) and Z(T).
    Zeta { file: String },
    /// Print the Frobenius image of each variable at each end.
    Lift {
        file: String,
        /// Number of t-exponents shown per series.
        #[arg(long, default_value_t = 12)]
        terms: i64,
    },
    /// Print the pairing matrices M1, M2 and M = M1^-1 M2.
    Cup { file: String },
    /// Print the precision plan.
    Plan { file: String },
    /// Count points by brute force and derive P1(T).
    Oracle { file: String },
    /// Run the pipeline and the oracle and compare.
    Check {
        file: String,
        /// Random exact forms paired against the basis.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

fn read(path: &str) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.into(),
        message: e.to_string(),
    })
}

fn options(spec: &CurveSpec, f: &Flags) -> ZetaOptions {
    ZetaOptions {
        margin: f.margin.unwrap_or(spec.options.margin),
        threads: f.threads,
        depth_guard: f.depth_guard.unwrap_or(spec.options.depth_guard),
        precision_override: None,
    }
}

/// Parses `text` and runs the pipeline, raising the working precision
/// when the plan asks for more than the file provides.
pub fn zeta_from_text(text: &str, flags: &Flags) -> Result<(CurveSpec, ZetaResult), Error> {
    let mut spec = parse_spec_with(text, None)?;
    for _ in 0..4 {
        match compute_zeta(&spec, &options(&spec, flags)) {
            Ok(z) => return Ok((spec, z)),
            Err(ZetaError::PrecisionTooLow { need, .. }) => {
                spec = parse_spec_with(text, Some(need))?
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(Error::Zeta(ZetaError::PrecisionTooLow {
        need: spec.ctx.n_work() + 1,
        have: spec.ctx.n_work(),
    }))
}

fn ints(v: &[BigInt]) -> String {
    v.iter()
        .map(BigInt::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn json_ints(v: &[BigInt]) -> Value {
    Value::Array(
        v.iter()
            .map(|x| x.to_string().parse::<Value>().unwrap_or(Value::Null))
            .collect(),
    )
}

fn poly_text(c: &[BigInt], var: &str) -> String {
    let mut out = String::new();
    for (i, a) in c.iter().enumerate() {
        if a == &BigInt::from(0) {
            continue;
        }
        let mag = a.magnitude().to_string();
        let sign = if a < &BigInt::from(0) { "-" } else { "+" };
        if out.is_empty() {
            if sign == "-" {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        let mono = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        if mono.is_empty() {
            out.push_str(&mag);
        } else if mag == "1" {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{mag}{mono}"));
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

fn matrix_line(m: &Matrix) -> String {
    m.iter()
        .flatten()
        .map(ZqElement::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        m.iter()
            .map(|r| Value::Array(r.iter().map(|c| json!(c.to_string())).collect()))
            .collect(),
    )
}

fn matrix_table(m: &Matrix) -> String {
    m.iter()
        .map(|r| {
            format!(
                "  [{}]",
                r.iter()
                    .map(ZqElement::to_string)
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn field_name(spec: &CurveSpec) -> String {
    format!("F_{}", spec.ctx.q())
}

fn cmd_zeta(file: &str, f: &Flags, out: &mut dyn Write) -> Result<(), Error> {
    let (spec, z) = zeta_from_text(&read(file)?, f)?;
    if f.json {
        let v = json!({
            "command": "zeta",
            "genus": z.genus,
            "q": z.q.to_string(),
            "n": z.n,
            "p1": json_ints(&z.p1),
            "counts": json_ints(&z.counts),
        });
        let _ = writeln!(out, "{v}");
        return Ok(());
    }
    if z.genus == 0 {
        let _ = writeln!(out, "curve of genus 0 over {}", field_name(&spec));
    } else {
        let _ = writeln!(
            out,
            "curve of genus {} over {}, P1 known modulo p^{}",
            z.genus,
            field_name(&spec),
            z.n
        );
    }
    let _ = writeln!(
        out,
        "Z(T) = ({}) / ((1 - T)(1 - {}T))",
        poly_text(&z.p1, "T"),
        z.q
    );
    let _ = writeln!(out, "P1: {}", ints(&z.p1));
    let _ = writeln!(out, "COUNTS: {}", ints(&z.counts));
    Ok(())
}

fn cmd_lift(file: &str, terms: i64, f: &Flags, out: &mut dyn Write) -> Result<(), Error> {
    let spec = parse_spec_with(&read(file)?, None)?;
    let opts = options(&spec, f);
    let n = weil_precision(
        spec.genus.max(1),
        spec.ctx.p(),
        spec.ctx.l() as u32,
        opts.margin,
    )
    .map_err(ZetaError::from)?
    .n
    .min(spec.ctx.n_work());
    let depth = terms.max(1) + 4 * spec.ctx.p() as i64 + opts.depth_guard;
    let mut ends = Vec::new();
    for end in &spec.ends {
        let (_, _, lift, img) = lift_at_end(&spec, &end.label, n, depth)?;
        let mut vars = Vec::new();
        for (name, phi) in spec.names.iter().zip(&img.phi) {
            // from the lowest term through `terms` exponents past the first unit coefficient
            let unit = phi
                .terms()
                .into_iter()
                .find(|(_, c)| c.is_unit())
                .map_or(phi.lo(), |(m, _)| m);
            let shown = if phi.is_zero() {
                phi.clone()
            } else {
                phi.truncate_hi(unit + terms.max(1))
            };
            vars.push((name.clone(), shown.to_string()));
        }
        ends.push((end.label.clone(), lift.iterations, vars));
    }
    if f.json {
        let v: Vec<Value> = ends
            .iter()
            .map(|(l, it, vars)| {
                let m: serde_json::Map<String, Value> =
                    vars.iter().map(|(k, s)| (k.clone(), json!(s))).collect();
                json!({"end": l, "iterations": it, "phi": m})
            })
            .collect();
        let _ = writeln!(out, "{}", json!({"command": "lift", "n": n, "ends": v}));
        return Ok(());
    }
    let _ = writeln!(out, "Frobenius lift modulo p^{n}");
    for (label, it, vars) in ends {
        let _ = writeln!(out, "end {label}: {it} Newton iterations");
        for (name, s) in vars {
            let _ = writeln!(out, "  phi({name}) = {s}");
        }
    }
    Ok(())
}

fn cmd_cup(file: &str, f: &Flags, out: &mut dyn Write) -> Result<(), Error> {
    let (_, z) = zeta_from_text(&read(file)?, f)?;
    if f.json {
        let v = json!({
            "command": "cup",
            "n": z.n,
            "m1": matrix_json(&z.m1),
            "m2": matrix_json(&z.m2),
            "m": matrix_json(&z.m),
        });
        let _ = writeln!(out, "{v}");
        return Ok(());
    }
    let _ = writeln!(out, "pairings modulo p^{}", z.n);
    let _ = writeln!(out, "M1 =\n{}", matrix_table(&z.m1));
    let _ = writeln!(out, "M2 =\n{}", matrix_table(&z.m2));
    let _ = writeln!(out, "M =\n{}", matrix_table(&z.m));
    let _ = writeln!(out, "M1: {}", matrix_line(&z.m1));
    let _ = writeln!(out, "M2: {}", matrix_line(&z.m2));
    let _ = writeln!(out, "M: {}", matrix_line(&z.m));
    Ok(())
}

fn cmd_plan(file: &str, f: &Flags, out: &mut dyn Write) -> Result<(), Error> {
    let spec = parse_spec_with(&read(file)?, None)?;
    let opts = options(&spec, f);
    let zp = weil_precision(spec.genus, spec.ctx.p(), spec.ctx.l() as u32, opts.margin)
        .map_err(ZetaError::from)?;
    let plans = plan_ends(&spec, zp.n, opts.depth_guard)?;
    if f.json {
        let ends: Vec<Value> = plans
            .iter()
            .map(|e| {
                let p = &e.plan;
                json!({
                    "end": e.label,
                    "alpha": e.lift_profile.alpha.to_string(),
                    "beta": e.lift_profile.beta.to_string(),
                    "m_plus": p.m_plus,
                    "m_minus": p.m_minus,
                    "n1": p.n1,
                    "n2": p.n2,
                })
            })
            .collect();
        let _ = writeln!(
            out,
            "{}",
            json!({"command": "plan", "n": zp.n, "margin": opts.margin, "ends": ends})
        );
        return Ok(());
    }
    let _ = writeln!(out, "N={} (+margin {})", zp.n, opts.margin);
    let _ = writeln!(
        out,
        "{:<8} {:>12} {:>12} {:>8} {:>8} {:>4} {:>4}",
        "end", "alpha", "beta", "M-", "M+", "N1", "N2"
    );
    for e in &plans {
        let p = &e.plan;
        let _ = writeln!(
            out,
            "{:<8} {:>12} {:>12} {:>8} {:>8} {:>4} {:>4}",
            e.label,
            e.lift_profile.alpha.to_string(),
            e.lift_profile.beta.to_string(),
            p.m_minus,
            p.m_plus,
            p.n1,
            p.n2
        );
    }
    for e in &plans {
        let _ = writeln!(out, "plan {}: {}", e.label, e.plan);
    }
    Ok(())
}

fn oracle_for(spec: &CurveSpec) -> Result<(Vec<u64>, Vec<BigInt>), Error> {
    let (field, curve) = from_spec(spec);
    Ok(oracle_p1(&field, &curve, spec.genus)?)
}

fn cmd_oracle(file: &str, f: &Flags, out: &mut dyn Write) -> Result<(), Error> {
    let spec = parse_spec_with(&read(file)?, None)?;
    let (counts, p1) = oracle_for(&spec)?;
    let counts: Vec<BigInt> = counts.into_iter().map(BigInt::from).collect();
    if f.json {
        let v = json!({"command": "oracle", "q": spec.ctx.q().to_string(), "counts": json_ints(&counts), "p1": json_ints(&p1)});
        let _ = writeln!(out, "{v}");
        return Ok(());
    }
    let _ = writeln!(
        out,
        "brute-force counts over {} and its extensions",
        field_name(&spec)
    );
    let _ = writeln!(out, "COUNTS: {}", ints(&counts));
    let _ = writeln!(out, "P1: {}", ints(&p1));
    Ok(())
}

/// ⟨dg, ω_i⟩ ≡ 0 for random g, and M1 antisymmetric with unit determinant.
fn random_checks(spec: &CurveSpec, z: &ZetaResult, seed: u64, trials: usize) -> Result<(), Error> {
    let n = z.n.max(1).min(spec.ctx.n_work());
    let depth = 64 + spec.options.depth_guard;
    let xi: Vec<Vec<LaurentSeries>> = spec
        .ends
        .iter()
        .map(|end| end.expansions(depth, n))
        .collect::<Result<_, _>>()
        .map_err(ZetaError::from)?;
    let mut rng = StdRng::seed_from_u64(seed);
    for k in 0..trials {
        let g = random_poly(&spec.ctx, spec.nvars(), 3, n, &mut rng);
        let r = exact_form_pairings(&g, &spec.basis, &xi).map_err(ZetaError::from)?;
        if let Some(i) = r.iter().position(|c| !c.truncate(n).is_zero()) {
            return Err(Error::Property(format!(
                "trial {k}: <dg, w{}> is not 0 for g = {:?}",
                i + 1,
                g
            )));
        }
    }
    let dim = z.m1.len();
    for i in 0..dim {
        for j in 0..dim {
            let s = z.m1[i][j].add(&z.m1[j][i]).map_err(ZetaError::from)?;
            if !s.is_zero() {
                return Err(Error::Property(format!(
                    "M1 is not antisymmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    if dim > 0 {
        let one = crate::zeta::charpoly_berkowitz(&z.m1)?;
        if !one.last().is_some_and(|d| d.is_unit()) {
            return Err(Error::Property("det M1 is not a unit".into()));
        }
    }
    Ok(())
}

fn cmd_check(file: &str, trials: usize, f: &Flags, out: &mut dyn Write) -> Result<(), Error> {
    let (spec, z) = zeta_from_text(&read(file)?, f)?;
    let (counts, want) = oracle_for(&spec)?;
    let seed = f.seed.unwrap_or(0);
    random_checks(&spec, &z, seed, trials)?;
    let ok = z.p1 == want;
    if f.json {
        let v = json!({
            "command": "check",
            "match": ok,
            "pipeline": json_ints(&z.p1),
            "oracle": json_ints(&want),
            "counts": counts,
            "seed": seed,
            "trials": trials,
        });
        let _ = writeln!(out, "{v}");
    } else {
        let _ = writeln!(out, "pipeline P1: {}", ints(&z.p1));
        let _ = writeln!(out, "oracle   P1: {}", ints(&want));
        let _ = writeln!(
            out,
            "randomized checks passed ({trials} trials, seed {seed})"
        );
        let _ = writeln!(out, "{}", if ok { "MATCH" } else { "MISMATCH" });
    }
    if ok {
        Ok(())
    } else {
        Err(Error::Mismatch {
            pipeline: z.p1.iter().map(BigInt::to_string).collect(),
            oracle: want.iter().map(BigInt::to_string).collect(),
        })
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), Error> {
    let f = &cli.flags;
    match &cli.command {
        Command::Zeta { file } => cmd_zeta(file, f, out),
        Command::Lift { file, terms } => cmd_lift(file, *terms, f, out),
        Command::Cup { file } => cmd_cup(file, f, out),
        Command::Plan { file } => cmd_plan(file, f, out),
        Command::Oracle { file } => cmd_oracle(file, f, out),
        Command::Check { file, trials } => cmd_check(file, *trials, f, out),
    }
}

/// Runs the CLI on `args` (program name first); returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                Error::Usage(String::new()).exit_code()
            } else {
                EXIT_OK
            };
            if code == EXIT_OK {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = e.exit_code();
            if cli.flags.json {
                let _ = writeln!(
                    out,
                    "{}",
                    json!({"error": e.kind(), "message": e.to_string(), "exit": code})
                );
            } else {
                let _ = writeln!(out, "ERROR {}: {}", e.kind(), e);
                if matches!(e, Error::Zeta(ZetaError::AmbiguousLift { .. })) {
                    let _ = writeln!(err, "hint: rerun with a larger --margin");
                }
            }
            code
        }
    }
}
