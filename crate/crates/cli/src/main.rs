mod render;
mod suites;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use wrt_core::abelian::{homology_data, linking_form_invariant_in, u1_surgery_invariant_in, Refinement};
use wrt_core::asymptotics::{k_sweep, phase_spectrum, Evaluation, KSweep, Normalization};
use wrt_core::intmat::determinant;
use wrt_core::mtc::{fusion, mtc_for, Family};
use wrt_core::numeric::{Ctx, MIN_PRECISION};
use wrt_core::resurgence::{borel_poles, synthetic_factorial, FormalSeries, STOKES_TOL};
use wrt_core::surgery::{colored_sum, linking_matrix, parse_manifold, rt_invariant_in, PlumbingGraph};
use wrt_core::{Error, HpComplex, Precision};

use render::{complex, embed, exact, float, hp, number, to_pretty};

#[derive(Parser)]
#[command(name = "wrt", version, about = "Reshetikhin-Turaev invariants of plumbed 3-manifolds")]
struct Cli {
    /// Working precision in decimal digits (at least 15).
    #[arg(long, global = true, env = "WRT_PRECISION", default_value_t = 30)]
    precision: u32,

    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Su2,
    U1,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Su2 => Family::Su2,
            FamilyArg::U1 => Family::U1,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormArg {
    Raw,
    S3,
}

#[derive(Args)]
struct Theory {
    #[arg(long, value_enum, default_value_t = FamilyArg::Su2)]
    family: FamilyArg,

    /// Level, or a range a..b where the command accepts one.
    #[arg(short = 'k', long = "k")]
    k: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Modular data of su2_k or u1_k: labels, S, T, twists, kappa, D², fusion.
    MtcTable(Theory),
    /// Evaluate the invariant of a manifold (s3, s1xs2, lens:p,q, seifert:e0;a/b,..., poincare, @file.json).
    Rt {
        manifold: String,
        #[command(flatten)]
        theory: Theory,
    },
    /// U(1) invariants of a plumbing or of a raw matrix file {"matrix": [[...]]}.
    Abelian {
        input: String,
        #[arg(short = 'k', long = "k")]
        k: u32,
    },
    /// Run a self-check suite (or `all`); exits 1 on failure.
    Check {
        suite: String,
        #[command(flatten)]
        theory: Theory,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Z(k) over a window of levels, as CSV (k, Re Z, Im Z) or JSON.
    Sweep {
        manifold: String,
        #[command(flatten)]
        theory: Theory,
        #[arg(long, value_enum, default_value_t = NormArg::Raw)]
        normalization: NormArg,
        /// Evaluate each level exactly instead of from double-precision modular data.
        #[arg(long)]
        exact: bool,
    },
    /// Phase spectrum of a sweep CSV, or of a manifold swept over --k a..b.
    Spectrum {
        input: String,
        #[command(flatten)]
        theory: Theory,
        #[arg(long, value_enum, default_value_t = NormArg::Raw)]
        normalization: NormArg,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Snap peaks to rationals with denominator at most this
        /// (default 4|H_1| for a manifold, 120 for a CSV file).
        #[arg(long)]
        max_den: Option<i64>,
    },
    /// Borel-plane poles of a series file {"coeffs": [[re, im], ...], "variable": "hbar"} or a synthetic series.
    Borel {
        #[arg(long, value_enum, conflicts_with = "series")]
        synthetic: Option<Synthetic>,
        #[arg(long)]
        series: Option<PathBuf>,
        /// Singularity location for --synthetic, as re,im.
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        omega: String,
        #[arg(long, default_value_t = 20)]
        terms: usize,
        /// Chern-Simons values for the Stokes check, e.g. 0,1/120,49/120.
        #[arg(long, allow_hyphen_values = true)]
        cs: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Synthetic {
    Factorial,
}

enum Failure {
    Input(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<String, Failure>;

fn bad(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn single_level(t: &Theory) -> std::result::Result<u32, Failure> {
    let s = t.k.as_deref().ok_or_else(|| bad("this command needs -k"))?;
    let k: u32 = s.parse().map_err(|_| bad(format!("level must be a positive integer, got '{s}'")))?;
    if k == 0 {
        return Err(bad("level must be positive"));
    }
    Ok(k)
}

fn level_range(s: &str) -> std::result::Result<(u32, u32), Failure> {
    let err = || bad(format!("expected a level or a range a..b, got '{s}'"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| err())?, b.trim().trim_start_matches('=').parse().map_err(|_| err())?),
        None => {
            let k = s.trim().parse().map_err(|_| err())?;
            (k, k)
        }
    };
    if a == 0 || b < a {
        return Err(err());
    }
    Ok((a, b))
}

fn read_input(spec: &str) -> std::result::Result<Value, Failure> {
    let path = spec.strip_prefix('@').unwrap_or(spec);
    let text = fs::read_to_string(path).map_err(|e| bad(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| bad(format!("{path}: {e}")))
}

fn raw_matrix(v: &Value) -> Option<std::result::Result<Vec<Vec<i64>>, Failure>> {
    let m = v.get("matrix")?;
    Some(serde_json::from_value(m.clone()).map_err(|e| bad(format!("matrix: {e}"))))
}

fn mtc_table(cli: &Cli, t: &Theory, ctx: &mut Ctx) -> Outcome {
    let k = single_level(t)?;
    let m = mtc_for(t.family.into(), k)?;
    let d2 = embed(&m.total_dim_sq, ctx);
    let d = ctx.sqrt(&d2.re);
    let dinv = HpComplex::from_real(d, ctx).inv(ctx).re;
    let s: Vec<Vec<HpComplex>> = m
        .s_unnorm
        .iter()
        .map(|row| row.iter().map(|x| embed(x, ctx).scale(&dinv, ctx)).collect())
        .collect();
    if cli.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["i", "j", "Re S", "Im S"]).map_err(|e| bad(e.to_string()))?;
        for (i, row) in s.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let (re, im) = x.render(ctx);
                w.write_record([i.to_string(), j.to_string(), re, im]).map_err(|e| bad(e.to_string()))?;
            }
        }
        return Ok(String::from_utf8(w.into_inner().map_err(|e| bad(e.to_string()))?).expect("utf-8 csv"));
    }
    let offset = ctx.unit_root(-1, 8);
    let t_diag: Vec<Value> = m.twists.iter().map(|th| hp(&th.eval_in(ctx).mul(&offset, ctx), ctx)).collect();
    let kappa = m.kappa_unnorm.eval_in(ctx).scale(&dinv, ctx);
    let out = json!({
        "family": m.family,
        "level": m.level,
        "labels": m.labels,
        "root_order": m.root_order,
        "precision": ctx.precision().decimal_digits(),
        "qdims": m.qdims.iter().map(|x| exact(x, ctx)).collect::<Vec<_>>(),
        "twists": m.twists.iter().map(|x| exact(x, ctx)).collect::<Vec<_>>(),
        "s_unnormalized": m.s_unnorm.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "s": s.iter().map(|r| r.iter().map(|x| hp(x, ctx)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "t": t_diag,
        "total_dim_sq": exact(&m.total_dim_sq, ctx),
        "kappa": hp(&kappa, ctx),
        "central_charge": m.central_charge.to_string(),
        "duals": m.duals,
        "fusion": fusion(&m)?,
    });
    Ok(to_pretty(&out))
}

fn rt(cli: &Cli, manifold: &str, t: &Theory, ctx: &mut Ctx) -> Outcome {
    let k = single_level(t)?;
    let family: Family = t.family.into();
    if manifold.starts_with('@') {
        if let Some(b) = raw_matrix(&read_input(manifold)?) {
            let b = b?;
            if family != Family::U1 {
                return Err(bad("raw linking matrices are evaluated with --family u1 only"));
            }
            let z = u1_surgery_invariant_in(&b, k, ctx)?;
            return Ok(rt_output(cli, manifold, family, k, &z, json!({ "matrix": b }), ctx));
        }
    }
    let g = parse_manifold(manifold)?;
    let m = mtc_for(family, k)?;
    let link = linking_matrix(&g)?;
    let f = colored_sum(&m, &g)?;
    let z = rt_invariant_in(&m, &g, ctx)?;
    let meta = json!({
        "signature": link.signature,
        "b1": link.b1,
        "components": link.m,
        "colored_sum": f.to_string(),
        "root_order": f.order(),
        "graph": g,
    });
    Ok(rt_output(cli, manifold, family, k, &z, meta, ctx))
}

fn rt_output(cli: &Cli, manifold: &str, family: Family, k: u32, z: &HpComplex, meta: Value, ctx: &mut Ctx) -> String {
    let (re, im) = z.render(ctx);
    if cli.format == Format::Csv {
        return format!("manifold,family,k,Re Z,Im Z\n\"{manifold}\",{},{k},{re},{im}\n", family_name(family));
    }
    let mut out = json!({
        "manifold": manifold,
        "family": family,
        "level": k,
        "precision": ctx.precision().decimal_digits(),
        "value": [number(&re), number(&im)],
    });
    if let (Value::Object(o), Value::Object(extra)) = (&mut out, meta) {
        o.extend(extra);
    }
    to_pretty(&out)
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Su2 => "su2",
        Family::U1 => "u1",
    }
}

fn abelian(input: &str, k: u32, ctx: &mut Ctx) -> Outcome {
    let b = match input.starts_with('@').then(|| read_input(input)).transpose()?.as_ref().and_then(raw_matrix) {
        Some(b) => b?,
        None => linking_matrix(&parse_manifold(input)?)?.matrix,
    };
    let h = homology_data(&b, k)?;
    let zl = linking_form_invariant_in(&b, k, Refinement::default(), ctx)?;
    let zs = u1_surgery_invariant_in(&b, k, ctx)?;
    let out = json!({
        "input": input,
        "level": k,
        "matrix": b,
        "homology": h,
        "linking_form_invariant": hp(&zl, ctx),
        "u1_surgery_invariant": hp(&zs, ctx),
    });
    Ok(to_pretty(&out))
}

fn check(cli: &Cli, suite: &str, t: &Theory, seed: u64, prec: Precision) -> Outcome {
    let opts = suites::SuiteOptions {
        family: t.family.into(),
        levels: t.k.as_deref().map(level_range).transpose()?,
        precision: prec,
        seed,
    };
    let names: Vec<&str> = if suite == "all" { suites::SUITES.to_vec() } else { vec![suite] };
    let mut reports = Vec::new();
    for name in names {
        reports.push(suites::run(name, &opts)?);
    }
    let text = match cli.format {
        Format::Json => to_pretty(&serde_json::to_value(&reports).expect("reports serialize")),
        Format::Csv => {
            let mut s = String::from("suite,passed,total,ok\n");
            for r in &reports {
                s.push_str(&format!("{},{},{},{}\n", r.suite, r.passed, r.total, r.ok()));
            }
            s
        }
    };
    for r in &reports {
        eprint!("{}", r.text());
    }
    if reports.iter().all(|r| r.ok()) {
        Ok(text)
    } else {
        emit(cli, &text)?;
        Err(Failure::Check(format!(
            "failing suites: {}",
            reports.iter().filter(|r| !r.ok()).map(|r| r.suite.as_str()).collect::<Vec<_>>().join(", ")
        )))
    }
}

fn sweep_of(manifold: &str, t: &Theory, norm: NormArg, eval: Evaluation) -> std::result::Result<KSweep, Failure> {
    let (a, b) = level_range(t.k.as_deref().ok_or_else(|| bad("sweeps need --k a..b"))?)?;
    let g: PlumbingGraph = parse_manifold(manifold)?;
    let norm = match norm {
        NormArg::Raw => Normalization::Raw,
        NormArg::S3 => Normalization::DividedByS3,
    };
    Ok(k_sweep(t.family.into(), &g, a, b, norm, eval)?)
}

fn sweep_json(s: &KSweep) -> String {
    let rows: Vec<Value> = s
        .k_values
        .iter()
        .zip(&s.values)
        .map(|(k, z)| json!({ "k": k, "re": float(z.re), "im": float(z.im) }))
        .collect();
    to_pretty(&json!({
        "family": s.family,
        "normalization": s.normalization,
        "graph": s.manifold,
        "rows": rows,
    }))
}

const CSV_SNAP_DEN: i64 = 120;

fn spectrum(input: &str, t: &Theory, norm: NormArg, threshold: f64, max_den: Option<i64>) -> Outcome {
    let (sweep, default_den) = if Path::new(input).is_file() && !input.ends_with(".json") {
        let text = fs::read_to_string(input)?;
        let norm = match norm {
            NormArg::Raw => Normalization::Raw,
            NormArg::S3 => Normalization::DividedByS3,
        };
        (KSweep::from_csv(&text, PlumbingGraph::empty(), t.family.into(), norm)?, Some(CSV_SNAP_DEN))
    } else {
        let g = parse_manifold(input)?;
        let det = determinant(&linking_matrix(&g)?.matrix);
        let den = i64::try_from(det.magnitude()).ok().filter(|&d| d > 0).map(|d| 4 * d);
        (sweep_of(input, t, norm, Evaluation::Numeric)?, den)
    };
    if !(0.0..=1.0).contains(&threshold) {
        return Err(bad("threshold must lie in [0, 1]"));
    }
    let sp = phase_spectrum(&sweep, threshold, max_den.or(default_den))?;
    Ok(sp.to_json() + "\n")
}

fn parse_cs(s: &str) -> std::result::Result<Vec<f64>, Failure> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            let x = x.trim();
            let v = match x.split_once('/') {
                Some((a, b)) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()).map(|(a, b)| a / b),
                None => x.parse().ok(),
            };
            v.filter(|v| v.is_finite()).ok_or_else(|| bad(format!("bad CS value '{x}'")))
        })
        .collect()
}

fn borel(synthetic: Option<Synthetic>, series: Option<&Path>, omega: &str, terms: usize, cs: Option<&str>) -> Outcome {
    let s = match (synthetic, series) {
        (Some(Synthetic::Factorial), _) => {
            let (re, im) = omega.split_once(',').ok_or_else(|| bad("--omega expects re,im"))?;
            let w = Complex64::new(
                re.trim().parse().map_err(|_| bad("bad --omega"))?,
                im.trim().parse().map_err(|_| bad("bad --omega"))?,
            );
            if w.norm() == 0.0 {
                return Err(bad("--omega must be nonzero"));
            }
            synthetic_factorial(terms, w)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str::<FormalSeries>(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?
        }
        (None, None) => return Err(bad("borel needs --synthetic or --series")),
    };
    let report = borel_poles(&s, terms.min(s.len()))?;
    let report = match cs {
        Some(cs) => report.with_matches(&parse_cs(cs)?, STOKES_TOL),
        None => report,
    };
    let mut v: Value = serde_json::from_str(&report.to_json()).expect("report json");
    // re-emit floats in shortest round-trip form
    if let Some(poles) = v.get_mut("poles").and_then(Value::as_array_mut) {
        for (p, pole) in poles.iter_mut().zip(&report.poles) {
            p["loc"] = complex(pole.loc);
            p["residue"] = complex(pole.residue);
        }
    }
    Ok(to_pretty(&v))
}

fn emit(cli: &Cli, text: &str) -> std::result::Result<(), Failure> {
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| bad(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    if cli.precision < MIN_PRECISION {
        return Err(bad(format!("precision must be at least {MIN_PRECISION} digits")));
    }
    let prec = Precision::digits(cli.precision);
    let mut ctx = Ctx::new(prec);
    match &cli.command {
        Command::MtcTable(t) => mtc_table(cli, t, &mut ctx),
        Command::Rt { manifold, theory } => rt(cli, manifold, theory, &mut ctx),
        Command::Abelian { input, k } => abelian(input, *k, &mut ctx),
        Command::Check { suite, theory, seed } => check(cli, suite, theory, *seed, prec),
        Command::Sweep { manifold, theory, normalization, exact } => {
            let eval = if *exact { Evaluation::Exact(prec) } else { Evaluation::Numeric };
            let s = sweep_of(manifold, theory, *normalization, eval)?;
            Ok(match cli.format {
                Format::Csv => s.to_csv(),
                Format::Json => sweep_json(&s),
            })
        }
        Command::Spectrum { input, theory, normalization, threshold, max_den } => {
            spectrum(input, theory, *normalization, *threshold, *max_den)
        }
        Command::Borel { synthetic, series, omega, terms, cs } => {
            borel(*synthetic, series.as_deref(), omega, *terms, cs.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("wrt: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli).and_then(|text| emit(&cli, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("wrt: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("wrt: {msg}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!(level_range("3").ok(), Some((3, 3)));
        assert_eq!(level_range("2..40").ok(), Some((2, 40)));
        assert_eq!(level_range("2..=40").ok(), Some((2, 40)));
        assert!(level_range("0..4").is_err());
        assert!(level_range("5..4").is_err());
        assert!(level_range("x").is_err());
    }

    #[test]
    fn cs_lists() {
        let v = parse_cs("0, 1/120,-49/120,0.25").ok().unwrap();
        assert_eq!(v, vec![0.0, 1.0 / 120.0, -49.0 / 120.0, 0.25]);
        assert!(parse_cs("1/0").is_err());
        assert!(parse_cs("a").is_err());
    }
}
