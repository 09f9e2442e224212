//! Self-check suites behind `wrt check`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use wrt_core::abelian::calibrate;
use wrt_core::cyclo::cyclo_eq;
use wrt_core::mtc::{check_modular, fusion, mtc_for, verlinde_dim, Family, MtcData};
use wrt_core::resurgence::{borel_poles, synthetic_factorial};
use wrt_core::rootsys::{global_scalar, kac_peterson_s, root_system_a, su2_closed_form_s, unitarity_defect};
use wrt_core::surgery::{
    blow_down, colored_sum, lens_closed_form, lens_graph, rt_invariant, stabilize, PlumbingGraph, Vertex,
};
use wrt_core::{Precision, Result};

pub const SUITES: &[&str] = &[
    "modular", "verlinde", "fusion", "kirby", "kac-peterson", "canonical", "lens", "abelian", "borel",
];

#[derive(Debug, Default, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: usize,
    pub total: usize,
    pub rows: Vec<String>,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport { suite: suite.to_string(), ..Default::default() }
    }

    fn record(&mut self, ok: bool, row: String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(row.clone());
        }
        self.rows.push(row);
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.total > 0
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out.push_str(&format!(
            "{}: {} {}/{}\n",
            self.suite,
            if self.ok() { "PASS" } else { "FAIL" },
            self.passed,
            self.total
        ));
        out
    }
}

pub struct SuiteOptions {
    pub family: Family,
    pub levels: Option<(u32, u32)>,
    pub precision: Precision,
    pub seed: u64,
}

impl SuiteOptions {
    fn levels(&self, default: (u32, u32)) -> Vec<u32> {
        let (a, b) = self.levels.unwrap_or(default);
        (a..=b).filter(|k| self.family == Family::Su2 || k % 2 == 0).collect()
    }
}

pub fn run(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    match name {
        "modular" => modular(opts),
        "verlinde" => verlinde(opts),
        "fusion" => fusion_suite(opts),
        "kirby" => kirby(opts),
        "kac-peterson" => kac_peterson(opts),
        "canonical" => canonical(opts),
        "lens" => lens(opts),
        "abelian" => abelian(opts),
        "borel" => borel(),
        other => Err(wrt_core::Error::BadSpec(format!(
            "unknown suite '{other}'; expected one of {} or all",
            SUITES.join(", ")
        ))),
    }
}

fn modular(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("modular");
    rep.rows.push(format!("{:>4} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}", "k", "unitary", "symmetric", "S^4", "(ST)^3", "|kappa|", "arg kappa"));
    for k in opts.levels((1, 16)) {
        let r = check_modular(&mtc_for(opts.family, k)?);
        let ok = r.passes(1e-9);
        rep.record(
            ok,
            format!(
                "{k:>4} {:>10.1e} {:>10.1e} {:>10.1e} {:>10.1e} {:>10.1e} {:>10.1e}",
                r.unitarity_defect, r.symmetry_defect, r.s4_defect, r.st3_residual, r.kappa_abs_defect, r.kappa_arg_defect
            ),
        );
    }
    Ok(rep)
}

/// Genus-g dimension as Tr W^{g−1} with the handle operator W = Σ_a N_a N_{a*}.
fn genus_trace(m: &MtcData, n: &[Vec<Vec<i64>>], genus: u32) -> i64 {
    if genus == 0 {
        return 1;
    }
    let r = m.rank();
    let mut w = vec![vec![0i64; r]; r];
    for a in 0..r {
        for i in 0..r {
            for j in 0..r {
                w[i][j] += (0..r).map(|l| n[a][i][l] * n[m.duals[a]][l][j]).sum::<i64>();
            }
        }
    }
    let mut p: Vec<Vec<i64>> = (0..r).map(|i| (0..r).map(|j| (i == j) as i64).collect()).collect();
    for _ in 1..genus {
        p = (0..r).map(|i| (0..r).map(|j| (0..r).map(|l| p[i][l] * w[l][j]).sum()).collect()).collect();
    }
    (0..r).map(|i| p[i][i]).sum()
}

fn verlinde(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("verlinde");
    rep.rows.push(format!("{:>4} {:>3} {:>14} {:>14}", "k", "g", "verlinde", "fusion trace"));
    for k in opts.levels((1, 16)) {
        let m = mtc_for(opts.family, k)?;
        let n = fusion(&m)?;
        for g in 0..=3 {
            let v = verlinde_dim(&m, g)?;
            let t = genus_trace(&m, &n, g);
            rep.record(v == t, format!("{k:>4} {g:>3} {v:>14} {t:>14}"));
        }
    }
    Ok(rep)
}

fn fusion_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("fusion");
    for k in opts.levels((1, 12)) {
        let m = mtc_for(opts.family, k)?;
        let n = fusion(&m)?;
        let r = m.rank() as i64;
        let mut bad = 0;
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    let oracle = match opts.family {
                        Family::Su2 => {
                            let kk = k as i64;
                            ((a - b).abs() <= c && c <= (a + b).min(2 * kk - a - b) && (a + b + c) % 2 == 0) as i64
                        }
                        Family::U1 => ((a + b) % r == c) as i64,
                    };
                    bad += (n[a as usize][b as usize][c as usize] != oracle) as usize;
                }
            }
        }
        rep.record(bad == 0, format!("k={k:>3}: {bad} mismatches over {} triples", r * r * r));
    }
    Ok(rep)
}

fn random_forest(rng: &mut ChaCha8Rng) -> PlumbingGraph {
    let n = rng.random_range(1..=5);
    let vertices: Vec<Vertex> = (0..n).map(|i| Vertex { id: i, framing: rng.random_range(-5..=5) }).collect();
    let mut edges = Vec::new();
    for i in 1..n {
        if rng.random_bool(0.7) {
            edges.push([rng.random_range(0..i), i]);
        }
    }
    PlumbingGraph { vertices, edges }
}

fn kirby(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("kirby");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let forests: Vec<PlumbingGraph> = (0..50).map(|_| random_forest(&mut rng)).collect();
    for k in opts.levels((1, 8)) {
        let m = mtc_for(opts.family, k)?;
        let z = |g: &PlumbingGraph| -> Result<Complex64> { Ok(rt_invariant(&m, g, opts.precision)?.to_c64()) };
        let (mut stab, mut bd, mut bad) = (0, 0, Vec::new());
        for g in &forests {
            let f = colored_sum(&m, g)?;
            let zg = z(g)?;
            for (sign, factor) in [(1, m.kappa_unnorm.clone()), (-1, m.kappa_unnorm_conj())] {
                let st = stabilize(g, sign)?;
                stab += 1;
                if !cyclo_eq(&colored_sum(&m, &st)?, &(&factor * &f)) || (z(&st)? - zg).norm() >= 1e-10 {
                    bad.push(format!("stabilize {sign:+} {}", g.to_json()));
                }
            }
            let deg = g.degrees();
            for (v, d) in g.vertices.iter().zip(deg) {
                if v.framing.abs() == 1 && d <= 2 {
                    bd += 1;
                    if (z(&blow_down(g, v.id)?)? - zg).norm() >= 1e-10 {
                        bad.push(format!("blow-down {} {}", v.id, g.to_json()));
                    }
                }
            }
        }
        let row = format!("k={k:>2}: {stab} stabilizations, {bd} blow-downs, {} failures", bad.len());
        rep.record(bad.is_empty(), row);
        rep.failures.extend(bad.into_iter().take(3));
    }
    Ok(rep)
}

fn kac_peterson(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("kac-peterson");
    let a1 = root_system_a(1)?;
    let (lo, hi) = opts.levels.unwrap_or((1, 10));
    for k in lo..=hi {
        let (scalar, dev) = global_scalar(&kac_peterson_s(&a1, k)?, &su2_closed_form_s(k));
        let ok = dev < 1e-10 && (scalar.norm() - 1.0).abs() < 1e-10;
        rep.record(ok, format!("A1 k={k:>2}: scalar {:.12} deviation {dev:.1e}", scalar));
    }
    let a2 = root_system_a(2)?;
    for k in lo..=hi.min(6) {
        let d = unitarity_defect(&kac_peterson_s(&a2, k)?);
        rep.record(d < 1e-9, format!("A2 k={k:>2}: unitarity defect {d:.1e}"));
    }
    Ok(rep)
}

fn canonical(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("canonical");
    for k in 1..=opts.levels.map_or(16, |l| l.1) {
        let m = mtc_for(Family::Su2, k)?;
        let kk = (k + 2) as f64;
        let s3 = rt_invariant(&m, &PlumbingGraph::empty(), opts.precision)?.to_c64();
        let s1s2 = rt_invariant(&m, &PlumbingGraph::single(0), opts.precision)?.to_c64();
        let e1 = (s3 - (2.0 / kk).sqrt() * (std::f64::consts::PI / kk).sin()).norm();
        let e2 = (s1s2 - 1.0).norm();
        rep.record(e1 < 1e-12 && e2 < 1e-12, format!("k={k:>2}: |dZ(S3)| {e1:.1e} |dZ(S1xS2)| {e2:.1e}"));
    }
    let l2 = rt_invariant(&mtc_for(Family::Su2, 1)?, &lens_graph(2, 1)?, opts.precision)?.to_c64().norm();
    let closed = lens_closed_form(2, 1).norm();
    rep.record(l2 < 1e-12 && closed < 1e-12, format!("L(2,1) at k=1: surgery {l2:.1e}, closed form {closed:.1e}"));
    Ok(rep)
}

fn lens(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("lens");
    for p in 1..=7i64 {
        let g = lens_graph(p, 1)?;
        for k in opts.levels.map_or(1..=12, |l| l.0..=l.1) {
            let zs = rt_invariant(&mtc_for(Family::Su2, k)?, &g, opts.precision)?.to_c64();
            let zp = lens_closed_form(p, k);
            let defect = (zp.norm() - zs.norm() * ((k as f64 + 2.0) / (2.0 * p as f64)).sqrt()).abs();
            let (phase, off) = if zs.norm() > 1e-12 {
                let order = 8.0 * (k + 2) as f64;
                let turns = (zp / zs).arg() / std::f64::consts::TAU * order;
                (format!("{}/{}", (turns.round() as i64).rem_euclid(order as i64), order), (turns - turns.round()).abs())
            } else {
                ("-".to_string(), 0.0)
            };
            rep.record(defect < 1e-9 && off < 1e-8, format!("p={p} k={k:>2}: modulus defect {defect:.1e}, phase {phase}"));
        }
    }
    Ok(rep)
}

fn abelian(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("abelian");
    let cal = calibrate(opts.precision, 1e-9)?;
    rep.rows.extend(cal.discrepancy_table().lines().map(String::from));
    for r in cal.fit.iter().chain(&cal.validation) {
        rep.total += 1;
        if r.residual <= 1e-9 {
            rep.passed += 1;
        } else {
            rep.failures.push(format!("{} k={} residual {:.3e}", r.label, r.k, r.residual));
        }
    }
    Ok(rep)
}

fn borel() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("borel");
    for omega in [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.3, 0.4)] {
        let r = borel_poles(&synthetic_factorial(20, omega), 20)?;
        let err = r.poles.first().map_or(f64::INFINITY, |p| (p.loc - omega).norm());
        rep.record(err < 1e-5, format!("planted {omega}: error {err:.1e}"));
    }
    Ok(rep)
}
