//! End-to-end acceptance checks. Runs without the libtest harness so every
//! check prints its PASS/FAIL line and measurements; exits 1 if any fails.
//! A name argument runs only the checks whose names contain it.

use std::cell::Cell;
use std::f64::consts::{PI, TAU};
use std::panic;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wrt_core::abelian::{calibrate, u1_surgery_invariant};
use wrt_core::asymptotics::{
    k_sweep, perturbative_fit, phase_spectrum, trivial_coeff, transseries_fit, Evaluation, KSweep,
    Normalization, Sector,
};
use wrt_core::cyclo::cyclo_eq;
use wrt_core::intmat::determinant;
use wrt_core::mtc::{check_modular, fusion, mtc_su2, mtc_u1, verlinde_dim, Family};
use wrt_core::resurgence::{
    borel_poles, pade_exact, stokes_location_check, synthetic_factorial, FormalSeries, Variable, STOKES_TOL,
};
use wrt_core::rootsys::{global_scalar, kac_peterson_s, root_system_a, su2_closed_form_s, unitarity_defect};
use wrt_core::surgery::{
    blow_down, colored_sum, lens_closed_form, lens_graph, linking_matrix, poincare_sphere, poincare_star,
    rt_invariant, stabilize, PlumbingGraph, Vertex,
};
use wrt_core::Precision;

thread_local! {
    static VERDICT: Cell<Option<bool>> = const { Cell::new(None) };
}

fn report(name: &str, pass: bool, elapsed: Duration, budget: Duration, detail: &str) {
    let in_time = elapsed <= budget;
    let verdict = if pass && in_time { "PASS" } else { "FAIL" };
    println!("acceptance {name:<28} {verdict}  ({:.2?} of {:.0?})", elapsed, budget);
    for line in detail.lines() {
        println!("    {line}");
    }
    if !in_time {
        println!("    exceeded its time budget");
    }
    VERDICT.set(Some(pass && in_time));
}

fn z(g: &PlumbingGraph, k: u32) -> Complex64 {
    rt_invariant(&mtc_su2(k).unwrap(), g, Precision::default()).unwrap().to_c64()
}

fn verlinde_dimensions() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for k in 1..=16 {
        let m = mtc_su2(k).unwrap();
        let (g0, g1) = (verlinde_dim(&m, 0).unwrap(), verlinde_dim(&m, 1).unwrap());
        if g0 != 1 || g1 != k as i64 + 1 {
            bad.push(format!("su2 k={k}: g0={g0} g1={g1}"));
        }
    }
    let g2 = verlinde_dim(&mtc_su2(1).unwrap(), 2).unwrap();
    if g2 != 4 {
        bad.push(format!("su2 k=1 g=2: {g2}"));
    }
    for k in (2..=12).step_by(2) {
        let m = mtc_u1(k).unwrap();
        for g in 0..=4 {
            let d = verlinde_dim(&m, g).unwrap();
            if d != (k as i64).pow(g) {
                bad.push(format!("u1 k={k} g={g}: {d}"));
            }
        }
    }
    let detail = if bad.is_empty() { "all dimensions exact".to_string() } else { bad.join("\n") };
    report("verlinde_dimensions", bad.is_empty(), t.elapsed(), Duration::from_secs(1), &detail);
}

fn cg_oracle(k: i64, a: i64, b: i64, c: i64) -> i64 {
    ((a - b).abs() <= c && c <= (a + b).min(2 * k - a - b) && (a + b + c) % 2 == 0) as i64
}

fn fusion_consistency() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for k in 1..=12u32 {
        let n = fusion(&mtc_su2(k).unwrap()).unwrap();
        let r = k as usize + 1;
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    if n[a][b][c] != cg_oracle(k as i64, a as i64, b as i64, c as i64) {
                        bad.push(format!("su2 k={k} N[{a}][{b}][{c}]={}", n[a][b][c]));
                    }
                }
            }
        }
    }
    for k in (2..=12u32).step_by(2) {
        let n = fusion(&mtc_u1(k).unwrap()).unwrap();
        let r = k as usize;
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    if n[a][b][c] != ((a + b) % r == c) as i64 {
                        bad.push(format!("u1 k={k} N[{a}][{b}][{c}]={}", n[a][b][c]));
                    }
                }
            }
        }
    }
    let detail = if bad.is_empty() {
        "su2 k<=12 match truncated Clebsch-Gordan, u1 even k<=12 match cyclic addition".to_string()
    } else {
        bad.into_iter().take(10).collect::<Vec<_>>().join("\n")
    };
    report("fusion_consistency", detail.starts_with("su2 k<=12"), t.elapsed(), Duration::from_secs(5), &detail);
}

fn modularity() {
    let t = Instant::now();
    let mut worst = [0.0f64; 6];
    let mut lines = Vec::new();
    let mut lambda1 = Complex64::new(0.0, 0.0);
    for k in 1..=16u32 {
        let m = mtc_su2(k).unwrap();
        let r = check_modular(&m);
        let c = 3.0 * k as f64 / (k as f64 + 2.0);
        let kappa = m.kappa();
        let arg_dev = {
            let d = (kappa.arg() - TAU * c / 8.0).rem_euclid(TAU);
            d.min(TAU - d)
        };
        let devs = [
            r.unitarity_defect.max(r.symmetry_defect),
            r.s4_defect,
            r.st3_residual,
            (kappa.norm() - 1.0).abs(),
            arg_dev,
            0.0,
        ];
        for (w, d) in worst.iter_mut().zip(devs) {
            *w = w.max(d);
        }
        if k == 1 {
            lambda1 = r.lambda;
        }
        lines.push(format!(
            "k={k:>2} unit/sym {:.1e} S^4 {:.1e} (ST)^3 {:.1e} |kappa| {:.1e} arg {:.1e}",
            devs[0], devs[1], devs[2], devs[3], devs[4]
        ));
    }
    worst[5] = (lambda1 - Complex64::new(0.0, -1.0)).norm();
    let pass = worst[0] < 1e-9 && worst[1] < 1e-10 && worst[2] < 1e-10 && worst[3] < 1e-10 && worst[4] < 1e-9 && worst[5] < 1e-10;
    lines.push(format!("lambda(k=1) = {:.12}", lambda1));
    report("modularity", pass, t.elapsed(), Duration::from_secs(5), &lines.join("\n"));
}

fn kac_peterson_cross_check() {
    let t = Instant::now();
    let a1 = root_system_a(1).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    for k in 1..=10 {
        let kp = kac_peterson_s(&a1, k).unwrap();
        let (scalar, dev) = global_scalar(&kp, &su2_closed_form_s(k));
        let unimodular = (scalar.norm() - 1.0).abs();
        pass &= dev < 1e-10 && unimodular < 1e-10;
        lines.push(format!("A1 k={k:>2} scalar {:.10} entrywise dev {:.1e}", scalar, dev));
    }
    let a2 = root_system_a(2).unwrap();
    for k in 1..=6 {
        let d = unitarity_defect(&kac_peterson_s(&a2, k).unwrap());
        pass &= d < 1e-9;
        lines.push(format!("A2 k={k} unitarity defect {:.1e}", d));
    }
    report("kac_peterson_cross_check", pass, t.elapsed(), Duration::from_secs(10), &lines.join("\n"));
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

fn kirby_invariance() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let forests: Vec<PlumbingGraph> = (0..50).map(|_| random_forest(&mut rng)).collect();
    let (mut stab_ok, mut stab_total, mut bd_total) = (0, 0, 0);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for g in &forests {
        for k in 1..=8u32 {
            let m = mtc_su2(k).unwrap();
            let f = colored_sum(&m, g).unwrap();
            let zg = z(g, k);
            for (sign, factor) in [(1, m.kappa_unnorm.clone()), (-1, m.kappa_unnorm_conj())] {
                stab_total += 1;
                let st = stabilize(g, sign).unwrap();
                let exact = cyclo_eq(&colored_sum(&m, &st).unwrap(), &(&factor * &f));
                let dz = (z(&st, k) - zg).norm();
                worst = worst.max(dz);
                if exact && dz < 1e-10 {
                    stab_ok += 1;
                } else {
                    failures.push(format!("stabilize {sign:+} k={k} on {}", g.to_json()));
                }
            }
            let deg = g.degrees();
            for (v, d) in g.vertices.iter().zip(&deg) {
                if v.framing.abs() == 1 && *d <= 2 {
                    bd_total += 1;
                    let dz = (z(&blow_down(g, v.id).unwrap(), k) - zg).norm();
                    worst = worst.max(dz);
                    if dz >= 1e-10 {
                        failures.push(format!("blow-down v{} k={k} dz={dz:.1e} on {}", v.id, g.to_json()));
                    }
                }
            }
        }
    }
    let detail = format!(
        "50 forests x k=1..8: stabilization {stab_ok}/{stab_total} exact, {bd_total} blow-downs checked, max |dZ| {worst:.1e}\n{}",
        failures.iter().take(5).cloned().collect::<Vec<_>>().join("\n")
    );
    report("kirby_invariance", failures.is_empty() && bd_total > 0, t.elapsed(), Duration::from_secs(60), &detail);
}

fn canonical_values() {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 1..=16u32 {
        let kk = (k + 2) as f64;
        let s3 = (2.0 / kk).sqrt() * (PI / kk).sin();
        worst = worst.max((z(&PlumbingGraph::empty(), k) - s3).norm());
        worst = worst.max((z(&PlumbingGraph::single(0), k) - 1.0).norm());
    }
    let surg = z(&lens_graph(2, 1).unwrap(), 1).norm();
    let closed = lens_closed_form(2, 1).norm();
    let pass = worst < 1e-12 && surg < 1e-12 && closed < 1e-12;
    let detail = format!("max dev S3/S1xS2 over k<=16: {worst:.1e}\n|Z(L(2,1))| at k=1: surgery {surg:.1e}, closed form {closed:.1e}");
    report("canonical_values", pass, t.elapsed(), Duration::from_secs(1), &detail);
}

fn lens_closed_form_calibration() {
    let t = Instant::now();
    let mut worst_mod: f64 = 0.0;
    let mut worst_phase: f64 = 0.0;
    let mut lines = Vec::new();
    for p in 1..=7i64 {
        let g = lens_graph(p, 1).unwrap();
        let mut row = format!("p={p}:");
        for k in 1..=12u32 {
            let zs = z(&g, k);
            let zp = lens_closed_form(p, k);
            let factor = (((k + 2) as f64) / (2.0 * p as f64)).sqrt();
            worst_mod = worst_mod.max((zp.norm() - zs.norm() * factor).abs());
            if zs.norm() > 1e-12 {
                let order = 8.0 * (k + 2) as f64;
                let phase = (zp / zs).arg() / TAU * order;
                let dev = (phase - phase.round()).abs() / order * TAU;
                worst_phase = worst_phase.max(dev);
                row.push_str(&format!(" {}/{}", (phase.round() as i64).rem_euclid(order as i64), order));
            } else {
                row.push_str(" -");
            }
        }
        lines.push(row);
    }
    lines.insert(0, format!("max modulus defect {worst_mod:.1e}, max phase off the 8(k+2) grid {worst_phase:.1e}; residual phases (turns):"));
    let pass = worst_mod < 1e-9 && worst_phase < 1e-8;
    report("lens_closed_form_calibration", pass, t.elapsed(), Duration::from_secs(30), &lines.join("\n"));
}

fn lens_sweep(p: i64, k0: u32, k1: u32) -> KSweep {
    k_sweep(Family::Su2, &lens_graph(p, 1).unwrap(), k0, k1, Normalization::DividedByS3, Evaluation::Numeric).unwrap()
}

fn flat_connection_spectrum() {
    let t = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for p in [2i64, 3, 5, 7] {
        let a = phase_spectrum(&lens_sweep(p, 20, 276), 0.05, Some(4 * p)).unwrap();
        let b = phase_spectrum(&lens_sweep(p, 36, 292), 0.05, Some(4 * p)).unwrap();
        let bound = (p / 2 + 1) as usize;
        let bin = a.bin_width;
        let stable = a.peaks.len() == b.peaks.len()
            && a.peaks.iter().all(|x| {
                b.peaks.iter().any(|y| {
                    let d = (x.freq - y.freq).rem_euclid(1.0);
                    d.min(1.0 - d) < bin
                })
            });
        pass &= a.peaks.len() <= bound && stable;
        let locs: Vec<String> = a.peaks.iter().map(|x| format!("{}@{:.3}", x.loc_string(), x.amp)).collect();
        lines.push(format!("p={p}: {} peaks (bound {bound}) [{}], stable under +16: {stable}", a.peaks.len(), locs.join(", ")));
    }
    report("flat_connection_spectrum", pass, t.elapsed(), Duration::from_secs(300), &lines.join("\n"));
}

fn torsion_scaling() {
    let t = Instant::now();
    let mut scaled = Vec::new();
    let mut lines = Vec::new();
    for p in [2i64, 3, 5, 7] {
        let s = lens_sweep(p, 20, 276);
        let c0 = trivial_coeff(&s, s.values.len()).unwrap()[0].1.norm();
        scaled.push(c0 * (p as f64).sqrt());
        lines.push(format!("p={p}: |c0| = {c0:.6}, |c0|*sqrt(p) = {:.6}, |c0|*p^1.5 = {:.6}", c0 * (p as f64).sqrt(), c0 * (p as f64).powf(1.5)));
    }
    let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
    let spread = scaled.iter().map(|x| (x - mean).abs() / mean).fold(0.0, f64::max);
    lines.push(format!("relative spread of |c0|*sqrt(p): {:.1}% (tolerance 5%)", 100.0 * spread));
    report("torsion_scaling", spread < 0.05, t.elapsed(), Duration::from_secs(300), &lines.join("\n"));
}

fn abelian_one_loop_exactness() {
    let t = Instant::now();
    let mut lines = Vec::new();
    let mut one_loop = true;
    for (label, g) in [("L(3,1)", lens_graph(3, 1)), ("L(4,1)", lens_graph(4, 1)), ("L(5,2)", lens_graph(5, 2))] {
        let b = linking_matrix(&g.unwrap()).unwrap().matrix;
        // along k = k0 mod 8|det B| every phase in the Gauss sum is frozen
        let step = 8 * u32::try_from(determinant(&b).magnitude()).unwrap();
        let ks: Vec<u32> = (0..6).map(|i| 2 + step * i).collect();
        let data: Vec<(f64, Complex64)> = ks
            .iter()
            .map(|&k| {
                // Z / Z(S3) removes the k^{-1/2} of the unit normalization
                let zs = u1_surgery_invariant(&b, k, Precision::default()).unwrap().to_c64();
                (k as f64, zs * (k as f64).sqrt())
            })
            .collect();
        let fit = perturbative_fit(&data, 2, 0.0).unwrap();
        let worst = fit.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
        one_loop &= worst < 1e-6;
        lines.push(format!("{label}: A = {:.10}, |a_1|,|a_2| <= {worst:.1e} over k = 2 + {step}i", fit.leading));
    }
    let cal = calibrate(Precision::default(), 1e-9).unwrap();
    lines.push(format!(
        "calibration alpha={:.6} beta={:.6} gamma={:.6}: max residual {:.3e} -> {}",
        cal.alpha,
        cal.beta,
        cal.gamma,
        cal.max_residual,
        if cal.passed { "validated" } else { "NOT validated" }
    ));
    if !cal.passed {
        lines.push(cal.discrepancy_table());
    }
    report("abelian_one_loop_exactness", one_loop && cal.passed, t.elapsed(), Duration::from_secs(60), &lines.join("\n"));
}

fn borel_machinery() {
    let t = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for omega in [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.3, 0.4)] {
        let r = borel_poles(&synthetic_factorial(20, omega), 20).unwrap();
        let err = r.poles.first().map_or(f64::INFINITY, |p| (p.loc - omega).norm());
        pass &= err < 1e-5;
        lines.push(format!("planted {omega}: recovered {:?}, error {err:.1e}", r.poles.first().map(|p| p.loc)));
    }
    // 1/((1-x)(2-x)) and (1+x)/(1-3x+x^2), recovered from truncations
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let first: Vec<BigRational> = (0..20u32).map(|n| q(1, 1) - BigRational::new(1.into(), BigInt::from(2).pow(n + 1))).collect();
    let e = pade_exact(&first, 1, 2).unwrap();
    let ok1 = e.denominator == vec![q(1, 1), q(-3, 2), q(1, 2)] && e.numerator == vec![q(1, 2)];
    let mut second = vec![q(1, 1), q(4, 1)];
    for n in 2..16 {
        let next = q(3, 1) * &second[n - 1] - &second[n - 2];
        second.push(next);
    }
    let e2 = pade_exact(&second, 1, 2).unwrap();
    let ok2 = e2.denominator == vec![q(1, 1), q(-3, 1), q(1, 1)] && e2.numerator == vec![q(1, 1), q(1, 1)];
    pass &= ok1 && ok2;
    lines.push(format!("exact Pade recovery: 1/((1-x)(2-x)) {ok1}, (1+x)/(1-3x+x^2) {ok2}"));
    report("borel_machinery", pass, t.elapsed(), Duration::from_secs(10), &lines.join("\n"));
}

fn poincare_pipeline() {
    let t = Instant::now();
    let mut lines = Vec::new();
    let sweep = k_sweep(Family::Su2, &poincare_sphere(), 1, 200, Normalization::Raw, Evaluation::Numeric).unwrap();
    lines.push(format!("sweep k=1..200: {} values, Z(1) = {:.12}", sweep.values.len(), sweep.values[0]));

    let presentations = (1..=8u32)
        .map(|k| (z(&poincare_sphere(), k) - z(&poincare_star(), k)).norm())
        .fold(0.0, f64::max);
    lines.push(format!("E8 vs star, k<=8: max |dZ| = {presentations:.1e}"));

    let spectrum = phase_spectrum(&sweep, 0.05, None).unwrap();
    // CS values of a three-fibre homology sphere lie in Z/(4·2·3·5)
    let phases: Vec<f64> = spectrum.peaks.iter().map(|p| (p.freq * 120.0).round() / 120.0).collect();
    for (p, s) in spectrum.peaks.iter().zip(&phases) {
        lines.push(format!("DFT phase {:.5} -> {}/120, amplitude {:.4}", p.freq, (s * 120.0).round(), p.amp));
    }
    lines.push(format!("distinct phases detected: {} (flat connection count recorded, not asserted)", phases.len()));

    let data: Vec<(f64, Complex64)> = sweep.samples().into_iter().filter(|d| d.0 >= 20.0).collect();
    let mut sectors: Vec<Sector> = phases
        .iter()
        .filter(|&&p| p != 0.0)
        .map(|&phase| Sector { phase, powers: (0..6).map(f64::from).collect() })
        .collect();
    let n_trivial = 8;
    sectors.push(Sector { phase: 0.0, powers: (0..n_trivial).map(|n| 1.5 + n as f64).collect() });
    let fit = transseries_fit(&data, &sectors, 2.0).unwrap();
    let trivial = fit.coeffs.last().unwrap();
    let series = FormalSeries::new(trivial.iter().map(|c| c / trivial[0]).collect(), Variable::InverseK);
    lines.push(format!("trans-series fit: residual {:.1e}, condition {:.1e}", fit.residual, fit.condition));
    lines.push(format!(
        "trivial series in 1/(k+2): {}",
        series.coeffs.iter().map(|c| format!("{:.3e}", c)).collect::<Vec<_>>().join(", ")
    ));
    let mut cs = vec![0.0];
    cs.extend(phases.iter().copied());
    let borel = borel_poles(&series, series.len()).unwrap();
    let matches = stokes_location_check(&borel, &cs, STOKES_TOL);
    for m in &matches {
        lines.push(format!(
            "pole {:.4} -> action {:.5}, nearest CS gap {:?}, gap {:.2e}, matched {}",
            m.pole, m.action, m.nearest, m.gap, m.matched
        ));
    }
    let matched = matches.iter().any(|m| m.matched);
    if !matched {
        lines.push("WARNING: no stable Borel pole of the fitted trivial series matches a CS gap within 2%".into());
    }
    let pass = presentations < 1e-9 && phases.len() >= 2;
    report("poincare_pipeline", pass, t.elapsed(), Duration::from_secs(600), &lines.join("\n"));
}

const CHECKS: [(&str, fn()); 12] = [
    ("verlinde_dimensions", verlinde_dimensions),
    ("fusion_consistency", fusion_consistency),
    ("modularity", modularity),
    ("kac_peterson_cross_check", kac_peterson_cross_check),
    ("kirby_invariance", kirby_invariance),
    ("canonical_values", canonical_values),
    ("lens_closed_form_calibration", lens_closed_form_calibration),
    ("flat_connection_spectrum", flat_connection_spectrum),
    ("torsion_scaling", torsion_scaling),
    ("abelian_one_loop_exactness", abelian_one_loop_exactness),
    ("borel_machinery", borel_machinery),
    ("poincare_pipeline", poincare_pipeline),
];

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = Vec::new();
    let mut ran = 0;
    for (name, check) in CHECKS {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        ran += 1;
        VERDICT.set(None);
        let finished = panic::catch_unwind(check).is_ok();
        match VERDICT.get() {
            Some(true) if finished => {}
            Some(_) => failed.push(name),
            None => {
                println!("acceptance {name:<28} FAIL  (aborted before reporting)");
                failed.push(name);
            }
        }
    }
    println!("\nacceptance: {}/{ran} passed", ran - failed.len());
    if !failed.is_empty() {
        println!("failing: {}", failed.join(", "));
        std::process::exit(1);
    }
}
