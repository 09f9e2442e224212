//! Borel transform, Padé approximants and Borel-plane singularities.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Hbar,
    InverseK,
}

/// Σ a_n xⁿ, truncated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormalSeries {
    pub coeffs: Vec<Complex64>,
    pub variable: Variable,
}

impl FormalSeries {
    pub fn new(coeffs: Vec<Complex64>, variable: Variable) -> Self {
        FormalSeries { coeffs, variable }
    }

    pub fn from_real(coeffs: &[f64], variable: Variable) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(), variable)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Σ n!/ωⁿ ħⁿ, whose Borel transform has a single pole at ω.
pub fn synthetic_factorial(n_terms: usize, omega: Complex64) -> FormalSeries {
    let mut c = Vec::with_capacity(n_terms);
    let mut fact = 1.0;
    for n in 0..n_terms {
        if n > 0 {
            fact *= n as f64;
        }
        c.push(Complex64::new(fact, 0.0) / omega.powi(n as i32));
    }
    FormalSeries::new(c, Variable::Hbar)
}

pub fn borel_transform(s: &FormalSeries) -> FormalSeries {
    let mut fact = 1.0f64;
    let coeffs = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| {
            if n > 0 {
                fact *= n as f64;
            }
            a / fact
        })
        .collect();
    FormalSeries::new(coeffs, s.variable)
}

pub fn borel_transform_exact(coeffs: &[BigRational]) -> Vec<BigRational> {
    let mut fact = BigInt::one();
    coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| {
            if n > 0 {
                fact *= n;
            }
            a / BigRational::from_integer(fact.clone())
        })
        .collect()
}

fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn derivative(p: &[Complex64]) -> Vec<Complex64> {
    p.iter().enumerate().skip(1).map(|(j, c)| c * j as f64).collect()
}

/// Roots of Σ p_j zʲ from the companion matrix, refined by Newton steps.
pub fn polynomial_roots(p: &[Complex64]) -> Vec<Complex64> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut p = p.to_vec();
    while p.len() > 1 && p.last().unwrap().norm() <= 1e-14 * scale {
        p.pop();
    }
    let deg = p.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = p[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -p[deg - 1 - j] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let eig = comp.schur().eigenvalues().map(|v| v.iter().copied().collect::<Vec<_>>());
    let mut roots = eig.unwrap_or_default();
    let dp = derivative(&p);
    for r in &mut roots {
        for _ in 0..8 {
            let d = horner(&dp, *r);
            if d.norm() == 0.0 {
                break;
            }
            let step = horner(&p, *r) / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *r -= step;
            if step.norm() <= 1e-16 * r.norm().max(1.0) {
                break;
            }
        }
    }
    roots
}

/// [L/M] approximant N/D with D(0) = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pade {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
    pub degrees: (usize, usize),
    /// Degrees asked for, when rank deficiency forced a reduction.
    pub reduced_from: Option<(usize, usize)>,
    pub condition: f64,
}

impl Pade {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.numerator, z) / horner(&self.denominator, z)
    }

    pub fn poles(&self) -> Vec<(Complex64, Complex64)> {
        let dq = derivative(&self.denominator);
        polynomial_roots(&self.denominator)
            .into_iter()
            .map(|z| (z, horner(&self.numerator, z) / horner(&dq, z)))
            .collect()
    }
}

const PADE_TOL: f64 = 1e-13;

/// Least-squares Padé with numerical-rank degree reduction: the
/// denominator is the smallest right singular vector of the Toeplitz
/// block, and degrees drop while that block is rank deficient.
pub fn pade(s: &FormalSeries, l: usize, m: usize) -> Result<Pade> {
    if l + m + 1 > s.len() {
        return Err(Error::SeriesTooShort { needed: l + m + 1, got: s.len() });
    }
    let c = &s.coeffs[..l + m + 1];
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let zero = Complex64::new(0.0, 0.0);
    if norm == 0.0 {
        return Ok(Pade {
            numerator: vec![zero],
            denominator: vec![Complex64::new(1.0, 0.0)],
            degrees: (0, 0),
            reduced_from: Some((l, m)).filter(|&d| d != (0, 0)),
            condition: 1.0,
        });
    }
    let at = |i: isize| if i < 0 { zero } else { c[i as usize] };
    let (mut l1, mut m1) = (l, m);
    let mut condition = 1.0;
    let b: Vec<Complex64> = loop {
        if m1 == 0 {
            break vec![Complex64::new(1.0, 0.0)];
        }
        let block = DMatrix::from_fn(m1, m1 + 1, |i, j| at((l1 + 1 + i) as isize - j as isize));
        // pad to square so the SVD returns a full set of right vectors
        let mut sq = DMatrix::from_element(m1 + 1, m1 + 1, zero);
        sq.view_mut((0, 0), (m1, m1 + 1)).copy_from(&block);
        let svd = sq.svd(false, true);
        let sv = svd.singular_values.as_slice();
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
        let rank = sv.iter().filter(|&&x| x > PADE_TOL * norm).count();
        if rank < m1 {
            let drop = m1 - rank;
            m1 = rank;
            l1 = l1.saturating_sub(drop);
            continue;
        }
        let sv_sorted: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
        condition = sv_sorted[0] / sv_sorted[m1 - 1];
        let vt = svd.v_t.expect("requested");
        let null = order[m1];
        break (0..=m1).map(|j| vt[(null, j)].conj()).collect();
    };
    let mut numer: Vec<Complex64> = (0..=l1)
        .map(|i| (0..b.len()).map(|j| at(i as isize - j as isize) * b[j]).sum())
        .collect();
    let mut denom = b;
    // normalize so that D(0) = 1; a vanishing D(0) means a common zero
    // at the origin, which we strip
    while denom.len() > 1 && denom[0].norm() <= PADE_TOL * denom.iter().map(|z| z.norm()).fold(0.0, f64::max) {
        denom.remove(0);
        if !numer.is_empty() {
            numer.remove(0);
        }
    }
    let d0 = denom[0];
    for z in numer.iter_mut().chain(denom.iter_mut()) {
        *z /= d0;
    }
    while numer.len() > 1 && numer.last().unwrap().norm() <= PADE_TOL * norm {
        numer.pop();
    }
    while denom.len() > 1 && denom.last().unwrap().norm() <= PADE_TOL {
        denom.pop();
    }
    if numer.is_empty() {
        numer.push(zero);
    }
    let degrees = (numer.len() - 1, denom.len() - 1);
    Ok(Pade {
        numerator: numer,
        denominator: denom,
        degrees,
        reduced_from: Some((l, m)).filter(|&d| d != degrees),
        condition,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactPade {
    pub numerator: Vec<BigRational>,
    pub denominator: Vec<BigRational>,
    pub degrees: (usize, usize),
    pub reduced_from: Option<(usize, usize)>,
}

impl ExactPade {
    pub fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let h = |p: &[BigRational]| p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c);
        let d = h(&self.denominator);
        (!d.is_zero()).then(|| h(&self.numerator) / d)
    }
}

/// Solves A x = rhs over Q by Gaussian elimination; None if singular.
fn solve_rational(mut a: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
            let t = &f * &rhs[col];
            rhs[r] -= t;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for r in (0..n).rev() {
        let mut acc = rhs[r].clone();
        for c in r + 1..n {
            acc -= &a[r][c] * &x[c];
        }
        x[r] = acc / &a[r][r];
    }
    Some(x)
}

/// Exact [L/M] with D(0) = 1; a singular system lowers both degrees by one
/// until it is solvable.
pub fn pade_exact(coeffs: &[BigRational], l: usize, m: usize) -> Result<ExactPade> {
    if l + m + 1 > coeffs.len() {
        return Err(Error::SeriesTooShort { needed: l + m + 1, got: coeffs.len() });
    }
    let at = |i: isize| if i < 0 { BigRational::zero() } else { coeffs[i as usize].clone() };
    let (mut l1, mut m1) = (l, m);
    let q = loop {
        let a: Vec<Vec<BigRational>> = (1..=m1)
            .map(|i| (1..=m1).map(|j| at((l1 + i) as isize - j as isize)).collect())
            .collect();
        let rhs: Vec<BigRational> = (1..=m1).map(|i| -at((l1 + i) as isize)).collect();
        match solve_rational(a, rhs) {
            Some(x) => break x,
            None => {
                m1 -= 1;
                l1 = l1.saturating_sub(1);
            }
        }
    };
    let mut denominator = vec![BigRational::one()];
    denominator.extend(q);
    let mut numerator: Vec<BigRational> = (0..=l1)
        .map(|i| (0..=m1).map(|j| at(i as isize - j as isize) * &denominator[j]).sum())
        .collect();
    while numerator.len() > 1 && numerator.last().is_some_and(|c| c.is_zero()) {
        numerator.pop();
    }
    let l1 = numerator.len() - 1;
    Ok(ExactPade {
        numerator,
        denominator,
        degrees: (l1, m1),
        reduced_from: Some((l, m)).filter(|&d| d != (l1, m1)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorelPole {
    pub loc: Complex64,
    pub residue: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesMatch {
    pub pole: Complex64,
    /// Pole position in action units (CS differences).
    pub action: Complex64,
    pub nearest: Option<f64>,
    pub gap: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BorelReport {
    pub poles: Vec<BorelPole>,
    pub pade_degrees: (usize, usize),
    pub series_length: usize,
    pub variable: Variable,
    pub matches: Vec<StokesMatch>,
}

const STABILITY: f64 = 0.01;

/// Poles of the near-diagonal Padé of the Borel transform that survive
/// lowering both degrees by one.
pub fn borel_poles(s: &FormalSeries, n_terms: usize) -> Result<BorelReport> {
    if n_terms < 8 {
        return Err(Error::SeriesTooShort { needed: 8, got: n_terms });
    }
    let n = n_terms.min(s.len());
    if n < 8 {
        return Err(Error::SeriesTooShort { needed: 8, got: n });
    }
    let b = borel_transform(&FormalSeries::new(s.coeffs[..n].to_vec(), s.variable));
    let d = (n - 1) / 2;
    let main = pade(&b, d, d)?;
    let lower = pade(&b, d - 1, d - 1)?;
    let others = lower.poles();
    let mut poles: Vec<BorelPole> = main
        .poles()
        .into_iter()
        .filter(|(z, _)| z.re.is_finite() && z.im.is_finite())
        .filter(|(z, _)| others.iter().any(|(w, _)| (z - w).norm() < STABILITY * z.norm().max(1e-300)))
        .map(|(loc, residue)| BorelPole { loc, residue })
        .collect();
    poles.sort_by(|a, b| a.loc.norm().total_cmp(&b.loc.norm()).then(a.loc.arg().total_cmp(&b.loc.arg())));
    Ok(BorelReport { poles, pade_degrees: (d, d), series_length: n, variable: s.variable, matches: Vec::new() })
}

/// Converts a Borel-plane position to action units: for a series in 1/k a
/// sector e^{2πikω} sits at ζ = −2πiω.
pub fn action_units(pole: Complex64, variable: Variable) -> Complex64 {
    match variable {
        Variable::Hbar => pole,
        Variable::InverseK => pole * Complex64::new(0.0, 1.0) / std::f64::consts::TAU,
    }
}

pub const STOKES_TOL: f64 = 0.02;

/// Nearest CS(B) − CS(A) (mod 1) to each pole, lifted to the integer
/// translate closest to the pole; matched when the relative gap is below
/// `tol`.
pub fn stokes_location_check(report: &BorelReport, cs_values: &[f64], tol: f64) -> Vec<StokesMatch> {
    let mut diffs: Vec<f64> = Vec::new();
    for a in cs_values {
        for b in cs_values {
            diffs.push((b - a).rem_euclid(1.0));
        }
    }
    report
        .poles
        .iter()
        .map(|p| {
            let w = action_units(p.loc, report.variable);
            let best = diffs
                .iter()
                .map(|&d| {
                    let lifted = d + (w.re - d).round();
                    (lifted, (w - lifted).norm())
                })
                .min_by(|x, y| x.1.total_cmp(&y.1));
            match best {
                Some((lifted, gap)) => StokesMatch {
                    pole: p.loc,
                    action: w,
                    nearest: Some(lifted),
                    gap,
                    matched: gap <= tol * lifted.abs().max(tol),
                },
                None => StokesMatch { pole: p.loc, action: w, nearest: None, gap: f64::INFINITY, matched: false },
            }
        })
        .collect()
}

#[derive(Serialize)]
struct PoleJson {
    loc: [f64; 2],
    residue: [f64; 2],
}

#[derive(Serialize)]
struct ReportJson<'a> {
    poles: Vec<PoleJson>,
    matches: &'a [StokesMatch],
    pade_degrees: [usize; 2],
    series_length: usize,
}

impl BorelReport {
    pub fn with_matches(mut self, cs_values: &[f64], tol: f64) -> Self {
        self.matches = stokes_location_check(&self, cs_values, tol);
        self
    }

    pub fn to_json(&self) -> String {
        let j = ReportJson {
            poles: self
                .poles
                .iter()
                .map(|p| PoleJson { loc: [p.loc.re, p.loc.im], residue: [p.residue.re, p.residue.im] })
                .collect(),
            matches: &self.matches,
            pade_degrees: [self.pade_degrees.0, self.pade_degrees.1],
            series_length: self.series_length,
        };
        serde_json::to_string_pretty(&j).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn borel_examples() {
        let fact = synthetic_factorial(12, c(1.0, 0.0));
        assert!(borel_transform(&fact).coeffs.iter().all(|z| (z - 1.0).norm() < 1e-15));
        let zeros = FormalSeries::from_real(&[0.0; 5], Variable::Hbar);
        assert_eq!(borel_transform(&zeros), zeros);
        let ones = FormalSeries::from_real(&[1.0; 6], Variable::Hbar);
        assert!((borel_transform(&ones).coeffs[5] - 1.0 / 120.0).norm() < 1e-18);
        let exact = borel_transform_exact(&[q(1, 1), q(2, 1), q(6, 1), q(12, 1)]);
        assert_eq!(exact, vec![q(1, 1), q(2, 1), q(3, 1), q(2, 1)]);
    }

    #[test]
    fn pade_examples() {
        let geo = FormalSeries::from_real(&[1.0; 10], Variable::Hbar);
        let p = pade(&geo, 0, 1).unwrap();
        assert_eq!(p.degrees, (0, 1));
        assert!((p.denominator[1] + 1.0).norm() < 1e-14 && (p.numerator[0] - 1.0).norm() < 1e-14);
        let r = pade(&geo, 4, 4).unwrap();
        assert_eq!(r.degrees, (0, 1));
        assert!(r.reduced_from.is_some());
        let poly = FormalSeries::from_real(&[1.0, 2.0, 3.0], Variable::Hbar);
        let p = pade(&poly, 2, 0).unwrap();
        assert_eq!(p.numerator, poly.coeffs);
        assert!(pade(&poly, 2, 1).is_err());

        let expand: Vec<BigRational> = (0..20).map(|n| q(1, 1) - BigRational::new(1.into(), BigInt::from(2).pow(n as u32 + 1))).collect();
        let e = pade_exact(&expand, 1, 2).unwrap();
        assert_eq!(e.degrees, (0, 2));
        assert_eq!(e.denominator, vec![q(1, 1), q(-3, 2), q(1, 2)]);
        assert_eq!(e.numerator, vec![q(1, 2)]);
        let geo_exact = vec![q(1, 1); 12];
        let e = pade_exact(&geo_exact, 5, 5).unwrap();
        assert_eq!(e.degrees, (0, 1));
        assert_eq!(e.eval(&q(1, 3)), Some(q(3, 2)));
    }

    #[test]
    fn planted_poles() {
        for (omega, sign) in [(c(1.0, 0.0), 1.0), (c(-1.0, 0.0), -1.0), (c(0.3, 0.4), 1.0)] {
            let s = synthetic_factorial(20, omega);
            if sign < 0.0 {
                let alt: Vec<Complex64> = synthetic_factorial(20, c(1.0, 0.0)).coeffs.iter().enumerate().map(|(n, a)| a * (-1.0f64).powi(n as i32)).collect();
                assert!(alt.iter().zip(&s.coeffs).all(|(a, b)| (a - b).norm() <= 1e-12 * a.norm()));
            }
            let r = borel_poles(&s, 20).unwrap();
            assert!(!r.poles.is_empty());
            assert!((r.poles[0].loc - omega).norm() < 1e-5, "{:?}", r.poles);
            assert!((r.poles[0].residue + omega).norm() < 1e-5);
            for d in 8..=10 {
                let b = borel_transform(&synthetic_factorial(2 * d + 1, omega));
                let p = pade(&b, d, d).unwrap();
                assert!(p.poles().iter().any(|(z, _)| (z - omega).norm() < 1e-5));
            }
        }
        assert!(borel_poles(&synthetic_factorial(20, c(1.0, 0.0)), 6).is_err());
    }

    #[test]
    fn two_planted_poles() {
        let s = FormalSeries::new(
            (0..24)
                .map(|n| {
                    let f: f64 = (1..=n).map(|i| i as f64).product();
                    c(f, 0.0) * (c(0.5, 0.0).powi(-n) + c(0.0, 2.0).powi(-n) * 3.0)
                })
                .collect(),
            Variable::Hbar,
        );
        let r = borel_poles(&s, 24).unwrap();
        assert!((r.poles[0].loc - 0.5).norm() < 1e-6);
        assert!((r.poles[1].loc - c(0.0, 2.0)).norm() < 1e-6);
    }

    #[test]
    fn stokes_examples() {
        let r = borel_poles(&synthetic_factorial(20, c(1.0, 0.0)), 20).unwrap();
        let m = stokes_location_check(&r, &[0.0, 1.0], STOKES_TOL);
        assert!(m[0].matched && (m[0].nearest.unwrap() - 1.0).abs() < 1e-12 && m[0].gap < 1e-6);
        assert!(stokes_location_check(&r, &[], STOKES_TOL).iter().all(|m| !m.matched));
        let json = r.with_matches(&[0.0], STOKES_TOL).to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v["poles"][0]["loc"][0].as_f64().unwrap() > 0.99);
        assert!(v["matches"].is_array());
    }

    #[test]
    fn roots() {
        let p = [c(6.0, 0.0), c(-5.0, 0.0), c(1.0, 0.0)];
        let mut r: Vec<f64> = polynomial_roots(&p).iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] - 2.0).abs() < 1e-14 && (r[1] - 3.0).abs() < 1e-14);
        assert!(polynomial_roots(&[c(1.0, 0.0)]).is_empty());
    }
}
