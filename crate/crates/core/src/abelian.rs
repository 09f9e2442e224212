//! U(1)_k invariants from linking matrices: the linking-form Gauss sum and
//! the abelian surgery formula, with a calibration between the two.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclo::Cyclotomic;
use crate::error::{Error, Result};
use crate::intmat::{self, IntMatrix};
use crate::mtc::mtc_u1;
use crate::numeric::{Ctx, HpComplex, Precision};
use crate::surgery::{linking_data_of_matrix, normalize_in};

#[derive(Debug, Clone, Serialize)]
pub struct HomologyData {
    pub smith_diagonal: Vec<u64>,
    pub b1: usize,
    /// Cyclic orders of H¹(M; Z/k) (torsion part first, then b1 copies of k).
    pub h1_mod_k: Vec<u64>,
    /// Orders d_i > 1 of the torsion generators of H_1.
    pub torsion_orders: Vec<u64>,
    /// λ(g_i, g_j) in [0, 1) as (numerator, denominator).
    pub linking_form: Vec<Vec<(i64, i64)>>,
    #[serde(skip)]
    raw_form: Vec<Vec<BigRational>>,
}

/// Sign convention of the linking form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Refinement {
    /// q(x) = ½ λ(x,x) with λ from −B⁻¹.
    #[default]
    HalfLinking,
    /// q(x) = ½ λ(x,x) with λ from +B⁻¹.
    HalfLinkingPositive,
}

fn frac_mod1(r: &BigRational) -> BigRational {
    r - BigRational::from_integer(r.floor().to_integer())
}

fn to_u64(x: &BigInt) -> u64 {
    x.abs().to_u64().expect("homology orders fit in u64")
}

pub fn homology_data(b: &[Vec<i64>], k: u32) -> Result<HomologyData> {
    if !intmat::is_square(b) {
        return Err(Error::NotSquare);
    }
    if !intmat::is_symmetric(b) {
        return Err(Error::NotSymmetric);
    }
    let smith = intmat::smith_form(b);
    let uinv = intmat::unimodular_inverse(&smith.u);
    let vt_uinv = intmat::mat_mul(&intmat::transpose(&smith.v), &uinv);
    let torsion: Vec<usize> = (0..smith.diagonal.len())
        .filter(|&i| smith.diagonal[i] > BigInt::one())
        .collect();
    // λ(g_i, g_j) = −(Vᵀ U⁻¹)_ij / d_i
    let raw_form: Vec<Vec<BigRational>> = torsion
        .iter()
        .map(|&i| {
            torsion
                .iter()
                .map(|&j| BigRational::new(-vt_uinv[i][j].clone(), smith.diagonal[i].clone()))
                .collect()
        })
        .collect();
    let linking_form = raw_form
        .iter()
        .map(|row| {
            row.iter()
                .map(|r| {
                    let f = frac_mod1(r);
                    (f.numer().to_i64().unwrap(), f.denom().to_i64().unwrap())
                })
                .collect()
        })
        .collect();
    let b1 = smith.diagonal.iter().filter(|d| d.is_zero()).count();
    let kk = BigInt::from(k);
    let mut h1_mod_k: Vec<u64> = torsion
        .iter()
        .map(|&i| to_u64(&smith.diagonal[i].gcd(&kk)))
        .filter(|&g| g > 1)
        .collect();
    h1_mod_k.extend(std::iter::repeat_n(k as u64, b1));
    Ok(HomologyData {
        smith_diagonal: smith.diagonal.iter().map(to_u64).collect(),
        b1,
        h1_mod_k,
        torsion_orders: torsion.iter().map(|&i| to_u64(&smith.diagonal[i])).collect(),
        linking_form,
        raw_form,
    })
}

const MAX_TERMS: u64 = 1 << 26;

fn require_even(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::ZeroLevel);
    }
    if k % 2 == 1 {
        return Err(Error::OddU1Level(k));
    }
    Ok(())
}

/// Σ over the k-torsion of H_1 of e^{2πik q(x)}, times k^{b1/2}, as the
/// exact cyclotomic sum plus the real prefactor exponent.
fn linking_sum(h: &HomologyData, k: u32, refinement: Refinement) -> Result<Cyclotomic> {
    let kk = BigInt::from(k);
    let steps: Vec<(u64, BigInt)> = h
        .torsion_orders
        .iter()
        .map(|&d| {
            let g = d.gcd(&(k as u64));
            (g, BigInt::from(d / g))
        })
        .collect();
    let count: u64 = steps.iter().map(|s| s.0).product();
    if count > MAX_TERMS {
        return Err(Error::TooLarge(format!("{count} torsion elements")));
    }
    let sign = match refinement {
        Refinement::HalfLinking => BigRational::one(),
        Refinement::HalfLinkingPositive => -BigRational::one(),
    };
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut phases: Vec<BigRational> = Vec::with_capacity(count as usize);
    let mut t = vec![0u64; steps.len()];
    loop {
        let x: Vec<BigInt> = t.iter().zip(&steps).map(|(&ti, (_, s))| s * ti).collect();
        let mut q = BigRational::zero();
        for (i, xi) in x.iter().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                q += &h.raw_form[i][j] * BigRational::from_integer(xi * xj);
            }
        }
        let phase = frac_mod1(&(q * &half * &sign * BigRational::from_integer(kk.clone())));
        phases.push(phase);
        let mut i = 0;
        while i < t.len() {
            t[i] += 1;
            if t[i] < steps[i].0 {
                break;
            }
            t[i] = 0;
            i += 1;
        }
        if i == t.len() {
            break;
        }
    }
    let order = phases
        .iter()
        .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()))
        .to_usize()
        .ok_or_else(|| Error::TooLarge("phase denominator".into()))?;
    Ok(Cyclotomic::from_terms(
        order,
        phases.iter().map(|p| {
            let e = (p.numer() * BigInt::from(order) / p.denom()).to_i64().unwrap();
            (e, 1)
        }),
    ))
}

pub fn linking_form_invariant_in(
    b: &[Vec<i64>],
    k: u32,
    refinement: Refinement,
    ctx: &mut Ctx,
) -> Result<HpComplex> {
    require_even(k)?;
    let h = homology_data(b, k)?;
    let sum = linking_sum(&h, k, refinement)?.eval_in(ctx);
    // k^{−b1/2} · k^{b1} from the free part, where q vanishes
    let kf = ctx.int(&BigInt::from(k));
    let root_k = HpComplex::from_real(ctx.sqrt(&kf), ctx);
    Ok(sum.mul(&root_k.powi(h.b1 as i64, ctx), ctx))
}

pub fn linking_form_invariant(
    b: &[Vec<i64>],
    k: u32,
    refinement: Refinement,
    prec: Precision,
) -> Result<HpComplex> {
    linking_form_invariant_in(b, k, refinement, &mut Ctx::new(prec))
}

/// Exact colored sum Σ_{a ∈ (Z/k)^m} ζ_{2k}^{aᵀBa}.
pub fn u1_colored_sum(b: &[Vec<i64>], k: u32) -> Result<Cyclotomic> {
    require_even(k)?;
    let m = b.len();
    let modulus = 2 * k as i64;
    let total = (k as u64).checked_pow(m as u32).unwrap_or(u64::MAX);
    if total > MAX_TERMS {
        return Err(Error::TooLarge(format!("{k}^{m} colourings")));
    }
    let bm: Vec<Vec<i64>> = b.iter().map(|r| r.iter().map(|x| x.rem_euclid(modulus)).collect()).collect();
    let first = if m == 0 { 1 } else { k as i64 };
    let hist = (0..first)
        .into_par_iter()
        .map(|a0| {
            let mut hist = vec![0i64; modulus as usize];
            let mut a = vec![0i64; m];
            if m > 0 {
                a[0] = a0;
            }
            loop {
                let mut e = 0i64;
                for i in 0..m {
                    if a[i] == 0 {
                        continue;
                    }
                    let mut row = bm[i][i] * a[i];
                    for j in i + 1..m {
                        row += 2 * bm[i][j] * a[j];
                    }
                    e = (e + row % modulus * a[i]) % modulus;
                }
                hist[e as usize] += 1;
                let mut i = 1;
                while i < m {
                    a[i] += 1;
                    if a[i] < k as i64 {
                        break;
                    }
                    a[i] = 0;
                    i += 1;
                }
                if i >= m {
                    break;
                }
            }
            hist
        })
        .reduce(
            || vec![0i64; modulus as usize],
            |mut x, y| {
                for (a, b) in x.iter_mut().zip(y) {
                    *a += b;
                }
                x
            },
        );
    Ok(Cyclotomic::from_terms(
        modulus as usize,
        hist.into_iter().enumerate().map(|(e, c)| (e as i64, c)),
    ))
}

pub fn u1_surgery_invariant_in(b: &[Vec<i64>], k: u32, ctx: &mut Ctx) -> Result<HpComplex> {
    let link = linking_data_of_matrix(b)?;
    let f = u1_colored_sum(b, k)?;
    let mtc = mtc_u1(k)?;
    Ok(normalize_in(&mtc, &f, link.signature, link.m, ctx))
}

pub fn u1_surgery_invariant(b: &[Vec<i64>], k: u32, prec: Precision) -> Result<HpComplex> {
    u1_surgery_invariant_in(b, k, &mut Ctx::new(prec))
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationRow {
    pub label: String,
    pub k: u32,
    pub b1: usize,
    pub sigma: i64,
    pub z_link: Complex64,
    pub z_surg: Complex64,
    pub predicted: Complex64,
    pub residual: f64,
}

/// Fit of Z_link / Z_surg = D^{α b1 + β} κ^{γ σ}.
#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub fit: Vec<CalibrationRow>,
    pub validation: Vec<CalibrationRow>,
    pub max_residual: f64,
    pub passed: bool,
}

impl Calibration {
    pub fn discrepancy_table(&self) -> String {
        let mut out = format!(
            "alpha={:.6} beta={:.6} gamma={:.6}\n{:<10} {:>3} {:>3} {:>3} {:>28} {:>28} {:>28} {:>10}\n",
            self.alpha, self.beta, self.gamma, "manifold", "k", "b1", "sig", "Z_link", "Z_surg", "predicted", "residual"
        );
        for r in self.fit.iter().chain(&self.validation) {
            let c = |z: Complex64| format!("{:+.6}{:+.6}i", z.re, z.im);
            out.push_str(&format!(
                "{:<10} {:>3} {:>3} {:>3} {:>28} {:>28} {:>28} {:>10.2e}\n",
                r.label, r.k, r.b1, r.sigma, c(r.z_link), c(r.z_surg), c(r.predicted), r.residual
            ));
        }
        out
    }
}

fn both_routes(b: &IntMatrix, k: u32, prec: Precision) -> Result<(Complex64, Complex64, usize, i64)> {
    let link = linking_data_of_matrix(b)?;
    let zl = linking_form_invariant(b, k, Refinement::default(), prec)?.to_c64();
    let zs = u1_surgery_invariant(b, k, prec)?.to_c64();
    Ok((zl, zs, link.b1, link.signature))
}

/// Calibrates on S³, S¹×S² and L(2,1) at k = 4, then validates on
/// L(p,1), p ≤ 8, k ∈ {2,4,6,8}.
pub fn calibrate(prec: Precision, tol: f64) -> Result<Calibration> {
    let k0 = 4u32;
    let d0 = (k0 as f64).sqrt();
    let kappa_arg = std::f64::consts::FRAC_PI_4;
    let (s3_l, s3_s, _, _) = both_routes(&vec![], k0, prec)?;
    let (s12_l, s12_s, _, _) = both_routes(&vec![vec![0]], k0, prec)?;
    let (l2_l, l2_s, _, l2_sig) = both_routes(&vec![vec![2]], k0, prec)?;
    let beta = (s3_l / s3_s).norm().ln() / d0.ln();
    let alpha = (s12_l / s12_s).norm().ln() / d0.ln() - beta;
    let r = l2_l / l2_s / d0.powf(beta);
    let gamma = r.arg() / (kappa_arg * l2_sig as f64);
    let predict = |k: u32, b1: usize, sigma: i64| {
        let d = (k as f64).sqrt();
        Complex64::from_polar(d.powf(alpha * b1 as f64 + beta), kappa_arg * gamma * sigma as f64)
    };
    let row = |label: String, k: u32, b: &IntMatrix| -> Result<CalibrationRow> {
        let (zl, zs, b1, sigma) = both_routes(b, k, prec)?;
        let predicted = predict(k, b1, sigma) * zs;
        Ok(CalibrationRow { label, k, b1, sigma, z_link: zl, z_surg: zs, predicted, residual: (zl - predicted).norm() })
    };
    let fit = vec![
        row("S3".into(), k0, &vec![])?,
        row("S1xS2".into(), k0, &vec![vec![0]])?,
        row("L(2,1)".into(), k0, &vec![vec![2]])?,
    ];
    let mut validation = Vec::new();
    for p in 1..=8i64 {
        for k in [2u32, 4, 6, 8] {
            validation.push(row(format!("L({p},1)"), k, &vec![vec![p]])?);
        }
    }
    let max_residual = fit.iter().chain(&validation).map(|r| r.residual).fold(0.0, f64::max);
    Ok(Calibration { alpha, beta, gamma, fit, validation, max_residual, passed: max_residual < tol })
}
