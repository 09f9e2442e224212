//! Exact arithmetic in cyclotomic fields Q(ζ_N).
//!
//! Values are stored in the group ring Q[x]/(x^N - 1): a common positive
//! denominator and N integer numerators, the i-th one multiplying ζ_N^i.
//! That presentation is not canonical (it has dimension N, the field has
//! dimension φ(N)), so equality reduces the difference modulo Φ_N.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::numeric::{Ctx, HpComplex, Precision};

#[derive(Clone, Debug)]
pub struct Cyclotomic {
    order: usize,
    den: BigInt,
    num: Vec<BigInt>,
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<usize, Arc<Vec<BigInt>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<BigInt>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients (constant term first) of the n-th cyclotomic polynomial,
/// obtained by dividing x^n - 1 by Φ_d for every proper divisor d of n.
pub fn cyclotomic_polynomial(n: usize) -> Arc<Vec<BigInt>> {
    assert!(n >= 1, "cyclotomic polynomial of order 0");
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut poly = vec![BigInt::zero(); n + 1];
    poly[0] = -BigInt::one();
    poly[n] = BigInt::one();
    for d in (1..n).filter(|d| n.is_multiple_of(*d)) {
        let phi_d = cyclotomic_polynomial(d);
        poly = exact_div_monic(&poly, &phi_d);
    }
    let poly = Arc::new(poly);
    cyclotomic_cache()
        .lock()
        .unwrap()
        .insert(n, poly.clone());
    poly
}

fn exact_div_monic(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let mut rem = a.to_vec();
    let mut quot = vec![BigInt::zero(); a.len() - db];
    for i in (0..quot.len()).rev() {
        let c = rem[i + db].clone();
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            rem[i + j] -= &c * bj;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "inexact cyclotomic division");
    quot
}

/// Euler's totient.
pub fn totient(n: usize) -> usize {
    (1..=n).filter(|&i| i.gcd(&n) == 1).count()
}

impl Cyclotomic {
    pub fn zero(order: usize) -> Self {
        assert!(order >= 1);
        Cyclotomic {
            order,
            den: BigInt::one(),
            num: vec![BigInt::zero(); order],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::from_integer(order, 1)
    }

    pub fn from_integer(order: usize, n: i64) -> Self {
        let mut z = Self::zero(order);
        z.num[0] = BigInt::from(n);
        z
    }

    pub fn from_rational(order: usize, r: &BigRational) -> Self {
        let mut z = Self::zero(order);
        z.num[0] = r.numer().clone();
        z.den = r.denom().clone();
        z.normalize_den();
        z
    }

    /// ζ_N^power.
    pub fn root(order: usize, power: i64) -> Self {
        let mut z = Self::zero(order);
        z.num[power.rem_euclid(order as i64) as usize] = BigInt::one();
        z
    }

    /// Builds Σ coeffs[i] ζ_N^i.
    pub fn from_coeffs(order: usize, coeffs: &[BigRational]) -> Self {
        assert_eq!(coeffs.len(), order, "coefficient count must equal the order");
        let den = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        let mut z = Cyclotomic { order, den, num };
        z.normalize_den();
        z
    }

    /// Σ counts[e] ζ_N^e over a sparse list of integer terms.
    pub fn from_terms<I: IntoIterator<Item = (i64, i64)>>(order: usize, terms: I) -> Self {
        let mut z = Self::zero(order);
        for (e, c) in terms {
            z.num[e.rem_euclid(order as i64) as usize] += c;
        }
        z
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|n| BigRational::new(n.clone(), self.den.clone()))
            .collect()
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    fn normalize_den(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            for n in &mut self.num {
                *n = -&*n;
            }
        }
        if self.den.is_one() {
            return;
        }
        let g = self
            .num
            .iter()
            .fold(self.den.clone(), |acc, n| acc.gcd(n));
        if !g.is_one() && !g.is_zero() {
            self.den = &self.den / &g;
            for n in &mut self.num {
                *n = &*n / &g;
            }
        }
    }

    /// Re-express in Q(ζ_{order·m}).
    pub fn promote(&self, new_order: usize) -> Self {
        assert!(
            new_order.is_multiple_of(self.order),
            "order {} does not divide {}",
            self.order,
            new_order
        );
        if new_order == self.order {
            return self.clone();
        }
        let step = new_order / self.order;
        let mut num = vec![BigInt::zero(); new_order];
        for (i, c) in self.num.iter().enumerate() {
            num[i * step] = c.clone();
        }
        Cyclotomic {
            order: new_order,
            den: self.den.clone(),
            num,
        }
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        let n = a.order.lcm(&b.order);
        (a.promote(n), b.promote(n))
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        let (a, b) = Self::common(self, other);
        let den = a.den.lcm(&b.den);
        let fa = &den / &a.den;
        let fb = &den / &b.den;
        let num = a
            .num
            .iter()
            .zip(&b.num)
            .map(|(x, y)| {
                if negate {
                    x * &fa - y * &fb
                } else {
                    x * &fa + y * &fb
                }
            })
            .collect();
        let mut z = Cyclotomic {
            order: a.order,
            den,
            num,
        };
        z.normalize_den();
        z
    }

    fn convolve(&self, other: &Self) -> Self {
        let (a, b) = Self::common(self, other);
        let n = a.order;
        let mut num = vec![BigInt::zero(); n];
        let nz_b: Vec<(usize, &BigInt)> = b
            .num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        for (i, x) in a.num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for &(j, y) in &nz_b {
                let idx = if i + j >= n { i + j - n } else { i + j };
                num[idx] += x * y;
            }
        }
        let mut z = Cyclotomic {
            order: n,
            den: &a.den * &b.den,
            num,
        };
        z.normalize_den();
        z
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let mut z = Cyclotomic {
            order: self.order,
            den: &self.den * r.denom(),
            num: self.num.iter().map(|n| n * r.numer()).collect(),
        };
        z.normalize_den();
        z
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::one(self.order);
        let mut sq = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        acc
    }

    /// Applies the Galois automorphism ζ ↦ ζ^j.
    pub fn galois(&self, j: i64) -> Self {
        let n = self.order as i64;
        let mut num = vec![BigInt::zero(); self.order];
        for (i, c) in self.num.iter().enumerate() {
            if !c.is_zero() {
                num[(i as i64 * j).rem_euclid(n) as usize] += c;
            }
        }
        Cyclotomic {
            order: self.order,
            den: self.den.clone(),
            num,
        }
    }

    /// Complex conjugation, ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    /// Integer numerators reduced modulo Φ_N (degree < φ(N)); the value is
    /// this polynomial divided by the denominator.
    fn reduced_numerators(&self) -> Vec<BigInt> {
        let phi = cyclotomic_polynomial(self.order);
        let d = phi.len() - 1;
        let mut r = self.num.clone();
        for i in (d..r.len()).rev() {
            let c = std::mem::take(&mut r[i]);
            if c.is_zero() {
                continue;
            }
            for (j, pj) in phi.iter().enumerate().take(d) {
                r[i - d + j] -= &c * pj;
            }
        }
        r.truncate(d);
        r
    }

    /// Canonical coordinates in the power basis 1, ζ, …, ζ^{φ(N)-1}.
    pub fn canonical(&self) -> Vec<BigRational> {
        self.reduced_numerators()
            .into_iter()
            .map(|n| BigRational::new(n, self.den.clone()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.reduced_numerators().iter().all(Zero::is_zero)
    }

    /// Some(q) when the value lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        let r = self.reduced_numerators();
        if r.iter().skip(1).all(Zero::is_zero) {
            Some(BigRational::new(r[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// Multiplicative inverse via the norm: a⁻¹ = Π_{σ≠1} σ(a) / N(a).
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.order;
        let mut others = Self::one(n);
        for j in 2..n.max(2) {
            if j.gcd(&n) == 1 {
                others = &others * &self.galois(j as i64);
            }
        }
        let norm = (self * &others)
            .as_rational()
            .expect("norm of a cyclotomic number is rational");
        Some(others.scale(&norm.recip()))
    }

    pub fn eval(&self, prec: Precision) -> HpComplex {
        let mut ctx = Ctx::new(prec);
        self.eval_in(&mut ctx)
    }

    pub fn eval_in(&self, ctx: &mut Ctx) -> HpComplex {
        let mut acc = HpComplex::zero(ctx);
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = ctx.unit_root(i as i64, self.order as u64);
            let c = ctx.int(c);
            acc = acc.add(&term.scale(&c, ctx), ctx);
        }
        let den = ctx.int(&self.den);
        let inv = HpComplex::from_real(den, ctx).inv(ctx);
        acc.mul(&inv, ctx)
    }

    /// Double-precision embedding at ζ_N = e^{2πi/N}.
    pub fn to_c64(&self) -> Complex64 {
        let n = self.order as f64;
        let den = bigint_to_f64(&self.den);
        self.num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let t = std::f64::consts::TAU * i as f64 / n;
                Complex64::from_polar(bigint_to_f64(c), t)
            })
            .sum::<Complex64>()
            / den
    }

    /// Σ|coefficient|, the scale of the embedding error bound.
    pub fn l1_norm(&self) -> f64 {
        let den = bigint_to_f64(&self.den);
        self.num.iter().map(|c| bigint_to_f64(c).abs()).sum::<f64>() / den
    }
}

pub(crate) fn bigint_to_f64(n: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(n).unwrap_or(f64::NAN)
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }
}

impl Eq for Cyclotomic {}

impl<'a> Add<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &'a Cyclotomic) -> Cyclotomic {
        self.combine(rhs, false)
    }
}

impl<'a> Sub<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &'a Cyclotomic) -> Cyclotomic {
        self.combine(rhs, true)
    }
}

impl<'a> Mul<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &'a Cyclotomic) -> Cyclotomic {
        self.convolve(rhs)
    }
}

impl Add for Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: Cyclotomic) -> Cyclotomic {
        &self + &rhs
    }
}

impl Sub for Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: Cyclotomic) -> Cyclotomic {
        &self - &rhs
    }
}

impl Mul for Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: Cyclotomic) -> Cyclotomic {
        &self * &rhs
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic {
            order: self.order,
            den: self.den.clone(),
            num: self.num.iter().map(|n| -n).collect(),
        }
    }
}

/// Arithmetic selector for [`cyclo_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

pub fn cyclo_root(order: usize, power: i64) -> Cyclotomic {
    Cyclotomic::root(order, power)
}

pub fn cyclo_arith(a: &Cyclotomic, b: &Cyclotomic, op: ArithOp) -> Cyclotomic {
    match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
    }
}

pub fn cyclo_eq(a: &Cyclotomic, b: &Cyclotomic) -> bool {
    a == b
}

pub fn cyclo_eval(a: &Cyclotomic, prec: Precision) -> HpComplex {
    a.eval(prec)
}

impl fmt::Display for Cyclotomic {
    /// Sparse ζ-polynomial, e.g. `1 + 2*z^3 - 1/2*z^5` with `z = ζ_N`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let r = BigRational::new(c.clone(), self.den.clone());
            let neg = r.is_negative();
            let mag = r.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => write!(f, "z^{i}")?,
                (_, false) => write!(f, "{mag}*z^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
