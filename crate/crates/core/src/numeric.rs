//! Extended-precision complex numbers backing the complex embedding of
//! cyclotomic values and the normalized invariants.

use std::fmt;

use astro_float_num::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_complex::Complex64;

pub const DEFAULT_PRECISION: u32 = 30;
pub const MIN_PRECISION: u32 = 15;

const RM: RoundingMode = RoundingMode::ToEven;
const GUARD_BITS: usize = 64;

/// Working precision in decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision(u32);

impl Precision {
    pub fn digits(digits: u32) -> Self {
        Precision(digits.max(MIN_PRECISION))
    }

    pub fn decimal_digits(self) -> u32 {
        self.0
    }

    pub(crate) fn bits(self) -> usize {
        ((self.0 as f64) * std::f64::consts::LOG2_10).ceil() as usize + GUARD_BITS
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(DEFAULT_PRECISION)
    }
}

/// Shared state for one high-precision computation.
pub struct Ctx {
    pub(crate) bits: usize,
    consts: Consts,
    digits: u32,
}

impl Ctx {
    pub fn new(prec: Precision) -> Self {
        Ctx {
            bits: prec.bits(),
            consts: Consts::new().expect("astro-float constant cache"),
            digits: prec.decimal_digits(),
        }
    }

    pub fn precision(&self) -> Precision {
        Precision(self.digits)
    }

    pub fn pi(&mut self) -> BigFloat {
        self.consts.pi(self.bits, RM)
    }

    pub fn int(&mut self, n: &BigInt) -> BigFloat {
        BigFloat::parse(&n.to_string(), Radix::Dec, self.bits, RM, &mut self.consts)
    }

    pub fn real(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.bits)
    }

    pub fn sqrt(&mut self, x: &BigFloat) -> BigFloat {
        x.sqrt(self.bits, RM)
    }

    /// e^{2 pi i num/den}
    pub fn unit_root(&mut self, num: i64, den: u64) -> HpComplex {
        let n = num.rem_euclid(den as i64);
        let pi = self.pi();
        let two_pi = pi.mul(&BigFloat::from_i64(2, self.bits), self.bits, RM);
        let angle = two_pi
            .mul(&BigFloat::from_i64(n, self.bits), self.bits, RM)
            .div(&BigFloat::from_u64(den, self.bits), self.bits, RM);
        HpComplex {
            re: angle.cos(self.bits, RM, &mut self.consts),
            im: angle.sin(self.bits, RM, &mut self.consts),
        }
    }

    pub fn format(&mut self, x: &BigFloat) -> String {
        format_digits(x, self.digits as usize, &mut self.consts)
    }
}

fn format_digits(x: &BigFloat, digits: usize, cc: &mut Consts) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let s = x
        .format(Radix::Dec, RM, cc)
        .unwrap_or_else(|_| "NaN".to_string());
    // mantissa/exponent split, e.g. "-8.660254037e-1"
    let (mant, exp) = match s.find('e') {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().unwrap_or(0)),
        None => (s.as_str(), 0),
    };
    let (sign, body) = match mant.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mant),
    };
    let point = body.find('.').unwrap_or(body.len()) as i64;
    let mut ds: Vec<u8> = body.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
    let lead = match ds.iter().position(|&d| d != 0) {
        Some(i) => i,
        None => return "0".to_string(),
    };
    ds.drain(..lead);
    let mut exp = exp + point - 1 - lead as i64;
    ds.resize(ds.len().max(digits + 1), 0);
    let round_up = ds[digits] >= 5;
    ds.truncate(digits);
    if round_up {
        let mut i = digits;
        loop {
            if i == 0 {
                ds.insert(0, 1);
                ds.truncate(digits);
                exp += 1;
                break;
            }
            i -= 1;
            if ds[i] == 9 {
                ds[i] = 0;
            } else {
                ds[i] += 1;
                break;
            }
        }
    }
    let tail: String = ds[1..].iter().map(|d| char::from(b'0' + d)).collect();
    if tail.is_empty() {
        format!("{sign}{}e{exp}", ds[0])
    } else {
        format!("{sign}{}.{tail}e{exp}", ds[0])
    }
}

pub(crate) fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    x.to_string().parse::<f64>().unwrap_or(f64::NAN)
}

/// A complex number with `BigFloat` parts.
#[derive(Debug)]
pub struct HpComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Clone for HpComplex {
    fn clone(&self) -> Self {
        HpComplex {
            re: self.re.clone(),
            im: self.im.clone(),
        }
    }
}

impl HpComplex {
    pub fn zero(ctx: &Ctx) -> Self {
        HpComplex {
            re: BigFloat::from_i64(0, ctx.bits),
            im: BigFloat::from_i64(0, ctx.bits),
        }
    }

    pub fn one(ctx: &Ctx) -> Self {
        HpComplex {
            re: BigFloat::from_i64(1, ctx.bits),
            im: BigFloat::from_i64(0, ctx.bits),
        }
    }

    pub fn from_real(re: BigFloat, ctx: &Ctx) -> Self {
        HpComplex {
            re,
            im: BigFloat::from_i64(0, ctx.bits),
        }
    }

    pub fn add(&self, o: &Self, ctx: &Ctx) -> Self {
        HpComplex {
            re: self.re.add(&o.re, ctx.bits, RM),
            im: self.im.add(&o.im, ctx.bits, RM),
        }
    }

    pub fn sub(&self, o: &Self, ctx: &Ctx) -> Self {
        HpComplex {
            re: self.re.sub(&o.re, ctx.bits, RM),
            im: self.im.sub(&o.im, ctx.bits, RM),
        }
    }

    pub fn mul(&self, o: &Self, ctx: &Ctx) -> Self {
        let b = ctx.bits;
        HpComplex {
            re: self.re.mul(&o.re, b, RM).sub(&self.im.mul(&o.im, b, RM), b, RM),
            im: self.re.mul(&o.im, b, RM).add(&self.im.mul(&o.re, b, RM), b, RM),
        }
    }

    pub fn scale(&self, s: &BigFloat, ctx: &Ctx) -> Self {
        HpComplex {
            re: self.re.mul(s, ctx.bits, RM),
            im: self.im.mul(s, ctx.bits, RM),
        }
    }

    pub fn conj(&self) -> Self {
        HpComplex {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn norm_sqr(&self, ctx: &Ctx) -> BigFloat {
        let b = ctx.bits;
        self.re.mul(&self.re, b, RM).add(&self.im.mul(&self.im, b, RM), b, RM)
    }

    pub fn inv(&self, ctx: &Ctx) -> Self {
        let n = self.norm_sqr(ctx);
        let c = self.conj();
        HpComplex {
            re: c.re.div(&n, ctx.bits, RM),
            im: c.im.div(&n, ctx.bits, RM),
        }
    }

    pub fn div(&self, o: &Self, ctx: &Ctx) -> Self {
        self.mul(&o.inv(ctx), ctx)
    }

    pub fn powi(&self, e: i64, ctx: &Ctx) -> Self {
        let base = if e < 0 { self.inv(ctx) } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = HpComplex::one(ctx);
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&sq, ctx);
            }
            sq = sq.mul(&sq, ctx);
            n >>= 1;
        }
        acc
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }

    /// Decimal rendering with the context's digit count.
    /// A part smaller than the modulus by more than the working digits is written as 0.
    pub fn render(&self, ctx: &mut Ctx) -> (String, String) {
        let (re, im) = (ctx.format(&self.re), ctx.format(&self.im));
        let mag = |s: &str| s.rsplit_once('e').and_then(|(_, e)| e.parse::<i64>().ok());
        let floor = ctx.digits as i64;
        match (mag(&re), mag(&im)) {
            (Some(a), Some(b)) if b < a - floor => (re, "0".into()),
            (Some(a), Some(b)) if a < b - floor => ("0".into(), im),
            _ => (re, im),
        }
    }
}

impl fmt::Display for HpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.re, self.im)
    }
}
