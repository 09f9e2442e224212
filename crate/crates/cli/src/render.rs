//! Number rendering shared by the subcommands.

use num_complex::Complex64;
use serde_json::{json, Number, Value};
use wrt_core::numeric::Ctx;
use wrt_core::{Cyclotomic, HpComplex};

/// A decimal string as a verbatim JSON number.
pub fn number(s: &str) -> Value {
    match s.parse::<Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::String(s.to_string()),
    }
}

pub fn hp(z: &HpComplex, ctx: &mut Ctx) -> Value {
    let (re, im) = z.render(ctx);
    json!([number(&re), number(&im)])
}

/// Embedding that is exact on rational values, zero included.
pub fn embed(z: &Cyclotomic, ctx: &mut Ctx) -> HpComplex {
    match z.as_rational() {
        Some(q) => {
            let (n, d) = (ctx.int(q.numer()), ctx.int(q.denom()));
            HpComplex::from_real(n, ctx).div(&HpComplex::from_real(d, ctx), ctx)
        }
        None => z.eval_in(ctx),
    }
}

/// Exact value with its numeric embedding.
pub fn exact(z: &Cyclotomic, ctx: &mut Ctx) -> Value {
    let v = embed(z, ctx);
    json!({ "exact": z.to_string(), "order": z.order(), "value": hp(&v, ctx) })
}

/// f64 values are written in shortest round-trip form.
pub fn float(x: f64) -> Value {
    number(&format!("{x:?}"))
}

pub fn complex(z: Complex64) -> Value {
    json!([float(z.re), float(z.im)])
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}
