//! Result rows and their CSV form.

use std::fmt::Write as _;

pub const HEADER: &str = "scenario,alpha,type_or_x,action,cost,solver,residual,iterations";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scenario: String,
    pub alpha: f64,
    /// 1-based type index for finite games, the type `x` for continuum ones.
    pub type_or_x: f64,
    pub action: f64,
    pub cost: f64,
    pub solver: &'static str,
    pub residual: f64,
    pub iterations: usize,
}

/// `printf("%.12g")`: 12 significant digits, trailing zeros dropped.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -4 || exp >= DIGITS {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn to_csv(rows: &[Row]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.scenario,
            fmt_g(r.alpha),
            fmt_g(r.type_or_x),
            fmt_g(r.action),
            fmt_g(r.cost),
            r.solver,
            fmt_g(r.residual),
            r.iterations
        );
    }
    out
}
