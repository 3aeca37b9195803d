//! Rendering of exact rationals for CSV and JSON output.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::model::{rat, Rational};

fn pow10(e: u32) -> i128 {
    10i128.pow(e)
}

/// Decimal rendering rounded half away from zero to `digits` significant
/// digits, trailing fractional zeros removed.
pub fn format_sig(value: Rational, digits: u32) -> String {
    assert!(digits >= 1);
    if value.is_zero() {
        return "0".to_string();
    }
    let negative = value.is_negative();
    let abs = value.abs();

    // exponent e with 10^e <= abs < 10^(e+1)
    let mut e: i32 = 0;
    while abs >= rat(pow10((e + 1) as u32)) {
        e += 1;
    }
    while e > -38 && abs < scaled(1, e) {
        e -= 1;
    }

    let mut shift = digits as i32 - 1 - e;
    let scaled_value = abs * scaled(1, shift);
    let half = Rational::new(1, 2);
    let mut mantissa = (scaled_value + half).floor().to_integer();
    if mantissa == pow10(digits) {
        mantissa /= 10;
        shift -= 1;
    }

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if shift <= 0 {
        out.push_str(&(mantissa * pow10((-shift) as u32)).to_string());
        return out;
    }
    let (int_part, frac_part) = mantissa.div_rem(&pow10(shift as u32));
    out.push_str(&int_part.to_string());
    let frac = format!("{:0width$}", frac_part, width = shift as usize);
    let frac = frac.trim_end_matches('0');
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    out
}

fn scaled(n: i128, e: i32) -> Rational {
    if e >= 0 {
        rat(n * pow10(e as u32))
    } else {
        Rational::new(n, pow10((-e) as u32))
    }
}

pub fn to_f64(value: Rational) -> f64 {
    value.numer().to_f64().unwrap_or(f64::NAN) / value.denom().to_f64().unwrap_or(f64::NAN)
}

/// `{"exact": "8000/7", "value": 1142.857142857143}`.
pub mod rational_json {
    use serde::ser::SerializeStruct;
    use serde::Serializer;

    use super::to_f64;
    use crate::model::Rational;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rational", 2)?;
        st.serialize_field("exact", &value.to_string())?;
        st.serialize_field("value", &to_f64(*value))?;
        st.end()
    }
}
