//! JSON output with floats written to 17 significant digits.

use serde_json::{Number, Value};

/// `%.17g`, keeping a trailing `.0` on integral values so they stay floats.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0" } else { "0.0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();

    let body = if (-5..17).contains(&exp) {
        let (int, frac) = if exp >= 0 {
            let split = exp as usize + 1;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            ("0".to_string(), format!("{zeros}{digits}"))
        };
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            format!("{int}.0")
        } else {
            format!("{int}.{frac}")
        }
    } else {
        let frac = digits[1..].trim_end_matches('0');
        let lead = &digits[..1];
        if frac.is_empty() {
            format!("{lead}e{exp}")
        } else {
            format!("{lead}.{frac}e{exp}")
        }
    };
    format!("{sign}{body}")
}

/// Rewrites every float in `value`; non-finite floats become `null`.
pub fn fix_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *value = if x.is_finite() {
                let text = format_g17(x);
                Value::Number(text.parse::<Number>().expect("valid JSON number"))
            } else {
                Value::Null
            };
        }
        Value::Array(items) => items.iter_mut().for_each(fix_floats),
        Value::Object(map) => map.values_mut().for_each(fix_floats),
        _ => {}
    }
}

pub fn render(mut value: Value) -> String {
    fix_floats(&mut value);
    serde_json::to_string_pretty(&value).expect("serializable value")
}
