//! Canonical float formatting for CSV/JSON artifacts: 9 significant digits,
//! plain decimal notation where reasonable, scientific otherwise.

pub const SIG_DIGITS: i32 = 9;

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "NaN".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    if (-5..=12).contains(&mag) {
        let decimals = (SIG_DIGITS - 1 - mag).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
            return "0".to_string();
        }
        s
    } else {
        format!("{:.*e}", (SIG_DIGITS - 1) as usize, v)
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Round-trip a float through the canonical representation, so values held in
/// memory match what a downstream stage will read back from disk.
pub fn canonical(v: f64) -> f64 {
    fmt_f64(v).parse().unwrap_or(v)
}

/// JSON number rounded to 9 significant digits (serde_json prints the
/// shortest representation of the rounded value). Non-finite values map to null.
pub fn json_f64(v: f64) -> serde_json::Value {
    if !v.is_finite() {
        return serde_json::Value::Null;
    }
    serde_json::Number::from_f64(canonical(v))
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}
