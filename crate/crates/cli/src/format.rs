/// Twelve significant digits: fixed notation for `1e-4 <= |x| < 1e12`, scientific otherwise.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    if x == 0.0 {
        return "0.00000000000".into();
    }
    // The exponent after rounding to 12 digits, so 9.9999999999999 counts as 1e1.
    let exp10: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-4..12).contains(&exp10) {
        let decimals = (11 - exp10) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), num)
}
