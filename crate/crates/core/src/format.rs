/// Renders `x` with 12 significant digits, trailing zeros trimmed.
///
/// ```
/// use trc_core::format::fmt_num;
/// assert_eq!(fmt_num(0.5), "0.5");
/// assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
/// assert_eq!(fmt_num(-2.0), "-2");
/// ```
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-6..=15).contains(&magnitude) {
        let s = format!("{:.11e}", x);
        let (mantissa, exp) = s.split_once('e').expect("scientific notation");
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    // rounding can carry into a new leading digit (9.99.. -> 10.0)
    let s = trim_zeros(&s);
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
