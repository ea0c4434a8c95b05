//! Text output with fixed float formatting.

use crate::loan::Schedule;

/// Significant digits in every emitted float.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`: twelve significant digits, trailing zeros dropped, exponent form
/// outside `1e-5 <= |v| < 1e12`. Negative zero prints as `0`.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIGNIFICANT_DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounded for display; never used in computation.
pub fn fmt_rounded(v: f64, decimals: Option<usize>) -> String {
    match decimals {
        None => fmt_float(v),
        Some(d) => {
            let s = format!("{v:.d$}");
            if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
                s.trim_start_matches('-').to_string()
            } else {
                s
            }
        }
    }
}

/// `n,d,a,y,q`; the `n = 0` row carries only the initial debt.
pub fn schedule_csv(schedule: &Schedule, decimals: Option<usize>) -> String {
    let f = |v| fmt_rounded(v, decimals);
    let mut out = String::from("n,d,a,y,q\n");
    out.push_str(&format!("0,{},,,\n", f(schedule.d[0])));
    for n in 1..=schedule.periods() {
        out.push_str(&format!(
            "{n},{},{},{},{}\n",
            f(schedule.d[n]),
            f(schedule.a[n - 1]),
            f(schedule.y[n - 1]),
            f(schedule.q[n - 1])
        ));
    }
    out
}

/// Header line plus rows of floats.
pub fn table_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>, decimals: Option<usize>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(|v| fmt_rounded(v, decimals)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loan::{solve_recurrence, LoanSpec};

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_float(23.852275688285914), "23.8522756883");
        assert_eq!(fmt_float(65.0), "65");
        assert_eq!(fmt_float(-0.0), "0");
        assert_eq!(fmt_float(0.1), "0.1");
        assert_eq!(fmt_float(1e-7), "1e-07");
        assert_eq!(fmt_float(-1.5e-9), "-1.5e-09");
        assert_eq!(fmt_float(1e12), "1e+12");
        assert_eq!(fmt_float(123456789012.0), "123456789012");
        assert_eq!(fmt_float(0.00012345), "0.00012345");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
    }

    #[test]
    fn rounding_is_presentation_only() {
        assert_eq!(fmt_rounded(23.852275688285914, Some(2)), "23.85");
        assert_eq!(fmt_rounded(-0.001, Some(2)), "0.00");
        assert_eq!(fmt_rounded(2.5, None), "2.5");
    }

    #[test]
    fn schedule_rows() {
        let s = solve_recurrence(&LoanSpec::german(100.0, 2, 0.2)).unwrap();
        assert_eq!(schedule_csv(&s, None), "n,d,a,y,q\n0,100,,,\n1,50,50,20,70\n2,0,50,10,60\n");
    }
}
