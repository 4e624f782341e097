//! Text output shared by the library and the command-line tool.

use std::fmt::Write as _;

/// Shortest round-trip-stable rendering used in every CSV column.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with a header row; `rows` are already formatted fields.
pub fn csv<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let fields: Vec<&str> = r.iter().map(AsRef::as_ref).collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

/// `(x, y)` columns as CSV.
pub fn xy_csv(header: (&str, &str), xs: &[f64], ys: &[f64]) -> String {
    let rows: Vec<Vec<String>> = xs.iter().zip(ys).map(|(&x, &y)| vec![fmt_f64(x), fmt_f64(y)]).collect();
    csv(&[header.0, header.1], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, std::f64::consts::PI, 1e-300, 0.6881502511046631] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_layout() {
        assert_eq!(xy_csv(("a", "b"), &[1.0], &[2.0]), "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
    }
}
