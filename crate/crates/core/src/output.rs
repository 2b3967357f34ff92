//! Locale-independent numeric formatting and CSV assembly.
//!
//! All CSV output uses `.` as the decimal separator, LF line endings, and
//! 12 significant digits, so identical runs produce byte-identical files.

/// Format with `sig` significant digits, plain decimal where readable and
/// scientific otherwise (the usual %g split).
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..sig as i32).contains(&exp) {
        let prec = (sig as i32 - 1 - exp).max(0) as usize;
        format!("{x:.prec$}")
    } else {
        format!("{x:.prec$e}", prec = sig - 1)
    }
}

/// One CSV line from already-formatted cells.
pub fn csv_line(cells: &[String]) -> String {
    let mut line = cells.join(",");
    line.push('\n');
    line
}

/// Assemble a CSV document: header plus one row per record, every numeric
/// cell at 12 significant digits.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&csv_line(
        &header.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
    ));
    for row in rows {
        out.push_str(&csv_line(
            &row.iter().map(|&x| fmt_sig(x, 12)).collect::<Vec<_>>(),
        ));
    }
    out
}
