//! Number formatting and CSV assembly.

use anyhow::Result;

/// Nine significant digits, trailing zeros trimmed; scientific notation outside `[1e-6, 1e15)`.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-6..15).contains(&mag) {
        let s = format!("{x:.8e}");
        let (m, e) = s.split_once('e').expect("exponent");
        return format!("{}e{e}", trim(m));
    }
    let decimals = (8 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit, leaving ten significant digits
    let digits = s.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
    let s = if digits.trim_start_matches('0').len() > 9 && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    };
    trim(&s).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `header` and `rows` as CSV text.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Parses `"a:b:step"` (inclusive) or a comma list into a grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"));
    if parts.len() == 3 {
        let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || b < a {
            return Err("grid needs a positive step and start <= end".into());
        }
        let k = ((b - a) / step + 1e-9).floor() as u64;
        // round away accumulated drift so that 0.1 * 3 prints as 0.3
        return Ok((0..=k).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect());
    }
    let grid: Vec<f64> = s.split(',').map(num).collect::<Result<_, _>>()?;
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err("grid must be strictly increasing".into());
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(sig9(4.0 / 3.0), "1.33333333");
        assert_eq!(sig9(2.0), "2");
        assert_eq!(sig9(0.5), "0.5");
        assert_eq!(sig9(9.9999999996), "10");
        assert_eq!(sig9(123456.7891234), "123456.789");
        assert_eq!(sig9(1.5e-9), "1.5e-9");
        assert_eq!(sig9(-0.00123456789123), "-0.00123456789");
    }

    #[test]
    fn grids() {
        let g = parse_grid("0.1:3.0:0.1").unwrap();
        assert_eq!(g.len(), 30);
        assert_eq!(g[2], 0.3);
        assert_eq!(*g.last().unwrap(), 3.0);
        assert_eq!(parse_grid("0.5,1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert!(parse_grid("1,1").is_err());
    }
}
