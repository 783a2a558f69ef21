//! Parsing of `A:B:STEP` ranges and comma lists.

/// Inclusive range `A:B:STEP`. The point count is rounded so that the end
/// point survives floating-point noise in the step.
pub fn parse_range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected A:B:STEP, found `{text}`"));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number"))
    };
    let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) || !(b >= a) {
        return Err(format!("range `{text}` needs STEP > 0 and B ≥ A"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| a + step * i as f64).collect())
}

/// Either a range or a comma-separated list.
pub fn parse_list_or_range(text: &str) -> Result<Vec<f64>, String> {
    if text.contains(':') {
        return parse_range(text);
    }
    let vals: Result<Vec<f64>, String> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{s}` is not a number"))
        })
        .collect();
    let vals = vals?;
    if vals.is_empty() {
        return Err("empty list".into());
    }
    Ok(vals)
}
