//! Parsing of quantities with SI-prefixed unit suffixes, e.g. `50MHz`,
//! `300V`, `532nm`, `2.3pF`.

use crate::error::{Error, Result};

fn prefix_scale(prefix: &str) -> Option<f64> {
    Some(match prefix {
        "" => 1.0,
        "G" => 1e9,
        "M" => 1e6,
        "k" => 1e3,
        "m" => 1e-3,
        "u" | "µ" | "μ" => 1e-6,
        "n" => 1e-9,
        "p" => 1e-12,
        "f" => 1e-15,
        _ => return None,
    })
}

/// Parses `text` as a number with an optional SI prefix and the given base
/// unit (`"Hz"`, `"V"`, `"m"`, `"F"`, `"Ohm"`). A bare number is taken as SI.
pub fn parse_quantity(text: &str, unit: &str) -> Result<f64> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E')
                    && text[i + 1..]
                        .chars()
                        .next()
                        .is_some_and(|n| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    let (number, suffix) = text.split_at(split);
    let value: f64 = number
        .parse()
        .map_err(|_| Error::parse("quantity", format!("`{text}` is not a number")))?;
    let suffix = suffix.trim();
    let prefix = match suffix.strip_suffix(unit) {
        Some(p) => p,
        None if suffix.is_empty() => "",
        None => {
            return Err(Error::parse(
                "quantity",
                format!("`{text}`: expected unit {unit}"),
            ))
        }
    };
    let scale = prefix_scale(prefix)
        .ok_or_else(|| Error::parse("quantity", format!("`{text}`: unknown prefix `{prefix}`")))?;
    Ok(value * scale)
}

/// Parses a drive spec of the form `300V@50MHz` into (peak volts, hertz).
pub fn parse_drive(text: &str) -> Result<(f64, f64)> {
    let (v, f) = text
        .split_once('@')
        .ok_or_else(|| Error::parse("drive", format!("`{text}`: expected <volts>V@<freq>Hz")))?;
    Ok((parse_quantity(v, "V")?, parse_quantity(f, "Hz")?))
}

/// Formats a float deterministically: shortest round-trip digits, in
/// exponent form outside [1e-3, 1e7).
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
