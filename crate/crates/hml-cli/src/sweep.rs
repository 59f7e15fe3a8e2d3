//! Parameter sweep grammar: `key=a:b:n` produces `n` evenly spaced values
//! from `a` to `b` inclusive. Bounds accept plain numbers or multiples of pi
//! ("pi", "-pi", "2pi", "0.5pi").

use hml_core::{HmlError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<f64>,
}

/// One bound of a sweep range.
fn parse_bound(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Some(prefix) = t.strip_suffix("pi") {
        let factor = match prefix {
            "" => 1.0,
            "-" => -1.0,
            p => p.parse::<f64>().map_err(|_| {
                HmlError::config("sweep", format!("cannot parse \"{t}\" as a multiple of pi"))
            })?,
        };
        return Ok(factor * std::f64::consts::PI);
    }
    t.parse::<f64>()
        .map_err(|_| HmlError::config("sweep", format!("cannot parse \"{t}\" as a number")))
}

/// Parse `key=a:b:n`.
pub fn parse_sweep(spec: &str) -> Result<Sweep> {
    let (key, range) = spec.split_once('=').ok_or_else(|| {
        HmlError::config("sweep", format!("expected key=a:b:n, got \"{spec}\""))
    })?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(HmlError::config(
            "sweep",
            format!("expected key=a:b:n with three range fields, got \"{spec}\""),
        ));
    }
    let a = parse_bound(parts[0])?;
    let b = parse_bound(parts[1])?;
    let n: usize = parts[2].trim().parse().map_err(|_| {
        HmlError::config("sweep", format!("cannot parse \"{}\" as a point count", parts[2]))
    })?;
    if n == 0 {
        return Err(HmlError::config("sweep", "point count must be at least 1"));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(HmlError::config("sweep", "sweep bounds must be finite"));
    }
    let values = if n == 1 {
        vec![a]
    } else {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    };
    Ok(Sweep {
        key: key.trim().to_string(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_range() {
        let s = parse_sweep("h_over_d=0:2:100").unwrap();
        assert_eq!(s.key, "h_over_d");
        assert_eq!(s.values.len(), 100);
        assert_eq!(s.values[0], 0.0);
        assert_eq!(*s.values.last().unwrap(), 2.0);
    }

    #[test]
    fn parses_pi_bounds() {
        let s = parse_sweep("theta=0:pi:180").unwrap();
        assert_eq!(s.values.len(), 180);
        assert_eq!(*s.values.last().unwrap(), std::f64::consts::PI);
        let t = parse_sweep("theta=-pi:2pi:3").unwrap();
        assert_eq!(t.values[0], -std::f64::consts::PI);
        assert_eq!(t.values[2], 2.0 * std::f64::consts::PI);
        assert_eq!(parse_sweep("x=0.5pi:pi:1").unwrap().values[0], 0.5 * std::f64::consts::PI);
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(parse_sweep("nokey").is_err());
        assert!(parse_sweep("k=1:2").is_err());
        assert!(parse_sweep("k=1:2:0").is_err());
        assert!(parse_sweep("k=a:2:3").is_err());
        assert!(parse_sweep("k=1:2:x").is_err());
    }
}
