//! Sequence-spec mini-language.
//!
//! Base specs: `gevrey:alpha=2`, `qgevrey:q=2,sigma=3`, `power:tau=1,sigma=2`,
//! `qpp:q=2`, `logpert:alpha=1,beta=-0.5`, `oscillating`, `file:PATH`
//! (CSV with header `p,log_m_p`, rows contiguous from p=0).
//! Modifiers, applied left to right: `|hat`, `|check`, `|shift1`, `|tilde`,
//! `|prod(SPEC)`.

use std::collections::BTreeMap;

use super::{Family, QuotientSpec, WeightSequence};
use crate::error::{Result, WsqError};

pub fn parse_spec(input: &str) -> Result<WeightSequence> {
    WeightSequence::new(parse_quotient_spec(input)?)
}

pub fn parse_quotient_spec(input: &str) -> Result<QuotientSpec> {
    let parts = split_top_level(input.trim())?;
    let (base, modifiers) = parts
        .split_first()
        .ok_or_else(|| WsqError::Parse("empty spec".into()))?;
    let mut spec = parse_base(base)?;
    for m in modifiers {
        spec = apply_modifier(spec, m)?;
    }
    Ok(spec)
}

fn split_top_level(s: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| WsqError::Parse(format!("unbalanced ')' in `{s}`")))?;
            }
            '|' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(WsqError::Parse(format!("unbalanced '(' in `{s}`")));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

fn parse_base(s: &str) -> Result<QuotientSpec> {
    let s = s.trim();
    let (name, rest) = match s.find(':') {
        Some(i) => (&s[..i], &s[i + 1..]),
        None => (s, ""),
    };
    match name {
        "gevrey" => {
            let kv = parse_kv(rest)?;
            Ok(QuotientSpec::ClosedForm(Family::Gevrey {
                alpha: get(&kv, "alpha", s)?,
            }))
        }
        "logpert" => {
            let kv = parse_kv(rest)?;
            Ok(QuotientSpec::ClosedForm(Family::LogPerturbedGevrey {
                alpha: get(&kv, "alpha", s)?,
                beta: get(&kv, "beta", s)?,
            }))
        }
        "qgevrey" => {
            let kv = parse_kv(rest)?;
            Ok(QuotientSpec::ClosedForm(Family::QGevrey {
                q: get(&kv, "q", s)?,
                sigma: get(&kv, "sigma", s)?,
            }))
        }
        "power" => {
            let kv = parse_kv(rest)?;
            Ok(QuotientSpec::ClosedForm(Family::PowerFamily {
                tau: get(&kv, "tau", s)?,
                sigma: get(&kv, "sigma", s)?,
            }))
        }
        "qpp" => {
            let kv = parse_kv(rest)?;
            Ok(QuotientSpec::ClosedForm(Family::QPowPow {
                q: get(&kv, "q", s)?,
            }))
        }
        "oscillating" => Ok(QuotientSpec::ClosedForm(Family::OscillatingSm)),
        "file" => {
            if rest.is_empty() {
                return Err(WsqError::Parse("file: needs a path".into()));
            }
            Ok(QuotientSpec::ExplicitTable(read_quotient_csv(rest)?))
        }
        other => Err(WsqError::Parse(format!("unknown sequence family `{other}`"))),
    }
}

fn apply_modifier(spec: QuotientSpec, m: &str) -> Result<QuotientSpec> {
    let m = m.trim();
    if m == "hat" {
        return Ok(QuotientSpec::Hat(Box::new(spec)));
    }
    if m == "check" {
        return Ok(QuotientSpec::Check(Box::new(spec)));
    }
    if m == "tilde" {
        return Ok(QuotientSpec::Tilde(Box::new(spec)));
    }
    if let Some(k) = m.strip_prefix("shift") {
        let k: usize = k
            .parse()
            .map_err(|_| WsqError::Parse(format!("bad shift modifier `{m}`")))?;
        return Ok(QuotientSpec::Shift {
            base: Box::new(spec),
            k,
        });
    }
    if let Some(inner) = m.strip_prefix("prod(").and_then(|r| r.strip_suffix(')')) {
        let other = parse_quotient_spec(inner)?;
        return Ok(QuotientSpec::Product(Box::new(spec), Box::new(other)));
    }
    Err(WsqError::Parse(format!("unknown modifier `{m}`")))
}

fn parse_kv(s: &str) -> Result<BTreeMap<String, f64>> {
    let mut kv = BTreeMap::new();
    for piece in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = piece
            .split_once('=')
            .ok_or_else(|| WsqError::Parse(format!("expected key=value, got `{piece}`")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| WsqError::Parse(format!("bad number `{v}`")))?;
        kv.insert(k.trim().to_string(), value);
    }
    Ok(kv)
}

fn get(kv: &BTreeMap<String, f64>, key: &str, ctx: &str) -> Result<f64> {
    kv.get(key)
        .copied()
        .ok_or_else(|| WsqError::Parse(format!("missing parameter `{key}` in `{ctx}`")))
}

/// Reads the `p,log_m_p` CSV layout; rows must be contiguous from p=0.
pub fn read_quotient_csv(path: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let p: u64 = rec
            .get(0)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| WsqError::Parse(format!("row {row}: bad index")))?;
        let v: f64 = rec
            .get(1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| WsqError::Parse(format!("row {row}: bad log_m_p")))?;
        if p != row as u64 {
            return Err(WsqError::NonContiguousTable {
                row,
                got: p,
                expected: row as u64,
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(WsqError::EmptyTable);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families_and_modifiers() {
        let s = parse_spec("gevrey:alpha=2").unwrap();
        assert!((s.log_quotient(3).unwrap() - 2.0 * 4.0f64.ln()).abs() < 1e-12);

        let s = parse_spec("qgevrey:q=2,sigma=3|shift1").unwrap();
        // quotient at p is base quotient at p+1
        let base = parse_spec("qgevrey:q=2,sigma=3").unwrap();
        assert_eq!(
            s.log_quotient(4).unwrap().to_bits(),
            base.log_quotient(5).unwrap().to_bits()
        );

        let s = parse_spec("gevrey:alpha=1|prod(gevrey:alpha=1)").unwrap();
        let g2 = parse_spec("gevrey:alpha=2").unwrap();
        assert!((s.log_term(10).unwrap() - g2.log_term(10).unwrap()).abs() < 1e-12);

        assert!(parse_spec("qpp:q=2|tilde").is_ok());
        assert!(parse_spec("nonsense:x=1").is_err());
        assert!(parse_spec("gevrey:alpha=2|bogus").is_err());
        assert!(parse_spec("gevrey:beta=2").is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let dir = std::env::temp_dir().join("wsq_parse_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("seq.csv");
        std::fs::write(&path, "p,log_m_p\n0,0.0\n1,0.5\n2,1.25\n").unwrap();
        let s = parse_spec(&format!("file:{}", path.display())).unwrap();
        assert_eq!(s.horizon(), 2);
        assert_eq!(s.log_quotient(2).unwrap(), 1.25);

        std::fs::write(&path, "p,log_m_p\n0,0.0\n2,1.0\n").unwrap();
        assert!(parse_spec(&format!("file:{}", path.display())).is_err());
    }
}
