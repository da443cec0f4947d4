//! Text formats and the command-line front end.

mod commands;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use commands::{run, Cli, Command, EXIT_COMPUTATION, EXIT_OK, EXIT_USAGE};

use crate::approximation::{ApproxProfile, JacksonRow};
use crate::error::{DecayError, Result};
use crate::matrix_core::{DecayMatrix, IndexGeometry};
use crate::norms::{NormTag, SideDiagonalProfile, Weight};
use crate::smoothness::Probe;

fn parse_error(position: usize, message: impl Into<String>) -> DecayError {
    DecayError::Parse {
        position,
        message: message.into(),
    }
}

/// A `:`-separated token and its byte offset in the source.
#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    at: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut at = 0;
    text.split(':')
        .map(|t| {
            let tok = Token { text: t, at };
            at += t.len() + 1;
            tok
        })
        .collect()
}

fn number(tok: Token<'_>) -> Result<f64> {
    let v: f64 = tok
        .text
        .parse()
        .map_err(|_| parse_error(tok.at, format!("expected a number, found {:?}", tok.text)))?;
    if !v.is_finite() {
        return Err(parse_error(tok.at, "parameter must be finite"));
    }
    Ok(v)
}

fn positive(tok: Token<'_>) -> Result<f64> {
    let v = number(tok)?;
    if v <= 0.0 {
        return Err(parse_error(tok.at, format!("parameter must be > 0, got {v}")));
    }
    Ok(v)
}

fn nonnegative(tok: Token<'_>) -> Result<f64> {
    let v = number(tok)?;
    if v < 0.0 {
        return Err(parse_error(tok.at, format!("parameter must be >= 0, got {v}")));
    }
    Ok(v)
}

fn parse_weight(kind: Token<'_>, param: Token<'_>) -> Result<Weight> {
    match kind.text {
        "poly" => Weight::polynomial(nonnegative(param)?),
        "aniso" => {
            let mut parts = param.text.split(',');
            let mut at = param.at;
            let first = parts.next().unwrap_or_default();
            let r = nonnegative(Token { text: first, at })?;
            at += first.len() + 1;
            let mut alpha = Vec::new();
            for p in parts {
                let a: u32 = p
                    .parse()
                    .map_err(|_| parse_error(at, format!("expected an integer exponent, found {p:?}")))?;
                alpha.push(a);
                at += p.len() + 1;
            }
            Weight::anisotropic(r, alpha)
        }
        "table" => Err(parse_error(kind.at, "table weights cannot be given inline")),
        other => Err(parse_error(kind.at, format!("unknown weight kind {other:?}"))),
    }
}

fn parse_tokens(tokens: &[Token<'_>], end: usize) -> Result<NormTag> {
    let Some(head) = tokens.first() else {
        return Err(parse_error(end, "missing norm name"));
    };
    let arity = |n: usize| -> Result<()> {
        match tokens.get(n) {
            Some(extra) => Err(parse_error(extra.at - 1, "unexpected trailing input")),
            None if tokens.len() < n => Err(parse_error(end, format!("{:?} needs a parameter", head.text))),
            None => Ok(()),
        }
    };
    match head.text {
        "opl2" => {
            arity(1)?;
            Ok(NormTag::OperatorL2)
        }
        "jaffard" => {
            arity(2)?;
            Ok(NormTag::Jaffard(positive(tokens[1])?))
        }
        "schur" => {
            arity(2)?;
            Ok(NormTag::Schur(nonnegative(tokens[1])?))
        }
        "cd" => {
            arity(2)?;
            Ok(NormTag::ConvDom(nonnegative(tokens[1])?))
        }
        "weighted" => {
            if tokens.len() < 4 {
                return Err(parse_error(end, "expected weighted:<base>:<weight>:<param>"));
            }
            let n = tokens.len();
            let base = parse_tokens(&tokens[1..n - 2], tokens[n - 2].at)?;
            let weight = parse_weight(tokens[n - 2], tokens[n - 1])?;
            NormTag::weighted(base, weight).map_err(|e| parse_error(head.at, e.to_string()))
        }
        "" => Err(parse_error(head.at, "missing norm name")),
        other => Err(parse_error(head.at, format!("unknown norm {other:?}"))),
    }
}

/// Parse `opl2 | jaffard:<r> | schur:<r> | cd:<r> | weighted:<base>:poly:<r>`
/// (also `weighted:<base>:aniso:<r>,<a1>,...`). Errors carry a byte offset.
pub fn parse_norm_tag(text: &str) -> Result<NormTag> {
    if text.trim().is_empty() {
        return Err(parse_error(0, "empty norm tag"));
    }
    parse_tokens(&tokenize(text), text.len())
}

impl FromStr for NormTag {
    type Err = DecayError;

    fn from_str(s: &str) -> Result<Self> {
        parse_norm_tag(s)
    }
}

/// Parse `torus:<N>` or `window:<n>` in `d` dimensions.
pub fn parse_geometry(text: &str, d: usize) -> Result<IndexGeometry> {
    let tokens = tokenize(text);
    if tokens.len() != 2 {
        return Err(parse_error(0, "expected torus:<N> or window:<n>"));
    }
    let size: usize = tokens[1]
        .text
        .parse()
        .map_err(|_| parse_error(tokens[1].at, format!("expected a size, found {:?}", tokens[1].text)))?;
    match tokens[0].text {
        "torus" => IndexGeometry::torus(size, d),
        "window" => IndexGeometry::window(size, d),
        other => Err(parse_error(0, format!("unknown geometry {other:?}"))),
    }
}

/// On-disk matrix: geometry plus row-major entries as `[re, im]` pairs.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    geometry: IndexGeometry,
    entries: Vec<[f64; 2]>,
}

pub fn matrix_to_json(a: &DecayMatrix) -> Result<String> {
    if let Some(position) = a.entries().iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(DecayError::NonFinite { position });
    }
    let file = MatrixFile {
        geometry: *a.geometry(),
        entries: a.entries().iter().map(|z| [z.re, z.im]).collect(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn matrix_from_json(text: &str) -> Result<DecayMatrix> {
    let file: MatrixFile = serde_json::from_str(text)?;
    let data = file
        .entries
        .into_iter()
        .map(|[re, im]| Complex64::new(re, im))
        .collect();
    DecayMatrix::from_entries(file.geometry, data)
}

pub fn write_matrix(path: &Path, a: &DecayMatrix) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(matrix_to_json(a)?.as_bytes())?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DecayMatrix> {
    matrix_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Columns `m_1..m_d, value`, one row per difference in lexicographic order.
pub fn write_profile_csv<W: Write>(out: W, profile: &SideDiagonalProfile) -> Result<()> {
    let d = profile.geometry().dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=d).map(|j| format!("m_{j}")).collect();
    header.push("value".into());
    w.write_record(&header)?;
    for (m, v) in profile.iter() {
        let mut row: Vec<String> = m.as_slice().iter().map(i64::to_string).collect();
        row.push(v.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `N, E_N, norm_tag, flag`.
pub fn write_approx_csv<W: Write>(out: W, profile: &ApproxProfile) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "E_N", "norm_tag", "flag"])?;
    let tag = profile.tag.to_string();
    let flag = profile.flag.to_string();
    for (n, e) in &profile.errors {
        w.write_record([n.to_string(), e.to_string(), tag.clone(), flag.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `n, vdp_error, modulus_estimate`.
pub fn write_jackson_csv<W: Write>(out: W, rows: &[JacksonRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "vdp_error", "modulus_estimate"])?;
    for r in rows {
        w.write_record([r.n.to_string(), r.vdp_error.to_string(), r.modulus_estimate.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One probe of a Hölder-Zygmund seminorm evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct HzProbeRow {
    /// Derivation multi-index, formatted.
    pub alpha: String,
    pub probe: Probe,
    /// `||Delta_t^2 delta^alpha A||`.
    pub value: f64,
    /// `value / |t|^eta`.
    pub scaled: f64,
}

/// Columns `alpha, t_1..t_d, t_norm1, value, scaled`.
pub fn write_hz_csv<W: Write>(out: W, d: usize, rows: &[HzProbeRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["alpha".to_string()];
    header.extend((1..=d).map(|j| format!("t_{j}")));
    header.extend(["t_norm1", "value", "scaled"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.alpha.clone()];
        rec.extend(r.probe.t.iter().map(f64::to_string));
        rec.push(r.probe.norm1.to_string());
        rec.push(r.value.to_string());
        rec.push(r.scaled.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(e: DecayError) -> usize {
        match e {
            DecayError::Parse { position, .. } => position,
            other => panic!("not a parse error: {other}"),
        }
    }

    #[test]
    fn simple_tags() {
        assert_eq!(parse_norm_tag("jaffard:2.5").unwrap(), NormTag::Jaffard(2.5));
        assert_eq!(parse_norm_tag("cd:0").unwrap(), NormTag::ConvDom(0.0));
        assert_eq!(parse_norm_tag("schur:1").unwrap(), NormTag::Schur(1.0));
        assert_eq!(parse_norm_tag("opl2").unwrap(), NormTag::OperatorL2);
        assert_eq!("cd:3".parse::<NormTag>().unwrap(), NormTag::ConvDom(3.0));
    }

    #[test]
    fn malformed_tags_report_positions() {
        assert_eq!(pos(parse_norm_tag("jaffard:-1").unwrap_err()), 8);
        assert_eq!(pos(parse_norm_tag("jaffard:0").unwrap_err()), 8);
        assert_eq!(pos(parse_norm_tag("").unwrap_err()), 0);
        assert_eq!(pos(parse_norm_tag("frob").unwrap_err()), 0);
        assert_eq!(pos(parse_norm_tag("cd").unwrap_err()), 2);
        assert_eq!(pos(parse_norm_tag("cd:1:2").unwrap_err()), 4);
        assert_eq!(pos(parse_norm_tag("opl2:1").unwrap_err()), 4);
        assert_eq!(pos(parse_norm_tag("schur:x").unwrap_err()), 6);
        assert_eq!(pos(parse_norm_tag("weighted:cd:1:cube:2").unwrap_err()), 14);
        assert_eq!(pos(parse_norm_tag("weighted:cd:1:poly:-2").unwrap_err()), 19);
        assert_eq!(pos(parse_norm_tag("jaffard:nan").unwrap_err()), 8);
    }

    #[test]
    fn weighted_tags_nest() {
        let t = parse_norm_tag("weighted:weighted:cd:0:poly:1:poly:0.5").unwrap();
        assert_eq!(t.weight_depth(), 2);
        assert!(parse_norm_tag("weighted:weighted:weighted:cd:0:poly:1:poly:1:poly:1").is_err());
        let a = parse_norm_tag("weighted:schur:0:aniso:2,1,0").unwrap();
        assert_eq!(
            a,
            NormTag::weighted(NormTag::Schur(0.0), Weight::anisotropic(2.0, vec![1, 0]).unwrap()).unwrap()
        );
    }

    #[test]
    fn tags_round_trip_through_display() {
        for s in [
            "opl2",
            "jaffard:2.5",
            "schur:0",
            "cd:1.25",
            "weighted:opl2:poly:1.5",
            "weighted:weighted:jaffard:3:poly:1:aniso:0.5,2,0",
        ] {
            let t = parse_norm_tag(s).unwrap();
            assert_eq!(t.to_string(), s);
            assert_eq!(parse_norm_tag(&t.to_string()).unwrap(), t);
        }
    }

    #[test]
    fn geometry_strings() {
        assert_eq!(parse_geometry("torus:33", 2).unwrap(), IndexGeometry::torus(33, 2).unwrap());
        assert_eq!(parse_geometry("window:4", 1).unwrap(), IndexGeometry::window(4, 1).unwrap());
        assert!(parse_geometry("torus:32", 1).is_err());
        assert!(parse_geometry("ring:5", 1).is_err());
        assert!(parse_geometry("torus", 1).is_err());
    }

    #[test]
    fn matrix_json_is_bit_exact() {
        let g = IndexGeometry::torus(5, 1).unwrap();
        let a = DecayMatrix::from_fn(g, |k, l| {
            Complex64::new((k[0].abs() as f64 + 0.1).sqrt() / 3.0, 1.0 / (l[0] as f64 + 7.0))
        });
        let back = matrix_from_json(&matrix_to_json(&a).unwrap()).unwrap();
        for (x, y) in a.entries().iter().zip(back.entries()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn bad_matrix_json_is_rejected() {
        let short = r#"{"geometry":{"kind":"torus","d":1,"size":3},"entries":[[1,0]]}"#;
        assert!(matches!(matrix_from_json(short), Err(DecayError::EntryCount { .. })));
        let nan = r#"{"geometry":{"kind":"torus","d":1,"size":3},"entries":[[1,0],[null,0],[0,0]]}"#;
        assert!(matrix_from_json(nan).is_err());
        let even = r#"{"geometry":{"kind":"torus","d":1,"size":4},"entries":[]}"#;
        assert!(matrix_from_json(even).is_err());
        let g = IndexGeometry::torus(3, 1).unwrap();
        let nan = DecayMatrix::from_fn(g, |_, _| Complex64::new(f64::NAN, 0.0));
        assert!(matches!(matrix_to_json(&nan), Err(DecayError::NonFinite { position: 0 })));
    }
}
