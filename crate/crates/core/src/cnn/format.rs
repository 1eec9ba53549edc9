//! Plain-text network formats.
//!
//! Shallow nets:
//!
//! ```text
//! shallow k d N
//! a v_1 ... v_{d+1}        (N lines)
//! ```
//!
//! CNNs:
//!
//! ```text
//! cnn s L d
//! filter w_0 ... w_s                      (L lines, layer 0 first)
//! bias h_1 ... h_s m t_1 ... t_s          (L − 1 block biases)
//! bias b_1 ... b_{d+Ls}                   (last layer)
//! output c_0 c_1 ... c_{d+Ls}
//! ```
//!
//! Blank lines and `#` comments are ignored. Numbers are written with 17
//! significant digits. A shallow file starting with `{` is read as JSON
//! `{"k": .., "d": .., "units": [{"a": .., "v": [..]}, ..]}`.

use std::fmt::Write as _;

use serde::Deserialize;

use super::{BlockBias, DeepCNN, Filter};
use crate::error::{Error, Result};
use crate::network::{ShallowNet, Unit};

/// 17 significant digits; negative zero prints as zero.
pub fn fmt_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then(|| (i + 1, l.split_whitespace().collect()))
    })
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse '{tok}'") })
}

fn parse_floats(toks: &[&str], line: usize) -> Result<Vec<f64>> {
    toks.iter().map(|t| parse_num(t, line)).collect()
}

pub fn write_shallow(net: &ShallowNet) -> String {
    let mut out = format!("shallow {} {} {}\n", net.k(), net.d(), net.len());
    for u in net.units() {
        out.push_str(&fmt_f64(u.a));
        for v in &u.v {
            let _ = write!(out, " {}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

#[derive(Deserialize)]
struct JsonUnit {
    a: f64,
    v: Vec<f64>,
}

#[derive(Deserialize)]
struct JsonNet {
    k: u32,
    d: usize,
    units: Vec<JsonUnit>,
}

pub fn read_shallow(text: &str) -> Result<ShallowNet> {
    if text.trim_start().starts_with('{') {
        let j: JsonNet = serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        let units = j.units.into_iter().map(|u| Unit { a: u.a, v: u.v }).collect();
        return ShallowNet::new(j.k, j.d, units);
    }
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    if header.len() != 4 || header[0] != "shallow" {
        return Err(Error::Parse { line: hl, msg: "expected header 'shallow k d N'".into() });
    }
    let k: u32 = parse_num(header[1], hl)?;
    let d: usize = parse_num(header[2], hl)?;
    let n: usize = parse_num(header[3], hl)?;
    let mut units = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, toks) = lines.next().ok_or(Error::Parse {
            line: hl,
            msg: format!("expected {n} unit lines"),
        })?;
        if toks.len() != d + 2 {
            return Err(Error::Parse { line: ln, msg: format!("expected {} numbers", d + 2) });
        }
        let vals = parse_floats(&toks, ln)?;
        units.push(Unit { a: vals[0], v: vals[1..].to_vec() });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse { line: ln, msg: "unexpected trailing content".into() });
    }
    ShallowNet::new(k, d, units)
}

fn push_row(out: &mut String, tag: &str, vals: impl IntoIterator<Item = f64>) {
    out.push_str(tag);
    for v in vals {
        let _ = write!(out, " {}", fmt_f64(v));
    }
    out.push('\n');
}

pub fn write_cnn(cnn: &DeepCNN) -> String {
    let mut out = format!("cnn {} {} {}\n", cnn.s(), cnn.depth(), cnn.d());
    for f in cnn.filters() {
        push_row(&mut out, "filter", f.taps().iter().copied());
    }
    for b in cnn.hidden_biases() {
        push_row(&mut out, "bias", b.head.iter().copied().chain([b.middle]).chain(b.tail.iter().copied()));
    }
    push_row(&mut out, "bias", cnn.last_bias().iter().copied());
    push_row(
        &mut out,
        "output",
        std::iter::once(cnn.output_bias()).chain(cnn.output_weights().iter().copied()),
    );
    out
}

pub fn read_cnn(text: &str) -> Result<DeepCNN> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    if header.len() != 4 || header[0] != "cnn" {
        return Err(Error::Parse { line: hl, msg: "expected header 'cnn s L d'".into() });
    }
    let s: usize = parse_num(header[1], hl)?;
    let l: usize = parse_num(header[2], hl)?;
    let d: usize = parse_num(header[3], hl)?;
    if s == 0 || l == 0 || d == 0 {
        return Err(Error::Parse { line: hl, msg: "s, L and d must be positive".into() });
    }
    let mut expect = |tag: &str, count: usize| -> Result<Vec<f64>> {
        let (ln, toks) =
            lines.next().ok_or(Error::Parse { line: hl, msg: format!("missing '{tag}' line") })?;
        if toks[0] != tag || toks.len() != count + 1 {
            return Err(Error::Parse { line: ln, msg: format!("expected '{tag}' with {count} numbers") });
        }
        parse_floats(&toks[1..], ln)
    };
    let mut filters = Vec::with_capacity(l);
    for _ in 0..l {
        filters.push(Filter::new(expect("filter", s + 1)?)?);
    }
    let mut hidden = Vec::with_capacity(l - 1);
    for _ in 0..l - 1 {
        let b = expect("bias", 2 * s + 1)?;
        hidden.push(BlockBias { head: b[..s].to_vec(), middle: b[s], tail: b[s + 1..].to_vec() });
    }
    let width = d + l * s;
    let last = expect("bias", width)?;
    let out = expect("output", width + 1)?;
    if let Some((ln, _)) = lines.next() {
        return Err(Error::Parse { line: ln, msg: "unexpected trailing content".into() });
    }
    DeepCNN::from_parts(s, d, filters, hidden, last, out[1..].to_vec(), out[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnn::compile_shallow;

    fn sample_net() -> ShallowNet {
        let r = 0.5f64.sqrt();
        ShallowNet::new(
            1,
            2,
            vec![
                Unit { a: 0.75, v: vec![r, 0.0, r] },
                Unit { a: -1.25, v: vec![0.0, 0.6, -0.8] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn shallow_round_trip() {
        let net = sample_net();
        let text = write_shallow(&net);
        assert!(text.starts_with("shallow 1 2 2\n"));
        assert_eq!(read_shallow(&text).unwrap(), net);
        let json = r#"{"k": 1, "d": 1, "units": [{"a": 2.0, "v": [0.6, 0.8]}]}"#;
        assert_eq!(read_shallow(json).unwrap().len(), 1);
    }

    #[test]
    fn cnn_round_trip() {
        let c = compile_shallow(&sample_net(), 2, None).unwrap();
        let back = read_cnn(&write_cnn(&c.cnn)).unwrap();
        assert_eq!(back.filters(), c.cnn.filters());
        assert_eq!(back.param_count(), c.cnn.param_count());
        let x = [0.2, -0.1];
        assert_eq!(back.eval(&x), c.cnn.eval(&x));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = read_shallow("shallow 1 1 1\n# comment\n1.0 abc 0.0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        assert!(read_shallow("").is_err());
        assert!(read_shallow("shallow 1 1 2\n1 0.6 0.8\n").is_err());
        assert!(read_cnn("cnn 2 1 1\nfilter 1 0\n").is_err());
    }
}
