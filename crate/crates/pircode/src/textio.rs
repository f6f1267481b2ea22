//! Text formats: ring specs, element literals, matrix / submodule / code
//! files, and the simulation config. All printers produce text that parses
//! back to an equal value.
//!
//! Matrix files: a `ring:` line, a `cols:` line, an optional `ambient:`
//! line listing the column ideal generators, then one whitespace-separated
//! row per line. Code files separate words with `--` lines. Blank lines and
//! `#` comments are ignored.

use std::sync::Arc;

use crate::codes::Code;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ring::{Ring, RingSpec, Value};
use crate::submodule::{Ambient, SubModule};

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

/// Parse `Z<m>`, `Zi<p>`, or `product(<spec>,...)`.
pub fn parse_ring_spec(text: &str) -> Result<Arc<Ring>> {
    let spec = parse_spec_inner(text.trim(), 1, 1)?;
    Ring::new(spec)
}

fn parse_spec_inner(text: &str, line: usize, col: usize) -> Result<RingSpec> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("product(") {
        let body = rest
            .strip_suffix(')')
            .ok_or_else(|| perr(line, col, "missing ')' in product spec"))?;
        let mut parts = Vec::new();
        let mut depth = 0usize;
        let mut start = 0usize;
        for (i, ch) in body.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    parts.push(&body[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(&body[start..]);
        let specs = parts
            .iter()
            .map(|p| parse_spec_inner(p, line, col))
            .collect::<Result<Vec<_>>>()?;
        return Ok(RingSpec::Product(specs));
    }
    if let Some(rest) = t.strip_prefix("Zi") {
        let p: u64 = rest
            .parse()
            .map_err(|_| perr(line, col, format!("bad Gaussian modulus in '{t}'")))?;
        return Ok(RingSpec::Gaussian(p));
    }
    if let Some(rest) = t.strip_prefix('Z') {
        let m: u64 = rest
            .parse()
            .map_err(|_| perr(line, col, format!("bad modulus in '{t}'")))?;
        return Ok(RingSpec::Residue(m));
    }
    Err(perr(
        line,
        col,
        format!("unknown ring spec '{t}' (expected Z<m>, Zi<p>, or product(...))"),
    ))
}

/// Parse one element literal: an integer, `a+bi` (also `a`, `bi`, `i`,
/// `a-bi`), or `(x,y,...)` for tuples. Integers are reduced into canonical
/// range.
pub fn parse_element(ring: &Arc<Ring>, token: &str, line: usize, col: usize) -> Result<Value> {
    let v = parse_element_inner(ring, token, line, col)?;
    debug_assert!(ring.contains(&v));
    Ok(v)
}

fn parse_element_inner(ring: &Arc<Ring>, token: &str, line: usize, col: usize) -> Result<Value> {
    match ring.spec() {
        RingSpec::Residue(m) => {
            let x = parse_signed(token)
                .ok_or_else(|| perr(line, col, format!("bad integer literal '{token}'")))?;
            Ok(Value::Int(x.rem_euclid(*m as i128) as u64))
        }
        RingSpec::Gaussian(p) => {
            let (a, b) = parse_gauss(token)
                .ok_or_else(|| perr(line, col, format!("bad Gaussian literal '{token}'")))?;
            let p = *p as i128;
            Ok(Value::Gauss(a.rem_euclid(p) as u64, b.rem_euclid(p) as u64))
        }
        RingSpec::Product(_) => {
            let inner = token
                .strip_prefix('(')
                .and_then(|t| t.strip_suffix(')'))
                .ok_or_else(|| perr(line, col, format!("tuple literal expected, got '{token}'")))?;
            let mut parts = Vec::new();
            let mut depth = 0usize;
            let mut start = 0usize;
            for (i, ch) in inner.char_indices() {
                match ch {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    ',' if depth == 0 => {
                        parts.push(&inner[start..i]);
                        start = i + 1;
                    }
                    _ => {}
                }
            }
            parts.push(&inner[start..]);
            let factors = ring.factor_rings();
            if parts.len() != factors.len() {
                return Err(perr(
                    line,
                    col,
                    format!(
                        "tuple '{token}' has {} components, ring has {}",
                        parts.len(),
                        factors.len()
                    ),
                ));
            }
            let vals = factors
                .iter()
                .zip(&parts)
                .map(|(f, p)| parse_element_inner(f, p, line, col))
                .collect::<Result<Vec<_>>>()?;
            Ok(Value::Tuple(vals))
        }
    }
}

fn parse_signed(t: &str) -> Option<i128> {
    t.parse::<i128>().ok()
}

/// Accepts `a`, `bi`, `i`, `-i`, `a+bi`, `a-bi`, `a+i`, `a-i`.
fn parse_gauss(t: &str) -> Option<(i128, i128)> {
    let t = t.trim();
    if let Some(rest) = t.strip_suffix('i') {
        // locate the split between the real part and the imaginary coefficient
        let bytes = rest.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1].is_ascii_digit() {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let a = parse_signed(&rest[..i])?;
                let bpart = &rest[i..];
                let b = if bpart == "+" {
                    1
                } else if bpart == "-" {
                    -1
                } else {
                    parse_signed(bpart)?
                };
                Some((a, b))
            }
            None => {
                // pure imaginary: `bi`, `i`, `-i`
                if rest.is_empty() {
                    Some((0, 1))
                } else if rest == "-" {
                    Some((0, -1))
                } else if rest == "+" {
                    Some((0, 1))
                } else {
                    Some((0, parse_signed(rest)?))
                }
            }
        }
    } else {
        Some((parse_signed(t)?, 0))
    }
}

/// Render one element the way the parser reads it.
pub fn format_element(v: &Value) -> String {
    v.to_string()
}

struct HeaderLines<'a> {
    ring: Arc<Ring>,
    cols: usize,
    ambient: Option<Vec<Value>>,
    body: Vec<(usize, &'a str)>,
}

fn parse_header(text: &str) -> Result<HeaderLines<'_>> {
    let mut ring: Option<Arc<Ring>> = None;
    let mut cols: Option<usize> = None;
    let mut ambient_tokens: Option<(usize, Vec<&str>)> = None;
    let mut body = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("ring:") {
            ring = Some(parse_ring_spec(rest.trim()).map_err(|e| match e {
                Error::Parse { col, msg, .. } => perr(lineno, col, msg),
                Error::InvalidRing(msg) => perr(lineno, 1, msg),
                other => other,
            })?);
        } else if let Some(rest) = line.strip_prefix("cols:") {
            cols = Some(
                rest.trim()
                    .parse()
                    .map_err(|_| perr(lineno, 1, "bad column count"))?,
            );
        } else if let Some(rest) = line.strip_prefix("ambient:") {
            ambient_tokens = Some((lineno, rest.split_whitespace().collect()));
        } else {
            body.push((lineno, line));
        }
    }
    let ring = ring.ok_or_else(|| perr(1, 1, "missing 'ring:' line"))?;
    let cols = cols.ok_or_else(|| perr(1, 1, "missing 'cols:' line"))?;
    let ambient = match ambient_tokens {
        None => None,
        Some((lineno, toks)) => {
            if toks.len() != cols {
                return Err(perr(
                    lineno,
                    1,
                    format!("ambient line has {} entries, expected {cols}", toks.len()),
                ));
            }
            Some(
                toks.iter()
                    .enumerate()
                    .map(|(c, t)| parse_element(&ring, t, lineno, c + 1))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
    };
    Ok(HeaderLines {
        ring,
        cols,
        ambient,
        body,
    })
}

fn parse_rows(ring: &Arc<Ring>, cols: usize, body: &[(usize, &str)]) -> Result<Vec<Vec<Value>>> {
    let mut rows = Vec::with_capacity(body.len());
    for &(lineno, line) in body {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != cols {
            return Err(perr(
                lineno,
                1,
                format!("row has {} entries, expected {cols}", toks.len()),
            ));
        }
        let row = toks
            .iter()
            .enumerate()
            .map(|(c, t)| parse_element(ring, t, lineno, c + 1))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Parse a matrix file; also returns the ambient when an `ambient:` line is
/// present (free otherwise).
pub fn parse_matrix_str(text: &str) -> Result<(Matrix, Arc<Ambient>)> {
    let header = parse_header(text)?;
    let rows = parse_rows(&header.ring, header.cols, &header.body)?;
    let ambient = match header.ambient {
        Some(gens) => Ambient::with_column_ideals(header.ring.clone(), gens)?,
        None => Ambient::free(header.ring.clone(), header.cols),
    };
    let m = Matrix::from_rows(header.ring, header.cols, rows)?;
    Ok((m, ambient))
}

/// Parse a submodule file: the matrix rows are canonicalized into the
/// ambient's reduced basis.
pub fn parse_submodule_str(text: &str) -> Result<SubModule> {
    let (m, ambient) = parse_matrix_str(text)?;
    SubModule::from_generators(ambient, &m)
}

/// Parse a code file: header plus `--`-separated word blocks.
pub fn parse_code_str(text: &str) -> Result<Code> {
    let header = parse_header(text)?;
    let ambient = match header.ambient {
        Some(gens) => Ambient::with_column_ideals(header.ring.clone(), gens)?,
        None => Ambient::free(header.ring.clone(), header.cols),
    };
    let mut words = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    let flush = |block: &mut Vec<(usize, &str)>, words: &mut Vec<SubModule>| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        let rows = parse_rows(&header.ring, header.cols, block)?;
        let m = Matrix::from_rows(header.ring.clone(), header.cols, rows)?;
        words.push(SubModule::from_generators(ambient.clone(), &m)?);
        block.clear();
        Ok(())
    };
    for (lineno, line) in header.body.iter().copied() {
        if line == "--" {
            flush(&mut block, &mut words)?;
        } else {
            block.push((lineno, line));
        }
    }
    flush(&mut block, &mut words)?;
    Code::new(ambient, words)
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut out = format!("ring: {}\ncols: {}\n", m.ring(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(format_element).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn ambient_header(ambient: &Ambient) -> String {
    let mut out = format!("ring: {}\ncols: {}\n", ambient.ring(), ambient.n());
    if !ambient.is_free() {
        let gens: Vec<String> = ambient.column_ideals().iter().map(format_element).collect();
        out.push_str(&format!("ambient: {}\n", gens.join(" ")));
    }
    out
}

pub fn format_submodule(m: &SubModule) -> String {
    let mut out = ambient_header(m.ambient());
    for i in 0..m.basis().rows() {
        let row: Vec<String> = m.basis().matrix().row(i).iter().map(format_element).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_code(c: &Code) -> String {
    let mut out = ambient_header(c.ambient());
    for (i, w) in c.words().iter().enumerate() {
        if i > 0 {
            out.push_str("--\n");
        }
        for r in 0..w.basis().rows() {
            let row: Vec<String> = w.basis().matrix().row(r).iter().map(format_element).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

/// How a simulation gets its codebook.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeSource {
    File(String),
    Spread { k: u64 },
    Trapping,
}

/// Parsed simulation config: key-value lines
/// (`ring`, `n`, `t`, `N`, `v`, `u`, `code`, `trials`, `seed`).
#[derive(Debug, Clone)]
pub struct SimSpec {
    pub ring: Arc<Ring>,
    pub n: usize,
    pub t: usize,
    pub big_n: usize,
    pub v: usize,
    pub u: usize,
    pub code: CodeSource,
    pub trials: u64,
    pub seed: u64,
}

pub fn parse_sim_config(text: &str) -> Result<SimSpec> {
    let mut ring = None;
    let mut n = None;
    let mut t = None;
    let mut big_n = None;
    let mut v = None;
    let mut u = 0usize;
    let mut code = None;
    let mut trials = None;
    let mut seed = 0u64;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, val) = line
            .split_once(':')
            .ok_or_else(|| perr(lineno, 1, "expected 'key: value'"))?;
        let val = val.trim();
        let parse_usize = |v: &str| -> Result<usize> {
            v.parse().map_err(|_| perr(lineno, 1, "bad number"))
        };
        match key.trim() {
            "ring" => ring = Some(parse_ring_spec(val)?),
            "n" => n = Some(parse_usize(val)?),
            "t" => t = Some(parse_usize(val)?),
            "N" => big_n = Some(parse_usize(val)?),
            "v" => v = Some(parse_usize(val)?),
            "u" => u = parse_usize(val)?,
            "trials" => {
                trials = Some(val.parse().map_err(|_| perr(lineno, 1, "bad trial count"))?)
            }
            "seed" => seed = val.parse().map_err(|_| perr(lineno, 1, "bad seed"))?,
            "code" => {
                code = Some(if let Some(rest) = val.strip_prefix("file ") {
                    CodeSource::File(rest.trim().to_string())
                } else if let Some(rest) = val.strip_prefix("spread") {
                    let k = rest
                        .trim()
                        .strip_prefix("k=")
                        .and_then(|x| x.parse().ok())
                        .ok_or_else(|| perr(lineno, 1, "expected 'spread k=<k>'"))?;
                    CodeSource::Spread { k }
                } else if val == "trapping" {
                    CodeSource::Trapping
                } else {
                    return Err(perr(
                        lineno,
                        1,
                        format!("unknown code source '{val}' (file <path> | spread k=<k> | trapping)"),
                    ));
                });
            }
            other => return Err(perr(lineno, 1, format!("unknown config key '{other}'"))),
        }
    }
    let missing = |what: &str| perr(1, 1, format!("missing '{what}:' in config"));
    Ok(SimSpec {
        ring: ring.ok_or_else(|| missing("ring"))?,
        n: n.ok_or_else(|| missing("n"))?,
        t: t.ok_or_else(|| missing("t"))?,
        big_n: big_n.ok_or_else(|| missing("N"))?,
        v: v.ok_or_else(|| missing("v"))?,
        u,
        code: code.ok_or_else(|| missing("code"))?,
        trials: trials.ok_or_else(|| missing("trials"))?,
        seed,
    })
}
