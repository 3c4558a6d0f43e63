use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{DistanceConstraint, Embedding, Instance, InstanceMeta};
use crate::scalar::Real;

/// Version written in and required by the instance file header.
pub const FORMAT_VERSION: u32 = 1;

fn escape(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

/// Serializes an instance in the line-oriented text format:
///
/// ```text
/// # meta source <text>
/// # meta seed <u64>
/// # param <key> <value>
/// # elements <e1> <e2> ...
/// dgp 1 <n> <m> <has_ref>
/// <v> <w> <lower> <upper> <confidence> <weight>     (m lines)
/// <x> <y> <z>                                       (n lines if has_ref)
/// ```
pub fn write_instance_string<T: Real>(inst: &Instance<T>) -> String {
    let mut out = String::new();
    let meta = &inst.meta;
    if !meta.source.is_empty() {
        let _ = writeln!(out, "# meta source {}", escape(&meta.source));
    }
    if let Some(seed) = meta.seed {
        let _ = writeln!(out, "# meta seed {seed}");
    }
    for (k, v) in &meta.params {
        let _ = writeln!(out, "# param {} {}", escape(k).replace(' ', "_"), escape(v));
    }
    if !meta.elements.is_empty() {
        let _ = writeln!(out, "# elements {}", meta.elements.join(" "));
    }
    let has_ref = inst.reference().is_some();
    let _ = writeln!(out, "dgp {FORMAT_VERSION} {} {} {}", inst.n(), inst.m(), u8::from(has_ref));
    for (c, &(v, w)) in inst.constraints().iter().zip(inst.graph().edges()) {
        let _ = writeln!(out, "{v} {w} {} {} {} {}", c.lower, c.upper, c.confidence, c.weight);
    }
    if let Some(r) = inst.reference() {
        for p in r.coords() {
            let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
        }
    }
    out
}

pub fn write_instance<T: Real>(path: impl AsRef<Path>, inst: &Instance<T>) -> Result<()> {
    fs::write(path, write_instance_string(inst))?;
    Ok(())
}

fn parse_num<N: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<N> {
    tok.parse::<N>().map_err(|_| Error::parse(line, format!("cannot parse {what} from '{tok}'")))
}

fn parse_real<T: Real>(tok: &str, line: usize, what: &str) -> Result<T> {
    let v: T = parse_num(tok, line, what)?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{what} is not finite")));
    }
    Ok(v)
}

/// Parses the text produced by [`write_instance_string`]. Edge lines with only
/// bounds default to confidence 1 and weight 1; a line with a confidence but no
/// weight gets weight 1.
pub fn read_instance_str<T: Real>(text: &str) -> Result<Instance<T>> {
    let mut meta = InstanceMeta::default();
    let mut header: Option<(usize, usize, bool)> = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut coords = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let (body, comment) = match raw.find('#') {
            Some(k) => (&raw[..k], Some(raw[k + 1..].trim())),
            None => (raw, None),
        };
        if let Some(c) = comment {
            if let Some(rest) = c.strip_prefix("meta ") {
                let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
                match key {
                    "source" => meta.source = value.to_string(),
                    "seed" => meta.seed = Some(parse_num(value.trim(), lineno, "seed")?),
                    _ => {}
                }
            } else if let Some(rest) = c.strip_prefix("param ") {
                let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
                meta.params.insert(key.to_string(), value.to_string());
            } else if let Some(rest) = c.strip_prefix("elements ") {
                meta.elements = rest.split_whitespace().map(String::from).collect();
            }
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let Some((n, m, has_ref)) = header else {
            if toks[0] != "dgp" || toks.len() != 5 {
                return Err(Error::parse(lineno, "expected header 'dgp <version> <n> <m> <has_ref>'"));
            }
            let version: u32 = parse_num(toks[1], lineno, "version")?;
            if version != FORMAT_VERSION {
                return Err(Error::parse(lineno, format!("unsupported format version {version}")));
            }
            let n = parse_num(toks[2], lineno, "vertex count")?;
            let m = parse_num(toks[3], lineno, "edge count")?;
            let has_ref = match toks[4] {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(lineno, format!("has_ref must be 0 or 1, got '{other}'"))),
            };
            header = Some((n, m, has_ref));
            continue;
        };
        if edges.len() < m {
            if !(4..=6).contains(&toks.len()) {
                return Err(Error::parse(lineno, format!("edge line needs 4 to 6 fields, found {}", toks.len())));
            }
            let v: usize = parse_num(toks[0], lineno, "vertex id")?;
            let w: usize = parse_num(toks[1], lineno, "vertex id")?;
            if v >= n || w >= n || v == w {
                return Err(Error::parse(lineno, format!("invalid edge ({v}, {w}) for n = {n}")));
            }
            if !seen.insert((v.min(w), v.max(w))) {
                return Err(Error::parse(lineno, format!("duplicate edge ({v}, {w})")));
            }
            let lower: T = parse_real(toks[2], lineno, "lower bound")?;
            let upper: T = parse_real(toks[3], lineno, "upper bound")?;
            let mut c = DistanceConstraint::interval(lower, upper);
            if let Some(t) = toks.get(4) {
                c.confidence = parse_real(t, lineno, "confidence")?;
            }
            if let Some(t) = toks.get(5) {
                c.weight = parse_real(t, lineno, "weight")?;
            }
            edges.push((v, w, c));
        } else if has_ref && coords.len() < n {
            if toks.len() != 3 {
                return Err(Error::parse(lineno, format!("coordinate line needs 3 fields, found {}", toks.len())));
            }
            coords.push([
                parse_real(toks[0], lineno, "x")?,
                parse_real(toks[1], lineno, "y")?,
                parse_real(toks[2], lineno, "z")?,
            ]);
        } else {
            return Err(Error::parse(lineno, "unexpected trailing data"));
        }
    }

    let Some((n, m, has_ref)) = header else {
        return Err(Error::parse(last_line.max(1), "missing 'dgp' header"));
    };
    if edges.len() < m {
        return Err(Error::parse(
            last_line + 1,
            format!("file truncated: expected {m} edge lines, found {}", edges.len()),
        ));
    }
    if has_ref && coords.len() < n {
        return Err(Error::parse(
            last_line + 1,
            format!("file truncated: expected {n} coordinate lines, found {}", coords.len()),
        ));
    }
    let reference = has_ref.then(|| Embedding::new(coords));
    if !meta.elements.is_empty() && meta.elements.len() != n {
        return Err(Error::validation(format!("elements line lists {} entries for {n} vertices", meta.elements.len())));
    }
    Instance::from_edges(n, edges, reference, meta)
}

pub fn read_instance<T: Real>(path: impl AsRef<Path>) -> Result<Instance<T>> {
    read_instance_str(&fs::read_to_string(path)?)
}

/// XYZ text: count line, comment line, then `<element> <x> <y> <z>` per point.
/// Missing elements are written as `X`.
pub fn write_xyz_string<T: Real>(emb: &Embedding<T>, elements: &[String], comment: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", emb.len());
    let _ = writeln!(out, "{}", escape(comment));
    for (i, p) in emb.coords().iter().enumerate() {
        let el = elements.get(i).map(String::as_str).unwrap_or("X");
        let _ = writeln!(out, "{el} {} {} {}", p[0], p[1], p[2]);
    }
    out
}

pub fn write_xyz<T: Real>(path: impl AsRef<Path>, emb: &Embedding<T>, elements: &[String], comment: &str) -> Result<()> {
    fs::write(path, write_xyz_string(emb, elements, comment))?;
    Ok(())
}

/// Parsed XYZ content.
#[derive(Debug, Clone, PartialEq)]
pub struct XyzFile<T> {
    pub embedding: Embedding<T>,
    pub elements: Vec<String>,
    pub comment: String,
}

pub fn read_xyz_str<T: Real>(text: &str) -> Result<XyzFile<T>> {
    let mut lines = text.lines();
    let count_line = lines.next().ok_or_else(|| Error::parse(1, "empty XYZ file"))?;
    let n: usize = parse_num(count_line.trim(), 1, "atom count")?;
    let comment = lines.next().ok_or_else(|| Error::parse(2, "missing comment line"))?.to_string();
    let mut coords = Vec::with_capacity(n);
    let mut elements = Vec::with_capacity(n);
    for i in 0..n {
        let lineno = i + 3;
        let line = lines.next().ok_or_else(|| Error::parse(lineno, format!("expected {n} atom lines, found {i}")))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 4 {
            return Err(Error::parse(lineno, "atom line needs '<element> <x> <y> <z>'"));
        }
        elements.push(toks[0].to_string());
        coords.push([
            parse_real(toks[1], lineno, "x")?,
            parse_real(toks[2], lineno, "y")?,
            parse_real(toks[3], lineno, "z")?,
        ]);
    }
    Ok(XyzFile { embedding: Embedding::new(coords), elements, comment })
}

pub fn read_xyz<T: Real>(path: impl AsRef<Path>) -> Result<XyzFile<T>> {
    read_xyz_str(&fs::read_to_string(path)?)
}
