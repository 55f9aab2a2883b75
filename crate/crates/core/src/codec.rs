//! Versioned JSON and line-oriented text formats.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplex::{Mode, Multiplex};
use crate::multiplexon::StepMultiplexon;
use crate::subset::Subset;

pub const MULTIPLEX_FORMAT: &str = "multiplex-v1";
pub const STEP_FORMAT: &str = "stepmultiplexon-v1";

#[derive(Serialize, Deserialize)]
struct MultiplexDoc {
    format: String,
    n: usize,
    r: usize,
    layers: Vec<Vec<[usize; 2]>>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct StepDoc {
    format: String,
    r: usize,
    mode: Mode,
    breaks: Vec<f64>,
    values: BTreeMap<String, Vec<Vec<f64>>>,
}

/// Reads the `"format"` tag and checks it before full deserialization, so a
/// version mismatch is reported as such rather than as a shape error.
pub fn parse_versioned<T: DeserializeOwned>(text: &str, expected: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    check_format(&value, expected)?;
    Ok(serde_json::from_value(value)?)
}

pub fn check_format(value: &serde_json::Value, expected: &str) -> Result<()> {
    match value.get("format").and_then(|f| f.as_str()) {
        Some(f) if f == expected => Ok(()),
        Some(f) => Err(Error::FormatVersion { expected: expected.into(), found: f.into() }),
        None => Err(Error::Malformed("missing \"format\" field".into())),
    }
}

pub fn multiplex_to_json(g: &Multiplex) -> String {
    let doc = MultiplexDoc {
        format: MULTIPLEX_FORMAT.into(),
        n: g.n(),
        r: g.r(),
        layers: g
            .all_layer_edges()
            .into_iter()
            .map(|l| l.into_iter().map(|(i, j)| [i, j]).collect())
            .collect(),
    };
    serde_json::to_string(&doc).expect("multiplex documents always serialize")
}

pub fn multiplex_from_json(text: &str) -> Result<Multiplex> {
    let doc: MultiplexDoc = parse_versioned(text, MULTIPLEX_FORMAT)?;
    let layers: Vec<Vec<(usize, usize)>> = doc
        .layers
        .into_iter()
        .map(|l| l.into_iter().map(|[i, j]| (i, j)).collect())
        .collect();
    Multiplex::new(doc.n, doc.r, &layers)
}

/// Header line `n r`, then one `i j s` line per edge (0-indexed vertices,
/// 1-indexed layer).
pub fn multiplex_to_text(g: &Multiplex) -> String {
    let mut out = format!("{} {}\n", g.n(), g.r());
    for (l, edges) in g.all_layer_edges().into_iter().enumerate() {
        for (i, j) in edges {
            out.push_str(&format!("{i} {j} {}\n", l + 1));
        }
    }
    out
}

/// Parses the text format; blank lines and `#` comments are ignored.
pub fn multiplex_from_text(text: &str) -> Result<Multiplex> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(no, l)| (no + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let parse = |no: usize, tok: &str| -> Result<usize> {
        tok.parse()
            .map_err(|_| Error::Malformed(format!("line {no}: expected an integer, got {tok:?}")))
    };
    let (no, header) = lines.next().ok_or_else(|| Error::Malformed("empty document".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(Error::Malformed(format!("line {no}: header must be \"n r\"")));
    }
    let (n, r) = (parse(no, head[0])?, parse(no, head[1])?);
    if !(1..=crate::subset::MAX_LAYERS).contains(&r) {
        return Err(Error::LayerCount(r));
    }
    let mut layers = vec![Vec::new(); r];
    for (no, line) in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(Error::Malformed(format!("line {no}: expected \"i j s\"")));
        }
        let (i, j, s) = (parse(no, tok[0])?, parse(no, tok[1])?, parse(no, tok[2])?);
        if s == 0 || s > r {
            return Err(Error::Malformed(format!("line {no}: layer {s} outside 1..={r}")));
        }
        layers[s - 1].push((i, j));
    }
    Multiplex::new(n, r, &layers)
}

/// Decodes either format, choosing by the first non-blank character.
pub fn multiplex_from_str(text: &str) -> Result<Multiplex> {
    if text.trim_start().starts_with('{') {
        multiplex_from_json(text)
    } else {
        multiplex_from_text(text)
    }
}

impl From<&StepMultiplexon> for StepDoc {
    fn from(w: &StepMultiplexon) -> Self {
        StepDoc {
            format: STEP_FORMAT.into(),
            r: w.r(),
            mode: w.mode(),
            breaks: w.breaks().to_vec(),
            values: w.values_map().into_iter().map(|(s, m)| (s.bits().to_string(), m)).collect(),
        }
    }
}

impl TryFrom<StepDoc> for StepMultiplexon {
    type Error = Error;

    fn try_from(doc: StepDoc) -> Result<Self> {
        if doc.format != STEP_FORMAT {
            return Err(Error::FormatVersion { expected: STEP_FORMAT.into(), found: doc.format });
        }
        let mut values = BTreeMap::new();
        for (key, m) in doc.values {
            let bits: u8 = key
                .parse()
                .map_err(|_| Error::Malformed(format!("subset key {key:?} is not a bitmask")))?;
            values.insert(Subset(bits), m);
        }
        StepMultiplexon::new(doc.r, doc.mode, doc.breaks, values)
    }
}

impl Serialize for StepMultiplexon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StepDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for StepMultiplexon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = StepDoc::deserialize(d)?;
        StepMultiplexon::try_from(doc).map_err(serde::de::Error::custom)
    }
}

pub fn step_to_json(w: &StepMultiplexon) -> String {
    serde_json::to_string(w).expect("finite values always serialize")
}

pub fn step_from_json(text: &str) -> Result<StepMultiplexon> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    check_format(&value, STEP_FORMAT)?;
    let doc: StepDoc = serde_json::from_value(value)?;
    StepMultiplexon::try_from(doc)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

pub fn read_multiplex(path: &Path) -> Result<Multiplex> {
    multiplex_from_str(&read_to_string(path)?)
}

pub fn write_multiplex(path: &Path, g: &Multiplex) -> Result<()> {
    Ok(fs::write(path, multiplex_to_json(g))?)
}

pub fn read_step(path: &Path) -> Result<StepMultiplexon> {
    step_from_json(&read_to_string(path)?)
}
