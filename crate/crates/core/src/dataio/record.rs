//! Single-file `key=value` annotation records, one garment per line.
//!
//! ```text
//! path=img/0001.png category=hoody type=upper bbox=10,20,110,220 size=640,480 l_collar=146,102,0 r_collar=173,95,0
//! ```
//!
//! - `path` is required and must not contain whitespace; every other key is
//!   optional and may appear at most once.
//! - `type` is `upper`, `lower` or `full` (default `full`).
//! - `bbox` is `x1,y1,x2,y2`, kept verbatim like the box list.
//! - `size` is the image `width,height`, used to normalize errors.
//! - landmark keys (`l_collar`, `r_collar`, `l_sleeve`, `r_sleeve`,
//!   `l_waistline`, `r_waistline`, `l_hem`, `r_hem`) take `x,y,v` with
//!   1-indexed coordinates and visibility code 0/1/2.
//! - `scores` holds predicted category probabilities as
//!   `name:p,name:p,...`.
//!
//! Blank lines and lines starting with `#` are skipped.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::{fmt_coord, AnnotatedSample, Bbox, ClothesType};
use crate::{Error, Landmark, LandmarkSlot, Result, Visibility};

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub sample: AnnotatedSample,
    /// Image `(width, height)`.
    pub size: Option<(usize, usize)>,
    pub scores: Option<Vec<(String, f64)>>,
}

impl Record {
    pub fn new(sample: AnnotatedSample) -> Self {
        Self { sample, size: None, scores: None }
    }
}

fn split_list<'a>(value: &'a str, n: usize, line: usize, key: &str) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != n {
        return Err(Error::parse(line, format!("`{key}` takes {n} comma-separated values")));
    }
    Ok(parts)
}

fn num<T: std::str::FromStr>(tok: &str, line: usize, key: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("bad value `{tok}` for `{key}`")))
}

pub fn parse_record_line(text: &str, line: usize) -> Result<Record> {
    let mut seen = HashSet::new();
    let mut path = None;
    let mut ty = ClothesType::Full;
    let mut rec = Record::new(AnnotatedSample::new("", ClothesType::Full));
    for tok in text.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(line, format!("expected key=value, got `{tok}`")))?;
        if !seen.insert(key) {
            return Err(Error::parse(line, format!("duplicate key `{key}`")));
        }
        match key {
            "path" => path = Some(value.to_string()),
            "category" => rec.sample.category = Some(value.to_string()),
            "type" => ty = value.parse().map_err(|e: Error| Error::parse(line, e.to_string()))?,
            "bbox" => {
                let v = split_list(value, 4, line, key)?
                    .into_iter()
                    .map(|t| num::<i64>(t, line, key))
                    .collect::<Result<Vec<_>>>()?;
                let b = Bbox::new(v[0], v[1], v[2], v[3])
                    .map_err(|e| Error::parse(line, e.to_string()))?;
                rec.sample.bbox = Some(b);
            }
            "size" => {
                let v = split_list(value, 2, line, key)?;
                rec.size = Some((num(v[0], line, key)?, num(v[1], line, key)?));
            }
            "scores" => {
                let mut scores = Vec::new();
                for pair in value.split(',') {
                    let (name, p) = pair
                        .split_once(':')
                        .ok_or_else(|| Error::parse(line, format!("expected name:p, got `{pair}`")))?;
                    scores.push((name.to_string(), num(p, line, key)?));
                }
                rec.scores = Some(scores);
            }
            _ => {
                let slot = LandmarkSlot::from_key(key)
                    .ok_or_else(|| Error::parse(line, format!("unknown key `{key}`")))?;
                let v = split_list(value, 3, line, key)?;
                let x: f64 = num(v[0], line, key)?;
                let y: f64 = num(v[1], line, key)?;
                if !x.is_finite() || !y.is_finite() {
                    return Err(Error::parse(line, format!("non-finite coordinate for `{key}`")));
                }
                let code: u8 = num(v[2], line, key)?;
                let vis = Visibility::from_code(code)
                    .ok_or_else(|| Error::parse(line, format!("unknown visibility code {code}")))?;
                rec.sample.landmarks.set(slot, Some(Landmark::new(x - 1.0, y - 1.0, vis)));
            }
        }
    }
    rec.sample.path = path.ok_or_else(|| Error::parse(line, "missing `path`"))?;
    rec.sample.clothes_type = ty;
    if !rec.sample.slots_consistent() {
        return Err(Error::parse(line, format!("landmark slot not defined for {ty} garments")));
    }
    Ok(rec)
}

pub fn parse_records(text: &str) -> Result<Vec<Record>> {
    let mut paths = HashSet::new();
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let t = l.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let rec = parse_record_line(t, i + 1)?;
        if !paths.insert(rec.sample.path.clone()) {
            return Err(Error::parse(i + 1, format!("duplicate path `{}`", rec.sample.path)));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn serialize_record(rec: &Record) -> String {
    let s = &rec.sample;
    let mut out = format!("path={} type={}", s.path, s.clothes_type);
    if let Some(c) = &s.category {
        write!(out, " category={c}").unwrap();
    }
    if let Some(b) = &s.bbox {
        write!(out, " bbox={},{},{},{}", b.x1, b.y1, b.x2, b.y2).unwrap();
    }
    if let Some((w, h)) = rec.size {
        write!(out, " size={w},{h}").unwrap();
    }
    for (slot, lm) in s.landmarks.iter() {
        write!(
            out,
            " {}={},{},{}",
            slot.key(),
            fmt_coord(lm.x + 1.0),
            fmt_coord(lm.y + 1.0),
            lm.visibility.code()
        )
        .unwrap();
    }
    if let Some(scores) = &rec.scores {
        let joined: Vec<String> = scores.iter().map(|(n, p)| format!("{n}:{p}")).collect();
        write!(out, " scores={}", joined.join(",")).unwrap();
    }
    out
}

pub fn serialize_records(records: &[Record]) -> String {
    records.iter().map(|r| serialize_record(r) + "\n").collect()
}
