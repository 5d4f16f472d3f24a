use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::{fmt_coord, AnnotatedSample, Bbox, ClothesType};
use crate::{Error, Landmark, LandmarkSet, Result, Visibility};

const LANDMARK_HEADER: &str = "image_name clothes_type landmark_visibility_1 landmark_location_x_1 landmark_location_y_1 ...";
const BBOX_HEADER: &str = "image_name x_1 y_1 x_2 y_2";
const CATEGORY_HEADER: &str = "image_name category_label";

/// Data rows with their 1-based line numbers, after checking the count line.
fn rows(text: &str) -> Result<Vec<(usize, Vec<&str>)>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, count_line) = lines.next().ok_or_else(|| Error::parse(1, "missing count line"))?;
    let count: usize = count_line
        .trim()
        .parse()
        .map_err(|_| Error::parse(1, format!("bad sample count `{}`", count_line.trim())))?;
    if lines.next().is_none() {
        return Err(Error::parse(2, "missing header line"));
    }
    let rows: Vec<_> = lines
        .map(|(n, l)| (n, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, t)| !t.is_empty())
        .collect();
    if rows.len() != count {
        let line = rows.last().map_or(2, |r| r.0);
        return Err(Error::parse(
            line,
            format!("count line says {count} rows, found {}", rows.len()),
        ));
    }
    Ok(rows)
}

fn check_unique<'a>(seen: &mut HashSet<&'a str>, path: &'a str, line: usize) -> Result<()> {
    if !seen.insert(path) {
        return Err(Error::parse(line, format!("duplicate path `{path}`")));
    }
    Ok(())
}

fn number<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::parse(line, format!("bad {what} `{tok}`")))
}

/// Landmark list: `path type (v x y)*`, where the number of triples is fixed
/// by the clothes type (6 upper, 4 lower, 8 full).
pub fn parse_landmark_file(text: &str) -> Result<Vec<AnnotatedSample>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, tok) in rows(text)? {
        if tok.len() < 2 {
            return Err(Error::parse(line, "expected path and clothes type"));
        }
        check_unique(&mut seen, tok[0], line)?;
        let code: u8 = number(tok[1], line, "clothes type")?;
        let ty = ClothesType::from_code(code)
            .ok_or_else(|| Error::parse(line, format!("unknown clothes type code {code}")))?;
        let slots = ty.slots();
        if tok.len() != 2 + 3 * slots.len() {
            return Err(Error::parse(
                line,
                format!(
                    "{ty} rows carry {} landmark triples, found {} fields",
                    slots.len(),
                    tok.len() - 2
                ),
            ));
        }
        let mut landmarks = LandmarkSet::empty();
        for (slot, t) in slots.iter().zip(tok[2..].chunks_exact(3)) {
            let code: u8 = number(t[0], line, "visibility")?;
            let vis = Visibility::from_code(code)
                .ok_or_else(|| Error::parse(line, format!("unknown visibility code {code}")))?;
            let x: f64 = number(t[1], line, "x coordinate")?;
            let y: f64 = number(t[2], line, "y coordinate")?;
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::parse(line, "non-finite coordinate"));
            }
            landmarks.set(*slot, Some(Landmark::new(x - 1.0, y - 1.0, vis)));
        }
        let mut sample = AnnotatedSample::new(tok[0], ty);
        sample.landmarks = landmarks;
        out.push(sample);
    }
    Ok(out)
}

/// Inverse of [`parse_landmark_file`]. Slots the type defines but the sample
/// lacks are written as out-of-frame at the origin.
pub fn serialize_landmark_file(samples: &[AnnotatedSample]) -> String {
    let mut s = format!("{}\n{LANDMARK_HEADER}\n", samples.len());
    for sample in samples {
        s.push_str(&sample.path);
        write!(s, " {}", sample.clothes_type.code()).unwrap();
        for slot in sample.clothes_type.slots() {
            let lm = sample
                .landmarks
                .get(*slot)
                .copied()
                .unwrap_or(Landmark::new(-1.0, -1.0, Visibility::OutOfFrame));
            write!(
                s,
                " {} {} {}",
                lm.visibility.code(),
                fmt_coord(lm.x + 1.0),
                fmt_coord(lm.y + 1.0)
            )
            .unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn parse_bbox_file(text: &str) -> Result<Vec<(String, Bbox)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, tok) in rows(text)? {
        if tok.len() != 5 {
            return Err(Error::parse(line, "expected path and 4 box coordinates"));
        }
        check_unique(&mut seen, tok[0], line)?;
        let v: Vec<i64> = tok[1..]
            .iter()
            .map(|t| number(t, line, "box coordinate"))
            .collect::<Result<_>>()?;
        let bbox = Bbox::new(v[0], v[1], v[2], v[3]).map_err(|e| Error::parse(line, e.to_string()))?;
        out.push((tok[0].to_string(), bbox));
    }
    Ok(out)
}

pub fn serialize_bbox_file(entries: &[(String, Bbox)]) -> String {
    let mut s = format!("{}\n{BBOX_HEADER}\n", entries.len());
    for (path, b) in entries {
        writeln!(s, "{path} {} {} {} {}", b.x1, b.y1, b.x2, b.y2).unwrap();
    }
    s
}

pub fn parse_category_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, tok) in rows(text)? {
        if tok.len() != 2 {
            return Err(Error::parse(line, "expected path and category name"));
        }
        check_unique(&mut seen, tok[0], line)?;
        out.push((tok[0].to_string(), tok[1].to_string()));
    }
    Ok(out)
}

pub fn serialize_category_file(entries: &[(String, String)]) -> String {
    let mut s = format!("{}\n{CATEGORY_HEADER}\n", entries.len());
    for (path, name) in entries {
        writeln!(s, "{path} {name}").unwrap();
    }
    s
}

/// Paths that did not line up across the three files.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnmatchedReport {
    /// Landmark rows without a box.
    pub missing_bbox: Vec<String>,
    /// Landmark rows without a category.
    pub missing_category: Vec<String>,
    /// Box rows whose path has no landmark row.
    pub orphan_bbox: Vec<String>,
    /// Category rows whose path has no landmark row.
    pub orphan_category: Vec<String>,
}

impl UnmatchedReport {
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn len(&self) -> usize {
        self.missing_bbox.len()
            + self.missing_category.len()
            + self.orphan_bbox.len()
            + self.orphan_category.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joined {
    pub samples: Vec<AnnotatedSample>,
    pub unmatched: UnmatchedReport,
}

/// Attaches boxes and categories to landmark rows by path. Landmark order is
/// kept; nothing is dropped silently.
pub fn join_annotations(
    landmarks: Vec<AnnotatedSample>,
    bboxes: Vec<(String, Bbox)>,
    categories: Vec<(String, String)>,
) -> Joined {
    let known: HashSet<String> = landmarks.iter().map(|s| s.path.clone()).collect();
    let mut unmatched = UnmatchedReport::default();
    let mut box_map = HashMap::new();
    for (path, b) in bboxes {
        if known.contains(&path) {
            box_map.insert(path, b);
        } else {
            unmatched.orphan_bbox.push(path);
        }
    }
    let mut cat_map = HashMap::new();
    for (path, c) in categories {
        if known.contains(&path) {
            cat_map.insert(path, c);
        } else {
            unmatched.orphan_category.push(path);
        }
    }
    let samples = landmarks
        .into_iter()
        .map(|mut s| {
            match box_map.remove(&s.path) {
                Some(b) => s.bbox = Some(b),
                None => unmatched.missing_bbox.push(s.path.clone()),
            }
            match cat_map.remove(&s.path) {
                Some(c) => s.category = Some(c),
                None => unmatched.missing_category.push(s.path.clone()),
            }
            s
        })
        .collect();
    Joined { samples, unmatched }
}
