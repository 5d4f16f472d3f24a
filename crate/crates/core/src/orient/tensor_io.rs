//! Weight fixtures: one ASCII line `shape d1 d2 ...`, then the values as
//! little-endian `f64` in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{ArrayD, IxDyn};

use crate::{Error, Result};

pub fn write_tensor<W: Write>(mut out: W, tensor: &ArrayD<f64>) -> Result<()> {
    let dims: Vec<String> = tensor.shape().iter().map(usize::to_string).collect();
    writeln!(out, "shape {}", dims.join(" "))?;
    for v in tensor.iter() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_tensor<R: BufRead>(mut input: R) -> Result<ArrayD<f64>> {
    let mut header = String::new();
    input.read_line(&mut header)?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("shape") {
        return Err(Error::parse(1, "expected `shape` header"));
    }
    let shape = tokens
        .map(|t| t.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Error::parse(1, format!("bad dimension: {e}")))?;
    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::parse(1, "shape overflows"))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::shape(format!(
            "shape {shape:?} needs {} bytes of data, found {}",
            count * 8,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    ArrayD::from_shape_vec(IxDyn(&shape), data).map_err(|e| Error::shape(e.to_string()))
}

pub fn save_tensor(path: &Path, tensor: &ArrayD<f64>) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::io(path, source))?;
    write_tensor(BufWriter::new(file), tensor)
}

pub fn load_tensor(path: &Path) -> Result<ArrayD<f64>> {
    let file = File::open(path).map_err(|source| Error::io(path, source))?;
    read_tensor(BufReader::new(file))
}
