//! Reading and writing heatmaps as CSV, NPY and binary PGM.
//!
//! * CSV: UTF-8, one grid row per line, comma-separated decimal floats.
//! * NPY: `\x93NUMPY` format 1.0 (2.0/3.0 are also read), C- or
//!   Fortran-order 2D arrays of little-endian `f4` or `f8`. Writing always
//!   produces version 1.0 `<f8` in C order with the same header layout numpy
//!   emits, so files are byte-identical to `numpy.save`.
//! * PGM: binary `P5`, max-val up to 65535 (16-bit samples big-endian),
//!   mapped linearly to `[0, 1]`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attribution::AttributionMap;
use crate::error::{MstcError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapFormat {
    Csv,
    Npy,
    Pgm,
}

impl MapFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "csv" | "txt" => Some(Self::Csv),
            "npy" => Some(Self::Npy),
            "pgm" => Some(Self::Pgm),
            _ => None,
        }
    }
}

impl FromStr for MapFormat {
    type Err = MstcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "npy" | "npy-v1" => Ok(Self::Npy),
            "pgm" => Ok(Self::Pgm),
            other => Err(MstcError::Format(format!("unknown map format '{other}'"))),
        }
    }
}

pub fn load_map(path: &Path, format: MapFormat) -> Result<AttributionMap> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => MstcError::FileNotFound(path.to_path_buf()),
        _ => MstcError::Io(e),
    })?;
    match format {
        MapFormat::Csv => parse_csv(&bytes),
        MapFormat::Npy => parse_npy(&bytes),
        MapFormat::Pgm => parse_pgm(&bytes),
    }
}

/// Loads a map, inferring the format from the extension.
pub fn load_map_auto(path: &Path) -> Result<AttributionMap> {
    let format = MapFormat::from_path(path).ok_or_else(|| {
        MstcError::Format(format!("cannot infer map format of {}", path.display()))
    })?;
    load_map(path, format)
}

pub fn save_map(map: &AttributionMap, path: &Path, format: MapFormat) -> Result<()> {
    let bytes = match format {
        MapFormat::Csv => encode_csv(map).into_bytes(),
        MapFormat::Npy => encode_npy(map),
        MapFormat::Pgm => {
            return Err(MstcError::Format(
                "writing PGM is not supported; use csv or npy".into(),
            ))
        }
    };
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn parse_csv(bytes: &[u8]) -> Result<AttributionMap> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| MstcError::Format(format!("CSV is not UTF-8: {e}")))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let mut width = None;
    let mut values = Vec::new();
    let mut height = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = values.len();
        for field in line.split(',') {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| {
                MstcError::Format(format!("line {}: cannot parse '{field}'", lineno + 1))
            })?;
            if !v.is_finite() {
                return Err(MstcError::NonFiniteValue {
                    row: height,
                    col: values.len() - before,
                });
            }
            values.push(v);
        }
        let n = values.len() - before;
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(MstcError::Format(format!(
                    "line {}: {n} values, expected {w}",
                    lineno + 1
                )))
            }
            _ => {}
        }
        height += 1;
    }
    let width = width.ok_or_else(|| MstcError::Format("CSV contains no rows".into()))?;
    AttributionMap::new(height, width, values)
}

/// Shortest round-trip decimal representation per value.
pub fn encode_csv(map: &AttributionMap) -> String {
    let mut out = String::new();
    for row in map.rows() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:?}").unwrap();
        }
        out.push('\n');
    }
    out
}

const NPY_MAGIC: &[u8] = b"\x93NUMPY";

pub fn parse_npy(bytes: &[u8]) -> Result<AttributionMap> {
    let bad = |msg: &str| MstcError::Format(format!("NPY: {msg}"));
    if bytes.len() < 10 || &bytes[..6] != NPY_MAGIC {
        return Err(bad("missing magic string"));
    }
    let major = bytes[6];
    let (header_len, header_start) = match major {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 | 3 => {
            if bytes.len() < 12 {
                return Err(bad("truncated header"));
            }
            (
                u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize,
                12,
            )
        }
        v => return Err(bad(&format!("unsupported version {v}"))),
    };
    let data_start = header_start + header_len;
    let header = bytes
        .get(header_start..data_start)
        .ok_or_else(|| bad("truncated header"))?;
    let header = std::str::from_utf8(header).map_err(|_| bad("header is not text"))?;

    let descr = dict_value(header, "descr").ok_or_else(|| bad("no 'descr' key"))?;
    let descr = descr.trim_matches(|c| c == '\'' || c == '"');
    let elem = match descr {
        "<f8" => 8,
        "<f4" => 4,
        other => return Err(bad(&format!("unsupported dtype '{other}'"))),
    };
    let fortran = match dict_value(header, "fortran_order") {
        Some("False") => false,
        Some("True") => true,
        _ => return Err(bad("bad 'fortran_order'")),
    };
    let shape = dict_value(header, "shape").ok_or_else(|| bad("no 'shape' key"))?;
    let dims: Vec<usize> = shape
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| bad("bad shape")))
        .collect::<Result<_>>()?;
    let [height, width] = dims[..] else {
        return Err(bad(&format!("expected a 2D array, got shape {shape}")));
    };

    let n = height * width;
    let data = &bytes[data_start..];
    if data.len() != n * elem {
        return Err(bad(&format!(
            "expected {} data bytes, found {}",
            n * elem,
            data.len()
        )));
    }
    let raw: Vec<f64> = if elem == 8 {
        data.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect()
    } else {
        data.chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect()
    };
    let values = if fortran {
        let mut v = vec![0.0; n];
        for c in 0..width {
            for r in 0..height {
                v[r * width + c] = raw[c * height + r];
            }
        }
        v
    } else {
        raw
    };
    AttributionMap::new(height, width, values)
}

/// Extracts the raw text of `key`'s value from numpy's header dict literal.
fn dict_value<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    let needle_a = format!("'{key}'");
    let needle_b = format!("\"{key}\"");
    let pos = header
        .find(&needle_a)
        .map(|p| p + needle_a.len())
        .or_else(|| header.find(&needle_b).map(|p| p + needle_b.len()))?;
    let rest = header[pos..].trim_start().strip_prefix(':')?.trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')')? + 1
    } else {
        rest.find([',', '}'])?
    };
    Some(rest[..end].trim())
}

pub fn encode_npy(map: &AttributionMap) -> Vec<u8> {
    let mut header = format!(
        "{{'descr': '<f8', 'fortran_order': False, 'shape': ({}, {}), }}",
        map.height(),
        map.width()
    );
    // magic (6) + version (2) + length (2) + header + '\n' is 64-aligned.
    let pad = (64 - (10 + header.len() + 1) % 64) % 64;
    header.extend(std::iter::repeat(' ').take(pad));
    header.push('\n');

    let mut out = Vec::with_capacity(10 + header.len() + map.len() * 8);
    out.extend_from_slice(NPY_MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for v in map.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn parse_pgm(bytes: &[u8]) -> Result<AttributionMap> {
    let bad = |msg: &str| MstcError::Format(format!("PGM: {msg}"));
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(bad("expected binary 'P5' magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // whitespace and '#' comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(bad("malformed header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .unwrap()
            .parse()
            .map_err(|_| bad("header number out of range"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("missing whitespace after max-val"));
    }
    pos += 1;

    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(bad(&format!("max-val {maxval} out of range")));
    }
    let n = width * height;
    let data = &bytes[pos..];
    let scale = maxval as f64;
    let values: Vec<f64> = if maxval < 256 {
        if data.len() < n {
            return Err(bad("truncated raster"));
        }
        data[..n].iter().map(|&b| b as f64 / scale).collect()
    } else {
        if data.len() < 2 * n {
            return Err(bad("truncated raster"));
        }
        data[..2 * n]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / scale)
            .collect()
    };
    AttributionMap::new(height, width, values)
}
