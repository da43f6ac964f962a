//! File formats: plain-text phase maps, 16-bit PGM with a scale sidecar, CSV.
//!
//! Floats are written with Rust's shortest round-trip representation, so text
//! output reads back bit-exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use super::{ImageResult, SpecimenPhaseMap};
use crate::error::{Error, Result};

const PHASEMAP_TAG: &str = "phasemap";

/// `phasemap W H PS` then one row of the grid per line.
pub fn write_phase_map<W: Write>(map: &SpecimenPhaseMap, mut out: W) -> Result<()> {
    writeln!(out, "{PHASEMAP_TAG} {} {} {}", map.width, map.height, map.pixel_size)?;
    for row in map.theta.chunks(map.width) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Reads the format of [`write_phase_map`]; values may be split across lines
/// arbitrarily.
pub fn read_phase_map<R: BufRead>(input: R) -> Result<SpecimenPhaseMap> {
    let mut lines = input.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::Parse("empty phase-map file".into())),
        }
    };
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != PHASEMAP_TAG {
        return Err(Error::Parse(format!("bad phase-map header `{header}`")));
    }
    let width: usize = parse(fields[1], "width")?;
    let height: usize = parse(fields[2], "height")?;
    let pixel_size: f64 = parse(fields[3], "pixel_size")?;
    let mut theta = Vec::with_capacity(width.saturating_mul(height).min(1 << 24));
    for line in lines {
        for tok in line?.split_whitespace() {
            theta.push(parse::<f64>(tok, "theta")?);
        }
    }
    if theta.len() != width * height {
        return Err(Error::Parse(format!(
            "expected {} phase values, found {}",
            width * height,
            theta.len()
        )));
    }
    SpecimenPhaseMap::new(width, height, pixel_size, theta)
}

fn parse<T: std::str::FromStr>(tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("invalid {what} `{tok}`")))
}

pub fn save_phase_map(map: &SpecimenPhaseMap, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_phase_map(map, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_phase_map(path: &Path) -> Result<SpecimenPhaseMap> {
    let file = fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_phase_map(std::io::BufReader::new(file))
}

/// Linear scaling used for a PGM: gray `g` maps back to `min + g/65535 · (max − min)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmScale {
    pub min: f64,
    pub max: f64,
}

/// Binary 16-bit PGM (P5, big-endian) with min/max scaling.
pub fn encode_pgm(values: &[f64], width: usize, height: usize) -> (Vec<u8>, PgmScale) {
    assert_eq!(values.len(), width * height, "grid size mismatch");
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(values.len() * 2);
    for &v in values {
        let g = if span > 0.0 { ((v - min) / span * 65535.0).round() as u16 } else { 0 };
        out.extend_from_slice(&g.to_be_bytes());
    }
    (out, PgmScale { min, max })
}

/// Inverse of [`encode_pgm`] up to the 16-bit quantization.
pub fn decode_pgm(bytes: &[u8], scale: PgmScale) -> Result<(usize, usize, Vec<f64>)> {
    let bad = |m: &str| Error::Parse(format!("pgm: {m}"));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header"))?.to_string());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return Err(bad("expected 16-bit P5"));
    }
    let w: usize = parse(&fields[1], "pgm width")?;
    let h: usize = parse(&fields[2], "pgm height")?;
    let data = bytes.get(pos..pos + 2 * w * h).ok_or_else(|| bad("truncated data"))?;
    let span = scale.max - scale.min;
    let values = data
        .chunks_exact(2)
        .map(|c| scale.min + u16::from_be_bytes([c[0], c[1]]) as f64 / 65535.0 * span)
        .collect();
    Ok((w, h, values))
}

/// Row-major CSV, one image row per line.
pub fn to_csv(img: &ImageResult) -> String {
    let mut s = String::new();
    for row in img.values.chunks(img.width) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn sidecar_text(img: &ImageResult, scale: PgmScale) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kind = {}", img.kind.name());
    let _ = writeln!(s, "width = {}", img.width);
    let _ = writeln!(s, "height = {}", img.height);
    let _ = writeln!(s, "pixel_size_nm = {}", img.pixel_size);
    let _ = writeln!(s, "scale = min-max");
    let _ = writeln!(s, "min = {}", scale.min);
    let _ = writeln!(s, "max = {}", scale.max);
    s
}

/// Writes `<stem>.pgm`, `<stem>.pgm.txt` (scale sidecar) and `<stem>.csv`
/// into `dir`; returns the paths in that order.
pub fn write_image(img: &ImageResult, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let (pgm, scale) = encode_pgm(&img.values, img.width, img.height);
    let paths = vec![
        dir.join(format!("{stem}.pgm")),
        dir.join(format!("{stem}.pgm.txt")),
        dir.join(format!("{stem}.csv")),
    ];
    fs::write(&paths[0], pgm)?;
    fs::write(&paths[1], sidecar_text(img, scale))?;
    fs::write(&paths[2], to_csv(img))?;
    Ok(paths)
}
