//! File formats: binary PGM (P5) images and masks, CSV signals, images and
//! observations.
//!
//! CSV files may start with `#` comment lines of space-separated
//! `key=value` pairs; readers collect them as metadata. Observation files
//! carry their sampling coordinates so a reader can check them against the
//! operator it is paired with.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{Observation, RadialMask, SamplingPattern1D};
use crate::signals::{Image2D, Signal1D};

pub type Metadata = BTreeMap<String, String>;

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(format!("opening {}", path.display()), e))
}

fn wio(e: std::io::Error) -> Error {
    Error::io("write", e)
}

fn rio(e: std::io::Error) -> Error {
    Error::io("read", e)
}

/// 8-bit P5 image; values are clamped to `[0, 1]` and scaled to 0-255.
pub fn write_pgm<W: Write>(mut w: W, img: &Image2D, comment: Option<&str>) -> Result<()> {
    writeln!(w, "P5").map_err(wio)?;
    if let Some(c) = comment {
        writeln!(w, "# {c}").map_err(wio)?;
    }
    write!(w, "{} {}\n255\n", img.cols(), img.rows()).map_err(wio)?;
    let bytes: Vec<u8> = img
        .pixels()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    w.write_all(&bytes).map_err(wio)?;
    w.flush().map_err(wio)
}

/// Reads 8-bit P5 into `[0, 1]`, with the header comments as metadata.
pub fn read_pgm<R: Read>(mut r: R) -> Result<(Image2D, Metadata)> {
    let mut data = Vec::new();
    r.read_to_end(&mut data).map_err(rio)?;
    let mut pos = 0;
    let mut meta = Metadata::new();
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos >= data.len() {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        if data[pos] == b'#' {
            let end = data[pos..]
                .iter()
                .position(|&b| b == b'\n')
                .map_or(data.len(), |p| pos + p);
            parse_meta_line(&String::from_utf8_lossy(&data[pos + 1..end]), &mut meta);
            pos = end;
            continue;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        tokens.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if tokens[0] != "P5" {
        return Err(Error::Parse(format!("expected P5 magic, got '{}'", tokens[0])));
    }
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad PGM header field '{s}'")))
    };
    let (cols, rows, maxval) = (num(&tokens[1])?, num(&tokens[2])?, num(&tokens[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse(format!("unsupported PGM maxval {maxval}")));
    }
    let raster = data.get(pos..pos + rows * cols).ok_or_else(|| {
        Error::Parse(format!("PGM raster shorter than {rows}x{cols}"))
    })?;
    let pixels = raster.iter().map(|&b| b as f64 / maxval as f64).collect();
    Ok((Image2D::new(rows, cols, pixels)?, meta))
}

pub fn write_mask_pgm<W: Write>(w: W, mask: &RadialMask, comment: Option<&str>) -> Result<()> {
    let n = mask.n();
    let img = Image2D::new(
        n,
        n,
        mask.cells().iter().map(|&c| if c { 1.0 } else { 0.0 }).collect(),
    )?;
    write_pgm(w, &img, comment)
}

/// Cells brighter than mid-gray are sampled.
pub fn read_mask_pgm<R: Read>(r: R) -> Result<(RadialMask, Metadata)> {
    let (img, meta) = read_pgm(r)?;
    if img.rows() != img.cols() {
        return Err(Error::Shape(format!(
            "mask must be square, got {}x{}",
            img.rows(),
            img.cols()
        )));
    }
    let cells = img.pixels().iter().map(|&v| v > 0.5).collect();
    Ok((RadialMask::from_cells(img.rows(), cells)?, meta))
}

fn parse_meta_line(line: &str, meta: &mut Metadata) {
    for part in line.split_whitespace() {
        if let Some((k, v)) = part.split_once('=') {
            meta.insert(k.to_string(), v.to_string());
        }
    }
}

fn format_meta(meta: &Metadata) -> String {
    meta.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Data lines of a CSV, with comment metadata split off.
fn read_lines<R: BufRead>(r: R) -> Result<(Vec<String>, Metadata)> {
    let mut meta = Metadata::new();
    let mut lines = Vec::new();
    for line in r.lines() {
        let line = line.map_err(rio)?;
        let t = line.trim();
        if let Some(c) = t.strip_prefix('#') {
            parse_meta_line(c, &mut meta);
        } else if !t.is_empty() {
            lines.push(t.to_string());
        }
    }
    Ok((lines, meta))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: '{s}'")))
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("not an integer: '{s}'")))
}

/// One value per line.
pub fn write_signal_csv<W: Write>(mut w: W, s: &Signal1D) -> Result<()> {
    for v in s.samples() {
        writeln!(w, "{v}").map_err(wio)?;
    }
    w.flush().map_err(wio)
}

pub fn read_signal_csv<R: BufRead>(r: R) -> Result<Signal1D> {
    let (lines, _) = read_lines(r)?;
    let values = lines
        .iter()
        .map(|l| parse_f64(l))
        .collect::<Result<Vec<_>>>()?;
    Signal1D::new(values)
}

/// One image row per line, comma separated.
pub fn write_image_csv<W: Write>(mut w: W, img: &Image2D) -> Result<()> {
    for row in img.pixels().chunks(img.cols()) {
        let line = row
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}").map_err(wio)?;
    }
    w.flush().map_err(wio)
}

pub fn read_image_csv<R: BufRead>(r: R) -> Result<Image2D> {
    let (lines, _) = read_lines(r)?;
    let rows = lines.len();
    let mut pixels = Vec::new();
    let mut cols = None;
    for l in &lines {
        let row = l.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Shape(format!(
                    "ragged image CSV: rows of {c} and {} values",
                    row.len()
                )))
            }
            _ => {}
        }
        pixels.extend(row);
    }
    Image2D::new(rows, cols.unwrap_or(0), pixels)
}

/// `index,value` rows; `n` is stored in the metadata.
pub fn write_observation_1d<W: Write>(
    mut w: W,
    pattern: &SamplingPattern1D,
    g: &Observation<f64>,
    meta: &Metadata,
) -> Result<()> {
    if g.len() != pattern.len() {
        return Err(Error::Shape(format!(
            "pattern has {} samples, observation has {}",
            pattern.len(),
            g.len()
        )));
    }
    let mut meta = meta.clone();
    meta.insert("domain".into(), "1d".into());
    meta.insert("n".into(), pattern.n().to_string());
    writeln!(w, "# {}", format_meta(&meta)).map_err(wio)?;
    writeln!(w, "index,value").map_err(wio)?;
    for (i, v) in pattern.indices().iter().zip(g.values()) {
        writeln!(w, "{i},{v}").map_err(wio)?;
    }
    w.flush().map_err(wio)
}

/// `u,v,re,im` rows in mask order, with centered frequency coordinates.
pub fn write_observation_2d<W: Write>(
    mut w: W,
    mask: &RadialMask,
    g: &Observation<Complex64>,
    meta: &Metadata,
) -> Result<()> {
    if g.len() != mask.count() {
        return Err(Error::Shape(format!(
            "mask has {} cells, observation has {}",
            mask.count(),
            g.len()
        )));
    }
    let mut meta = meta.clone();
    meta.insert("domain".into(), "2d".into());
    meta.insert("n".into(), mask.n().to_string());
    writeln!(w, "# {}", format_meta(&meta)).map_err(wio)?;
    writeln!(w, "u,v,re,im").map_err(wio)?;
    for (&flat, z) in mask.order().iter().zip(g.values()) {
        let (u, v) = mask.centered_coords(flat);
        writeln!(w, "{u},{v},{},{}", z.re, z.im).map_err(wio)?;
    }
    w.flush().map_err(wio)
}

#[derive(Debug, Clone)]
pub enum ObservationFile {
    OneD {
        pattern: SamplingPattern1D,
        values: Observation<f64>,
        meta: Metadata,
    },
    TwoD {
        n: usize,
        /// Centered `(u, v)` per value.
        coords: Vec<(i64, i64)>,
        values: Observation<Complex64>,
        meta: Metadata,
    },
}

pub fn read_observation<R: BufRead>(r: R) -> Result<ObservationFile> {
    let (lines, meta) = read_lines(r)?;
    let n: usize = meta
        .get("n")
        .ok_or_else(|| Error::Parse("observation file lacks 'n' metadata".into()))
        .and_then(|s| parse_int(s))?;
    let header = lines
        .first()
        .ok_or_else(|| Error::Parse("empty observation file".into()))?;
    match header.as_str() {
        "index,value" => {
            let mut indices = Vec::new();
            let mut values = Vec::new();
            for l in &lines[1..] {
                let (i, v) = l
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("bad row '{l}'")))?;
                indices.push(parse_int::<usize>(i)?);
                values.push(parse_f64(v)?);
            }
            Ok(ObservationFile::OneD {
                pattern: SamplingPattern1D::new(n, indices)?,
                values: Observation::new(values),
                meta,
            })
        }
        "u,v,re,im" => {
            let mut coords = Vec::new();
            let mut values = Vec::new();
            for l in &lines[1..] {
                let f: Vec<&str> = l.split(',').collect();
                if f.len() != 4 {
                    return Err(Error::Parse(format!("bad row '{l}'")));
                }
                coords.push((parse_int::<i64>(f[0])?, parse_int::<i64>(f[1])?));
                values.push(Complex64::new(parse_f64(f[2])?, parse_f64(f[3])?));
            }
            Ok(ObservationFile::TwoD {
                n,
                coords,
                values: Observation::new(values),
                meta,
            })
        }
        other => Err(Error::Parse(format!("unknown observation header '{other}'"))),
    }
}

/// Check that file coordinates enumerate exactly the mask's cells, in order.
pub fn check_coords_match(mask: &RadialMask, n: usize, coords: &[(i64, i64)]) -> Result<()> {
    if n != mask.n() {
        return Err(Error::Shape(format!(
            "observation is for a {n}x{n} grid, mask is {}x{}",
            mask.n(),
            mask.n()
        )));
    }
    if coords.len() != mask.count() {
        return Err(Error::Shape(format!(
            "mask has {} cells, observation has {} values",
            mask.count(),
            coords.len()
        )));
    }
    for (k, (&flat, &(u, v))) in mask.order().iter().zip(coords).enumerate() {
        if mask.centered_coords(flat) != (u, v) {
            return Err(Error::Shape(format!(
                "observation value {k} is at ({u}, {v}), mask expects {:?}",
                mask.centered_coords(flat)
            )));
        }
    }
    Ok(())
}
