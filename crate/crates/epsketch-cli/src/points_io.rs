//! Point-set file I/O: CSV (one point per row) or the binary format
//! (magic "EPTS", version byte, u32 n, u32 k, then n*k little-endian
//! f64 coordinates).

use epsketch::{Error, PointSet, Result, Vector};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

const MAGIC: [u8; 4] = *b"EPTS";
const VERSION: u8 = 0x01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PointsFormat {
    Csv,
    Bin,
}

/// Reads either format, sniffing the binary magic first.
pub fn read_points(path: &Path, assume_unit_ball: bool) -> Result<PointSet> {
    let mut file = File::open(path)?;
    let mut head = [0u8; 4];
    let got = file.read(&mut head)?;
    drop(file);
    let rows = if got == 4 && head == MAGIC {
        read_binary_rows(path)?
    } else {
        read_csv_rows(path)?
    };
    let points = rows.into_iter().map(Vector::new).collect::<Result<Vec<_>>>()?;
    if assume_unit_ball {
        PointSet::new(points)
    } else {
        PointSet::new_unit_ball(points)
    }
}

fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row = trimmed
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|e| {
                    Error::InvalidParameter(format!(
                        "{}:{}: bad number {tok:?}: {e}",
                        path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn read_binary_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 4];
    r.read_exact(&mut head)?;
    if head != MAGIC {
        return Err(Error::MalformedFile("bad points magic".into()));
    }
    let mut byte = [0u8; 1];
    r.read_exact(&mut byte)?;
    if byte[0] != VERSION {
        return Err(Error::MalformedFile(format!("unsupported points version {}", byte[0])));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let n = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let k = u32::from_le_bytes(u32buf) as usize;
    let mut rows = Vec::with_capacity(n);
    let mut f64buf = [0u8; 8];
    for _ in 0..n {
        let mut row = Vec::with_capacity(k);
        for _ in 0..k {
            r.read_exact(&mut f64buf)?;
            row.push(f64::from_le_bytes(f64buf));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_points(path: &Path, set: &PointSet, format: PointsFormat) -> Result<()> {
    let mut w = File::create(path)?;
    match format {
        PointsFormat::Csv => {
            for p in set.iter() {
                let line = p
                    .as_slice()
                    .iter()
                    .map(|c| format!("{c:.17}"))
                    .collect::<Vec<_>>()
                    .join(",");
                writeln!(w, "{line}")?;
            }
        }
        PointsFormat::Bin => {
            w.write_all(&MAGIC)?;
            w.write_all(&[VERSION])?;
            w.write_all(&(set.len() as u32).to_le_bytes())?;
            w.write_all(&(set.dim() as u32).to_le_bytes())?;
            for p in set.iter() {
                for c in p.as_slice() {
                    w.write_all(&c.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}
