//! Reading values from text or raw binary input.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// One decimal number per line; blank lines are skipped.
    Text,
    /// Little-endian IEEE-754 doubles, no header.
    Binary,
}

/// Opens `path`, or standard input for `-`.
pub fn open(path: &Path) -> Result<Box<dyn Read>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin().lock()));
    }
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(Box::new(f))
}

pub fn read_path(path: &Path, format: Format) -> Result<Vec<f64>> {
    let r = open(path)?;
    read_values(r, format).with_context(|| format!("reading {}", path.display()))
}

pub fn read_values<R: Read>(r: R, format: Format) -> Result<Vec<f64>> {
    match format {
        Format::Text => read_text(BufReader::new(r)),
        Format::Binary => read_binary(BufReader::new(r)),
    }
}

fn push(values: &mut Vec<f64>, x: f64) -> Result<()> {
    if values.len() == values.capacity() && values.try_reserve(values.len().max(1024)).is_err() {
        bail!(
            "input too large: could not grow buffer beyond {} values; the median is computed in memory",
            values.len()
        );
    }
    values.push(x);
    Ok(())
}

pub fn read_text<R: BufRead>(mut r: R) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut line = String::new();
    let mut lineno = 0usize;
    loop {
        line.clear();
        if r.read_line(&mut line).with_context(|| format!("line {}", lineno + 1))? == 0 {
            break;
        }
        lineno += 1;
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        let x: f64 = s
            .parse()
            .map_err(|_| anyhow::anyhow!("line {lineno}: not a number: {s:?}"))?;
        if !x.is_finite() {
            bail!("line {lineno}: non-finite value {s:?}");
        }
        push(&mut values, x)?;
    }
    Ok(values)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut buf = [0u8; 8];
    let mut offset = 0u64;
    loop {
        let mut filled = 0;
        while filled < 8 {
            match r.read(&mut buf[filled..]) {
                Ok(0) => break,
                Ok(k) => filled += k,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e).with_context(|| format!("byte offset {offset}")),
            }
        }
        if filled == 0 {
            break;
        }
        if filled < 8 {
            bail!("byte offset {offset}: trailing {filled} bytes do not form a complete 8-byte value");
        }
        let x = f64::from_le_bytes(buf);
        if !x.is_finite() {
            bail!("byte offset {offset}: non-finite value {x}");
        }
        push(&mut values, x)?;
        offset += 8;
    }
    Ok(values)
}
