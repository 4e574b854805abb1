//! Embedding matrices for the Fréchet metrics, in either of two formats:
//!
//! - CSV: one sample per row, comma-separated floats;
//! - raw binary: an ASCII header line `EMBF32 <N> <D>` followed by
//!   `N * D` little-endian 32-bit floats.

use anyhow::{bail, Context, Result};
use sav_core::metrics::{EmbeddingSet, SourceTag};
use std::io::Write;
use std::path::Path;

pub const BINARY_MAGIC: &str = "EMBF32";

pub fn read_embeddings(path: &Path, tag: SourceTag) -> Result<EmbeddingSet> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(BINARY_MAGIC.as_bytes()) {
        read_binary(path, &bytes, tag)
    } else {
        read_csv(path, &bytes, tag)
    }
}

fn read_csv(path: &Path, bytes: &[u8], tag: SourceTag) -> Result<EmbeddingSet> {
    let text = std::str::from_utf8(bytes)
        .with_context(|| format!("{} is neither {} binary nor text", path.display(), BINARY_MAGIC))?;
    let mut data = Vec::new();
    let mut dim = None;
    let mut rows = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0usize;
        for field in line.split(',') {
            let v: f64 = field.trim().parse().with_context(|| {
                format!("{}:{}: bad float {:?}", path.display(), lineno + 1, field)
            })?;
            data.push(v);
            count += 1;
        }
        match dim {
            None => dim = Some(count),
            Some(d) if d != count => bail!(
                "{}:{}: row has {} values, expected {}",
                path.display(),
                lineno + 1,
                count,
                d
            ),
            _ => {}
        }
        rows += 1;
    }
    let Some(d) = dim else {
        bail!("{}: no embedding rows", path.display());
    };
    Ok(EmbeddingSet::new(rows, d, data, tag)?)
}

fn read_binary(path: &Path, bytes: &[u8], tag: SourceTag) -> Result<EmbeddingSet> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .with_context(|| format!("{}: missing header line", path.display()))?;
    let header = std::str::from_utf8(&bytes[..newline])
        .with_context(|| format!("{}: header is not ASCII", path.display()))?;
    let mut parts = header.split_whitespace();
    let magic = parts.next().unwrap_or_default();
    if magic != BINARY_MAGIC {
        bail!("{}: bad magic {:?}", path.display(), magic);
    }
    let n: usize = parts
        .next()
        .with_context(|| format!("{}: header missing N", path.display()))?
        .parse()
        .with_context(|| format!("{}: bad N", path.display()))?;
    let d: usize = parts
        .next()
        .with_context(|| format!("{}: header missing D", path.display()))?
        .parse()
        .with_context(|| format!("{}: bad D", path.display()))?;
    let payload = &bytes[newline + 1..];
    if payload.len() != n * d * 4 {
        bail!(
            "{}: payload holds {} bytes, expected {} for {}x{} f32",
            path.display(),
            payload.len(),
            n * d * 4,
            n,
            d
        );
    }
    let data: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Ok(EmbeddingSet::new(n, d, data, tag)?)
}

pub fn write_embeddings_csv(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_embeddings_binary(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    let mut file =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(file, "{BINARY_MAGIC} {n} {d}")?;
    for row in rows {
        for v in row {
            file.write_all(&(*v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}
