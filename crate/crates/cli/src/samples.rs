//! Sample and memory-image file formats.
//!
//! Text samples are one `index re im` line per sample with Q1.15 integers;
//! `#` starts a comment. Binary samples are little-endian i16 pairs
//! `re, im` in index order. Memory images are `index hex32` lines.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ttafft::{DataWord, SampleVector};

pub fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

pub fn parse_text(text: &str, n: usize) -> Result<SampleVector> {
    let mut data = vec![None; n];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [idx, re, im] = fields[..] else {
            bail!("line {}: expected `index re im`", i + 1);
        };
        let idx: usize = idx.parse().with_context(|| format!("line {}: bad index `{idx}`", i + 1))?;
        let re: i16 = re.parse().with_context(|| format!("line {}: bad real part `{re}`", i + 1))?;
        let im: i16 = im.parse().with_context(|| format!("line {}: bad imaginary part `{im}`", i + 1))?;
        let slot = data.get_mut(idx).with_context(|| format!("line {}: index {idx} outside 0..{n}", i + 1))?;
        if slot.replace(DataWord::new(re, im)).is_some() {
            bail!("line {}: index {idx} given twice", i + 1);
        }
    }
    let words = data
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.with_context(|| format!("sample {i} missing")))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleVector::new(words))
}

pub fn parse_binary(bytes: &[u8], n: usize) -> Result<SampleVector> {
    if bytes.len() != 4 * n {
        bail!("binary sample file holds {} bytes, {n} samples need {}", bytes.len(), 4 * n);
    }
    let words = bytes
        .chunks_exact(4)
        .map(|c| DataWord::new(i16::from_le_bytes([c[0], c[1]]), i16::from_le_bytes([c[2], c[3]])))
        .collect();
    Ok(SampleVector::new(words))
}

pub fn read(path: &Path, n: usize) -> Result<SampleVector> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if is_binary(path) {
        parse_binary(&bytes, n)
    } else {
        parse_text(std::str::from_utf8(&bytes).context("sample file is not UTF-8")?, n)
    }
}

pub fn to_text(x: &SampleVector) -> String {
    let mut out = String::new();
    for (i, w) in x.as_slice().iter().enumerate() {
        writeln!(out, "{i} {} {}", w.re(), w.im()).unwrap();
    }
    out
}

pub fn to_binary(x: &SampleVector) -> Vec<u8> {
    x.as_slice().iter().flat_map(|w| [w.re().to_le_bytes(), w.im().to_le_bytes()]).flatten().collect()
}

pub fn write(path: &Path, x: &SampleVector) -> Result<()> {
    let bytes = if is_binary(path) { to_binary(x) } else { to_text(x).into_bytes() };
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn memory_image(words: &[u32]) -> String {
    let mut out = String::new();
    for (i, w) in words.iter().enumerate() {
        writeln!(out, "{i} {w:08x}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip_and_errors() {
        let x = SampleVector::random(64, 5);
        assert_eq!(parse_text(&to_text(&x), 64).unwrap(), x);
        assert_eq!(parse_binary(&to_binary(&x), 64).unwrap(), x);
        assert!(parse_text("0 1 2\n", 2).is_err());
        assert!(parse_text("0 1 2\n0 1 2\n", 1).is_err());
        assert!(parse_text("0 1\n", 1).is_err());
        assert!(parse_text("0 1 40000\n", 1).is_err());
        assert!(parse_binary(&[0, 0, 0], 1).is_err());
    }

    #[test]
    fn memory_image_format() {
        assert_eq!(memory_image(&[0x4000, 0xffff_0001]), "0 00004000\n1 ffff0001\n");
    }
}
