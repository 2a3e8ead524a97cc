//! Packed bitsets over [0, T], their on-disk format, and serde helpers for
//! big numbers (written as decimal strings so JSON readers never truncate).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Default allocation cap when `RECBASES_MAX_MEM` is unset: 1 GiB.
pub const DEFAULT_MAX_MEM: u64 = 1 << 30;
const MAGIC: &str = "RECBASES-BITSET 1";

pub fn max_mem() -> u64 {
    std::env::var("RECBASES_MAX_MEM")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_MEM)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitset {
    len: usize,
    words: Vec<u64>,
}

impl Bitset {
    /// All-zero bitset of `len` bits, subject to the memory cap.
    pub fn new(len: usize) -> Result<Self> {
        let bytes = len.div_ceil(64) as u64 * 8;
        let cap = max_mem();
        if bytes > cap {
            return Err(Error::MemoryCap { requested: bytes, cap });
        }
        Ok(Bitset { len, words: vec![0; len.div_ceil(64)] })
    }

    pub fn from_members(len: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut b = Bitset::new(len)?;
        for m in members {
            if m < len {
                b.set(m);
            }
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of set bits below `end`.
    pub fn count_below(&self, end: usize) -> usize {
        let end = end.min(self.len);
        let full = end / 64;
        let mut c: usize = self.words[..full].iter().map(|w| w.count_ones() as usize).sum();
        if !end.is_multiple_of(64) {
            c += (self.words[full] & ((1u64 << (end % 64)) - 1)).count_ones() as usize;
        }
        c
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(move |(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Indices in [0, len) that are not set.
    pub fn iter_zeros(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| !self.get(i))
    }

    pub fn is_subset(&self, other: &Bitset) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Write the header (spec text, T, byte count) followed by raw
    /// little-endian u64 words.
    pub fn write_file(&self, path: &Path, spec: &str) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "{MAGIC}")?;
        writeln!(f, "spec {}", spec.replace('\n', " "))?;
        writeln!(f, "T {}", self.len.saturating_sub(1))?;
        writeln!(f, "bytes {}", self.words.len() * 8)?;
        for w in &self.words {
            f.write_all(&w.to_le_bytes())?;
        }
        f.flush()?;
        Ok(())
    }

    /// Returns the spec text and the bitset.
    pub fn read_file(path: &Path) -> Result<(String, Bitset)> {
        let mut r = BufReader::new(std::fs::File::open(path)?);
        let mut line = String::new();
        let mut next = |r: &mut BufReader<std::fs::File>, key: &str| -> Result<String> {
            line.clear();
            r.read_line(&mut line)?;
            let l = line.trim_end_matches('\n');
            if key.is_empty() {
                return Ok(l.to_string());
            }
            l.strip_prefix(key)
                .map(|s| s.trim_start().to_string())
                .ok_or_else(|| Error::Parse(format!("bitset header: expected {key:?}")))
        };
        if next(&mut r, "")? != MAGIC {
            return Err(Error::Parse("not a recbases bitset file".into()));
        }
        let spec = next(&mut r, "spec")?;
        let t: usize = next(&mut r, "T")?.parse().map_err(|_| Error::Parse("bad T".into()))?;
        let bytes: usize = next(&mut r, "bytes")?.parse().map_err(|_| Error::Parse("bad byte count".into()))?;
        let mut b = Bitset::new(t + 1)?;
        if bytes != b.words.len() * 8 {
            return Err(Error::Parse("byte count does not match T".into()));
        }
        let mut buf = vec![0u8; bytes];
        r.read_exact(&mut buf)?;
        for (w, chunk) in b.words.iter_mut().zip(buf.chunks_exact(8)) {
            *w = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok((spec, b))
    }
}

pub mod bigint_str {
    use num::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub mod rational_str {
    use num::{BigInt, BigRational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", v.numer(), v.denom()))
    }

    pub fn parse(s: &str) -> Option<BigRational> {
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        (d != BigInt::from(0)).then(|| BigRational::new(n, d))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_roundtrip() {
        let b = Bitset::from_members(130, [0, 5, 64, 129]).unwrap();
        let dir = std::env::temp_dir().join(format!("recbases-bitset-{}", std::process::id()));
        b.write_file(&dir, "{\"x\":1}").unwrap();
        let (spec, c) = Bitset::read_file(&dir).unwrap();
        std::fs::remove_file(&dir).ok();
        assert_eq!(spec, "{\"x\":1}");
        assert_eq!(b, c);
        assert_eq!(c.iter_ones().collect::<Vec<_>>(), vec![0, 5, 64, 129]);
        assert_eq!(c.count_below(65), 3);
    }
}
