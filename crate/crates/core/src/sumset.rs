//! k-fold sumsets by shifted-OR over packed bitsets, complements, and gap
//! statistics of the complement.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::recurrence::{enumerate, RecurrenceSetSpec};

/// 64 bits of `src` starting at bit `pos` (bits outside the slice read as 0).
fn bits_at(src: &[u64], pos: i64) -> u64 {
    if pos <= -64 {
        return 0;
    }
    let word = pos.div_euclid(64);
    let off = pos.rem_euclid(64) as u32;
    let get = |i: i64| if i >= 0 && (i as usize) < src.len() { src[i as usize] } else { 0 };
    if off == 0 {
        get(word)
    } else {
        (get(word) >> off) | (get(word + 1) << (64 - off))
    }
}

const DEST_CHUNK: usize = 256;

/// {a + b : a in `lhs`, b in `rhs`} truncated to the length of `lhs`.
pub fn sum_bitmaps(lhs: &Bitset, rhs: &Bitset) -> Result<Bitset> {
    let len = lhs.len();
    let mut out = Bitset::new(len)?;
    let shifts: Vec<usize> = rhs.iter_ones().take_while(|&b| b < len).collect();
    let src = lhs.words();
    out.words_mut()
        .par_chunks_mut(DEST_CHUNK)
        .enumerate()
        .for_each(|(ci, chunk)| {
            let w0 = ci * DEST_CHUNK;
            for &s in &shifts {
                let first = s / 64;
                for (k, dst) in chunk.iter_mut().enumerate() {
                    let w = w0 + k;
                    if w < first {
                        continue;
                    }
                    *dst |= bits_at(src, (w * 64) as i64 - s as i64);
                }
            }
        });
    if !len.is_multiple_of(64) {
        let last = out.words().len() - 1;
        out.words_mut()[last] &= (1u64 << (len % 64)) - 1;
    }
    Ok(out)
}

/// kA = A + ... + A (k copies), truncated to [0, T].
pub fn sumset_bitmap(members: &Bitset, k: usize) -> Result<Bitset> {
    if k == 0 {
        return Err(Error::Precondition("k must be >= 1".into()));
    }
    let mut acc = members.clone();
    for _ in 1..k {
        acc = sum_bitmaps(&acc, members)?;
    }
    Ok(acc)
}

/// Independent confirmation that N is not a sum of k members, by direct
/// decomposition search.
pub fn verify_not_in_sumset(members: &Bitset, n: usize, k: usize) -> bool {
    fn reach(m: &Bitset, n: usize, k: usize) -> bool {
        if k == 1 {
            return m.get(n);
        }
        if k == 2 {
            return (0..=n / 2).any(|a| m.get(a) && m.get(n - a));
        }
        m.iter_ones().take_while(|&a| a <= n).any(|a| reach(m, n - a, k - 1))
    }
    n < members.len() && !reach(members, n, k)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub n: u64,
    pub next: u64,
    pub diff: u64,
    /// (N' - N) / N
    pub relative_gap: f64,
    /// N' / N
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SumsetReport {
    pub spec: Option<RecurrenceSetSpec>,
    pub k: usize,
    #[serde(rename = "T")]
    pub t: u64,
    pub complement: Vec<u64>,
    /// T' -> |{1, ..., T'} \ kA| for T' = 10, 100, ... and T itself.
    pub counts_at: BTreeMap<u64, usize>,
    pub gaps: Vec<Gap>,
}

/// Consecutive-pair statistics of a sorted complement list.
pub fn gap_stats(complement: &[u64]) -> Vec<Gap> {
    complement
        .windows(2)
        .map(|w| Gap {
            n: w[0],
            next: w[1],
            diff: w[1] - w[0],
            relative_gap: (w[1] - w[0]) as f64 / w[0] as f64,
            ratio: w[1] as f64 / w[0] as f64,
        })
        .collect()
}

pub fn counts_at(complement: &[u64], t: u64) -> BTreeMap<u64, usize> {
    let mut m = BTreeMap::new();
    let mut tp = 10u64;
    let count = |x: u64| complement.iter().filter(|&&c| c >= 1 && c <= x).count();
    while tp < t {
        m.insert(tp, count(tp));
        tp = tp.saturating_mul(10);
    }
    m.insert(t, count(t));
    m
}

/// Report for a precomputed membership bitset.
pub fn report_from_members(spec: Option<RecurrenceSetSpec>, members: &Bitset, k: usize) -> Result<SumsetReport> {
    let t = members.len() as u64 - 1;
    let sum = sumset_bitmap(members, k)?;
    let complement: Vec<u64> = sum.iter_zeros().map(|n| n as u64).collect();
    Ok(SumsetReport {
        spec,
        k,
        t,
        counts_at: counts_at(&complement, t),
        gaps: gap_stats(&complement),
        complement,
    })
}

/// All N <= T outside kA. Truncating members at T loses nothing since
/// members are non-negative.
pub fn complement(spec: &RecurrenceSetSpec, k: usize, t: u64) -> Result<SumsetReport> {
    let members = enumerate(spec, t)?;
    report_from_members(Some(spec.clone()), &members, k)
}

/// CSV mirror: one complement element per row.
pub fn report_csv(r: &SumsetReport) -> String {
    let mut s = String::from("N\n");
    for n in &r.complement {
        s.push_str(&n.to_string());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_sumsets() {
        let m = Bitset::from_members(10, [0, 1]).unwrap();
        let s = sumset_bitmap(&m, 2).unwrap();
        assert_eq!(s.iter_ones().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(sumset_bitmap(&m, 1).unwrap(), m);
    }

    #[test]
    fn shifted_or_matches_naive() {
        let members: Vec<usize> = (0..700).filter(|n| (n * n * 7 + 3 * n) % 11 < 3).collect();
        let m = Bitset::from_members(700, members.iter().copied()).unwrap();
        let s = sumset_bitmap(&m, 2).unwrap();
        for n in 0..700 {
            let naive = members.iter().any(|&a| a <= n && m.get(n - a));
            assert_eq!(s.get(n), naive, "n = {n}");
        }
    }
}
