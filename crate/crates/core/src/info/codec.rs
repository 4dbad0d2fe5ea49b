//! A small, fully specified LZ77 codec.
//!
//! Stream layout, bits packed most significant first:
//!
//! * 32-bit big-endian length of the original payload;
//! * tokens until that many bytes are produced. A literal is a `0` bit and
//!   the byte; a match is a `1` bit, 15 bits of `distance − 1` and 8 bits of
//!   `length − 3`;
//! * zero bits up to the next byte boundary.
//!
//! The encoder is greedy: at each position it takes the longest match of at
//! least 3 bytes within the last 32 KiB (up to 258 bytes, overlap allowed),
//! the nearest one on ties, and a literal otherwise.

use thiserror::Error;

const WINDOW: usize = 1 << 15;
const MIN_MATCH: usize = 3;
const MAX_MATCH: usize = MIN_MATCH + 255;
const HASH_BITS: u32 = 16;
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("stream ends early")]
    Truncated,
    #[error("match distance {distance} reaches before the start of the output")]
    BadDistance { distance: usize },
    #[error("match runs past the declared length")]
    Overrun,
    #[error("payload longer than 2^32 - 1 bytes")]
    TooLong,
}

struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    n: u32,
}

impl BitWriter {
    fn put(&mut self, value: u32, bits: u32) {
        self.acc = (self.acc << bits) | u64::from(value);
        self.n += bits;
        while self.n >= 8 {
            self.n -= 8;
            self.out.push((self.acc >> self.n) as u8);
        }
        self.acc &= (1 << self.n) - 1;
    }

    fn finish(mut self) -> Vec<u8> {
        if self.n > 0 {
            self.out.push((self.acc << (8 - self.n)) as u8);
        }
        self.out
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl BitReader<'_> {
    fn get(&mut self, bits: u32) -> Result<u32, CodecError> {
        let mut v = 0u32;
        for _ in 0..bits {
            let byte = *self.data.get(self.pos / 8).ok_or(CodecError::Truncated)?;
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | u32::from(bit);
            self.pos += 1;
        }
        Ok(v)
    }
}

fn hash3(b: &[u8]) -> usize {
    let k = (u32::from(b[0]) << 16) | (u32::from(b[1]) << 8) | u32::from(b[2]);
    (k.wrapping_mul(0x9E37_79B1) >> (32 - HASH_BITS)) as usize
}

/// Longest match for `pos`, nearest first on ties.
fn longest_match(data: &[u8], pos: usize, head: &[u32], prev: &[u32]) -> (usize, usize) {
    let limit = (data.len() - pos).min(MAX_MATCH);
    let (mut best_len, mut best_dist) = (0, 0);
    if limit < MIN_MATCH {
        return (0, 0);
    }
    let mut cand = head[hash3(&data[pos..])];
    while cand != NONE {
        let c = cand as usize;
        let dist = pos - c;
        if dist > WINDOW {
            break;
        }
        // Only a candidate that also matches at best_len can beat the best.
        if data[c + best_len.min(limit - 1)] == data[pos + best_len.min(limit - 1)] {
            let len = data[c..]
                .iter()
                .zip(&data[pos..pos + limit])
                .take_while(|(a, b)| a == b)
                .count();
            if len > best_len {
                best_len = len;
                best_dist = dist;
                if len == limit {
                    break;
                }
            }
        }
        cand = prev[c];
    }
    if best_len >= MIN_MATCH {
        (best_len, best_dist)
    } else {
        (0, 0)
    }
}

pub fn compress(data: &[u8]) -> Result<Vec<u8>, CodecError> {
    let n = u32::try_from(data.len()).map_err(|_| CodecError::TooLong)?;
    let mut w = BitWriter {
        out: Vec::with_capacity(4 + data.len() / 2),
        acc: 0,
        n: 0,
    };
    w.put(n >> 16, 16);
    w.put(n & 0xFFFF, 16);
    let mut head = vec![NONE; 1 << HASH_BITS];
    let mut prev = vec![NONE; data.len()];
    let insert = |head: &mut [u32], prev: &mut [u32], i: usize| {
        if i + MIN_MATCH <= data.len() {
            let h = hash3(&data[i..]);
            prev[i] = head[h];
            head[h] = i as u32;
        }
    };
    let mut pos = 0;
    while pos < data.len() {
        let (len, dist) = longest_match(data, pos, &head, &prev);
        if len == 0 {
            w.put(0, 1);
            w.put(u32::from(data[pos]), 8);
            insert(&mut head, &mut prev, pos);
            pos += 1;
        } else {
            w.put(1, 1);
            w.put((dist - 1) as u32, 15);
            w.put((len - MIN_MATCH) as u32, 8);
            for i in pos..pos + len {
                insert(&mut head, &mut prev, i);
            }
            pos += len;
        }
    }
    Ok(w.finish())
}

pub fn decompress(stream: &[u8]) -> Result<Vec<u8>, CodecError> {
    let mut r = BitReader { data: stream, pos: 0 };
    let n = r.get(32)? as usize;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if r.get(1)? == 0 {
            out.push(r.get(8)? as u8);
        } else {
            let distance = r.get(15)? as usize + 1;
            let length = r.get(8)? as usize + MIN_MATCH;
            if distance > out.len() {
                return Err(CodecError::BadDistance { distance });
            }
            if out.len() + length > n {
                return Err(CodecError::Overrun);
            }
            let start = out.len() - distance;
            for k in 0..length {
                let b = out[start + k];
                out.push(b);
            }
        }
    }
    Ok(out)
}

/// Upper bound on algorithmic information: eight times the compressed size.
pub fn algorithmic_info_proxy(payload: &[u8]) -> u64 {
    8 * compress(payload).expect("payload fits the length header").len() as u64
}
