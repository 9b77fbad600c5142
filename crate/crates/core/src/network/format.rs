//! The `BNNV1` network file.
//!
//! ```text
//! "BNNV1"                    5 bytes
//! depth                      u32 LE
//! sizes[0..=depth]           u32 LE each
//! rows                       per layer, per row: ceil(in_dim / 64) u64 LE words
//! ```
//!
//! Rows appear in the same layer-major, row-major order weights are drawn in.
//! Padding bits of each row's last word are zero.

use super::{BinaryLayer, BinaryNetwork};
use crate::bitcore::BitVector;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"BNNV1";

pub fn save_network(net: &BinaryNetwork) -> Vec<u8> {
    let sizes = net.sizes();
    let words: usize = net
        .layers()
        .iter()
        .map(|l| l.out_dim() * l.in_dim().div_ceil(64))
        .sum();
    let mut out = Vec::with_capacity(MAGIC.len() + 4 * (sizes.len() + 1) + 8 * words);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(net.depth() as u32).to_le_bytes());
    for s in sizes {
        out.extend_from_slice(&(s as u32).to_le_bytes());
    }
    for row in net.layers().iter().flat_map(|l| l.rows()) {
        for w in row.words() {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::NetworkTruncated {
                needed: self.pos.saturating_add(n),
                available: self.bytes.len(),
            }),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub fn load_network(bytes: &[u8]) -> Result<BinaryNetwork> {
    if bytes.len() < MAGIC.len() {
        return Err(if MAGIC.starts_with(bytes) {
            Error::NetworkTruncated {
                needed: MAGIC.len(),
                available: bytes.len(),
            }
        } else {
            Error::NetworkMagic
        });
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::NetworkMagic);
    }
    let mut r = Reader {
        bytes,
        pos: MAGIC.len(),
    };
    let depth = r.u32()? as usize;
    if depth == 0 {
        return Err(Error::InvalidShape("depth 0".into()));
    }
    let header = depth
        .checked_add(1)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::NetworkSizeOverflow(format!("depth {depth}")))?;
    if header > r.remaining() {
        return Err(Error::NetworkTruncated {
            needed: r.pos.saturating_add(header),
            available: bytes.len(),
        });
    }
    let sizes = (0..=depth)
        .map(|_| r.u32().map(|s| s as usize))
        .collect::<Result<Vec<_>>>()?;
    if sizes.contains(&0) {
        return Err(Error::InvalidShape(format!("zero width in {sizes:?}")));
    }

    // Check the payload size before allocating anything.
    let mut payload: usize = 0;
    for w in sizes.windows(2) {
        payload = w[0]
            .div_ceil(64)
            .checked_mul(w[1])
            .and_then(|n| n.checked_mul(8))
            .and_then(|n| n.checked_add(payload))
            .ok_or_else(|| Error::NetworkSizeOverflow(format!("{sizes:?}")))?;
    }
    if payload > r.remaining() {
        return Err(Error::NetworkTruncated {
            needed: r.pos.saturating_add(payload),
            available: bytes.len(),
        });
    }

    let mut layers = Vec::with_capacity(depth);
    for w in sizes.windows(2) {
        let (in_dim, out_dim) = (w[0], w[1]);
        let mut rows = Vec::with_capacity(out_dim);
        for _ in 0..out_dim {
            let words = (0..in_dim.div_ceil(64))
                .map(|_| r.u64())
                .collect::<Result<Vec<_>>>()?;
            let row = BitVector::from_words(words.clone(), in_dim)?;
            if row.words() != words.as_slice() {
                return Err(Error::InvalidShape("non-zero padding bits in row".into()));
            }
            rows.push(row);
        }
        layers.push(BinaryLayer::new(in_dim, rows)?);
    }
    if r.remaining() != 0 {
        return Err(Error::NetworkTrailing(r.remaining()));
    }
    BinaryNetwork::new(layers)
}
