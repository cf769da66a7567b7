use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{invalid, Error, FormatError, Result};
use crate::signal::Channel;

pub const STORE_MAGIC: [u8; 4] = *b"BPS1";
pub const STORE_VERSION: u32 = 1;

/// Fixed-length multichannel segments, stored segment-major then
/// channel-major as 32-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentStore {
    segment_length: usize,
    channels: Vec<Channel>,
    data: Vec<f32>,
    ids: Vec<u64>,
}

impl SegmentStore {
    pub fn new(segment_length: usize, channels: Vec<Channel>) -> Result<Self> {
        if segment_length == 0 {
            return Err(invalid("segment length must be positive"));
        }
        if channels.is_empty() || channels.len() > Channel::ALL.len() {
            return Err(invalid(format!("bad channel count {}", channels.len())));
        }
        for (i, c) in channels.iter().enumerate() {
            if channels[..i].contains(c) {
                return Err(invalid(format!("duplicate channel {c}")));
            }
        }
        Ok(Self {
            segment_length,
            channels,
            data: Vec::new(),
            ids: Vec::new(),
        })
    }

    /// Appends one segment; `channels` follows the store's channel order.
    pub fn push(&mut self, id: u64, channels: &[&[f64]]) -> Result<()> {
        if channels.len() != self.channels.len() {
            return Err(invalid(format!(
                "expected {} channels, got {}",
                self.channels.len(),
                channels.len()
            )));
        }
        for (c, samples) in self.channels.iter().zip(channels) {
            if samples.len() != self.segment_length {
                return Err(invalid(format!(
                    "channel {c} has {} samples, store holds {}",
                    samples.len(),
                    self.segment_length
                )));
            }
        }
        let start = self.data.len();
        for samples in channels {
            for &v in samples.iter() {
                let f = v as f32;
                if !f.is_finite() {
                    self.data.truncate(start);
                    return Err(invalid(format!("non-finite sample in segment {id}")));
                }
                self.data.push(f);
            }
        }
        self.ids.push(id);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn segment_length(&self) -> usize {
        self.segment_length
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn channel_index(&self, channel: Channel) -> Option<usize> {
        self.channels.iter().position(|&c| c == channel)
    }

    /// Samples of segment `i`, channel position `c`.
    pub fn samples(&self, i: usize, c: usize) -> &[f32] {
        let l = self.segment_length;
        let base = (i * self.channels.len() + c) * l;
        &self.data[base..base + l]
    }

    pub fn channel_samples(&self, i: usize, channel: Channel) -> Option<&[f32]> {
        self.channel_index(channel).map(|c| self.samples(i, c))
    }

    pub fn samples_f64(&self, i: usize, c: usize) -> Vec<f64> {
        self.samples(i, c).iter().map(|&v| v as f64).collect()
    }

    pub fn position_of(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    /// New store with the segments at `positions`, in that order.
    pub fn select(&self, positions: &[usize]) -> SegmentStore {
        let block = self.channels.len() * self.segment_length;
        let mut data = Vec::with_capacity(positions.len() * block);
        for &p in positions {
            data.extend_from_slice(&self.data[p * block..(p + 1) * block]);
        }
        SegmentStore {
            segment_length: self.segment_length,
            channels: self.channels.clone(),
            data,
            ids: positions.iter().map(|&p| self.ids[p]).collect(),
        }
    }

    /// New store restricted to `channels`, in the given order.
    pub fn subset_channels(&self, channels: &[Channel]) -> Result<SegmentStore> {
        let idx: Vec<usize> = channels
            .iter()
            .map(|&c| {
                self.channel_index(c)
                    .ok_or_else(|| Error::Compatibility(format!("store has no {c} channel")))
            })
            .collect::<Result<_>>()?;
        let mut out = SegmentStore::new(self.segment_length, channels.to_vec())?;
        for i in 0..self.len() {
            for &c in &idx {
                out.data.extend_from_slice(self.samples(i, c));
            }
            out.ids.push(self.ids[i]);
        }
        Ok(out)
    }

    pub fn header_bytes(n_channels: usize) -> u64 {
        4 + 4 + 4 + 4 + 1 + n_channels as u64
    }

    pub fn payload_bytes(n_segments: u64, n_channels: u64, segment_length: u64) -> u64 {
        n_segments * n_channels * segment_length * 4
    }

    pub fn file_bytes(n_segments: u64, n_channels: u64, segment_length: u64) -> u64 {
        Self::header_bytes(n_channels as usize)
            + Self::payload_bytes(n_segments, n_channels, segment_length)
            + 8 * n_segments
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len() as u64;
        let mut out =
            Vec::with_capacity(Self::file_bytes(n, self.channels.len() as u64, self.segment_length as u64) as usize);
        out.extend_from_slice(&STORE_MAGIC);
        out.extend_from_slice(&STORE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.segment_length as u32).to_le_bytes());
        out.push(self.channels.len() as u8);
        out.extend(self.channels.iter().map(|c| c.code()));
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for id in &self.ids {
            out.extend_from_slice(&id.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        let magic: [u8; 4] = cur.take(4)?.try_into().unwrap();
        if magic != STORE_MAGIC {
            return Err(FormatError::BadMagic {
                expected: STORE_MAGIC,
                found: magic,
            }
            .into());
        }
        let version = cur.u32()?;
        if version != STORE_VERSION {
            return Err(FormatError::Version {
                expected: STORE_VERSION,
                found: version,
            }
            .into());
        }
        let n = cur.u32()? as u64;
        let l = cur.u32()? as u64;
        let c = cur.take(1)?[0] as u64;
        let codes = cur.take(c as usize)?;
        let channels = codes
            .iter()
            .map(|&code| {
                Channel::from_code(code).ok_or_else(|| FormatError::Invalid(format!("unknown channel code {code}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let expected = Self::file_bytes(n, c, l);
        let found = bytes.len() as u64;
        if found < expected {
            return Err(FormatError::Truncated { expected, found }.into());
        }
        if found > expected {
            return Err(FormatError::Trailing(found - expected).into());
        }
        let mut store = SegmentStore::new(l as usize, channels).map_err(|e| FormatError::Invalid(e.to_string()))?;
        let payload = cur.take(Self::payload_bytes(n, c, l) as usize)?;
        store.data = payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        if let Some(i) = store.data.iter().position(|v| !v.is_finite()) {
            return Err(FormatError::Invalid(format!("non-finite sample at payload index {i}")).into());
        }
        store.ids = cur
            .take(8 * n as usize)?
            .chunks_exact(8)
            .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Ok(store)
    }
}

pub(crate) struct Cursor<'a> {
    pub bytes: &'a [u8],
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.pos + n > self.bytes.len() {
            return Err(FormatError::Truncated {
                expected: (self.pos + n) as u64,
                found: self.bytes.len() as u64,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    /// Checks magic and version.
    pub fn header(&mut self, magic: [u8; 4], version: u32) -> Result<(), FormatError> {
        let found: [u8; 4] = self.take(4)?.try_into().unwrap();
        if found != magic {
            return Err(FormatError::BadMagic { expected: magic, found });
        }
        let v = self.u32()?;
        if v != version {
            return Err(FormatError::Version {
                expected: version,
                found: v,
            });
        }
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f32(&mut self) -> Result<f32, FormatError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn finish(&self) -> Result<(), FormatError> {
        if self.pos != self.bytes.len() {
            return Err(FormatError::Trailing((self.bytes.len() - self.pos) as u64));
        }
        Ok(())
    }
}

pub fn write_store(store: &SegmentStore, path: &Path) -> Result<()> {
    write_bytes(path, &store.to_bytes())
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    Ok(())
}

pub fn read_store(path: &Path) -> Result<SegmentStore> {
    SegmentStore::from_bytes(&fs::read(path)?)
}
