//! The "TCDS" dataset file: magic, `u32` version, `u32` sample count,
//! `u16` height and width, then per sample a `u8` mode, `f32` r and theta,
//! a `u8` frame count and the frames as row-major `f32`. Little-endian.

use std::path::Path;

use super::{Dataset, Sample};
use crate::binio::{write_atomic, Reader, Writer};
use crate::error::{Error, Result};
use crate::geometry::EdgePose;
use crate::tactile::{Mode, TactileFrame};

pub const MAGIC: &[u8; 4] = b"TCDS";
pub const VERSION: u32 = 1;

pub fn to_bytes(ds: &Dataset) -> Result<Vec<u8>> {
    let (h, w) = (ds.height, ds.width);
    if h > u16::MAX as usize || w > u16::MAX as usize {
        return Err(Error::invalid("frame dimensions exceed the format limit"));
    }
    let count = u32::try_from(ds.len()).map_err(|_| Error::invalid("too many samples"))?;
    let mut out = Writer::default();
    out.buf.reserve(
        16 + ds
            .samples
            .iter()
            .map(|s| 10 + s.frames.len() * h * w * 4)
            .sum::<usize>(),
    );
    out.bytes(MAGIC);
    out.u32(VERSION);
    out.u32(count);
    out.u16(h as u16);
    out.u16(w as u16);
    for s in &ds.samples {
        out.u8(s.mode.code());
        out.f32(s.label.r as f32);
        out.f32(s.label.theta as f32);
        let n = u8::try_from(s.frames.len())
            .map_err(|_| Error::invalid("at most 255 frames per sample"))?;
        out.u8(n);
        for f in &s.frames {
            if (f.height(), f.width()) != (h, w) {
                return Err(Error::shape("frame size differs from the dataset header"));
            }
            for &v in f.pixels() {
                out.f32(v);
            }
        }
    }
    Ok(out.buf)
}

pub fn from_bytes(bytes: &[u8]) -> Result<Dataset> {
    let mut rd = Reader::new(bytes);
    if rd.take(4, "magic")? != MAGIC {
        return Err(Reader::new(bytes).error("magic", "not a TCDS dataset file"));
    }
    let version = rd.u32("version")?;
    if version != VERSION {
        return Err(rd.error("version", format!("unsupported dataset version {version}")));
    }
    let count = rd.u32("header")? as usize;
    let h = rd.u16("header")? as usize;
    let w = rd.u16("header")? as usize;
    let mut ds = Dataset::new(h, w);
    ds.samples.reserve(count.min(1 << 16));
    for index in 0..count {
        let at = rd.offset();
        let code = rd.u8("sample header")?;
        let mode = Mode::from_code(code).ok_or_else(|| {
            rd.error(
                "sample header",
                format!("sample {index}: unknown mode {code}"),
            )
        })?;
        let r = rd.f32("sample label")? as f64;
        let theta = rd.f32("sample label")? as f64;
        let n = rd.u8("sample header")? as usize;
        if n == 0 {
            return Err(rd.error("sample header", format!("sample {index} has no frames")));
        }
        let mut frames = Vec::with_capacity(n);
        for _ in 0..n {
            let raw = rd
                .take(h * w * 4, "sample frames")
                .map_err(|e| annotate(e, index))?;
            let px = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            frames.push(TactileFrame::from_pixels(h, w, px));
        }
        ds.push(Sample {
            frames,
            label: EdgePose::new(r, theta),
            mode,
            index,
        })
        .map_err(|e| Error::Format {
            offset: at,
            section: "sample header",
            message: e.to_string(),
        })?;
    }
    if !rd.at_end() {
        return Err(rd.error("trailer", "unexpected bytes after the last sample"));
    }
    Ok(ds)
}

fn annotate(e: Error, index: usize) -> Error {
    match e {
        Error::Format {
            offset,
            section,
            message,
        } => Error::Format {
            offset,
            section,
            message: format!("sample {index}: {message}"),
        },
        e => e,
    }
}

pub fn save(ds: &Dataset, path: &Path) -> Result<()> {
    write_atomic(path, &to_bytes(ds)?)
}

pub fn load(path: &Path) -> Result<Dataset> {
    from_bytes(&std::fs::read(path)?)
}
