//! The "TCNN" model file: little-endian header, layer list, label ranges,
//! then every parameter tensor in declaration order as `f32`.

use std::path::Path;

use super::network::{LabelRanges, Network};
use super::spec::{Architecture, LayerSpec, NetworkSpec};
use super::Tensor;
use crate::binio::{write_atomic, Reader, Writer};
use crate::error::Result;

pub const MAGIC: &[u8; 4] = b"TCNN";
pub const VERSION: u32 = 1;

const CONV: u8 = 1;
const RELU: u8 = 2;
const POOL: u8 = 3;
const FLATTEN: u8 = 4;
const DENSE: u8 = 5;
const DROPOUT: u8 = 6;
const OUTPUT: u8 = 7;

pub fn to_bytes(net: &Network) -> Vec<u8> {
    let spec = net.spec();
    let mut w = Writer::default();
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u8(spec.arch.tag());
    let (c, h, wd) = spec.input;
    for d in [c, h, wd] {
        w.u32(d as u32);
    }
    w.u32(spec.layers.len() as u32);
    for layer in &spec.layers {
        match *layer {
            LayerSpec::Conv2d {
                kernel,
                filters,
                stride,
                same,
            } => {
                w.u8(CONV);
                w.u32(kernel as u32);
                w.u32(filters as u32);
                w.u32(stride as u32);
                w.u8(same as u8);
            }
            LayerSpec::Relu => w.u8(RELU),
            LayerSpec::MaxPool2x2 => w.u8(POOL),
            LayerSpec::Flatten => w.u8(FLATTEN),
            LayerSpec::Dense { units } => {
                w.u8(DENSE);
                w.u32(units as u32);
            }
            LayerSpec::Dropout { rate } => {
                w.u8(DROPOUT);
                w.f64(rate);
            }
            LayerSpec::Output => w.u8(OUTPUT),
        }
    }
    let r = net.ranges();
    for v in [r.r.0, r.r.1, r.theta.0, r.theta.1] {
        w.f64(v);
    }
    for p in net.params() {
        for &v in p.data() {
            w.f32(v as f32);
        }
    }
    w.buf
}

pub fn from_bytes(bytes: &[u8]) -> Result<Network> {
    let mut rd = Reader::new(bytes);
    if rd.take(4, "magic")? != MAGIC {
        return Err(Reader::new(bytes).error("magic", "not a TCNN model file"));
    }
    let version = rd.u32("version")?;
    if version != VERSION {
        return Err(rd.error("version", format!("unsupported model version {version}")));
    }
    let tag = rd.u8("architecture")?;
    let arch = Architecture::from_tag(tag)
        .ok_or_else(|| rd.error("architecture", format!("unknown tag {tag}")))?;
    let c = rd.u32("input shape")? as usize;
    let h = rd.u32("input shape")? as usize;
    let wd = rd.u32("input shape")? as usize;
    let count = rd.u32("layer list")? as usize;
    let mut layers = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let layer = match rd.u8("layer list")? {
            CONV => LayerSpec::Conv2d {
                kernel: rd.u32("layer list")? as usize,
                filters: rd.u32("layer list")? as usize,
                stride: rd.u32("layer list")? as usize,
                same: rd.u8("layer list")? != 0,
            },
            RELU => LayerSpec::Relu,
            POOL => LayerSpec::MaxPool2x2,
            FLATTEN => LayerSpec::Flatten,
            DENSE => LayerSpec::Dense {
                units: rd.u32("layer list")? as usize,
            },
            DROPOUT => LayerSpec::Dropout {
                rate: rd.f64("layer list")?,
            },
            OUTPUT => LayerSpec::Output,
            k => return Err(rd.error("layer list", format!("unknown layer kind {k}"))),
        };
        layers.push(layer);
    }
    let spec = NetworkSpec {
        arch,
        input: (c, h, wd),
        layers,
    };
    let at = rd.offset();
    let shapes = spec
        .param_shapes()
        .map_err(|e| rd.error("layer list", e.to_string()))?;
    let mut ranges = [0.0; 4];
    for v in &mut ranges {
        *v = rd.f64("label ranges")?;
    }
    let ranges = LabelRanges {
        r: (ranges[0], ranges[1]),
        theta: (ranges[2], ranges[3]),
    };
    let mut params = Vec::with_capacity(shapes.len());
    for shape in &shapes {
        let n: usize = shape.iter().product();
        let raw = rd.take(n * 4, "parameters")?;
        let data = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect();
        params.push(Tensor::from_vec(shape, data)?);
    }
    if !rd.at_end() {
        return Err(rd.error("parameters", "trailing bytes after the last tensor"));
    }
    Network::from_params(spec, ranges, params).map_err(|e| crate::error::Error::Format {
        offset: at,
        section: "layer list",
        message: e.to_string(),
    })
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    write_atomic(path, &to_bytes(net))
}

pub fn load(path: &Path) -> Result<Network> {
    from_bytes(&std::fs::read(path)?)
}
