use std::fmt;

use crate::error::{Error, Result};

/// One layer of a sequential network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LayerSpec {
    Conv2d {
        kernel: usize,
        filters: usize,
        stride: usize,
        same: bool,
    },
    Relu,
    MaxPool2x2,
    Flatten,
    Dense {
        units: usize,
    },
    Dropout {
        rate: f64,
    },
    /// Linear dense layer producing the `(r, theta)` pair.
    Output,
}

/// Width of the final layer.
pub const OUTPUT_DIM: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Architecture {
    A,
    B,
    Custom,
}

impl Architecture {
    pub fn tag(self) -> u8 {
        match self {
            Architecture::A => b'A',
            Architecture::B => b'B',
            Architecture::Custom => b'C',
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            b'A' => Some(Architecture::A),
            b'B' => Some(Architecture::B),
            b'C' => Some(Architecture::Custom),
            _ => None,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Architecture::A => "A",
            Architecture::B => "B",
            Architecture::Custom => "custom",
        })
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Architecture::A),
            "b" => Ok(Architecture::B),
            "custom" => Ok(Architecture::Custom),
            _ => Err(Error::invalid(format!(
                "unknown architecture {s:?} (expected A or B)"
            ))),
        }
    }
}

/// Activation shape between layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Image { c: usize, h: usize, w: usize },
    Flat(usize),
}

impl Shape {
    pub fn size(self) -> usize {
        match self {
            Shape::Image { c, h, w } => c * h * w,
            Shape::Flat(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    pub arch: Architecture,
    /// Input `(channels, height, width)`.
    pub input: (usize, usize, usize),
    pub layers: Vec<LayerSpec>,
}

pub const ARCH_A_FILTERS: [usize; 5] = [8, 16, 16, 32, 32];
pub const DENSE_UNITS: usize = 64;
pub const DROPOUT: f64 = 0.25;

fn arch_a_stack(layers: &mut Vec<LayerSpec>) {
    for filters in ARCH_A_FILTERS {
        layers.push(LayerSpec::Conv2d {
            kernel: 3,
            filters,
            stride: 1,
            same: true,
        });
        layers.push(LayerSpec::Relu);
        layers.push(LayerSpec::MaxPool2x2);
    }
    layers.extend([
        LayerSpec::Flatten,
        LayerSpec::Dense { units: DENSE_UNITS },
        LayerSpec::Relu,
        LayerSpec::Dropout { rate: DROPOUT },
        LayerSpec::Output,
    ]);
}

/// Five `conv3x3 -> relu -> maxpool` blocks, then a 64-unit dense layer,
/// dropout and the linear output.
pub fn build_arch_a(size: usize) -> NetworkSpec {
    let mut layers = Vec::new();
    arch_a_stack(&mut layers);
    NetworkSpec {
        arch: Architecture::A,
        input: (1, size, size),
        layers,
    }
}

/// Architecture A preceded by two unpooled `conv5x5` layers.
pub fn build_arch_b(size: usize) -> NetworkSpec {
    let mut layers = Vec::new();
    for _ in 0..2 {
        layers.push(LayerSpec::Conv2d {
            kernel: 5,
            filters: 8,
            stride: 1,
            same: true,
        });
        layers.push(LayerSpec::Relu);
    }
    arch_a_stack(&mut layers);
    NetworkSpec {
        arch: Architecture::B,
        input: (1, size, size),
        layers,
    }
}

pub fn build(arch: Architecture, size: usize) -> Result<NetworkSpec> {
    match arch {
        Architecture::A => Ok(build_arch_a(size)),
        Architecture::B => Ok(build_arch_b(size)),
        Architecture::Custom => Err(Error::invalid(
            "a custom architecture needs an explicit layer list",
        )),
    }
}

impl NetworkSpec {
    /// Output shape after each layer; fails on the first incompatible layer.
    pub fn shape_trace(&self) -> Result<Vec<Shape>> {
        let (c, h, w) = self.input;
        if c == 0 || h == 0 || w == 0 {
            return Err(Error::invalid("input dimensions must be positive"));
        }
        let mut cur = Shape::Image { c, h, w };
        let mut out = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let bad = |msg: String| Error::shape(format!("layer {i} ({layer:?}): {msg}"));
            cur = match (*layer, cur) {
                (
                    LayerSpec::Conv2d {
                        kernel,
                        filters,
                        stride,
                        same,
                    },
                    Shape::Image { h, w, .. },
                ) => {
                    if filters == 0 {
                        return Err(bad("zero filters".into()));
                    }
                    let g = super::ops::ConvGeom::new(h, w, kernel, stride, same)
                        .map_err(|e| bad(e.to_string()))?;
                    Shape::Image {
                        c: filters,
                        h: g.out_h,
                        w: g.out_w,
                    }
                }
                (LayerSpec::MaxPool2x2, Shape::Image { c, h, w }) => {
                    if h < 2 || w < 2 {
                        return Err(bad(format!("cannot pool {h}x{w}")));
                    }
                    Shape::Image {
                        c,
                        h: h / 2,
                        w: w / 2,
                    }
                }
                (LayerSpec::Flatten, s) => Shape::Flat(s.size()),
                (LayerSpec::Relu, s) => s,
                (LayerSpec::Dropout { rate }, s) => {
                    if !(0.0..1.0).contains(&rate) {
                        return Err(bad(format!("dropout rate {rate} outside [0, 1)")));
                    }
                    s
                }
                (LayerSpec::Dense { units }, Shape::Flat(_)) => {
                    if units == 0 {
                        return Err(bad("zero units".into()));
                    }
                    Shape::Flat(units)
                }
                (LayerSpec::Output, Shape::Flat(_)) => Shape::Flat(OUTPUT_DIM),
                (_, s) => return Err(bad(format!("incompatible with input {s:?}"))),
            };
            out.push(cur);
        }
        Ok(out)
    }

    /// Checks shape compatibility and that the network ends in the output
    /// layer.
    pub fn validate(&self) -> Result<()> {
        self.shape_trace()?;
        if self.layers.last() != Some(&LayerSpec::Output) {
            return Err(Error::invalid("network must end in the output layer"));
        }
        if self.layers[..self.layers.len() - 1].contains(&LayerSpec::Output) {
            return Err(Error::invalid("output layer may only appear last"));
        }
        Ok(())
    }

    /// Shapes of the trainable tensors in declaration order (weights then
    /// bias for each conv, dense and output layer).
    pub fn param_shapes(&self) -> Result<Vec<Vec<usize>>> {
        let trace = self.shape_trace()?;
        let (c0, h0, w0) = self.input;
        let mut prev = Shape::Image {
            c: c0,
            h: h0,
            w: w0,
        };
        let mut shapes = Vec::new();
        for (layer, &next) in self.layers.iter().zip(&trace) {
            match (*layer, prev) {
                (
                    LayerSpec::Conv2d {
                        kernel, filters, ..
                    },
                    Shape::Image { c, .. },
                ) => {
                    shapes.push(vec![filters, c, kernel, kernel]);
                    shapes.push(vec![filters]);
                }
                (LayerSpec::Dense { units }, Shape::Flat(n)) => {
                    shapes.push(vec![units, n]);
                    shapes.push(vec![units]);
                }
                (LayerSpec::Output, Shape::Flat(n)) => {
                    shapes.push(vec![OUTPUT_DIM, n]);
                    shapes.push(vec![OUTPUT_DIM]);
                }
                _ => {}
            }
            prev = next;
        }
        Ok(shapes)
    }

    pub fn param_count(&self) -> Result<usize> {
        Ok(self
            .param_shapes()?
            .iter()
            .map(|s| s.iter().product::<usize>())
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arch_a_reaches_4x4_at_128() {
        let spec = build_arch_a(128);
        spec.validate().unwrap();
        let trace = spec.shape_trace().unwrap();
        let before_flatten = trace[spec
            .layers
            .iter()
            .position(|l| *l == LayerSpec::Flatten)
            .unwrap()
            - 1];
        assert_eq!(before_flatten, Shape::Image { c: 32, h: 4, w: 4 });
        assert_eq!(*trace.last().unwrap(), Shape::Flat(2));
    }

    #[test]
    fn arch_b_front_keeps_size() {
        let spec = build_arch_b(128);
        spec.validate().unwrap();
        let trace = spec.shape_trace().unwrap();
        assert_eq!(
            trace[3],
            Shape::Image {
                c: 8,
                h: 128,
                w: 128
            }
        );
        assert_eq!(*trace.last().unwrap(), Shape::Flat(2));
    }

    #[test]
    fn incompatible_layers_rejected() {
        let spec = NetworkSpec {
            arch: Architecture::Custom,
            input: (1, 8, 8),
            layers: vec![LayerSpec::Dense { units: 3 }, LayerSpec::Output],
        };
        assert!(spec.validate().is_err());
        let spec = NetworkSpec {
            arch: Architecture::Custom,
            input: (1, 8, 8),
            layers: vec![
                LayerSpec::Flatten,
                LayerSpec::Dropout { rate: 1.0 },
                LayerSpec::Output,
            ],
        };
        assert!(spec.validate().is_err());
        let spec = NetworkSpec {
            arch: Architecture::Custom,
            input: (1, 8, 8),
            layers: vec![LayerSpec::Flatten, LayerSpec::Dense { units: 3 }],
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn arch_tags_round_trip() {
        for a in [Architecture::A, Architecture::B, Architecture::Custom] {
            assert_eq!(Architecture::from_tag(a.tag()), Some(a));
            assert_eq!(a.to_string().parse::<Architecture>().unwrap(), a);
        }
    }
}
