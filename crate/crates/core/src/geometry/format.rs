//! Plain-text contour format, one primitive per line:
//!
//! ```text
//! # comment
//! name volute
//! closed true
//! arc <cx> <cy> <radius> <start_deg> <sweep_deg>
//! line <x0> <y0> <x1> <y1>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{Contour, Segment, Vec2};
use crate::error::{Error, Result};

impl Contour {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "name {}", self.name()).unwrap();
        writeln!(out, "closed {}", self.is_closed()).unwrap();
        for seg in self.segments() {
            match *seg {
                Segment::Line { start, end } => {
                    writeln!(out, "line {} {} {} {}", start.x, start.y, end.x, end.y).unwrap()
                }
                Segment::Arc {
                    center,
                    radius,
                    start_deg,
                    sweep_deg,
                } => writeln!(
                    out,
                    "arc {} {} {} {} {}",
                    center.x, center.y, radius, start_deg, sweep_deg
                )
                .unwrap(),
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Contour> {
        let mut name = String::from("contour");
        let mut closed = true;
        let mut segments = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut parts = content.split_whitespace();
            let kind = parts.next().unwrap();
            let rest: Vec<&str> = parts.collect();
            let nums = |n: usize| -> Result<Vec<f64>> {
                if rest.len() != n {
                    return Err(Error::Parse {
                        line,
                        message: format!("'{kind}' expects {n} values, got {}", rest.len()),
                    });
                }
                rest.iter()
                    .map(|s| {
                        s.parse::<f64>().map_err(|e| Error::Parse {
                            line,
                            message: format!("bad number '{s}': {e}"),
                        })
                    })
                    .collect()
            };
            match kind {
                "name" => name = rest.join(" "),
                "closed" => {
                    closed = match rest.as_slice() {
                        ["true"] => true,
                        ["false"] => false,
                        _ => {
                            return Err(Error::Parse {
                                line,
                                message: "closed expects true|false".into(),
                            })
                        }
                    }
                }
                "line" => {
                    let v = nums(4)?;
                    segments.push(Segment::line(Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3])));
                }
                "arc" => {
                    let v = nums(5)?;
                    segments.push(Segment::arc(Vec2::new(v[0], v[1]), v[2], v[3], v[4]));
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown primitive '{other}'"),
                    })
                }
            }
        }
        Contour::new(name, segments, closed)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Contour> {
        Contour::from_text(&std::fs::read_to_string(path)?)
    }
}
