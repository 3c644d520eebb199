//! Canonical plain-text dataset format.
//!
//! A file is a sequence of records. Each record starts with a header line
//! `sample <label> <F>` followed by `F` frame lines of 93 whitespace-separated
//! decimal numbers: 31 joints times xyz, joints in canonical order. Blank lines
//! between records are ignored. Values are written with the shortest
//! representation that parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{Dataset, Frame, GaitSample};
use crate::skeleton::JOINT_COUNT;

pub const VALUES_PER_FRAME: usize = JOINT_COUNT * 3;

/// Which axis of the source data points up. Internally y is always vertical.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerticalAxis {
    X,
    #[default]
    Y,
    Z,
}

impl FromStr for VerticalAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(VerticalAxis::X),
            "y" | "Y" => Ok(VerticalAxis::Y),
            "z" | "Z" => Ok(VerticalAxis::Z),
            other => Err(Error::Parameter(format!("unknown vertical axis `{other}`"))),
        }
    }
}

impl VerticalAxis {
    /// Proper rotation taking this axis onto +y.
    fn to_y_up(self, [x, y, z]: [f64; 3]) -> [f64; 3] {
        match self {
            VerticalAxis::Y => [x, y, z],
            VerticalAxis::Z => [x, z, -y],
            VerticalAxis::X => [-y, x, z],
        }
    }
}

pub fn parse_dataset_str(text: &str) -> Result<Dataset> {
    parse_dataset_str_with(text, VerticalAxis::Y)
}

pub fn parse_dataset_str_with(text: &str, vertical: VerticalAxis) -> Result<Dataset> {
    let mut samples = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    while let Some((line_no, line)) = lines.next() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut head = line.split_whitespace();
        if head.next() != Some("sample") {
            return Err(Error::Parse {
                line: line_no,
                msg: "expected record header `sample <label> <F>`".into(),
            });
        }
        let (Some(label), Some(count), None) = (head.next(), head.next(), head.next()) else {
            return Err(Error::Parse {
                line: line_no,
                msg: "record header must be `sample <label> <F>`".into(),
            });
        };
        let frame_count: usize = count.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid frame count `{count}`"),
        })?;

        let mut frames = Vec::with_capacity(frame_count);
        for _ in 0..frame_count {
            let Some((fl, frame_line)) = lines.next() else {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("record declares {frame_count} frames but the file ended"),
                });
            };
            frames.push(parse_frame(fl, frame_line, vertical)?);
        }
        let sample = GaitSample::new(label, frames).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        samples.push(sample);
    }
    Dataset::new(samples)
}

fn parse_frame(line_no: usize, line: &str, vertical: VerticalAxis) -> Result<Frame> {
    let values = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid number `{tok}`"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != VALUES_PER_FRAME {
        return Err(Error::Schema {
            line: line_no,
            expected: VALUES_PER_FRAME,
            found: values.len(),
        });
    }
    let mut frame = [[0.0; 3]; JOINT_COUNT];
    for (j, joint) in frame.iter_mut().enumerate() {
        *joint = vertical.to_y_up([values[3 * j], values[3 * j + 1], values[3 * j + 2]]);
    }
    Ok(frame)
}

pub fn parse_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_dataset_with(path, VerticalAxis::Y)
}

pub fn parse_dataset_with(path: impl AsRef<Path>, vertical: VerticalAxis) -> Result<Dataset> {
    let text = fs::read_to_string(path.as_ref()).map_err(|e| Error::io_at(path.as_ref(), e))?;
    parse_dataset_str_with(&text, vertical)
}

pub fn write_sample(out: &mut String, sample: &GaitSample) {
    let _ = writeln!(out, "sample {} {}", sample.label(), sample.frame_count());
    for frame in sample.frames() {
        let mut first = true;
        for v in frame.iter().flatten() {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
}

pub fn dataset_to_string(dataset: &Dataset) -> String {
    let mut out = String::new();
    for s in dataset.samples() {
        write_sample(&mut out, s);
    }
    out
}

pub fn write_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    fs::write(path.as_ref(), dataset_to_string(dataset)).map_err(|e| Error::io_at(path.as_ref(), e))?;
    Ok(())
}

/// Content hash of the canonical serialization, used as a dataset id in reports.
pub fn dataset_id(dataset: &Dataset) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(dataset_to_string(dataset).as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
