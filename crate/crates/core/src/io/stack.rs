//! Plain-text multilayer stack files.
//!
//! One layer per line, incident side first. Header lines set the bounding
//! media; an optional `scale` header carries the center-thickness multiplier
//! of a coating design. `#` starts a comment.
//!
//! ```text
//! # quarter-wave pair
//! incident 1.0
//! substrate 1.5
//! scale 1.0
//! 2.30 0.0 81.52          # n_re n_im thickness_nm
//! 1.45 0.0 129.31
//! table 100.0 600:2.40:0.0 800:2.20:0.0   # tabulated index: thickness, then wavelength:n_re:n_im knots
//! ```

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tmm::{IndexModel, Layer, LayerStack};

/// A parsed stack file: the stack plus the optional design scale header.
#[derive(Debug, Clone, PartialEq)]
pub struct StackFile {
    pub stack: LayerStack,
    pub center_scale: Option<f64>,
}

fn format_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_string(),
        message: format!("line {line}: {}", message.into()),
    }
}

pub fn read_stack_str(text: &str, origin: &str) -> Result<StackFile> {
    let mut incident = None;
    let mut substrate = None;
    let mut scale = None;
    let mut layers = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let mut parts = line.split_whitespace();
        let first = parts.next().unwrap();
        match first {
            "incident" | "substrate" | "scale" => {
                let value: f64 = parts
                    .next()
                    .ok_or_else(|| format_err(origin, lineno, format!("{first} needs a value")))?
                    .parse()
                    .map_err(|_| format_err(origin, lineno, format!("bad {first} value")))?;
                if parts.next().is_some() {
                    return Err(format_err(origin, lineno, "trailing tokens"));
                }
                match first {
                    "incident" => incident = Some(value),
                    "substrate" => substrate = Some(value),
                    _ => scale = Some(value),
                }
            }
            "table" => {
                let thickness: f64 = parts
                    .next()
                    .ok_or_else(|| format_err(origin, lineno, "table needs a thickness"))?
                    .parse()
                    .map_err(|_| format_err(origin, lineno, "bad table thickness"))?;
                let mut points = Vec::new();
                for tok in parts {
                    let fields: Vec<&str> = tok.split(':').collect();
                    if fields.len() != 3 {
                        return Err(format_err(
                            origin,
                            lineno,
                            "table knots are wavelength:n_re:n_im",
                        ));
                    }
                    let w: f64 = fields[0]
                        .parse()
                        .map_err(|_| format_err(origin, lineno, "bad knot wavelength"))?;
                    let re: f64 = fields[1]
                        .parse()
                        .map_err(|_| format_err(origin, lineno, "bad knot n_re"))?;
                    let im: f64 = fields[2]
                        .parse()
                        .map_err(|_| format_err(origin, lineno, "bad knot n_im"))?;
                    points.push((w, Complex64::new(re, im)));
                }
                if points.len() < 2 {
                    return Err(format_err(origin, lineno, "table needs at least two knots"));
                }
                layers.push(Layer {
                    index: IndexModel::Table(points),
                    thickness_nm: thickness,
                });
            }
            _ => {
                let re: f64 = first
                    .parse()
                    .map_err(|_| format_err(origin, lineno, "bad layer n_re"))?;
                let im: f64 = parts
                    .next()
                    .ok_or_else(|| format_err(origin, lineno, "layer lines are n_re n_im t_nm"))?
                    .parse()
                    .map_err(|_| format_err(origin, lineno, "bad layer n_im"))?;
                let t: f64 = parts
                    .next()
                    .ok_or_else(|| format_err(origin, lineno, "layer lines are n_re n_im t_nm"))?
                    .parse()
                    .map_err(|_| format_err(origin, lineno, "bad layer thickness"))?;
                if parts.next().is_some() {
                    return Err(format_err(origin, lineno, "trailing tokens"));
                }
                layers.push(Layer::new(Complex64::new(re, im), t));
            }
        }
    }

    let incident = incident
        .ok_or_else(|| format_err(origin, 0, "missing 'incident' header"))?;
    let substrate = substrate
        .ok_or_else(|| format_err(origin, 0, "missing 'substrate' header"))?;
    let stack = LayerStack::new(incident, layers, substrate);
    stack.validate()?;
    Ok(StackFile {
        stack,
        center_scale: scale,
    })
}

pub fn read_stack_file(path: &Path) -> Result<StackFile> {
    let text = std::fs::read_to_string(path)?;
    read_stack_str(&text, &path.display().to_string())
}

pub fn write_stack_string(stack: &LayerStack, center_scale: Option<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "incident {}", stack.incident_index);
    let _ = writeln!(out, "substrate {}", stack.substrate_index);
    if let Some(s) = center_scale {
        let _ = writeln!(out, "scale {s}");
    }
    for layer in &stack.layers {
        match &layer.index {
            IndexModel::Constant(n) => {
                let _ = writeln!(out, "{} {} {}", n.re, n.im, layer.thickness_nm);
            }
            IndexModel::Table(points) => {
                let _ = write!(out, "table {}", layer.thickness_nm);
                for (w, n) in points {
                    let _ = write!(out, " {}:{}:{}", w, n.re, n.im);
                }
                let _ = writeln!(out);
            }
        }
    }
    out
}

pub fn write_stack_file(path: &Path, stack: &LayerStack, center_scale: Option<f64>) -> Result<()> {
    std::fs::write(path, write_stack_string(stack, center_scale))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tmm::quarter_wave_stack;

    #[test]
    fn round_trip_constant_layers() {
        let stack = quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 3, true).unwrap();
        let text = write_stack_string(&stack, Some(1.08));
        let parsed = read_stack_str(&text, "test").unwrap();
        assert_eq!(parsed.stack, stack);
        assert_eq!(parsed.center_scale, Some(1.08));
    }

    #[test]
    fn parses_comments_and_tables() {
        let text = "\
# design
incident 1.0   # air
substrate 1.5
2.3 0.0 81.5
table 100.0 600:2.4:0.0 800:2.2:0.0
";
        let parsed = read_stack_str(text, "test").unwrap();
        assert_eq!(parsed.stack.layers.len(), 2);
        assert!(parsed.center_scale.is_none());
        match &parsed.stack.layers[1].index {
            IndexModel::Table(points) => assert_eq!(points.len(), 2),
            _ => panic!("expected table"),
        }
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(read_stack_str("incident 1.0\nsubstrate 1.5\n2.3 0.0\n", "t").is_err());
        assert!(read_stack_str("substrate 1.5\n2.3 0.0 81.0\n", "t").is_err());
        assert!(read_stack_str("incident 1.0\nsubstrate 1.5\nfoo bar baz\n", "t").is_err());
        assert!(read_stack_str("incident 1.0\nsubstrate 1.5\ntable 100 600:2.4:0\n", "t").is_err());
    }
}
