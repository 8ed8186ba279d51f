//! Serialization shared by every subcommand: the JSON envelope, CSV tables
//! and lossless 17-significant-digit float formatting.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::verify::ResidualReport;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Serialize)]
pub struct OutputEnvelope<I: Serialize, R: Serialize> {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub inputs: I,
    pub results: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<ResidualReport>,
}

impl<I: Serialize, R: Serialize> OutputEnvelope<I, R> {
    pub fn new(command: &'static str, inputs: I, results: R) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            inputs,
            results,
            residuals: None,
        }
    }

    pub fn with_residuals(mut self, report: ResidualReport) -> Self {
        self.residuals = Some(report);
        self
    }
}

/// Formats a finite double with 17 significant digits, which round-trips
/// exactly. Trailing zeros are dropped; plain notation is used for exponents
/// in `-5..17`.
pub fn sig17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };

    if (-5..17).contains(&exp) {
        let n = digits.len() as i32;
        let body = if exp < 0 {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        } else if exp + 1 >= n {
            format!("{}{}", digits, "0".repeat((exp + 1 - n) as usize))
        } else {
            let (int, frac) = digits.split_at((exp + 1) as usize);
            format!("{int}.{frac}")
        };
        format!("{sign}{body}")
    } else {
        let (first, rest) = digits.split_at(1);
        if rest.is_empty() {
            format!("{sign}{first}e{exp}")
        } else {
            format!("{sign}{first}.{rest}e{exp}")
        }
    }
}

/// JSON float form: [`sig17`], kept visibly floating-point.
fn json_float(v: f64) -> String {
    let s = sig17(v);
    if s.contains(['.', 'e']) {
        s
    } else {
        format!("{s}.0")
    }
}

#[derive(Debug, Default)]
struct Sig17Formatter {
    indent: usize,
    has_value: bool,
}

impl Sig17Formatter {
    fn newline<W: ?Sized + io::Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.indent {
            w.write_all(b"  ")?;
        }
        Ok(())
    }
}

// Pretty printing as in `serde_json::ser::PrettyFormatter`, with floats
// routed through `json_float`.
impl Formatter for Sig17Formatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(json_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        w.write_all(b"[")
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(w)?;
        }
        w.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.newline(w)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, _w: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        w.write_all(b"{")
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(w)?;
        }
        w.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.newline(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, _w: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

/// Pretty-printed JSON with 17-significant-digit floats and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// A CSV cell.
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Float(f64),
    Flag(bool),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Float(v) => sig17(v),
            Cell::Flag(b) => if b { "1" } else { "0" }.into(),
        }
    }
}

pub fn to_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.into_iter().map(Cell::render).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig17_examples() {
        assert_eq!(sig17(0.0), "0");
        assert_eq!(sig17(1.0), "1");
        assert_eq!(sig17(-2.5), "-2.5");
        assert_eq!(sig17(100.0), "100");
        assert_eq!(sig17(0.1), "0.10000000000000001");
        assert_eq!(sig17(3.747142166640987), "3.747142166640987");
        assert_eq!(sig17(1e-7), "9.9999999999999995e-8");
        assert_eq!(sig17(1e20), "1e20");
        assert_eq!(sig17(0.00012), "0.00012");
        assert_eq!(json_float(2.0), "2.0");
    }

    proptest! {
        #[test]
        fn sig17_round_trips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(sig17(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn json_uses_sig17() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
            c: Option<f64>,
        }
        let text = to_json(&S {
            a: 0.1,
            b: vec![1.0, f64::NAN],
            c: None,
        })
        .unwrap();
        assert_eq!(
            text,
            "{\n  \"a\": 0.10000000000000001,\n  \"b\": [\n    1.0,\n    null\n  ],\n  \"c\": null\n}\n"
        );
    }

    #[test]
    fn csv_layout() {
        let text = to_csv(
            &["r4", "m3", "physical"],
            [vec![Cell::Float(0.5), Cell::Float(2.0), Cell::Flag(true)]],
        );
        assert_eq!(text, "r4,m3,physical\n0.5,2,1\n");
    }
}
