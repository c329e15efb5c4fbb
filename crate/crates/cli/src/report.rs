//! JSON and CSV emitters. Every float is written with 17 significant digits,
//! which round-trips `f64` exactly.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

/// Shortest exact form is not needed; a fixed 17-digit mantissa keeps output
/// byte-stable across serde_json versions.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

struct Sig17<F>(F);

macro_rules! delegate {
    ($($name:ident),*) => {$(
        fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.$name(w)
        }
    )*};
}

impl<F: Formatter> Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    delegate!(begin_array, end_array, end_array_value, begin_object, end_object, begin_object_value, end_object_value);
}

fn write_with<T: Serialize + ?Sized, F: Formatter>(value: &T, fmt: F) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(fmt));
    value.serialize(&mut ser).expect("report types serialize infallibly");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = write_with(value, PrettyFormatter::new());
    s.push('\n');
    s
}

pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> String {
    write_with(value, CompactFormatter)
}

/// Versioned envelope for every JSON report.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub format_version: u32,
    pub kind: &'a str,
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(flatten)]
    pub body: T,
}

pub struct Csv {
    out: String,
}

impl Csv {
    pub fn new(columns: &[String]) -> Self {
        let mut out = columns.join(",");
        out.push('\n');
        Self { out }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = to_json_line(&serde_json::json!({"a": 0.1, "b": [1.0, -2.5e-10], "n": 3}));
        assert_eq!(
            s,
            r#"{"a":1.0000000000000001e-1,"b":[1.0000000000000000e0,-2.5000000000000002e-10],"n":3}"#
        );
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64().unwrap().to_bits(), 0.1f64.to_bits());
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(to_json_line(&[f64::NAN, f64::INFINITY]), "[null,null]");
    }

    #[test]
    fn every_digit_pattern_round_trips() {
        for v in [1.0 / 3.0, std::f64::consts::PI, 1e-308, 5e-324, f64::MAX, -0.0, 123456789.0] {
            let back: f64 = fmt_f64(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["t".into(), "x".into()]);
        c.row(&[2.0, 0.5]);
        assert_eq!(c.finish(), "t,x\n2.0000000000000000e0,5.0000000000000000e-1\n");
    }
}
