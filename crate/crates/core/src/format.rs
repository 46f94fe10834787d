//! Canonical text encoding for floating-point values. Every f64 is written
//! in scientific notation with 17 significant digits — enough to round-trip
//! the exact bit pattern — so serialized artifacts are byte-stable across
//! runs and machines.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::Result;

/// Render a float with 17 significant digits, e.g. `2.5000000000000000e-1`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON formatter that writes every float through [`format_f64`].
#[derive(Debug, Clone, Copy, Default)]
pub struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.8e}")
    }
}

/// Serialize to compact JSON with canonical float formatting. Equal values
/// always produce identical bytes; struct fields keep declaration order.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn formatting_round_trips_the_exact_bits() {
        let specials = [
            0.0,
            -0.0,
            1.0,
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            f64::MIN_POSITIVE,
            5e-324,
            f64::MAX,
            -f64::MAX,
            1e300,
            -2.5e-17,
        ];
        for &x in &specials {
            let back: f64 = format_f64(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "round trip changed {x}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let x = f64::from_bits(rng.gen::<u64>());
            if !x.is_finite() {
                continue;
            }
            let back: f64 = format_f64(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "round trip changed {x:e}");
        }
    }

    #[test]
    fn canonical_json_is_stable_and_explicit() {
        #[derive(Serialize)]
        struct Sample {
            x: f64,
            n: u32,
            v: Vec<f64>,
        }
        let s = Sample { x: 1.5, n: 7, v: vec![0.25, -0.0] };
        let text = canonical_json(&s).unwrap();
        assert_eq!(
            text,
            "{\"x\":1.5000000000000000e0,\"n\":7,\"v\":[2.5000000000000000e-1,-0.0000000000000000e0]}"
        );
        assert_eq!(text, canonical_json(&s).unwrap());
    }

    #[test]
    fn canonical_json_parses_back() {
        let values = vec![0.1, 2.0 / 3.0, -1e-12];
        let text = canonical_json(&values).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, values);
    }
}
