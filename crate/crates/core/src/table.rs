//! CSV rendering shared by the report writers.

use std::io::{self, Write};

/// Decimal rendering with 17 significant digits, enough to round-trip any
/// f64. Plain notation for moderate magnitudes, scientific otherwise.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..16).contains(&e) {
        format!("{:.*}", (16 - e) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_row<W: Write + ?Sized>(w: &mut W, fields: &[String]) -> io::Result<()> {
    writeln!(w, "{}", fields.join(","))
}
