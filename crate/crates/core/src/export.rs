//! Byte-stable text and image encodings shared by the map types.

/// Scientific notation with 17 significant digits.
pub fn csv_number(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// `clamp(round(255 min(1, value/reference)))`, with non-finite or negative
/// values mapped to 0.
pub fn intensity(value: f64, reference: f64) -> u8 {
    if !(value.is_finite() && reference > 0.0) || value <= 0.0 {
        return 0;
    }
    (255.0 * (value / reference).min(1.0)).round().clamp(0.0, 255.0) as u8
}

/// Binary PGM (P5, maxval 255). `pixels` is row-major, top row first.
pub fn pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height, "pixel count must be width * height");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Joins a header and rows into CSV text with LF line endings.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, -7.25e12] {
            assert_eq!(csv_number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(csv_number(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn intensity_clamps() {
        assert_eq!(intensity(2.0, 1.0), 255);
        assert_eq!(intensity(0.5, 1.0), 128);
        assert_eq!(intensity(-1.0, 1.0), 0);
        assert_eq!(intensity(f64::NAN, 1.0), 0);
    }

    #[test]
    fn pgm_header() {
        let p = pgm(2, 1, &[0, 255]);
        assert_eq!(&p[..11], b"P5\n2 1\n255\n");
        assert_eq!(p.len(), 13);
    }
}
