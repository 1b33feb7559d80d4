//! Known regions of the frame set of the hat function `g_2(x) = max(1 - |x|, 0)`.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    /// Fails `alpha beta < 1` or `alpha < 2`.
    NotFrameDensity,
    /// On a line `beta = 2, 3, ...` with `alpha beta < 1`.
    NotFrameRedLine,
    /// `alpha < 2`, `beta <= 1/2`: modulations see the full support.
    Painless,
    RegionB,
    RegionC,
    RegionD,
    RegionE,
    RegionF,
    RegionG,
    Unknown,
}

/// What a label says about the frame property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameClass {
    Frame,
    NotFrame,
    Unknown,
}

impl RegionLabel {
    pub fn class(&self) -> FrameClass {
        match self {
            RegionLabel::NotFrameDensity | RegionLabel::NotFrameRedLine => FrameClass::NotFrame,
            RegionLabel::Unknown => FrameClass::Unknown,
            _ => FrameClass::Frame,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::NotFrameDensity => "not_frame_density",
            RegionLabel::NotFrameRedLine => "not_frame_red_line",
            RegionLabel::Painless => "painless",
            RegionLabel::RegionB => "region_b",
            RegionLabel::RegionC => "region_c",
            RegionLabel::RegionD => "region_d",
            RegionLabel::RegionE => "region_e",
            RegionLabel::RegionF => "region_f",
            RegionLabel::RegionG => "region_g",
            RegionLabel::Unknown => "unknown",
        }
    }

    /// Block size of the compact dual system for the regions that come with one.
    pub fn dual_block_size(&self) -> Option<usize> {
        match self {
            RegionLabel::RegionC => Some(1),
            RegionLabel::RegionD => Some(2),
            RegionLabel::RegionE | RegionLabel::RegionF => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn red_line(beta: f64) -> bool {
    let r = beta.round();
    r >= 2.0 && (beta - r).abs() <= 1e-12 * r
}

fn in_b(alpha: f64, beta: f64) -> bool {
    (1.0..2.0).contains(&alpha) && beta < 1.0 / alpha
}

fn in_painless(alpha: f64, beta: f64) -> bool {
    alpha < 2.0 && beta <= 0.5
}

fn in_c(alpha: f64, beta: f64) -> bool {
    alpha < 2.0 && beta <= 2.0 / (2.0 + alpha)
}

fn in_d(alpha: f64, beta: f64) -> bool {
    alpha < 2.0 && beta > 2.0 / (2.0 + alpha) && beta <= 4.0 / (2.0 + 3.0 * alpha)
}

fn in_e(alpha: f64, beta: f64) -> bool {
    alpha < 0.5 && beta > 4.0 / (2.0 + 3.0 * alpha) && beta <= 2.0 / (1.0 + alpha)
}

fn in_f(alpha: f64, beta: f64) -> bool {
    (0.5..=0.8).contains(&alpha) && beta > 4.0 / (2.0 + 3.0 * alpha) && beta <= 6.0 / (2.0 + 5.0 * alpha) && beta > 1.0
}

fn in_g(alpha: f64, beta: f64) -> bool {
    (2.0 / 3.0..=1.0).contains(&alpha) && beta > 4.0 / (2.0 + 3.0 * alpha) && beta < 1.0
}

type RegionTest = (fn(f64, f64) -> bool, RegionLabel);

/// Frame regions in classification order.
const REGION_TESTS: [RegionTest; 7] = [
    (in_b, RegionLabel::RegionB),
    (in_painless, RegionLabel::Painless),
    (in_c, RegionLabel::RegionC),
    (in_d, RegionLabel::RegionD),
    (in_e, RegionLabel::RegionE),
    (in_f, RegionLabel::RegionF),
    (in_g, RegionLabel::RegionG),
];

/// Classifies `(alpha, beta)` for `g_2`, testing in order: density, red
/// lines, (b), painless, (c), (d), (e), (f), (g). Points covered by none of
/// the known statements are `Unknown`.
pub fn classify_point_g2(alpha: f64, beta: f64) -> RegionLabel {
    if !(alpha * beta < 1.0 && alpha < 2.0) {
        return RegionLabel::NotFrameDensity;
    }
    if red_line(beta) {
        return RegionLabel::NotFrameRedLine;
    }
    REGION_TESTS
        .iter()
        .find(|(t, _)| t(alpha, beta))
        .map(|(_, l)| *l)
        .unwrap_or(RegionLabel::Unknown)
}

/// Every frame region whose hypotheses hold at `(alpha, beta)` (regions overlap).
pub fn regions_g2(alpha: f64, beta: f64) -> Vec<RegionLabel> {
    let first = classify_point_g2(alpha, beta);
    if first.class() != FrameClass::Frame {
        return vec![first];
    }
    REGION_TESTS.iter().filter(|(t, _)| t(alpha, beta)).map(|(_, l)| *l).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(classify_point_g2(1.5, 0.5), RegionLabel::RegionB);
        assert_eq!(classify_point_g2(0.4, 2.0), RegionLabel::NotFrameRedLine);
        assert_eq!(classify_point_g2(1.0, 1.5), RegionLabel::NotFrameDensity);
        assert_eq!(classify_point_g2(2.0, 0.1), RegionLabel::NotFrameDensity);
        assert_eq!(classify_point_g2(0.5, 0.4), RegionLabel::Painless);
        assert_eq!(classify_point_g2(0.8, 0.6), RegionLabel::RegionC);
        assert_eq!(classify_point_g2(0.8, 0.8), RegionLabel::RegionD);
        assert_eq!(classify_point_g2(0.4, 1.4), RegionLabel::RegionE);
        assert_eq!(classify_point_g2(0.7, 1.05), RegionLabel::RegionF);
        assert_eq!(classify_point_g2(0.9, 0.95), RegionLabel::RegionG);
    }

    #[test]
    fn point_outside_e() {
        // 1.5 > 2 / 1.4, past the upper edge of (e).
        assert_eq!(classify_point_g2(0.4, 1.5), RegionLabel::Unknown);
    }

    #[test]
    fn open_region_is_unknown() {
        // 1/2 <= alpha < 1, 6/(2+5 alpha) <= beta < 2/(1+alpha), beta > 1.
        assert_eq!(classify_point_g2(0.6, 1.22), RegionLabel::Unknown);
    }

    #[test]
    fn boundaries_follow_printed_inequalities() {
        // beta = 2/(2+alpha) belongs to (c), not (d).
        assert_eq!(classify_point_g2(0.5, 2.0 / 2.5), RegionLabel::RegionC);
        // beta = 1 is excluded from (g) and, for alpha = 0.8, lies on the edge
        // 4/(2+3 alpha) = 0.909.. < 1 <= 6/(2+5 alpha) = 1 but (f) needs beta > 1.
        assert_eq!(classify_point_g2(0.8, 1.0), RegionLabel::Unknown);
    }

    #[test]
    fn overlapping_regions() {
        let r = regions_g2(1.2, 0.4);
        assert!(r.contains(&RegionLabel::RegionB));
        assert!(r.contains(&RegionLabel::Painless));
        assert!(r.contains(&RegionLabel::RegionC));
    }
}
