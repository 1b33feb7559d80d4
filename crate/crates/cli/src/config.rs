//! Run configuration: defaults, a `key = value` file and command-line flags,
//! in increasing precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use gaborlab::hrt::{AffineLattice, Configuration};
use gaborlab::scan::Range;
use gaborlab::{SampleGrid, TFPoint, WindowSpec};

use crate::error::{CliError, CliResult};

/// Keys shared by every command.
pub const COMMON_KEYS: &[(&str, &str)] = &[
    ("len", "number of samples L (2^p 3^q)"),
    ("delta", "sample spacing"),
    ("window", "window spec, e.g. gaussian, bspline:2, indicator:1, sech@0.5"),
    ("out", "directory for CSV/PGM artifacts"),
    ("threads", "worker threads (default: all cores)"),
    ("cache", "use the result cache (true/false)"),
];

/// Keys that do not change the result and stay out of the cache key.
pub const NON_SEMANTIC_KEYS: &[&str] = &["out", "threads", "cache"];

/// Snap tolerance of the single-lattice commands; scans mark cells instead.
pub const DEFAULT_SNAP_TOLERANCE: &str = "0.05";

fn default_value(command: &str, key: &str) -> Option<&'static str> {
    Some(match key {
        "snap_tol" if command != "scan" => DEFAULT_SNAP_TOLERANCE,
        "len" => "1024",
        "delta" => "1/32",
        "window" => "gaussian",
        "out" => ".",
        "cache" => "true",
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Default,
    File { line: usize },
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Default => f.write_str("default"),
            Source::File { line } => write!(f, "config line {line}"),
            Source::Flag => f.write_str("flag"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub value: String,
    pub source: Source,
}

/// Parses a `key = value` file. Blank lines and `#` comments are skipped.
pub fn load_config(path: &Path) -> CliResult<BTreeMap<String, (String, usize)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, (String, usize)>> {
    let mut out: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let malformed = || CliError::validation("config", format!("line {line}: malformed entry {raw:?}, expected key = value"));
        let (k, v) = content.split_once('=').ok_or_else(malformed)?;
        let (k, v) = (k.trim(), v.trim());
        let key_ok = !k.is_empty() && k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-');
        if !key_ok || v.is_empty() || v.contains('=') {
            return Err(malformed());
        }
        let k = k.replace('-', "_");
        if let Some((prev, prev_line)) = out.get(&k) {
            if prev != v {
                return Err(CliError::validation(
                    "config",
                    format!("conflicting values for {k}: {prev:?} (line {prev_line}) and {v:?} (line {line})"),
                ));
            }
        }
        out.insert(k, (v.to_string(), line));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    settings: BTreeMap<String, Setting>,
}

impl RunConfig {
    /// Merges defaults, file entries and flags; keys outside `allowed` are errors.
    pub fn resolve(
        command: &str,
        allowed: &[&str],
        file: BTreeMap<String, (String, usize)>,
        flags: BTreeMap<String, String>,
    ) -> CliResult<Self> {
        let mut settings = BTreeMap::new();
        for key in allowed {
            if let Some(v) = default_value(command, key) {
                settings.insert(
                    key.to_string(),
                    Setting {
                        value: v.to_string(),
                        source: Source::Default,
                    },
                );
            }
        }
        for (k, (v, line)) in file {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::validation(
                    "config",
                    format!("line {line}: unknown key {k:?} for command {command}"),
                ));
            }
            settings.insert(
                k,
                Setting {
                    value: v,
                    source: Source::File { line },
                },
            );
        }
        for (k, v) in flags {
            if let Some(prev) = settings.get(&k) {
                if let Source::File { line } = prev.source {
                    log::info!("{k} = {v} from flag overrides {} from config line {line}", prev.value);
                }
            }
            settings.insert(
                k,
                Setting {
                    value: v,
                    source: Source::Flag,
                },
            );
        }
        for (k, s) in &settings {
            log::debug!("{k} = {} ({})", s.value, s.source);
        }
        Ok(RunConfig {
            command: command.to_string(),
            settings,
        })
    }

    pub fn setting(&self, key: &str) -> Option<&Setting> {
        self.settings.get(key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.settings.get(key).map(|s| s.value.as_str())
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.get(key)
            .ok_or_else(|| CliError::validation("missing_argument", format!("--{} is required", key.replace('_', "-"))))
    }

    /// Every resolved value, as given.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.settings.iter().map(|(k, s)| (k.clone(), s.value.clone())).collect()
    }

    /// Values that determine the result.
    pub fn semantic(&self) -> BTreeMap<String, String> {
        self.echo()
            .into_iter()
            .filter(|(k, _)| !NON_SEMANTIC_KEYS.contains(&k.as_str()))
            .collect()
    }

    fn invalid(&self, key: &str, what: &str) -> CliError {
        CliError::validation(
            "invalid_argument",
            format!("--{} = {:?}: {what}", key.replace('_', "-"), self.get(key).unwrap_or("")),
        )
    }

    pub fn number(&self, key: &str) -> CliResult<f64> {
        let v = self.require(key)?;
        parse_number(v).ok_or_else(|| self.invalid(key, "expected a number (p/q and sqrtN allowed)"))
    }

    pub fn number_or(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.get(key) {
            Some(_) => self.number(key),
            None => Ok(default),
        }
    }

    pub fn opt_number(&self, key: &str) -> CliResult<Option<f64>> {
        self.get(key).map(|_| self.number(key)).transpose()
    }

    pub fn count(&self, key: &str) -> CliResult<usize> {
        self.require(key)?.parse().map_err(|_| self.invalid(key, "expected a non-negative integer"))
    }

    pub fn count_or(&self, key: &str, default: usize) -> CliResult<usize> {
        match self.get(key) {
            Some(_) => self.count(key),
            None => Ok(default),
        }
    }

    pub fn flag(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(_) => Err(self.invalid(key, "expected true or false")),
        }
    }

    pub fn grid(&self) -> CliResult<SampleGrid> {
        let len = self.count("len")?;
        if !is_smooth_23(len) {
            return Err(self.invalid("len", "L must be a power of two times a power of three"));
        }
        let delta = self.number("delta")?;
        Ok(SampleGrid::new(len, delta)?)
    }

    pub fn window(&self) -> CliResult<WindowSpec> {
        self.window_at("window")
    }

    pub fn window_at(&self, key: &str) -> CliResult<WindowSpec> {
        let v = self.require(key)?;
        v.parse::<WindowSpec>().map_err(CliError::from)
    }

    pub fn range(&self, key: &str) -> CliResult<Range> {
        let v = self.require(key)?;
        let (lo, hi) = v.split_once("..").ok_or_else(|| self.invalid(key, "expected lo..hi"))?;
        match (parse_number(lo.trim()), parse_number(hi.trim())) {
            (Some(lo), Some(hi)) if hi > lo => Ok(Range { lo, hi }),
            _ => Err(self.invalid(key, "expected lo..hi with lo < hi")),
        }
    }

    pub fn points(&self, key: &str) -> CliResult<Configuration> {
        let v = self.require(key)?;
        let pts = parse_points(v).ok_or_else(|| self.invalid(key, "expected a;b pairs like \"0,0;0,1;1,0\""))?;
        Ok(Configuration::from_pairs(&pts)?)
    }

    /// `"a11,a12;a21,a22;z1,z2"` (rows of the matrix, then the offset).
    pub fn lattice(&self, key: &str) -> CliResult<Option<AffineLattice>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let pts = parse_points(v).filter(|p| p.len() == 2 || p.len() == 3);
        let pts = pts.ok_or_else(|| self.invalid(key, "expected \"a11,a12;a21,a22[;z1,z2]\""))?;
        let z = pts.get(2).copied().unwrap_or((0.0, 0.0));
        Ok(Some(AffineLattice {
            matrix: [[pts[0].0, pts[0].1], [pts[1].0, pts[1].1]],
            offset: TFPoint::new(z.0, z.1),
        }))
    }
}

fn is_smooth_23(mut n: usize) -> bool {
    if n == 0 {
        return false;
    }
    while n.is_multiple_of(2) {
        n /= 2;
    }
    while n.is_multiple_of(3) {
        n /= 3;
    }
    n == 1
}

/// Plain numbers, `p/q` and `sqrtN`, with an optional leading minus.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('-') {
        return parse_number(rest).map(|v| -v);
    }
    if let Some(rest) = s.strip_prefix("sqrt") {
        let inner = rest.trim_start_matches('(').trim_end_matches(')');
        return parse_number(inner).filter(|v| *v >= 0.0).map(f64::sqrt);
    }
    if let Some((p, q)) = s.split_once('/') {
        let (p, q) = (parse_number(p)?, parse_number(q)?);
        return (q != 0.0).then_some(p / q);
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_points(s: &str) -> Option<Vec<(f64, f64)>> {
    s.split(';')
        .map(|p| {
            let (a, b) = p.split_once(',')?;
            Some((parse_number(a)?, parse_number(b)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::resolve("framebounds", &["len", "delta", "window"], parse_config("").unwrap(), BTreeMap::new()).unwrap();
        let g = c.grid().unwrap();
        assert_eq!(g.len(), 1024);
        assert_eq!(g.delta(), 1.0 / 32.0);
    }

    #[test]
    fn flag_beats_file() {
        let file = parse_config("alpha = 1\n").unwrap();
        let flags = BTreeMap::from([("alpha".to_string(), "2".to_string())]);
        let c = RunConfig::resolve("framebounds", &["alpha"], file, flags).unwrap();
        assert_eq!(c.number("alpha").unwrap(), 2.0);
        assert_eq!(c.setting("alpha").unwrap().source, Source::Flag);
    }

    #[test]
    fn malformed_line_is_reported() {
        let e = parse_config("alpha==\n").unwrap_err();
        assert!(e.message.contains("line 1"), "{}", e.message);
        let e = parse_config("# c\nbeta = 1\nbeta = 2\n").unwrap_err();
        assert!(e.message.contains("line 2") && e.message.contains("line 3"));
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1/3"), Some(1.0 / 3.0));
        assert_eq!(parse_number("-sqrt2"), Some(-2f64.sqrt()));
        assert_eq!(parse_number("sqrt(3)"), Some(3f64.sqrt()));
        assert_eq!(parse_number("x"), None);
        assert_eq!(parse_points("0,0;sqrt2,sqrt3").unwrap()[1], (2f64.sqrt(), 3f64.sqrt()));
    }
}
