//! Run configuration: a strict `key = value` text format with `#` comments.
//!
//! The parser is deliberately unforgiving — unknown keys, duplicate keys,
//! malformed numbers, and out-of-range values are all hard errors naming the
//! offending line and field, never silently defaulted. Config files are
//! untrusted input: every number is range-checked before anything downstream
//! allocates based on it.
//!
//! ```text
//! # verification run
//! n    = 2
//! grid = 64
//! m    = 2
//! k    = 1, 2, 3
//! eps  = 0.1, 0.05, 0.025
//! seed = 7
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::tol::mass_tol;

/// Largest grid side a config may request (the grid type enforces the total
/// node cap; this bound keeps single-axis requests sane too).
pub const MAX_GRID_SIDE: usize = 4096;

/// Largest complex dimension a config may request.
pub const MAX_DIM: usize = 6;

/// Cap on `k`/`eps` list lengths.
pub const MAX_LIST_LEN: usize = 64;

/// Parameters of one verification run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    /// Complex dimension.
    pub n: usize,
    /// Grid side N (the torus is sampled on N^(2n) nodes).
    pub grid: usize,
    /// Hessian degree.
    pub m: usize,
    /// Branch-weight exponents for the singular-mass suites.
    pub k_list: Vec<f64>,
    /// Regularization ladder, largest first.
    pub eps_list: Vec<f64>,
    /// Quadrature mask radius; `None` picks per-suite defaults.
    pub radius: Option<f64>,
    /// Seed for every randomized component.
    pub seed: u64,
    /// Mass-tolerance override; `None` derives it from the grid side.
    pub tol_mass: Option<f64>,
    /// Report output path (JSON; sibling CSV/SVG derive from it).
    pub out: Option<PathBuf>,
    /// Timestamped log path, kept apart so reports stay byte-deterministic.
    pub log: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            grid: 32,
            m: 2,
            k_list: vec![1.0, 2.0, 3.0],
            eps_list: vec![0.1, 0.05, 0.025],
            radius: None,
            seed: 0,
            tol_mass: None,
            out: None,
            log: None,
        }
    }
}

const KNOWN_KEYS: [&str; 10] =
    ["n", "grid", "m", "k", "eps", "radius", "seed", "tol-mass", "out", "log"];

fn field_err(line_no: usize, msg: impl Into<String>) -> LabError {
    LabError::Config(format!("line {line_no}: {}", msg.into()))
}

fn parse_u64(line_no: usize, key: &str, tok: &str) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| field_err(line_no, format!("key `{key}`: invalid integer `{tok}`")))
}

fn parse_usize(line_no: usize, key: &str, tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| field_err(line_no, format!("key `{key}`: invalid integer `{tok}`")))
}

fn parse_f64(line_no: usize, key: &str, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| field_err(line_no, format!("key `{key}`: invalid number `{tok}`")))?;
    if !v.is_finite() {
        return Err(field_err(line_no, format!("key `{key}`: non-finite number `{tok}`")));
    }
    Ok(v)
}

fn parse_list(line_no: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for tok in value.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            return Err(field_err(line_no, format!("key `{key}`: empty list entry")));
        }
        out.push(parse_f64(line_no, key, tok)?);
        if out.len() > MAX_LIST_LEN {
            return Err(field_err(
                line_no,
                format!("key `{key}`: more than {MAX_LIST_LEN} entries"),
            ));
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Parse and validate the text format. Empty input yields the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(field_err(line_no, format!("expected `key = value`, got `{line}`")));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(&canon) = KNOWN_KEYS.iter().find(|&&k| k == key) else {
                return Err(field_err(
                    line_no,
                    format!("unknown key `{key}` (expected one of {})", KNOWN_KEYS.join(", ")),
                ));
            };
            if seen.contains(&canon) {
                return Err(field_err(line_no, format!("duplicate key `{key}`")));
            }
            seen.push(canon);
            if value.is_empty() {
                return Err(field_err(line_no, format!("key `{key}`: empty value")));
            }
            match canon {
                "n" => cfg.n = parse_usize(line_no, key, value)?,
                "grid" => cfg.grid = parse_usize(line_no, key, value)?,
                "m" => cfg.m = parse_usize(line_no, key, value)?,
                "k" => cfg.k_list = parse_list(line_no, key, value)?,
                "eps" => cfg.eps_list = parse_list(line_no, key, value)?,
                "radius" => cfg.radius = Some(parse_f64(line_no, key, value)?),
                "seed" => cfg.seed = parse_u64(line_no, key, value)?,
                "tol-mass" => cfg.tol_mass = Some(parse_f64(line_no, key, value)?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "log" => cfg.log = Some(PathBuf::from(value)),
                _ => unreachable!(),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file and parse it.
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Field-level range validation. Called by [`Self::parse`]; call it again
    /// after mutating fields directly (the CLI does, for flag overrides).
    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, msg: String| LabError::Config(format!("field `{name}`: {msg}"));
        if self.n == 0 || self.n > MAX_DIM {
            return Err(field("n", format!("must lie in 1..={MAX_DIM}, got {}", self.n)));
        }
        if self.grid < crate::torus::MIN_SIDE || self.grid % 2 != 0 || self.grid > MAX_GRID_SIDE {
            return Err(field(
                "grid",
                format!(
                    "must be even, in {}..={MAX_GRID_SIDE}, got {}",
                    crate::torus::MIN_SIDE,
                    self.grid
                ),
            ));
        }
        if self.m == 0 || self.m > self.n {
            return Err(field("m", format!("must lie in 1..=n = {}, got {}", self.n, self.m)));
        }
        if self.k_list.is_empty() {
            return Err(field("k", "list must not be empty".into()));
        }
        for &k in &self.k_list {
            if !(k > 0.0) {
                return Err(field("k", format!("entries must be positive, got {k}")));
            }
        }
        if self.eps_list.is_empty() {
            return Err(field("eps", "list must not be empty".into()));
        }
        for &e in &self.eps_list {
            if !(e > 0.0) {
                return Err(field("eps", format!("entries must be positive, got {e}")));
            }
        }
        if let Some(r) = self.radius {
            let limit = crate::singular::RADIAL_DOMAIN_LIMIT;
            if !(r > 0.0 && r < limit) {
                return Err(field("radius", format!("must lie in (0, {limit}), got {r}")));
            }
        }
        if let Some(t) = self.tol_mass {
            if !(t > 0.0 && t.is_finite()) {
                return Err(field("tol-mass", format!("must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Effective mass tolerance: the override if set, else derived from the
    /// grid side.
    pub fn mass_tolerance(&self) -> f64 {
        self.tol_mass.unwrap_or_else(|| mass_tol(self.grid))
    }

    /// Serialize back to the text format; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "grid = {}", self.grid);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "k = {}", join_list(&self.k_list));
        let _ = writeln!(s, "eps = {}", join_list(&self.eps_list));
        if let Some(r) = self.radius {
            let _ = writeln!(s, "radius = {r}");
        }
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(t) = self.tol_mass {
            let _ = writeln!(s, "tol-mass = {t}");
        }
        if let Some(p) = &self.out {
            let _ = writeln!(s, "out = {}", p.display());
        }
        if let Some(p) = &self.log {
            let _ = writeln!(s, "log = {}", p.display());
        }
        s
    }
}

fn join_list(vs: &[f64]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_yields_the_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("\n  \n# only comments\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn defaults_round_trip_through_the_text_form() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);

        let full = RunConfig {
            n: 3,
            grid: 16,
            m: 2,
            k_list: vec![0.5, 2.0],
            eps_list: vec![0.2, 0.1, 0.05, 0.025],
            radius: Some(0.45),
            seed: 99,
            tol_mass: Some(5e-3),
            out: Some(PathBuf::from("reports/run.json")),
            log: Some(PathBuf::from("reports/run.log")),
        };
        full.validate().unwrap();
        assert_eq!(RunConfig::parse(&full.to_text()).unwrap(), full);
    }

    #[test]
    fn comments_and_spacing_are_tolerated() {
        let cfg = RunConfig::parse(
            "  n=2   # inline comment\n\n\tgrid =  64\nk = 1 ,2,  3.5 # trailing\n",
        )
        .unwrap();
        assert_eq!(cfg.grid, 64);
        assert_eq!(cfg.k_list, vec![1.0, 2.0, 3.5]);
    }

    #[test]
    fn unknown_and_duplicate_keys_are_named() {
        let err = RunConfig::parse("grod = 64\n").unwrap_err().to_string();
        assert!(err.contains("line 1") && err.contains("grod"), "{err}");
        let err = RunConfig::parse("m = 1\n# x\nm = 2\n").unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("duplicate"), "{err}");
    }

    #[test]
    fn malformed_lines_and_numbers_are_field_level_errors() {
        let err = RunConfig::parse("just words\n").unwrap_err().to_string();
        assert!(err.contains("key = value"), "{err}");
        let err = RunConfig::parse("grid = twelve\n").unwrap_err().to_string();
        assert!(err.contains("`grid`") && err.contains("twelve"), "{err}");
        let err = RunConfig::parse("eps = 0.1,,0.05\n").unwrap_err().to_string();
        assert!(err.contains("empty list entry"), "{err}");
        let err = RunConfig::parse("k = inf\n").unwrap_err().to_string();
        assert!(err.contains("non-finite"), "{err}");
        let err = RunConfig::parse("seed =\n").unwrap_err().to_string();
        assert!(err.contains("empty value"), "{err}");
    }

    #[test]
    fn range_validation_names_the_field() {
        for (text, field) in [
            ("n = 0", "`n`"),
            ("n = 9", "`n`"),
            ("grid = 6", "`grid`"),
            ("grid = 33", "`grid`"),
            ("grid = 8192", "`grid`"),
            ("m = 3", "`m`"), // default n = 2
            ("k = 0", "`k`"),
            ("eps = -0.1", "`eps`"),
            ("radius = 0.99", "`radius`"),
            ("tol-mass = 0", "`tol-mass`"),
        ] {
            let err = RunConfig::parse(text).unwrap_err().to_string();
            assert!(err.contains(field), "{text} -> {err}");
        }
    }

    #[test]
    fn mass_tolerance_prefers_the_override() {
        let mut cfg = RunConfig::default();
        cfg.grid = 64;
        assert_eq!(cfg.mass_tolerance(), mass_tol(64));
        cfg.tol_mass = Some(0.02);
        assert_eq!(cfg.mass_tolerance(), 0.02);
    }

    #[test]
    fn paths_may_contain_spaces_and_equals() {
        let cfg = RunConfig::parse("out = a dir/with = sign.json\n").unwrap();
        assert_eq!(cfg.out, Some(PathBuf::from("a dir/with = sign.json")));
    }
}
