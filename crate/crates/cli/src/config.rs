//! Run configuration: line-oriented `key=value` files (repeated keys for
//! lists) merged with command-line overrides.

use std::path::{Path, PathBuf};

use graphanon::anonymize::Method;
use graphanon::{GraphError, Result};

pub const DEFAULT_K_GRID: [usize; 4] = [2, 4, 8, 16];
pub const DEFAULT_HUB_PCT: f64 = 12.0;
pub const DEFAULT_BRIDGE_PCT: f64 = 10.0;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub methods: Vec<Method>,
    pub k_grid: Vec<usize>,
    pub hub_pct: f64,
    pub bridge_pct: f64,
    pub seed: u64,
    pub weights: Option<PathBuf>,
    pub out: PathBuf,
    pub sample_size: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_grid.is_empty() {
            return Err(GraphError::Config("k grid is empty".into()));
        }
        for w in self.k_grid.windows(2) {
            if w[0] >= w[1] {
                return Err(GraphError::Config(format!(
                    "k grid must be strictly ascending, got {:?}",
                    self.k_grid
                )));
            }
        }
        if self.k_grid[0] < 2 {
            return Err(GraphError::Config(format!(
                "k values must be >= 2, got {}",
                self.k_grid[0]
            )));
        }
        for (name, pct) in [("hub_pct", self.hub_pct), ("bridge_pct", self.bridge_pct)] {
            if !(pct > 0.0 && pct < 100.0) {
                return Err(GraphError::Config(format!(
                    "{name} must be in (0, 100), got {pct}"
                )));
            }
        }
        if self.methods.is_empty() {
            return Err(GraphError::Config("no methods selected".into()));
        }
        Ok(())
    }

    /// Parse a `key=value` config file. Repeated `method` and `k` keys build
    /// the lists.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut cfg = RunConfig {
            dataset: PathBuf::new(),
            methods: Vec::new(),
            k_grid: Vec::new(),
            hub_pct: DEFAULT_HUB_PCT,
            bridge_pct: DEFAULT_BRIDGE_PCT,
            seed: DEFAULT_SEED,
            weights: None,
            out: PathBuf::from("out"),
            sample_size: graphanon::similarity::DEFAULT_SAMPLE_SIZE,
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| GraphError::Parse {
                line: idx + 1,
                msg: format!("expected key=value, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |msg: String| GraphError::Parse { line: idx + 1, msg };
            match key {
                "dataset" => cfg.dataset = PathBuf::from(value),
                "method" => cfg.methods.push(Method::parse(value)?),
                "k" => cfg.k_grid.push(
                    value
                        .parse()
                        .map_err(|e| bad(format!("bad k {value:?}: {e}")))?,
                ),
                "hub_pct" => {
                    cfg.hub_pct = value
                        .parse()
                        .map_err(|e| bad(format!("bad hub_pct {value:?}: {e}")))?
                }
                "bridge_pct" => {
                    cfg.bridge_pct = value
                        .parse()
                        .map_err(|e| bad(format!("bad bridge_pct {value:?}: {e}")))?
                }
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|e| bad(format!("bad seed {value:?}: {e}")))?
                }
                "weights" => cfg.weights = Some(PathBuf::from(value)),
                "out" => cfg.out = PathBuf::from(value),
                "sample_size" => {
                    cfg.sample_size = value
                        .parse()
                        .map_err(|e| bad(format!("bad sample_size {value:?}: {e}")))?
                }
                other => return Err(bad(format!("unknown config key {other:?}"))),
            }
        }
        if cfg.methods.is_empty() {
            cfg.methods = Method::ALL.to_vec();
        }
        if cfg.k_grid.is_empty() {
            cfg.k_grid = DEFAULT_K_GRID.to_vec();
        }
        Ok(cfg)
    }

    /// Self-describing snapshot written into every run directory; parseable
    /// by `from_file`.
    pub fn snapshot(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("dataset={}\n", self.dataset.display()));
        for m in &self.methods {
            s.push_str(&format!("method={m}\n"));
        }
        for k in &self.k_grid {
            s.push_str(&format!("k={k}\n"));
        }
        s.push_str(&format!("hub_pct={}\n", self.hub_pct));
        s.push_str(&format!("bridge_pct={}\n", self.bridge_pct));
        s.push_str(&format!("seed={}\n", self.seed));
        s.push_str(&format!("sample_size={}\n", self.sample_size));
        if let Some(w) = &self.weights {
            s.push_str(&format!("weights={}\n", w.display()));
        }
        s.push_str(&format!("out={}\n", self.out.display()));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_snapshot() {
        let cfg = RunConfig {
            dataset: PathBuf::from("g.txt"),
            methods: vec![Method::ClustG, Method::ModifRL2],
            k_grid: vec![2, 4],
            hub_pct: 12.0,
            bridge_pct: 10.0,
            seed: 7,
            weights: None,
            out: PathBuf::from("out"),
            sample_size: 50,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.txt");
        std::fs::write(&path, cfg.snapshot()).unwrap();
        let parsed = RunConfig::from_file(&path).unwrap();
        assert_eq!(parsed.snapshot(), cfg.snapshot());
        parsed.validate().unwrap();
    }

    #[test]
    fn rejects_descending_k() {
        let cfg = RunConfig {
            dataset: PathBuf::from("g.txt"),
            methods: vec![Method::ClustG],
            k_grid: vec![4, 2],
            hub_pct: 12.0,
            bridge_pct: 10.0,
            seed: 7,
            weights: None,
            out: PathBuf::from("out"),
            sample_size: 50,
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_bad_percentile_and_unknown_key() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.txt");
        std::fs::write(&path, "dataset=g.txt\nhub_pct=0\n").unwrap();
        let cfg = RunConfig::from_file(&path).unwrap();
        assert!(cfg.validate().is_err());
        std::fs::write(&path, "frobnicate=1\n").unwrap();
        assert!(RunConfig::from_file(&path).is_err());
    }
}
