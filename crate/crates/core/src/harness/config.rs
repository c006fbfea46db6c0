use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Parameters of one pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub m: i64,
    pub k: i64,
    pub level: u32,
    /// Stopping threshold on the per-step vertex displacement of the disc solver.
    pub tol_grad: f64,
    /// Largest accepted symmetry deviation of the disc and the surface.
    pub tol_sym: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub suite: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: 3,
            k: 2,
            level: 4,
            tol_grad: 1e-11,
            tol_sym: 1e-10,
            out: PathBuf::from("out"),
            seed: 0,
            suite: "all".into(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("cannot parse {key} = {value:?}")))
}

impl RunConfig {
    /// Sets one field from its textual form; keys may use `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        match key.trim().replace('-', "_").as_str() {
            "m" => self.m = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "level" => self.level = parse(key, value)?,
            "tol_grad" => self.tol_grad = parse(key, value)?,
            "tol_sym" => self.tol_sym = parse(key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            "seed" => self.seed = parse(key, value)?,
            "suite" => self.suite = value.trim().to_string(),
            other => return Err(HarnessError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn merge_str(&mut self, text: &str) -> Result<(), HarnessError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<RunConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let mut config = RunConfig::default();
        config.merge_str(&text)?;
        Ok(config)
    }

    pub fn to_kv_string(&self) -> String {
        format!(
            "m = {}\nk = {}\nlevel = {}\ntol_grad = {:e}\ntol_sym = {:e}\nout = {}\nseed = {}\nsuite = {}\n",
            self.m,
            self.k,
            self.level,
            self.tol_grad,
            self.tol_sym,
            self.out.display(),
            self.seed,
            self.suite
        )
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.m < 3 {
            return Err(HarnessError::Config(format!("m = {} but m ≥ 3 is required", self.m)));
        }
        if self.k < 2 {
            return Err(HarnessError::Config(format!("k = {} but k ≥ 2 is required", self.k)));
        }
        if self.level < 2 {
            return Err(HarnessError::Config(format!(
                "level = {} but level ≥ 2 is required",
                self.level
            )));
        }
        for (name, v) in [("tol_grad", self.tol_grad), ("tol_sym", self.tol_sym)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(HarnessError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_then_overrides() {
        let mut c = RunConfig::default();
        c.merge_str("# run\nm = 4\nk=3\n\ntol-grad = 1e-9\nseed = 17\n")
            .unwrap();
        assert_eq!((c.m, c.k, c.seed, c.tol_grad), (4, 3, 17, 1e-9));
        c.set("m", "5").unwrap();
        assert_eq!(c.m, 5);
    }

    #[test]
    fn round_trip_through_text() {
        let c = RunConfig {
            m: 4,
            k: 3,
            level: 3,
            tol_grad: 2.5e-10,
            tol_sym: 1e-9,
            out: PathBuf::from("target/x"),
            seed: 99,
            suite: "disc".into(),
        };
        let mut d = RunConfig::default();
        d.merge_str(&c.to_kv_string()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(c.merge_str("m 4").is_err());
        assert!(c.merge_str("colour = red").is_err());
        assert!(c.set("k", "two").is_err());
        c.k = 1;
        assert!(c.validate().is_err());
        c.k = 2;
        c.level = 1;
        assert!(c.validate().is_err());
        c.level = 2;
        c.m = 2;
        assert!(c.validate().is_err());
        c.m = 3;
        assert!(c.validate().is_ok());
        c.tol_sym = 0.0;
        assert!(c.validate().is_err());
    }
}
