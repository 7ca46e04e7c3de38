//! Run configuration: a flat `key = value` file, positional `key=value`
//! overrides, then explicit flags, in increasing precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use kantian_core::continuum::XiProfile;
use kantian_core::scenarios::{self, DEFAULT_GRID_N};

#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

type Result<T> = std::result::Result<T, UsageError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep {
            start: 0.0,
            stop: 1.0,
            step: 0.1,
        }
    }
}

impl Sweep {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return usage(format!("sweep '{s}' is not start:stop:step"));
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| UsageError(format!("bad number '{v}' in sweep")))
        };
        let sweep = Sweep {
            start: num(a)?,
            stop: num(b)?,
            step: num(c)?,
        };
        if !(sweep.step > 0.0) {
            return usage("sweep step must be positive");
        }
        if sweep.stop < sweep.start {
            return usage("sweep stop is below its start");
        }
        Ok(sweep)
    }

    /// Points `start + i step` up to `stop`, tolerating roundoff at the end.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let v = self.start + i as f64 * self.step;
                // snap to 12 significant digits so 0.1 * 3 prints as 0.3
                format!("{v:.12e}").parse().unwrap_or(v)
            })
            .collect()
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub svg: bool,
}

impl Formats {
    pub fn parse(s: &str) -> Result<Self> {
        let mut f = Formats {
            csv: false,
            svg: false,
        };
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match item {
                "csv" => f.csv = true,
                "svg" => f.svg = true,
                other => return usage(format!("unknown output format '{other}'")),
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub alphas: Vec<f64>,
    pub sweep: Option<Sweep>,
    pub grid_n: usize,
    pub beta: f64,
    pub xi: XiProfile,
    pub out: PathBuf,
    pub formats: Formats,
    pub seed: u64,
    pub tol: f64,
    /// Outer iteration cap of the iterative solvers.
    pub max_iter: usize,
    /// Sampled types for the continuum crosscheck.
    pub n_types: usize,
    /// Pairs drawn by the monotonicity probe.
    pub samples: usize,
}

/// Raw settings gathered from the config file, positional overrides and flags.
#[derive(Debug, Clone, Default)]
pub struct Settings(BTreeMap<String, String>);

fn canonical_key(key: &str) -> Result<&'static str> {
    Ok(match key {
        "scenario" => "scenario",
        "alpha" => "alpha",
        "sweep" => "sweep",
        "grid_n" | "grid-n" | "n" => "grid_n",
        "beta" => "beta",
        "xi" => "xi",
        "out" => "out",
        "format" => "format",
        "seed" => "seed",
        "tol" => "tol",
        "max_iter" | "max-iter" => "max_iter",
        "n_types" | "n-types" => "n_types",
        "samples" => "samples",
        other => return usage(format!("unknown setting '{other}'")),
    })
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.0.insert(
            canonical_key(key.trim())?.to_string(),
            value.trim().to_string(),
        );
        Ok(())
    }

    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        match pair.split_once('=') {
            Some((k, v)) => self.set(k, v),
            None => usage(format!("expected key=value, got '{pair}'")),
        }
    }

    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_pair(line)
                .map_err(|e| UsageError(format!("{}:{}: {e}", path.display(), no + 1)))?;
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| UsageError(format!("invalid value '{v}' for {key}"))),
        }
    }

    pub fn resolve(&self, default_formats: &str) -> Result<RunConfig> {
        let Some(scenario) = self.get("scenario") else {
            return usage("no scenario given (scenario=<name>)");
        };
        if scenarios::kind_of(scenario).is_err() {
            return usage(format!(
                "unknown scenario '{scenario}'; available: {}",
                scenarios::SCENARIO_NAMES.join(", ")
            ));
        }
        let alpha: Option<f64> = self.parse("alpha")?;
        let sweep = self.get("sweep").map(Sweep::parse).transpose()?;
        let alphas = match (alpha, sweep) {
            (Some(_), Some(_)) => return usage("give either alpha or sweep, not both"),
            (Some(a), None) => vec![a],
            (None, s) => s.unwrap_or_default().values(),
        };
        if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return usage(format!("alpha = {a} outside [0, 1]"));
        }
        let grid_n = self.parse("grid_n")?.unwrap_or(DEFAULT_GRID_N);
        if grid_n < 3 {
            return usage("grid_n must be at least 3");
        }
        let beta = self.parse("beta")?.unwrap_or(0.0);
        if f64::is_nan(beta) {
            return usage("beta must not be NaN");
        }
        let xi = match self.get("xi") {
            Some(id) => XiProfile::parse(id).map_err(|e| UsageError(e.to_string()))?,
            None => XiProfile::Constant,
        };
        let tol: f64 = self.parse("tol")?.unwrap_or(1e-10);
        if !(tol > 0.0) {
            return usage("tol must be positive");
        }
        let max_iter = self.parse("max_iter")?.unwrap_or(10_000);
        if max_iter == 0 {
            return usage("max_iter must be positive");
        }
        let n_types = self.parse("n_types")?.unwrap_or(51);
        if n_types < 2 {
            return usage("n_types must be at least 2");
        }
        Ok(RunConfig {
            scenario: scenario.to_string(),
            alphas,
            sweep: if alpha.is_some() {
                None
            } else {
                Some(sweep.unwrap_or_default())
            },
            grid_n,
            beta,
            xi,
            out: PathBuf::from(self.get("out").unwrap_or("out")),
            formats: Formats::parse(self.get("format").unwrap_or(default_formats))?,
            seed: self.parse("seed")?.unwrap_or(0),
            tol,
            max_iter,
            n_types,
            samples: self.parse("samples")?.unwrap_or(1000),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_values() {
        let v = Sweep::parse("0:1:0.05").unwrap().values();
        assert_eq!(v.len(), 21);
        assert_eq!(v[6], 0.3);
        assert_eq!(*v.last().unwrap(), 1.0);
        assert_eq!(Sweep::default().values().len(), 11);
        assert!(Sweep::parse("0:1:0").is_err());
        assert!(Sweep::parse("1:0:0.1").is_err());
        assert!(Sweep::parse("0:1").is_err());
    }

    #[test]
    fn precedence_and_aliases() {
        let mut s = Settings::default();
        s.set_pair("scenario=four_type").unwrap();
        s.set_pair("n = 101").unwrap();
        s.set("alpha", "0.5").unwrap();
        let c = s.resolve("csv").unwrap();
        assert_eq!(c.alphas, vec![0.5]);
        assert_eq!(c.grid_n, 101);
        assert!(c.sweep.is_none());
        assert!(c.formats.csv && !c.formats.svg);
    }

    #[test]
    fn rejects_bad_settings() {
        let mut s = Settings::default();
        assert!(s.set_pair("colour=red").is_err());
        assert!(s.resolve("csv").is_err());
        s.set_pair("scenario=nope").unwrap();
        assert!(s.resolve("csv").is_err());
        s.set_pair("scenario=four_type").unwrap();
        s.set_pair("alpha=0.5").unwrap();
        s.set_pair("sweep=0:1:0.5").unwrap();
        assert!(s.resolve("csv").is_err());
        assert!(Formats::parse("csv,png").is_err());
    }
}
