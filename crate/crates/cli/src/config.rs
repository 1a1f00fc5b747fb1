//! Flat `key=value` run configuration.
//!
//! Every run writes its full configuration into the output header. Feeding
//! an output file back through `--config` reproduces the run.

use std::fmt::Write as _;

use starcount::{parse_count, Error, Result};

/// Prefix of configuration lines embedded in CSV output.
pub const CSV_CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub preset: Option<String>,
    /// A single size, or a comma-separated list for sweeps.
    pub n: Option<String>,
    pub p: Option<f64>,
    pub h: Option<String>,
    pub k: Option<usize>,
    pub q: Option<f64>,
    pub a: Option<usize>,
    pub b: Option<usize>,
    /// A number for presets, a grid for sweeps.
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub gamma: Option<String>,
    pub c: Option<f64>,
    pub l: Option<usize>,
    pub d: Option<usize>,
    pub stat: Option<String>,
    pub trials: Option<usize>,
    pub mc_trials: Option<usize>,
    pub mc_stat: Option<String>,
    pub seed: Option<u64>,
    pub work_limit: Option<u64>,
    pub c_edge: Option<f64>,
    pub eps_min: Option<f64>,
    pub tau: Option<f64>,
    pub check: Option<String>,
    pub s1: Option<String>,
    pub s2: Option<String>,
    pub shape: Option<String>,
    pub instances: Option<usize>,
    pub max_edges: Option<usize>,
    pub format: Option<String>,
}

fn bad(key: &str, value: &str) -> Error {
    Error::Parse(format!("config: `{key}={value}` has an invalid value"))
}

fn int(key: &str, v: &str) -> Result<usize> {
    parse_count(v).map(|x| x as usize).ok_or_else(|| bad(key, v))
}

fn real(key: &str, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|_| bad(key, v))
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig { command: command.to_string(), ..Default::default() }
    }

    /// `key=value` pairs in a fixed order; unset fields are omitted.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("command", self.command.clone())];
        macro_rules! emit {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field {
                    out.push((stringify!($field), v.to_string()));
                })*
            };
        }
        emit!(
            preset, n, p, h, k, q, a, b, alpha, beta, gamma, c, l, d, stat, trials, mc_trials, mc_stat, seed,
            work_limit, c_edge, eps_min, tau, check, s1, s2, shape, instances, max_edges, format
        );
        out
    }

    pub fn emit(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// Parses `key=value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("config: expected key=value, got `{line}`")))?;
            let (key, v) = (key.trim(), v.trim());
            let text = || Some(v.to_string());
            match key {
                "command" => cfg.command = v.to_string(),
                "preset" => cfg.preset = text(),
                "n" => cfg.n = text(),
                "p" => cfg.p = Some(real(key, v)?),
                "h" => cfg.h = text(),
                "k" => cfg.k = Some(int(key, v)?),
                "q" => cfg.q = Some(real(key, v)?),
                "a" => cfg.a = Some(int(key, v)?),
                "b" => cfg.b = Some(int(key, v)?),
                "alpha" => cfg.alpha = text(),
                "beta" => cfg.beta = text(),
                "gamma" => cfg.gamma = text(),
                "c" => cfg.c = Some(real(key, v)?),
                "l" => cfg.l = Some(int(key, v)?),
                "d" => cfg.d = Some(int(key, v)?),
                "stat" => cfg.stat = text(),
                "trials" => cfg.trials = Some(int(key, v)?),
                "mc_trials" => cfg.mc_trials = Some(int(key, v)?),
                "mc_stat" => cfg.mc_stat = text(),
                "seed" => cfg.seed = Some(parse_count(v).ok_or_else(|| bad(key, v))?),
                "work_limit" => cfg.work_limit = Some(parse_count(v).ok_or_else(|| bad(key, v))?),
                "c_edge" => cfg.c_edge = Some(real(key, v)?),
                "eps_min" => cfg.eps_min = Some(real(key, v)?),
                "tau" => cfg.tau = Some(real(key, v)?),
                "check" => cfg.check = text(),
                "s1" => cfg.s1 = text(),
                "s2" => cfg.s2 = text(),
                "shape" => cfg.shape = text(),
                "instances" => cfg.instances = Some(int(key, v)?),
                "max_edges" => cfg.max_edges = Some(int(key, v)?),
                "format" => cfg.format = text(),
                other => return Err(Error::Parse(format!("config: unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    /// Reads a configuration file, or the header of a previous output file
    /// (a structured report or a CSV with `# config:` lines).
    pub fn load(text: &str) -> Result<RunConfig> {
        if text.trim_start().starts_with('{') {
            let v: serde_json::Value =
                serde_json::from_str(text).map_err(|e| Error::Parse(format!("report header: {e}")))?;
            let lines = v["header"]["config"]
                .as_array()
                .ok_or_else(|| Error::Parse("report has no header.config list".into()))?;
            let joined: Vec<&str> = lines.iter().filter_map(|l| l.as_str()).collect();
            return RunConfig::parse(&joined.join("\n"));
        }
        if text.lines().any(|l| l.starts_with(CSV_CONFIG_PREFIX)) {
            let body: Vec<&str> = text.lines().filter_map(|l| l.strip_prefix(CSV_CONFIG_PREFIX)).collect();
            return RunConfig::parse(&body.join("\n"));
        }
        RunConfig::parse(text)
    }

    /// Fills every field that is set in `other`.
    pub fn overlay(&mut self, other: &RunConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() {
                    self.$field = other.$field.clone();
                })*
            };
        }
        take!(
            preset, n, p, h, k, q, a, b, alpha, beta, gamma, c, l, d, stat, trials, mc_trials, mc_stat, seed,
            work_limit, c_edge, eps_min, tau, check, s1, s2, shape, instances, max_edges, format
        );
        if !other.command.is_empty() {
            self.command = other.command.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            command: "simulate".into(),
            n: Some("400".into()),
            p: Some(0.1 + 0.2),
            h: Some("clique:80".into()),
            trials: Some(10_000),
            seed: Some(7),
            tau: Some(1e-300),
            ..Default::default()
        };
        assert_eq!(RunConfig::parse(&cfg.emit()).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::parse("colour=blue").is_err());
        assert!(RunConfig::parse("trials=many").is_err());
    }

    #[test]
    fn reads_csv_headers() {
        let text = "# starcount 0.1.0\n# config: command=shapes\n# config: max_edges=2\nkey,name\n";
        let cfg = RunConfig::load(text).unwrap();
        assert_eq!(cfg.max_edges, Some(2));
    }
}
