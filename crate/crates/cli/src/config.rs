//! Run configuration: flat `key = value` pairs under section headers, with
//! `GRAPHGEN_<SECTION>_<KEY>` environment overrides.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use graphgen::datagen::ParseMode;
use graphgen::metrics::EvalConfig;
use graphgen::model::TrainConfig;
use graphgen::InvariantSpec;
use ini::Ini;

pub const ENV_PREFIX: &str = "GRAPHGEN_";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub parse_mode: ParseMode,
    pub split: (f64, f64, f64),
    pub split_seed: u64,
    pub invariants: InvariantSpec,
    pub train: TrainConfig,
    pub gen_count: usize,
    pub gen_max_len: Option<usize>,
    pub eval: EvalConfig,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            parse_mode: ParseMode::Strict,
            split: (0.8, 0.1, 0.1),
            split_seed: 0,
            invariants: InvariantSpec { cc_decimals: 2, ..Default::default() },
            train: TrainConfig::desk(),
            gen_count: 2560,
            gen_max_len: None,
            eval: EvalConfig::default(),
            output: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(section: &str, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| anyhow::anyhow!("[{section}] {key} = {value:?}: {e}"))
}

fn parse_bool(section: &str, key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => bail!("[{section}] {key} = {value:?}: expected a boolean"),
    }
}

/// Every recognised `(section, key)` pair.
pub const KEYS: &[(&str, &str)] = &[
    ("data", "path"),
    ("data", "parse_mode"),
    ("data", "split"),
    ("data", "split_seed"),
    ("invariants", "degree"),
    ("invariants", "clustering"),
    ("invariants", "cc_decimals"),
    ("model", "profile"),
    ("model", "layers"),
    ("model", "hidden"),
    ("model", "embedding"),
    ("model", "mlp_hidden"),
    ("model", "dropout"),
    ("model", "lr"),
    ("model", "weight_decay"),
    ("model", "clip_norm"),
    ("model", "batch_size"),
    ("model", "epochs"),
    ("model", "patience"),
    ("model", "min_rel_improvement"),
    ("model", "seed"),
    ("generate", "count"),
    ("generate", "max_len"),
    ("metrics", "nspdk_radius"),
    ("metrics", "nspdk_distance"),
    ("metrics", "sigma"),
    ("metrics", "runs"),
    ("metrics", "batch_size"),
    ("metrics", "iso_budget"),
    ("output", "dir"),
];

impl RunConfig {
    pub fn set(&mut self, section: &str, key: &str, value: &str, base: &Path) -> Result<()> {
        let s = section;
        let t = &mut self.train;
        match (section, key) {
            ("data", "path") => self.dataset = Some(base.join(value.trim())),
            ("data", "parse_mode") => {
                self.parse_mode = match value.trim() {
                    "strict" => ParseMode::Strict,
                    "skip" | "skip_invalid" => ParseMode::SkipInvalid,
                    other => bail!("[data] parse_mode = {other:?}: expected strict or skip"),
                }
            }
            ("data", "split") => {
                let parts: Vec<f64> = value.split(',').map(|p| parse(s, key, p)).collect::<Result<_>>()?;
                let [a, b, c] = parts[..] else { bail!("[data] split needs three comma-separated ratios") };
                self.split = (a, b, c);
            }
            ("data", "split_seed") => self.split_seed = parse(s, key, value)?,
            ("invariants", "degree") => self.invariants.use_degree = parse_bool(s, key, value)?,
            ("invariants", "clustering") => self.invariants.use_clustering_coefficient = parse_bool(s, key, value)?,
            ("invariants", "cc_decimals") => self.invariants.cc_decimals = parse(s, key, value)?,
            ("model", "profile") => {
                let keep_seed = t.seed;
                *t = match value.trim() {
                    "desk" => TrainConfig::desk(),
                    "full" => TrainConfig::full(),
                    other => bail!("[model] profile = {other:?}: expected desk or full"),
                };
                t.seed = keep_seed;
            }
            ("model", "layers") => t.layers = parse(s, key, value)?,
            ("model", "hidden") => t.hidden = parse(s, key, value)?,
            ("model", "embedding") => t.embedding = parse(s, key, value)?,
            ("model", "mlp_hidden") => t.mlp_hidden = parse(s, key, value)?,
            ("model", "dropout") => t.dropout = parse(s, key, value)?,
            ("model", "lr") => t.optimizer.lr = parse(s, key, value)?,
            ("model", "weight_decay") => t.optimizer.weight_decay = parse(s, key, value)?,
            ("model", "clip_norm") => t.optimizer.clip_norm = parse(s, key, value)?,
            ("model", "batch_size") => t.batch_size = parse(s, key, value)?,
            ("model", "epochs") => t.epochs = parse(s, key, value)?,
            ("model", "patience") => t.patience = parse(s, key, value)?,
            ("model", "min_rel_improvement") => t.min_rel_improvement = parse(s, key, value)?,
            ("model", "seed") => t.seed = parse(s, key, value)?,
            ("generate", "count") => self.gen_count = parse(s, key, value)?,
            ("generate", "max_len") => {
                self.gen_max_len = Some(parse(s, key, value)?);
                t.max_len = self.gen_max_len;
            }
            ("metrics", "nspdk_radius") => self.eval.nspdk_radius = parse(s, key, value)?,
            ("metrics", "nspdk_distance") => self.eval.nspdk_distance = parse(s, key, value)?,
            ("metrics", "sigma") => self.eval.sigma = parse(s, key, value)?,
            ("metrics", "runs") => self.eval.runs = parse(s, key, value)?,
            ("metrics", "batch_size") => self.eval.batch_size = parse(s, key, value)?,
            ("metrics", "iso_budget") => self.eval.iso_budget = parse(s, key, value)?,
            ("output", "dir") => self.output = PathBuf::from(value.trim()),
            _ => bail!("unknown config key [{section}] {key}"),
        }
        Ok(())
    }

    /// Reads a config file. A relative dataset path resolves against the
    /// file's directory, the output directory against the working
    /// directory. `profile` is applied before the other model keys.
    pub fn from_file(path: &Path) -> Result<Self> {
        let ini = Ini::load_from_file(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = RunConfig::default();
        if let Some(p) = ini.section(Some("model")).and_then(|s| s.get("profile")) {
            cfg.set("model", "profile", p, base)?;
        }
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    bail!("config key {k:?} outside any section");
                }
                continue;
            };
            for (key, value) in props.iter() {
                if (section, key) != ("model", "profile") {
                    cfg.set(section, key, value, base)?;
                }
            }
        }
        Ok(cfg)
    }

    /// Applies `GRAPHGEN_<SECTION>_<KEY>` variables from `vars`.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<()> {
        let cwd = PathBuf::from(".");
        let mut found: Vec<(&str, &str, String)> = Vec::new();
        for (name, value) in vars {
            let Some(rest) = name.strip_prefix(ENV_PREFIX) else { continue };
            let rest = rest.to_ascii_lowercase();
            if let Some(&(s, k)) = KEYS.iter().find(|(s, k)| rest == format!("{s}_{k}")) {
                found.push((s, k, value));
            }
        }
        // profile first so explicit keys win regardless of variable order
        found.sort_by_key(|(s, k, _)| (*s, *k) != ("model", "profile"));
        for (s, k, v) in found {
            self.set(s, k, &v, &cwd)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_env() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ini");
        std::fs::write(
            &path,
            "[data]\npath = graphs.txt\nsplit = 0.6, 0.2, 0.2\n\n[model]\nhidden = 32\nprofile = full\n[invariants]\ndegree = true\n",
        )
        .unwrap();
        let mut cfg = RunConfig::from_file(&path).unwrap();
        assert_eq!(cfg.dataset, Some(dir.path().join("graphs.txt")));
        assert_eq!(cfg.split, (0.6, 0.2, 0.2));
        assert_eq!(cfg.train.layers, 4);
        assert_eq!(cfg.train.hidden, 32);
        assert!(cfg.invariants.use_degree);

        cfg.apply_env([("GRAPHGEN_MODEL_EPOCHS".to_string(), "7".to_string()), ("HOME".into(), "/".into())]).unwrap();
        assert_eq!(cfg.train.epochs, 7);
        assert!(cfg.apply_env([("GRAPHGEN_MODEL_LAYERS".to_string(), "x".to_string())]).is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ini");
        std::fs::write(&path, "[model]\nlayerz = 3\n").unwrap();
        let e = RunConfig::from_file(&path).unwrap_err();
        assert!(e.to_string().contains("layerz"));
    }
}
