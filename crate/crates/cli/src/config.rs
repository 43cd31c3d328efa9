use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use dynprice::Rat;
use serde::Deserialize;

pub const CONFIG_ENV: &str = "DYNPRICE_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Table,
}

/// Defaults for every command. Read from the JSON file named by `--config`
/// or `DYNPRICE_CONFIG`; command-line flags win.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub branch_cap: u64,
    pub seed: u64,
    pub output_format: Format,
    pub scenario_epsilon: Rat,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            branch_cap: dynprice::simulator::DEFAULT_BRANCH_CAP,
            seed: 0,
            output_format: Format::Json,
            scenario_epsilon: Rat::new(1, 100),
        }
    }
}

impl Config {
    pub fn load(explicit: Option<&Path>) -> Result<Config> {
        let path = match explicit {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV).map(Into::into),
        };
        let cfg = match path {
            None => Config::default(),
            Some(p) => {
                let text = std::fs::read_to_string(&p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.branch_cap == 0 {
            bail!("branch_cap must be positive");
        }
        if !self.scenario_epsilon.is_positive() {
            bail!("scenario_epsilon must be positive");
        }
        Ok(())
    }
}
