//! Campaign configuration files (TOML key-value).

use std::path::PathBuf;
use std::str::FromStr;

use beamquant_core::linksim::{LinkConfig, Receiver};
use beamquant_core::modulation::Modulation;
use beamquant_core::{Error, SchemeId};
use serde::Deserialize;

/// On-disk campaign description; validated against the link invariants
/// before any computation runs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub name: String,
    pub n_t: usize,
    pub n_r: usize,
    pub k: usize,
    pub modulations: Vec<String>,
    pub snr_db: Vec<f64>,
    pub schemes: Vec<String>,
    pub trials: usize,
    pub receiver: String,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad campaign config: {e}")))
    }

    pub fn to_link_config(&self) -> Result<LinkConfig, Error> {
        let modulations = self
            .modulations
            .iter()
            .map(|m| Modulation::from_str(m))
            .collect::<Result<Vec<_>, _>>()?;
        let schemes = self
            .schemes
            .iter()
            .map(|s| SchemeId::from_str(s))
            .collect::<Result<Vec<_>, _>>()?;
        let config = LinkConfig {
            n_t: self.n_t,
            n_r: self.n_r,
            k: self.k,
            modulations,
            snr_db: self.snr_db.clone(),
            schemes,
            trials: self.trials,
            receiver: Receiver::from_str(&self.receiver)?,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}
