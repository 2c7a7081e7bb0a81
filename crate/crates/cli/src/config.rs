//! Optional TOML file supplying defaults for command-line flags.

use std::path::{Path, PathBuf};

use actin_core::ClassifierParams;
use serde::Deserialize;

/// Every field is optional; a flag given on the command line wins.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub tau: Option<usize>,
    pub init: Option<String>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub source: Option<String>,
    pub fold: Option<String>,
    pub loc_n: Option<usize>,
    pub loc_tau: Option<usize>,
    pub cutoff: Option<f64>,
    pub classifier: Option<ClassifierParams>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file() {
        let c: FileConfig = toml::from_str("tau = 500\n[classifier]\nmax_excited = 20\n").unwrap();
        assert_eq!(c.tau, Some(500));
        assert_eq!(c.n, None);
        let p = c.classifier.unwrap();
        assert_eq!(p.max_excited, 20);
        assert_eq!(p.stationary_span, ClassifierParams::default().stationary_span);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("tua = 5").is_err());
    }
}
