//! Experiment configuration (JSON) and feasibility checks.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, isqrt};
use crate::curves::CurveFamily;
use crate::{Error, Result};

/// Largest height bound for the surjectivity census.
pub const MAX_CENSUS_X: u64 = 1_000;
/// Largest height bound for the good-reduction census.
pub const MAX_GOODRED_X: u64 = 20_000;
/// Largest witness prime for genus 1 traces.
pub const MAX_PCAP_GENUS1: u64 = 10_000;
/// Largest sieve level for class sieves.
pub const MAX_CLASS_SIEVE_Q: u64 = 10_000;

/// How the sieve level `Q` depends on `x`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QRule {
    /// `Q = ⌊√x⌋`.
    #[default]
    Sqrt,
    /// `Q = ⌊x^e⌋`.
    Power(f64),
    Fixed(u64),
}

impl QRule {
    pub fn level(&self, x: u64) -> u64 {
        match self {
            QRule::Sqrt => isqrt(x),
            QRule::Power(e) => (x as f64).powf(*e).floor() as u64,
            QRule::Fixed(q) => *q,
        }
    }
}

fn default_x() -> Vec<u64> {
    vec![20, 100]
}

fn default_l() -> Vec<u64> {
    vec![5, 7, 11, 13]
}

fn default_pcap() -> u64 {
    1_000
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_ffield_q() -> u64 {
    5
}

fn default_ffield_n() -> Vec<usize> {
    vec![1, 2, 3, 4]
}

fn default_ffield_l() -> u64 {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Family description file; the default genus 1 family when absent.
    #[serde(default)]
    pub family: Option<PathBuf>,
    #[serde(default = "default_x")]
    pub x: Vec<u64>,
    #[serde(default)]
    pub q_rule: QRule,
    #[serde(default = "default_l")]
    pub l: Vec<u64>,
    #[serde(default = "default_pcap")]
    pub p_cap: u64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    /// Frobenius cache; `<out_dir>/frobenius_cache.jsonl` when absent.
    #[serde(default)]
    pub cache: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    /// Shuffles the work queue only.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ffield_q")]
    pub ffield_q: u64,
    #[serde(default = "default_ffield_n")]
    pub ffield_n: Vec<usize>,
    #[serde(default = "default_ffield_l")]
    pub ffield_l: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn cache_path(&self) -> PathBuf {
        self.cache
            .clone()
            .unwrap_or_else(|| self.out_dir.join("frobenius_cache.jsonl"))
    }

    pub fn family(&self) -> Result<CurveFamily> {
        match &self.family {
            Some(p) => CurveFamily::load(p),
            None => Ok(CurveFamily::default_genus1()),
        }
    }

    /// Shape checks shared by every command.
    pub fn validate(&self) -> Result<()> {
        if self.x.is_empty() || self.x.contains(&0) {
            return Err(Error::Invalid("x values must be positive and nonempty".into()));
        }
        if self.x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("x values must be strictly increasing".into()));
        }
        if let Some(&l) = self.l.iter().find(|&&l| l < 3 || !is_prime(l)) {
            return Err(Error::Invalid(format!("l = {l} is not an odd prime")));
        }
        if self.l.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("l values must be strictly increasing".into()));
        }
        if let QRule::Power(e) = self.q_rule {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::Invalid(format!("Q exponent {e} outside (0, 1]")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Invalid("workers must be positive".into()));
        }
        Ok(())
    }

    /// Caps for the surjectivity census, checked before any work.
    pub fn check_census_caps(&self) -> Result<()> {
        self.validate()?;
        let x = *self.x.last().expect("validated");
        if x > MAX_CENSUS_X {
            return Err(Error::Infeasible(format!("census height {x} > {MAX_CENSUS_X}")));
        }
        if self.p_cap > MAX_PCAP_GENUS1 {
            return Err(Error::Infeasible(format!("prime cap {} > {MAX_PCAP_GENUS1}", self.p_cap)));
        }
        if self.l.is_empty() {
            return Err(Error::Invalid("no l values".into()));
        }
        if let Some(&l) = self.l.iter().find(|&&l| l >= self.p_cap) {
            return Err(Error::Infeasible(format!("l = {l} leaves no witness primes below the cap")));
        }
        Ok(())
    }

    pub fn check_goodred_caps(&self) -> Result<()> {
        self.validate()?;
        let x = *self.x.last().expect("validated");
        if x > MAX_GOODRED_X {
            return Err(Error::Infeasible(format!("good-reduction height {x} > {MAX_GOODRED_X}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_rules() {
        let c = ExperimentConfig::default();
        assert_eq!(c.x, vec![20, 100]);
        assert_eq!(c.l, vec![5, 7, 11, 13]);
        assert!(c.check_census_caps().is_ok());
        assert_eq!(QRule::Sqrt.level(1000), 31);
        assert_eq!(QRule::Fixed(30).level(7), 30);
        let r: QRule = serde_json::from_str(r#"{"power": 0.5}"#).unwrap();
        assert_eq!(r.level(10_000), 100);
    }

    #[test]
    fn bad_configs() {
        let mut c = ExperimentConfig::default();
        c.x = vec![100, 20];
        assert!(matches!(c.validate(), Err(Error::Invalid(_))));
        let mut c = ExperimentConfig::default();
        c.p_cap = 100_000;
        assert!(matches!(c.check_census_caps(), Err(Error::Infeasible(_))));
        let mut c = ExperimentConfig::default();
        c.l = vec![4];
        assert!(matches!(c.validate(), Err(Error::Invalid(_))));
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
