use std::collections::{BTreeMap, HashMap};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::str::FromStr;

use lingkod_core::qc::QcThresholds;
use lingkod_core::PlatformSettings;

use crate::error::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorMode {
    Off,
    Mock,
    Remote,
}

impl FromStr for DetectorMode {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" => Ok(DetectorMode::Off),
            "mock" => Ok(DetectorMode::Mock),
            "remote" => Ok(DetectorMode::Remote),
            other => Err(ServiceError::ConfigInvalid(format!("DETECTOR_MODE {other:?} is not off|mock|remote"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub host: IpAddr,
    pub port: u16,
    /// `None` keeps everything in memory and loses it on exit.
    pub data_dir: Option<PathBuf>,
    pub detector_mode: DetectorMode,
    pub detector_url: Option<String>,
    pub detector_key: Option<String>,
    /// Texts flagged as AI-generated in mock mode.
    pub detector_mock_table: BTreeMap<String, bool>,
    pub settings: PlatformSettings,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            data_dir: None,
            detector_mode: DetectorMode::Off,
            detector_url: None,
            detector_key: None,
            detector_mock_table: BTreeMap::new(),
            settings: PlatformSettings::default(),
        }
    }
}

fn parse<T: FromStr>(vars: &HashMap<String, String>, key: &str) -> Result<Option<T>, ServiceError> {
    match vars.get(key).map(|v| v.trim()).filter(|v| !v.is_empty()) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| ServiceError::ConfigInvalid(format!("{key}={raw:?} is not valid"))),
    }
}

impl ServiceConfig {
    /// In-memory configuration on an ephemeral port, for tests and demos.
    pub fn ephemeral() -> Self {
        Self { port: 0, ..Self::default() }
    }

    pub fn from_env() -> Result<Self, ServiceError> {
        Self::from_env_map(&std::env::vars().collect())
    }

    /// Reads `HOST`, `PORT`, `DATA_DIR`, `DETECTOR_MODE`, `DETECTOR_URL`,
    /// `DETECTOR_KEY`, `DETECTOR_MOCK_TABLE`, `QC_RATIO`, `REPEAT_RATIO`,
    /// `SESSION_GAP_MIN`, `QC_MIN_PAIRS`, `QC_DELTA`, `QC_MIN_FRAC_ORDERED`
    /// and `QC_MAX_REPEAT_MAD`. Unset variables keep their defaults.
    pub fn from_env_map(vars: &HashMap<String, String>) -> Result<Self, ServiceError> {
        let d = Self::default();
        let t = QcThresholds::default();
        let s = PlatformSettings::default();
        let mock_table = match vars.get("DETECTOR_MOCK_TABLE").filter(|v| !v.trim().is_empty()) {
            None => BTreeMap::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ServiceError::ConfigInvalid(format!("DETECTOR_MOCK_TABLE: {e}")))?;
                serde_json::from_str(&text)
                    .map_err(|e| ServiceError::ConfigInvalid(format!("DETECTOR_MOCK_TABLE: {e}")))?
            }
        };
        let config = Self {
            host: parse(vars, "HOST")?.unwrap_or(d.host),
            port: parse(vars, "PORT")?.unwrap_or(d.port),
            data_dir: parse::<PathBuf>(vars, "DATA_DIR")?,
            detector_mode: parse(vars, "DETECTOR_MODE")?.unwrap_or(d.detector_mode),
            detector_url: parse(vars, "DETECTOR_URL")?,
            detector_key: parse(vars, "DETECTOR_KEY")?,
            detector_mock_table: mock_table,
            settings: PlatformSettings {
                qc_ratio: parse(vars, "QC_RATIO")?.unwrap_or(s.qc_ratio),
                repeat_ratio: parse(vars, "REPEAT_RATIO")?.unwrap_or(s.repeat_ratio),
                session_gap_minutes: parse(vars, "SESSION_GAP_MIN")?.unwrap_or(s.session_gap_minutes),
                thresholds: QcThresholds {
                    min_qc_pairs: parse(vars, "QC_MIN_PAIRS")?.unwrap_or(t.min_qc_pairs),
                    delta: parse(vars, "QC_DELTA")?.unwrap_or(t.delta),
                    min_frac_ordered: parse(vars, "QC_MIN_FRAC_ORDERED")?.unwrap_or(t.min_frac_ordered),
                    max_repeat_mad: parse(vars, "QC_MAX_REPEAT_MAD")?.unwrap_or(t.max_repeat_mad),
                },
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        self.settings.validate().map_err(ServiceError::ConfigInvalid)?;
        let t = &self.settings.thresholds;
        if !(0.0..=1.0).contains(&t.min_frac_ordered) || t.delta < 0.0 || t.max_repeat_mad < 0.0 {
            return Err(ServiceError::ConfigInvalid("qc thresholds out of range".into()));
        }
        if self.detector_mode == DetectorMode::Remote && self.detector_url.is_none() {
            return Err(ServiceError::ConfigInvalid("DETECTOR_MODE=remote requires DETECTOR_URL".into()));
        }
        Ok(())
    }

    pub fn bind_addr(&self) -> SocketAddr {
        SocketAddr::new(self.host, self.port)
    }
}
