//! Scenario parameters, presets and validation.
//!
//! A scenario file is TOML. Every top-level field of [`ScenarioParams`] is a
//! required key; the `[link]` and `[clusters]` tables and `eta_reference` fall
//! back to their defaults when absent. Unknown keys are rejected so that a
//! misspelled parameter never silently reverts to a default.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError};
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "LOS")]
    Los,
    #[serde(rename = "NLOS")]
    Nlos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clutter {
    /// Light clutter (sub-scenario A).
    #[serde(rename = "SA")]
    Light,
    /// Heavy clutter (sub-scenario B).
    #[serde(rename = "SB")]
    Heavy,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Los => "LOS",
            Condition::Nlos => "NLOS",
        })
    }
}

impl fmt::Display for Clutter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clutter::Light => "SA",
            Clutter::Heavy => "SB",
        })
    }
}

impl FromStr for Condition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LOS" => Ok(Condition::Los),
            "NLOS" => Ok(Condition::Nlos),
            _ => Err(Error::Parse(format!("unknown condition '{s}'"))),
        }
    }
}

impl FromStr for Clutter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SA" => Ok(Clutter::Light),
            "SB" => Ok(Clutter::Heavy),
            _ => Err(Error::Parse(format!("unknown clutter class '{s}'"))),
        }
    }
}

/// Which total the DMC power ratio is measured against.
///
/// `Total` divides DMC power by DMC + SMC + LOS power. `Nlos` divides by
/// DMC + SMC power only. The two coincide when K = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaReference {
    Total,
    Nlos,
}

/// Tx/Rx placement and motion. The Tx array is centered at the origin and the
/// Rx array at `(distance, 0, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    /// Tx-Rx center distance D, meters.
    pub distance: f64,
    pub n_tx: usize,
    pub n_rx: usize,
    /// Element spacing in carrier wavelengths.
    pub spacing_wavelengths: f64,
    /// |v^R|, m/s.
    pub rx_speed: f64,
    /// Heading of v^R in the horizontal plane, degrees from +x.
    pub rx_heading_deg: f64,
    /// |v^T|, m/s.
    pub tx_speed: f64,
    pub tx_heading_deg: f64,
    /// Array axis orientation (psi_A, psi_E), degrees.
    pub tx_orientation_deg: [f64; 2],
    pub rx_orientation_deg: [f64; 2],
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            distance: 1.0,
            n_tx: 1,
            n_rx: 1,
            spacing_wavelengths: 0.5,
            rx_speed: 0.4,
            rx_heading_deg: 90.0,
            tx_speed: 0.0,
            tx_heading_deg: 0.0,
            tx_orientation_deg: [90.0, 0.0],
            rx_orientation_deg: [90.0, 0.0],
        }
    }
}

/// Knobs for the random cluster field that the model leaves to the
/// measurement environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterFieldConfig {
    /// Bounce distances from the array centers are Uniform(d_min, d_max), meters.
    pub d_min: f64,
    pub d_max: f64,
    /// |v_n^R| of the last bounce, m/s; direction drawn uniformly in azimuth.
    pub speed_rx: f64,
    /// |v_n^T| of the first bounce, m/s.
    pub speed_tx: f64,
    /// Cross-polar leakage: kappa = 10^(-X/10), X ~ N(xpr_mean_db, xpr_std_db).
    pub xpr_mean_db: f64,
    pub xpr_std_db: f64,
}

impl Default for ClusterFieldConfig {
    fn default() -> Self {
        Self {
            d_min: 1.0,
            d_max: 30.0,
            speed_rx: 0.0,
            speed_tx: 0.0,
            xpr_mean_db: 10.0,
            xpr_std_db: 4.0,
        }
    }
}

/// All model parameters for one sub-scenario and propagation condition.
///
/// Times are in seconds, frequencies in Hz, distances in meters, angles in
/// degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    pub condition: Condition,
    pub clutter: Clutter,
    pub f_c: f64,
    pub r_tau: f64,
    pub sigma_cluster_db: f64,
    pub lambda_smc: f64,
    pub lambda_dmc: f64,
    pub mean_log_ds: f64,
    pub std_log_ds: f64,
    pub p_off_db: f64,
    pub s_dmc_tau: f64,
    pub beta_dmc: f64,
    pub eta_dmc: f64,
    /// Rician K in dB. Ignored (K = 0) under NLOS.
    pub k_factor_db: f64,
    pub n_clusters: usize,
    /// [std(phi^A), std(phi^E), std(varphi^A), std(varphi^E)]: Rx azimuth,
    /// Rx elevation, Tx azimuth, Tx elevation.
    pub angle_std: [f64; 4],
    pub dmc_offset_std_deg: f64,
    pub smc_offset_std_deg: f64,
    pub lambda_r: f64,
    pub d_c_s: f64,
    pub mean_intra_delay: f64,
    #[serde(default = "default_eta_reference")]
    pub eta_reference: EtaReference,
    #[serde(default)]
    pub link: LinkConfig,
    #[serde(default)]
    pub clusters: ClusterFieldConfig,
}

fn default_eta_reference() -> EtaReference {
    EtaReference::Total
}

impl ScenarioParams {
    /// Parameter set for one clutter class and condition, including the
    /// figure-setup defaults (5.8 GHz, S=2, beta=10 ns, D_c^s=100 m).
    pub fn preset(clutter: Clutter, condition: Condition) -> Self {
        let (r_tau, sigma_cluster_db, mean_log_ds, std_log_ds, eta_dmc) = match condition {
            Condition::Los => (2.7, 4.0, -7.53, 0.12, 0.14),
            Condition::Nlos => (3.0, 3.0, -7.41, 0.13, 0.4),
        };
        let k_factor_db = match (condition, clutter) {
            (Condition::Nlos, _) => f64::NEG_INFINITY,
            (Condition::Los, Clutter::Light) => 11.0,
            (Condition::Los, Clutter::Heavy) => 7.0,
        };
        // Under LOS the Table-2 eta cannot be a share of the total power
        // for these K values, so it is read as the DMC share of NLOS power.
        let eta_reference = match condition {
            Condition::Los => EtaReference::Nlos,
            Condition::Nlos => EtaReference::Total,
        };
        let n_clusters = match clutter {
            Clutter::Light => 25,
            Clutter::Heavy => 35,
        };
        Self {
            condition,
            clutter,
            f_c: 5.8e9,
            r_tau,
            sigma_cluster_db,
            lambda_smc: 3.0,
            lambda_dmc: 17.0,
            mean_log_ds,
            std_log_ds,
            p_off_db: 10.0,
            s_dmc_tau: 2.0,
            beta_dmc: 10e-9,
            eta_dmc,
            k_factor_db,
            n_clusters,
            angle_std: [31.8, 16.0, 30.6, 10.2],
            dmc_offset_std_deg: 5.0,
            smc_offset_std_deg: 1.0,
            lambda_r: 20.0,
            d_c_s: 100.0,
            mean_intra_delay: 5e-9,
            eta_reference,
            link: LinkConfig::default(),
            clusters: ClusterFieldConfig::default(),
        }
    }

    /// Same scenario with a different DMC delay scaling / power decay pair.
    pub fn with_dmc_delay(mut self, s_dmc_tau: f64, beta_dmc: f64) -> Self {
        self.s_dmc_tau = s_dmc_tau;
        self.beta_dmc = beta_dmc;
        self
    }

    /// Linear Rician K; zero under NLOS.
    pub fn k_linear(&self) -> f64 {
        match self.condition {
            Condition::Nlos => 0.0,
            Condition::Los => 10f64.powf(self.k_factor_db / 10.0),
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c
    }

    /// Element spacing in meters.
    pub fn element_spacing(&self) -> f64 {
        self.link.spacing_wavelengths * self.wavelength()
    }

    /// Check every invariant; all violations are reported together.
    pub fn validate(&self) -> std::result::Result<(), Vec<ValidationError>> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &'static str, msg: &str| {
            if !ok {
                errs.push(ValidationError::new(field, msg));
            }
        };
        let finite = |x: f64| x.is_finite();

        check(finite(self.f_c) && self.f_c > 0.0, "f_c", "f_c must be positive");
        check(finite(self.r_tau) && self.r_tau > 1.0, "r_tau", "r_tau ≤ 1");
        check(
            finite(self.sigma_cluster_db) && self.sigma_cluster_db >= 0.0,
            "sigma_cluster_db",
            "sigma_cluster_db must be ≥ 0",
        );
        check(
            finite(self.lambda_smc) && self.lambda_smc > 0.0,
            "lambda_smc",
            "lambda_smc ≤ 0",
        );
        check(
            finite(self.lambda_dmc) && self.lambda_dmc > 0.0,
            "lambda_dmc",
            "lambda_dmc ≤ 0",
        );
        check(finite(self.mean_log_ds), "mean_log_ds", "mean_log_ds must be finite");
        check(
            finite(self.std_log_ds) && self.std_log_ds >= 0.0,
            "std_log_ds",
            "std_log_ds must be ≥ 0",
        );
        check(finite(self.p_off_db), "p_off_db", "p_off_db must be finite");
        check(
            finite(self.s_dmc_tau) && self.s_dmc_tau > 1.0,
            "s_dmc_tau",
            "s_dmc_tau ≤ 1",
        );
        check(
            finite(self.beta_dmc) && self.beta_dmc > 0.0,
            "beta_dmc",
            "beta_dmc ≤ 0",
        );
        check(
            finite(self.eta_dmc) && (0.0..1.0).contains(&self.eta_dmc),
            "eta_dmc",
            "eta_dmc outside [0, 1)",
        );
        if self.condition == Condition::Los {
            check(
                finite(self.k_factor_db),
                "k_factor_db",
                "k_factor_db must be finite under LOS",
            );
        }
        if self.eta_reference == EtaReference::Total {
            let k = self.k_linear();
            check(
                !(self.eta_dmc * (k + 1.0) >= 1.0),
                "eta_dmc",
                "eta·(K+1) ≥ 1",
            );
        }
        check(self.n_clusters >= 1, "n_clusters", "n_clusters must be ≥ 1");
        check(
            self.angle_std.iter().all(|s| finite(*s) && *s >= 0.0),
            "angle_std",
            "angle standard deviations must be ≥ 0",
        );
        check(
            finite(self.dmc_offset_std_deg) && self.dmc_offset_std_deg >= 0.0,
            "dmc_offset_std_deg",
            "dmc_offset_std_deg must be ≥ 0",
        );
        check(
            finite(self.smc_offset_std_deg) && self.smc_offset_std_deg >= 0.0,
            "smc_offset_std_deg",
            "smc_offset_std_deg must be ≥ 0",
        );
        check(
            finite(self.lambda_r) && self.lambda_r >= 0.0,
            "lambda_r",
            "lambda_r must be ≥ 0",
        );
        check(finite(self.d_c_s) && self.d_c_s > 0.0, "d_c_s", "d_c_s ≤ 0");
        check(
            finite(self.mean_intra_delay) && self.mean_intra_delay >= 0.0,
            "mean_intra_delay",
            "mean_intra_delay must be ≥ 0",
        );

        let l = &self.link;
        check(
            finite(l.distance) && l.distance > 0.0,
            "link.distance",
            "link distance must be positive",
        );
        check(l.n_tx >= 1, "link.n_tx", "n_tx must be ≥ 1");
        check(l.n_rx >= 1, "link.n_rx", "n_rx must be ≥ 1");
        check(
            finite(l.spacing_wavelengths) && l.spacing_wavelengths > 0.0,
            "link.spacing_wavelengths",
            "element spacing must be positive",
        );
        check(
            [l.rx_speed, l.tx_speed].iter().all(|v| finite(*v) && *v >= 0.0),
            "link.rx_speed",
            "array speeds must be ≥ 0",
        );
        check(
            [l.rx_heading_deg, l.tx_heading_deg]
                .iter()
                .chain(&l.tx_orientation_deg)
                .chain(&l.rx_orientation_deg)
                .all(|a| finite(*a)),
            "link.rx_heading_deg",
            "headings and orientations must be finite",
        );

        let c = &self.clusters;
        check(
            finite(c.d_min) && finite(c.d_max) && c.d_min > 0.0 && c.d_max >= c.d_min,
            "clusters.d_min",
            "need 0 < d_min ≤ d_max",
        );
        check(
            [c.speed_rx, c.speed_tx].iter().all(|v| finite(*v) && *v >= 0.0),
            "clusters.speed_rx",
            "cluster speeds must be ≥ 0",
        );
        check(
            finite(c.xpr_mean_db) && finite(c.xpr_std_db) && c.xpr_std_db >= 0.0,
            "clusters.xpr_std_db",
            "XPR statistics must be finite with std ≥ 0",
        );

        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// `validate` mapped into the crate error type.
    pub fn validated(self) -> Result<Self> {
        self.validate().map_err(Error::Validation)?;
        Ok(self)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario parameters always serialize")
    }

    /// Override one field by dotted key, e.g. `beta_dmc=5e-8`,
    /// `link.rx_speed=1` or `angle_std=[30, 15, 30, 10]`. The value is parsed
    /// as a TOML value; bare words fall back to strings.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let parsed = parse_toml_value(value);
        let mut table = toml::Table::try_from(&*self)
            .map_err(|e| Error::Config(e.to_string()))?;
        let mut parts = key.split('.').peekable();
        let mut cursor = &mut table;
        while let Some(part) = parts.next() {
            if parts.peek().is_none() {
                if !cursor.contains_key(part) {
                    return Err(Error::Config(format!("unknown key '{key}'")));
                }
                cursor.insert(part.to_string(), parsed.clone());
                break;
            }
            cursor = match cursor.get_mut(part) {
                Some(toml::Value::Table(t)) => t,
                _ => return Err(Error::Config(format!("unknown key '{key}'"))),
            };
        }
        let updated: ScenarioParams = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("{key}: {e}")))?;
        *self = updated;
        Ok(())
    }

    /// Apply `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for item in overrides {
            let item = item.as_ref();
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{item}' is not key=value")))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Numeric convenience over [`ScenarioParams::set`].
    pub fn set_f64(&mut self, key: &str, value: f64) -> Result<()> {
        // Debug formatting keeps a decimal point so integers stay floats.
        self.set(key, &format!("{value:?}"))
    }
}

fn parse_toml_value(value: &str) -> toml::Value {
    format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()))
}
