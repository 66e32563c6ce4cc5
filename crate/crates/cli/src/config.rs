//! TOML walk configuration.
//!
//! ```toml
//! d = 2
//! L = 21
//! p = [0.99875, 1.0]
//! q = [[0.05, 0.0], [0.0, 0.0]]
//! phi = [[0.5, 0.0], [0.5, 0.0], [0.5, 0.0], [0.5, 0.0]]
//! omega = [[0.8366600265340756, 0.0], ...]
//! p0 = [1, 1]
//!
//! [scan]
//! q_magnitudes = [0.05, 0.1, 0.2]
//! axis = 1
//!
//! [thresholds]
//! gap_min = 0.05
//! ```

use std::path::Path;

use qwdecay_core::c64;
use qwdecay_core::lattice::LatticeBox;
use qwdecay_core::spectrum::DetectionCriteria;
use qwdecay_core::walk::{coin_report, CoinReport, CoinSpec, ShiftParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] qwdecay_core::Error),
    #[error("coin assumptions violated: {}", .0.failures.join("; "))]
    Assumption(Box<CoinReport>),
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub q_magnitudes: Vec<f64>,
    /// 1-based.
    pub axis: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub gap_min: Option<f64>,
    pub mass_min: Option<f64>,
    pub core_radius: Option<f64>,
    pub delta_fraction: Option<f64>,
    pub grid_refinement: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfigFile {
    pub d: usize,
    #[serde(rename = "L")]
    pub side: usize,
    pub p: Vec<f64>,
    pub q: Vec<[f64; 2]>,
    pub phi: Vec<[f64; 2]>,
    pub omega: Vec<[f64; 2]>,
    pub p0: Vec<i64>,
    pub scan: Option<ScanSpec>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub side: Option<usize>,
    pub seed: Option<u64>,
    pub refinement: Option<usize>,
    pub delta_fraction: Option<f64>,
}

pub const DEFAULT_REFINEMENT: usize = 4;
pub const DEFAULT_DELTA_FRACTION: f64 = 0.9;

/// One walk to analyse: the base config or one scan point.
#[derive(Debug, Clone)]
pub struct WalkPoint {
    pub label: String,
    pub q_magnitude: Option<f64>,
    pub params: ShiftParams,
}

#[derive(Debug, Clone)]
pub struct ValidatedConfig {
    pub file: WalkConfigFile,
    pub coin: CoinSpec,
    pub params: ShiftParams,
    pub p0: Vec<f64>,
    pub report: CoinReport,
    pub criteria: DetectionCriteria,
    pub refinement: usize,
    pub delta_fraction: f64,
    pub seed: u64,
}

fn complex(v: &[[f64; 2]]) -> Vec<c64> {
    v.iter().map(|z| c64::new(z[0], z[1])).collect()
}

/// Whether `Omega` equals `Phi` up to a phase, so both coins coincide.
pub fn is_defect_free(coin: &CoinSpec) -> bool {
    let overlap: c64 = coin.phi().iter().zip(coin.omega()).map(|(a, b)| a.conj() * b).sum();
    (overlap.norm() - 1.0).abs() <= 1e-12
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

impl WalkConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(l) = o.side {
            self.side = l;
        }
        let t = &mut self.thresholds;
        t.seed = o.seed.or(t.seed);
        t.grid_refinement = o.refinement.or(t.grid_refinement);
        t.delta_fraction = o.delta_fraction.or(t.delta_fraction);
    }

    pub fn validate(self) -> Result<ValidatedConfig, ConfigError> {
        let d = self.d;
        if d < 2 {
            return Err(invalid(format!("d must be at least 2, got {d}")));
        }
        LatticeBox::new(d, self.side)?;
        for (name, len, want) in [
            ("p", self.p.len(), d),
            ("q", self.q.len(), d),
            ("p0", self.p0.len(), d),
            ("phi", self.phi.len(), 2 * d),
            ("omega", self.omega.len(), 2 * d),
        ] {
            if len != want {
                return Err(invalid(format!("{name} has length {len}, expected {want}")));
            }
        }
        let params = ShiftParams::new(self.p.clone(), complex(&self.q))?;
        let coin = CoinSpec::new(complex(&self.phi), complex(&self.omega))?;
        if let Some(bad) = self.p0.iter().find(|&&s| s != 1 && s != -1) {
            return Err(invalid(format!("p0 entries must be +1 or -1, got {bad}")));
        }
        let p0: Vec<f64> = self.p0.iter().map(|&s| s as f64).collect();
        let report = coin_report(&coin, &p0)?;
        // Without a defect the conditions have nothing to constrain; such a
        // config runs as a null-result control.
        if !report.passed() && !is_defect_free(&coin) {
            return Err(ConfigError::Assumption(Box::new(report)));
        }
        if let Some(scan) = &self.scan {
            if scan.axis == 0 || scan.axis > d {
                return Err(invalid(format!("scan axis must be in 1..={d}, got {}", scan.axis)));
            }
            if scan.q_magnitudes.is_empty() {
                return Err(invalid("scan needs at least one q magnitude"));
            }
            if let Some(m) = scan.q_magnitudes.iter().find(|m| !(0.0..=1.0).contains(*m)) {
                return Err(invalid(format!("scan q magnitude must lie in [0, 1], got {m}")));
            }
        }

        let t = &self.thresholds;
        let defaults = DetectionCriteria::default();
        let criteria = DetectionCriteria {
            gap_min: t.gap_min.unwrap_or(defaults.gap_min),
            mass_min: t.mass_min.unwrap_or(defaults.mass_min),
            core_radius: t.core_radius,
            stability_tol: defaults.stability_tol,
        };
        if !(0.0..=f64::INFINITY).contains(&criteria.gap_min) {
            return Err(invalid(format!("gap_min must be >= 0, got {}", criteria.gap_min)));
        }
        if !(0.0..=1.0).contains(&criteria.mass_min) {
            return Err(invalid(format!("mass_min must lie in [0, 1], got {}", criteria.mass_min)));
        }
        if let Some(r) = criteria.core_radius.filter(|r| r.is_nan() || *r <= 0.0) {
            return Err(invalid(format!("core_radius must be positive, got {r}")));
        }
        let refinement = t.grid_refinement.unwrap_or(DEFAULT_REFINEMENT);
        if refinement == 0 {
            return Err(invalid("grid_refinement must be >= 1"));
        }
        let delta_fraction = t.delta_fraction.unwrap_or(DEFAULT_DELTA_FRACTION);
        if !(delta_fraction > 0.0 && delta_fraction < 1.0) {
            return Err(invalid(format!(
                "delta_fraction = {delta_fraction} puts delta outside (0, delta_max): 2 sinh(delta b) < d(lambda) requires a fraction in (0, 1)"
            )));
        }
        let seed = t.seed.unwrap_or(0);
        Ok(ValidatedConfig { coin, params, p0, report, criteria, refinement, delta_fraction, seed, file: self })
    }
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ValidatedConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    let mut file = WalkConfigFile::parse(&text)?;
    file.apply(overrides);
    file.validate()
}

impl ValidatedConfig {
    pub fn side(&self) -> usize {
        self.file.side
    }

    /// The base walk, or one walk per scan magnitude. On the scan axis the
    /// phase of the configured `q` and the sign of the configured `p` are
    /// kept; `p` is rescaled to stay in `D`.
    pub fn points(&self) -> Result<Vec<WalkPoint>, ConfigError> {
        let Some(scan) = &self.file.scan else {
            return Ok(vec![WalkPoint { label: "base".into(), q_magnitude: None, params: self.params.clone() }]);
        };
        let j = scan.axis - 1;
        scan.q_magnitudes
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let mut p = self.params.p().to_vec();
                let mut q = self.params.q().to_vec();
                let phase = if q[j].norm() > 0.0 { q[j] / q[j].norm() } else { c64::new(1.0, 0.0) };
                q[j] = phase * m;
                p[j] = if p[j] < 0.0 { -1.0 } else { 1.0 } * (1.0 - m * m).max(0.0).sqrt();
                Ok(WalkPoint { label: format!("point_{i:02}"), q_magnitude: Some(m), params: ShiftParams::new(p, q)? })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"
d = 2
L = 21
p = [0.99874921777190895, 1.0]
q = [[0.05, 0.0], [0.0, 0.0]]
phi = [[0.5, 0.0], [0.5, 0.0], [0.5, 0.0], [0.5, 0.0]]
omega = [[0.8366600265340756, 0.0], [0.31622776601683794, 0.0], [0.31622776601683794, 0.0], [0.31622776601683794, 0.0]]
p0 = [1, 1]

[scan]
q_magnitudes = [0.05, 0.1, 0.2]
axis = 1
"#;

    #[test]
    fn canonical_loads() {
        let cfg = WalkConfigFile::parse(CANONICAL).unwrap().validate().unwrap();
        assert!(cfg.report.passed());
        let pts = cfg.points().unwrap();
        assert_eq!(pts.len(), 3);
        assert!((pts[2].params.p()[0] - 0.96f64.sqrt()).abs() < 1e-15);
        assert_eq!(pts[2].params.q()[0], c64::new(0.2, 0.0));
        assert_eq!(pts[2].params.p()[1], 1.0);
    }

    #[test]
    fn even_side_rejected() {
        let err = WalkConfigFile::parse(&CANONICAL.replace("L = 21", "L = 20")).unwrap().validate();
        assert!(matches!(err, Err(ConfigError::Model(qwdecay_core::Error::InvalidLattice(_)))));
    }

    #[test]
    fn unnormalized_phi_named() {
        let text = CANONICAL.replace("phi = [[0.5, 0.0], [0.5, 0.0]", "phi = [[0.6, 0.0], [0.5, 0.0]");
        let err = WalkConfigFile::parse(&text).unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("Phi is not normalized"), "{err}");
    }

    #[test]
    fn fraction_outside_unit_interval_rejected() {
        let mut file = WalkConfigFile::parse(CANONICAL).unwrap();
        file.apply(&Overrides { delta_fraction: Some(1.5), ..Default::default() });
        assert!(matches!(file.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn defect_free_control_loads_despite_bias_condition() {
        let text = CANONICAL.replace(
            "omega = [[0.8366600265340756, 0.0], [0.31622776601683794, 0.0], [0.31622776601683794, 0.0], [0.31622776601683794, 0.0]]",
            "omega = [[0.0, 0.5], [0.0, 0.5], [0.0, 0.5], [0.0, 0.5]]",
        );
        let cfg = WalkConfigFile::parse(&text).unwrap().validate().unwrap();
        assert!(!cfg.report.passed());
        assert!(is_defect_free(&cfg.coin));
        let text = text.replace(
            "omega = [[0.0, 0.5], [0.0, 0.5], [0.0, 0.5], [0.0, 0.5]]",
            "omega = [[0.0, 0.5], [0.5, 0.0], [0.5, 0.0], [0.5, 0.0]]",
        );
        assert!(matches!(WalkConfigFile::parse(&text).unwrap().validate(), Err(ConfigError::Assumption(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(WalkConfigFile::parse(&format!("{CANONICAL}\nextra = 1\n")).is_err());
    }
}
