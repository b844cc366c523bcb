//! JSON trap configuration with unit-suffixed quantities.
//!
//! ```json
//! {
//!   "geometry": { "a": "650um", "b": "3.24mm" },
//!   "drive": { "v_rf": "300V", "frequency": "8.07MHz", "epsilon": 0.0 },
//!   "species": { "preset": "88Sr+" }
//! }
//! ```
//!
//! Bare numbers are read as SI. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::Path;

use pointtrap::{IonSpecies, RfDrive, RingGeometry, TrapConfig};

use crate::error::CliError;
use crate::units::{Frequency, Length, Voltage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub a: Length,
    pub b: Length,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub v_rf: Voltage,
    /// Ordinary frequency; Ω = 2π·f.
    pub frequency: Frequency,
    #[serde(default)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_amu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge_e: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfigFile {
    pub geometry: GeometrySpec,
    pub drive: DriveSpec,
    pub species: SpeciesSpec,
}

/// Species presets accepted in `species.preset`.
pub const PRESETS: &[&str] = &["88Sr+"];

impl SpeciesSpec {
    fn to_species(&self) -> Result<IonSpecies, CliError> {
        match (&self.preset, self.mass_amu) {
            (Some(p), None) if self.charge_e.is_none() => match p.as_str() {
                "88Sr+" | "Sr88+" => Ok(IonSpecies::strontium_88()),
                other => Err(CliError::config(format!(
                    "species.preset: unknown preset `{other}` (known: {})",
                    PRESETS.join(", ")
                ))),
            },
            (None, Some(m)) => IonSpecies::from_amu(m, self.charge_e.unwrap_or(1.0))
                .map_err(|e| CliError::config(format!("species: {e}"))),
            _ => Err(CliError::config(
                "species: give either `preset` or `mass_amu` (with optional `charge_e`)",
            )),
        }
    }
}

impl TrapConfigFile {
    pub fn to_trap(&self) -> Result<TrapConfig, CliError> {
        let geometry = RingGeometry::new(self.geometry.a.0, self.geometry.b.0)
            .map_err(|e| CliError::config(format!("geometry: {e}")))?;
        let drive = RfDrive::from_frequency_hz(self.drive.v_rf.0, self.drive.frequency.0, self.drive.epsilon)
            .map_err(|e| CliError::config(format!("drive: {e}")))?;
        Ok(TrapConfig::new(geometry, drive, self.species.to_species()?))
    }

    /// Canonical JSON: every quantity in SI with its base unit suffix.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn from_value(value: Value, origin: &str) -> Result<Self, CliError> {
        serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(format!("{origin}: {path}: {}", e.into_inner()))
        })
    }
}

fn parse_json(text: &str, origin: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::config(format!("{origin}: {e}")))
}

/// Merges `patch` into `base` key by key (objects recurse, other values replace).
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

/// Loads a config file and applies override files in order.
///
/// An override file is either a partial config or a report emitted by
/// `characterize`, in which case its `config` section is applied.
pub fn load(path: &Path, overrides: &[impl AsRef<Path>]) -> Result<TrapConfigFile, CliError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{origin}: {e}")))?;
    // parse once strictly so that line and column diagnostics point at the file
    let mut value = parse_json(&text, &origin)?;
    if overrides.is_empty() {
        let mut de = serde_json::Deserializer::from_str(&text);
        return serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(format!("{origin}: {path}: {}", e.into_inner()))
        });
    }
    for o in overrides {
        let o = o.as_ref();
        let name = o.display().to_string();
        let text = std::fs::read_to_string(o).map_err(|e| CliError::config(format!("{name}: {e}")))?;
        let mut patch = parse_json(&text, &name)?;
        if let Some(inner) = patch.get_mut("config").map(Value::take) {
            patch = inner;
        }
        merge(&mut value, patch);
    }
    TrapConfigFile::from_value(value, &origin)
}

impl fmt::Display for TrapConfigFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAB: &str = r#"{
        "geometry": { "a": "650um", "b": "3.24mm" },
        "drive": { "v_rf": "300V", "frequency": "8.07MHz", "epsilon": 0.0 },
        "species": { "preset": "88Sr+" }
    }"#;

    fn parse(text: &str) -> Result<TrapConfigFile, CliError> {
        TrapConfigFile::from_value(serde_json::from_str(text).unwrap(), "test")
    }

    #[test]
    fn parses_units() {
        let c = parse(LAB).unwrap();
        assert!((c.geometry.a.0 - 650e-6).abs() < 1e-18);
        assert_eq!(c.drive.frequency.0, 8.07e6);
        let t = c.to_trap().unwrap();
        assert!((t.drive.omega_rf - 2.0 * std::f64::consts::PI * 8.07e6).abs() < 1e-6);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_geometry() {
        let e = parse(&LAB.replace("\"epsilon\"", "\"epsilonn\"")).unwrap_err();
        assert!(e.to_string().contains("drive"), "{e}");
        let e = parse(&LAB.replace("3.24mm", "0.1mm")).unwrap().to_trap().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = parse(&LAB.replace("650um", "650furlong")).unwrap_err();
        assert!(e.to_string().contains("geometry.a"), "{e}");
    }

    #[test]
    fn species_forms() {
        let c = parse(&LAB.replace(r#"{ "preset": "88Sr+" }"#, r#"{ "mass_amu": 40.0, "charge_e": 1 }"#)).unwrap();
        assert!(c.to_trap().is_ok());
        let c = parse(&LAB.replace(r#"{ "preset": "88Sr+" }"#, r#"{ "preset": "88Sr+", "mass_amu": 40.0 }"#)).unwrap();
        assert!(c.to_trap().is_err());
        let c = parse(&LAB.replace("88Sr+", "unobtainium")).unwrap();
        assert!(c.to_trap().is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = parse(LAB).unwrap();
        let again = parse(&c.canonical_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.sha256(), again.sha256());
    }

    #[test]
    fn merge_overrides() {
        let mut base: Value = serde_json::from_str(LAB).unwrap();
        merge(&mut base, serde_json::json!({"drive": {"epsilon": 0.52}}));
        let c = TrapConfigFile::from_value(base, "t").unwrap();
        assert_eq!(c.drive.epsilon, 0.52);
        assert_eq!(c.drive.v_rf.0, 300.0);
    }
}
