//! Phenotype-dependent laws: haptotactic sensitivity `mu`, proliferation
//! factor `r`, and MDE secretion rate `p`.
//!
//! Laws are looked up by name so that configuration files stay declarative.
//! Every built-in is expressed on the normalised phenotype `s = y / y_max`
//! so the boundary conditions (`mu(0) = 0`, `r(0) = 1`, `r(y_max) = 0`,
//! `p(0) = p_min`) hold for any phenotype domain length.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Haptotactic sensitivity `mu(y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityLaw {
    /// `mu(y) = y^2`
    Quadratic,
    /// `mu(y) = y`
    Linear,
}

/// Proliferation factor `r(y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProliferationLaw {
    /// `r(y) = 1 - (y / y_max)^2`
    Quadratic,
    /// `r(y) = 1 - y / y_max`
    Linear,
}

/// MDE secretion rate `p(y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecretionLaw {
    /// `p(y) = p_min + zeta y^2`
    Quadratic,
    /// `p(y) = p_min + zeta y`
    Linear,
}

macro_rules! named_law {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub const NAMES: &'static [&'static str] = &[$($name),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($ty::$variant => $name),+
                }
            }
        }

        impl FromStr for $ty {
            type Err = ConfigError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(ConfigError::UnknownLaw {
                        kind: stringify!($ty),
                        name: other.to_string(),
                        known: $ty::NAMES.join(", "),
                    }),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
    };
}

named_law!(SensitivityLaw { Quadratic => "quadratic", Linear => "linear" });
named_law!(ProliferationLaw { Quadratic => "quadratic", Linear => "linear" });
named_law!(SecretionLaw { Quadratic => "quadratic", Linear => "linear" });

/// The three phenotype laws used by both engines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhenotypeLaws {
    pub mu: SensitivityLaw,
    pub r: ProliferationLaw,
    pub p: SecretionLaw,
}

impl Default for PhenotypeLaws {
    fn default() -> Self {
        PhenotypeLaws {
            mu: SensitivityLaw::Quadratic,
            r: ProliferationLaw::Quadratic,
            p: SecretionLaw::Quadratic,
        }
    }
}

impl PhenotypeLaws {
    /// Resolves laws from their registry names.
    pub fn from_names(mu: &str, r: &str, p: &str) -> Result<Self, ConfigError> {
        Ok(PhenotypeLaws { mu: mu.parse()?, r: r.parse()?, p: p.parse()? })
    }

    pub fn mu(&self, y: f64) -> f64 {
        match self.mu {
            SensitivityLaw::Quadratic => y * y,
            SensitivityLaw::Linear => y,
        }
    }

    pub fn r(&self, y: f64, y_max: f64) -> f64 {
        let s = y / y_max;
        match self.r {
            ProliferationLaw::Quadratic => 1.0 - s * s,
            ProliferationLaw::Linear => 1.0 - s,
        }
    }

    pub fn p(&self, y: f64, p_min: f64, zeta: f64) -> f64 {
        match self.p {
            SecretionLaw::Quadratic => p_min + zeta * y * y,
            SecretionLaw::Linear => p_min + zeta * y,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trip() {
        for name in SensitivityLaw::NAMES {
            assert_eq!(name.parse::<SensitivityLaw>().unwrap().name(), *name);
        }
        let laws = PhenotypeLaws::from_names("linear", "quadratic", "linear").unwrap();
        assert_eq!(laws.mu, SensitivityLaw::Linear);
        assert_eq!(laws.p, SecretionLaw::Linear);
        assert!(matches!(
            PhenotypeLaws::from_names("cubic", "quadratic", "quadratic"),
            Err(ConfigError::UnknownLaw { .. })
        ));
    }

    #[test]
    fn default_law_values() {
        let laws = PhenotypeLaws::default();
        assert_eq!(laws.mu(0.0), 0.0);
        assert_eq!(laws.mu(0.5), 0.25);
        assert_eq!(laws.r(0.0, 1.0), 1.0);
        assert_eq!(laws.r(1.0, 1.0), 0.0);
        assert_eq!(laws.r(0.5, 1.0), 0.75);
        assert_eq!(laws.p(0.0, 1e-7, 1e-5), 1e-7);
        assert!((laws.p(0.5, 1e-7, 1e-5) - 2.6e-6).abs() < 1e-20);
    }
}
