//! Named models: the worked examples plus fixtures for the failure paths.

use crate::error::{Error, Result};
use crate::levy_model::{Atom, LevyMeasureSpec, LevyTriplet};
use std::f64::consts::PI;

/// What a preset is expected to do; checked by the acceptance suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    /// Index `alpha` with `psi_star(r) ~ r^alpha`, when there is one.
    pub alpha_effective: Option<f64>,
    /// Slope of `log rho_t` against `log t`.
    pub rho_exponent: Option<f64>,
    pub condition_a: bool,
    /// Power-law bell bound (needs a Lebesgue density).
    pub bell_power: bool,
    /// Tail-function bell bound.
    pub bell_subexp: bool,
    pub symmetric: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelPreset {
    pub name: &'static str,
    pub description: &'static str,
    pub triplet: LevyTriplet,
    pub expected: Expected,
}

pub const PRESET_NAMES: [&str; 10] = [
    "stable-1d-cauchy",
    "stable-1d",
    "stable-1d-a07",
    "stable-1d-skewed",
    "stable-2d-cauchy",
    "stable-2d",
    "discretized-stable-1d",
    "discretized-stable-2d",
    "axis-degenerate-2d",
    "tabulated-atoms-1d",
];

fn stable(alpha: f64, symmetric: bool) -> Expected {
    Expected {
        alpha_effective: Some(alpha),
        rho_exponent: Some(-1.0 / alpha),
        condition_a: true,
        bell_power: true,
        bell_subexp: true,
        symmetric,
    }
}

pub fn preset(name: &str) -> Result<ModelPreset> {
    let (description, measure, expected) = match name {
        "stable-1d-cauchy" => (
            "Cauchy process, psi(xi) = |xi|",
            LevyMeasureSpec::isotropic_stable(1, 1.0, 1.0 / PI)?,
            stable(1.0, true),
        ),
        "stable-1d" => (
            "symmetric 1.5-stable, scaled so psi_star(r) = r^1.5",
            LevyMeasureSpec::isotropic_stable_normalized(1, 1.5)?,
            stable(1.5, true),
        ),
        "stable-1d-a07" => (
            "symmetric 0.7-stable, scaled so psi_star(r) = r^0.7",
            LevyMeasureSpec::isotropic_stable_normalized(1, 0.7)?,
            stable(0.7, true),
        ),
        "stable-1d-skewed" => (
            "totally skewed 1.5-stable, jumps to the right only",
            LevyMeasureSpec::axis_stable(1, 1.5, 1.0, 0.0, 0)?,
            Expected {
                bell_power: false,
                ..stable(1.5, false)
            },
        ),
        "stable-2d-cauchy" => (
            "rotationally invariant Cauchy process in the plane, psi(xi) = |xi|",
            LevyMeasureSpec::isotropic_stable(2, 1.0, 1.0 / (2.0 * PI))?,
            stable(1.0, true),
        ),
        "stable-2d" => (
            "rotationally invariant 1.5-stable in the plane, psi_star(r) = r^1.5",
            LevyMeasureSpec::isotropic_stable_normalized(2, 1.5)?,
            stable(1.5, true),
        ),
        "discretized-stable-1d" => (
            "shells 2^{-k} with mass 2^k on the line (gamma = upsilon = 1)",
            LevyMeasureSpec::discretized_stable(1, 1.0, 1.0)?,
            Expected {
                bell_power: false,
                ..stable(1.0, true)
            },
        ),
        "discretized-stable-2d" => (
            "uniform measures on circles of radius 2^{-k} with mass 2^k (gamma = upsilon = 1)",
            LevyMeasureSpec::discretized_stable(2, 1.0, 1.0)?,
            Expected {
                bell_power: false,
                ..stable(1.0, true)
            },
        ),
        "axis-degenerate-2d" => (
            "Cauchy jumps along the first axis only; fails the comparability condition",
            LevyMeasureSpec::axis_stable(2, 1.0, 0.5, 0.5, 0)?,
            Expected {
                alpha_effective: None,
                rho_exponent: None,
                condition_a: false,
                bell_power: false,
                bell_subexp: false,
                symmetric: true,
            },
        ),
        "tabulated-atoms-1d" => (
            "two unit atoms at -1 and 1; finite measure, no density",
            LevyMeasureSpec::TabulatedAtoms {
                dim: 1,
                atoms: vec![
                    Atom {
                        position: vec![-1.0],
                        weight: 1.0,
                    },
                    Atom {
                        position: vec![1.0],
                        weight: 1.0,
                    },
                ],
            },
            Expected {
                alpha_effective: None,
                rho_exponent: None,
                condition_a: false,
                bell_power: false,
                bell_subexp: false,
                symmetric: true,
            },
        ),
        _ => return Err(Error::UnknownModel(name.to_string())),
    };
    let name = PRESET_NAMES.iter().find(|n| **n == name).expect("listed");
    Ok(ModelPreset {
        name,
        description,
        triplet: LevyTriplet::driftless(measure)?,
        expected,
    })
}

pub fn all_presets() -> Vec<ModelPreset> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("preset builds")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{from_toml, to_toml};

    #[test]
    fn presets_round_trip_through_config() {
        for p in all_presets() {
            let text = to_toml(&p.triplet).unwrap();
            assert_eq!(from_toml(&text).unwrap(), p.triplet, "{}", p.name);
        }
    }

    #[test]
    fn unknown_name() {
        assert_eq!(preset("nope"), Err(Error::UnknownModel("nope".into())));
    }
}
