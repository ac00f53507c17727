//! Named parameter sets reproducing the published figure scenarios.

use crate::error::{domain, Result};
use crate::model::ModelParams;
use crate::propagator::TimeGrid;

/// Frequency of atoms 1 and 2 in every preset.
pub const PRESET_OMEGA: f64 = 10.0;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_NUM_POINTS: usize = 2001;

/// A figure scenario: symmetric detuning `Δ`, coupling `α`, damping `γ` and
/// thermal occupation `n̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub delta: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub description: &'static str,
}

pub const PRESETS: [Preset; 9] = [
    Preset {
        name: "fig2",
        delta: 2.0,
        alpha: 2.0,
        gamma: 0.5,
        nbar: 0.0,
        description: "detuned, zero temperature; entanglement never vanishes",
    },
    Preset {
        name: "fig3",
        delta: 0.0,
        alpha: 2.0,
        gamma: 0.5,
        nbar: 0.0,
        description: "resonant, zero temperature; sudden death and revival",
    },
    Preset {
        name: "fig4",
        delta: 0.0,
        alpha: 0.5,
        gamma: 0.5,
        nbar: 0.0,
        description: "weak coupling, zero temperature; no oscillation",
    },
    Preset {
        name: "fig5",
        delta: 0.0,
        alpha: 3.0,
        gamma: 27.0,
        nbar: 0.0,
        description: "Markovian regime, zero temperature",
    },
    Preset {
        name: "fig6",
        delta: 0.0,
        alpha: 5.0,
        gamma: 1.0 / 3.0,
        nbar: 0.2,
        description: "strong coupling, finite temperature",
    },
    Preset {
        name: "fig7",
        delta: 2.0,
        alpha: 2.0,
        gamma: 0.5,
        nbar: 0.2,
        description: "detuned, finite temperature",
    },
    Preset {
        name: "fig8",
        delta: 0.0,
        alpha: 2.0,
        gamma: 0.5,
        nbar: 0.2,
        description: "resonant, finite temperature",
    },
    Preset {
        name: "fig9",
        delta: 0.0,
        alpha: 0.5,
        gamma: 1.0,
        nbar: 0.2,
        description: "weak coupling, finite temperature",
    },
    Preset {
        name: "fig10",
        delta: 0.0,
        alpha: 3.0,
        gamma: 27.0,
        nbar: 0.2,
        description: "Markovian regime, finite temperature",
    },
];

impl Preset {
    pub fn params(&self) -> ModelParams {
        ModelParams::symmetric(PRESET_OMEGA, self.delta, self.alpha, self.gamma, self.nbar)
            .expect("preset parameters are valid")
    }

    pub fn grid(&self) -> TimeGrid {
        default_grid()
    }
}

/// `num_points` uniform points on `[0, DEFAULT_T_END]`.
pub fn default_grid() -> TimeGrid {
    TimeGrid::uniform(0.0, DEFAULT_T_END, DEFAULT_NUM_POINTS).expect("default grid is valid")
}

pub fn preset(name: &str) -> Result<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| domain("preset", format!("unknown preset '{name}'")))
}
