//! Shared instance builders for the benchmarks: one mid-sized configuration
//! per kernel, kept here so the numbers stay comparable across runs.

use ehcap_core::capacity::Policy;
use ehcap_core::infotheory::quantized_amplitudes;
use ehcap_core::{ChannelModel, EnergyGrid, HarvestModel, InputDistribution};

pub fn channel() -> ChannelModel {
    ChannelModel::new(1.0).expect("valid variance")
}

/// The standard sweep instance: buffer of 4, uniform harvest on {0..4}.
pub fn sweep_instance() -> (EnergyGrid, HarvestModel) {
    let harvest = HarvestModel::uniform(1.0, 4).expect("valid pmf");
    let grid = EnergyGrid::for_harvest(&harvest, 4);
    (grid, harvest)
}

/// A nine-atom input at peak 4, exercising the quadrature at a realistic
/// support width.
pub fn mi_input() -> InputDistribution {
    let amps = quantized_amplitudes(4, 1.0);
    let n = amps.len();
    InputDistribution::new(amps, vec![1.0 / n as f64; n], 4.0).expect("valid input")
}

/// Spend-everything policy on the sweep instance, whose chain reaches every
/// state.
pub fn spend_all_policy() -> (Policy, EnergyGrid, HarvestModel) {
    let (grid, harvest) = sweep_instance();
    (Policy::spend_all(&grid), grid, harvest)
}
