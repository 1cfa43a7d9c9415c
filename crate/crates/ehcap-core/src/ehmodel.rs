//! Energy grid, harvest process, channel noise, and the buffer update rule.
//!
//! Energy is measured in integer multiples of a `quantum` (joules per
//! quantum). A slot proceeds as: the harvest `Y` lands in the buffer, the
//! transmitter spends `T = X^2` out of the combined energy `E + Y`, and
//! whatever is left is truncated to the buffer capacity `gamma`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance used when validating probability vectors.
pub const PMF_TOL: f64 = 1e-12;

/// One-step buffer update: `E' = min(gamma, (E + Y) - T)`, all in quanta.
///
/// `t_q` must not exceed the available energy `e_q + y_q`; the unsigned
/// types already rule out negative quantities.
///
/// ```
/// use ehcap_core::ehmodel::buffer_step;
/// assert_eq!(buffer_step(3, 2, 1, 4).unwrap(), 4); // truncated at capacity
/// assert_eq!(buffer_step(0, 0, 0, 4).unwrap(), 0);
/// assert_eq!(buffer_step(2, 3, 5, 4).unwrap(), 0); // spend everything
/// assert!(buffer_step(1, 1, 3, 4).is_err());
/// ```
pub fn buffer_step(e_q: u32, y_q: u32, t_q: u32, gamma_q: u32) -> Result<u32> {
    let available_q = e_q + y_q;
    if t_q > available_q {
        return Err(Error::CausalityViolation {
            spent_q: t_q,
            available_q,
        });
    }
    Ok(gamma_q.min(available_q - t_q))
}

/// Discretisation of the energy axis: buffer capacity and largest harvest in
/// quanta, plus the quantum itself in energy units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    quantum: f64,
    gamma_q: u32,
    ymax_q: u32,
}

impl EnergyGrid {
    pub fn new(quantum: f64, gamma_q: u32, ymax_q: u32) -> Result<Self> {
        if !(quantum.is_finite() && quantum > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quantum must be a positive finite energy, got {quantum}"
            )));
        }
        Ok(Self {
            quantum,
            gamma_q,
            ymax_q,
        })
    }

    /// Grid matching a harvest model: same quantum, same largest harvest.
    pub fn for_harvest(harvest: &HarvestModel, gamma_q: u32) -> Self {
        Self {
            quantum: harvest.quantum(),
            gamma_q,
            ymax_q: harvest.ymax_q(),
        }
    }

    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    pub fn gamma_q(&self) -> u32 {
        self.gamma_q
    }

    pub fn ymax_q(&self) -> u32 {
        self.ymax_q
    }

    /// Buffer capacity in energy units.
    pub fn gamma_energy(&self) -> f64 {
        self.gamma_q as f64 * self.quantum
    }

    /// Energy corresponding to `q` quanta.
    pub fn energy_of(&self, q: u32) -> f64 {
        q as f64 * self.quantum
    }

    /// Number of combined-energy states `E + Y` can take.
    pub fn state_count(&self) -> usize {
        (self.gamma_q + self.ymax_q + 1) as usize
    }

    /// Check that a harvest model lives on this grid.
    pub fn validate_harvest(&self, harvest: &HarvestModel) -> Result<()> {
        let rel = (self.quantum - harvest.quantum()).abs() / self.quantum;
        if rel > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "grid quantum {} does not match harvest quantum {}",
                self.quantum,
                harvest.quantum()
            )));
        }
        if self.ymax_q != harvest.ymax_q() {
            return Err(Error::InvalidParameter(format!(
                "grid ymax {} does not match harvest ymax {}",
                self.ymax_q,
                harvest.ymax_q()
            )));
        }
        Ok(())
    }
}

/// All combined-energy states `E + Y` reachable on the grid, in quanta.
///
/// The buffer holds at most `gamma` and a harvest adds at most `ymax`, so
/// the combined energy ranges over `0..=gamma+ymax`.
pub fn available_states(grid: &EnergyGrid) -> Vec<u32> {
    (0..=grid.gamma_q() + grid.ymax_q()).collect()
}

/// I.i.d. harvest process on the quantised grid.
///
/// `pmf[i]` is the probability of harvesting `i` quanta in a slot. Trailing
/// zero entries are kept as given; they simply contribute no transitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarvestModel {
    quantum: f64,
    pmf: Vec<f64>,
}

impl HarvestModel {
    pub fn from_pmf(quantum: f64, pmf: Vec<f64>) -> Result<Self> {
        if !(quantum.is_finite() && quantum > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quantum must be a positive finite energy, got {quantum}"
            )));
        }
        if pmf.is_empty() {
            return Err(Error::InvalidParameter(
                "harvest pmf must have at least one entry".into(),
            ));
        }
        if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter(
                "harvest pmf entries must be finite and non-negative".into(),
            ));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > PMF_TOL {
            return Err(Error::InvalidParameter(format!(
                "harvest pmf sums to {total}, expected 1 within {PMF_TOL:e}"
            )));
        }
        Ok(Self { quantum, pmf })
    }

    /// All mass on a single harvest level `y_q`.
    pub fn point(quantum: f64, y_q: u32) -> Result<Self> {
        let mut pmf = vec![0.0; y_q as usize + 1];
        pmf[y_q as usize] = 1.0;
        Self::from_pmf(quantum, pmf)
    }

    /// Uniform on `{0, 1, ..., ymax_q}` quanta.
    pub fn uniform(quantum: f64, ymax_q: u32) -> Result<Self> {
        let n = ymax_q as usize + 1;
        Self::from_pmf(quantum, vec![1.0 / n as f64; n])
    }

    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn ymax_q(&self) -> u32 {
        (self.pmf.len() - 1) as u32
    }

    /// Mean harvest in quanta.
    pub fn mean_quanta(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(i, p)| i as f64 * p)
            .sum()
    }

    /// Mean harvest in energy units.
    pub fn mean_energy(&self) -> f64 {
        self.mean_quanta() * self.quantum
    }

    /// Draw one harvest level using a single uniform variate, so the caller's
    /// stream position advances by exactly one draw per slot.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.pmf.iter().enumerate() {
            acc += p;
            if u < acc {
                return i as u32;
            }
        }
        self.ymax_q()
    }

    /// Parse a harvest description of the form used by config files:
    ///
    /// ```text
    /// kind = uniform-discrete   # point | uniform-discrete | explicit-pmf
    /// quantum = 1.0
    /// ymax = 4                  # quanta; point mass sits at ymax
    /// pmf = 0.25 0.5 0.25       # explicit-pmf only, over 0..len-1 quanta
    /// ```
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut quantum = None;
        let mut ymax = None;
        let mut pmf: Option<Vec<f64>> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "harvest config line {}: expected `key = value`, got {raw:?}",
                    lineno + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kind" => kind = Some(value.to_string()),
                "quantum" => {
                    quantum = Some(value.parse::<f64>().map_err(|e| {
                        Error::InvalidParameter(format!("harvest quantum {value:?}: {e}"))
                    })?)
                }
                "ymax" => {
                    ymax = Some(value.parse::<u32>().map_err(|e| {
                        Error::InvalidParameter(format!("harvest ymax {value:?}: {e}"))
                    })?)
                }
                "pmf" => {
                    let entries = value
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            s.parse::<f64>().map_err(|e| {
                                Error::InvalidParameter(format!("harvest pmf entry {s:?}: {e}"))
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    pmf = Some(entries);
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "harvest config: unknown key {other:?}"
                    )))
                }
            }
        }
        let kind = kind
            .ok_or_else(|| Error::InvalidParameter("harvest config: missing `kind`".into()))?;
        let quantum = quantum
            .ok_or_else(|| Error::InvalidParameter("harvest config: missing `quantum`".into()))?;
        match kind.as_str() {
            "point" => {
                let y = ymax.ok_or_else(|| {
                    Error::InvalidParameter("harvest config: `point` needs `ymax`".into())
                })?;
                Self::point(quantum, y)
            }
            "uniform-discrete" => {
                let y = ymax.ok_or_else(|| {
                    Error::InvalidParameter("harvest config: `uniform-discrete` needs `ymax`".into())
                })?;
                Self::uniform(quantum, y)
            }
            "explicit-pmf" => {
                let pmf = pmf.ok_or_else(|| {
                    Error::InvalidParameter("harvest config: `explicit-pmf` needs `pmf`".into())
                })?;
                if let Some(y) = ymax {
                    if y as usize != pmf.len() - 1 {
                        return Err(Error::InvalidParameter(format!(
                            "harvest config: ymax {} disagrees with pmf length {}",
                            y,
                            pmf.len()
                        )));
                    }
                }
                Self::from_pmf(quantum, pmf)
            }
            other => Err(Error::InvalidParameter(format!(
                "harvest config: unknown kind {other:?}"
            ))),
        }
    }
}

/// AWGN channel with noise variance `sigma2` per use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    sigma2: f64,
}

impl ChannelModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive and finite, got {sigma2}"
            )));
        }
        Ok(Self { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// Buffer level and harvest of one slot, in quanta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotState {
    pub e_q: u32,
    pub y_q: u32,
}

impl SlotState {
    pub fn new(grid: &EnergyGrid, e_q: u32, y_q: u32) -> Result<Self> {
        if e_q > grid.gamma_q() {
            return Err(Error::InvalidParameter(format!(
                "buffer level {e_q} exceeds capacity {}",
                grid.gamma_q()
            )));
        }
        if y_q > grid.ymax_q() {
            return Err(Error::InvalidParameter(format!(
                "harvest {y_q} exceeds grid maximum {}",
                grid.ymax_q()
            )));
        }
        Ok(Self { e_q, y_q })
    }

    /// Energy available for transmission this slot, in quanta.
    pub fn available_q(&self) -> u32 {
        self.e_q + self.y_q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn buffer_step_matches_hand_computed_updates() {
        assert_eq!(buffer_step(3, 2, 1, 4).unwrap(), 4);
        assert_eq!(buffer_step(0, 0, 0, 4).unwrap(), 0);
        assert_eq!(buffer_step(2, 3, 5, 4).unwrap(), 0);
        assert_eq!(buffer_step(4, 0, 0, 4).unwrap(), 4);
        assert_eq!(buffer_step(1, 2, 2, 4).unwrap(), 1);
        assert_eq!(buffer_step(0, 3, 0, 2).unwrap(), 2);
    }

    #[test]
    fn buffer_step_rejects_overspending() {
        let err = buffer_step(1, 1, 3, 4).unwrap_err();
        match err {
            Error::CausalityViolation {
                spent_q,
                available_q,
            } => {
                assert_eq!(spent_q, 3);
                assert_eq!(available_q, 2);
            }
            other => panic!("expected causality violation, got {other:?}"),
        }
    }

    #[test]
    fn buffer_step_stays_on_grid_for_all_small_instances() {
        for gamma in 0..=4u32 {
            for e in 0..=gamma {
                for y in 0..=4u32 {
                    for t in 0..=e + y {
                        let next = buffer_step(e, y, t, gamma).unwrap();
                        assert!(next <= gamma);
                        // Spending nothing can only be truncated downwards.
                        assert!(next <= e + y - t);
                        // Spending everything always empties the buffer.
                        if t == e + y {
                            assert_eq!(next, 0);
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn buffer_step_is_monotone_in_spend(e in 0u32..64, y in 0u32..64, gamma in 0u32..64) {
            let e = e.min(gamma);
            let mut prev = None;
            for t in 0..=e + y {
                let next = buffer_step(e, y, t, gamma).unwrap();
                if let Some(p) = prev {
                    prop_assert!(next <= p);
                }
                prev = Some(next);
            }
        }
    }

    #[test]
    fn available_states_covers_buffer_plus_harvest() {
        let grid = EnergyGrid::new(1.0, 4, 2).unwrap();
        assert_eq!(available_states(&grid), (0..=6).collect::<Vec<_>>());
        assert_eq!(grid.state_count(), 7);
    }

    #[test]
    fn harvest_means_match_hand_values() {
        let uniform = HarvestModel::uniform(1.0, 4).unwrap();
        assert_abs_diff_eq!(uniform.mean_energy(), 2.0, epsilon = 1e-15);
        let point = HarvestModel::point(0.5, 3).unwrap();
        assert_abs_diff_eq!(point.mean_energy(), 1.5, epsilon = 1e-15);
        let skew = HarvestModel::from_pmf(2.0, vec![0.5, 0.25, 0.25]).unwrap();
        assert_abs_diff_eq!(skew.mean_energy(), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn harvest_rejects_bad_pmfs() {
        assert!(HarvestModel::from_pmf(1.0, vec![]).is_err());
        assert!(HarvestModel::from_pmf(1.0, vec![0.5, 0.6]).is_err());
        assert!(HarvestModel::from_pmf(1.0, vec![1.5, -0.5]).is_err());
        assert!(HarvestModel::from_pmf(0.0, vec![1.0]).is_err());
        assert!(HarvestModel::from_pmf(f64::NAN, vec![1.0]).is_err());
    }

    #[test]
    fn sampling_is_deterministic_for_a_fixed_seed() {
        let harvest = HarvestModel::uniform(1.0, 4).unwrap();
        let draw = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..32).map(|_| harvest.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn sampling_frequencies_match_the_pmf() {
        let harvest = HarvestModel::from_pmf(1.0, vec![0.2, 0.5, 0.3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 200_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[harvest.sample(&mut rng) as usize] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / n as f64;
            assert_abs_diff_eq!(freq, harvest.pmf()[i], epsilon = 5e-3);
        }
    }

    #[test]
    fn harvest_config_round_trips_each_kind() {
        let point = HarvestModel::from_config_str(
            "kind = point\nquantum = 0.5\nymax = 2\n",
        )
        .unwrap();
        assert_eq!(point, HarvestModel::point(0.5, 2).unwrap());

        let uniform = HarvestModel::from_config_str(
            "# comment\nkind = uniform-discrete\nquantum = 1.0\nymax = 3\n",
        )
        .unwrap();
        assert_eq!(uniform, HarvestModel::uniform(1.0, 3).unwrap());

        let pmf = HarvestModel::from_config_str(
            "kind = explicit-pmf\nquantum = 2.0\npmf = 0.25, 0.5, 0.25\n",
        )
        .unwrap();
        assert_eq!(
            pmf,
            HarvestModel::from_pmf(2.0, vec![0.25, 0.5, 0.25]).unwrap()
        );
    }

    #[test]
    fn harvest_config_rejects_malformed_input() {
        assert!(HarvestModel::from_config_str("kind = fancy\nquantum = 1\nymax = 1").is_err());
        assert!(HarvestModel::from_config_str("quantum = 1\nymax = 1").is_err());
        assert!(HarvestModel::from_config_str("kind = point\nymax = 1").is_err());
        assert!(HarvestModel::from_config_str("kind = point\nquantum = 1").is_err());
        assert!(HarvestModel::from_config_str("kind = explicit-pmf\nquantum = 1").is_err());
        assert!(HarvestModel::from_config_str("bogus line").is_err());
        assert!(
            HarvestModel::from_config_str("kind = explicit-pmf\nquantum = 1\nymax = 5\npmf = 1.0")
                .is_err()
        );
    }

    #[test]
    fn slot_state_validates_against_the_grid() {
        let grid = EnergyGrid::new(1.0, 4, 2).unwrap();
        let s = SlotState::new(&grid, 3, 2).unwrap();
        assert_eq!(s.available_q(), 5);
        assert!(SlotState::new(&grid, 5, 0).is_err());
        assert!(SlotState::new(&grid, 0, 3).is_err());
    }

    #[test]
    fn channel_model_validates_noise() {
        assert!(ChannelModel::new(1.0).is_ok());
        assert!(ChannelModel::new(0.0).is_err());
        assert!(ChannelModel::new(-1.0).is_err());
        assert!(ChannelModel::new(f64::INFINITY).is_err());
    }

    #[test]
    fn grid_harvest_consistency_is_enforced() {
        let grid = EnergyGrid::new(1.0, 4, 2).unwrap();
        let ok = HarvestModel::uniform(1.0, 2).unwrap();
        assert!(grid.validate_harvest(&ok).is_ok());
        let wrong_quantum = HarvestModel::uniform(0.5, 2).unwrap();
        assert!(grid.validate_harvest(&wrong_quantum).is_err());
        let wrong_ymax = HarvestModel::uniform(1.0, 3).unwrap();
        assert!(grid.validate_harvest(&wrong_ymax).is_err());
    }
}
