//! Capacity and achievable rates for an AWGN channel whose transmitter is
//! powered by an energy harvester with a finite buffer.
//!
//! Energy arrives in discrete quanta, is stored in a buffer of capacity
//! `gamma` and every transmitted amplitude `x` drains `x^2` from whatever is
//! currently available. The crate is organised bottom-up:
//!
//! - [`ehmodel`] — energy grid, harvest process, channel noise, and the
//!   buffer update rule shared by everything else.
//! - [`markov`] — transition matrices induced by transmission policies,
//!   ergodic decomposition and stationary distributions.
//! - [`infotheory`] — mutual information over the AWGN channel by
//!   quadrature, Blahut–Arimoto optimisation of peak-constrained inputs.
//! - [`capacity`] — policy evaluation, brute-force and coordinate-ascent
//!   capacity searches, greedy baselines, and the infinite-buffer limit.
//! - [`truncgauss`] — Monte-Carlo rate estimation for the truncated
//!   Gaussian signalling scheme on a continuous-state buffer.
//! - [`shannonstrat`] — strategy-letter (order-m) lower bounds obtained by
//!   coding over short blocks of buffer states.

pub mod capacity;
pub mod ehmodel;
pub mod infotheory;
pub mod markov;
pub mod shannonstrat;
pub mod truncgauss;

mod error;

pub use capacity::{Policy, PolicyKind, RateReport};
pub use ehmodel::{ChannelModel, EnergyGrid, HarvestModel, SlotState};
pub use error::{Error, Result};
pub use infotheory::{InputDistribution, MiResult};
