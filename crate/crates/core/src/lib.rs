//! Equilibrium analysis of 802.11 MAC contention between rational senders,
//! plus a slotted CSMA/CA simulator used to cross-check the analytic
//! predictions and to exercise a time-share-fair contention controller.
//!
//! * [`phy`]: airtime and throughput arithmetic.
//! * [`channel`]: frame success models (tables, Rayleigh block fading, RBAR).
//! * [`game`]: stagegame payoffs, pure Nash equilibria, desirability.
//! * [`sim`]: discrete-event DCF / EDCF / DCF* simulator.
//! * [`cli`]: scenario files and the `analyze` / `simulate` / `sweep` commands.

pub mod channel;
pub mod game;
pub mod phy;
pub mod sim;
pub mod cli;
