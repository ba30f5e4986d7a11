//! Information-theoretic machinery for simultaneous-message-passing (SMP)
//! protocols.
//!
//! The crate is organised bottom-up:
//!
//! - [`probcore`]: finite distributions, entropy, divergence, mutual information.
//! - [`channels`]: classical channels, Blahut–Arimoto capacity, derived channels.
//! - [`quantdm`]: small density operators and numerical checks of quantum
//!   entropic inequalities.
//! - [`substate`]: the classical substate decomposition and one-shot
//!   rejection-sampling simulation of `P` from shared samples of `Q`.
//! - [`smp`]: executable SMP / one-way protocols, relations, and the protocol
//!   catalog (fingerprint Equality, `h`, `f`, `s`), plus random access codes.
//! - [`directsum`]: compiles a k-fold SMP protocol into a compressed
//!   single-instance protocol.
//! - [`io`]: CSV / JSON loaders for every file format accepted by the CLI.

pub mod channels;
pub mod directsum;
mod error;
pub mod io;
pub mod probcore;
pub mod quantdm;
pub mod radix;
pub mod rng;
pub mod smp;
pub mod substate;

pub use error::{Error, Result};
