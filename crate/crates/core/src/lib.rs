//! Finite-length constant-composition shaping over a nonlinear WDM fiber link.
//!
//! The pipeline is: CCDM amplitude blocks ([`shaping`]) → PAS QAM frames with
//! intra- or inter-DM pairing and an optional FEC-block interleaver
//! ([`mapping`]) → RRC-shaped WDM field through a split-step multi-span link
//! ([`channel`]) → matched-filter receiver and effective SNR ([`receiver`]).
//! [`metrics`] holds the sequence statistics and [`harness`] the sweep driver.

pub mod channel;
pub mod dsp;
pub mod formats;
pub mod harness;
pub mod mapping;
pub mod metrics;
pub mod receiver;
pub mod rng;
pub mod shaping;
