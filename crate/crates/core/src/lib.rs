//! Outage and transmission capacity of finite frequency-hopping ad hoc
//! networks with Nakagami fading and log-normal shadowing.
//!
//! ```
//! use fhtc::averaged::{averaged_outage, AveragedOutageInput, ShadowedConfig};
//! use fhtc::cpfsk::{db_to_linear, sinr_threshold, CapacityModel};
//! use fhtc::network::Annulus;
//!
//! # fn main() -> fhtc::Result<()> {
//! let capacity = CapacityModel::builtin();
//! let beta_db = sinr_threshold(0.59, 0.62, 0.0, &capacity)?;
//! let inp = AveragedOutageInput::uniform(
//!     50,
//!     Annulus::new(0.25, 2.0)?,
//!     1.0,
//!     3.0,
//!     1,
//!     1.0,
//!     32.0,
//!     db_to_linear(beta_db),
//!     db_to_linear(10.0),
//!     8.0,
//! );
//! let shadow = ShadowedConfig { draws: 500, ..ShadowedConfig::default() };
//! let eps = averaged_outage(&inp, &shadow)?;
//! assert!(eps.value > 0.0 && eps.value < 1.0);
//! # Ok(())
//! # }
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

pub mod averaged;
pub mod conditional;
pub mod cpfsk;
pub mod error;
pub mod exec;
pub mod network;
pub mod optimizer;
pub mod oracle;
pub mod special;
pub mod tc;

pub use error::{Error, Result};
