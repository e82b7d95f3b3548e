//! An abstract interpreter for the Universal toy language.
//!
//! Programs go through the [`frontend`], a JSON configuration selects and
//! combines abstract domains ([`config`]), and the [`engine`] computes sound
//! invariants, either to completion or step by step under the
//! [`interactive`] debugger. The [`protocol`] module hosts the analysis
//! behind a message-based worker interface.

pub mod bundled;
pub mod config;
pub mod engine;
pub mod frontend;
pub mod interactive;
pub mod io;
pub mod numeric;
pub mod poly;
pub mod protocol;
pub mod strings;
