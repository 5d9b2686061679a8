//! Geotagging of webpages: gazetteer candidate extraction, context-window
//! classification and an exact per-page 0-1 integer linear program that
//! resolves one canonical (city, state, country) per page.

pub mod candidates;
pub mod context;
mod error;
pub mod gazetteer;
pub mod ilpmodel;
pub mod pipeline;
pub mod selection;
pub mod solver;
pub mod textprep;
#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
