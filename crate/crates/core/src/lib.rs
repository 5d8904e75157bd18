//! Tap success-rate prediction for rectangular touch targets.
//!
//! * [`model`] holds the success-rate model and inverse sizing.
//! * [`device`] converts logical design pixels to millimetres.
//! * [`layout`] parses layout documents and selects the elements to score.
//! * [`analysis`] scores a document on a device; [`report`] renders results.

pub mod analysis;
pub mod device;
pub mod layout;
pub mod model;
pub mod report;
