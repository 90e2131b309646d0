//! Measurement and modeling pipeline for the growth of online communities.
//!
//! Raw post archives are windowed by calendar month; each window yields
//! reply-network metrics (group betweenness centralization, rotating
//! leadership), language metrics (sentiment, emotionality, complexity) and
//! growth variables (joiners, size, age, launch phase, past activity). These
//! form a monthly panel that feeds Pearson correlation tables, a
//! principal-component maturity factor and random-intercept growth models.

pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod language;
pub mod mlm;
pub mod month;
pub mod netgraph;
pub mod panel;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use month::YearMonth;
