//! Command-line tool and HTTP service around `qamar-core`.
//!
//! Both front ends drive the same [`qamar_core::Pipeline`]: analyze the
//! query, propose candidates, let the user keep or drop them, then search.
//! The HTTP API keeps the proposal between calls in an in-memory session so
//! a user interface can validate candidates before the search is sent.

pub mod app;
pub mod cli;
pub mod http;
pub mod session;
pub mod views;
