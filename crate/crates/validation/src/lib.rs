//! Host crate for the end-to-end acceptance suite in `tests/acceptance.rs`.
//!
//! The suite is kept in its own package so that its long solver runs come
//! after the unit and property tests of the library and the CLI.
