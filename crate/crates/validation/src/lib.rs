//! Acceptance criteria for the workspace, run as `cargo test -p qglab-validation`.
//! The suite lives in `tests/acceptance.rs`.
