//! End-to-end acceptance checks for `meshwalk` live in `tests/acceptance.rs`.
