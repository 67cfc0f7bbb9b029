//! Reference acceptance campaign for `pac-core`; see `tests/acceptance.rs`.
