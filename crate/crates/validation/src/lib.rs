//! Workspace-level acceptance gate. The checks live in `tests/acceptance.rs`.
