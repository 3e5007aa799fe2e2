//! Standard-library companion to `recounter-core`: compiled-machine files,
//! chunked stream scanning, the differential verification harness and the
//! benchmark helpers behind the `recounter` command.

pub mod bench;
pub mod format;
pub mod stream;
pub mod verify;

pub use recounter_core as core;
