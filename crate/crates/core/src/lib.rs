//! Zipper codes built from shortened BCH constituent codes.
//!
//! The crate provides GF(2^10) arithmetic and a shortened BCH codec with
//! shortening-based miscorrection detection, the staircase, chevron and
//! half-chevron interleaver maps, a streaming row encoder, a sliding-window
//! iterative hard-decision decoder, a binary symmetric channel Monte Carlo
//! engine and the analytic tools used to tabulate operating points.
//!
//! With the default `parallel` feature, sweeps run their points on a rayon
//! pool; without it they run sequentially.

pub mod analysis;
pub mod bch;
pub mod channel;
pub mod error;
pub mod gf;
pub mod interleaver;
pub mod window;
pub mod zipper;

pub use bch::{BchCode, DecodeOutcome, FailureReason, Syndromes};
pub use channel::{run_point, run_sweep, DataMode, PointSpec, SimStats, Simulation, StopRule};
pub use error::{Error, Result};
pub use gf::Field;
pub use interleaver::{InterleaverMap, MapFamily, MapTable, Pos, ZipperMap};
pub use window::{decode_window, Scheduling, WindowConfig};
pub use zipper::{encode_row, Buffer, ZipperParams};
