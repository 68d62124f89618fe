//! Sliding-window iterative decoding.
//!
//! Each round walks the window from its oldest row to its newest, decodes
//! every row with a nonzero syndrome and immediately flips the declared bits
//! together with all of their copies. Rows below the window are final: a
//! correction that would touch one of them is dropped.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::bch::{BchCode, DecodeOutcome, FailureReason};
use crate::interleaver::{MapTable, Pos};
use crate::zipper::{flip_set, Buffer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheduling {
    /// Attempt every row with a nonzero syndrome in every round.
    Exhaustive,
    /// Skip rows whose bits have not changed since their last attempt.
    FreshOnly,
}

impl Scheduling {
    pub fn name(self) -> &'static str {
        match self {
            Scheduling::Exhaustive => "exhaustive",
            Scheduling::FreshOnly => "fresh-only",
        }
    }
}

impl std::str::FromStr for Scheduling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.replace('_', "-").as_str() {
            "exhaustive" => Ok(Scheduling::Exhaustive),
            "fresh-only" | "fresh" => Ok(Scheduling::FreshOnly),
            other => Err(format!("unknown scheduling {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub window_rows: usize,
    pub max_rounds: usize,
    pub stride: usize,
    pub genie: bool,
    pub scheduling: Scheduling,
}

impl WindowConfig {
    /// Window of 8 real widths, 10 rounds, shifted by one real width.
    pub fn standard(real_width: usize) -> Self {
        Self::with_multiplier(real_width, 8)
    }

    pub fn with_multiplier(real_width: usize, multiplier: usize) -> Self {
        Self {
            window_rows: multiplier * real_width,
            max_rounds: 10,
            stride: real_width,
            genie: false,
            scheduling: Scheduling::FreshOnly,
        }
    }
}

/// Where the transmitted bits live, for miscorrection accounting and the genie.
#[derive(Debug, Clone, Copy)]
pub enum Truth<'a> {
    /// All-zero codeword stream: every stored one is an error.
    AllZero,
    /// The transmitter's buffer, kept in step with the receiver's.
    Reference(&'a Buffer),
}

impl Truth<'_> {
    #[inline]
    pub fn is_error(&self, rx: &Buffer, pos: Pos) -> bool {
        match self {
            Truth::AllZero => rx.bit(pos),
            Truth::Reference(tx) => rx.bit(pos) != tx.bit(pos),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WindowReport {
    pub rounds: usize,
    /// Decodes whose flips were applied.
    pub corrections: u64,
    pub flipped_bits: u64,
    pub decode_attempts: u64,
    /// Applied corrections that flipped at least one correct bit.
    pub miscorrections: u64,
    /// Decodes rejected because a root fell on a shortened position.
    pub detected_miscorrections: u64,
    pub genie_vetoes: u64,
    /// Corrections dropped because they would touch a retired row.
    pub frozen_vetoes: u64,
}

impl std::ops::AddAssign for WindowReport {
    fn add_assign(&mut self, o: Self) {
        self.rounds += o.rounds;
        self.corrections += o.corrections;
        self.flipped_bits += o.flipped_bits;
        self.decode_attempts += o.decode_attempts;
        self.miscorrections += o.miscorrections;
        self.detected_miscorrections += o.detected_miscorrections;
        self.genie_vetoes += o.genie_vetoes;
        self.frozen_vetoes += o.frozen_vetoes;
    }
}

/// Run up to `max_rounds` rounds over rows `top - M + 1 ..= top`.
pub fn decode_window(
    buffer: &mut Buffer,
    truth: Truth<'_>,
    map: &MapTable,
    code: &BchCode,
    config: &WindowConfig,
    top: i64,
) -> WindowReport {
    let mut report = WindowReport::default();
    let bottom = (top - config.window_rows as i64 + 1)
        .max(buffer.retired_below())
        .max(0);
    let top = top.min(buffer.next_row() - 1);
    if top < bottom {
        return report;
    }
    for round in 1..=config.max_rounds {
        report.rounds = round;
        let mut corrections = 0u64;
        for row in bottom..=top {
            if config.scheduling == Scheduling::FreshOnly && !buffer.is_fresh(row) {
                continue;
            }
            buffer.set_fresh(row, false);
            let syndromes = buffer.syndromes(row);
            if syndromes.is_zero() {
                continue;
            }
            report.decode_attempts += 1;
            let positions = match code.decode_syndromes(&syndromes) {
                DecodeOutcome::Corrected(p) => p,
                DecodeOutcome::Failure(FailureReason::OutOfRangeRoot) => {
                    report.detected_miscorrections += 1;
                    continue;
                }
                _ => continue,
            };
            let wrong = positions
                .iter()
                .any(|&j| !truth.is_error(buffer, Pos::new(row, j)));
            if wrong && config.genie {
                report.genie_vetoes += 1;
                continue;
            }
            let touches_frozen = positions.iter().any(|&j| {
                flip_set(map, Pos::new(row, j))
                    .iter()
                    .any(|p| p.row < bottom)
            });
            if touches_frozen {
                report.frozen_vetoes += 1;
                continue;
            }
            for &j in &positions {
                let set = buffer
                    .flip_bit(map, Pos::new(row, j))
                    .expect("flip set lies inside the retained window");
                report.flipped_bits += set.len() as u64;
            }
            report.miscorrections += wrong as u64;
            corrections += 1;
        }
        report.corrections += corrections;
        if corrections == 0 {
            break;
        }
    }
    report
}

/// Finalize the `stride` oldest unretired rows.
pub fn retire_rows(buffer: &mut Buffer, stride: usize) -> Range<i64> {
    buffer.retire(stride)
}
