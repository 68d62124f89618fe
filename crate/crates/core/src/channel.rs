//! Binary symmetric channel Monte Carlo: drives the encoder and the window
//! decoder, tracks ground truth and accumulates BER statistics.

use std::fmt;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::bch::BchCode;
use crate::error::{Error, Result};
use crate::interleaver::{InterleaverMap, MapDescriptor, MapFamily, MapTable};
use crate::window::{decode_window, retire_rows, Truth, WindowConfig};
use crate::zipper::{encode_row, Buffer};

pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha); noise on stream 0, data on stream 1";

const NOISE_STREAM: u64 = 0;
const DATA_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub crossover: f64,
    pub seed: u64,
}

impl ChannelSpec {
    pub fn new(crossover: f64, seed: u64) -> Result<Self> {
        if !(0.0..=0.5).contains(&crossover) {
            return Err(Error::Config(format!(
                "crossover probability {crossover} outside [0, 0.5]"
            )));
        }
        Ok(Self { crossover, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataMode {
    /// Transmit the all-zero stream; the buffer holds the error pattern.
    ErrorDomain,
    /// Encode random information bits and compare against the transmitter.
    RandomData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_bits: u64,
    pub target_errors: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_bits: 1_000_000_000,
            target_errors: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    TargetErrors,
    MaxBits,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::TargetErrors => "target_errors",
            StopReason::MaxBits => "max_bits",
        })
    }
}

/// One simulation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub family: MapFamily,
    /// Real buffer width `n - m`.
    pub mbar: usize,
    pub t: usize,
    pub channel: ChannelSpec,
    pub window: WindowConfig,
    pub stop: StopRule,
    pub mode: DataMode,
}

impl PointSpec {
    /// Standard decoder settings for a family and real width.
    pub fn new(
        family: MapFamily,
        mbar: usize,
        t: usize,
        crossover: f64,
        seed: u64,
    ) -> Result<Self> {
        Ok(Self {
            family,
            mbar,
            t,
            channel: ChannelSpec::new(crossover, seed)?,
            window: WindowConfig::standard(mbar),
            stop: StopRule::default(),
            mode: DataMode::ErrorDomain,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SimStats {
    /// Real bits of retired rows past burn-in.
    pub transmitted_bits: u64,
    pub pre_fec_errors: u64,
    pub post_fec_errors: u64,
    pub rows_decoded: u64,
    pub decode_attempts: u64,
    pub miscorrection_events: u64,
    pub corrected_events: u64,
    pub detected_miscorrections: u64,
    pub genie_vetoes: u64,
    pub frozen_vetoes: u64,
    /// Retired rows that were not codewords; only counted when verification is on.
    pub invalid_retired_rows: u64,
    pub stop_reason: Option<StopReason>,
}

impl SimStats {
    pub fn pre_fec_ber(&self) -> f64 {
        ratio(self.pre_fec_errors, self.transmitted_bits)
    }
    pub fn post_fec_ber(&self) -> f64 {
        ratio(self.post_fec_errors, self.transmitted_bits)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Streaming transmitter, channel and receiver for one point.
pub struct Simulation {
    spec: PointSpec,
    code: BchCode,
    map: MapTable,
    rx: Buffer,
    tx: Option<Buffer>,
    noise: ChaCha8Rng,
    data: ChaCha8Rng,
    gaps: Option<Geometric>,
    /// Correct bits left before the next channel error.
    until_error: u64,
    channel_errors: Vec<u32>,
    burn_in_rows: i64,
    verify_retired: bool,
    stats: SimStats,
    scratch: Vec<usize>,
}

impl Simulation {
    pub fn new(spec: PointSpec) -> Result<Self> {
        let map = MapTable::from_family(spec.family, spec.mbar)
            .map_err(|e| Error::Config(e.to_string()))?;
        let code = BchCode::with_default_field(spec.t, map.n())?;
        if spec.mbar <= code.r() || map.m() > code.k() {
            return Err(Error::InfeasibleRate {
                rate: 1.0 - code.r() as f64 / spec.mbar as f64,
                mbar: spec.mbar,
                r: code.r(),
            });
        }
        let w = &spec.window;
        if w.window_rows == 0 || w.stride == 0 || w.stride > w.window_rows || w.max_rounds == 0 {
            return Err(Error::Config(format!(
                "window needs 0 < stride <= rows and rounds > 0, got {w:?}"
            )));
        }
        ChannelSpec::new(spec.channel.crossover, spec.channel.seed)?;
        let capacity = map.memory().max(w.window_rows) + w.stride;
        let gaps = if spec.channel.crossover > 0.0 {
            Some(Geometric::new(spec.channel.crossover).map_err(|e| Error::Config(e.to_string()))?)
        } else {
            None
        };
        let mut noise = ChaCha8Rng::seed_from_u64(spec.channel.seed);
        noise.set_stream(NOISE_STREAM);
        let mut data = ChaCha8Rng::seed_from_u64(spec.channel.seed);
        data.set_stream(DATA_STREAM);
        let until_error = match &gaps {
            Some(g) => g.sample(&mut noise),
            None => u64::MAX,
        };
        Ok(Self {
            rx: Buffer::new(&code, capacity),
            tx: (spec.mode == DataMode::RandomData).then(|| Buffer::new(&code, capacity)),
            burn_in_rows: (w.window_rows + map.memory()) as i64,
            spec,
            code,
            map,
            noise,
            data,
            gaps,
            until_error,
            channel_errors: vec![0; capacity],
            verify_retired: false,
            stats: SimStats::default(),
            scratch: Vec::new(),
        })
    }

    /// Check every retired row is a codeword (slow; for validation runs).
    pub fn set_verify_retired(&mut self, on: bool) {
        self.verify_retired = on;
    }

    /// Number of leading rows excluded from the statistics.
    pub fn set_burn_in_rows(&mut self, rows: usize) {
        self.burn_in_rows = rows as i64;
    }

    pub fn stats(&self) -> &SimStats {
        &self.stats
    }
    pub fn code(&self) -> &BchCode {
        &self.code
    }
    pub fn map(&self) -> &MapTable {
        &self.map
    }
    pub fn receiver(&self) -> &Buffer {
        &self.rx
    }
    pub fn transmitter(&self) -> Option<&Buffer> {
        self.tx.as_ref()
    }

    /// Channel error columns for the next row's real part.
    fn draw_noise(&mut self) -> Vec<usize> {
        let (m, n) = (self.map.m(), self.map.n());
        let mut cols = std::mem::take(&mut self.scratch);
        cols.clear();
        let mut col = m as u64;
        while let Some(g) = &self.gaps {
            let remaining = n as u64 - col;
            if self.until_error >= remaining {
                self.until_error -= remaining;
                break;
            }
            col += self.until_error;
            cols.push(col as usize);
            col += 1;
            self.until_error = g.sample(&mut self.noise);
        }
        cols
    }

    fn ingest(&mut self) -> Result<()> {
        let (m, n) = (self.map.m(), self.map.n());
        let noise = self.draw_noise();
        let row = match &mut self.tx {
            None => self.rx.ingest_row(&self.map, &noise)?,
            Some(tx) => {
                let info: Vec<bool> = (0..n - self.code.r() - m)
                    .map(|_| self.data.random())
                    .collect();
                let mut real = encode_row(tx, &self.map, &self.code, &info)?;
                for &c in &noise {
                    real[c - m] ^= true;
                }
                let ones: Vec<usize> = (m..n).filter(|&c| real[c - m]).collect();
                self.rx.ingest_row(&self.map, &ones)?
            }
        };
        let slot = row.rem_euclid(self.channel_errors.len() as i64) as usize;
        self.channel_errors[slot] = noise.len() as u32;
        self.scratch = noise;
        Ok(())
    }

    fn retire(&mut self, count: usize) -> Result<()> {
        let m = self.map.m();
        for row in retire_rows(&mut self.rx, count) {
            if self.verify_retired {
                let valid = match &self.tx {
                    None => self.rx.syndromes(row).is_zero(),
                    Some(_) => {
                        self.code.decode(&self.rx.row_bits(row)?)?
                            == crate::bch::DecodeOutcome::NoError
                    }
                };
                self.stats.invalid_retired_rows += !valid as u64;
            }
            if row < self.burn_in_rows {
                continue;
            }
            let errors = match &self.tx {
                None => self.rx.ones(row).filter(|&c| c >= m).count(),
                Some(tx) => self
                    .rx
                    .row_words(row)
                    .iter()
                    .zip(tx.row_words(row))
                    .enumerate()
                    .map(|(w, (a, b))| {
                        let mut diff = a ^ b;
                        // mask out virtual columns
                        let lo = w * 64;
                        if lo + 64 <= m {
                            diff = 0;
                        } else if lo < m {
                            diff &= !0u64 << (m - lo);
                        }
                        diff.count_ones() as usize
                    })
                    .sum(),
            };
            let slot = row.rem_euclid(self.channel_errors.len() as i64) as usize;
            self.stats.transmitted_bits += (self.map.n() - m) as u64;
            self.stats.pre_fec_errors += self.channel_errors[slot] as u64;
            self.stats.post_fec_errors += errors as u64;
            self.stats.rows_decoded += 1;
        }
        Ok(())
    }

    /// Receive one stride of rows, decode the window and retire what leaves it.
    pub fn shift(&mut self) -> Result<()> {
        let w = self.spec.window;
        for _ in 0..w.stride {
            self.ingest()?;
        }
        let top = self.rx.next_row() - 1;
        let truth = match &self.tx {
            None => Truth::AllZero,
            Some(tx) => Truth::Reference(tx),
        };
        let report = decode_window(&mut self.rx, truth, &self.map, &self.code, &w, top);
        self.stats.decode_attempts += report.decode_attempts;
        self.stats.miscorrection_events += report.miscorrections;
        self.stats.corrected_events += report.corrections;
        self.stats.detected_miscorrections += report.detected_miscorrections;
        self.stats.genie_vetoes += report.genie_vetoes;
        self.stats.frozen_vetoes += report.frozen_vetoes;

        // Rows below the next window's bottom are final.
        let next_bottom = top + w.stride as i64 - w.window_rows as i64 + 1;
        let pending = next_bottom - self.rx.retired_below();
        if pending > 0 {
            self.retire(pending as usize)?;
        }
        Ok(())
    }

    fn stop_reason(&self) -> Option<StopReason> {
        if self.stats.post_fec_errors >= self.spec.stop.target_errors {
            Some(StopReason::TargetErrors)
        } else if self.stats.transmitted_bits >= self.spec.stop.max_bits {
            Some(StopReason::MaxBits)
        } else {
            None
        }
    }

    /// Shift until a stop condition holds.
    pub fn run(&mut self) -> Result<SimStats> {
        loop {
            self.shift()?;
            if let Some(reason) = self.stop_reason() {
                self.stats.stop_reason = Some(reason);
                return Ok(self.stats);
            }
        }
    }
}

pub fn run_point(spec: &PointSpec) -> Result<SimStats> {
    Simulation::new(*spec)?.run()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub spec: PointSpec,
    pub map: MapDescriptor,
    pub r: usize,
    pub stats: SimStats,
}

impl PointResult {
    pub fn rate(&self) -> f64 {
        1.0 - self.r as f64 / self.spec.mbar as f64
    }
}

/// Results in input order; failed points keep their error.
#[derive(Debug)]
pub struct SweepReport {
    pub results: Vec<Result<PointResult>>,
}

impl SweepReport {
    pub fn is_complete(&self) -> bool {
        self.results.iter().all(|r| r.is_ok())
    }
}

fn run_one(spec: &PointSpec) -> Result<PointResult> {
    let mut sim = Simulation::new(*spec)?;
    let stats = sim.run()?;
    Ok(PointResult {
        spec: *spec,
        map: sim.map().descriptor(),
        r: sim.code().r(),
        stats,
    })
}

/// Run independent points, in parallel when the `parallel` feature is on.
/// `workers = 0` uses the default pool size.
pub fn run_sweep(points: &[PointSpec], workers: usize) -> SweepReport {
    SweepReport {
        results: map_points(points, workers, run_one),
    }
}

#[cfg(feature = "parallel")]
pub fn map_points<T, F>(points: &[PointSpec], workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&PointSpec) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if workers == 1 {
        return points.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build();
    match pool {
        Ok(pool) => pool.install(|| points.par_iter().map(&f).collect()),
        Err(_) => points.par_iter().map(&f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_points<T, F>(points: &[PointSpec], _workers: usize, f: F) -> Vec<T>
where
    F: Fn(&PointSpec) -> T,
{
    points.iter().map(f).collect()
}

pub const CSV_COLUMNS: [&str; 19] = [
    "family",
    "rate",
    "mbar",
    "n",
    "m",
    "r",
    "t",
    "p",
    "window_rows",
    "max_rounds",
    "scheduling",
    "genie",
    "seed",
    "tx_bits",
    "pre_fec_ber",
    "post_fec_ber",
    "miscorrection_events",
    "corrected_events",
    "stop_reason",
];

/// One CSV data row (no trailing newline).
pub fn csv_row(result: &PointResult) -> String {
    let s = &result.spec;
    let st = &result.stats;
    [
        s.family.to_string(),
        format!("{:e}", result.rate()),
        s.mbar.to_string(),
        result.map.n.to_string(),
        result.map.m.to_string(),
        result.r.to_string(),
        s.t.to_string(),
        format!("{:e}", s.channel.crossover),
        s.window.window_rows.to_string(),
        s.window.max_rounds.to_string(),
        s.window.scheduling.name().to_string(),
        s.window.genie.to_string(),
        s.channel.seed.to_string(),
        st.transmitted_bits.to_string(),
        format!("{:e}", st.pre_fec_ber()),
        format!("{:e}", st.post_fec_ber()),
        st.miscorrection_events.to_string(),
        st.corrected_events.to_string(),
        st.stop_reason.map(|r| r.to_string()).unwrap_or_default(),
    ]
    .join(",")
}

/// Write the header block, the column line and one row per successful point.
/// `header` lines are emitted as `# ` comments before the built-in ones.
pub fn write_csv(out: &mut impl Write, header: &[String], report: &SweepReport) -> io::Result<()> {
    writeln!(out, "# zipper-core {}", env!("CARGO_PKG_VERSION"))?;
    for line in header {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# rng: {RNG_ALGORITHM}")?;
    writeln!(
        out,
        "# primitive_polynomial: {:#x}",
        crate::gf::DEFAULT_PRIMITIVE_POLY
    )?;
    for (i, result) in report.results.iter().enumerate() {
        match result {
            Ok(r) => writeln!(out, "# point {i}: {}", r.map)?,
            Err(e) => writeln!(out, "# point {i}: FAILED: {e}")?,
        }
    }
    if !report.is_complete() {
        writeln!(out, "# partial: some points failed")?;
    }
    writeln!(out, "{}", CSV_COLUMNS.join(","))?;
    for r in report.results.iter().flatten() {
        writeln!(out, "{}", csv_row(r))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::Scheduling;

    fn spec(family: MapFamily, mbar: usize, p: f64, seed: u64) -> PointSpec {
        let mut s = PointSpec::new(family, mbar, 2, p, seed).unwrap();
        s.stop = StopRule {
            max_bits: 2_000_000,
            target_errors: u64::MAX,
        };
        s
    }

    #[test]
    fn noiseless_point_is_clean() {
        let s = spec(MapFamily::Chevron, 40, 0.0, 1);
        let st = run_point(&s).unwrap();
        assert_eq!((st.pre_fec_errors, st.post_fec_errors), (0, 0));
        assert_eq!(st.stop_reason, Some(StopReason::MaxBits));
    }

    #[test]
    fn channel_rate_matches_crossover() {
        let mut s = spec(MapFamily::Staircase, 100, 0.05, 2);
        s.window.max_rounds = 1;
        let st = run_point(&s).unwrap();
        let sigma = (0.05 * 0.95 / st.transmitted_bits as f64).sqrt();
        assert!(
            (st.pre_fec_ber() - 0.05).abs() < 4.0 * sigma,
            "{}",
            st.pre_fec_ber()
        );
    }

    #[test]
    fn same_seed_same_stats() {
        let s = spec(MapFamily::HalfChevron, 40, 0.03, 3);
        assert_eq!(run_point(&s).unwrap(), run_point(&s).unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ChannelSpec::new(0.6, 0).is_err());
        let mut s = spec(MapFamily::Staircase, 20, 0.01, 0);
        assert!(matches!(
            Simulation::new(s),
            Err(Error::InfeasibleRate { .. })
        ));
        s.mbar = 101;
        s.family = MapFamily::HalfChevron;
        assert!(matches!(Simulation::new(s), Err(Error::Config(_))));
        let mut s = spec(MapFamily::Staircase, 100, 0.01, 0);
        s.window.stride = 0;
        assert!(Simulation::new(s).is_err());
    }

    #[test]
    fn error_domain_matches_random_data() {
        for family in MapFamily::ALL {
            let mut a = spec(family, 40, 0.06, 11);
            a.stop.max_bits = 300_000;
            let mut b = a;
            b.mode = DataMode::RandomData;
            let (sa, sb) = (run_point(&a).unwrap(), run_point(&b).unwrap());
            assert!(sa.post_fec_errors > 0, "{family}: pick a noisier point");
            assert_eq!(sa, sb, "{family}");
        }
    }

    #[test]
    fn truth_track_matches_brute_force_diff() {
        let mut s = spec(MapFamily::Chevron, 40, 0.03, 12);
        s.mode = DataMode::RandomData;
        let mut sim = Simulation::new(s).unwrap();
        let mut mirror = Simulation::new(PointSpec {
            mode: DataMode::ErrorDomain,
            ..s
        })
        .unwrap();
        for _ in 0..40 {
            sim.shift().unwrap();
            mirror.shift().unwrap();
            let (rx, tx) = (sim.receiver(), sim.transmitter().unwrap());
            for row in rx.base_row()..rx.next_row() {
                let diff: Vec<usize> = rx
                    .row_bits(row)
                    .unwrap()
                    .iter()
                    .zip(tx.row_bits(row).unwrap())
                    .enumerate()
                    .filter(|(_, (a, b))| **a != *b)
                    .map(|(j, _)| j)
                    .collect();
                let err: Vec<usize> = mirror.receiver().ones(row).collect();
                assert_eq!(diff, err);
            }
        }
    }

    #[test]
    fn fresh_only_and_exhaustive_agree() {
        let a = spec(MapFamily::Staircase, 60, 0.025, 5);
        let b = PointSpec {
            window: WindowConfig {
                scheduling: Scheduling::Exhaustive,
                ..a.window
            },
            ..a
        };
        let (sa, sb) = (run_point(&a).unwrap(), run_point(&b).unwrap());
        assert_eq!(sa.post_fec_errors, sb.post_fec_errors);
        assert_eq!(sa.corrected_events, sb.corrected_events);
        assert!(sa.decode_attempts <= sb.decode_attempts);
    }

    #[test]
    fn csv_layout() {
        let s = spec(MapFamily::Staircase, 100, 0.02, 1);
        let report = run_sweep(
            &[PointSpec {
                stop: StopRule {
                    max_bits: 100_000,
                    target_errors: 100,
                },
                ..s
            }],
            1,
        );
        let mut out = Vec::new();
        write_csv(&mut out, &["config: test".into()], &report).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 2);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 19);
        assert_eq!(
            &fields[..8],
            &["staircase", "8e-1", "100", "200", "100", "20", "2", "2e-2"]
        );
    }
}
