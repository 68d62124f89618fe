//! Zipping pair parameters, the windowed buffer and the streaming row encoder.

use std::fmt::Write as _;

use arrayvec::ArrayVec;
use num_integer::Integer;

use crate::bch::{BchCode, Syndromes};
use crate::error::{Error, Result};
use crate::interleaver::{InterleaverMap, MapTable, Pos};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZipperParams {
    pub n: usize,
    pub m: usize,
    pub r: usize,
}

impl ZipperParams {
    pub fn new(n: usize, m: usize, r: usize) -> Result<Self> {
        if r >= n || m == 0 || m > n - r {
            return Err(Error::Config(format!(
                "need 0 < m <= n - r, got n={n} m={m} r={r}"
            )));
        }
        Ok(Self { n, m, r })
    }

    pub fn k(&self) -> usize {
        self.n - self.r
    }

    /// Real buffer width `n - m`, the number of transmitted bits per row.
    pub fn real_width(&self) -> usize {
        self.n - self.m
    }

    /// Information bits per row.
    pub fn info_width(&self) -> usize {
        self.n - self.r - self.m
    }

    pub fn rate(&self) -> f64 {
        rate(self.n, self.m, self.r)
    }

    /// The rate `1 - r/(n - m)` as a reduced fraction.
    pub fn rate_fraction(&self) -> (usize, usize) {
        let den = self.n - self.m;
        let num = den - self.r;
        let g = num.gcd(&den);
        (num / g, den / g)
    }
}

pub fn rate(n: usize, m: usize, r: usize) -> f64 {
    assert!(n > m, "rate needs n > m");
    1.0 - r as f64 / (n - m) as f64
}

/// Every position that holds a copy of one real bit.
pub type FlipSet = ArrayVec<Pos, 3>;

/// Positions flipped together when the decoder declares an error at `pos`.
pub fn flip_set(map: &MapTable, pos: Pos) -> FlipSet {
    let real = if pos.col < map.m() {
        map.source(pos.row, pos.col)
    } else {
        pos
    };
    let mut set = FlipSet::new();
    set.push(real);
    set.extend(map.copies(real.row, real.col));
    set
}

/// A window of the semi-infinite buffer kept in a ring of row slots.
///
/// Each row carries its constituent syndromes, updated on every bit toggle,
/// and a freshness flag raised whenever one of its bits changes.
#[derive(Debug, Clone)]
pub struct Buffer {
    n: usize,
    words: usize,
    capacity: usize,
    bits: Vec<u64>,
    syndromes: Vec<Syndromes>,
    fresh: Vec<bool>,
    base_row: i64,
    next_row: i64,
    retired_below: i64,
    position_syndromes: Vec<Syndromes>,
}

impl Buffer {
    /// Buffer for rows of a constituent code; syndromes are tracked.
    pub fn new(code: &BchCode, capacity: usize) -> Self {
        let position_syndromes = (0..code.n()).map(|j| code.position_syndrome(j)).collect();
        Self::with_position_syndromes(code.n(), capacity, position_syndromes)
    }

    /// Bit storage only; syndromes stay zero.
    pub fn untracked(n: usize, capacity: usize) -> Self {
        Self::with_position_syndromes(n, capacity, vec![Syndromes::default(); n])
    }

    fn with_position_syndromes(
        n: usize,
        capacity: usize,
        position_syndromes: Vec<Syndromes>,
    ) -> Self {
        assert!(capacity > 0);
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            capacity,
            bits: vec![0; words * capacity],
            syndromes: vec![Syndromes::default(); capacity],
            fresh: vec![false; capacity],
            base_row: 0,
            next_row: 0,
            retired_below: 0,
            position_syndromes,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn capacity(&self) -> usize {
        self.capacity
    }
    /// Oldest row still in storage.
    pub fn base_row(&self) -> i64 {
        self.base_row
    }
    /// Index the next pushed row will get.
    pub fn next_row(&self) -> i64 {
        self.next_row
    }

    /// Rows below this index are final and must not change.
    pub fn retired_below(&self) -> i64 {
        self.retired_below
    }

    /// Mark up to `count` more rows (never past the newest) as final and
    /// return their indices.
    pub fn retire(&mut self, count: usize) -> std::ops::Range<i64> {
        let start = self.retired_below;
        self.retired_below = (start + count as i64).min(self.next_row);
        start..self.retired_below
    }

    #[inline]
    pub fn contains(&self, row: i64) -> bool {
        row >= self.base_row && row < self.next_row
    }

    #[inline]
    fn slot(&self, row: i64) -> usize {
        row.rem_euclid(self.capacity as i64) as usize
    }

    fn check_row(&self, row: i64, col: usize) -> Result<()> {
        if row < self.base_row && row >= 0 {
            Err(Error::BufferUnderrun {
                row,
                base: self.base_row,
            })
        } else if row >= self.next_row || col >= self.n {
            Err(Error::OutOfWindow { row, col })
        } else {
            Ok(())
        }
    }

    /// Append an all-zero row, evicting the oldest one if the ring is full.
    pub fn push_row(&mut self) -> i64 {
        if (self.next_row - self.base_row) as usize == self.capacity {
            self.base_row += 1;
        }
        let row = self.next_row;
        let slot = self.slot(row);
        self.bits[slot * self.words..(slot + 1) * self.words].fill(0);
        self.syndromes[slot] = Syndromes::default();
        self.fresh[slot] = true;
        self.next_row += 1;
        row
    }

    /// Bit at `pos`; rows before 0 read as zero.
    pub fn get(&self, pos: Pos) -> Result<bool> {
        if pos.row < 0 && pos.col < self.n {
            return Ok(false);
        }
        self.check_row(pos.row, pos.col)?;
        Ok(self.bit(pos))
    }

    /// Unchecked read of a retained position.
    #[inline]
    pub fn bit(&self, pos: Pos) -> bool {
        debug_assert!(self.contains(pos.row));
        let w = self.slot(pos.row) * self.words + pos.col / 64;
        self.bits[w] >> (pos.col % 64) & 1 == 1
    }

    /// Toggle a single stored bit without touching its copies.
    #[inline]
    pub fn toggle(&mut self, pos: Pos) {
        debug_assert!(self.contains(pos.row) && pos.col < self.n);
        let slot = self.slot(pos.row);
        self.bits[slot * self.words + pos.col / 64] ^= 1 << (pos.col % 64);
        self.syndromes[slot] ^= self.position_syndromes[pos.col];
        self.fresh[slot] = true;
    }

    #[inline]
    pub fn syndromes(&self, row: i64) -> Syndromes {
        self.syndromes[self.slot(row)]
    }

    #[inline]
    pub fn is_fresh(&self, row: i64) -> bool {
        self.fresh[self.slot(row)]
    }

    #[inline]
    pub fn set_fresh(&mut self, row: i64, fresh: bool) {
        let slot = self.slot(row);
        self.fresh[slot] = fresh;
    }

    pub fn row_words(&self, row: i64) -> &[u64] {
        let slot = self.slot(row);
        &self.bits[slot * self.words..(slot + 1) * self.words]
    }

    pub fn row_bits(&self, row: i64) -> Result<Vec<bool>> {
        self.check_row(row, 0)?;
        Ok((0..self.n).map(|j| self.bit(Pos::new(row, j))).collect())
    }

    /// Positions set in a retained row.
    pub fn ones(&self, row: i64) -> impl Iterator<Item = usize> + '_ {
        self.row_words(row)
            .iter()
            .enumerate()
            .flat_map(|(w, &word)| {
                let mut rest = word;
                std::iter::from_fn(move || {
                    if rest == 0 {
                        None
                    } else {
                        let b = rest.trailing_zeros() as usize;
                        rest &= rest - 1;
                        Some(w * 64 + b)
                    }
                })
            })
    }

    /// Append a received row: virtual bits are copied from their current
    /// sources, real bits are set at `real_ones` (columns `>= m`).
    pub fn ingest_row(&mut self, map: &MapTable, real_ones: &[usize]) -> Result<i64> {
        let row = self.next_row;
        self.check_sources(map, row)?;
        self.push_row();
        for j in 0..map.m() {
            let src = map.source(row, j);
            if src.row >= 0 && self.bit(src) {
                self.toggle(Pos::new(row, j));
            }
        }
        for &j in real_ones {
            if j < map.m() || j >= self.n {
                return Err(Error::NotReal { row, col: j });
            }
            self.toggle(Pos::new(row, j));
        }
        Ok(row)
    }

    fn check_sources(&self, map: &MapTable, row: i64) -> Result<()> {
        let full = (self.next_row - self.base_row) as usize == self.capacity;
        let lowest = self.base_row + full as i64;
        let deepest = (row - map.memory() as i64).max(0);
        if deepest < lowest {
            return Err(Error::BufferUnderrun {
                row: deepest,
                base: lowest,
            });
        }
        Ok(())
    }

    /// Flip the bit at `pos` together with all of its copies that exist yet.
    /// Every touched row becomes fresh.
    pub fn flip_bit(&mut self, map: &MapTable, pos: Pos) -> Result<FlipSet> {
        self.check_row(pos.row, pos.col)?;
        let mut set = flip_set(map, pos);
        set.retain(|p| p.row < self.next_row);
        if let Some(p) = set.iter().find(|p| !self.contains(p.row)) {
            return Err(Error::OutOfWindow {
                row: p.row,
                col: p.col,
            });
        }
        for &p in &set {
            self.toggle(p);
        }
        Ok(set)
    }

    /// First retained virtual position whose value differs from its retained source.
    pub fn copy_violation(&self, map: &MapTable) -> Option<Pos> {
        for row in self.base_row..self.next_row {
            for j in 0..map.m() {
                let src = map.source(row, j);
                let expected = if src.row < 0 {
                    false
                } else if self.contains(src.row) {
                    self.bit(src)
                } else {
                    continue;
                };
                if self.bit(Pos::new(row, j)) != expected {
                    return Some(Pos::new(row, j));
                }
            }
        }
        None
    }

    /// Debug snapshot: one line per retained row, `row hex`, least significant
    /// column first within each 64-bit word.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for row in self.base_row..self.next_row {
            write!(out, "{row}").unwrap();
            out.push(' ');
            for w in self.row_words(row) {
                write!(out, "{w:016x}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Encode the next row of `buffer`: copy virtual bits through the map, place
/// `info` in columns `m..n-r`, append parity. Returns the transmitted bits
/// (columns `m..n`).
pub fn encode_row(
    buffer: &mut Buffer,
    map: &MapTable,
    code: &BchCode,
    info: &[bool],
) -> Result<Vec<bool>> {
    let (n, m, r) = (code.n(), map.m(), code.r());
    if map.n() != n {
        return Err(Error::Config(format!(
            "map row length {} != code length {n}",
            map.n()
        )));
    }
    if m > n - r {
        return Err(Error::Config(format!(
            "virtual width {m} exceeds code dimension {}",
            n - r
        )));
    }
    if info.len() != n - r - m {
        return Err(Error::Length {
            expected: n - r - m,
            got: info.len(),
        });
    }
    let row = buffer.next_row;
    buffer.check_sources(map, row)?;

    let mut word = vec![false; n];
    for (j, w) in word.iter_mut().enumerate().take(m) {
        let src = map.source(row, j);
        *w = src.row >= 0 && buffer.bit(src);
    }
    word[m..n - r].copy_from_slice(info);
    let parity = code.encode(&word[..n - r])?;
    word[n - r..].copy_from_slice(&parity);

    buffer.push_row();
    for (j, _) in word.iter().enumerate().filter(|(_, &b)| b) {
        buffer.toggle(Pos::new(row, j));
    }
    Ok(word.split_off(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bch::DecodeOutcome;
    use crate::interleaver::MapFamily;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rates() {
        assert_eq!(ZipperParams::new(160, 80, 20).unwrap().rate(), 0.75);
        assert_eq!(
            ZipperParams::new(300, 200, 20).unwrap().rate_fraction(),
            (4, 5)
        );
        assert!((ZipperParams::new(300, 200, 20).unwrap().rate() - 0.8).abs() < 1e-15);
        assert_eq!(rate(10, 4, 0), 1.0);
        assert!(ZipperParams::new(100, 90, 20).is_err());
        assert!(ZipperParams::new(100, 0, 20).is_err());
    }

    fn setup(family: MapFamily, mbar: usize) -> (BchCode, MapTable) {
        let table = MapTable::from_family(family, mbar).unwrap();
        let code = BchCode::with_default_field(2, table.n()).unwrap();
        (code, table)
    }

    #[test]
    fn zero_stream_encodes_to_zero() {
        let (code, map) = setup(MapFamily::Chevron, 40);
        let mut buf = Buffer::new(&code, 400);
        let info = vec![false; code.n() - code.r() - map.m()];
        for _ in 0..300 {
            assert!(encode_row(&mut buf, &map, &code, &info)
                .unwrap()
                .iter()
                .all(|&b| !b));
        }
    }

    #[test]
    fn encoded_rows_are_codewords_with_consistent_copies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for family in MapFamily::ALL {
            let (code, map) = setup(family, 40);
            let mut buf = Buffer::new(&code, map.memory() + 10);
            let k_info = code.n() - code.r() - map.m();
            for _ in 0..3 * map.memory().max(map.period()) {
                let info: Vec<bool> = (0..k_info).map(|_| rng.random()).collect();
                let real = encode_row(&mut buf, &map, &code, &info).unwrap();
                let row = buf.next_row() - 1;
                let bits = buf.row_bits(row).unwrap();
                assert_eq!(&bits[map.m()..], real.as_slice());
                assert_eq!(code.decode(&bits).unwrap(), DecodeOutcome::NoError);
            }
            assert_eq!(buf.copy_violation(&map), None, "{family}");
        }
    }

    #[test]
    fn staircase_virtual_copy_example() {
        let (code, map) = setup(MapFamily::Staircase, 40);
        let mut buf = Buffer::new(&code, 200);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..120 {
            let info: Vec<bool> = (0..code.n() - code.r() - map.m())
                .map(|_| rng.random())
                .collect();
            encode_row(&mut buf, &map, &code, &info).unwrap();
        }
        // φ(40, 0) = (0, 40) for m = 40
        assert_eq!(map.source(40, 0), Pos::new(0, 40));
        assert_eq!(
            buf.get(Pos::new(40, 0)).unwrap(),
            buf.get(Pos::new(0, 40)).unwrap()
        );
    }

    fn toy_staircase(capacity: usize) -> (Buffer, MapTable) {
        let map = MapTable::from_family(MapFamily::Staircase, 4).unwrap();
        (Buffer::untracked(map.n(), capacity), map)
    }

    #[test]
    fn flip_sets() {
        let (mut buf, map) = toy_staircase(50);
        for _ in 0..20 {
            buf.ingest_row(&map, &[]).unwrap();
        }
        let mut set: Vec<Pos> = buf
            .flip_bit(&map, Pos::new(2, 4))
            .unwrap()
            .into_iter()
            .collect();
        set.sort();
        assert_eq!(set, vec![Pos::new(2, 4), Pos::new(4, 2)]);
        assert!(buf.bit(Pos::new(2, 4)) && buf.bit(Pos::new(4, 2)));
        // Flipping the virtual copy undoes both.
        buf.flip_bit(&map, Pos::new(4, 2)).unwrap();
        assert!(buf.ones(2).next().is_none() && buf.ones(4).next().is_none());

        let (code, map) = setup(MapFamily::Chevron, 10);
        let mut buf = Buffer::new(&code, 200);
        for _ in 0..100 {
            buf.ingest_row(&map, &[]).unwrap();
        }
        assert_eq!(buf.flip_bit(&map, Pos::new(50, 25)).unwrap().len(), 3);
        assert_eq!(buf.copy_violation(&map), None);
    }

    #[test]
    fn flip_before_copies_exist() {
        let (mut buf, map) = toy_staircase(50);
        buf.ingest_row(&map, &[]).unwrap();
        // Row 0's copies live in rows 4..8, which have not arrived yet.
        assert_eq!(
            buf.flip_bit(&map, Pos::new(0, 5)).unwrap().as_slice(),
            &[Pos::new(0, 5)]
        );
        assert!(buf.flip_bit(&map, Pos::new(3, 5)).is_err());
        // A later row picks up the corrected value.
        for _ in 0..6 {
            buf.ingest_row(&map, &[]).unwrap();
        }
        assert_eq!(map.copies(0, 5).next().unwrap(), Pos::new(5, 0));
        assert!(buf.bit(Pos::new(5, 0)));
    }

    #[test]
    fn eviction_errors() {
        let (mut buf, map) = toy_staircase(4);
        // memory is 7 > capacity, so row 4 may read the evicted row 0
        for _ in 0..4 {
            buf.ingest_row(&map, &[]).unwrap();
        }
        assert!(matches!(
            buf.ingest_row(&map, &[]),
            Err(Error::BufferUnderrun { .. })
        ));
        assert_eq!(buf.get(Pos::new(0, 0)), Ok(false));
        buf.push_row();
        assert!(matches!(
            buf.get(Pos::new(0, 0)),
            Err(Error::BufferUnderrun { .. })
        ));
        assert_eq!(buf.get(Pos::new(-3, 1)), Ok(false));
    }

    #[test]
    fn syndromes_track_contents() {
        let (code, map) = setup(MapFamily::HalfChevron, 20);
        let mut buf = Buffer::new(&code, 200);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..150 {
            let ones: Vec<usize> = (map.m()..code.n())
                .filter(|_| rng.random_bool(0.05))
                .collect();
            buf.ingest_row(&map, &ones).unwrap();
        }
        for _ in 0..50 {
            let row = rng.random_range(100..150);
            let col = rng.random_range(0..code.n());
            buf.flip_bit(&map, Pos::new(row, col)).unwrap();
        }
        for row in buf.base_row()..buf.next_row() {
            assert_eq!(
                buf.syndromes(row),
                code.syndromes(&buf.row_bits(row).unwrap()).unwrap()
            );
        }
        assert_eq!(buf.copy_violation(&map), None);
    }

    #[test]
    fn dump_format() {
        let (mut buf, map) = toy_staircase(8);
        buf.ingest_row(&map, &[4, 7]).unwrap();
        buf.ingest_row(&map, &[]).unwrap();
        assert_eq!(buf.dump(), "0 0000000000000090\n1 0000000000000000\n");
    }
}
