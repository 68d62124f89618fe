//! Interleaver maps for zipper codes.
//!
//! A map sends every virtual position `(i, j)`, `j < m`, to the real position
//! `φ(i, j)` whose bit it copies. All three families here are strictly causal
//! (`φ₁(i, j) < i`) and periodic (`φ(i + ν, j) = φ(i, j) + (ν, 0)`).

use std::fmt;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A buffer position. Rows may be negative (the all-zero prefix).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub row: i64,
    pub col: usize,
}

impl Pos {
    pub const fn new(row: i64, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Virtual copies of one real bit. No family here copies a bit more than twice.
pub type Preimages = ArrayVec<Pos, 2>;

pub trait InterleaverMap {
    /// Row length.
    fn n(&self) -> usize;
    /// Virtual buffer width.
    fn m(&self) -> usize;
    /// Period ν in rows.
    fn period(&self) -> usize;
    /// φ(i, j) for `j < m`.
    fn phi(&self, pos: Pos) -> Pos;
    /// φ⁻¹(i', j') for a real position `j' >= m`.
    fn phi_inverse(&self, pos: Pos) -> Result<Preimages>;

    fn real_width(&self) -> usize {
        self.n() - self.m()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapFamily {
    Staircase,
    Chevron,
    HalfChevron,
}

impl MapFamily {
    pub const ALL: [MapFamily; 3] = [
        MapFamily::Staircase,
        MapFamily::Chevron,
        MapFamily::HalfChevron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapFamily::Staircase => "staircase",
            MapFamily::Chevron => "chevron",
            MapFamily::HalfChevron => "half-chevron",
        }
    }

    /// Row length for a real width `mbar`, if admissible.
    pub fn row_length(self, mbar: usize) -> Option<usize> {
        match self {
            MapFamily::Staircase => Some(2 * mbar),
            MapFamily::Chevron => Some(3 * mbar),
            MapFamily::HalfChevron => mbar.is_multiple_of(2).then_some(5 * mbar / 2),
        }
    }

    /// Whether `mbar` can be realized by this family.
    pub fn admits(self, mbar: usize) -> bool {
        mbar > 0 && self.row_length(mbar).is_some()
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MapFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "staircase" | "stc" => Ok(MapFamily::Staircase),
            "chevron" | "chev" => Ok(MapFamily::Chevron),
            "half-chevron" | "halfchevron" => Ok(MapFamily::HalfChevron),
            other => Err(Error::InvalidMap(format!("unknown family {other:?}"))),
        }
    }
}

fn check_virtual(m: usize, pos: Pos) {
    debug_assert!(pos.col < m, "column {} is not virtual (m = {m})", pos.col);
}

fn check_real(m: usize, n: usize, pos: Pos) -> Result<()> {
    if pos.col < m || pos.col >= n {
        Err(Error::NotReal {
            row: pos.row,
            col: pos.col,
        })
    } else {
        Ok(())
    }
}

/// Staircase map: `n = 2m`, period `m`, `φ(mq + s, j) = (m(q - 1) + j, m + s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Staircase {
    pub m: usize,
}

pub fn staircase_phi(m: usize, pos: Pos) -> Pos {
    let m_i = m as i64;
    let q = pos.row.div_euclid(m_i);
    let s = pos.row.rem_euclid(m_i);
    Pos::new(m_i * (q - 1) + pos.col as i64, m + s as usize)
}

impl InterleaverMap for Staircase {
    fn n(&self) -> usize {
        2 * self.m
    }
    fn m(&self) -> usize {
        self.m
    }
    fn period(&self) -> usize {
        self.m
    }
    fn phi(&self, pos: Pos) -> Pos {
        check_virtual(self.m, pos);
        staircase_phi(self.m, pos)
    }
    fn phi_inverse(&self, pos: Pos) -> Result<Preimages> {
        check_real(self.m, self.n(), pos)?;
        let m_i = self.m as i64;
        let s = (pos.col - self.m) as i64;
        let q = pos.row.div_euclid(m_i) + 1;
        let j = pos.row.rem_euclid(m_i) as usize;
        let mut out = Preimages::new();
        out.push(Pos::new(m_i * q + s, j));
        Ok(out)
    }
}

/// Chevron map with parameter `m'`: `m = 2m'`, `n = 3m'`, period 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chevron {
    pub m_prime: usize,
}

pub fn chevron_phi(m_prime: usize, pos: Pos) -> Pos {
    let mp = m_prime as i64;
    let j = pos.col as i64;
    if pos.col < m_prime {
        Pos::new(pos.row - j - 2 * mp - 1, (2 * mp + j) as usize)
    } else {
        Pos::new(pos.row - 2 * mp + j, (mp + j) as usize)
    }
}

impl InterleaverMap for Chevron {
    fn n(&self) -> usize {
        3 * self.m_prime
    }
    fn m(&self) -> usize {
        2 * self.m_prime
    }
    fn period(&self) -> usize {
        1
    }
    fn phi(&self, pos: Pos) -> Pos {
        check_virtual(self.m(), pos);
        chevron_phi(self.m_prime, pos)
    }
    fn phi_inverse(&self, pos: Pos) -> Result<Preimages> {
        check_real(self.m(), self.n(), pos)?;
        let mp = self.m_prime as i64;
        let jp = pos.col as i64;
        let mut out = Preimages::new();
        out.push(Pos::new(pos.row + jp + 1, (jp - 2 * mp) as usize));
        out.push(Pos::new(pos.row + 3 * mp - jp, (jp - mp) as usize));
        Ok(out)
    }
}

/// Half-chevron map with parameter `m'`: `m = 3m'`, `n = 5m'`, period 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfChevron {
    pub m_prime: usize,
}

pub fn halfchevron_phi(m_prime: usize, pos: Pos) -> Pos {
    let mp = m_prime as i64;
    let j = pos.col as i64;
    if pos.col < m_prime {
        Pos::new(pos.row - j - 4 * mp - 1, (3 * mp + j) as usize)
    } else {
        Pos::new(pos.row - 3 * mp + j, (2 * mp + j) as usize)
    }
}

impl InterleaverMap for HalfChevron {
    fn n(&self) -> usize {
        5 * self.m_prime
    }
    fn m(&self) -> usize {
        3 * self.m_prime
    }
    fn period(&self) -> usize {
        1
    }
    fn phi(&self, pos: Pos) -> Pos {
        check_virtual(self.m(), pos);
        halfchevron_phi(self.m_prime, pos)
    }
    fn phi_inverse(&self, pos: Pos) -> Result<Preimages> {
        check_real(self.m(), self.n(), pos)?;
        let mp = self.m_prime as i64;
        let jp = pos.col as i64;
        let mut out = Preimages::new();
        if jp < 4 * mp {
            out.push(Pos::new(pos.row + jp + mp + 1, (jp - 3 * mp) as usize));
        }
        out.push(Pos::new(pos.row + 5 * mp - jp, (jp - 2 * mp) as usize));
        Ok(out)
    }
}

/// One of the three families with concrete parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZipperMap {
    Staircase(Staircase),
    Chevron(Chevron),
    HalfChevron(HalfChevron),
}

impl ZipperMap {
    /// Map for real width `mbar = n - m`.
    pub fn new(family: MapFamily, mbar: usize) -> Result<Self> {
        if !family.admits(mbar) {
            return Err(Error::InvalidMap(format!(
                "{family} does not admit real width {mbar}"
            )));
        }
        Ok(match family {
            MapFamily::Staircase => ZipperMap::Staircase(Staircase { m: mbar }),
            MapFamily::Chevron => ZipperMap::Chevron(Chevron { m_prime: mbar }),
            MapFamily::HalfChevron => ZipperMap::HalfChevron(HalfChevron { m_prime: mbar / 2 }),
        })
    }

    pub fn family(&self) -> MapFamily {
        match self {
            ZipperMap::Staircase(_) => MapFamily::Staircase,
            ZipperMap::Chevron(_) => MapFamily::Chevron,
            ZipperMap::HalfChevron(_) => MapFamily::HalfChevron,
        }
    }

    /// The family parameter: `m` for staircase, `m'` otherwise.
    pub fn family_parameter(&self) -> usize {
        match self {
            ZipperMap::Staircase(s) => s.m,
            ZipperMap::Chevron(c) => c.m_prime,
            ZipperMap::HalfChevron(h) => h.m_prime,
        }
    }

    fn inner(&self) -> &dyn InterleaverMap {
        match self {
            ZipperMap::Staircase(s) => s,
            ZipperMap::Chevron(c) => c,
            ZipperMap::HalfChevron(h) => h,
        }
    }

    pub fn descriptor(&self) -> MapDescriptor {
        MapDescriptor {
            family: self.family(),
            parameter: self.family_parameter(),
            m: self.m(),
            n: self.n(),
            period: self.period(),
            memory: encoder_memory(self),
        }
    }
}

impl InterleaverMap for ZipperMap {
    fn n(&self) -> usize {
        self.inner().n()
    }
    fn m(&self) -> usize {
        self.inner().m()
    }
    fn period(&self) -> usize {
        self.inner().period()
    }
    fn phi(&self, pos: Pos) -> Pos {
        self.inner().phi(pos)
    }
    fn phi_inverse(&self, pos: Pos) -> Result<Preimages> {
        self.inner().phi_inverse(pos)
    }
}

/// Encoder memory: the largest row distance between a virtual bit and its source.
pub fn encoder_memory(map: &impl InterleaverMap) -> usize {
    let mut worst = 0;
    for i in 0..map.period() as i64 {
        for j in 0..map.m() {
            let src = map.phi(Pos::new(i, j));
            worst = worst.max((i - src.row) as usize);
        }
    }
    worst
}

/// Self-description written into simulation headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MapDescriptor {
    pub family: MapFamily,
    /// `m` for staircase, `m'` for chevron and half-chevron.
    pub parameter: usize,
    pub m: usize,
    pub n: usize,
    pub period: usize,
    pub memory: usize,
}

impl fmt::Display for MapDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "family={}", self.family)?;
        if self.family != MapFamily::Staircase {
            write!(f, " m'={}", self.parameter)?;
        }
        write!(
            f,
            " m={} n={} period={} memory={}",
            self.m, self.n, self.period, self.memory
        )
    }
}

/// Per-period lookup tables for φ and φ⁻¹, stored as row offsets.
///
/// Built from the closed form and cross-checked against it on construction.
#[derive(Debug, Clone)]
pub struct MapTable {
    map: ZipperMap,
    n: usize,
    m: usize,
    period: usize,
    memory: usize,
    // [phase * m + j] -> (i - φ₁, φ₂)
    phi: Vec<(u32, u32)>,
    // [phase * (n - m) + (j' - m)] -> [(i - i', j)]
    inverse: Vec<ArrayVec<(u32, u32), 2>>,
}

impl MapTable {
    pub fn new(map: ZipperMap) -> Result<Self> {
        let (n, m, period) = (map.n(), map.m(), map.period());
        let memory = encoder_memory(&map);
        let mut phi = Vec::with_capacity(period * m);
        let mut inverse = Vec::with_capacity(period * (n - m));
        // Use a steady-state base row so every offset is well defined.
        let base = (memory as i64 / period as i64 + 2) * period as i64;
        for phase in 0..period as i64 {
            let i = base + phase;
            for j in 0..m {
                let src = map.phi(Pos::new(i, j));
                if src.row >= i || src.col < m || src.col >= n {
                    return Err(Error::InvalidMap(format!(
                        "φ{} = {src} violates causality or range",
                        Pos::new(i, j)
                    )));
                }
                phi.push(((i - src.row) as u32, src.col as u32));
            }
            for jp in m..n {
                let pre = map.phi_inverse(Pos::new(i, jp))?;
                let mut row = ArrayVec::new();
                for p in pre {
                    if map.phi(p) != Pos::new(i, jp) {
                        return Err(Error::InvalidMap(format!(
                            "φ⁻¹({i}, {jp}) contains {p}, which maps elsewhere"
                        )));
                    }
                    row.push(((p.row - i) as u32, p.col as u32));
                }
                inverse.push(row);
            }
        }
        Ok(Self {
            map,
            n,
            m,
            period,
            memory,
            phi,
            inverse,
        })
    }

    pub fn from_family(family: MapFamily, mbar: usize) -> Result<Self> {
        Self::new(ZipperMap::new(family, mbar)?)
    }

    pub fn map(&self) -> &ZipperMap {
        &self.map
    }
    pub fn memory(&self) -> usize {
        self.memory
    }
    pub fn descriptor(&self) -> MapDescriptor {
        self.map.descriptor()
    }

    #[inline]
    fn phase(&self, row: i64) -> usize {
        row.rem_euclid(self.period as i64) as usize
    }

    /// φ via the lookup table.
    #[inline]
    pub fn source(&self, row: i64, col: usize) -> Pos {
        let (back, c) = self.phi[self.phase(row) * self.m + col];
        Pos::new(row - back as i64, c as usize)
    }

    /// φ⁻¹ via the lookup table; `col` must be real.
    #[inline]
    pub fn copies(&self, row: i64, col: usize) -> impl Iterator<Item = Pos> + '_ {
        let w = self.n - self.m;
        self.inverse[self.phase(row) * w + col - self.m]
            .iter()
            .map(move |&(fwd, c)| Pos::new(row + fwd as i64, c as usize))
    }
}

impl InterleaverMap for MapTable {
    fn n(&self) -> usize {
        self.n
    }
    fn m(&self) -> usize {
        self.m
    }
    fn period(&self) -> usize {
        self.period
    }
    fn phi(&self, pos: Pos) -> Pos {
        check_virtual(self.m, pos);
        self.source(pos.row, pos.col)
    }
    fn phi_inverse(&self, pos: Pos) -> Result<Preimages> {
        check_real(self.m, self.n, pos)?;
        Ok(self.copies(pos.row, pos.col).collect())
    }
}
