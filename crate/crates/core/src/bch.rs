//! Shortened binary BCH codes over GF(2^10).
//!
//! Bit position `j` of a length-`n` word is the coefficient of `x^(1022 - j)` in
//! the length-1023 parent word; parent positions `n..1023` are shortened and
//! always zero. The first `k = n - r` positions carry information and the last
//! `r` carry parity.
//!
//! Decoding works from the odd syndromes `S1, S3, S5` (even ones follow from
//! `S_2i = S_i^2`). For `t = 2` the error locator is solved in closed form
//! through a quadratic-root table; `t = 3` goes through Berlekamp-Massey and a
//! Chien search over all 1023 parent positions. A root that lands on a
//! shortened position marks the decode as a detected miscorrection.

use arrayvec::ArrayVec;

use crate::error::{Error, Result};
use crate::gf::{Elem, Field, GROUP_ORDER};

pub const MAX_RADIUS: usize = 3;
pub const PARENT_LENGTH: usize = GROUP_ORDER;

/// Odd syndromes `[S1, S3, S5]`; entries beyond `t` stay zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Syndromes(pub [Elem; MAX_RADIUS]);

impl Syndromes {
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0 == [0; MAX_RADIUS]
    }
}

impl std::ops::BitXorAssign for Syndromes {
    #[inline]
    fn bitxor_assign(&mut self, rhs: Self) {
        self.0[0] ^= rhs.0[0];
        self.0[1] ^= rhs.0[1];
        self.0[2] ^= rhs.0[2];
    }
}

pub type ErrorPositions = ArrayVec<usize, MAX_RADIUS>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureReason {
    /// No pattern of weight at most `t` explains the syndromes.
    Uncorrectable,
    /// The locator has a root on a shortened (untransmitted) position.
    OutOfRangeRoot,
    /// The genie rejected a correction that disagrees with the true errors.
    GenieVeto,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    NoError,
    /// Positions to flip, sorted ascending, each `< n`.
    Corrected(ErrorPositions),
    Failure(FailureReason),
}

impl DecodeOutcome {
    pub fn is_corrected(&self) -> bool {
        matches!(self, DecodeOutcome::Corrected(_))
    }
}

#[derive(Debug, Clone)]
pub struct BchCode {
    field: Field,
    t: usize,
    n: usize,
    generator: u64,
    r: usize,
    /// Syndrome contribution of a single 1 at each parent position `0..1023`.
    position_syndromes: Vec<Syndromes>,
    /// For `c` with `Tr(c) = 0`, one root `y` of `y^2 + y = c`; `u16::MAX` otherwise.
    quadratic_roots: Vec<Elem>,
}

/// Minimal polynomial of `α^e` as a bitmask (bit `d` = coefficient of `x^d`).
pub fn minimal_polynomial(field: &Field, e: usize) -> u64 {
    let mut coset = Vec::new();
    let mut c = e % GROUP_ORDER;
    loop {
        coset.push(c);
        c = (c * 2) % GROUP_ORDER;
        if c == e % GROUP_ORDER {
            break;
        }
    }
    // Product of (x + α^c) with coefficients in GF(2^10); they collapse to {0, 1}.
    let mut poly: Vec<Elem> = vec![1];
    for &c in &coset {
        let root = field.alpha_pow(c as i64);
        let mut next = vec![0 as Elem; poly.len() + 1];
        for (d, &coef) in poly.iter().enumerate() {
            next[d + 1] ^= coef;
            next[d] ^= field.mul(coef, root);
        }
        poly = next;
    }
    poly.iter().enumerate().fold(0u64, |acc, (d, &coef)| {
        debug_assert!(coef <= 1);
        acc | ((coef as u64) << d)
    })
}

fn poly_degree(p: u64) -> usize {
    63 - p.leading_zeros() as usize
}

fn gf2_mul(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    for d in 0..64 {
        if b >> d & 1 == 1 {
            acc ^= a << d;
        }
    }
    acc
}

impl BchCode {
    pub fn new(field: Field, t: usize, n: usize) -> Result<Self> {
        if !(1..=MAX_RADIUS).contains(&t) {
            return Err(Error::UnsupportedRadius(t));
        }
        let mut generator = 1u64;
        let mut used: Vec<u64> = Vec::new();
        for e in (1..2 * t).step_by(2) {
            let mp = minimal_polynomial(&field, e);
            if !used.contains(&mp) {
                used.push(mp);
                generator = gf2_mul(generator, mp);
            }
        }
        let r = poly_degree(generator);
        if n <= r || n > PARENT_LENGTH {
            return Err(Error::InvalidShortening { n, r });
        }

        let position_syndromes = (0..PARENT_LENGTH)
            .map(|j| {
                let e = (PARENT_LENGTH - 1 - j) as i64;
                let mut s = Syndromes::default();
                for (slot, power) in (1..2 * t as i64).step_by(2).enumerate() {
                    s.0[slot] = field.alpha_pow(e * power);
                }
                s
            })
            .collect();

        let mut quadratic_roots = vec![u16::MAX; crate::gf::FIELD_SIZE];
        for y in 0..crate::gf::FIELD_SIZE as Elem {
            let c = field.mul(y, y) ^ y;
            if quadratic_roots[c as usize] == u16::MAX {
                quadratic_roots[c as usize] = y;
            }
        }

        Ok(Self {
            field,
            t,
            n,
            generator,
            r,
            position_syndromes,
            quadratic_roots,
        })
    }

    /// Shortened BCH code over the default field.
    pub fn with_default_field(t: usize, n: usize) -> Result<Self> {
        Self::new(Field::default(), t, n)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn t(&self) -> usize {
        self.t
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn k(&self) -> usize {
        self.n - self.r
    }
    /// Generator polynomial as a bitmask, bit `d` = coefficient of `x^d`.
    pub fn generator(&self) -> u64 {
        self.generator
    }

    #[inline]
    pub fn position_syndrome(&self, j: usize) -> Syndromes {
        self.position_syndromes[j]
    }

    /// Systematic parity for `info` (length `k`).
    pub fn encode(&self, info: &[bool]) -> Result<Vec<bool>> {
        if info.len() != self.k() {
            return Err(Error::Length {
                expected: self.k(),
                got: info.len(),
            });
        }
        let r = self.r;
        let mask = (1u64 << r) - 1;
        let feedback = self.generator & mask;
        let mut reg = 0u64;
        for &bit in info {
            let fb = bit as u64 ^ (reg >> (r - 1) & 1);
            reg = (reg << 1) & mask;
            if fb == 1 {
                reg ^= feedback;
            }
        }
        Ok((0..r).map(|l| reg >> (r - 1 - l) & 1 == 1).collect())
    }

    pub fn syndromes(&self, word: &[bool]) -> Result<Syndromes> {
        if word.len() != self.n {
            return Err(Error::Length {
                expected: self.n,
                got: word.len(),
            });
        }
        let mut s = Syndromes::default();
        for (j, _) in word.iter().enumerate().filter(|(_, &b)| b) {
            s ^= self.position_syndromes[j];
        }
        Ok(s)
    }

    pub fn decode(&self, word: &[bool]) -> Result<DecodeOutcome> {
        Ok(self.decode_syndromes(&self.syndromes(word)?))
    }

    /// Like [`decode`](Self::decode), but any correction that is not contained
    /// in `true_errors` becomes `Failure(GenieVeto)`.
    pub fn genie_decode(&self, word: &[bool], true_errors: &[usize]) -> Result<DecodeOutcome> {
        let outcome = self.decode(word)?;
        Ok(genie_filter(outcome, |j| true_errors.contains(&j)))
    }

    #[inline]
    pub fn decode_syndromes(&self, s: &Syndromes) -> DecodeOutcome {
        if s.is_zero() {
            return DecodeOutcome::NoError;
        }
        match self.t {
            1 => self.single_error(s.0[0]),
            2 => self.decode_t2(s.0[0], s.0[1]),
            _ => self.decode_berlekamp_massey(s),
        }
    }

    #[inline]
    fn position_of_locator(&self, x: Elem) -> usize {
        PARENT_LENGTH - 1 - self.field.log(x)
    }

    fn single_error(&self, s1: Elem) -> DecodeOutcome {
        if s1 == 0 {
            return DecodeOutcome::Failure(FailureReason::Uncorrectable);
        }
        let j = self.position_of_locator(s1);
        if j >= self.n {
            return DecodeOutcome::Failure(FailureReason::OutOfRangeRoot);
        }
        let mut pos = ErrorPositions::new();
        pos.push(j);
        DecodeOutcome::Corrected(pos)
    }

    fn decode_t2(&self, s1: Elem, s3: Elem) -> DecodeOutcome {
        let f = &self.field;
        if s1 == 0 {
            return DecodeOutcome::Failure(FailureReason::Uncorrectable);
        }
        let s1_cubed = f.mul(f.mul(s1, s1), s1);
        if s3 == s1_cubed {
            return self.single_error(s1);
        }
        // Locators are the roots of z^2 + S1 z + (S3/S1 + S1^2); substitute z = S1 y.
        let c = f.div(s3 ^ s1_cubed, s1_cubed);
        let y = self.quadratic_roots[c as usize];
        if y == u16::MAX {
            return DecodeOutcome::Failure(FailureReason::Uncorrectable);
        }
        let a = self.position_of_locator(f.mul(s1, y));
        let b = self.position_of_locator(f.mul(s1, y ^ 1));
        if a >= self.n || b >= self.n {
            return DecodeOutcome::Failure(FailureReason::OutOfRangeRoot);
        }
        let mut pos = ErrorPositions::new();
        pos.push(a.min(b));
        pos.push(a.max(b));
        DecodeOutcome::Corrected(pos)
    }

    /// Berlekamp-Massey followed by a Chien search over every parent position.
    /// Valid for any `t`; the `t = 2` closed form is checked against it.
    pub fn decode_berlekamp_massey(&self, s: &Syndromes) -> DecodeOutcome {
        if s.is_zero() {
            return DecodeOutcome::NoError;
        }
        let f = &self.field;
        let two_t = 2 * self.t;
        // Full syndrome sequence S1..S_2t.
        let mut synd = vec![0 as Elem; two_t + 1];
        for i in 1..=two_t {
            synd[i] = if i % 2 == 1 {
                s.0[i / 2]
            } else {
                f.mul(synd[i / 2], synd[i / 2])
            };
        }

        let mut lambda = vec![0 as Elem; two_t + 1];
        let mut prev = vec![0 as Elem; two_t + 1];
        lambda[0] = 1;
        prev[0] = 1;
        let mut len = 0usize;
        let mut shift = 1usize;
        let mut prev_disc: Elem = 1;
        for step in 0..two_t {
            let mut disc = synd[step + 1];
            for i in 1..=len {
                disc ^= f.mul(lambda[i], synd[step + 1 - i]);
            }
            if disc == 0 {
                shift += 1;
                continue;
            }
            let scale = f.div(disc, prev_disc);
            let snapshot = lambda.clone();
            for i in shift..=two_t {
                lambda[i] ^= f.mul(scale, prev[i - shift]);
            }
            if 2 * len <= step {
                len = step + 1 - len;
                prev = snapshot;
                prev_disc = disc;
                shift = 1;
            } else {
                shift += 1;
            }
        }
        let degree = (0..=two_t).rev().find(|&i| lambda[i] != 0).unwrap_or(0);
        if degree == 0 || degree > self.t || degree != len {
            return DecodeOutcome::Failure(FailureReason::Uncorrectable);
        }

        // Λ(α^-e) = 0 ⇔ α^e is a locator.
        let mut roots: ArrayVec<usize, MAX_RADIUS> = ArrayVec::new();
        for e in 0..PARENT_LENGTH {
            let mut acc: Elem = 0;
            for (i, &coef) in lambda.iter().enumerate().take(degree + 1) {
                if coef != 0 {
                    acc ^= f.mul(coef, f.alpha_pow(-((e * i) as i64)));
                }
            }
            if acc == 0 {
                if roots.is_full() {
                    return DecodeOutcome::Failure(FailureReason::Uncorrectable);
                }
                roots.push(PARENT_LENGTH - 1 - e);
            }
        }
        if roots.len() != degree {
            return DecodeOutcome::Failure(FailureReason::Uncorrectable);
        }
        if roots.iter().any(|&j| j >= self.n) {
            return DecodeOutcome::Failure(FailureReason::OutOfRangeRoot);
        }
        roots.sort_unstable();
        DecodeOutcome::Corrected(roots)
    }
}

/// Replace a correction by `GenieVeto` unless every position is a true error.
#[inline]
pub fn genie_filter(
    outcome: DecodeOutcome,
    is_true_error: impl Fn(usize) -> bool,
) -> DecodeOutcome {
    match outcome {
        DecodeOutcome::Corrected(pos) if !pos.iter().all(|&j| is_true_error(j)) => {
            DecodeOutcome::Failure(FailureReason::GenieVeto)
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn codeword(code: &BchCode, info: &[bool]) -> Vec<bool> {
        let mut w = info.to_vec();
        w.extend(code.encode(info).unwrap());
        w
    }

    fn random_info(code: &BchCode, rng: &mut impl Rng) -> Vec<bool> {
        (0..code.k()).map(|_| rng.random()).collect()
    }

    /// Remainder of x^e mod g by plain long division.
    fn x_pow_mod(e: usize, g: u64) -> u64 {
        let deg = poly_degree(g);
        let mut rem = vec![false; e + 1];
        rem[e] = true;
        for d in (deg..=e).rev() {
            if rem[d] {
                for i in 0..=deg {
                    if g >> i & 1 == 1 {
                        rem[d - deg + i] ^= true;
                    }
                }
            }
        }
        (0..deg).fold(0u64, |acc, d| acc | ((rem[d] as u64) << d))
    }

    fn coset_size(e: usize) -> usize {
        let mut c = (e * 2) % GROUP_ORDER;
        let mut size = 1;
        while c != e {
            c = (c * 2) % GROUP_ORDER;
            size += 1;
        }
        size
    }

    #[test]
    fn parity_counts() {
        assert_eq!(BchCode::with_default_field(1, 100).unwrap().r(), 10);
        assert_eq!(BchCode::with_default_field(2, 100).unwrap().r(), 20);
        assert_eq!(BchCode::with_default_field(3, 100).unwrap().r(), 30);
        // deg lcm(m1, m3, m5) = sum of distinct cyclotomic coset sizes
        assert_eq!(coset_size(1) + coset_size(3) + coset_size(5), 30);
        assert_eq!(
            PARENT_LENGTH - BchCode::with_default_field(2, 1023).unwrap().r(),
            1003
        );
    }

    #[test]
    fn generator_divides_x1023_minus_1() {
        for t in 1..=3 {
            let code = BchCode::with_default_field(t, 1023).unwrap();
            // x^1023 mod g == 1
            assert_eq!(x_pow_mod(1023, code.generator()), 1, "t = {t}");
        }
    }

    #[test]
    fn generator_vanishes_on_consecutive_powers() {
        let code = BchCode::with_default_field(3, 500).unwrap();
        let f = code.field();
        for e in 1..=6i64 {
            let mut acc = 0;
            for d in 0..=code.r() {
                if code.generator() >> d & 1 == 1 {
                    acc ^= f.alpha_pow(e * d as i64);
                }
            }
            assert_eq!(acc, 0, "g(α^{e}) != 0");
        }
    }

    #[test]
    fn invalid_parameters() {
        assert_eq!(
            BchCode::with_default_field(2, 20).unwrap_err(),
            Error::InvalidShortening { n: 20, r: 20 }
        );
        assert!(BchCode::with_default_field(2, 1024).is_err());
        assert_eq!(
            BchCode::with_default_field(4, 200).unwrap_err(),
            Error::UnsupportedRadius(4)
        );
        assert_eq!(
            BchCode::with_default_field(0, 200).unwrap_err(),
            Error::UnsupportedRadius(0)
        );
    }

    #[test]
    fn zero_info_encodes_to_zero() {
        let code = BchCode::with_default_field(2, 200).unwrap();
        assert!(code
            .encode(&vec![false; code.k()])
            .unwrap()
            .iter()
            .all(|&b| !b));
        assert!(code.encode(&[true]).is_err());
    }

    #[test]
    fn unit_info_parity_matches_long_division() {
        for (t, n) in [(1, 50), (2, 200), (3, 300)] {
            let code = BchCode::with_default_field(t, n).unwrap();
            let mut info = vec![false; code.k()];
            info[0] = true;
            let parity = code.encode(&info).unwrap();
            let rem = x_pow_mod(n - 1, code.generator());
            let expected: Vec<bool> = (0..code.r())
                .map(|l| rem >> (code.r() - 1 - l) & 1 == 1)
                .collect();
            assert_eq!(parity, expected);
        }
    }

    #[test]
    fn codewords_have_zero_syndromes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 1..=3 {
            let code = BchCode::with_default_field(t, 250).unwrap();
            for _ in 0..20 {
                let w = codeword(&code, &random_info(&code, &mut rng));
                assert!(code.syndromes(&w).unwrap().is_zero());
                assert_eq!(code.decode(&w).unwrap(), DecodeOutcome::NoError);
            }
        }
    }

    #[test]
    fn exhaustive_single_and_double_errors_small_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let code = BchCode::with_default_field(2, 60).unwrap();
        let base = codeword(&code, &random_info(&code, &mut rng));
        for a in 0..code.n() {
            let mut w = base.clone();
            w[a] ^= true;
            assert_eq!(
                code.decode(&w).unwrap(),
                DecodeOutcome::Corrected([a].into_iter().collect())
            );
            for b in a + 1..code.n() {
                let mut w2 = w.clone();
                w2[b] ^= true;
                assert_eq!(
                    code.decode(&w2).unwrap(),
                    DecodeOutcome::Corrected([a, b].into_iter().collect())
                );
            }
        }
    }

    #[test]
    fn t3_corrects_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let code = BchCode::with_default_field(3, 400).unwrap();
        for _ in 0..200 {
            let base = codeword(&code, &random_info(&code, &mut rng));
            let mut pos: Vec<usize> = Vec::new();
            while pos.len() < 3 {
                let j = rng.random_range(0..code.n());
                if !pos.contains(&j) {
                    pos.push(j);
                }
            }
            let mut w = base.clone();
            for &j in &pos {
                w[j] ^= true;
            }
            pos.sort_unstable();
            assert_eq!(
                code.decode(&w).unwrap(),
                DecodeOutcome::Corrected(pos.into_iter().collect())
            );
        }
    }

    #[test]
    fn closed_form_agrees_with_berlekamp_massey() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [60, 200, 1023] {
            let code = BchCode::with_default_field(2, n).unwrap();
            for _ in 0..3000 {
                let s = Syndromes([rng.random_range(0..1024), rng.random_range(0..1024), 0]);
                assert_eq!(
                    code.decode_syndromes(&s),
                    code.decode_berlekamp_massey(&s),
                    "{s:?}"
                );
            }
        }
    }

    #[test]
    fn genie_vetoes_a_miscorrection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let code = BchCode::with_default_field(2, 300).unwrap();
        let zero = vec![false; code.n()];
        assert_eq!(
            code.genie_decode(&zero, &[]).unwrap(),
            DecodeOutcome::NoError
        );
        let mut one = zero.clone();
        one[17] = true;
        assert_eq!(
            code.genie_decode(&one, &[17]).unwrap(),
            DecodeOutcome::Corrected([17].into_iter().collect())
        );

        let mut found = false;
        for _ in 0..100_000 {
            let mut support = Vec::new();
            while support.len() < 3 {
                let j = rng.random_range(0..code.n());
                if !support.contains(&j) {
                    support.push(j);
                }
            }
            let mut w = zero.clone();
            for &j in &support {
                w[j] = true;
            }
            if code.decode(&w).unwrap().is_corrected() {
                assert_eq!(
                    code.genie_decode(&w, &support).unwrap(),
                    DecodeOutcome::Failure(FailureReason::GenieVeto)
                );
                found = true;
                break;
            }
        }
        assert!(found, "no miscorrecting weight-3 pattern found");
    }

    #[test]
    fn shortened_root_is_detected() {
        // A single error injected at a shortened parent position must be flagged.
        let code = BchCode::with_default_field(2, 100).unwrap();
        let s = code.position_syndrome(500);
        assert_eq!(
            code.decode_syndromes(&s),
            DecodeOutcome::Failure(FailureReason::OutOfRangeRoot)
        );
        let mut s2 = code.position_syndrome(10);
        s2 ^= code.position_syndrome(900);
        assert_eq!(
            code.decode_syndromes(&s2),
            DecodeOutcome::Failure(FailureReason::OutOfRangeRoot)
        );
    }
}
