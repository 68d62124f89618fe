//! Arithmetic in GF(2^10) through log/antilog tables.

use crate::error::{Error, Result};

pub const FIELD_DEGREE: u32 = 10;
pub const FIELD_SIZE: usize = 1 << FIELD_DEGREE;
/// Order of the multiplicative group, which is also the parent BCH length.
pub const GROUP_ORDER: usize = FIELD_SIZE - 1;

/// x^10 + x^3 + 1.
pub const DEFAULT_PRIMITIVE_POLY: u32 = 0x409;

/// Field elements are stored in the low 10 bits of a `u16` (polynomial basis).
pub type Elem = u16;

#[derive(Debug, Clone)]
pub struct Field {
    poly: u32,
    log: Vec<u16>,
    // Doubled so that `exp[a + b]` needs no reduction for a, b < 1023.
    exp: Vec<Elem>,
}

impl Field {
    pub fn new(primitive_poly: u32) -> Result<Self> {
        if primitive_poly >> FIELD_DEGREE != 1 {
            return Err(Error::NonPrimitive(primitive_poly, 0));
        }
        let mut exp = vec![0 as Elem; 2 * GROUP_ORDER];
        let mut log = vec![0u16; FIELD_SIZE];
        let mut x: u32 = 1;
        for (e, slot) in exp.iter_mut().take(GROUP_ORDER).enumerate() {
            if e > 0 && x == 1 {
                return Err(Error::NonPrimitive(primitive_poly, e));
            }
            *slot = x as Elem;
            log[x as usize] = e as u16;
            x <<= 1;
            if x & (1 << FIELD_DEGREE) != 0 {
                x ^= primitive_poly;
            }
        }
        if x != 1 {
            return Err(Error::NonPrimitive(primitive_poly, GROUP_ORDER));
        }
        for e in GROUP_ORDER..2 * GROUP_ORDER {
            exp[e] = exp[e - GROUP_ORDER];
        }
        Ok(Self {
            poly: primitive_poly,
            log,
            exp,
        })
    }

    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// α^e for any integer exponent.
    #[inline]
    pub fn alpha_pow(&self, e: i64) -> Elem {
        self.exp[e.rem_euclid(GROUP_ORDER as i64) as usize]
    }

    /// Discrete log of a nonzero element.
    #[inline]
    pub fn log(&self, x: Elem) -> usize {
        debug_assert!(x != 0, "log of zero");
        self.log[x as usize] as usize
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        assert!(a != 0, "inverse of zero");
        self.exp[(GROUP_ORDER - self.log[a as usize] as usize) % GROUP_ORDER]
    }

    #[inline]
    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        assert!(b != 0, "division by zero");
        if a == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + GROUP_ORDER - self.log[b as usize] as usize]
        }
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = (self.log[a as usize] as u64 * (e % GROUP_ORDER as u64)) % GROUP_ORDER as u64;
        self.exp[l as usize]
    }

    /// Absolute trace Tr(a) = a + a^2 + ... + a^(2^9), which lies in {0, 1}.
    pub fn trace(&self, a: Elem) -> Elem {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..FIELD_DEGREE {
            acc ^= x;
            x = self.mul(x, x);
        }
        acc
    }
}

impl Default for Field {
    fn default() -> Self {
        Self::new(DEFAULT_PRIMITIVE_POLY).expect("default polynomial is primitive")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Carry-less product reduced by long division; independent of the tables.
    fn clmul_mod(a: u32, b: u32, poly: u32) -> u32 {
        let mut prod: u32 = 0;
        for i in 0..FIELD_DEGREE {
            if b >> i & 1 == 1 {
                prod ^= a << i;
            }
        }
        for bit in (FIELD_DEGREE..2 * FIELD_DEGREE).rev() {
            if prod >> bit & 1 == 1 {
                prod ^= poly << (bit - FIELD_DEGREE);
            }
        }
        prod
    }

    #[test]
    fn tables_are_inverse() {
        let f = Field::default();
        for x in 1..FIELD_SIZE as Elem {
            assert_eq!(f.alpha_pow(f.log(x) as i64), x);
        }
        let mut seen = vec![false; GROUP_ORDER];
        for x in 1..FIELD_SIZE as Elem {
            let l = f.log(x);
            assert!(!seen[l]);
            seen[l] = true;
        }
    }

    #[test]
    fn zero_and_identity() {
        let f = Field::default();
        for x in 0..FIELD_SIZE as Elem {
            assert_eq!(f.mul(0, x), 0);
            assert_eq!(f.mul(x, 0), 0);
        }
        assert_eq!(f.inv(1), 1);
    }

    #[test]
    fn alpha5_squared_is_x3_plus_1() {
        let f = Field::default();
        let a5 = f.alpha_pow(5);
        assert_eq!(a5, 1 << 5);
        // x^10 mod (x^10 + x^3 + 1) = x^3 + 1
        assert_eq!(clmul_mod(1 << 5, 1 << 5, DEFAULT_PRIMITIVE_POLY), 0b1001);
        assert_eq!(f.mul(a5, a5), 0b1001);
    }

    #[test]
    fn multiplication_matches_polynomial_oracle() {
        let f = Field::default();
        for a in (0..FIELD_SIZE as u32).step_by(7) {
            for b in (0..FIELD_SIZE as u32).step_by(11) {
                assert_eq!(
                    f.mul(a as Elem, b as Elem) as u32,
                    clmul_mod(a, b, DEFAULT_PRIMITIVE_POLY)
                );
            }
        }
    }

    #[test]
    fn inverses_and_division() {
        let f = Field::default();
        for a in 1..FIELD_SIZE as Elem {
            assert_eq!(f.mul(a, f.inv(a)), 1);
            assert_eq!(f.div(a, a), 1);
            assert_eq!(f.mul(f.div(7, a), a), 7);
        }
    }

    #[test]
    fn trace_is_binary_and_balanced() {
        let f = Field::default();
        let ones = (0..FIELD_SIZE as Elem).filter(|&a| f.trace(a) == 1).count();
        assert!((0..FIELD_SIZE as Elem).all(|a| f.trace(a) <= 1));
        assert_eq!(ones, FIELD_SIZE / 2);
    }

    #[test]
    fn rejects_non_primitive() {
        // x^10 + 1 = (x^5 + 1)^2 is reducible.
        assert!(matches!(Field::new(0x401), Err(Error::NonPrimitive(..))));
        // Irreducible but not primitive would also be caught by the cycle check;
        // a degree-9 polynomial is rejected up front.
        assert!(Field::new(0x211).is_err());
    }
}
