use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Longest string handled by the packed representations.
pub const MAX_LEN: usize = 64;

fn check_len(len: usize) -> Result<()> {
    if len == 0 || len > MAX_LEN {
        return Err(Error::invalid(format!("length {len} outside 1..={MAX_LEN}")));
    }
    Ok(())
}

/// Mask with the bits of positions `1..=len` set.
pub fn full_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Bit of position `i` (1-based, most significant first) in a length-`len` code.
#[inline]
pub fn pos_bit(len: usize, i: usize) -> u64 {
    1u64 << (len - i)
}

/// A fixed-length 0/1 string packed into a word. Position 1 is the most
/// significant bit, so numeric order of codes is lexicographic order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    word: u64,
}

impl BitVector {
    pub fn zeros(len: usize) -> Result<Self> {
        check_len(len)?;
        Ok(BitVector { len, word: 0 })
    }

    pub fn from_code(len: usize, code: u64) -> Result<Self> {
        check_len(len)?;
        if code & !full_mask(len) != 0 {
            return Err(Error::invalid(format!("code {code} wider than {len} bits")));
        }
        Ok(BitVector { len, word: code })
    }

    /// Build from the 1-based positions holding a one.
    pub fn from_ones(len: usize, ones: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(len)?;
        for &i in ones {
            v.set(i, true)?;
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn code(&self) -> u64 {
        self.word
    }

    pub fn get(&self, i: usize) -> bool {
        assert!((1..=self.len).contains(&i), "position {i} out of 1..={}", self.len);
        self.word & pos_bit(self.len, i) != 0
    }

    pub fn set(&mut self, i: usize, value: bool) -> Result<()> {
        if !(1..=self.len).contains(&i) {
            return Err(Error::invalid(format!("position {i} out of 1..={}", self.len)));
        }
        let b = pos_bit(self.len, i);
        if value {
            self.word |= b;
        } else {
            self.word &= !b;
        }
        Ok(())
    }

    pub fn count_ones(&self) -> u32 {
        self.word.count_ones()
    }

    /// 1-based positions holding a one, ascending.
    pub fn ones(&self) -> Vec<usize> {
        (1..=self.len).filter(|&i| self.get(i)).collect()
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = Self::zeros(s.len())?;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i + 1, true)?,
                _ => return Err(Error::Parse(format!("bad bit {c:?} in {s:?}"))),
            }
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Zero,
    One,
    Star,
}

/// A string over `{0, 1, *}`, stored as two masks in the same bit layout
/// as [`BitVector`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Restriction {
    len: usize,
    ones: u64,
    stars: u64,
}

impl Restriction {
    pub fn all_stars(len: usize) -> Result<Self> {
        check_len(len)?;
        Ok(Restriction {
            len,
            ones: 0,
            stars: full_mask(len),
        })
    }

    /// Build from masks. `ones` and `stars` must be disjoint.
    pub fn from_masks(len: usize, ones: u64, stars: u64) -> Result<Self> {
        check_len(len)?;
        let full = full_mask(len);
        if ones & stars != 0 || (ones | stars) & !full != 0 {
            return Err(Error::invalid("overlapping or out-of-range restriction masks"));
        }
        Ok(Restriction { len, ones, stars })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ones_mask(&self) -> u64 {
        self.ones
    }

    pub fn stars_mask(&self) -> u64 {
        self.stars
    }

    pub fn star_count(&self) -> u32 {
        self.stars.count_ones()
    }

    pub fn get(&self, i: usize) -> Symbol {
        assert!((1..=self.len).contains(&i), "position {i} out of 1..={}", self.len);
        let b = pos_bit(self.len, i);
        if self.stars & b != 0 {
            Symbol::Star
        } else if self.ones & b != 0 {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn set(&mut self, i: usize, s: Symbol) -> Result<()> {
        if !(1..=self.len).contains(&i) {
            return Err(Error::invalid(format!("position {i} out of 1..={}", self.len)));
        }
        let b = pos_bit(self.len, i);
        self.ones &= !b;
        self.stars &= !b;
        match s {
            Symbol::Zero => {}
            Symbol::One => self.ones |= b,
            Symbol::Star => self.stars |= b,
        }
        Ok(())
    }

    /// True when `self` agrees with `other` on every non-star position of
    /// `other`, i.e. `self` is an extension of `other`.
    pub fn extends(&self, other: &Restriction) -> bool {
        let fixed = !other.stars & full_mask(self.len);
        self.len == other.len
            && self.stars & !other.stars == 0
            && (self.ones ^ other.ones) & fixed & !self.stars == 0
            && self.stars & fixed == 0
    }

    /// True when some total string extends both.
    pub fn compatible(&self, other: &Restriction) -> bool {
        let both_fixed = !self.stars & !other.stars & full_mask(self.len);
        self.len == other.len && (self.ones ^ other.ones) & both_fixed == 0
    }

    pub fn is_extended_by(&self, v: &BitVector) -> bool {
        v.len() == self.len && (v.code() ^ self.ones) & !self.stars == 0
    }

    /// All total extensions as codes, ascending.
    pub fn extensions(&self) -> impl Iterator<Item = u64> + '_ {
        crate::combin::submasks(self.stars).map(move |s| self.ones | s)
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 1..=self.len {
            f.write_str(match self.get(i) {
                Symbol::Zero => "0",
                Symbol::One => "1",
                Symbol::Star => "*",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Restriction({self})")
    }
}

impl FromStr for Restriction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut r = Self::all_stars(s.len())?;
        for (i, c) in s.chars().enumerate() {
            let sym = match c {
                '0' => Symbol::Zero,
                '1' => Symbol::One,
                '*' => Symbol::Star,
                _ => return Err(Error::Parse(format!("bad symbol {c:?} in {s:?}"))),
            };
            r.set(i + 1, sym)?;
        }
        Ok(r)
    }
}
