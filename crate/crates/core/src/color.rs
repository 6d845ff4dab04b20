//! Colors and small color sets.
//!
//! Colors are small nonnegative integers below [`MAX_COLORS`]; a list is a
//! 64-bit mask, which keeps iteration in ascending color order for free.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Color = u8;

/// Exclusive upper bound on color values.
pub const MAX_COLORS: usize = 64;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorSet(u64);

impl ColorSet {
    pub const EMPTY: ColorSet = ColorSet(0);

    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        ColorSet(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `{0, 1, ..., k-1}`.
    pub fn range(k: usize) -> Self {
        assert!(k <= MAX_COLORS, "color range {k} exceeds {MAX_COLORS}");
        if k == MAX_COLORS {
            ColorSet(u64::MAX)
        } else {
            ColorSet((1u64 << k) - 1)
        }
    }

    #[inline]
    pub fn singleton(c: Color) -> Self {
        debug_assert!((c as usize) < MAX_COLORS);
        ColorSet(1u64 << c)
    }

    #[inline]
    pub fn contains(self, c: Color) -> bool {
        (c as usize) < MAX_COLORS && self.0 >> c & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, c: Color) {
        self.0 |= 1u64 << c;
    }

    #[inline]
    pub fn remove(&mut self, c: Color) {
        self.0 &= !(1u64 << c);
    }

    #[inline]
    pub fn without(self, c: Color) -> Self {
        ColorSet(self.0 & !(1u64 << c))
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn min(self) -> Option<Color> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as Color)
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        ColorSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        ColorSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Self) -> Self {
        ColorSet(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> ColorIter {
        ColorIter(self.0)
    }

    pub fn to_vec(self) -> Vec<Color> {
        self.iter().collect()
    }
}

impl FromIterator<Color> for ColorSet {
    fn from_iter<I: IntoIterator<Item = Color>>(iter: I) -> Self {
        let mut s = ColorSet::EMPTY;
        for c in iter {
            s.insert(c);
        }
        s
    }
}

impl IntoIterator for ColorSet {
    type Item = Color;
    type IntoIter = ColorIter;
    fn into_iter(self) -> ColorIter {
        self.iter()
    }
}

pub struct ColorIter(u64);

impl Iterator for ColorIter {
    type Item = Color;

    #[inline]
    fn next(&mut self) -> Option<Color> {
        if self.0 == 0 {
            return None;
        }
        let c = self.0.trailing_zeros() as Color;
        self.0 &= self.0 - 1;
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for ColorIter {}

impl fmt::Debug for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ColorSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ColorSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<u64>::deserialize(d)?;
        let mut s = ColorSet::EMPTY;
        for c in raw {
            if c as usize >= MAX_COLORS {
                return Err(serde::de::Error::custom(format!("color {c} out of range (max {})", MAX_COLORS - 1)));
            }
            s.insert(c as Color);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_is_ascending() {
        let s: ColorSet = [5, 1, 3].into_iter().collect();
        assert_eq!(s.to_vec(), vec![1, 3, 5]);
        assert_eq!(s.len(), 3);
        assert_eq!(s.min(), Some(1));
    }

    #[test]
    fn range_and_algebra() {
        let a = ColorSet::range(4);
        let b: ColorSet = [2, 3, 9].into_iter().collect();
        assert_eq!(a.intersection(b).to_vec(), vec![2, 3]);
        assert_eq!(a.difference(b).to_vec(), vec![0, 1]);
        assert!(ColorSet::singleton(2).is_subset(a));
        assert!(!b.is_subset(a));
        assert_eq!(ColorSet::range(64).len(), 64);
    }

    #[test]
    fn json_roundtrip_rejects_large_colors() {
        let s: ColorSet = serde_json::from_str("[0, 4, 2]").unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[0,2,4]");
        assert!(serde_json::from_str::<ColorSet>("[64]").is_err());
    }
}
