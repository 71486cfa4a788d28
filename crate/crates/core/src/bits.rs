//! A small fixed-width bit set used for truth sets over finite world spaces.

use smallvec::SmallVec;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    len: usize,
    words: SmallVec<[u64; 2]>,
}

impl Bits {
    pub fn empty(len: usize) -> Self {
        Bits {
            len,
            words: SmallVec::from_elem(0, len.div_ceil(64)),
        }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Self::empty(len);
        for i in 0..len {
            b.insert(i);
        }
        b
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Self::empty(len);
        for i in idx {
            b.insert(i);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn and(&self, other: &Bits) -> Bits {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Bits) -> Bits {
        self.zip(other, |a, b| a | b)
    }

    /// `self \ other`
    pub fn and_not(&self, other: &Bits) -> Bits {
        self.zip(other, |a, b| a & !b)
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |i| self.contains(*i))
    }

    fn zip(&self, other: &Bits, f: impl Fn(u64, u64) -> u64) -> Bits {
        debug_assert_eq!(self.len, other.len);
        Bits {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_ops_cross_word_boundary() {
        let a = Bits::from_indices(130, [0, 64, 129]);
        let b = Bits::from_indices(130, [64, 100]);
        assert_eq!(a.and(&b).iter().collect::<Vec<_>>(), vec![64]);
        assert_eq!(a.or(&b).count(), 4);
        assert_eq!(a.and_not(&b).iter().collect::<Vec<_>>(), vec![0, 129]);
        assert!(a.intersects(&b));
        assert!(!a.is_subset(&b));
        assert!(Bits::empty(130).is_empty());
        assert_eq!(Bits::full(130).count(), 130);
    }
}
