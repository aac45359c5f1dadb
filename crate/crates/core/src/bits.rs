//! Fixed-width bitsets used for sequents over the closure and for automaton
//! state labels.

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Bits {
    words: Box<[u64]>,
}

impl Bits {
    pub fn new(width: usize) -> Bits {
        Bits {
            words: vec![0u64; width.div_ceil(64)].into_boxed_slice(),
        }
    }

    pub fn from_iter(width: usize, items: impl IntoIterator<Item = u32>) -> Bits {
        let mut b = Bits::new(width);
        for i in items {
            b.set(i);
        }
        b
    }

    pub fn set(&mut self, i: u32) {
        self.words[i as usize / 64] |= 1 << (i % 64);
    }

    pub fn clear(&mut self, i: u32) {
        self.words[i as usize / 64] &= !(1 << (i % 64));
    }

    pub fn get(&self, i: u32) -> bool {
        self.words[i as usize / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= b;
        }
    }

    pub fn subtract(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= !b;
        }
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, w)| {
            let mut w = *w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let bit = w.trailing_zeros();
                    w &= w - 1;
                    Some(wi as u32 * 64 + bit)
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        let mut b = Bits::new(130);
        b.set(0);
        b.set(65);
        b.set(129);
        assert!(b.get(65) && !b.get(64));
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 65, 129]);
        assert_eq!(b.count(), 3);
        let c = Bits::from_iter(130, [65]);
        assert!(c.is_subset(&b));
        assert!(b.intersects(&c));
        b.subtract(&c);
        assert!(!b.get(65));
    }
}
