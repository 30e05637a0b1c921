use crate::scalar::Scalar;
use crate::sparse::SparseVector;

/// Packed membership bits over `[0, len)` with per-word rank, so a set
/// position can be mapped back to its slot in the sparse vector in O(1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMask {
    len: usize,
    words: Vec<u64>,
    // set bits strictly before each word
    word_ranks: Vec<usize>,
}

impl BitMask {
    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for &i in indices {
            words[i >> 6] |= 1u64 << (i & 63);
        }
        let mut word_ranks = Vec::with_capacity(words.len());
        let mut acc = 0usize;
        for w in &words {
            word_ranks.push(acc);
            acc += w.count_ones() as usize;
        }
        Self { len, words, word_ranks }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    /// Number of set bits strictly below `i`.
    #[inline]
    pub fn rank(&self, i: usize) -> usize {
        let below = self.words[i >> 6] & ((1u64 << (i & 63)) - 1);
        self.word_ranks[i >> 6] + below.count_ones() as usize
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

pub fn build_bitmask<T: Scalar>(x: &SparseVector<T>) -> BitMask {
    BitMask::from_indices(x.len(), x.indices())
}
