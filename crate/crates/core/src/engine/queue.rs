//! Min-extraction storage for the full chain.
//!
//! The unit interval is cut into `2^16` equal buckets, each a binary
//! min-heap, with a two-level occupancy bitmap locating the lowest non-empty
//! bucket. Long runs accumulate tens of millions of particles right of the
//! critical point that are essentially never extracted; keeping them in
//! their own small heaps leaves the pop path short and cache-resident.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::position::UnitPos;

const BUCKET_BITS: u32 = 16;
const BUCKETS: usize = 1 << BUCKET_BITS;
const WORDS: usize = BUCKETS / 64;
const SUMMARY_WORDS: usize = WORDS / 64;

#[derive(Clone, Debug)]
pub(crate) struct BucketQueue {
    buckets: Vec<BinaryHeap<Reverse<u64>>>,
    occupied: Vec<u64>,
    summary: [u64; SUMMARY_WORDS],
    len: usize,
    lowest: usize,
}

#[inline]
fn bucket_of(p: UnitPos) -> usize {
    // Exact: multiplication by a power of two, then truncation.
    (p.value() * BUCKETS as f64) as usize
}

impl BucketQueue {
    pub fn new() -> Self {
        BucketQueue {
            buckets: vec![BinaryHeap::new(); BUCKETS],
            occupied: vec![0; WORDS],
            summary: [0; SUMMARY_WORDS],
            len: 0,
            lowest: BUCKETS,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn peek_min(&self) -> Option<UnitPos> {
        if self.len == 0 {
            return None;
        }
        self.buckets[self.lowest]
            .peek()
            .map(|Reverse(k)| UnitPos::from_key(*k))
    }

    #[inline]
    pub fn push(&mut self, p: UnitPos) {
        let b = bucket_of(p);
        if self.buckets[b].is_empty() {
            self.mark(b);
        }
        self.buckets[b].push(Reverse(p.key()));
        self.len += 1;
        if b < self.lowest {
            self.lowest = b;
        }
    }

    /// Reserves room for one more particle in `p`'s bucket, reporting
    /// allocation failure instead of aborting.
    #[inline]
    pub fn try_reserve_for(&mut self, p: UnitPos) -> Result<()> {
        let heap = &mut self.buckets[bucket_of(p)];
        if heap.len() == heap.capacity() {
            let extra = heap.capacity().max(4);
            heap.try_reserve(extra)
                .map_err(|_| Error::OutOfMemory { requested: extra })?;
        }
        Ok(())
    }

    #[inline]
    pub fn pop_min(&mut self) -> Option<UnitPos> {
        if self.len == 0 {
            return None;
        }
        let b = self.lowest;
        let Reverse(k) = self.buckets[b].pop().expect("lowest bucket is occupied");
        self.len -= 1;
        if self.buckets[b].is_empty() {
            self.unmark(b);
            self.lowest = self.next_occupied(b).unwrap_or(BUCKETS);
        }
        Some(UnitPos::from_key(k))
    }

    /// Number of particles with `lo <= p <= hi`.
    pub fn count_between(&self, lo: UnitPos, hi: UnitPos) -> usize {
        let (bl, bh) = (bucket_of(lo), bucket_of(hi));
        let (kl, kh) = (lo.key(), hi.key());
        let scan = |b: usize| {
            self.buckets[b]
                .iter()
                .filter(|Reverse(k)| *k >= kl && *k <= kh)
                .count()
        };
        if bl == bh {
            return scan(bl);
        }
        let inner: usize = self.buckets[bl + 1..bh].iter().map(|h| h.len()).sum();
        scan(bl) + inner + scan(bh)
    }

    /// Empties the queue, touching only occupied buckets.
    pub fn clear(&mut self) {
        let occupied: Vec<usize> = self.occupied_buckets().collect();
        for b in occupied {
            self.buckets[b].clear();
        }
        self.occupied.iter_mut().for_each(|w| *w = 0);
        self.summary = [0; SUMMARY_WORDS];
        self.len = 0;
        self.lowest = BUCKETS;
    }

    fn occupied_buckets(&self) -> impl Iterator<Item = usize> + '_ {
        self.occupied
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0)
            .flat_map(|(i, &w)| {
                std::iter::successors(Some(w), |w| Some(w & (w - 1)).filter(|n| *n != 0))
                    .map(move |w| i * 64 + w.trailing_zeros() as usize)
            })
    }

    /// All particles, bucket by bucket; unordered within a bucket.
    pub fn iter(&self) -> impl Iterator<Item = UnitPos> + '_ {
        self.occupied_buckets()
            .flat_map(|b| self.buckets[b].iter().map(|Reverse(k)| UnitPos::from_key(*k)))
    }

    #[inline]
    fn mark(&mut self, b: usize) {
        let w = b / 64;
        self.occupied[w] |= 1 << (b % 64);
        self.summary[w / 64] |= 1 << (w % 64);
    }

    #[inline]
    fn unmark(&mut self, b: usize) {
        let w = b / 64;
        self.occupied[w] &= !(1 << (b % 64));
        if self.occupied[w] == 0 {
            self.summary[w / 64] &= !(1 << (w % 64));
        }
    }

    /// First occupied bucket strictly above `b`.
    fn next_occupied(&self, b: usize) -> Option<usize> {
        let w = b / 64;
        let rest = if b % 64 == 63 { 0 } else { self.occupied[w] >> (b % 64 + 1) << (b % 64 + 1) };
        if rest != 0 {
            return Some(w * 64 + rest.trailing_zeros() as usize);
        }
        let next_w = self.next_occupied_word(w)?;
        Some(next_w * 64 + self.occupied[next_w].trailing_zeros() as usize)
    }

    /// First word strictly above `w` with any occupied bucket.
    fn next_occupied_word(&self, w: usize) -> Option<usize> {
        let s = w / 64;
        let bit = w % 64;
        let rest = if bit == 63 { 0 } else { self.summary[s] >> (bit + 1) << (bit + 1) };
        if rest != 0 {
            return Some(s * 64 + rest.trailing_zeros() as usize);
        }
        (s + 1..SUMMARY_WORDS)
            .find(|&i| self.summary[i] != 0)
            .map(|i| i * 64 + self.summary[i].trailing_zeros() as usize)
    }
}
