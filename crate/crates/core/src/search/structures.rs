//! Instrumented containers used by every solver.
//!
//! Containers report logical byte deltas (entries times entry size) to an
//! [`Instrument`], which keeps the live total and its high-water mark and
//! forwards every delta to the caller's [`SearchProbe`]. The figures are
//! independent of allocator behaviour and hash-table load factors.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::mem::size_of;

use crate::grid::GridCoord;

use super::SearchProbe;

/// Lexicographic priority `[primary; secondary]`, smaller first.
///
/// Infinite components compare greater than every finite value and absorb
/// additions, so unreachable states sort last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Key(pub f64, pub f64);

impl Key {
    pub const INFINITE: Key = Key(f64::INFINITY, f64::INFINITY);
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.total_cmp(&other.1))
    }
}

/// Byte accounting and expansion counting for one solve.
pub struct Instrument<'p> {
    live: usize,
    peak: usize,
    expanded: u64,
    probe: &'p mut dyn SearchProbe,
}

impl<'p> Instrument<'p> {
    pub fn new(probe: &'p mut dyn SearchProbe) -> Self {
        Instrument {
            live: 0,
            peak: 0,
            expanded: 0,
            probe,
        }
    }

    #[inline]
    pub fn alloc(&mut self, bytes: usize) {
        self.live += bytes;
        self.peak = self.peak.max(self.live);
        self.probe.on_alloc(bytes as isize);
    }

    #[inline]
    pub fn free(&mut self, bytes: usize) {
        debug_assert!(bytes <= self.live);
        self.live -= bytes;
        self.probe.on_alloc(-(bytes as isize));
    }

    #[inline]
    pub fn expand(&mut self, c: GridCoord) {
        self.expanded += 1;
        self.probe.on_expand(c);
    }

    pub fn live_bytes(&self) -> usize {
        self.live
    }

    pub fn peak_bytes(&self) -> usize {
        self.peak
    }

    pub fn expanded(&self) -> u64 {
        self.expanded
    }
}

/// Per-cell values with an accounted footprint of one `(GridCoord, V)` per entry.
#[derive(Debug, Clone)]
pub struct ValueMap<V> {
    map: HashMap<GridCoord, V>,
}

impl<V> Default for ValueMap<V> {
    fn default() -> Self {
        ValueMap { map: HashMap::new() }
    }
}

impl<V> ValueMap<V> {
    pub const ENTRY_BYTES: usize = size_of::<(GridCoord, V)>();

    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn get(&self, c: GridCoord) -> Option<&V> {
        self.map.get(&c)
    }

    #[inline]
    pub fn get_mut(&mut self, c: GridCoord) -> Option<&mut V> {
        self.map.get_mut(&c)
    }

    #[inline]
    pub fn contains(&self, c: GridCoord) -> bool {
        self.map.contains_key(&c)
    }

    #[inline]
    pub fn insert(&mut self, ins: &mut Instrument, c: GridCoord, v: V) -> Option<V> {
        let old = self.map.insert(c, v);
        if old.is_none() {
            ins.alloc(Self::ENTRY_BYTES);
        }
        old
    }

    /// Returns the entry for `c`, creating it with `make` if absent.
    #[inline]
    pub fn entry_or_insert_with(&mut self, ins: &mut Instrument, c: GridCoord, make: impl FnOnce() -> V) -> &mut V {
        if !self.map.contains_key(&c) {
            ins.alloc(Self::ENTRY_BYTES);
        }
        self.map.entry(c).or_insert_with(make)
    }

    #[inline]
    pub fn remove(&mut self, ins: &mut Instrument, c: GridCoord) -> Option<V> {
        let old = self.map.remove(&c);
        if old.is_some() {
            ins.free(Self::ENTRY_BYTES);
        }
        old
    }

    pub fn clear(&mut self, ins: &mut Instrument) {
        ins.free(self.map.len() * Self::ENTRY_BYTES);
        self.map.clear();
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Entries sorted by coordinate.
    pub fn sorted_entries(&self) -> Vec<(GridCoord, &V)> {
        let mut out: Vec<_> = self.map.iter().map(|(c, v)| (*c, v)).collect();
        out.sort_by_key(|(c, _)| *c);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueEntry {
    pub key: Key,
    pub coord: GridCoord,
}

impl Ord for QueueEntry {
    // Reversed so that `BinaryHeap` pops the smallest key; coordinates break
    // exact ties deterministically.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key).then_with(|| other.coord.cmp(&self.coord))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Binary min-heap with lazy deletion: superseded entries stay in the heap
/// until they surface, and callers discard them with a validity predicate.
#[derive(Debug, Default)]
pub struct OpenList {
    heap: BinaryHeap<QueueEntry>,
}

impl OpenList {
    pub const ENTRY_BYTES: usize = size_of::<QueueEntry>();

    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, ins: &mut Instrument, key: Key, coord: GridCoord) {
        ins.alloc(Self::ENTRY_BYTES);
        self.heap.push(QueueEntry { key, coord });
    }

    /// Drops stale entries from the top, then returns the smallest valid one
    /// without removing it.
    pub fn peek_valid(&mut self, ins: &mut Instrument, mut valid: impl FnMut(&QueueEntry) -> bool) -> Option<QueueEntry> {
        while let Some(top) = self.heap.peek() {
            if valid(top) {
                return Some(*top);
            }
            self.heap.pop();
            ins.free(Self::ENTRY_BYTES);
        }
        None
    }

    /// Removes and returns the smallest valid entry.
    pub fn pop_valid(&mut self, ins: &mut Instrument, valid: impl FnMut(&QueueEntry) -> bool) -> Option<QueueEntry> {
        let top = self.peek_valid(ins, valid)?;
        self.heap.pop();
        ins.free(Self::ENTRY_BYTES);
        Some(top)
    }

    pub fn clear(&mut self, ins: &mut Instrument) {
        ins.free(self.heap.len() * Self::ENTRY_BYTES);
        self.heap.clear();
    }

    /// Number of entries, stale ones included.
    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
