//! Exact enumeration of the multi-indices appearing in the higher-order
//! chain rule, and their integer coefficients.
//!
//! A multi-index of order `k` is a tuple `(m_1, ..., m_k)` of non-negative
//! multiplicities with `sum_j j*m_j = k`; the tuples are in bijection with
//! the integer partitions of `k` (`m_j` = number of parts equal to `j`).
//! Everything in this module is exact integer arithmetic.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use rug::{Complete, Integer};

use crate::error::{Error, Result};

/// Default upper bound on the derivative order. Coefficients at this order
/// still fit comfortably in arbitrary-precision integers; the bound exists
/// only to make resource use predictable (a collected enumeration holds
/// p(k) tuples of k entries each).
pub const DEFAULT_MAX_ORDER: u32 = 64;

/// A tuple `(m_1, ..., m_k)` of non-negative multiplicities with
/// `sum_j j*m_j = k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    mult: Vec<u32>,
}

impl MultiIndex {
    /// Builds a multi-index after checking the weighted-sum invariant.
    pub fn new(mult: Vec<u32>) -> Result<Self> {
        let k: u64 = mult.iter().enumerate().map(|(i, &m)| (i as u64 + 1) * m as u64).sum();
        if k != mult.len() as u64 {
            return Err(Error::InvalidParameter {
                what: format!(
                    "multi-index {:?} has weighted sum {} but length {}",
                    mult,
                    k,
                    mult.len()
                ),
            });
        }
        Ok(Self { mult })
    }

    /// The derivative order `k` (also the tuple length).
    pub fn order(&self) -> u32 {
        self.mult.len() as u32
    }

    /// The multiplicities `m_1, ..., m_k`.
    pub fn multiplicities(&self) -> &[u32] {
        &self.mult
    }

    /// Multiplicity of part `j` (1-based); zero for `j > k`.
    pub fn mult_of(&self, j: u32) -> u32 {
        self.mult.get(j as usize - 1).copied().unwrap_or(0)
    }

    /// The weight sum `S = sum_j m_j`: the total number of inner-derivative
    /// factors carried by this index.
    pub fn weight_sum(&self) -> u32 {
        self.mult.iter().sum()
    }

    /// Iterator over the nonzero parts as `(j, m_j)` pairs.
    pub fn parts(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.mult
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(i, &m)| (i as u32 + 1, m))
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let strs: Vec<String> = self.mult.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", strs.join(","))
    }
}

/// Streaming enumeration of all multi-indices of order `k` in
/// lexicographically descending order of `(m_1, ..., m_k)`.
///
/// Backtracking over part sizes `j = 1..=k`, trying `m_j` from
/// `floor(remaining / j)` down to 0; maximizing `m_1` first yields the
/// descending order. Memory is O(k) per step.
pub struct MultiIndexIter {
    k: u32,
    // (next multiplicity to try at this depth); depth i corresponds to part
    // size j = i+1. `current` holds the chosen multiplicities, `remaining`
    // the weight left after each choice.
    stack: Vec<u32>,
    current: Vec<u32>,
    remaining: Vec<u64>,
    done: bool,
}

impl MultiIndexIter {
    fn new(k: u32) -> Self {
        let mut it = Self {
            k,
            stack: Vec::with_capacity(k as usize),
            current: Vec::with_capacity(k as usize),
            remaining: Vec::with_capacity(k as usize + 1),
            done: false,
        };
        it.remaining.push(k as u64);
        it
    }

    // Extends the partial assignment with maximal multiplicities until all
    // k parts have a value.
    fn descend(&mut self) {
        while (self.current.len() as u32) < self.k {
            let j = self.current.len() as u64 + 1;
            let rem = *self.remaining.last().unwrap();
            let m = (rem / j) as u32;
            self.stack.push(m);
            self.current.push(m);
            self.remaining.push(rem - j * m as u64);
        }
    }

    // Steps to the next candidate: decrement the deepest slot that can still
    // go down, or signal exhaustion.
    fn backtrack(&mut self) -> bool {
        loop {
            match self.stack.pop() {
                None => return false,
                Some(m) => {
                    self.current.pop();
                    self.remaining.pop();
                    if m > 0 {
                        let j = self.current.len() as u64 + 1;
                        let rem = *self.remaining.last().unwrap();
                        self.stack.push(m - 1);
                        self.current.push(m - 1);
                        self.remaining.push(rem - j * (m as u64 - 1));
                        return true;
                    }
                }
            }
        }
    }
}

impl Iterator for MultiIndexIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        if self.done {
            return None;
        }
        loop {
            self.descend();
            let complete = *self.remaining.last().unwrap() == 0;
            let item = if complete {
                Some(MultiIndex {
                    mult: self.current.clone(),
                })
            } else {
                None
            };
            let more = self.backtrack();
            if !more {
                self.done = true;
                return item;
            }
            if item.is_some() {
                return item;
            }
        }
    }
}

/// Streaming enumeration of the multi-indices of order `k`, bounded by `max_order`.
pub fn multi_index_iter_bounded(k: u32, max_order: u32) -> Result<MultiIndexIter> {
    if k > max_order {
        return Err(Error::OrderOutOfBounds { k, max: max_order });
    }
    Ok(MultiIndexIter::new(k))
}

/// Streaming enumeration with the default order bound.
pub fn multi_index_iter(k: u32) -> Result<MultiIndexIter> {
    multi_index_iter_bounded(k, DEFAULT_MAX_ORDER)
}

/// All multi-indices of order `k` in lexicographically descending order.
/// The list has length p(k), the number of integer partitions of `k`;
/// `k = 0` yields the single empty index.
pub fn enumerate_multi_indices(k: u32) -> Result<Vec<MultiIndex>> {
    Ok(multi_index_iter(k)?.collect())
}

/// The exact integer coefficient `k! / prod_j (m_j! * (j!)^m_j)` attached to
/// a multi-index in the higher-order chain rule.
///
/// The division is exact by construction; a nonzero remainder would signal
/// an enumeration bug, so it aborts rather than returning an error.
pub fn fdb_coefficient(mi: &MultiIndex) -> Integer {
    let k = mi.order();
    let numerator = Integer::factorial(k).complete();
    let mut denominator = Integer::from(1);
    for (j, m) in mi.parts() {
        denominator *= Integer::factorial(m).complete();
        denominator *= Integer::factorial(j).complete().pow(m);
    }
    let (quotient, remainder) = numerator.div_rem(denominator);
    assert!(
        remainder.is_zero(),
        "inexact coefficient division for multi-index ({mi}): enumeration bug"
    );
    quotient
}

/// A per-order table of multi-indices with their weight sums and exact
/// coefficients, cached because the evaluation engine revisits it for every
/// evaluation point.
#[derive(Debug)]
pub struct CoefficientTable {
    k: u32,
    entries: Vec<CoefficientEntry>,
}

#[derive(Debug)]
pub struct CoefficientEntry {
    pub index: MultiIndex,
    pub weight: u32,
    pub coefficient: Integer,
}

impl CoefficientTable {
    fn build(k: u32) -> Result<Self> {
        let entries = multi_index_iter(k)?
            .map(|index| {
                let weight = index.weight_sum();
                let coefficient = fdb_coefficient(&index);
                CoefficientEntry {
                    index,
                    weight,
                    coefficient,
                }
            })
            .collect();
        Ok(Self { k, entries })
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn entries(&self) -> &[CoefficientEntry] {
        &self.entries
    }

    pub fn coefficient_of(&self, mi: &MultiIndex) -> Option<&Integer> {
        self.entries
            .iter()
            .find(|e| &e.index == mi)
            .map(|e| &e.coefficient)
    }
}

static TABLE_CACHE: LazyLock<Mutex<HashMap<u32, Arc<CoefficientTable>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// The cached coefficient table for order `k`. Concurrent callers observe
/// fully-constructed tables only: construction happens under the lock.
pub fn coefficient_table(k: u32) -> Result<Arc<CoefficientTable>> {
    let mut cache = TABLE_CACHE.lock().unwrap();
    if let Some(t) = cache.get(&k) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(CoefficientTable::build(k)?);
    cache.insert(k, Arc::clone(&table));
    Ok(table)
}

/// Verifies, in exact integer arithmetic, the coefficient recurrence that
/// raises order `k` to `k + 1`:
///
/// ```text
/// C(k+1, n_1, ..., n_k, 0) = C(k, n_1 - 1, n_2, ..., n_k)
///     + sum_i (n_i + 1) * C(k, ..., n_i + 1, n_{i+1} - 1, ...)
/// ```
///
/// for every order-(k+1) index with `m_{k+1} = 0`, dropping terms with any
/// negative multiplicity; also checks that the pure top-part index
/// `(0, ..., 0, 1)` at each order has coefficient 1. Returns `true` iff
/// every instance holds.
pub fn coefficient_recurrence_check(k: u32) -> Result<bool> {
    if k + 1 > DEFAULT_MAX_ORDER {
        return Err(Error::OrderOutOfBounds {
            k: k + 1,
            max: DEFAULT_MAX_ORDER,
        });
    }
    let lower = coefficient_table(k)?;
    let coeff_lower = |mult: &[u32]| -> Option<Integer> {
        let mi = MultiIndex::new(mult.to_vec()).ok()?;
        lower.coefficient_of(&mi).cloned()
    };

    for upper in multi_index_iter(k + 1)? {
        let n = upper.multiplicities();
        if n[k as usize] != 0 {
            // The only index with m_{k+1} != 0 is the pure top part.
            let pure_top = n[..k as usize].iter().all(|&m| m == 0) && n[k as usize] == 1;
            if !pure_top || fdb_coefficient(&upper) != 1u32 {
                return Ok(false);
            }
            continue;
        }

        let mut rhs = Integer::new();
        // Term from incrementing the first part: C(k, n_1 - 1, n_2, ..., n_k).
        if n[0] >= 1 {
            let mut t = n[..k as usize].to_vec();
            t[0] -= 1;
            match coeff_lower(&t) {
                Some(c) => rhs += c,
                None => return Ok(false),
            }
        }
        // Terms from promoting part i to part i+1.
        for i in 1..k as usize {
            if n[i] >= 1 {
                let mut t = n[..k as usize].to_vec();
                t[i] -= 1;
                t[i - 1] += 1;
                match coeff_lower(&t) {
                    Some(c) => rhs += c * (n[i - 1] + 1),
                    None => return Ok(false),
                }
            }
        }

        if fdb_coefficient(&upper) != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}
