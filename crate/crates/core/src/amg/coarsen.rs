use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::strength::StrengthGraph;
use super::Coarsening;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Coarse,
    Fine,
}

/// Splits the points into coarse and fine sets.
pub fn coarsen(s: &StrengthGraph, kind: Coarsening) -> Vec<PointKind> {
    match kind {
        Coarsening::ClassicalRs => ruge_stueben(s),
        Coarsening::PmisLike => pmis(s),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Undecided,
    Coarse,
    Fine,
}

fn finish(state: Vec<State>) -> Vec<PointKind> {
    state
        .into_iter()
        .map(|s| match s {
            State::Coarse => PointKind::Coarse,
            _ => PointKind::Fine,
        })
        .collect()
}

fn ruge_stueben(s: &StrengthGraph) -> Vec<PointKind> {
    let n = s.n();
    let mut state = vec![State::Undecided; n];
    let mut lambda: Vec<usize> = (0..n).map(|i| s.influences(i).len()).collect();
    let mut heap = BinaryHeap::with_capacity(n);
    for i in 0..n {
        if s.depends(i).is_empty() && s.influences(i).is_empty() {
            state[i] = State::Fine;
        } else {
            heap.push((lambda[i], Reverse(i)));
        }
    }
    while let Some((l, Reverse(i))) = heap.pop() {
        if state[i] != State::Undecided || l != lambda[i] {
            continue;
        }
        state[i] = State::Coarse;
        for &j in s.influences(i) {
            if state[j] != State::Undecided {
                continue;
            }
            state[j] = State::Fine;
            for &k in s.depends(j) {
                if state[k] == State::Undecided {
                    lambda[k] += 1;
                    heap.push((lambda[k], Reverse(k)));
                }
            }
        }
        for &k in s.depends(i) {
            if state[k] == State::Undecided && lambda[k] > 0 {
                lambda[k] -= 1;
                heap.push((lambda[k], Reverse(k)));
            }
        }
    }
    finish(state)
}

/// Point measure `|Sᵀ_i| + u_i`, `u_i ∈ [0, 1)` a fixed hash of the index.
pub fn pmis_measure(s: &StrengthGraph, i: usize) -> f64 {
    s.influences(i).len() as f64 + hash_unit(i as u64)
}

pub(crate) fn hash_unit(i: u64) -> f64 {
    // splitmix64 finalizer
    let mut z = i.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

fn pmis(s: &StrengthGraph) -> Vec<PointKind> {
    let n = s.n();
    let mut state = vec![State::Undecided; n];
    let w: Vec<f64> = (0..n).map(|i| pmis_measure(s, i)).collect();
    let mut undecided: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        if s.influences(i).is_empty() {
            state[i] = State::Fine;
        } else {
            undecided.push(i);
        }
    }
    let beats = |i: usize, j: usize| w[i] > w[j] || (w[i] == w[j] && i < j);
    let mut new_c = Vec::new();
    while !undecided.is_empty() {
        new_c.clear();
        for &i in &undecided {
            let local_max = s
                .depends(i)
                .iter()
                .chain(s.influences(i))
                .all(|&j| state[j] != State::Undecided || j == i || beats(i, j));
            if local_max {
                new_c.push(i);
            }
        }
        for &i in &new_c {
            state[i] = State::Coarse;
        }
        for &i in &new_c {
            for &j in s.influences(i) {
                if state[j] == State::Undecided {
                    state[j] = State::Fine;
                }
            }
        }
        undecided.retain(|&i| state[i] == State::Undecided);
    }
    finish(state)
}
