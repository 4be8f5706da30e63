//! Coordinate-at-a-time list traversal shared by both engines, sequential or
//! spread over worker threads.
//!
//! Each worker owns a state `S` (a slice of the score array, a segment
//! bound, ...) and is handed every list index in processing order. With a
//! finite budget all workers meet at a barrier after each list and one of
//! them reads the clock, so every worker stops after the same list.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Barrier;

use crate::budget::Deadline;
use crate::topk::{find_largest, find_largest_iter, merge_largest};

/// Runs `body(state, list)` for `list` in `0..lists`, stopping after the
/// first list that finishes with the budget exhausted. Returns the number of
/// lists processed. `lockstep` forces a barrier after every list even with an
/// infinite budget, for bodies whose workers share slots across lists.
pub(crate) fn scan_lists<S, F>(
    mut states: Vec<S>,
    lists: usize,
    deadline: Deadline,
    lockstep: bool,
    body: F,
) -> usize
where
    S: Send,
    F: Fn(&mut S, usize) + Sync,
{
    if states.len() == 1 {
        let state = &mut states[0];
        for list in 0..lists {
            body(state, list);
            if deadline.exhausted() {
                return list + 1;
            }
        }
        return lists;
    }

    let workers = states.len();
    let barrier = Barrier::new(workers);
    let stop = AtomicBool::new(false);
    let processed = AtomicUsize::new(lists);
    let synchronised = lockstep || !deadline.is_infinite();
    std::thread::scope(|scope| {
        for mut state in states {
            let (body, barrier, stop, processed) = (&body, &barrier, &stop, &processed);
            scope.spawn(move || {
                for list in 0..lists {
                    body(&mut state, list);
                    if synchronised {
                        if barrier.wait().is_leader() && deadline.exhausted() {
                            stop.store(true, Ordering::Relaxed);
                            processed.store(list + 1, Ordering::Relaxed);
                        }
                        barrier.wait();
                        if stop.load(Ordering::Relaxed) {
                            break;
                        }
                    }
                }
            });
        }
    });
    processed.load(Ordering::Relaxed)
}

/// `find_largest` over `threads` contiguous slot ranges, merged.
pub(crate) fn select_top(scores: &[f64], k: usize, threads: usize) -> Vec<(u32, f64)> {
    if threads <= 1 || scores.len() < 2 * threads {
        return find_largest(scores, k);
    }
    let parts = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|p| {
                let (lo, hi) = segment(scores.len(), threads, p);
                let chunk = &scores[lo..hi];
                scope.spawn(move || {
                    find_largest_iter(chunk.iter().enumerate().map(|(i, &s)| ((lo + i) as u32, s)), k)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("selection worker panicked")).collect()
    });
    merge_largest(parts, k)
}

/// Bounds of the `part`-th of `parts` near-equal contiguous pieces of `len`.
#[inline]
pub(crate) fn segment(len: usize, parts: usize, part: usize) -> (usize, usize) {
    let size = len.div_ceil(parts.max(1));
    let start = (part * size).min(len);
    (start, (start + size).min(len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Budget;

    #[test]
    fn segments_tile() {
        for len in [0usize, 1, 7, 100, 101] {
            for parts in 1..9 {
                let mut next = 0;
                for p in 0..parts {
                    let (a, b) = segment(len, parts, p);
                    assert_eq!(a, next.min(len));
                    next = b;
                }
                assert_eq!(next, len);
            }
        }
    }

    #[test]
    fn zero_budget_stops_after_first_list() {
        let deadline = Budget::millis(0).start();
        assert_eq!(scan_lists(vec![()], 5, deadline, false, |_, _| {}), 1);
        assert_eq!(scan_lists(vec![(), (), ()], 5, deadline, true, |_, _| {}), 1);
        assert_eq!(scan_lists(vec![(), ()], 5, Budget::Infinite.start(), true, |_, _| {}), 5);
    }
}
