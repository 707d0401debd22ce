//! Ground-truth searchers over the joint code space.

use crate::env::LinkTable;
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub codes: Vec<usize>,
    pub total: f64,
    /// Whether every receiver meets `e_min` under `codes`.
    pub feasible: bool,
    /// Number of candidate assignments (exhaustive) or single-agent choices (sequential) scored.
    pub evaluations: u128,
}

/// `N^L`, or `None` on overflow.
pub fn joint_space_size(code_count: usize, tx_count: usize) -> Option<u128> {
    (code_count as u128).checked_pow(u32::try_from(tx_count).ok()?)
}

/// Enumerate every joint assignment and keep the best feasible one.
///
/// Assignments are visited in lexicographic order and replaced only on a
/// strict improvement, so ties resolve to the lexicographically smallest.
/// When nothing is feasible the unconstrained maximizer is returned with
/// `feasible = false`.
pub fn exhaustive_search(
    links: &LinkTable,
    duration: f64,
    e_min: f64,
    cap: u128,
) -> Result<SearchResult> {
    let (k, l, n) = (links.rx_count(), links.tx_count(), links.code_count());
    let needed = joint_space_size(n, l).unwrap_or(u128::MAX);
    if needed > cap {
        return Err(Error::Resource { needed, cap });
    }

    let mut codes = vec![0usize; l];
    let mut energies = vec![0.0; k];
    let mut best_feasible: Option<(Vec<usize>, f64)> = None;
    let mut best_any: Option<(Vec<usize>, f64)> = None;
    let mut evaluations = 0u128;
    loop {
        for (j, e) in energies.iter_mut().enumerate() {
            let s: f64 = codes
                .iter()
                .enumerate()
                .map(|(p, &c)| links.gain(j, p, c))
                .sum();
            *e = duration * s;
        }
        let total: f64 = energies.iter().sum();
        evaluations += 1;
        if best_any.as_ref().is_none_or(|(_, t)| total > *t) {
            best_any = Some((codes.clone(), total));
        }
        if energies.iter().all(|&e| e >= e_min)
            && best_feasible.as_ref().is_none_or(|(_, t)| total > *t)
        {
            best_feasible = Some((codes.clone(), total));
        }

        // odometer increment, last transmitter fastest
        let mut p = l;
        loop {
            if p == 0 {
                let (codes, total, feasible) = match best_feasible {
                    Some((c, t)) => (c, t, true),
                    None => {
                        let (c, t) = best_any.expect("at least one assignment visited");
                        (c, t, false)
                    }
                };
                return Ok(SearchResult {
                    codes,
                    total,
                    feasible,
                    evaluations,
                });
            }
            p -= 1;
            codes[p] += 1;
            if codes[p] < n {
                break;
            }
            codes[p] = 0;
        }
    }
}

/// One transmitter at a time, each picking the code that maximizes the total
/// over the transmitters chosen so far. Later transmitters contribute nothing
/// while unset. `e_min` only decides the reported feasibility; the search
/// itself ignores it.
pub fn greedy_sequential_search(links: &LinkTable, duration: f64, e_min: f64) -> SearchResult {
    let (k, l, n) = (links.rx_count(), links.tx_count(), links.code_count());
    let mut partial = vec![0.0; k];
    let mut codes = Vec::with_capacity(l);
    let mut evaluations = 0u128;
    for p in 0..l {
        let mut best = 0;
        let mut best_total = f64::NEG_INFINITY;
        for i in 0..n {
            let total: f64 = (0..k)
                .map(|j| partial[j] + duration * links.gain(j, p, i))
                .sum();
            evaluations += 1;
            if total > best_total {
                best = i;
                best_total = total;
            }
        }
        for (j, e) in partial.iter_mut().enumerate() {
            *e += duration * links.gain(j, p, best);
        }
        codes.push(best);
    }
    // Recompute in the same summation order the environment uses.
    let energies: Vec<f64> = (0..k)
        .map(|j| {
            duration
                * codes
                    .iter()
                    .enumerate()
                    .map(|(p, &c)| links.gain(j, p, c))
                    .sum::<f64>()
        })
        .collect();
    SearchResult {
        codes,
        total: energies.iter().sum(),
        feasible: energies.iter().all(|&e| e >= e_min),
        evaluations,
    }
}
