use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use super::forest::SegmentedForest;
use crate::dcopf::{Attack, ShedCache};
use crate::error::Result;
use crate::model::GridCase;

/// Load-shed values within this many MW are treated as ties.
pub const TIE_TOL: f64 = 1e-9;

/// Result of a worst-attack search.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSearch {
    pub attack: Attack,
    /// Load shed of `attack` in MW.
    pub load_shed: f64,
    /// False when the search stopped early at its `stop_at` threshold
    /// below total demand, so `load_shed` is only a lower bound.
    pub complete: bool,
}

/// Ancestors of each node, nearest first.
pub(crate) fn ancestors(forest: &SegmentedForest) -> Vec<Vec<usize>> {
    (0..forest.len())
        .map(|i| {
            let mut out = Vec::new();
            let mut p = forest.nodes[i].parent;
            while let Some(j) = p {
                out.push(j);
                p = forest.nodes[j].parent;
            }
            out
        })
        .collect()
}

/// Depth-first walk over ancestor-closed node sets of at most `budget` nodes,
/// in lexicographic order of their sorted index sequences.
struct Walker<'a> {
    anc: &'a [Vec<usize>],
    budget: usize,
    chosen: Vec<usize>,
    // Ancestors of chosen nodes that are not chosen yet, sorted.
    missing: Vec<usize>,
    saved: Vec<Vec<usize>>,
}

impl<'a> Walker<'a> {
    fn new(anc: &'a [Vec<usize>], budget: usize) -> Self {
        Walker { anc, budget, chosen: Vec::new(), missing: Vec::new(), saved: Vec::new() }
    }

    /// Visits every closed set whose smallest member is `j`.
    fn branch<F>(&mut self, j: usize, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        let r = if self.push(j) {
            if self.missing.is_empty() {
                f(&self.chosen)?;
            }
            self.extend(j + 1, f)
        } else {
            ControlFlow::Continue(())
        };
        self.pop();
        r
    }

    fn extend<F>(&mut self, from: usize, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        if self.chosen.len() >= self.budget {
            return ControlFlow::Continue(());
        }
        // Skipping past a missing ancestor would leave it out for good.
        let end = self.missing.first().map_or(self.anc.len(), |&m| m + 1);
        for j in from..end {
            self.branch(j, f)?;
        }
        ControlFlow::Continue(())
    }

    // Adds `j`; returns whether the extended set can still be closed.
    fn push(&mut self, j: usize) -> bool {
        self.chosen.push(j);
        self.saved.push(self.missing.clone());
        self.missing.retain(|&m| m != j);
        for &a in &self.anc[j] {
            if !self.chosen.contains(&a) && !self.missing.contains(&a) {
                self.missing.push(a);
            }
        }
        self.missing.sort_unstable();
        self.chosen.len() + self.missing.len() <= self.budget && self.missing.first().is_none_or(|&m| m > j)
    }

    fn pop(&mut self) {
        self.chosen.pop();
        self.missing = self.saved.pop().expect("balanced push and pop");
    }
}

/// Calls `f` on every nonempty ancestor-closed node set of at most `budget`
/// nodes in lexicographic order of sorted node indices (which is the order
/// of sorted identifiers). `f` may stop the walk.
pub fn for_each_attack<F>(forest: &SegmentedForest, budget: usize, mut f: F)
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let anc = ancestors(forest);
    let mut w = Walker::new(&anc, budget);
    let _ = w.extend(0, &mut f);
}

/// Number of ancestor-closed node sets of at most `budget` nodes, the empty
/// set included.
pub fn count_attacks(forest: &SegmentedForest, budget: usize) -> u64 {
    let mut n = 1;
    for_each_attack(forest, budget, |_| {
        n += 1;
        ControlFlow::Continue(())
    });
    n
}

/// Exact worst attack by enumeration of every ancestor-closed enclave set of
/// at most `budget` enclaves. Ties go to the lexicographically smallest
/// sorted identifier sequence.
pub fn worst_attack_enumerate(forest: &SegmentedForest, grid: &GridCase, budget: usize) -> Result<(Attack, f64)> {
    let s = search_attacks(forest, grid, budget, &ShedCache::new(), f64::INFINITY)?;
    Ok((s.attack, s.load_shed))
}

/// [`worst_attack_enumerate`] with a shared shed memo and an early stop: the
/// walk ends as soon as an attack sheds at least `stop_at` MW or all demand.
///
/// Top-level branches (sets grouped by smallest member) run on the rayon
/// pool; the reduction keeps the enumeration-order winner, so the answer does
/// not depend on scheduling.
pub fn search_attacks(
    forest: &SegmentedForest,
    grid: &GridCase,
    budget: usize,
    cache: &ShedCache,
    stop_at: f64,
) -> Result<AttackSearch> {
    let total: f64 = grid.loads.iter().map(|d| d.demand).sum();
    let stop = stop_at.min(total);
    let none = Attack::none(grid);
    let base_shed = cache.shed(grid, &none.mask())?;
    let mut best: (f64, Vec<usize>) = (base_shed, Vec::new());
    if base_shed >= stop - TIE_TOL || budget == 0 {
        return Ok(finish(forest, grid, best, stop_at, total));
    }
    let anc = ancestors(forest);
    // Smallest branch that reached the stop threshold.
    let stopped = AtomicUsize::new(usize::MAX);
    let branches: Vec<Result<Option<(f64, Vec<usize>)>>> = (0..forest.len())
        .into_par_iter()
        .map(|j| {
            if stopped.load(Ordering::Relaxed) < j {
                return Ok(None);
            }
            let mut w = Walker::new(&anc, budget);
            let mut local: Option<(f64, Vec<usize>)> = None;
            let mut err = None;
            let _ = w.branch(j, &mut |set: &[usize]| {
                if stopped.load(Ordering::Relaxed) < j {
                    return ControlFlow::Break(());
                }
                let l = match cache.shed(grid, &forest.mask_of(set)) {
                    Ok(l) => l,
                    Err(e) => {
                        err = Some(e);
                        return ControlFlow::Break(());
                    }
                };
                if local.as_ref().is_none_or(|(b, _)| l > b + TIE_TOL) {
                    local = Some((l, set.to_vec()));
                }
                if l >= stop - TIE_TOL {
                    stopped.fetch_min(j, Ordering::Relaxed);
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            });
            match err {
                Some(e) => Err(e),
                None => Ok(local),
            }
        })
        .collect();
    let cut = stopped.load(Ordering::Relaxed);
    for (j, b) in branches.into_iter().enumerate() {
        if j > cut {
            break;
        }
        if let Some((l, set)) = b? {
            if l > best.0 + TIE_TOL {
                best = (l, set);
            }
        }
    }
    Ok(finish(forest, grid, best, stop_at, total))
}

fn finish(forest: &SegmentedForest, grid: &GridCase, best: (f64, Vec<usize>), stop_at: f64, total: f64) -> AttackSearch {
    let complete = stop_at >= total - TIE_TOL || best.0 < stop_at - TIE_TOL;
    AttackSearch { attack: forest.attack_from_nodes(grid, &best.1), load_shed: best.0, complete }
}
