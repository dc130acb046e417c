//! Exact multiple-choice knapsack: pick one candidate per slot, maximize the
//! summed objective subject to the summed amount not exceeding the budget.
//!
//! Depth-first branch-and-bound. The bound at a node is the LP relaxation of
//! the remaining slots: each slot's candidates are replaced by the upper
//! concave hull of its (amount, value) points and the hull segments of all
//! remaining slots are filled greedily by decreasing efficiency.
//!
//! Objectives and amounts of a complete selection are always summed in slot
//! order, and feasibility is `sum <= budget` on that sum, so the optimum is
//! bit-identical to what [`brute_force`] reports.

use std::cmp::Ordering;

use super::candidates::SlotCandidateList;
use super::{BrError, Objective};

/// Largest Cartesian product [`brute_force`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MckpSolution {
    /// Chosen amount per slot, in slot order.
    pub amounts: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy)]
struct Item {
    amount: f64,
    value: f64,
}

/// Remaining-slot relaxation: hull segments sorted by decreasing slope with
/// running totals.
#[derive(Debug, Default)]
struct Relaxation {
    base: f64,
    cum_amount: Vec<f64>,
    cum_value: Vec<f64>,
    // slope of segment i (between cum[i] and cum[i+1])
    slope: Vec<f64>,
}

impl Relaxation {
    fn new(base: f64, mut segments: Vec<(f64, f64)>) -> Self {
        // (amount, value) increments; sort by decreasing efficiency
        segments.sort_by(|a, b| {
            let sa = a.1 / a.0;
            let sb = b.1 / b.0;
            sb.total_cmp(&sa)
        });
        let mut cum_amount = vec![0.0];
        let mut cum_value = vec![0.0];
        let mut slope = Vec::with_capacity(segments.len());
        for (da, dv) in segments {
            cum_amount.push(cum_amount.last().unwrap() + da);
            cum_value.push(cum_value.last().unwrap() + dv);
            slope.push(dv / da);
        }
        Self {
            base,
            cum_amount,
            cum_value,
            slope,
        }
    }

    /// Bound with unlimited capacity.
    fn ceiling(&self) -> f64 {
        self.base + self.cum_value.last().unwrap()
    }

    fn bound(&self, capacity: f64) -> f64 {
        if capacity <= 0.0 {
            return self.base;
        }
        // last full prefix within capacity
        let j = self.cum_amount.partition_point(|&a| a <= capacity) - 1;
        let mut v = self.base + self.cum_value[j];
        if j < self.slope.len() {
            v += (capacity - self.cum_amount[j]) * self.slope[j];
        }
        v
    }
}

/// Upper concave hull of points sorted by strictly increasing amount and
/// value, starting at amount 0. Returns the hull's segment increments.
fn hull_segments(items: &[Item]) -> Vec<(f64, f64)> {
    let mut hull: Vec<Item> = Vec::with_capacity(items.len());
    for &p in items {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b if it lies on or below segment a -> p
            let cross = (b.amount - a.amount) * (p.value - a.value)
                - (b.value - a.value) * (p.amount - a.amount);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.windows(2)
        .map(|w| (w[1].amount - w[0].amount, w[1].value - w[0].value))
        .collect()
}

fn check_lists(lists: &[SlotCandidateList]) -> Result<(), BrError> {
    if lists.is_empty() {
        return Err(BrError::InvalidCandidates("no slots".into()));
    }
    for (i, l) in lists.iter().enumerate() {
        match l.candidates.first() {
            Some(c) if c.amount == 0.0 => {}
            _ => {
                return Err(BrError::InvalidCandidates(format!(
                    "slot {i} list must start with amount 0"
                )))
            }
        }
    }
    Ok(())
}

struct Search<'a> {
    budget: f64,
    // per slot, pruned items
    items: &'a [Vec<Item>],
    // search order -> slot
    order: Vec<usize>,
    // relaxation of slots order[d..]
    relax: Vec<Relaxation>,
    choice: Vec<usize>,
    best_choice: Vec<usize>,
    best_value: f64,
}

impl Search<'_> {
    fn slack(&self) -> f64 {
        1e-9 * (1.0 + self.best_value.abs())
    }

    fn exact_totals(&self, choice: &[usize]) -> (f64, f64) {
        let mut amount = 0.0;
        let mut value = 0.0;
        for (slot, &i) in choice.iter().enumerate() {
            amount += self.items[slot][i].amount;
            value += self.items[slot][i].value;
        }
        (amount, value)
    }

    fn offer(&mut self) {
        let (amount, value) = self.exact_totals(&self.choice);
        if amount > self.budget {
            return;
        }
        let better = match value.total_cmp(&self.best_value) {
            Ordering::Greater => true,
            Ordering::Equal => self.choice < self.best_choice,
            Ordering::Less => false,
        };
        if better {
            self.best_value = value;
            self.best_choice.clone_from(&self.choice);
        }
    }

    fn descend(&mut self, depth: usize, used: f64, partial: f64) {
        let remaining = self.budget - used;
        match self.order.len() - depth {
            1 => self.last_slot(depth, remaining),
            2 => self.last_two_slots(depth, remaining, partial),
            _ => self.branch(depth, used, partial, remaining),
        }
    }

    fn tol(&self) -> f64 {
        1e-9 * (1.0 + self.budget.abs())
    }

    /// Tries candidates `i, i-1, ..` of `slot` until the selection is exactly
    /// feasible, then offers it.
    fn offer_largest_feasible(&mut self, slot: usize, mut i: usize) {
        loop {
            self.choice[slot] = i;
            let (amount, _) = self.exact_totals(&self.choice);
            if amount <= self.budget {
                self.offer();
                break;
            }
            if i == 0 {
                break;
            }
            i -= 1;
        }
        self.choice[slot] = 0;
    }

    fn last_slot(&mut self, depth: usize, remaining: f64) {
        // values strictly increase with amount, so the largest affordable
        // candidate is the only one worth trying
        let slot = self.order[depth];
        let tol = self.tol();
        let i = self.items[slot].partition_point(|it| it.amount <= remaining + tol);
        if i > 0 {
            self.offer_largest_feasible(slot, i - 1);
        }
    }

    /// Two slots left: sweep the first by increasing amount while a pointer
    /// walks the second down to its largest affordable candidate.
    fn last_two_slots(&mut self, depth: usize, remaining: f64, partial: f64) {
        let (a, b) = (self.order[depth], self.order[depth + 1]);
        let tol = self.tol();
        let items = self.items;
        let mut k = items[b].len();
        for (j, it) in items[a].iter().enumerate() {
            if it.amount > remaining + tol {
                break;
            }
            let cap = remaining - it.amount;
            while k > 0 && items[b][k - 1].amount > cap + tol {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            let value = partial + it.value + items[b][k - 1].value;
            if value < self.best_value - self.slack() {
                continue;
            }
            self.choice[a] = j;
            self.offer_largest_feasible(b, k - 1);
        }
        self.choice[a] = 0;
    }

    fn branch(&mut self, depth: usize, used: f64, partial: f64, remaining: f64) {
        let slot = self.order[depth];
        let tol = self.tol();
        for i in (0..self.items[slot].len()).rev() {
            let it = self.items[slot][i];
            if it.amount > remaining + tol {
                continue;
            }
            let value = partial + it.value;
            // later candidates are worth less, even with unlimited capacity
            if value + self.relax[depth + 1].ceiling() < self.best_value - self.slack() {
                break;
            }
            let bound = value + self.relax[depth + 1].bound(remaining - it.amount);
            if bound < self.best_value - self.slack() {
                continue;
            }
            self.choice[slot] = i;
            self.descend(depth + 1, used + it.amount, value);
        }
        self.choice[slot] = 0;
    }
}

/// Solves the multiple-choice knapsack exactly.
///
/// Among selections with equal objective the lexicographically smallest
/// vector of candidate indices (after dominance pruning) wins.
pub fn solve_mckp(
    lists: &[SlotCandidateList],
    budget: f64,
    objective: Objective,
) -> Result<MckpSolution, BrError> {
    check_lists(lists)?;

    let items: Vec<Vec<Item>> = lists
        .iter()
        .map(|l| {
            l.prune_dominated(objective)
                .candidates
                .iter()
                .filter(|c| c.amount <= budget)
                .map(|c| Item {
                    amount: c.amount,
                    value: c.value(objective),
                })
                .collect()
        })
        .collect();

    // slots with the most to gain first
    let spread = |s: usize| items[s].last().unwrap().value - items[s][0].value;
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| spread(b).total_cmp(&spread(a)).then(a.cmp(&b)));

    let hulls: Vec<Vec<(f64, f64)>> = items.iter().map(|it| hull_segments(it)).collect();
    let mut relax = Vec::with_capacity(order.len() + 1);
    for d in 0..=order.len() {
        let rest = &order[d..];
        let base = rest.iter().map(|&s| items[s][0].value).sum();
        let segments = rest
            .iter()
            .flat_map(|&s| hulls[s].iter().copied())
            .collect();
        relax.push(Relaxation::new(base, segments));
    }

    let zeros = vec![0; items.len()];
    let mut search = Search {
        budget,
        items: &items,
        order,
        relax,
        choice: zeros.clone(),
        best_choice: zeros,
        best_value: f64::NEG_INFINITY,
    };
    // all-zero selection is always feasible
    search.offer();
    search.descend(0, 0.0, 0.0);

    if !search.best_value.is_finite() {
        return Err(BrError::Infeasible);
    }
    let amounts = search
        .best_choice
        .iter()
        .enumerate()
        .map(|(s, &i)| items[s][i].amount)
        .collect();
    Ok(MckpSolution {
        amounts,
        objective: search.best_value,
    })
}

/// Testing oracle: enumerates every selection and returns the best feasible
/// objective, summing in slot order exactly as [`solve_mckp`] does.
pub fn brute_force(
    lists: &[SlotCandidateList],
    budget: f64,
    objective: Objective,
) -> Result<f64, BrError> {
    if lists.is_empty() || lists.iter().any(|l| l.candidates.is_empty()) {
        return Err(BrError::InvalidCandidates("empty candidate list".into()));
    }
    let size = lists
        .iter()
        .try_fold(1u128, |acc, l| acc.checked_mul(l.candidates.len() as u128))
        .unwrap_or(u128::MAX);
    if size > BRUTE_FORCE_LIMIT {
        return Err(BrError::ProductTooLarge(size));
    }

    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; lists.len()];
    loop {
        let mut amount = 0.0;
        let mut value = 0.0;
        for (l, &i) in lists.iter().zip(&idx) {
            amount += l.candidates[i].amount;
            value += l.candidates[i].value(objective);
        }
        if amount <= budget && value > best {
            best = value;
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == idx.len() {
                return if best.is_finite() {
                    Ok(best)
                } else {
                    Err(BrError::Infeasible)
                };
            }
            idx[k] += 1;
            if idx[k] < lists[k].candidates.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
