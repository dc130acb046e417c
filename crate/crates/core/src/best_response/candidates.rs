//! Breakpoint reduction of the best-response problems.
//!
//! Against a fixed history, the responder's payoff on one slot is a
//! nondecreasing step function of the amount placed there. Only the amounts
//! where a step can be attained need to be considered, so each slot reduces to
//! a short list of candidate amounts and the whole problem becomes a
//! multiple-choice knapsack.

use std::borrow::Borrow;

use super::{BrError, Mode, Objective};
use crate::game::{Allocation, ConditionalAllocation, Game};

/// Thresholds closer than this are merged into one candidate.
pub const MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub amount: f64,
    /// Weighted count of thresholds met by `amount` (the wins-only objective).
    pub win_weight: f64,
    /// Responder's true expected slot payoff against the mixture.
    pub true_value: f64,
}

impl Candidate {
    #[inline]
    pub fn value(&self, objective: Objective) -> f64 {
        match objective {
            Objective::WinWeight => self.win_weight,
            Objective::TrueValue => self.true_value,
        }
    }
}

/// Candidate amounts for one slot, sorted by strictly increasing amount.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotCandidateList {
    pub slot: usize,
    pub candidates: Vec<Candidate>,
}

impl SlotCandidateList {
    pub fn amounts(&self) -> Vec<f64> {
        self.candidates.iter().map(|c| c.amount).collect()
    }

    /// Drops every candidate whose objective is not strictly above that of
    /// some cheaper candidate.
    pub fn prune_dominated(&self, objective: Objective) -> SlotCandidateList {
        let mut kept: Vec<Candidate> = Vec::with_capacity(self.candidates.len());
        for c in &self.candidates {
            match kept.last() {
                Some(last) if c.value(objective) <= last.value(objective) => {}
                _ => kept.push(*c),
            }
        }
        SlotCandidateList {
            slot: self.slot,
            candidates: kept,
        }
    }
}

/// Weighted step thresholds for one slot of the responder.
///
/// For player 1: wins at `a >= y + delta`, loses at `a <= y`.
/// For player 2: wins at `a >= x`, loses at `x >= a + delta`.
struct SlotProfile {
    // (threshold, weight) sorted by threshold
    thresholds: Vec<(f64, f64)>,
    prefix: Vec<f64>,
    total: f64,
}

impl SlotProfile {
    fn new(mut thresholds: Vec<(f64, f64)>) -> Self {
        thresholds.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(thresholds.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &(_, w) in &thresholds {
            acc += w;
            prefix.push(acc);
        }
        Self {
            thresholds,
            prefix,
            total: acc,
        }
    }

    /// Weight of thresholds `h` with `pred(h)` true, where `pred` holds on a
    /// prefix of the sorted thresholds.
    fn weight_where(&self, pred: impl FnMut(&(f64, f64)) -> bool) -> f64 {
        self.prefix[self.thresholds.partition_point(pred)]
    }
}

/// Sorts and merges near-duplicate positive amounts, keeping the largest of
/// each cluster so no merged threshold is counted without being met.
/// Amount zero is always first.
fn normalize_points(mut points: Vec<f64>, budget: f64) -> Vec<f64> {
    points.retain(|&a| a > 0.0 && a <= budget);
    points.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(points.len() + 1);
    out.push(0.0);
    for a in points {
        let n = out.len();
        if n > 1 && a - out[n - 1] <= MERGE_TOLERANCE {
            out[n - 1] = a;
        } else {
            out.push(a);
        }
    }
    out
}

/// Adds the points where an open interval of zero payoff begins. Each is the
/// cheapest amount in its interval, so no merging is applied to them.
fn with_gap_starts(
    mut points: Vec<f64>,
    gaps: impl IntoIterator<Item = f64>,
    budget: f64,
) -> Vec<f64> {
    points.extend(gaps.into_iter().filter(|&a| a > 0.0 && a <= budget));
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Smallest non-negative amount `a` with `a + delta > x` in floating point.
fn first_above(x: f64, delta: f64) -> f64 {
    let mut a = (x - delta).max(0.0);
    while a + delta <= x {
        a = a.next_up();
    }
    while a > 0.0 && a.next_down() + delta > x {
        a = a.next_down();
    }
    a
}

/// Candidate list for player 1's `slot` against a mixture of player 2
/// strategies.
pub fn candidate_set1<S: Borrow<ConditionalAllocation>>(
    game: &Game,
    history_p2: &[S],
    slot: usize,
    mode: Mode,
) -> Result<SlotCandidateList, BrError> {
    if history_p2.is_empty() {
        return Err(BrError::EmptyHistory);
    }
    if slot >= game.num_slots() {
        return Err(BrError::BadSlot(slot));
    }
    let delta = game.delta();
    let budget = game.budget1();
    let n = history_p2.len() as f64;

    let mut wins = Vec::with_capacity(history_p2.len() * game.num_outcomes());
    let mut losses = Vec::with_capacity(wins.capacity());
    for s2 in history_p2 {
        let s2 = s2.borrow();
        for o in 0..game.num_outcomes() {
            let y = s2.get(o, slot);
            let w = game.prob(o) * game.slot_value(o, slot) / n;
            wins.push((y + delta, w));
            losses.push((y, w));
        }
    }

    let mut points = normalize_points(wins.iter().map(|&(h, _)| h).collect(), budget);
    if mode == Mode::Utility {
        // just past y the slot is no longer lost
        points = with_gap_starts(points, losses.iter().map(|&(y, _)| y.next_up()), budget);
    }

    let wins = SlotProfile::new(wins);
    let losses = SlotProfile::new(losses);
    let candidates = points
        .into_iter()
        .map(|a| {
            let win = wins.weight_where(|&(h, _)| h <= a);
            // a <= y  <=>  not (y < a)
            let lose = losses.total - losses.weight_where(|&(y, _)| y < a);
            Candidate {
                amount: a,
                win_weight: win,
                true_value: win - lose,
            }
        })
        .collect();
    Ok(SlotCandidateList { slot, candidates })
}

/// Candidate list for player 2's `slot` under `outcome` against a mixture of
/// player 1 strategies. Ties go to player 2, so thresholds carry no delta.
pub fn candidate_set2<S: Borrow<Allocation>>(
    game: &Game,
    history_p1: &[S],
    outcome: usize,
    slot: usize,
    mode: Mode,
) -> Result<SlotCandidateList, BrError> {
    if history_p1.is_empty() {
        return Err(BrError::EmptyHistory);
    }
    if outcome >= game.num_outcomes() {
        return Err(BrError::BadOutcome(outcome));
    }
    if slot >= game.num_slots() {
        return Err(BrError::BadSlot(slot));
    }
    let delta = game.delta();
    let budget = game.budget2();
    let w = game.slot_value(outcome, slot) / history_p1.len() as f64;

    let xs: Vec<(f64, f64)> = history_p1
        .iter()
        .map(|s1| (s1.borrow().amounts()[slot], w))
        .collect();

    let mut points = normalize_points(xs.iter().map(|&(x, _)| x).collect(), budget);
    if mode == Mode::Utility {
        points = with_gap_starts(
            points,
            xs.iter().map(|&(x, _)| first_above(x, delta)),
            budget,
        );
    }

    let profile = SlotProfile::new(xs);
    let candidates = points
        .into_iter()
        .map(|a| {
            let win = profile.weight_where(|&(x, _)| x <= a);
            // player 1 takes the slot when x >= a + delta
            let c = a + delta;
            let lose = profile.total - profile.weight_where(|&(x, _)| x < c);
            Candidate {
                amount: a,
                win_weight: win,
                true_value: win - lose,
            }
        })
        .collect();
    Ok(SlotCandidateList { slot, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::payoff::{slot_payoff1, slot_payoff2};

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn player1_single_threshold() {
        let g = Game::blotto3();
        let h = vec![ConditionalAllocation::repeated(&g, &[7.0, 0.0, 0.0]).unwrap()];
        let c0 = candidate_set1(&g, &h, 0, Mode::Wins).unwrap();
        assert!(close(&c0.amounts(), &[0.0, 7.0001]), "{:?}", c0.amounts());
        let c1 = candidate_set1(&g, &h, 1, Mode::Wins).unwrap();
        assert!(close(&c1.amounts(), &[0.0, 0.0001]));
        // winning slot 1 in every outcome is worth the mean slot-1 value
        let expected = (0.2 + 0.7 + 0.1) / 3.0;
        assert!((c1.candidates[1].win_weight - expected).abs() < 1e-12);
        assert_eq!(c1.candidates[0].win_weight, 0.0);
        assert!((c1.candidates[0].true_value + expected).abs() < 1e-12);
    }

    #[test]
    fn player1_unaffordable_threshold_is_dropped() {
        let g = Game::blotto3();
        let h = vec![ConditionalAllocation::repeated(&g, &[3.0, 2.0, 2.0]).unwrap(); 1];
        let g2 = Game::new(crate::game::GameSpec {
            budget2: 10.5 - 1e-4,
            ..g.spec()
        })
        .unwrap();
        let h2 = vec![ConditionalAllocation::repeated(&g2, &[10.5 - 1e-4, 0.0, 0.0]).unwrap()];
        let c = candidate_set1(&g2, &h2, 0, Mode::Wins).unwrap();
        assert_eq!(c.amounts(), vec![0.0]);
        assert_eq!(
            candidate_set1(&g, &h, 0, Mode::Wins)
                .unwrap()
                .candidates
                .len(),
            2
        );
    }

    #[test]
    fn player2_thresholds() {
        let g = Game::blotto3();
        let h = vec![Allocation::new(&g, vec![10.0, 0.0, 0.0]).unwrap()];
        let c0 = candidate_set2(&g, &h, 0, 0, Mode::Wins).unwrap();
        assert_eq!(c0.amounts(), vec![0.0]);
        let c1 = candidate_set2(&g, &h, 0, 1, Mode::Wins).unwrap();
        assert_eq!(c1.amounts(), vec![0.0]);
        assert!((c1.candidates[0].win_weight - 0.2).abs() < 1e-15);

        let h = vec![
            Allocation::new(&g, vec![3.0, 3.0, 4.0]).unwrap(),
            Allocation::new(&g, vec![5.0, 2.0, 3.0]).unwrap(),
        ];
        let c = candidate_set2(&g, &h, 0, 0, Mode::Wins).unwrap();
        assert_eq!(c.amounts(), vec![0.0, 3.0, 5.0]);
    }

    #[test]
    fn errors() {
        let g = Game::blotto3();
        let empty: Vec<ConditionalAllocation> = vec![];
        assert_eq!(
            candidate_set1(&g, &empty, 0, Mode::Wins),
            Err(BrError::EmptyHistory)
        );
        let h = vec![Allocation::uniform(&g)];
        assert_eq!(
            candidate_set2(&g, &h, 3, 0, Mode::Wins),
            Err(BrError::BadOutcome(3))
        );
    }

    #[test]
    fn duplicate_thresholds_merge() {
        let g = Game::blotto3();
        let s = ConditionalAllocation::repeated(&g, &[7.0, 0.0, 0.0]).unwrap();
        let h = vec![s.clone(), s.clone(), s];
        let c = candidate_set1(&g, &h, 0, Mode::Wins).unwrap();
        assert_eq!(c.candidates.len(), 2);
    }

    #[test]
    fn utility_mode_covers_every_piece() {
        // the gap (y, y + delta) and the lose region must both be represented
        let g = Game::blotto3();
        let h = vec![
            ConditionalAllocation::repeated(&g, &[2.0, 2.5, 2.5]).unwrap(),
            ConditionalAllocation::repeated(&g, &[4.0, 1.5, 1.5]).unwrap(),
        ];
        let c = candidate_set1(&g, &h, 0, Mode::Utility).unwrap();
        let a = c.amounts();
        assert!(a.contains(&2.0f64.next_up()));
        assert!(a.contains(&4.0f64.next_up()));
        assert!(a.contains(&(4.0 + g.delta())));
        let gap = c
            .candidates
            .iter()
            .find(|c| c.amount == 2.0f64.next_up())
            .unwrap();
        let at = c
            .candidates
            .iter()
            .find(|c| c.amount == 2.0 + g.delta())
            .unwrap();
        assert!(gap.true_value > -g.total_value() && gap.true_value < at.true_value);
    }

    #[test]
    fn player2_gap_starts_at_the_first_amount_short_of_losing() {
        let g = Game::blotto3();
        let h = vec![Allocation::new(&g, vec![3.0, 3.0, 4.0]).unwrap()];
        let c = candidate_set2(&g, &h, 0, 0, Mode::Utility).unwrap();
        let gap = c.candidates[1];
        assert!(gap.amount + g.delta() > 3.0);
        assert!(gap.amount.next_down() + g.delta() <= 3.0);
        assert_eq!(slot_payoff2(3.0, gap.amount, 1.0, g.delta()), 0.0);
        assert_eq!(
            slot_payoff2(3.0, gap.amount.next_down(), 1.0, g.delta()),
            -1.0
        );
        assert_eq!(c.candidates.len(), 3);
    }

    #[test]
    fn candidate_values_match_direct_evaluation() {
        let g = Game::blotto3();
        let h2 = vec![
            ConditionalAllocation::new(
                &g,
                vec![
                    vec![1.0, 2.0, 4.0],
                    vec![3.0, 3.0, 1.0],
                    vec![0.0, 7.0, 0.0],
                ],
            )
            .unwrap(),
            ConditionalAllocation::repeated(&g, &[2.0, 2.0, 3.0]).unwrap(),
        ];
        for mode in [Mode::Wins, Mode::Utility] {
            for q in 0..3 {
                let c = candidate_set1(&g, &h2, q, mode).unwrap();
                for cand in &c.candidates {
                    let mut direct = 0.0;
                    for s2 in &h2 {
                        for o in 0..3 {
                            direct += g.prob(o)
                                * slot_payoff1(
                                    cand.amount,
                                    s2.get(o, q),
                                    g.slot_value(o, q),
                                    g.delta(),
                                );
                        }
                    }
                    direct /= h2.len() as f64;
                    assert!((direct - cand.true_value).abs() < 1e-12);
                }
                for w in c.candidates.windows(2) {
                    assert!(w[0].amount < w[1].amount);
                    assert!(w[0].win_weight <= w[1].win_weight);
                    assert!(w[0].true_value <= w[1].true_value);
                }
            }
        }
        let h1 = vec![
            Allocation::new(&g, vec![3.0, 3.0, 4.0]).unwrap(),
            Allocation::new(&g, vec![5.0, 2.0, 3.0]).unwrap(),
            Allocation::new(&g, vec![2.99995, 3.0, 4.00005]).unwrap(),
        ];
        for mode in [Mode::Wins, Mode::Utility] {
            for o in 0..3 {
                for q in 0..3 {
                    let c = candidate_set2(&g, &h1, o, q, mode).unwrap();
                    for cand in &c.candidates {
                        let direct: f64 = h1
                            .iter()
                            .map(|s1| {
                                slot_payoff2(
                                    s1.amounts()[q],
                                    cand.amount,
                                    g.slot_value(o, q),
                                    g.delta(),
                                )
                            })
                            .sum::<f64>()
                            / h1.len() as f64;
                        assert!((direct - cand.true_value).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn pruning_keeps_strict_increase() {
        let list = SlotCandidateList {
            slot: 0,
            candidates: vec![
                Candidate {
                    amount: 0.0,
                    win_weight: 0.0,
                    true_value: -1.0,
                },
                Candidate {
                    amount: 1.0,
                    win_weight: 0.0,
                    true_value: 0.0,
                },
                Candidate {
                    amount: 2.0,
                    win_weight: 0.5,
                    true_value: 0.0,
                },
                Candidate {
                    amount: 3.0,
                    win_weight: 0.5,
                    true_value: 1.0,
                },
            ],
        };
        let w = list.prune_dominated(Objective::WinWeight);
        assert_eq!(w.amounts(), vec![0.0, 2.0]);
        let u = list.prune_dominated(Objective::TrueValue);
        assert_eq!(u.amounts(), vec![0.0, 1.0, 3.0]);
    }
}
