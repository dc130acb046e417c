//! Utilities and the reference (naive) value/exploitability procedures.

use crate::game::{Allocation, ConditionalAllocation, Game, GameError, History};

/// Player 1's payoff on a single slot holding a battlefield worth `value`.
///
/// Player 1 wins when ahead by at least `delta`, loses on ties or when
/// behind, and scores zero inside the gap.
#[inline]
pub fn slot_payoff1(x: f64, y: f64, value: f64, delta: f64) -> f64 {
    if x >= y + delta {
        value
    } else if x <= y {
        -value
    } else {
        0.0
    }
}

/// Player 2's slot payoff, the exact negation of [`slot_payoff1`].
#[inline]
pub fn slot_payoff2(x: f64, y: f64, value: f64, delta: f64) -> f64 {
    -slot_payoff1(x, y, value, delta)
}

fn check_dims(game: &Game, s1: &Allocation, s2: &ConditionalAllocation) -> Result<(), GameError> {
    let n = game.num_slots();
    if s1.len() != n || s2.num_slots() != n || s2.num_outcomes() != game.num_outcomes() {
        return Err(GameError::DimensionMismatch(format!(
            "strategies ({} slots; {}x{}) do not match game ({} outcomes x {n} slots)",
            s1.len(),
            s2.num_outcomes(),
            s2.num_slots(),
            game.num_outcomes()
        )));
    }
    Ok(())
}

/// Expected utility of player 1, checking dimensions first.
pub fn utility1(
    game: &Game,
    s1: &Allocation,
    s2: &ConditionalAllocation,
) -> Result<f64, GameError> {
    check_dims(game, s1, s2)?;
    Ok(utility1_unchecked(game, s1.amounts(), s2))
}

/// Expected utility of player 2, `-utility1`.
pub fn utility2(
    game: &Game,
    s1: &Allocation,
    s2: &ConditionalAllocation,
) -> Result<f64, GameError> {
    utility1(game, s1, s2).map(|u| -u)
}

/// Hot-path utility for strategies already known to match the game.
#[inline]
pub fn utility1_unchecked(game: &Game, s1: &[f64], s2: &ConditionalAllocation) -> f64 {
    let delta = game.delta();
    let mut total = 0.0;
    for o in 0..game.num_outcomes() {
        let row = s2.row(o);
        let mut per_outcome = 0.0;
        for (q, (&x, &y)) in s1.iter().zip(row).enumerate() {
            per_outcome += slot_payoff1(x, y, game.slot_value(o, q), delta);
        }
        total += game.prob(o) * per_outcome;
    }
    total
}

/// Player 2's utility from a single outcome row, before weighting by p(o).
pub fn row_utility2(game: &Game, outcome: usize, s1: &[f64], row: &[f64]) -> f64 {
    let delta = game.delta();
    s1.iter()
        .zip(row)
        .enumerate()
        .map(|(q, (&x, &y))| slot_payoff2(x, y, game.slot_value(outcome, q), delta))
        .sum()
}

/// Value of the mixture pair `Mix(S1, 0, t)` vs `Mix(S2, 0, t)` for player 1.
///
/// Loops over every stored pair, every outcome and every slot into a single
/// accumulator, then divides by `(t+1)^2`. O(t^2 M |F|); used as the
/// reference for the engine's incremental bookkeeping.
pub fn mixture_value_naive(game: &Game, history: &History, t: usize) -> Result<f64, GameError> {
    if t >= history.player1.len() || t >= history.player2.len() {
        return Err(GameError::DimensionMismatch(format!(
            "iteration {t} out of range for history of length {}",
            history.len()
        )));
    }
    let delta = game.delta();
    let mut value = 0.0;
    for s1 in &history.player1[..=t] {
        for s2 in &history.player2[..=t] {
            check_dims(game, s1, s2)?;
            for o in 0..game.num_outcomes() {
                for q in 0..game.num_slots() {
                    let x = s1.amounts()[q];
                    let y = s2.get(o, q);
                    let w = game.prob(o) * game.slot_value(o, q);
                    if x >= y + delta {
                        value += w;
                    } else if x <= y {
                        value -= w;
                    }
                }
            }
        }
    }
    let n = (t + 1) as f64;
    Ok(value / (n * n))
}

/// Per-player and overall exploitability at iteration `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exploitability {
    pub eps1: f64,
    pub eps2: f64,
    pub eps: f64,
}

/// Exploitability of the iteration-`t` best responses against the
/// opponents' mixtures over entries `0..t`, relative to the previous values.
pub fn exploitability_naive(
    game: &Game,
    history: &History,
    t: usize,
    br1: &Allocation,
    br2: &ConditionalAllocation,
    v_prev1: f64,
    v_prev2: f64,
) -> Result<Exploitability, GameError> {
    if t == 0 {
        return Err(GameError::DimensionMismatch(
            "exploitability is defined only for t >= 1".into(),
        ));
    }
    if t > history.player1.len() || t > history.player2.len() {
        return Err(GameError::DimensionMismatch(format!(
            "iteration {t} out of range for history of length {}",
            history.len()
        )));
    }
    let delta = game.delta();

    let mut eps1 = 0.0;
    for s2 in &history.player2[..t] {
        check_dims(game, br1, s2)?;
        for o in 0..game.num_outcomes() {
            for q in 0..game.num_slots() {
                let x = br1.amounts()[q];
                let y = s2.get(o, q);
                let w = game.prob(o) * game.slot_value(o, q);
                if x >= y + delta {
                    eps1 += w;
                } else if x <= y {
                    eps1 -= w;
                }
            }
        }
    }
    eps1 = eps1 / t as f64 - v_prev1;

    let mut eps2 = 0.0;
    for s1 in &history.player1[..t] {
        check_dims(game, s1, br2)?;
        for o in 0..game.num_outcomes() {
            for q in 0..game.num_slots() {
                let x = s1.amounts()[q];
                let y = br2.get(o, q);
                let w = game.prob(o) * game.slot_value(o, q);
                if x >= y + delta {
                    eps2 -= w;
                } else if x <= y {
                    eps2 += w;
                }
            }
        }
    }
    eps2 = eps2 / t as f64 - v_prev2;

    Ok(Exploitability {
        eps1,
        eps2,
        eps: eps1.max(eps2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameSpec;
    use proptest::prelude::*;

    fn third(b: f64) -> Vec<f64> {
        vec![b / 3.0; 3]
    }

    #[test]
    fn slot_payoff_cases() {
        assert_eq!(slot_payoff1(10.0, 7.0, 0.7, 1e-4), 0.7);
        assert_eq!(slot_payoff1(0.0, 0.0, 0.2, 1e-4), -0.2);
        assert_eq!(slot_payoff1(7.00005, 7.0, 0.1, 1e-4), 0.0);
        assert_eq!(slot_payoff2(7.00005, 7.0, 0.1, 1e-4), 0.0);
        assert_eq!(slot_payoff2(0.0, 0.0, 0.2, 1e-4), 0.2);
    }

    #[test]
    fn concentrated_vs_concentrated() {
        // per-outcome sums 0.4, -0.8, -0.6
        let g = Game::blotto3();
        let s1 = Allocation::new(&g, vec![10.0, 0.0, 0.0]).unwrap();
        let s2 = ConditionalAllocation::repeated(&g, &[7.0, 0.0, 0.0]).unwrap();
        let u = utility1(&g, &s1, &s2).unwrap();
        assert!((u - (-1.0 / 3.0)).abs() < 1e-12, "{u}");
        assert_eq!(utility2(&g, &s1, &s2).unwrap(), -u);
    }

    #[test]
    fn uniform_vs_uniform_player1_sweeps() {
        let g = Game::blotto3();
        let s1 = Allocation::new(&g, third(10.0)).unwrap();
        let s2 = ConditionalAllocation::repeated(&g, &third(7.0)).unwrap();
        assert!((utility1(&g, &s1, &s2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = Game::blotto3();
        let s1 = Allocation::from_raw(vec![5.0, 5.0]);
        let s2 = ConditionalAllocation::uniform(&g);
        assert!(matches!(
            utility1(&g, &s1, &s2),
            Err(GameError::DimensionMismatch(_))
        ));
    }

    fn four_pair_history(g: &Game) -> History {
        let mut h = History::new(
            Allocation::new(g, vec![10.0, 0.0, 0.0]).unwrap(),
            ConditionalAllocation::repeated(g, &[7.0, 0.0, 0.0]).unwrap(),
        );
        h.push(
            Allocation::new(g, third(10.0)).unwrap(),
            ConditionalAllocation::repeated(g, &third(7.0)).unwrap(),
        );
        h
    }

    #[test]
    fn mixture_value_matches_pairwise_mean() {
        let g = Game::blotto3();
        let h = four_pair_history(&g);
        let mut sum = 0.0;
        for a in &h.player1 {
            for b in &h.player2 {
                sum += utility1(&g, a, b).unwrap();
            }
        }
        let v = mixture_value_naive(&g, &h, 1).unwrap();
        assert!((v - sum / 4.0).abs() < 1e-12);
        let v0 = mixture_value_naive(&g, &h, 0).unwrap();
        assert!((v0 - (-1.0 / 3.0)).abs() < 1e-12);
        assert!(mixture_value_naive(&g, &h, 2).is_err());
    }

    #[test]
    fn mixture_value_of_repeated_pair() {
        let g = Game::blotto3();
        let s1 = Allocation::new(&g, vec![2.0, 3.0, 5.0]).unwrap();
        let s2 = ConditionalAllocation::repeated(&g, &[1.0, 3.0, 3.0]).unwrap();
        let mut h = History::new(s1.clone(), s2.clone());
        for _ in 0..4 {
            h.push(s1.clone(), s2.clone());
        }
        let u = utility1(&g, &s1, &s2).unwrap();
        for t in 0..5 {
            assert!((mixture_value_naive(&g, &h, t).unwrap() - u).abs() < 1e-12);
        }
    }

    #[test]
    fn exploitability_of_unbeatable_start() {
        let g = Game::blotto3();
        let s1 = Allocation::new(&g, third(10.0)).unwrap();
        let s2 = ConditionalAllocation::repeated(&g, &third(7.0)).unwrap();
        let h = History::new(s1.clone(), s2.clone());
        // player 1 already wins everything; the response (10/3,..) keeps that
        let e = exploitability_naive(&g, &h, 1, &s1, &s2, 1.0, -1.0).unwrap();
        assert!(e.eps1.abs() < 1e-12);
        assert!(exploitability_naive(&g, &h, 0, &s1, &s2, 1.0, -1.0).is_err());
    }

    #[test]
    fn exploitability_zero_when_matching_previous_value() {
        let g = Game::blotto3();
        let h = four_pair_history(&g);
        let br1 = Allocation::new(&g, vec![4.0, 3.0, 3.0]).unwrap();
        let br2 = ConditionalAllocation::uniform(&g);
        let avg1 = (utility1(&g, &br1, &h.player2[0]).unwrap()
            + utility1(&g, &br1, &h.player2[1]).unwrap())
            / 2.0;
        let e = exploitability_naive(&g, &h, 2, &br1, &br2, avg1, 0.0).unwrap();
        assert!(e.eps1.abs() < 1e-12);
        assert_eq!(e.eps, e.eps1.max(e.eps2));
    }

    fn arb_game() -> impl Strategy<Value = Game> {
        (1usize..=4)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(0.05f64..2.0, n),
                    proptest::collection::vec(
                        Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                        1..4,
                    ),
                    1.0f64..12.0,
                    1.0f64..12.0,
                    1e-5f64..0.5,
                )
            })
            .prop_flat_map(|(values, outcomes, b1, b2, delta)| {
                let m = outcomes.len();
                (
                    Just(values),
                    Just(outcomes),
                    proptest::collection::vec(0.01f64..1.0, m),
                    Just(b1),
                    Just(b2),
                    Just(delta),
                )
            })
            .prop_map(|(values, outcomes, w, b1, b2, delta)| {
                let s: f64 = w.iter().sum();
                let mut probs: Vec<f64> = w.iter().map(|x| x / s).collect();
                let head: f64 = probs[..probs.len() - 1].iter().sum();
                *probs.last_mut().unwrap() = 1.0 - head;
                Game::new(GameSpec {
                    battlefield_values: values,
                    outcomes,
                    outcome_probs: probs,
                    budget1: b1,
                    budget2: b2,
                    delta,
                })
                .unwrap()
            })
    }

    fn scaled(weights: &[f64], budget: f64) -> Vec<f64> {
        let s: f64 = weights.iter().sum();
        weights.iter().map(|w| w / s * budget).collect()
    }

    fn arb_pair() -> impl Strategy<Value = (Game, Allocation, ConditionalAllocation)> {
        arb_game().prop_flat_map(|g| {
            let n = g.num_slots();
            let m = g.num_outcomes();
            (
                Just(g),
                proptest::collection::vec(0.01f64..1.0, n),
                proptest::collection::vec(proptest::collection::vec(0.01f64..1.0, n), m),
            )
                .prop_map(|(g, w1, w2)| {
                    let s1 = Allocation::from_raw(scaled(&w1, g.budget1()));
                    let rows = w2.iter().map(|w| scaled(w, g.budget2())).collect();
                    let s2 = ConditionalAllocation::from_rows_raw(g.num_slots(), rows);
                    (g, s1, s2)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn zero_sum_and_bounded((g, s1, s2) in arb_pair()) {
            let u1 = utility1(&g, &s1, &s2).unwrap();
            let u2 = utility2(&g, &s1, &s2).unwrap();
            prop_assert!((u1 + u2).abs() <= 1e-15);
            prop_assert!(u1.abs() <= g.total_value() + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn slot_payoff_is_monotone(value in 0.01f64..5.0, delta in 1e-4f64..1.0) {
            let grid: Vec<f64> = (0..100).map(|i| i as f64 * 0.05).collect();
            for &y in &grid {
                for w in grid.windows(2) {
                    prop_assert!(slot_payoff1(w[0], y, value, delta) <= slot_payoff1(w[1], y, value, delta));
                }
            }
            for &x in &grid {
                for w in grid.windows(2) {
                    prop_assert!(slot_payoff1(x, w[0], value, delta) >= slot_payoff1(x, w[1], value, delta));
                }
            }
        }

        #[test]
        fn relabeling_slots_preserves_utility(
            (g, s1, s2) in arb_pair(),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let n = g.num_slots();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            // new slot q holds what old slot perm[q] held
            let mut spec = g.spec();
            spec.outcomes = g.outcomes().iter().map(|o| perm.iter().map(|&p| o[p]).collect()).collect();
            let g2 = Game::new(spec).unwrap();
            let t1 = Allocation::from_raw(perm.iter().map(|&p| s1.amounts()[p]).collect());
            let rows = s2.rows().map(|r| perm.iter().map(|&p| r[p]).collect()).collect();
            let t2 = ConditionalAllocation::from_rows_raw(n, rows);
            let a = utility1(&g, &s1, &s2).unwrap();
            let b = utility1(&g2, &t1, &t2).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn mixture_value_at_zero_is_first_pair((g, s1, s2) in arb_pair()) {
            let h = History::new(s1.clone(), s2.clone());
            let v = mixture_value_naive(&g, &h, 0).unwrap();
            prop_assert!((v - utility1(&g, &s1, &s2).unwrap()).abs() < 1e-12);
        }
    }
}
