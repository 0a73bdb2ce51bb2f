//! Largest trace mass `sup { τ(p y) : p projection, τ(p) ≤ δ }` of a
//! positive element.
//!
//! By the Ky Fan maximum principle applied in each block, for a fixed rank
//! `k_b` in block `b` the best projection is spanned by the top `k_b`
//! eigenvectors of `y_b`, with value `w_b · (λ_1 + … + λ_{k_b})` and cost
//! `w_b · k_b`. What remains is a multiple-choice knapsack over the ranks.

use nalgebra::DMatrix;

use crate::algebra::{hermitian_eigen, is_positive, Element, Projection, C64};
use crate::error::{Error, Result};

/// Above this many rank combinations the exact solver switches to the
/// integer-grid dynamic program.
const ENUMERATION_LIMIT: u128 = 1 << 22;
const MAX_GRID_DENOMINATOR: u64 = 1000;
const MAX_GRID_CAPACITY: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassMode {
    /// Optimal over all projections.
    Exact,
    /// Descending-eigenvalue greedy fill; a lower bound on the optimum.
    Greedy,
}

/// Rank choice per block and its value/cost.
#[derive(Debug, Clone, PartialEq)]
pub struct RankSelection {
    pub ranks: Vec<usize>,
    pub value: f64,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct ProjectionMass {
    pub value: f64,
    pub projection: Projection,
    pub selection: RankSelection,
    pub mode: MassMode,
}

impl ProjectionMass {
    /// Greedy values are only guaranteed lower bounds.
    pub fn is_lower_bound(&self) -> bool {
        self.mode == MassMode::Greedy
    }
}

/// `Σ_b w_b · (λ_{b,0} + … + λ_{b,k_b−1})`, summed in block order and in
/// index order inside a block.
pub fn selection_value(weights: &[f64], eigenvalues: &[Vec<f64>], ranks: &[usize]) -> f64 {
    let mut value = 0.0;
    for ((w, lambdas), &k) in weights.iter().zip(eigenvalues).zip(ranks) {
        let mut s = 0.0;
        for l in &lambdas[..k] {
            s += l;
        }
        value += w * s;
    }
    value
}

/// `Σ_b w_b · k_b`, summed in block order.
pub fn selection_cost(weights: &[f64], ranks: &[usize]) -> f64 {
    let mut cost = 0.0;
    for (w, &k) in weights.iter().zip(ranks) {
        cost += w * k as f64;
    }
    cost
}

/// Solves the rank-selection knapsack. `eigenvalues[b]` must be sorted
/// descending. Ties go to the earliest blocks taking the largest ranks.
pub fn solve_rank_knapsack(
    weights: &[f64],
    eigenvalues: &[Vec<f64>],
    budget: f64,
    mode: MassMode,
) -> Result<RankSelection> {
    if budget < 0.0 {
        return Err(Error::NegativeBudget(budget));
    }
    let ranks = match mode {
        MassMode::Greedy => greedy(weights, eigenvalues, budget),
        MassMode::Exact => {
            let combos: u128 = eigenvalues.iter().map(|l| l.len() as u128 + 1).product();
            if combos <= ENUMERATION_LIMIT {
                enumerate(weights, eigenvalues, budget)
            } else {
                grid_dp(weights, eigenvalues, budget)?
            }
        }
    };
    Ok(RankSelection {
        value: selection_value(weights, eigenvalues, &ranks),
        cost: selection_cost(weights, &ranks),
        ranks,
    })
}

fn greedy(weights: &[f64], eigenvalues: &[Vec<f64>], budget: f64) -> Vec<usize> {
    let mut items: Vec<(usize, usize)> = eigenvalues
        .iter()
        .enumerate()
        .flat_map(|(b, l)| (0..l.len()).map(move |i| (b, i)))
        .collect();
    // Stable sort keeps (block, index) order among equal eigenvalues.
    items.sort_by(|&(b1, i1), &(b2, i2)| eigenvalues[b2][i2].total_cmp(&eigenvalues[b1][i1]));
    let mut ranks = vec![0; weights.len()];
    for (b, i) in items {
        if i != ranks[b] || eigenvalues[b][i] <= 0.0 {
            continue;
        }
        ranks[b] += 1;
        if selection_cost(weights, &ranks) > budget {
            ranks[b] -= 1;
        }
    }
    ranks
}

/// Depth-first search over ranks with an optimistic bound.
fn enumerate(weights: &[f64], eigenvalues: &[Vec<f64>], budget: f64) -> Vec<usize> {
    let nb = weights.len();
    // best attainable value of blocks b.. ignoring the budget
    let mut tail_bound = vec![0.0; nb + 1];
    for b in (0..nb).rev() {
        let best_block = (0..=eigenvalues[b].len())
            .map(|k| weights[b] * eigenvalues[b][..k].iter().sum::<f64>())
            .fold(0.0, f64::max);
        tail_bound[b] = tail_bound[b + 1] + best_block;
    }
    let mut ranks = vec![0; nb];
    let mut best = (f64::NEG_INFINITY, vec![0; nb]);
    search(weights, eigenvalues, budget, &tail_bound, 0, 0.0, &mut ranks, &mut best);
    best.1
}

#[allow(clippy::too_many_arguments)]
fn search(
    weights: &[f64],
    eigenvalues: &[Vec<f64>],
    budget: f64,
    tail_bound: &[f64],
    b: usize,
    partial: f64,
    ranks: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    if b == weights.len() {
        if selection_cost(weights, ranks) <= budget {
            let value = selection_value(weights, eigenvalues, ranks);
            if value > best.0 {
                *best = (value, ranks.clone());
            }
        }
        return;
    }
    if partial + tail_bound[b] + 1e-12 * (1.0 + partial.abs()) < best.0 {
        return;
    }
    for k in (0..=eigenvalues[b].len()).rev() {
        ranks[b] = k;
        for r in ranks.iter_mut().skip(b + 1) {
            *r = 0;
        }
        if selection_cost(weights, ranks) > budget {
            continue;
        }
        let gain = weights[b] * eigenvalues[b][..k].iter().sum::<f64>();
        search(
            weights,
            eigenvalues,
            budget,
            tail_bound,
            b + 1,
            partial + gain,
            ranks,
            best,
        );
    }
    ranks[b] = 0;
}

/// Common denominator `q ≤ MAX_GRID_DENOMINATOR` with every `w·q` integral.
fn grid_denominator(weights: &[f64]) -> Option<u64> {
    (1..=MAX_GRID_DENOMINATOR).find(|&q| {
        weights.iter().all(|&w| {
            let s = w * q as f64;
            (s - s.round()).abs() <= 1e-9 * s.max(1.0) && s.round() >= 1.0
        })
    })
}

/// Multiple-choice knapsack on the integer grid `w_b = c_b / q`.
fn grid_dp(weights: &[f64], eigenvalues: &[Vec<f64>], budget: f64) -> Result<Vec<usize>> {
    let q = grid_denominator(weights).ok_or_else(|| {
        Error::ExactInfeasible(format!(
            "weights {weights:?} are not on a rational grid with denominator <= {MAX_GRID_DENOMINATOR}"
        ))
    })?;
    let costs: Vec<u64> = weights.iter().map(|&w| (w * q as f64).round() as u64).collect();
    let capacity = (budget * q as f64 + 1e-9).floor() as u64;
    let total: u64 = costs.iter().zip(eigenvalues).map(|(c, l)| c * l.len() as u64).sum();
    let capacity = capacity.min(total);
    if capacity > MAX_GRID_CAPACITY {
        return Err(Error::ExactInfeasible(format!("grid capacity {capacity} too large")));
    }
    let cap = capacity as usize;
    let nb = weights.len();
    // table[b][c]: best value of blocks b.. using at most c grid units
    let mut table = vec![vec![0.0f64; cap + 1]; nb + 1];
    let mut choice = vec![vec![0usize; cap + 1]; nb];
    for b in (0..nb).rev() {
        let cost = costs[b] as usize;
        for c in 0..=cap {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            let mut prefix = 0.0;
            for k in 0..=eigenvalues[b].len() {
                if k > 0 {
                    prefix += eigenvalues[b][k - 1];
                }
                if k * cost > c {
                    break;
                }
                let v = weights[b] * prefix + table[b + 1][c - k * cost];
                if v > best || (v == best && k > arg) {
                    best = v;
                    arg = k;
                }
            }
            table[b][c] = best;
            choice[b][c] = arg;
        }
    }
    let mut ranks = vec![0; nb];
    let mut c = cap;
    for b in 0..nb {
        ranks[b] = choice[b][c];
        c -= ranks[b] * costs[b] as usize;
    }
    Ok(ranks)
}

/// `max { τ(p y) : τ(p) ≤ delta }` with an attaining projection.
pub fn max_projection_mass(y: &Element, delta: f64, mode: MassMode, tol: f64) -> Result<ProjectionMass> {
    if delta < 0.0 {
        return Err(Error::NegativeBudget(delta));
    }
    let pos = is_positive(y, tol);
    if !pos.positive {
        let (block, eigenvalue) = pos
            .witness
            .map(|w| (w.block, w.eigenvalue))
            .unwrap_or((0, pos.min_eigenvalue));
        return Err(Error::NotPositive { block, eigenvalue });
    }
    let algebra = y.algebra();
    let decomposed: Vec<(Vec<f64>, DMatrix<C64>)> = y.blocks().iter().map(hermitian_eigen).collect();
    let eigenvalues: Vec<Vec<f64>> = decomposed.iter().map(|(l, _)| l.clone()).collect();
    let selection = solve_rank_knapsack(algebra.weights(), &eigenvalues, delta, mode)?;
    let blocks = decomposed
        .iter()
        .zip(&selection.ranks)
        .map(|((_, vectors), &k)| {
            let cols = vectors.columns(0, k);
            cols * cols.adjoint()
        })
        .collect();
    let projection = Projection::new_unchecked(Element::new(algebra, blocks)?);
    Ok(ProjectionMass {
        value: selection.value,
        projection,
        selection,
        mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::random;
    use proptest::prelude::*;

    /// Enumerate every subset of rank-one eigenprojections.
    fn brute_force(weights: &[f64], eigenvalues: &[Vec<f64>], budget: f64) -> f64 {
        let items: Vec<(usize, usize)> = eigenvalues
            .iter()
            .enumerate()
            .flat_map(|(b, l)| (0..l.len()).map(move |i| (b, i)))
            .collect();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << items.len()) {
            let mut cost = 0.0;
            let mut value = 0.0;
            for (k, &(b, i)) in items.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    cost += weights[b];
                    value += weights[b] * eigenvalues[b][i];
                }
            }
            if cost <= budget + 1e-12 {
                best = best.max(value);
            }
        }
        best
    }

    #[test]
    fn two_weight_example() {
        let a = Algebra::new(&[1, 1], &[0.3, 0.7], false).unwrap();
        let y = Element::diagonal(&a, &[2.0, 1.0]).unwrap();
        // subsets: {} 0, {1} 0.6 (cost .3), {2} 0.7 (cost .7, over), {1,2} over
        let m = max_projection_mass(&y, 0.5, MassMode::Exact, 1e-8).unwrap();
        assert!((m.value - 0.6).abs() < 1e-15);
        assert_eq!(m.selection.ranks, vec![1, 0]);
        let expect = Element::diagonal(&a, &[1.0, 0.0]).unwrap();
        assert!((m.projection.element() - &expect).max_abs_entry() < 1e-15);
    }

    #[test]
    fn zero_and_full_budget() {
        let a = Algebra::new(&[2, 1], &[0.5, 2.0], false).unwrap();
        let y = random::positive(&a, &mut random::seeded(3));
        let m = max_projection_mass(&y, 0.0, MassMode::Exact, 1e-8).unwrap();
        assert_eq!(m.value, 0.0);
        assert_eq!(m.projection.element().max_abs_entry(), 0.0);
        let m = max_projection_mass(&y, a.unit_trace(), MassMode::Exact, 1e-8).unwrap();
        assert!((m.value - y.trace().re).abs() < 1e-12);
        assert!((m.projection.element() - &Element::identity(&a)).max_abs_entry() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = Algebra::new(&[2], &[1.0], false).unwrap();
        let y = Element::diagonal(&a, &[1.0, -1.0]).unwrap();
        assert!(matches!(
            max_projection_mass(&y, 1.0, MassMode::Exact, 1e-8),
            Err(Error::NotPositive { .. })
        ));
        let y = Element::identity(&a);
        assert!(matches!(
            max_projection_mass(&y, -0.1, MassMode::Exact, 1e-8),
            Err(Error::NegativeBudget(_))
        ));
    }

    #[test]
    fn grid_dp_matches_enumeration() {
        let mut rng = random::seeded(99);
        use rand::Rng;
        for _ in 0..200 {
            let nb = rng.random_range(1..4);
            let weights: Vec<f64> = (0..nb).map(|_| rng.random_range(1..9) as f64 / 4.0).collect();
            let eigenvalues: Vec<Vec<f64>> = (0..nb)
                .map(|_| {
                    let d = rng.random_range(1..5);
                    let mut l: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                    l.sort_by(|a, b| b.total_cmp(a));
                    l
                })
                .collect();
            let budget = rng.random::<f64>() * 8.0;
            let e = enumerate(&weights, &eigenvalues, budget);
            let g = grid_dp(&weights, &eigenvalues, budget).unwrap();
            let ve = selection_value(&weights, &eigenvalues, &e);
            let vg = selection_value(&weights, &eigenvalues, &g);
            assert!((ve - vg).abs() < 1e-12, "{ve} vs {vg}");
        }
    }

    #[test]
    fn irrational_weights_beyond_enumeration_are_rejected() {
        let weights = vec![std::f64::consts::PI; 8];
        let eigenvalues = vec![vec![1.0; 8]; 8];
        assert!(matches!(
            solve_rank_knapsack(&weights, &eigenvalues, 3.0, MassMode::Exact),
            Err(Error::ExactInfeasible(_))
        ));
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>, f64)> {
        prop::collection::vec((0.05f64..3.0, prop::collection::vec(0.0f64..5.0, 1..4)), 1..4).prop_flat_map(|blocks| {
            let total: f64 = blocks.iter().map(|(w, l)| w * l.len() as f64).sum();
            let weights: Vec<f64> = blocks.iter().map(|(w, _)| *w).collect();
            let eig: Vec<Vec<f64>> = blocks
                .into_iter()
                .map(|(_, mut l)| {
                    l.sort_by(|a, b| b.total_cmp(a));
                    l
                })
                .collect();
            (Just(weights), Just(eig), 0.0..total * 1.1)
        })
    }

    proptest! {
        #[test]
        fn exact_matches_subset_enumeration((w, l, delta) in instance()) {
            let exact = solve_rank_knapsack(&w, &l, delta, MassMode::Exact).unwrap();
            let oracle = brute_force(&w, &l, delta);
            prop_assert!((exact.value - oracle).abs() <= 1e-12 * (1.0 + oracle));
            prop_assert!(exact.cost <= delta);
        }

        #[test]
        fn exact_dominates_greedy((w, l, delta) in instance()) {
            let exact = solve_rank_knapsack(&w, &l, delta, MassMode::Exact).unwrap();
            let greedy = solve_rank_knapsack(&w, &l, delta, MassMode::Greedy).unwrap();
            prop_assert!(exact.value >= greedy.value);
            prop_assert!(greedy.cost <= delta);
        }

        #[test]
        fn greedy_is_optimal_for_equal_weights((w, l, delta) in instance()) {
            let w: Vec<f64> = vec![w[0]; w.len()];
            let exact = solve_rank_knapsack(&w, &l, delta, MassMode::Exact).unwrap();
            let greedy = solve_rank_knapsack(&w, &l, delta, MassMode::Greedy).unwrap();
            prop_assert_eq!(exact.value, greedy.value);
        }

        #[test]
        fn monotone_in_budget((w, l, delta) in instance(), extra in 0.0f64..2.0) {
            let lo = solve_rank_knapsack(&w, &l, delta, MassMode::Exact).unwrap();
            let hi = solve_rank_knapsack(&w, &l, delta + extra, MassMode::Exact).unwrap();
            prop_assert!(hi.value >= lo.value);
        }
    }
}
