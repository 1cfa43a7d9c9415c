//! Finite-state machinery for the buffer chain induced by a policy.
//!
//! The chain state is the combined energy `s = E + Y` available in a slot,
//! living on `0..=gamma+ymax` quanta. A policy fixes the spend distribution
//! in each state; together with the i.i.d. harvest this yields the row
//! `P[s][s'] = sum_{t,y} Pr(T = t | s) Pr(Y = y) [min(gamma, s - t) + y = s']`.

use serde::{Deserialize, Serialize};

use crate::capacity::Policy;
use crate::ehmodel::{buffer_step, EnergyGrid, HarvestModel};
use crate::{Error, Result};

/// Row sums must match 1 within this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Probability mass below this does not create a reachability edge.
pub const EDGE_EPS: f64 = 1e-12;

/// Row-stochastic matrix over the combined-energy states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "transition matrix must be non-empty".into(),
            ));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} entries in a {n}-state matrix",
                    row.len()
                )));
            }
            let mut total = 0.0;
            for (j, p) in row.iter().enumerate() {
                if !p.is_finite() || *p < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i}, {j}) = {p} is not a probability"
                    )));
                }
                total += p;
            }
            if (total - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "row {i} sums to {total}, expected 1 within {ROW_SUM_TOL:e}"
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from][to]
    }

    /// Left action `v P` of a row vector.
    pub fn propagate(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for (vi, row) in v.iter().zip(&self.rows) {
            if *vi != 0.0 {
                for (o, p) in out.iter_mut().zip(row) {
                    *o += vi * p;
                }
            }
        }
        out
    }

    /// Row-major CSV dump with a header of state labels, for debugging.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        let header: Vec<String> = (0..n).map(|s| format!("s{s}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|p| format!("{p:.17e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Transition matrix induced by per-state spend distributions.
///
/// `spend[s][t]` is the probability of spending `t` quanta in state `s`;
/// each row may be shorter than `s + 1` but not longer.
pub fn build_transition_from_spend(
    spend: &[Vec<f64>],
    harvest: &HarvestModel,
    grid: &EnergyGrid,
) -> Result<TransitionMatrix> {
    grid.validate_harvest(harvest)?;
    let n = grid.state_count();
    if spend.len() != n {
        return Err(Error::InvalidParameter(format!(
            "got spend distributions for {} states, grid has {n}",
            spend.len()
        )));
    }
    let mut rows = vec![vec![0.0; n]; n];
    for (s, dist) in spend.iter().enumerate() {
        if dist.len() > s + 1 {
            return Err(Error::CausalityViolation {
                spent_q: (dist.len() - 1) as u32,
                available_q: s as u32,
            });
        }
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "spend distribution of state {s} sums to {total}"
            )));
        }
        for (t, pt) in dist.iter().enumerate() {
            if *pt == 0.0 {
                continue;
            }
            // The whole combined energy `s` is exposed to the spend, so the
            // buffer keeps `min(gamma, s - t)`.
            let kept = buffer_step(0, s as u32, t as u32, grid.gamma_q())?;
            for (y, py) in harvest.pmf().iter().enumerate() {
                rows[s][kept as usize + y] += pt * py;
            }
        }
    }
    TransitionMatrix::from_rows(rows)
}

/// Transition matrix of a policy: extracts the spend law of each state's
/// input distribution and defers to [`build_transition_from_spend`].
pub fn build_transition(
    policy: &Policy,
    harvest: &HarvestModel,
    grid: &EnergyGrid,
) -> Result<TransitionMatrix> {
    let spend = policy.spend_pmfs(grid)?;
    build_transition_from_spend(&spend, harvest, grid)
}

/// A closed communicating class together with its member states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErgodicClass {
    /// Member states, ascending.
    pub states: Vec<usize>,
}

/// Ergodic structure of a finite chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Closed classes, ordered by their smallest state.
    pub classes: Vec<ErgodicClass>,
    /// States from which the chain eventually leaves, ascending.
    pub transient: Vec<usize>,
}

/// Strongly connected components of the positive-probability digraph;
/// iterative Tarjan so deep chains cannot overflow the stack.
fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next = 0usize;
    let mut components = Vec::new();

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            if frame.1 < adj[v].len() {
                let w = adj[v][frame.1];
                frame.1 += 1;
                if index[w] == UNSET {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(parent) = frames.last() {
                    let u = parent.0;
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("Tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    components
}

/// Split the state space into closed (recurrent) classes and transient
/// states. Edges carrying mass at most [`EDGE_EPS`] are ignored.
pub fn ergodic_decomposition(p: &TransitionMatrix) -> Decomposition {
    let n = p.n();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| p.prob(i, j) > EDGE_EPS)
                .collect()
        })
        .collect();
    let comps = strongly_connected_components(&adj);
    let mut comp_of = vec![0usize; n];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let mut classes = Vec::new();
    let mut transient = Vec::new();
    for (c, comp) in comps.iter().enumerate() {
        let closed = comp
            .iter()
            .all(|&v| adj[v].iter().all(|&w| comp_of[w] == c));
        if closed {
            classes.push(ErgodicClass {
                states: comp.clone(),
            });
        } else {
            transient.extend(comp.iter().copied());
        }
    }
    classes.sort_by_key(|c| c.states[0]);
    transient.sort_unstable();
    Decomposition { classes, transient }
}

/// Controls for the damped power iteration.
#[derive(Debug, Clone, Copy)]
pub struct StationaryOptions {
    /// Stop once the l1 residual of `v P - v` falls below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 1_000_000,
        }
    }
}

/// Stationary distribution supported on one closed class, returned as a
/// full-length vector (zeros off the class).
///
/// Iterates `v <- (v + v P) / 2`: averaging successive iterates removes any
/// periodicity of the class, so convergence is geometric for every closed
/// class of a finite chain.
pub fn stationary_distribution(
    p: &TransitionMatrix,
    class: &[usize],
    opts: &StationaryOptions,
) -> Result<Vec<f64>> {
    let n = p.n();
    check_class(n, class)?;
    let k = class.len();
    let local: Vec<Vec<f64>> = class
        .iter()
        .map(|&a| class.iter().map(|&b| p.prob(a, b)).collect())
        .collect();

    let mut v = vec![1.0 / k as f64; k];
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iters {
        let mut w = vec![0.0; k];
        for (vi, row) in v.iter().zip(&local) {
            for (wj, pij) in w.iter_mut().zip(row) {
                *wj += vi * pij;
            }
        }
        residual = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum();
        if residual <= opts.tol {
            let mut full = vec![0.0; n];
            for (&s, &vi) in class.iter().zip(&v) {
                full[s] = vi;
            }
            return Ok(full);
        }
        let mut total = 0.0;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = 0.5 * (*vi + wi);
            total += *vi;
        }
        for vi in v.iter_mut() {
            *vi /= total;
        }
    }
    Err(Error::NonConvergence {
        what: "stationary distribution power iteration",
        iterations: opts.max_iters,
        residual,
    })
}

/// Stationary distribution by direct linear solve (Gaussian elimination
/// with partial pivoting), for cross-checking on classes of at most 64
/// states.
pub fn stationary_direct(p: &TransitionMatrix, class: &[usize]) -> Result<Vec<f64>> {
    let n = p.n();
    check_class(n, class)?;
    let k = class.len();
    if k > 64 {
        return Err(Error::InvalidParameter(format!(
            "direct stationary solve is limited to 64 states, class has {k}"
        )));
    }
    // Unknown pi solves pi (P - I) = 0 with sum(pi) = 1; write it column-wise
    // as A pi^T = b where the last balance equation is replaced by the
    // normalisation.
    let mut a = vec![vec![0.0; k]; k];
    let mut b = vec![0.0; k];
    for col in 0..k - 1 {
        for row in 0..k {
            a[col][row] = p.prob(class[row], class[col]) - if row == col { 1.0 } else { 0.0 };
        }
    }
    a[k - 1].fill(1.0);
    b[k - 1] = 1.0;

    // Forward elimination with partial pivoting.
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::InvalidParameter(
                "singular balance system; class is not closed".into(),
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (upper, lower) = a.split_at_mut(row);
                for (t, &pv) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *t -= f * pv;
                }
                b[row] -= f * b[col];
            }
        }
    }
    // Back substitution.
    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for j in col + 1..k {
            acc -= a[col][j] * x[j];
        }
        x[col] = acc / a[col][col];
    }
    let mut full = vec![0.0; n];
    for (&s, &xi) in class.iter().zip(&x) {
        full[s] = xi;
    }
    Ok(full)
}

fn check_class(n: usize, class: &[usize]) -> Result<()> {
    if class.is_empty() {
        return Err(Error::InvalidParameter("class must be non-empty".into()));
    }
    if class.iter().any(|&s| s >= n) {
        return Err(Error::InvalidParameter(format!(
            "class state out of range for {n}-state chain"
        )));
    }
    if class.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "class states must be ascending and distinct".into(),
        ));
    }
    Ok(())
}

/// Cesàro mean occupation `(1/h) sum_{k=1..h} initial P^k`.
pub fn cesaro_occupation(
    p: &TransitionMatrix,
    initial: &[f64],
    horizon: usize,
) -> Result<Vec<f64>> {
    let n = p.n();
    if initial.len() != n {
        return Err(Error::InvalidParameter(format!(
            "initial distribution has {} entries for {n} states",
            initial.len()
        )));
    }
    let total: f64 = initial.iter().sum();
    if initial.iter().any(|x| *x < 0.0 || !x.is_finite()) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "initial distribution must be a probability vector".into(),
        ));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let mut v = initial.to_vec();
    let mut acc = vec![0.0; n];
    for _ in 0..horizon {
        v = p.propagate(&v);
        for (a, vi) in acc.iter_mut().zip(&v) {
            *a += vi;
        }
    }
    for a in acc.iter_mut() {
        *a /= horizon as f64;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{Policy, PolicyKind};
    use crate::infotheory::InputDistribution;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matrix(rows: Vec<Vec<f64>>) -> TransitionMatrix {
        TransitionMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn from_rows_enforces_stochasticity() {
        assert!(TransitionMatrix::from_rows(vec![]).is_err());
        assert!(TransitionMatrix::from_rows(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(TransitionMatrix::from_rows(vec![vec![0.6, 0.5], vec![0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::from_rows(vec![vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).is_ok());
    }

    /// Hand-computed rows for gamma = 1, harvest uniform on {0, 1}.
    #[test]
    fn spend_laws_produce_hand_computed_rows() {
        let grid = EnergyGrid::new(1.0, 1, 1).unwrap();
        let harvest = HarvestModel::uniform(1.0, 1).unwrap();

        // Spend everything: every state keeps 0, so every row is the harvest.
        let all = build_transition_from_spend(
            &[vec![1.0], vec![0.0, 1.0], vec![0.0, 0.0, 1.0]],
            &harvest,
            &grid,
        )
        .unwrap();
        for s in 0..3 {
            assert_eq!(all.rows()[s], vec![0.5, 0.5, 0.0]);
        }

        // Spend nothing: states 1 and 2 both keep min(1, s) = 1.
        let none =
            build_transition_from_spend(&[vec![1.0], vec![1.0], vec![1.0]], &harvest, &grid)
                .unwrap();
        assert_eq!(none.rows()[0], vec![0.5, 0.5, 0.0]);
        assert_eq!(none.rows()[1], vec![0.0, 0.5, 0.5]);
        assert_eq!(none.rows()[2], vec![0.0, 0.5, 0.5]);

        // Randomised spend in state 2: half the time keep 1, half keep 0.
        let mixed = build_transition_from_spend(
            &[vec![1.0], vec![0.0, 1.0], vec![0.5, 0.0, 0.5]],
            &harvest,
            &grid,
        )
        .unwrap();
        assert_eq!(mixed.rows()[2], vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn spend_laws_are_validated() {
        let grid = EnergyGrid::new(1.0, 1, 1).unwrap();
        let harvest = HarvestModel::uniform(1.0, 1).unwrap();
        // Overspending in state 0.
        assert!(
            build_transition_from_spend(&[vec![0.0, 1.0], vec![1.0], vec![1.0]], &harvest, &grid)
                .is_err()
        );
        // Wrong state count.
        assert!(build_transition_from_spend(&[vec![1.0]], &harvest, &grid).is_err());
        // Unnormalised spend law.
        assert!(
            build_transition_from_spend(&[vec![0.9], vec![1.0], vec![1.0]], &harvest, &grid)
                .is_err()
        );
    }

    #[test]
    fn policy_route_matches_the_spend_route() {
        let grid = EnergyGrid::new(1.0, 1, 1).unwrap();
        let harvest = HarvestModel::uniform(1.0, 1).unwrap();
        let per_state = vec![
            InputDistribution::zero(),
            InputDistribution::antipodal(1.0).unwrap(),
            InputDistribution::new(vec![-2f64.sqrt(), 0.0, 2f64.sqrt()], vec![0.25, 0.5, 0.25], 2.0)
                .unwrap(),
        ];
        let policy = Policy::new(per_state, PolicyKind::Custom, &grid).unwrap();
        let p = build_transition(&policy, &harvest, &grid).unwrap();
        let q = build_transition_from_spend(
            &[vec![1.0], vec![0.0, 1.0], vec![0.5, 0.0, 0.5]],
            &harvest,
            &grid,
        )
        .unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn decomposition_identifies_closed_and_transient_states() {
        // Identity: three closed singletons.
        let id = matrix(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let d = ergodic_decomposition(&id);
        assert_eq!(d.classes.len(), 3);
        assert!(d.transient.is_empty());

        // State 0 leaks into two absorbing states.
        let leak = matrix(vec![
            vec![0.5, 0.25, 0.25],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let d = ergodic_decomposition(&leak);
        assert_eq!(
            d.classes,
            vec![
                ErgodicClass { states: vec![1] },
                ErgodicClass { states: vec![2] }
            ]
        );
        assert_eq!(d.transient, vec![0]);

        // A 2-cycle is one closed class even though it is periodic.
        let cycle = matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let d = ergodic_decomposition(&cycle);
        assert_eq!(d.classes.len(), 1);
        assert_eq!(d.classes[0].states, vec![0, 1]);
    }

    #[test]
    fn stationary_matches_hand_balance() {
        // Balance: pi_0 * 0.1 = pi_1 * 0.5, so pi = (5/6, 1/6).
        let p = matrix(vec![vec![0.9, 0.1], vec![0.5, 0.5]]);
        let pi = stationary_distribution(&p, &[0, 1], &StationaryOptions::default()).unwrap();
        assert_abs_diff_eq!(pi[0], 5.0 / 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pi[1], 1.0 / 6.0, epsilon = 1e-9);
        let direct = stationary_direct(&p, &[0, 1]).unwrap();
        assert_abs_diff_eq!(pi[0], direct[0], epsilon = 1e-10);
        assert_abs_diff_eq!(pi[1], direct[1], epsilon = 1e-10);
    }

    #[test]
    fn damping_handles_periodic_classes() {
        let p = matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let pi = stationary_distribution(&p, &[0, 1], &StationaryOptions::default()).unwrap();
        assert_abs_diff_eq!(pi[0], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(pi[1], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn power_iteration_agrees_with_direct_solve_on_random_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(2..=8);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    // Strictly positive rows keep the chain irreducible.
                    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
                    let total: f64 = raw.iter().sum();
                    raw.into_iter().map(|x| x / total).collect()
                })
                .collect();
            let p = matrix(rows);
            let class: Vec<usize> = (0..n).collect();
            let iterated =
                stationary_distribution(&p, &class, &StationaryOptions::default()).unwrap();
            let direct = stationary_direct(&p, &class).unwrap();
            let l1: f64 = iterated
                .iter()
                .zip(&direct)
                .map(|(a, b)| (a - b).abs())
                .sum();
            assert!(l1 <= 1e-9, "power iteration off by {l1}");
            // The residual contract holds against the full matrix.
            let back = p.propagate(&iterated);
            let res: f64 = back
                .iter()
                .zip(&iterated)
                .map(|(a, b)| (a - b).abs())
                .sum();
            assert!(res <= 1e-10);
            assert_abs_diff_eq!(iterated.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cesaro_occupation_approaches_the_stationary_law() {
        let p = matrix(vec![vec![0.9, 0.1], vec![0.5, 0.5]]);
        let occ = cesaro_occupation(&p, &[1.0, 0.0], 100_000).unwrap();
        let pi = stationary_distribution(&p, &[0, 1], &StationaryOptions::default()).unwrap();
        let l1: f64 = occ.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        assert!(l1 <= 1e-3, "Cesàro mean off by {l1}");
    }

    #[test]
    fn cesaro_occupation_validates_input() {
        let p = matrix(vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(cesaro_occupation(&p, &[1.0], 10).is_err());
        assert!(cesaro_occupation(&p, &[0.7, 0.7], 10).is_err());
        assert!(cesaro_occupation(&p, &[1.0, 0.0], 0).is_err());
    }

    #[test]
    fn csv_export_is_parseable_and_complete() {
        let p = matrix(vec![vec![0.25, 0.75], vec![1.0, 0.0]]);
        let csv = p.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "s0,s1");
        let row0: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|c| c.parse().unwrap())
            .collect();
        assert_eq!(row0, vec![0.25, 0.75]);
        assert_eq!(lines.count(), 1);
    }
}
