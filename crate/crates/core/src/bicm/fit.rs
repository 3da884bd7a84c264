use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::{BicmModel, FitDiagnostics};
use crate::error::{Error, Result};
use crate::rca::DegreeSequences;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Max absolute degree residual accepted.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight of the fixed-point proposal in each log-multiplier update.
    pub damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 10_000,
            damping: 0.5,
        }
    }
}

/// Residual the solver aims for before accepting the caller's tolerance.
const POLISH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeState {
    Active,
    Empty,
    Full,
}

/// Iteratively pins nodes whose remaining target is 0 or equal to the number
/// of free partners, adjusting the targets of the rest. Rows and columns are
/// settled in alternating passes; each pinned node records its pass, since a
/// node pinned earlier decides its cells with nodes pinned later.
fn pin_deterministic(d: &[usize], u: &[usize]) -> Result<(Vec<NodeState>, Vec<NodeState>, Vec<Option<u32>>, Vec<Option<u32>>)> {
    let mut rows = vec![NodeState::Active; d.len()];
    let mut cols = vec![NodeState::Active; u.len()];
    let mut row_pass = vec![None; d.len()];
    let mut col_pass = vec![None; u.len()];
    let count = |states: &[NodeState], which: NodeState| states.iter().filter(|s| **s == which).count();
    let settle = |states: &mut [NodeState], passes: &mut [Option<u32>], degrees: &[usize], pinned_full: usize, free: usize, pass: u32, what: &str| -> Result<bool> {
        let mut changed = false;
        for (i, state) in states.iter_mut().enumerate() {
            if *state != NodeState::Active {
                continue;
            }
            let target = degrees[i] as i64 - pinned_full as i64;
            if target < 0 || target > free as i64 {
                return Err(Error::InconsistentDegrees(format!(
                    "{what} {i} with degree {} cannot be realized",
                    degrees[i]
                )));
            }
            if target == 0 || target == free as i64 {
                *state = if target == 0 { NodeState::Empty } else { NodeState::Full };
                passes[i] = Some(pass);
                changed = true;
            }
        }
        Ok(changed)
    };
    let mut pass = 0;
    loop {
        let row_changed = settle(&mut rows, &mut row_pass, d, count(&cols, NodeState::Full), count(&cols, NodeState::Active), pass, "country")?;
        pass += 1;
        let col_changed = settle(&mut cols, &mut col_pass, u, count(&rows, NodeState::Full), count(&rows, NodeState::Active), pass, "sector")?;
        pass += 1;
        if !row_changed && !col_changed {
            break;
        }
    }
    Ok((rows, cols, row_pass, col_pass))
}

/// Degree-equivalence classes of the active nodes: (target, multiplicity).
fn classes(states: &[NodeState], degrees: &[usize], pinned_full: usize) -> (Vec<f64>, Vec<f64>, Vec<Option<usize>>) {
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, s) in states.iter().enumerate() {
        if *s == NodeState::Active {
            let next = index.len();
            index.entry(degrees[i] - pinned_full).or_insert(next);
        }
    }
    // renumber in ascending target order for determinism
    let order: BTreeMap<usize, usize> = index.keys().enumerate().map(|(k, t)| (*t, k)).collect();
    let mut targets = vec![0.0; order.len()];
    let mut mult = vec![0.0; order.len()];
    let node_class = states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (*s == NodeState::Active).then(|| {
                let t = degrees[i] - pinned_full;
                let k = order[&t];
                targets[k] = t as f64;
                mult[k] += 1.0;
                k
            })
        })
        .collect();
    (targets, mult, node_class)
}

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Reduced problem over degree classes, in log-multipliers.
struct Reduced {
    row_target: Vec<f64>,
    row_mult: Vec<f64>,
    col_target: Vec<f64>,
    col_mult: Vec<f64>,
}

impl Reduced {
    fn n_rows(&self) -> usize {
        self.row_target.len()
    }

    fn n_cols(&self) -> usize {
        self.col_target.len()
    }

    /// Expected minus target degree per class.
    fn gaps(&self, a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut rg = vec![0.0; self.n_rows()];
        let mut cg = vec![0.0; self.n_cols()];
        for i in 0..self.n_rows() {
            for j in 0..self.n_cols() {
                let p = sigmoid(a[i] + b[j]);
                rg[i] += self.col_mult[j] * p;
                cg[j] += self.row_mult[i] * p;
            }
        }
        for (g, t) in rg.iter_mut().zip(&self.row_target) {
            *g -= t;
        }
        for (g, t) in cg.iter_mut().zip(&self.col_target) {
            *g -= t;
        }
        (rg, cg)
    }

    fn residual(&self, a: &[f64], b: &[f64]) -> f64 {
        let (rg, cg) = self.gaps(a, b);
        rg.iter().chain(&cg).fold(0.0, |m, g| m.max(g.abs()))
    }

    /// Negative log-likelihood of the class-reduced model.
    fn objective(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut l = 0.0;
        for i in 0..self.n_rows() {
            for j in 0..self.n_cols() {
                l += self.row_mult[i] * self.col_mult[j] * softplus(a[i] + b[j]);
            }
            l -= self.row_mult[i] * self.row_target[i] * a[i];
        }
        for j in 0..self.n_cols() {
            l -= self.col_mult[j] * self.col_target[j] * b[j];
        }
        l
    }

    /// `ln( target / Σ_partners mult · y/(1 + x y) )` for one side.
    fn fixed_point(own_target: f64, own: f64, other: &[f64], other_mult: &[f64]) -> f64 {
        // log-sum-exp of ln(mult) + other - softplus(own + other)
        let terms: Vec<f64> = other
            .iter()
            .zip(other_mult)
            .map(|(o, m)| m.ln() + o - softplus(own + o))
            .collect();
        let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln();
        own_target.ln() - lse
    }

    fn fixed_point_step(&self, a: &mut [f64], b: &mut [f64], damping: f64) {
        let new_a: Vec<f64> = (0..self.n_rows())
            .map(|i| Self::fixed_point(self.row_target[i], a[i], b, &self.col_mult))
            .collect();
        let new_b: Vec<f64> = (0..self.n_cols())
            .map(|j| Self::fixed_point(self.col_target[j], b[j], a, &self.row_mult))
            .collect();
        for (x, n) in a.iter_mut().zip(new_a) {
            *x = (1.0 - damping) * *x + damping * n;
        }
        for (x, n) in b.iter_mut().zip(new_b) {
            *x = (1.0 - damping) * *x + damping * n;
        }
    }

    /// Newton step on the convex objective with the first row class pinned
    /// (the model is invariant under a ↦ a + k, b ↦ b − k), plus
    /// backtracking line search.
    fn newton_step(&self, a: &mut [f64], b: &mut [f64]) -> bool {
        let (nr, nc) = (self.n_rows(), self.n_cols());
        let n = nr + nc - 1;
        if n == 0 {
            return false;
        }
        let (rg, cg) = self.gaps(a, b);
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        // variable layout: a[1..nr], b[0..nc]
        let av = |i: usize| if i == 0 { None } else { Some(i - 1) };
        let bv = |j: usize| nr - 1 + j;
        for i in 0..nr {
            if let Some(k) = av(i) {
                grad[k] = self.row_mult[i] * rg[i];
            }
        }
        for j in 0..nc {
            grad[bv(j)] = self.col_mult[j] * cg[j];
        }
        for i in 0..nr {
            for j in 0..nc {
                let p = sigmoid(a[i] + b[j]);
                let w = self.row_mult[i] * self.col_mult[j] * p * (1.0 - p);
                if let Some(k) = av(i) {
                    hess[(k, k)] += w;
                    hess[(k, bv(j))] += w;
                    hess[(bv(j), k)] += w;
                }
                hess[(bv(j), bv(j))] += w;
            }
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => match hess.lu().solve(&grad) {
                Some(s) => s,
                None => return false,
            },
        };
        let base = self.objective(a, b);
        let slope = -grad.dot(&step);
        let mut t = 1.0;
        for _ in 0..60 {
            let ta: Vec<f64> = (0..nr).map(|i| a[i] - av(i).map_or(0.0, |k| t * step[k])).collect();
            let tb: Vec<f64> = (0..nc).map(|j| b[j] - t * step[bv(j)]).collect();
            let value = self.objective(&ta, &tb);
            if value <= base + 1e-4 * t * slope || (value - base).abs() <= 1e-14 * base.abs().max(1.0) {
                a.copy_from_slice(&ta);
                b.copy_from_slice(&tb);
                return true;
            }
            t *= 0.5;
        }
        false
    }
}

/// Fits the BiCM multipliers to observed degree sequences.
///
/// Nodes with degree 0 or full degree are pinned to deterministic
/// probabilities first; the remaining nodes are grouped into degree classes
/// sharing a multiplier. The reduced system is solved by damped fixed-point
/// iteration on log-multipliers, switching to Newton steps once the
/// fixed-point residual stops shrinking.
pub fn fit(degrees: &DegreeSequences, options: &FitOptions) -> Result<BicmModel> {
    fit_year(0, degrees, options)
}

pub(crate) fn fit_year(year: i32, degrees: &DegreeSequences, options: &FitOptions) -> Result<BicmModel> {
    let d = &degrees.diversification;
    let u = &degrees.ubiquity;
    let (n_c, n_s) = (d.len(), u.len());
    if let Some(c) = d.iter().position(|&v| v > n_s) {
        return Err(Error::InconsistentDegrees(format!("country {c} has degree {} > {n_s}", d[c])));
    }
    if let Some(s) = u.iter().position(|&v| v > n_c) {
        return Err(Error::InconsistentDegrees(format!("sector {s} has degree {} > {n_c}", u[s])));
    }
    let (sum_d, sum_u): (usize, usize) = (d.iter().sum(), u.iter().sum());
    if sum_d != sum_u {
        return Err(Error::InconsistentDegrees(format!(
            "country degrees sum to {sum_d}, sector degrees to {sum_u}"
        )));
    }

    let (row_state, col_state, row_pass, col_pass) = pin_deterministic(d, u)?;
    let full_cols = col_state.iter().filter(|s| **s == NodeState::Full).count();
    let full_rows = row_state.iter().filter(|s| **s == NodeState::Full).count();
    let (row_target, row_mult, row_class) = classes(&row_state, d, full_cols);
    let (col_target, col_mult, col_class) = classes(&col_state, u, full_rows);
    let reduced = Reduced {
        row_target,
        row_mult,
        col_target,
        col_mult,
    };

    // standard start: x_c ≈ d_c / sqrt(L)
    let links: f64 = reduced.row_target.iter().zip(&reduced.row_mult).map(|(t, m)| t * m).sum();
    let scale = links.max(1.0).sqrt().ln();
    let mut a: Vec<f64> = reduced.row_target.iter().map(|t| t.ln() - scale).collect();
    let mut b: Vec<f64> = reduced.col_target.iter().map(|t| t.ln() - scale).collect();

    let mut iterations = 0;
    let mut newton_steps = 0;
    let mut newton_mode = false;
    // iterate past the tolerance so probabilities are accurate well below it
    let target = options.tolerance.min(POLISH);
    let mut residual = if reduced.n_rows() == 0 { 0.0 } else { reduced.residual(&a, &b) };
    while residual > target && iterations < options.max_iterations {
        iterations += 1;
        if newton_mode {
            newton_steps += 1;
            if !reduced.newton_step(&mut a, &mut b) {
                // no further descent possible at machine precision
                break;
            }
        } else {
            reduced.fixed_point_step(&mut a, &mut b, options.damping);
        }
        let next = reduced.residual(&a, &b);
        if !newton_mode && next > 0.95 * residual {
            newton_mode = true;
        }
        residual = next;
    }

    let x: Vec<f64> = row_state
        .iter()
        .zip(&row_class)
        .map(|(s, k)| match s {
            NodeState::Empty => 0.0,
            NodeState::Full => f64::INFINITY,
            NodeState::Active => a[k.expect("active")].exp(),
        })
        .collect();
    let y: Vec<f64> = col_state
        .iter()
        .zip(&col_class)
        .map(|(s, k)| match s {
            NodeState::Empty => 0.0,
            NodeState::Full => f64::INFINITY,
            NodeState::Active => b[k.expect("active")].exp(),
        })
        .collect();

    let mut model = BicmModel::from_pinned(year, x, y, row_pass, col_pass)?;
    // p from the log-domain sigmoid is more accurate than x y / (1 + x y)
    for (c, rk) in row_class.iter().enumerate() {
        for (s, ck) in col_class.iter().enumerate() {
            if let (Some(i), Some(j)) = (rk, ck) {
                model.probabilities.p[c * n_s + s] = sigmoid(a[*i] + b[*j]);
            }
        }
    }
    let residual = model.degree_residual(d, u);
    if residual > options.tolerance {
        return Err(Error::NonConvergence { iterations, residual });
    }
    model.diagnostics = Some(FitDiagnostics {
        residual,
        iterations,
        newton_steps,
    });
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bicm::matrix_log_probability;
    use crate::rca::{degrees, BinaryMatrix, BipartiteNetwork};
    use proptest::prelude::*;

    fn seqs(d: &[usize], u: &[usize]) -> DegreeSequences {
        DegreeSequences {
            diversification: d.to_vec(),
            ubiquity: u.to_vec(),
        }
    }

    /// Plain gradient ascent on the full (unreduced) log-likelihood
    /// `Σ_c d_c θ_c + Σ_s u_s η_s − Σ_cs ln(1 + e^{θ_c + η_s})`.
    fn gradient_ascent_oracle(d: &[usize], u: &[usize]) -> Vec<f64> {
        let (nc, ns) = (d.len(), u.len());
        let mut theta = vec![0.0; nc];
        let mut eta = vec![0.0; ns];
        let lr = 0.2;
        for _ in 0..200_000 {
            let p = |c: usize, s: usize, th: &[f64], et: &[f64]| 1.0 / (1.0 + (-(th[c] + et[s])).exp());
            let gt: Vec<f64> = (0..nc).map(|c| d[c] as f64 - (0..ns).map(|s| p(c, s, &theta, &eta)).sum::<f64>()).collect();
            let ge: Vec<f64> = (0..ns).map(|s| u[s] as f64 - (0..nc).map(|c| p(c, s, &theta, &eta)).sum::<f64>()).collect();
            if gt.iter().chain(&ge).all(|g| g.abs() < 1e-13) {
                break;
            }
            for (t, g) in theta.iter_mut().zip(&gt) {
                *t += lr * g;
            }
            for (e, g) in eta.iter_mut().zip(&ge) {
                *e += lr * g;
            }
        }
        (0..nc)
            .flat_map(|c| (0..ns).map(move |s| (c, s)))
            .map(|(c, s)| 1.0 / (1.0 + (-(theta[c] + eta[s])).exp()))
            .collect()
    }

    #[test]
    fn degree_regular_gives_density() {
        let model = fit(&seqs(&[2; 4], &[2; 4]), &FitOptions::default()).unwrap();
        for &p in model.probabilities().as_slice() {
            assert!((p - 0.5).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn full_network_is_deterministic() {
        let model = fit(&seqs(&[3; 2], &[2; 3]), &FitOptions::default()).unwrap();
        assert!(model.probabilities().as_slice().iter().all(|&p| p == 1.0));
        assert!(model.country_multipliers().iter().all(|x| x.is_infinite()));
        let empty = fit(&seqs(&[0; 2], &[0; 3]), &FitOptions::default()).unwrap();
        assert!(empty.probabilities().as_slice().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn small_case_matches_likelihood_maximizer() {
        let (d, u) = ([2, 1], [1, 1, 1]);
        let model = fit(&seqs(&d, &u), &FitOptions::default()).unwrap();
        let oracle = gradient_ascent_oracle(&d, &u);
        for (p, q) in model.probabilities().as_slice().iter().zip(&oracle) {
            assert!((p - q).abs() < 1e-9, "{p} vs {q}");
        }
        // closed form: rows 2/3 and 1/3
        assert!((model.p(0, 0) - 2.0 / 3.0).abs() < 1e-10);
        assert!((model.p(1, 2) - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn mixed_pinned_and_free_nodes() {
        // row 0 full, column 3 empty, the rest free
        let m = BinaryMatrix::from_rows(&[[1, 1, 1, 0], [1, 0, 0, 0], [0, 1, 0, 0], [1, 0, 1, 0]]);
        let seq = degrees(&m);
        let model = fit(&seq, &FitOptions::default()).unwrap();
        assert!(model.degree_residual(&seq.diversification, &seq.ubiquity) <= 1e-8);
        assert_eq!(model.p(0, 3), 0.0);
        assert!((0..3).all(|s| model.p(0, s) == 1.0));
        // free block: rows 1..4, columns 0..3 with row 0's links removed
        let oracle = gradient_ascent_oracle(&[1, 1, 2], &[2, 1, 1]);
        for c in 0..3 {
            for s in 0..3 {
                let (p, q) = (model.p(c + 1, s), oracle[c * 3 + s]);
                assert!((p - q).abs() < 1e-9, "{p} vs {q}");
            }
        }
    }

    #[test]
    fn inconsistent_sequences_rejected() {
        assert!(matches!(fit(&seqs(&[2, 1], &[1, 1]), &FitOptions::default()), Err(Error::InconsistentDegrees(_))));
        assert!(matches!(fit(&seqs(&[3], &[1, 1]), &FitOptions::default()), Err(Error::InconsistentDegrees(_))));
        // sum matches but an empty row meets a full column
        assert!(matches!(fit(&seqs(&[0, 2], &[2, 0]), &FitOptions::default()), Err(Error::InconsistentDegrees(_))));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let opts = FitOptions {
            max_iterations: 1,
            tolerance: 1e-14,
            ..FitOptions::default()
        };
        match fit(&seqs(&[5, 3, 2, 1, 1], &[3, 3, 2, 2, 1, 1]), &opts) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 1);
                assert!(residual > 1e-14);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    fn arb_matrix() -> impl Strategy<Value = BinaryMatrix> {
        (1usize..10, 1usize..12, 0.05f64..0.95).prop_flat_map(|(r, c, density)| {
            proptest::collection::vec(proptest::bool::weighted(density), r * c)
                .prop_map(move |bits| BinaryMatrix::from_fn(r, c, |i, j| bits[i * c + j]))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn constraints_satisfied_and_locally_maximal(m in arb_matrix()) {
            let seq = degrees(&m);
            let opts = FitOptions::default();
            let model = match fit(&seq, &opts) {
                Ok(model) => model,
                // boundary sequences have no finite maximizer
                Err(Error::NonConvergence { .. }) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            prop_assert!(model.degree_residual(&seq.diversification, &seq.ubiquity) <= opts.tolerance);

            let net = BipartiteNetwork::new(0, (0..m.rows()).map(|i| i.to_string()).collect(), (0..m.cols()).map(|i| i.to_string()).collect(), m.clone());
            let best = matrix_log_probability(model.probabilities(), &net.matrix);
            let x = model.country_multipliers().to_vec();
            let y = model.sector_multipliers().to_vec();
            for c in 0..x.len() {
                for f in [0.99, 1.01] {
                    let mut xp = x.clone();
                    xp[c] *= f;
                    let other = BicmModel::from_pinned(0, xp, y.clone(), model.country_pins().to_vec(), model.sector_pins().to_vec()).unwrap();
                    prop_assert!(best >= matrix_log_probability(other.probabilities(), &m) - 1e-9);
                }
            }
            for s in 0..y.len() {
                for f in [0.99, 1.01] {
                    let mut yp = y.clone();
                    yp[s] *= f;
                    let other = BicmModel::from_pinned(0, x.clone(), yp, model.country_pins().to_vec(), model.sector_pins().to_vec()).unwrap();
                    prop_assert!(best >= matrix_log_probability(other.probabilities(), &m) - 1e-9);
                }
            }
        }
    }
}
