//! Quadratic binary cost assembly: similarity costs, equality-constraint
//! penalties, minimizer-preserving diagonal regularization, and the exact
//! binary/spin conversion.
//!
//! Energy convention: `energy(z) = sum_{i<=j} Q[i,j] z_i z_j + b.z + offset`,
//! with every unordered pair stored once. Diagonal entries are allowed and act
//! linearly on binary variables.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::ProblemSpec;

/// A quadratic unconstrained binary optimization problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    n: usize,
    quadratic: BTreeMap<(usize, usize), f64>,
    linear: Vec<f64>,
    offset: f64,
}

impl Qubo {
    pub fn new(n: usize) -> Self {
        Qubo {
            n,
            quadratic: BTreeMap::new(),
            linear: vec![0.0; n],
            offset: 0.0,
        }
    }

    pub fn num_variables(&self) -> usize {
        self.n
    }

    /// Adds `value` to the coefficient of `z_i * z_j`. The pair is stored once
    /// with `i <= j`; entries that cancel to zero are dropped.
    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.n && j < self.n, "variable index out of range");
        let key = if i <= j { (i, j) } else { (j, i) };
        let entry = self.quadratic.entry(key).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            self.quadratic.remove(&key);
        }
    }

    pub fn add_linear(&mut self, i: usize, value: f64) {
        assert!(i < self.n, "variable index out of range");
        self.linear[i] += value;
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn quadratic(&self) -> impl Iterator<Item = (&(usize, usize), &f64)> {
        self.quadratic.iter()
    }

    pub fn num_quadratic_terms(&self) -> usize {
        self.quadratic.len()
    }

    /// Exact energy of a binary state.
    pub fn energy(&self, state: &[bool]) -> Result<f64> {
        if state.len() != self.n {
            return Err(Error::Dimension(format!(
                "state length {} does not match variable count {}",
                state.len(),
                self.n
            )));
        }
        let mut e = self.offset;
        for (i, &b) in self.linear.iter().enumerate() {
            if state[i] {
                e += b;
            }
        }
        for (&(i, j), &v) in &self.quadratic {
            if state[i] && state[j] {
                e += v;
            }
        }
        Ok(e)
    }

    /// Per-variable neighbor lists `(j, coefficient)` over the off-diagonal
    /// quadratic terms. Used by the samplers for incremental flip deltas.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (&(i, j), &v) in &self.quadratic {
            if i != j {
                adj[i].push((j, v));
                adj[j].push((i, v));
            }
        }
        adj
    }

    /// Effective linear coefficient of a variable: its linear term plus its
    /// quadratic diagonal (which acts linearly on binary variables).
    pub fn effective_linear(&self, i: usize) -> f64 {
        self.linear[i] + self.quadratic.get(&(i, i)).copied().unwrap_or(0.0)
    }

    /// Largest possible magnitude of a single-flip energy change:
    /// `max_i (|b_i + Q_ii| + sum_j |Q_ij|)`.
    pub fn max_flip_magnitude(&self) -> f64 {
        let mut bound: Vec<f64> = (0..self.n).map(|i| self.effective_linear(i).abs()).collect();
        for (&(i, j), &v) in &self.quadratic {
            if i != j {
                bound[i] += v.abs();
                bound[j] += v.abs();
            }
        }
        bound.into_iter().fold(0.0, f64::max)
    }
}

/// One linear equality row `sum(z_k for k in vars) = target` with its penalty
/// multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    pub vars: Vec<usize>,
    pub target: f64,
    pub multiplier: f64,
}

impl ConstraintRow {
    /// Signed violation `G_i . z - d_i` of this row.
    pub fn violation(&self, state: &[bool]) -> f64 {
        let active = self.vars.iter().filter(|&&k| state[k]).count() as f64;
        active - self.target
    }
}

/// The equality-constraint system `G z = d` for a tracking instance: one row
/// per (frame, real track) column sum and one per (frame, real detection) row
/// sum, in that order, frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    n: usize,
    rows: Vec<ConstraintRow>,
}

impl ConstraintSystem {
    /// Builds the constraint rows for a spec with all multipliers zero.
    pub fn for_spec(spec: &ProblemSpec) -> Self {
        let mut rows = Vec::with_capacity(
            spec.num_frames() * (spec.num_real_tracks() + spec.num_real_detections()),
        );
        for frame in 0..spec.num_frames() {
            for track in 0..spec.num_real_tracks() {
                let vars = (0..spec.num_detections())
                    .map(|d| spec.flatten(frame, d, track).expect("in range"))
                    .collect();
                rows.push(ConstraintRow {
                    vars,
                    target: 1.0,
                    multiplier: 0.0,
                });
            }
        }
        for frame in 0..spec.num_frames() {
            for detection in 0..spec.num_real_detections() {
                let vars = (0..spec.num_tracks())
                    .map(|t| spec.flatten(frame, detection, t).expect("in range"))
                    .collect();
                rows.push(ConstraintRow {
                    vars,
                    target: 1.0,
                    multiplier: 0.0,
                });
            }
        }
        ConstraintSystem {
            n: spec.num_variables(),
            rows,
        }
    }

    pub fn from_rows(n: usize, rows: Vec<ConstraintRow>) -> Result<Self> {
        for row in &rows {
            if row.vars.iter().any(|&k| k >= n) {
                return Err(Error::Dimension("constraint variable out of range".into()));
            }
        }
        Ok(ConstraintSystem { n, rows })
    }

    pub fn num_variables(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Copy of this system with every multiplier set to `lambda`.
    pub fn with_uniform_multiplier(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            row.multiplier = lambda;
        }
        out
    }

    /// Copy of this system with per-row multipliers.
    pub fn with_multipliers(&self, lambdas: &[f64]) -> Result<Self> {
        if lambdas.len() != self.rows.len() {
            return Err(Error::Dimension(format!(
                "{} multipliers for {} constraints",
                lambdas.len(),
                self.rows.len()
            )));
        }
        let mut out = self.clone();
        for (row, &l) in out.rows.iter_mut().zip(lambdas) {
            row.multiplier = l;
        }
        Ok(out)
    }

    /// Signed violations of every row.
    pub fn violations(&self, state: &[bool]) -> Vec<f64> {
        self.rows.iter().map(|r| r.violation(state)).collect()
    }

    /// True when every row is satisfied exactly.
    pub fn is_feasible(&self, state: &[bool]) -> bool {
        self.rows.iter().all(|r| r.violation(state) == 0.0)
    }
}

/// Assembles the unconstrained cost QUBO for a spec. Minimizing the result
/// maximizes [`assignment_score`](crate::model::assignment_score): every
/// similarity entry contributes `-score` between the two detection variables
/// on each real track, and every real detection gets `-beta` on its
/// dummy-track variable. Same-frame blocks stay empty.
pub fn build_cost(spec: &ProblemSpec) -> Qubo {
    let mut qubo = Qubo::new(spec.num_variables());
    for (key, &value) in spec.similarities() {
        if value == 0.0 {
            continue;
        }
        for track in 0..spec.num_real_tracks() {
            let a = spec.flatten(key.frame_i, key.det_i, track).expect("in range");
            let b = spec.flatten(key.frame_j, key.det_j, track).expect("in range");
            qubo.add_quadratic(a, b, -value);
        }
    }
    let beta = spec.false_positive_bonus();
    if beta != 0.0 {
        let dummy = spec.dummy_track();
        for frame in 0..spec.num_frames() {
            for detection in 0..spec.num_real_detections() {
                let k = spec.flatten(frame, detection, dummy).expect("in range");
                qubo.add_linear(k, -beta);
            }
        }
    }
    qubo
}

/// Adds the squared-violation penalty `sum_i lambda_i (G_i z - d_i)^2` to a
/// QUBO, expanded into quadratic, linear, and constant terms.
pub fn apply_penalties(qubo: &Qubo, constraints: &ConstraintSystem) -> Result<Qubo> {
    if constraints.num_variables() != qubo.num_variables() {
        return Err(Error::Dimension(format!(
            "constraint system over {} variables applied to QUBO with {}",
            constraints.num_variables(),
            qubo.num_variables()
        )));
    }
    let mut out = qubo.clone();
    for row in constraints.rows() {
        let lambda = row.multiplier;
        if lambda < 0.0 {
            return Err(Error::Parameter(format!(
                "negative constraint multiplier {lambda}"
            )));
        }
        if lambda == 0.0 {
            continue;
        }
        // lambda * (sum_k z_k - d)^2 with binary z_k:
        //   quadratic: +2*lambda per unordered pair, linear: lambda*(1 - 2d),
        //   offset: lambda*d^2.
        let d = row.target;
        for (a, &k) in row.vars.iter().enumerate() {
            out.add_linear(k, lambda * (1.0 - 2.0 * d));
            for &l in &row.vars[a + 1..] {
                out.add_quadratic(k, l, 2.0 * lambda);
            }
        }
        out.add_offset(lambda * d * d);
    }
    Ok(out)
}

/// Adds `e` to the diagonal coefficient of every variable in a real-track
/// column (all detection rows, including the dummy detection). Dummy-track
/// variables are untouched, so every feasible assignment's energy shifts by
/// exactly `e * F * (T-1)` and the feasible minimizer is unchanged.
pub fn regularize(qubo: &Qubo, spec: &ProblemSpec, e: f64) -> Result<Qubo> {
    if qubo.num_variables() != spec.num_variables() {
        return Err(Error::Dimension(format!(
            "QUBO with {} variables regularized against spec with {}",
            qubo.num_variables(),
            spec.num_variables()
        )));
    }
    if !e.is_finite() {
        return Err(Error::Parameter("regularization constant must be finite".into()));
    }
    let mut out = qubo.clone();
    if e == 0.0 {
        return Ok(out);
    }
    for frame in 0..spec.num_frames() {
        for detection in 0..spec.num_detections() {
            for track in 0..spec.num_real_tracks() {
                let k = spec.flatten(frame, detection, track).expect("in range");
                out.add_quadratic(k, k, e);
            }
        }
    }
    Ok(out)
}

/// The spin-space form of a QUBO: `energy(s) = sum_{i<j} J[i,j] s_i s_j +
/// h.s + offset` over `s in {-1, +1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    n: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
    offset: f64,
}

impl IsingProblem {
    /// Builds a spin problem from raw parts; couplings must use `i < j` keys.
    pub fn from_parts(
        n: usize,
        couplings: BTreeMap<(usize, usize), f64>,
        fields: Vec<f64>,
        offset: f64,
    ) -> Self {
        debug_assert!(fields.len() == n);
        debug_assert!(couplings.keys().all(|&(i, j)| i < j && j < n));
        IsingProblem {
            n,
            couplings,
            fields,
            offset,
        }
    }

    pub fn num_variables(&self) -> usize {
        self.n
    }

    pub fn couplings(&self) -> impl Iterator<Item = (&(usize, usize), &f64)> {
        self.couplings.iter()
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Exact energy of a spin state given as booleans (`true` = +1).
    pub fn energy(&self, spins: &[bool]) -> Result<f64> {
        if spins.len() != self.n {
            return Err(Error::Dimension(format!(
                "spin state length {} does not match variable count {}",
                spins.len(),
                self.n
            )));
        }
        let s = |b: bool| if b { 1.0 } else { -1.0 };
        let mut e = self.offset;
        for (i, &h) in self.fields.iter().enumerate() {
            e += h * s(spins[i]);
        }
        for (&(i, j), &v) in &self.couplings {
            e += v * s(spins[i]) * s(spins[j]);
        }
        Ok(e)
    }

    /// Neighbor lists over couplings, mirroring [`Qubo::adjacency`].
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (&(i, j), &v) in &self.couplings {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }
}

/// Substitutes `z = (s + 1) / 2` and expands. The binary energy of `z` equals
/// the spin energy of `s(z)` state by state; the offset absorbs the constants.
pub fn to_spin(qubo: &Qubo) -> IsingProblem {
    let n = qubo.num_variables();
    let mut couplings: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut fields = vec![0.0; n];
    let mut offset = qubo.offset();

    for (i, field) in fields.iter_mut().enumerate() {
        let b = qubo.effective_linear(i);
        *field += b / 2.0;
        offset += b / 2.0;
    }
    for (&(i, j), &v) in qubo.quadratic() {
        if i == j {
            continue; // already folded into the effective linear part
        }
        let q = v / 4.0;
        couplings.insert((i, j), q);
        fields[i] += q;
        fields[j] += q;
        offset += q;
    }
    couplings.retain(|_, v| *v != 0.0);
    IsingProblem {
        n,
        couplings,
        fields,
        offset,
    }
}

/// Spin state corresponding to a binary state (`1 -> +1`, `0 -> -1`). With
/// spins stored as booleans this is the identity, kept for intent.
pub fn spins_of_binary(state: &[bool]) -> Vec<bool> {
    state.to_vec()
}
