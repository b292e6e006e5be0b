//! Exact discrete optimal transport over finite supports.
//!
//! The transportation LP is solved with the primal transportation simplex
//! (north-west corner start, u-v potentials on the basis tree, Bland's rule
//! for entering and leaving cells). On top of it sit the four distances
//! between two discrete joints over `(x, y)`:
//!
//! - MWD: OT between the `y` marginals.
//! - RWD: OT between the full joints, cost `‖y − ŷ‖² + ‖x − x̂‖²`.
//! - RWD3: coupling over `(y, ŷ, x)` with both joint marginals fixed and
//!   cost `‖y − ŷ‖²`; the constraints decouple across `x` values.
//! - CWD: `Σ_x Q_x(x) W(Q_{y|x}, Q_{ŷ|x})`.
//!
//! All costs are squared Euclidean and no square root is taken.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Tolerances;
use crate::metrics::{MetricKind, MetricReport};

/// Merge tolerance for canonicalizing support points.
pub const MERGE_TOL: f64 = 1e-12;
/// Tolerance on weight sums and marginal equality.
pub const WEIGHT_TOL: f64 = 1e-9;

/// A transport plan and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingPlan {
    pub plan: DMatrix<f64>,
    pub objective: f64,
}

impl CouplingPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        self.plan.row_iter().map(|r| r.sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.plan.column_iter().map(|c| c.sum()).collect()
    }
}

fn validate_cost(cost: &DMatrix<f64>, m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidWeights("empty weight vector".into()));
    }
    if cost.nrows() != m || cost.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cost is {}x{}, weights are {} and {}",
            cost.nrows(),
            cost.ncols(),
            m,
            n
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("non-finite cost".into()));
    }
    Ok(())
}

fn validate_measure(w: &[f64], name: &str) -> Result<f64> {
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidWeights(format!("{name} has a negative or non-finite entry")));
    }
    Ok(w.iter().sum())
}

/// Exact optimal coupling between probability vectors `p` and `q`.
pub fn solve_ot(cost: &DMatrix<f64>, p: &[f64], q: &[f64]) -> Result<CouplingPlan> {
    validate_cost(cost, p.len(), q.len())?;
    for (w, name) in [(p, "p"), (q, "q")] {
        let s = validate_measure(w, name)?;
        if (s - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidWeights(format!("{name} sums to {s}, expected 1")));
        }
    }
    transport(cost, p, q)
}

/// Transportation simplex for two nonnegative measures of equal mass.
fn transport(cost: &DMatrix<f64>, p: &[f64], q: &[f64]) -> Result<CouplingPlan> {
    let (m, n) = (p.len(), q.len());
    validate_cost(cost, m, n)?;
    let (sp, sq) = (validate_measure(p, "p")?, validate_measure(q, "q")?);
    if (sp - sq).abs() > WEIGHT_TOL * sp.max(1.0) {
        return Err(Error::InvalidWeights(format!("unbalanced masses {sp} and {sq}")));
    }

    let mut tableau = Tableau::north_west(p, q);
    let reduced_tol = 1e-12 * cost.amax().max(1.0);
    let cap = 1000 + 50 * m * n;
    let mut converged = false;
    for _ in 0..cap {
        let (u, v) = tableau.potentials(cost);
        let entering = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| !tableau.is_basic(i, j) && cost[(i, j)] - u[i] - v[j] < -reduced_tol);
        match entering {
            None => {
                converged = true;
                break;
            }
            Some(cell) => tableau.pivot(cell),
        }
    }
    if !converged {
        return Err(Error::NumericalFailure {
            dim: m.max(n),
            what: format!("transportation simplex hit the iteration cap ({cap})"),
        });
    }

    let plan = tableau.flow;
    let objective = plan.iter().zip(cost.iter()).map(|(f, c)| f * c).sum();
    Ok(CouplingPlan { plan, objective })
}

/// Basic feasible solution of the transportation problem. The basic cells
/// always form a spanning tree over the `m + n` row and column nodes.
struct Tableau {
    m: usize,
    n: usize,
    flow: DMatrix<f64>,
    basic: Vec<bool>,
    basis: Vec<(usize, usize)>,
}

impl Tableau {
    fn north_west(p: &[f64], q: &[f64]) -> Self {
        let (m, n) = (p.len(), q.len());
        let mut flow = DMatrix::zeros(m, n);
        let mut basic = vec![false; m * n];
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut rp, mut rq) = (p.to_vec(), q.to_vec());
        let (mut i, mut j) = (0, 0);
        loop {
            // the last row (column) absorbs whatever the columns (rows) still need
            let amount = if i == m - 1 {
                rq[j]
            } else if j == n - 1 {
                rp[i]
            } else {
                rp[i].min(rq[j])
            }
            .max(0.0);
            flow[(i, j)] = amount;
            basic[i * n + j] = true;
            basis.push((i, j));
            rp[i] -= amount;
            rq[j] -= amount;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || rp[i] <= rq[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self {
            m,
            n,
            flow,
            basic,
            basis,
        }
    }

    fn is_basic(&self, i: usize, j: usize) -> bool {
        self.basic[i * self.n + j]
    }

    /// Node ids: rows are `0..m`, columns are `m..m+n`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.basis.iter().enumerate() {
            adj[i].push((self.m + j, k));
            adj[self.m + j].push((i, k));
        }
        adj
    }

    /// Dual potentials with `u_0 = 0` and `u_i + v_j = c_ij` on basic cells.
    fn potentials(&self, cost: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
        let adj = self.adjacency();
        let mut pot = vec![0.0; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(node) = stack.pop() {
            for &(next, k) in &adj[node] {
                if seen[next] {
                    continue;
                }
                let (i, j) = self.basis[k];
                pot[next] = cost[(i, j)] - pot[node];
                seen[next] = true;
                stack.push(next);
            }
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Basis cells on the tree path from column node `j` to row node `i`.
    fn tree_path(&self, i: usize, j: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let total = self.m + self.n;
        let start = self.m + j;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut seen = vec![false; total];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(node) = stack.pop() {
            if node == i {
                break;
            }
            for &(next, k) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, k));
                    stack.push(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = i;
        while node != start {
            let (prev, k) = parent[node].expect("basis is a spanning tree");
            path.push(k);
            node = prev;
        }
        path.reverse();
        path
    }

    fn pivot(&mut self, (ei, ej): (usize, usize)) {
        // Along the path from column ej to row ei, cells alternate between
        // losing and gaining flow, starting with a loss next to column ej.
        let path = self.tree_path(ei, ej);
        let n = self.n;
        let mut leaving_pos = 0;
        let mut theta = f64::INFINITY;
        for (pos, &k) in path.iter().enumerate().step_by(2) {
            let (i, j) = self.basis[k];
            let f = self.flow[(i, j)];
            let better = f < theta
                || (f == theta && i * n + j < {
                    let (li, lj) = self.basis[path[leaving_pos]];
                    li * n + lj
                });
            if better {
                theta = f;
                leaving_pos = pos;
            }
        }
        for (pos, &k) in path.iter().enumerate() {
            let cell = self.basis[k];
            if pos % 2 == 0 {
                self.flow[cell] -= theta;
            } else {
                self.flow[cell] += theta;
            }
        }
        let leaving_k = path[leaving_pos];
        let (li, lj) = self.basis[leaving_k];
        self.flow[(li, lj)] = 0.0;
        self.basic[li * n + lj] = false;
        self.flow[(ei, ej)] = theta;
        self.basic[ei * n + ej] = true;
        self.basis[leaving_k] = (ei, ej);
        for f in self.flow.iter_mut() {
            if *f < 0.0 {
                *f = 0.0;
            }
        }
    }
}

/// Squared-W2 between two equal-size empirical samples sorted ascending.
pub fn quantile_w2_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "sample counts differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("empty samples".into()));
    }
    for (s, name) in [(a, "a"), (b, "b")] {
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite value in {name}")));
        }
        if s.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput(format!("{name} is not sorted ascending")));
        }
    }
    let total: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(total / a.len() as f64)
}

/// One support point of a discrete joint distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Finite-support joint distribution over `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint")]
pub struct DiscreteJoint {
    points: Vec<SupportPoint>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawJoint {
    points: Vec<SupportPoint>,
    weights: Vec<f64>,
}

impl TryFrom<RawJoint> for DiscreteJoint {
    type Error = Error;
    fn try_from(raw: RawJoint) -> Result<Self> {
        DiscreteJoint::new(raw.points, raw.weights)
    }
}

/// A marginal with duplicate support points merged.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub support: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// For every joint support point, the index of its marginal atom.
    pub atom_of_point: Vec<usize>,
}

impl DiscreteJoint {
    pub fn new(points: Vec<SupportPoint>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidWeights(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let (dx, dy) = (points[0].x.len(), points[0].y.len());
        if dx == 0 || dy == 0 {
            return Err(Error::DimensionMismatch("support point with empty x or y".into()));
        }
        for (k, pt) in points.iter().enumerate() {
            if pt.x.len() != dx || pt.y.len() != dy {
                return Err(Error::DimensionMismatch(format!("support point {k} has inconsistent dims")));
            }
            if pt.x.iter().chain(&pt.y).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("support point {k} is not finite")));
            }
        }
        let s = validate_measure(&weights, "weights")?;
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!("weights sum to {s}, expected 1")));
        }
        Ok(Self { points, weights })
    }

    pub fn points(&self) -> &[SupportPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim_x(&self) -> usize {
        self.points[0].x.len()
    }

    pub fn dim_y(&self) -> usize {
        self.points[0].y.len()
    }

    pub fn x_marginal(&self) -> Marginal {
        merge(self.points.iter().map(|p| p.x.as_slice()), &self.weights)
    }

    pub fn y_marginal(&self) -> Marginal {
        merge(self.points.iter().map(|p| p.y.as_slice()), &self.weights)
    }
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).abs() <= MERGE_TOL)
}

fn merge<'a>(coords: impl Iterator<Item = &'a [f64]>, weights: &[f64]) -> Marginal {
    let mut support: Vec<Vec<f64>> = Vec::new();
    let mut merged = Vec::new();
    let mut atom_of_point = Vec::new();
    for (c, &w) in coords.zip(weights) {
        match support.iter().position(|s| same_point(s, c)) {
            Some(k) => {
                merged[k] += w;
                atom_of_point.push(k);
            }
            None => {
                support.push(c.to_vec());
                merged.push(w);
                atom_of_point.push(support.len() - 1);
            }
        }
    }
    Marginal {
        support,
        weights: merged,
        atom_of_point,
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

fn check_dims(a: &DiscreteJoint, b: &DiscreteJoint, need_x: bool) -> Result<()> {
    if a.dim_y() != b.dim_y() || (need_x && a.dim_x() != b.dim_x()) {
        return Err(Error::DimensionMismatch(format!(
            "joint dims (x {}, y {}) vs (x {}, y {})",
            a.dim_x(),
            a.dim_y(),
            b.dim_x(),
            b.dim_y()
        )));
    }
    Ok(())
}

fn oracle_report(kind: MetricKind, value: f64, a: &DiscreteJoint) -> MetricReport {
    MetricReport {
        metric: kind,
        value,
        n_samples: a.len(),
        dim_x: a.dim_x(),
        dim_y: a.dim_y(),
        seed: None,
        tolerances: Tolerances::default(),
    }
}

/// Optimal coupling between the merged `y` marginals of `a` and `b`.
pub fn mwd_plan(a: &DiscreteJoint, b: &DiscreteJoint) -> Result<(Marginal, Marginal, CouplingPlan)> {
    check_dims(a, b, false)?;
    let (ma, mb) = (a.y_marginal(), b.y_marginal());
    let cost = DMatrix::from_fn(ma.support.len(), mb.support.len(), |i, j| {
        sq_dist(&ma.support[i], &mb.support[j])
    });
    let plan = transport(&cost, &ma.weights, &mb.weights)?;
    Ok((ma, mb, plan))
}

pub fn mwd_discrete(a: &DiscreteJoint, b: &DiscreteJoint) -> Result<MetricReport> {
    let (_, _, plan) = mwd_plan(a, b)?;
    Ok(oracle_report(MetricKind::Mwd, plan.objective, a))
}

/// `‖y − ŷ‖² + ‖x − x̂‖²` between every pair of joint support points.
pub fn joint_cost(a: &DiscreteJoint, b: &DiscreteJoint) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| {
        let (p, q) = (&a.points[i], &b.points[j]);
        sq_dist(&p.y, &q.y) + sq_dist(&p.x, &q.x)
    })
}

/// `‖y − ŷ‖²` between every pair of joint support points.
pub fn output_cost(a: &DiscreteJoint, b: &DiscreteJoint) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| sq_dist(&a.points[i].y, &b.points[j].y))
}

pub fn rwd_plan(a: &DiscreteJoint, b: &DiscreteJoint) -> Result<CouplingPlan> {
    check_dims(a, b, true)?;
    transport(&joint_cost(a, b), &a.weights, &b.weights)
}

pub fn rwd_discrete(a: &DiscreteJoint, b: &DiscreteJoint) -> Result<MetricReport> {
    Ok(oracle_report(MetricKind::Rwd, rwd_plan(a, b)?.objective, a))
}

/// One distinct `x` value shared by both joints with the point indices that
/// carry it in each.
#[derive(Debug, Clone)]
struct SharedAtom {
    mass_a: f64,
    points_a: Vec<usize>,
    points_b: Vec<usize>,
}

/// Matches the `x` marginals of `a` and `b` atom by atom.
fn shared_x_atoms(a: &DiscreteJoint, b: &DiscreteJoint) -> Result<Vec<SharedAtom>> {
    check_dims(a, b, true)?;
    let (xa, xb) = (a.x_marginal(), b.x_marginal());
    if xa.support.len() != xb.support.len() {
        return Err(Error::RestrictionViolated(format!(
            "{} distinct x values vs {}",
            xa.support.len(),
            xb.support.len()
        )));
    }
    let mut atoms = Vec::with_capacity(xa.support.len());
    let mut used = vec![false; xb.support.len()];
    for (ka, xv) in xa.support.iter().enumerate() {
        let kb = xb
            .support
            .iter()
            .position(|s| same_point(s, xv))
            .ok_or_else(|| Error::RestrictionViolated(format!("x = {xv:?} is missing from the second joint")))?;
        if used[kb] {
            return Err(Error::RestrictionViolated(format!("x = {xv:?} matched twice")));
        }
        used[kb] = true;
        if (xa.weights[ka] - xb.weights[kb]).abs() > WEIGHT_TOL {
            return Err(Error::RestrictionViolated(format!(
                "x = {xv:?} has mass {} vs {}",
                xa.weights[ka], xb.weights[kb]
            )));
        }
        atoms.push(SharedAtom {
            mass_a: xa.weights[ka],
            points_a: (0..a.len()).filter(|&i| xa.atom_of_point[i] == ka).collect(),
            points_b: (0..b.len()).filter(|&j| xb.atom_of_point[j] == kb).collect(),
        });
    }
    Ok(atoms)
}

fn sub_cost(a: &DiscreteJoint, b: &DiscreteJoint, atom: &SharedAtom) -> DMatrix<f64> {
    DMatrix::from_fn(atom.points_a.len(), atom.points_b.len(), |r, c| {
        sq_dist(&a.points[atom.points_a[r]].y, &b.points[atom.points_b[c]].y)
    })
}

/// Optimal RWD3 plan, laid out over the full joint supports (`a.len() × b.len()`).
///
/// Mass only moves between points that share the same `x`, so the plan is
/// block diagonal after grouping by `x`. Each block is solved on the
/// unnormalized sub-measures.
pub fn rwd3_plan(a: &DiscreteJoint, b: &DiscreteJoint) -> Result<CouplingPlan> {
    let atoms = shared_x_atoms(a, b)?;
    let mut plan = DMatrix::zeros(a.len(), b.len());
    let mut objective = 0.0;
    for atom in &atoms {
        let pa: Vec<f64> = atom.points_a.iter().map(|&i| a.weights[i]).collect();
        let pb: Vec<f64> = atom.points_b.iter().map(|&j| b.weights[j]).collect();
        let block = transport(&sub_cost(a, b, atom), &pa, &pb)?;
        for (r, &i) in atom.points_a.iter().enumerate() {
            for (c, &j) in atom.points_b.iter().enumerate() {
                plan[(i, j)] = block.plan[(r, c)];
            }
        }
        objective += block.objective;
    }
    Ok(CouplingPlan { plan, objective })
}

pub fn rwd3_discrete(a: &DiscreteJoint, b: &DiscreteJoint) -> Result<MetricReport> {
    Ok(oracle_report(MetricKind::Rwd3, rwd3_plan(a, b)?.objective, a))
}

/// Expected distance between the conditionals, one normalized OT problem per `x`.
pub fn cwd_discrete(a: &DiscreteJoint, b: &DiscreteJoint) -> Result<MetricReport> {
    let atoms = shared_x_atoms(a, b)?;
    let mut total = 0.0;
    for atom in &atoms {
        if atom.mass_a == 0.0 {
            continue;
        }
        let mass_b: f64 = atom.points_b.iter().map(|&j| b.weights[j]).sum();
        let pa: Vec<f64> = atom.points_a.iter().map(|&i| a.weights[i] / atom.mass_a).collect();
        let pb: Vec<f64> = atom.points_b.iter().map(|&j| b.weights[j] / mass_b).collect();
        let w = solve_ot(&sub_cost(a, b, atom), &pa, &pb)?.objective;
        total += atom.mass_a * w;
    }
    Ok(oracle_report(MetricKind::Cwd, total, a))
}

/// The four oracle distances for one pair of joints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleChain {
    pub mwd: f64,
    pub rwd: f64,
    pub rwd3: f64,
    pub cwd: f64,
}

impl OracleChain {
    pub fn compute(a: &DiscreteJoint, b: &DiscreteJoint) -> Result<Self> {
        Ok(Self {
            mwd: mwd_discrete(a, b)?.value,
            rwd: rwd_discrete(a, b)?.value,
            rwd3: rwd3_discrete(a, b)?.value,
            cwd: cwd_discrete(a, b)?.value,
        })
    }

    /// Slacks `(cwd − rwd3, rwd3 − rwd, rwd − mwd)`; all nonnegative when the
    /// ordering holds.
    pub fn slacks(&self) -> [f64; 3] {
        [self.cwd - self.rwd3, self.rwd3 - self.rwd, self.rwd - self.mwd]
    }

    pub fn min_slack(&self) -> f64 {
        self.slacks().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Random pair of joints with a shared `x` marginal: at most `max_x` distinct
/// `x` values, at most `max_y` `y` atoms per conditional, dims up to `max_dim`.
pub fn random_instance_pair(
    rng: &mut impl Rng,
    max_x: usize,
    max_y: usize,
    max_dim: usize,
) -> (DiscreteJoint, DiscreteJoint) {
    let dx = rng.random_range(1..=max_dim);
    let dy = rng.random_range(1..=max_dim);
    let kx = rng.random_range(1..=max_x);
    let xs: Vec<Vec<f64>> = (0..kx)
        .map(|_| (0..dx).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let qx = random_simplex(rng, kx);
    let a = random_model(rng, &xs, &qx, dy, max_y);
    let b = random_model(rng, &xs, &qx, dy, max_y);
    (a, b)
}

fn random_model(
    rng: &mut impl Rng,
    xs: &[Vec<f64>],
    qx: &[f64],
    dy: usize,
    max_y: usize,
) -> DiscreteJoint {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (x, &mass) in xs.iter().zip(qx) {
        let k = rng.random_range(1..=max_y);
        for c in random_simplex(rng, k) {
            points.push(SupportPoint {
                x: x.clone(),
                y: (0..dy).map(|_| rng.random_range(-2.0..2.0)).collect(),
            });
            weights.push(mass * c);
        }
    }
    let s: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= s);
    DiscreteJoint::new(points, weights).expect("generated weights are valid")
}

fn random_simplex(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / s).collect()
}

/// Two-point instance where the second model keeps the output marginal but
/// swaps which output goes with which input.
pub fn shuffled_pairing_instance() -> (DiscreteJoint, DiscreteJoint) {
    let pt = |x: f64, y: f64| SupportPoint { x: vec![x], y: vec![y] };
    let a = DiscreteJoint::new(vec![pt(0.0, 0.0), pt(1.0, 1.0)], vec![0.5, 0.5]).unwrap();
    let b = DiscreteJoint::new(vec![pt(0.0, 1.0), pt(1.0, 0.0)], vec![0.5, 0.5]).unwrap();
    (a, b)
}
