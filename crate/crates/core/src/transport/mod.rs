//! Gromov-Wasserstein and fused Gromov-Wasserstein couplings by Frank-Wolfe
//! with an exact optimal-transport linear minimisation step.

mod simplex;

use ndarray::{Array1, Array2, Zip};
use rayon::prelude::*;

use crate::barcode::Barcode;
use crate::error::{Error, Result};
use crate::metrics::bottleneck;
use crate::tree::{MergeTree, NodeId};

use simplex::TransportSimplex;

const MASS_TOL: f64 = 1e-12;
const MARGINAL_TOL: f64 = 1e-9;
const DIRECTION_TOL: f64 = 1e-12;

/// A square matrix with a probability vector on its index set.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureNetwork {
    matrix: Array2<f64>,
    mass: Array1<f64>,
}

impl MeasureNetwork {
    pub fn new(matrix: Array2<f64>, mass: Array1<f64>) -> Result<Self> {
        let n = mass.len();
        if matrix.dim() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "matrix {:?} for {n} masses",
                matrix.dim()
            )));
        }
        if n == 0 {
            return Err(Error::input("measure network is empty"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("measure network matrix must be finite"));
        }
        if mass.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::input("masses must be non-negative"));
        }
        let total = mass.sum();
        if (total - 1.0).abs() > MASS_TOL * n as f64 {
            return Err(Error::input(format!("masses sum to {total}, not 1")));
        }
        Ok(MeasureNetwork { matrix, mass })
    }

    pub fn uniform(matrix: Array2<f64>) -> Result<Self> {
        let n = matrix.nrows();
        let mass = Array1::from_elem(n, 1.0 / n as f64);
        Self::new(matrix, mass)
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn mass(&self) -> &Array1<f64> {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

/// A measure network with a barcode attached to every point.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMeasureNetwork {
    pub base: MeasureNetwork,
    pub features: Vec<Barcode>,
}

impl StructuredMeasureNetwork {
    pub fn new(base: MeasureNetwork, features: Vec<Barcode>) -> Result<Self> {
        if features.len() != base.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} features for {} points",
                features.len(),
                base.len()
            )));
        }
        Ok(StructuredMeasureNetwork { base, features })
    }
}

/// A joint distribution with prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    matrix: Array2<f64>,
}

impl Coupling {
    pub fn new(matrix: Array2<f64>, mu1: &Array1<f64>, mu2: &Array1<f64>) -> Result<Self> {
        if matrix.dim() != (mu1.len(), mu2.len()) {
            return Err(Error::DimensionMismatch(format!(
                "coupling {:?} for marginals of sizes {} and {}",
                matrix.dim(),
                mu1.len(),
                mu2.len()
            )));
        }
        if matrix.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::input("coupling entries must be non-negative"));
        }
        let c = Coupling { matrix };
        let (r, s) = c.marginal_errors(mu1, mu2);
        if r.max(s) > MARGINAL_TOL {
            return Err(Error::input(format!("coupling marginals off by {}", r.max(s))));
        }
        Ok(c)
    }

    pub fn product(mu1: &Array1<f64>, mu2: &Array1<f64>) -> Self {
        let matrix = Array2::from_shape_fn((mu1.len(), mu2.len()), |(i, j)| mu1[i] * mu2[j]);
        Coupling { matrix }
    }

    /// Coupling supported on the diagonal; needs equal marginals.
    pub fn identity(mu1: &Array1<f64>, mu2: &Array1<f64>) -> Result<Self> {
        if mu1.len() != mu2.len() || mu1.iter().zip(mu2).any(|(a, b)| (a - b).abs() > MARGINAL_TOL) {
            return Err(Error::input("identity coupling needs identical marginals"));
        }
        Ok(Coupling { matrix: Array2::from_diag(mu1) })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> (usize, usize) {
        self.matrix.dim()
    }

    /// Largest absolute deviation of the row and column sums.
    pub fn marginal_errors(&self, mu1: &Array1<f64>, mu2: &Array1<f64>) -> (f64, f64) {
        let rows = self.matrix.sum_axis(ndarray::Axis(1));
        let cols = self.matrix.sum_axis(ndarray::Axis(0));
        let r = rows.iter().zip(mu1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let c = cols.iter().zip(mu2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        (r, c)
    }
}

fn check_dims(a: &MeasureNetwork, b: &MeasureNetwork, nu: &Array2<f64>) -> Result<()> {
    if nu.dim() != (a.len(), b.len()) {
        return Err(Error::DimensionMismatch(format!(
            "coupling {:?} between networks of sizes {} and {}",
            nu.dim(),
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `C1 X C2^T`.
fn sandwich(c1: &Array2<f64>, x: &Array2<f64>, c2: &Array2<f64>) -> Array2<f64> {
    c1.dot(x).dot(&c2.t())
}

fn inner(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    Zip::from(a).and(b).fold(0.0, |acc, &x, &y| acc + x * y)
}

/// The part of the distortion that only depends on the marginals of `nu`:
/// `sum_ik C1(i,k)^2 r_i r_k + sum_jl C2(j,l)^2 c_j c_l`.
fn marginal_term(a: &Array2<f64>, b: &Array2<f64>, rows: &Array1<f64>, cols: &Array1<f64>) -> f64 {
    let sq_a = a.mapv(|x| x * x);
    let sq_b = b.mapv(|x| x * x);
    rows.dot(&sq_a.dot(rows)) + cols.dot(&sq_b.dot(cols))
}

/// Distortion `sum (C1(i,k) - C2(j,l))^p nu(i,j) nu(k,l)`. For `p = 2` the
/// factored form is used; other `p` fall back to the direct sum.
pub fn gw_distortion(a: &MeasureNetwork, b: &MeasureNetwork, nu: &Coupling, p: u32) -> Result<f64> {
    check_dims(a, b, &nu.matrix)?;
    if p == 0 {
        return Err(Error::input("p must be positive"));
    }
    if p != 2 {
        return gw_distortion_reference(a, b, nu, p);
    }
    let x = &nu.matrix;
    let rows = x.sum_axis(ndarray::Axis(1));
    let cols = x.sum_axis(ndarray::Axis(0));
    let cross = inner(&sandwich(&a.matrix, x, &b.matrix), x);
    Ok(marginal_term(&a.matrix, &b.matrix, &rows, &cols) - 2.0 * cross)
}

/// Quadruple loop evaluation of the distortion.
pub fn gw_distortion_reference(a: &MeasureNetwork, b: &MeasureNetwork, nu: &Coupling, p: u32) -> Result<f64> {
    check_dims(a, b, &nu.matrix)?;
    let (n, m) = nu.dim();
    let x = &nu.matrix;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..m {
            let xij = x[[i, j]];
            if xij == 0.0 {
                continue;
            }
            for k in 0..n {
                for l in 0..m {
                    total += (a.matrix[[i, k]] - b.matrix[[j, l]]).abs().powi(p as i32) * xij * x[[k, l]];
                }
            }
        }
    }
    Ok(total)
}

/// Minimiser of `<cost, nu>` over couplings of `mu1` and `mu2`, at a vertex
/// of the transport polytope.
pub fn ot_lmo(cost: &Array2<f64>, mu1: &Array1<f64>, mu2: &Array1<f64>) -> Result<Coupling> {
    if cost.dim() != (mu1.len(), mu2.len()) {
        return Err(Error::DimensionMismatch("cost matrix does not match the marginals".into()));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::input("cost matrix must be finite"));
    }
    check_masses(mu1, mu2)?;
    let mut lp = TransportSimplex::new(mu1.as_slice().expect("contiguous"), mu2.as_slice().expect("contiguous"));
    Ok(solve_lp(&mut lp, cost))
}

fn check_masses(mu1: &Array1<f64>, mu2: &Array1<f64>) -> Result<()> {
    if mu1.iter().chain(mu2).any(|&m| !(m >= 0.0)) {
        return Err(Error::input("masses must be non-negative"));
    }
    let (s1, s2) = (mu1.sum(), mu2.sum());
    if (s1 - s2).abs() > MARGINAL_TOL {
        return Err(Error::input(format!("masses sum to {s1} and {s2}")));
    }
    Ok(())
}

fn solve_lp(lp: &mut TransportSimplex, cost: &Array2<f64>) -> Coupling {
    let (n, m) = lp.dims();
    let owned;
    let flat = match cost.as_slice() {
        Some(s) => s,
        None => {
            owned = cost.iter().copied().collect::<Vec<f64>>();
            &owned
        }
    };
    let flow = lp.solve(flat);
    Coupling { matrix: Array2::from_shape_vec((n, m), flow).expect("n x m flow") }
}

/// Frank-Wolfe settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iters: 200, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Product,
    Identity,
    Given(Coupling),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutput {
    pub coupling: Coupling,
    /// Objective before the first step and after every accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

impl SolverOutput {
    pub fn objective(&self) -> f64 {
        *self.trace.last().expect("trace starts with the initial value")
    }
}

fn initial(init: &Init, mu1: &Array1<f64>, mu2: &Array1<f64>) -> Result<Coupling> {
    match init {
        Init::Product => Ok(Coupling::product(mu1, mu2)),
        Init::Identity => Coupling::identity(mu1, mu2),
        Init::Given(c) => {
            if c.dim() != (mu1.len(), mu2.len()) {
                return Err(Error::DimensionMismatch("initial coupling has the wrong shape".into()));
            }
            Coupling::new(c.matrix.clone(), mu1, mu2)
        }
    }
}

/// Frank-Wolfe on `(1 - zeta) <M, nu> + zeta J_2(nu)`. The line search is
/// exact over the whole feasible chord through the iterate, so a step may
/// also move away from the linear minimiser.
fn frank_wolfe(
    a: &MeasureNetwork,
    b: &MeasureNetwork,
    linear: Option<&Array2<f64>>,
    zeta: f64,
    init: &Init,
    options: &SolverOptions,
) -> Result<SolverOutput> {
    let (c1, c2) = (&a.matrix, &b.matrix);
    let (mu1, mu2) = (&a.mass, &b.mass);
    check_masses(mu1, mu2)?;
    let mut nu = initial(init, mu1, mu2)?.matrix;
    let rows = nu.sum_axis(ndarray::Axis(1));
    let cols = nu.sum_axis(ndarray::Axis(0));
    let constant = marginal_term(c1, c2, &rows, &cols);
    let c1t = c1.t().to_owned();

    let mut cross = sandwich(c1, &nu, c2);
    let objective = |nu: &Array2<f64>, cross: &Array2<f64>| -> f64 {
        let quad = constant - 2.0 * inner(cross, nu);
        let lin = linear.map_or(0.0, |mat| inner(mat, nu));
        zeta * quad + (1.0 - zeta) * lin
    };
    let mut value = objective(&nu, &cross);
    let mut trace = vec![value];
    let mut lp = TransportSimplex::new(mu1.as_slice().expect("contiguous"), mu2.as_slice().expect("contiguous"));
    let mut iterations = 0;
    while iterations < options.max_iters {
        if value <= 0.0 && linear.is_none() {
            break;
        }
        iterations += 1;
        // gradient up to terms constant on the transport polytope
        let cross_t = c1t.dot(&nu).dot(c2);
        let mut grad = (&cross + &cross_t) * (-2.0 * zeta);
        if let Some(mat) = linear {
            grad.scaled_add(1.0 - zeta, mat);
        }
        let target = solve_lp(&mut lp, &grad).matrix;
        let dir = &target - &nu;
        // the linear minimiser is the iterate itself, up to rounding
        if dir.iter().fold(0.0_f64, |m, d| m.max(d.abs())) <= DIRECTION_TOL {
            break;
        }
        let dir_cross = sandwich(c1, &dir, c2);
        let qa = -2.0 * zeta * inner(&dir_cross, &dir);
        let mut qb = -2.0 * zeta * (inner(&cross, &dir) + inner(&dir_cross, &nu));
        if let Some(mat) = linear {
            qb += (1.0 - zeta) * inner(mat, &dir);
        }
        // the chord through nu along dir stays feasible back to t_lo
        let t_lo = -nu
            .iter()
            .zip(dir.iter())
            .filter(|&(_, &d)| d > 0.0)
            .map(|(&x, &d)| x.max(0.0) / d)
            .fold(f64::INFINITY, f64::min);
        let t_lo = if t_lo.is_finite() { t_lo } else { 0.0 };
        let q = |t: f64| qa * t * t + qb * t;
        let mut t = 0.0;
        let mut best = 0.0;
        let stationary = if qa > 0.0 { Some((-qb / (2.0 * qa)).clamp(t_lo, 1.0)) } else { None };
        for cand in [Some(1.0), Some(t_lo), stationary].into_iter().flatten() {
            if q(cand) < best {
                best = q(cand);
                t = cand;
            }
        }
        if t == 0.0 {
            break;
        }
        let next = &nu + &(&dir * t);
        let next_cross = &cross + &(&dir_cross * t);
        let next_value = objective(&next, &next_cross);
        if next_value > value {
            break;
        }
        let decrease = value - next_value;
        nu = next;
        cross = next_cross;
        value = next_value;
        trace.push(value);
        if decrease <= options.tol * value.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    nu.mapv_inplace(|x| x.max(0.0));
    Ok(SolverOutput { coupling: Coupling { matrix: nu }, trace, iterations })
}

/// Gromov-Wasserstein coupling for `p = 2`.
pub fn solve_gw(a: &MeasureNetwork, b: &MeasureNetwork, init: &Init, options: &SolverOptions) -> Result<SolverOutput> {
    frank_wolfe(a, b, None, 1.0, init, options)
}

/// Bottleneck cost matrix between feature sets. Infinite entries are replaced
/// by ten times the largest finite entry; the flag reports whether any were.
pub fn bottleneck_cost_matrix(f1: &[Barcode], f2: &[Barcode]) -> Result<(Array2<f64>, bool)> {
    let m = f2.len();
    let flat: Vec<f64> = (0..f1.len() * m)
        .into_par_iter()
        .map(|idx| bottleneck(&f1[idx / m], &f2[idx % m]))
        .collect::<Result<_>>()?;
    let largest = flat.iter().copied().filter(|x| x.is_finite()).fold(0.0, f64::max);
    let capped = flat.iter().any(|x| x.is_infinite());
    let cap = if largest > 0.0 { 10.0 * largest } else { 1.0 };
    let matrix = Array2::from_shape_vec((f1.len(), m), flat).expect("shape").mapv(|x| x.min(cap));
    Ok((matrix, capped))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FgwOutput {
    pub solution: SolverOutput,
    /// Squared bottleneck costs used for the linear term.
    pub feature_cost: Array2<f64>,
    pub capped_infinite_costs: bool,
}

/// Fused Gromov-Wasserstein coupling: `(1 - zeta) I_2 + zeta J_2` with
/// squared bottleneck feature costs.
pub fn solve_fgw(
    a: &StructuredMeasureNetwork,
    b: &StructuredMeasureNetwork,
    zeta: f64,
    init: &Init,
    options: &SolverOptions,
) -> Result<FgwOutput> {
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::input(format!("zeta must lie in [0, 1], got {zeta}")));
    }
    let (cost, capped) = bottleneck_cost_matrix(&a.features, &b.features)?;
    let feature_cost = cost.mapv(|x| x * x);
    let solution = if zeta == 1.0 {
        frank_wolfe(&a.base, &b.base, None, 1.0, init, options)?
    } else if zeta == 0.0 {
        let coupling = ot_lmo(&feature_cost, &a.base.mass, &b.base.mass)?;
        let value = inner(&feature_cost, &coupling.matrix);
        let start = initial(init, &a.base.mass, &b.base.mass)?;
        let first = inner(&feature_cost, &start.matrix);
        SolverOutput { coupling, trace: vec![first, value.min(first)], iterations: 1 }
    } else {
        frank_wolfe(&a.base, &b.base, Some(&feature_cost), zeta, init, options)?
    };
    Ok(FgwOutput { solution, feature_cost, capped_infinite_costs: capped })
}

/// Leaf maps read off a coupling: every leaf of F goes to the G node with the
/// largest entry in its row, every leaf of G to the F node with the largest
/// entry in its column. Ties go to the lower node, then the smaller id.
pub fn coupling_to_maps(
    nu: &Coupling,
    tree_f: &MergeTree,
    tree_g: &MergeTree,
    order_f: &[NodeId],
    order_g: &[NodeId],
) -> Result<(Vec<(NodeId, NodeId)>, Vec<(NodeId, NodeId)>)> {
    if nu.dim() != (order_f.len(), order_g.len()) {
        return Err(Error::DimensionMismatch("coupling does not match the node orders".into()));
    }
    let x = &nu.matrix;
    let pos = |order: &[NodeId], node: NodeId| order.iter().position(|&u| u == node);
    let better = |tree: &MergeTree, cand: NodeId, cur: NodeId| {
        tree.height(cand).total_cmp(&tree.height(cur)).then(cand.cmp(&cur)).is_lt()
    };
    let mut phi = Vec::new();
    for leaf in tree_f.leaves() {
        let i = pos(order_f, leaf).ok_or_else(|| Error::input(format!("leaf {leaf} missing from node order")))?;
        let mut best: Option<(f64, NodeId)> = None;
        for (j, &g) in order_g.iter().enumerate() {
            let v = x[[i, j]];
            best = match best {
                None => Some((v, g)),
                Some((bv, bg)) if v > bv || (v == bv && better(tree_g, g, bg)) => Some((v, g)),
                keep => keep,
            };
        }
        match best {
            Some((v, g)) if v > 0.0 => phi.push((leaf, g)),
            _ => return Err(Error::Solver(format!("row of leaf {leaf} carries no mass"))),
        }
    }
    let mut psi = Vec::new();
    for leaf in tree_g.leaves() {
        let j = pos(order_g, leaf).ok_or_else(|| Error::input(format!("leaf {leaf} missing from node order")))?;
        let mut best: Option<(f64, NodeId)> = None;
        for (i, &f) in order_f.iter().enumerate() {
            let v = x[[i, j]];
            best = match best {
                None => Some((v, f)),
                Some((bv, bf)) if v > bv || (v == bv && better(tree_f, f, bf)) => Some((v, f)),
                keep => keep,
            };
        }
        match best {
            Some((v, f)) if v > 0.0 => psi.push((leaf, f)),
            _ => return Err(Error::Solver(format!("column of leaf {leaf} carries no mass"))),
        }
    }
    Ok((phi, psi))
}
