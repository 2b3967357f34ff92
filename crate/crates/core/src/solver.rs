//! Monotone successive approximation for the coupled integral equations
//!
//! ```text
//! u(r) = a1 + ∫₀^r Ψ1^{-1}( (1/ξ1(t)) ∫₀^t ξ1 p1 f1(u, v) ds ) dt
//! v(r) = a2 + ∫₀^r Ψ2^{-1}( (1/ξ2(t)) ∫₀^t ξ2 p2 f2(u, v) ds ) dt
//! ```
//!
//! Starting from the constant pair (a1, a2), each sweep feeds the previous
//! iterate through the right-hand side. The iterates grow pointwise, so a
//! Cauchy test on successive differences detects the limit; pointwise
//! monotone growth is asserted up to a scale-relative rounding slack.

use crate::functionals::FunctionalTable;
use crate::models::ModelError;
use crate::problem::{ProblemError, ProblemSpec};
use crate::quadrature::{cumulative_trapezoid, QuadratureError, RadialGrid, XiTable};
use thiserror::Error;

/// Values this large are treated as numerical blow-up inside the domain.
pub const OVERFLOW_GUARD: f64 = 1e300;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("iterates exceeded the overflow guard at node {node} (r = {radius})")]
    BlowUp { node: usize, radius: f64 },
}

/// The iterate pair on a grid, with the Ψ^{-1} integrand samples as
/// derivative values.
#[derive(Debug, Clone)]
pub struct SolutionPair {
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

impl SolutionPair {
    /// The zeroth iterate: constants (a1, a2) with zero derivative.
    pub fn initial(spec: &ProblemSpec, grid: RadialGrid) -> Self {
        let n = grid.len();
        SolutionPair {
            grid,
            u: vec![spec.eqs[0].a; n],
            v: vec![spec.eqs[1].a; n],
            du: vec![0.0; n],
            dv: vec![0.0; n],
        }
    }

    pub fn value_at_radius(&self, r: f64) -> (f64, f64) {
        let nodes = self.grid.nodes();
        (
            crate::quadrature::interp_monotone(nodes, &self.u, r),
            crate::quadrature::interp_monotone(nodes, &self.v, r),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveStatus {
    Converged,
    IterationCapReached,
    BlowUp { node: usize, radius: f64 },
}

#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    pub status: SolveStatus,
    pub iterations: usize,
    /// Sup-norm of the last successive difference (u and v summed).
    pub final_difference: f64,
    pub difference_history: Vec<f64>,
    /// Worst observed violation of pointwise iterate growth (should be
    /// rounding-level; the scheme is monotone).
    pub monotone_violation: f64,
}

#[derive(Debug)]
pub struct SolveOutcome {
    pub pair: SolutionPair,
    pub diagnostics: SolveDiagnostics,
}

struct SweepContext {
    xi: [XiTable; 2],
    p_samples: [Vec<f64>; 2],
}

impl SweepContext {
    fn new(spec: &ProblemSpec, grid: &RadialGrid) -> Result<Self, SolveError> {
        Ok(SweepContext {
            xi: [spec.xi_table(0, grid)?, spec.xi_table(1, grid)?],
            p_samples: [grid.sample(&spec.eqs[0].p)?, grid.sample(&spec.eqs[1].p)?],
        })
    }

    /// One sweep of the approximation scheme for component `i`.
    fn component(
        &self,
        spec: &ProblemSpec,
        grid: &RadialGrid,
        i: usize,
        u_prev: &[f64],
        v_prev: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), SolveError> {
        let n = grid.len();
        let mut source = Vec::with_capacity(n);
        for k in 0..n {
            let fv = spec.eqs[i].f.eval(u_prev[k], v_prev[k])?;
            let q = self.p_samples[i][k] * fv;
            if !q.is_finite() || q.abs() > OVERFLOW_GUARD {
                return Err(SolveError::BlowUp {
                    node: k,
                    radius: grid.nodes()[k],
                });
            }
            source.push(q);
        }
        let g = self.xi[i].averaged_prefix(&source);
        let mut derivative = Vec::with_capacity(n);
        for (k, &gk) in g.iter().enumerate() {
            let d = spec.eqs[i].model.psi_inverse(gk)?;
            if !d.is_finite() || d > OVERFLOW_GUARD {
                return Err(SolveError::BlowUp {
                    node: k,
                    radius: grid.nodes()[k],
                });
            }
            derivative.push(d);
        }
        let mut values = cumulative_trapezoid(grid.nodes(), &derivative);
        let a = spec.eqs[i].a;
        for (k, value) in values.iter_mut().enumerate() {
            *value += a;
            if !value.is_finite() || *value > OVERFLOW_GUARD {
                return Err(SolveError::BlowUp {
                    node: k,
                    radius: grid.nodes()[k],
                });
            }
        }
        Ok((values, derivative))
    }
}

/// Apply the approximation scheme once to `prev`.
pub fn iterate_once(spec: &ProblemSpec, prev: &SolutionPair) -> Result<SolutionPair, SolveError> {
    let ctx = SweepContext::new(spec, &prev.grid)?;
    let (u, du) = ctx.component(spec, &prev.grid, 0, &prev.u, &prev.v)?;
    let (v, dv) = ctx.component(spec, &prev.grid, 1, &prev.u, &prev.v)?;
    Ok(SolutionPair {
        grid: prev.grid.clone(),
        u,
        v,
        du,
        dv,
    })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn sup_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

fn worst_drop(new: &[f64], old: &[f64]) -> f64 {
    new.iter()
        .zip(old)
        .map(|(n, o)| (o - n).max(0.0) / (1.0 + n.abs()))
        .fold(0.0, f64::max)
}

/// Iterate from the constant pair until the successive-difference Cauchy
/// test passes or the iteration cap is reached; blow-up inside the domain
/// is reported with the node where the overflow guard tripped, with the
/// last completed iterate still returned.
pub fn solve(spec: &ProblemSpec) -> Result<SolveOutcome, SolveError> {
    let grid = RadialGrid::build(
        spec.numerics.radius,
        spec.numerics.grid_points,
        spec.numerics.grading,
    )?;
    let ctx = SweepContext::new(spec, &grid)?;
    let mut current = SolutionPair::initial(spec, grid.clone());
    let mut history = Vec::new();
    let mut monotone_violation = 0.0f64;

    for iteration in 1..=spec.numerics.max_iterations {
        let u_new;
        let v_new;
        match (
            ctx.component(spec, &grid, 0, &current.u, &current.v),
            ctx.component(spec, &grid, 1, &current.u, &current.v),
        ) {
            (Ok(a), Ok(b)) => {
                u_new = a;
                v_new = b;
            }
            (Err(SolveError::BlowUp { node, radius }), _)
            | (_, Err(SolveError::BlowUp { node, radius })) => {
                return Ok(SolveOutcome {
                    pair: current,
                    diagnostics: SolveDiagnostics {
                        status: SolveStatus::BlowUp { node, radius },
                        iterations: iteration - 1,
                        final_difference: history.last().copied().unwrap_or(f64::INFINITY),
                        difference_history: history,
                        monotone_violation,
                    },
                });
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
        let (u, du) = u_new;
        let (v, dv) = v_new;

        monotone_violation = monotone_violation
            .max(worst_drop(&u, &current.u))
            .max(worst_drop(&v, &current.v));

        let diff = sup_diff(&u, &current.u) + sup_diff(&v, &current.v);
        history.push(diff);
        current = SolutionPair {
            grid: grid.clone(),
            u,
            v,
            du,
            dv,
        };

        let scale = 1.0 + sup_abs(&current.u).max(sup_abs(&current.v));
        if diff < spec.numerics.tolerance * scale {
            return Ok(SolveOutcome {
                pair: current,
                diagnostics: SolveDiagnostics {
                    status: SolveStatus::Converged,
                    iterations: iteration,
                    final_difference: diff,
                    difference_history: history,
                    monotone_violation,
                },
            });
        }
    }

    let final_difference = history.last().copied().unwrap_or(f64::INFINITY);
    Ok(SolveOutcome {
        pair: current,
        diagnostics: SolveDiagnostics {
            status: SolveStatus::IterationCapReached,
            iterations: spec.numerics.max_iterations,
            final_difference,
            difference_history: history,
            monotone_violation,
        },
    })
}

/// Self-consistency residual: sup-node distance between the pair and one
/// application of the scheme to itself, per component.
pub fn residual(spec: &ProblemSpec, pair: &SolutionPair) -> Result<(f64, f64), SolveError> {
    let next = iterate_once(spec, pair)?;
    Ok((sup_diff(&next.u, &pair.u), sup_diff(&next.v, &pair.v)))
}

/// Identity of an a-priori bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundId {
    /// u + v ≤ Z^{-1}(P1 + P2)
    SumUpper,
    /// u ≤ H1^{-1}(P̄1)
    FirstUpper,
    /// v ≤ H2^{-1}(P̄2)
    SecondUpper,
    /// u ≥ a1 + P̲1
    FirstLower,
    /// v ≥ a2 + P̲2
    SecondLower,
}

impl std::fmt::Display for BoundId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            BoundId::SumUpper => "sum-upper",
            BoundId::FirstUpper => "u-upper",
            BoundId::SecondUpper => "v-upper",
            BoundId::FirstLower => "u-lower",
            BoundId::SecondLower => "v-lower",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub id: BoundId,
    /// Bound was checked at all (the gauge bounds need a valid decomposition).
    pub applicable: bool,
    pub passed: bool,
    /// max(0, lhs - rhs) in the inequality's natural orientation, relative
    /// to max(1, |lhs|, |rhs|), maximized over checked nodes.
    pub max_violation: f64,
    pub worst_radius: f64,
    /// Nodes skipped because the inverted gauge saturated there (the bound
    /// degenerates to a lower-bound check at such nodes).
    pub saturated_nodes: usize,
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
    pub tolerance: f64,
}

impl BoundReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.applicable)
    }
}

const BOUND_RTOL: f64 = 1e-6;

/// Check the five per-node envelope inequalities against the tables.
///
/// `decomposition_ok = false` marks the H-gauge bounds not applicable.
/// Nodes where an inverted gauge saturates cannot falsify an upper bound
/// (the true envelope is at least the saturated value), so a literal
/// failure there counts as saturated, not violated.
pub fn verify_bounds(
    pair: &SolutionPair,
    tables: &FunctionalTable,
    decomposition_ok: bool,
) -> BoundReport {
    let nodes = pair.grid.nodes();
    assert_eq!(nodes.len(), tables.radii.len(), "grid mismatch");
    let a1 = pair.u[0];
    let a2 = pair.v[0];

    let mut checks = Vec::new();

    // u + v <= Z^{-1}(P1 + P2)
    {
        let mut check = BoundCheck {
            id: BoundId::SumUpper,
            applicable: true,
            passed: true,
            max_violation: 0.0,
            worst_radius: 0.0,
            saturated_nodes: 0,
        };
        for (k, &radius) in nodes.iter().enumerate() {
            let lhs = pair.u[k] + pair.v[k];
            let inv = tables.z.invert(tables.p[0][k] + tables.p[1][k]);
            if inv.saturated && lhs > inv.value {
                check.saturated_nodes += 1;
                continue;
            }
            record(&mut check, lhs, inv.value, radius);
        }
        check.passed = check.max_violation <= BOUND_RTOL;
        checks.push(check);
    }

    // component upper bounds through the H gauges
    for (id, comp, i) in [
        (BoundId::FirstUpper, &pair.u, 0usize),
        (BoundId::SecondUpper, &pair.v, 1usize),
    ] {
        let mut check = BoundCheck {
            id,
            applicable: decomposition_ok,
            passed: true,
            max_violation: 0.0,
            worst_radius: 0.0,
            saturated_nodes: 0,
        };
        if decomposition_ok {
            for k in 0..nodes.len() {
                let inv = tables.h[i].invert(tables.p_bar[i][k]);
                if inv.saturated && comp[k] > inv.value {
                    check.saturated_nodes += 1;
                    continue;
                }
                record(&mut check, comp[k], inv.value, nodes[k]);
            }
            check.passed = check.max_violation <= BOUND_RTOL;
        }
        checks.push(check);
    }

    // component lower bounds: a_i + P̲_i <= component
    for (id, comp, base, i) in [
        (BoundId::FirstLower, &pair.u, a1, 0usize),
        (BoundId::SecondLower, &pair.v, a2, 1usize),
    ] {
        let mut check = BoundCheck {
            id,
            applicable: true,
            passed: true,
            max_violation: 0.0,
            worst_radius: 0.0,
            saturated_nodes: 0,
        };
        for k in 0..nodes.len() {
            record(&mut check, base + tables.p_under[i][k], comp[k], nodes[k]);
        }
        check.passed = check.max_violation <= BOUND_RTOL;
        checks.push(check);
    }

    BoundReport {
        checks,
        tolerance: BOUND_RTOL,
    }
}

fn record(check: &mut BoundCheck, lhs: f64, rhs: f64, radius: f64) {
    let scale = 1f64.max(lhs.abs()).max(rhs.abs());
    let violation = (lhs - rhs).max(0.0) / scale;
    if violation > check.max_violation {
        check.max_violation = violation;
        check.worst_radius = radius;
    }
}
