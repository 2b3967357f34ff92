//! Radial grids, prefix-sum trapezoid integration, and the weight tables
//! ξ(t) = t^{N-1}·exp(∫₀^t σ(s)ds) shared by every nested radial integral.

use crate::expr::{EvalError, Expr};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("grid needs at least 2 intervals, got {0}")]
    TooFewIntervals(usize),
    #[error("grading exponent must be >= 1, got {0}")]
    BadGrading(f64),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coefficient evaluation failed at r={r}: {source}")]
    CoefficientEval { r: f64, source: EvalError },
}

/// Discretization of `[0, R]` with graded nodes `r_k = R·(k/n)^g`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading: f64,
}

impl RadialGrid {
    pub fn build(radius: f64, intervals: usize, grading: f64) -> Result<Self, QuadratureError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(QuadratureError::BadRadius(radius));
        }
        if intervals < 2 {
            return Err(QuadratureError::TooFewIntervals(intervals));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(QuadratureError::BadGrading(grading));
        }
        let n = intervals as f64;
        let mut nodes = Vec::with_capacity(intervals + 1);
        nodes.push(0.0);
        for k in 1..intervals {
            nodes.push(radius * (k as f64 / n).powf(grading));
        }
        nodes.push(radius);
        Ok(RadialGrid { nodes, grading })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Sample an expression of one variable at every node.
    pub fn sample(&self, f: &Expr) -> Result<Vec<f64>, QuadratureError> {
        self.nodes
            .iter()
            .map(|&r| {
                f.eval(&[r])
                    .map_err(|source| QuadratureError::CoefficientEval { r, source })
            })
            .collect()
    }
}

/// Prefix values `F_k ≈ ∫₀^{r_k} f(s) ds` of a sampled integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTable {
    values: Vec<f64>,
}

impl CumulativeTable {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Linear interpolation between grid nodes; clamped at the endpoints.
    pub fn interpolate(&self, grid: &RadialGrid, t: f64) -> f64 {
        interp_monotone(grid.nodes(), &self.values, t)
    }
}

/// Composite-trapezoid prefix sums over the grid nodes, O(n) total.
pub fn cumulative_integral(
    samples: &[f64],
    grid: &RadialGrid,
) -> Result<CumulativeTable, QuadratureError> {
    if samples.len() != grid.len() {
        return Err(QuadratureError::LengthMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    Ok(CumulativeTable {
        values: cumulative_trapezoid(grid.nodes(), samples),
    })
}

/// Prefix trapezoid sums over arbitrary increasing abscissae.
pub fn cumulative_trapezoid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..xs.len() {
        acc += 0.5 * (xs[k] - xs[k - 1]) * (ys[k] + ys[k - 1]);
        out.push(acc);
    }
    out
}

/// Piecewise-linear interpolation on a nondecreasing abscissa table,
/// clamped at both ends.
pub fn interp_monotone(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let j = match xs.partition_point(|&node| node <= x) {
        0 => 1,
        p => p,
    };
    let (x0, x1) = (xs[j - 1], xs[j]);
    let (y0, y1) = (ys[j - 1], ys[j]);
    if x1 == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Per-grid table of ξ(t) = t^{N-1}·exp(∫₀^t σ(s)ds).
///
/// Values are held in log form so ratio-based sweeps stay finite even when
/// ξ itself would overflow; `value()` exposes the plain weight.
#[derive(Debug, Clone)]
pub struct XiTable {
    nodes: Vec<f64>,
    dim_exponent: f64,
    sigma_cum: Vec<f64>,
    log_xi: Vec<f64>,
}

impl XiTable {
    pub fn new(sigma: &Expr, dimension: usize, grid: &RadialGrid) -> Result<Self, QuadratureError> {
        let sigma_samples = grid.sample(sigma)?;
        let sigma_cum = cumulative_trapezoid(grid.nodes(), &sigma_samples);
        let dim_exponent = (dimension - 1) as f64;
        let log_xi = grid
            .nodes()
            .iter()
            .zip(&sigma_cum)
            .map(|(&r, &s)| {
                if r == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    dim_exponent * r.ln() + s
                }
            })
            .collect();
        Ok(XiTable {
            nodes: grid.nodes().to_vec(),
            dim_exponent,
            sigma_cum,
            log_xi,
        })
    }

    /// ξ at an arbitrary abscissa; the σ-integral is interpolated linearly
    /// between nodes. ξ(0) = 0 for N ≥ 2.
    pub fn value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let s = interp_monotone(&self.nodes, &self.sigma_cum, t);
        (self.dim_exponent * t.ln() + s).exp()
    }

    pub fn log_at_node(&self, k: usize) -> f64 {
        self.log_xi[k]
    }

    /// g_k = (1/ξ(r_k)) ∫₀^{r_k} ξ(s)·q(s) ds by trapezoid, with g_0 = 0.
    ///
    /// Computed through the recurrence
    ///   g_k = ρ_k·g_{k-1} + (Δr_k/2)·(ρ_k·q_{k-1} + q_k),  ρ_k = ξ_{k-1}/ξ_k,
    /// which never forms ξ itself, so weights beyond f64 range stay usable.
    /// The value at the origin is the removable-singularity limit 0.
    pub fn averaged_prefix(&self, q: &[f64]) -> Vec<f64> {
        debug_assert_eq!(q.len(), self.nodes.len());
        let mut out = Vec::with_capacity(q.len());
        out.push(0.0);
        let mut g = 0.0;
        for k in 1..q.len() {
            let rho = if self.log_xi[k - 1] == f64::NEG_INFINITY {
                0.0
            } else {
                (self.log_xi[k - 1] - self.log_xi[k]).exp()
            };
            let h = self.nodes[k] - self.nodes[k - 1];
            g = rho * g + 0.5 * h * (rho * q[k - 1] + q[k]);
            out.push(g);
        }
        out
    }
}

/// Adaptive Simpson quadrature with mixed absolute/relative tolerance.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    let eff_tol = tol.max(tol * whole.abs());
    recurse(f, a, fa, b, fb, whole, m, fm, eff_tol, 48)
}
