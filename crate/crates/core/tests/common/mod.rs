//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here deliberately re-derives results through a different
//! route than the library: direct O(n²) nested loops instead of prefix
//! sums, linear-scan table inversion, power series, and a Runge-Kutta
//! integrator for the classical second-order form.

// each test target compiles its own copy, so not every item is used everywhere
#![allow(dead_code)]

use phirad::expr::Expr;
use phirad::models::{PhiFamily, PhiModel};
use phirad::problem::{Equation, Nonlinearity, Numerics, ProblemSpec};
use phirad::quadrature::RadialGrid;

/// Small deterministic generator (splitmix-style) for seeded corpora.
pub struct Rng(pub u64);

impl Rng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Log-uniform in [lo, hi].
    pub fn log_range(&mut self, lo: f64, hi: f64) -> f64 {
        (self.range(lo.ln(), hi.ln())).exp()
    }

    pub fn pick(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// sinh(r)/r by power series, independent of libm.
pub fn sinh_over_r(r: f64) -> f64 {
    let x2 = r * r;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= x2 / ((2.0 * k) * (2.0 * k + 1.0));
        sum += term;
        if term < 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

pub fn power_model(p: f64) -> PhiModel {
    PhiModel::new(PhiFamily::PowerLaw { p }).unwrap()
}

pub fn equation(model: PhiModel, sigma: &str, p: &str, f: Nonlinearity, a: f64) -> Equation {
    Equation {
        model,
        sigma: Expr::parse(sigma, &["r"]).unwrap(),
        p: Expr::parse(p, &["r"]).unwrap(),
        f,
        a,
        m: 1f64.max(1.0 / a),
    }
}

/// The closed-form benchmark: Laplacian cross-coupled linear system with
/// u = v = sinh(r)/r.
pub fn sinh_problem(radius: f64, grid_points: usize) -> ProblemSpec {
    ProblemSpec::new(
        3,
        [
            equation(
                power_model(2.0),
                "0",
                "1",
                Nonlinearity::power(0.0, 1.0).unwrap(),
                1.0,
            ),
            equation(
                power_model(2.0),
                "0",
                "1",
                Nonlinearity::power(1.0, 0.0).unwrap(),
                1.0,
            ),
        ],
        Numerics {
            radius,
            grid_points,
            ..Numerics::default()
        },
        Default::default(),
    )
    .unwrap()
}

/// A diverse, pre-validated model pool so randomized suites do not pay the
/// growth-estimation cost per case.
pub fn model_pool() -> Vec<PhiModel> {
    vec![
        PhiModel::new(PhiFamily::PowerLaw { p: 2.0 }).unwrap(),
        PhiModel::new(PhiFamily::PowerLaw { p: 3.0 }).unwrap(),
        PhiModel::new(PhiFamily::PowerLaw { p: 1.6 }).unwrap(),
        PhiModel::new(PhiFamily::Elasticity { p: 1.0 }).unwrap(),
        PhiModel::new(PhiFamily::Elasticity { p: 1.8 }).unwrap(),
        PhiModel::new(PhiFamily::Plasticity { p: 2.0, q: 1.0 }).unwrap(),
        PhiModel::new(PhiFamily::Plasticity { p: 1.5, q: 0.8 }).unwrap(),
        PhiModel::new(PhiFamily::GeneralizedNewtonian { p: 0.5, q: 1.0 }).unwrap(),
        PhiModel::new(PhiFamily::GeneralizedNewtonian { p: 0.2, q: 1.5 }).unwrap(),
        PhiModel::new(PhiFamily::PlasmaPhysics { p: 2.0, q: 3.0 }).unwrap(),
        PhiModel::new(PhiFamily::PlasmaPhysics { p: 1.4, q: 2.2 }).unwrap(),
    ]
}

/// Draw a subcritical random problem: mild power-product nonlinearities,
/// bounded constant coefficients, and a short domain, so the iteration
/// stays far from blow-up while exercising every family.
pub fn random_problem(rng: &mut Rng, pool: &[PhiModel]) -> ProblemSpec {
    let draw_eq = |rng: &mut Rng, other_exponent_cap: f64| {
        let model = pool[rng.pick(pool.len())].clone();
        let beta = rng.range(0.0, other_exponent_cap);
        let alpha = rng.range(0.0, other_exponent_cap);
        let (beta, alpha) = if beta == 0.0 && alpha == 0.0 {
            (0.5, 0.0)
        } else {
            (beta, alpha)
        };
        let p_const = rng.range(0.05, 0.5);
        let a = rng.range(0.5, 2.0);
        Equation {
            model,
            sigma: Expr::constant(rng.range(0.0, 0.3), &["r"]),
            p: Expr::constant(p_const, &["r"]),
            f: Nonlinearity::power(beta, alpha).unwrap(),
            a,
            m: 1f64.max(1.0 / a),
        }
    };
    let dims = [3usize, 4, 5];
    ProblemSpec::new(
        dims[rng.pick(3)],
        [draw_eq(rng, 0.8), draw_eq(rng, 0.8)],
        Numerics {
            radius: 2.0,
            grid_points: 320,
            tolerance: 1e-9,
            ..Numerics::default()
        },
        Default::default(),
    )
    .unwrap()
}

// ---------------------------------------------------------------------
// Brute-force nested-loop oracles (O(n²)): same trapezoid rule, entirely
// different assembly — no prefix reuse, no ratio recurrences.
// ---------------------------------------------------------------------

pub fn oracle_xi(spec: &ProblemSpec, i: usize, grid: &RadialGrid) -> Vec<f64> {
    let nodes = grid.nodes();
    let sigma: Vec<f64> = nodes
        .iter()
        .map(|&r| spec.eqs[i].sigma.eval(&[r]).unwrap())
        .collect();
    let dim = (spec.dimension - 1) as f64;
    (0..nodes.len())
        .map(|j| {
            if nodes[j] == 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for k in 1..=j {
                s += 0.5 * (nodes[k] - nodes[k - 1]) * (sigma[k] + sigma[k - 1]);
            }
            nodes[j].powf(dim) * s.exp()
        })
        .collect()
}

fn oracle_outer(nodes: &[f64], derivative: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let mut acc = 0.0;
            for k in 1..=j {
                acc += 0.5 * (nodes[k] - nodes[k - 1]) * (derivative[k] + derivative[k - 1]);
            }
            acc
        })
        .collect()
}

fn oracle_gauge_sweep(
    spec: &ProblemSpec,
    i: usize,
    grid: &RadialGrid,
    source: &[f64],
) -> Vec<f64> {
    let nodes = grid.nodes();
    let xi = oracle_xi(spec, i, grid);
    let derivative: Vec<f64> = (0..nodes.len())
        .map(|j| {
            if j == 0 {
                return 0.0;
            }
            let mut inner = 0.0;
            for k in 1..=j {
                inner += 0.5
                    * (nodes[k] - nodes[k - 1])
                    * (xi[k] * source[k] + xi[k - 1] * source[k - 1]);
            }
            spec.eqs[i].model.psi_inverse(inner / xi[j]).unwrap()
        })
        .collect();
    oracle_outer(nodes, &derivative)
}

pub fn oracle_p(spec: &ProblemSpec, i: usize, grid: &RadialGrid) -> Vec<f64> {
    let source: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| spec.eqs[i].p.eval(&[r]).unwrap())
        .collect();
    oracle_gauge_sweep(spec, i, grid, &source)
}

/// Independently built monotone table with linear-scan inversion.
pub struct OracleTable {
    pub args: Vec<f64>,
    pub values: Vec<f64>,
}

impl OracleTable {
    fn build(left: f64, cap: f64, points: usize, integrand: impl Fn(f64) -> f64) -> Self {
        let ratio = (cap / left).ln();
        let args: Vec<f64> = (0..points)
            .map(|k| left * (ratio * k as f64 / (points - 1) as f64).exp())
            .collect();
        let samples: Vec<f64> = args.iter().map(|&x| integrand(x)).collect();
        let mut values = vec![0.0];
        for k in 1..args.len() {
            let prev = values[k - 1];
            values.push(prev + 0.5 * (args[k] - args[k - 1]) * (samples[k] + samples[k - 1]));
        }
        OracleTable { args, values }
    }

    pub fn invert(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return self.args[0];
        }
        for k in 1..self.values.len() {
            if self.values[k] >= y {
                let (y0, y1) = (self.values[k - 1], self.values[k]);
                let (x0, x1) = (self.args[k - 1], self.args[k]);
                if y1 == y0 {
                    return x0;
                }
                return x0 + (x1 - x0) * (y - y0) / (y1 - y0);
            }
        }
        *self.args.last().unwrap()
    }

    pub fn value_at(&self, x: f64) -> f64 {
        if x <= self.args[0] {
            return 0.0;
        }
        for k in 1..self.args.len() {
            if self.args[k] >= x {
                let (x0, x1) = (self.args[k - 1], self.args[k]);
                let (y0, y1) = (self.values[k - 1], self.values[k]);
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        *self.values.last().unwrap()
    }
}

pub fn oracle_z(spec: &ProblemSpec, points: usize) -> OracleTable {
    let left = spec.eqs[0].a + spec.eqs[1].a;
    OracleTable::build(left, spec.numerics.arg_cap, points, |t| {
        let mut denom = 0.0;
        for eq in &spec.eqs {
            let fv = eq.f.eval(t, t).unwrap();
            denom += eq.model.theta_upper(fv).unwrap_or(f64::INFINITY);
        }
        if denom.is_infinite() {
            0.0
        } else {
            1.0 / denom
        }
    })
}

pub fn oracle_h(spec: &ProblemSpec, i: usize, points: usize) -> OracleTable {
    let eq = &spec.eqs[i];
    OracleTable::build(eq.a, spec.numerics.arg_cap, points, |t| {
        let hv = spec.h_at(i, t, eq.m * t).unwrap();
        let denom = eq.model.theta_upper(hv).unwrap_or(f64::INFINITY);
        if denom.is_infinite() {
            0.0
        } else {
            1.0 / denom
        }
    })
}

pub fn oracle_pbar(
    spec: &ProblemSpec,
    i: usize,
    grid: &RadialGrid,
    p1: &[f64],
    p2: &[f64],
    z: &OracleTable,
) -> Vec<f64> {
    let source: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let w = z.invert(p1[k] + p2[k]);
            spec.eqs[i].p.eval(&[r]).unwrap() * spec.fbar_at(i, 1.0 + w).unwrap()
        })
        .collect();
    oracle_gauge_sweep(spec, i, grid, &source)
}

pub fn oracle_punder(
    spec: &ProblemSpec,
    i: usize,
    grid: &RadialGrid,
    p_other: &[f64],
) -> Vec<f64> {
    let a1 = spec.eqs[0].a;
    let a2 = spec.eqs[1].a;
    let f1c = spec.eqs[0].f.eval(a1, a2).unwrap();
    let f2c = spec.eqs[1].f.eval(a1, a2).unwrap();
    let source: Vec<f64> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let pv = spec.eqs[i].p.eval(&[r]).unwrap();
            let fv = if i == 0 {
                let c = spec.eqs[1].model.theta_lower(f2c).unwrap();
                spec.eqs[0].f.eval(a1, a2 + c * p_other[k]).unwrap()
            } else {
                // notation-form variant, matching the library default
                let c = spec.eqs[0].model.theta_lower(f1c).unwrap();
                spec.eqs[1].f.eval(a1 + c * p_other[k], a2).unwrap()
            };
            pv * fv
        })
        .collect();
    oracle_gauge_sweep(spec, i, grid, &source)
}

/// Classical-Laplacian reference: integrate u'' + ((N-1)/r)u' = p(r)f(u,v)
/// as a first-order system in (u, r^{N-1}u') with RK4 from a series start.
pub fn rk4_reference(
    spec: &ProblemSpec,
    r_max: f64,
    steps: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let dim = (spec.dimension - 1) as f64;
    let p1 = |r: f64| spec.eqs[0].p.eval(&[r]).unwrap();
    let p2 = |r: f64| spec.eqs[1].p.eval(&[r]).unwrap();
    let f1 = |u: f64, v: f64| spec.eqs[0].f.eval(u, v).unwrap();
    let f2 = |u: f64, v: f64| spec.eqs[1].f.eval(u, v).unwrap();
    let a1 = spec.eqs[0].a;
    let a2 = spec.eqs[1].a;

    // y = [u, su, v, sv] with su = r^{N-1} u'
    let deriv = |r: f64, y: [f64; 4]| -> [f64; 4] {
        let w = r.powf(dim);
        [
            if w == 0.0 { 0.0 } else { y[1] / w },
            w * p1(r) * f1(y[0], y[2]),
            if w == 0.0 { 0.0 } else { y[3] / w },
            w * p2(r) * f2(y[0], y[2]),
        ]
    };

    // series start removes the coordinate singularity at the origin
    let r0 = r_max / steps as f64 * 1e-3;
    let n_f = spec.dimension as f64;
    let mut y = [
        a1 + p1(0.0) * f1(a1, a2) * r0 * r0 / (2.0 * n_f),
        r0.powf(dim) * p1(0.0) * f1(a1, a2) * r0 / n_f,
        a2 + p2(0.0) * f2(a1, a2) * r0 * r0 / (2.0 * n_f),
        r0.powf(dim) * p2(0.0) * f2(a1, a2) * r0 / n_f,
    ];
    let h = (r_max - r0) / steps as f64;
    let mut radii = vec![r0];
    let mut us = vec![y[0]];
    let mut vs = vec![y[2]];
    let mut r = r0;
    for _ in 0..steps {
        let k1 = deriv(r, y);
        let add = |y: [f64; 4], k: [f64; 4], c: f64| {
            [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2], y[3] + c * k[3]]
        };
        let k2 = deriv(r + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = deriv(r + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = deriv(r + h, add(y, k3, h));
        for j in 0..4 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        r += h;
        radii.push(r);
        us.push(y[0]);
        vs.push(y[2]);
    }
    (radii, us, vs)
}
