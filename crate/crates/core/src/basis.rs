//! Gauss-Lobatto-Legendre nodal basis and Gauss-Legendre quadrature on [-1, 1].
//!
//! Nodal data are evaluated with the second (true) barycentric formula, so no
//! Vandermonde matrix is ever formed. Two-dimensional fields on the reference
//! square use the tensor ordering `a = j * (k + 1) + i`, with `i` running
//! along the first coordinate.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITERS: usize = 100;
/// Distance below which a point is treated as coinciding with a node.
const NODE_HIT_TOL: f64 = 1e-14;

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for m in 2..=n {
        let m = m as f64;
        let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // P_n'(±1) = (±1)^(n-1) n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// The `k + 1` GLL nodes on [-1, 1] and their barycentric weights.
pub fn gll_nodes(k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if k == 0 {
        return Err(Error::UnsupportedDegree(k));
    }
    let mut x = vec![0.0; k + 1];
    x[0] = -1.0;
    x[k] = 1.0;
    let kf = k as f64;
    // Interior nodes are the roots of P_k'. Newton on (1 - x^2) P_k', whose
    // derivative is -k(k+1) P_k by the Legendre equation.
    for j in 1..=(k / 2) {
        let mut xj = -(PI * j as f64 / kf).cos();
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, dp) = legendre(k, xj);
            let dx = (1.0 - xj * xj) * dp / (kf * (kf + 1.0) * p);
            xj += dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        x[j] = xj;
        x[k - j] = -xj;
    }
    if k % 2 == 0 {
        x[k / 2] = 0.0;
    }
    let w = barycentric_weights(&x);
    Ok((x, w))
}

/// Weights `w_i = 1 / prod_{j != i} (x_i - x_j)`.
pub fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let prod: f64 = (0..x.len())
                .filter(|&j| j != i)
                .map(|j| x[i] - x[j])
                .product();
            1.0 / prod
        })
        .collect()
}

/// Gauss-Legendre points and weights on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integral of `f` over [-1, 1].
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `n`-point Gauss-Legendre rule, exact for polynomials of degree `2n - 1`.
pub fn gl_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::invalid("quadrature needs at least one point"));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // ascending order, so the guess is the negated Chebyshev-like estimate
        let mut x = -(PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = x;
        points[n - 1 - i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok(QuadratureRule { points, weights })
}

/// Degree-`k` Lagrange basis on the GLL nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalBasis {
    pub k: usize,
    pub nodes: Vec<f64>,
    pub bary_weights: Vec<f64>,
    /// `diff[j * (k + 1) + i] = l_i'(x_j)`.
    diff: Vec<f64>,
}

impl NodalBasis {
    pub fn new(k: usize) -> Result<Self> {
        let (nodes, bary_weights) = gll_nodes(k)?;
        let n = k + 1;
        let mut diff = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = 0.0;
            for i in 0..n {
                if i != j {
                    let d = (bary_weights[i] / bary_weights[j]) / (nodes[j] - nodes[i]);
                    diff[j * n + i] = d;
                    diag -= d;
                }
            }
            diff[j * n + j] = diag;
        }
        Ok(Self {
            k,
            nodes,
            bary_weights,
            diff,
        })
    }

    /// Number of nodes per direction.
    pub fn n(&self) -> usize {
        self.k + 1
    }

    /// All basis values `l_i(x)`.
    pub fn values(&self, x: f64) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        if let Some(i) = self.node_hit(x) {
            out[i] = 1.0;
            return out;
        }
        let mut sum = 0.0;
        for i in 0..n {
            let t = self.bary_weights[i] / (x - self.nodes[i]);
            out[i] = t;
            sum += t;
        }
        for v in &mut out {
            *v /= sum;
        }
        out
    }

    /// All basis derivatives `l_i'(x)`.
    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        let n = self.n();
        let l = self.values(x);
        // l_i' has degree k - 1, so its nodal interpolant is exact.
        (0..n)
            .map(|i| (0..n).map(|j| l[j] * self.diff[j * n + i]).sum())
            .collect()
    }

    fn node_hit(&self, x: f64) -> Option<usize> {
        self.nodes.iter().position(|&xi| (x - xi).abs() < NODE_HIT_TOL)
    }

    /// Interpolant of `values` at `x`.
    pub fn bary_eval(&self, values: &[f64], x: f64) -> f64 {
        assert_eq!(values.len(), self.n(), "nodal data length");
        if let Some(i) = self.node_hit(x) {
            return values[i];
        }
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..self.n() {
            let t = self.bary_weights[i] / (x - self.nodes[i]);
            num += t * values[i];
            den += t;
        }
        num / den
    }

    /// Tensor-product interpolant of a `(k+1)^2` grid at `(xi, eta)`.
    pub fn tensor_eval(&self, coeffs: &[f64], xi: f64, eta: f64) -> f64 {
        let n = self.n();
        assert_eq!(coeffs.len(), n * n, "tensor grid size");
        let lx = self.values(xi);
        let ly = self.values(eta);
        let mut s = 0.0;
        for j in 0..n {
            let row: f64 = (0..n).map(|i| lx[i] * coeffs[j * n + i]).sum();
            s += ly[j] * row;
        }
        s
    }

    /// Reference gradient `(d/dxi, d/deta)` of the tensor interpolant.
    pub fn tensor_grad(&self, coeffs: &[f64], xi: f64, eta: f64) -> [f64; 2] {
        let n = self.n();
        assert_eq!(coeffs.len(), n * n, "tensor grid size");
        let (lx, dx) = (self.values(xi), self.derivatives(xi));
        let (ly, dy) = (self.values(eta), self.derivatives(eta));
        let mut g = [0.0; 2];
        for j in 0..n {
            for i in 0..n {
                let c = coeffs[j * n + i];
                g[0] += dx[i] * ly[j] * c;
                g[1] += lx[i] * dy[j] * c;
            }
        }
        g
    }
}
