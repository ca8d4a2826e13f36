//! Manufactured solution on the unit square.
//!
//! `p = 1 + x y tanh(1-x) tanh(1-y) e^-t`, `c = cos t sin(pi x) sin(pi y) / (2 pi)^2`,
//! with `u = -K/mu(c) grad p` and `q = -D(u) grad c`. The forcings are
//! `f_p = div u` and `f_c = phi c_t + div(u c + q)`, evaluated by the chain rule.

use std::f64::consts::PI;

use crate::physics::FluidModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsProblem {
    pub fluid: FluidModel,
    pub k: f64,
}

impl Default for MmsProblem {
    fn default() -> Self {
        Self {
            fluid: FluidModel {
                mu_o: 2.0,
                mu_s: 1.0,
                phi: 0.2,
                d_m: 1.0,
                alpha_t: 1.8e-6,
                alpha_l: 1.8e-5,
            },
            k: 9.44e-3,
        }
    }
}

/// Value, gradient and Hessian `[xx, xy, yy]` of a scalar field.
#[derive(Debug, Clone, Copy)]
struct Jet {
    v: f64,
    g: [f64; 2],
    h: [f64; 3],
}

const C_SCALE: f64 = 1.0 / (4.0 * PI * PI);

fn tanh_jet(s: f64) -> (f64, f64, f64) {
    // f(x) = tanh(1 - x), f' = -(1 - f^2), f'' = -2 f (1 - f^2)
    let f = (1.0 - s).tanh();
    let sech2 = 1.0 - f * f;
    (f, -sech2, -2.0 * f * sech2)
}

impl MmsProblem {
    fn p_jet(&self, x: f64, y: f64, t: f64) -> Jet {
        let (a, da, dda) = tanh_jet(x);
        let (b, db, ddb) = tanh_jet(y);
        let e = (-t).exp();
        // X(x) = x a(x), Y(y) = y b(y)
        let (xx, dx, ddx) = (x * a, a + x * da, 2.0 * da + x * dda);
        let (yy, dy, ddy) = (y * b, b + y * db, 2.0 * db + y * ddb);
        Jet {
            v: 1.0 + xx * yy * e,
            g: [dx * yy * e, xx * dy * e],
            h: [ddx * yy * e, dx * dy * e, xx * ddy * e],
        }
    }

    fn c_jet(&self, x: f64, y: f64, t: f64) -> Jet {
        let ct = t.cos() * C_SCALE;
        let (sx, cx) = (PI * x).sin_cos();
        let (sy, cy) = (PI * y).sin_cos();
        Jet {
            v: ct * sx * sy,
            g: [ct * PI * cx * sy, ct * PI * sx * cy],
            h: [-ct * PI * PI * sx * sy, ct * PI * PI * cx * cy, -ct * PI * PI * sx * sy],
        }
    }

    pub fn pressure(&self, x: f64, y: f64, t: f64) -> f64 {
        self.p_jet(x, y, t).v
    }

    pub fn concentration(&self, x: f64, y: f64, t: f64) -> f64 {
        self.c_jet(x, y, t).v
    }

    fn concentration_dt(&self, x: f64, y: f64, t: f64) -> f64 {
        -t.sin() * C_SCALE * (PI * x).sin() * (PI * y).sin()
    }

    /// `mu(c)` and `dmu/dc` without clamping (the exact `c` stays in [0, 1]).
    fn mu_and_derivative(&self, c: f64) -> (f64, f64) {
        let a = self.fluid.mu_s.powf(-0.25);
        let b = self.fluid.mu_o.powf(-0.25);
        let s = c * a + (1.0 - c) * b;
        (s.powi(-4), -4.0 * s.powi(-5) * (a - b))
    }

    /// `u` and its Jacobian `du_i/dx_j`.
    fn velocity_jet(&self, x: f64, y: f64, t: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let p = self.p_jet(x, y, t);
        let c = self.c_jet(x, y, t);
        let (mu, dmu) = self.mu_and_derivative(c.v);
        let hp = [[p.h[0], p.h[1]], [p.h[1], p.h[2]]];
        let mut u = [0.0; 2];
        let mut du = [[0.0; 2]; 2];
        for i in 0..2 {
            u[i] = -self.k / mu * p.g[i];
            for j in 0..2 {
                du[i][j] = -self.k * (hp[i][j] / mu - dmu / (mu * mu) * c.g[j] * p.g[i]);
            }
        }
        (u, du)
    }

    pub fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.velocity_jet(x, y, t).0
    }

    pub fn diffusive_flux(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let u = self.velocity(x, y, t);
        let g = self.c_jet(x, y, t).g;
        let d = self.fluid.dispersion_tensor(u);
        [
            -(d[0][0] * g[0] + d[0][1] * g[1]),
            -(d[1][0] * g[0] + d[1][1] * g[1]),
        ]
    }

    /// Flow forcing `div u`.
    pub fn flow_forcing(&self, x: f64, y: f64, t: f64) -> f64 {
        let (_, du) = self.velocity_jet(x, y, t);
        du[0][0] + du[1][1]
    }

    /// Transport forcing `phi c_t + div(u c) + div q`.
    pub fn transport_forcing(&self, x: f64, y: f64, t: f64) -> f64 {
        let (u, du) = self.velocity_jet(x, y, t);
        let c = self.c_jet(x, y, t);
        let f = &self.fluid;
        let div_u = du[0][0] + du[1][1];
        let conv = c.v * div_u + u[0] * c.g[0] + u[1] * c.g[1];
        let hc = [[c.h[0], c.h[1]], [c.h[1], c.h[2]]];
        let nu = u[0].hypot(u[1]);
        let d = f.dispersion_tensor(u);
        // div q = -sum_ij (d_i D_ij c_j + D_ij c_ij)
        let mut div_q = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                div_q -= d[i][j] * hc[i][j];
            }
        }
        if nu >= crate::physics::EPS_U {
            let dnu = |k: usize| (u[0] * du[0][k] + u[1] * du[1][k]) / nu;
            let b = f.alpha_l - f.alpha_t;
            for i in 0..2 {
                for j in 0..2 {
                    let di = dnu(i);
                    let mut dd = b * ((du[i][i] * u[j] + u[i] * du[j][i]) / nu - u[i] * u[j] * di / (nu * nu));
                    if i == j {
                        dd += f.alpha_t * di;
                    }
                    div_q -= dd * c.g[j];
                }
            }
        }
        f.phi * self.concentration_dt(x, y, t) + conv + div_q
    }
}
