//! Coefficient closures: viscosity mixing, dispersion, stabilization, sources.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{QuadMesh, Rect};

/// Below this speed the rank-one dispersion term is dropped.
pub const EPS_U: f64 = 1e-12;

pub type Tensor2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidModel {
    /// Resident fluid viscosity.
    pub mu_o: f64,
    /// Solvent viscosity.
    pub mu_s: f64,
    pub phi: f64,
    pub d_m: f64,
    pub alpha_t: f64,
    pub alpha_l: f64,
}

impl FluidModel {
    pub fn new(mu_o: f64, mu_s: f64, phi: f64, d_m: f64, alpha_t: f64, alpha_l: f64) -> Result<Self> {
        let m = Self {
            mu_o,
            mu_s,
            phi,
            d_m,
            alpha_t,
            alpha_l,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.mu_o > 0.0
            && self.mu_s > 0.0
            && self.d_m >= 0.0
            && self.alpha_t >= 0.0
            && self.alpha_t <= self.alpha_l
            && self.phi > 0.0
            && self.phi <= 1.0;
        if ok && [self.mu_o, self.mu_s, self.phi, self.d_m, self.alpha_t, self.alpha_l]
            .iter()
            .all(|v| v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid fluid model {self:?}")))
        }
    }

    /// Quarter-power mixing law, with `c` clamped to [0, 1].
    pub fn viscosity(&self, c: f64) -> f64 {
        let c = if c.is_nan() { 0.0 } else { c.clamp(0.0, 1.0) };
        let s = c * self.mu_s.powf(-0.25) + (1.0 - c) * self.mu_o.powf(-0.25);
        s.powi(-4)
    }

    /// `(d_m + a_t |u|) I + (a_l - a_t) u u^T / |u|`.
    pub fn dispersion_tensor(&self, u: [f64; 2]) -> Tensor2 {
        let nu = u[0].hypot(u[1]);
        if nu < EPS_U {
            return [[self.d_m, 0.0], [0.0, self.d_m]];
        }
        let a = self.d_m + self.alpha_t * nu;
        let b = (self.alpha_l - self.alpha_t) / nu;
        let off = b * u[0] * u[1];
        [[a + b * u[0] * u[0], off], [off, a + b * u[1] * u[1]]]
    }

    /// Closed-form inverse of [`Self::dispersion_tensor`].
    pub fn dispersion_tensor_inverse(&self, u: [f64; 2]) -> Result<Tensor2> {
        let nu = u[0].hypot(u[1]);
        if nu < EPS_U {
            if self.d_m <= 0.0 {
                return Err(Error::SingularTensor);
            }
            let d = 1.0 / self.d_m;
            return Ok([[d, 0.0], [0.0, d]]);
        }
        let a = self.d_m + self.alpha_t * nu;
        if a <= 0.0 {
            return Err(Error::SingularTensor);
        }
        let b = (self.alpha_l - self.alpha_t) / nu;
        let g = b / (a * (a + b * nu * nu));
        let off = -g * u[0] * u[1];
        Ok([[1.0 / a - g * u[0] * u[0], off], [off, 1.0 / a - g * u[1] * u[1]]])
    }

    /// `|u.n| + max(||D(u)||_inf, 1)`.
    pub fn stabilization_tau(&self, u: [f64; 2], n: [f64; 2]) -> f64 {
        let d = self.dispersion_tensor(u);
        (u[0] * n[0] + u[1] * n[1]).abs() + tau_floor(inf_norm(&d))
    }
}

fn tau_floor(dnorm: f64) -> f64 {
    dnorm.max(1.0)
}

/// Maximum absolute row sum.
pub fn inf_norm(d: &Tensor2) -> f64 {
    (d[0][0].abs() + d[0][1].abs()).max(d[1][0].abs() + d[1][1].abs())
}

/// Elementwise constant permeability.
#[derive(Debug, Clone, PartialEq)]
pub struct PermeabilityField {
    values: Vec<f64>,
}

impl PermeabilityField {
    pub fn constant(mesh: &QuadMesh, k: f64) -> Result<Self> {
        Self::from_values(vec![k; mesh.n_elements()])
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some((e, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::Coefficient {
                element: e,
                detail: format!("permeability {v}"),
            });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, e: usize) -> f64 {
        self.values[e]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellModel {
    pub injection: Rect,
    pub production: Rect,
    /// Total rate Q.
    pub rate: f64,
    /// Injected concentration.
    pub c_bar: f64,
}

/// Per-element source densities.
#[derive(Debug, Clone, PartialEq)]
pub struct WellSources {
    pub q_in: Vec<f64>,
    pub q_out: Vec<f64>,
}

impl WellSources {
    pub fn zero(n_elements: usize) -> Self {
        Self {
            q_in: vec![0.0; n_elements],
            q_out: vec![0.0; n_elements],
        }
    }

    /// Total injection and production rates on the mesh.
    pub fn totals(&self, mesh: &QuadMesh) -> (f64, f64) {
        let mut t = (0.0, 0.0);
        for e in 0..mesh.n_elements() {
            let a = mesh.element_rect(e).area();
            t.0 += self.q_in[e] * a;
            t.1 += self.q_out[e] * a;
        }
        t
    }
}

fn check_region(mesh: &QuadMesh, r: &Rect, what: &'static str) -> Result<()> {
    let d = &mesh.domain;
    let tol = 1e-12 * (d.width() + d.height());
    let inside = r.x0 >= d.x0 - tol && r.x1 <= d.x1 + tol && r.y0 >= d.y0 - tol && r.y1 <= d.y1 + tol;
    if !inside || !(r.area() > 0.0) {
        return Err(Error::MisalignedRegion {
            what,
            region: r.to_string(),
        });
    }
    Ok(())
}

/// Elementwise source densities whose discrete integrals equal the well rate.
///
/// Each element receives `Q * |E cap R| / (|R| |E|)`, so the total is `Q`
/// whether or not the region follows element boundaries.
pub fn well_sources(mesh: &QuadMesh, wells: &WellModel) -> Result<WellSources> {
    check_region(mesh, &wells.injection, "injection")?;
    check_region(mesh, &wells.production, "production")?;
    if !(wells.rate.is_finite() && wells.rate >= 0.0) {
        return Err(Error::invalid(format!("well rate {}", wells.rate)));
    }
    if !(0.0..=1.0).contains(&wells.c_bar) {
        return Err(Error::invalid(format!("injected concentration {}", wells.c_bar)));
    }
    let density = |region: &Rect| -> Vec<f64> {
        (0..mesh.n_elements())
            .map(|e| {
                let r = mesh.element_rect(e);
                match r.intersect(region) {
                    Some(o) => wells.rate * o.area() / (region.area() * r.area()),
                    None => 0.0,
                }
            })
            .collect()
    };
    Ok(WellSources {
        q_in: density(&wells.injection),
        q_out: density(&wells.production),
    })
}

/// Whether a rectangle is a union of whole mesh elements.
pub fn is_aligned(mesh: &QuadMesh, r: &Rect) -> bool {
    let d = &mesh.domain;
    let on_grid = |v: f64, v0: f64, h: f64| {
        let t = (v - v0) / h;
        (t - t.round()).abs() < 1e-9
    };
    on_grid(r.x0, d.x0, mesh.hx)
        && on_grid(r.x1, d.x0, mesh.hx)
        && on_grid(r.y0, d.y0, mesh.hy)
        && on_grid(r.y1, d.y0, mesh.hy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform_quad_mesh;
    use rand::{Rng, SeedableRng};

    fn model() -> FluidModel {
        FluidModel::new(2.0, 1.0, 0.2, 1e-3, 1.8e-6, 1.8e-5).unwrap()
    }

    #[test]
    fn viscosity_law() {
        let m = model();
        assert!((m.viscosity(0.0) - 2.0).abs() < 1e-14);
        assert!((m.viscosity(1.0) - 1.0).abs() < 1e-14);
        let v = m.viscosity(0.5);
        let exact = (0.5 + 0.5 * 2f64.powf(-0.25)).powi(-4);
        assert!((v - exact).abs() < 1e-14);
        assert!((v - 1.3932).abs() < 5e-5);
        // clamped outside [0, 1]
        assert_eq!(m.viscosity(-0.3), m.viscosity(0.0));
        assert_eq!(m.viscosity(1.4), m.viscosity(1.0));
        let mut prev = m.viscosity(0.0);
        for i in 1..=100 {
            let v = m.viscosity(i as f64 / 100.0);
            assert!(v > 0.0 && v <= prev);
            prev = v;
        }
    }

    #[test]
    fn dispersion_examples() {
        let m = model();
        assert_eq!(m.dispersion_tensor([0.0, 0.0]), [[1e-3, 0.0], [0.0, 1e-3]]);
        let m2 = FluidModel::new(2.0, 1.0, 0.2, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(m2.dispersion_tensor([1.0, 0.0]), [[2.0, 0.0], [0.0, 1.0]]);
        assert_eq!(m2.dispersion_tensor_inverse([1.0, 0.0]).unwrap(), [[0.5, 0.0], [0.0, 1.0]]);
        let m3 = FluidModel::new(2.0, 1.0, 0.2, 2.0, 1.0, 2.0).unwrap();
        assert_eq!(m3.dispersion_tensor_inverse([0.0, 0.0]).unwrap(), [[0.5, 0.0], [0.0, 0.5]]);
        assert!(matches!(m2.dispersion_tensor_inverse([0.0, 0.0]), Err(Error::SingularTensor)));
    }

    #[test]
    fn dispersion_eigen_and_inverse_random() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..200 {
            let at: f64 = rng.random_range(0.0..2.0);
            let m = FluidModel::new(2.0, 1.0, 0.3, rng.random_range(0.0..1.0), at, at + rng.random_range(0.0..2.0)).unwrap();
            let u = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let d = m.dispersion_tensor(u);
            assert_eq!(d[0][1], d[1][0]);
            let tr = d[0][0] + d[1][1];
            let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            let (l1, l2) = (tr / 2.0 - disc, tr / 2.0 + disc);
            let nu = u[0].hypot(u[1]);
            let (e1, e2) = (m.d_m + m.alpha_t * nu, m.d_m + m.alpha_l * nu);
            assert!((l1 - e1).abs() < 1e-12 * (1.0 + e2) && (l2 - e2).abs() < 1e-12 * (1.0 + e2));
            if m.d_m > 0.0 {
                assert!(d[0][0] > 0.0 && det > 0.0);
            }
            let inv = m.dispersion_tensor_inverse(u).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let p = inv[i][0] * d[0][j] + inv[i][1] * d[1][j];
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((p - id).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn tau_examples() {
        let m = model();
        assert_eq!(m.stabilization_tau([0.0, 0.0], [1.0, 0.0]), 1.0);
        // u.n = 0.5 with ||D|| = 0.3 clamps to 1
        let m1 = FluidModel::new(2.0, 1.0, 0.2, 0.3, 0.0, 0.0).unwrap();
        assert_eq!(m1.stabilization_tau([0.5, 0.0], [1.0, 0.0]), 1.5);
        let m2 = FluidModel::new(2.0, 1.0, 0.2, 3.0, 0.0, 0.0).unwrap();
        assert_eq!(m2.stabilization_tau([-2.0, 0.0], [1.0, 0.0]), 5.0);
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..100 {
            let u = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let t = m.stabilization_tau(u, [0.0, -1.0]);
            assert!(t >= 1.0 && t >= u[1].abs());
        }
    }

    #[test]
    fn invalid_model() {
        assert!(FluidModel::new(0.0, 1.0, 0.2, 0.0, 0.0, 0.0).is_err());
        assert!(FluidModel::new(1.0, 1.0, 1.2, 0.0, 0.0, 0.0).is_err());
        assert!(FluidModel::new(1.0, 1.0, 0.2, 0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn sources_constant_on_aligned_region() {
        let mesh = build_uniform_quad_mesh(10, 10, Rect::square(0.0, 1000.0)).unwrap();
        let w = WellModel {
            injection: Rect::square(0.0, 100.0),
            production: Rect::square(900.0, 1000.0),
            rate: 0.28,
            c_bar: 1.0,
        };
        let s = well_sources(&mesh, &w).unwrap();
        assert!((s.q_in[0] - 2.8e-5).abs() < 1e-20);
        assert!((s.q_out[99] - 2.8e-5).abs() < 1e-20);
        assert_eq!(s.q_in.iter().filter(|&&q| q > 0.0).count(), 1);
        let (a, b) = s.totals(&mesh);
        assert!((a - b).abs() < 1e-16);
    }

    #[test]
    fn sources_integrate_exactly_on_unaligned_meshes() {
        for n in [16, 32, 64] {
            let mesh = build_uniform_quad_mesh(n, n, Rect::square(0.0, 1000.0)).unwrap();
            let w = WellModel {
                injection: Rect::square(0.0, 100.0),
                production: Rect::square(900.0, 1000.0),
                rate: 0.28,
                c_bar: 1.0,
            };
            let s = well_sources(&mesh, &w).unwrap();
            let (a, b) = s.totals(&mesh);
            assert!((a - 0.28).abs() < 1e-15 && (b - 0.28).abs() < 1e-15);
        }
    }

    #[test]
    fn sources_reject_bad_regions() {
        let mesh = build_uniform_quad_mesh(16, 16, Rect::square(0.0, 1000.0)).unwrap();
        let mut w = WellModel {
            injection: Rect::square(-50.0, 100.0),
            production: Rect::square(900.0, 1000.0),
            rate: 0.28,
            c_bar: 1.0,
        };
        assert!(matches!(well_sources(&mesh, &w), Err(Error::MisalignedRegion { .. })));
        w.injection = Rect::new(10.0, 10.0, 0.0, 100.0);
        assert!(well_sources(&mesh, &w).is_err());
    }

    #[test]
    fn alignment_check() {
        let mesh = build_uniform_quad_mesh(16, 16, Rect::square(0.0, 1000.0)).unwrap();
        assert!(is_aligned(&mesh, &Rect::square(250.0, 500.0)));
        assert!(!is_aligned(&mesh, &Rect::square(0.0, 90.0)));
        assert!(!is_aligned(&mesh, &Rect::square(0.0, 100.0)));
    }

    #[test]
    fn permeability_positive() {
        assert!(PermeabilityField::from_values(vec![1.0, 0.0]).is_err());
        assert!(PermeabilityField::from_values(vec![1.0, f64::NAN]).is_err());
        assert_eq!(PermeabilityField::from_values(vec![2.0]).unwrap().get(0), 2.0);
    }
}
