use std::f64::consts::PI;

use crate::geometry::Point3;

/// Smooth solution of the Maxwell system with zero auxiliary scalar:
///
/// ```text
/// E = (1/pi) e^-t (-cos(pi x) sin(pi y) sin(pi z), sin(pi x) cos(pi y) sin(pi z), 0)
/// B = e^-t (-sin(pi x) cos(pi y) cos(pi z), -cos(pi x) sin(pi y) cos(pi z), 2 cos(pi x) cos(pi y) sin(pi z))
/// p = 0,  j = (1 + 3 pi^2) E
/// ```
///
/// `B = curl E` and `div E = 0`, so `E` doubles as a vector potential for `B`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ManufacturedSolution;

impl ManufacturedSolution {
    pub fn e(&self, x: Point3, t: f64) -> Point3 {
        let (sx, cx) = (PI * x.x).sin_cos();
        let (sy, cy) = (PI * x.y).sin_cos();
        let sz = (PI * x.z).sin();
        Point3::new(-cx * sy * sz, sx * cy * sz, 0.0) * ((-t).exp() / PI)
    }

    pub fn b(&self, x: Point3, t: f64) -> Point3 {
        let (sx, cx) = (PI * x.x).sin_cos();
        let (sy, cy) = (PI * x.y).sin_cos();
        let (sz, cz) = (PI * x.z).sin_cos();
        Point3::new(-sx * cy * cz, -cx * sy * cz, 2.0 * cx * cy * sz) * (-t).exp()
    }

    pub fn p(&self, _x: Point3, _t: f64) -> f64 {
        0.0
    }

    pub fn j(&self, x: Point3, t: f64) -> Point3 {
        self.e(x, t) * (1.0 + 3.0 * PI * PI)
    }

    /// Vector potential with `curl A = B`.
    pub fn potential(&self, x: Point3, t: f64) -> Point3 {
        self.e(x, t)
    }

    /// Largest residual of `dB/dt + curl E = 0`, `dE/dt - curl B + grad p = -j`,
    /// `dp/dt - div E = 0`, `div B = 0` and `div j = 0` at `(x, t)`, by centred differences.
    pub fn pde_residual(&self, x: Point3, t: f64, h: f64) -> f64 {
        let unit = [Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0), Point3::new(0.0, 0.0, 1.0)];
        // d[i] = partial derivative along axis i of a vector field.
        let jac = |f: &dyn Fn(Point3) -> Point3| -> [Point3; 3] {
            unit.map(|u| (f(x + u * h) - f(x - u * h)) / (2.0 * h))
        };
        let curl = |d: &[Point3; 3]| Point3::new(d[1].z - d[2].y, d[2].x - d[0].z, d[0].y - d[1].x);
        let div = |d: &[Point3; 3]| d[0].x + d[1].y + d[2].z;
        let de = jac(&|y| self.e(y, t));
        let db = jac(&|y| self.b(y, t));
        let dj = jac(&|y| self.j(y, t));
        let dt = |f: &dyn Fn(f64) -> Point3| (f(t + h) - f(t - h)) / (2.0 * h);
        let b_t = dt(&|s| self.b(x, s));
        let e_t = dt(&|s| self.e(x, s));
        let grad_p = Point3::new(
            (self.p(x + unit[0] * h, t) - self.p(x - unit[0] * h, t)) / (2.0 * h),
            (self.p(x + unit[1] * h, t) - self.p(x - unit[1] * h, t)) / (2.0 * h),
            (self.p(x + unit[2] * h, t) - self.p(x - unit[2] * h, t)) / (2.0 * h),
        );
        let p_t = (self.p(x, t + h) - self.p(x, t - h)) / (2.0 * h);
        let faraday = (b_t + curl(&de)).norm();
        let ampere = (e_t - curl(&db) + grad_p + self.j(x, t)).norm();
        let gauss = (p_t - div(&de)).abs();
        [faraday, ampere, gauss, div(&db).abs(), div(&dj).abs()].into_iter().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_vanish_at_cube_centre() {
        let s = ManufacturedSolution;
        let c = Point3::new(0.5, 0.5, 0.5);
        assert!(s.e(c, 0.0).norm() < 1e-16);
        assert!(s.b(c, 0.0).norm() < 1e-16);
        assert_eq!(s.p(c, 0.3), 0.0);
    }

    #[test]
    fn quarter_point_values() {
        // At (1/4, 1/4, 1/4) every sine and cosine equals 1/sqrt(2).
        let s = ManufacturedSolution;
        let q = Point3::new(0.25, 0.25, 0.25);
        let r = 0.5f64.sqrt().powi(3);
        let e = s.e(q, 0.0);
        let b = s.b(q, 0.0);
        for (got, want) in [(e.x, -r / PI), (e.y, r / PI), (e.z, 0.0), (b.x, -r), (b.y, -r), (b.z, 2.0 * r)] {
            assert!((got - want).abs() < 1e-15, "{got} {want}");
        }
    }

    #[test]
    fn satisfies_the_pde_pointwise() {
        let s = ManufacturedSolution;
        for (i, t) in [0.0, 0.3, 1.0].into_iter().enumerate() {
            let x = Point3::new(0.13 + 0.2 * i as f64, 0.71 - 0.1 * i as f64, 0.37 + 0.05 * i as f64);
            assert!(s.pde_residual(x, t, 1e-4) < 1e-6);
        }
    }
}
