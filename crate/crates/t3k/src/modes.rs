//! Geometry, trapping wells, box eigenmodes and the atom-cavity overlaps.
//!
//! The a atoms live in two wells of width `ell` separated by a central
//! barrier of thickness `d`; the b atoms see the full box of width
//! `2*ell + d`. All mode functions are infinite-well eigenfunctions,
//! phased positive at the left edge of their support so that every
//! coupling overlap comes out real.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Double-well geometry. The box spans `[-ell - d/2, ell + d/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    ell: f64,
    d: f64,
}

impl Geometry {
    pub fn new(ell: f64, d: f64) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::InvalidParameter { name: "ell", reason: format!("must be > 0, got {ell}") });
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidParameter { name: "d", reason: format!("must be > 0, got {d}") });
        }
        Ok(Geometry { ell, d })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Width of the b-atom box, `2*ell + d`.
    pub fn box_width(&self) -> f64 {
        2.0 * self.ell + self.d
    }

    /// Position of the outer walls: the box is `[-half, half]`.
    pub fn half_width(&self) -> f64 {
        self.ell + 0.5 * self.d
    }
}

/// Cavity mode profile C(x) entering the coupling integrals.
#[derive(Debug, Clone, PartialEq)]
pub enum CavityProfile {
    Constant(f64),
    /// Piecewise-linear samples; the grid must cover the b box.
    Sampled { x: Vec<f64>, values: Vec<f64> },
}

impl CavityProfile {
    fn interpolate(&self, x: f64) -> f64 {
        match self {
            CavityProfile::Constant(c) => *c,
            CavityProfile::Sampled { x: xs, values } => {
                let i = xs.partition_point(|&p| p < x).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
                values[i - 1] * (1.0 - t) + values[i] * t
            }
        }
    }
}

/// Model parameters in natural units (hbar = 1 unless set otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub geometry: Geometry,
    /// Atom mass m.
    pub mass: f64,
    /// Internal energy of species a, as an angular frequency.
    pub omega_internal_a: f64,
    /// Internal energy of species b, as an angular frequency.
    pub omega_internal_b: f64,
    /// Cavity mode frequency.
    pub omega_cavity: f64,
    /// Bare coupling parameter g (multiplies the overlap integral).
    pub g0: f64,
    pub cavity_profile: CavityProfile,
    pub hbar: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidParameter { name: "mass", reason: format!("must be > 0, got {}", self.mass) });
        }
        if !(self.g0 >= 0.0) {
            return Err(Error::InvalidParameter { name: "g0", reason: format!("must be >= 0, got {}", self.g0) });
        }
        if !(self.hbar > 0.0) {
            return Err(Error::InvalidParameter { name: "hbar", reason: format!("must be > 0, got {}", self.hbar) });
        }
        Ok(())
    }

    /// Frequency of the lowest a well mode, `omega_a = Omega_a + hbar pi^2 / (2 m l^2)`.
    pub fn omega_a1(&self) -> f64 {
        let l = self.geometry.ell();
        self.omega_internal_a + self.hbar * PI * PI / (2.0 * self.mass * l * l)
    }

    /// Closed-form detuning `Delta = Omega_b + omega_c - omega_a1`.
    pub fn detuning(&self) -> f64 {
        self.omega_internal_b + self.omega_cavity - self.omega_a1()
    }

    /// Intermediate-state denominator `delta_j = omega_b(j) + omega_c - omega_a1`,
    /// equal to `Delta + hbar pi^2 j^2 / (2 m (2l+d)^2)`.
    pub fn delta_j(&self, j: u32) -> f64 {
        let lb = self.geometry.box_width();
        self.detuning() + self.hbar * PI * PI * (j as f64) * (j as f64) / (2.0 * self.mass * lb * lb)
    }

    /// Effective constant coupling `g~0 = g * C`; errors on sampled profiles.
    pub fn g_tilde0(&self) -> Result<f64> {
        match self.cavity_profile {
            CavityProfile::Constant(c) => Ok(self.g0 * c),
            CavityProfile::Sampled { .. } => Err(Error::ProfileNotConstant),
        }
    }

    /// Non-locality length `xi = sqrt(hbar / (2 m |Delta|))`.
    pub fn xi(&self) -> Result<f64> {
        crate::selfenergy::xi_length(self.mass, self.detuning(), self.hbar)
    }
}

/// Which well an a atom sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Well {
    Left,
    Right,
}

/// Spatial mode label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    ALeft,
    ARight,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeId {
    pub species: Species,
    pub j: u32,
}

impl ModeId {
    pub fn new(species: Species, j: u32) -> Result<Self> {
        if j < 1 {
            return Err(Error::InvalidParameter { name: "j", reason: "spatial quantum number must be >= 1".into() });
        }
        Ok(ModeId { species, j })
    }
}

/// Bare eigenfrequency of a spatial mode.
///
/// Species a: `Omega_a + hbar pi^2 j^2 / (2 m l^2)` (left and right wells are
/// degenerate). Species b: `Omega_b + hbar pi^2 j^2 / (2 m (2l+d)^2)`.
pub fn mode_frequency(params: &ModelParams, mode: ModeId) -> Result<f64> {
    params.validate()?;
    if mode.j < 1 {
        return Err(Error::InvalidParameter { name: "j", reason: "must be >= 1".into() });
    }
    let j2 = (mode.j as f64) * (mode.j as f64);
    Ok(match mode.species {
        Species::ALeft | Species::ARight => {
            let l = params.geometry.ell();
            params.omega_internal_a + params.hbar * PI * PI * j2 / (2.0 * params.mass * l * l)
        }
        Species::B => {
            let lb = params.geometry.box_width();
            params.omega_internal_b + params.hbar * PI * PI * j2 / (2.0 * params.mass * lb * lb)
        }
    })
}

/// Normalized infinite-well eigenfunction value at `x`.
///
/// Left a modes are supported on `[-l-d/2, -d/2]`, right a modes on
/// `[d/2, l+d/2]`, b modes on the full box. Zero on the rest of the box;
/// positions beyond the outer walls are an error.
pub fn mode_function(params: &ModelParams, mode: ModeId, x: f64) -> Result<f64> {
    let geom = &params.geometry;
    let half = geom.half_width();
    if !(x >= -half && x <= half) {
        return Err(Error::OutsideBox { x, lo: -half, hi: half });
    }
    let l = geom.ell();
    let lb = geom.box_width();
    let j = mode.j as f64;
    Ok(match mode.species {
        Species::ALeft => {
            let u = x + half;
            if (0.0..=l).contains(&u) { (2.0 / l).sqrt() * (j * PI * u / l).sin() } else { 0.0 }
        }
        Species::ARight => {
            let u = x - 0.5 * geom.d();
            if (0.0..=l).contains(&u) { (2.0 / l).sqrt() * (j * PI * u / l).sin() } else { 0.0 }
        }
        Species::B => {
            let u = x + half;
            (2.0 / lb).sqrt() * (j * PI * u / lb).sin()
        }
    })
}

/// Branch-selection tolerance for the degenerate overlap `j*l = 2l+d`.
const DEGENERATE_TOL: f64 = 1e-9;

/// Default absolute tolerance for sampled-profile quadrature.
pub const SAMPLED_QUAD_TOL: f64 = 1e-12;

/// Coupling overlap `g_{sigma j} = g * integral phi_a_sigma phi_b_j C(x) dx`.
///
/// Constant profiles use the closed-form sine-product integral, with an
/// explicit analytic branch at the degenerate wavenumber `j*l = 2l+d`
/// where the generic formula is 0/0. Sampled profiles are integrated by
/// adaptive Simpson quadrature over the sigma well.
pub fn coupling_overlap(params: &ModelParams, sigma: Well, j: u32) -> Result<f64> {
    params.validate()?;
    if j < 1 {
        return Err(Error::InvalidParameter { name: "j", reason: "must be >= 1".into() });
    }
    let geom = &params.geometry;
    let l = geom.ell();
    let lb = geom.box_width();
    match &params.cavity_profile {
        CavityProfile::Constant(c) => {
            let g_left = constant_overlap_left(l, lb, j) * params.g0 * c;
            Ok(match sigma {
                Well::Left => g_left,
                // reflection parity of the b modes
                Well::Right => if j % 2 == 1 { g_left } else { -g_left },
            })
        }
        CavityProfile::Sampled { .. } => coupling_overlap_quadrature(params, sigma, j, SAMPLED_QUAD_TOL),
    }
}

/// The overlap integral evaluated by adaptive quadrature regardless of
/// the profile kind; the independent cross-check for the closed form.
pub fn coupling_overlap_quadrature(params: &ModelParams, sigma: Well, j: u32, tol: f64) -> Result<f64> {
    params.validate()?;
    if j < 1 {
        return Err(Error::InvalidParameter { name: "j", reason: "must be >= 1".into() });
    }
    let geom = &params.geometry;
    let (lo, hi) = match sigma {
        Well::Left => (-geom.half_width(), -0.5 * geom.d()),
        Well::Right => (0.5 * geom.d(), geom.half_width()),
    };
    if let CavityProfile::Sampled { x, .. } = &params.cavity_profile {
        let covered = x.first().is_some_and(|&a| a <= lo) && x.last().is_some_and(|&b| b >= hi);
        if !covered {
            return Err(Error::ProfileCoverage { lo, hi });
        }
    }
    let species = match sigma {
        Well::Left => Species::ALeft,
        Well::Right => Species::ARight,
    };
    let f = |xv: f64| {
        let pa = mode_function(params, ModeId { species, j: 1 }, xv).unwrap_or(0.0);
        let pb = mode_function(params, ModeId { species: Species::B, j }, xv).unwrap_or(0.0);
        pa * pb * params.cavity_profile.interpolate(xv)
    };
    let val = adaptive_simpson(&f, lo, hi, tol)?;
    Ok(params.g0 * val)
}

/// Closed-form `integral_0^l sqrt(2/l) sin(pi u/l) sqrt(2/Lb) sin(j pi u/Lb) du`.
fn constant_overlap_left(l: f64, lb: f64, j: u32) -> f64 {
    let jf = j as f64;
    let ratio = jf * l / lb;
    if (1.0 - ratio * ratio).abs() < DEGENERATE_TOL {
        // integrand is sin^2; integral l/2 before normalization
        return (l / lb).sqrt();
    }
    let alpha = PI / l;
    let beta = jf * PI / lb;
    let integral = (beta * l).sin() * alpha / (alpha * alpha - beta * beta);
    2.0 / (l * lb).sqrt() * integral
}

/// Adaptive Simpson quadrature with absolute tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> std::result::Result<f64, f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(err.abs());
        }
        let l = recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }
    // split at an irrational fraction so oscillatory integrands whose
    // zeros sit at dyadic subdivisions of [a, b] cannot hide from the
    // sampler
    let split = a + (b - a) * std::f64::consts::FRAC_1_SQRT_2;
    let mut total = 0.0;
    for (lo, hi) in [(a, split), (split, b)] {
        let flo = f(lo);
        let fhi = f(hi);
        let fm = f(0.5 * (lo + hi));
        let whole = simpson(lo, flo, hi, fhi, fm);
        total += recurse(f, lo, flo, hi, fhi, fm, whole, 0.5 * tol, 48)
            .map_err(|estimate| Error::QuadratureFailure { estimate, tol })?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(ell: f64, d: f64, m: f64) -> ModelParams {
        ModelParams {
            geometry: Geometry::new(ell, d).unwrap(),
            mass: m,
            omega_internal_a: 0.0,
            omega_internal_b: 0.0,
            omega_cavity: 0.0,
            g0: 1.0,
            cavity_profile: CavityProfile::Constant(1.0),
            hbar: 1.0,
        }
    }

    #[test]
    fn mode_frequency_direct_substitution() {
        // hbar=1, m=1/2, l=pi, Omega_a=0, a-left j=1 -> 1.0
        let p = params(std::f64::consts::PI, 1.0, 0.5);
        let w = mode_frequency(&p, ModeId { species: Species::ALeft, j: 1 }).unwrap();
        assert!((w - 1.0).abs() < 1e-14);

        // hbar=1, m=1/2, l=1, d=1, Omega_b=0, b j=2 -> 4 pi^2 / 9
        let p = params(1.0, 1.0, 0.5);
        let w = mode_frequency(&p, ModeId { species: Species::B, j: 2 }).unwrap();
        assert!((w - 4.0 * PI * PI / 9.0).abs() < 1e-12);
    }

    #[test]
    fn a_wells_are_degenerate() {
        let p = params(0.7, 0.3, 1.3);
        for j in 1..5 {
            let wl = mode_frequency(&p, ModeId { species: Species::ALeft, j }).unwrap();
            let wr = mode_frequency(&p, ModeId { species: Species::ARight, j }).unwrap();
            assert_eq!(wl, wr);
        }
    }

    #[test]
    fn mode_frequency_rejects_bad_inputs() {
        let p = params(1.0, 1.0, 1.0);
        assert!(mode_frequency(&p, ModeId { species: Species::B, j: 0 }).is_err());
        assert!(Geometry::new(-1.0, 1.0).is_err());
        assert!(Geometry::new(1.0, 0.0).is_err());
        let mut bad = p.clone();
        bad.mass = -1.0;
        assert!(mode_frequency(&bad, ModeId { species: Species::B, j: 1 }).is_err());
    }

    #[test]
    fn mode_function_boundaries_and_center() {
        let p = params(1.0, 1.0, 1.0);
        // Dirichlet boundary of the left well
        let v = mode_function(&p, ModeId { species: Species::ALeft, j: 1 }, -0.5).unwrap();
        assert!(v.abs() < 1e-14);
        // b j=1 at box center: sqrt(2/(2l+d)) sin(pi/2)
        let v = mode_function(&p, ModeId { species: Species::B, j: 1 }, 0.0).unwrap();
        assert!((v - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        // outside the outer walls is an error
        assert!(mode_function(&p, ModeId { species: Species::B, j: 1 }, 1.6).is_err());
    }

    #[test]
    fn mode_functions_normalized() {
        let p = params(0.8, 0.5, 1.0);
        let half = p.geometry.half_width();
        for (species, j) in [
            (Species::ALeft, 1),
            (Species::ARight, 1),
            (Species::B, 1),
            (Species::B, 4),
            (Species::B, 9),
        ] {
            let f = |x: f64| {
                let v = mode_function(&p, ModeId { species, j }, x).unwrap();
                v * v
            };
            let n = adaptive_simpson(&f, -half, half, 1e-13).unwrap();
            assert!((n - 1.0).abs() < 1e-10, "norm of {species:?} j={j}: {n}");
        }
    }

    #[test]
    fn b_modes_orthonormal() {
        let p = params(1.0, 1.0, 1.0);
        let half = p.geometry.half_width();
        for j1 in 1..=10u32 {
            for j2 in j1..=10u32 {
                let f = |x: f64| {
                    mode_function(&p, ModeId { species: Species::B, j: j1 }, x).unwrap()
                        * mode_function(&p, ModeId { species: Species::B, j: j2 }, x).unwrap()
                };
                let v = adaptive_simpson(&f, -half, half, 1e-13).unwrap();
                let expect = if j1 == j2 { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-10, "gram({j1},{j2}) = {v}");
            }
        }
    }

    #[test]
    fn overlap_pinned_values() {
        let p = params(1.0, 1.0, 1.0);
        // oracle: adaptive quadrature of the coupling integral
        let g = coupling_overlap(&p, Well::Left, 1).unwrap();
        assert!((g - 0.358_098_621_956_764_5).abs() < 1e-12);
        // degenerate wavenumber j*l = 2l+d
        let g = coupling_overlap(&p, Well::Left, 3).unwrap();
        assert!((g - (1.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn overlap_parity_alternation() {
        let p = params(0.6, 0.9, 1.0);
        for j in 1..=12 {
            let gl = coupling_overlap(&p, Well::Left, j).unwrap();
            let gr = coupling_overlap(&p, Well::Right, j).unwrap();
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            assert_eq!(gr, sign * gl);
        }
    }

    #[test]
    fn overlap_large_j_decay() {
        let p = params(1.0, 1.0, 1.0);
        // |g_j| * j^2 decreases monotonically above the degenerate index
        // once the vanishing j = 0 mod 3 residues are excluded
        let mut prev_env = f64::INFINITY;
        for j in (5..=49).filter(|j| j % 3 != 0) {
            let g = coupling_overlap(&p, Well::Left, j).unwrap().abs();
            let env = g * (j as f64) * (j as f64);
            assert!(env <= prev_env * (1.0 + 1e-12), "j = {j}: {env} > {prev_env}");
            prev_env = env;
        }
        let g10 = coupling_overlap(&p, Well::Left, 10).unwrap().abs();
        let g40 = coupling_overlap(&p, Well::Left, 40).unwrap().abs();
        assert!(g40 < g10 / 10.0);
    }

    #[test]
    fn sampled_profile_matches_constant() {
        let mut p = params(1.0, 1.0, 1.0);
        let n = 401;
        let xs: Vec<f64> = (0..n).map(|i| -1.5 + 3.0 * i as f64 / (n - 1) as f64).collect();
        let vals = vec![1.0; n];
        p.cavity_profile = CavityProfile::Sampled { x: xs, values: vals };
        let g = coupling_overlap(&p, Well::Left, 2).unwrap();
        let expect = coupling_overlap(&params(1.0, 1.0, 1.0), Well::Left, 2).unwrap();
        assert!((g - expect).abs() < 1e-10, "{g} vs {expect}");
    }

    #[test]
    fn sampled_profile_coverage_error() {
        let mut p = params(1.0, 1.0, 1.0);
        p.cavity_profile = CavityProfile::Sampled { x: vec![0.0, 1.5], values: vec![1.0, 1.0] };
        assert!(matches!(coupling_overlap(&p, Well::Left, 1), Err(Error::ProfileCoverage { .. })));
        // right well is covered
        assert!(coupling_overlap(&p, Well::Right, 1).is_ok());
    }
}
