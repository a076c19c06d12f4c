//! Position-space non-local kernel, its projections on the two-mode
//! well basis, the analytic two-mode evolution, and a direct grid
//! integration of the non-local equation as a cross-check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{mode_function, ModeId, ModelParams, Species};
use crate::selfenergy::NEAR_RESONANCE_FRACTION;

/// Default relative tolerance for the projection quadrature estimate.
pub const PROJECTION_TOL: f64 = 1e-6;

/// Kernel sampled on a uniform grid over the box.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    params: ModelParams,
    x: Vec<f64>,
    matrix: DMatrix<f64>,
    j_max: u32,
}

impl KernelGrid {
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }
}

/// Uniform grid of `n` points spanning the box walls.
pub fn uniform_box_grid(params: &ModelParams, n: usize) -> Result<Vec<f64>> {
    if n < 5 {
        return Err(Error::InvalidGrid(format!("need at least 5 points, got {n}")));
    }
    let half = params.geometry.half_width();
    let h = 2.0 * half / (n - 1) as f64;
    Ok((0..n).map(|i| -half + i as f64 * h).collect())
}

/// Assemble `Pi(x, x') = -hbar g~0^2 sum_j phi_j(x) phi_j(x') / delta_j`
/// on the grid.
pub fn build_kernel(params: &ModelParams, x_grid: &[f64], j_max: u32) -> Result<KernelGrid> {
    params.validate()?;
    let g_tilde = params.g_tilde0()?;
    if j_max < 1 {
        return Err(Error::InvalidParameter { name: "j_max", reason: "must be >= 1".into() });
    }
    if x_grid.len() < 2 || x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("x grid must be strictly increasing with at least 2 points".into()));
    }
    let n = x_grid.len();
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    let scale = params.detuning().abs();
    for j in 1..=j_max {
        let dj = params.delta_j(j);
        if dj == 0.0 || (scale > 0.0 && dj.abs() < NEAR_RESONANCE_FRACTION * scale) {
            return Err(Error::Resonance(format!("intermediate denominator for mode {j} is {dj:e}")));
        }
        let phi: Vec<f64> = x_grid
            .iter()
            .map(|&x| mode_function(params, ModeId { species: Species::B, j }, x))
            .collect::<Result<_>>()?;
        let w = params.hbar * g_tilde * g_tilde / dj;
        for r in 0..n {
            for c in r..n {
                let v = matrix[(r, c)] - w * phi[r] * phi[c];
                matrix[(r, c)] = v;
                matrix[(c, r)] = v;
            }
        }
    }
    Ok(KernelGrid { params: params.clone(), x: x_grid.to_vec(), matrix, j_max })
}

/// The a-mode set the kernel is projected on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AMode {
    L,
    R,
    /// `(L + R)/sqrt(2)`
    S,
    /// `(L - R)/sqrt(2)`
    A,
}

impl AMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "L" | "l" => Ok(AMode::L),
            "R" | "r" => Ok(AMode::R),
            "S" | "s" => Ok(AMode::S),
            "A" | "a" => Ok(AMode::A),
            other => Err(Error::InvalidParameter { name: "a_mode", reason: format!("unknown mode `{other}`") }),
        }
    }
}

fn a_mode_values(grid: &KernelGrid, mode: AMode) -> Result<Vec<f64>> {
    let p = &grid.params;
    let left = |x: f64| mode_function(p, ModeId { species: Species::ALeft, j: 1 }, x);
    let right = |x: f64| mode_function(p, ModeId { species: Species::ARight, j: 1 }, x);
    grid.x
        .iter()
        .map(|&x| {
            Ok(match mode {
                AMode::L => left(x)?,
                AMode::R => right(x)?,
                AMode::S => (left(x)? + right(x)?) / 2.0f64.sqrt(),
                AMode::A => (left(x)? - right(x)?) / 2.0f64.sqrt(),
            })
        })
        .collect()
}

/// Composite Simpson weights; requires an odd point count.
fn simpson_weights(n: usize, h: f64) -> Result<Vec<f64>> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidGrid(format!("Simpson quadrature needs an odd point count >= 3, got {n}")));
    }
    let mut w = vec![0.0; n];
    w[0] = h / 3.0;
    w[n - 1] = h / 3.0;
    for (i, wi) in w.iter_mut().enumerate().skip(1).take(n - 2) {
        *wi = if i % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 };
    }
    Ok(w)
}

fn check_uniform(x: &[f64]) -> Result<f64> {
    let h = x[1] - x[0];
    for w in x.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(Error::InvalidGrid("projection requires a uniform grid".into()));
        }
    }
    Ok(h)
}

/// Project the kernel on two a modes: `integral integral phi_n(x) Pi(x,x')
/// phi_n'(x') dx dx'` by tensor Simpson quadrature, with a coarse-grid
/// error estimate.
pub fn project_kernel(grid: &KernelGrid, n: AMode, n_prime: AMode) -> Result<f64> {
    project_kernel_with_tol(grid, n, n_prime, PROJECTION_TOL)
}

/// As `project_kernel` with an explicit relative tolerance for the
/// quadrature error estimate.
pub fn project_kernel_with_tol(grid: &KernelGrid, n: AMode, n_prime: AMode, tol: f64) -> Result<f64> {
    let npts = grid.x.len();
    let h = check_uniform(&grid.x)?;
    if (npts - 1) % 4 != 0 {
        return Err(Error::InvalidGrid(format!(
            "projection error estimate needs point count = 4k + 1, got {npts}"
        )));
    }
    let f = a_mode_values(grid, n)?;
    let g = a_mode_values(grid, n_prime)?;
    let quad = |stride: usize| -> f64 {
        let m = (npts - 1) / stride + 1;
        let w = simpson_weights(m, h * stride as f64).unwrap();
        let mut acc = 0.0;
        for (ri, r) in (0..npts).step_by(stride).enumerate() {
            let mut row = 0.0;
            for (ci, c) in (0..npts).step_by(stride).enumerate() {
                row += w[ci] * g[c] * grid.matrix[(r, c)];
            }
            acc += w[ri] * f[r] * row;
        }
        acc
    };
    let fine = quad(1);
    let coarse = quad(2);
    // scale for the tolerance: a modes are unit-normalized, so the kernel
    // magnitude itself bounds the projections
    let scale = grid.matrix.abs().max() * grid.params.geometry.box_width().powi(2);
    let estimate = (fine - coarse).abs() / 15.0;
    if estimate > tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::GridTooCoarse { estimate, tol: tol * scale });
    }
    Ok(fine)
}

/// Two-mode amplitudes on the well basis.
#[derive(Debug, Clone)]
pub struct TwoModeSeries {
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub c_l: Vec<Complex64>,
    pub c_r: Vec<Complex64>,
}

/// Analytic two-mode evolution from `c_L = 1, c_R = 0`.
///
/// `c_L = e^{-i phi} cos(dE t/2hbar)`, `c_R = i e^{-i phi} sin(dE t/2hbar)`
/// with `phi` the mean phase and `dE = pi_aa - pi_ss`; the tunnelling
/// probability depends on the splitting alone, so common shifts of the
/// two self-energies leave it bit-identical.
pub fn two_mode_evolve(e: f64, pi_ss: f64, pi_aa: f64, hbar: f64, t_grid: &[f64]) -> Result<TwoModeSeries> {
    if !(hbar > 0.0) {
        return Err(Error::InvalidParameter { name: "hbar", reason: format!("must be > 0, got {hbar}") });
    }
    let de = pi_aa - pi_ss;
    let mut out = TwoModeSeries {
        t: t_grid.to_vec(),
        p: Vec::with_capacity(t_grid.len()),
        c_l: Vec::with_capacity(t_grid.len()),
        c_r: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        let half = de * t / (2.0 * hbar);
        let mean = (e + 0.5 * (pi_ss + pi_aa)) * t / hbar;
        let phase = Complex64::from_polar(1.0, -mean);
        out.p.push(half.sin() * half.sin());
        out.c_l.push(phase * half.cos());
        out.c_r.push(Complex64::new(0.0, 1.0) * phase * half.sin());
    }
    Ok(out)
}

/// Direct integration of the non-local equation on the grid: finite
/// differences for the kinetic term inside each well (hard walls), the
/// kernel applied with trapezoid weights, a Cayley (unitarized
/// Crank-Nicolson) step in the frame rotating at the lowest well energy.
///
/// Returns `(t, p_t3k)` sampled every `sample_every` steps. This is a
/// validation path for `two_mode_evolve`, not a primary result.
pub fn nonlocal_evolve(
    params: &ModelParams,
    j_max: u32,
    n_per_well: usize,
    t_final: f64,
    n_steps: usize,
    sample_every: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    let g_tilde = params.g_tilde0()?;
    if n_per_well < 4 {
        return Err(Error::InvalidGrid(format!("need at least 4 intervals per well, got {n_per_well}")));
    }
    if n_steps == 0 || sample_every == 0 || !(t_final > 0.0) {
        return Err(Error::InvalidParameter { name: "t_final/n_steps", reason: "must be positive".into() });
    }
    let geom = &params.geometry;
    let (l, half, d2) = (geom.ell(), geom.half_width(), 0.5 * geom.d());
    let h = l / n_per_well as f64;
    // interior points of both wells; well walls carry Dirichlet conditions
    let m_int = n_per_well - 1;
    let n = 2 * m_int;
    let mut x = Vec::with_capacity(n);
    for i in 1..n_per_well {
        x.push(-half + i as f64 * h);
    }
    for i in 1..n_per_well {
        x.push(d2 + i as f64 * h);
    }

    let kin = params.hbar * params.hbar / (2.0 * params.mass * h * h);
    let mut heff = DMatrix::<f64>::zeros(n, n);
    for blk in 0..2 {
        for i in 0..m_int {
            let idx = blk * m_int + i;
            heff[(idx, idx)] = 2.0 * kin;
            if i + 1 < m_int {
                heff[(idx, idx + 1)] = -kin;
                heff[(idx + 1, idx)] = -kin;
            }
        }
    }
    let scale = params.detuning().abs();
    for j in 1..=j_max {
        let dj = params.delta_j(j);
        if dj == 0.0 || (scale > 0.0 && dj.abs() < NEAR_RESONANCE_FRACTION * scale) {
            return Err(Error::Resonance(format!("intermediate denominator for mode {j} is {dj:e}")));
        }
        let phi: Vec<f64> = x
            .iter()
            .map(|&xv| mode_function(params, ModeId { species: Species::B, j }, xv))
            .collect::<Result<_>>()?;
        let w = params.hbar * g_tilde * g_tilde / dj * h; // trapezoid weight folded in
        for r in 0..n {
            for c in 0..n {
                heff[(r, c)] -= w * phi[r] * phi[c];
            }
        }
    }
    // rotating frame: subtract the bare lowest well energy
    let e1 = params.hbar * params.hbar * std::f64::consts::PI.powi(2) / (2.0 * params.mass * l * l);
    for i in 0..n {
        heff[(i, i)] -= e1;
    }

    let mut phi_l = vec![0.0; n];
    let mut phi_r = vec![0.0; n];
    for (i, &xv) in x.iter().enumerate() {
        phi_l[i] = mode_function(params, ModeId { species: Species::ALeft, j: 1 }, xv)?;
        phi_r[i] = mode_function(params, ModeId { species: Species::ARight, j: 1 }, xv)?;
    }
    let nl = (phi_l.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
    let nr = (phi_r.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
    for v in &mut phi_l {
        *v /= nl;
    }
    for v in &mut phi_r {
        *v /= nr;
    }

    let dt = t_final / n_steps as f64;
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    let mut b = DMatrix::<Complex64>::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let z = Complex64::new(0.0, 0.5 * dt / params.hbar) * heff[(r, c)];
            let id = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            a[(r, c)] = id + z;
            b[(r, c)] = id - z;
        }
    }
    let lu = a.lu();
    let mut psi = DVector::<Complex64>::from_iterator(n, phi_l.iter().map(|&v| Complex64::new(v, 0.0)));
    let mut ts = Vec::new();
    let mut ps = Vec::new();
    for step in 0..=n_steps {
        if step % sample_every == 0 {
            let cr: Complex64 = psi.iter().zip(&phi_r).map(|(c, &v)| c * v).sum::<Complex64>() * h;
            ts.push(step as f64 * dt);
            ps.push(cr.norm_sqr());
        }
        if step < n_steps {
            let rhs = &b * &psi;
            psi = lu
                .solve(&rhs)
                .ok_or_else(|| Error::InvalidGrid("Cayley step solve failed (singular factor)".into()))?;
        }
    }
    Ok((ts, ps))
}
