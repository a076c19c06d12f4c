//! Truncated basis enumeration and assembly of the model Hamiltonian.
//!
//! The single-atom basis is `{|a,sigma,n>, |b,j,n>}` with `sigma` the well,
//! `j` the b spatial mode and `n` the photon number. The interaction
//! `g_{sigma j} (c + c^dag)(a^dag b + b^dag a)` conserves photon parity
//! `(n + [internal = b]) mod 2`, which splits the matrix into two sectors.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::modes::{coupling_overlap, mode_frequency, ModeId, ModelParams, Species, Well};

/// Basis truncation: highest b spatial mode and photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub j_max: u32,
    pub n_max: u32,
    pub parity_reduced: bool,
}

impl Truncation {
    pub fn new(j_max: u32, n_max: u32, parity_reduced: bool) -> Result<Self> {
        if j_max < 1 {
            return Err(Error::InvalidParameter { name: "j_max", reason: "must be >= 1".into() });
        }
        Ok(Truncation { j_max, n_max, parity_reduced })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisState {
    /// Ground internal state in well `sigma` with `n` photons.
    A { sigma: Well, n: u32 },
    /// Excited internal state in b box mode `j` with `n` photons.
    B { j: u32, n: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisState::A { sigma: Well::Left, n } => write!(f, "|a,L,{n}>"),
            BasisState::A { sigma: Well::Right, n } => write!(f, "|a,R,{n}>"),
            BasisState::B { j, n } => write!(f, "|b,{j},{n}>"),
        }
    }
}

/// Conserved photon parity `(n + [internal = b]) mod 2`.
pub fn photon_parity(state: BasisState) -> Parity {
    let bit = match state {
        BasisState::A { n, .. } => n % 2,
        BasisState::B { n, .. } => (n + 1) % 2,
    };
    if bit == 0 { Parity::Even } else { Parity::Odd }
}

/// Deterministic basis ordering: a states first by (sigma, n), then b states
/// by (j, n). With `parity_reduced` only the even sector (the one reachable
/// from `|a,L,0>`) is kept.
pub fn enumerate_basis(truncation: Truncation) -> Result<Vec<BasisState>> {
    if truncation.j_max < 1 {
        return Err(Error::InvalidParameter { name: "j_max", reason: "must be >= 1".into() });
    }
    let mut basis = Vec::new();
    for sigma in [Well::Left, Well::Right] {
        for n in 0..=truncation.n_max {
            basis.push(BasisState::A { sigma, n });
        }
    }
    for j in 1..=truncation.j_max {
        for n in 0..=truncation.n_max {
            basis.push(BasisState::B { j, n });
        }
    }
    if truncation.parity_reduced {
        basis.retain(|&s| photon_parity(s) == Parity::Even);
    }
    Ok(basis)
}

/// Dense Hermitian operator on an enumerated basis. Entries are real in
/// this model; `hbar` is carried so that propagation has the right phase
/// convention.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    matrix: DMatrix<f64>,
    basis: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
    hbar: f64,
}

impl HermitianMatrix {
    pub fn new(matrix: DMatrix<f64>, basis: Vec<BasisState>, hbar: f64) -> Self {
        let index = basis.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        HermitianMatrix { matrix, basis, index, hbar }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisState] {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn index_of(&self, state: BasisState) -> Result<usize> {
        self.index.get(&state).copied().ok_or_else(|| Error::StateNotInBasis(state.to_string()))
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[(row, col)]
    }
}

/// Build the model Hamiltonian on the truncated basis.
///
/// Diagonal: `hbar * (mode frequency + n * omega_c)`. Off-diagonal:
/// `hbar * g_{sigma j} * <n|c + c^dag|n'>` between `|a,sigma,n>` and
/// `|b,j,n'>`. With `rwa` the counter-rotating entries
/// (`|a,sigma,n> <-> |b,j,n+1>`) are zeroed.
pub fn build_hamiltonian(params: &ModelParams, truncation: Truncation, rwa: bool) -> Result<HermitianMatrix> {
    params.validate()?;
    let basis = enumerate_basis(truncation)?;
    let dim = basis.len();
    let mut h = DMatrix::<f64>::zeros(dim, dim);

    // couplings g_{L j}; right-well values follow by parity
    let mut g_left = vec![0.0; truncation.j_max as usize + 1];
    for j in 1..=truncation.j_max {
        g_left[j as usize] = coupling_overlap(params, Well::Left, j)?;
    }

    for (i, &s) in basis.iter().enumerate() {
        let (freq, n) = match s {
            BasisState::A { sigma, n } => {
                let species = if sigma == Well::Left { Species::ALeft } else { Species::ARight };
                (mode_frequency(params, ModeId { species, j: 1 })?, n)
            }
            BasisState::B { j, n } => (mode_frequency(params, ModeId { species: Species::B, j })?, n),
        };
        h[(i, i)] = params.hbar * (freq + n as f64 * params.omega_cavity);
    }

    for (i, &si) in basis.iter().enumerate() {
        let BasisState::A { sigma, n } = si else { continue };
        for (k, &sk) in basis.iter().enumerate() {
            let BasisState::B { j, n: nb } = sk else { continue };
            let ladder = if nb + 1 == n {
                // co-rotating: photon absorbed on the way a -> b
                (n as f64).sqrt()
            } else if nb == n + 1 {
                if rwa { continue; }
                ((n + 1) as f64).sqrt()
            } else {
                continue;
            };
            let g = match sigma {
                Well::Left => g_left[j as usize],
                Well::Right => if j % 2 == 1 { g_left[j as usize] } else { -g_left[j as usize] },
            };
            let val = params.hbar * g * ladder;
            h[(i, k)] = val;
            h[(k, i)] = val;
        }
    }

    // the interaction cannot leave a parity sector; assert on reduced bases
    if truncation.parity_reduced {
        debug_assert!(basis.iter().all(|&s| photon_parity(s) == Parity::Even));
    }

    Ok(HermitianMatrix::new(h, basis, params.hbar))
}

/// One symmetry block of the Hamiltonian under the L<->R swap.
///
/// Basis combinations: `(|a,L,n> +/- |a,R,n>)/sqrt(2)` and the b states of
/// matching reflection parity (odd j are symmetric, even j antisymmetric).
#[derive(Debug, Clone)]
pub struct SymmetryBlock {
    /// Diagonal a-part energies, indexed like `a_photons`.
    pub a_diag: Vec<f64>,
    /// Photon numbers of the a combinations in this block.
    pub a_photons: Vec<u32>,
    /// b-part states `(j, n)`.
    pub b_states: Vec<(u32, u32)>,
    /// Diagonal b-part energies.
    pub b_diag: Vec<f64>,
    /// Coupling block, `a_diag.len() x b_diag.len()`.
    pub coupling: DMatrix<f64>,
    /// Max |entry| of the b-b off-diagonal part left out of `b_diag`
    /// (zero for the model Hamiltonian).
    pub b_offdiag_max: f64,
}

/// Decompose into (symmetric, antisymmetric) blocks.
///
/// Requires every `|a,L,n>` in the basis to have its `|a,R,n>` partner.
pub fn symmetry_blocks(h: &HermitianMatrix) -> Result<(SymmetryBlock, SymmetryBlock)> {
    let basis = h.basis();
    let mut a_ns: Vec<u32> = Vec::new();
    for &s in basis {
        if let BasisState::A { sigma: Well::Left, n } = s {
            a_ns.push(n);
        }
    }
    a_ns.sort_unstable();
    for &n in &a_ns {
        h.index_of(BasisState::A { sigma: Well::Right, n })?;
    }

    let build = |symmetric: bool| -> Result<SymmetryBlock> {
        let sign = if symmetric { 1.0 } else { -1.0 };
        let b_states: Vec<(u32, u32)> = basis
            .iter()
            .filter_map(|&s| match s {
                BasisState::B { j, n } if (j % 2 == 1) == symmetric => Some((j, n)),
                _ => None,
            })
            .collect();
        let na = a_ns.len();
        let nb = b_states.len();
        let mut a_diag = vec![0.0; na];
        let mut b_diag = vec![0.0; nb];
        let mut coupling = DMatrix::<f64>::zeros(na, nb);
        let mut b_offdiag_max: f64 = 0.0;
        for (ia, &n) in a_ns.iter().enumerate() {
            let il = h.index_of(BasisState::A { sigma: Well::Left, n })?;
            let ir = h.index_of(BasisState::A { sigma: Well::Right, n })?;
            a_diag[ia] = 0.5 * (h.entry(il, il) + h.entry(ir, ir)) + sign * h.entry(il, ir);
            for (ib, &(j, nb_)) in b_states.iter().enumerate() {
                let k = h.index_of(BasisState::B { j, n: nb_ })?;
                // <(L +/- R)/sqrt2 | H | b> with H[L,b] = +/- H[R,b] by parity
                coupling[(ia, ib)] = (h.entry(il, k) + sign * h.entry(ir, k)) / 2.0f64.sqrt();
            }
        }
        for (ib, &(j, n)) in b_states.iter().enumerate() {
            let k = h.index_of(BasisState::B { j, n })?;
            b_diag[ib] = h.entry(k, k);
            for (ib2, &(j2, n2)) in b_states.iter().enumerate() {
                if ib2 != ib {
                    let k2 = h.index_of(BasisState::B { j: j2, n: n2 })?;
                    b_offdiag_max = b_offdiag_max.max(h.entry(k, k2).abs());
                }
            }
        }
        Ok(SymmetryBlock { a_diag, a_photons: a_ns.clone(), b_states, b_diag, coupling, b_offdiag_max })
    };

    Ok((build(true)?, build(false)?))
}
