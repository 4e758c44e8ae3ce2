//! Hamiltonian construction for the qubit-qudit Rabi model, its uncoupled and
//! reduced variants, the Z2 parity symmetry, and parity-resolved spectra.
//!
//! Basis layout is fixed globally as (qubit, qudit, oscillator) with
//! row-major flattening index (s*d + m)*(n_max+1) + n.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{RabiError, Result};
use crate::linalg;
use crate::operators::{
    boson_operators, hermitian_sum, kron, pauli, spin_operators, OperatorMatrix, PauliAxis,
    StateVector,
};

/// Full parameter set of the model. Frequencies and couplings are stored in
/// the same energy unit as `omega`; the physics only depends on their ratios
/// to `omega`, and the provided constructors keep everything finite and
/// non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Number of qudit levels (>= 2).
    pub d: usize,
    /// Resonator frequency, the reference energy unit (> 0).
    pub omega: f64,
    /// Qubit splitting.
    pub omega1: f64,
    /// Qudit level spacing.
    pub omega2: f64,
    /// Qubit-resonator coupling.
    pub g1: f64,
    /// Qudit-resonator coupling.
    pub g2: f64,
    /// Fock-space cutoff; the oscillator keeps n_max + 1 levels.
    pub n_max: usize,
}

impl ModelParams {
    /// Validating constructor. Enforces the truncation-adequacy rule
    /// n_max >= ceil(8 alpha_max^2) + 10 with alpha_max = (g1 + (d-1) g2)/omega,
    /// which keeps the Poisson tail of the largest displaced vacuum below
    /// ~1e-10.
    pub fn new(
        d: usize,
        omega: f64,
        omega1: f64,
        omega2: f64,
        g1: f64,
        g2: f64,
        n_max: usize,
    ) -> Result<Self> {
        if d < 2 {
            return Err(RabiError::InvalidParams(format!("d must be >= 2, got {d}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(RabiError::InvalidParams(format!(
                "omega must be positive and finite, got {omega}"
            )));
        }
        for (name, v) in [
            ("omega1", omega1),
            ("omega2", omega2),
            ("g1", g1),
            ("g2", g2),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(RabiError::InvalidParams(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        let p = Self {
            d,
            omega,
            omega1,
            omega2,
            g1,
            g2,
            n_max,
        };
        let needed = p.required_n_max();
        if n_max < needed {
            return Err(RabiError::TruncationInadequate(format!(
                "n_max = {n_max} below the adequacy rule (need >= {needed} for \
                 alpha_max = {:.3})",
                p.max_displacement()
            )));
        }
        Ok(p)
    }

    /// Same as [`ModelParams::new`] with n_max chosen by the adequacy rule.
    pub fn with_auto_n_max(
        d: usize,
        omega: f64,
        omega1: f64,
        omega2: f64,
        g1: f64,
        g2: f64,
    ) -> Result<Self> {
        let mut p = Self::new(d, omega, omega1, omega2, g1, g2, usize::MAX)?;
        p.n_max = p.required_n_max();
        Ok(p)
    }

    /// Largest oscillator displacement in the polaron basis.
    pub fn max_displacement(&self) -> f64 {
        (self.g1 + (self.d as f64 - 1.0) * self.g2) / self.omega
    }

    /// Minimal admissible Fock cutoff for these couplings.
    pub fn required_n_max(&self) -> usize {
        let a2 = self.max_displacement().powi(2);
        (8.0 * a2).ceil() as usize + 10
    }

    /// Total Hilbert-space dimension 2 d (n_max + 1).
    pub fn dim(&self) -> usize {
        2 * self.d * (self.n_max + 1)
    }

    /// Ordered factor dimensions (2, d, n_max + 1).
    pub fn layout(&self) -> Vec<usize> {
        vec![2, self.d, self.n_max + 1]
    }

    /// Flattened basis index of the product state |s m n>.
    pub fn flat_index(&self, s: usize, m: usize, n: usize) -> usize {
        (s * self.d + m) * (self.n_max + 1) + n
    }

    /// Copy with different couplings (same truncation; revalidated).
    pub fn with_couplings(&self, g1: f64, g2: f64) -> Result<Self> {
        Self::new(
            self.d,
            self.omega,
            self.omega1,
            self.omega2,
            g1,
            g2,
            self.n_max,
        )
    }

    /// Copy with different atomic frequencies.
    pub fn with_frequencies(&self, omega1: f64, omega2: f64) -> Result<Self> {
        Self::new(
            self.d, self.omega, omega1, omega2, self.g1, self.g2, self.n_max,
        )
    }
}

/// Identity factors used by the builders.
fn factors(p: &ModelParams) -> (OperatorMatrix, OperatorMatrix, OperatorMatrix) {
    (
        OperatorMatrix::identity(2),
        OperatorMatrix::identity(p.d),
        OperatorMatrix::identity(p.n_max + 1),
    )
}

/// Full Hamiltonian
/// H = w adag a - (Omega1/2) sigma_z + Omega2 Jz
///     + [g1 sigma_x + g2 (J+ + J-)](adag + a).
/// The signs are part of the model definition: minus on the qubit term, plus
/// on the qudit term.
pub fn build_full_hamiltonian(p: &ModelParams) -> Result<OperatorMatrix> {
    let (i2, id, iosc) = factors(p);
    let (jz, jp, jm) = spin_operators(p.d)?;
    let jx2 = OperatorMatrix::hermitian((&jp + &jm).into_entries())?;
    let (a, adag, n) = boson_operators(p.n_max);
    let x = OperatorMatrix::hermitian((&adag + &a).into_entries())?;

    let number = kron(&[&i2, &id, &n])?;
    let qubit = kron(&[&pauli(PauliAxis::Z), &id, &iosc])?;
    let qudit = kron(&[&i2, &jz, &iosc])?;
    let coup1 = kron(&[&pauli(PauliAxis::X), &id, &x])?;
    let coup2 = kron(&[&i2, &jx2, &x])?;

    hermitian_sum(&[
        (p.omega, &number),
        (-0.5 * p.omega1, &qubit),
        (p.omega2, &qudit),
        (p.g1, &coup1),
        (p.g2, &coup2),
    ])
}

/// Uncoupled Hamiltonian H0 = w adag a - (Omega1/2) sigma_z + Omega2 Jz,
/// diagonal in the product basis.
pub fn build_uncoupled(p: &ModelParams) -> Result<OperatorMatrix> {
    let zero = ModelParams {
        g1: 0.0,
        g2: 0.0,
        ..*p
    };
    build_full_hamiltonian(&zero)
}

/// Reduced Hamiltonian with the atomic free terms dropped:
/// H~ = w adag a + [g1 sigma_x + g2 (J+ + J-)](adag + a).
pub fn build_reduced(p: &ModelParams) -> Result<OperatorMatrix> {
    let zero = ModelParams {
        omega1: 0.0,
        omega2: 0.0,
        ..*p
    };
    build_full_hamiltonian(&zero)
}

/// Atomic perturbation H' = -(Omega1/2) sigma_z + Omega2 Jz on the full space.
pub fn build_atomic_perturbation(p: &ModelParams) -> Result<OperatorMatrix> {
    let (i2, id, iosc) = factors(p);
    let (jz, _, _) = spin_operators(p.d)?;
    let qubit = kron(&[&pauli(PauliAxis::Z), &id, &iosc])?;
    let qudit = kron(&[&i2, &jz, &iosc])?;
    hermitian_sum(&[(-0.5 * p.omega1, &qubit), (p.omega2, &qudit)])
}

/// Z2 parity operator Pi = sigma_z (x) diag((-1)^m) (x) (-1)^(adag a).
/// Pi^2 = 1 and [H, Pi] = 0 for every coupling, which splits the model into
/// two independent blocks.
pub fn build_parity(p: &ModelParams) -> Result<OperatorMatrix> {
    let sz = pauli(PauliAxis::Z);
    let pd = OperatorMatrix::diagonal(
        &(0..p.d)
            .map(|m| if m % 2 == 0 { 1.0 } else { -1.0 })
            .collect::<Vec<_>>(),
    );
    let posc = OperatorMatrix::diagonal(
        &(0..=p.n_max)
            .map(|n| if n % 2 == 0 { 1.0 } else { -1.0 })
            .collect::<Vec<_>>(),
    );
    kron(&[&sz, &pd, &posc])
}

/// Parity sign (+1/-1) of the product basis state |s m n>.
pub fn basis_parity(s: usize, m: usize, n: usize) -> i32 {
    if (s + m + n) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Full-space observables used by the dynamics module.
pub fn qubit_z_full(p: &ModelParams) -> Result<OperatorMatrix> {
    let (_, id, iosc) = factors(p);
    kron(&[&pauli(PauliAxis::Z), &id, &iosc])
}

pub fn qudit_jz_full(p: &ModelParams) -> Result<OperatorMatrix> {
    let (i2, _, iosc) = factors(p);
    let (jz, _, _) = spin_operators(p.d)?;
    kron(&[&i2, &jz, &iosc])
}

pub fn photon_number_full(p: &ModelParams) -> Result<OperatorMatrix> {
    let (i2, id, _) = factors(p);
    let (_, _, n) = boson_operators(p.n_max);
    kron(&[&i2, &id, &n])
}

/// Index partition of the product basis into even- and odd-parity sectors.
///
/// The Hamiltonian never couples the sectors, so diagonalizing the two
/// half-size blocks is ~4x cheaper than the full matrix and makes the
/// near-degenerate ground pair at strong coupling cleanly separable.
#[derive(Debug, Clone)]
pub struct ParityBlocks {
    even: Vec<usize>,
    odd: Vec<usize>,
    dim: usize,
}

/// Parity sector label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl ParityBlocks {
    pub fn new(p: &ModelParams) -> Self {
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for s in 0..2 {
            for m in 0..p.d {
                for n in 0..=p.n_max {
                    let idx = p.flat_index(s, m, n);
                    if basis_parity(s, m, n) > 0 {
                        even.push(idx);
                    } else {
                        odd.push(idx);
                    }
                }
            }
        }
        let dim = 2 * p.d * (p.n_max + 1);
        Self { even, odd, dim }
    }

    pub fn indices(&self, sector: Parity) -> &[usize] {
        match sector {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Extract the sector block of an operator.
    pub fn block(&self, h: &OperatorMatrix, sector: Parity) -> Array2<C64> {
        let idx = self.indices(sector);
        let e = h.entries();
        Array2::from_shape_fn((idx.len(), idx.len()), |(i, j)| e[(idx[i], idx[j])])
    }

    /// Largest `|H[e,o]|` cross-sector element; zero when the operator truly
    /// commutes with parity.
    pub fn coupling_defect(&self, h: &OperatorMatrix) -> f64 {
        let e = h.entries();
        let mut worst = 0.0f64;
        for &i in &self.even {
            for &j in &self.odd {
                worst = worst.max(e[(i, j)].norm().max(e[(j, i)].norm()));
            }
        }
        worst
    }

    /// Restrict a full-space amplitude vector to a sector.
    pub fn restrict(&self, full: &Array1<C64>, sector: Parity) -> Array1<C64> {
        let idx = self.indices(sector);
        Array1::from_shape_fn(idx.len(), |i| full[idx[i]])
    }

    /// Embed a sector vector back into the full space.
    pub fn embed(&self, block: &Array1<C64>, sector: Parity) -> Array1<C64> {
        let idx = self.indices(sector);
        let mut full = Array1::zeros(self.dim);
        for (i, &ix) in idx.iter().enumerate() {
            full[ix] = block[i];
        }
        full
    }

    /// Diagonalize both parity blocks of a Hamiltonian. Errors if the
    /// operator has cross-sector matrix elements above 1e-12.
    pub fn eigh_sectors(&self, h: &OperatorMatrix) -> Result<ParitySpectrum> {
        if h.dim() != self.dim {
            return Err(RabiError::DimensionMismatch(format!(
                "operator dim {} vs layout dim {}",
                h.dim(),
                self.dim
            )));
        }
        let defect = self.coupling_defect(h);
        if defect > 1e-12 {
            return Err(RabiError::ContractViolation(format!(
                "operator couples parity sectors (max element {defect:.3e})"
            )));
        }
        let (ev, evec) = linalg::zheevd(&self.block(h, Parity::Even))?;
        let (ov, ovec) = linalg::zheevd(&self.block(h, Parity::Odd))?;
        Ok(ParitySpectrum {
            even_values: ev,
            even_vectors: evec,
            odd_values: ov,
            odd_vectors: ovec,
        })
    }
}

/// Eigendecompositions of the two parity blocks.
#[derive(Debug, Clone)]
pub struct ParitySpectrum {
    pub even_values: Vec<f64>,
    pub even_vectors: Array2<C64>,
    pub odd_values: Vec<f64>,
    pub odd_vectors: Array2<C64>,
}

impl ParitySpectrum {
    /// Merged ascending eigenvalues of the full operator.
    pub fn merged_values(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .even_values
            .iter()
            .chain(self.odd_values.iter())
            .cloned()
            .collect();
        all.sort_by(|a, b| a.total_cmp(b));
        all
    }

    pub fn ground_energy(&self) -> f64 {
        self.even_values[0].min(self.odd_values[0])
    }

    /// Gap between the two lowest levels of the full spectrum.
    pub fn ground_gap(&self) -> f64 {
        let m = self.merged_values();
        m[1] - m[0]
    }

    fn sector_ground(&self, sector: Parity) -> (f64, Array1<C64>) {
        match sector {
            Parity::Even => (self.even_values[0], self.even_vectors.column(0).to_owned()),
            Parity::Odd => (self.odd_values[0], self.odd_vectors.column(0).to_owned()),
        }
    }

    /// Ground state embedded in the full space. When the two sector minima
    /// are degenerate within `tie_tol`, the even sector is selected, which
    /// pins the eigensolver branch deterministically.
    pub fn ground_state(
        &self,
        blocks: &ParityBlocks,
        layout: Vec<usize>,
        tie_tol: f64,
    ) -> Result<(f64, StateVector, Parity)> {
        let (ee, _) = self.sector_ground(Parity::Even);
        let (eo, _) = self.sector_ground(Parity::Odd);
        let sector = if ee <= eo + tie_tol {
            Parity::Even
        } else {
            Parity::Odd
        };
        let (energy, vec) = self.sector_ground(sector);
        let full = blocks.embed(&vec, sector);
        Ok((energy, StateVector::new(full, layout)?, sector))
    }
}
