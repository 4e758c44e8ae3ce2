//! Dense complex operator algebra on small tensor-product Hilbert spaces.
//!
//! This is the substrate for everything else in the crate: elementary qubit,
//! spin-j and truncated boson operators, displacement operators, tensor
//! products with a fixed (qubit, qudit, oscillator) factor order, Hermitian
//! eigendecomposition, partial trace/transpose, and normalized state vectors.
//!
//! All matrices are row-major `ndarray` arrays over `Complex64`; no sparse
//! formats, no arbitrary precision.

use ndarray::{linalg::kron as nd_kron, Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{RabiError, Result};
use crate::linalg;

/// Hermiticity tolerance enforced by validating constructors.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Looser Hermiticity tolerance accepted by the eigensolver front end.
pub const EIGH_HERMITICITY_TOL: f64 = 1e-10;
/// Norm tolerance for state vectors.
pub const STATE_NORM_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Magnitude above which an eigenvector component is used to fix the phase.
const PHASE_PIVOT_TOL: f64 = 1e-8;

/// Dense complex square matrix with a Hermiticity flag.
///
/// The flag is set only by constructors and combinators that guarantee the
/// property; `eigh` re-verifies numerically regardless.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: Array2<C64>,
    hermitian_hint: bool,
}

impl OperatorMatrix {
    /// Wrap a square matrix without any Hermiticity claim.
    pub fn from_entries(entries: Array2<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(RabiError::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self {
            entries,
            hermitian_hint: false,
        })
    }

    /// Wrap a square matrix, verifying Hermiticity to [`HERMITICITY_TOL`].
    pub fn hermitian(entries: Array2<C64>) -> Result<Self> {
        let op = Self::from_entries(entries)?;
        let defect = linalg::hermiticity_defect(&op.entries);
        if defect > HERMITICITY_TOL {
            return Err(RabiError::ContractViolation(format!(
                "matrix is not Hermitian: max |M - M^dag| = {defect:.3e}"
            )));
        }
        Ok(Self {
            hermitian_hint: true,
            ..op
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: Array2::eye(dim),
            hermitian_hint: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: Array2::zeros((dim, dim)),
            hermitian_hint: true,
        }
    }

    /// Real diagonal matrix (always Hermitian).
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut entries = Array2::zeros((n, n));
        for (i, &x) in diag.iter().enumerate() {
            entries[(i, i)] = C64::new(x, 0.0);
        }
        Self {
            entries,
            hermitian_hint: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.entries)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        let entries = Array2::from_shape_fn((n, n), |(i, j)| self.entries[(j, i)].conj());
        Self {
            entries,
            hermitian_hint: self.hermitian_hint,
        }
    }

    /// Matrix product; the result carries no Hermiticity claim.
    pub fn dot(&self, other: &Self) -> Self {
        assert_eq!(
            self.dim(),
            other.dim(),
            "operator product requires equal dimensions"
        );
        Self {
            entries: self.entries.dot(&other.entries),
            hermitian_hint: false,
        }
    }

    /// Scale by a real factor; Hermiticity survives.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self.entries.mapv(|z| z * factor),
            hermitian_hint: self.hermitian_hint,
        }
    }

    /// Apply to a bare amplitude vector.
    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        assert_eq!(self.dim(), v.len(), "operator/vector dimension mismatch");
        self.entries.dot(v)
    }

    /// Expectation value on a state; returns the full complex number.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        if self.dim() != psi.dim() {
            return Err(RabiError::DimensionMismatch(format!(
                "operator dim {} vs state dim {}",
                self.dim(),
                psi.dim()
            )));
        }
        let w = self.entries.dot(psi.amplitudes());
        Ok(psi
            .amplitudes()
            .iter()
            .zip(w.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

impl std::ops::Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator sum requires equal dims");
        OperatorMatrix {
            entries: &self.entries + &rhs.entries,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

impl std::ops::Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(
            self.dim(),
            rhs.dim(),
            "operator difference requires equal dims"
        );
        OperatorMatrix {
            entries: &self.entries - &rhs.entries,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

/// Real linear combination of Hermitian operators. Every term must carry the
/// Hermitian flag; the result keeps it (closure under real combinations).
pub fn hermitian_sum(terms: &[(f64, &OperatorMatrix)]) -> Result<OperatorMatrix> {
    let (_, first) = terms
        .first()
        .ok_or_else(|| RabiError::InvalidArgument("hermitian_sum of no terms".into()))?;
    let dim = first.dim();
    let mut acc: Array2<C64> = Array2::zeros((dim, dim));
    for (coeff, op) in terms {
        if op.dim() != dim {
            return Err(RabiError::DimensionMismatch(format!(
                "hermitian_sum: term dim {} vs {}",
                op.dim(),
                dim
            )));
        }
        if !op.hermitian_hint {
            return Err(RabiError::ContractViolation(
                "hermitian_sum requires Hermitian-flagged terms".into(),
            ));
        }
        acc.zip_mut_with(&op.entries, |a, b| *a += *coeff * b);
    }
    Ok(OperatorMatrix {
        entries: acc,
        hermitian_hint: true,
    })
}

/// Pauli axis selector for [`pauli`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Pauli matrix in the computational basis |g> = (1,0), |e> = (0,1), with
/// sigma_z |g> = +|g> so that a `-Omega/2 sigma_z` term puts |g> lowest.
pub fn pauli(which: PauliAxis) -> OperatorMatrix {
    let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let i = C64::new(0.0, 1.0);
    let entries = match which {
        PauliAxis::X => ndarray::array![[z, o], [o, z]],
        PauliAxis::Y => ndarray::array![[z, -i], [i, z]],
        PauliAxis::Z => ndarray::array![[o, z], [z, -o]],
    };
    OperatorMatrix {
        entries,
        hermitian_hint: true,
    }
}

/// Spin-j operators with j = (d-1)/2 in the qudit number basis |0..d-1>.
///
/// Jz = diag(-j, -j+1, ..., j); Jplus has the standard matrix elements
/// sqrt(j(j+1) - m(m+1)); Jminus is the adjoint of Jplus. The level |0> is
/// the lowest-energy qudit state under a `+Omega Jz` term.
pub fn spin_operators(d: usize) -> Result<(OperatorMatrix, OperatorMatrix, OperatorMatrix)> {
    if d < 2 {
        return Err(RabiError::InvalidDimension(format!(
            "spin operators need d >= 2, got {d}"
        )));
    }
    let j = (d as f64 - 1.0) / 2.0;
    let jz = OperatorMatrix::diagonal(&(0..d).map(|k| -j + k as f64).collect::<Vec<_>>());
    let mut jp = Array2::<C64>::zeros((d, d));
    for k in 0..d - 1 {
        let m = -j + k as f64;
        jp[(k + 1, k)] = C64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jplus = OperatorMatrix {
        entries: jp,
        hermitian_hint: false,
    };
    let jminus = jplus.adjoint();
    Ok((jz, jplus, jminus))
}

/// Truncated boson ladder operators on the (n_max+1)-dimensional Fock space:
/// a|k> = sqrt(k)|k-1>, n = adag a = diag(0..n_max).
pub fn boson_operators(n_max: usize) -> (OperatorMatrix, OperatorMatrix, OperatorMatrix) {
    let dim = n_max + 1;
    let mut a = Array2::<C64>::zeros((dim, dim));
    for k in 1..dim {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    let a = OperatorMatrix {
        entries: a,
        hermitian_hint: false,
    };
    let adag = a.adjoint();
    let n = OperatorMatrix::diagonal(&(0..dim).map(|k| k as f64).collect::<Vec<_>>());
    (a, adag, n)
}

/// Displacement operator D(alpha) = exp[alpha (adag - a)] in the truncated
/// Fock basis, computed by diagonalizing the Hermitian generator i(adag - a)
/// and exponentiating its eigenvalues. Unitary up to truncation error.
///
/// Logs a warning when alpha^2 > n_max/4: displaced vacua then put
/// non-negligible weight near the cutoff.
pub fn displacement(alpha: f64, n_max: usize) -> OperatorMatrix {
    if alpha * alpha > n_max as f64 / 4.0 {
        log::warn!(
            "displacement(alpha={alpha}) may be truncation-limited at n_max={n_max} \
             (alpha^2 > n_max/4)"
        );
    }
    let dim = n_max + 1;
    // k = i (adag - a), Hermitian; D(alpha) = exp(-i alpha k).
    let mut k = Array2::<C64>::zeros((dim, dim));
    for m in 1..dim {
        let s = (m as f64).sqrt();
        k[(m, m - 1)] = C64::new(0.0, s);
        k[(m - 1, m)] = C64::new(0.0, -s);
    }
    let (vals, vecs) = linalg::zheevd(&k).expect("displacement generator is Hermitian");
    let phases: Array1<C64> = vals
        .iter()
        .map(|&l| (-C64::i() * alpha * l).exp())
        .collect();
    let mut scaled = vecs.clone();
    for (mut col, ph) in scaled.columns_mut().into_iter().zip(phases.iter()) {
        col.mapv_inplace(|z| z * ph);
    }
    let vdag = Array2::from_shape_fn((dim, dim), |(i, j)| vecs[(j, i)].conj());
    OperatorMatrix {
        entries: scaled.dot(&vdag),
        hermitian_hint: false,
    }
}

/// Column `n` of the displacement operator, i.e. the Fock-basis expansion of
/// the displaced number state D(alpha)|n> in the truncated space.
pub fn build_displacement_column(alpha: f64, n_max: usize, n: usize) -> Array1<C64> {
    displacement(alpha, n_max).entries().column(n).to_owned()
}

/// Tensor product with fixed factor order: the first operand varies slowest.
/// With operands (qubit, qudit, oscillator) the flattened index is
/// (s*d + m)*(n_max+1) + n.
pub fn kron(ops: &[&OperatorMatrix]) -> Result<OperatorMatrix> {
    let first = ops
        .first()
        .ok_or_else(|| RabiError::InvalidArgument("kron of no operands".into()))?;
    let mut entries = first.entries.clone();
    let mut hint = first.hermitian_hint;
    for op in &ops[1..] {
        entries = nd_kron(&entries, &op.entries);
        hint = hint && op.hermitian_hint;
    }
    Ok(OperatorMatrix {
        entries,
        hermitian_hint: hint,
    })
}

/// Result of a Hermitian eigendecomposition: ascending eigenvalues and the
/// matrix whose k-th column is the k-th eigenvector.
#[derive(Debug, Clone)]
pub struct EighDecomposition {
    pub values: Array1<f64>,
    pub vectors: Array2<C64>,
}

impl EighDecomposition {
    /// k-th eigenvector as an owned amplitude vector.
    pub fn vector(&self, k: usize) -> Array1<C64> {
        self.vectors.column(k).to_owned()
    }
}

/// Hermitian eigendecomposition with deterministic output.
///
/// The input is verified Hermitian to [`EIGH_HERMITICITY_TOL`]. Eigenvalues
/// come back ascending; each eigenvector is rotated so its first component
/// with magnitude above 1e-8 is real positive, fixing the phase across runs
/// and platforms.
pub fn eigh(m: &OperatorMatrix) -> Result<EighDecomposition> {
    let defect = linalg::hermiticity_defect(&m.entries);
    if defect > EIGH_HERMITICITY_TOL {
        return Err(RabiError::ContractViolation(format!(
            "eigh requires a Hermitian matrix: max |M - M^dag| = {defect:.3e}"
        )));
    }
    let (vals, mut vecs) = linalg::zheevd(&m.entries)?;
    for mut col in vecs.columns_mut() {
        if let Some(pivot) = col.iter().find(|z| z.norm() > PHASE_PIVOT_TOL) {
            let phase = pivot / pivot.norm();
            let rot = phase.conj();
            col.mapv_inplace(|z| z * rot);
        }
    }
    Ok(EighDecomposition {
        values: Array1::from(vals),
        vectors: vecs,
    })
}

/// Normalized complex state vector over an ordered tensor-product layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Array1<C64>,
    layout: Vec<usize>,
}

impl StateVector {
    /// Wrap amplitudes that are already normalized (checked to
    /// [`STATE_NORM_TOL`]) over the given factor layout.
    pub fn new(amplitudes: Array1<C64>, layout: Vec<usize>) -> Result<Self> {
        let dim: usize = layout.iter().product();
        if layout.is_empty() || dim != amplitudes.len() {
            return Err(RabiError::DimensionMismatch(format!(
                "layout {layout:?} does not match amplitude length {}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(RabiError::ContractViolation(format!(
                "state norm {norm} deviates from 1 beyond {STATE_NORM_TOL:.0e}"
            )));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Normalize and wrap; errors on a (near-)zero vector.
    pub fn normalized(amplitudes: Array1<C64>, layout: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(RabiError::InvalidArgument(
                "cannot normalize a zero vector".into(),
            ));
        }
        Self::new(amplitudes.mapv(|z| z / norm), layout)
    }

    /// Product-basis state |i_0 i_1 ...> for the given layout.
    pub fn basis_state(layout: Vec<usize>, indices: &[usize]) -> Result<Self> {
        if indices.len() != layout.len() {
            return Err(RabiError::InvalidArgument(format!(
                "basis indices {indices:?} do not match layout {layout:?}"
            )));
        }
        let mut flat = 0usize;
        for (ix, (&i, &d)) in indices.iter().zip(layout.iter()).enumerate() {
            if i >= d {
                return Err(RabiError::InvalidArgument(format!(
                    "basis index {i} out of range for factor {ix} of size {d}"
                )));
            }
            flat = flat * d + i;
        }
        let dim: usize = layout.iter().product();
        let mut amplitudes = Array1::zeros(dim);
        amplitudes[flat] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes, layout })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn layout(&self) -> &[usize] {
        &self.layout
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Inner product <self|other>.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(RabiError::DimensionMismatch(format!(
                "inner product dims {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Pure-state density matrix |psi><psi|.
    pub fn to_density(&self) -> DensityMatrix {
        let n = self.dim();
        let entries = Array2::from_shape_fn((n, n), |(i, j)| {
            self.amplitudes[i] * self.amplitudes[j].conj()
        });
        DensityMatrix { entries }
    }
}

/// Overlap magnitude |<phi|psi>| between two pure states (not squared).
pub fn fidelity(phi: &StateVector, psi: &StateVector) -> Result<f64> {
    Ok(phi.inner(psi)?.norm())
}

/// Hermitian, unit-trace density matrix. Positive semidefiniteness is a
/// mathematical consequence of the constructors used in this crate and can
/// be checked explicitly with [`DensityMatrix::min_eigenvalue`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Array2<C64>,
}

impl DensityMatrix {
    pub fn new(entries: Array2<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(RabiError::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let defect = linalg::hermiticity_defect(&entries);
        if defect > HERMITICITY_TOL {
            return Err(RabiError::ContractViolation(format!(
                "density matrix not Hermitian: defect {defect:.3e}"
            )));
        }
        let trace: C64 = entries.diag().iter().sum();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(RabiError::ContractViolation(format!(
                "density matrix trace {trace} deviates from 1"
            )));
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().iter().sum()
    }

    /// Smallest eigenvalue; useful to verify positivity in tests.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let op = OperatorMatrix {
            entries: self.entries.clone(),
            hermitian_hint: true,
        };
        Ok(eigh(&op)?.values[0])
    }

    /// View as an operator (Hermitian by construction).
    pub fn as_operator(&self) -> OperatorMatrix {
        OperatorMatrix {
            entries: self.entries.clone(),
            hermitian_hint: true,
        }
    }
}

fn check_layout(dim: usize, layout: &[usize]) -> Result<()> {
    let prod: usize = layout.iter().product();
    if layout.is_empty() || prod != dim {
        return Err(RabiError::DimensionMismatch(format!(
            "layout {layout:?} does not factor dimension {dim}"
        )));
    }
    Ok(())
}

/// Row-major strides of a multi-factor layout.
fn strides(layout: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; layout.len()];
    for k in (0..layout.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * layout[k + 1];
    }
    s
}

/// Partial trace over the factors *not* listed in `keep`.
///
/// `keep` must be a strictly increasing, non-empty list of factor indices;
/// the kept factors retain their original order.
pub fn partial_trace(
    rho: &DensityMatrix,
    layout: &[usize],
    keep: &[usize],
) -> Result<DensityMatrix> {
    check_layout(rho.dim(), layout)?;
    if keep.is_empty() {
        return Err(RabiError::InvalidArgument(
            "partial_trace: keep set is empty".into(),
        ));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || *keep.last().unwrap() >= layout.len() {
        return Err(RabiError::InvalidArgument(format!(
            "partial_trace: keep {keep:?} must be strictly increasing within 0..{}",
            layout.len()
        )));
    }
    let st = strides(layout);
    let traced: Vec<usize> = (0..layout.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| layout[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let tr_dim: usize = traced.iter().map(|&k| layout[k]).product();

    // Offset of a flattened kept multi-index within the full space.
    let kept_offset = |mut flat: usize| -> usize {
        let mut off = 0;
        for (pos, &k) in keep.iter().enumerate().rev() {
            let d = kept_dims[pos];
            off += (flat % d) * st[k];
            flat /= d;
        }
        off
    };
    let traced_offset = |mut flat: usize| -> usize {
        let mut off = 0;
        for &k in traced.iter().rev() {
            let d = layout[k];
            off += (flat % d) * st[k];
            flat /= d;
        }
        off
    };

    let rho_flat = rho
        .entries
        .as_slice()
        .expect("density matrix is contiguous");
    let full_dim = rho.dim();
    let mut out = Array2::<C64>::zeros((out_dim, out_dim));
    for i in 0..out_dim {
        let oi = kept_offset(i);
        for j in 0..out_dim {
            let oj = kept_offset(j);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..tr_dim {
                let ot = traced_offset(t);
                acc += rho_flat[(oi + ot) * full_dim + (oj + ot)];
            }
            out[(i, j)] = acc;
        }
    }
    DensityMatrix::new(out)
}

/// Partial transpose of one factor. The output is Hermitian and
/// trace-preserving; applying it twice restores the input exactly.
pub fn partial_transpose(
    rho: &DensityMatrix,
    layout: &[usize],
    which: usize,
) -> Result<OperatorMatrix> {
    check_layout(rho.dim(), layout)?;
    if which >= layout.len() {
        return Err(RabiError::InvalidArgument(format!(
            "partial_transpose: factor {which} out of range for layout {layout:?}"
        )));
    }
    let st = strides(layout);
    let dim = rho.dim();
    let dw = layout[which];
    let sw = st[which];
    let mut out = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim {
        let iw = (i / sw) % dw;
        let ibase = i - iw * sw;
        for j in 0..dim {
            let jw = (j / sw) % dw;
            let jbase = j - jw * sw;
            out[(ibase + jw * sw, jbase + iw * sw)] = rho.entries[(i, j)];
        }
    }
    Ok(OperatorMatrix {
        entries: out,
        hermitian_hint: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pauli_matrices_standard() {
        let x = pauli(PauliAxis::X);
        let y = pauli(PauliAxis::Y);
        let z = pauli(PauliAxis::Z);
        assert_eq!(x.entries()[(0, 1)], c(1.0, 0.0));
        assert_eq!(x.entries()[(1, 0)], c(1.0, 0.0));
        assert_eq!(y.entries()[(0, 1)], c(0.0, -1.0));
        assert_eq!(y.entries()[(1, 0)], c(0.0, 1.0));
        assert_eq!(z.entries()[(0, 0)], c(1.0, 0.0));
        assert_eq!(z.entries()[(1, 1)], c(-1.0, 0.0));
    }

    #[test]
    fn spin_half_ladder_sum_is_sigma_x() {
        let (_, jp, jm) = spin_operators(2).unwrap();
        let sum = &jp + &jm;
        assert_eq!(sum.entries(), pauli(PauliAxis::X).entries());
    }

    #[test]
    fn spin_one_coupling_eigenvalues() {
        let (_, jp, jm) = spin_operators(3).unwrap();
        let jx2 = OperatorMatrix::hermitian((&jp + &jm).entries().clone()).unwrap();
        let dec = eigh(&jx2).unwrap();
        for (got, want) in dec.values.iter().zip([-2.0, 0.0, 2.0]) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-12);
        }
    }

    #[test]
    fn spin_three_halves_coupling_eigenvalues() {
        let (_, jp, jm) = spin_operators(4).unwrap();
        let jx2 = OperatorMatrix::hermitian((&jp + &jm).entries().clone()).unwrap();
        let dec = eigh(&jx2).unwrap();
        for (got, want) in dec.values.iter().zip([-3.0, -1.0, 1.0, 3.0]) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-12);
        }
    }

    #[test]
    fn spin_rejects_d_below_two() {
        assert!(matches!(
            spin_operators(1),
            Err(RabiError::InvalidDimension(_))
        ));
    }

    #[test]
    fn boson_two_level_truncation() {
        let (a, _, _) = boson_operators(1);
        assert_eq!(
            a.entries(),
            &array![[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]
        );
    }

    #[test]
    fn number_operator_is_adag_a() {
        let (a, adag, n) = boson_operators(2);
        let prod = adag.dot(&a);
        for (x, y) in prod.entries().iter().zip(n.entries().iter()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn truncated_commutator_breaks_at_cutoff() {
        // [a, adag] = 1 except the last diagonal entry, which the truncation
        // turns into -n_max.
        let (a, adag, _) = boson_operators(2);
        let comm = &a.dot(&adag) - &adag.dot(&a);
        let expect = OperatorMatrix::diagonal(&[1.0, 1.0, -2.0]);
        for (x, y) in comm.entries().iter().zip(expect.entries().iter()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn displacement_at_zero_is_identity() {
        let d = displacement(0.0, 10);
        let id = OperatorMatrix::identity(11);
        for (x, y) in d.entries().iter().zip(id.entries().iter()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn displaced_vacuum_overlap_matches_closed_form() {
        // <0|D(alpha)|0> = exp(-alpha^2/2); frozen at alpha = 0.5.
        let d = displacement(0.5, 30);
        assert_abs_diff_eq!(d.entries()[(0, 0)].re, 0.8824969025845955, epsilon = 1e-10);
        assert!(d.entries()[(0, 0)].im.abs() < 1e-12);
    }

    #[test]
    fn displaced_vacuum_has_poisson_statistics() {
        // |<k|D(alpha)|0>|^2 = exp(-alpha^2) alpha^(2k) / k!
        let alpha = 0.8f64;
        let d = displacement(alpha, 30);
        let mean = alpha * alpha;
        let mut factorial = 1.0f64;
        for k in 0..6 {
            if k > 0 {
                factorial *= k as f64;
            }
            let weight = (-mean).exp() * mean.powi(k as i32) / factorial;
            assert_abs_diff_eq!(d.entries()[(k, 0)].norm_sqr(), weight, epsilon = 1e-10);
        }
    }

    #[test]
    fn displacement_inverse() {
        let alpha = 2.0;
        let prod = displacement(alpha, 40).dot(&displacement(-alpha, 40));
        let id = OperatorMatrix::identity(41);
        let worst = prod
            .entries()
            .iter()
            .zip(id.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "D(a)D(-a) deviates from identity by {worst}");
    }

    #[test]
    fn kron_identities() {
        let i2 = OperatorMatrix::identity(2);
        let i3 = OperatorMatrix::identity(3);
        let prod = kron(&[&i2, &i3]).unwrap();
        assert_eq!(prod.entries(), OperatorMatrix::identity(6).entries());
    }

    #[test]
    fn kron_layout_puts_first_factor_slowest() {
        // (sigma_z x I2) at flattened index (s, m): +1 for s = 0.
        let sz = pauli(PauliAxis::Z);
        let i2 = OperatorMatrix::identity(2);
        let op = kron(&[&sz, &i2]).unwrap();
        let diag: Vec<f64> = op.entries().diag().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn kron_sigma_x_pair_is_antidiagonal() {
        let sx = pauli(PauliAxis::X);
        let op = kron(&[&sx, &sx]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i + j == 3 { 1.0 } else { 0.0 };
                assert_eq!(op.entries()[(i, j)], c(want, 0.0));
            }
        }
    }

    #[test]
    fn kron_of_nothing_errors() {
        assert!(kron(&[]).is_err());
    }

    #[test]
    fn eigh_diagonal_sorts_ascending() {
        let m = OperatorMatrix::diagonal(&[3.0, 1.0, 2.0]);
        let dec = eigh(&m).unwrap();
        assert_eq!(dec.values.to_vec(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigh_sigma_x_textbook() {
        let dec = eigh(&pauli(PauliAxis::X)).unwrap();
        assert_abs_diff_eq!(dec.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dec.values[1], 1.0, epsilon = 1e-14);
        let s = 1.0 / 2.0f64.sqrt();
        // Phase convention: first significant component real positive.
        assert_abs_diff_eq!(dec.vectors[(0, 0)].re, s, epsilon = 1e-12);
        assert_abs_diff_eq!(dec.vectors[(1, 0)].re, -s, epsilon = 1e-12);
        assert_abs_diff_eq!(dec.vectors[(0, 1)].re, s, epsilon = 1e-12);
        assert_abs_diff_eq!(dec.vectors[(1, 1)].re, s, epsilon = 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let (a, _, _) = boson_operators(3);
        assert!(matches!(eigh(&a), Err(RabiError::ContractViolation(_))));
    }

    fn random_hermitian(n: usize, seed: u64) -> OperatorMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw = Array2::from_shape_fn((n, n), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let herm = Array2::from_shape_fn((n, n), |(i, j)| 0.5 * (raw[(i, j)] + raw[(j, i)].conj()));
        OperatorMatrix::hermitian(herm).unwrap()
    }

    #[test]
    fn eigh_round_trip_small() {
        let m = random_hermitian(8, 7);
        let dec = eigh(&m).unwrap();
        let n = m.dim();
        let mut rebuilt = Array2::<C64>::zeros((n, n));
        for k in 0..n {
            let v = dec.vectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    rebuilt[(i, j)] += dec.values[k] * v[i] * v[j].conj();
                }
            }
        }
        let worst = rebuilt
            .iter()
            .zip(m.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9);
    }

    #[test]
    fn eigh_round_trip_dim_400() {
        // ||V L V^dag - M||_max <= ||M V - V L||_F for unitary V.
        let m = random_hermitian(400, 41);
        let dec = eigh(&m).unwrap();
        let mv = m.entries().dot(&dec.vectors);
        let mut frob = 0.0f64;
        for k in 0..400 {
            for i in 0..400 {
                frob += (mv[(i, k)] - dec.values[k] * dec.vectors[(i, k)]).norm_sqr();
            }
        }
        assert!(frob.sqrt() < 1e-9, "residual {:.3e}", frob.sqrt());
    }

    #[test]
    fn hermitian_sum_closure() {
        let sz = pauli(PauliAxis::Z);
        let sx = pauli(PauliAxis::X);
        let h = hermitian_sum(&[(0.3, &sz), (-1.7, &sx)]).unwrap();
        assert!(h.hermitian_hint());
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn state_basis_and_fidelity() {
        let psi = StateVector::basis_state(vec![2, 2], &[0, 1]).unwrap();
        assert_eq!(psi.amplitudes()[1], c(1.0, 0.0));
        assert_abs_diff_eq!(fidelity(&psi, &psi).unwrap(), 1.0, epsilon = 1e-15);

        let phi = StateVector::basis_state(vec![2, 2], &[1, 0]).unwrap();
        assert_eq!(fidelity(&psi, &phi).unwrap(), 0.0);

        let s = 1.0 / 2.0f64.sqrt();
        let plus = StateVector::new(array![c(s, 0.0), c(s, 0.0)], vec![2]).unwrap();
        let zero = StateVector::basis_state(vec![2], &[0]).unwrap();
        assert_abs_diff_eq!(fidelity(&zero, &plus).unwrap(), s, epsilon = 1e-15);
    }

    #[test]
    fn fidelity_rejects_dim_mismatch() {
        let a = StateVector::basis_state(vec![2], &[0]).unwrap();
        let b = StateVector::basis_state(vec![3], &[0]).unwrap();
        assert!(fidelity(&a, &b).is_err());
    }

    fn bell_state() -> StateVector {
        let s = 1.0 / 2.0f64.sqrt();
        StateVector::new(
            array![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)],
            vec![2, 2],
        )
        .unwrap()
    }

    #[test]
    fn partial_trace_product_state() {
        let psi = StateVector::basis_state(vec![2, 2], &[0, 1]).unwrap();
        let reduced = partial_trace(&psi.to_density(), &[2, 2], &[0]).unwrap();
        assert_eq!(reduced.entries()[(0, 0)], c(1.0, 0.0));
        assert_eq!(reduced.entries()[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn partial_trace_bell_is_maximally_mixed() {
        let reduced = partial_trace(&bell_state().to_density(), &[2, 2], &[0]).unwrap();
        assert_abs_diff_eq!(reduced.entries()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(reduced.entries()[(1, 1)].re, 0.5, epsilon = 1e-15);
        assert!(reduced.entries()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn partial_trace_keep_all_is_identity_map() {
        let rho = bell_state().to_density();
        let same = partial_trace(&rho, &[2, 2], &[0, 1]).unwrap();
        assert_eq!(same.entries(), rho.entries());
    }

    #[test]
    fn partial_trace_rejects_bad_keep() {
        let rho = bell_state().to_density();
        assert!(partial_trace(&rho, &[2, 2], &[]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[2]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[1, 0]).is_err());
    }

    #[test]
    fn partial_transpose_factorized() {
        // rho_A x rho_B with complex off-diagonals -> rho_A x rho_B^T.
        let a = array![[c(0.7, 0.0), c(0.1, 0.2)], [c(0.1, -0.2), c(0.3, 0.0)]];
        let b = array![[c(0.6, 0.0), c(0.0, 0.3)], [c(0.0, -0.3), c(0.4, 0.0)]];
        let rho = DensityMatrix::new(nd_kron(&a, &b)).unwrap();
        let pt = partial_transpose(&rho, &[2, 2], 1).unwrap();
        let bt = b.t().to_owned();
        let want = nd_kron(&a, &bt);
        for (x, y) in pt.entries().iter().zip(want.iter()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn partial_transpose_bell_eigenvalues() {
        let pt = partial_transpose(&bell_state().to_density(), &[2, 2], 1).unwrap();
        let dec = eigh(&pt).unwrap();
        let want = [-0.5, 0.5, 0.5, 0.5];
        for (got, w) in dec.values.iter().zip(want) {
            assert_abs_diff_eq!(got, &w, epsilon = 1e-14);
        }
    }

    #[test]
    fn partial_transpose_is_involutive_and_trace_preserving() {
        let rho = bell_state().to_density();
        let pt = partial_transpose(&rho, &[2, 2], 1).unwrap();
        let tr: C64 = pt.entries().diag().iter().sum();
        assert!((tr - rho.trace()).norm() < 1e-15);
        let back = partial_transpose(
            &DensityMatrix {
                entries: pt.entries().clone(),
            },
            &[2, 2],
            1,
        )
        .unwrap();
        assert_eq!(back.entries(), rho.entries());
    }

    #[test]
    fn density_matrix_rejects_bad_trace() {
        let m = array![[c(0.9, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.3, 0.0)]];
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn three_factor_partial_trace_matches_two_step() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let layout = vec![2usize, 3, 4];
        let dim: usize = layout.iter().product();
        let raw = Array1::from_shape_fn(dim, |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let psi = StateVector::normalized(raw, layout.clone()).unwrap();
        let rho = psi.to_density();
        let direct = partial_trace(&rho, &layout, &[0, 1]).unwrap();
        let step1 = partial_trace(&rho, &layout, &[0, 1]).unwrap();
        assert_eq!(direct.entries(), step1.entries());
        // Trace preserved.
        assert!((direct.trace().re - 1.0).abs() < 1e-12);
    }
}
