//! Truncated Fock-space computations for the zero-temperature channel.
//!
//! At `N = 0` the channel is pure loss with transmissivity `eta = e^-gamma`;
//! populated levels only decay, so a probe supported on `{|0>, ..., |d-1>}`
//! stays there and truncation is exact.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

type C = Complex64;

/// Bipartite pure state `sum psi_{mk} |m>_a |k>_b` on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureFockState {
    amplitudes: DMatrix<C>,
}

impl PureFockState {
    /// Requires unit norm within `1e-12`.
    pub fn new(amplitudes: DMatrix<C>) -> Result<Self> {
        if amplitudes.nrows() == 0 || amplitudes.ncols() == 0 {
            return Err(Error::Domain("Fock cutoffs must be >= 1".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes the given amplitudes.
    pub fn normalized(amplitudes: DMatrix<C>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Self::new(amplitudes / C::new(norm, 0.0))
    }

    /// `|psi_a> (x) |psi_b>`, normalized.
    pub fn product(a: &[C], b: &[C]) -> Result<Self> {
        let m = DMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j]);
        Self::normalized(m)
    }

    pub fn dim_a(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.amplitudes.ncols()
    }

    pub fn amplitudes(&self) -> &DMatrix<C> {
        &self.amplitudes
    }

    /// `<a^dag a>` of the channel mode.
    pub fn mean_photons_a(&self) -> f64 {
        self.amplitudes
            .row_iter()
            .enumerate()
            .map(|(m, row)| m as f64 * row.norm_squared())
            .sum()
    }

    /// Row-major state vector, basis index `m * dim_b + k`.
    pub fn to_vector(&self) -> DVector<C> {
        flatten(&self.amplitudes)
    }

    /// Embeds the state into larger cutoffs.
    pub fn padded(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a < self.dim_a() || dim_b < self.dim_b() {
            return Err(Error::Domain("padding cannot shrink the cutoffs".into()));
        }
        let mut m = DMatrix::zeros(dim_a, dim_b);
        m.view_mut((0, 0), (self.dim_a(), self.dim_b()))
            .copy_from(&self.amplitudes);
        Ok(Self { amplitudes: m })
    }
}

fn flatten(m: &DMatrix<C>) -> DVector<C> {
    DVector::from_iterator(m.len(), m.transpose().iter().cloned())
}

/// Density matrix on `C^{dim_a} (x) C^{dim_b}`, basis index `m * dim_b + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    pub dim_a: usize,
    pub dim_b: usize,
    pub matrix: DMatrix<C>,
}

impl FockDensityMatrix {
    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|x| x.re).sum()
    }

    pub fn mean_photons_a(&self) -> f64 {
        let d = self.matrix.diagonal();
        (0..self.dim_a * self.dim_b)
            .map(|i| (i / self.dim_b) as f64 * d[i].re)
            .sum()
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

fn check_gamma(gamma: f64, strict: bool) -> Result<()> {
    if !gamma.is_finite() || gamma < 0.0 || (strict && gamma == 0.0) {
        let bound = if strict { "> 0" } else { ">= 0" };
        return Err(Error::Domain(format!("gamma must be finite and {bound}, got {gamma}")));
    }
    Ok(())
}

/// Matrix element `<m-k|A_k|m> = sqrt(C(m,k)) (1-eta)^{k/2} eta^{(m-k)/2}`.
fn kraus_element(lnf: &[f64], m: usize, k: usize, gamma: f64) -> f64 {
    if k == 0 {
        return (-0.5 * gamma * m as f64).exp();
    }
    let loss = -(-gamma).exp_m1();
    if loss == 0.0 {
        return 0.0;
    }
    let ln_binom = lnf[m] - lnf[k] - lnf[m - k];
    (0.5 * ln_binom + 0.5 * k as f64 * loss.ln() - 0.5 * gamma * (m - k) as f64).exp()
}

/// Kraus operators `A_0 .. A_{dim-1}` of pure loss on a `dim`-level cutoff.
pub fn loss_kraus(gamma: f64, dim: usize) -> Result<Vec<DMatrix<f64>>> {
    check_gamma(gamma, false)?;
    if dim == 0 {
        return Err(Error::Domain("cutoff must be >= 1".into()));
    }
    let lnf = ln_factorials(dim);
    Ok((0..dim)
        .map(|k| {
            let mut a = DMatrix::zeros(dim, dim);
            for m in k..dim {
                a[(m - k, m)] = kraus_element(&lnf, m, k, gamma);
            }
            a
        })
        .collect())
}

/// `dA_k / dgamma`, from `d eta / d gamma = -eta`:
/// each element is multiplied by `(k/2) eta/(1-eta) - (m-k)/2`.
pub fn loss_kraus_derivative(gamma: f64, dim: usize) -> Result<Vec<DMatrix<f64>>> {
    check_gamma(gamma, true)?;
    let ratio = 1.0 / gamma.exp_m1(); // eta / (1 - eta)
    let mut ops = loss_kraus(gamma, dim)?;
    for (k, a) in ops.iter_mut().enumerate() {
        for m in k..dim {
            a[(m - k, m)] *= 0.5 * k as f64 * ratio - 0.5 * (m - k) as f64;
        }
    }
    Ok(ops)
}

/// `vec(A psi)` for a Kraus-shaped `A`, whose only nonzero diagonal is
/// `A[m-k, m]`.
fn apply_shift(a: &DMatrix<f64>, k: usize, psi: &DMatrix<C>) -> DVector<C> {
    let (da, db) = psi.shape();
    let mut out = DVector::zeros(da * db);
    for m in k..da {
        let coef = a[(m - k, m)];
        if coef == 0.0 {
            continue;
        }
        for j in 0..db {
            out[(m - k) * db + j] = psi[(m, j)] * coef;
        }
    }
    out
}

/// Columns `vec(A_k psi)` and `vec(dA_k psi)`.
fn kraus_columns(state: &PureFockState, gamma: f64, with_derivative: bool) -> Result<(DMatrix<C>, Option<DMatrix<C>>)> {
    let da = state.dim_a();
    let len = da * state.dim_b();
    let columns = |ops: Vec<DMatrix<f64>>| {
        let mut w = DMatrix::zeros(len, da);
        for (k, a) in ops.iter().enumerate() {
            w.set_column(k, &apply_shift(a, k, &state.amplitudes));
        }
        w
    };
    let w = columns(loss_kraus(gamma, da)?);
    let dw = if with_derivative {
        Some(columns(loss_kraus_derivative(gamma, da)?))
    } else {
        None
    };
    Ok((w, dw))
}

/// `rho = sum_k (A_k (x) I) |psi><psi| (A_k (x) I)^dag`.
pub fn propagate(state: &PureFockState, gamma: f64) -> Result<FockDensityMatrix> {
    let (w, _) = kraus_columns(state, gamma, false)?;
    Ok(FockDensityMatrix {
        dim_a: state.dim_a(),
        dim_b: state.dim_b(),
        matrix: &w * w.adjoint(),
    })
}

/// `d rho / d gamma` assembled from the analytic Kraus derivatives.
pub fn density_derivative(state: &PureFockState, gamma: f64) -> Result<DMatrix<C>> {
    let (w, dw) = kraus_columns(state, gamma, true)?;
    let dw = dw.expect("derivative requested");
    let half = &dw * w.adjoint();
    Ok(&half + half.adjoint())
}

/// Zeroes entries below `1e-40` of the largest one. The Hermitian
/// eigensolver underflows to NaN on entries of order `1e-80` relative, which
/// appear for high cutoffs.
fn flush_tiny(mut m: DMatrix<C>) -> DMatrix<C> {
    let floor = 1e-40 * m.iter().map(|x| x.norm()).fold(0.0, f64::max);
    m.iter_mut()
        .filter(|x| x.norm() < floor)
        .for_each(|x| *x = C::new(0.0, 0.0));
    m
}

/// `2 sum_{jk} |<e_j|d rho|e_k>|^2 / (l_j + l_k)` over the eigenbasis of `rho`,
/// skipping pairs with `l_j + l_k <= 1e-12 tr rho`.
pub fn spectral_qfi(rho: &DMatrix<C>, drho: &DMatrix<C>) -> f64 {
    let eig = flush_tiny(rho.clone()).symmetric_eigen();
    let eps = 1e-12 * eig.eigenvalues.iter().sum::<f64>();
    let x = eig.eigenvectors.adjoint() * drho * &eig.eigenvectors;
    let lam = &eig.eigenvalues;
    let mut j = 0.0;
    for a in 0..lam.len() {
        for b in 0..lam.len() {
            let s = lam[a] + lam[b];
            if s > eps {
                j += 2.0 * x[(a, b)].norm_sqr() / s;
            }
        }
    }
    j
}

/// Damping QFI at `N = 0` for a pure bipartite probe.
///
/// The output has rank at most `dim_a`, so the eigendecomposition is done on
/// the Gram matrix of the Kraus columns. Pairs inside the support use the
/// usual spectral sum; pairs with one index in the kernel contribute
/// `4 <e_j| drho (1 - Pi) drho |e_j> / l_j`. Eigenvalues below
/// `1e-12 tr rho` are treated as kernel.
pub fn qfi_gamma_fock(state: &PureFockState, gamma: f64) -> Result<f64> {
    check_gamma(gamma, true)?;
    let (w, dw) = kraus_columns(state, gamma, true)?;
    let dw = dw.expect("derivative requested");
    let eig = flush_tiny(w.adjoint() * &w).symmetric_eigen();
    let eps = 1e-12 * eig.eigenvalues.iter().sum::<f64>();
    let support: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > eps)
        .collect();
    if support.is_empty() {
        return Ok(0.0);
    }
    let lam: Vec<f64> = support.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut basis = DMatrix::<C>::zeros(w.nrows(), support.len());
    for (col, &i) in support.iter().enumerate() {
        let u = eig.eigenvectors.column(i);
        basis.set_column(col, &((&w * u) / C::new(lam[col].sqrt(), 0.0)));
    }
    let drho_basis = &dw * (w.adjoint() * &basis) + &w * (dw.adjoint() * &basis);
    let x = basis.adjoint() * &drho_basis;

    let mut j = 0.0;
    for a in 0..lam.len() {
        for b in 0..lam.len() {
            j += 2.0 * x[(a, b)].norm_sqr() / (lam[a] + lam[b]);
        }
        let outside = drho_basis.column(a).norm_squared() - x.column(a).norm_squared();
        j += 4.0 * outside.max(0.0) / lam[a];
    }
    Ok(j)
}

/// Seed of sample `index` derived from the master seed: `splitmix64(seed ^ index)`.
pub fn sample_seed(seed: u64, index: u64) -> u64 {
    let mut z = (seed ^ index).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Two independent standard normals by Box–Muller.
fn box_muller<R: Rng>(rng: &mut R) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = std::f64::consts::TAU * u2;
    (r * phi.cos(), r * phi.sin())
}

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn sample_haar_state(dim_a: usize, dim_b: usize, seed: u64) -> Result<PureFockState> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::Domain("Fock cutoffs must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // column-major fill order is part of the determinism contract
    let m = DMatrix::from_fn(dim_a, dim_b, |_, _| {
        let (re, im) = box_muller(&mut rng);
        C::new(re, im)
    });
    PureFockState::normalized(m)
}

/// `(1/sqrt d) sum_k |k>|k>` on a `d x d` cutoff.
pub fn max_entangled(d: usize) -> Result<PureFockState> {
    if d == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    let amp = C::new(1.0 / (d as f64).sqrt(), 0.0);
    Ok(PureFockState {
        amplitudes: DMatrix::from_fn(d, d, |i, j| if i == j { amp } else { C::new(0.0, 0.0) }),
    })
}

/// Von Neumann entropy (nats) of the reduced state of mode `a`.
pub fn entanglement_entropy(state: &PureFockState) -> f64 {
    let sv = state.amplitudes.clone().svd(false, false).singular_values;
    sv.iter()
        .map(|s| s * s)
        .filter(|&p| p >= 1e-15)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Truncated coherent state `|sqrt n>` on mode `a` (`dim_b = 1`), with the
/// probability mass lost to truncation.
pub fn truncated_coherent(n: f64, cutoff: usize) -> Result<(PureFockState, f64)> {
    check_truncation(n, cutoff)?;
    let lnf = ln_factorials(cutoff);
    let amps: Vec<f64> = (0..cutoff)
        .map(|m| {
            if n == 0.0 {
                if m == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-0.5 * n + 0.5 * m as f64 * n.ln() - 0.5 * lnf[m]).exp()
            }
        })
        .collect();
    finish_single(amps)
}

/// Truncated single-mode squeezed vacuum with `sinh^2 r = n`.
pub fn truncated_squeezed(n: f64, cutoff: usize) -> Result<(PureFockState, f64)> {
    check_truncation(n, cutoff)?;
    let lnf = ln_factorials(cutoff);
    let ln_cosh = 0.5 * (1.0 + n).ln();
    let ln_tanh = 0.5 * (n.ln() - (1.0 + n).ln());
    let amps: Vec<f64> = (0..cutoff)
        .map(|m| {
            if m % 2 == 1 {
                return 0.0;
            }
            let k = m / 2;
            if k == 0 {
                return (-0.5 * ln_cosh).exp();
            }
            if n == 0.0 {
                return 0.0;
            }
            (k as f64 * ln_tanh + 0.5 * lnf[m] - k as f64 * std::f64::consts::LN_2 - lnf[k] - 0.5 * ln_cosh).exp()
        })
        .collect();
    finish_single(amps)
}

/// Truncated two-mode squeezed vacuum `sum_m tanh^m r / cosh r |m,m>`, `sinh^2 r = n`.
pub fn truncated_tmsv(n: f64, cutoff: usize) -> Result<(PureFockState, f64)> {
    check_truncation(n, cutoff)?;
    let mut m = DMatrix::zeros(cutoff, cutoff);
    let mut mass = 0.0;
    for k in 0..cutoff {
        let p = if n == 0.0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (k as f64 * n.ln() - (k as f64 + 1.0) * n.ln_1p()).exp()
        };
        mass += p;
        m[(k, k)] = C::new(p.sqrt(), 0.0);
    }
    Ok((PureFockState::normalized(m)?, (1.0 - mass).max(0.0)))
}

fn check_truncation(n: f64, cutoff: usize) -> Result<()> {
    if !n.is_finite() || n < 0.0 {
        return Err(Error::Domain(format!("probe energy must be finite and >= 0, got {n}")));
    }
    if cutoff == 0 {
        return Err(Error::Domain("cutoff must be >= 1".into()));
    }
    Ok(())
}

fn finish_single(amps: Vec<f64>) -> Result<(PureFockState, f64)> {
    let mass: f64 = amps.iter().map(|a| a * a).sum();
    let m = DMatrix::from_iterator(amps.len(), 1, amps.into_iter().map(|a| C::new(a, 0.0)));
    Ok((PureFockState::normalized(m)?, (1.0 - mass).max(0.0)))
}

/// Origin of a scatter record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Random,
    MaxEntangled(usize),
    TmsvReference,
}

impl RecordKind {
    pub fn label(&self) -> String {
        match self {
            RecordKind::Random => "random".into(),
            RecordKind::MaxEntangled(d) => format!("max-ent-{d}"),
            RecordKind::TmsvReference => "tmsv".into(),
        }
    }
}

/// One point of the yield / efficiency / entanglement scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRecord {
    pub index: usize,
    pub kind: RecordKind,
    pub n_a: f64,
    pub j_gamma: f64,
    pub entropy: f64,
    /// `j_gamma / n_a`, and `0` for states with no photons in mode `a`.
    pub efficiency: f64,
}

impl ScatterRecord {
    fn new(index: usize, kind: RecordKind, n_a: f64, j_gamma: f64, entropy: f64) -> Self {
        let efficiency = if n_a > 0.0 { j_gamma / n_a } else { 0.0 };
        Self {
            index,
            kind,
            n_a,
            j_gamma,
            entropy,
            efficiency,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterConfig {
    pub samples: usize,
    pub gamma: f64,
    pub dim_a: usize,
    pub dim_b: usize,
    pub max_ent_dims: Vec<usize>,
    pub seed: u64,
}

/// Number of closed-form two-mode squeezed vacuum points on the reference line.
pub const REFERENCE_POINTS: usize = 32;

fn evaluate(state: &PureFockState, gamma: f64, index: usize, kind: RecordKind) -> Result<ScatterRecord> {
    let j = qfi_gamma_fock(state, gamma)?;
    Ok(ScatterRecord::new(
        index,
        kind,
        state.mean_photons_a(),
        j,
        entanglement_entropy(state),
    ))
}

/// Haar samples (indices `0..samples`, sample `i` seeded with
/// [`sample_seed`]`(seed, i)`), then one record per maximally entangled
/// dimension, then [`REFERENCE_POINTS`] points of the line `J = n/z` on
/// `(0, max n_a]` with the closed-form squeezed-vacuum entropy.
///
/// Records are ordered by index whatever the thread count.
pub fn scatter_experiment(config: &ScatterConfig) -> Result<Vec<ScatterRecord>> {
    if config.samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    check_gamma(config.gamma, true)?;
    let gamma = config.gamma;
    let mut records = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let state = sample_haar_state(config.dim_a, config.dim_b, sample_seed(config.seed, i as u64))?;
            evaluate(&state, gamma, i, RecordKind::Random)
        })
        .collect::<Result<Vec<_>>>()?;

    for &d in &config.max_ent_dims {
        let index = records.len();
        records.push(evaluate(&max_entangled(d)?, gamma, index, RecordKind::MaxEntangled(d))?);
    }

    let n_max = records.iter().map(|r| r.n_a).fold(0.0, f64::max);
    if n_max > 0.0 {
        let z = gamma.exp_m1();
        for p in 1..=REFERENCE_POINTS {
            let n = n_max * p as f64 / REFERENCE_POINTS as f64;
            let entropy = (n + 1.0) * n.ln_1p() - n * n.ln();
            let index = records.len();
            records.push(ScatterRecord::new(index, RecordKind::TmsvReference, n, n / z, entropy));
        }
    }
    Ok(records)
}
