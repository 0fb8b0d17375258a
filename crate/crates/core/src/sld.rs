//! Symmetric logarithmic derivatives of Gaussian channel outputs.
//!
//! The derivative of the channel with respect to `mu` acts on the output state
//! as the quadratic generator
//! `D_mu rho = alpha_{mu,ij} (R^i rho R^j - (R^j R^i) o rho)`
//! with `alpha_mu = kappa_mu P + i iota_mu Q` supported on the channel mode.
//! The SLD of a Gaussian state is the quadratic observable
//! `Lambda = c + v_k R~^k + M_kl R~^k o R~^l` with
//!
//! * `v = S^-1 dd`,
//! * `S M S + (1/4) Omega M Omega = dS / 2`, a dense `(2m)^2` linear system
//!   whose matrix `S (x) S - (1/4) Omega (x) Omega` is singular exactly when a
//!   symplectic eigenvalue equals `1/2`,
//! * `c = -tr[M S]` so that `<Lambda> = 0`.
//!
//! Expectations of products of quadratic observables are evaluated with the
//! Gaussian pairing rule on `m^{ij} = S^{ij} + (i/2) Omega^{ij}`.

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{apply_channel, symplectic_eigenvalues, ChannelParams, GaussianState};
use crate::yields::Parameter;

type C = Complex64;

const NEAR_PURE_GAP: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;

/// `Omega = w (+) ... (+) w` for `dim / 2` modes.
pub fn symplectic_form(dim: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        o[(2 * k, 2 * k + 1)] = 1.0;
        o[(2 * k + 1, 2 * k)] = -1.0;
    }
    o
}

fn cov_matrix(state: &GaussianState<f64>) -> DMatrix<f64> {
    let d = state.dim();
    DMatrix::from_row_slice(d, d, state.cov_row_major())
}

/// Second moments `m^{ij} = <R~^i R~^j> = S^{ij} + (i/2) Omega^{ij}` of a state.
pub fn second_moments(state: &GaussianState<f64>) -> DMatrix<C> {
    let s = cov_matrix(state);
    let o = symplectic_form(state.dim());
    DMatrix::from_fn(s.nrows(), s.ncols(), |i, j| C::new(s[(i, j)], 0.5 * o[(i, j)]))
}

/// `c + v_k R~^k + M_kl R~^k o R~^l`, where `R~ = R - center`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObservable {
    center: DVector<f64>,
    constant: C,
    linear: DVector<C>,
    quadratic: DMatrix<C>,
}

impl QuadraticObservable {
    /// The quadratic part is symmetrized; only its symmetric part is an operator.
    pub fn new(center: DVector<f64>, constant: C, linear: DVector<C>, quadratic: DMatrix<C>) -> Result<Self> {
        let d = center.len();
        if d == 0 || d % 2 != 0 || linear.len() != d || quadratic.shape() != (d, d) {
            return Err(Error::Domain(format!(
                "observable shapes disagree: center {d}, linear {}, quadratic {:?}",
                linear.len(),
                quadratic.shape()
            )));
        }
        let quadratic = (&quadratic + quadratic.transpose()) * C::new(0.5, 0.0);
        Ok(Self {
            center,
            constant,
            linear,
            quadratic,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            center: DVector::zeros(dim),
            constant: C::new(1.0, 0.0),
            linear: DVector::zeros(dim),
            quadratic: DMatrix::zeros(dim, dim),
        }
    }

    /// The centered quadrature `R~^k = R^k - center_k`.
    pub fn quadrature(dim: usize, k: usize, center: DVector<f64>) -> Self {
        let mut linear = DVector::zeros(dim);
        linear[k] = C::new(1.0, 0.0);
        Self {
            center,
            constant: C::new(0.0, 0.0),
            linear,
            quadratic: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn constant(&self) -> C {
        self.constant
    }

    pub fn linear(&self) -> &DVector<C> {
        &self.linear
    }

    pub fn quadratic(&self) -> &DMatrix<C> {
        &self.quadratic
    }

    /// Hermitian conjugate: the basis operators are Hermitian, so conjugate the coefficients.
    pub fn adjoint(&self) -> Self {
        Self {
            center: self.center.clone(),
            constant: self.constant.conj(),
            linear: self.linear.map(|x| x.conj()),
            quadratic: self.quadratic.map(|x| x.conj()),
        }
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imaginary(&self) -> f64 {
        std::iter::once(self.constant)
            .chain(self.linear.iter().cloned())
            .chain(self.quadratic.iter().cloned())
            .fold(0.0, |m, x| m.max(x.im.abs()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imaginary() <= tol
    }

    /// Re-expands the observable around a new center.
    pub fn recentered(&self, new_center: &DVector<f64>) -> Self {
        let delta: DVector<C> = (new_center - &self.center).map(|x| C::new(x, 0.0));
        let m_delta = &self.quadratic * &delta;
        let constant = self.constant + self.linear.dot(&delta) + delta.dot(&m_delta);
        let linear = &self.linear + m_delta * C::new(2.0, 0.0);
        Self {
            center: new_center.clone(),
            constant,
            linear,
            quadratic: self.quadratic.clone(),
        }
    }
}

fn state_mean(state: &GaussianState<f64>) -> DVector<f64> {
    DVector::from_column_slice(state.mean())
}

/// `<A B>` on a Gaussian state, exact through fourth order.
pub fn wick_expectation(state: &GaussianState<f64>, a: &QuadraticObservable, b: &QuadraticObservable) -> C {
    let d = state.dim();
    assert_eq!(a.dim(), d, "observable dimension does not match state");
    assert_eq!(b.dim(), d, "observable dimension does not match state");
    let mean = state_mean(state);
    let a = a.recentered(&mean);
    let b = b.recentered(&mean);
    let m = second_moments(state);

    let pair = |x: &DMatrix<C>| x.component_mul(&m).sum();
    let (ma, mb) = (&a.quadratic, &b.quadratic);
    let e2a = pair(ma);
    let e2b = pair(mb);
    let mt = m.transpose();
    let direct = ma.component_mul(&(&m * mb * &mt)).sum();
    let crossed = ma.component_mul(&(&m * mb.transpose() * &mt)).sum();
    let quartic = e2a * e2b + direct + crossed;
    let quadratic = (a.linear.transpose() * &m * &b.linear)[(0, 0)];

    a.constant * b.constant + a.constant * e2b + b.constant * e2a + quadratic + quartic
}

/// `<A>` on a Gaussian state.
pub fn expectation(state: &GaussianState<f64>, a: &QuadraticObservable) -> C {
    wick_expectation(state, a, &QuadraticObservable::identity(state.dim()))
}

/// The generator coefficients of both channel derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPair {
    pub alpha_gamma: Matrix4<C>,
    pub alpha_nbar: Matrix4<C>,
    pub kappa_gamma: f64,
    pub iota_gamma: f64,
    pub kappa_nbar: f64,
    pub iota_nbar: f64,
}

impl AlphaPair {
    pub fn get(&self, param: Parameter) -> &Matrix4<C> {
        match param {
            Parameter::Gamma => &self.alpha_gamma,
            Parameter::Nbar => &self.alpha_nbar,
        }
    }
}

/// `P = I (+) 0`, the Euclidean metric on the channel mode.
pub fn basis_p() -> Matrix4<C> {
    let mut p = Matrix4::zeros();
    p[(0, 0)] = C::new(1.0, 0.0);
    p[(1, 1)] = C::new(1.0, 0.0);
    p
}

/// `Q = w (+) 0`, the symplectic metric on the channel mode.
pub fn basis_q() -> Matrix4<C> {
    let mut q = Matrix4::zeros();
    q[(0, 1)] = C::new(1.0, 0.0);
    q[(1, 0)] = C::new(-1.0, 0.0);
    q
}

/// `alpha_gamma = [[N+1/2, -i/2], [i/2, N+1/2]] (+) 0` and `alpha_N = (e^gamma - 1) I (+) 0`.
pub fn alpha_matrices(theta: &ChannelParams<f64>) -> AlphaPair {
    let kappa_gamma = theta.xi();
    let iota_gamma = -0.5;
    let kappa_nbar = theta.z();
    let iota_nbar = 0.0;
    let combine = |k: f64, i: f64| basis_p() * C::new(k, 0.0) + basis_q() * C::new(0.0, i);
    AlphaPair {
        alpha_gamma: combine(kappa_gamma, iota_gamma),
        alpha_nbar: combine(kappa_nbar, iota_nbar),
        kappa_gamma,
        iota_gamma,
        kappa_nbar,
        iota_nbar,
    }
}

/// First- and second-moment derivatives `(dd, dS)` produced by the generator
/// `alpha_{ij} (R^i rho R^j - (R^j R^i) o rho)` on `state`.
///
/// Uses `tr[X D rho] = alpha_ij < [R^j, X] R^i + R^j [X, R^i] > / 2`.
pub fn generator_tangent(alpha: &Matrix4<C>, state: &GaussianState<f64>) -> (DVector<C>, DMatrix<C>) {
    let d = state.dim();
    let o = symplectic_form(d);
    let mean = state_mean(state);
    let s = cov_matrix(state);
    // raw second moments <R^a R^b>
    let raw = DMatrix::from_fn(d, d, |a, b| C::new(s[(a, b)] + mean[a] * mean[b], 0.5 * o[(a, b)]));
    let half_i = C::new(0.0, 0.5);

    let mut dd = DVector::<C>::zeros(d);
    let mut draw = DMatrix::<C>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let a = alpha[(i, j)];
            if a == C::new(0.0, 0.0) {
                continue;
            }
            for k in 0..d {
                dd[k] += half_i * a * (o[(j, k)] * mean[i] + o[(k, i)] * mean[j]);
                for l in 0..d {
                    draw[(k, l)] += half_i
                        * a
                        * (raw[(l, i)] * o[(j, k)]
                            + raw[(k, i)] * o[(j, l)]
                            + raw[(j, k)] * o[(l, i)]
                            + raw[(j, l)] * o[(k, i)]);
                }
            }
        }
    }
    let cmean = mean.map(|x| C::new(x, 0.0));
    let sym = (&draw + draw.transpose()) * C::new(0.5, 0.0);
    let ds = sym - &dd * cmean.transpose() - &cmean * dd.transpose();
    (dd, ds)
}

/// Matrix of `M -> S M S + (1/4) Omega M Omega` on row-major `vec(M)`,
/// i.e. `S (x) S - (1/4) Omega (x) Omega`.
pub fn d_operator(state: &GaussianState<f64>) -> DMatrix<f64> {
    let s = cov_matrix(state);
    let o = symplectic_form(state.dim());
    s.kronecker(&s) - o.kronecker(&o) * 0.25
}

fn near_pure_check(state: &GaussianState<f64>) -> Result<()> {
    let gap = symplectic_eigenvalues(state)
        .into_iter()
        .map(|nu| nu - 0.5)
        .fold(f64::INFINITY, f64::min);
    if gap < NEAR_PURE_GAP {
        return Err(Error::NearPure { gap });
    }
    Ok(())
}

fn restrict(alpha: &Matrix4<C>, dim: usize) -> Matrix4<C> {
    let mut out = *alpha;
    for i in 0..4 {
        for j in 0..4 {
            if i >= dim || j >= dim {
                out[(i, j)] = C::new(0.0, 0.0);
            }
        }
    }
    out
}

/// Solves `X -> Sigma~^T X Sigma~ - X/4 = A` with `Sigma~ = S Omega`, the
/// phase-space form of the `D` operator acting on lower-index tensors.
pub fn d_inverse(state: &GaussianState<f64>, a: &DMatrix<C>) -> Result<DMatrix<C>> {
    near_pure_check(state)?;
    let d = state.dim();
    let st = (cov_matrix(state) * symplectic_form(d)).map(|x| C::new(x, 0.0));
    // Sigma~^T X Sigma~ on row-major vec(X) is Sigma~^T (x) Sigma~^T
    let lhs = st.transpose().kronecker(&st.transpose()) - DMatrix::<C>::identity(d * d, d * d) * C::new(0.25, 0.0);
    let rhs = DVector::from_iterator(d * d, a.transpose().iter().cloned());
    let sol = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("D operator".into()))?;
    Ok(DMatrix::from_row_slice(d, d, sol.as_slice()))
}

/// `D^-1[P]` and `D^-1[Q]` for the output state, restricted to its dimension.
pub fn contracted_tensors(state: &GaussianState<f64>) -> Result<(DMatrix<C>, DMatrix<C>)> {
    let d = state.dim();
    let p = basis_p().view((0, 0), (d, d)).into_owned();
    let q = basis_q().view((0, 0), (d, d)).into_owned();
    Ok((d_inverse(state, &p)?, d_inverse(state, &q)?))
}

/// Mode-a marginal of a two-mode state whose cross covariance vanishes.
fn uncorrelated_marginal(state: &GaussianState<f64>) -> Option<GaussianState<f64>> {
    if state.num_modes() != 2 {
        return None;
    }
    let cross = (0..2)
        .flat_map(|i| (2..4).map(move |j| (i, j)))
        .all(|(i, j)| state.cov(i, j) == 0.0);
    if !cross {
        return None;
    }
    let cov = vec![state.cov(0, 0), state.cov(0, 1), state.cov(1, 0), state.cov(1, 1)];
    GaussianState::from_parts(1, state.mean()[..2].to_vec(), cov).ok()
}

/// `Lambda (x) 1` on two modes, centred on `center`.
fn embed_channel_mode(sld: &QuadraticObservable, center: &DVector<f64>) -> QuadraticObservable {
    let mut linear = DVector::zeros(4);
    linear.rows_mut(0, 2).copy_from(&sld.linear);
    let mut quadratic = DMatrix::zeros(4, 4);
    quadratic.view_mut((0, 0), (2, 2)).copy_from(&sld.quadratic);
    let mut full_center = center.clone();
    full_center.rows_mut(0, 2).copy_from(&sld.center);
    QuadraticObservable {
        center: full_center,
        constant: sld.constant,
        linear,
        quadratic,
    }
}

/// SLD of `param` for an already propagated output state.
///
/// When the ancilla is uncorrelated with the channel mode, the SLD is the
/// channel-mode SLD tensored with the identity; this also covers a pure
/// ancilla, for which the two-mode `D` operator is singular.
pub fn sld_for_output(
    output: &GaussianState<f64>,
    theta: &ChannelParams<f64>,
    param: Parameter,
) -> Result<QuadraticObservable> {
    if let Some(marginal) = uncorrelated_marginal(output) {
        let sld = sld_for_output(&marginal, theta, param)?;
        return Ok(embed_channel_mode(&sld, &state_mean(output)));
    }
    near_pure_check(output)?;
    let d = output.dim();
    let alpha = restrict(alpha_matrices(theta).get(param), d);
    let (dd, ds) = generator_tangent(&alpha, output);

    let cov = cov_matrix(output).map(|x| C::new(x, 0.0));
    let dop = d_operator(output).map(|x| C::new(x, 0.0));
    let rhs = DVector::from_iterator(d * d, ds.transpose().iter().map(|x| x * 0.5));
    let m = dop
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("D operator".into()))?;
    let m = DMatrix::from_row_slice(d, d, m.as_slice());
    let v = cov
        .clone()
        .lu()
        .solve(&dd)
        .ok_or_else(|| Error::Singular("output covariance".into()))?;
    let c = -(m.component_mul(&cov)).sum();

    let sld = QuadraticObservable::new(state_mean(output), c, v, m)?;
    if !sld.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::Singular(format!(
            "assembled SLD not Hermitian (max imaginary part {:e})",
            sld.max_imaginary()
        )));
    }
    Ok(sld)
}

/// SLD of `param` for the channel output of `probe`.
///
/// Single-mode probes may be passed with or without an uncorrelated ancilla.
pub fn build_sld(
    probe: &GaussianState<f64>,
    theta: &ChannelParams<f64>,
    param: Parameter,
) -> Result<QuadraticObservable> {
    let output = apply_channel(probe, theta)?;
    sld_for_output(&output, theta, param)
}

/// Both SLDs together with the output state they refer to.
#[derive(Debug, Clone)]
pub struct SldPair {
    pub output: GaussianState<f64>,
    pub gamma: QuadraticObservable,
    pub nbar: QuadraticObservable,
}

pub fn build_sld_pair(probe: &GaussianState<f64>, theta: &ChannelParams<f64>) -> Result<SldPair> {
    let output = apply_channel(probe, theta)?;
    let gamma = sld_for_output(&output, theta, Parameter::Gamma)?;
    let nbar = sld_for_output(&output, theta, Parameter::Nbar)?;
    Ok(SldPair { output, gamma, nbar })
}

/// `J_{mu nu} = Re <Lambda_mu Lambda_nu>`, ordered `(gamma, N)`.
pub fn qfi_matrix(probe: &GaussianState<f64>, theta: &ChannelParams<f64>) -> Result<[[f64; 2]; 2]> {
    let pair = build_sld_pair(probe, theta)?;
    let s = &pair.output;
    let gg = wick_expectation(s, &pair.gamma, &pair.gamma).re;
    let nn = wick_expectation(s, &pair.nbar, &pair.nbar).re;
    let gn = 0.5 * (wick_expectation(s, &pair.gamma, &pair.nbar).re + wick_expectation(s, &pair.nbar, &pair.gamma).re);
    Ok([[gg, gn], [gn, nn]])
}

/// `tr[rho [Lambda_gamma, Lambda_N]] = 2 i Im <Lambda_gamma Lambda_N>`.
pub fn commutator_expectation(probe: &GaussianState<f64>, theta: &ChannelParams<f64>) -> Result<C> {
    let pair = build_sld_pair(probe, theta)?;
    let s = &pair.output;
    Ok(wick_expectation(s, &pair.gamma, &pair.nbar) - wick_expectation(s, &pair.nbar, &pair.gamma))
}
