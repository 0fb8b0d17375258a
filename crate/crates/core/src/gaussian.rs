//! Gaussian states in the moment formalism.
//!
//! Conventions: `hbar = 1`, vacuum covariance `I/2`, quadratures ordered
//! `(Q1, P1, Q2, P2)` and `[R^i, R^j] = i Omega^{ij}` with `Omega = w (+) w`,
//! `w = [[0, 1], [-1, 0]]`. The channel always acts on the first mode; the
//! second mode (when present) is an untouched ancilla.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Damping exponent `gamma` and reservoir occupation `N` of the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T> {
    gamma: T,
    nbar: T,
}

impl<T: Scalar> ChannelParams<T> {
    pub fn new(gamma: T, nbar: T) -> Result<Self> {
        if !gamma.is_finite() || gamma < T::zero() {
            return Err(Error::Domain(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        if !nbar.is_finite() || nbar < T::zero() {
            return Err(Error::Domain(format!("nbar must be finite and >= 0, got {nbar}")));
        }
        Ok(Self { gamma, nbar })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn nbar(&self) -> T {
        self.nbar
    }

    /// `z = e^gamma - 1`.
    pub fn z(&self) -> T {
        self.gamma.exp_m1()
    }

    /// Transmissivity `eta = e^-gamma`.
    pub fn eta(&self) -> T {
        (-self.gamma).exp()
    }

    /// `xi = N + 1/2`, the variance of the reservoir quadratures.
    pub fn xi(&self) -> T {
        self.nbar + T::lit(0.5)
    }
}

/// The four Gaussian probe families compared at fixed energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProbeClass {
    Coherent,
    Thermal,
    SingleModeSqueezed,
    TwoModeSqueezedVacuum,
}

impl ProbeClass {
    pub const ALL: [ProbeClass; 4] = [
        ProbeClass::Coherent,
        ProbeClass::Thermal,
        ProbeClass::SingleModeSqueezed,
        ProbeClass::TwoModeSqueezedVacuum,
    ];

    /// Short name used on the command line and in CSV headers.
    pub fn name(self) -> &'static str {
        match self {
            ProbeClass::Coherent => "coherent",
            ProbeClass::Thermal => "thermal",
            ProbeClass::SingleModeSqueezed => "squeezed",
            ProbeClass::TwoModeSqueezedVacuum => "two-mode",
        }
    }

    pub fn num_modes(self) -> usize {
        match self {
            ProbeClass::TwoModeSqueezedVacuum => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ProbeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProbeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" | "coh" => Ok(ProbeClass::Coherent),
            "thermal" | "th" => Ok(ProbeClass::Thermal),
            "squeezed" | "sq" => Ok(ProbeClass::SingleModeSqueezed),
            "two-mode" | "2m" | "tmsv" => Ok(ProbeClass::TwoModeSqueezedVacuum),
            other => Err(Error::Domain(format!("unknown probe class '{other}'"))),
        }
    }
}

/// First moments and covariance matrix of a one- or two-mode Gaussian state.
///
/// The covariance is stored row-major; `cov(i, j) = <R~^i o R~^j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState<T> {
    num_modes: usize,
    mean: Vec<T>,
    cov: Vec<T>,
}

impl<T: Scalar> GaussianState<T> {
    /// Builds a state and checks symmetry and the uncertainty principle.
    pub fn new(num_modes: usize, mean: Vec<T>, cov: Vec<T>) -> Result<Self> {
        let state = Self::from_parts(num_modes, mean, cov)?;
        let diag = validate_state(&state);
        if !diag.valid {
            return Err(Error::InvalidState(diag.reason.unwrap_or_default()));
        }
        Ok(state)
    }

    /// Builds a state checking only shapes. Use [`validate_state`] for physics.
    pub fn from_parts(num_modes: usize, mean: Vec<T>, cov: Vec<T>) -> Result<Self> {
        if num_modes == 0 || num_modes > 2 {
            return Err(Error::InvalidState(format!(
                "num_modes must be 1 or 2, got {num_modes}"
            )));
        }
        let d = 2 * num_modes;
        if mean.len() != d || cov.len() != d * d {
            return Err(Error::InvalidState(format!(
                "expected mean of length {d} and {d}x{d} covariance, got {} and {}",
                mean.len(),
                cov.len()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite moment".into()));
        }
        Ok(Self { num_modes, mean, cov })
    }

    pub fn vacuum(num_modes: usize) -> Self {
        let d = 2 * num_modes;
        let mut cov = vec![T::zero(); d * d];
        for i in 0..d {
            cov[i * d + i] = T::lit(0.5);
        }
        Self {
            num_modes,
            mean: vec![T::zero(); d],
            cov,
        }
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    /// Phase-space dimension `2 * num_modes`.
    pub fn dim(&self) -> usize {
        2 * self.num_modes
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn cov(&self, i: usize, j: usize) -> T {
        self.cov[i * self.dim() + j]
    }

    pub fn cov_row_major(&self) -> &[T] {
        &self.cov
    }

    pub fn cov_rows(&self) -> Vec<Vec<T>> {
        let d = self.dim();
        (0..d).map(|i| self.cov[i * d..(i + 1) * d].to_vec()).collect()
    }

    /// Extends a single-mode state with a vacuum ancilla; two-mode states are returned as is.
    pub fn with_vacuum_ancilla(&self) -> Self {
        if self.num_modes == 2 {
            return self.clone();
        }
        let mut out = Self::vacuum(2);
        out.mean[..2].copy_from_slice(&self.mean);
        for i in 0..2 {
            for j in 0..2 {
                out.cov[i * 4 + j] = self.cov(i, j);
            }
        }
        out
    }

    /// Entries `(a, b, c)` when the covariance has the two-mode standard form
    /// `[[a I, c Z], [c Z, b I]]`, `Z = diag(1, -1)`.
    pub fn standard_form(&self) -> Option<(T, T, T)> {
        if self.num_modes != 2 {
            return None;
        }
        let (a, b, c) = (self.cov(0, 0), self.cov(2, 2), self.cov(0, 2));
        let mut expected = [T::zero(); 16];
        for k in 0..2 {
            expected[k * 5] = a;
            expected[(k + 2) * 5] = b;
        }
        expected[2] = c;
        expected[8] = c;
        expected[7] = -c;
        expected[13] = -c;
        let scale = a.abs().max(b.abs()).max(T::one());
        let tol = T::tol(1e-12) * scale;
        self.cov
            .iter()
            .zip(expected.iter())
            .all(|(x, y)| (*x - *y).abs() <= tol)
            .then_some((a, b, c))
    }
}

/// Diagnostics returned by [`validate_state`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateDiagnostics<T> {
    pub symplectic_eigenvalues: Vec<T>,
    /// `tr rho^2 = prod_k 1 / (2 nu_k)`.
    pub purity: T,
    pub valid: bool,
    pub pure: bool,
    pub reason: Option<String>,
}

/// Symplectic eigenvalues, ascending. One mode: `sqrt(det S)`.
///
/// Two modes: with `S = L L^T`, the antisymmetric `A = L^T Omega L` has
/// singular values `nu_+ +- nu_-` given by the norms of its self-dual and
/// anti-self-dual parts. This stays accurate when `nu_- = nu_+`, where the
/// invariant formula `(Delta +- sqrt(Delta^2 - 4 det S)) / 2` loses half the digits.
pub fn symplectic_eigenvalues<T: Scalar>(state: &GaussianState<T>) -> Vec<T> {
    let s = |i, j| state.cov(i, j);
    if state.num_modes == 1 {
        let det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
        return vec![det.max(T::zero()).sqrt()];
    }
    let half = T::lit(0.5);
    let Some(l) = cholesky(state.cov_row_major(), 4) else {
        let det2 = |r: usize, c: usize| s(r, c) * s(r + 1, c + 1) - s(r, c + 1) * s(r + 1, c);
        let delta = det2(0, 0) + det2(2, 2) + T::lit(2.0) * det2(0, 2);
        let det = det_small(state.cov_row_major(), 4);
        let disc = (delta * delta - T::lit(4.0) * det).max(T::zero()).sqrt();
        let lo = (half * (delta - disc)).max(T::zero()).sqrt();
        let hi = (half * (delta + disc)).max(T::zero()).sqrt();
        return vec![lo, hi];
    };
    // A_ij = sum_k,m L_ki Omega_km L_mj, Omega = omega (+) omega
    let a = |i: usize, j: usize| {
        let mut acc = T::zero();
        for blk in [0usize, 2] {
            acc = acc + l[blk * 4 + i] * l[(blk + 1) * 4 + j] - l[(blk + 1) * 4 + i] * l[blk * 4 + j];
        }
        acc
    };
    let (a01, a02, a03, a12, a13, a23) = (a(0, 1), a(0, 2), a(0, 3), a(1, 2), a(1, 3), a(2, 3));
    let norm3 = |x: T, y: T, z: T| (x * x + y * y + z * z).sqrt();
    let u = norm3(a01 + a23, a02 - a13, a03 + a12);
    let w = norm3(a01 - a23, a02 + a13, a03 - a12);
    let (sum, diff) = (u.max(w), u.min(w));
    vec![half * (sum - diff), half * (sum + diff)]
}

/// Determinant of a small row-major matrix by partial-pivot elimination.
pub(crate) fn det_small<T: Scalar>(m: &[T], n: usize) -> T {
    let mut a = m.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).unwrap())
            .unwrap();
        if a[pivot * n + col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det = det * p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            for k in col..n {
                a[r * n + k] = a[r * n + k] - f * a[col * n + k];
            }
        }
    }
    det
}

/// Lower Cholesky factor (row-major), `None` unless positive definite.
fn cholesky<T: Scalar>(m: &[T], n: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn is_positive_definite<T: Scalar>(m: &[T], n: usize) -> bool {
    cholesky(m, n).is_some()
}

/// Symmetry, positivity and uncertainty-principle diagnostics. Never fails.
pub fn validate_state<T: Scalar>(state: &GaussianState<T>) -> StateDiagnostics<T> {
    let d = state.dim();
    let nus = symplectic_eigenvalues(state);
    let half = T::lit(0.5);
    let purity = nus.iter().fold(
        T::one(),
        |acc, &nu| {
            if nu > T::zero() {
                acc / (nu + nu)
            } else {
                T::infinity()
            }
        },
    );
    let scale = state
        .cov
        .iter()
        .fold(T::zero(), |m, x| m.max(x.abs()))
        .max(T::min_positive_value());
    // the determinant loses accuracy with the condition number, roughly scale^2
    let nu_tol = T::tol(1e-10) + T::lit(16.0) * T::epsilon() * scale * scale;
    let pure = nus.iter().all(|&nu| (nu - half).abs() <= nu_tol);

    let sym_tol = T::tol(1e-12) * scale;
    let mut reason = None;
    'sym: for i in 0..d {
        for j in i + 1..d {
            if (state.cov(i, j) - state.cov(j, i)).abs() > sym_tol {
                reason = Some(format!("covariance not symmetric at ({i},{j})"));
                break 'sym;
            }
        }
    }
    if reason.is_none() && !is_positive_definite(&state.cov, d) {
        reason = Some("covariance not positive definite".into());
    }
    if reason.is_none() {
        let nu_min = nus.iter().cloned().fold(T::infinity(), T::min);
        if nu_min < half - nu_tol {
            reason = Some(format!("uncertainty principle violated: nu_min = {nu_min} < 1/2"));
        }
    }
    StateDiagnostics {
        symplectic_eigenvalues: nus,
        purity,
        valid: reason.is_none(),
        pure,
        reason,
    }
}

/// Phase-standard probe of the given class with mean photon number `n` in mode `a`.
pub fn make_probe<T: Scalar>(class: ProbeClass, n: T) -> Result<GaussianState<T>> {
    if !n.is_finite() || n < T::zero() {
        return Err(Error::Domain(format!("probe energy must be finite and >= 0, got {n}")));
    }
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let state = match class {
        ProbeClass::Coherent => GaussianState {
            num_modes: 1,
            mean: vec![(two * n).sqrt(), T::zero()],
            cov: vec![half, T::zero(), T::zero(), half],
        },
        ProbeClass::Thermal => {
            let v = n + half;
            GaussianState {
                num_modes: 1,
                mean: vec![T::zero(); 2],
                cov: vec![v, T::zero(), T::zero(), v],
            }
        }
        ProbeClass::SingleModeSqueezed => {
            // cosh 2r = 2n + 1, sinh 2r = 2 sqrt(n(n+1))
            let e2r = two * n + T::one() + two * (n * (n + T::one())).sqrt();
            GaussianState {
                num_modes: 1,
                mean: vec![T::zero(); 2],
                cov: vec![half * e2r, T::zero(), T::zero(), half / e2r],
            }
        }
        ProbeClass::TwoModeSqueezedVacuum => {
            let ch = half * (two * n + T::one());
            let sh = (n * (n + T::one())).sqrt();
            let o = T::zero();
            #[rustfmt::skip]
            let cov = vec![
                ch, o, -sh, o,
                o, ch, o, sh,
                -sh, o, ch, o,
                o, sh, o, ch,
            ];
            GaussianState {
                num_modes: 2,
                mean: vec![T::zero(); 4],
                cov,
            }
        }
    };
    Ok(state)
}

/// Moment map of the dissipative channel on mode `a`:
/// `d_a -> e^{-g/2} d_a`, `S_aa -> e^{-g} S_aa + (1 - e^{-g})(N + 1/2) I`,
/// `S_ab -> e^{-g/2} S_ab`.
pub fn apply_channel<T: Scalar>(state: &GaussianState<T>, theta: &ChannelParams<T>) -> Result<GaussianState<T>> {
    let diag = validate_state(state);
    if !diag.valid {
        return Err(Error::InvalidState(diag.reason.unwrap_or_default()));
    }
    Ok(apply_channel_unchecked(state, theta))
}

pub(crate) fn apply_channel_unchecked<T: Scalar>(
    state: &GaussianState<T>,
    theta: &ChannelParams<T>,
) -> GaussianState<T> {
    let d = state.dim();
    let eta = theta.eta();
    let sq = (-theta.gamma * T::lit(0.5)).exp();
    let noise = -(-theta.gamma).exp_m1() * theta.xi();
    let mut out = state.clone();
    out.mean[0] = out.mean[0] * sq;
    out.mean[1] = out.mean[1] * sq;
    for i in 0..d {
        for j in 0..d {
            let (ia, ja) = (i < 2, j < 2);
            let v = state.cov[i * d + j];
            out.cov[i * d + j] = match (ia, ja) {
                (true, true) => eta * v + if i == j { noise } else { T::zero() },
                (true, false) | (false, true) => sq * v,
                (false, false) => v,
            };
        }
    }
    out
}

/// `tr[rho a^dag a] = (S_QQ + S_PP - 1)/2 + (d_Q^2 + d_P^2)/2` for the given mode.
pub fn mean_photon_number<T: Scalar>(state: &GaussianState<T>, mode: usize) -> Result<T> {
    if mode >= state.num_modes {
        return Err(Error::Domain(format!(
            "mode {mode} out of range for {}-mode state",
            state.num_modes
        )));
    }
    let (q, p) = (2 * mode, 2 * mode + 1);
    let half = T::lit(0.5);
    let m = state.mean();
    Ok(half * (state.cov(q, q) + state.cov(p, p) - T::one()) + half * (m[q] * m[q] + m[p] * m[p]))
}

/// Rotates `mode` by the phase shift `(Q, P) -> (Q cos phi + P sin phi, -Q sin phi + P cos phi)`.
pub fn phase_rotate<T: Scalar>(state: &GaussianState<T>, mode: usize, phi: T) -> GaussianState<T> {
    let d = state.dim();
    let (c, s) = (phi.cos(), phi.sin());
    let mut rot = vec![T::zero(); d * d];
    for i in 0..d {
        rot[i * d + i] = T::one();
    }
    let (q, p) = (2 * mode, 2 * mode + 1);
    rot[q * d + q] = c;
    rot[q * d + p] = s;
    rot[p * d + q] = -s;
    rot[p * d + p] = c;

    let mean = (0..d)
        .map(|i| (0..d).fold(T::zero(), |acc, k| acc + rot[i * d + k] * state.mean[k]))
        .collect();
    let mut tmp = vec![T::zero(); d * d];
    for i in 0..d {
        for j in 0..d {
            tmp[i * d + j] = (0..d).fold(T::zero(), |acc, k| acc + rot[i * d + k] * state.cov[k * d + j]);
        }
    }
    let mut cov = vec![T::zero(); d * d];
    for i in 0..d {
        for j in 0..d {
            cov[i * d + j] = (0..d).fold(T::zero(), |acc, k| acc + tmp[i * d + k] * rot[j * d + k]);
        }
    }
    GaussianState {
        num_modes: state.num_modes,
        mean,
        cov,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn coherent_probe_moments() {
        let s = make_probe(ProbeClass::Coherent, 1.0).unwrap();
        assert!(close(s.mean()[0], 2f64.sqrt(), 1e-15));
        assert_eq!(s.mean()[1], 0.0);
        assert_eq!(s.cov_row_major(), &[0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn tmsv_probe_entries_and_purity() {
        let s = make_probe(ProbeClass::TwoModeSqueezedVacuum, 1.0).unwrap();
        assert!(close(s.cov(0, 0), 1.5, 1e-15));
        assert!(close(s.cov(0, 2), -2f64.sqrt(), 1e-15));
        assert!(close(s.cov(1, 3), 2f64.sqrt(), 1e-15));
        let d = validate_state(&s);
        assert!(d.valid && d.pure);
        for nu in d.symplectic_eigenvalues {
            assert!(close(nu, 0.5, 1e-12));
        }
    }

    #[test]
    fn zero_energy_is_vacuum_for_every_class() {
        for class in ProbeClass::ALL {
            let s = make_probe(class, 0.0).unwrap();
            assert_eq!(s, GaussianState::vacuum(class.num_modes()), "{class}");
        }
    }

    #[test]
    fn negative_energy_rejected() {
        assert!(matches!(make_probe(ProbeClass::Thermal, -0.1), Err(Error::Domain(_))));
        assert!(matches!(
            make_probe(ProbeClass::Thermal, f64::NAN),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn channel_fixed_point_is_thermal() {
        let theta = ChannelParams::new(50.0, 2.0).unwrap();
        let out = apply_channel(&GaussianState::vacuum(1), &theta).unwrap();
        assert!(close(out.cov(0, 0), 2.5, 1e-10));
        assert!(close(out.cov(1, 1), 2.5, 1e-10));
    }

    #[test]
    fn identity_channel() {
        let theta = ChannelParams::new(0.0, 1.7).unwrap();
        for class in ProbeClass::ALL {
            let s = make_probe(class, 1.3).unwrap();
            assert_eq!(apply_channel(&s, &theta).unwrap(), s);
        }
    }

    #[test]
    fn tmsv_output_standard_form() {
        let theta = ChannelParams::new(std::f64::consts::LN_2, 0.0).unwrap();
        let out = apply_channel(&make_probe(ProbeClass::TwoModeSqueezedVacuum, 1.0).unwrap(), &theta).unwrap();
        // cov is [[aI, -cZ], [-cZ, bI]] in the squeezing phase used here; flip the ancilla to compare.
        let flipped = phase_rotate(&out, 1, std::f64::consts::PI);
        let (a, b, c) = flipped.standard_form().expect("standard form");
        assert!(close(a, 1.0, 1e-12));
        assert!(close(b, 1.5, 1e-12));
        assert!(close(c, 1.0, 1e-12));
        assert!(close(mean_photon_number(&out, 0).unwrap(), 0.5, 1e-12));
        // Delta = 5/4, det = 1/4  ->  nu = 1/2, 1
        let nus = symplectic_eigenvalues(&out);
        assert!(close(nus[0], 0.5, 1e-14) && close(nus[1], 1.0, 1e-14));
    }

    #[test]
    fn photon_number_round_trip() {
        for class in ProbeClass::ALL {
            for &n in &[0.0, 0.3, 2.5, 17.0] {
                let s = make_probe(class, n).unwrap();
                assert!(close(mean_photon_number(&s, 0).unwrap(), n, 1e-12), "{class} {n}");
            }
        }
        assert!(mean_photon_number(&GaussianState::<f64>::vacuum(1), 1).is_err());
    }

    #[test]
    fn heisenberg_violation_detected() {
        let s = GaussianState::from_parts(1, vec![0.0, 0.0], vec![0.1, 0.0, 0.0, 0.1]).unwrap();
        let d = validate_state(&s);
        assert!(!d.valid);
        assert!(close(d.symplectic_eigenvalues[0], 0.1, 1e-15));
        assert!(GaussianState::new(1, vec![0.0, 0.0], vec![0.1, 0.0, 0.0, 0.1]).is_err());
    }

    #[test]
    fn asymmetric_covariance_rejected() {
        let s = GaussianState::from_parts(1, vec![0.0, 0.0], vec![1.0, 0.2, 0.1, 1.0]).unwrap();
        assert!(!validate_state(&s).valid);
    }

    #[test]
    fn thermal_probe_is_mixed() {
        let d = validate_state(&make_probe(ProbeClass::Thermal, 0.5).unwrap());
        assert!(d.valid && !d.pure);
        assert!(close(d.purity, 0.5, 1e-15));
        for class in [ProbeClass::Coherent, ProbeClass::SingleModeSqueezed] {
            assert!(validate_state(&make_probe(class, 3.0).unwrap()).pure);
        }
    }

    #[test]
    fn generic_over_f32() {
        let s = make_probe::<f32>(ProbeClass::TwoModeSqueezedVacuum, 1.0).unwrap();
        let d = validate_state(&s);
        assert!(d.valid && d.pure);
        let theta = ChannelParams::<f32>::new(0.5, 0.5).unwrap();
        let out = apply_channel(&s, &theta).unwrap();
        assert!(validate_state(&out).valid);
    }
}
