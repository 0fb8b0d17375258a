//! Exact quantum Fisher information yields for the four Gaussian probe
//! classes, their zero-temperature forms, low/high-energy expansion
//! coefficients, improvement thresholds and the weighted Cramér–Rao cost.
//!
//! Yields are written in the variables `x = n(n+1)`, `y = N(N+1)`,
//! `z = e^gamma - 1`, `t = n + N + 2nN`. The temperature yields `J_N` use the
//! temperature tangent `(e^gamma - 1) I` on the output covariance (the `alpha_N`
//! generator of [`crate::sld`]); the Fisher information with respect to `N` at
//! fixed `gamma` under the moment map of [`crate::gaussian::apply_channel`] is
//! `e^{-2 gamma}` times these values, see [`nbar_tangent_scale`].
//!
//! The zero-temperature forms and the expansion coefficients are written out
//! independently of the exact forms, so each can be tested against the other.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gaussian::{ChannelParams, GaussianState, ProbeClass};
use crate::scalar::Scalar;

/// Which channel parameter is being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    Gamma,
    Nbar,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::Gamma => "gamma",
            Parameter::Nbar => "nbar",
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(Parameter::Gamma),
            "nbar" | "N" => Ok(Parameter::Nbar),
            other => Err(Error::Domain(format!("unknown parameter '{other}'"))),
        }
    }
}

/// The algebraic variables the exact yields are written in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldVariables<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub t: T,
    pub delta2: T,
}

impl<T: Scalar> YieldVariables<T> {
    pub fn new(n: T, theta: &ChannelParams<T>) -> Self {
        let nn = theta.nbar();
        let two = T::lit(2.0);
        let d = n - nn;
        Self {
            x: n * (n + T::one()),
            y: nn * (nn + T::one()),
            z: theta.z(),
            t: n + nn + two * n * nn,
            delta2: d * d,
        }
    }
}

/// Factor converting the `J_N` yields of this module to the Fisher information
/// with respect to `N` at fixed `gamma` of the moment map: `e^{-2 gamma}`.
pub fn nbar_tangent_scale<T: Scalar>(theta: &ChannelParams<T>) -> T {
    (-(theta.gamma() + theta.gamma())).exp()
}

fn check_energy<T: Scalar>(n: T) -> Result<()> {
    if !n.is_finite() || n < T::zero() {
        return Err(Error::Domain(format!("probe energy must be finite and >= 0, got {n}")));
    }
    Ok(())
}

fn require_loss<T: Scalar>(z: T) -> Result<()> {
    if z <= T::zero() {
        return Err(Error::SingularParameter(
            "z=0: identity channel (gamma must be > 0)".into(),
        ));
    }
    Ok(())
}

fn require_temperature<T: Scalar>(nbar: T) -> Result<()> {
    if nbar <= T::zero() {
        return Err(Error::SingularParameter(
            "N=0: temperature yield diverges (nbar must be > 0)".into(),
        ));
    }
    Ok(())
}

/// Exact yield `J` of `param` for a probe of class `class` and energy `n`.
pub fn qfi<T: Scalar>(param: Parameter, class: ProbeClass, n: T, theta: &ChannelParams<T>) -> Result<T> {
    check_energy(n)?;
    let v = YieldVariables::new(n, theta);
    let (x, y, z, t) = (v.x, v.y, v.z, v.t);
    require_loss(z)?;
    let one = T::one();
    let two = T::lit(2.0);
    let nn = theta.nbar();
    let zp1 = z + one;

    let value = match param {
        Parameter::Gamma => match class {
            ProbeClass::Coherent => (nn / z) / (one + z * (nn + one)) + n / (one + z * (two * nn + one)),
            ProbeClass::SingleModeSqueezed => {
                let thermal_term = if y == T::zero() { T::zero() } else { y * t / (t + y * z) };
                t / z - thermal_term - two * (t * (t + one) - y) / (zp1 * zp1 + two * z * (t + y * z))
            }
            ProbeClass::Thermal => {
                let den = y * z * z + t * z + x;
                if den == T::zero() {
                    // vacuum probe in a zero-temperature bath
                    T::zero()
                } else {
                    v.delta2 / den
                }
            }
            ProbeClass::TwoModeSqueezedVacuum => (t + x * z) / (z * ((t + one) * z + one)),
        },
        Parameter::Nbar => {
            let pref = z * zp1 * zp1;
            match class {
                ProbeClass::Coherent => {
                    require_temperature(nn)?;
                    pref / ((one + z * (nn + one)) * nn)
                }
                ProbeClass::SingleModeSqueezed => {
                    let num = pref * (one + T::lit(4.0) * x + z * (two * t + two * y * z + z + two));
                    let den = t
                        + z * (x * (T::lit(8.0) * y + two) + y * (z * (two * y * z + z + two) + T::lit(3.0)))
                        + t * z * z * (one + T::lit(4.0) * y);
                    if den == T::zero() {
                        return Err(Error::SingularParameter(
                            "N=0 and n=0: vacuum probe in a zero-temperature bath".into(),
                        ));
                    }
                    num / den
                }
                ProbeClass::Thermal => {
                    let den = x + z * (t + y * z);
                    if den == T::zero() {
                        return Err(Error::SingularParameter(
                            "N=0 and n=0: vacuum probe in a zero-temperature bath".into(),
                        ));
                    }
                    z * pref / den
                }
                ProbeClass::TwoModeSqueezedVacuum => {
                    require_temperature(nn)?;
                    (t + one) * pref / (y * (t * z + z + one))
                }
            }
        }
    };
    Ok(value)
}

/// Damping yields in a zero-temperature bath.
pub fn qfi_zero_temperature<T: Scalar>(class: ProbeClass, n: T, gamma: T) -> Result<T> {
    check_energy(n)?;
    if !(gamma > T::zero()) {
        return Err(Error::SingularParameter(
            "z=0: identity channel (gamma must be > 0)".into(),
        ));
    }
    let z = gamma.exp_m1();
    let one = T::one();
    Ok(match class {
        ProbeClass::Coherent => n / (z + one),
        ProbeClass::Thermal => n / (z + one + n),
        ProbeClass::SingleModeSqueezed => (n / z) * (one + z * z) / (one + z * (z + T::lit(2.0) * (n + one))),
        ProbeClass::TwoModeSqueezedVacuum => n / z,
    })
}

/// Expansion regime of a yield in the probe energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `J = J0 + J1 n + O(n^2)` for `n << 1`.
    LowEnergy,
    /// `J = J(-1) n + J0 + o(1)` for `n >> 1`.
    HighEnergy,
}

/// Two-term model `J ~ constant + slope * n` of a yield in one regime.
///
/// In the low-energy regime `constant = J(0)` and `slope = J(1)`; in the
/// high-energy regime `slope = J(-1)` and `constant = J(0)` (the saturation
/// value for classes whose slope vanishes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeCoefficients<T> {
    pub regime: Regime,
    pub constant: T,
    pub slope: T,
}

impl<T: Scalar> RegimeCoefficients<T> {
    pub fn evaluate(&self, n: T) -> T {
        self.constant + self.slope * n
    }
}

/// Vacuum yields, common to every class at `n = 0`.
pub fn vacuum_yield<T: Scalar>(param: Parameter, theta: &ChannelParams<T>) -> Result<T> {
    let z = theta.z();
    require_loss(z)?;
    let one = T::one();
    let nn = theta.nbar();
    match param {
        Parameter::Gamma => Ok((nn / z) / (one + z * (nn + one))),
        Parameter::Nbar => {
            require_temperature(nn)?;
            Ok(z * (z + one) * (z + one) / (nn * (one + z * (nn + one))))
        }
    }
}

/// Sign quantity `X = 2(xi - 1) - z(4 z xi^3 + (z + 2) xi + 1)`, `xi = N + 1/2`:
/// single-mode squeezing improves on the vacuum for temperature estimation at
/// low energy iff `X > 0`.
pub fn squeezing_sign_quantity<T: Scalar>(theta: &ChannelParams<T>) -> T {
    let xi = theta.xi();
    let z = theta.z();
    let two = T::lit(2.0);
    two * (xi - T::one()) - z * (T::lit(4.0) * z * xi * xi * xi + (z + two) * xi + T::one())
}

/// Low-energy coefficients `(J0, J1)`.
pub fn low_energy_expansion<T: Scalar>(
    param: Parameter,
    class: ProbeClass,
    theta: &ChannelParams<T>,
) -> Result<RegimeCoefficients<T>> {
    let constant = vacuum_yield(param, theta)?;
    let z = theta.z();
    let nn = theta.nbar();
    let one = T::one();
    let two = T::lit(2.0);
    let zp1 = z + one;
    let zn1 = one + z * (nn + one);
    let slope = match param {
        Parameter::Gamma => match class {
            ProbeClass::Coherent => one / (one + z * (one + two * nn)),
            ProbeClass::Thermal => -zp1 * (one + two * z * (nn + one)) / (z * z * zn1 * zn1),
            ProbeClass::SingleModeSqueezed => {
                let s = one + two * nn;
                s / z - z * (one + nn) * (one + nn) * s / (zn1 * zn1) - two * s * s / (zp1 * zp1 + two * nn * z * zn1)
            }
            ProbeClass::TwoModeSqueezedVacuum => (zp1 * zp1 + nn * (z * (z + two) + two)) / (z * zn1 * zn1),
        },
        Parameter::Nbar => match class {
            ProbeClass::Coherent => T::zero(),
            ProbeClass::Thermal => -zp1 * zp1 * (z * (two * nn + one) + one) / (nn * nn * zn1 * zn1),
            ProbeClass::SingleModeSqueezed => {
                let xi = theta.xi();
                let four = T::lit(4.0);
                let a = four * z * xi * xi + four * xi - z - two;
                let b = z * (four * z * xi * xi + four * xi + z + two) + two;
                T::lit(32.0) * z * zp1 * zp1 * squeezing_sign_quantity(theta) / (a * a * b)
            }
            ProbeClass::TwoModeSqueezedVacuum => (two * nn + one) * z * zp1 * zp1 / (nn * (nn + one) * zn1 * zn1),
        },
    };
    Ok(RegimeCoefficients {
        regime: Regime::LowEnergy,
        constant,
        slope,
    })
}

/// High-energy coefficients `(J(-1), J0)`.
pub fn high_energy_expansion<T: Scalar>(
    param: Parameter,
    class: ProbeClass,
    theta: &ChannelParams<T>,
) -> Result<RegimeCoefficients<T>> {
    let z = theta.z();
    require_loss(z)?;
    let nn = theta.nbar();
    let one = T::one();
    let two = T::lit(2.0);
    let zp1 = z + one;
    let s = two * nn + one;
    let (slope, constant) = match param {
        Parameter::Gamma => match class {
            ProbeClass::Coherent => (one / (one + z * s), (nn / z) / (one + z * (nn + one))),
            ProbeClass::Thermal => (T::zero(), one),
            ProbeClass::SingleModeSqueezed => (T::zero(), T::lit(0.5) * (one + one / (z * z))),
            ProbeClass::TwoModeSqueezedVacuum => (
                one / (z * s),
                nn * (T::lit(4.0) * nn + z + T::lit(4.0)) / (z * z * s * s),
            ),
        },
        Parameter::Nbar => {
            require_temperature(nn)?;
            let c = match class {
                ProbeClass::Coherent => vacuum_yield(Parameter::Nbar, theta)?,
                ProbeClass::Thermal => T::zero(),
                ProbeClass::SingleModeSqueezed => two * zp1 * zp1 / (s * s),
                ProbeClass::TwoModeSqueezedVacuum => zp1 * zp1 / (nn * (nn + one)),
            };
            (T::zero(), c)
        }
    };
    Ok(RegimeCoefficients {
        regime: Regime::HighEnergy,
        constant,
        slope,
    })
}

/// Probe energies at which the linear low-energy gain equals the vacuum yield
/// (`J0 = J1 n`) for damping estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds<T> {
    pub coherent: T,
    pub two_mode: T,
}

pub fn improvement_thresholds<T: Scalar>(theta: &ChannelParams<T>) -> Result<Thresholds<T>> {
    let z = theta.z();
    require_loss(z)?;
    let nn = theta.nbar();
    let one = T::one();
    let zp1 = z + one;
    let zn1 = z * (nn + one) + one;
    Ok(Thresholds {
        coherent: nn * (z * (T::lit(2.0) * nn + one) + one) / (z * zn1),
        two_mode: nn * zn1 / ((nn + one) * zp1 * zp1 + nn),
    })
}

/// Classes sorted by decreasing yield for one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport<T> {
    pub param: Parameter,
    pub ranking: Vec<(ProbeClass, T)>,
    /// Whether the two-mode squeezed vacuum beats every other class (slack `1e-12`).
    pub two_mode_maximal: bool,
}

pub fn dominance_report<T: Scalar>(param: Parameter, n: T, theta: &ChannelParams<T>) -> Result<DominanceReport<T>> {
    if !(n > T::zero()) {
        return Err(Error::Domain(format!("dominance needs n > 0, got {n}")));
    }
    let mut ranking = ProbeClass::ALL
        .iter()
        .map(|&c| qfi(param, c, n, theta).map(|j| (c, j)))
        .collect::<Result<Vec<_>>>()?;
    let best = ranking
        .iter()
        .find(|(c, _)| *c == ProbeClass::TwoModeSqueezedVacuum)
        .map(|&(_, j)| j)
        .expect("two-mode class present");
    let slack = T::tol(1e-12);
    let two_mode_maximal = ranking.iter().all(|&(_, j)| best >= j - slack);
    ranking.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    Ok(DominanceReport {
        param,
        ranking,
        two_mode_maximal,
    })
}

/// Positive-semidefinite weight `G` over the parameter order `(gamma, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightMatrix<T> {
    g: [[T; 2]; 2],
}

impl<T: Scalar> WeightMatrix<T> {
    pub fn new(g: [[T; 2]; 2]) -> Result<Self> {
        let scale = g.iter().flatten().fold(T::one(), |m, x| m.max(x.abs()));
        if (g[0][1] - g[1][0]).abs() > T::tol(1e-12) * scale {
            return Err(Error::Domain("weight matrix must be symmetric".into()));
        }
        let tr = g[0][0] + g[1][1];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let disc = (tr * tr - T::lit(4.0) * det).max(T::zero()).sqrt();
        let min_eig = T::lit(0.5) * (tr - disc);
        if min_eig < -T::tol(1e-12) * scale {
            return Err(Error::Domain(format!(
                "weight matrix not PSD (min eigenvalue {min_eig})"
            )));
        }
        Ok(Self { g })
    }

    /// `diag(1, 0)`: only the damping matters.
    pub fn gamma_only() -> Self {
        Self {
            g: [[T::one(), T::zero()], [T::zero(), T::zero()]],
        }
    }

    /// `diag(0, 1)`: only the temperature matters.
    pub fn nbar_only() -> Self {
        Self {
            g: [[T::zero(), T::zero()], [T::zero(), T::one()]],
        }
    }

    pub fn identity() -> Self {
        Self {
            g: [[T::one(), T::zero()], [T::zero(), T::one()]],
        }
    }

    /// `X X^T` for a linear combination `X = x_gamma gamma + x_N N`.
    pub fn linear_combination(x: [T; 2]) -> Self {
        Self {
            g: [[x[0] * x[0], x[0] * x[1]], [x[1] * x[0], x[1] * x[1]]],
        }
    }

    pub fn as_array(&self) -> [[T; 2]; 2] {
        self.g
    }
}

/// `tr[G J^-1]` for a symmetric positive-definite QFI matrix `J`.
pub fn weighted_cr_bound<T: Scalar>(g: &WeightMatrix<T>, j: [[T; 2]; 2]) -> Result<T> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j[0][0].abs().max(j[1][1].abs()).max(T::min_positive_value());
    if !(det > T::tol(1e-14) * scale * scale) || !(j[0][0] > T::zero()) {
        return Err(Error::Singular(format!(
            "QFI matrix not positive definite (det = {det})"
        )));
    }
    let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
    let g = g.g;
    Ok(g[0][0] * inv[0][0] + g[0][1] * inv[1][0] + g[1][0] * inv[0][1] + g[1][1] * inv[1][1])
}

/// `(J_gamma, J_N)` from the parameters of a single-mode output state:
/// symplectic eigenvalue `nu` (vacuum = 1), squeezing `r` and displacement.
///
/// Rotation invariant, so any single-mode Gaussian output is accepted.
/// Pure outputs (`nu = 1`) are singular.
///
/// The `J_gamma` terms are regrouped over the common denominator `nu^4 - 1`
/// in powers of `s = cosh 2r - 1`:
/// `(nu^2+1)(nu-2 xi)^2 + 8 xi^2 nu^2 s(2+s) - 4 xi nu s (nu^2+1)`.
/// Summed term by term they cancel badly when the output sits near the bath
/// temperature.
pub fn single_mode_output_yields<T: Scalar>(output: &GaussianState<T>, theta: &ChannelParams<T>) -> Result<(T, T)> {
    if output.num_modes() != 1 {
        return Err(Error::Domain("expected a single-mode output state".into()));
    }
    let (a, b, c) = (output.cov(0, 0), output.cov(1, 1), output.cov(0, 1));
    let det = a * b - c * c;
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let nu = two * det.sqrt();
    let nu2 = four * det;
    if !(nu2 - one > T::tol(1e-12)) {
        return Err(Error::SingularParameter(format!("output is pure (nu = {nu})")));
    }
    // cosh 2r - 1 = (a + b - nu) / nu, rationalized
    let s = ((a - b) * (a - b) + four * c * c) / ((a + b + nu) * nu);
    let cosh4r = one + four * s + two * s * s;
    let d = output.mean();
    let displacement = (b * d[0] * d[0] - two * c * d[0] * d[1] + a * d[1] * d[1]) / (four * det);
    let xi = theta.xi();
    let denom = (nu2 - one) * (nu2 + one);
    let gap = nu - two * xi;
    let numer =
        (nu2 + one) * gap * gap + T::lit(8.0) * xi * xi * nu2 * s * (two + s) - four * xi * nu * s * (nu2 + one);
    let z = theta.z();
    Ok((
        displacement + numer / denom,
        four * z * z * (one + nu2 * cosh4r) / denom,
    ))
}
