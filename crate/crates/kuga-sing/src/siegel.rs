//! Numerical checks for the Siegel upper half space: the Moebius action of
//! the symplectic group, the factor of automorphy `det(C Omega + D)`, the
//! Petersson metric `det(Im Omega)` and the invariant volume density
//! `det(Im Omega)^{-(g+1)}`.
//!
//! Points are complex symmetric `g x g` matrices with positive definite
//! imaginary part. A matrix `M` in `Sp(2g, R)`, written in the standard
//! basis with blocks `[[A, B], [C, D]]`, acts by
//! `Omega -> (A Omega + B)(C Omega + D)^{-1}`.
//!
//! Only transformation laws are asserted here; the absolute normalization
//! of the metric and volume form (fixed only up to constants) is set to 1.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::symplectic::random_word;

pub type CMatrix = DMatrix<Complex<f64>>;
pub type RMatrix = DMatrix<f64>;

/// Largest allowed deviation from symmetry, in max-entry norm.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Largest allowed condition number of `C Omega + D` in the Moebius action.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, thiserror::Error)]
pub enum SiegelError {
    #[error("matrix is not symmetric: max |Omega - Omega^T| = {deviation:e}")]
    NotSymmetric { deviation: f64 },
    #[error("imaginary part is not positive definite: min eigenvalue = {min_eigenvalue:e}")]
    NotPositiveImaginary { min_eigenvalue: f64 },
    #[error("C*Omega + D is near-singular: condition estimate {cond:e}")]
    NearSingular { cond: f64 },
    #[error("expected a {expected}x{expected} block matrix, got {rows}x{cols}")]
    SizeMismatch { expected: usize, rows: usize, cols: usize },
}

/// A point of the Siegel upper half space.
#[derive(Clone, Debug)]
pub struct SiegelPoint {
    omega: CMatrix,
}

impl SiegelPoint {
    /// Validates symmetry (max-entry deviation at most [`SYMMETRY_TOL`]) and
    /// positive definiteness of the imaginary part.
    pub fn try_new(omega: CMatrix) -> Result<Self, SiegelError> {
        assert_eq!(omega.nrows(), omega.ncols(), "Siegel point must be square");
        let mut deviation = 0.0f64;
        for i in 0..omega.nrows() {
            for j in 0..omega.ncols() {
                deviation = deviation.max((omega[(i, j)] - omega[(j, i)]).norm());
            }
        }
        if deviation > SYMMETRY_TOL {
            return Err(SiegelError::NotSymmetric { deviation });
        }
        let min_eigenvalue = min_symmetric_eigenvalue(&omega.map(|z| z.im));
        if min_eigenvalue <= 0.0 {
            return Err(SiegelError::NotPositiveImaginary { min_eigenvalue });
        }
        Ok(SiegelPoint { omega })
    }

    pub fn g(&self) -> usize {
        self.omega.nrows()
    }

    pub fn omega(&self) -> &CMatrix {
        &self.omega
    }

    pub fn im(&self) -> RMatrix {
        self.omega.map(|z| z.im)
    }

    /// `i * diag(d_1, .., d_g)`.
    pub fn diagonal_imaginary(diag: &[f64]) -> Self {
        let g = diag.len();
        let omega = CMatrix::from_fn(g, g, |i, j| {
            if i == j {
                Complex::new(0.0, diag[i])
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        SiegelPoint::try_new(omega).expect("positive diagonal gives a valid point")
    }
}

fn min_symmetric_eigenvalue(m: &RMatrix) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn split_blocks(m: &RMatrix) -> Result<(RMatrix, RMatrix, RMatrix, RMatrix), SiegelError> {
    let n = m.nrows();
    if n != m.ncols() || n % 2 != 0 {
        return Err(SiegelError::SizeMismatch {
            expected: n / 2 * 2,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let g = n / 2;
    let a = m.view((0, 0), (g, g)).into_owned();
    let b = m.view((0, g), (g, g)).into_owned();
    let c = m.view((g, 0), (g, g)).into_owned();
    let d = m.view((g, g), (g, g)).into_owned();
    Ok((a, b, c, d))
}

fn complexify(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex::new(x, 0.0))
}

/// `C Omega + D` for the block decomposition of `m`.
fn denominator(m: &RMatrix, omega: &SiegelPoint) -> Result<CMatrix, SiegelError> {
    let (_, _, c, d) = split_blocks(m)?;
    if c.nrows() != omega.g() {
        return Err(SiegelError::SizeMismatch {
            expected: 2 * omega.g(),
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(complexify(&c) * omega.omega() + complexify(&d))
}

fn inf_norm(m: &CMatrix) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// The Moebius action `Omega -> (A Omega + B)(C Omega + D)^{-1}`.
///
/// The exact value is symmetric for symplectic `m`, so the floating-point
/// result is symmetrized before validation. Rejects inputs for which the
/// condition estimate of `C Omega + D` exceeds [`CONDITION_LIMIT`].
pub fn moebius_act(m: &RMatrix, omega: &SiegelPoint) -> Result<SiegelPoint, SiegelError> {
    let (a, b, _, _) = split_blocks(m)?;
    let den = denominator(m, omega)?;
    let den_norm = inf_norm(&den);
    let inv = den
        .clone()
        .try_inverse()
        .ok_or(SiegelError::NearSingular { cond: f64::INFINITY })?;
    let cond = den_norm * inf_norm(&inv);
    if !cond.is_finite() || cond >= CONDITION_LIMIT {
        return Err(SiegelError::NearSingular { cond });
    }
    let num = complexify(&a) * omega.omega() + complexify(&b);
    let raw = num * inv;
    let sym = (&raw + raw.transpose()) * Complex::new(0.5, 0.0);
    SiegelPoint::try_new(sym)
}

/// The factor of automorphy `j(m, Omega) = det(C Omega + D)`.
pub fn factor_of_automorphy(m: &RMatrix, omega: &SiegelPoint) -> Result<Complex<f64>, SiegelError> {
    Ok(denominator(m, omega)?.determinant())
}

/// Condition estimate of `C Omega + D` (infinity norm times the norm of the
/// inverse); infinite when singular.
pub fn action_condition(m: &RMatrix, omega: &SiegelPoint) -> Result<f64, SiegelError> {
    let den = denominator(m, omega)?;
    let norm = inf_norm(&den);
    Ok(match den.try_inverse() {
        Some(inv) => norm * inf_norm(&inv),
        None => f64::INFINITY,
    })
}

/// The Petersson metric of the distinguished frame: `det(Im Omega)`.
pub fn petersson_det_im(omega: &SiegelPoint) -> f64 {
    omega.im().determinant()
}

/// The invariant volume density `det(Im Omega)^{-(g+1)}` relative to the
/// flat volume form.
pub fn volume_density(omega: &SiegelPoint) -> f64 {
    let g = omega.g() as i32;
    petersson_det_im(omega).powi(-(g + 1))
}

/// Random point `Omega = S + i (B B^T + 0.1 I)` with `S` symmetric and `B`
/// square, both with entries uniform in `[-1, 1]`.
pub fn random_siegel_point<R: Rng>(g: usize, rng: &mut R) -> SiegelPoint {
    let mut s = RMatrix::zeros(g, g);
    for i in 0..g {
        for j in i..g {
            let x = rng.gen_range(-1.0..=1.0);
            s[(i, j)] = x;
            s[(j, i)] = x;
        }
    }
    let b = RMatrix::from_fn(g, g, |_, _| rng.gen_range(-1.0..=1.0));
    let im = &b * b.transpose() + RMatrix::identity(g, g) * 0.1;
    let omega = CMatrix::from_fn(g, g, |i, j| Complex::new(s[(i, j)], im[(i, j)]));
    SiegelPoint::try_new(omega).expect("B B^T + 0.1 I is positive definite")
}

/// Relative error against the larger magnitude.
pub fn rel_err(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    (lhs - rhs).abs() / scale
}

fn rel_err_c(lhs: Complex<f64>, rhs: Complex<f64>) -> f64 {
    let scale = lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
    (lhs - rhs).norm() / scale
}

/// Worst observed errors over a batch of random `(M, Omega)` pairs.
#[derive(Clone, Debug, Serialize)]
pub struct SiegelTrialReport {
    pub g: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_cocycle_err: f64,
    pub max_metric_err: f64,
    pub max_volume_err: f64,
    pub failures: usize,
}

impl SiegelTrialReport {
    pub fn all_passed(&self) -> bool {
        self.failures == 0
            && self.max_cocycle_err <= self.tol
            && self.max_metric_err <= self.tol
            && self.max_volume_err <= self.tol
    }
}

/// Condition bound used when sampling verification pairs. Verifying the
/// metric identity at 1e-9 in double precision needs moderate conditioning:
/// the imaginary part of `M Omega` shrinks like `1/sigma_max(C Omega + D)^2`
/// and is formed by subtraction, so wild denominators lose the digits we
/// are trying to check.
const TRIAL_COND_LIMIT: f64 = 100.0;

/// Verifies, on `trials` random pairs, the cocycle law
/// `j(M M', Omega) = j(M, M' Omega) j(M', Omega)`, the metric invariance
/// `det Im(M Omega) |j(M, Omega)|^2 = det Im Omega`, and the volume law
/// `density(M Omega) = density(Omega) |j(M, Omega)|^{2(g+1)}`.
///
/// Matrices are short random words of integer transvections (exactly
/// representable in `f64`), so all error comes from the complex solves.
/// Draws whose denominators exceed [`TRIAL_COND_LIMIT`] are redrawn; the
/// stream is seeded, so the accepted set is deterministic.
pub fn run_siegel_trials(g: usize, trials: usize, tol: f64, seed: u64) -> SiegelTrialReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SiegelTrialReport {
        g,
        trials,
        seed,
        tol,
        max_cocycle_err: 0.0,
        max_metric_err: 0.0,
        max_volume_err: 0.0,
        failures: 0,
    };
    let mut accepted = 0usize;
    let mut draws = 0usize;
    while accepted < trials {
        draws += 1;
        if draws > 1000 * trials {
            report.failures += trials - accepted;
            break;
        }
        let omega = random_siegel_point(g, &mut rng);
        let len_m = rng.gen_range(1..=3);
        let len_mp = rng.gen_range(1..=3);
        let word_m = random_word(g, len_m, rng.gen());
        let word_mp = random_word(g, len_mp, rng.gen());
        let m = word_m.to_f64();
        let mp = word_mp.to_f64();
        let mmp = word_m.mul(&word_mp).to_f64();

        let step = (|| -> Result<Option<(f64, f64, f64)>, SiegelError> {
            let well_conditioned = action_condition(&mp, &omega)? <= TRIAL_COND_LIMIT
                && action_condition(&m, &omega)? <= TRIAL_COND_LIMIT
                && action_condition(&mmp, &omega)? <= TRIAL_COND_LIMIT;
            if !well_conditioned {
                return Ok(None);
            }
            let mp_omega = moebius_act(&mp, &omega)?;
            if action_condition(&m, &mp_omega)? > TRIAL_COND_LIMIT {
                return Ok(None);
            }
            let j_total = factor_of_automorphy(&mmp, &omega)?;
            let j_outer = factor_of_automorphy(&m, &mp_omega)?;
            let j_inner = factor_of_automorphy(&mp, &omega)?;
            let cocycle = rel_err_c(j_total, j_outer * j_inner);

            let m_omega = moebius_act(&m, &omega)?;
            let j_m = factor_of_automorphy(&m, &omega)?;
            let metric = rel_err(
                petersson_det_im(&m_omega) * j_m.norm_sqr(),
                petersson_det_im(&omega),
            );
            let volume = rel_err(
                volume_density(&m_omega),
                volume_density(&omega) * j_m.norm_sqr().powi(g as i32 + 1),
            );
            Ok(Some((cocycle, metric, volume)))
        })();
        match step {
            Ok(None) => {}
            Ok(Some((cocycle, metric, volume))) => {
                accepted += 1;
                report.max_cocycle_err = report.max_cocycle_err.max(cocycle);
                report.max_metric_err = report.max_metric_err.max(metric);
                report.max_volume_err = report.max_volume_err.max(volume);
            }
            Err(_) => report.failures += 1,
        }
    }
    report
}
