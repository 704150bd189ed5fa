//! Numerical verification of the boundary growth laws: the log-power growth
//! of `det Im(Omega_0 + i t Q)` along the Petersson flow, the slower than
//! any power growth of the annulus integrals `int |log r|^a r^{-1} dr`, and
//! the bounded / logarithmic / power trichotomy of the radial pole-order
//! model `int_eps^1 r^{1 - 2 nu/m} dr`.
//!
//! All unspecified constants in the underlying estimates are normalized away
//! by fitting exponents and slopes rather than absolute values; regressions
//! run over the final decade of a geometric grid to isolate asymptotics.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::quadrature::integrate;

pub type RMatrix = DMatrix<f64>;

/// Relative tolerance for the internal quadratures.
const QUAD_TOL: f64 = 1e-9;
/// Relative change over the final decade below which an integral counts as
/// converged.
const BOUNDED_TOL: f64 = 1e-3;
/// Allowed spread of the increment slopes for the logarithmic class.
const LOG_SLOPE_TOL: f64 = 0.02;

#[derive(Debug, thiserror::Error)]
pub enum AsymptoticsError {
    #[error("Q must be positive semidefinite: min eigenvalue {0:e}")]
    NotPsd(f64),
    #[error("matrix dimensions do not match: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("integration bounds must satisfy 0 < eps < R < 1, got eps={eps:e}, R={r:e}")]
    BadBounds { eps: f64, r: f64 },
    #[error("domain violation: {0}")]
    Domain(String),
}

/// Asymptotic class of an `eps -> 0` family of integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthClass {
    Bounded,
    Logarithmic,
    Power { exponent: f64 },
}

impl GrowthClass {
    pub fn label(&self) -> &'static str {
        match self {
            GrowthClass::Bounded => "bounded",
            GrowthClass::Logarithmic => "logarithmic",
            GrowthClass::Power { .. } => "power",
        }
    }

    /// Divergence severity, for monotonicity checks.
    pub fn severity(&self) -> u8 {
        match self {
            GrowthClass::Bounded => 0,
            GrowthClass::Logarithmic => 1,
            GrowthClass::Power { .. } => 2,
        }
    }
}

/// Least-squares slope of `ys` against `xs`.
fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Default flow grid: 96 log-spaced times from 1 to 1e6. The top decade
/// sits at 1e5..1e6, deep enough that the subleading `1/t` corrections to
/// `det(Im Omega_0 + t Q)` no longer bias the slope fit.
pub fn default_t_grid() -> Vec<f64> {
    let n = 96;
    (0..n)
        .map(|i| 10f64.powf(6.0 * i as f64 / (n - 1) as f64))
        .collect()
}

/// Default geometric epsilon grid: ratio 1/2, 40 points from 0.5 down.
pub fn default_eps_grid() -> Vec<f64> {
    geometric_eps_grid(0.5, 0.5, 40)
}

/// `start, start*ratio, .., start*ratio^{n-1}` for `0 < ratio < 1`.
pub fn geometric_eps_grid(start: f64, ratio: f64, n: usize) -> Vec<f64> {
    assert!(start > 0.0 && ratio > 0.0 && ratio < 1.0 && n >= 2);
    let mut grid = Vec::with_capacity(n);
    let mut x = start;
    for _ in 0..n {
        grid.push(x);
        x *= ratio;
    }
    grid
}

/// Seeded random psd integer matrix of the given rank: a sum of `rank`
/// rank-one squares `v v^T` with entries in `[-3, 3]`, redrawn until the
/// rank is exact.
pub fn seeded_psd_matrix(g_prime: usize, rank: usize, seed: u64) -> RMatrix {
    use rand::Rng;
    use rand::SeedableRng;
    assert!(rank <= g_prime, "rank must not exceed the dimension");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut q = RMatrix::zeros(g_prime, g_prime);
        for _ in 0..rank {
            let v = nalgebra::DVector::from_fn(g_prime, |_, _| rng.gen_range(-3i64..=3) as f64);
            q += &v * v.transpose();
        }
        if q.rank(1e-9) == rank {
            return q;
        }
    }
}

/// Fitted growth exponent of `t -> det(Im Omega_0 + t Q)`: the
/// least-squares slope of `log det` against `log t` over the top decade of
/// `t_grid`. For psd `Q` this converges to the rank of `Q`.
pub fn petersson_flow_exponent(
    im_omega0: &RMatrix,
    q: &RMatrix,
    t_grid: &[f64],
) -> Result<f64, AsymptoticsError> {
    if im_omega0.nrows() != q.nrows() || im_omega0.ncols() != q.ncols() || q.nrows() != q.ncols() {
        return Err(AsymptoticsError::DimensionMismatch(im_omega0.nrows(), q.nrows()));
    }
    let sym = (q + q.transpose()) * 0.5;
    let scale = q.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let min_eig = nalgebra::SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -1e-9 * scale {
        return Err(AsymptoticsError::NotPsd(min_eig));
    }
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AsymptoticsError::DegenerateGrid("t_grid must be increasing".into()));
    }
    let t_max = *t_grid.last().expect("nonempty grid");
    if t_max < 1e3 {
        return Err(AsymptoticsError::DegenerateGrid(format!(
            "t_grid must reach 1e3, max is {t_max:e}"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &t in t_grid.iter().filter(|&&t| t >= t_max / 10.0) {
        let det = (im_omega0 + q * t).determinant();
        if det <= 0.0 {
            return Err(AsymptoticsError::Domain(format!("det not positive at t = {t:e}")));
        }
        xs.push(t.ln());
        ys.push(det.ln());
    }
    if xs.len() < 2 {
        return Err(AsymptoticsError::DegenerateGrid(
            "top decade of t_grid has fewer than 2 points".into(),
        ));
    }
    Ok(ls_slope(&xs, &ys))
}

/// The annulus integral `int_eps^R |log r|^a r^{-1} dr`, computed by
/// adaptive quadrature and in closed form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryIntegral {
    pub a: f64,
    pub eps: f64,
    pub r: f64,
    pub quadrature: f64,
    pub closed_form: f64,
}

impl BoundaryIntegral {
    /// Relative disagreement between the two routes.
    pub fn disagreement(&self) -> f64 {
        crate::siegel::rel_err(self.quadrature, self.closed_form)
    }
}

/// Closed form of the annulus integral: substituting `u = -log r` turns it
/// into `int u^a du`, so the value is
/// `((-log eps)^{a+1} - (-log R)^{a+1}) / (a+1)` for `a != -1` and
/// `log(log eps / log R)` for `a = -1`.
pub fn boundary_integral_closed_form(a: f64, eps: f64, r: f64) -> Result<f64, AsymptoticsError> {
    if !(0.0 < eps && eps < r && r < 1.0) {
        return Err(AsymptoticsError::BadBounds { eps, r });
    }
    let u_eps = -eps.ln();
    let u_r = -r.ln();
    if (a + 1.0).abs() < 1e-12 {
        Ok((u_eps / u_r).ln())
    } else {
        Ok((u_eps.powf(a + 1.0) - u_r.powf(a + 1.0)) / (a + 1.0))
    }
}

/// Computes the annulus integral both ways. The two routes agree to a
/// relative 1e-6 on the admissible range (see `disagreement`).
pub fn boundary_integral(a: f64, eps: f64, r: f64) -> Result<BoundaryIntegral, AsymptoticsError> {
    let closed_form = boundary_integral_closed_form(a, eps, r)?;
    let quadrature = integrate(|x| (-x.ln()).powf(a) / x, eps, r, QUAD_TOL);
    Ok(BoundaryIntegral { a, eps, r, quadrature, closed_form })
}

/// One classification of the radial pole-order model together with its
/// sampled values, for reporting.
#[derive(Clone, Debug, Serialize)]
pub struct PoleClassification {
    pub nu: i64,
    pub m: i64,
    pub class: GrowthClass,
    /// `(eps, integral)` samples along the grid.
    pub samples: Vec<(f64, f64)>,
}

/// Closed form of `int_eps^1 r^{1 - 2 nu/m} dr`.
pub fn pole_integral_closed_form(nu: i64, m: i64, eps: f64) -> f64 {
    let delta = 1.0 - 2.0 * nu as f64 / m as f64;
    if (delta + 1.0).abs() < 1e-12 {
        -eps.ln()
    } else {
        (1.0 - eps.powf(delta + 1.0)) / (delta + 1.0)
    }
}

fn validate_eps_grid(eps_grid: &[f64]) -> Result<(), AsymptoticsError> {
    if eps_grid.len() < 8 {
        return Err(AsymptoticsError::DegenerateGrid("need at least 8 grid points".into()));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) || eps_grid[0] >= 1.0 {
        return Err(AsymptoticsError::DegenerateGrid(
            "grid must decrease strictly from below 1".into(),
        ));
    }
    let ratio = eps_grid[1] / eps_grid[0];
    for w in eps_grid.windows(2) {
        if (w[1] / w[0] - ratio).abs() > 1e-9 {
            return Err(AsymptoticsError::DegenerateGrid("grid is not geometric".into()));
        }
    }
    let min = *eps_grid.last().expect("nonempty grid");
    if min > 1e-6 {
        return Err(AsymptoticsError::DegenerateGrid(format!(
            "grid must reach 1e-6, min is {min:e}"
        )));
    }
    Ok(())
}

/// Classifies the growth of `I(eps) = int_eps^1 r^{1 - 2 nu/m} dr` along a
/// geometric grid, by regression over the final decade:
///
/// - bounded when the relative change of `I` over the decade is below 1e-3
///   (the case `nu <= m - 1`),
/// - logarithmic when the increments of `I` per unit `log(1/eps)` are
///   constant to within 2% (the case `nu = m`),
/// - power otherwise, with the exponent fitted from `log I` against
///   `log(1/eps)` (exponent `2(nu - m)/m` for `nu > m`).
pub fn pole_model_classify(
    nu: i64,
    m: i64,
    eps_grid: &[f64],
) -> Result<PoleClassification, AsymptoticsError> {
    if m < 1 {
        return Err(AsymptoticsError::Domain(format!("m must be >= 1, got {m}")));
    }
    if nu < 0 {
        return Err(AsymptoticsError::Domain(format!("nu must be >= 0, got {nu}")));
    }
    validate_eps_grid(eps_grid)?;

    let exponent = 1.0 - 2.0 * nu as f64 / m as f64;
    let samples: Vec<(f64, f64)> = eps_grid
        .iter()
        .map(|&eps| (eps, integrate(|x| x.powf(exponent), eps, 1.0, QUAD_TOL)))
        .collect();

    let min_eps = eps_grid.last().copied().expect("nonempty grid");
    let decade: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(eps, _)| eps <= 10.0 * min_eps)
        .collect();
    if decade.len() < 3 {
        return Err(AsymptoticsError::DegenerateGrid(
            "final decade has fewer than 3 points".into(),
        ));
    }

    let first = decade[0].1;
    let last = decade[decade.len() - 1].1;
    let class = if ((last - first) / last).abs() < BOUNDED_TOL {
        GrowthClass::Bounded
    } else {
        // increment of I per unit log(1/eps), between consecutive points
        let slopes: Vec<f64> = decade
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / ((1.0 / w[1].0).ln() - (1.0 / w[0].0).ln()))
            .collect();
        let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
        let log_like = mean > 0.0
            && slopes.iter().all(|s| ((s - mean) / mean).abs() < LOG_SLOPE_TOL);
        if log_like {
            GrowthClass::Logarithmic
        } else {
            let xs: Vec<f64> = decade.iter().map(|&(e, _)| (1.0 / e).ln()).collect();
            let ys: Vec<f64> = decade.iter().map(|&(_, v)| v.ln()).collect();
            GrowthClass::Power { exponent: ls_slope(&xs, &ys) }
        }
    };
    Ok(PoleClassification { nu, m, class, samples })
}

/// Convergence certificate for the simple-normal-crossing bound: each of the
/// `k` branch integrals has radial exponent `2/m - 1` (plus any extra
/// per-branch offset), and converges because that exceeds -1.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SncReport {
    pub m: i64,
    pub k: i64,
    pub converges: bool,
    pub min_exponent: f64,
    /// Half the distance between the minimal radial exponent and the
    /// critical exponent -1; equals `1/m` when no offsets are given.
    pub margin: f64,
}

/// Checks `2/m - 1 + delta_i > -1` for every branch. `delta_exponents`
/// lists optional extra exponent offsets per branch (e.g. from vanishing
/// orders of the holomorphic factor); missing entries default to 0.
pub fn snc_convergence(m: i64, k: i64, delta_exponents: &[f64]) -> SncReport {
    assert!(m >= 1 && k >= 1, "snc_convergence needs m >= 1 and k >= 1");
    let base = 2.0 / m as f64 - 1.0;
    let min_exponent = (0..k as usize)
        .map(|i| base + delta_exponents.get(i).copied().unwrap_or(0.0))
        .fold(f64::INFINITY, f64::min);
    SncReport {
        m,
        k,
        converges: min_exponent > -1.0,
        min_exponent,
        margin: (min_exponent + 1.0) / 2.0,
    }
}
