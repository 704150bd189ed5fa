//! Exact cone and lattice utilities for integer quadratic forms on an
//! isotropic sublattice: membership in the positive (semi)definite cone,
//! rank, primitivity, dual characters with `<chi, Q> = 1`, and the
//! sign-of-pairing rule for when a boundary character extends.
//!
//! The lattice is the free module on the upper-triangle coordinates
//! `{q_ij : i <= j}`; group-specific sublattices are out of scope. All
//! decisions are exact: rank by fraction-free (Bareiss) elimination,
//! definiteness by rational symmetric elimination with diagonal pivoting.

use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConeError {
    #[error("coordinate vector of length {len} is not a triangle number count")]
    BadLength { len: usize },
    #[error("the zero form is not allowed here")]
    ZeroForm,
    #[error("form is imprimitive: gcd of coordinates is {gcd}")]
    Imprimitive { gcd: u64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// An integer symmetric form on coordinates `{q_ij : i <= j}`, stored as the
/// upper triangle in row order `(0,0), (0,1), .., (0,n-1), (1,1), ..`.
/// The associated matrix has `Q_ii = q_ii` and `Q_ij = Q_ji = q_ij`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadForm {
    g_prime: usize,
    coords: Vec<i64>,
}

fn triangle_dim(len: usize) -> Option<usize> {
    let mut n = 0usize;
    while n * (n + 1) / 2 < len {
        n += 1;
    }
    (n * (n + 1) / 2 == len && n >= 1).then_some(n)
}

impl QuadForm {
    pub fn new(coords: Vec<i64>) -> Result<Self, ConeError> {
        let g_prime = triangle_dim(coords.len()).ok_or(ConeError::BadLength { len: coords.len() })?;
        Ok(QuadForm { g_prime, coords })
    }

    pub fn g_prime(&self) -> usize {
        self.g_prime
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // offset of row i in the packed upper triangle
        i * self.g_prime - i * (i + 1) / 2 + j
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.coords[self.index(i, j)]
    }

    /// The symmetric matrix of the form, as big integers.
    pub fn matrix(&self) -> Vec<Vec<BigInt>> {
        let n = self.g_prime;
        (0..n)
            .map(|i| (0..n).map(|j| BigInt::from(self.entry(i, j))).collect())
            .collect()
    }
}

impl Serialize for QuadForm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuadForm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let coords = Vec::<i64>::deserialize(deserializer)?;
        QuadForm::new(coords).map_err(serde::de::Error::custom)
    }
}

/// An integral character on the coordinate lattice, paired with forms by
/// `<chi, Q> = sum_{i <= j} chi_ij q_ij`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Character {
    pub coords: Vec<i64>,
}

impl Character {
    pub fn pairing(&self, q: &QuadForm) -> Result<i64, ConeError> {
        if self.coords.len() != q.coords.len() {
            return Err(ConeError::DimensionMismatch(self.coords.len(), q.coords.len()));
        }
        Ok(self
            .coords
            .iter()
            .zip(&q.coords)
            .map(|(&c, &qc)| (c as i128) * (qc as i128))
            .sum::<i128>()
            .try_into()
            .expect("pairing of i64 coordinates fits i64"))
    }
}

/// Position of a form relative to the cone of positive definite forms and
/// its rational closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConePosition {
    /// Positive definite.
    Interior,
    /// Positive semidefinite but singular.
    Boundary,
    /// Not positive semidefinite.
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConeMembership {
    pub position: ConePosition,
    pub rank: usize,
}

/// Rank of an integer matrix by fraction-free Bareiss elimination with full
/// pivoting.
pub fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    while rank < rows.min(cols) {
        // find any nonzero pivot in the remaining block
        let pivot_pos = (rank..rows)
            .flat_map(|r| (rank..cols).map(move |c| (r, c)))
            .find(|&(r, c)| !m[r][c].is_zero());
        let Some((pr, pc)) = pivot_pos else { break };
        m.swap(rank, pr);
        if pc != rank {
            for row in m.iter_mut() {
                row.swap(rank, pc);
            }
        }
        let pivot = m[rank][rank].clone();
        for r in rank + 1..rows {
            for c in rank + 1..cols {
                let num = &m[r][c] * &pivot - &m[r][rank] * &m[rank][c];
                let (q, rem) = num.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division is exact");
                m[r][c] = q;
            }
            m[r][rank] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Exact positive-semidefiniteness via symmetric elimination: repeatedly
/// pivot on a positive diagonal entry and pass to the Schur complement. A
/// negative diagonal entry refutes psd at once; if every active diagonal
/// entry is zero, the form is psd exactly when the active block vanishes
/// (otherwise some 2x2 principal minor is negative).
fn is_psd(matrix: &[Vec<BigInt>]) -> bool {
    let n = matrix.len();
    let mut work: Vec<Vec<BigRational>> = matrix
        .iter()
        .map(|row| row.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        if active.iter().any(|&i| work[i][i].is_negative()) {
            return false;
        }
        let Some(pos) = active.iter().position(|&i| work[i][i].is_positive()) else {
            // all active diagonals vanish
            return active
                .iter()
                .all(|&i| active.iter().all(|&j| work[i][j].is_zero()));
        };
        let p = active.remove(pos);
        let pivot = work[p][p].clone();
        for &i in &active {
            for &j in &active {
                let delta = &work[i][p] * &work[p][j] / &pivot;
                let updated = &work[i][j] - delta;
                work[i][j] = updated;
            }
        }
    }
    true
}

/// Classifies `Q` against the cone of positive definite forms: interior
/// when positive definite, boundary when positive semidefinite and
/// singular, outside otherwise. Always reports the exact rank.
pub fn cone_membership(q: &QuadForm) -> ConeMembership {
    let matrix = q.matrix();
    let rank = bareiss_rank(matrix.clone());
    let psd = is_psd(&matrix);
    let position = if psd && rank == q.g_prime() {
        ConePosition::Interior
    } else if psd {
        ConePosition::Boundary
    } else {
        ConePosition::Outside
    };
    ConeMembership { position, rank }
}

/// True when the gcd of the coordinates is 1. The zero form is rejected.
pub fn is_primitive(q: &QuadForm) -> Result<bool, ConeError> {
    if q.is_zero() {
        return Err(ConeError::ZeroForm);
    }
    Ok(coord_gcd(q) == 1)
}

fn coord_gcd(q: &QuadForm) -> u64 {
    q.coords
        .iter()
        .fold(0u64, |g, &c| num::integer::gcd(g, c.unsigned_abs()))
}

/// A character with `<chi, Q> = 1`, built by an iterated extended gcd over
/// the coordinates. Deterministic; errors on imprimitive (or zero) forms.
pub fn dual_character(q: &QuadForm) -> Result<Character, ConeError> {
    if q.is_zero() {
        return Err(ConeError::ZeroForm);
    }
    let g = coord_gcd(q);
    if g != 1 {
        return Err(ConeError::Imprimitive { gcd: g });
    }
    let mut chi = vec![0i128; q.coords.len()];
    let mut acc: i128 = 0; // current gcd of the processed prefix
    for (idx, &c) in q.coords.iter().enumerate() {
        if c == 0 {
            continue;
        }
        if acc == 0 {
            // first nonzero coordinate: acc = |c| with certificate sign(c)
            chi[idx] = c.signum() as i128;
            acc = (c as i128).abs();
            continue;
        }
        let (g, x, y) = ext_gcd(acc, c as i128);
        for value in chi.iter_mut() {
            *value *= x;
        }
        chi[idx] = y;
        acc = g;
        if acc == 1 {
            break;
        }
    }
    debug_assert_eq!(acc, 1);
    let coords: Vec<i64> = chi
        .into_iter()
        .map(|c| i64::try_from(c).expect("certificate coordinates fit i64"))
        .collect();
    let chi = Character { coords };
    debug_assert_eq!(chi.pairing(q), Ok(1));
    Ok(chi)
}

/// Extended gcd: returns `(g, x, y)` with `g = gcd(a, b) >= 0` and
/// `a x + b y = g`.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// How the character `e^chi` behaves at the boundary divisor attached to
/// the ray through `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionBehavior {
    /// `<chi, Q> = 0`: extends and is nonvanishing there.
    ExtendsNonvanishing,
    /// `<chi, Q> > 0`: extends and vanishes identically there.
    ExtendsVanishing,
    /// `<chi, Q> < 0`: does not extend.
    DoesNotExtend,
}

/// Classifies the extension behavior by the sign of `<chi, Q>`.
pub fn character_extends(chi: &Character, q: &QuadForm) -> Result<ExtensionBehavior, ConeError> {
    let pairing = chi.pairing(q)?;
    Ok(match pairing.signum() {
        0 => ExtensionBehavior::ExtendsNonvanishing,
        1 => ExtensionBehavior::ExtendsVanishing,
        _ => ExtensionBehavior::DoesNotExtend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn form(coords: &[i64]) -> QuadForm {
        QuadForm::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn membership_examples() {
        // diag(1,1), diag(1,0), diag(1,-1) as 2x2 forms
        let m = cone_membership(&form(&[1, 0, 1]));
        assert_eq!(m.position, ConePosition::Interior);
        assert_eq!(m.rank, 2);
        let m = cone_membership(&form(&[1, 0, 0]));
        assert_eq!(m.position, ConePosition::Boundary);
        assert_eq!(m.rank, 1);
        let m = cone_membership(&form(&[1, 0, -1]));
        assert_eq!(m.position, ConePosition::Outside);
        assert_eq!(m.rank, 2);
    }

    #[test]
    fn zero_diagonal_with_offdiagonal_is_outside() {
        // [[0, 1], [1, 0]] has eigenvalues +-1
        let m = cone_membership(&form(&[0, 1, 0]));
        assert_eq!(m.position, ConePosition::Outside);
        assert_eq!(m.rank, 2);
        let zero = cone_membership(&form(&[0, 0, 0]));
        assert_eq!(zero.position, ConePosition::Boundary);
        assert_eq!(zero.rank, 0);
    }

    #[test]
    fn primitivity_examples() {
        assert!(is_primitive(&form(&[1, 0, 0])).unwrap());
        assert!(!is_primitive(&form(&[2, 0, 2])).unwrap());
        assert_eq!(is_primitive(&form(&[0, 0, 0])).unwrap_err(), ConeError::ZeroForm);
        // 2 * primitive is imprimitive
        assert!(!is_primitive(&form(&[2, 6, 4])).unwrap());
    }

    #[test]
    fn dual_character_examples() {
        let chi = dual_character(&form(&[1, 0, 0])).unwrap();
        assert_eq!(chi.coords, vec![1, 0, 0]);
        let q = form(&[2, 3, 0]);
        let chi = dual_character(&q).unwrap();
        assert_eq!(chi.pairing(&q).unwrap(), 1);
        assert_eq!(
            dual_character(&form(&[2, 0, 2])).unwrap_err(),
            ConeError::Imprimitive { gcd: 2 }
        );
        assert_eq!(dual_character(&form(&[0, 0, 0])).unwrap_err(), ConeError::ZeroForm);
    }

    #[test]
    fn dual_character_on_random_primitive_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut produced = 0;
        while produced < 200 {
            let gp = rng.gen_range(1..=4usize);
            let len = gp * (gp + 1) / 2;
            let coords: Vec<i64> = (0..len).map(|_| rng.gen_range(-20..=20)).collect();
            let Ok(q) = QuadForm::new(coords) else { unreachable!() };
            if q.is_zero() || !is_primitive(&q).unwrap() {
                continue;
            }
            let chi = dual_character(&q).unwrap();
            assert_eq!(chi.pairing(&q).unwrap(), 1, "q = {:?}", q.coords());
            produced += 1;
        }
    }

    #[test]
    fn extension_classification() {
        let q = form(&[1, 0, 1]);
        let zero = Character { coords: vec![0, 1, 0] };
        assert_eq!(
            character_extends(&zero, &q).unwrap(),
            ExtensionBehavior::ExtendsNonvanishing
        );
        let positive = Character { coords: vec![1, 0, 0] };
        assert_eq!(
            character_extends(&positive, &q).unwrap(),
            ExtensionBehavior::ExtendsVanishing
        );
        let negative = Character { coords: vec![-1, -1, -1] };
        assert_eq!(
            character_extends(&negative, &q).unwrap(),
            ExtensionBehavior::DoesNotExtend
        );
        let mismatched = Character { coords: vec![1] };
        assert!(matches!(
            character_extends(&mismatched, &q),
            Err(ConeError::DimensionMismatch(1, 3))
        ));
    }

    #[test]
    fn rank_agrees_with_floating_point_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let gp = rng.gen_range(1..=4usize);
            let len = gp * (gp + 1) / 2;
            let coords: Vec<i64> = (0..len).map(|_| rng.gen_range(-5..=5)).collect();
            let q = QuadForm::new(coords).unwrap();
            let exact = cone_membership(&q).rank;
            let float = nalgebra::DMatrix::from_fn(gp, gp, |i, j| q.entry(i, j) as f64).rank(1e-9);
            assert_eq!(exact, float, "q = {:?}", q.coords());
        }
    }

    #[test]
    fn psd_singular_integer_forms_classify_as_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let gp = rng.gen_range(2..=4usize);
            let deficient_rank = rng.gen_range(0..gp);
            // sum of rank-one squares v v^T is psd with rank <= deficient_rank
            let mut matrix = vec![vec![0i64; gp]; gp];
            for _ in 0..deficient_rank {
                let v: Vec<i64> = (0..gp).map(|_| rng.gen_range(-3..=3)).collect();
                for i in 0..gp {
                    for j in 0..gp {
                        matrix[i][j] += v[i] * v[j];
                    }
                }
            }
            let mut coords = Vec::new();
            for i in 0..gp {
                for j in i..gp {
                    coords.push(matrix[i][j]);
                }
            }
            let q = QuadForm::new(coords).unwrap();
            let m = cone_membership(&q);
            assert!(m.rank <= deficient_rank);
            assert_eq!(m.position, ConePosition::Boundary, "q = {:?}", q.coords());
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn triangle_coords() -> impl Strategy<Value = Vec<i64>> {
            (1usize..=4).prop_flat_map(|gp| {
                proptest::collection::vec(-9i64..=9, gp * (gp + 1) / 2)
            })
        }

        proptest! {
            #[test]
            fn scaling_destroys_primitivity(coords in triangle_coords(), k in 2i64..=5) {
                let q = QuadForm::new(coords.clone()).unwrap();
                prop_assume!(!q.is_zero());
                let scaled = QuadForm::new(coords.iter().map(|&c| k * c).collect()).unwrap();
                prop_assert!(!is_primitive(&scaled).unwrap());
            }

            #[test]
            fn dual_character_certificate_holds(coords in triangle_coords()) {
                let q = QuadForm::new(coords).unwrap();
                prop_assume!(!q.is_zero() && is_primitive(&q).unwrap());
                let chi = dual_character(&q).unwrap();
                prop_assert_eq!(chi.pairing(&q).unwrap(), 1);
            }
        }
    }

    #[test]
    fn quadform_serializes_as_triangle_list() {
        let q = form(&[1, 2, 3]);
        assert_eq!(serde_json::to_value(&q).unwrap(), serde_json::json!([1, 2, 3]));
        let back: QuadForm = serde_json::from_value(serde_json::json!([1, 2, 3])).unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_value::<QuadForm>(serde_json::json!([1, 2])).is_err());
    }

    #[test]
    fn bad_coordinate_lengths_are_rejected() {
        assert_eq!(QuadForm::new(vec![1, 2]).unwrap_err(), ConeError::BadLength { len: 2 });
        assert_eq!(QuadForm::new(vec![]).unwrap_err(), ConeError::BadLength { len: 0 });
        assert_eq!(QuadForm::new(vec![5]).unwrap().g_prime(), 1);
        assert_eq!(QuadForm::new(vec![1, 0, 0, 0, 0, 0]).unwrap().g_prime(), 3);
    }
}
