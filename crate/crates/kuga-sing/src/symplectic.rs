//! Exact symplectic linear algebra over the rationals.
//!
//! The standard symplectic basis is fixed once and for all: `e_1..e_g,
//! e_{g+1}..e_{2g}` with `(e_i, e_{g+i}) = 1 = -(e_{g+i}, e_i)` and all other
//! pairings zero, i.e. Gram matrix `[[0, I], [-I, 0]]`. Transvections
//! `T_{m,l}(v) = v + (m,v) l + (l,v) m` for `(m,l) = 0` generate the
//! unipotent radical of the stabilizer of the isotropic subspace
//! `I = span{e_1..e_k}`, and satisfy four exact relations that the
//! [`check_relations`] harness verifies matrix-by-matrix.

use num::{BigRational, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ratmat::QMatrix;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SymplecticError {
    #[error("expected a vector of length {expected}, got {got}")]
    VectorSize { expected: usize, got: usize },
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    MatrixSize { expected: usize, rows: usize, cols: usize },
    #[error("transvection pair requires (m, l) = 0, got {pairing}")]
    NotOrthogonal { pairing: String },
    #[error("matrix does not preserve the symplectic form")]
    NotSymplectic,
    #[error("{vector} must lie in {subspace}")]
    Membership { vector: &'static str, subspace: &'static str },
    #[error("isotropic rank must satisfy 1 <= k <= g, got {0}")]
    IsotropicRank(usize),
}

/// The rank-`2g` symplectic lattice in its standard basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymplecticSpace {
    g: usize,
}

impl SymplecticSpace {
    pub fn new(g: usize) -> Self {
        assert!(g >= 2, "symplectic rank 2g must be at least 4");
        SymplecticSpace { g }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn dim(&self) -> usize {
        2 * self.g
    }

    /// Gram matrix of the standard form.
    pub fn gram(&self) -> QMatrix {
        let g = self.g;
        let mut j = QMatrix::zeros(2 * g, 2 * g);
        for i in 0..g {
            j[(i, g + i)] = BigRational::from_integer(1.into());
            j[(g + i, i)] = BigRational::from_integer((-1).into());
        }
        j
    }

    /// The symplectic pairing `(u, v)`.
    pub fn form(&self, u: &[BigRational], v: &[BigRational]) -> Result<BigRational, SymplecticError> {
        self.check_vec(u)?;
        self.check_vec(v)?;
        let g = self.g;
        let mut acc = BigRational::zero();
        for i in 0..g {
            acc += &u[i] * &v[g + i] - &u[g + i] * &v[i];
        }
        Ok(acc)
    }

    fn check_vec(&self, v: &[BigRational]) -> Result<(), SymplecticError> {
        if v.len() != self.dim() {
            return Err(SymplecticError::VectorSize {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Exact test `M^T J M = J`. Errors on a size mismatch.
    pub fn is_symplectic(&self, m: &QMatrix) -> Result<bool, SymplecticError> {
        if m.rows() != self.dim() || m.cols() != self.dim() {
            return Err(SymplecticError::MatrixSize {
                expected: self.dim(),
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let j = self.gram();
        Ok(m.transpose().mul(&j).mul(m) == j)
    }
}

/// A matrix known to preserve the standard symplectic form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymplecticMatrix {
    g: usize,
    mat: QMatrix,
}

// Same wire format as the underlying matrix: row-major arrays of "p/q".
impl Serialize for SymplecticMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.mat.serialize(serializer)
    }
}

impl SymplecticMatrix {
    pub fn identity(space: &SymplecticSpace) -> Self {
        SymplecticMatrix {
            g: space.g(),
            mat: QMatrix::identity(space.dim()),
        }
    }

    /// Wraps a matrix after verifying the symplectic condition exactly.
    pub fn try_new(space: &SymplecticSpace, mat: QMatrix) -> Result<Self, SymplecticError> {
        if !space.is_symplectic(&mat)? {
            return Err(SymplecticError::NotSymplectic);
        }
        Ok(SymplecticMatrix { g: space.g(), mat })
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.mat
    }

    pub fn mul(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        assert_eq!(self.g, other.g);
        SymplecticMatrix {
            g: self.g,
            mat: self.mat.mul(&other.mat),
        }
    }

    pub fn apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        self.mat.mul_vec(v)
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        self.mat.to_f64()
    }
}

/// The transvection `T_{m,l}(v) = v + (m,v) l + (l,v) m`, defined for
/// `(m, l) = 0`; the result always satisfies the symplectic condition.
pub fn transvection_pair(
    space: &SymplecticSpace,
    m: &[BigRational],
    l: &[BigRational],
) -> Result<SymplecticMatrix, SymplecticError> {
    let pairing = space.form(m, l)?;
    if !pairing.is_zero() {
        return Err(SymplecticError::NotOrthogonal {
            pairing: pairing.to_string(),
        });
    }
    let dim = space.dim();
    let mut mat = QMatrix::identity(dim);
    for j in 0..dim {
        let mut e = vec![BigRational::zero(); dim];
        e[j] = BigRational::from_integer(1.into());
        let mv = space.form(m, &e)?;
        let lv = space.form(l, &e)?;
        for i in 0..dim {
            let add = &mv * &l[i] + &lv * &m[i];
            let cur = &mat[(i, j)] + add;
            mat[(i, j)] = cur;
        }
    }
    Ok(SymplecticMatrix { g: space.g(), mat })
}

/// The standard transvection `v -> v + (u, v) u` along an integer vector.
/// With our sign convention, `u = e_1` sends `e_{g+1}` to `e_{g+1} + e_1`.
pub fn symplectic_transvection(space: &SymplecticSpace, u: &[i64]) -> SymplecticMatrix {
    let dim = space.dim();
    assert_eq!(u.len(), dim, "transvection vector has length 2g");
    let u_rat: Vec<BigRational> = u.iter().map(|&x| BigRational::from_integer(x.into())).collect();
    let mut mat = QMatrix::identity(dim);
    for j in 0..dim {
        let mut e = vec![BigRational::zero(); dim];
        e[j] = BigRational::from_integer(1.into());
        let uv = space.form(&u_rat, &e).expect("basis vector has the right length");
        for i in 0..dim {
            let add = &uv * &u_rat[i];
            let cur = &mat[(i, j)] + add;
            mat[(i, j)] = cur;
        }
    }
    SymplecticMatrix { g: space.g(), mat }
}

/// Membership checks for the relation harness: `I = span{e_1..e_k}`.
fn require_in_isotropic(k: usize, v: &[BigRational], name: &'static str) -> Result<(), SymplecticError> {
    for (i, c) in v.iter().enumerate() {
        if i >= k && !c.is_zero() {
            return Err(SymplecticError::Membership { vector: name, subspace: "I" });
        }
    }
    Ok(())
}

fn require_in_perp(
    space: &SymplecticSpace,
    k: usize,
    v: &[BigRational],
    name: &'static str,
) -> Result<(), SymplecticError> {
    let g = space.g();
    for i in 0..k {
        if !v[g + i].is_zero() {
            return Err(SymplecticError::Membership { vector: name, subspace: "I^perp" });
        }
    }
    Ok(())
}

/// Verifies the four transvection relations exactly for
/// `m, m' in I^perp` and `l, l' in I`, where `I = span{e_1..e_k}`:
///
/// 1. `T_{a m, l} = T_{m, a l}` for scalars `a`,
/// 2. `T_{m,l} T_{m,l'} = T_{m, l+l'}`,
/// 3. `T_{m,l} T_{m',l} = T_{l, a l} T_{m+m', l}` with `a = (m, m')/2`,
/// 4. `T_{l,l'} = T_{l',l}`.
///
/// Relation 1 is checked for `a = 0, 2, -3, 1/2` and for `(m, m')/2`.
pub fn check_relations(
    space: &SymplecticSpace,
    k: usize,
    m: &[BigRational],
    m_prime: &[BigRational],
    l: &[BigRational],
    l_prime: &[BigRational],
) -> Result<bool, SymplecticError> {
    if k == 0 || k > space.g() {
        return Err(SymplecticError::IsotropicRank(k));
    }
    for v in [m, m_prime, l, l_prime] {
        space.check_vec(v)?;
    }
    require_in_perp(space, k, m, "m")?;
    require_in_perp(space, k, m_prime, "m'")?;
    require_in_isotropic(k, l, "l")?;
    require_in_isotropic(k, l_prime, "l'")?;

    let scale = |v: &[BigRational], a: &BigRational| -> Vec<BigRational> {
        v.iter().map(|x| x * a).collect()
    };
    let add = |u: &[BigRational], v: &[BigRational]| -> Vec<BigRational> {
        u.iter().zip(v).map(|(x, y)| x + y).collect()
    };

    let alpha = space.form(m, m_prime)? / BigRational::from_integer(2.into());
    let half = BigRational::new(1.into(), 2.into());
    let mut scalars = vec![
        BigRational::zero(),
        BigRational::from_integer(2.into()),
        BigRational::from_integer((-3).into()),
        half,
    ];
    scalars.push(alpha.clone());

    // (1) scalar can move between the two slots
    for a in &scalars {
        let lhs = transvection_pair(space, &scale(m, a), l)?;
        let rhs = transvection_pair(space, m, &scale(l, a))?;
        if lhs != rhs {
            return Ok(false);
        }
    }

    // (2) additivity in the isotropic slot
    let lhs = transvection_pair(space, m, l)?.mul(&transvection_pair(space, m, l_prime)?);
    let rhs = transvection_pair(space, m, &add(l, l_prime))?;
    if lhs != rhs {
        return Ok(false);
    }

    // (3) additivity in the perp slot, up to the central correction
    let lhs = transvection_pair(space, m, l)?.mul(&transvection_pair(space, m_prime, l)?);
    let central = transvection_pair(space, l, &scale(l, &alpha))?;
    let rhs = central.mul(&transvection_pair(space, &add(m, m_prime), l)?);
    if lhs != rhs {
        return Ok(false);
    }

    // (4) symmetry inside I
    let lhs = transvection_pair(space, l, l_prime)?;
    let rhs = transvection_pair(space, l_prime, l)?;
    Ok(lhs == rhs)
}

/// A product of `length` integer transvections with coordinates drawn from
/// `[-2, 2]`; deterministic for a fixed `(g, length, seed)`.
pub fn random_word(g: usize, length: usize, seed: u64) -> SymplecticMatrix {
    let space = SymplecticSpace::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut word = SymplecticMatrix::identity(&space);
    for _ in 0..length {
        let u: Vec<i64> = (0..space.dim()).map(|_| rng.gen_range(-2..=2)).collect();
        word = word.mul(&symplectic_transvection(&space, &u));
    }
    word
}

/// Outcome of a seeded batch of relation and symplectic-condition checks.
#[derive(Clone, Debug, Serialize)]
pub struct RelationTrialReport {
    pub g: usize,
    pub trials: usize,
    pub seed: u64,
    pub relations_ok: usize,
    pub symplectic_ok: usize,
}

impl RelationTrialReport {
    pub fn all_passed(&self) -> bool {
        self.relations_ok == self.trials && self.symplectic_ok == self.trials
    }
}

/// Runs `trials` seeded random relation instances at a fixed `g`. Each trial
/// draws an isotropic rank `k`, rational vectors `m, m' in I^perp` and
/// `l, l' in I` with numerators in `[-3, 3]` and denominators in `{1, 2, 3}`,
/// checks the four relations, and verifies that every matrix the trial
/// constructs is symplectic.
pub fn run_relation_trials(g: usize, trials: usize, seed: u64) -> RelationTrialReport {
    let space = SymplecticSpace::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut relations_ok = 0;
    let mut symplectic_ok = 0;
    for _ in 0..trials {
        let k = rng.gen_range(1..=g);
        let draw = |rng: &mut ChaCha8Rng| {
            BigRational::new(rng.gen_range(-3i64..=3).into(), rng.gen_range(1i64..=3).into())
        };
        let dim = space.dim();
        let mut m = vec![BigRational::zero(); dim];
        let mut m_prime = vec![BigRational::zero(); dim];
        let mut l = vec![BigRational::zero(); dim];
        let mut l_prime = vec![BigRational::zero(); dim];
        for i in 0..dim {
            let in_perp = !(g..g + k).contains(&i);
            if in_perp {
                m[i] = draw(&mut rng);
                m_prime[i] = draw(&mut rng);
            }
            if i < k {
                l[i] = draw(&mut rng);
                l_prime[i] = draw(&mut rng);
            }
        }
        let ok = check_relations(&space, k, &m, &m_prime, &l, &l_prime)
            .expect("trial vectors satisfy the membership preconditions");
        if ok {
            relations_ok += 1;
        }
        let constructed = [
            transvection_pair(&space, &m, &l),
            transvection_pair(&space, &m_prime, &l),
            transvection_pair(&space, &l, &l_prime),
        ];
        if constructed.iter().all(|t| {
            t.as_ref()
                .map(|t| space.is_symplectic(t.matrix()).unwrap_or(false))
                .unwrap_or(false)
        }) {
            symplectic_ok += 1;
        }
    }
    RelationTrialReport {
        g,
        trials,
        seed,
        relations_ok,
        symplectic_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64) -> BigRational {
        BigRational::from_integer(p.into())
    }

    fn basis(space: &SymplecticSpace, i: usize) -> Vec<BigRational> {
        let mut e = vec![BigRational::zero(); space.dim()];
        e[i] = r(1);
        e
    }

    #[test]
    fn gram_is_antisymmetric_and_unimodular() {
        let space = SymplecticSpace::new(2);
        let j = space.gram();
        let mut neg = QMatrix::zeros(4, 4);
        for a in 0..4 {
            for b in 0..4 {
                neg[(a, b)] = -j.transpose()[(a, b)].clone();
            }
        }
        assert_eq!(j, neg);
        // J^2 = -I, so det J = 1
        let j2 = j.mul(&j);
        let mut minus_id = QMatrix::zeros(4, 4);
        for a in 0..4 {
            minus_id[(a, a)] = r(-1);
        }
        assert_eq!(j2, minus_id);
    }

    #[test]
    fn transvection_pair_zero_is_identity() {
        let space = SymplecticSpace::new(2);
        let zero = vec![BigRational::zero(); 4];
        let t = transvection_pair(&space, &zero, &zero).unwrap();
        assert_eq!(t, SymplecticMatrix::identity(&space));
    }

    #[test]
    fn transvection_pair_on_basis_vectors() {
        let space = SymplecticSpace::new(2);
        let e1 = basis(&space, 0);
        let e2 = basis(&space, 1);
        let t = transvection_pair(&space, &e1, &e2).unwrap();
        assert_eq!(t.apply(&e1), e1);
        assert_eq!(t.apply(&e2), e2);
        // e3 -> e3 + e2, e4 -> e4 + e1
        let e3 = basis(&space, 2);
        let e4 = basis(&space, 3);
        let mut e3_plus_e2 = e3.clone();
        e3_plus_e2[1] = r(1);
        let mut e4_plus_e1 = e4.clone();
        e4_plus_e1[0] = r(1);
        assert_eq!(t.apply(&e3), e3_plus_e2);
        assert_eq!(t.apply(&e4), e4_plus_e1);
        assert!(space.is_symplectic(t.matrix()).unwrap());
    }

    #[test]
    fn transvection_pair_rejects_non_orthogonal() {
        let space = SymplecticSpace::new(2);
        let e1 = basis(&space, 0);
        let e3 = basis(&space, 2);
        assert!(matches!(
            transvection_pair(&space, &e1, &e3),
            Err(SymplecticError::NotOrthogonal { .. })
        ));
    }

    #[test]
    fn transvection_symmetry_in_isotropic_plane() {
        let space = SymplecticSpace::new(2);
        let l: Vec<BigRational> = vec![r(2), r(-1), r(0), r(0)];
        let l2: Vec<BigRational> = vec![r(1), r(3), r(0), r(0)];
        let a = transvection_pair(&space, &l, &l2).unwrap();
        let b = transvection_pair(&space, &l2, &l).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn standard_transvection_sign_convention() {
        let space = SymplecticSpace::new(2);
        let zero = symplectic_transvection(&space, &[0, 0, 0, 0]);
        assert_eq!(zero, SymplecticMatrix::identity(&space));
        let t = symplectic_transvection(&space, &[1, 0, 0, 0]);
        let e1 = basis(&space, 0);
        let e2 = basis(&space, 1);
        let e3 = basis(&space, 2);
        let e4 = basis(&space, 3);
        assert_eq!(t.apply(&e1), e1);
        assert_eq!(t.apply(&e2), e2);
        assert_eq!(t.apply(&e4), e4);
        let mut e3_plus_e1 = e3.clone();
        e3_plus_e1[0] = r(1);
        assert_eq!(t.apply(&e3), e3_plus_e1);
        assert!(space.is_symplectic(t.matrix()).unwrap());
    }

    #[test]
    fn is_symplectic_examples() {
        let space = SymplecticSpace::new(2);
        assert!(space.is_symplectic(&QMatrix::identity(4)).unwrap());
        // pairing-preserving scaling diag(2, 2, 1/2, 1/2)
        let mut d = QMatrix::identity(4);
        d[(0, 0)] = r(2);
        d[(1, 1)] = r(2);
        d[(2, 2)] = BigRational::new(1.into(), 2.into());
        d[(3, 3)] = BigRational::new(1.into(), 2.into());
        assert!(space.is_symplectic(&d).unwrap());
        let mut bad = QMatrix::identity(4);
        for i in 0..4 {
            bad[(i, i)] = r(2);
        }
        assert!(!space.is_symplectic(&bad).unwrap());
        assert!(matches!(
            space.is_symplectic(&QMatrix::identity(3)),
            Err(SymplecticError::MatrixSize { .. })
        ));
    }

    #[test]
    fn try_new_checks_the_form() {
        let space = SymplecticSpace::new(2);
        assert!(SymplecticMatrix::try_new(&space, QMatrix::identity(4)).is_ok());
        let mut bad = QMatrix::identity(4);
        bad[(0, 0)] = r(2);
        assert!(matches!(
            SymplecticMatrix::try_new(&space, bad),
            Err(SymplecticError::NotSymplectic)
        ));
        assert!(matches!(
            SymplecticMatrix::try_new(&space, QMatrix::identity(6)),
            Err(SymplecticError::MatrixSize { .. })
        ));
    }

    #[test]
    fn relations_hold_on_seeded_trials() {
        for g in [2usize, 3] {
            let report = run_relation_trials(g, 50, 17);
            assert!(report.all_passed(), "g = {g}: {report:?}");
        }
    }

    #[test]
    fn relations_reject_bad_membership() {
        let space = SymplecticSpace::new(2);
        let k = 1;
        let mut m = vec![BigRational::zero(); 4];
        m[2] = r(1); // e3 pairs nontrivially with e1, so m is not in I^perp
        let l = vec![BigRational::zero(); 4];
        assert!(matches!(
            check_relations(&space, k, &m, &m.clone(), &l, &l.clone()),
            Err(SymplecticError::Membership { vector: "m", .. })
        ));
        assert!(matches!(
            check_relations(&space, 0, &l, &l.clone(), &l.clone(), &l.clone()),
            Err(SymplecticError::IsotropicRank(0))
        ));
    }

    #[test]
    fn random_word_is_symplectic_and_deterministic() {
        for g in [2usize, 3] {
            let space = SymplecticSpace::new(g);
            let a = random_word(g, 12, 99);
            let b = random_word(g, 12, 99);
            assert_eq!(a, b);
            assert!(space.is_symplectic(a.matrix()).unwrap());
            assert_eq!(random_word(g, 0, 5), SymplecticMatrix::identity(&space));
            assert_ne!(random_word(g, 12, 100), a);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_vector() -> impl Strategy<Value = (usize, Vec<i64>)> {
            (2usize..=3).prop_flat_map(|g| {
                proptest::collection::vec(-2i64..=2, 2 * g).prop_map(move |v| (g, v))
            })
        }

        proptest! {
            #[test]
            fn every_integer_transvection_is_symplectic((g, u) in small_vector()) {
                let space = SymplecticSpace::new(g);
                let t = symplectic_transvection(&space, &u);
                prop_assert!(space.is_symplectic(t.matrix()).unwrap());
            }
        }
    }

    #[test]
    fn transvection_fixes_perp_modulo_isotropic() {
        // for m in I^perp, l in I: T(v) - v lies in I for every v in I^perp
        let space = SymplecticSpace::new(3);
        let k = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let dim = space.dim();
            let mut m = vec![BigRational::zero(); dim];
            let mut l = vec![BigRational::zero(); dim];
            let mut v = vec![BigRational::zero(); dim];
            for i in 0..dim {
                let in_perp = !(space.g()..space.g() + k).contains(&i);
                if in_perp {
                    m[i] = r(rng.gen_range(-2..=2));
                    v[i] = r(rng.gen_range(-2..=2));
                }
                if i < k {
                    l[i] = r(rng.gen_range(-2..=2));
                }
            }
            let t = transvection_pair(&space, &m, &l).unwrap();
            let moved = t.apply(&v);
            for i in 0..dim {
                let diff = &moved[i] - &v[i];
                if i >= k {
                    assert!(diff.is_zero(), "difference must lie in I");
                }
            }
        }
    }
}
