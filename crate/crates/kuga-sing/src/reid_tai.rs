//! Reid-Tai sums on the tangent spaces `V^n + Sym^2 V` of Kuga varieties,
//! quasi-reflection detection, and the exhaustive singularity scan.
//!
//! For a finite-order element with eigenvalue angles `alpha_i` in `[0, 1)`
//! on a space `W`, the Reid-Tai sum is `RT = sum alpha_i`. If no element
//! acts as a quasi-reflection, the quotient has canonical singularities
//! exactly when `RT >= 1` for every non-identity element. Here `W` is
//! `V^n + Sym^2 V` for a Hodge splitting `V` of a rational representation
//! of dimension `2g`, and the scan walks every abstract splitting.

use num::{BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::cyclic_rep::{enumerate_reps, enumerate_splittings, HodgeSplitting, RationalRep, RepError};

/// The eigenvalue multiset of an element on `V^n + Sym^2 V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentSpectrum {
    angles: Vec<Angle>,
    g: usize,
    n: usize,
}

impl TangentSpectrum {
    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Expected size `n*g + g(g+1)/2`.
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Eigenvalue angles of the symmetric square: pairwise sums mod 1 over
/// unordered index pairs `i <= j`, so `g(g+1)/2` entries for `g` inputs.
pub fn sym2_angles(v: &[Angle]) -> Vec<Angle> {
    let mut out = Vec::with_capacity(v.len() * (v.len() + 1) / 2);
    for i in 0..v.len() {
        for j in i..v.len() {
            out.push(v[i].add(&v[j]));
        }
    }
    out.sort();
    out
}

/// The spectrum of `V^n + Sym^2 V` for the splitting `lambda(V)`.
pub fn tangent_spectrum(splitting: &HodgeSplitting, n: usize) -> TangentSpectrum {
    assert!(n >= 1, "tangent spectrum needs n >= 1");
    let v = splitting.v_angles();
    let mut angles = Vec::with_capacity(n * v.len() + v.len() * (v.len() + 1) / 2);
    for _ in 0..n {
        angles.extend_from_slice(v);
    }
    angles.extend(sym2_angles(v));
    angles.sort();
    TangentSpectrum {
        angles,
        g: v.len(),
        n,
    }
}

/// Exact Reid-Tai sum of a spectrum.
pub fn reid_tai_sum(spectrum: &TangentSpectrum) -> BigRational {
    spectrum
        .angles
        .iter()
        .fold(BigRational::zero(), |acc, a| acc + a.to_rational())
}

/// True when exactly one eigenvalue differs from 1. The identity (all
/// angles zero) is not a quasi-reflection.
pub fn is_quasi_reflection(spectrum: &TangentSpectrum) -> bool {
    spectrum.angles.iter().filter(|a| !a.is_zero()).count() == 1
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ReidTaiError {
    #[error("representation has dimension {rep_two_g}, expected 2g = {expected}")]
    DimensionMismatch { rep_two_g: u64, expected: u64 },
    #[error("splitting does not belong to the representation {rep}")]
    ForeignSplitting { rep: String },
    #[error("invalid scan range: need 2 <= g_min <= g_max and 1 <= n_min <= n_max")]
    InvalidRange,
    #[error(transparent)]
    Rep(#[from] RepError),
}

/// A fully evaluated case of the singularity criterion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedCase {
    pub g: u64,
    pub n: u64,
    #[serde(with = "rep_as_label")]
    pub rep: RationalRep,
    pub v_angles: Vec<Angle>,
    #[serde(with = "rational_as_string")]
    pub rt: BigRational,
    #[serde(rename = "canonical")]
    pub is_canonical_cert: bool,
    #[serde(rename = "quasi_reflection")]
    pub is_quasi_reflection: bool,
}

mod rep_as_label {
    use super::RationalRep;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rep: &RationalRep, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&rep.label())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<RationalRep, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

mod rational_as_string {
    use num::BigRational;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Evaluates one `(g, n, rep, splitting)` case.
pub fn classify(
    g: u64,
    n: u64,
    rep: &RationalRep,
    splitting: &HodgeSplitting,
) -> Result<ClassifiedCase, ReidTaiError> {
    if rep.two_g() != 2 * g {
        return Err(ReidTaiError::DimensionMismatch {
            rep_two_g: rep.two_g(),
            expected: 2 * g,
        });
    }
    if !splitting.belongs_to(rep) {
        return Err(ReidTaiError::ForeignSplitting { rep: rep.label() });
    }
    let spectrum = tangent_spectrum(splitting, n as usize);
    let rt = reid_tai_sum(&spectrum);
    Ok(ClassifiedCase {
        g,
        n,
        rep: rep.clone(),
        v_angles: splitting.v_angles().to_vec(),
        is_canonical_cert: rt >= BigRational::one(),
        is_quasi_reflection: is_quasi_reflection(&spectrum),
        rt,
    })
}

/// Result of a scan: the cases with `RT < 1` and any quasi-reflections
/// encountered (expected: none), both deterministically sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub sub_one: Vec<ClassifiedCase>,
    pub quasi_reflections: Vec<ClassifiedCase>,
}

/// Scans every non-identity representation and every splitting over the
/// given inclusive `(g, n)` ranges, collecting all cases with `RT < 1`.
///
/// Work is partitioned across worker threads (capped by the
/// `KUGA_SING_THREADS` environment variable) and the result is sorted by
/// `(g, n, rep label, v_angles)`, so the output is deterministic.
pub fn scan(g_min: u64, g_max: u64, n_min: u64, n_max: u64) -> Result<ScanReport, ReidTaiError> {
    if g_min < 2 || g_min > g_max || n_min < 1 || n_min > n_max {
        return Err(ReidTaiError::InvalidRange);
    }

    let mut jobs: Vec<(u64, RationalRep)> = Vec::new();
    for g in g_min..=g_max {
        for rep in enumerate_reps(2 * g)? {
            if rep.is_identity() {
                continue;
            }
            jobs.push((g, rep));
        }
    }

    let n_range: Vec<u64> = (n_min..=n_max).collect();
    let results = run_partitioned(&jobs, |(g, rep)| {
        let mut found = ScanReport::default();
        for splitting in enumerate_splittings(rep) {
            // RT(n) = n * sum(v) + sum(sym2(v)), and nonzero counts add the
            // same way, so the per-splitting sums are computed once
            let v = splitting.v_angles();
            let sym2 = sym2_angles(v);
            let v_sum: BigRational = v.iter().map(Angle::to_rational).sum();
            let sym2_sum: BigRational = sym2.iter().map(Angle::to_rational).sum();
            let v_nonzero = v.iter().filter(|a| !a.is_zero()).count();
            let sym2_nonzero = sym2.iter().filter(|a| !a.is_zero()).count();
            for &n in &n_range {
                let rt = BigRational::from_integer(n.into()) * &v_sum + &sym2_sum;
                let quasi_reflection = n as usize * v_nonzero + sym2_nonzero == 1;
                if !quasi_reflection && rt >= BigRational::one() {
                    continue;
                }
                let case = classify(*g, n, rep, &splitting).expect("enumerated case is consistent");
                debug_assert_eq!(case.rt, rt);
                debug_assert_eq!(case.is_quasi_reflection, quasi_reflection);
                if case.is_quasi_reflection {
                    found.quasi_reflections.push(case.clone());
                }
                if case.rt < BigRational::one() {
                    found.sub_one.push(case);
                }
            }
        }
        found
    });

    let mut report = ScanReport::default();
    for part in results {
        report.sub_one.extend(part.sub_one);
        report.quasi_reflections.extend(part.quasi_reflections);
    }
    sort_cases(&mut report.sub_one);
    sort_cases(&mut report.quasi_reflections);
    Ok(report)
}

fn sort_cases(cases: &mut [ClassifiedCase]) {
    cases.sort_by(|a, b| {
        (a.g, a.n, a.rep.label(), &a.v_angles).cmp(&(b.g, b.n, b.rep.label(), &b.v_angles))
    });
}

/// Number of scan workers: `KUGA_SING_THREADS` if set, else the available
/// parallelism, always at least 1.
pub fn worker_count() -> usize {
    std::env::var("KUGA_SING_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Applies `f` to each job on a small thread pool; the returned vector is in
/// job order regardless of scheduling.
fn run_partitioned<J: Sync, R: Send>(jobs: &[J], f: impl Fn(&J) -> R + Sync) -> Vec<R> {
    let workers = worker_count().min(jobs.len()).max(1);
    if workers == 1 {
        return jobs.iter().map(f).collect();
    }
    let mut results: Vec<Option<R>> = (0..jobs.len()).map(|_| None).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let r = f(&jobs[i]);
                slots.lock().expect("no poisoned worker")[i] = Some(r);
            });
        }
    });
    results.into_iter().map(|r| r.expect("every job ran")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic_rep::parse_rep;

    fn splitting(angles: &[(i64, i64)]) -> HodgeSplitting {
        HodgeSplitting::from_angles(angles.iter().map(|&(p, q)| Angle::new(p, q)).collect())
    }

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn sym2_examples() {
        let v = [Angle::new(1, 6), Angle::zero()];
        assert_eq!(
            sym2_angles(&v),
            vec![Angle::zero(), Angle::new(1, 6), Angle::new(1, 3)]
        );
        let zeros = [Angle::zero(); 4];
        assert_eq!(sym2_angles(&zeros), vec![Angle::zero(); 10]);
        let v = [Angle::new(5, 6), Angle::new(5, 6)];
        assert_eq!(sym2_angles(&v), vec![Angle::new(2, 3); 3]);
    }

    #[test]
    fn tangent_spectrum_examples() {
        let s = tangent_spectrum(&splitting(&[(1, 6), (0, 1)]), 1);
        let mut expected = vec![
            Angle::new(1, 6),
            Angle::zero(),
            Angle::new(1, 3),
            Angle::new(1, 6),
            Angle::zero(),
        ];
        expected.sort();
        assert_eq!(s.angles(), expected.as_slice());
        assert_eq!(s.len(), 5);

        let s = tangent_spectrum(&splitting(&[(1, 2), (1, 2)]), 1);
        let mut expected = vec![
            Angle::half(),
            Angle::half(),
            Angle::zero(),
            Angle::zero(),
            Angle::zero(),
        ];
        expected.sort();
        assert_eq!(s.angles(), expected.as_slice());

        let s = tangent_spectrum(&splitting(&[(0, 1), (0, 1)]), 3);
        assert_eq!(s.angles(), vec![Angle::zero(); 9].as_slice());
    }

    #[test]
    fn reid_tai_sum_examples() {
        let s = tangent_spectrum(&splitting(&[(1, 6), (0, 1)]), 1);
        assert_eq!(reid_tai_sum(&s), rat(2, 3));
        let s = tangent_spectrum(&splitting(&[(1, 6), (0, 1)]), 2);
        assert_eq!(reid_tai_sum(&s), rat(5, 6));
        let s = tangent_spectrum(&splitting(&[(0, 1), (0, 1)]), 2);
        assert_eq!(reid_tai_sum(&s), BigRational::zero());
    }

    #[test]
    fn quasi_reflection_examples() {
        let s = tangent_spectrum(&splitting(&[(1, 6), (0, 1)]), 1);
        assert!(!is_quasi_reflection(&s));
        let one_nonzero = TangentSpectrum {
            angles: vec![Angle::zero(), Angle::zero(), Angle::half()],
            g: 1,
            n: 2,
        };
        assert!(is_quasi_reflection(&one_nonzero));
        let s = tangent_spectrum(&splitting(&[(0, 1), (0, 1)]), 1);
        assert!(!is_quasi_reflection(&s));
    }

    #[test]
    fn classify_examples() {
        let rep = parse_rep("V6+V1^2").unwrap();
        let case = classify(2, 1, &rep, &splitting(&[(1, 6), (0, 1)])).unwrap();
        assert_eq!(case.rt, rat(2, 3));
        assert!(!case.is_canonical_cert);
        assert!(!case.is_quasi_reflection);

        let case = classify(2, 1, &rep, &splitting(&[(5, 6), (0, 1)])).unwrap();
        assert_eq!(case.rt, rat(7, 3));
        assert!(case.is_canonical_cert);

        let rep3 = parse_rep("V3+V1^2").unwrap();
        let case = classify(2, 1, &rep3, &splitting(&[(1, 3), (0, 1)])).unwrap();
        assert!(case.rt >= BigRational::one());
    }

    #[test]
    fn classify_rejects_mismatches() {
        let rep = parse_rep("V6+V1^2").unwrap();
        assert_eq!(
            classify(3, 1, &rep, &splitting(&[(1, 6), (0, 1)])).unwrap_err(),
            ReidTaiError::DimensionMismatch { rep_two_g: 4, expected: 6 }
        );
        assert!(matches!(
            classify(2, 1, &rep, &splitting(&[(1, 4), (0, 1)])).unwrap_err(),
            ReidTaiError::ForeignSplitting { .. }
        ));
    }

    #[test]
    fn classified_case_json_shape() {
        let rep = parse_rep("V6+V1^2").unwrap();
        let case = classify(2, 1, &rep, &splitting(&[(1, 6), (0, 1)])).unwrap();
        let json = serde_json::to_value(&case).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "g": 2,
                "n": 1,
                "rep": "V6+V1^2",
                "v_angles": ["0", "1/6"],
                "rt": "2/3",
                "canonical": false,
                "quasi_reflection": false
            })
        );
        let back: ClassifiedCase = serde_json::from_value(json).unwrap();
        assert_eq!(back, case);
    }

    #[test]
    fn scan_reproduces_the_exceptional_list() {
        let report = scan(2, 6, 1, 4).unwrap();
        assert!(report.quasi_reflections.is_empty());
        let found: Vec<(u64, u64, String, Vec<Angle>)> = report
            .sub_one
            .iter()
            .map(|c| (c.g, c.n, c.rep.label(), c.v_angles.clone()))
            .collect();
        let lam = |g: usize| {
            let mut v = vec![Angle::zero(); g - 1];
            v.push(Angle::new(1, 6));
            v.sort();
            v
        };
        assert_eq!(
            found,
            vec![
                (2, 1, "V6+V1^2".to_string(), lam(2)),
                (2, 2, "V6+V1^2".to_string(), lam(2)),
                (3, 1, "V6+V1^4".to_string(), lam(3)),
            ]
        );
        let rts: Vec<BigRational> = report.sub_one.iter().map(|c| c.rt.clone()).collect();
        assert_eq!(rts, vec![rat(2, 3), rat(5, 6), rat(5, 6)]);
    }

    #[test]
    fn scan_fast_path_matches_classify() {
        // the per-splitting sums used inside scan agree with the full
        // spectrum route on every enumerated case of dimension 4 and 6
        for g in [2u64, 3] {
            for rep in enumerate_reps(2 * g).unwrap() {
                for s in enumerate_splittings(&rep) {
                    let v_sum: BigRational = s.v_angles().iter().map(Angle::to_rational).sum();
                    let sym2 = sym2_angles(s.v_angles());
                    let sym2_sum: BigRational = sym2.iter().map(Angle::to_rational).sum();
                    let v_nonzero = s.v_angles().iter().filter(|a| !a.is_zero()).count();
                    let sym2_nonzero = sym2.iter().filter(|a| !a.is_zero()).count();
                    for n in 1..=3u64 {
                        let case = classify(g, n, &rep, &s).unwrap();
                        let fast = BigRational::from_integer(n.into()) * &v_sum + &sym2_sum;
                        assert_eq!(case.rt, fast);
                        assert_eq!(
                            case.is_quasi_reflection,
                            n as usize * v_nonzero + sym2_nonzero == 1
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn scan_empty_ranges() {
        assert!(scan(4, 6, 1, 4).unwrap().sub_one.is_empty());
        assert!(scan(2, 2, 3, 3).unwrap().sub_one.is_empty());
    }

    #[test]
    fn scan_rejects_invalid_ranges() {
        assert_eq!(scan(1, 3, 1, 2).unwrap_err(), ReidTaiError::InvalidRange);
        assert_eq!(scan(3, 2, 1, 2).unwrap_err(), ReidTaiError::InvalidRange);
        assert_eq!(scan(2, 3, 0, 2).unwrap_err(), ReidTaiError::InvalidRange);
        assert_eq!(scan(2, 3, 2, 1).unwrap_err(), ReidTaiError::InvalidRange);
    }

    #[test]
    fn rt_is_nonnegative_and_vanishes_only_for_trivial_action() {
        for rep in enumerate_reps(4).unwrap() {
            for s in enumerate_splittings(&rep) {
                for n in 1..=3u64 {
                    let case = classify(2, n, &rep, &s).unwrap();
                    assert!(case.rt >= BigRational::zero());
                    let all_zero = case.v_angles.iter().all(Angle::is_zero);
                    assert_eq!(case.rt == BigRational::zero(), all_zero);
                }
            }
        }
    }

    #[test]
    fn additivity_over_disjoint_union() {
        let a = tangent_spectrum(&splitting(&[(1, 6), (0, 1)]), 1);
        let b = tangent_spectrum(&splitting(&[(1, 4), (3, 4)]), 2);
        let mut both = a.angles().to_vec();
        both.extend_from_slice(b.angles());
        let union = TangentSpectrum { angles: both, g: 0, n: 0 };
        assert_eq!(reid_tai_sum(&union), reid_tai_sum(&a) + reid_tai_sum(&b));
    }

    #[test]
    fn conjugation_pairs_sum_to_nonzero_count() {
        for rep in enumerate_reps(6).unwrap() {
            for s in enumerate_splittings(&rep) {
                let nonzero = s.v_angles().iter().filter(|a| !a.is_zero()).count();
                let paired: BigRational = s
                    .v_angles()
                    .iter()
                    .filter(|a| !a.is_zero())
                    .map(|a| a.to_rational() + a.conj().to_rational())
                    .sum();
                assert_eq!(paired, BigRational::from_integer(nonzero.into()));
            }
        }
    }

    #[test]
    fn rt_monotone_in_n() {
        for rep in enumerate_reps(4).unwrap() {
            for s in enumerate_splittings(&rep) {
                for n in 1..=4usize {
                    let lo = reid_tai_sum(&tangent_spectrum(&s, n));
                    let hi = reid_tai_sum(&tangent_spectrum(&s, n + 1));
                    assert!(hi >= lo);
                    let all_zero = s.v_angles().iter().all(Angle::is_zero);
                    assert_eq!(hi == lo, all_zero, "rep {} n {}", rep.label(), n);
                }
            }
        }
    }

    #[test]
    fn closed_family_formula() {
        for g in 2..=8u64 {
            let rep = RationalRep::new([(6, 1), (1, 2 * g - 2)]).unwrap();
            let mut v = vec![Angle::zero(); g as usize - 1];
            v.push(Angle::new(1, 6));
            let s = HodgeSplitting::from_angles(v);
            for n in 1..=8u64 {
                let case = classify(g, n, &rep, &s).unwrap();
                let expected = rat(1, 3) + rat((g + n - 1) as i64, 6);
                assert_eq!(case.rt, expected, "g={g} n={n}");
            }
        }
    }

    #[test]
    fn unit_multiplicity_reps_have_rt_at_least_one() {
        // cases V_1^{2k} + V_2^{2l}, l >= 1: RT = l(n + k)/2 >= 1
        for g in 2..=5u64 {
            for l in 1..=g {
                let k = g - l;
                let mut parts = vec![(2u64, 2 * l)];
                if k > 0 {
                    parts.push((1, 2 * k));
                }
                let rep = RationalRep::new(parts).unwrap();
                for s in enumerate_splittings(&rep) {
                    for n in 1..=4u64 {
                        let case = classify(g, n, &rep, &s).unwrap();
                        assert_eq!(case.rt, rat((l * (n + k)) as i64, 2));
                        assert!(case.is_canonical_cert);
                    }
                }
            }
        }
    }
}
