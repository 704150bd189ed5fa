//! Weight bookkeeping for pluricanonical forms on Kuga varieties, plus the
//! small table of known cusp-form facts for `Sp(2g, Z)`, `g = 2..6`, with
//! their Kodaira-dimension consequences.
//!
//! The `m`-canonical bundle corresponds to modular forms of weight
//! `(g+n+1) m`; when `-1` lies in the group and `g k` is odd, the whole
//! weight-`k` space vanishes because `-1` acts by `(-1)^{g k} = -1`.

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TableError {
    #[error("weight_of needs g >= 2, n >= 1, m >= 0; got g={g}, n={n}, m={m}")]
    Domain { g: i64, n: i64, m: i64 },
    #[error("no table entry for g = {0}; the table covers g = 2..6")]
    OutOfTable(i64),
}

/// A dimension that is either known exactly or only bounded from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimValue {
    Exact(u32),
    AtLeast(u32),
}

impl DimValue {
    pub fn lower_bound(&self) -> u32 {
        match *self {
            DimValue::Exact(d) | DimValue::AtLeast(d) => d,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, DimValue::Exact(_))
    }
}

/// One recorded cusp-form fact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspFormFact {
    pub g: u32,
    pub weight: u32,
    pub dim: DimValue,
    /// Whether `weight` is known to be the minimal weight of a nonzero
    /// cusp form for this `g`.
    pub is_minimal_weight: bool,
    pub source: String,
}

/// Lookup result: the minimal recorded cusp weight, the dimension there,
/// and the least `n` with nonnegative Kodaira dimension that the weight
/// bookkeeping yields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KodairaFact {
    pub g: u32,
    pub min_cusp_weight: u32,
    pub dim_at_min: DimValue,
    pub min_n_for_nonneg_kodaira: u32,
}

/// The weight of modular forms corresponding to `m`-canonical forms on the
/// `n`-fold family: `(g + n + 1) m`.
pub fn weight_of(g: i64, n: i64, m: i64) -> Result<i64, TableError> {
    if g < 2 || n < 1 || m < 0 {
        return Err(TableError::Domain { g, n, m });
    }
    Ok((g + n + 1) * m)
}

/// True exactly when `-1` lies in the group and `g k` is odd, in which case
/// every modular form of weight `k` vanishes.
pub fn parity_vanishes(g: i64, k: i64, minus_one_in_gamma: bool) -> bool {
    minus_one_in_gamma && (g * k) % 2 != 0
}

/// The recorded facts for `g = 2..6`.
pub fn cusp_form_table() -> Vec<CuspFormFact> {
    vec![
        CuspFormFact {
            g: 2,
            weight: 10,
            dim: DimValue::Exact(1),
            is_minimal_weight: true,
            source: "Igusa: unique cusp form of weight 10".to_string(),
        },
        CuspFormFact {
            g: 3,
            weight: 12,
            dim: DimValue::Exact(1),
            is_minimal_weight: true,
            source: "Tsuyumine: unique cusp form of weight 12".to_string(),
        },
        CuspFormFact {
            g: 4,
            weight: 8,
            dim: DimValue::Exact(1),
            is_minimal_weight: true,
            source: "Igusa: Schottky form; Salvati Manni: minimal weight".to_string(),
        },
        CuspFormFact {
            g: 5,
            weight: 12,
            dim: DimValue::Exact(2),
            is_minimal_weight: true,
            source: "Nebe-Venkov: dimension 2; Poor-Yuen: minimal weight".to_string(),
        },
        CuspFormFact {
            g: 6,
            weight: 12,
            dim: DimValue::AtLeast(3),
            is_minimal_weight: false,
            source: "Nebe-Venkov: dimension >= 3; Poor-Yuen: none of weight <= 8".to_string(),
        },
    ]
}

/// Table lookup for `g` in `2..6`; `min_n = min_cusp_weight - g - 1` by the
/// weight correspondence with `m = 1`.
pub fn kodaira_fact(g: i64) -> Result<KodairaFact, TableError> {
    let fact = cusp_form_table()
        .into_iter()
        .find(|f| i64::from(f.g) == g)
        .ok_or(TableError::OutOfTable(g))?;
    Ok(KodairaFact {
        g: fact.g,
        min_cusp_weight: fact.weight,
        dim_at_min: fact.dim,
        min_n_for_nonneg_kodaira: fact.weight - fact.g - 1,
    })
}
