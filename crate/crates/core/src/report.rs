//! Tables of `C(3,d,K)` and `D(3,d,K)` next to their known values.

use serde::{Deserialize, Serialize};

use crate::certificate::SCHEMA_VERSION;
use crate::decomp::{generator_degree, DecompError, GeneratorDegreeReport};
use crate::nilpotency::{nilpotency_degree, NildegValue, NilpotencyReport};
use crate::oracle::Oracle;
use crate::scalar::Characteristic;

/// Known values of `C(3,d,K)`; two entries where only alternatives are known.
pub fn expected_nilpotency_degree(d: usize, p: u64) -> Vec<usize> {
    if d == 1 {
        return vec![3];
    }
    match p {
        2 if d >= 3 => vec![d + 3],
        3 if d % 2 == 0 => vec![3 * d + 1],
        3 => vec![3 * d, 3 * d + 1],
        _ => vec![6],
    }
}

/// Known values of `D(3,d,K)`.
pub fn expected_generator_degree(d: usize, p: u64) -> Vec<usize> {
    if d == 1 {
        return vec![3];
    }
    match p {
        2 if d >= 4 => vec![d + 2],
        3 if d % 2 == 0 => vec![3 * d],
        3 if d % 6 == 1 => vec![3 * d - 1, 3 * d],
        3 => vec![3 * d - 1],
        _ => vec![6],
    }
}

/// How a computed cell relates to the known value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agreement {
    /// Exact and equal to the single known value.
    Match,
    /// Exact and equal to one of several alternatives.
    Resolved,
    /// Exact and different.
    Mismatch,
    /// Only bounds; they contain a known value.
    Consistent,
    /// Only bounds; they exclude every known value.
    Contradicts,
}

pub fn compare(value: NildegValue, expected: &[usize]) -> Agreement {
    match value {
        NildegValue::Exact { value } if expected.contains(&value) => {
            if expected.len() == 1 {
                Agreement::Match
            } else {
                Agreement::Resolved
            }
        }
        NildegValue::Exact { .. } => Agreement::Mismatch,
        NildegValue::Interval { lower, upper } => {
            if expected.iter().any(|&e| lower <= e && e <= upper) {
                Agreement::Consistent
            } else {
                Agreement::Contradicts
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell<T> {
    pub d: usize,
    #[serde(rename = "char")]
    pub chr: Characteristic,
    pub computed: NildegValue,
    pub expected: Vec<usize>,
    pub agreement: Agreement,
    pub detail: T,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table<T> {
    pub schema_version: u32,
    pub theorem: u8,
    pub column_budget: u64,
    pub cells: Vec<Cell<T>>,
}

impl<T> Table<T> {
    pub fn all_agree(&self) -> bool {
        self.cells.iter().all(|c| !matches!(c.agreement, Agreement::Mismatch | Agreement::Contradicts))
    }
}

pub fn nilpotency_table(oracle: &mut Oracle, chr: Characteristic, ds: impl IntoIterator<Item = usize>) -> Table<NilpotencyReport> {
    let cells = ds
        .into_iter()
        .map(|d| {
            let r = nilpotency_degree(oracle, d, chr, 3);
            oracle.clear();
            let expected = expected_nilpotency_degree(d, chr.value());
            Cell { d, chr, computed: r.value, agreement: compare(r.value, &expected), expected, detail: r }
        })
        .collect();
    Table { schema_version: SCHEMA_VERSION, theorem: 1, column_budget: oracle.budget, cells }
}

pub fn generator_table(
    oracle: &mut Oracle,
    chr: Characteristic,
    ds: impl IntoIterator<Item = usize>,
) -> Result<Table<GeneratorDegreeReport>, DecompError> {
    let mut cells = Vec::new();
    for d in ds {
        let r = generator_degree(oracle, d, chr)?;
        oracle.clear();
        let expected = expected_generator_degree(d, chr.value());
        cells.push(Cell { d, chr, computed: r.value, agreement: compare(r.value, &expected), expected, detail: r });
    }
    Ok(Table { schema_version: SCHEMA_VERSION, theorem: 2, column_budget: oracle.budget, cells })
}
