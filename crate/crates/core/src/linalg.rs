//! Exact sparse linear algebra over GF(p) and ℚ.
//!
//! The workhorse is [`Echelon`], an incrementally built semi-echelon basis
//! (each stored row has a distinct leading column normalized to 1). Rows
//! are reduced left to right against stored pivots; the set of pivot
//! columns of the final basis depends only on the row space, so kernel
//! vectors normalized on the free columns are canonical.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::relations::RelationSystem;
use crate::scalar::{add_mod, inv_mod, mul_mod, Characteristic, Scalar};

/// Large prime used for modular computations standing in for ℚ.
pub const RECONSTRUCTION_PRIME: u64 = (1u64 << 61) - 1;

/// Field operations used by the elimination kernels.
pub trait FieldOps: Clone + Send + Sync {
    type E: Clone + PartialEq + Debug + Send + Sync;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Self::E;
    fn from_i64(&self, v: i64) -> Self::E;

    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E {
        self.add(a, &self.neg(b))
    }

    /// `a - c·b`
    fn sub_mul(&self, a: &Self::E, c: &Self::E, b: &Self::E) -> Self::E {
        self.sub(a, &self.mul(c, b))
    }
}

/// GF(p) with residues in `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModP(pub u64);

impl FieldOps for ModP {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.0
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        if self.0 < (1 << 62) {
            let s = a + b;
            if s >= self.0 {
                s - self.0
            } else {
                s
            }
        } else {
            add_mod(*a, *b, self.0)
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        if self.0 < (1 << 32) {
            a * b % self.0
        } else {
            mul_mod(*a, *b, self.0)
        }
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.0 - a
        }
    }
    fn inv(&self, a: &u64) -> u64 {
        inv_mod(*a, self.0)
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.0 as i64) as u64
    }
    #[inline]
    fn sub_mul(&self, a: &u64, c: &u64, b: &u64) -> u64 {
        let m = self.mul(c, b);
        self.add(a, &self.neg(&m))
    }
}

/// ℚ with arbitrary-precision rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rationals;

impl FieldOps for Rationals {
    type E = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        a.recip()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
}

pub type SparseVec<E> = Vec<(u32, E)>;

/// Result of reducing a vector against an [`Echelon`].
#[derive(Clone, Debug)]
pub struct Reduced<E> {
    /// Entries left on free (non-pivot) columns, sorted by column.
    pub remainder: SparseVec<E>,
    /// When history is tracked: coefficients `c_i` with
    /// `v = remainder + Σ c_i · input_i`, indexed by acceptance order.
    pub combination: Option<SparseVec<E>>,
}

/// Incrementally built reduced row echelon basis.
///
/// Each stored row has its pivot normalized to 1 and zeros on every other
/// pivot column. The pivot of a new row is its least nonzero column after
/// reduction, so the pivot set (and the whole basis) depends only on the
/// row space.
#[derive(Clone, Debug)]
pub struct Echelon<F: FieldOps> {
    field: F,
    ncols: usize,
    pivot_of_col: Vec<u32>,
    rows: Vec<SparseVec<F::E>>,
    pivots: Vec<u32>,
    /// Caller-supplied ids of the rows that increased the rank.
    accepted: Vec<usize>,
    history: Option<Vec<SparseVec<F::E>>>,
    acc: Vec<F::E>,
    live: Vec<bool>,
    touched: Vec<u32>,
}

const NO_PIVOT: u32 = u32::MAX;

fn merge_axpy<F: FieldOps>(f: &F, a: &[(u32, F::E)], y: &F::E, b: &[(u32, F::E)]) -> SparseVec<F::E> {
    // a - y·b
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, f.neg(&f.mul(y, &b[j].1))));
            j += 1;
        } else {
            let v = f.sub_mul(&a[i].1, y, &b[j].1);
            if !f.is_zero(&v) {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn lookup<'a, E>(row: &'a [(u32, E)], col: u32) -> Option<&'a E> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|i| &row[i].1)
}

impl<F: FieldOps> Echelon<F> {
    pub fn new(field: F, ncols: usize, track_history: bool) -> Echelon<F> {
        let zero = field.zero();
        Echelon {
            ncols,
            pivot_of_col: vec![NO_PIVOT; ncols],
            rows: Vec::new(),
            pivots: Vec::new(),
            accepted: Vec::new(),
            history: if track_history { Some(Vec::new()) } else { None },
            acc: vec![zero; ncols],
            live: vec![false; ncols],
            touched: Vec::new(),
            field,
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn accepted(&self) -> &[usize] {
        &self.accepted
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_of_col[col] != NO_PIVOT
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ncols).filter(|&c| !self.is_pivot(c)).collect()
    }

    fn bump(&mut self, c: u32, x: &F::E, scale: Option<&F::E>) {
        let cu = c as usize;
        let nv = match scale {
            None => self.field.add(&self.acc[cu], x),
            Some(y) => self.field.sub_mul(&self.acc[cu], y, x),
        };
        self.acc[cu] = nv;
        if !self.live[cu] {
            self.live[cu] = true;
            self.touched.push(c);
        }
    }

    fn reduce_inner(&mut self, v: &[(u32, F::E)], with_history: bool) -> Reduced<F::E> {
        let f = self.field.clone();
        for (c, x) in v {
            self.bump(*c, x, None);
        }
        // Pivot entries of v are not changed by subtracting other basis
        // rows, so one pass over them suffices.
        let mut hits: Vec<(u32, F::E)> = Vec::new();
        for &c in &self.touched {
            let r = self.pivot_of_col[c as usize];
            if r != NO_PIVOT && !f.is_zero(&self.acc[c as usize]) {
                hits.push((r, self.acc[c as usize].clone()));
            }
        }
        for (r, x) in &hits {
            let row = std::mem::take(&mut self.rows[*r as usize]);
            for (c, y) in &row {
                self.bump(*c, y, Some(x));
            }
            self.rows[*r as usize] = row;
        }
        let mut remainder: SparseVec<F::E> = Vec::new();
        for &c in &self.touched {
            let cu = c as usize;
            let x = std::mem::replace(&mut self.acc[cu], f.zero());
            self.live[cu] = false;
            if !f.is_zero(&x) {
                debug_assert!(self.pivot_of_col[cu] == NO_PIVOT);
                remainder.push((c, x));
            }
        }
        self.touched.clear();
        remainder.sort_by_key(|e| e.0);
        let history = if with_history { self.history.take() } else { None };
        let combination = match &history {
            Some(h) => {
                for (r, x) in &hits {
                    for (i, y) in &h[*r as usize] {
                        self.bump(*i, y, Some(&f.neg(x)));
                    }
                }
                let mut comb: SparseVec<F::E> = Vec::new();
                for &i in &self.touched {
                    let x = std::mem::replace(&mut self.acc[i as usize], f.zero());
                    self.live[i as usize] = false;
                    if !f.is_zero(&x) {
                        comb.push((i, x));
                    }
                }
                self.touched.clear();
                comb.sort_by_key(|e| e.0);
                Some(comb)
            }
            None => None,
        };
        if history.is_some() {
            self.history = history;
        }
        Reduced { remainder, combination }
    }

    /// Adds a row; returns true if it increased the rank.
    pub fn insert(&mut self, v: &[(u32, F::E)], id: usize) -> bool {
        if self.is_full() {
            return false;
        }
        let track = self.history.is_some();
        if track {
            // history indices live in the accumulator too
            assert!(self.accepted.len() < self.ncols || self.ncols == 0);
        }
        let red = self.reduce_inner(v, track);
        if red.remainder.is_empty() {
            return false;
        }
        let f = self.field.clone();
        let lead = red.remainder[0].0;
        let inv = f.inv(&red.remainder[0].1);
        let row: SparseVec<F::E> = red.remainder.into_iter().map(|(c, x)| (c, f.mul(&x, &inv))).collect();
        let new_hist = if track {
            // new row = inv · (input − Σ comb)
            let mut hv: SparseVec<F::E> = red
                .combination
                .unwrap_or_default()
                .into_iter()
                .map(|(i, x)| (i, f.neg(&f.mul(&x, &inv))))
                .collect();
            hv.push((self.accepted.len() as u32, inv.clone()));
            hv.sort_by_key(|e| e.0);
            Some(hv)
        } else {
            None
        };
        for r in 0..self.rows.len() {
            if let Some(y) = lookup(&self.rows[r], lead).cloned() {
                self.rows[r] = merge_axpy(&f, &self.rows[r], &y, &row);
                if let (Some(h), Some(nh)) = (self.history.as_mut(), new_hist.as_ref()) {
                    h[r] = merge_axpy(&f, &h[r], &y, nh);
                }
            }
        }
        if let (Some(h), Some(nh)) = (self.history.as_mut(), new_hist) {
            h.push(nh);
        }
        self.pivot_of_col[lead as usize] = self.rows.len() as u32;
        self.pivots.push(lead);
        self.rows.push(row);
        self.accepted.push(id);
        true
    }

    /// Fully reduces `v` against the basis.
    pub fn reduce(&mut self, v: &[(u32, F::E)]) -> Reduced<F::E> {
        let track = self.history.is_some();
        self.reduce_inner(v, track)
    }

    /// The kernel vector that is 1 on free column `free`, 0 on the other
    /// free columns, and annihilates every stored row.
    pub fn kernel_vector(&self, free: usize) -> Vec<F::E> {
        assert!(!self.is_pivot(free));
        let f = &self.field;
        let mut k = vec![f.zero(); self.ncols];
        k[free] = f.one();
        for (r, row) in self.rows.iter().enumerate() {
            if let Some(x) = lookup(row, free as u32) {
                k[self.pivots[r] as usize] = f.neg(x);
            }
        }
        k
    }

    /// Canonical kernel basis, one vector per free column (ascending).
    pub fn kernel_basis(&self) -> Vec<(usize, Vec<F::E>)> {
        self.free_columns().into_iter().map(|c| (c, self.kernel_vector(c))).collect()
    }
}

/// Sparse matrix with scalar entries of one characteristic.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    pub ncols: usize,
    pub chr: Characteristic,
    pub rows: Vec<Vec<(u32, Scalar)>>,
}

impl SparseMatrix {
    pub fn new(ncols: usize, chr: Characteristic) -> SparseMatrix {
        SparseMatrix { ncols, chr, rows: Vec::new() }
    }

    /// Adds a row, dropping explicit zeros.
    pub fn push_row(&mut self, mut row: Vec<(u32, Scalar)>) {
        row.retain(|(_, x)| !x.is_zero());
        for (c, x) in &row {
            assert!((*c as usize) < self.ncols, "column {c} out of range");
            assert_eq!(x.characteristic(), self.chr);
        }
        row.sort_by_key(|e| e.0);
        self.rows.push(row);
    }

    pub fn from_dense(chr: Characteristic, rows: &[Vec<i64>]) -> SparseMatrix {
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut m = SparseMatrix::new(ncols, chr);
        for r in rows {
            m.push_row(r.iter().enumerate().map(|(c, &v)| (c as u32, chr.from_i64(v))).collect());
        }
        m
    }

    pub fn from_system(s: &RelationSystem) -> SparseMatrix {
        let mut m = SparseMatrix::new(s.columns.len(), s.desc.chr);
        for r in &s.rows {
            m.push_row(r.entries.clone());
        }
        m
    }
}

/// Outcome of a row-space membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// `v = Σ coefficient · row[index]`.
    InRowSpace { coefficients: Vec<(usize, Scalar)> },
    /// A functional vanishing on every row with nonzero value on `v`.
    Outside { functional: Vec<Scalar>, value: Scalar },
}

fn to_mod(v: &[(u32, Scalar)]) -> SparseVec<u64> {
    v.iter().map(|(c, x)| (*c, x.residue())).collect()
}

fn to_rat(v: &[(u32, Scalar)]) -> SparseVec<BigRational> {
    v.iter().map(|(c, x)| (*c, x.rational().clone())).collect()
}

fn build_mod(m: &SparseMatrix, history: bool) -> Echelon<ModP> {
    let mut e = Echelon::new(ModP(m.chr.value()), m.ncols, history);
    for (i, r) in m.rows.iter().enumerate() {
        e.insert(&to_mod(r), i);
    }
    e
}

fn build_rat(m: &SparseMatrix, history: bool) -> Echelon<Rationals> {
    let mut e = Echelon::new(Rationals, m.ncols, history);
    for (i, r) in m.rows.iter().enumerate() {
        e.insert(&to_rat(r), i);
    }
    e
}

/// Exact rank.
pub fn rank(m: &SparseMatrix) -> usize {
    if m.chr.is_zero() {
        build_rat(m, false).rank()
    } else {
        build_mod(m, false).rank()
    }
}

/// Basis of `{a : M·a = 0}`, one vector per free column.
pub fn nullspace_basis(m: &SparseMatrix) -> Vec<Vec<Scalar>> {
    let chr = m.chr;
    if chr.is_zero() {
        build_rat(m, false)
            .kernel_basis()
            .into_iter()
            .map(|(_, k)| k.into_iter().map(Scalar::Rational).collect())
            .collect()
    } else {
        build_mod(m, false)
            .kernel_basis()
            .into_iter()
            .map(|(_, k)| k.into_iter().map(|x| Scalar::Residue { value: x, modulus: chr.value() }).collect())
            .collect()
    }
}

/// Decides whether `v` lies in the row space of `m`.
pub fn membership(m: &SparseMatrix, v: &[(u32, Scalar)]) -> Membership {
    let chr = m.chr;
    let mut v = v.to_vec();
    v.retain(|(_, x)| !x.is_zero());
    v.sort_by_key(|e| e.0);
    if chr.is_zero() {
        let mut e = build_rat(m, true);
        let red = e.reduce(&to_rat(&v));
        finish_membership(&e, red, |x| Scalar::Rational(x))
    } else {
        let mut e = build_mod(m, true);
        let red = e.reduce(&to_mod(&v));
        let p = chr.value();
        finish_membership(&e, red, |x| Scalar::Residue { value: x, modulus: p })
    }
}

fn finish_membership<F: FieldOps>(
    e: &Echelon<F>,
    red: Reduced<F::E>,
    conv: impl Fn(F::E) -> Scalar,
) -> Membership {
    match red.remainder.first() {
        None => {
            let comb = red.combination.unwrap_or_default();
            let coefficients = comb.into_iter().map(|(i, x)| (e.accepted()[i as usize], conv(x))).collect();
            Membership::InRowSpace { coefficients }
        }
        Some((free, value)) => {
            let k = e.kernel_vector(*free as usize);
            Membership::Outside { functional: k.into_iter().map(&conv).collect(), value: conv(value.clone()) }
        }
    }
}

/// Rational reconstruction of `a mod m` with numerator and denominator
/// bounded by `sqrt(m/2)`.
pub fn rational_reconstruct(a: u64, m: u64) -> Option<BigRational> {
    let bound = ((m / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if t1 == 0 || t1.abs() > bound {
        return None;
    }
    let num = BigInt::from(r1);
    let den = BigInt::from(t1);
    let q = BigRational::new(num, den);
    // sanity: must map back to a
    let back = {
        let n = q.numer().clone();
        let d = q.denom().clone();
        let mm = BigInt::from(m);
        let dn = ((d % &mm) + &mm) % &mm;
        let nn = ((n % &mm) + &mm) % &mm;
        let dinv = BigInt::from(inv_mod(u64::try_from(dn).ok()?, m));
        (nn * dinv) % &mm
    };
    if back != BigInt::from(a) {
        return None;
    }
    Some(q)
}

/// Multiplies a rational vector by the lcm of its denominators.
pub fn clear_denominators(v: &[BigRational]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for x in v {
        let d = x.denom();
        l = num_integer::Integer::lcm(&l, d);
    }
    v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect()
}

/// Absolute value helper kept for symmetric lifts.
pub fn abs_big(x: &BigInt) -> BigInt {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_examples() {
        let f3 = Characteristic::of(3);
        let id = SparseMatrix::from_dense(f3, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(rank(&id), 3);
        let q = Characteristic::ZERO;
        assert_eq!(rank(&SparseMatrix::from_dense(q, &[vec![2, 4], vec![1, 2]])), 1);
    }

    #[test]
    fn nullspace_of_zero_row() {
        let q = Characteristic::ZERO;
        let m = SparseMatrix::from_dense(q, &[vec![0, 0]]);
        assert_eq!(nullspace_basis(&m).len(), 2);
    }

    #[test]
    fn membership_both_ways() {
        let f5 = Characteristic::of(5);
        let m = SparseMatrix::from_dense(f5, &[vec![1, 2, 0], vec![0, 1, 1]]);
        let v: Vec<(u32, Scalar)> = vec![(0, f5.from_i64(1)), (1, f5.from_i64(3)), (2, f5.from_i64(1))];
        match membership(&m, &v) {
            Membership::InRowSpace { coefficients } => {
                assert_eq!(coefficients, vec![(0, f5.one()), (1, f5.one())]);
            }
            other => panic!("{other:?}"),
        }
        let v = vec![(2, f5.one())];
        match membership(&m, &v) {
            Membership::Outside { functional, value } => {
                assert!(!value.is_zero());
                for r in &m.rows {
                    let s = r.iter().fold(f5.zero(), |s, (c, x)| &s + &(x * &functional[*c as usize]));
                    assert!(s.is_zero());
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reconstruction() {
        let m = RECONSTRUCTION_PRIME;
        let a = (3 * inv_mod(7, m)) % m;
        assert_eq!(rational_reconstruct(a, m).unwrap(), BigRational::new(3.into(), 7.into()));
        let a = m - 5;
        assert_eq!(rational_reconstruct(a, m).unwrap(), BigRational::from_integer((-5).into()));
    }

    fn dense_strategy() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..6, 1usize..7).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-2i64..3, c), r)
        })
    }

    proptest! {
        #[test]
        fn duality_on_random_systems(rows in dense_strategy(), target in proptest::collection::vec(-2i64..3, 6), p in prop_oneof![Just(0u64), Just(2), Just(3), Just(7)]) {
            let chr = Characteristic::of(p);
            let m = SparseMatrix::from_dense(chr, &rows);
            let v: Vec<(u32, Scalar)> = target.iter().take(m.ncols).enumerate().map(|(c, &x)| (c as u32, chr.from_i64(x))).collect();
            let kernel = nullspace_basis(&m);
            prop_assert_eq!(kernel.len(), m.ncols - rank(&m));
            let pairs_zero = kernel.iter().all(|k| {
                v.iter().fold(chr.zero(), |s, (c, x)| &s + &(x * &k[*c as usize])).is_zero()
            });
            match membership(&m, &v) {
                Membership::InRowSpace { coefficients } => {
                    prop_assert!(pairs_zero);
                    let mut acc = vec![chr.zero(); m.ncols];
                    for (i, c) in coefficients {
                        for (col, x) in &m.rows[i] {
                            acc[*col as usize] = &acc[*col as usize] + &(x * &c);
                        }
                    }
                    for (col, x) in &v {
                        acc[*col as usize] = &acc[*col as usize] - x;
                    }
                    prop_assert!(acc.iter().all(|x| x.is_zero()));
                }
                Membership::Outside { functional, value } => {
                    prop_assert!(!pairs_zero);
                    prop_assert!(!value.is_zero());
                    for r in &m.rows {
                        let s = r.iter().fold(chr.zero(), |s, (c, x)| &s + &(x * &functional[*c as usize]));
                        prop_assert!(s.is_zero());
                    }
                    let pv = v.iter().fold(chr.zero(), |s, (c, x)| &s + &(x * &functional[*c as usize]));
                    prop_assert_eq!(pv, value);
                }
            }
        }

        #[test]
        fn rational_rank_matches_large_prime(rows in dense_strategy()) {
            let q = SparseMatrix::from_dense(Characteristic::ZERO, &rows);
            let big = SparseMatrix::from_dense(Characteristic::of(1_000_003), &rows);
            prop_assert_eq!(rank(&q), rank(&big));
        }
    }
}
