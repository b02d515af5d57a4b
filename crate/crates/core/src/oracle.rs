//! Zero-tests and component dimensions with certificates.
//!
//! Systems are solved on canonical columns: every word `u` is replaced by
//! its canonical form `φ(u)`, which differs from `u` by rows of the system.
//! Then `dim N(Λ) = #canonical words − rank φ(rows)`, a nonzero witness is
//! `a(u) = k(φ(u))` for a kernel vector `k`, and a zero certificate is a
//! combination of rows reproducing `φ(t)` followed by the tracked
//! canonicalization of what is left.
//!
//! Characteristic 0 is solved modulo a 61-bit prime; the kernel is lifted
//! by rational reconstruction and checked exactly against every row. If
//! the check fails the computation is repeated over ℚ.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{Certificate, Evidence, NonzeroWitness, VerifyError, ZeroCertificate};
use crate::linalg::{clear_denominators, rational_reconstruct, Echelon, FieldOps, ModP, Rationals, RECONSTRUCTION_PRIME};
use crate::lincomb::{LinComb, LinCombError};
use crate::relations::{for_each_instance, IdentityInstance, InstanceView, SystemDescriptor};
use crate::rewrite::{canonicalize_tracked, is_canonical_for, Canonicalizer};
use crate::scalar::{Characteristic, Scalar};
use crate::word::{enumerate_words, BudgetExceeded, Multidegree, Word, WordIndexer, DEFAULT_COLUMN_BUDGET};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("component {desc} has {count} words, above the column budget {budget}")]
    Budget { desc: String, count: u128, budget: u64 },
    #[error(transparent)]
    Combination(#[from] LinCombError),
    #[error("certificate failed its own check: {0}")]
    Unsound(#[from] VerifyError),
}

/// How the linear algebra of a component was carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveRoute {
    /// Elimination over GF(p).
    Modular,
    /// Elimination modulo a large prime, lifted to ℚ and checked exactly.
    LiftedRational,
    /// Elimination over ℚ.
    Rational,
}

/// Words of a component together with their canonical images.
#[derive(Debug)]
pub struct Component {
    pub desc: SystemDescriptor,
    pub words: Vec<Word>,
    indexer: WordIndexer,
    pub canonical: Vec<Word>,
    phi: Vec<Vec<(u32, i64)>>,
}

impl Component {
    pub fn build(desc: &SystemDescriptor, budget: u64) -> Result<Component, OracleError> {
        let words = enumerate_words(&desc.mdeg, budget).map_err(|e| budget_error(desc, e))?;
        let indexer = WordIndexer::new(&desc.mdeg).expect("enumerated");
        let mut pos = vec![u32::MAX; words.len()];
        let mut canonical = Vec::new();
        for (i, w) in words.iter().enumerate() {
            if is_canonical_for(w.letters(), desc.n) {
                pos[i] = canonical.len() as u32;
                canonical.push(w.clone());
            }
        }
        let mut canon = Canonicalizer::new(desc.n);
        let phi = words
            .iter()
            .map(|w| {
                canon
                    .word(w)
                    .iter()
                    .map(|(u, c)| (pos[indexer.rank(u.letters()).expect("same component")], *c))
                    .collect()
            })
            .collect();
        Ok(Component { desc: desc.clone(), words, indexer, canonical, phi })
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        self.indexer.rank(w.letters())
    }

    /// Canonical image of one word as (canonical column, integer coefficient).
    pub fn phi(&self, word_index: usize) -> &[(u32, i64)] {
        &self.phi[word_index]
    }

    /// Canonical image of a combination over the canonical columns.
    pub fn image_of(&self, e: &LinComb) -> Vec<(u32, Scalar)> {
        let chr = self.desc.chr;
        let mut acc: BTreeMap<u32, Scalar> = BTreeMap::new();
        for (w, c) in e.iter() {
            let i = self.index_of(w).expect("word of the component");
            for &(col, k) in &self.phi[i] {
                let slot = acc.entry(col).or_insert_with(|| chr.zero());
                *slot = &*slot + &(c * &chr.from_i64(k));
            }
        }
        acc.into_iter().filter(|(_, x)| !x.is_zero()).collect()
    }

    /// Streams every row as (instance, merged word terms, canonical image).
    /// Images are exact integers; terms with zero total are dropped.
    pub fn for_each_row(&self, mut f: impl FnMut(&InstanceView<'_>, &[(usize, i64)], &[(u32, i64)])) {
        let mut scratch = vec![0i64; self.canonical.len()];
        let mut live = vec![false; self.canonical.len()];
        let mut touched: Vec<u32> = Vec::new();
        let mut terms: Vec<(usize, i64)> = Vec::with_capacity(6);
        let mut image: Vec<(u32, i64)> = Vec::new();
        for_each_instance(&self.desc, &self.words, |view| {
            terms.clear();
            view.for_each_term(self.desc.n, |w, c| {
                let r = self.indexer.rank(w.letters()).expect("instance term inside the component");
                match terms.iter_mut().find(|e| e.0 == r) {
                    Some(e) => e.1 += c,
                    None => terms.push((r, c)),
                }
            });
            terms.retain(|e| e.1 != 0);
            if terms.is_empty() {
                return;
            }
            for &(r, c) in &terms {
                for &(col, k) in &self.phi[r] {
                    let cu = col as usize;
                    scratch[cu] = scratch[cu].checked_add(c.checked_mul(k).expect("overflow")).expect("overflow");
                    if !live[cu] {
                        live[cu] = true;
                        touched.push(col);
                    }
                }
            }
            image.clear();
            for &col in &touched {
                let cu = col as usize;
                if scratch[cu] != 0 {
                    image.push((col, scratch[cu]));
                }
                scratch[cu] = 0;
                live[cu] = false;
            }
            touched.clear();
            image.sort_unstable_by_key(|e| e.0);
            f(&view, &terms, &image);
        });
    }
}

fn budget_error(desc: &SystemDescriptor, e: BudgetExceeded) -> OracleError {
    OracleError::Budget { desc: desc.to_string(), count: e.count, budget: e.budget }
}

/// A solved component: rank, exact kernel on canonical columns, and the
/// rows that were independent.
#[derive(Debug)]
pub struct Solved {
    pub comp: Component,
    pub rank: usize,
    /// One exact kernel vector per free canonical column, ascending.
    pub kernel: Vec<(usize, Vec<Scalar>)>,
    /// Independent rows and their integer canonical images.
    pub accepted: Vec<(IdentityInstance, Vec<(u32, i64)>)>,
    /// Words with a nonzero coefficient in some row.
    pub touched: Vec<bool>,
    pub route: SolveRoute,
    /// Accepted images with history, built on first zero certificate.
    coeff_basis: RefCell<Option<Echelon<ModP>>>,
}

impl Solved {
    pub fn dimension(&self) -> usize {
        self.comp.canonical.len() - self.rank
    }
}

fn eliminate<F: FieldOps>(
    comp: &Component,
    field: F,
    conv: impl Fn(i64) -> F::E,
) -> (Echelon<F>, Vec<(IdentityInstance, Vec<(u32, i64)>)>, Vec<bool>) {
    let chr = comp.desc.chr;
    let mut ech = Echelon::new(field, comp.canonical.len(), false);
    let mut accepted = Vec::new();
    let mut touched = vec![false; comp.words.len()];
    let mut v: Vec<(u32, F::E)> = Vec::new();
    comp.for_each_row(|view, terms, image| {
        for &(r, c) in terms {
            if !vanishes_in(chr, c) {
                touched[r] = true;
            }
        }
        if ech.is_full() || image.is_empty() {
            return;
        }
        v.clear();
        let fld = ech.field().clone();
        v.extend(image.iter().map(|&(c, k)| (c, conv(k))).filter(|(_, x)| !fld.is_zero(x)));
        if v.is_empty() {
            return;
        }
        if ech.insert(&v, accepted.len()) {
            accepted.push((view.to_instance(), image.to_vec()));
        }
    });
    (ech, accepted, touched)
}

fn vanishes_in(chr: Characteristic, c: i64) -> bool {
    if chr.is_zero() {
        c == 0
    } else {
        c.rem_euclid(chr.value() as i64) == 0
    }
}

fn lift_kernel(ech: &Echelon<ModP>) -> Option<Vec<(usize, Vec<BigRational>)>> {
    let q = ech.field().0;
    let mut out = Vec::new();
    for (free, k) in ech.kernel_basis() {
        let mut v = Vec::with_capacity(k.len());
        for x in k {
            v.push(if x == 0 { BigRational::zero() } else { rational_reconstruct(x, q)? });
        }
        out.push((free, v));
    }
    Some(out)
}

/// Exact check that every kernel vector annihilates every row image.
fn kernel_annihilates(comp: &Component, kernel: &[(usize, Vec<BigRational>)]) -> bool {
    let ints: Vec<Vec<BigInt>> = kernel.iter().map(|(_, k)| clear_denominators(k)).collect();
    let small: Option<Vec<Vec<i64>>> =
        ints.iter().map(|k| k.iter().map(|x| x.to_i64()).collect::<Option<Vec<i64>>>()).collect();
    let mut ok = true;
    comp.for_each_row(|_, _, image| {
        if !ok {
            return;
        }
        match &small {
            Some(sm) => {
                for k in sm {
                    let mut s: i128 = 0;
                    for &(c, x) in image {
                        s += x as i128 * k[c as usize] as i128;
                    }
                    if s != 0 {
                        ok = false;
                        return;
                    }
                }
            }
            None => {
                for k in &ints {
                    let mut s = BigInt::zero();
                    for &(c, x) in image {
                        s += &k[c as usize] * x;
                    }
                    if !s.is_zero() {
                        ok = false;
                        return;
                    }
                }
            }
        }
    });
    ok
}

/// Solves a component of the given system.
pub fn solve(desc: &SystemDescriptor, budget: u64) -> Result<Solved, OracleError> {
    let comp = Component::build(desc, budget)?;
    let chr = desc.chr;
    if !chr.is_zero() {
        let p = chr.value();
        let f = ModP(p);
        let (ech, accepted, touched) = eliminate(&comp, f, |k| f.from_i64(k));
        let kernel = ech
            .kernel_basis()
            .into_iter()
            .map(|(c, k)| (c, k.into_iter().map(|x| Scalar::Residue { value: x, modulus: p }).collect()))
            .collect();
        return Ok(Solved { rank: ech.rank(), kernel, accepted, touched, route: SolveRoute::Modular, comp, coeff_basis: RefCell::new(None) });
    }
    let f = ModP(RECONSTRUCTION_PRIME);
    let (ech, accepted, touched) = eliminate(&comp, f, |k| f.from_i64(k));
    if let Some(kernel) = lift_kernel(&ech) {
        if kernel_annihilates(&comp, &kernel) {
            let kernel = kernel
                .into_iter()
                .map(|(c, k)| (c, k.into_iter().map(Scalar::Rational).collect()))
                .collect();
            return Ok(Solved { rank: ech.rank(), kernel, accepted, touched, route: SolveRoute::LiftedRational, comp, coeff_basis: RefCell::new(None) });
        }
    }
    let (ech, accepted, touched) = eliminate(&comp, Rationals, |k| BigRational::from_integer(BigInt::from(k)));
    let kernel = ech
        .kernel_basis()
        .into_iter()
        .map(|(c, k)| (c, k.into_iter().map(Scalar::Rational).collect()))
        .collect();
    Ok(Solved { rank: ech.rank(), kernel, accepted, touched, route: SolveRoute::Rational, comp, coeff_basis: RefCell::new(None) })
}

/// Coefficients `c_i` over the accepted rows with `Σ c_i·image_i = v`.
fn combination_of(solved: &Solved, v: &[(u32, Scalar)]) -> Vec<Scalar> {
    let chr = solved.comp.desc.chr;
    let ncols = solved.comp.canonical.len();
    if !chr.is_zero() {
        let f = ModP(chr.value());
        return modular_combination(solved, f, v.iter().map(|(c, x)| (*c, x.residue())).collect(), ncols)
            .expect("target inside the row space")
            .into_iter()
            .map(|x| Scalar::Residue { value: x, modulus: chr.value() })
            .collect();
    }
    let f = ModP(RECONSTRUCTION_PRIME);
    let vq: Option<Vec<(u32, u64)>> = v
        .iter()
        .map(|(c, x)| {
            let q = x.rational();
            let m = BigInt::from(RECONSTRUCTION_PRIME);
            let n = ((q.numer() % &m) + &m) % &m;
            let d = ((q.denom() % &m) + &m) % &m;
            let d = d.to_u64()?;
            if d == 0 {
                return None;
            }
            Some((*c, f.mul(&n.to_u64()?, &f.inv(&d))))
        })
        .collect();
    if let Some(vq) = vq {
        if let Some(cs) = modular_combination(solved, f, vq, ncols) {
            let lifted: Option<Vec<BigRational>> =
                cs.iter().map(|&x| if x == 0 { Some(BigRational::zero()) } else { rational_reconstruct(x, f.0) }).collect();
            if let Some(lifted) = lifted {
                if reproduces(solved, &lifted, v) {
                    return lifted.into_iter().map(Scalar::Rational).collect();
                }
            }
        }
    }
    let mut ech = Echelon::new(Rationals, ncols, true);
    for (i, (_, img)) in solved.accepted.iter().enumerate() {
        let row: Vec<(u32, BigRational)> =
            img.iter().map(|&(c, k)| (c, BigRational::from_integer(BigInt::from(k)))).collect();
        let grew = ech.insert(&row, i);
        assert!(grew, "accepted rows are independent");
    }
    let red = ech.reduce(&v.iter().map(|(c, x)| (*c, x.rational().clone())).collect::<Vec<_>>());
    assert!(red.remainder.is_empty(), "target inside the row space");
    let mut out = vec![BigRational::zero(); solved.accepted.len()];
    for (i, x) in red.combination.unwrap_or_default() {
        out[ech.accepted()[i as usize]] = x;
    }
    out.into_iter().map(Scalar::Rational).collect()
}

fn modular_combination(solved: &Solved, f: ModP, v: Vec<(u32, u64)>, ncols: usize) -> Option<Vec<u64>> {
    let mut slot = solved.coeff_basis.borrow_mut();
    let ech = slot.get_or_insert_with(|| {
        let mut ech = Echelon::new(f, ncols, true);
        for (i, (_, img)) in solved.accepted.iter().enumerate() {
            let row: Vec<(u32, u64)> = img.iter().map(|&(c, k)| (c, f.from_i64(k))).filter(|e| e.1 != 0).collect();
            ech.insert(&row, i);
        }
        ech
    });
    if ech.rank() != solved.accepted.len() {
        return None;
    }
    let red = ech.reduce(&v);
    if !red.remainder.is_empty() {
        return None;
    }
    let mut out = vec![0u64; solved.accepted.len()];
    for (i, x) in red.combination.unwrap_or_default() {
        out[ech.accepted()[i as usize]] = x;
    }
    Some(out)
}

fn reproduces(solved: &Solved, coeffs: &[BigRational], v: &[(u32, Scalar)]) -> bool {
    let mut acc: BTreeMap<u32, BigRational> = BTreeMap::new();
    for (c, (_, img)) in coeffs.iter().zip(&solved.accepted) {
        if c.is_zero() {
            continue;
        }
        for &(col, k) in img {
            *acc.entry(col).or_insert_with(BigRational::zero) += c * BigRational::from_integer(BigInt::from(k));
        }
    }
    for (col, x) in v {
        *acc.entry(*col).or_insert_with(BigRational::zero) -= x.rational();
    }
    acc.values().all(|x| x.is_zero())
}

/// A zero-test outcome with its certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilDecision {
    pub certificate: Certificate,
}

impl NilDecision {
    pub fn is_zero(&self) -> bool {
        self.certificate.is_zero()
    }

    pub fn system(&self) -> &SystemDescriptor {
        &self.certificate.system
    }

    pub fn target(&self) -> &LinComb {
        &self.certificate.target
    }
}

/// Decides `t = 0` in a solved component and builds the certificate.
pub fn decide(solved: &Solved, target: &LinComb) -> Certificate {
    let desc = &solved.comp.desc;
    let chr = desc.chr;
    let image = solved.comp.image_of(target);
    let pair = |k: &[Scalar], img: &[(u32, Scalar)]| {
        img.iter().fold(chr.zero(), |s, (c, x)| &s + &(x * &k[*c as usize]))
    };
    for (_, k) in &solved.kernel {
        let value = pair(k, &image);
        if value.is_zero() {
            continue;
        }
        let mut functional = BTreeMap::new();
        for (i, w) in solved.comp.words.iter().enumerate() {
            if !solved.touched[i] && target.coeff(w).is_zero() {
                continue;
            }
            let a = solved.comp.phi(i).iter().fold(chr.zero(), |s, &(c, x)| &s + &(&chr.from_i64(x) * &k[c as usize]));
            if !a.is_zero() {
                functional.insert(w.clone(), a);
            }
        }
        return Certificate {
            system: desc.clone(),
            target: target.clone(),
            evidence: Evidence::Nonzero(NonzeroWitness { functional, value }),
        };
    }
    let coeffs = combination_of(solved, &image);
    let mut rows: BTreeMap<IdentityInstance, Scalar> = BTreeMap::new();
    let mut rest = target.clone();
    for (c, (inst, _)) in coeffs.iter().zip(&solved.accepted) {
        if c.is_zero() {
            continue;
        }
        let row = inst.expand(desc.n, chr).expect("generated instance");
        rest.add_scaled(&row, &-c);
        rows.insert(inst.clone(), c.clone());
    }
    let (more, rem) = canonicalize_tracked(&rest, desc.n);
    assert!(rem.is_zero(), "canonical remainder must vanish once the image is cancelled");
    for (inst, c) in more {
        let slot = rows.entry(inst).or_insert_with(|| chr.zero());
        *slot = &*slot + &c;
    }
    let rows = rows.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    Certificate { system: desc.clone(), target: target.clone(), evidence: Evidence::Zero(ZeroCertificate { rows }) }
}

/// Zero-tests and dimensions with an in-memory table of solved components.
pub struct Oracle {
    pub budget: u64,
    solved: HashMap<SystemDescriptor, Rc<Solved>>,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle::new(DEFAULT_COLUMN_BUDGET)
    }
}

impl Oracle {
    pub fn new(budget: u64) -> Oracle {
        Oracle { budget, solved: HashMap::new() }
    }

    pub fn solve(&mut self, desc: &SystemDescriptor) -> Result<Rc<Solved>, OracleError> {
        if let Some(s) = self.solved.get(desc) {
            return Ok(s.clone());
        }
        let s = Rc::new(solve(desc, self.budget)?);
        self.solved.insert(desc.clone(), s.clone());
        Ok(s)
    }

    /// Forgets solved components (they can be large).
    pub fn clear(&mut self) {
        self.solved.clear();
    }

    /// Decides `e = 0` in `N_{n,d}` with `d` at least the letters used.
    pub fn zero_test(&mut self, e: &LinComb, d: usize, n: u8) -> Result<NilDecision, OracleError> {
        let d = d.max(e.alphabet_size()).max(1);
        let mdeg = e.mdeg(d)?;
        let desc = SystemDescriptor::new(mdeg, e.characteristic(), n, false);
        self.zero_test_in(&desc, e)
    }

    /// Decides membership of `e` in the row space of a given system.
    pub fn zero_test_in(&mut self, desc: &SystemDescriptor, e: &LinComb) -> Result<NilDecision, OracleError> {
        let certificate = if e.is_zero() {
            Certificate { system: desc.clone(), target: e.clone(), evidence: Evidence::Zero(ZeroCertificate::default()) }
        } else {
            let s = self.solve(desc)?;
            decide(&s, e)
        };
        certificate.verify(self.budget)?;
        Ok(NilDecision { certificate })
    }

    /// `dim N_{n,d}(Λ)` over the prime field of characteristic `chr`.
    pub fn component_dimension(&mut self, mdeg: &Multidegree, chr: Characteristic, n: u8) -> Result<usize, OracleError> {
        let desc = SystemDescriptor::new(mdeg.clone(), chr, n, false);
        Ok(self.solve(&desc)?.dimension())
    }
}
