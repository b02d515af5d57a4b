//! Invariant side: `σ_k` symbols over cycles, Amitsur's expansion, the
//! Newton cases, traces modulo decomposables, and a numeric evaluator.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::SCHEMA_VERSION;
use crate::lincomb::LinComb;
use crate::linalg::{Echelon, FieldOps, ModP, Rationals};
use crate::relations::{for_each_instance, SystemDescriptor};
use crate::rewrite::is_canonical_for;
use crate::scalar::{Characteristic, Scalar};
use crate::word::{enumerate_words, primitive_cycles, BudgetExceeded, Multidegree, Word, WordIndexer};

/// `σ_k(c)` for a cycle `c`, stored as its least rotation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SigmaSymbol {
    pub k: u32,
    pub cycle: Word,
}

impl SigmaSymbol {
    pub fn new(k: u32, word: &Word) -> SigmaSymbol {
        assert!(k >= 1, "σ_0 is the constant 1");
        SigmaSymbol { k, cycle: word.cyclic_representative() }
    }

    pub fn trace(word: &Word) -> SigmaSymbol {
        SigmaSymbol::new(1, word)
    }

    /// Degree as an invariant: `k · |c|`.
    pub fn degree(&self) -> usize {
        self.k as usize * self.cycle.len()
    }

    /// False for symbols such as `σ_1(U²)`, which the Newton cases rewrite.
    pub fn is_primitive(&self) -> bool {
        self.cycle.is_primitive()
    }
}

impl fmt::Display for SigmaSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.k == 1 {
            write!(f, "tr({})", self.cycle)
        } else {
            write!(f, "s{}({})", self.k, self.cycle)
        }
    }
}

/// A product of symbols with multiplicities, sorted by symbol.
pub type SigmaMonomial = Vec<(SigmaSymbol, u32)>;

/// Integer combination of σ-monomials, each tagged with the exponent
/// vector of the formal coefficients `q_i` of the summands.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SigmaPoly {
    pub terms: BTreeMap<(SigmaMonomial, Vec<u32>), i64>,
}

impl SigmaPoly {
    pub fn zero() -> SigmaPoly {
        SigmaPoly::default()
    }

    pub fn symbol(s: SigmaSymbol) -> SigmaPoly {
        SigmaPoly::monomial(vec![(s, 1)], Vec::new(), 1)
    }

    pub fn monomial(factors: SigmaMonomial, q: Vec<u32>, coeff: i64) -> SigmaPoly {
        let mut p = SigmaPoly::zero();
        p.add_term(factors, q, coeff);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, factors: SigmaMonomial, q: Vec<u32>, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let key = (normalize(factors), q);
        let slot = self.terms.entry(key.clone()).or_insert(0);
        *slot = slot.checked_add(coeff).expect("coefficient overflow");
        if *slot == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn plus(&self, other: &SigmaPoly) -> SigmaPoly {
        self.plus_scaled(other, 1)
    }

    pub fn plus_scaled(&self, other: &SigmaPoly, c: i64) -> SigmaPoly {
        let mut out = self.clone();
        for ((m, q), x) in &other.terms {
            out.add_term(m.clone(), q.clone(), x * c);
        }
        out
    }

    pub fn times(&self, other: &SigmaPoly) -> SigmaPoly {
        let mut out = SigmaPoly::zero();
        for ((m1, q1), a) in &self.terms {
            for ((m2, q2), b) in &other.terms {
                let mut m = m1.clone();
                m.extend(m2.iter().cloned());
                let len = q1.len().max(q2.len());
                let q = (0..len).map(|i| q1.get(i).unwrap_or(&0) + q2.get(i).unwrap_or(&0)).collect();
                out.add_term(m, q, a.checked_mul(*b).expect("coefficient overflow"));
            }
        }
        out
    }

    /// Terms that are products of at least two symbols lie in `(R⁺)²`.
    pub fn drop_decomposable(&self) -> SigmaPoly {
        let mut out = SigmaPoly::zero();
        for ((m, q), c) in &self.terms {
            if m.len() == 1 && m[0].1 == 1 {
                out.add_term(m.clone(), q.clone(), *c);
            }
        }
        out
    }

    /// Multidegree of a monomial over `d` letters.
    pub fn monomial_mdeg(m: &SigmaMonomial, d: usize) -> Vec<u32> {
        let mut out = vec![0u32; d];
        for (s, e) in m {
            for &l in s.cycle.letters() {
                out[l as usize] += s.k * e;
            }
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|((m, q), c)| {
                let factors: Vec<serde_json::Value> = m
                    .iter()
                    .map(|(s, e)| serde_json::json!({"k": s.k, "cycle": s.cycle.to_string(), "power": e}))
                    .collect();
                serde_json::json!({"coeff": c, "q": q, "factors": factors})
            })
            .collect();
        serde_json::json!({"schema_version": SCHEMA_VERSION, "terms": terms})
    }
}

impl fmt::Display for SigmaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for ((m, q), c) in &self.terms {
            let sign = if *c < 0 { "-" } else if first { "" } else { "+" };
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{sign}")?;
            if !first {
                f.write_str(" ")?;
            }
            let mut parts = Vec::new();
            if c.abs() != 1 || m.is_empty() {
                parts.push(c.abs().to_string());
            }
            for (i, e) in q.iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(format!("q{}", i + 1)),
                    e => parts.push(format!("q{}^{}", i + 1, e)),
                }
            }
            for (s, e) in m {
                if *e == 1 {
                    parts.push(s.to_string());
                } else {
                    parts.push(format!("{s}^{e}"));
                }
            }
            f.write_str(&parts.join(" "))?;
            first = false;
        }
        Ok(())
    }
}

fn normalize(factors: SigmaMonomial) -> SigmaMonomial {
    let mut map: BTreeMap<SigmaSymbol, u32> = BTreeMap::new();
    for (s, e) in factors {
        if e > 0 {
            *map.entry(s).or_insert(0) += e;
        }
    }
    map.into_iter().collect()
}

/// `σ_k(q_1 W_1 + ⋯ + q_m W_m)` expanded over pairwise distinct primitive
/// cycles `c_i` in the summand indices with `Σ j_i |c_i| = k`; each term
/// is `(−1)^{k − Σ j_i} Π σ_{j_i}(c_i(W))` times `q^{Σ j_i mdeg(c_i)}`.
pub fn amitsur_expand(k: usize, summands: &[Word]) -> SigmaPoly {
    assert!(k >= 1);
    assert!(summands.iter().all(|w| !w.is_empty()), "summands must be non-empty words");
    let m = summands.len();
    let mut out = SigmaPoly::zero();
    if m == 0 {
        return out;
    }
    let cycles: Vec<Word> = (1..=k).flat_map(|len| primitive_cycles(m, len)).collect();
    let mut chosen: Vec<(usize, u32)> = Vec::new();
    expand_rec(&cycles, 0, k, &mut chosen, &mut |picked| {
        let total_j: u32 = picked.iter().map(|(_, j)| j).sum();
        let sign = if (k as u32 - total_j) % 2 == 0 { 1 } else { -1 };
        let mut q = vec![0u32; m];
        let mut factors = Vec::new();
        for &(ci, j) in picked {
            let c = &cycles[ci];
            for &l in c.letters() {
                q[l as usize] += j;
            }
            factors.push((SigmaSymbol::new(j, &c.substitute(summands)), 1));
        }
        out.add_term(factors, q, sign);
    });
    out
}

fn expand_rec(
    cycles: &[Word],
    from: usize,
    rest: usize,
    chosen: &mut Vec<(usize, u32)>,
    emit: &mut impl FnMut(&[(usize, u32)]),
) {
    if rest == 0 {
        emit(chosen);
        return;
    }
    for ci in from..cycles.len() {
        let len = cycles[ci].len();
        let mut j = 1;
        while j * len <= rest {
            chosen.push((ci, j as u32));
            expand_rec(cycles, ci + 1, rest - j * len, chosen, emit);
            chosen.pop();
            j += 1;
        }
    }
}

/// The three Newton-type relations used for single words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", content = "word", rename_all = "kebab-case")]
pub enum NewtonCase {
    /// `σ_1(U²) = σ_1(U)² − 2σ_2(U)`.
    TraceOfSquare(Word),
    /// `σ_1(U³) = σ_1(U)³ − 3σ_1(U)σ_2(U) + 3σ_3(U)`.
    TraceOfCube(Word),
    /// `2σ_2(U) = σ_1(U)² − σ_1(U²)`.
    TwiceSigma2(Word),
}

impl NewtonCase {
    pub fn word(&self) -> &Word {
        match self {
            NewtonCase::TraceOfSquare(u) | NewtonCase::TraceOfCube(u) | NewtonCase::TwiceSigma2(u) => u,
        }
    }

    pub fn lhs(&self) -> SigmaPoly {
        let u = self.word();
        match self {
            NewtonCase::TraceOfSquare(_) => SigmaPoly::symbol(SigmaSymbol::trace(&u.mul(u))),
            NewtonCase::TraceOfCube(_) => SigmaPoly::symbol(SigmaSymbol::trace(&u.mul(u).mul(u))),
            NewtonCase::TwiceSigma2(_) => SigmaPoly::monomial(vec![(SigmaSymbol::new(2, u), 1)], Vec::new(), 2),
        }
    }
}

/// Right-hand side of a Newton case.
pub fn newton_reduce(case: &NewtonCase) -> SigmaPoly {
    let u = case.word();
    let s1 = SigmaSymbol::new(1, u);
    let s2 = SigmaSymbol::new(2, u);
    let mut p = SigmaPoly::zero();
    match case {
        NewtonCase::TraceOfSquare(_) => {
            p.add_term(vec![(s1, 2)], Vec::new(), 1);
            p.add_term(vec![(s2, 1)], Vec::new(), -2);
        }
        NewtonCase::TraceOfCube(_) => {
            p.add_term(vec![(s1.clone(), 3)], Vec::new(), 1);
            p.add_term(vec![(s1, 1), (s2, 1)], Vec::new(), -3);
            p.add_term(vec![(SigmaSymbol::new(3, u), 1)], Vec::new(), 3);
        }
        NewtonCase::TwiceSigma2(_) => {
            p.add_term(vec![(s1, 2)], Vec::new(), 1);
            p.add_term(vec![(SigmaSymbol::trace(&u.mul(u)), 1)], Vec::new(), -1);
        }
    }
    p
}

/// Square integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub n: usize,
    pub data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_i64(n: usize, entries: &[i64]) -> IntMatrix {
        assert_eq!(entries.len(), n * n);
        IntMatrix { n, data: entries.iter().map(|&x| BigInt::from(x)).collect() }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix { n, data: vec![BigInt::zero(); n * n] };
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn diag(entries: &[i64]) -> IntMatrix {
        let n = entries.len();
        let mut m = IntMatrix { n, data: vec![BigInt::zero(); n * n] };
        for (i, &x) in entries.iter().enumerate() {
            m.data[i * n + i] = BigInt::from(x);
        }
        m
    }

    /// Uniform entries in `[lo, hi]`.
    pub fn random(n: usize, lo: i64, hi: i64, rng: &mut impl rand::Rng) -> IntMatrix {
        IntMatrix { n, data: (0..n * n).map(|_| BigInt::from(rng.gen_range(lo..=hi))).collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.n;
        let mut data = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        IntMatrix { n, data }
    }

    pub fn add_scaled(&self, other: &IntMatrix, c: &BigInt) -> IntMatrix {
        IntMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b * c).collect() }
    }

    /// Sum of the principal `k × k` minors, the `k`-th coefficient of the
    /// characteristic polynomial up to sign.
    pub fn sigma(&self, k: usize) -> BigInt {
        let n = self.n;
        if k == 0 {
            return BigInt::one();
        }
        if k > n {
            return BigInt::zero();
        }
        let mut total = BigInt::zero();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let sub: Vec<BigInt> =
                idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).map(|(i, j)| self.get(i, j).clone()).collect();
            total += bareiss_det(k, sub);
        }
        total
    }
}

/// Fraction-free determinant.
pub fn bareiss_det(n: usize, mut a: Vec<BigInt>) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k * n + k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r * n + k].is_zero()) else {
                return BigInt::zero();
            };
            for j in 0..n {
                a.swap(k * n + j, r * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j]) / &prev;
                a[i * n + j] = v;
            }
        }
        prev = a[k * n + k].clone();
    }
    sign * &a[n * n - 1]
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SigmaError {
    #[error("matrices have different sizes")]
    DimensionMismatch,
    #[error("σ_{k} needs k ≤ n = {n}")]
    KTooLarge { k: u32, n: usize },
    #[error("no matrix for letter x{0}")]
    MissingLetter(usize),
    #[error("no value for q{0}")]
    MissingWeight(usize),
}

/// Substitutes matrices for letters and integers for the `q_i`.
pub fn sigma_eval(poly: &SigmaPoly, letters: &[IntMatrix], q: &[BigInt]) -> Result<BigInt, SigmaError> {
    let n = letters.first().map_or(0, |m| m.n);
    if letters.iter().any(|m| m.n != n) {
        return Err(SigmaError::DimensionMismatch);
    }
    let mut cache: BTreeMap<SigmaSymbol, BigInt> = BTreeMap::new();
    let mut total = BigInt::zero();
    for ((m, qe), c) in &poly.terms {
        let mut term = BigInt::from(*c);
        for (i, e) in qe.iter().enumerate() {
            if *e > 0 {
                let v = q.get(i).ok_or(SigmaError::MissingWeight(i + 1))?;
                term *= num_traits::pow(v.clone(), *e as usize);
            }
        }
        for (s, e) in m {
            if s.k as usize > n {
                return Err(SigmaError::KTooLarge { k: s.k, n });
            }
            let v = match cache.get(s) {
                Some(v) => v.clone(),
                None => {
                    let mut prod = IntMatrix::identity(n);
                    for &l in s.cycle.letters() {
                        let a = letters.get(l as usize).ok_or(SigmaError::MissingLetter(l as usize + 1))?;
                        prod = prod.mul(a);
                    }
                    let v = prod.sigma(s.k as usize);
                    cache.insert(s.clone(), v.clone());
                    v
                }
            };
            term *= num_traits::pow(v, *e as usize);
        }
        total += term;
    }
    Ok(total)
}

/// Input shapes for [`canonical_trace_form`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "word", rename_all = "kebab-case")]
pub enum TraceExpr {
    Trace(Word),
    Sigma2(Word),
}

/// `Σ α_i tr(W_i) + Σ β_j σ_2(U_j)` modulo decomposables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceForm {
    pub traces: LinComb,
    pub sigma2: LinComb,
    /// True when every word of `traces` is canonical.
    pub canonical: bool,
}

impl TraceForm {
    pub fn is_zero(&self) -> bool {
        self.traces.is_zero() && self.sigma2.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TraceFormError {
    #[error("empty word")]
    Empty,
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// Normal form of `tr(U)` or `σ_2(U)` modulo `(R⁺)²`.
///
/// Traces are reduced against cyclic rotation and the nil rows
/// `tr(g1 T g2)` with `g1 g2` non-empty (these are `tr(V T)` with `V` of
/// positive degree, decomposable by Cayley–Hamilton); in characteristic 3
/// the bare rows `tr(T)` are added. Non-canonical words are eliminated
/// first, so the remainder is carried by canonical words whenever the
/// relations allow it.
pub fn canonical_trace_form(expr: &TraceExpr, chr: Characteristic, budget: u64) -> Result<TraceForm, TraceFormError> {
    let (u, sigma2) = match expr {
        TraceExpr::Trace(u) => (u, false),
        TraceExpr::Sigma2(u) => (u, true),
    };
    if u.is_empty() {
        return Err(TraceFormError::Empty);
    }
    let zero = LinComb::zero(chr);
    if !sigma2 {
        let traces = reduce_trace(&LinComb::word(u.clone(), chr), budget)?;
        let canonical = traces.words().all(|w| is_canonical_for(w.letters(), 3));
        return Ok(TraceForm { traces, sigma2: zero, canonical });
    }
    if chr.value() == 2 {
        if u.len() == 1 {
            return Ok(TraceForm { traces: zero, sigma2: LinComb::word(u.clone(), chr), canonical: true });
        }
        // σ_2(UV) ≡ tr(U²V²) + tr(U³V) + tr(UV³), the last two decomposable.
        let (a, b) = u.letters().split_at(1);
        let w = Word::concat(&[a, a, b, b]);
        let traces = reduce_trace(&LinComb::word(w, chr), budget)?;
        let canonical = traces.words().all(|w| is_canonical_for(w.letters(), 3));
        return Ok(TraceForm { traces, sigma2: zero, canonical });
    }
    // 2σ_2(U) = tr(U)² − tr(U²).
    let half = chr.from_i64(-1).div(&chr.from_i64(2));
    let e = LinComb::word(u.mul(u), chr).scaled(&half);
    let traces = reduce_trace(&e, budget)?;
    let canonical = traces.words().all(|w| is_canonical_for(w.letters(), 3));
    Ok(TraceForm { traces, sigma2: zero, canonical })
}

/// Reduces a homogeneous trace combination; the result uses least
/// rotations.
pub fn reduce_trace(e: &LinComb, budget: u64) -> Result<LinComb, TraceFormError> {
    let chr = e.characteristic();
    if e.is_zero() {
        return Ok(e.clone());
    }
    let d = e.alphabet_size();
    let mdeg = e.mdeg(d).expect("homogeneous trace combination");
    let words = enumerate_words(&mdeg, budget)?;
    let system = TraceSystem::new(&mdeg, chr, &words);
    Ok(system.reduce(e))
}

/// Trace relations of one multidegree with a column order that makes
/// non-canonical words pivots first.
struct TraceSystem<'a> {
    chr: Characteristic,
    words: &'a [Word],
    indexer: WordIndexer,
    col_of_rank: Vec<u32>,
    word_of_col: Vec<usize>,
    rows: Vec<Vec<(u32, i64)>>,
}

impl<'a> TraceSystem<'a> {
    fn new(mdeg: &Multidegree, chr: Characteristic, words: &'a [Word]) -> TraceSystem<'a> {
        let indexer = WordIndexer::new(mdeg).expect("component fits in memory");
        let mut order: Vec<usize> = (0..words.len()).collect();
        // Non-canonical first; canonical in decreasing order so the least
        // canonical words stay free.
        order.sort_by(|&a, &b| {
            let ca = is_canonical_for(words[a].letters(), 3);
            let cb = is_canonical_for(words[b].letters(), 3);
            ca.cmp(&cb).then_with(|| if ca { words[b].cmp(&words[a]) } else { words[a].cmp(&words[b]) })
        });
        let mut col_of_rank = vec![0u32; words.len()];
        for (col, &r) in order.iter().enumerate() {
            col_of_rank[r] = col as u32;
        }
        let desc = SystemDescriptor::new(mdeg.clone(), chr, 3, true);
        let bare_rows = chr.value() == 3;
        let mut rows = Vec::new();
        for_each_instance(&desc, words, |view| {
            if view.cyclic.is_none() && view.left.is_empty() && view.right.is_empty() && !bare_rows {
                return;
            }
            let mut acc: BTreeMap<u32, i64> = BTreeMap::new();
            view.for_each_term(3, |w, c| {
                let r = indexer.rank(w.letters()).expect("word of the component");
                *acc.entry(col_of_rank[r]).or_insert(0) += c;
            });
            let row: Vec<(u32, i64)> = acc.into_iter().filter(|(_, c)| *c != 0).collect();
            if !row.is_empty() {
                rows.push(row);
            }
        });
        TraceSystem { chr, words, indexer, col_of_rank, word_of_col: order, rows }
    }

    fn reduce(&self, e: &LinComb) -> LinComb {
        let target: Vec<(u32, Scalar)> = e
            .iter()
            .map(|(w, c)| {
                let r = self.indexer.rank(w.letters()).expect("word of the component");
                (self.col_of_rank[r], c.clone())
            })
            .collect();
        let rem: Vec<(u32, Scalar)> = match self.chr.value() {
            0 => run(Rationals, self.words.len(), &self.rows, &target, |x| x.to_rational_lift(), |q| {
                Scalar::Rational(q.clone())
            }),
            p => run(ModP(p), self.words.len(), &self.rows, &target, |x| x.residue(), |v| self.chr.from_i64(*v as i64)),
        };
        let mut out = LinComb::zero(self.chr);
        for (col, c) in rem {
            let w = &self.words[self.word_of_col[col as usize]];
            out.add_term(w.cyclic_representative(), c);
        }
        out
    }
}

fn run<F: FieldOps>(
    field: F,
    ncols: usize,
    rows: &[Vec<(u32, i64)>],
    target: &[(u32, Scalar)],
    lift: impl Fn(&Scalar) -> F::E,
    back: impl Fn(&F::E) -> Scalar,
) -> Vec<(u32, Scalar)> {
    let mut ech = Echelon::new(field.clone(), ncols, false);
    for (i, row) in rows.iter().enumerate() {
        if ech.is_full() {
            break;
        }
        let v: Vec<(u32, F::E)> =
            row.iter().map(|(c, x)| (*c, field.from_i64(*x))).filter(|(_, x)| !field.is_zero(x)).collect();
        ech.insert(&v, i);
    }
    let mut t: Vec<(u32, F::E)> = target.iter().map(|(c, s)| (*c, lift(s))).collect();
    t.sort_by_key(|(c, _)| *c);
    ech.reduce(&t).remainder.iter().map(|(c, x)| (*c, back(x))).collect()
}

/// Evaluates `σ_k(Σ a_i W_i)` directly on matrices.
pub fn sigma_of_weighted_sum(k: usize, summands: &[Word], weights: &[BigInt], letters: &[IntMatrix]) -> BigInt {
    let n = letters[0].n;
    let mut sum = IntMatrix { n, data: vec![BigInt::zero(); n * n] };
    for (w, a) in summands.iter().zip(weights) {
        let mut prod = IntMatrix::identity(n);
        for &l in w.letters() {
            prod = prod.mul(&letters[l as usize]);
        }
        sum = sum.add_scaled(&prod, a);
    }
    sum.sigma(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn lc(s: &str, p: u64) -> LinComb {
        LinComb::parse(s, Characteristic::of(p)).unwrap()
    }

    #[test]
    fn two_summands_degree_two() {
        let p = amitsur_expand(2, &[w("x1"), w("x2")]);
        assert_eq!(p.to_string(), "q1 q2 tr(x1) tr(x2) - q1 q2 tr(x1 x2) + q1^2 s2(x1) + q2^2 s2(x2)");
    }

    #[test]
    fn two_summands_degree_three_has_eight_terms() {
        let p = amitsur_expand(3, &[w("x1"), w("x2")]);
        assert_eq!(p.len(), 8);
        let sym = |k, s: &str| SigmaSymbol::new(k, &w(s));
        let key = |f: Vec<(SigmaSymbol, u32)>, q: Vec<u32>| (f, q);
        assert_eq!(p.terms[&key(vec![(sym(1, "x1^2 x2"), 1)], vec![2, 1])], 1);
        assert_eq!(p.terms[&key(vec![(sym(1, "x1"), 1), (sym(1, "x1 x2"), 1)], vec![2, 1])], -1);
    }

    #[test]
    fn diagonal_values() {
        let a = IntMatrix::diag(&[1, 2, 3]);
        assert_eq!(a.sigma(1), BigInt::from(6));
        assert_eq!(a.sigma(2), BigInt::from(11));
        assert_eq!(a.sigma(3), BigInt::from(6));
    }

    #[test]
    fn amitsur_matches_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let summand_sets: [&[&str]; 4] = [&["x1", "x2"], &["x1", "x2", "x3"], &["x1 x2", "x2"], &["x1", "x1 x2", "x2^2"]];
        for n in [3usize, 4] {
            for set in summand_sets {
                let words: Vec<Word> = set.iter().map(|s| w(s)).collect();
                for k in 1..=n {
                    let poly = amitsur_expand(k, &words);
                    for _ in 0..5 {
                        let mats: Vec<IntMatrix> = (0..3).map(|_| IntMatrix::random(n, -5, 5, &mut rng)).collect();
                        let q: Vec<BigInt> = (0..words.len()).map(|_| BigInt::from(rand::Rng::gen_range(&mut rng, -3..=3))).collect();
                        let lhs = sigma_eval(&poly, &mats, &q).unwrap();
                        let rhs = sigma_of_weighted_sum(k, &words, &q, &mats);
                        assert_eq!(lhs, rhs, "n={n} k={k} {set:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn newton_cases_hold_numerically() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for u in ["x1", "x1 x2", "x2 x1^2"] {
            let u = w(u);
            for case in [NewtonCase::TraceOfSquare(u.clone()), NewtonCase::TraceOfCube(u.clone()), NewtonCase::TwiceSigma2(u.clone())] {
                for n in [3, 4] {
                    let mats: Vec<IntMatrix> = (0..2).map(|_| IntMatrix::random(n, -5, 5, &mut rng)).collect();
                    assert_eq!(sigma_eval(&case.lhs(), &mats, &[]).unwrap(), sigma_eval(&newton_reduce(&case), &mats, &[]).unwrap());
                }
            }
        }
    }

    #[test]
    fn k_above_size_is_rejected() {
        let p = SigmaPoly::symbol(SigmaSymbol::new(3, &w("x1")));
        let m = vec![IntMatrix::identity(2)];
        assert_eq!(sigma_eval(&p, &m, &[]), Err(SigmaError::KTooLarge { k: 3, n: 2 }));
    }

    #[test]
    fn trace_forms() {
        let b = crate::word::DEFAULT_COLUMN_BUDGET;
        for p in [0, 2, 3, 5] {
            let f = canonical_trace_form(&TraceExpr::Trace(w("x1 x2 x1")), Characteristic::of(p), b).unwrap();
            assert_eq!(f.traces, lc("x1^2 x2", p));
        }
        let f = canonical_trace_form(&TraceExpr::Trace(w("x1^3")), Characteristic::of(3), b).unwrap();
        assert!(f.is_zero());
        let f = canonical_trace_form(&TraceExpr::Sigma2(w("x1 x2")), Characteristic::of(2), b).unwrap();
        assert_eq!(f.traces, lc("x1^2 x2^2", 2));
        assert!(f.canonical);
        let f = canonical_trace_form(&TraceExpr::Trace(w("x1^4")), Characteristic::ZERO, b).unwrap();
        assert!(f.is_zero());
        let f = canonical_trace_form(&TraceExpr::Trace(w("x1^3")), Characteristic::ZERO, b).unwrap();
        assert_eq!(f.traces, lc("x1^3", 0));
        let f = canonical_trace_form(&TraceExpr::Sigma2(w("x1")), Characteristic::of(2), b).unwrap();
        assert_eq!(f.sigma2, lc("x1", 2));
    }

    proptest! {
        #[test]
        fn grading_and_rotation(a in proptest::collection::vec(0u8..3, 1..4), b in proptest::collection::vec(0u8..3, 1..3), k in 1usize..4, r in 0usize..4) {
            let (ua, ub) = (Word::from_letters(&a), Word::from_letters(&b));
            let p = amitsur_expand(k, &[ua.clone(), ub.clone()]);
            for ((m, q), _) in &p.terms {
                let got = SigmaPoly::monomial_mdeg(m, 3);
                let mut want = vec![0u32; 3];
                for &l in ua.letters() { want[l as usize] += q[0]; }
                for &l in ub.letters() { want[l as usize] += q[1]; }
                prop_assert_eq!(got, want);
            }
            // A lone summand may be rotated freely.
            prop_assert_eq!(amitsur_expand(k, &[ua.rotate(r)]), amitsur_expand(k, &[ua]));
        }
    }
}
