//! Decomposability of trace and `σ_k` invariants of 3×3 generic matrices
//! modulo `(R⁺)²`, by reduction to zero-tests in `N_{3,d}`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{Certificate, SCHEMA_VERSION};
use crate::lincomb::{LinComb, LinCombError};
use crate::nilpotency::{examine_component, nilpotency_degree, sorted_classes, ClassOutcome, NildegValue};
use crate::oracle::{Oracle, OracleError};
use crate::relations::SystemDescriptor;
use crate::scalar::Characteristic;
use crate::sigma::{newton_reduce, reduce_trace, NewtonCase, SigmaSymbol};
use crate::word::{letter_blocks, Multidegree, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Decomposable,
    Indecomposable,
    /// The available route only works in the other direction.
    Indeterminate,
}

/// How a decision was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Characteristic 3: `Σ α_i tr(U_i) ≡ 0` iff `Σ α_i u_i` lies in the
    /// span of the nil rows and the rotations `uv − vu`.
    CyclicCriterion,
    /// `U = G·X` with `deg_X G = 0`: `tr(U) ≡ 0` iff `g = 0`.
    DegreeOneLetter,
    /// `tr(G X²)`: decomposable implies `gx + xg = 0`; conversely for `p ≠ 2`.
    SquareLetter,
    /// `tr(X² U X V)`: decomposable implies
    /// `ux²v − 2vx²u − x²uv − uvx² = 0`; conversely for `p ≠ 3`.
    CubeLetter,
    /// `g = 0` for `U = G·X` (any `X`) makes `tr(U)` decomposable.
    VanishingPrefix,
    /// Single-letter powers via the Newton relations; `σ_1, σ_2, σ_3` of
    /// one generic matrix are algebraically independent.
    Newton,
    /// `σ_2(X)` and `det(X)` are free generators of degree 2 and 3.
    FreeGenerator,
    /// `σ_2` rewritten as a trace of the same degree.
    SigmaToTrace,
    /// Reduces to zero modulo rotations and the nil rows `tr(g1 T g2)`
    /// with `g1 g2` non-empty, valid in every characteristic.
    TraceRelations,
}

impl Route {
    /// Whether the route decides both ways in characteristic `p`.
    pub fn complete_for(self, p: u64) -> bool {
        match self {
            Route::CyclicCriterion => p == 3,
            Route::DegreeOneLetter | Route::Newton | Route::FreeGenerator => true,
            Route::SquareLetter => p != 2,
            Route::CubeLetter => p != 3,
            Route::VanishingPrefix | Route::SigmaToTrace | Route::TraceRelations => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompDecision {
    pub expression: String,
    pub mdeg: Multidegree,
    #[serde(rename = "char")]
    pub chr: Characteristic,
    pub decision: Decision,
    pub route: Route,
    /// True when the route is an equivalence in this characteristic.
    pub complete: bool,
    /// Element of `N_{3,d}` (or of the cyclic quotient) that was tested.
    pub element: Option<LinComb>,
    pub certificate: Option<Certificate>,
    pub note: Option<String>,
}

impl DecompDecision {
    fn new(expression: String, mdeg: Multidegree, chr: Characteristic, route: Route) -> DecompDecision {
        DecompDecision {
            expression,
            mdeg,
            chr,
            decision: Decision::Indeterminate,
            route,
            complete: route.complete_for(chr.value()),
            element: None,
            certificate: None,
            note: None,
        }
    }

    /// Re-checks the attached certificate and that it matches the decision.
    pub fn verify(&self, budget: u64) -> Result<(), String> {
        let Some(c) = &self.certificate else {
            return Ok(());
        };
        c.verify(budget).map_err(|e| e.to_string())?;
        if Some(&c.target) != self.element.as_ref() {
            return Err("certificate is about another element".into());
        }
        let consistent = match self.decision {
            Decision::Decomposable => c.is_zero(),
            Decision::Indecomposable => !c.is_zero(),
            Decision::Indeterminate => c.is_zero(),
        };
        if consistent {
            Ok(())
        } else {
            Err(format!("certificate contradicts decision {:?}", self.decision))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecompError {
    #[error("the cyclic criterion is only proved in characteristic 3, got {0}")]
    NotCharacteristicThree(Characteristic),
    #[error("no letter of degree 1 in {0}")]
    NoDegreeOneLetter(Word),
    #[error("x{0} occurs in the other factors")]
    LetterOccurs(usize),
    #[error("empty word")]
    Empty,
    #[error(transparent)]
    Combination(#[from] LinCombError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn trace_text(u: &Word) -> String {
    format!("tr({u})")
}

fn letters_of(words: &[&Word]) -> usize {
    words.iter().map(|w| w.alphabet_size()).max().unwrap_or(0)
}

/// Characteristic 3: decides `Σ α_i tr(U_i) ≡ 0` completely.
pub fn trace_decomposable_p3(oracle: &mut Oracle, c: &LinComb) -> Result<DecompDecision, DecompError> {
    let chr = c.characteristic();
    if chr.value() != 3 {
        return Err(DecompError::NotCharacteristicThree(chr));
    }
    let d = c.alphabet_size().max(1);
    let mdeg = c.mdeg(d)?;
    let mut out = DecompDecision::new(format!("tr[{c}]"), mdeg.clone(), chr, Route::CyclicCriterion);
    let desc = SystemDescriptor::new(mdeg, chr, 3, true);
    let dec = oracle.zero_test_in(&desc, c)?;
    out.decision = if dec.is_zero() { Decision::Decomposable } else { Decision::Indecomposable };
    out.element = Some(c.clone());
    out.certificate = Some(dec.certificate);
    Ok(out)
}

/// `tr(U)` for `U` with a letter of degree 1: rotate it to the end and
/// zero-test the rest.
pub fn degree_one_reduce(oracle: &mut Oracle, u: &Word, chr: Characteristic) -> Result<DecompDecision, DecompError> {
    if u.is_empty() {
        return Err(DecompError::Empty);
    }
    let d = u.alphabet_size();
    let mdeg = u.mdeg(d);
    let x = (0..d as u8).rev().find(|&l| mdeg.counts()[l as usize] == 1).ok_or_else(|| DecompError::NoDegreeOneLetter(u.clone()))?;
    let pos = u.letters().iter().position(|&l| l == x).expect("letter occurs");
    let rotated = u.rotate(pos + 1);
    let g = Word::from_letters(&rotated.letters()[..rotated.len() - 1]);
    let mut out = DecompDecision::new(trace_text(u), mdeg, chr, Route::DegreeOneLetter);
    if g.is_empty() {
        out.decision = Decision::Indecomposable;
        out.note = Some("degree one".into());
        return Ok(out);
    }
    let e = LinComb::word(g, chr);
    let dec = oracle.zero_test(&e, d, 3)?;
    out.decision = if dec.is_zero() { Decision::Decomposable } else { Decision::Indecomposable };
    out.element = Some(e);
    out.certificate = Some(dec.certificate);
    Ok(out)
}

/// `tr(G X²)` through `gx + xg`.
pub fn square_letter_reduce(oracle: &mut Oracle, g: &Word, x: u8, chr: Characteristic) -> Result<DecompDecision, DecompError> {
    if g.contains_letter(x) {
        return Err(DecompError::LetterOccurs(x as usize + 1));
    }
    let xw = Word::from_letters(&[x]);
    let u = g.mul(&xw).mul(&xw);
    let d = letters_of(&[&u]);
    let e = LinComb::word(g.mul(&xw), chr).plus(&LinComb::word(xw.mul(g), chr));
    let mut out = DecompDecision::new(trace_text(&u), u.mdeg(d), chr, Route::SquareLetter);
    let dec = oracle.zero_test(&e, d, 3)?;
    out.decision = match (dec.is_zero(), chr.value() == 2) {
        (false, _) => Decision::Indecomposable,
        (true, false) => Decision::Decomposable,
        (true, true) => Decision::Indeterminate,
    };
    out.element = Some(e);
    out.certificate = Some(dec.certificate);
    Ok(out)
}

/// `tr(X² U X V)` through `ux²v − 2vx²u − x²uv − uvx²`.
pub fn cube_letter_reduce(
    oracle: &mut Oracle,
    u: &Word,
    v: &Word,
    x: u8,
    chr: Characteristic,
) -> Result<DecompDecision, DecompError> {
    if u.contains_letter(x) || v.contains_letter(x) {
        return Err(DecompError::LetterOccurs(x as usize + 1));
    }
    let xx = Word::from_letters(&[x, x]);
    let xw = Word::from_letters(&[x]);
    let whole = xx.mul(u).mul(&xw).mul(v);
    let d = letters_of(&[&whole]);
    let e = cube_letter_element(u, v, x, chr);
    let mut out = DecompDecision::new(trace_text(&whole), whole.mdeg(d), chr, Route::CubeLetter);
    let dec = oracle.zero_test(&e, d, 3)?;
    out.decision = match (dec.is_zero(), chr.value() == 3) {
        (false, _) => Decision::Indecomposable,
        (true, false) => Decision::Decomposable,
        (true, true) => Decision::Indeterminate,
    };
    out.element = Some(e);
    out.certificate = Some(dec.certificate);
    Ok(out)
}

/// `ux²v − 2vx²u − x²uv − uvx²`.
pub fn cube_letter_element(u: &Word, v: &Word, x: u8, chr: Characteristic) -> LinComb {
    let xx = Word::from_letters(&[x, x]);
    let mut e = LinComb::word(u.mul(&xx).mul(v), chr);
    e.add_term(v.mul(&xx).mul(u), chr.from_i64(-2));
    e.add_term(xx.mul(u).mul(v), chr.from_i64(-1));
    e.add_term(u.mul(v).mul(&xx), chr.from_i64(-1));
    e
}

/// Picks the strongest route for `tr(U)`.
pub fn decide_trace(oracle: &mut Oracle, u: &Word, chr: Characteristic) -> Result<DecompDecision, DecompError> {
    if u.is_empty() {
        return Err(DecompError::Empty);
    }
    let d = u.alphabet_size();
    let mdeg = u.mdeg(d);
    let counts = mdeg.counts();
    if counts.iter().filter(|&&c| c > 0).count() == 1 {
        return Ok(single_letter_trace(u.len(), chr, u.letters()[0]));
    }
    if chr.value() == 3 {
        return trace_decomposable_p3(oracle, &LinComb::word(u.clone(), chr));
    }
    if counts.contains(&1) {
        return degree_one_reduce(oracle, u, chr);
    }
    let mut fallback = None;
    for x in 0..d as u8 {
        let Some(r) = rotation_with_leading_square(u, x) else { continue };
        let blocks = letter_blocks(r.letters(), x);
        let rest = r.letters();
        if counts[x as usize] == 3 && blocks.len() == 2 && blocks[0] == (0, 2) && blocks[1].1 == 1 {
            // r = x² U x V
            let s2 = blocks[1].0;
            let uu = Word::from_letters(&rest[2..s2]);
            let vv = Word::from_letters(&rest[s2 + 1..]);
            let dec = cube_letter_reduce(oracle, &uu, &vv, x, chr)?;
            let dec = DecompDecision { expression: trace_text(u), ..dec };
            if dec.decision != Decision::Indeterminate {
                return Ok(dec);
            }
            fallback.get_or_insert(dec);
        } else if counts[x as usize] == 2 && blocks.len() == 1 {
            let g = Word::from_letters(&rest[2..]);
            let dec = square_letter_reduce(oracle, &g, x, chr)?;
            let dec = DecompDecision { expression: trace_text(u), ..dec };
            if dec.decision != Decision::Indeterminate {
                return Ok(dec);
            }
            fallback.get_or_insert(dec);
        }
    }
    if let Some(dec) = vanishing_prefix(oracle, u, chr)? {
        return Ok(dec);
    }
    if let Ok(r) = reduce_trace(&LinComb::word(u.clone(), chr), oracle.budget) {
        if r.is_zero() {
            let mut out = DecompDecision::new(trace_text(u), mdeg, chr, Route::TraceRelations);
            out.decision = Decision::Decomposable;
            return Ok(out);
        }
    }
    Ok(fallback.unwrap_or_else(|| DecompDecision::new(trace_text(u), mdeg, chr, Route::VanishingPrefix)))
}

/// A rotation of `u` starting with the block `x x`, if there is one.
fn rotation_with_leading_square(u: &Word, x: u8) -> Option<Word> {
    let l = u.letters();
    let n = l.len();
    (0..n).find(|&i| l[i] == x && l[(i + 1) % n] == x && l[(i + n - 1) % n] != x).map(|i| u.rotate(i))
}

/// Sufficient route: some rotation `G·X` with `g = 0`.
fn vanishing_prefix(oracle: &mut Oracle, u: &Word, chr: Characteristic) -> Result<Option<DecompDecision>, DecompError> {
    let d = u.alphabet_size();
    for i in 0..u.len() {
        let r = u.rotate(i);
        let g = Word::from_letters(&r.letters()[..r.len() - 1]);
        let e = LinComb::word(g, chr);
        let dec = oracle.zero_test(&e, d, 3)?;
        if dec.is_zero() {
            let mut out = DecompDecision::new(trace_text(u), u.mdeg(d), chr, Route::VanishingPrefix);
            out.decision = Decision::Decomposable;
            out.element = Some(e);
            out.certificate = Some(dec.certificate);
            return Ok(Some(out));
        }
    }
    Ok(None)
}

/// `tr(X^k)`: degree one is indecomposable, `k = 2, 3` by the Newton
/// relations, `k ≥ 4` because `x^{k−1} = 0`.
pub fn single_letter_trace(k: usize, chr: Characteristic, x: u8) -> DecompDecision {
    let xw = Word::from_letters(&[x]);
    let mut u = Word::empty();
    for _ in 0..k {
        u.push(x);
    }
    let mdeg = u.mdeg(x as usize + 1);
    let mut out = DecompDecision::new(trace_text(&u), mdeg, chr, Route::Newton);
    let p = chr.value() as i64;
    let survives = |c: i64| p == 0 || c.rem_euclid(p) != 0;
    match k {
        1 => {
            out.decision = Decision::Indecomposable;
            out.note = Some("degree one".into());
        }
        2 | 3 => {
            let case = if k == 2 { NewtonCase::TraceOfSquare(xw.clone()) } else { NewtonCase::TraceOfCube(xw.clone()) };
            let rest = newton_reduce(&case).drop_decomposable();
            let sym = SigmaSymbol::new(k as u32, &xw);
            let c = rest.terms.iter().find(|((m, _), _)| m.len() == 1 && m[0] == (sym.clone(), 1)).map_or(0, |(_, c)| *c);
            out.decision = if survives(c) { Decision::Indecomposable } else { Decision::Decomposable };
            out.note = Some(format!("tr({u}) = {} ≡ {c}·{sym}", newton_reduce(&case)));
        }
        _ => {
            out.decision = Decision::Decomposable;
            out.note = Some(format!("x^{} = 0", k - 1));
        }
    }
    out
}

/// `σ_2(X)` and `det(X)`.
pub fn free_generator(k: u32, chr: Characteristic) -> DecompDecision {
    let x = Word::from_letters(&[0]);
    let sym = SigmaSymbol::new(k, &x);
    let mut out = DecompDecision::new(sym.to_string(), Multidegree::new(vec![k]), chr, Route::FreeGenerator);
    out.decision = Decision::Indecomposable;
    out
}

/// `σ_2(U)` for `|U| ≥ 2`, through `σ_2(AB) ≡ tr(A²B²)` with `A` the first
/// letter, and for `p ≠ 2` also through `σ_2(U) ≡ −½ tr(U²)`.
pub fn decide_sigma2(oracle: &mut Oracle, u: &Word, chr: Characteristic) -> Result<DecompDecision, DecompError> {
    if u.len() == 1 {
        return Ok(free_generator(2, chr));
    }
    let (a, b) = u.letters().split_at(1);
    let mut forms = vec![("", Word::concat(&[a, a, b, b]))];
    if chr.value() != 2 {
        forms.push(("-1/2 ", u.mul(u)));
    }
    let d = u.alphabet_size();
    let mut last = None;
    for (scale, t) in forms {
        let inner = decide_trace(oracle, &t, chr)?;
        let dec = DecompDecision {
            expression: format!("s2({u})"),
            mdeg: t.mdeg(d),
            note: Some(format!("≡ {scale}tr({t}) via {:?}", inner.route)),
            route: Route::SigmaToTrace,
            complete: inner.complete,
            ..inner
        };
        if dec.decision != Decision::Indeterminate {
            return Ok(dec);
        }
        last = Some(dec);
    }
    Ok(last.expect("at least one form"))
}

/// One row of the generator-degree table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDegreeReport {
    pub schema_version: u32,
    pub d: usize,
    #[serde(rename = "char")]
    pub chr: Characteristic,
    /// Highest degree of an indecomposable invariant.
    pub value: NildegValue,
    /// Same for traces only.
    pub trace_value: NildegValue,
    /// Known value, or the alternatives when it is not known.
    pub expected: Vec<usize>,
    /// Nilpotency degree used for the upper bound.
    pub nilpotency: NildegValue,
    pub candidates: Vec<DecompDecision>,
    pub upper: Vec<UpperRecord>,
}

/// Why every trace of one multidegree is decomposable (or not).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperRecord {
    pub mdeg: Multidegree,
    pub status: UpperStatus,
    /// Component whose vanishing was certified.
    pub component: Option<Multidegree>,
    pub certificates: Vec<Certificate>,
    pub witness: Option<DecompDecision>,
    pub reason: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperStatus {
    AllDecomposable,
    Indecomposable,
    Undecided,
}

/// The invariants whose indecomposability gives the lower bounds.
pub fn named_candidates(d: usize, chr: Characteristic) -> Vec<(String, Word)> {
    let w = |s: &str| Word::parse(s).expect("literal word");
    let mut out = vec![("tr(X)".to_string(), w("x1")), ("tr(X^2)".into(), w("x1^2")), ("tr(X^3)".into(), w("x1^3"))];
    if d >= 2 {
        out.push(("tr(X^2 Y^2 X Y)".into(), w("x1^2 x2^2 x1 x2")));
        out.push(("tr(X^2 Y^2)".into(), w("x1^2 x2^2")));
    }
    if d >= 3 {
        out.push(("tr(X^2 Y^2 Z^2)".into(), w("x1^2 x2^2 x3^2")));
        out.push(("tr(X^2 Y^2 X Z)".into(), w("x1^2 x2^2 x1 x3")));
    }
    if d >= 4 {
        let mut a = vec![0u8, 0, 1, 0];
        a.extend(2..d as u8);
        out.push(("tr(X1^2 X2 X1 X3 ... Xd)".into(), Word::from_letters(&a)));
        let mut b = vec![0u8, 0];
        b.extend(1..d as u8 - 1);
        b.push(0);
        b.push(d as u8 - 1);
        out.push(("tr(X1^2 X2 ... X(d-1) X1 Xd)".into(), Word::from_letters(&b)));
    }
    if chr.value() == 3 && d >= 2 {
        let k = d / 2;
        if d % 2 == 0 {
            out.push((format!("tr(W^{k})"), crate::functionals::w_product(k)));
        } else {
            let mut u = Word::from_letters(&[2 * k as u8, 2 * k as u8]);
            u.extend_from(crate::functionals::w_product(k).letters());
            out.push((format!("tr(X{}^2 W^{k})", 2 * k + 1), u));
        }
    }
    out
}

/// Computes `D(3,d,K)` from the named candidates (lower bound) and a sweep
/// over the multidegrees between that bound and `C(3,d,K)`.
pub fn generator_degree(oracle: &mut Oracle, d: usize, chr: Characteristic) -> Result<GeneratorDegreeReport, DecompError> {
    let p = chr.value();
    let mut candidates = Vec::new();
    let mut lower_tr = 0usize;
    for (name, u) in named_candidates(d, chr) {
        let dec = match decide_trace(oracle, &u, chr) {
            Ok(dec) => DecompDecision { expression: name, ..dec },
            Err(DecompError::Oracle(OracleError::Budget { .. })) => {
                let mut dec = DecompDecision::new(name, u.mdeg(d), chr, Route::CyclicCriterion);
                dec.note = Some("component above the column budget".into());
                dec
            }
            Err(e) => return Err(e),
        };
        if dec.decision == Decision::Indecomposable {
            lower_tr = lower_tr.max(dec.mdeg.total());
        }
        candidates.push(dec);
    }
    candidates.push(free_generator(2, chr));
    candidates.push(free_generator(3, chr));
    if d >= 2 {
        let u = Word::from_letters(&(0..d as u8).collect::<Vec<_>>());
        match decide_sigma2(oracle, &u, chr) {
            Ok(dec) => candidates.push(dec),
            Err(DecompError::Oracle(OracleError::Budget { .. })) => {}
            Err(e) => return Err(e),
        }
    }

    let nil = nilpotency_degree(oracle, d, chr, 3);
    let c_upper = match nil.value {
        NildegValue::Exact { value } => value,
        NildegValue::Interval { upper, .. } => upper,
    };
    let mut upper = Vec::new();
    let mut undecided_above = 0usize;
    let mut t = lower_tr + 1;
    while t <= c_upper {
        for m in sorted_classes(t, d, 3) {
            let rec = upper_record(oracle, &m, chr, p)?;
            match rec.status {
                UpperStatus::AllDecomposable => {}
                UpperStatus::Indecomposable => lower_tr = lower_tr.max(t),
                UpperStatus::Undecided => undecided_above = undecided_above.max(t),
            }
            upper.push(rec);
        }
        t += 1;
    }
    let trace_value = if undecided_above > lower_tr {
        NildegValue::Interval { lower: lower_tr, upper: undecided_above }
    } else {
        NildegValue::Exact { value: lower_tr }
    };
    // σ_2 reduces to traces of the same degree and σ_3(U) is multiplicative,
    // so only det(X) adds to the trace bound.
    let value = match trace_value {
        NildegValue::Exact { value } => NildegValue::Exact { value: value.max(3) },
        NildegValue::Interval { lower, upper } => NildegValue::Interval { lower: lower.max(3), upper: upper.max(3) },
    };
    Ok(GeneratorDegreeReport {
        schema_version: SCHEMA_VERSION,
        d,
        chr,
        value,
        trace_value,
        expected: crate::report::expected_generator_degree(d, p),
        nilpotency: nil.value,
        candidates,
        upper,
    })
}

fn upper_record(oracle: &mut Oracle, m: &Multidegree, chr: Characteristic, p: u64) -> Result<UpperRecord, DecompError> {
    let mut rec = UpperRecord {
        mdeg: m.clone(),
        status: UpperStatus::Undecided,
        component: None,
        certificates: Vec::new(),
        witness: None,
        reason: None,
    };
    if p == 3 {
        let desc = SystemDescriptor::new(m.clone(), chr, 3, true);
        match examine_component(oracle, &desc) {
            ClassOutcome::Zero { certificates, .. } => {
                rec.status = UpperStatus::AllDecomposable;
                rec.component = Some(m.clone());
                rec.certificates = certificates;
            }
            ClassOutcome::Nonzero { word, evidence } => {
                let mut dec = DecompDecision::new(trace_text(&word), m.clone(), chr, Route::CyclicCriterion);
                dec.decision = Decision::Indecomposable;
                dec.element = Some(LinComb::word(word, chr));
                if let crate::functionals::NonzeroEvidence::Solved { certificate } = evidence {
                    dec.certificate = Some(certificate);
                }
                rec.status = UpperStatus::Indecomposable;
                rec.witness = Some(dec);
            }
            ClassOutcome::Undecided { reason } => rec.reason = Some(reason),
        }
        return Ok(rec);
    }
    // Any letter whose removal leaves a vanishing component.
    let counts = m.counts();
    let mut reasons = Vec::new();
    for l in 0..counts.len() {
        let mut rest = counts.to_vec();
        rest[l] -= 1;
        let rest = Multidegree::new(rest).trimmed();
        let rest = Multidegree::new({
            let mut r = rest.counts().to_vec();
            r.sort_unstable_by(|a, b| b.cmp(a));
            r.retain(|&c| c > 0);
            r
        });
        let desc = SystemDescriptor::new(rest.clone(), chr, 3, false);
        match examine_component(oracle, &desc) {
            ClassOutcome::Zero { certificates, .. } => {
                rec.status = UpperStatus::AllDecomposable;
                rec.component = Some(rest);
                rec.certificates = certificates;
                return Ok(rec);
            }
            ClassOutcome::Nonzero { .. } => reasons.push(format!("{rest} has nonzero words")),
            ClassOutcome::Undecided { reason } => reasons.push(reason),
        }
    }
    rec.reason = Some(reasons.join("; "));
    Ok(rec)
}

impl GeneratorDegreeReport {
    pub fn verify(&self, budget: u64) -> Result<(), String> {
        for c in &self.candidates {
            c.verify(budget).map_err(|e| format!("{}: {e}", c.expression))?;
        }
        for r in &self.upper {
            for c in &r.certificates {
                if !c.is_zero() || Some(&c.system.mdeg) != r.component.as_ref() {
                    return Err(format!("{}: unexpected certificate", r.mdeg));
                }
                c.verify(budget).map_err(|e| format!("{}: {e}", r.mdeg))?;
            }
            if let Some(w) = &r.witness {
                w.verify(budget)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Decomposable => "decomposable",
            Decision::Indecomposable => "indecomposable",
            Decision::Indeterminate => "indeterminate",
        })
    }
}
