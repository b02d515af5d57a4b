//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test --release -p nilcert --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nilcert::certificate::{Certificate, Evidence};
use nilcert::decomp::{
    decide_sigma2, decide_trace, generator_degree, single_letter_trace, Decision, DecompDecision,
};
use nilcert::functionals::{verify_functional, FunctionalKind};
use nilcert::lincomb::LinComb;
use nilcert::nilpotency::{nilpotency_degree, ClassOutcome, NildegValue};
use nilcert::oracle::Oracle;
use nilcert::relations::SystemDescriptor;
use nilcert::scalar::Characteristic;
use nilcert::sigma::{amitsur_expand, newton_reduce, sigma_eval, sigma_of_weighted_sum, IntMatrix, NewtonCase};
use nilcert::word::{Multidegree, Word, DEFAULT_COLUMN_BUDGET};

type Outcome = Result<String, String>;

fn ch(p: u64) -> Characteristic {
    Characteristic::of(p)
}

fn lc(s: &str, p: u64) -> LinComb {
    LinComb::parse(s, ch(p)).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Certificates collected by the earlier criteria, re-checked by criterion 8.
#[derive(Default)]
struct Ctx {
    certificates: Vec<Certificate>,
}

impl Ctx {
    fn keep(&mut self, c: &Certificate) {
        if self.certificates.len() < 400 {
            self.certificates.push(c.clone());
        }
    }
}

fn nildeg_cases(ctx: &mut Ctx) -> Outcome {
    let cases = [(2, 0, 6), (2, 2, 6), (2, 3, 7), (2, 5, 6), (3, 2, 6), (4, 2, 7), (5, 2, 8), (4, 3, 13)];
    let mut notes = Vec::new();
    for (d, p, want) in cases {
        let t = Instant::now();
        let mut oracle = Oracle::default();
        let r = nilpotency_degree(&mut oracle, d, ch(p), 3);
        ensure(r.value == NildegValue::Exact { value: want }, || format!("C(3,{d},{p}) = {:?}, want {want}", r.value))?;
        r.verify(DEFAULT_COLUMN_BUDGET).map_err(|e| format!("C(3,{d},{p}): {e}"))?;
        for rec in &r.classes {
            if let ClassOutcome::Zero { certificates, .. } = &rec.outcome {
                certificates.iter().take(3).for_each(|c| ctx.keep(c));
            }
        }
        let route = r.witness.as_ref().map_or("none".into(), |w| w.evidence.describe());
        notes.push(format!("C(3,{d},{p})={want} [{route}; {:.1?}]", t.elapsed()));
    }
    Ok(notes.join(", "))
}

fn open_case(ctx: &mut Ctx) -> Outcome {
    let t = Instant::now();
    let mut oracle = Oracle::default();
    let r = nilpotency_degree(&mut oracle, 3, ch(3), 3);
    let value = r.value.exact().ok_or_else(|| format!("not decided: {:?}", r.value))?;
    ensure(value == 9 || value == 10, || format!("C(3,3,3) = {value}"))?;
    r.verify(DEFAULT_COLUMN_BUDGET)?;
    let desc = SystemDescriptor::nil3(Multidegree::new(vec![3, 3, 3]), ch(3));
    let solved = oracle.solve(&desc).map_err(|e| e.to_string())?;
    let full = r.classes.iter().find(|c| c.mdeg.counts() == [3, 3, 3]).ok_or("class (3,3,3) not examined")?;
    let status = match &full.outcome {
        ClassOutcome::Zero { certificates, .. } => {
            certificates.iter().for_each(|c| ctx.keep(c));
            format!("zero, {} certificates", certificates.len())
        }
        ClassOutcome::Nonzero { word, .. } => format!("nonzero at {word}"),
        ClassOutcome::Undecided { reason } => return Err(reason.clone()),
    };
    Ok(format!(
        "C(3,3,3) = {value}; (3,3,3): {} words, {} canonical columns, rank {}, {status} [{:.1?}]",
        solved.comp.words.len(),
        solved.comp.canonical.len(),
        solved.rank,
        t.elapsed()
    ))
}

fn functionals() -> Outcome {
    let budget = DEFAULT_COLUMN_BUDGET;
    let m = |s: &str| Multidegree::parse(s).unwrap();
    let mut rows = 0;
    for p in [0, 2, 3, 5] {
        let c = verify_functional(FunctionalKind::SixWord, &m("3,2"), ch(p), budget).map_err(|e| e.to_string())?;
        ensure(c.annihilates, || format!("six-word fails at p = {p}: {:?}", c.violation))?;
        let v = FunctionalKind::SixWord.pair(&lc("x1^2 x2^2 x1", p));
        ensure(v.is_one(), || format!("six-word value {v} at p = {p}"))?;
        rows += c.rows_checked;
    }
    for d in [4usize, 5] {
        let mut md = vec![3];
        md.extend(std::iter::repeat(1).take(d - 1));
        let md = Multidegree::new(md);
        let c = verify_functional(FunctionalKind::SquareCount, &md, ch(2), budget).map_err(|e| e.to_string())?;
        ensure(c.annihilates, || format!("square-count fails on {md}"))?;
        let mut w = vec![0u8, 0];
        w.extend(1..d as u8);
        w.push(0);
        let v = FunctionalKind::SquareCount.value(&w, ch(2));
        ensure(v.is_one(), || format!("square-count value {v} on {}", Word::from_letters(&w)))?;
        rows += c.rows_checked;
    }
    for t in 1..=3usize {
        let md = Multidegree::new(vec![1; 2 * t]);
        let mut h = String::new();
        for i in 0..t {
            h.push_str(&format!("(x{a} x{b} - x{b} x{a})", a = 2 * i + 1, b = 2 * i + 2));
        }
        let h = lc(&h, 3);
        for (kind, sign) in [(FunctionalKind::ParityEven, t + 1), (FunctionalKind::ParityOdd, t)] {
            let c = verify_functional(kind, &md, ch(3), budget).map_err(|e| e.to_string())?;
            ensure(c.annihilates, || format!("{kind} fails on {md}"))?;
            let want = ch(3).from_i64(if sign % 2 == 0 { 1 } else { -1 });
            let v = kind.pair(&h);
            ensure(v == want, || format!("h_{} under {kind} is {v}, want {want}", 2 * t))?;
            rows += c.rows_checked;
        }
    }
    Ok(format!("{rows} rows checked"))
}

fn sign_of(perm: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                s = -s;
            }
        }
    }
    s
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// `name`, characteristics, element that must vanish.
fn battery() -> Vec<(String, Vec<u64>, String)> {
    let all = vec![0, 2, 3, 5];
    let not3 = vec![0, 2, 5, 7];
    let big = vec![0, 5, 7];
    let mut out: Vec<(String, Vec<u64>, String)> = vec![
        ("(xy)^2 = y^2 x^2".into(), all.clone(), "x1 x2 x1 x2 - x2^2 x1^2".into()),
        ("x^2 a y^2 = 0".into(), not3.clone(), "x1^2 x3 x2^2".into()),
        ("-2x^2uvx = x^2uxv + ux^2vx".into(), all.clone(), "2 x1^2 x2 x3 x1 + x1^2 x2 x1 x3 + x2 x1^2 x3 x1".into()),
        ("x^2abcd = 0".into(), big.clone(), "x1^2 x2 x3 x4 x5".into()),
        ("abcdx^2 = 0".into(), big.clone(), "x2 x3 x4 x5 x1^2".into()),
        ("abx^2cd + bax^2cd = 0".into(), big.clone(), "x2 x3 x1^2 x4 x5 + x3 x2 x1^2 x4 x5".into()),
        ("abx^2cd + abx^2dc = 0".into(), big.clone(), "x2 x3 x1^2 x4 x5 + x2 x3 x1^2 x5 x4".into()),
        ("W_xy = -W_yx".into(), all.clone(), "x1^2 x2^2 x1 x2 + x2^2 x1^2 x2 x1".into()),
    ];
    let a = ["x2", "x3", "x4", "x5"];
    for (label, split) in [("a1 x^2 a2 a3 a4 alternates", 1), ("a1 a2 x^2 a3 a4 alternates", 2)] {
        for perm in permutations(4) {
            let word = |order: &[usize]| {
                let mut parts: Vec<&str> = order.iter().map(|&i| a[i]).collect();
                parts.insert(split, "x1^2");
                parts.join(" ")
            };
            let id: Vec<usize> = (0..4).collect();
            let s = sign_of(&perm);
            let op = if s == 1 { "-" } else { "+" };
            out.push((format!("{label} {perm:?}"), big.clone(), format!("{} {op} {}", word(&id), word(&perm))));
        }
    }
    // x = x1, y = x2, a = x3, b = x4, W = x^2 y^2 x y.
    let w = "(x1^2 x2^2 x1 x2)";
    let t7 = [
        ("x1^2 x2^2 x3 x1 x2", format!("-x3 {w} - {w} x3")),
        ("x1^2 x2^2 x3 x2 x1", format!("x3 {w} - {w} x3")),
        ("x1^2 x3 x2^2 x1 x2", format!("x3 {w}")),
        ("x1^2 x2^2 x1 x3 x2", format!("{w} x3")),
        ("x1^2 x3 x1 x2^2 x4 x2", format!("-x3 x4 {w} - {w} x3 x4 + x3 {w} x4 + x4 {w} x3")),
        ("x1^2 x3 x2^2 x4 x1 x2", format!("x3 x4 {w} - {w} x3 x4 + x4 {w} x3")),
        ("x1^2 x3 x2^2 x1 x4 x2", format!("-x3 x4 {w} - {w} x3 x4 - x3 {w} x4 + x4 {w} x3")),
        ("x1^2 x2^2 x3 x1 x4 x2", format!("-x3 x4 {w} + {w} x3 x4 + x4 {w} x3")),
        ("x1^2 x3 x2^2 x4 x2 x1", format!("-{w} x3 x4 + x4 {w} x3")),
        ("x1^2 x2^2 x3 x2 x4 x1", format!("x3 x4 {w} - x4 {w} x3")),
    ];
    for (lhs, rhs) in t7 {
        out.push((format!("{lhs} = {rhs}"), vec![3], format!("{lhs} - ({rhs})")));
    }
    // x = x1; W a letter or a two-letter word.
    for wv in ["x2", "x2 x3"] {
        let w = format!("({wv})");
        out.push((format!("x^2 W^2 x = -x^2 W x W, W = {wv}"), vec![3], format!("x1^2 {w}^2 x1 + x1^2 {w} x1 {w}")));
        out.push((format!("x^2 W^2 x = -W x^2 W x, W = {wv}"), vec![3], format!("x1^2 {w}^2 x1 + {w} x1^2 {w} x1")));
        out.push((format!("W x^2 W x = x^2 W x W, W = {wv}"), vec![3], format!("{w} x1^2 {w} x1 - x1^2 {w} x1 {w}")));
        out.push((format!("x W^3 = W^3 x, W = {wv}"), vec![3], format!("x1 {w}^3 - {w}^3 x1")));
        for i in 0..=3u32 {
            for l in 0..=3u32 {
                for j in 0..=3u32 {
                    if i + j + l == 0 || i + j + l > 3 {
                        continue;
                    }
                    let pw = |e: u32| if e == 0 { String::new() } else { format!("{w}^{e}") };
                    let lhs = format!("{} x1^2 {} x1 {}", pw(i), pw(l), pw(j));
                    let rhs = format!("{l} x1^2 {w} x1 {}", pw(i + j + l - 1));
                    out.push((format!("W^{i} x^2 W^{l} x W^{j}, W = {wv}"), vec![3], format!("{lhs} - {rhs}")));
                }
            }
        }
    }
    out
}

fn identity_battery(ctx: &mut Ctx) -> Outcome {
    let mut oracle = Oracle::default();
    let mut count = 0;
    for (name, ps, text) in battery() {
        for p in ps {
            let e = LinComb::parse(&text, ch(p)).map_err(|e| format!("{name}: {e}"))?;
            let dec = oracle.zero_test(&e, 5, 3).map_err(|e| format!("{name} at p = {p}: {e}"))?;
            ensure(dec.is_zero(), || format!("{name} is not zero at p = {p}"))?;
            if count % 7 == 0 {
                ctx.keep(&dec.certificate);
            }
            count += 1;
        }
        oracle.clear();
    }
    Ok(format!("{count} instances zero"))
}

fn flagship(ctx: &mut Ctx) -> Outcome {
    let t = Instant::now();
    let w = "(x1^2 x2^2 x1 x2)";
    let text = format!(
        "-x3 x4 x5 {w} - x4 x5 x3 {w} + x3 x4 {w} x5 + x3 x5 {w} x4 + x4 x5 {w} x3 + x3 {w} x4 x5 - x3 {w} x5 x4 - {w} x3 x4 x5"
    );
    let e = lc(&text, 3);
    let mut oracle = Oracle::default();
    let desc = SystemDescriptor::nil3(Multidegree::new(vec![3, 3, 1, 1, 1]), ch(3));
    let dec = oracle.zero_test_in(&desc, &e).map_err(|e| e.to_string())?;
    ensure(dec.is_zero(), || "flagship identity is not zero".into())?;
    let cert = Certificate::from_json_str(&dec.certificate.to_json_string()).map_err(|e| e.to_string())?;
    cert.verify(DEFAULT_COLUMN_BUDGET).map_err(|e| format!("replay: {e}"))?;
    let rows = match &cert.evidence {
        Evidence::Zero(z) => z.rows.len(),
        Evidence::Nonzero(_) => 0,
    };
    let cols = oracle.solve(&desc).map_err(|e| e.to_string())?.comp.canonical.len();
    ctx.keep(&cert);
    Ok(format!("{cols} canonical columns, certificate with {rows} rows replayed [{:.1?}]", t.elapsed()))
}

fn random_word(rng: &mut ChaCha8Rng, letters: u8, max_len: usize) -> Word {
    let len = rng.gen_range(1..=max_len);
    Word::from_letters(&(0..len).map(|_| rng.gen_range(0..letters)).collect::<Vec<_>>())
}

fn amitsur_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut tuples = 0;
    for n in [3usize, 4] {
        for k in 1..=n {
            for _ in 0..25 {
                let m = rng.gen_range(1..=3);
                let summands: Vec<Word> = (0..m).map(|_| random_word(&mut rng, 3, 3)).collect();
                let poly = amitsur_expand(k, &summands);
                for _ in 0..4 {
                    let letters: Vec<IntMatrix> = (0..3).map(|_| IntMatrix::random(n, -3, 3, &mut rng)).collect();
                    let q: Vec<BigInt> = (0..m).map(|_| BigInt::from(rng.gen_range(-3i64..=3))).collect();
                    let direct = sigma_of_weighted_sum(k, &summands, &q, &letters);
                    let expanded = sigma_eval(&poly, &letters, &q).map_err(|e| e.to_string())?;
                    ensure(direct == expanded, || format!("sigma_{k} of {summands:?} at n = {n}"))?;
                    tuples += 1;
                }
            }
        }
        for _ in 0..100 {
            let letters: Vec<IntMatrix> = (0..3).map(|_| IntMatrix::random(n, -3, 3, &mut rng)).collect();
            let u = random_word(&mut rng, 3, 4);
            let um = u.letters().iter().fold(IntMatrix::identity(n), |acc, &l| acc.mul(&letters[l as usize]));
            let tr = um.sigma(1);
            let lhs = BigInt::from(2) * um.sigma(2);
            ensure(lhs == &tr * &tr - um.mul(&um).sigma(1), || format!("2 s2 = tr^2 - tr(U^2) fails for {u}"))?;
            for case in [NewtonCase::TraceOfSquare(u.clone()), NewtonCase::TraceOfCube(u.clone()), NewtonCase::TwiceSigma2(u.clone())] {
                let a = sigma_eval(&case.lhs(), &letters, &[]).map_err(|e| e.to_string())?;
                let b = sigma_eval(&newton_reduce(&case), &letters, &[]).map_err(|e| e.to_string())?;
                ensure(a == b, || format!("{case:?} at n = {n}"))?;
            }
            tuples += 1;
        }
    }
    Ok(format!("{tuples} matrix tuples"))
}

fn spot(ctx: &mut Ctx, d: &DecompDecision, want: Decision, lines: &mut Vec<String>) -> Result<(), String> {
    ensure(d.decision == want, || format!("{} at p = {}: {} (want {want})", d.expression, d.chr, d.decision))?;
    d.verify(DEFAULT_COLUMN_BUDGET).map_err(|e| format!("{}: {e}", d.expression))?;
    if let Some(c) = &d.certificate {
        ctx.keep(c);
    }
    let label = if d.complete { "exact" } else { "one-way" };
    lines.push(format!("{}@{}={} ({:?}, {label})", d.expression, d.chr, d.decision, d.route));
    Ok(())
}

fn decomposability_spots(ctx: &mut Ctx) -> Outcome {
    let mut oracle = Oracle::default();
    let mut lines = Vec::new();
    for p in [0, 2, 3, 5] {
        let r = generator_degree(&mut oracle, 1, ch(p)).map_err(|e| e.to_string())?;
        ensure(r.value == NildegValue::Exact { value: 3 }, || format!("D(3,1,{p}) = {:?}", r.value))?;
        let sq = single_letter_trace(2, ch(p), 0);
        spot(ctx, &sq, if p == 2 { Decision::Decomposable } else { Decision::Indecomposable }, &mut lines)?;
        let cube = single_letter_trace(3, ch(p), 0);
        spot(ctx, &cube, if p == 3 { Decision::Decomposable } else { Decision::Indecomposable }, &mut lines)?;
    }
    lines.push("D(3,1,p)=3".into());
    let w = |s: &str| Word::parse(s).unwrap();
    for p in [0, 5, 2] {
        let d = decide_trace(&mut oracle, &w("x1^2 x2^2 x1 x2"), ch(p)).map_err(|e| e.to_string())?;
        spot(ctx, &d, Decision::Indecomposable, &mut lines)?;
    }
    for u in ["x1^2 x2^2 x1 x2", "x3^2 x1^2 x2^2 x1 x2"] {
        let d = decide_trace(&mut oracle, &w(u), ch(3)).map_err(|e| e.to_string())?;
        spot(ctx, &d, Decision::Indecomposable, &mut lines)?;
    }
    let s2 = decide_sigma2(&mut oracle, &w("x1 x2"), ch(2)).map_err(|e| e.to_string())?;
    ensure(s2.mdeg.counts() == [2, 2], || format!("s2(x1 x2) reduced to {}", s2.mdeg))?;
    spot(ctx, &s2, Decision::Indecomposable, &mut lines)?;
    let r = generator_degree(&mut oracle, 4, ch(2)).map_err(|e| e.to_string())?;
    ensure(r.value == NildegValue::Exact { value: 6 }, || format!("D(3,4,2) = {:?}", r.value))?;
    r.verify(DEFAULT_COLUMN_BUDGET)?;
    lines.push("D(3,4,2)=6".into());
    Ok(lines.join("; "))
}

/// Every single-coefficient change of the evidence must be rejected.
fn mutations_rejected(cert: &Certificate) -> Result<usize, String> {
    let chr = cert.system.chr;
    // In GF(2) the only change of a nonzero coefficient is to zero.
    let bump = |c: &nilcert::scalar::Scalar| c + &chr.one();
    let mut n = 0;
    let mut check = |m: Certificate, what: String| -> Result<(), String> {
        let replay = Certificate::from_json_str(&m.to_json_string());
        if let Ok(r) = replay {
            if r.verify(DEFAULT_COLUMN_BUDGET).is_ok() {
                return Err(format!("mutated {what} of a certificate in {} still verifies", m.system));
            }
        }
        n += 1;
        Ok(())
    };
    match &cert.evidence {
        Evidence::Zero(z) => {
            for i in 0..z.rows.len() {
                let mut m = cert.clone();
                if let Evidence::Zero(zm) = &mut m.evidence {
                    zm.rows[i].1 = bump(&zm.rows[i].1);
                }
                check(m, format!("row {i}"))?;
            }
        }
        Evidence::Nonzero(w) => {
            for key in w.functional.keys() {
                let mut m = cert.clone();
                if let Evidence::Nonzero(wm) = &mut m.evidence {
                    let v = wm.functional.get_mut(key).expect("key");
                    *v = bump(v);
                }
                check(m, format!("value at {key}"))?;
            }
            let mut m = cert.clone();
            if let Evidence::Nonzero(wm) = &mut m.evidence {
                wm.value = bump(&wm.value);
            }
            check(m, "claimed value".into())?;
        }
    }
    Ok(n)
}

fn soundness(ctx: &mut Ctx) -> Outcome {
    let mut mutations = 0;
    for c in &ctx.certificates {
        let replay = Certificate::from_json_str(&c.to_json_string()).map_err(|e| e.to_string())?;
        replay.verify(DEFAULT_COLUMN_BUDGET).map_err(|e| format!("{}: {e}", c.system))?;
        mutations += mutations_rejected(c)?;
    }
    let collected = ctx.certificates.len();

    let mut runner = TestRunner::new(Config { cases: 96, failure_persistence: None, ..Config::default() });
    let strategy = (
        prop::sample::select(vec![0u64, 2, 3, 5]),
        prop::collection::vec(1u32..=3, 1..=3),
        prop::collection::vec((-3i64..=3, any::<u64>()), 1..=4),
    );
    let random = std::cell::Cell::new(0usize);
    let result = runner.run(&strategy, |(p, md, terms)| {
        let md = Multidegree::new(md);
        let mut oracle = Oracle::default();
        let desc = SystemDescriptor::nil3(md.clone(), ch(p));
        let words = nilcert::word::enumerate_words(&md, 100_000).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mut e = LinComb::zero(ch(p));
        for (c, pick) in terms {
            e.add_term(words[(pick % words.len() as u64) as usize].clone(), ch(p).from_i64(c));
        }
        let dec = oracle.zero_test_in(&desc, &e).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let replay = Certificate::from_json_str(&dec.certificate.to_json_string()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        replay.verify(DEFAULT_COLUMN_BUDGET).map_err(|e| TestCaseError::fail(e.to_string()))?;
        mutations_rejected(&dec.certificate).map_err(TestCaseError::fail)?;
        random.set(random.get() + 1);
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok(format!("{collected} collected and {} random certificates replay; {mutations} single mutations of collected ones rejected", random.get()))
}

fn all_mdegs(max_total: u32, d: usize) -> Vec<Multidegree> {
    fn rec(rest: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Multidegree>) {
        if !cur.is_empty() {
            out.push(Multidegree::new(cur.clone()));
        }
        if left == 0 {
            return;
        }
        for part in 1..=rest {
            cur.push(part);
            rec(rest - part, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(max_total, d, &mut Vec::new(), &mut out);
    out
}

fn uniformity() -> Outcome {
    let ps = [0u64, 5, 7];
    let mdegs = all_mdegs(7, 3);
    let mut words_checked = 0;
    for md in &mdegs {
        let mut profile: Option<(usize, Vec<bool>)> = None;
        for p in ps {
            let mut oracle = Oracle::default();
            let desc = SystemDescriptor::nil3(md.clone(), ch(p));
            let s = oracle.solve(&desc).map_err(|e| e.to_string())?;
            let words = s.comp.words.clone();
            let mut zeros = Vec::with_capacity(words.len());
            for w in &words {
                let dec = oracle.zero_test_in(&desc, &LinComb::word(w.clone(), ch(p))).map_err(|e| e.to_string())?;
                zeros.push(dec.is_zero());
            }
            let this = (s.dimension(), zeros);
            match &profile {
                None => profile = Some(this),
                Some(prev) => ensure(*prev == this, || format!("{md} differs between p = 0 and p = {p}"))?,
            }
        }
        words_checked += profile.map_or(0, |p| p.1.len());
    }

    let mut runner = TestRunner::new(Config { cases: 128, failure_persistence: None, ..Config::default() });
    let strategy = (
        prop::sample::select(mdegs.clone()),
        any::<u64>(),
        any::<u64>(),
        prop::sample::select(vec![1i64, -1]),
    );
    runner
        .run(&strategy, |(md, a, b, s)| {
            let words = nilcert::word::enumerate_words(&md, 100_000).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let (u, v) = (&words[(a % words.len() as u64) as usize], &words[(b % words.len() as u64) as usize]);
            let mut outcomes = Vec::new();
            for p in ps {
                let mut e = LinComb::word(u.clone(), ch(p));
                e.add_term(v.clone(), ch(p).from_i64(s));
                let mut oracle = Oracle::default();
                let dec = oracle.zero_test(&e, md.d(), 3).map_err(|e| TestCaseError::fail(e.to_string()))?;
                outcomes.push(dec.is_zero());
            }
            prop_assert!(outcomes.iter().all(|&z| z == outcomes[0]), "{} {} {}: {:?}", u, s, v, outcomes);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{} multidegrees, {words_checked} words, 128 random pairs", mdegs.len()))
}

fn main() {
    let mut ctx = Ctx::default();
    let criteria: Vec<(u32, &str, Box<dyn Fn(&mut Ctx) -> Outcome>)> = vec![
        (1, "nilpotency degrees, small d", Box::new(nildeg_cases)),
        (2, "C(3,3,3) decided with certificates", Box::new(open_case)),
        (3, "functionals solve their systems", Box::new(|_| functionals())),
        (4, "identity battery", Box::new(identity_battery)),
        (5, "six-term W identity at (3,3,1,1,1)", Box::new(flagship)),
        (6, "Amitsur expansion against matrices", Box::new(|_| amitsur_oracle())),
        (7, "decomposability spot table", Box::new(decomposability_spots)),
        (8, "certificate replay and mutation", Box::new(soundness)),
        (9, "same zero-tests for p = 0, 5, 7", Box::new(|_| uniformity())),
    ];
    let mut failed = 0;
    for (n, title, f) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| f(&mut ctx)))
            .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("PASS criterion {n}: {title}: {detail} [{:.1?}]", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n}: {title}: {why} [{:.1?}]", t.elapsed());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
