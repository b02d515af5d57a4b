use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use nilcert::cache::{Cache, CacheEntry};
use nilcert::certificate::{Certificate, CertificateFormatError};
use nilcert::decomp::{
    decide_sigma2, decide_trace, free_generator, trace_decomposable_p3, Decision, DecompDecision, DecompError,
    GeneratorDegreeReport,
};
use nilcert::functionals::{verify_functional, FunctionalError, FunctionalKind};
use nilcert::lincomb::{LinComb, LinCombError};
use nilcert::nilpotency::{nilpotency_degree, NildegValue, NilpotencyReport};
use nilcert::oracle::{Oracle, OracleError};
use nilcert::relations::SystemDescriptor;
use nilcert::report::{generator_table, nilpotency_table, Table};
use nilcert::scalar::Characteristic;
use nilcert::sigma::{amitsur_expand, canonical_trace_form, sigma_eval, sigma_of_weighted_sum, IntMatrix, TraceExpr};
use nilcert::word::{Multidegree, ParseError, Word, DEFAULT_COLUMN_BUDGET};

use crate::{Cli, Command, Common, ExprSource, Output};

/// Default budget for `report`, small enough for a desk run.
pub const REPORT_BUDGET: u64 = 50_000;

pub fn run(cli: &Cli) -> Output {
    let c = &cli.common;
    let name = command_name(&cli.command);
    let chr = match Characteristic::new(c.chr) {
        Ok(chr) => chr,
        Err(e) => return argument_error(name, e.to_string()),
    };
    let cache = Cache::from_env();
    match &cli.command {
        Command::ZeroTest { source, letters, cyclic, nil_index } => {
            zero_test(&cache, c, chr, source, *letters, *cyclic, *nil_index)
        }
        Command::Dim { mdeg, cyclic, nil_index } => dim(&cache, c, chr, mdeg, *cyclic, *nil_index),
        Command::Nildeg { letters, nil_index } => nildeg(&cache, c, chr, *letters, *nil_index),
        Command::FunctionalCheck { functional, mdeg } => functional_check(&cache, c, chr, functional, mdeg),
        Command::Amitsur { k, expr, trials } => amitsur(&cache, c, *k, expr, *trials),
        Command::TraceDecompose { source } => trace_decompose(&cache, c, chr, source),
        Command::Report { theorem, letters_range } => report(&cache, c, chr, *theorem, letters_range),
        Command::Verify { file } => verify(c, file),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::ZeroTest { .. } => "zero-test",
        Command::Dim { .. } => "dim",
        Command::Nildeg { .. } => "nildeg",
        Command::FunctionalCheck { .. } => "functional-check",
        Command::Amitsur { .. } => "amitsur",
        Command::TraceDecompose { .. } => "trace-decompose",
        Command::Report { .. } => "report",
        Command::Verify { .. } => "verify",
    }
}

fn argument_error(command: &str, message: String) -> Output {
    Output::error(command, 1, json!({ "kind": "argument", "message": message }))
}

fn parse_error(command: &str, e: &ParseError, offset: usize) -> Output {
    Output::error(
        command,
        1,
        json!({ "kind": "parse", "position": e.pos + offset, "message": format!("parse error at position {}: {}", e.pos + offset, e.msg) }),
    )
}

fn combination_error(command: &str, e: &LinCombError, offset: usize) -> Output {
    match e {
        LinCombError::Parse(p) => parse_error(command, p, offset),
        other => Output::error(command, 1, json!({ "kind": "parse", "message": other.to_string() })),
    }
}

fn undecided(command: &str, reason: String) -> Output {
    Output::with_exit(command, json!({ "decision": "undecided", "reason": reason }), 2)
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable result")
}

fn read_source(command: &str, source: &ExprSource) -> Result<String, Output> {
    match (&source.expr, &source.file) {
        (Some(e), _) => Ok(e.clone()),
        (None, Some(f)) => fs::read_to_string(f)
            .map(|s| s.trim().to_string())
            .map_err(|e| argument_error(command, format!("cannot read {}: {e}", f.display()))),
        (None, None) => Err(argument_error(command, "need --expr or --file".into())),
    }
}

fn check_nil_index(command: &str, n: u8) -> Result<(), Output> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(argument_error(command, format!("nil index must be 2 or 3, got {n}")))
    }
}

fn parse_mdeg(command: &str, text: &str) -> Result<Multidegree, Output> {
    Multidegree::parse(text).map_err(|e| parse_error(command, &e, 0))
}

/// Looks up `descriptor`; on a miss runs `compute` and stores the outcome
/// when it is final (exit 0 or 3).
fn cached(
    cache: &Cache,
    descriptor: Value,
    compute: impl FnOnce(&mut CacheEntry) -> Output,
) -> Output {
    if let Some(entry) = cache.load(&descriptor) {
        if let (Some(v), Some(exit)) = (entry.result.get("output"), entry.result.get("exit").and_then(Value::as_u64)) {
            return Output { value: v.clone(), exit: exit as u8, message: None };
        }
    }
    let mut entry = CacheEntry::new(descriptor, Value::Null);
    let out = compute(&mut entry);
    if out.exit == 0 || out.exit == 3 {
        entry.result = json!({ "exit": out.exit, "output": out.value });
        if let Err(e) = cache.store(&entry) {
            return Output { message: Some(format!("warning: cache not written: {e}")), ..out };
        }
    }
    out
}

fn zero_test(
    cache: &Cache,
    c: &Common,
    chr: Characteristic,
    source: &ExprSource,
    letters: Option<usize>,
    cyclic: bool,
    n: u8,
) -> Output {
    const NAME: &str = "zero-test";
    if let Err(o) = check_nil_index(NAME, n) {
        return o;
    }
    let text = match read_source(NAME, source) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let e = match LinComb::parse(&text, chr) {
        Ok(e) => e,
        Err(err) => return combination_error(NAME, &err, 0),
    };
    let used = e.alphabet_size();
    let d = letters.unwrap_or(used).max(1);
    if d < used {
        return argument_error(NAME, format!("expression uses {used} letters, --letters is {d}"));
    }
    let mdeg = match e.mdeg(d) {
        Ok(m) => m,
        Err(err) => return combination_error(NAME, &err, 0),
    };
    let desc = SystemDescriptor::new(mdeg, chr, n, cyclic);
    let descriptor = json!({ "command": NAME, "expression": e.to_string(), "system": to_value(&desc) });
    let budget = c.budget_cols.unwrap_or(DEFAULT_COLUMN_BUDGET);
    cached(cache, descriptor, |entry| {
        let mut oracle = Oracle::new(budget);
        let (rank, dimension) = if e.is_zero() {
            (None, None)
        } else {
            match oracle.solve(&desc) {
                Ok(s) => (Some(s.rank), Some(s.dimension())),
                Err(err) => return undecided(NAME, err.to_string()),
            }
        };
        let dec = match oracle.zero_test_in(&desc, &e) {
            Ok(d) => d,
            Err(OracleError::Budget { .. }) => return undecided(NAME, "component above the column budget".into()),
            Err(err) => return Output::error(NAME, 3, json!({ "kind": "internal", "message": err.to_string() })),
        };
        let hash = match cache.store_certificate(&dec.certificate) {
            Ok(h) => h,
            Err(err) => return Output::error(NAME, 1, json!({ "kind": "io", "message": err.to_string() })),
        };
        entry.rank = rank;
        entry.nullspace_dimension = dimension;
        entry.certificates.push(hash.clone());
        Output::ok(
            NAME,
            json!({
                "decision": if dec.is_zero() { "zero" } else { "nonzero" },
                "expression": e.to_string(),
                "system": to_value(&desc),
                "rank": rank,
                "nullspace_dimension": dimension,
                "certificate_sha256": hash,
                "certificate_file": cache.certificate_path(&hash).display().to_string(),
            }),
        )
    })
}

fn dim(cache: &Cache, c: &Common, chr: Characteristic, mdeg: &str, cyclic: bool, n: u8) -> Output {
    const NAME: &str = "dim";
    if let Err(o) = check_nil_index(NAME, n) {
        return o;
    }
    let mdeg = match parse_mdeg(NAME, mdeg) {
        Ok(m) => m,
        Err(o) => return o,
    };
    let desc = SystemDescriptor::new(mdeg, chr, n, cyclic);
    let descriptor = json!({ "command": NAME, "system": to_value(&desc) });
    let budget = c.budget_cols.unwrap_or(DEFAULT_COLUMN_BUDGET);
    cached(cache, descriptor, |entry| {
        let mut oracle = Oracle::new(budget);
        let s = match oracle.solve(&desc) {
            Ok(s) => s,
            Err(err) => return undecided(NAME, err.to_string()),
        };
        entry.rank = Some(s.rank);
        entry.nullspace_dimension = Some(s.dimension());
        let free: Vec<String> = s.kernel.iter().map(|(col, _)| s.comp.canonical[*col].to_string()).collect();
        Output::ok(
            NAME,
            json!({
                "system": to_value(&desc),
                "words": s.comp.words.len(),
                "canonical_words": s.comp.canonical.len(),
                "rank": s.rank,
                "dimension": s.dimension(),
                "free_words": free,
                "solve_route": to_value(&s.route),
            }),
        )
    })
}

fn nildeg(cache: &Cache, c: &Common, chr: Characteristic, d: usize, n: u8) -> Output {
    const NAME: &str = "nildeg";
    if let Err(o) = check_nil_index(NAME, n) {
        return o;
    }
    if d == 0 {
        return argument_error(NAME, "need at least one letter".into());
    }
    let budget = c.budget_cols.unwrap_or(DEFAULT_COLUMN_BUDGET);
    let descriptor = json!({ "command": NAME, "char": chr.value(), "letters": d, "nil_index": n, "budget": budget });
    cached(cache, descriptor, |_| {
        let mut oracle = Oracle::new(budget);
        let r = nilpotency_degree(&mut oracle, d, chr, n);
        let exit = if r.value.exact().is_some() { 0 } else { 2 };
        Output::with_exit(NAME, to_value(&r), exit)
    })
}

fn functional_check(cache: &Cache, c: &Common, chr: Characteristic, name: &str, mdeg: &str) -> Output {
    const NAME: &str = "functional-check";
    let Some(kind) = FunctionalKind::from_name(name) else {
        let known: Vec<_> = FunctionalKind::ALL.iter().map(|k| k.name()).collect();
        return argument_error(NAME, format!("unknown functional {name:?}; known: {}", known.join(", ")));
    };
    let mdeg = match parse_mdeg(NAME, mdeg) {
        Ok(m) => m,
        Err(o) => return o,
    };
    let budget = c.budget_cols.unwrap_or(DEFAULT_COLUMN_BUDGET);
    let descriptor = json!({ "command": NAME, "char": chr.value(), "functional": kind.name(), "mdeg": to_value(&mdeg) });
    cached(cache, descriptor, |_| match verify_functional(kind, &mdeg, chr, budget) {
        Ok(check) => Output::ok(NAME, to_value(&check)),
        Err(e @ FunctionalError::NotApplicable { .. }) => argument_error(NAME, e.to_string()),
        Err(e @ FunctionalError::Budget(..)) => undecided(NAME, e.to_string()),
    })
}

fn amitsur(cache: &Cache, c: &Common, k: usize, expr: &str, trials: usize) -> Output {
    const NAME: &str = "amitsur";
    if k == 0 {
        return argument_error(NAME, "k must be at least 1".into());
    }
    let mut summands = Vec::new();
    let mut offset = 0;
    for part in expr.split('+') {
        match Word::parse(part) {
            Ok(w) if !w.is_empty() => summands.push(w),
            Ok(_) => return Output::error(NAME, 1, json!({ "kind": "parse", "position": offset, "message": format!("parse error at position {offset}: empty summand") })),
            Err(e) => return parse_error(NAME, &e, offset),
        }
        offset += part.len() + 1;
    }
    let descriptor = json!({
        "command": NAME,
        "k": k,
        "summands": summands.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "seed": c.seed,
        "trials": trials,
    });
    cached(cache, descriptor, |_| {
        let poly = amitsur_expand(k, &summands);
        let d = summands.iter().map(Word::alphabet_size).max().unwrap_or(1);
        let n = k.max(3);
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        let mut checks = Vec::new();
        let mut agrees = true;
        for _ in 0..trials {
            let letters: Vec<IntMatrix> = (0..d).map(|_| IntMatrix::random(n, -3, 3, &mut rng)).collect();
            let q: Vec<BigInt> = summands.iter().map(|_| BigInt::from(rng.gen_range(-3i64..=3))).collect();
            let direct = sigma_of_weighted_sum(k, &summands, &q, &letters);
            let expanded = sigma_eval(&poly, &letters, &q).expect("matrix size covers k");
            agrees &= direct == expanded;
            checks.push(json!({ "matrix_size": n, "direct": direct.to_string(), "expanded": expanded.to_string(), "agrees": direct == expanded }));
        }
        let result = json!({
            "k": k,
            "summands": summands.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "terms": poly.len(),
            "text": poly.to_string(),
            "polynomial": poly.to_json_value(),
            "checks": checks,
            "agrees": agrees,
        });
        Output::with_exit(NAME, result, if agrees { 0 } else { 3 })
    })
}

enum TraceInput {
    Trace(Word),
    Sigma(u32, Word),
    Combination(LinComb),
}

fn parse_trace_input(text: &str, chr: Characteristic) -> Result<TraceInput, Output> {
    const NAME: &str = "trace-decompose";
    let t = text.trim_end();
    let lead = text.len() - text.trim_start().len();
    let t = t.trim_start();
    let func = ["tr(", "s2(", "s3(", "det("].into_iter().find(|f| t.starts_with(f));
    let Some(func) = func else {
        return LinComb::parse(text, chr).map(TraceInput::Combination).map_err(|e| combination_error(NAME, &e, 0));
    };
    if !t.ends_with(')') {
        return Err(parse_error(NAME, &ParseError::new(t.len(), "expected ')'"), lead));
    }
    let inner = &t[func.len()..t.len() - 1];
    let e = LinComb::parse(inner, chr).map_err(|e| combination_error(NAME, &e, lead + func.len()))?;
    let single = (e.len() == 1).then(|| e.iter().next().filter(|(_, c)| c.is_one()).map(|(w, _)| w.clone())).flatten();
    let Some(w) = single else {
        return Err(argument_error(NAME, format!("{func}…) takes a single word")));
    };
    Ok(match func {
        "tr(" => TraceInput::Trace(w),
        "s2(" => TraceInput::Sigma(2, w),
        _ => TraceInput::Sigma(3, w),
    })
}

fn trace_decompose(cache: &Cache, c: &Common, chr: Characteristic, source: &ExprSource) -> Output {
    const NAME: &str = "trace-decompose";
    let text = match read_source(NAME, source) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let input = match parse_trace_input(&text, chr) {
        Ok(i) => i,
        Err(o) => return o,
    };
    let canonical_input = match &input {
        TraceInput::Trace(w) => format!("tr({w})"),
        TraceInput::Sigma(k, w) => format!("s{k}({w})"),
        TraceInput::Combination(e) => format!("tr[{e}]"),
    };
    let budget = c.budget_cols.unwrap_or(DEFAULT_COLUMN_BUDGET);
    let descriptor = json!({ "command": NAME, "char": chr.value(), "expression": canonical_input, "budget": budget });
    cached(cache, descriptor, |_| {
        let mut oracle = Oracle::new(budget);
        let (decision, form) = match &input {
            TraceInput::Trace(w) => {
                (decide_trace(&mut oracle, w, chr), canonical_trace_form(&TraceExpr::Trace(w.clone()), chr, budget).ok())
            }
            TraceInput::Sigma(2, w) => {
                (decide_sigma2(&mut oracle, w, chr), canonical_trace_form(&TraceExpr::Sigma2(w.clone()), chr, budget).ok())
            }
            TraceInput::Sigma(_, w) => {
                if w.len() != 1 {
                    return argument_error(NAME, "det(U) = Π det of its letters; give a single letter".into());
                }
                (Ok(free_generator(3, chr)), None)
            }
            TraceInput::Combination(e) => {
                if e.len() == 1 && e.iter().all(|(_, c)| c.is_one()) {
                    let w = e.words().next().expect("one word").clone();
                    (decide_trace(&mut oracle, &w, chr), canonical_trace_form(&TraceExpr::Trace(w), chr, budget).ok())
                } else if chr.value() == 3 {
                    (trace_decomposable_p3(&mut oracle, e), None)
                } else {
                    return argument_error(NAME, "combinations of traces are decided in characteristic 3 only".into());
                }
            }
        };
        let decision = match decision {
            Ok(d) => d,
            Err(DecompError::Oracle(OracleError::Budget { desc, count, budget })) => {
                return undecided(NAME, format!("component {desc} has {count} words, above the column budget {budget}"))
            }
            Err(e) => return argument_error(NAME, e.to_string()),
        };
        let exit = if decision.decision == Decision::Indeterminate { 2 } else { 0 };
        Output::with_exit(NAME, json!({ "decision": to_value(&decision), "normal_form": to_value(&form) }), exit)
    })
}

fn parse_range(text: &str) -> Option<(usize, usize)> {
    let (a, b) = text.split_once("..").or_else(|| text.split_once('-')).unwrap_or((text, text));
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (1 <= a && a <= b).then_some((a, b))
}

fn report(cache: &Cache, c: &Common, chr: Characteristic, theorem: u8, range: &str) -> Output {
    const NAME: &str = "report";
    let Some((lo, hi)) = parse_range(range) else {
        return argument_error(NAME, format!("bad letter range {range:?}; use e.g. 2..5"));
    };
    let budget = c.budget_cols.unwrap_or(REPORT_BUDGET);
    let descriptor =
        json!({ "command": NAME, "theorem": theorem, "char": chr.value(), "letters": [lo, hi], "budget": budget });
    cached(cache, descriptor, |_| {
        let mut oracle = Oracle::new(budget);
        let (value, agree) = if theorem == 1 {
            let t = nilpotency_table(&mut oracle, chr, lo..=hi);
            (to_value(&t), t.all_agree())
        } else {
            match generator_table(&mut oracle, chr, lo..=hi) {
                Ok(t) => (to_value(&t), t.all_agree()),
                Err(e) => return argument_error(NAME, e.to_string()),
            }
        };
        Output::with_exit(NAME, value, if agree { 0 } else { 3 })
    })
}

fn verify(c: &Common, file: &Path) -> Output {
    const NAME: &str = "verify";
    let budget = c.budget_cols.unwrap_or(DEFAULT_COLUMN_BUDGET);
    let malformed = |m: String| Output::error(NAME, 1, json!({ "kind": "malformed", "message": m }));
    let failed = |kind: &str, m: String| {
        Output::error(NAME, 3, json!({ "kind": "verification", "object": kind, "message": m }))
    };
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return malformed(format!("cannot read {}: {e}", file.display())),
    };
    let v: Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return malformed(format!("malformed JSON: {e}")),
    };
    let ok = |kind: &str, detail: Value| Output::ok(NAME, json!({ "object": kind, "verified": true, "detail": detail }));
    let Some(command) = v.get("command").and_then(Value::as_str) else {
        return match Certificate::from_json_value(v) {
            Ok(cert) => match cert.verify(budget) {
                Ok(()) => ok("certificate", json!({ "zero": cert.is_zero(), "system": to_value(&cert.system) })),
                Err(e) => failed("certificate", e.to_string()),
            },
            Err(e @ CertificateFormatError::Value(_)) => failed("certificate", e.to_string()),
            Err(e) => malformed(e.to_string()),
        };
    };
    let Some(result) = v.get("result").cloned() else {
        return malformed("output has no result".into());
    };
    match command {
        "zero-test" => {
            let (Some(decision), Some(hash), Some(path)) = (
                result.get("decision").and_then(Value::as_str),
                result.get("certificate_sha256").and_then(Value::as_str),
                result.get("certificate_file").and_then(Value::as_str),
            ) else {
                return malformed("zero-test output without decision and certificate".into());
            };
            let Ok(cert_text) = fs::read_to_string(path) else {
                return failed(command, format!("certificate file {path} is missing"));
            };
            if nilcert::cache::sha256_hex(cert_text.as_bytes()) != hash {
                return failed(command, "certificate file does not match its hash".into());
            }
            let cert = match Certificate::from_json_str(&cert_text) {
                Ok(c) => c,
                Err(e) => return failed(command, e.to_string()),
            };
            if let Err(e) = cert.verify(budget) {
                return failed(command, e.to_string());
            }
            if (decision == "zero") != cert.is_zero() {
                return failed(command, format!("certificate does not support decision {decision}"));
            }
            ok(command, json!({ "decision": decision }))
        }
        "nildeg" => match serde_json::from_value::<NilpotencyReport>(result) {
            Ok(r) => match r.verify(budget) {
                Ok(()) => ok(command, to_value(&r.value)),
                Err(e) => failed(command, e),
            },
            Err(e) => malformed(e.to_string()),
        },
        "trace-decompose" => match result.get("decision").cloned().map(serde_json::from_value::<DecompDecision>) {
            Some(Ok(d)) => match d.verify(budget) {
                Ok(()) => ok(command, to_value(&d.decision)),
                Err(e) => failed(command, e),
            },
            Some(Err(e)) => malformed(e.to_string()),
            None => malformed("trace-decompose output without decision".into()),
        },
        "report" => {
            let theorem = result.get("theorem").and_then(Value::as_u64);
            let checked: Result<Result<Vec<NildegValue>, String>, serde_json::Error> = match theorem {
                Some(1) => serde_json::from_value::<Table<NilpotencyReport>>(result).map(|t| {
                    t.cells.iter().map(|c| c.detail.verify(budget).map(|()| c.computed)).collect()
                }),
                _ => serde_json::from_value::<Table<GeneratorDegreeReport>>(result).map(|t| {
                    t.cells.iter().map(|c| c.detail.verify(budget).map(|()| c.computed)).collect()
                }),
            };
            match checked {
                Ok(Ok(values)) => ok(command, to_value(&values)),
                Ok(Err(e)) => failed(command, e),
                Err(e) => malformed(e.to_string()),
            }
        }
        other => ok(other, json!("no certificates in this output")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..5"), Some((2, 5)));
        assert_eq!(parse_range("2..=5"), Some((2, 5)));
        assert_eq!(parse_range("3"), Some((3, 3)));
        assert_eq!(parse_range("2-4"), Some((2, 4)));
        assert_eq!(parse_range("5..2"), None);
        assert_eq!(parse_range("0..2"), None);
    }

    #[test]
    fn trace_inputs() {
        let chr = Characteristic::of(5);
        assert!(matches!(parse_trace_input("tr(x1^2 x2)", chr), Ok(TraceInput::Trace(_))));
        assert!(matches!(parse_trace_input(" s2(x1 x2)", chr), Ok(TraceInput::Sigma(2, _))));
        assert!(matches!(parse_trace_input("det(x1)", chr), Ok(TraceInput::Sigma(3, _))));
        assert!(matches!(parse_trace_input("x1 x2 - x2 x1", chr), Ok(TraceInput::Combination(_))));
        let Err(o) = parse_trace_input("tr(x1 ? x2)", chr) else { panic!() };
        assert_eq!(o.exit, 1);
        assert_eq!(o.value["error"]["position"], 6);
    }
}
