//! The acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS or FAIL line, even when another fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use serde_json::Value;
use topos_core::forcing::{holds_globally, Forcer, Stage};
use topos_core::gallery::{all_builtins, builtin};
use topos_core::iso::{find_isomorphism, hom};
use topos_core::lang::{
    exhaustive_corpus, interpret_formula, parse, print, random_formula, tuple_object, typecheck, Context,
    CorpusLimits, LangError, SemanticEnvironment, Signature, Span,
};
use topos_core::logic::{char_map, exists_along, forall_along, omega, pullback_sub, sub_from_char, subobjects, Subobject};
use topos_core::presheaf::{coproduct, global_elements, is_inhabited_internally, terminal, NatTrans, Presheaf};
use topos_core::site::{crown, sierpinski, terminal_category, FinCat};
use topos_core::witness::{brute_force_global_count, random_presheaf};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure!(t < limit, "took {t:.2?}, limit {limit:?}");
    Ok(t)
}

fn sites() -> Vec<Arc<FinCat>> {
    vec![Arc::new(terminal_category()), Arc::new(sierpinski()), Arc::new(crown())]
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("topos").chain(args.iter().copied());
    let code = topos_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn inhabited_by_forcing(p: &Presheaf) -> bool {
    let mut sig = Signature::new();
    sig.add_sort("X").unwrap();
    let sorts = [("X".to_string(), p.clone())].into_iter().collect();
    let env = SemanticEnvironment::new(p.site().clone(), sig, sorts, Default::default(), Default::default()).unwrap();
    let f = env.formula("exists x:X. true", &Context::new()).unwrap();
    holds_globally(&f, &env).unwrap()
}

/// Largest subobject inside a random mask.
fn random_sub(a: &Presheaf, rng: &mut StdRng) -> Subobject {
    let site = a.site();
    let mut parts: Vec<Vec<bool>> = site
        .objects()
        .map(|c| (0..a.stage_size(c)).map(|_| rng.random_bool(0.6)).collect())
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for f in site.morphisms() {
            let (c, d) = (site.src(f), site.tgt(f));
            for x in 0..a.stage_size(d) {
                if parts[d.0][x] && !parts[c.0][a.act(f, x)] {
                    parts[d.0][x] = false;
                    changed = true;
                }
            }
        }
    }
    Subobject::new(a.clone(), parts).unwrap()
}

fn lemma() -> Outcome {
    let start = Instant::now();
    let env = builtin("crown_double_cover").unwrap();
    let f2 = env.sort("F2").unwrap();
    ensure!(is_inhabited_internally(f2), "F2 is not inhabited");
    ensure!(global_elements(f2).is_empty(), "F2 has global elements");
    ensure!(brute_force_global_count(f2) == 0, "brute force finds global elements");
    let (code, out) = cli(&["eval-global", "--env", "crown_double_cover", "exists x:F2. true"]);
    ensure!(code == 0 && out.trim() == "true", "eval-global printed {out:?} with code {code}");
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("inhabited, 0 global elements, eval-global true ({t:.2?})"))
}

fn theorem_meaning() -> Outcome {
    let env = builtin("set01").unwrap();
    let (a, b) = (env.sort("A").unwrap(), env.sort("B").unwrap());
    let (f, g) = (env.function("f").unwrap(), env.function("g").unwrap());
    let (na, nb) = (global_elements(a).len(), global_elements(b).len());
    ensure!((na, nb) == (2, 2), "|Hom(1,A)|, |Hom(1,B)| = {na}, {nb}");
    ensure!(
        (brute_force_global_count(a), brute_force_global_count(b)) == (2, 2),
        "brute-force counts differ"
    );
    for p in [a, b] {
        ensure!(
            is_inhabited_internally(p) && inhabited_by_forcing(p),
            "inhabitedness disagrees"
        );
    }
    ensure!(f.src() == g.src() && f.tgt() == g.tgt(), "f and g have different types");
    ensure!(f != g, "[[f]] = [[g]]");
    Ok("names 2 = 2, both inhabited, [[f]] != [[g]]".into())
}

fn theorem_names() -> Outcome {
    let env = builtin("crown_double_cover").unwrap();
    let f2 = env.sort("F2").unwrap();
    let (plus, _, _) = coproduct(f2, &terminal(f2.site())).unwrap();
    let counts = (global_elements(f2).len(), global_elements(&plus).len());
    ensure!(counts == (0, 1), "global elements (F2, F2+1) = {counts:?}");
    let brute = (brute_force_global_count(f2), brute_force_global_count(&plus));
    ensure!(brute == (0, 1), "brute force gives {brute:?}");
    Ok("|Hom(1,F2)| = 0, |Hom(1,F2+1)| = 1".into())
}

fn theorem_objects() -> Outcome {
    let cover = builtin("crown_double_cover").unwrap();
    let f2 = cover.sort("F2").unwrap();
    let (double, _, _) = coproduct(f2, f2).unwrap();
    let constant2 = builtin("crown_constant2").unwrap().sort("C2").unwrap().clone();
    ensure!(find_isomorphism(f2, &double).is_none(), "F2 = F2+F2");
    ensure!(find_isomorphism(f2, &constant2).is_none(), "F2 = constant2");
    let all = [f2, &double, &constant2];
    ensure!(all.iter().all(|p| is_inhabited_internally(p)), "not all inhabited");
    let counts: Vec<usize> = all.iter().map(|p| global_elements(p).len()).collect();
    ensure!(counts == [0, 0, 2], "global counts {counts:?}");
    Ok("no isomorphisms, all inhabited, counts (0, 0, 2)".into())
}

/// Number of stagewise functions `a -> b`, the space a brute-force hom search walks.
fn candidate_maps(a: &Presheaf, b: &Presheaf) -> f64 {
    a.site()
        .objects()
        .map(|c| (b.stage_size(c) as f64).powi(a.stage_size(c) as i32))
        .product()
}

/// Every sort, every argument product of a symbol, and each product of two
/// sorts small enough for the brute-force count.
fn objects_of(env: &SemanticEnvironment) -> Vec<(String, Presheaf)> {
    let sig = env.signature();
    let om = omega(env.site());
    let mut out: Vec<(String, Presheaf)> = sig.sorts().iter().map(|s| (s.clone(), env.sort(s).unwrap().clone())).collect();
    let mut tuples: Vec<Vec<String>> = sig.functions().values().map(|f| f.args.clone()).collect();
    tuples.extend(sig.relations().values().cloned());
    for a in sig.sorts() {
        for b in sig.sorts() {
            tuples.push(vec![a.clone(), b.clone()]);
        }
    }
    for args in tuples {
        if args.len() > 1 {
            let name = args.join(" x ");
            let symbol = sig.functions().values().any(|f| f.args == args) || sig.relations().values().any(|r| *r == args);
            let p = tuple_object(env, &args).unwrap();
            if out.iter().all(|(n, _)| *n != name) && (symbol || candidate_maps(&p, &om) <= 1e5) {
                out.push((name, p));
            }
        }
    }
    out
}

fn classification() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for spec in all_builtins() {
        let om = omega(spec.env.site());
        for (name, a) in objects_of(&spec.env) {
            let subs = subobjects(&a);
            let maps = hom(&a, &om);
            ensure!(
                subs.len() == maps.len(),
                "{}: |Sub({name})| = {} but |Hom({name}, Omega)| = {}",
                spec.name,
                subs.len(),
                maps.len()
            );
            for s in &subs {
                ensure!(sub_from_char(&char_map(s)).unwrap() == *s, "{}: round trip fails on {name}", spec.name);
            }
            for chi in &maps {
                ensure!(char_map(&sub_from_char(chi).unwrap()) == *chi, "{}: map round trip fails on {name}", spec.name);
            }
            checked += 1;
        }
    }
    let t = within(start, Duration::from_secs(10))?;
    Ok(format!("{checked} objects ({t:.2?})"))
}

fn random_map(rng: &mut StdRng, site: &Arc<FinCat>) -> NatTrans {
    let max = if site.object_count() > 2 { 2 } else { 3 };
    loop {
        let a = random_presheaf(site, max, rng);
        let b = random_presheaf(site, max, rng);
        if let Some(alpha) = hom(&a, &b).choose(rng) {
            return alpha.clone();
        }
    }
}

fn adjunctions() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xad70);
    let sites = sites();
    let triples = 240;
    for i in 0..triples {
        let alpha = random_map(&mut rng, &sites[i % sites.len()]);
        let s = random_sub(alpha.src(), &mut rng);
        let t = random_sub(alpha.tgt(), &mut rng);
        let pb_t = pullback_sub(&alpha, &t).unwrap();
        let ex = exists_along(&alpha, &s).unwrap();
        let all = forall_along(&alpha, &s).unwrap();
        ensure!(ex.le(&t) == s.le(&pb_t), "exists -| pullback fails on triple {i}");
        ensure!(pb_t.le(&s) == t.le(&all), "pullback -| forall fails on triple {i}");
        let frob = exists_along(&alpha, &s.meet(&pb_t).unwrap()).unwrap();
        ensure!(frob == ex.meet(&t).unwrap(), "Frobenius fails on triple {i}");
    }
    Ok(format!("{triples} triples, 0 violations"))
}

/// Forcing at every stage against membership in the interpreted subobject.
fn agrees_closed(env: &SemanticEnvironment, forcer: &Forcer, text: &topos_core::lang::Formula) -> Result<(), String> {
    let ctx = Context::new();
    let typed = typecheck(text, env.signature(), &ctx).map_err(|e| e.to_string())?;
    let sub = interpret_formula(env, &ctx, &typed).map_err(|e| e.to_string())?;
    for c in env.site().objects() {
        let forced = forcer.forces(&Stage::closed(c), &typed).map_err(|e| e.to_string())?;
        ensure!(forced == sub.contains(c, 0), "{text} at {}", env.site().object_name(c));
    }
    Ok(())
}

fn cross_semantics() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5e3a);
    let cap = 1_000_000;
    let mut total = 0;
    for spec in all_builtins() {
        let env = &spec.env;
        let forcer = Forcer::new(env);
        let corpus = exhaustive_corpus(env.signature(), &Context::new(), 2, CorpusLimits { max_formulas: cap });
        ensure!(corpus.len() < cap, "{}: corpus truncated", spec.name);
        for f in corpus.iter() {
            agrees_closed(env, &forcer, f).map_err(|e| format!("{}: {e}", spec.name))?;
        }
        total += corpus.len();
        for _ in 0..500 {
            let f = random_formula(env.signature(), &Context::new(), 3, &mut rng);
            agrees_closed(env, &forcer, &f).map_err(|e| format!("{}: {e}", spec.name))?;
        }
        total += 500;
    }
    Ok(format!("{total} formulas, 100% agreement"))
}

fn epi_iff_inhabited() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xe91);
    let mut inhabited = 0;
    for site in sites() {
        let max = if site.object_count() > 2 { 2 } else { 3 };
        for _ in 0..60 {
            let p = random_presheaf(&site, max, &mut rng);
            let epi = NatTrans::to_terminal(&p).is_epi();
            // independent oracle: every stage nonempty
            let stages = site.objects().all(|c| p.stage_size(c) > 0);
            ensure!(
                epi == is_inhabited_internally(&p) && epi == stages && epi == inhabited_by_forcing(&p),
                "violation on {:?}",
                p.stage_sizes()
            );
            inhabited += usize::from(epi);
        }
    }
    Ok(format!("180 presheaves ({inhabited} inhabited), 0 violations"))
}

fn witness_search() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hits");
    let (code, text) = cli(&[
        "--json", "search", "inhabited-no-point", "--site", "crown", "--max-size", "2", "--out",
        out.to_str().unwrap(),
    ]);
    ensure!(code == 0, "search exited {code}");
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let results = v["results"].as_array().ok_or("no results array")?;
    ensure!(!results.is_empty(), "no witnesses on crown");
    for r in results {
        let file = out.join(r["file"].as_str().ok_or("result without file")?);
        let p = topos_core::io::load_presheaf_file(&file).map_err(|e| e.to_string())?;
        ensure!(brute_force_global_count(&p) == 0, "{} has a global element", file.display());
        ensure!(
            site_stages_nonempty(&p) && NatTrans::to_terminal(&p).is_epi(),
            "{} is not inhabited",
            file.display()
        );
    }
    let (code, text) = cli(&["--json", "search", "inhabited-no-point", "--site", "terminal", "--max-size", "3"]);
    ensure!(code == 0, "terminal search exited {code}");
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    ensure!(v["results"].as_array().is_some_and(|r| r.is_empty()), "witnesses on the terminal site");
    let t = within(start, Duration::from_secs(60))?;
    Ok(format!("{} witnesses on crown, none on terminal ({t:.2?})", results.len()))
}

fn site_stages_nonempty(p: &Presheaf) -> bool {
    p.site().objects().all(|c| p.stage_size(c) > 0)
}

fn parser() -> Outcome {
    let mut count = 0;
    let mut round_trip = |f: &topos_core::lang::Formula| -> Result<(), String> {
        let text = print(f);
        let back = parse(&text).map_err(|e| format!("{text}: {e}"))?;
        ensure!(back == *f, "{text} reparses differently");
        count += 1;
        Ok(())
    };
    let mut rng = StdRng::seed_from_u64(0x9a75);
    for spec in all_builtins() {
        let sig = spec.env.signature();
        let corpus = exhaustive_corpus(sig, &Context::new(), 2, CorpusLimits { max_formulas: usize::MAX });
        corpus.iter().try_for_each(&mut round_trip)?;
        let first = sig.sorts()[0].clone();
        let ctx = Context::from_pairs(&[("y", first.as_str())]);
        for _ in 0..500 {
            round_trip(&random_formula(sig, &ctx, 4, &mut rng))?;
        }
    }

    match parse("exists x:A") {
        Err(LangError::Syntax { line: 1, column: 11, span, .. }) if span == Span::new(10, 10) => {}
        other => return Err(format!("missing body: {other:?}")),
    }
    let env = builtin("set01").unwrap();
    let sig = env.signature();
    let check = |text: &str, ctx: &[(&str, &str)]| {
        typecheck(&parse(text).unwrap(), sig, &Context::from_pairs(ctx)).unwrap_err()
    };
    let cases = [
        (
            check("f(x) = f(x)", &[("x", "B")]),
            LangError::SortMismatch { expected: "A".into(), found: "B".into(), span: Span::new(2, 3) },
        ),
        (
            check("x = y", &[("x", "A"), ("y", "B")]),
            LangError::SortMismatch { expected: "A".into(), found: "B".into(), span: Span::new(4, 5) },
        ),
        (
            check("P(z)", &[]),
            LangError::UnboundVariable { name: "z".into(), span: Span::new(2, 3) },
        ),
        (
            check("P(x, x)", &[("x", "A")]),
            LangError::ArityMismatch { symbol: "P".into(), expected: 1, found: 2, span: Span::new(0, 7) },
        ),
    ];
    for (got, want) in cases {
        ensure!(got == want, "expected {want:?}, got {got:?}");
    }
    Ok(format!("{count} round trips, 5 error cases"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 lemma on the double cover", lemma),
        ("2 meanings differ, names agree", theorem_meaning),
        ("3 adding a point", theorem_names),
        ("4 non-isomorphic objects", theorem_objects),
        ("5 classification", classification),
        ("6 adjunctions and Frobenius", adjunctions),
        ("7 cross-semantics oracle", cross_semantics),
        ("8 epi iff inhabited", epi_iff_inhabited),
        ("9 witness search", witness_search),
        ("10 parser", parser),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("{} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
