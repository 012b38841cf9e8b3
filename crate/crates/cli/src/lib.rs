//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed check or expectation, 2 usage, parse or
//! type error, 3 validation error in an input file.

pub mod demo;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use topos_core::forcing::{Binding, Forcer, Stage};
use topos_core::io::{self as tio, IoError};
use topos_core::iso::find_isomorphism;
use topos_core::lang::{interpret_formula, Context, LangError, SemanticEnvironment};
use topos_core::logic::omega;
use topos_core::presheaf::{global_families, is_inhabited_internally, Presheaf};
use topos_core::site::FinCat;
use topos_core::witness::{self, SearchBounds, SearchError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "topos", version, about = "Finite presheaf toposes and their internal logic")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Print the forcing derivation for eval commands.
    #[arg(long, global = true)]
    trace: bool,
    /// Exit 1 unless the reported fact is non-empty (a count above zero, true, found).
    #[arg(long, global = true, conflicts_with = "expect_empty")]
    expect_nonempty: bool,
    /// Exit 1 unless the reported fact is empty (zero, false, not found).
    #[arg(long, global = true)]
    expect_empty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load or export environments.
    #[command(subcommand)]
    Env(EnvCommand),
    /// Check a property of a sort or a function symbol.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Decide whether a stage forces a formula.
    Eval(EvalArgs),
    /// Decide whether a closed formula holds at every stage.
    EvalGlobal(EvalGlobalArgs),
    /// Look for an isomorphism between two sorts.
    Iso {
        #[arg(long)]
        env: String,
        a: String,
        b: String,
    },
    /// Print the subobject classifier of a site.
    Omega {
        #[arg(long)]
        site: String,
    },
    /// Brute-force searches over bounded presheaves.
    #[command(subcommand)]
    Search(SearchCommand),
    /// End-to-end demonstrations.
    #[command(subcommand)]
    Demo(DemoCommand),
}

#[derive(Subcommand, Debug)]
enum EnvCommand {
    /// Validate an environment and summarize it.
    Load { reference: String },
    /// Write a builtin (or any loadable environment) as JSON files.
    Export {
        reference: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// Count and list the global elements of a sort.
    GlobalElements(SymbolArgs),
    /// Whether a sort is internally inhabited.
    Inhabited(SymbolArgs),
    /// Whether a function symbol is an epimorphism.
    Epi(SymbolArgs),
    /// Whether a function symbol is a monomorphism.
    Mono(SymbolArgs),
}

#[derive(Args, Debug)]
struct SymbolArgs {
    #[arg(long)]
    env: String,
    symbol: String,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    env: String,
    /// Object of the site.
    #[arg(long)]
    stage: String,
    /// Variable binding `x:A=label`; repeat in context order.
    #[arg(long = "bind")]
    binds: Vec<String>,
    #[arg(long, conflicts_with = "formula")]
    file: Option<PathBuf>,
    formula: Option<String>,
}

#[derive(Args, Debug)]
struct EvalGlobalArgs {
    #[arg(long)]
    env: String,
    #[arg(long, conflicts_with = "formula")]
    file: Option<PathBuf>,
    formula: Option<String>,
}

#[derive(Subcommand, Debug)]
enum SearchCommand {
    /// Internally inhabited presheaves without global elements.
    InhabitedNoPoint(SearchArgs),
    /// Non-isomorphic pairs with equal (global count, inhabitedness).
    NonisoSameProfile(SearchArgs),
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long)]
    site: String,
    #[arg(long)]
    max_size: usize,
    /// Keep one presheaf per isomorphism class.
    #[arg(long)]
    prune: bool,
    /// Directory for the presheaf files of the results.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = witness::DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Subcommand, Debug)]
enum DemoCommand {
    /// The four independence claims.
    Independence {
        /// Environment with sorts A, B and maps f, g.
        #[arg(long, default_value = "set01")]
        set: String,
        /// Environment with the sort F2.
        #[arg(long, default_value = "crown_double_cover")]
        cover: String,
    },
}

/// A failure that ends the command with a specific exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Failure {
        Failure {
            code: if e.is_validation() { EXIT_INVALID } else { EXIT_USAGE },
            message: e.to_string(),
        }
    }
}

impl From<LangError> for Failure {
    fn from(e: LangError) -> Failure {
        Failure::usage(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure {
            code: EXIT_FAILED,
            message: e.to_string(),
        }
    }
}

struct Session<'o> {
    json: bool,
    trace: bool,
    expect: Option<bool>,
    out: &'o mut dyn Write,
}

impl Session<'_> {
    fn emit(&mut self, human: &str, machine: Value) -> Result<(), Failure> {
        if self.json {
            writeln!(self.out, "{}", serde_json::to_string_pretty(&machine).expect("json"))?;
        } else {
            write!(self.out, "{human}")?;
            if !human.is_empty() && !human.ends_with('\n') {
                writeln!(self.out)?;
            }
        }
        Ok(())
    }

    /// Exit code for a fact under the `--expect-*` flags.
    fn verdict(&self, nonempty: bool) -> i32 {
        match self.expect {
            Some(wanted) if wanted != nonempty => EXIT_FAILED,
            _ => EXIT_OK,
        }
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let expect = if cli.expect_nonempty {
        Some(true)
    } else if cli.expect_empty {
        Some(false)
    } else {
        None
    };
    let mut session = Session {
        json: cli.json,
        trace: cli.trace,
        expect,
        out,
    };
    match dispatch(&mut session, cli.command) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(s: &mut Session, command: Command) -> Result<i32, Failure> {
    match command {
        Command::Env(EnvCommand::Load { reference }) => env_load(s, &reference),
        Command::Env(EnvCommand::Export { reference, out }) => env_export(s, &reference, &out),
        Command::Check(c) => check(s, c),
        Command::Eval(args) => eval(s, args),
        Command::EvalGlobal(args) => eval_global(s, args),
        Command::Iso { env, a, b } => iso(s, &env, &a, &b),
        Command::Omega { site } => omega_cmd(s, &site),
        Command::Search(c) => search(s, c),
        Command::Demo(DemoCommand::Independence { set, cover }) => demo_cmd(s, &set, &cover),
    }
}

fn load_env(reference: &str) -> Result<SemanticEnvironment, Failure> {
    Ok(tio::load_env(reference)?)
}

fn sort<'e>(env: &'e SemanticEnvironment, name: &str) -> Result<&'e Presheaf, Failure> {
    env.sort(name)
        .map_err(|_| Failure::usage(format!("no sort named {name}")))
}

fn stage_summary(p: &Presheaf) -> Value {
    let site = p.site();
    site.objects()
        .map(|c| (site.object_name(c).to_string(), json!(p.labels(c))))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

fn env_load(s: &mut Session, reference: &str) -> Result<i32, Failure> {
    let env = load_env(reference)?;
    let site = env.site();
    let mut human = format!(
        "site: {} objects, {} morphisms\n",
        site.object_count(),
        site.morphism_count()
    );
    let mut sorts = serde_json::Map::new();
    for (name, p) in env.sorts() {
        human += &format!("sort {name}: stage sizes {:?}\n", p.stage_sizes());
        sorts.insert(name.clone(), stage_summary(p));
    }
    let sig = env.signature();
    for (name, fs) in sig.functions() {
        human += &format!("function {name}: ({}) -> {}\n", fs.args.join(", "), fs.result);
    }
    for (name, args) in sig.relations() {
        human += &format!("relation {name}({})\n", args.join(", "));
    }
    let functions: serde_json::Map<String, Value> = sig
        .functions()
        .iter()
        .map(|(n, fs)| (n.clone(), json!({"args": fs.args, "result": fs.result})))
        .collect();
    let relations: serde_json::Map<String, Value> = sig
        .relations()
        .iter()
        .map(|(n, a)| (n.clone(), json!({"args": a})))
        .collect();
    s.emit(
        &human,
        json!({
            "objects": site.objects().map(|c| site.object_name(c)).collect::<Vec<_>>(),
            "sorts": sorts,
            "functions": functions,
            "relations": relations,
        }),
    )?;
    Ok(EXIT_OK)
}

fn env_export(s: &mut Session, reference: &str, dir: &Path) -> Result<i32, Failure> {
    let env = load_env(reference)?;
    let written = tio::export_env(&env, dir)?;
    let paths: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    s.emit(&paths.join("\n"), json!({ "written": paths }))?;
    Ok(EXIT_OK)
}

fn check(s: &mut Session, command: CheckCommand) -> Result<i32, Failure> {
    match command {
        CheckCommand::GlobalElements(a) => {
            let env = load_env(&a.env)?;
            let p = sort(&env, &a.symbol)?;
            let site = p.site();
            let families = global_families(p);
            let rendered: Vec<serde_json::Map<String, Value>> = families
                .iter()
                .map(|fam| {
                    site.objects()
                        .map(|c| (site.object_name(c).to_string(), json!(p.label(c, fam[c.0]))))
                        .collect()
                })
                .collect();
            let mut human = format!("{}\n", families.len());
            for fam in &rendered {
                let parts: Vec<String> = fam
                    .iter()
                    .map(|(o, l)| format!("{o}={}", l.as_str().unwrap_or_default()))
                    .collect();
                human += &format!("  {}\n", parts.join(" "));
            }
            s.emit(
                &human,
                json!({"sort": a.symbol, "count": families.len(), "elements": rendered}),
            )?;
            Ok(s.verdict(!families.is_empty()))
        }
        CheckCommand::Inhabited(a) => {
            let env = load_env(&a.env)?;
            let value = is_inhabited_internally(sort(&env, &a.symbol)?);
            s.emit(&value.to_string(), json!({"sort": a.symbol, "inhabited": value}))?;
            Ok(s.verdict(value))
        }
        CheckCommand::Epi(a) => map_property(s, &a, "epi"),
        CheckCommand::Mono(a) => map_property(s, &a, "mono"),
    }
}

fn map_property(s: &mut Session, a: &SymbolArgs, property: &str) -> Result<i32, Failure> {
    let env = load_env(&a.env)?;
    let nat = env
        .function(&a.symbol)
        .map_err(|_| Failure::usage(format!("no function named {}", a.symbol)))?;
    let value = if property == "epi" { nat.is_epi() } else { nat.is_mono() };
    s.emit(&value.to_string(), json!({"function": a.symbol, property: value}))?;
    Ok(s.verdict(value))
}

fn formula_text(file: &Option<PathBuf>, formula: &Option<String>) -> Result<String, Failure> {
    match (file, formula) {
        (Some(path), _) => fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display()))),
        (None, Some(text)) => Ok(text.clone()),
        (None, None) => Err(Failure::usage("a formula or --file is required")),
    }
}

fn parse_binding(text: &str) -> Result<(String, String, String), Failure> {
    let bad = || Failure::usage(format!("binding {text:?} is not of the form x:A=label"));
    let (lhs, label) = text.split_once('=').ok_or_else(bad)?;
    let (var, sort) = lhs.split_once(':').ok_or_else(bad)?;
    let (var, sort) = (var.trim(), sort.trim());
    if var.is_empty() || sort.is_empty() {
        return Err(bad());
    }
    Ok((var.to_string(), sort.to_string(), label.trim().to_string()))
}

fn eval(s: &mut Session, args: EvalArgs) -> Result<i32, Failure> {
    let env = load_env(&args.env)?;
    let c = env
        .site()
        .object(&args.stage)
        .ok_or_else(|| Failure::usage(format!("no object named {}", args.stage)))?;
    let mut ctx = Context::new();
    let mut bindings = Vec::new();
    for b in &args.binds {
        let (var, sort_name, label) = parse_binding(b)?;
        let p = sort(&env, &sort_name)?;
        let element = p.element(c, &label).ok_or_else(|| {
            Failure::usage(format!("{label} is not an element of {sort_name} at {}", args.stage))
        })?;
        ctx = ctx.extended(&var, &sort_name);
        bindings.push(Binding {
            var,
            sort: sort_name,
            element,
        });
    }
    let text = formula_text(&args.file, &args.formula)?;
    let typed = env.formula(&text, &ctx)?;
    let stage = Stage { object: c, bindings };
    let forcer = if s.trace { Forcer::with_trace(&env) } else { Forcer::new(&env) };
    let value = forcer
        .forces(&stage, &typed)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let trace = forcer.take_trace();
    let mut human = format!("{value}\n");
    for line in &trace {
        human += &format!("{line}\n");
    }
    s.emit(
        &human,
        json!({"stage": args.stage, "formula": text.trim(), "forces": value, "trace": trace}),
    )?;
    Ok(s.verdict(value))
}

fn eval_global(s: &mut Session, args: EvalGlobalArgs) -> Result<i32, Failure> {
    let env = load_env(&args.env)?;
    let text = formula_text(&args.file, &args.formula)?;
    let typed = env.formula(&text, &Context::new())?;
    let mut trace = Vec::new();
    let mut per_stage = serde_json::Map::new();
    let mut value = true;
    for c in env.site().objects() {
        let forcer = if s.trace { Forcer::with_trace(&env) } else { Forcer::new(&env) };
        let forced = forcer
            .forces(&Stage::closed(c), &typed)
            .map_err(|e| Failure::usage(e.to_string()))?;
        trace.extend(forcer.take_trace());
        per_stage.insert(env.site().object_name(c).to_string(), json!(forced));
        value &= forced;
    }
    let sub_top = interpret_formula(&env, &Context::new(), &typed)?.is_top();
    if sub_top != value {
        return Err(Failure {
            code: EXIT_FAILED,
            message: "forcing and subobject semantics disagree".into(),
        });
    }
    let mut human = format!("{value}\n");
    for line in &trace {
        human += &format!("{line}\n");
    }
    s.emit(
        &human,
        json!({"formula": text.trim(), "holds": value, "stages": per_stage, "trace": trace}),
    )?;
    Ok(s.verdict(value))
}

fn iso(s: &mut Session, env_ref: &str, a: &str, b: &str) -> Result<i32, Failure> {
    let env = load_env(env_ref)?;
    let (pa, pb) = (sort(&env, a)?, sort(&env, b)?);
    let found = find_isomorphism(pa, pb);
    let human = match &found {
        Some(nat) => {
            let site = pa.site();
            let mut h = format!("{a} and {b} are isomorphic\n");
            for c in site.objects() {
                let pairs: Vec<String> = (0..pa.stage_size(c))
                    .map(|x| format!("{}->{}", pa.label(c, x), pb.label(c, nat.apply(c, x))))
                    .collect();
                h += &format!("  {}: {}\n", site.object_name(c), pairs.join(" "));
            }
            h
        }
        None => format!("{a} and {b} are not isomorphic\n"),
    };
    let components = found.as_ref().map(|n| n.to_raw().components);
    s.emit(
        &human,
        json!({"a": a, "b": b, "isomorphic": found.is_some(), "components": components}),
    )?;
    Ok(s.verdict(found.is_some()))
}

fn omega_cmd(s: &mut Session, site_ref: &str) -> Result<i32, Failure> {
    let site = tio::load_site(site_ref)?;
    let om = omega(&site);
    let mut human = String::new();
    let mut stages = serde_json::Map::new();
    for c in site.objects() {
        let labels = om.labels(c);
        human += &format!("{} {} {}\n", site.object_name(c), labels.len(), labels.join(" "));
        stages.insert(
            site.object_name(c).to_string(),
            json!({"count": labels.len(), "sieves": labels}),
        );
    }
    s.emit(&human, json!({ "omega": stages }))?;
    Ok(EXIT_OK)
}

/// Site reference usable from files written into `dir`.
fn site_ref_for(dir: &Path, reference: &str, site: &FinCat) -> Result<String, Failure> {
    if topos_core::site::builtin_site(reference).is_some() {
        return Ok(reference.to_string());
    }
    tio::write_site(&dir.join("site.json"), site)?;
    Ok("site.json".into())
}

fn prepare_out(out: &Option<PathBuf>, reference: &str, site: &FinCat) -> Result<Option<(PathBuf, String)>, Failure> {
    let Some(dir) = out else { return Ok(None) };
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
    let site_ref = site_ref_for(dir, reference, site)?;
    Ok(Some((dir.clone(), site_ref)))
}

fn search(s: &mut Session, command: SearchCommand) -> Result<i32, Failure> {
    let (args, pairs) = match command {
        SearchCommand::InhabitedNoPoint(a) => (a, false),
        SearchCommand::NonisoSameProfile(a) => (a, true),
    };
    let site: Arc<FinCat> = tio::load_site(&args.site)?;
    let bounds = SearchBounds::new(site.clone(), args.max_size)
        .pruned(args.prune)
        .with_budget(args.budget);
    let target = prepare_out(&args.out, &args.site, &site)?;
    let budget_failure = |e: SearchError| Failure {
        code: EXIT_FAILED,
        message: e.to_string(),
    };
    let mut human = String::new();
    let mut rows = Vec::new();
    let write = |p: &Presheaf, name: String| -> Result<Option<String>, Failure> {
        match &target {
            Some((dir, site_ref)) => {
                tio::write_presheaf(&dir.join(&name), p, site_ref)?;
                Ok(Some(name))
            }
            None => Ok(None),
        }
    };
    let count = if pairs {
        let found = witness::search_noniso_same_profile(&bounds).map_err(budget_failure)?;
        human += &format!("pair  sizes(a)  sizes(b)  globals  inhabited  [stages {}]\n", object_names(&site));
        for (i, (a, b)) in found.iter().enumerate() {
            let (g, inh) = witness::profile(a);
            human += &format!(
                "{i:>4}  {:?}  {:?}  {g}  {inh}\n",
                a.stage_sizes(),
                b.stage_sizes()
            );
            let fa = write(a, format!("pair-{i:04}-a.presheaf.json"))?;
            let fb = write(b, format!("pair-{i:04}-b.presheaf.json"))?;
            rows.push(json!({
                "a": {"sets": stage_summary(a), "file": fa},
                "b": {"sets": stage_summary(b), "file": fb},
                "global_elements": g,
                "inhabited": inh,
            }));
        }
        found.len()
    } else {
        let found = witness::search_inhabited_no_point(&bounds).map_err(budget_failure)?;
        human += &format!("   #  stage sizes ({})\n", object_names(&site));
        for (i, p) in found.iter().enumerate() {
            human += &format!("{i:>4}  {:?}\n", p.stage_sizes());
            let file = write(p, format!("witness-{i:04}.presheaf.json"))?;
            rows.push(json!({"sets": stage_summary(p), "file": file}));
        }
        found.len()
    };
    human += &format!("{count} result(s)\n");
    s.emit(&human, json!({"count": count, "results": rows}))?;
    Ok(s.verdict(count > 0))
}

fn object_names(site: &FinCat) -> String {
    site.objects().map(|c| site.object_name(c)).collect::<Vec<_>>().join(", ")
}

fn demo_cmd(s: &mut Session, set: &str, cover: &str) -> Result<i32, Failure> {
    let set_env = load_env(set)?;
    let cover_env = load_env(cover)?;
    let report = demo::demo_independence(&set_env, set, &cover_env, cover).map_err(|e| Failure::usage(e.0))?;
    s.emit(
        &demo::render(&report),
        serde_json::to_value(&report).expect("serializable"),
    )?;
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}
