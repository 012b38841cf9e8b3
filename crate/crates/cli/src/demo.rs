//! The independence demonstration: four claims, each a handful of checked
//! facts placed at one of the four semantic levels.

use std::fmt::Write as _;

use serde::Serialize;
use topos_core::forcing::holds_globally;
use topos_core::iso::find_isomorphism;
use topos_core::lang::{interpret_formula, Context, SemanticEnvironment};
use topos_core::presheaf::{coproduct, global_elements, is_inhabited_internally, terminal, Presheaf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Meaning,
    Name,
    Object,
    Existence,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Meaning, Level::Name, Level::Object, Level::Existence];

    fn row(self) -> &'static str {
        match self {
            Level::Meaning => "meaning (A -> B)",
            Level::Name => "name (1 -> A)",
            Level::Object => "object (A)",
            Level::Existence => "existence (exists)",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Fact {
    pub level: Level,
    pub name: String,
    pub value: String,
    pub expected: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub label: String,
    pub environment: String,
    pub facts: Vec<Fact>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub claims: Vec<Claim>,
    pub pass: bool,
}

struct ClaimBuilder {
    claim: Claim,
}

impl ClaimBuilder {
    fn new(label: &str, environment: &str) -> ClaimBuilder {
        ClaimBuilder {
            claim: Claim {
                label: label.into(),
                environment: environment.into(),
                facts: Vec::new(),
                pass: true,
            },
        }
    }

    fn fact(&mut self, level: Level, name: &str, value: impl ToString, expected: &str, holds: bool) -> &mut Self {
        self.claim.facts.push(Fact {
            level,
            name: name.into(),
            value: value.to_string(),
            expected: expected.into(),
            holds,
        });
        self
    }

    fn count(&mut self, level: Level, name: &str, value: usize, expected: usize) -> &mut Self {
        self.fact(level, name, value, &expected.to_string(), value == expected)
    }

    fn flag(&mut self, level: Level, name: &str, value: bool, expected: bool) -> &mut Self {
        self.fact(level, name, value, &expected.to_string(), value == expected)
    }

    fn finish(&mut self) -> Claim {
        let mut c = self.claim.clone();
        c.pass = c.facts.iter().all(|f| f.holds);
        c
    }
}

/// Problems with the environments handed to the demo.
#[derive(Debug)]
pub struct DemoSetupError(pub String);

fn sort<'e>(env: &'e SemanticEnvironment, name: &str, which: &str) -> Result<&'e Presheaf, DemoSetupError> {
    env.sort(name)
        .map_err(|_| DemoSetupError(format!("the {which} environment has no sort {name}")))
}

/// Runs the four claims against a finite-set environment (sorts `A`, `B`,
/// maps `f`, `g`) and a cover environment (sort `F2`).
pub fn demo_independence(
    set_env: &SemanticEnvironment,
    set_name: &str,
    cover_env: &SemanticEnvironment,
    cover_name: &str,
) -> Result<Report, DemoSetupError> {
    let a = sort(set_env, "A", "set")?;
    let b = sort(set_env, "B", "set")?;
    let f = set_env
        .function("f")
        .map_err(|_| DemoSetupError("the set environment has no map f".into()))?;
    let g = set_env
        .function("g")
        .map_err(|_| DemoSetupError("the set environment has no map g".into()))?;
    let f2 = sort(cover_env, "F2", "cover")?;
    let site = cover_env.site();

    let claim1 = ClaimBuilder::new("(1) same objects, names and existence; different meanings", set_name)
        .fact(
            Level::Meaning,
            "[[f]] vs [[g]]",
            if f == g { "equal" } else { "differ" },
            "differ",
            f != g,
        )
        .count(Level::Name, "|Hom(1,A)|", global_elements(a).len(), 2)
        .count(Level::Name, "|Hom(1,B)|", global_elements(b).len(), 2)
        .flag(
            Level::Object,
            "f, g share domain and codomain",
            f.src() == g.src() && f.tgt() == g.tgt(),
            true,
        )
        .flag(Level::Existence, "A inhabited", is_inhabited_internally(a), true)
        .flag(Level::Existence, "B inhabited", is_inhabited_internally(b), true)
        .finish();

    let (plus_one, _, _) = coproduct(f2, &terminal(site)).expect("same site");
    let n_plus = global_elements(&plus_one).len();
    let claim2 = ClaimBuilder::new("(2) adding a point changes names but not existence", cover_name)
        .count(Level::Name, "|Hom(1,F2)|", global_elements(f2).len(), 0)
        .fact(Level::Name, "|Hom(1,F2+1)|", n_plus, "> 0", n_plus > 0)
        .flag(Level::Existence, "F2 inhabited", is_inhabited_internally(f2), true)
        .flag(Level::Existence, "F2+1 inhabited", is_inhabited_internally(&plus_one), true)
        .finish();

    let exists = cover_env
        .formula("exists x:F2. true", &Context::new())
        .expect("F2 is declared");
    let forced = holds_globally(&exists, cover_env).expect("closed formula");
    let sub = interpret_formula(cover_env, &Context::new(), &exists)
        .map_err(|e| DemoSetupError(e.to_string()))?
        .is_top();
    let claim3 = ClaimBuilder::new("(3) internally inhabited with no global name", cover_name)
        .count(Level::Name, "|Hom(1,F2)|", global_elements(f2).len(), 0)
        .flag(Level::Existence, "F2 -> 1 epi", is_inhabited_internally(f2), true)
        .flag(Level::Existence, "exists x:F2. true (forcing)", forced, true)
        .flag(Level::Existence, "exists x:F2. true (subobjects)", sub, true)
        .finish();

    let (double, _, _) = coproduct(f2, f2).expect("same site");
    let iso = find_isomorphism(f2, &double).is_some();
    let (n1, n2) = (global_elements(f2).len(), global_elements(&double).len());
    let claim4 = ClaimBuilder::new("(4) equal name profiles, non-isomorphic objects", cover_name)
        .fact(
            Level::Object,
            "F2 vs F2+F2",
            if iso { "isomorphic" } else { "non-isomorphic" },
            "non-isomorphic",
            !iso,
        )
        .fact(Level::Name, "|Hom(1,F2)| = |Hom(1,F2+F2)|", format!("{n1} = {n2}"), "equal", n1 == n2)
        .flag(
            Level::Existence,
            "both inhabited",
            is_inhabited_internally(f2) && is_inhabited_internally(&double),
            true,
        )
        .finish();

    let claims = vec![claim1, claim2, claim3, claim4];
    let pass = claims.iter().all(|c| c.pass);
    Ok(Report { claims, pass })
}

/// The report as a table with one row per level and one column per claim.
pub fn render(report: &Report) -> String {
    let headers: Vec<String> = report
        .claims
        .iter()
        .map(|c| c.label.split_whitespace().next().unwrap_or("").to_string())
        .collect();
    let cell = |claim: &Claim, level: Level| -> String {
        let parts: Vec<String> = claim
            .facts
            .iter()
            .filter(|f| f.level == level)
            .map(|f| format!("{}{}: {}", if f.holds { "" } else { "!" }, f.name, f.value))
            .collect();
        if parts.is_empty() {
            "-".into()
        } else {
            parts.join("; ")
        }
    };
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut head = vec!["level".to_string()];
    head.extend(headers);
    rows.push(head);
    for level in Level::ALL {
        let mut row = vec![level.row().to_string()];
        row.extend(report.claims.iter().map(|c| cell(c, level)));
        rows.push(row);
    }
    let mut verdict = vec!["verdict".to_string()];
    verdict.extend(report.claims.iter().map(|c| if c.pass { "PASS" } else { "FAIL" }.to_string()));
    rows.push(verdict);

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|k| rows.iter().map(|r| r[k].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for claim in &report.claims {
        let _ = writeln!(out, "{} [{}]", claim.label, claim.environment);
    }
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", line.join(" | ").trim_end());
        if i == 0 || i == rows.len() - 2 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            let _ = writeln!(out, "{}", rule.join("-+-"));
        }
    }
    let _ = writeln!(
        out,
        "\n{}",
        if report.pass { "all four claims hold" } else { "some claims FAILED" }
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use topos_core::gallery::builtin;

    #[test]
    fn builtins_pass() {
        let set = builtin("set01").unwrap();
        let cover = builtin("crown_double_cover").unwrap();
        let report = demo_independence(&set, "set01", &cover, "crown_double_cover").unwrap();
        assert!(report.pass, "{}", render(&report));
        let text = render(&report);
        assert!(text.contains("meaning (A -> B)") && text.contains("existence (exists)"));
    }

    #[test]
    fn missing_sorts_are_setup_errors() {
        let set = builtin("set01").unwrap();
        assert!(demo_independence(&set, "a", &set, "b").is_err());
    }
}
