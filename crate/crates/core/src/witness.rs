//! Bounded brute-force searches over presheaves on a fixed site.
//!
//! Candidates are enumerated with stage sizes in object order (first object
//! most significant) and, for each size vector, action tables in morphism
//! order, each table lexicographic. Elements at a stage of size `n` are
//! labelled `0..n`. Every candidate that reaches a complete set of action
//! tables counts against the budget.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::iso::find_isomorphism;
use crate::lang::{interpret_formula, Context, SemanticEnvironment, Signature};
use crate::presheaf::{global_families, is_inhabited_internally, NatTrans, Presheaf};
use crate::site::{FinCat, MorId};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("candidate budget of {budget} exhausted after {partial} results")]
    BudgetExceeded { budget: u64, partial: usize },
}

#[derive(Clone, Debug)]
pub struct SearchBounds {
    pub site: Arc<FinCat>,
    pub max_stage_size: usize,
    /// Keep one representative per isomorphism class.
    pub prune: bool,
    pub budget: u64,
}

impl SearchBounds {
    pub fn new(site: Arc<FinCat>, max_stage_size: usize) -> SearchBounds {
        SearchBounds {
            site,
            max_stage_size,
            prune: false,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn pruned(mut self, prune: bool) -> SearchBounds {
        self.prune = prune;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> SearchBounds {
        self.budget = budget;
        self
    }
}

/// `(global element count, internally inhabited)`.
pub type Profile = (usize, bool);

pub fn profile(p: &Presheaf) -> Profile {
    (global_families(p).len(), is_inhabited_internally(p))
}

struct Enumerator {
    site: Arc<FinCat>,
    /// Non-identity morphisms in id order.
    free: Vec<MorId>,
    /// Composition constraints `(g, f, g∘f)` keyed by the position in `free`
    /// after which all three tables are known.
    checks: Vec<Vec<(MorId, MorId, MorId)>>,
    budget: u64,
    spent: u64,
}

impl Enumerator {
    fn new(site: Arc<FinCat>, budget: u64) -> Enumerator {
        let free: Vec<MorId> = site.morphisms().filter(|&m| !site.is_identity(m)).collect();
        let position = |m: MorId| free.iter().position(|&x| x == m);
        let mut checks = vec![Vec::new(); free.len()];
        for g in site.morphisms() {
            for f in site.morphisms() {
                let Some(gf) = site.compose(g, f) else { continue };
                if site.is_identity(g) || site.is_identity(f) {
                    continue;
                }
                let last = [g, f, gf].iter().filter_map(|&m| position(m)).max();
                if let Some(k) = last {
                    checks[k].push((g, f, gf));
                }
            }
        }
        Enumerator {
            site,
            free,
            checks,
            budget,
            spent: 0,
        }
    }

    /// Calls `visit` on every functorial candidate with the given stage sizes.
    fn with_sizes(
        &mut self,
        sizes: &[usize],
        visit: &mut dyn FnMut(Presheaf),
    ) -> Result<(), u64> {
        let mut actions: Vec<Vec<usize>> = self
            .site
            .morphisms()
            .map(|m| (0..sizes[self.site.tgt(m).0]).collect())
            .collect();
        self.fill(0, sizes, &mut actions, visit)
    }

    fn fill(
        &mut self,
        k: usize,
        sizes: &[usize],
        actions: &mut Vec<Vec<usize>>,
        visit: &mut dyn FnMut(Presheaf),
    ) -> Result<(), u64> {
        if k == self.free.len() {
            self.spent += 1;
            if self.spent > self.budget {
                return Err(self.spent);
            }
            let sets = sizes
                .iter()
                .map(|&n| (0..n).map(|i| i.to_string()).collect())
                .collect();
            visit(Presheaf::new_unchecked(self.site.clone(), sets, actions.clone()));
            return Ok(());
        }
        let m = self.free[k];
        let (dom, cod) = (sizes[self.site.src(m).0], sizes[self.site.tgt(m).0]);
        if cod > 0 && dom == 0 {
            return Ok(());
        }
        let mut table = vec![0; cod];
        loop {
            actions[m.0] = table.clone();
            let ok = self.checks[k].iter().all(|&(g, f, gf)| {
                // A(g∘f) = A(f) ∘ A(g)
                (0..sizes[self.site.tgt(g).0])
                    .all(|a| actions[f.0][actions[g.0][a]] == actions[gf.0][a])
            });
            if ok {
                self.fill(k + 1, sizes, actions, visit)?;
            }
            if !next_table(&mut table, dom) {
                return Ok(());
            }
        }
    }
}

/// Lexicographic successor of a function table with values below `base`.
fn next_table(table: &mut [usize], base: usize) -> bool {
    for slot in table.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Successor of a size vector with entries in `lo..=hi`, last entry fastest.
fn next_sizes(sizes: &mut [usize], lo: usize, hi: usize) -> bool {
    for slot in sizes.iter_mut().rev() {
        if *slot < hi {
            *slot += 1;
            return true;
        }
        *slot = lo;
    }
    false
}

/// Visits every presheaf with stage sizes in `lo..=hi`; `Err` carries the
/// number of candidates spent when the budget ran out.
fn enumerate(
    site: &Arc<FinCat>,
    lo: usize,
    hi: usize,
    budget: u64,
    visit: &mut dyn FnMut(Presheaf),
) -> Result<(), u64> {
    if lo > hi {
        return Ok(());
    }
    let mut e = Enumerator::new(site.clone(), budget);
    let mut sizes = vec![lo; site.object_count()];
    loop {
        e.with_sizes(&sizes, visit)?;
        if !next_sizes(&mut sizes, lo, hi) {
            return Ok(());
        }
    }
}

/// Every presheaf over `site` with all stages of size at most `max`, in
/// enumeration order. Intended for small sites and bounds; not budgeted.
pub fn all_presheaves(site: &Arc<FinCat>, max: usize) -> Vec<Presheaf> {
    let mut out = Vec::new();
    enumerate(site, 0, max, u64::MAX, &mut |p| out.push(p)).expect("unbudgeted");
    out
}

/// Isomorphism-class representatives kept in discovery order.
struct Classes {
    buckets: BTreeMap<(Vec<usize>, Profile), Vec<usize>>,
    reps: Vec<Presheaf>,
}

impl Classes {
    fn new() -> Classes {
        Classes {
            buckets: BTreeMap::new(),
            reps: Vec::new(),
        }
    }

    /// Adds `p` unless an isomorphic presheaf is already present.
    fn insert(&mut self, p: Presheaf, prof: Profile) -> bool {
        let sizes = p.stage_sizes();
        let bucket = self.buckets.entry((sizes, prof)).or_default();
        if bucket.iter().any(|&i| find_isomorphism(&self.reps[i], &p).is_some()) {
            return false;
        }
        bucket.push(self.reps.len());
        self.reps.push(p);
        true
    }
}

/// Presheaves with stages of size `1..=max` that are internally inhabited yet
/// have no global element. Every hit is re-checked by [`revalidate_no_point`].
pub fn search_inhabited_no_point(bounds: &SearchBounds) -> Result<Vec<Presheaf>, SearchError> {
    let mut classes = Classes::new();
    let mut hits = Vec::new();
    let outcome = enumerate(&bounds.site, 1, bounds.max_stage_size, bounds.budget, &mut |p| {
        if !is_inhabited_internally(&p) || !global_families(&p).is_empty() {
            return;
        }
        if bounds.prune && !classes.insert(p.clone(), (0, true)) {
            return;
        }
        hits.push(p);
    });
    if outcome.is_err() {
        return Err(SearchError::BudgetExceeded {
            budget: bounds.budget,
            partial: hits.len(),
        });
    }
    for p in &hits {
        assert!(
            revalidate_no_point(p),
            "search produced a presheaf failing revalidation"
        );
    }
    Ok(hits)
}

/// Re-checks a search hit without the search's own predicates: functoriality
/// via validation, inhabitedness via forcing and via subobject semantics, and
/// absence of points by exhaustive enumeration of families.
pub fn revalidate_no_point(p: &Presheaf) -> bool {
    let raw = p.to_raw();
    let Ok(q) = Presheaf::from_raw(p.site(), &raw) else {
        return false;
    };
    if brute_force_global_count(&q) != 0 || !NatTrans::to_terminal(&q).is_epi() {
        return false;
    }
    let env = single_sort_env(&q);
    let f = env
        .formula("exists x:X. true", &Context::new())
        .expect("well typed");
    crate::forcing::holds_globally(&f, &env).expect("closed formula")
        && interpret_formula(&env, &Context::new(), &f)
            .expect("interpretable")
            .is_top()
}

fn single_sort_env(p: &Presheaf) -> SemanticEnvironment {
    let mut sig = Signature::new();
    sig.add_sort("X").expect("fresh");
    let sorts = BTreeMap::from([("X".to_string(), p.clone())]);
    SemanticEnvironment::new(p.site().clone(), sig, sorts, BTreeMap::new(), BTreeMap::new())
        .expect("one sort, no symbols")
}

/// Number of compatible families, by enumerating the full product of stages.
pub fn brute_force_global_count(p: &Presheaf) -> usize {
    let site = p.site();
    let sizes = p.stage_sizes();
    if sizes.contains(&0) {
        return 0;
    }
    let mut family = vec![0; sizes.len()];
    let mut count = 0;
    loop {
        if site
            .morphisms()
            .all(|m| p.act(m, family[site.tgt(m).0]) == family[site.src(m).0])
        {
            count += 1;
        }
        let mut k = family.len();
        loop {
            if k == 0 {
                return count;
            }
            k -= 1;
            family[k] += 1;
            if family[k] < sizes[k] {
                break;
            }
            family[k] = 0;
        }
    }
}

/// Pairs of non-isomorphic presheaves with stages of size `0..=max` and equal
/// profiles, in enumeration order of the pair's members.
pub fn search_noniso_same_profile(
    bounds: &SearchBounds,
) -> Result<Vec<(Presheaf, Presheaf)>, SearchError> {
    let mut classes = Classes::new();
    let mut all: Vec<(Presheaf, Profile)> = Vec::new();
    let outcome = enumerate(&bounds.site, 0, bounds.max_stage_size, bounds.budget, &mut |p| {
        let prof = profile(&p);
        if bounds.prune && !classes.insert(p.clone(), prof) {
            return;
        }
        all.push((p, prof));
    });
    let mut pairs = Vec::new();
    for (i, (a, pa)) in all.iter().enumerate() {
        for (b, pb) in &all[i + 1..] {
            if pa == pb && find_isomorphism(a, b).is_none() {
                pairs.push((a.clone(), b.clone()));
            }
        }
    }
    if outcome.is_err() {
        return Err(SearchError::BudgetExceeded {
            budget: bounds.budget,
            partial: pairs.len(),
        });
    }
    Ok(pairs)
}

/// A uniformly drawn size vector in `0..=max` with random action tables,
/// redrawn until functorial.
pub fn random_presheaf<R: Rng + ?Sized>(site: &Arc<FinCat>, max: usize, rng: &mut R) -> Presheaf {
    loop {
        let sizes: Vec<usize> = site.objects().map(|_| rng.random_range(0..=max)).collect();
        let mut actions = Vec::with_capacity(site.morphism_count());
        let mut possible = true;
        for m in site.morphisms() {
            let (dom, cod) = (sizes[site.src(m).0], sizes[site.tgt(m).0]);
            if site.is_identity(m) {
                actions.push((0..cod).collect());
            } else if cod > 0 && dom == 0 {
                possible = false;
                break;
            } else {
                actions.push((0..cod).map(|_| rng.random_range(0..dom)).collect());
            }
        }
        if !possible {
            continue;
        }
        let sets = sizes
            .iter()
            .map(|&n| (0..n).map(|i| i.to_string()).collect())
            .collect();
        if let Ok(p) = Presheaf::new(site.clone(), sets, actions) {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::cover;
    use crate::site::{crown, sierpinski, terminal_category};

    #[test]
    fn terminal_site_has_no_witness() {
        let site = Arc::new(terminal_category());
        for n in 0..=4 {
            let hits = search_inhabited_no_point(&SearchBounds::new(site.clone(), n)).unwrap();
            assert!(hits.is_empty());
        }
    }

    #[test]
    fn sierpinski_bound_one_has_no_witness() {
        let site = Arc::new(sierpinski());
        let bounds = SearchBounds::new(site.clone(), 1);
        assert!(search_inhabited_no_point(&bounds).unwrap().is_empty());
        // the single candidate with non-empty stages has exactly one point
        let singles: Vec<Presheaf> = all_presheaves(&site, 1)
            .into_iter()
            .filter(|p| p.stage_sizes() == [1, 1])
            .collect();
        assert_eq!(singles.len(), 1);
        assert_eq!(brute_force_global_count(&singles[0]), 1);
    }

    #[test]
    fn crown_bound_two_finds_the_double_cover() {
        let site = Arc::new(crown());
        let f2 = cover(&site, 2, true);
        let hits = search_inhabited_no_point(&SearchBounds::new(site.clone(), 2)).unwrap();
        assert!(hits.iter().any(|p| find_isomorphism(p, &f2).is_some()));
        let pruned =
            search_inhabited_no_point(&SearchBounds::new(site.clone(), 2).pruned(true)).unwrap();
        for (i, a) in pruned.iter().enumerate() {
            for b in &pruned[i + 1..] {
                assert!(find_isomorphism(a, b).is_none());
            }
        }
        for p in &hits {
            assert!(pruned.iter().any(|q| find_isomorphism(p, q).is_some()));
        }
        // the class of F2 appears with all 2^4 / |Aut(F2)| = 8 relabellings
        let relabellings = hits.iter().filter(|p| find_isomorphism(p, &f2).is_some()).count();
        assert_eq!(relabellings, 8);
    }

    #[test]
    fn enumeration_counts_match_brute_force() {
        // Sierpinski: sizes (a, b) with a^b tables for u when a > 0 or b = 0
        let site = Arc::new(sierpinski());
        let expected: usize = (0..=2usize)
            .flat_map(|a| (0..=2usize).map(move |b| a.pow(b as u32)))
            .sum();
        assert_eq!(all_presheaves(&site, 2).len(), expected);
    }

    #[test]
    fn budget_is_enforced() {
        let site = Arc::new(crown());
        let bounds = SearchBounds::new(site, 3).with_budget(1000);
        assert!(matches!(
            search_inhabited_no_point(&bounds),
            Err(SearchError::BudgetExceeded { budget: 1000, .. })
        ));
    }

    #[test]
    fn profile_filter_on_terminal_site() {
        let site = Arc::new(terminal_category());
        let pairs = search_noniso_same_profile(&SearchBounds::new(site, 2)).unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn crown_pairs_exclude_constant_two_against_cover() {
        let site = Arc::new(crown());
        let f2 = cover(&site, 2, true);
        let c2 = crate::presheaf::constant(&site, &["0", "1"]);
        let pairs =
            search_noniso_same_profile(&SearchBounds::new(site, 2).pruned(true)).unwrap();
        assert!(!pairs.is_empty());
        for (a, b) in &pairs {
            assert_eq!(profile(a), profile(b));
            assert!(find_isomorphism(a, b).is_none());
            let is = |p: &Presheaf, q: &Presheaf| find_isomorphism(p, q).is_some();
            assert!(!(is(a, &f2) && is(b, &c2)) && !(is(a, &c2) && is(b, &f2)));
        }
    }

    #[test]
    fn random_presheaves_are_valid() {
        use rand::rngs::StdRng;
        use rand::SeedableRng;
        let mut rng = StdRng::seed_from_u64(3);
        let site = Arc::new(crown());
        for _ in 0..50 {
            let p = random_presheaf(&site, 3, &mut rng);
            assert!(Presheaf::from_raw(&site, &p.to_raw()).is_ok());
        }
    }
}
