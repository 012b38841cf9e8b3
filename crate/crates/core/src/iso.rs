//! Enumeration of natural transformations and exact isomorphism search.

use crate::presheaf::{global_families, NatTrans, Presheaf};
use crate::site::{MorId, ObjId};

/// A naturality constraint `φ(lo) = B(f)(φ(hi))`, checked once both nodes are assigned.
#[derive(Clone, Copy)]
struct Constraint {
    other: usize,
    morphism: MorId,
    /// Whether the node owning this constraint is `hi` (the codomain-side element).
    owner_is_hi: bool,
}

struct Search<'a> {
    src: &'a Presheaf,
    tgt: &'a Presheaf,
    nodes: Vec<(ObjId, usize)>,
    constraints: Vec<Vec<Constraint>>,
    bijective: bool,
}

impl<'a> Search<'a> {
    fn new(src: &'a Presheaf, tgt: &'a Presheaf, bijective: bool) -> Search<'a> {
        let site = src.site();
        let mut offset = Vec::new();
        let mut nodes = Vec::new();
        for c in site.objects() {
            offset.push(nodes.len());
            nodes.extend((0..src.stage_size(c)).map(|a| (c, a)));
        }
        let mut constraints = vec![Vec::new(); nodes.len()];
        for f in site.morphisms() {
            if site.is_identity(f) {
                continue;
            }
            let (x, c) = (site.src(f), site.tgt(f));
            for a in 0..src.stage_size(c) {
                let hi = offset[c.0] + a;
                let lo = offset[x.0] + src.act(f, a);
                let later = hi.max(lo);
                constraints[later].push(Constraint {
                    other: if later == hi { lo } else { hi },
                    morphism: f,
                    owner_is_hi: later == hi,
                });
            }
        }
        Search {
            src,
            tgt,
            nodes,
            constraints,
            bijective,
        }
    }

    fn run(&self, limit: Option<usize>) -> Vec<NatTrans> {
        let mut assignment = Vec::with_capacity(self.nodes.len());
        let mut used: Vec<Vec<bool>> = self
            .src
            .site()
            .objects()
            .map(|c| vec![false; self.tgt.stage_size(c)])
            .collect();
        let mut out = Vec::new();
        self.go(&mut assignment, &mut used, &mut out, limit);
        out
    }

    fn go(
        &self,
        assignment: &mut Vec<usize>,
        used: &mut [Vec<bool>],
        out: &mut Vec<NatTrans>,
        limit: Option<usize>,
    ) {
        if limit.is_some_and(|l| out.len() >= l) {
            return;
        }
        let k = assignment.len();
        if k == self.nodes.len() {
            let mut components: Vec<Vec<usize>> =
                self.src.site().objects().map(|_| Vec::new()).collect();
            for (&(c, _), &b) in self.nodes.iter().zip(assignment.iter()) {
                components[c.0].push(b);
            }
            out.push(NatTrans::new_unchecked(self.src.clone(), self.tgt.clone(), components));
            return;
        }
        let (c, _) = self.nodes[k];
        for b in 0..self.tgt.stage_size(c) {
            if self.bijective && used[c.0][b] {
                continue;
            }
            assignment.push(b);
            if self.consistent(k, assignment) {
                used[c.0][b] = true;
                self.go(assignment, used, out, limit);
                used[c.0][b] = false;
            }
            assignment.pop();
        }
    }

    fn consistent(&self, k: usize, assignment: &[usize]) -> bool {
        self.constraints[k].iter().all(|con| {
            let (hi, lo) = if con.owner_is_hi { (k, con.other) } else { (con.other, k) };
            assignment[lo] == self.tgt.act(con.morphism, assignment[hi])
        })
    }
}

/// Every natural transformation `A → B`, in lexicographic order of component tables.
pub fn hom(a: &Presheaf, b: &Presheaf) -> Vec<NatTrans> {
    if !a.same_site(b) {
        return Vec::new();
    }
    Search::new(a, b, false).run(None)
}

/// A natural isomorphism `A → B` if one exists.
pub fn find_isomorphism(a: &Presheaf, b: &Presheaf) -> Option<NatTrans> {
    if !a.same_site(b) || a.stage_sizes() != b.stage_sizes() {
        return None;
    }
    if global_families(a).len() != global_families(b).len() {
        return None;
    }
    Search::new(a, b, true).run(Some(1)).pop()
}
