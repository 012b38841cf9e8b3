//! Enumeration of subsets closed under a "forces" relation.
//!
//! Node `i` forces the nodes `forced[i]`; a set is closed if it contains
//! everything its members force. Sieves on an object and subobjects of a
//! presheaf are both instances.

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Unknown,
    In,
    Out,
}

/// All closed subsets as membership masks, each produced exactly once.
pub(crate) fn down_closed_sets(forced: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let n = forced.len();
    let mut forced_by = vec![Vec::new(); n];
    for (i, targets) in forced.iter().enumerate() {
        for &j in targets {
            forced_by[j].push(i);
        }
    }
    let mut out = Vec::new();
    let mut marks = vec![Mark::Unknown; n];
    search(forced, &forced_by, &mut marks, 0, &mut out);
    out
}

fn search(
    forced: &[Vec<usize>],
    forced_by: &[Vec<usize>],
    marks: &mut Vec<Mark>,
    from: usize,
    out: &mut Vec<Vec<bool>>,
) {
    let Some(next) = (from..marks.len()).find(|&i| marks[i] == Mark::Unknown) else {
        out.push(marks.iter().map(|&m| m == Mark::In).collect());
        return;
    };
    for (mark, edges) in [(Mark::Out, forced_by), (Mark::In, forced)] {
        let saved = marks.clone();
        if propagate(next, mark, edges, marks) {
            search(forced, forced_by, marks, next + 1, out);
        }
        *marks = saved;
    }
}

/// Marks `start` and everything reachable along `edges` with `mark`.
fn propagate(start: usize, mark: Mark, edges: &[Vec<usize>], marks: &mut [Mark]) -> bool {
    let mut stack = vec![start];
    while let Some(i) = stack.pop() {
        match marks[i] {
            m if m == mark => continue,
            Mark::Unknown => {
                marks[i] = mark;
                stack.extend(edges[i].iter().copied());
            }
            _ => return false,
        }
    }
    true
}
