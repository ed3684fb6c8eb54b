//! Assignment of distinct children to requested slots by augmenting paths.

/// Finds distinct candidates for every slot: `options[i]` lists the
/// candidates acceptable for slot `i`. Returns the chosen candidate per slot,
/// or `None` if no system of distinct representatives exists.
pub fn assign_distinct(options: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut owner: Vec<(usize, usize)> = Vec::new(); // (candidate, slot)
    let mut chosen = vec![usize::MAX; options.len()];
    for slot in 0..options.len() {
        let mut visited = Vec::new();
        if !augment(slot, options, &mut chosen, &mut owner, &mut visited) {
            return None;
        }
    }
    Some(chosen)
}

fn augment(
    slot: usize,
    options: &[Vec<usize>],
    chosen: &mut Vec<usize>,
    owner: &mut Vec<(usize, usize)>,
    visited: &mut Vec<usize>,
) -> bool {
    for &cand in &options[slot] {
        if visited.contains(&cand) {
            continue;
        }
        visited.push(cand);
        match owner.iter().position(|&(c, _)| c == cand) {
            None => {
                owner.push((cand, slot));
                chosen[slot] = cand;
                return true;
            }
            Some(pos) => {
                let other = owner[pos].1;
                if augment(other, options, chosen, owner, visited) {
                    // `other` moved to a new candidate; take over `cand`.
                    let pos = owner.iter().position(|&(c, s)| c == cand && s == other).expect("still owned");
                    owner[pos].1 = slot;
                    chosen[slot] = cand;
                    return true;
                }
            }
        }
    }
    false
}
