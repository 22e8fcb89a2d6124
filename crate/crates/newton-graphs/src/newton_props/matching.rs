//! Bipartite maximum matching (Hopcroft–Karp) plus the alternating-path
//! searches needed for strong-Hall testing and deficiency certificates.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct Matching {
    pub left: Vec<Option<usize>>,
    pub right: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.left.iter().filter(|m| m.is_some()).count()
    }
}

/// Maximum matching of the bipartite graph `adj: left -> sorted right
/// neighbours`. Deterministic.
pub fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> Matching {
    let n_left = adj.len();
    let mut left: Vec<Option<usize>> = vec![None; n_left];
    let mut right: Vec<Option<usize>> = vec![None; n_right];
    const INF: usize = usize::MAX;
    let mut dist = vec![INF; n_left];

    loop {
        // BFS layering from free left vertices.
        let mut queue = VecDeque::new();
        for x in 0..n_left {
            if left[x].is_none() {
                dist[x] = 0;
                queue.push_back(x);
            } else {
                dist[x] = INF;
            }
        }
        let mut found_free_right = false;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                match right[y] {
                    None => found_free_right = true,
                    Some(x2) => {
                        if dist[x2] == INF {
                            dist[x2] = dist[x] + 1;
                            queue.push_back(x2);
                        }
                    }
                }
            }
        }
        if !found_free_right {
            break;
        }
        // Layered DFS augmentation.
        fn dfs(
            x: usize,
            adj: &[Vec<usize>],
            left: &mut [Option<usize>],
            right: &mut [Option<usize>],
            dist: &mut [usize],
        ) -> bool {
            for i in 0..adj[x].len() {
                let y = adj[x][i];
                let advance = match right[y] {
                    None => true,
                    Some(x2) => {
                        dist[x2] == dist[x].wrapping_add(1)
                            && dfs(x2, adj, left, right, dist)
                    }
                };
                if advance {
                    left[x] = Some(y);
                    right[y] = Some(x);
                    return true;
                }
            }
            dist[x] = usize::MAX;
            false
        }
        let mut augmented = false;
        for x in 0..n_left {
            if left[x].is_none() && dfs(x, adj, &mut left, &mut right, &mut dist) {
                augmented = true;
            }
        }
        if !augmented {
            break;
        }
    }
    Matching { left, right }
}

/// Outcome of an alternating BFS from the given left roots with one right
/// vertex removed: either an augmenting path exists, or the reachable left
/// set is Hall-deficient relative to the reachable right set.
pub enum AltSearch {
    Augmenting,
    Deficient {
        left: Vec<usize>,
        right: Vec<usize>,
    },
}

/// Alternating search treating `roots` as unmatched. `banned`, when set, is
/// excluded from the right side (and must not be a root's matched partner
/// unless that pairing is being ignored on purpose).
pub fn alternating_search(
    adj: &[Vec<usize>],
    matching: &Matching,
    roots: &[usize],
    banned: Option<usize>,
) -> AltSearch {
    let n_left = adj.len();
    let n_right = matching.right.len();
    let mut seen_left = vec![false; n_left];
    let mut seen_right = vec![false; n_right];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &x in roots {
        if !seen_left[x] {
            seen_left[x] = true;
            queue.push_back(x);
        }
    }
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if Some(y) == banned || seen_right[y] {
                continue;
            }
            seen_right[y] = true;
            match matching.right[y] {
                None => return AltSearch::Augmenting,
                Some(x2) => {
                    // Treat a root's own pairing as dissolved.
                    if roots.contains(&x2) {
                        continue;
                    }
                    if !seen_left[x2] {
                        seen_left[x2] = true;
                        queue.push_back(x2);
                    }
                }
            }
        }
    }
    AltSearch::Deficient {
        left: (0..n_left).filter(|&x| seen_left[x]).collect(),
        right: (0..n_right).filter(|&y| seen_right[y]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_matching_on_a_cycle() {
        let adj = vec![vec![0, 1], vec![1, 2], vec![2, 0]];
        let m = hopcroft_karp(&adj, 3);
        assert_eq!(m.size(), 3);
    }

    #[test]
    fn deficient_star_is_detected() {
        // Three left vertices all adjacent only to right vertex 0.
        let adj = vec![vec![0], vec![0], vec![0]];
        let m = hopcroft_karp(&adj, 2);
        assert_eq!(m.size(), 1);
        let free: Vec<usize> = (0..3).filter(|&x| m.left[x].is_none()).collect();
        match alternating_search(&adj, &m, &free, None) {
            AltSearch::Deficient { left, right } => {
                assert_eq!(left.len(), 3);
                assert_eq!(right, vec![0]);
            }
            AltSearch::Augmenting => panic!("no augmenting path exists"),
        }
    }

    #[test]
    fn banned_right_vertex_forces_deficiency() {
        // x0-{y0,y1}, x1-{y1}: perfect, but banning y0 leaves one column.
        let adj = vec![vec![0, 1], vec![1]];
        let m = hopcroft_karp(&adj, 2);
        assert_eq!(m.size(), 2);
        let x_of_y0 = m.right[0].unwrap();
        match alternating_search(&adj, &m, &[x_of_y0], Some(0)) {
            AltSearch::Deficient { left, right } => {
                assert_eq!(left.len(), 2);
                assert_eq!(right, vec![1]);
            }
            AltSearch::Augmenting => panic!("y1 is taken and y0 banned"),
        }
    }
}
