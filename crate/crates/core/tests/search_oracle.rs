//! A* against exhaustive breadth-first search on random finite models.

mod common;

use std::time::Instant;

use common::checks::{search_agreement, SearchSummary};

const MODELS: u64 = 200;

#[test]
fn astar_matches_breadth_first_search() {
    let start = Instant::now();
    let mut s = SearchSummary::default();
    for seed in 0..MODELS {
        search_agreement(seed, &mut s).unwrap_or_else(|e| panic!("{e}"));
    }
    println!("{s:?}");
    assert!(s.skipped * 20 <= MODELS as usize, "too many models skipped: {}", s.skipped);
    assert!(s.solvable >= 20 && s.unsolvable >= 20, "{s:?}");
    assert!(s.deep >= 10, "only {} models need three or more steps", s.deep);
    assert!(start.elapsed().as_secs() < 60, "took {:?}", start.elapsed());
}
