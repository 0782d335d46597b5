use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;

use super::types::Candidate;
use crate::statement::CanonicalKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Accepted { evicted: Option<usize> },
    RejectedInfeasible,
    RejectedDuplicate,
    /// Archive full and the newcomer ranks below every evictable member.
    RejectedCapacity,
}

impl InsertOutcome {
    pub fn accepted(self) -> bool {
        matches!(self, InsertOutcome::Accepted { .. })
    }
}

/// Compile-feasible candidates split across islands, with globally unique keys.
#[derive(Debug, Clone)]
pub struct Archive {
    islands: Vec<Vec<Candidate>>,
    capacity: usize,
    elitism_top: usize,
    keys: HashSet<CanonicalKey>,
}

/// Elite ranking, larger is better: score, then earlier call, then lower id.
fn rank_key(c: &Candidate) -> (u8, std::cmp::Reverse<usize>, std::cmp::Reverse<usize>) {
    (c.score, std::cmp::Reverse(c.call_index), std::cmp::Reverse(c.id))
}

/// Eviction order, smallest goes first: lowest score, then oldest call.
fn evict_key(c: &Candidate) -> (u8, usize, usize) {
    (c.score, c.call_index, c.id)
}

impl Archive {
    pub fn new(islands: usize, capacity: usize, elitism_top: usize) -> Archive {
        Archive { islands: vec![Vec::new(); islands.max(1)], capacity, elitism_top, keys: HashSet::new() }
    }

    pub fn num_islands(&self) -> usize {
        self.islands.len()
    }

    pub fn len(&self) -> usize {
        self.islands.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn island_sizes(&self) -> Vec<usize> {
        self.islands.iter().map(Vec::len).collect()
    }

    pub fn island(&self, i: usize) -> &[Candidate] {
        &self.islands[i]
    }

    pub fn contains_key(&self, key: &CanonicalKey) -> bool {
        self.keys.contains(key)
    }

    pub fn members(&self) -> impl Iterator<Item = &Candidate> {
        self.islands.iter().flatten()
    }

    pub fn get(&self, id: usize) -> Option<&Candidate> {
        self.members().find(|c| c.id == id)
    }

    pub fn get_mut(&mut self, id: usize) -> Option<&mut Candidate> {
        self.islands.iter_mut().flatten().find(|c| c.id == id)
    }

    /// Ids of the protected top members of an island.
    pub fn elites(&self, island: usize) -> Vec<usize> {
        let mut members: Vec<&Candidate> = self.islands[island].iter().collect();
        members.sort_by(|a, b| rank_key(b).cmp(&rank_key(a)));
        members.iter().take(self.elitism_top).map(|c| c.id).collect()
    }

    /// Inserts a feasible, non-duplicate candidate into `cand.island`. When full,
    /// the lowest-ranked non-elite member (the newcomer included) is dropped.
    pub fn insert(&mut self, cand: Candidate) -> InsertOutcome {
        if !cand.compile_ok {
            return InsertOutcome::RejectedInfeasible;
        }
        if self.keys.contains(&cand.canonical) {
            return InsertOutcome::RejectedDuplicate;
        }
        let mut evicted = None;
        if self.len() >= self.capacity {
            let elites: HashSet<usize> = (0..self.islands.len()).flat_map(|i| self.elites(i)).collect();
            let victim = self.members().filter(|c| !elites.contains(&c.id)).min_by_key(|c| evict_key(c)).map(|c| (c.id, evict_key(c)));
            match victim {
                Some((id, key)) if key < evict_key(&cand) => {
                    let removed = self.remove(id).expect("victim is a member");
                    self.keys.remove(&removed.canonical);
                    evicted = Some(id);
                }
                _ => return InsertOutcome::RejectedCapacity,
            }
        }
        let island = cand.island.min(self.islands.len() - 1);
        self.keys.insert(cand.canonical.clone());
        self.islands[island].push(Candidate { island, ..cand });
        InsertOutcome::Accepted { evicted }
    }

    fn remove(&mut self, id: usize) -> Option<Candidate> {
        for isl in &mut self.islands {
            if let Some(pos) = isl.iter().position(|c| c.id == id) {
                return Some(isl.remove(pos));
            }
        }
        None
    }

    /// Up to `archive_n` uniform picks plus up to `topk_n` best-ranked members of
    /// the island, all distinct and excluding the parent.
    pub fn sample_context<R: Rng>(&self, island: usize, parent_id: usize, archive_n: usize, topk_n: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
        let mut others: Vec<&Candidate> = self.islands[island].iter().filter(|c| c.id != parent_id).collect();
        others.sort_by(|a, b| rank_key(b).cmp(&rank_key(a)));
        let top: Vec<usize> = others.iter().take(topk_n).map(|c| c.id).collect();
        let rest: Vec<usize> = others.iter().skip(top.len()).map(|c| c.id).collect();
        let k = archive_n.min(rest.len());
        let picks = sample(rng, rest.len(), k).into_iter().map(|i| rest[i]).collect();
        (picks, top)
    }

    /// Moves ⌊rate·size⌋ non-elite, generation>0 members of each island to a
    /// uniformly chosen other island, on generations divisible by `interval`.
    pub fn maybe_migrate<R: Rng>(&mut self, generation: usize, interval: usize, rate: f64, rng: &mut R) -> usize {
        let k = self.islands.len();
        if k < 2 || interval == 0 || generation == 0 || generation % interval != 0 {
            return 0;
        }
        let mut moves = Vec::new();
        for i in 0..k {
            let elites = self.elites(i);
            let eligible: Vec<usize> = self.islands[i].iter().filter(|c| c.generation > 0 && !elites.contains(&c.id)).map(|c| c.id).collect();
            let n = ((rate * self.islands[i].len() as f64).floor() as usize).min(eligible.len());
            for j in sample(rng, eligible.len(), n) {
                let mut dest = rng.gen_range(0..k - 1);
                if dest >= i {
                    dest += 1;
                }
                moves.push((eligible[j], dest));
            }
        }
        for &(id, dest) in &moves {
            let mut c = self.remove(id).expect("migrant is a member");
            c.island = dest;
            self.islands[dest].push(c);
        }
        moves.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::types::Provenance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn cand(id: usize, score: u8, island: usize, generation: usize) -> Candidate {
        Candidate {
            id,
            file: None,
            raw_text: format!("c{id}"),
            canonical: CanonicalKey(format!("k{id}")),
            compile_ok: score > 0,
            semantic_ok: score == 2,
            judge_rationale: String::new(),
            error_type: None,
            error_msg: String::new(),
            score,
            usage_count: 0,
            island,
            generation,
            provenance: Provenance::Full,
            parent_id: None,
            call_index: id,
        }
    }

    #[test]
    fn gate_and_duplicates() {
        let mut a = Archive::new(2, 40, 1);
        assert_eq!(a.insert(cand(1, 0, 0, 0)), InsertOutcome::RejectedInfeasible);
        assert!(a.is_empty());
        assert!(a.insert(cand(2, 1, 0, 0)).accepted());
        let mut dup = cand(3, 2, 1, 0);
        dup.canonical = CanonicalKey("k2".into());
        assert_eq!(a.insert(dup), InsertOutcome::RejectedDuplicate);
    }

    #[test]
    fn eviction_drops_lowest_then_oldest_non_elite() {
        let mut a = Archive::new(1, 40, 1);
        for id in 1..=40 {
            assert!(a.insert(cand(id, if id == 5 || id == 9 { 1 } else { 2 }, 0, 1)).accepted());
        }
        assert_eq!(a.insert(cand(41, 2, 0, 1)), InsertOutcome::Accepted { evicted: Some(5) });
        assert_eq!(a.insert(cand(42, 2, 0, 1)), InsertOutcome::Accepted { evicted: Some(9) });
        assert_eq!(a.len(), 40);
        assert!(a.get(5).is_none() && a.get(9).is_none() && a.get(42).is_some());
        // all score 2 now: the oldest non-elite goes; the elite (id 1) stays
        assert_eq!(a.insert(cand(43, 2, 0, 1)), InsertOutcome::Accepted { evicted: Some(2) });
        assert_eq!(a.insert(cand(44, 1, 0, 1)), InsertOutcome::RejectedCapacity);
        assert!(a.get(1).is_some());
    }

    #[test]
    fn context_excludes_parent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut a = Archive::new(1, 40, 1);
        assert!(a.insert(cand(1, 2, 0, 0)).accepted());
        assert_eq!(a.sample_context(0, 1, 4, 2, &mut rng), (vec![], vec![]));
        for id in 2..=7 {
            assert!(a.insert(cand(id, if id == 4 || id == 6 { 2 } else { 1 }, 0, 0)).accepted());
        }
        let (picks, top) = a.sample_context(0, 1, 4, 2, &mut rng);
        assert_eq!(top, vec![4, 6]);
        assert_eq!(picks.len(), 4);
        let mut all: Vec<usize> = picks.iter().chain(&top).copied().collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 6);
        assert!(!all.contains(&1));
    }

    #[test]
    fn migration_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut a = Archive::new(2, 40, 1);
        for id in 0..20 {
            assert!(a.insert(cand(id, 2, id % 2, 1)).accepted());
        }
        let elites = (a.elites(0), a.elites(1));
        assert_eq!(a.maybe_migrate(7, 10, 0.1, &mut rng), 0);
        assert_eq!(a.maybe_migrate(10, 10, 0.1, &mut rng), 2);
        assert_eq!(a.island_sizes(), vec![10, 10]);
        assert_eq!(a.len(), 20);
        assert!(elites.0.iter().all(|id| a.island(0).iter().any(|c| c.id == *id)));
        assert!(elites.1.iter().all(|id| a.island(1).iter().any(|c| c.id == *id)));
        let mut single = Archive::new(1, 40, 1);
        assert!(single.insert(cand(1, 2, 0, 1)).accepted());
        assert_eq!(single.maybe_migrate(10, 10, 0.5, &mut rng), 0);
    }
}
