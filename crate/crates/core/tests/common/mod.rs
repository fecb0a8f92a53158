//! Random instance generators and brute-force references shared by tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use structsearch::featurizer::{featurize_tree, sim_score, Feature, Interner, Multiset, TreeFeatures};
use structsearch::frontend::tree::{from_nested, Nested};
use structsearch::frontend::{AnnotatedTree, LeafId, Role};
use structsearch::recommend::{score_tuple, Members, Thresholds};

const NAMES: &[&str] = &["a", "b", "c", "mCount", "Log", "x"];
const LITERALS: &[&str] = &["0", "1", "\"s\"", "null"];
const KEYWORDS: &[&str] = &["=", "+", "(", ")", ";", ".", "if", "<"];

/// A random tree with at most `budget` leaves; lists have two to four elements.
fn random_nested(rng: &mut ChaCha8Rng, budget: &mut usize, depth: usize) -> Nested {
    let width = rng.random_range(2..=4);
    let mut items = Vec::new();
    for _ in 0..width {
        let roll = rng.random_range(0..10);
        if roll < 3 || *budget == 0 {
            items.push(Nested::kw(KEYWORDS.choose(rng).unwrap()));
        } else if roll < 5 && depth < 3 && *budget >= 2 {
            items.push(random_nested(rng, budget, depth + 1));
        } else {
            *budget -= 1;
            let (text, role) = if rng.random_bool(0.6) {
                (NAMES.choose(rng).unwrap(), Role::Name)
            } else {
                (LITERALS.choose(rng).unwrap(), Role::Literal)
            };
            items.push(Nested::Token(text.to_string(), role));
        }
    }
    Nested::List(items)
}

pub fn random_tree(rng: &mut ChaCha8Rng) -> AnnotatedTree {
    loop {
        let mut budget = rng.random_range(1..=8);
        let tree = from_nested(random_nested(rng, &mut budget, 0));
        if tree.leaf_count() > 0 && tree.validate().is_ok() {
            return AnnotatedTree::snippet(tree);
        }
    }
}

pub fn exhaustive_best(target: &Multiset<Feature>, f: &TreeFeatures) -> u64 {
    let n = f.leaf_count();
    (0u32..1 << n)
        .map(|mask| {
            let leaves = (0..n as LeafId).filter(|l| mask >> l & 1 == 1);
            sim_score(target, &f.multiset_of(leaves))
        })
        .max()
        .unwrap()
}

/// A tree with at most eight leaves and a target mixing half of its features
/// with those of another random tree.
pub fn prune_instance(rng: &mut ChaCha8Rng, syms: &mut Interner) -> (TreeFeatures, Multiset<Feature>) {
    let features = featurize_tree(&random_tree(rng), syms);
    let other = featurize_tree(&random_tree(rng), syms).multiset();
    let mut target = Multiset::new();
    for f in features.all() {
        if rng.random_bool(0.5) {
            target.insert(*f, 1);
        }
    }
    target.add_all(&other);
    (features, target)
}

/// Full and pruned multisets of up to 30 candidates drawn from three families
/// around a common query part.
pub fn cluster_instance(rng: &mut ChaCha8Rng) -> (Vec<Multiset<u32>>, Vec<Multiset<u32>>) {
    let n = rng.random_range(1..=30);
    let query: Vec<u32> = (0..rng.random_range(10..30)).map(|_| rng.random_range(0..40)).collect();
    let families: Vec<Vec<u32>> =
        (0..3).map(|_| (0..rng.random_range(20..60)).map(|_| rng.random_range(100..200)).collect()).collect();
    let mut full = Vec::new();
    let mut pruned = Vec::new();
    for _ in 0..n {
        let mut p = Multiset::new();
        for &f in &query {
            if rng.random_bool(0.95) {
                p.insert(f, 1);
            }
        }
        let mut m = p.clone();
        let family = families.choose(rng).unwrap();
        for &f in family {
            if rng.random_bool(0.85) {
                m.insert(f, 1);
            }
        }
        for _ in 0..rng.random_range(0..10) {
            m.insert(rng.random_range(200..1000), 1);
        }
        full.push(m);
        pruned.push(p);
    }
    (full, pruned)
}

/// Cluster growth by direct evaluation of the growth rule until a fixpoint.
pub fn brute_force_clusters(m: &Members<u32>, th: Thresholds) -> BTreeSet<(Vec<usize>, u64, u64)> {
    let n = m.full.len();
    let valid = |t: &[usize]| {
        let (cs, csq) = score_tuple(m, t);
        th.valid(cs, csq, m.pruned[t[0]].total()).then_some((cs, csq))
    };
    let mut all: BTreeMap<Vec<usize>, (u64, u64)> = (0..n).filter_map(|i| valid(&[i]).map(|s| (vec![i], s))).collect();
    loop {
        let mut grown = all.clone();
        for t in all.keys() {
            let mut best: Option<(Vec<usize>, (u64, u64))> = None;
            for j in t.last().unwrap() + 1..n {
                let mut ext = t.clone();
                ext.push(j);
                if let Some(s) = valid(&ext) {
                    let l = s.0 as f64 / s.1 as f64;
                    if best.as_ref().is_none_or(|(_, b)| l > b.0 as f64 / b.1 as f64) {
                        best = Some((ext, s));
                    }
                }
            }
            if let Some((ext, s)) = best {
                grown.insert(ext, s);
            }
        }
        if grown.len() == all.len() {
            return all.into_iter().map(|(t, (cs, csq))| (t, cs, csq)).collect();
        }
        all = grown;
    }
}
