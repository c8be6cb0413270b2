mod common;

use persuaide::matrix::RelationCounts;
use persuaide::substitution::{
    matching_score, relations_containing, score_from_contributions, select_best, CandidatePair, Relation,
    RelationContext, Role, TargetWord,
};
use persuaide::wordnet::DerivedForm;
use persuaide::PosClass;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LEMMAS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn random_case(rng: &mut ChaCha8Rng) -> (RelationCounts, RelationContext, String) {
    let mut m = RelationCounts::new();
    for a in LEMMAS {
        for b in LEMMAS {
            if rng.random_bool(0.6) {
                m.add(a, b, rng.random_range(1..1_000_000));
            }
        }
    }
    let relations = (0..rng.random_range(1..8))
        .map(|_| Relation {
            role: if rng.random_bool(0.5) { Role::ParentOf } else { Role::ChildOf },
            other_lemma: LEMMAS[rng.random_range(0..LEMMAS.len())].to_string(),
        })
        .collect();
    let k = LEMMAS[rng.random_range(0..LEMMAS.len())].to_string();
    (m, RelationContext { word_index: 1, relations }, k)
}

fn product(m: &RelationCounts, ctx: &RelationContext, k: &str) -> f64 {
    ctx.relations
        .iter()
        .map(|r| match r.role {
            Role::ChildOf => m.lookup(&r.other_lemma, k),
            Role::ParentOf => m.lookup(k, &r.other_lemma),
        })
        .map(|f| (f + 1) as f64)
        .product()
}

#[test]
fn score_is_geometric_mean_of_smoothed_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let (m, ctx, k) = random_case(&mut rng);
        let s = matching_score(&m, &ctx, &k);
        let n = ctx.relations.len() as f64;
        let expected = product(&m, &ctx, &k);
        assert!((s.value.powf(n) - expected).abs() <= 1e-9 * expected, "{} vs {expected}", s.value.powf(n));
        assert_eq!(s.contributions.len(), ctx.relations.len());
        assert_eq!(score_from_contributions(&s.contributions), s.value);
    }
}

#[test]
fn raising_an_involved_count_raises_the_score() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let (mut m, ctx, k) = random_case(&mut rng);
        let before = matching_score(&m, &ctx, &k).value;
        let r = &ctx.relations[rng.random_range(0..ctx.relations.len())];
        match r.role {
            Role::ChildOf => m.add(&r.other_lemma, &k, 1),
            Role::ParentOf => m.add(&k, &r.other_lemma, 1),
        }
        assert!(matching_score(&m, &ctx, &k).value > before);
    }
}

#[test]
fn empty_context_scores_zero() {
    let ctx = RelationContext { word_index: 1, relations: Vec::new() };
    assert_eq!(matching_score(&RelationCounts::new(), &ctx, "x").value, 0.0);
}

#[test]
fn unseen_relations_floor_at_one() {
    let (_, ctx, k) = random_case(&mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(matching_score(&RelationCounts::new(), &ctx, &k).value, 1.0);
}

#[test]
fn context_roles_follow_edge_direction() {
    let s = common::parse_one(
        "1\tbig\tbig\tADJ\t_\t_\t2\tamod\t_\t_\n\
         2\tdogs\tdog\tNOUN\t_\t_\t3\tnsubj\t_\t_\n\
         3\tbark\tbark\tVERB\t_\t_\t0\troot\t_\t_\n\
         4\t!\t!\tPUNCT\t_\t_\t3\tpunct\t_\t_\n",
    );
    let ctx = relations_containing(&s, 2);
    let roles: Vec<_> = ctx.relations.iter().map(|r| (r.role, r.other_lemma.as_str())).collect();
    assert_eq!(roles, vec![(Role::ChildOf, "bark"), (Role::ParentOf, "big")]);
    assert!(relations_containing(&s, 3).relations.iter().all(|r| r.other_lemma != "!"));
}

fn pair(w: usize, k: &str, score: f64) -> CandidatePair {
    CandidatePair {
        w: TargetWord {
            index: w,
            surface: format!("w{w}"),
            lemma: format!("w{w}"),
            pos_class: PosClass::Noun,
        },
        k: DerivedForm::new(k, PosClass::Noun),
        score,
        contributions: Vec::new(),
    }
}

/// Exhaustive scan: highest score, then leftmost word, then smallest lemma.
fn brute_force(table: &[CandidatePair]) -> Option<(usize, String, f64)> {
    let best = table.iter().map(|p| p.score).fold(f64::NEG_INFINITY, f64::max);
    let mut top: Vec<_> = table.iter().filter(|p| p.score == best).collect();
    let leftmost = top.iter().map(|p| p.w.index).min()?;
    top.retain(|p| p.w.index == leftmost);
    let smallest = top.iter().map(|p| p.k.lemma.clone()).min()?;
    Some((leftmost, smallest, best))
}

fn key(p: Option<&CandidatePair>) -> Option<(usize, String, f64)> {
    p.map(|p| (p.w.index, p.k.lemma.clone(), p.score))
}

pub fn random_table(rng: &mut ChaCha8Rng, rows: usize) -> Vec<CandidatePair> {
    let mut cells: Vec<(usize, &str)> = (1..=10).flat_map(|w| LEMMAS.iter().map(move |k| (w, *k))).collect();
    cells.shuffle(rng);
    cells
        .into_iter()
        .take(rows)
        .map(|(w, k)| pair(w, k, [1.0, 1.5, 2.0, 3.25][rng.random_range(0..4)]))
        .collect()
}

#[test]
fn select_best_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for rows in 0..=50 {
        for _ in 0..40 {
            let mut table = random_table(&mut rng, rows);
            let expected = brute_force(&table);
            assert_eq!(key(select_best(&table)), expected);
            table.shuffle(&mut rng);
            assert_eq!(key(select_best(&table)), expected);
        }
    }
}

proptest! {
    #[test]
    fn select_best_is_permutation_invariant(seed in any::<u64>(), rows in 0usize..=50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = random_table(&mut rng, rows);
        let before = key(select_best(&table));
        table.reverse();
        prop_assert_eq!(key(select_best(&table)), before.clone());
        prop_assert_eq!(before, brute_force(&table));
    }
}
