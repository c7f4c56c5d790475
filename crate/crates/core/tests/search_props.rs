mod common;

use std::fs;

use num_traits::ToPrimitive;

use bisyz::bigraded::{binomial, dim_graded_piece, parse_monomial_list, Ambient, Monomial, Polarization};
use bisyz::linsys::LinearSystem;
use bisyz::search::*;
use bisyz::stability::{certify, Strategy};
use common::*;

fn task(m: usize, n: usize, a: u32, b: u32, r: usize) -> SearchTask {
    SearchTask::new(amb(m, n), pol(a, b), r).unwrap()
}

#[test]
fn orbit_sizes_sum_to_raw_count() {
    for (m, n, a, b) in [(1, 1, 2, 1), (1, 1, 2, 2), (1, 1, 3, 2), (1, 2, 1, 1), (2, 1, 1, 2), (2, 2, 1, 1)] {
        let h0 = dim_graded_piece(amb(m, n), pol(a, b).bidegree()) as usize;
        let pure = (m + 1) * (n + 1);
        for r in pure.max(m + n + 1)..=h0 {
            let en = enumerate_supports(&task(m, n, a, b, r));
            let raw = binomial((h0 - pure) as u64, (r - pure) as u64).to_u64().unwrap();
            assert_eq!(en.raw_count, raw);
            let sum: usize = en.supports.iter().map(|(_, o)| o).sum();
            assert_eq!(sum as u64, raw, "({m},{n},{a},{b},{r})");
            let mut sorted = en.supports.clone();
            sorted.sort();
            assert_eq!(sorted, en.supports);

            let mut flat = task(m, n, a, b, r);
            flat.symmetry = false;
            assert_eq!(enumerate_supports(&flat).supports.len() as u64, raw);
        }
    }
}

/// Swap x0 ↔ x1 and y0 ↔ y1 in every monomial.
fn flip(support: &[Monomial]) -> Vec<Monomial> {
    support
        .iter()
        .map(|m| {
            let mut alpha = m.alpha.clone();
            let mut beta = m.beta.clone();
            alpha.swap(0, 1);
            beta.swap(0, 1);
            Monomial { alpha, beta }
        })
        .collect()
}

#[test]
fn verdict_is_symmetric() {
    for (a, b, r) in [(2, 1, 5), (2, 2, 5), (2, 2, 6), (3, 2, 7)] {
        let t = task(1, 1, a, b, r);
        for (support, _) in enumerate_supports(&t).supports {
            let canon = LinearSystem::monomial(t.amb, t.l, support.clone()).unwrap();
            let other = LinearSystem::monomial(t.amb, t.l, flip(&support)).unwrap();
            let v1 = certify(&canon, Strategy::GapThenBruteForce).unwrap().verdict.kind;
            let v2 = certify(&other, Strategy::GapThenBruteForce).unwrap().verdict.kind;
            assert_eq!(v1, v2);
        }
    }
}

#[test]
fn brenner_answers() {
    let rows = brenner_report(Ambient::new(1, 1).unwrap(), Polarization::new(2, 1).unwrap(), Strategy::GapThenBruteForce, 10_000, 1)
        .unwrap();
    let answer = |r: usize| rows.iter().find(|row| row.r == r).unwrap().sweep.as_ref().map(|s| s.answer.clone());
    assert_eq!(answer(5), Some(Answer::No));
    assert!(matches!(answer(4), Some(Answer::Yes { .. })));
    assert!(matches!(answer(6), Some(Answer::Yes { .. })));
    assert_eq!(answer(3), None);
}

#[test]
fn resume_at_every_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let t = task(1, 1, 3, 2, 7);
    let full = dir.path().join("full.jsonl");
    sweep_to_store(&t, &full, 1).unwrap();
    let reference = fs::read(&full).unwrap();
    let total = reference.iter().filter(|&&c| c == b'\n').count();
    assert!(total > 3);
    for cut in 0..total {
        let path = dir.path().join(format!("cut{cut}.jsonl"));
        let mut part = t.clone();
        part.max_supports = Some(cut);
        let s = sweep_to_store(&part, &path, 2).unwrap();
        assert_eq!(s.processed, cut);
        assert!(!s.complete);
        // a torn trailing write is discarded on resume
        fs::OpenOptions::new().append(true).open(&path).map(|mut f| {
            use std::io::Write;
            f.write_all(b"{\"partial").unwrap();
        }).unwrap();
        let s = sweep_to_store(&t, &path, 3).unwrap();
        assert!(s.complete);
        assert_eq!(fs::read(&path).unwrap(), reference, "cut {cut}");
    }
}

#[test]
fn worker_count_is_invisible() {
    let t = task(1, 1, 2, 2, 6);
    let (r1, s1) = sweep(&t, 1).unwrap();
    let (r4, s4) = sweep(&t, 4).unwrap();
    assert_eq!(r1, r4);
    assert_eq!(s1, s4);
    let dir = tempfile::tempdir().unwrap();
    let (p1, p4) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    sweep_to_store(&t, &p1, 1).unwrap();
    sweep_to_store(&t, &p4, 4).unwrap();
    assert_eq!(fs::read(p1).unwrap(), fs::read(p4).unwrap());
}

#[test]
fn records_parse_back() {
    let (records, _) = sweep(&task(1, 1, 2, 2, 5), 1).unwrap();
    for rec in records {
        let line = serde_json::to_string(&rec).unwrap();
        let back: SearchRecord = serde_json::from_str(&line).unwrap();
        let support = parse_monomial_list(&back.support.join(","), amb(1, 1)).unwrap();
        let sys = LinearSystem::monomial(amb(1, 1), pol(2, 2), support).unwrap();
        assert_eq!(certify(&sys, Strategy::GapThenBruteForce).unwrap().content_hash(), back.certificate);
    }
}
