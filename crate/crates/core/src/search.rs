//! Exhaustive sweeps over monomial supports, quotiented by variable
//! permutations, with a resumable JSONL result store.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bigraded::{binomial, enumerate_monomials, Ambient, Monomial, Polarization};
use crate::constructions::{range_classify, RangeClass};
use crate::error::{Error, Result};
use crate::linsys::{pure_power_set, LinearSystem};
use crate::stability::{certify, StabilityVerdict, Strategy, VerdictKind};
use crate::syzygy::subsets;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchTask {
    pub amb: Ambient,
    pub l: Polarization,
    pub r: usize,
    pub strategy: Strategy,
    pub symmetry: bool,
    /// Stop once this many canonical supports are recorded in total.
    pub max_supports: Option<usize>,
    pub time_budget: Option<Duration>,
}

impl SearchTask {
    pub fn new(amb: Ambient, l: Polarization, r: usize) -> Result<Self> {
        let h0 = crate::bigraded::dim_graded_piece(amb, l.bidegree());
        if r < amb.dim() + 1 || r as u64 > h0 {
            return Err(Error::InvalidParameter(format!(
                "r={r} must lie in [{}, {h0}]",
                amb.dim() + 1
            )));
        }
        Ok(Self {
            amb,
            l,
            r,
            strategy: Strategy::GapThenBruteForce,
            symmetry: true,
            max_supports: None,
            time_budget: None,
        })
    }

    /// Hash of the parameters that determine the record stream; limits are
    /// not part of it.
    pub fn hash(&self) -> String {
        let key = serde_json::json!({
            "m": self.amb.m, "n": self.amb.n, "a": self.l.a, "b": self.l.b, "r": self.r,
            "strategy": self.strategy, "symmetry": self.symmetry,
        });
        hex::encode(Sha256::digest(key.to_string().as_bytes()))
    }
}

/// A permutation of the variables: images of the x-indices and y-indices,
/// and whether the two factors are exchanged.
#[derive(Debug, Clone)]
struct Symmetry {
    xs: Vec<usize>,
    ys: Vec<usize>,
    swap: bool,
}

impl Symmetry {
    fn apply(&self, mono: &Monomial) -> Monomial {
        let mut alpha = vec![0; mono.alpha.len()];
        let mut beta = vec![0; mono.beta.len()];
        for (i, &e) in mono.alpha.iter().enumerate() {
            alpha[self.xs[i]] = e;
        }
        for (j, &e) in mono.beta.iter().enumerate() {
            beta[self.ys[j]] = e;
        }
        if self.swap {
            Monomial { alpha: beta, beta: alpha }
        } else {
            Monomial { alpha, beta }
        }
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

fn symmetry_group(amb: Ambient, l: Polarization) -> Vec<Symmetry> {
    let swaps: &[bool] = if amb.m == amb.n && l.a == l.b { &[false, true] } else { &[false] };
    let mut out = Vec::new();
    for xs in permutations(amb.m + 1) {
        for ys in permutations(amb.n + 1) {
            for &swap in swaps {
                out.push(Symmetry { xs: xs.clone(), ys: ys.clone(), swap });
            }
        }
    }
    out
}

/// Lexicographically least image of a sorted support and its orbit size.
fn canonical_form(support: &[Monomial], group: &[Symmetry]) -> (Vec<Monomial>, usize) {
    let mut images: Vec<Vec<Monomial>> = group
        .iter()
        .map(|g| {
            let mut img: Vec<Monomial> = support.iter().map(|m| g.apply(m)).collect();
            img.sort();
            img
        })
        .collect();
    images.sort();
    images.dedup();
    let orbit = images.len();
    (images.swap_remove(0), orbit)
}

/// Canonical supports of a task with their orbit sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportEnumeration {
    pub supports: Vec<(Vec<Monomial>, usize)>,
    /// `C(h^0 − (m+1)(n+1), r − (m+1)(n+1))`.
    pub raw_count: u64,
    pub diagnostic: Option<String>,
}

/// Size-`r` supports containing every pure power, one per symmetry orbit
/// when `task.symmetry` is set, sorted.
pub fn enumerate_supports(task: &SearchTask) -> SupportEnumeration {
    let (amb, l, r) = (task.amb, task.l, task.r);
    let pure = pure_power_set(amb, l);
    if r < pure.len() {
        return SupportEnumeration {
            supports: Vec::new(),
            raw_count: 0,
            diagnostic: Some(format!(
                "no basepoint-free monomial support: r={r} < (m+1)(n+1)={}",
                pure.len()
            )),
        };
    }
    let extras: Vec<Monomial> = enumerate_monomials(amb, l.bidegree())
        .into_iter()
        .filter(|m| !m.is_pure_power())
        .collect();
    let k = r - pure.len();
    let raw_count = binomial(extras.len() as u64, k as u64).try_into().unwrap_or(u64::MAX);
    let group = if task.symmetry { symmetry_group(amb, l) } else { Vec::new() };
    let mut supports: Vec<(Vec<Monomial>, usize)> = subsets(extras.len(), k)
        .into_par_iter()
        .filter_map(|pick| {
            let mut support: Vec<Monomial> = pure.iter().cloned().chain(pick.iter().map(|&i| extras[i].clone())).collect();
            support.sort();
            if group.is_empty() {
                return Some((support, 1));
            }
            let (canon, orbit) = canonical_form(&support, &group);
            (canon == support).then_some((support, orbit))
        })
        .collect();
    supports.sort();
    SupportEnumeration { supports, raw_count, diagnostic: None }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub m: usize,
    pub n: usize,
    pub a: u32,
    pub b: u32,
    pub r: usize,
    pub support: Vec<String>,
    pub orbit_size: usize,
    pub verdict: StabilityVerdict,
    pub certificate: String,
}

fn certify_support(task: &SearchTask, support: &[Monomial], orbit: usize) -> Result<SearchRecord> {
    let sys = LinearSystem::monomial(task.amb, task.l, support.to_vec())?;
    let cert = certify(&sys, task.strategy)?;
    Ok(SearchRecord {
        m: task.amb.m,
        n: task.amb.n,
        a: task.l.a,
        b: task.l.b,
        r: task.r,
        support: support.iter().map(|m| m.to_string()).collect(),
        orbit_size: orbit,
        certificate: cert.content_hash(),
        verdict: cert.verdict,
    })
}

/// Answer to the existence question for one `(m,n,a,b,r)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum Answer {
    /// A stable support was found.
    Yes { support: Vec<String> },
    /// Every support is unstable.
    No,
    /// Some support is inconclusive and none is stable.
    Open,
    NoBpfMonomialSupport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub answer: Answer,
    pub canonical_supports: usize,
    pub processed: usize,
    pub raw_supports: u64,
    pub complete: bool,
    pub stable: usize,
    pub not_stable: usize,
    pub not_semistable: usize,
    pub inconclusive: usize,
}

fn summarize(records: &[SearchRecord], total: usize, raw: u64, no_bpf: bool) -> SweepSummary {
    let count = |k: VerdictKind| records.iter().filter(|r| r.verdict.kind == k).count();
    let stable = records.iter().find(|r| r.verdict.kind == VerdictKind::StableCertified);
    let complete = records.len() == total;
    let inconclusive = count(VerdictKind::Inconclusive);
    let answer = if no_bpf {
        Answer::NoBpfMonomialSupport
    } else if let Some(rec) = stable {
        Answer::Yes { support: rec.support.clone() }
    } else if complete && inconclusive == 0 {
        Answer::No
    } else {
        Answer::Open
    };
    SweepSummary {
        answer,
        canonical_supports: total,
        processed: records.len(),
        raw_supports: raw,
        complete,
        stable: count(VerdictKind::StableCertified),
        not_stable: count(VerdictKind::NotStable),
        not_semistable: count(VerdictKind::NotSemistable),
        inconclusive,
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {jobs} workers: {e}")))
}

/// Certify supports `[start, end)` in parallel; results keep their order.
fn run_batch(
    task: &SearchTask,
    supports: &[(Vec<Monomial>, usize)],
    pool: &rayon::ThreadPool,
) -> Result<Vec<SearchRecord>> {
    pool.install(|| {
        supports
            .par_iter()
            .map(|(s, orbit)| certify_support(task, s, *orbit))
            .collect()
    })
}

fn stop_at(task: &SearchTask, total: usize) -> usize {
    task.max_supports.map_or(total, |cap| cap.min(total))
}

/// Sweep without persistence.
pub fn sweep(task: &SearchTask, jobs: usize) -> Result<(Vec<SearchRecord>, SweepSummary)> {
    let en = enumerate_supports(task);
    let pool = pool(jobs)?;
    let start = Instant::now();
    let end = stop_at(task, en.supports.len());
    let batch = (jobs.max(1) * 4).max(8);
    let mut records = Vec::with_capacity(end);
    while records.len() < end {
        if task.time_budget.is_some_and(|b| start.elapsed() >= b) {
            break;
        }
        let hi = (records.len() + batch).min(end);
        records.extend(run_batch(task, &en.supports[records.len()..hi], &pool)?);
    }
    let summary = summarize(&records, en.supports.len(), en.raw_count, en.diagnostic.is_some());
    Ok((records, summary))
}

/// Checkpoint path next to a result file: `<file>.ckpt`.
pub fn checkpoint_path(results: &Path) -> PathBuf {
    let mut name = results.as_os_str().to_owned();
    name.push(".ckpt");
    PathBuf::from(name)
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_checkpoint(path: &Path) -> Result<Option<(usize, String)>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path)?;
    let mut parts = text.split_whitespace();
    let count = parts
        .next()
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad checkpoint {}", path.display())))?;
    let hash = parts
        .next()
        .ok_or_else(|| Error::Parse(format!("bad checkpoint {}", path.display())))?;
    Ok(Some((count, hash.to_string())))
}

fn read_records(path: &Path, count: usize) -> Result<Vec<SearchRecord>> {
    let f = File::open(path)?;
    let mut out = Vec::with_capacity(count);
    for line in BufReader::new(f).lines().take(count) {
        out.push(serde_json::from_str(&line?)?);
    }
    if out.len() < count {
        return Err(Error::CheckpointMismatch(format!(
            "checkpoint claims {count} records, file has {}",
            out.len()
        )));
    }
    Ok(out)
}

fn record_lines(records: &[SearchRecord]) -> Result<String> {
    let mut text = String::new();
    for rec in records {
        text.push_str(&serde_json::to_string(rec)?);
        text.push('\n');
    }
    Ok(text)
}

/// Sweep into a JSONL file, resuming from its checkpoint when one exists.
/// Records are appended batch by batch; the checkpoint is replaced
/// atomically after each batch, and on resume the file is cut back to the
/// checkpointed count.
pub fn sweep_to_store(task: &SearchTask, results: &Path, jobs: usize) -> Result<SweepSummary> {
    let en = enumerate_supports(task);
    let ckpt = checkpoint_path(results);
    let hash = task.hash();
    let mut records = match read_checkpoint(&ckpt)? {
        Some((count, h)) if h == hash => {
            let recs = read_records(results, count)?;
            write_atomic(results, record_lines(&recs)?.as_bytes())?;
            recs
        }
        Some((_, h)) => {
            return Err(Error::CheckpointMismatch(format!(
                "{} belongs to task {h}, not {hash}",
                ckpt.display()
            )))
        }
        None => {
            write_atomic(results, b"")?;
            Vec::new()
        }
    };
    write_atomic(&ckpt, format!("{} {hash}\n", records.len()).as_bytes())?;

    let pool = pool(jobs)?;
    let start = Instant::now();
    let end = stop_at(task, en.supports.len());
    let batch = (jobs.max(1) * 4).max(8);
    while records.len() < end {
        if task.time_budget.is_some_and(|b| start.elapsed() >= b) {
            break;
        }
        let hi = (records.len() + batch).min(end);
        let fresh = run_batch(task, &en.supports[records.len()..hi], &pool)?;
        let mut f = OpenOptions::new().append(true).open(results)?;
        f.write_all(record_lines(&fresh)?.as_bytes())?;
        f.sync_all()?;
        records.extend(fresh);
        write_atomic(&ckpt, format!("{} {hash}\n", records.len()).as_bytes())?;
    }
    Ok(summarize(&records, en.supports.len(), en.raw_count, en.diagnostic.is_some()))
}

/// What the range theorems predict for one `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    /// A general basepoint-free system of this size has a stable syzygy bundle.
    Stable,
    /// Not covered by the theorems.
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrennerRow {
    pub r: usize,
    pub class: RangeClass,
    pub prediction: Prediction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One row per `r` from `m+n+1` to `h^0`. Sweeps with more than `max_raw`
/// raw supports are skipped.
pub fn brenner_report(amb: Ambient, l: Polarization, strategy: Strategy, max_raw: u64, jobs: usize) -> Result<Vec<BrennerRow>> {
    let h0 = crate::bigraded::dim_graded_piece(amb, l.bidegree()) as usize;
    let mut rows = Vec::new();
    for r in amb.dim() + 1..=h0 {
        let class = range_classify(amb.m, amb.n, l.a, l.b, r)?.class;
        let prediction = match class {
            RangeClass::RangeA | RangeClass::RangeB => Prediction::Stable,
            _ => Prediction::Open,
        };
        let mut task = SearchTask::new(amb, l, r)?;
        task.strategy = strategy;
        let en_raw = if r < (amb.m + 1) * (amb.n + 1) {
            None
        } else {
            let extras = h0 - (amb.m + 1) * (amb.n + 1);
            Some(binomial(extras as u64, (r - (amb.m + 1) * (amb.n + 1)) as u64))
        };
        let (sweep, note) = match en_raw {
            None => (None, Some("no basepoint-free monomial support".to_string())),
            Some(raw) if raw > max_raw.into() => (None, Some(format!("sweep skipped: {raw} raw supports"))),
            Some(_) => (Some(sweep(&task, jobs)?.1), None),
        };
        rows.push(BrennerRow { r, class, prediction, sweep, note });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(a: u32, b: u32, r: usize) -> SearchTask {
        SearchTask::new(Ambient::new(1, 1).unwrap(), Polarization::new(a, b).unwrap(), r).unwrap()
    }

    #[test]
    fn orbit_counts() {
        let en = enumerate_supports(&task(2, 1, 5));
        assert_eq!(en.raw_count, 2);
        assert_eq!(en.supports.len(), 1);
        assert_eq!(en.supports[0].1, 2);

        let en = enumerate_supports(&task(2, 1, 4));
        assert_eq!(en.supports.len(), 1);
        assert_eq!(en.supports[0].1, 1);

        let en = enumerate_supports(&task(2, 2, 5));
        assert_eq!(en.raw_count, 5);
        assert_eq!(en.supports.len(), 2);
        let total: usize = en.supports.iter().map(|(_, o)| o).sum();
        assert_eq!(total, 5);

        let en = enumerate_supports(&task(2, 1, 3));
        assert!(en.supports.is_empty());
        assert!(en.diagnostic.is_some());
    }

    #[test]
    fn canonical_is_least() {
        let t = task(2, 2, 6);
        let group = symmetry_group(t.amb, t.l);
        assert_eq!(group.len(), 8);
        for (s, _) in enumerate_supports(&t).supports {
            for g in &group {
                let mut img: Vec<Monomial> = s.iter().map(|m| g.apply(m)).collect();
                img.sort();
                assert!(s <= img);
            }
        }
    }

    #[test]
    fn example_answers() {
        assert_eq!(sweep(&task(2, 1, 5), 1).unwrap().1.answer, Answer::No);
        assert!(matches!(sweep(&task(2, 1, 4), 1).unwrap().1.answer, Answer::Yes { .. }));
        assert!(matches!(sweep(&task(2, 1, 6), 2).unwrap().1.answer, Answer::Yes { .. }));
    }

    #[test]
    fn store_resume() {
        let dir = tempfile::tempdir().unwrap();
        let full = dir.path().join("full.jsonl");
        let part = dir.path().join("part.jsonl");
        let t = task(2, 2, 6);
        let s1 = sweep_to_store(&t, &full, 1).unwrap();
        let mut limited = t.clone();
        limited.max_supports = Some(1);
        let s2 = sweep_to_store(&limited, &part, 3).unwrap();
        assert!(!s2.complete);
        let s3 = sweep_to_store(&t, &part, 3).unwrap();
        assert_eq!(s1, s3);
        assert_eq!(fs::read(&full).unwrap(), fs::read(&part).unwrap());

        let other = task(2, 2, 7);
        assert!(matches!(sweep_to_store(&other, &part, 1), Err(Error::CheckpointMismatch(_))));
    }
}
