//! Resumable counting: each completed segment is stored as its own
//! [`TallyReport`] file, and a run folds whatever is already on disk.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{ensure, Error, Result};
use crate::sieve::{
    fold_tallies, tally_segments, with_thread_budget, SegmentPlan, SegmentTally, TallyReport,
};

/// Writes `contents` to `path` through a temporary file in the same
/// directory followed by a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Input(format!("{} has no file name", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// File name of the checkpoint for `[lo, hi)` of a run up to `x`.
pub fn checkpoint_name(x: u64, lo: u64, hi: u64) -> String {
    format!("tally-x{x}-{lo:020}-{hi:020}.json")
}

/// Outcome of [`run_checkpointed`].
#[derive(Clone, Debug, PartialEq)]
pub enum RunOutcome {
    Complete(TallyReport),
    /// Stopped early; `done` of `total` segments have checkpoints.
    Interrupted {
        done: usize,
        total: usize,
    },
}

/// Loads an existing checkpoint for segment `i`, if any.
fn load(dir: &Path, plan: &SegmentPlan, i: usize) -> Result<Option<SegmentTally>> {
    let (lo, hi) = plan.segment(i);
    let path = dir.join(checkpoint_name(plan.x, lo, hi));
    if !path.exists() {
        return Ok(None);
    }
    let report = TallyReport::from_json(&fs::read_to_string(&path)?)?;
    ensure!(
        report.x == plan.x && report.tally.range == [lo, hi],
        Invariant,
        "checkpoint {} does not describe [{lo}, {hi}) of x = {}",
        path.display(),
        plan.x
    );
    Ok(Some(report.tally))
}

/// Counts up to `plan.x`, reusing and writing per-segment checkpoints in
/// `dir`. With `stop_after = Some(n)`, at most `n` new segments are computed
/// before returning [`RunOutcome::Interrupted`].
pub fn run_checkpointed(
    plan: &SegmentPlan,
    threads: usize,
    dir: &Path,
    stop_after: Option<usize>,
) -> Result<RunOutcome> {
    fs::create_dir_all(dir)?;
    let total = plan.len();
    let mut parts: Vec<Option<SegmentTally>> = Vec::with_capacity(total);
    for i in 0..total {
        parts.push(load(dir, plan, i)?);
    }
    let mut missing: Vec<usize> = (0..total).filter(|&i| parts[i].is_none()).collect();
    let interrupted = matches!(stop_after, Some(n) if n < missing.len());
    if let Some(n) = stop_after {
        missing.truncate(n);
    }

    if !missing.is_empty() {
        let primes = plan.primes()?;
        // Batches of a few segments per worker keep memory bounded while
        // checkpoints land steadily.
        let batch = threads.max(1) * 2;
        for chunk in missing.chunks(batch) {
            let fresh = with_thread_budget(threads, || tally_segments(plan, &primes, chunk))??;
            for (&i, tally) in chunk.iter().zip(fresh) {
                let (lo, hi) = plan.segment(i);
                let report = TallyReport::new(plan.x, tally);
                write_atomic(
                    &dir.join(checkpoint_name(plan.x, lo, hi)),
                    report.to_json()?.as_bytes(),
                )?;
                parts[i] = Some(report.tally);
            }
        }
    }

    if interrupted {
        let done = parts.iter().filter(|p| p.is_some()).count();
        return Ok(RunOutcome::Interrupted { done, total });
    }
    let tally = fold_tallies(
        parts
            .iter()
            .map(|p| p.as_ref().expect("all segments present")),
    )?;
    ensure!(
        tally.range == [1, plan.x + 1],
        Invariant,
        "checkpoints cover [{}, {}) instead of [1, {})",
        tally.lo(),
        tally.hi(),
        plan.x + 1
    );
    Ok(RunOutcome::Complete(TallyReport::new(plan.x, tally)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::pair_sieve;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn names_sort_by_range() {
        let a = checkpoint_name(10, 1, 65537);
        let b = checkpoint_name(10, 65537, 131073);
        assert!(a < b);
    }

    #[test]
    fn interrupted_run_resumes_identically() {
        let dir = tempfile::tempdir().unwrap();
        let plan = SegmentPlan::new(300_000, 1 << 16).unwrap();
        let first = run_checkpointed(&plan, 2, dir.path(), Some(2)).unwrap();
        assert_eq!(first, RunOutcome::Interrupted { done: 2, total: 5 });
        let RunOutcome::Complete(report) = run_checkpointed(&plan, 3, dir.path(), None).unwrap()
        else {
            panic!("resume did not finish");
        };
        let direct = pair_sieve(300_000, 1 << 16, 1).unwrap();
        assert_eq!(report.to_json().unwrap(), direct.to_json().unwrap());
    }

    #[test]
    fn foreign_checkpoint_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let plan = SegmentPlan::new(200_000, 1 << 16).unwrap();
        let (lo, hi) = plan.segment(0);
        let wrong = pair_sieve(1000, 1 << 16, 1).unwrap();
        fs::write(
            dir.path().join(checkpoint_name(200_000, lo, hi)),
            wrong.to_json().unwrap(),
        )
        .unwrap();
        assert!(matches!(
            run_checkpointed(&plan, 1, dir.path(), None),
            Err(Error::Invariant(_))
        ));
    }
}
