//! Data-parallel substrate shared by every benchmark.
//!
//! All primitives block until every body invocation has finished, so each
//! call ends with an implicit barrier. A pool with one worker runs every
//! primitive as the plain ascending sequential loop.

use std::marker::PhantomData;
use std::ops::Range;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};

use rayon::prelude::*;

use crate::error::{panic_message, NpbError, Result};

/// Worker pool configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolConfig {
    pub workers: usize,
    /// Per-worker stack size in bytes; `None` keeps the platform default.
    pub stack_size: Option<usize>,
    /// Reduce floating-point values over a fixed static partition so the
    /// result depends only on the worker count.
    pub deterministic_reductions: bool,
}

impl PoolConfig {
    pub fn new(workers: usize) -> Self {
        Self {
            workers,
            stack_size: None,
            deterministic_reductions: false,
        }
    }

    pub fn stack_size(mut self, bytes: usize) -> Self {
        self.stack_size = Some(bytes);
        self
    }

    pub fn deterministic_reductions(mut self, on: bool) -> Self {
        self.deterministic_reductions = on;
        self
    }
}

/// A fixed-size worker pool created once per run.
pub struct Pool {
    pool: rayon::ThreadPool,
    config: PoolConfig,
}

impl std::fmt::Debug for Pool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pool")
            .field("config", &self.config)
            .finish()
    }
}

/// Processing order of an [`Pool::ordered_pipeline`] sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Planes ascend; block `b` waits on block `b - 1`.
    Ascending,
    /// Planes descend; block `b` waits on block `b + 1`.
    Descending,
}

/// One stage execution recorded by [`Pool::ordered_pipeline_logged`].
/// Sequence numbers come from one global counter: `start` is taken after
/// all dependencies were observed published, `end` when the stage's own
/// ticket is published.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TicketEvent {
    pub plane: usize,
    pub block: usize,
    pub start: usize,
    pub end: usize,
}

/// Splits `range` into `n_workers` contiguous pieces whose sizes differ by at
/// most one and returns piece `worker_id`. Earlier pieces get the extra items.
pub fn static_partition(range: Range<usize>, worker_id: usize, n_workers: usize) -> Range<usize> {
    assert!(
        n_workers >= 1 && worker_id < n_workers,
        "worker id out of range"
    );
    let len = range.end.saturating_sub(range.start);
    let base = len / n_workers;
    let extra = len % n_workers;
    let lo = range.start + worker_id * base + worker_id.min(extra);
    let hi = lo + base + usize::from(worker_id < extra);
    lo..hi
}

impl Pool {
    pub fn new(config: PoolConfig) -> Result<Self> {
        if config.workers == 0 {
            return Err(NpbError::InvalidArgument(
                "worker count must be at least 1".into(),
            ));
        }
        let mut builder = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .thread_name(|i| format!("npb-worker-{i}"));
        if let Some(bytes) = config.stack_size {
            builder = builder.stack_size(bytes);
        }
        let pool = builder
            .build()
            .map_err(|e| NpbError::PoolBuild(e.to_string()))?;
        Ok(Self { pool, config })
    }

    /// Single-worker pool; every primitive degenerates to a sequential loop.
    pub fn sequential() -> Self {
        Self::new(PoolConfig::new(1)).expect("single-thread pool")
    }

    pub fn workers(&self) -> usize {
        self.config.workers
    }

    pub fn config(&self) -> PoolConfig {
        self.config
    }

    fn is_sequential(&self) -> bool {
        self.config.workers == 1
    }

    /// Runs `f` on a pool worker.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Applies `body` once per index. Bodies for different indices must not
    /// share mutable state.
    pub fn par_map<F>(&self, range: Range<usize>, body: F)
    where
        F: Fn(usize) + Sync + Send,
    {
        if self.is_sequential() {
            range.for_each(body);
        } else {
            self.pool.install(|| range.into_par_iter().for_each(body));
        }
    }

    /// [`par_map`](Self::par_map) that reports a panicking body as an error
    /// instead of unwinding into the caller.
    pub fn try_par_map<F>(&self, range: Range<usize>, body: F) -> Result<()>
    where
        F: Fn(usize) + Sync + Send,
    {
        catch_unwind(AssertUnwindSafe(|| self.par_map(range, body)))
            .map_err(|p| NpbError::WorkerPanicked(panic_message(&*p)))
    }

    /// Maps every index and folds the values with `combine`, starting from
    /// `identity`. `combine` must be associative with `identity` neutral; the
    /// shape of the combine tree is unspecified unless deterministic
    /// reductions are enabled.
    pub fn par_map_reduce<V, M, C>(&self, range: Range<usize>, identity: V, map: M, combine: C) -> V
    where
        V: Clone + Send + Sync,
        M: Fn(usize) -> V + Sync + Send,
        C: Fn(V, V) -> V + Sync + Send,
    {
        if self.is_sequential() {
            return range.fold(identity, |acc, i| combine(acc, map(i)));
        }
        if self.config.deterministic_reductions {
            let n = self.config.workers;
            let partials: Vec<V> = self.pool.install(|| {
                (0..n)
                    .into_par_iter()
                    .map(|w| {
                        static_partition(range.clone(), w, n)
                            .fold(identity.clone(), |acc, i| combine(acc, map(i)))
                    })
                    .collect()
            });
            return partials.into_iter().fold(identity, &combine);
        }
        self.pool.install(|| {
            range
                .into_par_iter()
                .map(&map)
                .reduce(|| identity.clone(), &combine)
        })
    }

    /// Hands out consecutive `chunk_len` pieces of `data` to `body`, which
    /// receives the chunk index and exclusive access to the chunk.
    pub fn par_chunks_mut<T, F>(&self, data: &mut [T], chunk_len: usize, body: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        assert!(chunk_len > 0);
        if self.is_sequential() {
            data.chunks_mut(chunk_len)
                .enumerate()
                .for_each(|(i, c)| body(i, c));
        } else {
            self.pool.install(|| {
                data.par_chunks_mut(chunk_len)
                    .enumerate()
                    .for_each(|(i, c)| body(i, c))
            });
        }
    }

    /// Applies `body(j, target)` once per index with shared write access to
    /// `target`.
    ///
    /// This is the disjoint-write pattern for loops whose parallel index is
    /// not the storage's leading dimension. The caller must guarantee that
    /// the body for index `j` only touches elements of `target` addressed by
    /// `j` (or by values computed injectively from `j`). Violations are data
    /// races that this primitive cannot detect, which is why writing through
    /// the [`DisjointSlice`] view is `unsafe` and every call site documents
    /// its disjointness argument.
    pub fn par_map_disjoint<T, F>(&self, range: Range<usize>, target: &mut [T], body: F)
    where
        T: Send,
        F: Fn(usize, &DisjointSlice<'_, T>) + Sync + Send,
    {
        let view = DisjointSlice::new(target);
        self.par_map(range, |j| body(j, &view));
    }

    /// Runs `body` once on every worker with a shared group barrier.
    pub fn broadcast<F>(&self, body: F)
    where
        F: Fn(WorkerContext<'_>) + Sync,
    {
        let n = self.config.workers;
        let barrier = GroupBarrier::new(n);
        let failure: Mutex<Option<String>> = Mutex::new(None);
        let run = |index: usize| {
            let ctx = WorkerContext {
                index,
                count: n,
                barrier: &barrier,
            };
            if let Err(p) = catch_unwind(AssertUnwindSafe(|| body(ctx))) {
                barrier.poison();
                failure
                    .lock()
                    .unwrap()
                    .get_or_insert_with(|| panic_message(&*p));
            }
        };
        if self.is_sequential() {
            run(0);
        } else {
            self.pool.broadcast(|ctx| run(ctx.index()));
        }
        if let Some(msg) = failure.into_inner().unwrap() {
            panic!("{msg}");
        }
    }

    /// Executes `stage(plane, block)` for every plane in `planes` and every
    /// block in `0..blocks`, in wavefront order.
    ///
    /// A stage starts only after its predecessor plane for the same block and
    /// its predecessor block on the same plane have published their tickets
    /// (predecessors follow `direction`). Blocks are distributed round-robin
    /// over the workers, one dedicated thread each, so blocking waits cannot
    /// starve.
    pub fn ordered_pipeline<F>(
        &self,
        planes: Range<usize>,
        blocks: usize,
        direction: Direction,
        stage: F,
    ) where
        F: Fn(usize, usize) + Sync,
    {
        if let Err(e) = self.run_pipeline(planes, blocks, direction, &stage, None) {
            panic!("{e}");
        }
    }

    /// [`ordered_pipeline`](Self::ordered_pipeline) returning an error when a
    /// stage panics. Outstanding stages are cancelled.
    pub fn try_ordered_pipeline<F>(
        &self,
        planes: Range<usize>,
        blocks: usize,
        direction: Direction,
        stage: F,
    ) -> Result<()>
    where
        F: Fn(usize, usize) + Sync,
    {
        self.run_pipeline(planes, blocks, direction, &stage, None)
    }

    /// Same as [`ordered_pipeline`](Self::ordered_pipeline) but records every
    /// stage execution.
    pub fn ordered_pipeline_logged<F>(
        &self,
        planes: Range<usize>,
        blocks: usize,
        direction: Direction,
        stage: F,
    ) -> Vec<TicketEvent>
    where
        F: Fn(usize, usize) + Sync,
    {
        let log = Mutex::new(Vec::new());
        if let Err(e) = self.run_pipeline(planes, blocks, direction, &stage, Some(&log)) {
            panic!("{e}");
        }
        log.into_inner().unwrap()
    }

    fn run_pipeline<F>(
        &self,
        planes: Range<usize>,
        blocks: usize,
        direction: Direction,
        stage: &F,
        log: Option<&Mutex<Vec<TicketEvent>>>,
    ) -> Result<()>
    where
        F: Fn(usize, usize) + Sync,
    {
        let nplanes = planes.end.saturating_sub(planes.start);
        if nplanes == 0 || blocks == 0 {
            return Ok(());
        }
        let tickets = Tickets::new(blocks);
        let seq = AtomicUsize::new(0);
        let plane_at = |t: usize| match direction {
            Direction::Ascending => planes.start + t,
            Direction::Descending => planes.end - 1 - t,
        };
        let predecessor = |b: usize| match direction {
            Direction::Ascending => b.checked_sub(1),
            Direction::Descending => (b + 1 < blocks).then_some(b + 1),
        };

        let run_block = |b: usize| -> bool {
            for t in 0..nplanes {
                if let Some(p) = predecessor(b) {
                    if !tickets.wait_for(p, t + 1) {
                        return false;
                    }
                }
                let start = seq.fetch_add(1, Ordering::SeqCst);
                let k = plane_at(t);
                if let Err(p) = catch_unwind(AssertUnwindSafe(|| stage(k, b))) {
                    tickets.fail(panic_message(&*p));
                    return false;
                }
                let end = seq.fetch_add(1, Ordering::SeqCst);
                if let Some(log) = log {
                    log.lock().unwrap().push(TicketEvent {
                        plane: k,
                        block: b,
                        start,
                        end,
                    });
                }
                tickets.publish(b, t + 1);
            }
            true
        };

        let n = self.config.workers;
        let worker_body = |w: usize| {
            // Each worker walks its blocks in dependency order.
            let mut mine: Vec<usize> = (w..blocks).step_by(n).collect();
            if direction == Direction::Descending {
                mine.reverse();
            }
            for b in mine {
                if !run_block(b) {
                    break;
                }
            }
        };
        if self.is_sequential() {
            worker_body(0);
        } else {
            self.pool.broadcast(|ctx| worker_body(ctx.index()));
        }
        match tickets.failure() {
            Some(msg) => Err(NpbError::WorkerPanicked(msg)),
            None => Ok(()),
        }
    }
}

/// Counts the dependency violations in a pipeline log and checks that every
/// (plane, block) stage ran exactly once. Returns `(violations, executions)`.
pub fn audit_pipeline_log(
    log: &[TicketEvent],
    planes: Range<usize>,
    blocks: usize,
    direction: Direction,
) -> (usize, usize) {
    use std::collections::HashMap;
    let mut by_key: HashMap<(usize, usize), Vec<&TicketEvent>> = HashMap::new();
    for e in log {
        by_key.entry((e.plane, e.block)).or_default().push(e);
    }
    let mut violations = 0;
    for k in planes.clone() {
        for b in 0..blocks {
            let Some(events) = by_key.get(&(k, b)) else {
                violations += 1;
                continue;
            };
            if events.len() != 1 {
                violations += 1;
                continue;
            }
            let e = events[0];
            let prev_plane = match direction {
                Direction::Ascending => (k > planes.start).then(|| k - 1),
                Direction::Descending => (k + 1 < planes.end).then_some(k + 1),
            };
            let prev_block = match direction {
                Direction::Ascending => b.checked_sub(1),
                Direction::Descending => (b + 1 < blocks).then_some(b + 1),
            };
            for dep in [prev_plane.map(|p| (p, b)), prev_block.map(|q| (k, q))]
                .into_iter()
                .flatten()
            {
                match by_key.get(&dep) {
                    Some(d) if d.len() == 1 && d[0].end < e.start => {}
                    _ => violations += 1,
                }
            }
        }
    }
    (violations, log.len())
}

struct Tickets {
    progress: Vec<AtomicUsize>,
    aborted: AtomicBool,
    failure: Mutex<Option<String>>,
    lock: Mutex<()>,
    cv: Condvar,
}

impl Tickets {
    fn new(blocks: usize) -> Self {
        Self {
            progress: (0..blocks).map(|_| AtomicUsize::new(0)).collect(),
            aborted: AtomicBool::new(false),
            failure: Mutex::new(None),
            lock: Mutex::new(()),
            cv: Condvar::new(),
        }
    }

    /// Blocks until `block` has published at least `count` planes. Returns
    /// false if the pipeline was aborted.
    fn wait_for(&self, block: usize, count: usize) -> bool {
        if self.progress[block].load(Ordering::Acquire) >= count {
            return true;
        }
        let mut guard = self.lock.lock().unwrap();
        loop {
            if self.aborted.load(Ordering::Acquire) {
                return false;
            }
            if self.progress[block].load(Ordering::Acquire) >= count {
                return true;
            }
            guard = self.cv.wait(guard).unwrap();
        }
    }

    fn publish(&self, block: usize, count: usize) {
        let _guard = self.lock.lock().unwrap();
        self.progress[block].store(count, Ordering::Release);
        self.cv.notify_all();
    }

    fn fail(&self, msg: String) {
        self.failure.lock().unwrap().get_or_insert(msg);
        let _guard = self.lock.lock().unwrap();
        self.aborted.store(true, Ordering::Release);
        self.cv.notify_all();
    }

    fn failure(&self) -> Option<String> {
        self.failure.lock().unwrap().clone()
    }
}

/// Handle passed to each [`Pool::broadcast`] body.
#[derive(Clone, Copy)]
pub struct WorkerContext<'a> {
    pub index: usize,
    pub count: usize,
    barrier: &'a GroupBarrier,
}

impl WorkerContext<'_> {
    /// No group member proceeds past this point until all have reached it.
    /// Writes made before the barrier are visible to every member after it.
    pub fn barrier(&self) {
        self.barrier.wait();
    }
}

struct GroupBarrier {
    size: usize,
    state: Mutex<(usize, usize, bool)>, // (arrived, generation, poisoned)
    cv: Condvar,
}

impl GroupBarrier {
    fn new(size: usize) -> Self {
        Self {
            size,
            state: Mutex::new((0, 0, false)),
            cv: Condvar::new(),
        }
    }

    fn wait(&self) {
        if self.size == 1 {
            return;
        }
        let mut st = self.state.lock().unwrap();
        if st.2 {
            panic!("barrier abandoned by a failed group member");
        }
        let gen = st.1;
        st.0 += 1;
        if st.0 == self.size {
            st.0 = 0;
            st.1 = st.1.wrapping_add(1);
            self.cv.notify_all();
            return;
        }
        while st.1 == gen && !st.2 {
            st = self.cv.wait(st).unwrap();
        }
        if st.1 == gen {
            panic!("barrier abandoned by a failed group member");
        }
    }

    fn poison(&self) {
        let mut st = self.state.lock().unwrap();
        st.2 = true;
        self.cv.notify_all();
    }
}

/// Shared, unsynchronized write access to a slice for
/// [`Pool::par_map_disjoint`] bodies.
pub struct DisjointSlice<'a, T> {
    ptr: *mut T,
    len: usize,
    _borrow: PhantomData<&'a mut [T]>,
}

// SAFETY: the view is only handed to bodies whose callers promise
// index-disjoint access; `T: Send` is required to move values across workers.
unsafe impl<T: Send> Send for DisjointSlice<'_, T> {}
unsafe impl<T: Send> Sync for DisjointSlice<'_, T> {}

impl<'a, T> DisjointSlice<'a, T> {
    pub fn new(data: &'a mut [T]) -> Self {
        Self {
            ptr: data.as_mut_ptr(),
            len: data.len(),
            _borrow: PhantomData,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// # Safety
    /// No other body may access element `i` concurrently.
    #[inline(always)]
    #[allow(clippy::mut_from_ref)]
    pub unsafe fn get_mut(&self, i: usize) -> &mut T {
        assert!(
            i < self.len,
            "index {i} out of bounds for length {}",
            self.len
        );
        &mut *self.ptr.add(i)
    }

    /// # Safety
    /// No other body may access any element of `range` concurrently.
    #[inline(always)]
    #[allow(clippy::mut_from_ref)]
    pub unsafe fn slice_mut(&self, range: Range<usize>) -> &mut [T] {
        assert!(range.start <= range.end && range.end <= self.len);
        std::slice::from_raw_parts_mut(self.ptr.add(range.start), range.end - range.start)
    }

    /// # Safety
    /// No other body may write element `i` concurrently.
    #[inline(always)]
    pub unsafe fn read(&self, i: usize) -> T
    where
        T: Copy,
    {
        assert!(i < self.len);
        *self.ptr.add(i)
    }

    /// # Safety
    /// No other body may access element `i` concurrently.
    #[inline(always)]
    pub unsafe fn write(&self, i: usize, value: T) {
        assert!(i < self.len);
        *self.ptr.add(i) = value;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::atomic::AtomicU64;

    fn pools() -> Vec<Pool> {
        [1, 2, 4, 8]
            .into_iter()
            .map(|w| Pool::new(PoolConfig::new(w)).unwrap())
            .collect()
    }

    #[test]
    fn empty_range_never_invokes() {
        for pool in pools() {
            let hits = AtomicUsize::new(0);
            pool.par_map(0..0, |_| {
                hits.fetch_add(1, Ordering::Relaxed);
            });
            assert_eq!(hits.load(Ordering::Relaxed), 0);
        }
    }

    #[test]
    fn squares_match_sequential() {
        let expected: Vec<usize> = (0..100).map(|i| i * i).collect();
        for pool in pools() {
            let mut out = vec![0usize; 100];
            pool.par_map_disjoint(0..100, &mut out, |i, v| {
                // SAFETY: index i writes only slot i.
                unsafe { v.write(i, i * i) };
            });
            assert_eq!(out, expected);
        }
    }

    #[test]
    fn single_worker_runs_in_ascending_order() {
        let pool = Pool::sequential();
        let order = Mutex::new(Vec::new());
        pool.par_map(0..50, |i| order.lock().unwrap().push(i));
        assert_eq!(order.into_inner().unwrap(), (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn panicking_body_surfaces_error() {
        for pool in pools() {
            let r = pool.try_par_map(0..64, |i| {
                if i == 37 {
                    panic!("boom at {i}");
                }
            });
            match r {
                Err(NpbError::WorkerPanicked(msg)) => assert!(msg.contains("boom")),
                other => panic!("expected failure, got {other:?}"),
            }
        }
    }

    #[test]
    fn reduce_empty_and_integer_sum() {
        for pool in pools() {
            assert_eq!(
                pool.par_map_reduce(0..0, 7u64, |i| i as u64, |a, b| a + b),
                7
            );
            assert_eq!(
                pool.par_map_reduce(0..10, 0u64, |i| i as u64, |a, b| a + b),
                45
            );
        }
    }

    #[test]
    fn deterministic_reductions_repeat_exactly() {
        let pool = Pool::new(PoolConfig::new(4).deterministic_reductions(true)).unwrap();
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        let a = pool.par_map_reduce(0..100_000, 0.0, f, |x, y| x + y);
        for _ in 0..5 {
            assert_eq!(pool.par_map_reduce(0..100_000, 0.0, f, |x, y| x + y), a);
        }
    }

    #[test]
    fn row_disjoint_matrix_fill() {
        let (n, m) = (37, 11);
        let expected: Vec<f64> = (0..n * m)
            .map(|x| (x / m) as f64 * 0.5 + (x % m) as f64)
            .collect();
        for pool in pools() {
            let mut a = vec![0.0; n * m];
            pool.par_map_disjoint(0..n, &mut a, |j, v| {
                // SAFETY: row j owns elements j*m..(j+1)*m.
                let row = unsafe { v.slice_mut(j * m..(j + 1) * m) };
                for (c, x) in row.iter_mut().enumerate() {
                    *x = j as f64 * 0.5 + c as f64;
                }
            });
            assert_eq!(a, expected);
        }
    }

    #[test]
    fn chunks_cover_data() {
        for pool in pools() {
            let mut a = vec![0usize; 103];
            pool.par_chunks_mut(&mut a, 10, |c, chunk| chunk.iter_mut().for_each(|x| *x = c));
            for (i, x) in a.iter().enumerate() {
                assert_eq!(*x, i / 10);
            }
        }
    }

    #[test]
    fn partition_examples() {
        let sizes: Vec<usize> = (0..3)
            .map(|w| static_partition(0..10, w, 3).len())
            .collect();
        assert_eq!(sizes, vec![4, 3, 3]);
        assert_eq!(static_partition(5..17, 0, 1), 5..17);
    }

    proptest! {
        #[test]
        fn partition_covers_disjointly(start in 0usize..1000, len in 0usize..1000, n in 1usize..17) {
            let range = start..start + len;
            let mut next = range.start;
            let mut min = usize::MAX;
            let mut max = 0;
            for w in 0..n {
                let p = static_partition(range.clone(), w, n);
                prop_assert_eq!(p.start, next);
                next = p.end;
                min = min.min(p.len());
                max = max.max(p.len());
            }
            prop_assert_eq!(next, range.end);
            prop_assert!(max - min <= 1);
        }

        #[test]
        fn integer_reduction_independent_of_workers(vals in proptest::collection::vec(0u32..1000, 0..300)) {
            let expected: u64 = vals.iter().map(|&v| v as u64).sum();
            for pool in pools() {
                prop_assert_eq!(pool.par_map_reduce(0..vals.len(), 0u64, |i| vals[i] as u64, |a, b| a + b), expected);
            }
        }
    }

    #[test]
    fn pipeline_single_plane_is_partitioned_map() {
        for pool in pools() {
            let hits: Vec<AtomicUsize> = (0..pool.workers()).map(|_| AtomicUsize::new(0)).collect();
            pool.ordered_pipeline(3..4, pool.workers(), Direction::Ascending, |k, b| {
                assert_eq!(k, 3);
                hits[b].fetch_add(1, Ordering::SeqCst);
            });
            assert!(hits.iter().all(|h| h.load(Ordering::SeqCst) == 1));
        }
    }

    #[test]
    fn pipeline_forced_ordering_counter() {
        for pool in pools() {
            for dir in [Direction::Ascending, Direction::Descending] {
                let (nk, nb) = (20usize, 6usize);
                let mut grid = vec![0u64; nk * nb];
                let view = DisjointSlice::new(&mut grid);
                pool.ordered_pipeline(0..nk, nb, dir, |k, b| {
                    let prev = match dir {
                        Direction::Ascending => k.checked_sub(1),
                        Direction::Descending => (k + 1 < nk).then_some(k + 1),
                    };
                    // SAFETY: stage (k, b) is the only writer of cell (k, b); the
                    // pipeline publishes (prev, b) before this stage starts.
                    unsafe {
                        let base = prev.map_or(0, |p| view.read(p * nb + b));
                        view.write(k * nb + b, base + 1);
                    }
                });
                for k in 0..nk {
                    for b in 0..nb {
                        let depth = match dir {
                            Direction::Ascending => k + 1,
                            Direction::Descending => nk - k,
                        };
                        assert_eq!(grid[k * nb + b], depth as u64);
                    }
                }
            }
        }
    }

    #[test]
    fn pipeline_log_has_no_violations() {
        for pool in pools() {
            for dir in [Direction::Ascending, Direction::Descending] {
                let blocks = pool.workers() + 1;
                let log = pool.ordered_pipeline_logged(1..11, blocks, dir, |_, _| {
                    std::hint::black_box(0);
                });
                let (violations, execs) = audit_pipeline_log(&log, 1..11, blocks, dir);
                assert_eq!(violations, 0);
                assert_eq!(execs, 10 * blocks);
            }
        }
    }

    #[test]
    fn audit_detects_out_of_order_log() {
        let log = vec![
            TicketEvent {
                plane: 1,
                block: 0,
                start: 2,
                end: 3,
            },
            TicketEvent {
                plane: 0,
                block: 0,
                start: 0,
                end: 5,
            },
        ];
        let (violations, _) = audit_pipeline_log(&log, 0..2, 1, Direction::Ascending);
        assert_eq!(violations, 1);
    }

    #[test]
    fn pipeline_stage_panic_is_reported() {
        for pool in pools() {
            let r =
                pool.try_ordered_pipeline(0..8, pool.workers(), Direction::Ascending, |k, b| {
                    if k == 4 && b == 0 {
                        panic!("stage failed");
                    }
                });
            assert!(matches!(r, Err(NpbError::WorkerPanicked(_))));
        }
    }

    #[test]
    fn barrier_group_of_one_is_noop() {
        let pool = Pool::sequential();
        pool.broadcast(|ctx| {
            ctx.barrier();
            ctx.barrier();
        });
    }

    #[test]
    fn barrier_separated_phases_lose_no_updates() {
        let pool = Pool::new(PoolConfig::new(8)).unwrap();
        let counter = AtomicU64::new(0);
        let seen = Mutex::new(Vec::new());
        pool.broadcast(|ctx| {
            for _ in 0..1000 {
                counter.fetch_add(1, Ordering::Relaxed);
            }
            ctx.barrier();
            seen.lock().unwrap().push(counter.load(Ordering::Relaxed));
            ctx.barrier();
            for _ in 0..1000 {
                counter.fetch_add(1, Ordering::Relaxed);
            }
        });
        assert!(seen.into_inner().unwrap().iter().all(|&v| v == 8000));
        assert_eq!(counter.load(Ordering::Relaxed), 16000);
    }

    #[test]
    fn barrier_publishes_plain_writes() {
        let pool = Pool::new(PoolConfig::new(4)).unwrap();
        let mut slots = vec![0usize; 4];
        let view = DisjointSlice::new(&mut slots);
        let sums = Mutex::new(Vec::new());
        pool.broadcast(|ctx| {
            // SAFETY: each worker writes only its own slot before the barrier
            // and only reads after it.
            unsafe { view.write(ctx.index, ctx.index + 1) };
            ctx.barrier();
            let s: usize = (0..4).map(|i| unsafe { view.read(i) }).sum();
            sums.lock().unwrap().push(s);
        });
        assert_eq!(sums.into_inner().unwrap(), vec![10; 4]);
    }
}
