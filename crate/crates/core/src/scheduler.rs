//! Plugin registry and scheduler.
//!
//! Periodic plugins run on slots `k * period`. An invocation that overruns
//! its period skips every slot that starts before it finishes; each skipped
//! slot is recorded with `skipped = true`. Triggered plugins run once per
//! input event, in publish order, and are never preempted: inputs that
//! arrive while the plugin is busy queue up behind it.
//!
//! In simulated mode the scheduler is a discrete-event loop. Events at the
//! same instant are ordered completions first, then invocations, each in
//! plugin registration order, so traces are reproducible. Triggered inputs
//! committed before the horizon are drained even if processing them runs
//! past it; periodic slots stop at the horizon.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use parking_lot::{Condvar, Mutex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{RunError, RuntimeError};
use crate::plugin::{InvocationContext, Plugin, PluginDescriptor, ReadMode, Schedule};
use crate::switchboard::{ErasedEvent, ErasedReader, Switchboard};
use crate::time::{Clock, ClockMode, Timestamp};
use crate::trace::InvocationRecord;

struct Registered {
    desc: PluginDescriptor,
    body: Box<dyn Plugin>,
    input: Option<Arc<dyn ErasedReader>>,
}

pub struct Runtime {
    switchboard: Arc<Switchboard>,
    plugins: Vec<Registered>,
    seed: u64,
}

impl Runtime {
    pub fn new(switchboard: Arc<Switchboard>) -> Self {
        Self {
            switchboard,
            plugins: Vec::new(),
            seed: 0,
        }
    }

    /// Seed for the synthetic cost models.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn switchboard(&self) -> &Arc<Switchboard> {
        &self.switchboard
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &PluginDescriptor> {
        self.plugins.iter().map(|p| &p.desc)
    }

    pub fn register_plugin(
        &mut self,
        desc: PluginDescriptor,
        body: impl Plugin + 'static,
    ) -> Result<(), RuntimeError> {
        desc.validate()?;
        if self.plugins.iter().any(|p| p.desc.name == desc.name) {
            return Err(RuntimeError::DuplicatePlugin(desc.name));
        }
        let sb = &self.switchboard;
        let referenced = desc
            .reads
            .iter()
            .map(|(t, _)| t.as_str())
            .chain(desc.writes.iter().map(String::as_str))
            .chain(desc.trigger_topic());
        for topic in referenced {
            if !sb.contains(topic) {
                return Err(RuntimeError::UnknownTopic(topic.to_owned()));
            }
        }
        for topic in &desc.writes {
            if let Some(owner) = sb.writer_of(topic) {
                if owner != desc.name {
                    return Err(RuntimeError::WriterConflict {
                        topic: topic.clone(),
                        owner,
                        requester: desc.name.clone(),
                    });
                }
            }
        }
        for topic in &desc.writes {
            sb.bind_erased(topic, &desc.name)?;
        }
        let input = match desc.trigger_topic() {
            Some(topic) => Some(Arc::from(sb.subscribe_erased(topic)?)),
            None => None,
        };
        self.plugins.push(Registered {
            desc,
            body: Box::new(body),
            input,
        });
        Ok(())
    }

    /// Rejects cycles made of synchronous edges (writer -> triggered or
    /// blocking reader).
    pub fn check_sync_cycles(&self) -> Result<(), RuntimeError> {
        let index: HashMap<&str, usize> = self
            .plugins
            .iter()
            .enumerate()
            .map(|(i, p)| (p.desc.name.as_str(), i))
            .collect();
        let n = self.plugins.len();
        let mut edges = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for (to, p) in self.plugins.iter().enumerate() {
            for (topic, mode) in &p.desc.reads {
                if *mode != ReadMode::Sync {
                    continue;
                }
                let writer = self.switchboard.writer_of(topic);
                if let Some(&from) = writer.as_deref().and_then(|w| index.get(w)) {
                    edges[from].push(to);
                    indegree[to] += 1;
                }
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop() {
            seen += 1;
            for &j in &edges[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    queue.push(j);
                }
            }
        }
        if seen == n {
            Ok(())
        } else {
            let names = (0..n)
                .filter(|&i| indegree[i] > 0)
                .map(|i| self.plugins[i].desc.name.clone())
                .collect();
            Err(RuntimeError::SyncCycle(names))
        }
    }

    /// Runs every registered plugin for `duration` and returns the trace,
    /// sorted by start time (ties in registration order).
    pub fn run(&mut self, clock: &mut Clock, duration: Duration) -> Result<Vec<InvocationRecord>, RunError> {
        let started = Instant::now();
        if let Err(error) = self.check_sync_cycles() {
            return Err(RunError {
                error,
                partial: Vec::new(),
                elapsed: started.elapsed(),
            });
        }
        let (mut records, result) = match clock.mode() {
            ClockMode::Simulated => {
                let mut records = Vec::new();
                let result = self.run_simulated(clock, duration, &mut records);
                (records, result)
            }
            ClockMode::Wall => self.run_wall(clock, duration),
        };
        let order: HashMap<String, usize> = self
            .plugins
            .iter()
            .enumerate()
            .map(|(i, p)| (p.desc.name.clone(), i))
            .collect();
        records.sort_by_key(|r| (r.start, order[&r.plugin], r.seq));
        match result {
            Ok(()) => Ok(records),
            Err(error) => Err(RunError {
                error,
                partial: records,
                elapsed: started.elapsed(),
            }),
        }
    }

    fn cost_rng(&self, index: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    fn run_simulated(
        &mut self,
        clock: &mut Clock,
        duration: Duration,
        records: &mut Vec<InvocationRecord>,
    ) -> Result<(), RuntimeError> {
        let horizon = clock.now() + duration;
        let origin = clock.now();
        let mut triggered_on: HashMap<String, Vec<usize>> = HashMap::new();
        let mut states: Vec<SimState> = Vec::with_capacity(self.plugins.len());
        let mut queue = BinaryHeap::new();
        let mut tie = 0u64;
        let mut push = |queue: &mut BinaryHeap<Reverse<SimEvent>>, at, class, plugin, action| {
            tie += 1;
            queue.push(Reverse(SimEvent {
                at,
                class,
                plugin,
                tie,
                action,
            }));
        };

        for (i, p) in self.plugins.iter().enumerate() {
            let ready = p.input.as_ref().map_or(0, |r| r.pending());
            states.push(SimState {
                busy: false,
                scheduled: false,
                ready,
                next_seq: 0,
                rng: self.cost_rng(i),
                pending: Vec::new(),
            });
            match &p.desc.schedule {
                Schedule::Periodic { .. } => {
                    if origin < horizon {
                        push(&mut queue, origin, INVOKE, i, Action::Slot(0));
                    }
                }
                Schedule::Triggered { topic } => {
                    triggered_on.entry(topic.clone()).or_default().push(i);
                    if ready > 0 {
                        states[i].scheduled = true;
                        push(&mut queue, origin, INVOKE, i, Action::Ready);
                    }
                }
            }
        }

        while let Some(Reverse(ev)) = queue.pop() {
            clock.advance_to(ev.at)?;
            let i = ev.plugin;
            match ev.action {
                Action::Finish => {
                    states[i].busy = false;
                    for (topic, commit) in std::mem::take(&mut states[i].pending) {
                        commit()?;
                        if ev.at < horizon {
                            for &j in triggered_on.get(&topic).into_iter().flatten() {
                                states[j].ready += 1;
                            }
                        }
                    }
                    for (j, st) in states.iter_mut().enumerate() {
                        if st.ready > 0 && !st.busy && !st.scheduled {
                            st.scheduled = true;
                            push(&mut queue, ev.at, INVOKE, j, Action::Ready);
                        }
                    }
                }
                Action::Slot(slot) => {
                    let Schedule::Periodic { period } = self.plugins[i].desc.schedule else {
                        unreachable!("slot event for a triggered plugin")
                    };
                    let end = invoke_sim(&mut self.plugins[i], &mut states[i], slot, ev.at, None, records)?;
                    push(&mut queue, end, FINISH, i, Action::Finish);

                    let p = period.as_nanos() as u64;
                    let since_origin = end.as_nanos() - origin.as_nanos();
                    let next = (slot + 1).max(since_origin.div_ceil(p));
                    let name = &self.plugins[i].desc.name;
                    for skipped in slot + 1..next {
                        let t = origin + Duration::from_nanos(skipped * p);
                        if t >= horizon {
                            break;
                        }
                        records.push(InvocationRecord::skipped(name, skipped, t));
                    }
                    let t = origin + Duration::from_nanos(next * p);
                    if t < horizon {
                        push(&mut queue, t, INVOKE, i, Action::Slot(next));
                    }
                }
                Action::Ready => {
                    let st = &mut states[i];
                    st.scheduled = false;
                    let input = self.plugins[i].input.as_ref().expect("triggered plugin has an input");
                    let Some(event) = input.pop() else {
                        st.ready = 0;
                        continue;
                    };
                    st.ready -= 1;
                    let seq = st.next_seq;
                    st.next_seq += 1;
                    let end = invoke_sim(&mut self.plugins[i], st, seq, ev.at, Some(event), records)?;
                    push(&mut queue, end, FINISH, i, Action::Finish);
                }
            }
        }
        Ok(())
    }

    fn run_wall(&mut self, clock: &mut Clock, duration: Duration) -> (Vec<InvocationRecord>, Result<(), RuntimeError>) {
        let origin = clock.start();
        let seeds: Vec<ChaCha8Rng> = (0..self.plugins.len()).map(|i| self.cost_rng(i)).collect();
        let inputs: Vec<Arc<dyn ErasedReader>> =
            self.plugins.iter().filter_map(|p| p.input.clone()).collect();
        let periodic = self
            .plugins
            .iter()
            .filter(|p| matches!(p.desc.schedule, Schedule::Periodic { .. }))
            .count();
        let shared = WallShared {
            origin,
            horizon: duration,
            records: Mutex::new(Vec::new()),
            coord: Mutex::new(Coord {
                periodic_running: periodic,
                busy: 0,
                done: false,
            }),
            wake: Condvar::new(),
            abort: AtomicBool::new(false),
            inputs,
        };

        let errors: Vec<RuntimeError> = thread::scope(|s| {
            let handles: Vec<_> = self
                .plugins
                .iter_mut()
                .zip(seeds)
                .map(|(plugin, rng)| {
                    let shared = &shared;
                    s.spawn(move || {
                        let result = match plugin.desc.schedule {
                            Schedule::Periodic { period } => wall_periodic(plugin, period, rng, shared),
                            Schedule::Triggered { .. } => wall_triggered(plugin, rng, shared),
                        };
                        if result.is_err() {
                            shared.abort.store(true, Ordering::SeqCst);
                            let _guard = shared.coord.lock();
                            shared.wake.notify_all();
                        }
                        result
                    })
                })
                .collect();
            handles
                .into_iter()
                .filter_map(|h| h.join().expect("plugin thread panicked").err())
                .collect()
        });
        let records = shared.records.into_inner();
        (records, errors.into_iter().next().map_or(Ok(()), Err))
    }
}

const FINISH: u8 = 0;
const INVOKE: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Action {
    Finish,
    Slot(u64),
    Ready,
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct SimEvent {
    at: Timestamp,
    class: u8,
    plugin: usize,
    tie: u64,
    action: Action,
}

type Pending = Vec<(String, Box<dyn FnOnce() -> Result<(), RuntimeError> + Send>)>;

struct SimState {
    busy: bool,
    scheduled: bool,
    ready: usize,
    next_seq: u64,
    rng: ChaCha8Rng,
    pending: Pending,
}

fn invoke_sim(
    plugin: &mut Registered,
    state: &mut SimState,
    seq: u64,
    start: Timestamp,
    trigger: Option<ErasedEvent>,
    records: &mut Vec<InvocationRecord>,
) -> Result<Timestamp, RuntimeError> {
    let name = plugin.desc.name.as_str();
    let mut ctx = InvocationContext::new(name, seq, start, trigger);
    plugin.body.invoke(&mut ctx).map_err(|source| RuntimeError::Plugin {
        plugin: name.to_owned(),
        source,
    })?;
    let cost = ctx.charged() + plugin.desc.cost.sample(&mut state.rng);
    let end = start + cost;
    records.push(InvocationRecord::completed(name, seq, start, end, cost, plugin.desc.deadline));
    state.pending = ctx.pending;
    state.busy = true;
    Ok(end)
}

struct Coord {
    periodic_running: usize,
    busy: usize,
    done: bool,
}

struct WallShared {
    origin: Instant,
    horizon: Duration,
    records: Mutex<Vec<InvocationRecord>>,
    coord: Mutex<Coord>,
    wake: Condvar,
    abort: AtomicBool,
    inputs: Vec<Arc<dyn ErasedReader>>,
}

impl WallShared {
    fn now(&self) -> Timestamp {
        Timestamp::from_duration(self.origin.elapsed())
    }

    fn aborted(&self) -> bool {
        self.abort.load(Ordering::SeqCst)
    }
}

/// Runs one invocation in wall mode; returns its end time.
fn invoke_wall(
    plugin: &mut Registered,
    rng: &mut ChaCha8Rng,
    seq: u64,
    trigger: Option<ErasedEvent>,
    shared: &WallShared,
) -> Result<Timestamp, RuntimeError> {
    let name = plugin.desc.name.as_str();
    let started = Instant::now();
    let start = shared.now();
    let cpu0 = thread_cpu_time();
    let mut ctx = InvocationContext::new(name, seq, start, trigger);
    plugin.body.invoke(&mut ctx).map_err(|source| RuntimeError::Plugin {
        plugin: name.to_owned(),
        source,
    })?;
    let synthetic = ctx.charged() + plugin.desc.cost.sample(rng);
    let spent = started.elapsed();
    if synthetic > spent {
        thread::sleep(synthetic - spent);
    }
    let pending = std::mem::take(&mut ctx.pending);
    for (_, commit) in pending {
        commit()?;
    }
    {
        let _guard = shared.coord.lock();
        shared.wake.notify_all();
    }
    let end = shared.now();
    let cpu = thread_cpu_time().saturating_sub(cpu0);
    shared
        .records
        .lock()
        .push(InvocationRecord::completed(name, seq, start, end, cpu, plugin.desc.deadline));
    Ok(end)
}

fn wall_periodic(
    plugin: &mut Registered,
    period: Duration,
    mut rng: ChaCha8Rng,
    shared: &WallShared,
) -> Result<(), RuntimeError> {
    let p = period.as_nanos() as u64;
    let horizon = shared.horizon.as_nanos() as u64;
    let mut slot = 0u64;
    let result = loop {
        let slot_ns = slot * p;
        if slot_ns >= horizon || shared.aborted() {
            break Ok(());
        }
        let wake = shared.origin + Duration::from_nanos(slot_ns);
        let now = Instant::now();
        if wake > now {
            thread::sleep(wake - now);
        }
        let end = match invoke_wall(plugin, &mut rng, slot, None, shared) {
            Ok(end) => end,
            Err(e) => break Err(e),
        };
        let next = (slot + 1).max(end.as_nanos().div_ceil(p));
        let mut records = shared.records.lock();
        for skipped in slot + 1..next {
            if skipped * p >= horizon {
                break;
            }
            records.push(InvocationRecord::skipped(
                &plugin.desc.name,
                skipped,
                Timestamp::from_nanos(skipped * p),
            ));
        }
        slot = next;
    };
    let mut coord = shared.coord.lock();
    coord.periodic_running -= 1;
    shared.wake.notify_all();
    result
}

fn wall_triggered(plugin: &mut Registered, mut rng: ChaCha8Rng, shared: &WallShared) -> Result<(), RuntimeError> {
    let input = Arc::clone(plugin.input.as_ref().expect("triggered plugin has an input"));
    let mut seq = 0u64;
    loop {
        let mut coord = shared.coord.lock();
        if shared.aborted() || coord.done {
            return Ok(());
        }
        if let Some(event) = input.pop() {
            coord.busy += 1;
            drop(coord);
            let result = invoke_wall(plugin, &mut rng, seq, Some(event), shared);
            seq += 1;
            let mut coord = shared.coord.lock();
            coord.busy -= 1;
            shared.wake.notify_all();
            drop(coord);
            result?;
            continue;
        }
        if coord.periodic_running == 0 && coord.busy == 0 && shared.inputs.iter().all(|r| r.pending() == 0) {
            coord.done = true;
            shared.wake.notify_all();
            return Ok(());
        }
        shared.wake.wait_for(&mut coord, Duration::from_millis(5));
    }
}

fn thread_cpu_time() -> Duration {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: `ts` is a valid, writable timespec for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return Duration::ZERO;
    }
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}
