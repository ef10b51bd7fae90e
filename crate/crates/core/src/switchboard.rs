//! Typed single-writer, multi-reader event streams.

use std::any::{type_name, Any};
use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Weak};
use std::time::{Duration, Instant};

use parking_lot::{Condvar, Mutex, RwLock};

use crate::error::RuntimeError;
use crate::time::{ClockMode, Timestamp};

/// Per-reader queue bound for synchronous readers.
pub const SYNC_QUEUE_CAPACITY: usize = 4096;

/// What happens when a synchronous reader's queue is full at publish time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverflowPolicy {
    /// Reject the publish; nothing is delivered to any reader.
    Error,
    /// Evict the reader's oldest entry and count the loss.
    DropOldest,
}

impl OverflowPolicy {
    pub fn for_mode(mode: ClockMode) -> Self {
        match mode {
            ClockMode::Simulated => OverflowPolicy::Error,
            ClockMode::Wall => OverflowPolicy::DropOldest,
        }
    }
}

/// A published value. Shared immutably between all readers.
#[derive(Debug)]
pub struct Event<T> {
    pub ts: Timestamp,
    /// Position in the topic's publish sequence, starting at 0.
    pub seq: u64,
    pub value: T,
}

/// Capability to publish on one topic, handed out once per topic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WriterId(u64);

static NEXT_WRITER_ID: AtomicU64 = AtomicU64::new(1);

struct ReaderQueue<T> {
    queue: Mutex<VecDeque<Arc<Event<T>>>>,
    ready: Condvar,
    dropped: AtomicU64,
    capacity: usize,
}

struct PublishState<T> {
    last_ts: Option<Timestamp>,
    next_seq: u64,
    readers: Vec<Weak<ReaderQueue<T>>>,
}

struct WriterSlot {
    id: WriterId,
    owner: String,
}

struct TopicShared<T> {
    name: String,
    policy: OverflowPolicy,
    capacity: usize,
    state: Mutex<PublishState<T>>,
    latest: RwLock<Option<Arc<Event<T>>>>,
    writer: Mutex<Option<WriterSlot>>,
}

/// Handle to a typed topic. Cheap to clone; all clones refer to one stream.
pub struct Topic<T> {
    shared: Arc<TopicShared<T>>,
}

impl<T> Clone for Topic<T> {
    fn clone(&self) -> Self {
        Self {
            shared: Arc::clone(&self.shared),
        }
    }
}

impl<T: Send + Sync + 'static> Topic<T> {
    fn new(name: &str, policy: OverflowPolicy, capacity: usize) -> Self {
        Self {
            shared: Arc::new(TopicShared {
                name: name.to_owned(),
                policy,
                capacity,
                state: Mutex::new(PublishState {
                    last_ts: None,
                    next_seq: 0,
                    readers: Vec::new(),
                }),
                latest: RwLock::new(None),
                writer: Mutex::new(None),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.shared.name
    }

    /// Most recent value, or `None` before the first publish. Never blocks on
    /// the writer for longer than the pointer swap.
    pub fn read_latest(&self) -> Option<Arc<Event<T>>> {
        self.shared.latest.read().clone()
    }

    /// Reader that receives every value published from now on, in order.
    pub fn subscribe_sync(&self) -> SyncReader<T> {
        let queue = Arc::new(ReaderQueue {
            queue: Mutex::new(VecDeque::new()),
            ready: Condvar::new(),
            dropped: AtomicU64::new(0),
            capacity: self.shared.capacity,
        });
        self.shared.state.lock().readers.push(Arc::downgrade(&queue));
        SyncReader {
            topic: self.shared.name.clone(),
            queue,
        }
    }

    /// Binds `owner` as the topic's writer. Binding the same owner again
    /// returns the existing id; a different owner is a conflict.
    pub fn bind_writer(&self, owner: &str) -> Result<Writer<T>, RuntimeError> {
        let mut slot = self.shared.writer.lock();
        let id = match slot.as_ref() {
            Some(existing) if existing.owner == owner => existing.id,
            Some(existing) => {
                return Err(RuntimeError::WriterConflict {
                    topic: self.shared.name.clone(),
                    owner: existing.owner.clone(),
                    requester: owner.to_owned(),
                })
            }
            None => {
                let id = WriterId(NEXT_WRITER_ID.fetch_add(1, Ordering::Relaxed));
                *slot = Some(WriterSlot {
                    id,
                    owner: owner.to_owned(),
                });
                id
            }
        };
        Ok(Writer {
            topic: self.clone(),
            id,
        })
    }

    pub fn writer_owner(&self) -> Option<String> {
        self.shared.writer.lock().as_ref().map(|w| w.owner.clone())
    }

    /// Publishes `value` stamped `ts`; returns its sequence number.
    pub fn publish(&self, writer: WriterId, value: T, ts: Timestamp) -> Result<u64, RuntimeError> {
        match self.shared.writer.lock().as_ref() {
            Some(slot) if slot.id == writer => {}
            _ => return Err(RuntimeError::NotWriter(self.shared.name.clone())),
        }

        let mut state = self.shared.state.lock();
        if let Some(last) = state.last_ts {
            if ts < last {
                return Err(RuntimeError::Ordering {
                    topic: self.shared.name.clone(),
                    last_ns: last.as_nanos(),
                    ts_ns: ts.as_nanos(),
                });
            }
        }
        state.readers.retain(|r| r.strong_count() > 0);
        let readers: Vec<Arc<ReaderQueue<T>>> =
            state.readers.iter().filter_map(Weak::upgrade).collect();

        let mut guards: Vec<_> = readers.iter().map(|r| r.queue.lock()).collect();
        if self.shared.policy == OverflowPolicy::Error
            && guards.iter().any(|q| q.len() >= self.shared.capacity)
        {
            return Err(RuntimeError::QueueOverflow {
                topic: self.shared.name.clone(),
                capacity: self.shared.capacity,
            });
        }

        let seq = state.next_seq;
        let event = Arc::new(Event { ts, seq, value });
        for (reader, queue) in readers.iter().zip(guards.iter_mut()) {
            if queue.len() >= reader.capacity {
                queue.pop_front();
                reader.dropped.fetch_add(1, Ordering::Relaxed);
            }
            queue.push_back(Arc::clone(&event));
        }
        drop(guards);
        for reader in &readers {
            reader.ready.notify_all();
        }

        *self.shared.latest.write() = Some(event);
        state.next_seq += 1;
        state.last_ts = Some(ts);
        Ok(seq)
    }

    /// Number of values published so far.
    pub fn published(&self) -> u64 {
        self.shared.state.lock().next_seq
    }
}

/// Publishing capability for one topic.
pub struct Writer<T> {
    topic: Topic<T>,
    id: WriterId,
}

impl<T> Clone for Writer<T> {
    fn clone(&self) -> Self {
        Self {
            topic: self.topic.clone(),
            id: self.id,
        }
    }
}

impl<T: Send + Sync + 'static> Writer<T> {
    pub fn id(&self) -> WriterId {
        self.id
    }

    pub fn topic(&self) -> &Topic<T> {
        &self.topic
    }

    pub fn publish(&self, value: T, ts: Timestamp) -> Result<u64, RuntimeError> {
        self.topic.publish(self.id, value, ts)
    }
}

/// In-order reader over a topic. Every value published after subscription is
/// delivered exactly once, up to the queue bound.
pub struct SyncReader<T> {
    topic: String,
    queue: Arc<ReaderQueue<T>>,
}

impl<T> SyncReader<T> {
    pub fn topic(&self) -> &str {
        &self.topic
    }

    pub fn try_next(&self) -> Option<Arc<Event<T>>> {
        self.queue.queue.lock().pop_front()
    }

    /// Waits up to `timeout` for the next value.
    pub fn next_timeout(&self, timeout: Duration) -> Option<Arc<Event<T>>> {
        let deadline = Instant::now() + timeout;
        let mut queue = self.queue.queue.lock();
        loop {
            if let Some(ev) = queue.pop_front() {
                return Some(ev);
            }
            if self.queue.ready.wait_until(&mut queue, deadline).timed_out() {
                return queue.pop_front();
            }
        }
    }

    pub fn pending(&self) -> usize {
        self.queue.queue.lock().len()
    }

    /// Values evicted under [`OverflowPolicy::DropOldest`].
    pub fn dropped(&self) -> u64 {
        self.queue.dropped.load(Ordering::Relaxed)
    }
}

/// Type-erased event handed to triggered plugins.
#[derive(Clone)]
pub(crate) struct ErasedEvent {
    pub ts: Timestamp,
    pub value: Arc<dyn Any + Send + Sync>,
}

pub(crate) trait ErasedReader: Send + Sync {
    fn pop(&self) -> Option<ErasedEvent>;
    fn pending(&self) -> usize;
}

impl<T: Send + Sync + 'static> ErasedReader for SyncReader<T> {
    fn pop(&self) -> Option<ErasedEvent> {
        self.try_next().map(|ev| ErasedEvent {
            ts: ev.ts,
            value: ev,
        })
    }

    fn pending(&self) -> usize {
        SyncReader::pending(self)
    }
}

trait ErasedTopic: Send + Sync {
    fn kind(&self) -> &'static str;
    fn bind(&self, owner: &str) -> Result<(), RuntimeError>;
    fn owner(&self) -> Option<String>;
    fn subscribe(&self) -> Box<dyn ErasedReader>;
}

impl<T: Send + Sync + 'static> ErasedTopic for Topic<T> {
    fn kind(&self) -> &'static str {
        type_name::<T>()
    }

    fn bind(&self, owner: &str) -> Result<(), RuntimeError> {
        self.bind_writer(owner).map(|_| ())
    }

    fn owner(&self) -> Option<String> {
        self.writer_owner()
    }

    fn subscribe(&self) -> Box<dyn ErasedReader> {
        Box::new(self.subscribe_sync())
    }
}

struct TopicEntry {
    erased: Arc<dyn ErasedTopic>,
    typed: Arc<dyn Any + Send + Sync>,
}

/// Registry of named topics.
pub struct Switchboard {
    policy: OverflowPolicy,
    capacity: usize,
    topics: RwLock<HashMap<String, TopicEntry>>,
    order: RwLock<Vec<String>>,
}

impl Switchboard {
    pub fn new(policy: OverflowPolicy) -> Self {
        Self::with_capacity(policy, SYNC_QUEUE_CAPACITY)
    }

    pub fn with_capacity(policy: OverflowPolicy, capacity: usize) -> Self {
        Self {
            policy,
            capacity,
            topics: RwLock::new(HashMap::new()),
            order: RwLock::new(Vec::new()),
        }
    }

    pub fn policy(&self) -> OverflowPolicy {
        self.policy
    }

    pub fn create_topic<T: Send + Sync + 'static>(&self, name: &str) -> Result<Topic<T>, RuntimeError> {
        let mut topics = self.topics.write();
        if topics.contains_key(name) {
            return Err(RuntimeError::DuplicateTopic(name.to_owned()));
        }
        let topic = Topic::<T>::new(name, self.policy, self.capacity);
        topics.insert(
            name.to_owned(),
            TopicEntry {
                erased: Arc::new(topic.clone()),
                typed: Arc::new(topic.clone()),
            },
        );
        self.order.write().push(name.to_owned());
        Ok(topic)
    }

    pub fn topic<T: Send + Sync + 'static>(&self, name: &str) -> Result<Topic<T>, RuntimeError> {
        let topics = self.topics.read();
        let entry = topics
            .get(name)
            .ok_or_else(|| RuntimeError::UnknownTopic(name.to_owned()))?;
        entry
            .typed
            .downcast_ref::<Topic<T>>()
            .cloned()
            .ok_or_else(|| RuntimeError::PayloadKind {
                topic: name.to_owned(),
                actual: entry.erased.kind(),
                requested: type_name::<T>(),
            })
    }

    /// Binds `owner` as writer of `name` and returns the publishing handle.
    pub fn writer<T: Send + Sync + 'static>(&self, name: &str, owner: &str) -> Result<Writer<T>, RuntimeError> {
        self.topic::<T>(name)?.bind_writer(owner)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.topics.read().contains_key(name)
    }

    /// Topic names in creation order.
    pub fn topic_names(&self) -> Vec<String> {
        self.order.read().clone()
    }

    pub fn payload_kind(&self, name: &str) -> Option<&'static str> {
        self.topics.read().get(name).map(|e| e.erased.kind())
    }

    pub fn writer_of(&self, name: &str) -> Option<String> {
        self.topics.read().get(name).and_then(|e| e.erased.owner())
    }

    pub(crate) fn bind_erased(&self, name: &str, owner: &str) -> Result<(), RuntimeError> {
        let topics = self.topics.read();
        let entry = topics
            .get(name)
            .ok_or_else(|| RuntimeError::UnknownTopic(name.to_owned()))?;
        entry.erased.bind(owner)
    }

    pub(crate) fn subscribe_erased(&self, name: &str) -> Result<Box<dyn ErasedReader>, RuntimeError> {
        let topics = self.topics.read();
        let entry = topics
            .get(name)
            .ok_or_else(|| RuntimeError::UnknownTopic(name.to_owned()))?;
        Ok(entry.erased.subscribe())
    }
}
