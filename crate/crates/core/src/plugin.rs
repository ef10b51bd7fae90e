use std::sync::Arc;
use std::time::Duration;

use crate::cost::CostModel;
use crate::error::{PluginError, RuntimeError};
use crate::switchboard::{ErasedEvent, Event, Writer};
use crate::time::Timestamp;

/// When a plugin runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// On every multiple of `period`; overrunning invocations skip slots.
    Periodic { period: Duration },
    /// Once per value published on `topic`, in publish order, never preempted.
    Triggered { topic: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReadMode {
    Sync,
    Async,
}

#[derive(Clone, Debug)]
pub struct PluginDescriptor {
    pub name: String,
    pub schedule: Schedule,
    pub deadline: Duration,
    pub reads: Vec<(String, ReadMode)>,
    pub writes: Vec<String>,
    /// Allows sync reads of topics other than the trigger topic.
    pub tolerates_blocking: bool,
    /// Extra simulated cost added to every invocation.
    pub cost: CostModel,
}

impl PluginDescriptor {
    /// Periodic plugin whose deadline equals its period.
    pub fn periodic(name: impl Into<String>, period: Duration) -> Self {
        Self {
            name: name.into(),
            schedule: Schedule::Periodic { period },
            deadline: period,
            reads: Vec::new(),
            writes: Vec::new(),
            tolerates_blocking: false,
            cost: CostModel::Zero,
        }
    }

    /// Plugin triggered by `topic`, which it reads synchronously.
    pub fn triggered(name: impl Into<String>, topic: impl Into<String>, deadline: Duration) -> Self {
        let topic = topic.into();
        Self {
            name: name.into(),
            schedule: Schedule::Triggered {
                topic: topic.clone(),
            },
            deadline,
            reads: vec![(topic, ReadMode::Sync)],
            writes: Vec::new(),
            tolerates_blocking: false,
            cost: CostModel::Zero,
        }
    }

    pub fn with_deadline(mut self, deadline: Duration) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn reads_async(mut self, topic: impl Into<String>) -> Self {
        self.reads.push((topic.into(), ReadMode::Async));
        self
    }

    pub fn writes(mut self, topic: impl Into<String>) -> Self {
        self.writes.push(topic.into());
        self
    }

    pub fn with_cost(mut self, cost: CostModel) -> Self {
        self.cost = cost;
        self
    }

    pub fn trigger_topic(&self) -> Option<&str> {
        match &self.schedule {
            Schedule::Triggered { topic } => Some(topic),
            Schedule::Periodic { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<(), RuntimeError> {
        let invalid = |reason: String| RuntimeError::InvalidPlugin {
            plugin: self.name.clone(),
            reason,
        };
        if self.name.is_empty() {
            return Err(invalid("empty name".into()));
        }
        if self.deadline.is_zero() {
            return Err(invalid("deadline must be positive".into()));
        }
        if let Schedule::Periodic { period } = self.schedule {
            if period.is_zero() {
                return Err(invalid("period must be positive".into()));
            }
        }
        for (topic, mode) in &self.reads {
            if *mode == ReadMode::Sync
                && self.trigger_topic() != Some(topic.as_str())
                && !self.tolerates_blocking
            {
                return Err(invalid(format!(
                    "sync read of `{topic}` without being triggered by it"
                )));
            }
        }
        self.cost.validate().map_err(invalid)
    }
}

type PendingPublish = Box<dyn FnOnce() -> Result<(), RuntimeError> + Send>;

/// Per-invocation view handed to [`Plugin::invoke`].
///
/// Publishes made through the context become visible when the invocation
/// ends: at `start + cost` in simulated mode, right after the body returns
/// in wall mode.
pub struct InvocationContext<'a> {
    plugin: &'a str,
    seq: u64,
    now: Timestamp,
    trigger: Option<ErasedEvent>,
    charged: Duration,
    pub(crate) pending: Vec<(String, PendingPublish)>,
}

impl<'a> InvocationContext<'a> {
    pub(crate) fn new(plugin: &'a str, seq: u64, now: Timestamp, trigger: Option<ErasedEvent>) -> Self {
        Self {
            plugin,
            seq,
            now,
            trigger,
            charged: Duration::ZERO,
            pending: Vec::new(),
        }
    }

    pub fn plugin(&self) -> &str {
        self.plugin
    }

    pub fn seq(&self) -> u64 {
        self.seq
    }

    /// Start time of this invocation.
    pub fn now(&self) -> Timestamp {
        self.now
    }

    /// The event that triggered this invocation, for triggered plugins.
    pub fn trigger<T: Send + Sync + 'static>(&self) -> Option<Arc<Event<T>>> {
        let ev = self.trigger.as_ref()?;
        Arc::clone(&ev.value).downcast::<Event<T>>().ok()
    }

    pub fn trigger_ts(&self) -> Option<Timestamp> {
        self.trigger.as_ref().map(|e| e.ts)
    }

    /// Adds simulated compute time to this invocation.
    pub fn charge(&mut self, d: Duration) {
        self.charged += d;
    }

    pub fn charged(&self) -> Duration {
        self.charged
    }

    pub fn publish<T: Send + Sync + 'static>(&mut self, writer: &Writer<T>, value: T, ts: Timestamp) {
        let w = writer.clone();
        self.pending.push((
            writer.topic().name().to_owned(),
            Box::new(move || w.publish(value, ts).map(|_| ())),
        ));
    }
}

/// A schedulable component.
pub trait Plugin: Send {
    fn invoke(&mut self, ctx: &mut InvocationContext<'_>) -> Result<(), PluginError>;
}

impl<F> Plugin for F
where
    F: FnMut(&mut InvocationContext<'_>) -> Result<(), PluginError> + Send,
{
    fn invoke(&mut self, ctx: &mut InvocationContext<'_>) -> Result<(), PluginError> {
        self(ctx)
    }
}
