use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread::Scope;
use std::time::{Duration, Instant};

use super::{DurationFn, Executor, JobOutcome, JobSpec};

pub(super) struct Completion {
    pub slot: usize,
    pub index: usize,
    pub outcome: JobOutcome,
    pub finished_at: f64,
}

/// What the orchestrator loop needs from a clock plus a way to run jobs.
pub(super) trait Runtime {
    fn now(&self) -> f64;
    fn dispatch(&mut self, slot: usize, index: usize);
    /// Next completion, or `None` once `deadline` passes without one.
    fn wait(&mut self, deadline: Option<f64>) -> Option<Completion>;
}

/// One worker thread per slot; completions come back over a single channel.
pub(super) struct RealRuntime {
    origin: Instant,
    slots: Vec<Sender<usize>>,
    done: Receiver<Completion>,
}

impl RealRuntime {
    pub fn start<'scope, 'env>(
        scope: &'scope Scope<'scope, 'env>,
        slot_count: usize,
        queue: &'env [JobSpec],
        executor: &'env dyn Executor,
    ) -> Self {
        let origin = Instant::now();
        let (done_tx, done) = mpsc::channel();
        let slots = (0..slot_count)
            .map(|slot| {
                let (tx, rx) = mpsc::channel::<usize>();
                let done_tx = done_tx.clone();
                scope.spawn(move || {
                    for index in rx {
                        let outcome = executor.execute(&queue[index]);
                        let finished_at = origin.elapsed().as_secs_f64();
                        let sent = done_tx.send(Completion {
                            slot,
                            index,
                            outcome,
                            finished_at,
                        });
                        if sent.is_err() {
                            break;
                        }
                    }
                });
                tx
            })
            .collect();
        RealRuntime {
            origin,
            slots,
            done,
        }
    }
}

impl Runtime for RealRuntime {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }

    fn dispatch(&mut self, slot: usize, index: usize) {
        self.slots[slot]
            .send(index)
            .expect("slot worker alive while the run is in progress");
    }

    fn wait(&mut self, deadline: Option<f64>) -> Option<Completion> {
        match deadline {
            None => self.done.recv().ok(),
            Some(t) => {
                let left = (t - self.now()).max(0.0);
                match self.done.recv_timeout(Duration::from_secs_f64(left)) {
                    Ok(c) => Some(c),
                    Err(RecvTimeoutError::Timeout) => {
                        // sleep granularity can wake us a hair early
                        while self.now() < t {
                            std::hint::spin_loop();
                        }
                        None
                    }
                    Err(RecvTimeoutError::Disconnected) => None,
                }
            }
        }
    }
}

/// Discrete-event runtime: jobs execute inline at dispatch and complete at
/// `now + duration` on a virtual clock.
pub(super) struct VirtualRuntime<'a> {
    now: f64,
    seq: u64,
    queue: &'a [JobSpec],
    executor: &'a dyn Executor,
    duration: &'a DurationFn,
    events: Vec<(f64, u64, Completion)>,
}

impl<'a> VirtualRuntime<'a> {
    pub fn new(queue: &'a [JobSpec], executor: &'a dyn Executor, duration: &'a DurationFn) -> Self {
        VirtualRuntime {
            now: 0.0,
            seq: 0,
            queue,
            executor,
            duration,
            events: Vec::new(),
        }
    }
}

impl Runtime for VirtualRuntime<'_> {
    fn now(&self) -> f64 {
        self.now
    }

    fn dispatch(&mut self, slot: usize, index: usize) {
        let job = &self.queue[index];
        let outcome = self.executor.execute(job);
        let d = (self.duration)(job, &outcome);
        let d = if d.is_finite() && d > 0.0 { d } else { 0.0 };
        let at = self.now + d;
        self.events.push((
            at,
            self.seq,
            Completion {
                slot,
                index,
                outcome,
                finished_at: at,
            },
        ));
        self.seq += 1;
    }

    fn wait(&mut self, deadline: Option<f64>) -> Option<Completion> {
        let next = self
            .events
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.1 .1.cmp(&b.1 .1)))
            .map(|(i, e)| (i, e.0));
        match (next, deadline) {
            (Some((i, t)), d) if d.map_or(true, |d| t <= d) => {
                let (_, _, c) = self.events.swap_remove(i);
                self.now = self.now.max(t);
                Some(c)
            }
            (_, Some(d)) => {
                self.now = self.now.max(d);
                None
            }
            (None, None) => None,
            (Some(_), None) => unreachable!("guarded above"),
        }
    }
}
