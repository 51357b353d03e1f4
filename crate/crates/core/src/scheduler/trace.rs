use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceEvent {
    Start,
    Finish,
}

/// One scheduler event; serialised as one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub time: f64,
    pub slot: usize,
    pub event: TraceEvent,
    pub job_id: String,
}

pub fn trace_to_jsonl(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in trace {
        out.push_str(&serde_json::to_string(r).expect("trace records serialise"));
        out.push('\n');
    }
    out
}

/// Verifies that Start/Finish alternate per slot, that each Finish closes the
/// job its slot started, and that no more than `slots` jobs overlap.
pub fn check_trace(trace: &[TraceRecord], slots: usize) -> Result<(), String> {
    let mut busy: HashMap<usize, &str> = HashMap::new();
    for (i, r) in trace.iter().enumerate() {
        if i > 0 && r.time < trace[i - 1].time {
            return Err(format!("event {i} goes back in time"));
        }
        if r.slot >= slots {
            return Err(format!("event {i} uses slot {} of {slots}", r.slot));
        }
        match r.event {
            TraceEvent::Start => {
                if let Some(job) = busy.insert(r.slot, &r.job_id) {
                    return Err(format!("slot {} started {} while running {job}", r.slot, r.job_id));
                }
            }
            TraceEvent::Finish => match busy.remove(&r.slot) {
                Some(job) if job == r.job_id => {}
                other => {
                    return Err(format!(
                        "slot {} finished {} but was running {other:?}",
                        r.slot, r.job_id
                    ))
                }
            },
        }
        if busy.len() > slots {
            return Err(format!("{} jobs running at event {i}", busy.len()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(time: f64, slot: usize, event: TraceEvent, job: &str) -> TraceRecord {
        TraceRecord {
            time,
            slot,
            event,
            job_id: job.into(),
        }
    }

    #[test]
    fn jsonl_shape() {
        let line = trace_to_jsonl(&[rec(0.5, 1, TraceEvent::Start, "a")]);
        assert_eq!(line, "{\"time\":0.5,\"slot\":1,\"event\":\"start\",\"job_id\":\"a\"}\n");
        let back: TraceRecord = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(back.event, TraceEvent::Start);
    }

    #[test]
    fn detects_double_start() {
        let t = [
            rec(0.0, 0, TraceEvent::Start, "a"),
            rec(0.1, 0, TraceEvent::Start, "b"),
        ];
        assert!(check_trace(&t, 2).is_err());
        let ok = [
            rec(0.0, 0, TraceEvent::Start, "a"),
            rec(1.0, 0, TraceEvent::Finish, "a"),
            rec(1.0, 0, TraceEvent::Start, "b"),
        ];
        assert!(check_trace(&ok, 1).is_ok());
    }
}
