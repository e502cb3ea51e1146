//! Bounded-delay schedules, reproducible counter-based random streams and
//! sparsity overlap statistics.

mod overlap;
mod schedule;
mod stream;

pub use overlap::{measure_overlap, OverlapStats};
pub use schedule::{
    load_trace, make_schedule, parse_trace, verify_schedule, DelayKind, DelaySchedule,
    ScheduleReport,
};
pub use stream::{CounterStream, StreamTag};
