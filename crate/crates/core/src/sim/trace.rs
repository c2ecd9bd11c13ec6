//! Packet trace export.

use std::fmt::Write as _;
use std::io;

use super::stats::PacketRecord;

pub const TRACE_HEADER: &str = "id,source,created_at,attempts,delivered_at";

pub fn trace_csv(records: &[PacketRecord]) -> String {
    let mut out = String::with_capacity(40 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(out, "{},{},{},{},", r.id, r.source, r.created_at, r.attempts);
        if let Some(d) = r.delivered_at {
            let _ = write!(out, "{d}");
        }
        out.push('\n');
    }
    out
}

pub fn write_trace<W: io::Write>(records: &[PacketRecord], mut w: W) -> io::Result<()> {
    w.write_all(trace_csv(records).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Nanos;

    #[test]
    fn format() {
        let r = |id, delivered_at| PacketRecord {
            id,
            source: 3,
            created_at: Nanos(1_500_000_000),
            attempts: 2,
            collisions: 1,
            delivered_at,
            dropped_at: None,
        };
        let csv = trace_csv(&[r(0, Some(Nanos(1_504_040_000))), r(1, None)]);
        assert_eq!(
            csv,
            "id,source,created_at,attempts,delivered_at\n\
             0,3,1.500000000,2,1.504040000\n\
             1,3,1.500000000,2,\n"
        );
    }
}
