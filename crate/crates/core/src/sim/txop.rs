use crate::game::BurstPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxopResult {
    pub frames: u32,
    pub successes: u32,
    pub last_ok: bool,
    /// Channel time consumed, ns.
    pub time_ns: u64,
}

/// Sends up to `max_frames` back-to-back frames starting at `start_ns`.
///
/// `frame_ok` is asked for the outcome of each frame given its start time.
/// BFL ends the burst after the first failure; BEB always sends all frames.
/// A burst never exceeds `max_frames * airtime_ns`.
pub fn execute_txop(
    policy: BurstPolicy,
    max_frames: u32,
    airtime_ns: u64,
    start_ns: u64,
    mut frame_ok: impl FnMut(u64) -> bool,
) -> TxopResult {
    let mut res = TxopResult {
        frames: 0,
        successes: 0,
        last_ok: true,
        time_ns: 0,
    };
    for _ in 0..max_frames.max(1) {
        let ok = frame_ok(start_ns + res.time_ns);
        res.frames += 1;
        res.time_ns += airtime_ns;
        res.last_ok = ok;
        if ok {
            res.successes += 1;
        } else if policy == BurstPolicy::Bfl {
            break;
        }
    }
    res
}
