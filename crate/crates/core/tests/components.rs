use macsim::components::{bit_time, frame_delay, throughput_from_delay, BitBudget, DelayOptions, TimingBudget};
use macsim::AccessTechnique;
use proptest::prelude::*;

fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

#[test]
fn tdma_can_count_data() {
    let bits = BitBudget { data: 256, rate: 64_000.0, ..Default::default() };
    let t = TimingBudget::default();
    let plain = frame_delay(AccessTechnique::Tdma, &bits, &t, DelayOptions::default()).unwrap();
    let with = frame_delay(AccessTechnique::Tdma, &bits, &t, DelayOptions { tdma_counts_data: true, ..Default::default() }).unwrap();
    assert_eq!(plain, 0.0);
    assert_eq!(with, 0.004);
}

#[test]
fn unacknowledged_drops_ack_and_turnaround() {
    let bits = BitBudget { data: 256, ack: 88, rate: 64_000.0, ..Default::default() };
    let t = TimingBudget { turnaround: 0.002, ..Default::default() };
    let opts = DelayOptions { acknowledged: false, ..Default::default() };
    assert_eq!(frame_delay(AccessTechnique::Fdma, &bits, &t, opts).unwrap(), 0.004);
    // T_data + T_ifs with T_ack = T_ta = 0
    assert_eq!(frame_delay(AccessTechnique::CsmaCa, &bits, &t, opts).unwrap(), 0.008);
}

#[test]
fn zero_rate_rejected() {
    assert!(bit_time(8, 0.0).is_err());
    assert!(bit_time(8, -1.0).is_err());
}

proptest! {
    #[test]
    fn bit_time_linear(m in 0u64..1u64 << 40, n in 0u64..1u64 << 40, f in 1.0f64..1e9) {
        let whole = bit_time(m + n, f).unwrap();
        let parts = bit_time(m, f).unwrap() + bit_time(n, f).unwrap();
        prop_assert!(ulps(whole, parts) <= 1, "{} vs {}", whole, parts);
    }

    #[test]
    fn throughput_times_delay(x in 0.0f64..1e9, d in 1e-9f64..1e6) {
        let t = throughput_from_delay(x, d).unwrap();
        prop_assert!(ulps(t * d, 8.0 * x) <= 1);
    }

    #[test]
    fn guard_time_never_decreases_delay(tech_idx in 0usize..5, g in 0.0f64..1.0, dg in 0.0f64..1.0) {
        let tech = AccessTechnique::ALL[tech_idx];
        let bits = BitBudget { overhead: 16, ack: 88, sync: 8, data: 256, rate: 64_000.0 };
        let t = TimingBudget { guard: g, ..Default::default() };
        let t2 = TimingBudget { guard: g + dg, ..Default::default() };
        prop_assert!(
            frame_delay(tech, &bits, &t2, DelayOptions::default()).unwrap()
                >= frame_delay(tech, &bits, &t, DelayOptions::default()).unwrap()
        );
    }
}
