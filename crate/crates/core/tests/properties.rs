use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use fddi_lab::fddi2::{self, ChannelId, ChannelRequest, ModeMap, WbcMode};
use fddi_lab::link_planner::{validate_link, validate_ring, LinkSpec, MediaTable};
use fddi_lab::mac_sim::{run_simulation, run_traced, Flow, RingConfig, Stripping, TrafficClass, TrafficModel};
use fddi_lab::phy_codec::{
    bits_to_patterns, decode_4b5b, encode_4b5b, mlt3_encode, nrzi_encode, symbols_to_bits, CodeTable, Level, Nibble,
    FDDI_CODE_BIT_RATE,
};
use fddi_lab::scrambler;
use fddi_lab::spm::{self, SpeLayoutParams};
use fddi_lab::Execution;

fn nibbles() -> impl Strategy<Value = Vec<Nibble>> {
    prop::collection::vec((0u8..16).prop_map(|v| Nibble::new(v).unwrap()), 0..200)
}

fn ring() -> impl Strategy<Value = (RingConfig, TrafficModel)> {
    (2usize..12, 10.0f64..500.0, 1.2f64..6.0, 0.0f64..0.6, 1.0f64..60.0, prop::sample::select(vec![16u32, 64, 512]))
        .prop_map(|(n, d, ratio, sync_share, rate, fb)| {
            let t = d * ratio;
            let mut cfg = RingConfig::new(n, d, t);
            cfg.frame_bytes = fb;
            let per = (t - d) * sync_share / n as f64;
            cfg.sync_allocation_us = vec![per; n];
            let traffic = TrafficModel::idle()
                .with_flow(Flow::saturated(TrafficClass::Sync))
                .with_flow(Flow::poisson(TrafficClass::Async, rate / n as f64))
                .with_flow(Flow::saturated(TrafficClass::Async).at(vec![n - 1]))
                .with_probes(1.0);
            (cfg, traffic)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn codec_round_trip(data in nibbles()) {
        let table = CodeTable::standard();
        let bits = symbols_to_bits(&encode_4b5b(&table, &data).unwrap());
        prop_assert_eq!(bits.len(), data.len() * 5);
        let back = decode_4b5b(&table, &bits_to_patterns(&bits).unwrap()).unwrap();
        prop_assert_eq!(back, data);
    }

    #[test]
    fn encoded_data_has_no_long_zero_runs(data in nibbles()) {
        let table = CodeTable::standard();
        let bits = symbols_to_bits(&encode_4b5b(&table, &data).unwrap());
        prop_assert!(fddi_lab::bits::longest_run_of(&bits, false) <= 3);
    }

    #[test]
    fn nrzi_transitions_equal_popcount(bits in prop::collection::vec(any::<bool>(), 0..500), high in any::<bool>()) {
        let start = if high { Level::High } else { Level::Low };
        let s = nrzi_encode(&bits, start, FDDI_CODE_BIT_RATE);
        prop_assert_eq!(s.transitions(), bits.iter().filter(|&&b| b).count());
    }

    #[test]
    fn mlt3_transitions_equal_popcount(bits in prop::collection::vec(any::<bool>(), 0..500)) {
        let s = mlt3_encode(&bits, FDDI_CODE_BIT_RATE);
        prop_assert_eq!(s.transitions(), bits.iter().filter(|&&b| b).count());
    }

    #[test]
    fn scramble_is_involution(data in prop::collection::vec(any::<bool>(), 0..3000)) {
        let once = scrambler::scramble(&data, true);
        prop_assert_eq!(scrambler::scramble(&once, true), data);
    }

    #[test]
    fn exempt_bits_pass_through(data in prop::collection::vec(any::<bool>(), 1..500), every in 2usize..20) {
        let mut s = scrambler::Scrambler::new();
        let out = s.scramble_masked(&data, true, |i| i % every == 0);
        for i in (0..data.len()).step_by(every) {
            prop_assert_eq!(out[i], data[i]);
        }
        let mut s = scrambler::Scrambler::new();
        prop_assert_eq!(s.scramble_masked(&out, true, |i| i % every == 0), data);
    }

    #[test]
    fn spe_mapping_is_lossless(bits in prop::collection::vec(any::<bool>(), 0..40_000)) {
        let layout = Arc::new(spm::build_spe_layout(SpeLayoutParams::default()).unwrap());
        let frames = spm::map_fddi(&layout, &bits, Execution::Sequential);
        prop_assert_eq!(frames.clone(), spm::map_fddi(&layout, &bits, Execution::Parallel));
        prop_assert_eq!(spm::extract_fddi(&layout, &frames).unwrap(), bits.clone());
        let stream = spm::write_stream(&frames);
        let reread = spm::read_stream(&layout, &stream).unwrap();
        prop_assert_eq!(spm::extract_fddi(&layout, &reread).unwrap(), bits);
    }

    #[test]
    fn link_loss_monotone(len in 1.0f64..1900.0, extra in 1.0f64..100.0, pairs in 0usize..6) {
        let t = MediaTable::standard();
        let a = validate_link(&t, &LinkSpec::with_connectors("MF", len, pairs)).unwrap();
        let b = validate_link(&t, &LinkSpec::with_connectors("MF", len + extra, pairs)).unwrap();
        let c = validate_link(&t, &LinkSpec::with_connectors("MF", len, pairs + 1)).unwrap();
        prop_assert!(b.computed_loss_db.unwrap() > a.computed_loss_db.unwrap());
        prop_assert!(c.computed_loss_db.unwrap() > a.computed_loss_db.unwrap());
        prop_assert!(b.margin_db.unwrap() < a.margin_db.unwrap());
    }

    #[test]
    fn ring_validation_order_independent_of_execution(lens in prop::collection::vec(1.0f64..3000.0, 1..40)) {
        let t = MediaTable::standard();
        let links: Vec<LinkSpec> = lens.iter().enumerate()
            .map(|(i, &l)| LinkSpec::new(["MF", "LCF", "SMF", "UTP"][i % 4], l))
            .collect();
        let seq = validate_ring(&t, &links, links.len(), Execution::Sequential);
        let par = validate_ring(&t, &links, links.len(), Execution::Parallel);
        prop_assert_eq!(seq.rows(), par.rows());
    }

    #[test]
    fn reserved_bytes_carry_only_their_channel(
        isoch in 1usize..16,
        sizes in prop::collection::vec(1usize..200, 1..6),
        pattern in prop::collection::vec(any::<u8>(), 1..10),
    ) {
        let packet: Vec<usize> = (isoch + 1..=16).collect();
        let modes = ModeMap::with_packet(&packet);
        prop_assert_eq!(modes.count(WbcMode::Isochronous), isoch);
        let requests: Vec<ChannelRequest> = sizes.iter().enumerate()
            .map(|(i, &b)| ChannelRequest { channel: ChannelId(i as u32 + 1), bytes_per_cycle: b })
            .collect();
        let Ok(alloc) = fddi2::allocate(modes, &requests) else {
            prop_assert!(sizes.iter().sum::<usize>() > isoch * 96);
            return Ok(());
        };
        let trace: Vec<_> = pattern.iter().map(|&p| {
            let active: BTreeSet<ChannelId> = requests.iter()
                .filter(|r| p >> (r.channel.0 % 8) & 1 == 1)
                .map(|r| r.channel)
                .collect();
            fddi2::fill_cycle(&alloc, &active, p & 1 == 1)
        }).collect();
        prop_assert!(fddi2::reserved_byte_audit(&alloc, &trace).is_empty());
        for r in &requests {
            prop_assert_eq!(alloc.channel_bytes(r.channel), r.bytes_per_cycle);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn simulation_is_deterministic((cfg, traffic) in ring(), seed in any::<u64>()) {
        let d = cfg.ttrt_us * 60.0;
        let a = run_simulation(&cfg, &traffic, d, seed).unwrap();
        let b = run_simulation(&cfg, &traffic, d, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn token_trace_is_consistent((cfg, traffic) in ring(), seed in any::<u64>()) {
        let duration = cfg.ttrt_us * 80.0;
        let (m, trace) = run_traced(&cfg, &traffic, duration, seed).unwrap();
        prop_assert_eq!(trace.len() as u64, m.token_visits);
        let ft = cfg.frame_time_ns();
        let n = cfg.n_stations;
        for w in trace.windows(2) {
            // a single token: visits are sequential, in ring order, never overlapping
            prop_assert_eq!(w[1].station, (w[0].station + 1) % n);
            prop_assert!(w[1].arrival_ns >= w[0].release_ns);
        }
        let mut sent = 0u64;
        for v in &trace {
            prop_assert_eq!(v.release_ns - v.arrival_ns, (v.sync_frames + v.async_frames) * ft);
            sent += v.sync_frames + v.async_frames;
        }
        let s = m.class(TrafficClass::Sync);
        let a = m.class(TrafficClass::Async);
        prop_assert_eq!(sent, s.frames_sent + a.frames_sent);
        // conservation: every sent byte is either received or still in flight
        for c in [s, a] {
            prop_assert_eq!(c.bytes_sent, c.bytes_received + c.bytes_in_flight);
        }
        prop_assert!(m.throughput <= 1.0 + 1e-12);
        if let Some(g) = m.max_sync_gap_us {
            prop_assert!(g <= 2.0 * cfg.ttrt_us);
        }
    }

    #[test]
    fn throughput_grows_with_ttrt(n in 2usize..20, d in 50.0f64..500.0, r in 1.5f64..5.0) {
        let traffic = TrafficModel::idle().with_flow(Flow::saturated(TrafficClass::Async));
        let mut lo = RingConfig::new(n, d, d * r);
        lo.frame_bytes = 16;
        let hi = RingConfig { ttrt_us: d * r * 2.0, ..lo.clone() };
        let duration = d * r * 400.0;
        let a = run_simulation(&lo, &traffic, duration, 1).unwrap();
        let b = run_simulation(&hi, &traffic, duration, 1).unwrap();
        prop_assert!(b.throughput > a.throughput);
    }

    #[test]
    fn destination_stripping_throughput_bounds(n in 2usize..12, d in 20.0f64..400.0, seed in any::<u64>()) {
        let traffic = TrafficModel::idle().with_flow(Flow::saturated(TrafficClass::Async));
        let mut cfg = RingConfig::new(n, d, d * 3.0);
        cfg.stripping = Stripping::Destination;
        let m = run_simulation(&cfg, &traffic, d * 100.0, seed).unwrap();
        prop_assert!(m.throughput >= 0.99);
        prop_assert!(m.throughput <= n as f64 + 1e-9);
    }
}
