use actin_core::analysis::{threshold_simplify, FrequencyVector, Transition};
use actin_core::localization::Seed;
use actin_core::metrics::{activity, compute_configured, window_histogram, MeasureSource, PatternFold};
use actin_core::render::{render_chain, render_incoherence, BLACK};
use actin_core::step::{run, run_reference, step, step_reference, PackedState};
use actin_core::{AutomatonState, Chain, ChainState, Rule, SpaceTimeRecord};
use proptest::prelude::*;

fn state(n: usize) -> impl Strategy<Value = AutomatonState> {
    (prop::collection::vec(0u8..2, n), prop::collection::vec(0u8..2, n))
        .prop_map(|(x, y)| AutomatonState::new(ChainState::from_cells(x).unwrap(), ChainState::from_cells(y).unwrap()).unwrap())
}

fn sized_state(max: usize) -> impl Strategy<Value = AutomatonState> {
    (1..=max).prop_flat_map(state)
}

fn rule() -> impl Strategy<Value = Rule> {
    (0usize..1024).prop_map(|i| Rule::from_index(i).unwrap())
}

proptest! {
    #[test]
    fn codec_roundtrip(c0 in 0u32..32, c1 in 0u32..32) {
        let r = Rule::decode(c0, c1).unwrap();
        prop_assert_eq!(r.encode(), (c0, c1));
        prop_assert_eq!(Rule::from_rows(*r.row(0), *r.row(1)).unwrap(), r);
        prop_assert_eq!(r.to_string().parse::<Rule>().unwrap(), r);
    }

    #[test]
    fn packed_stepper_matches_reference(r in rule(), s in sized_state(200)) {
        prop_assert_eq!(step(&s, &r), step_reference(&s, &r));
        let packed = PackedState::from_state(&s);
        prop_assert_eq!(packed.to_state(), s);
    }

    #[test]
    fn runs_agree(r in rule(), s in sized_state(70), tau in 1usize..40) {
        prop_assert_eq!(run(&r, &s, tau).unwrap(), run_reference(&r, &s, tau).unwrap());
    }

    #[test]
    fn reflect_swap_commutes_with_step(r in rule(), s in sized_state(130)) {
        prop_assert_eq!(step(&s.reflect_swap(), &r), step(&s, &r).reflect_swap());
        prop_assert_eq!(s.reflect_swap().reflect_swap(), s);
    }

    #[test]
    fn resting_stays_resting_without_spontaneous_excitation(r in rule(), n in 1usize..100) {
        let rest = AutomatonState::resting(n);
        let next = step(&rest, &r);
        prop_assert_eq!(next.excited() == 0, !r.excites_from_rest());
    }

    #[test]
    fn histogram_accounts_for_every_nonresting_window(r in rule(), s in (3usize..40).prop_flat_map(state), tau in 2usize..20) {
        let rec = run(&r, &s, tau).unwrap();
        let h = window_histogram(&rec, Chain::X).unwrap();
        let total: u64 = h.iter().map(|(_, c)| c).sum();
        prop_assert_eq!(total, h.eta());
        prop_assert!(h.eta() <= ((rec.n - 2) * (rec.tau - 1)) as u64);
        prop_assert_eq!(h.count(0), 0);
    }

    #[test]
    fn measures_stay_in_range(r in rule(), s in (3usize..60).prop_flat_map(state), tau in 2usize..30) {
        let rec = run(&r, &s, tau).unwrap();
        for fold in [PatternFold::Full, PatternFold::Mod128] {
            for source in [MeasureSource::X, MeasureSource::Y, MeasureSource::Both] {
                let m = compute_configured(&rec, source, fold).unwrap();
                prop_assert!(m.h >= 0.0 && m.h <= (512f64).ln() + 1e-12);
                for v in [m.d, m.r, m.p, m.a, m.i] {
                    prop_assert!((0.0..=1.0).contains(&v), "{:?}", m);
                }
                prop_assert!(m.z > 0.0 && m.z <= 1.0);
            }
        }
    }

    #[test]
    fn black_pixels_count_activity(r in rule(), s in (1usize..50).prop_flat_map(state), tau in 1usize..20) {
        let rec = run(&r, &s, tau).unwrap();
        for chain in [Chain::X, Chain::Y] {
            let img = render_chain(&rec, chain);
            let black = img.pixels.iter().filter(|&&p| p == BLACK).count();
            let expected = activity(&rec, chain) * (rec.n * (rec.tau + 1)) as f64;
            prop_assert!((black as f64 - expected).abs() < 1e-6);
        }
        let swapped = SpaceTimeRecord::from_rows(r, rec.rows(Chain::Y).to_vec(), rec.rows(Chain::X).to_vec()).unwrap();
        prop_assert_eq!(render_incoherence(&rec), render_incoherence(&swapped));
    }

    #[test]
    fn threshold_is_monotone(values in prop::array::uniform5(0.0f64..=1.0), lo in 0.0f64..1.0, step in 0.0f64..0.5) {
        let v = FrequencyVector::from_values(Transition::Excite, values);
        let a = threshold_simplify(&v, lo);
        let b = threshold_simplify(&v, lo + step);
        for i in 0..5 {
            prop_assert!(b[i] <= a[i]);
        }
    }

    #[test]
    fn seed_placement_roundtrips(index in 0usize..1024, n in 20usize..200) {
        let seed = Seed::from_index(index);
        let s = seed.place(n).unwrap();
        prop_assert_eq!(s.excited() as u32, seed.sx.count_ones() + seed.sy.count_ones());
        prop_assert_eq!(seed.reflect_swapped().place(n).unwrap().excited(), s.excited());
    }
}
