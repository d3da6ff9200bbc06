use proptest::prelude::*;

use ssvep_core::edf::{parse_edf, write_edf, EdfFileHeader, EdfRecording, SignalHeader};
use ssvep_core::pipeline::{process_trial, PipelineConfig};
use ssvep_core::stats::{chi_square_sf, kruskal_wallis, rank_with_ties, GroupedAmplitudes};
use ssvep_core::SampleSeries;

fn groups() -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-50i32..50, 1..12), 2..6)
        .prop_map(|gs| {
            gs.into_iter()
                .map(|g| g.into_iter().map(f64::from).collect())
                .collect()
        })
        .prop_filter("need 3 observations", |gs: &Vec<Vec<f64>>| {
            gs.iter().map(Vec::len).sum::<usize>() >= 3
        })
}

fn labelled(gs: &[Vec<f64>]) -> GroupedAmplitudes {
    GroupedAmplitudes::new(
        gs.iter()
            .enumerate()
            .map(|(j, g)| (j as f64, g.clone()))
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn kw_invariant_under_monotone_transform(gs in groups(), scale in 0.1f64..10.0, shift in -100f64..100.0) {
        let base = kruskal_wallis(&labelled(&gs)).unwrap();
        let moved: Vec<Vec<f64>> = gs
            .iter()
            .map(|g| g.iter().map(|&x| (scale * x + shift).exp().ln_1p()).collect())
            .collect();
        let other = kruskal_wallis(&labelled(&moved)).unwrap();
        prop_assert!((base.h_statistic - other.h_statistic).abs() < 1e-9);
        prop_assert_eq!(base.mean_ranks(), other.mean_ranks());
    }

    #[test]
    fn kw_rank_sum_and_bounds(gs in groups()) {
        let kw = kruskal_wallis(&labelled(&gs)).unwrap();
        prop_assert!(kw.rank_sum_residual() < 1e-12);
        prop_assert!(kw.h_statistic >= 0.0);
        prop_assert!(kw.h_statistic <= kw.n_total as f64 - 1.0 + 1e-9);
        prop_assert!((0.0..=1.0).contains(&kw.p_value));
        prop_assert_eq!(kw.df as usize, gs.len() - 1);
    }

    #[test]
    fn ranks_sum_to_triangle(v in proptest::collection::vec(-20i32..20, 1..60)) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let r = rank_with_ties(&v).unwrap();
        let n = v.len() as f64;
        prop_assert!((r.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn chi_square_sf_monotone(x in 0f64..200.0, dx in 0f64..20.0, df in 1u32..12) {
        let a = chi_square_sf(x, df).unwrap().p;
        let b = chi_square_sf(x + dx, df).unwrap().p;
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn pipeline_is_linear_before_the_max(amp in 0.5f64..50.0, k in 0.25f64..8.0, f in prop_oneof![Just(7.0), Just(8.0), Just(9.0), Just(10.0)]) {
        let tone = |a: f64| {
            let v = (0..512).map(|i| a * (2.0 * std::f64::consts::PI * f * i as f64 / 128.0 + 0.3).sin()).collect();
            SampleSeries::new(v, 128.0, "x").unwrap()
        };
        let cfg = PipelineConfig::default();
        let x = process_trial(&tone(amp), f, 1, &cfg).unwrap();
        let y = process_trial(&tone(k * amp), f, 1, &cfg).unwrap();
        prop_assert_eq!(x.len(), 4);
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((q.amplitude - k * p.amplitude).abs() <= 1e-9 * q.amplitude);
        }
    }

    #[test]
    fn edf_parse_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..1200)) {
        let _ = parse_edf(&bytes);
    }

    #[test]
    fn edf_single_channel_round_trip(samples in proptest::collection::vec(any::<i16>(), 0..20).prop_map(|v| v.repeat(4)), spr in 1usize..5) {
        let usable = samples.len() / spr * spr;
        let header = EdfFileHeader::new(0, 1.0, 1);
        let rec = EdfRecording::single_channel(header, SignalHeader::new("O2", -100.0, 100.0, spr), samples[..usable].to_vec()).unwrap();
        let bytes = write_edf(&rec).unwrap();
        prop_assert_eq!(bytes.len(), 512 + 2 * usable);
        prop_assert_eq!(parse_edf(&bytes).unwrap(), rec);
    }
}
