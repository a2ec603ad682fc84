use proptest::prelude::*;
use sortmeans::baselines::{fuzzy::membership_row, median_cut, wan_split, wu_bipartition};
use sortmeans::cluster::{
    assign_naive, assign_sort_means, lloyd, update_centers, weighted_sse, AssignStrategy, ClusterState, Palette,
    Termination,
};
use sortmeans::imageio::{map_pixels, read_ppm, write_ppm};
use sortmeans::metrics::{mse, psnr};
use sortmeans::{ColorHistogram, RgbColor, RgbImage, Samples};

fn color() -> impl Strategy<Value = RgbColor> {
    any::<[u8; 3]>().prop_map(|[r, g, b]| RgbColor::new(r, g, b))
}

/// Small images drawing from a limited set of colors so that duplicates and
/// ties are common.
fn image() -> impl Strategy<Value = RgbImage> {
    (1usize..24, 1usize..24, prop::collection::vec(color(), 1..40)).prop_flat_map(|(w, h, colors)| {
        prop::collection::vec(0..colors.len(), w * h).prop_map(move |idx| {
            RgbImage::new(w, h, idx.iter().map(|&i| colors[i]).collect()).unwrap()
        })
    })
}

fn samples() -> impl Strategy<Value = Samples> {
    prop::collection::vec(([0u8..=255, 0u8..=255, 0u8..=255], 1u32..100), 1..300).prop_map(|pts| {
        // A coarse grid makes exact distance ties frequent.
        let points = pts.iter().map(|(p, _)| p.map(|v| f64::from(v / 32 * 32))).collect();
        let weights = pts.iter().map(|&(_, w)| f64::from(w)).collect();
        Samples::new(points, weights)
    })
}

fn palette(max_k: usize) -> impl Strategy<Value = Palette> {
    prop::collection::vec([0u8..=8, 0u8..=8, 0u8..=8], 1..=max_k)
        .prop_map(|cs| Palette::new(cs.iter().map(|c| c.map(|v| (f64::from(v) * 32.0).min(255.0))).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 96,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn ppm_round_trip(img in image()) {
        prop_assert_eq!(read_ppm(&write_ppm(&img)).unwrap(), img);
    }

    #[test]
    fn sort_means_equals_naive(s in samples(), p in palette(24), iters in 1usize..6) {
        // Empty-cluster repair needs as many distinct points as centers.
        let mut distinct = s.points.clone();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        let k = p.len().min(distinct.len());
        let mut palette = Palette::new(p.centers()[..k].to_vec()).unwrap();
        let mut state = ClusterState::new(vec![0; s.len()]);
        assign_naive(&s, &palette, &mut state.memberships);
        for _ in 0..iters {
            palette = update_centers(&s, &state.memberships, palette.len());
            let mut naive = vec![0; s.len()];
            let n = assign_naive(&s, &palette, &mut naive);
            let sm = assign_sort_means(&s, &palette, &mut state);
            prop_assert_eq!(&state.memberships, &naive);
            prop_assert!(sm.distance_evals <= n.distance_evals);
            prop_assert_eq!(sm.sse, n.sse);
        }
    }

    #[test]
    fn wsm_sse_never_increases(s in samples(), k in 1usize..12) {
        let mut distinct = s.points.clone();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        let k = k.min(distinct.len());
        let initial = Palette::new(distinct[..k].to_vec()).unwrap();
        let out = lloyd(&s, initial, &Termination::fixed(12), AssignStrategy::SortMeans);
        for pair in out.sse_history.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-9 * pair[0].max(1.0));
        }
    }

    #[test]
    fn mapping_is_idempotent_and_bounded(img in image(), p in palette(10)) {
        let once = map_pixels(&img, &p).unwrap();
        let twice = map_pixels(&once, &p).unwrap();
        prop_assert_eq!(&once, &twice);
        let distinct = ColorHistogram::from_image(&once).len();
        prop_assert!(distinct <= p.len());
    }

    #[test]
    fn mapped_mse_tracks_weighted_sse(img in image(), p in palette(10)) {
        let hist = ColorHistogram::from_image(&img);
        let s = Samples::from_histogram(&hist);
        let rounded: Vec<RgbColor> = p.rounded();
        let p = Palette::from_colors(&rounded).unwrap();
        let mut m = vec![0; s.len()];
        assign_naive(&s, &p, &mut m);
        let sse = weighted_sse(&s, &p, &m);
        let err = mse(&img, &map_pixels(&img, &p).unwrap()).unwrap();
        prop_assert!((err - sse).abs() <= 1.0, "{} vs {}", err, sse);
    }

    #[test]
    fn mse_symmetry_and_psnr_order(a in image(), seed in any::<u64>()) {
        let b = RgbImage::from_fn(a.width(), a.height(), |x, y| {
            let p = a.get(x, y);
            RgbColor::new(p.r ^ (seed as u8), p.g, p.b.wrapping_add((seed >> 8) as u8))
        }).unwrap();
        prop_assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
        prop_assert_eq!(mse(&a, &a).unwrap(), 0.0);
        let m = mse(&a, &b).unwrap();
        if m > 0.0 {
            prop_assert!(psnr(m).unwrap() > psnr(m * 1.5).unwrap());
        }
    }

    #[test]
    fn box_quantizers_respect_k(img in image(), k in 1usize..20) {
        let cells = {
            let mut c: Vec<u32> = img.pixels().iter().map(|p| (u32::from(p.r >> 3) << 10) | (u32::from(p.g >> 3) << 5) | u32::from(p.b >> 3)).collect();
            c.sort_unstable();
            c.dedup();
            c.len()
        };
        for palette in [median_cut(&img, k), wan_split(&img, k), wu_bipartition(&img, k)] {
            prop_assert!(palette.len() <= k);
            if cells >= k {
                prop_assert_eq!(palette.len(), k);
            }
            for c in palette.centers() {
                prop_assert!(c.iter().all(|v| (0.0..=255.0).contains(v)));
            }
        }
    }

    #[test]
    fn fuzzy_rows_sum_to_one(x in [0.0f64..255.0, 0.0f64..255.0, 0.0f64..255.0], p in palette(12), q in 1.2f64..4.0, alpha in prop::option::of(0.0f64..50.0)) {
        let u = membership_row(&x, p.centers(), q, alpha);
        prop_assert!((u.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        prop_assert!(u.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
    }
}
