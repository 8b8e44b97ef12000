use ndarray::Array2;
use proptest::prelude::*;

use ndwt::io::{read_csv_matrix, write_csv_matrix, Coefficients};
use ndwt::{
    atrous_forward_1d, atrous_forward_2d, build_ndwt_matrix, build_weight_matrix, forward_1d, forward_2d,
    get_filter, inverse_1d, inverse_2d, supported_names, CoefficientGrid2D,
};

fn filter_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(supported_names())
}

fn signal(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, m)
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_and_oracle_1d(
        name in filter_name(),
        (m, y) in (2usize..160).prop_flat_map(|m| (Just(m), signal(m))),
        p in 1usize..=6,
        shift in -5i64..5,
    ) {
        let f = get_filter(name).unwrap();
        let w = build_ndwt_matrix(&f, m, p, shift).unwrap();
        let t = build_weight_matrix(m, p).unwrap();
        let d = forward_1d(&w, &y).unwrap();
        let reference = atrous_forward_1d(&f, &y, p, shift).unwrap();
        prop_assert!(max_abs(d.as_slice(), reference.as_slice()) < 1e-9);
        let back = inverse_1d(&w, &t, &d).unwrap();
        prop_assert!(max_abs(&y, &back) < 1e-9);
    }

    #[test]
    fn circular_shift_moves_every_block(
        name in filter_name(),
        (m, y) in (4usize..80).prop_flat_map(|m| (Just(m), signal(m))),
        p in 1usize..=4,
        k in 1usize..10,
    ) {
        let f = get_filter(name).unwrap();
        let w = build_ndwt_matrix(&f, m, p, 0).unwrap();
        let k = k % m;
        let rotated: Vec<f64> = (0..m).map(|i| y[(i + k) % m]).collect();
        let d = forward_1d(&w, &y).unwrap();
        let dr = forward_1d(&w, &rotated).unwrap();
        for b in 0..=p {
            let expected: Vec<f64> = (0..m).map(|i| d.block(b)[(i + k) % m]).collect();
            prop_assert!(max_abs(dr.block(b), &expected) < 1e-9);
        }
    }

    #[test]
    fn rank_one_images_transform_separably(
        (m, u) in (2usize..40).prop_flat_map(|m| (Just(m), signal(m))),
        (n, v) in (2usize..40).prop_flat_map(|n| (Just(n), signal(n))),
        rows in filter_name(),
        cols in filter_name(),
        pr in 1usize..=3,
        pc in 1usize..=3,
    ) {
        let (fr, fc) = (get_filter(rows).unwrap(), get_filter(cols).unwrap());
        let w1 = build_ndwt_matrix(&fr, m, pr, 0).unwrap();
        let w2 = build_ndwt_matrix(&fc, n, pc, 0).unwrap();
        let a = Array2::from_shape_fn((m, n), |(i, j)| u[i] * v[j]);
        let b = forward_2d(&w1, &w2, &a).unwrap();
        let du = forward_1d(&w1, &u).unwrap();
        let dv = forward_1d(&w2, &v).unwrap();
        let scale = 1.0 + a.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        for ((i, j), x) in b.data().indexed_iter() {
            prop_assert!((x - du.as_slice()[i] * dv.as_slice()[j]).abs() < 1e-9 * scale);
        }
        let atrous = atrous_forward_2d(&fr, &fc, &a, pr, pc, 0).unwrap();
        prop_assert!(max_abs(b.data().as_slice().unwrap(), atrous.data().as_slice().unwrap()) < 1e-9 * scale);
        let t1 = build_weight_matrix(m, pr).unwrap();
        let t2 = build_weight_matrix(n, pc).unwrap();
        let back = inverse_2d(&w1, &t1, &b, &t2, &w2).unwrap();
        prop_assert!(max_abs(a.as_slice().unwrap(), back.as_slice().unwrap()) < 1e-9 * scale);
    }

    #[test]
    fn containers_round_trip_bit_exact(
        (m, y) in (2usize..50).prop_flat_map(|m| (Just(m), prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), m))),
        p in 1usize..=3,
        shift in -3i64..3,
    ) {
        let w = build_ndwt_matrix(&get_filter("db6").unwrap(), m, p, shift).unwrap();
        let d = forward_1d(&w, &y).unwrap();
        let container = Coefficients::OneD(d);
        let mut buf = Vec::new();
        container.write_to(&mut buf).unwrap();
        let back = Coefficients::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &container);

        // CSV plus layout sidecar
        let mut csv = Vec::new();
        write_csv_matrix(&mut csv, &container.to_matrix()).unwrap();
        let parsed = read_csv_matrix(csv.as_slice()).unwrap();
        let rebuilt = Coefficients::from_matrix(parsed, &container.layout()).unwrap();
        prop_assert_eq!(rebuilt, container);
    }
}

#[test]
fn two_dimensional_container_round_trip() {
    let a = Array2::from_shape_fn((9, 13), |(i, j)| ((i * 13 + j) as f64 * 0.37).sin());
    let w1 = build_ndwt_matrix(&get_filter("haar").unwrap(), 9, 2, 1).unwrap();
    let w2 = build_ndwt_matrix(&get_filter("coif6").unwrap(), 13, 3, 1).unwrap();
    let grid: CoefficientGrid2D = forward_2d(&w1, &w2, &a).unwrap();
    let container = Coefficients::TwoD(grid);
    let mut buf = Vec::new();
    container.write_to(&mut buf).unwrap();
    assert_eq!(Coefficients::read_from(buf.as_slice()).unwrap(), container);
    for cut in [0, 5, buf.len() / 2, buf.len() - 1] {
        assert!(Coefficients::read_from(&buf[..cut]).is_err(), "cut at {cut}");
    }
}
