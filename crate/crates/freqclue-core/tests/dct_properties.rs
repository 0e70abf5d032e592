//! Transform invariants checked against the naive quadruple-loop oracle and
//! by property testing over plane shapes.

mod common;

use common::{max_abs_diff, naive_dct2, random_array2, rng};
use freqclue_core::dct::{dct2_forward, dct2_inverse, Plane};
use ndarray::Array2;
use proptest::prelude::*;

const SIZES: [usize; 6] = [2, 4, 7, 8, 16, 32];

#[test]
fn separable_path_matches_naive_oracle() {
    let mut rng = rng(101);
    for &h in &SIZES {
        for &w in &SIZES {
            if h > 16 || w > 16 {
                continue;
            }
            let data = random_array2(h, w, &mut rng);
            let fast = dct2_forward(&Plane::new(data.clone()).unwrap()).unwrap();
            let naive = naive_dct2(&data);
            let diff = max_abs_diff(fast.values().iter(), naive.iter());
            assert!(diff < 1e-9, "{h}x{w}: max abs diff {diff}");
        }
    }
}

#[test]
fn roundtrip_on_all_size_combinations() {
    let mut rng = rng(102);
    for &h in &SIZES {
        for &w in &SIZES {
            let data = random_array2(h, w, &mut rng);
            let plane = Plane::new(data.clone()).unwrap();
            let back = dct2_inverse(&dct2_forward(&plane).unwrap()).unwrap();
            let diff = max_abs_diff(data.iter(), back.values().iter());
            assert!(diff < 1e-9, "{h}x{w}: roundtrip error {diff}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_energy_is_preserved(
        h_idx in 0..SIZES.len(),
        w_idx in 0..SIZES.len(),
        seed in 0u64..1 << 48,
    ) {
        let mut rng = rng(seed);
        let data = random_array2(SIZES[h_idx], SIZES[w_idx], &mut rng);
        let spatial: f64 = data.iter().map(|v| v * v).sum();
        let spectrum = dct2_forward(&Plane::new(data).unwrap()).unwrap();
        let spectral: f64 = spectrum.values().iter().map(|v| v * v).sum();
        let scale = spatial.max(1e-30);
        prop_assert!(
            ((spatial - spectral) / scale).abs() < 1e-9,
            "spatial {spatial} vs spectral {spectral}"
        );
    }

    #[test]
    fn transform_is_linear(
        h_idx in 0..SIZES.len(),
        w_idx in 0..SIZES.len(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        seed in 0u64..1 << 48,
    ) {
        let (h, w) = (SIZES[h_idx], SIZES[w_idx]);
        let mut rng = rng(seed);
        let x = random_array2(h, w, &mut rng);
        let y = random_array2(h, w, &mut rng);
        let combined: Array2<f64> = &(&x * a) + &(&y * b);
        let lhs = dct2_forward(&Plane::new(combined).unwrap()).unwrap();
        let fx = dct2_forward(&Plane::new(x).unwrap()).unwrap();
        let fy = dct2_forward(&Plane::new(y).unwrap()).unwrap();
        let rhs: Array2<f64> = &(fx.values() * a) + &(fy.values() * b);
        let diff = max_abs_diff(lhs.values().iter(), rhs.iter());
        prop_assert!(diff < 1e-9, "max abs diff {diff}");
    }

    #[test]
    fn roundtrip_property(
        h_idx in 0..SIZES.len(),
        w_idx in 0..SIZES.len(),
        seed in 0u64..1 << 48,
    ) {
        let mut rng = rng(seed);
        let data = random_array2(SIZES[h_idx], SIZES[w_idx], &mut rng);
        let plane = Plane::new(data.clone()).unwrap();
        let back = dct2_inverse(&dct2_forward(&plane).unwrap()).unwrap();
        let diff = max_abs_diff(data.iter(), back.values().iter());
        prop_assert!(diff < 1e-9);
    }
}
