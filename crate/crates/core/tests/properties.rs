//! Property tests for the imaging and metrics contracts.

use inpaint_forensics::image::{
    binarize, box_blur, decode_image, encode_image, resize_bilinear, BinaryMask, Image,
    ProbabilityMask,
};
use inpaint_forensics::metrics::{confusion, metric_suite};
use proptest::prelude::*;

fn arb_gray_image(max_side: usize) -> impl Strategy<Value = Image> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        proptest::collection::vec(0u8..=255, w * h).prop_map(move |bytes| {
            let data = bytes.iter().map(|&b| b as f64 / 255.0).collect();
            Image::new(w, h, 1, data).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pgm_roundtrip_is_identity(img in arb_gray_image(24)) {
        let encoded = encode_image(&img, 8);
        let back = decode_image(&encoded).unwrap();
        prop_assert_eq!(img, back);
    }

    #[test]
    fn blur_output_within_input_range(img in arb_gray_image(16), radius in 0usize..4) {
        let lo = img.data().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = img.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let out = box_blur(&img, radius);
        for &v in out.data() {
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn blur_preserves_constant_mean(v in 0.0f64..=1.0, radius in 0usize..6) {
        let img = Image::new(12, 9, 1, vec![v; 108]).unwrap();
        let out = box_blur(&img, radius);
        let mean = out.data().iter().sum::<f64>() / 108.0;
        prop_assert!((mean - v).abs() < 1e-9);
    }

    #[test]
    fn resize_factor_one_bitwise(img in arb_gray_image(12)) {
        let out = resize_bilinear(&img, 1.0).unwrap();
        prop_assert_eq!(img, out);
    }

    #[test]
    fn binarize_monotone(values in proptest::collection::vec(0.0f64..=1.0, 36),
                         t_lo in 0.0f64..=1.0, t_hi in 0.0f64..=1.0) {
        let (t_lo, t_hi) = if t_lo <= t_hi { (t_lo, t_hi) } else { (t_hi, t_lo) };
        let mask = ProbabilityMask::new(6, 6, values);
        let a = binarize(&mask, t_lo);
        let b = binarize(&mask, t_hi);
        for (x, y) in a.bits.iter().zip(&b.bits) {
            // raising the threshold never turns a false bit true
            prop_assert!(!*y || *x);
        }
    }

    #[test]
    fn metric_suite_bounds_and_f1_identity(
        bits_a in proptest::collection::vec(any::<bool>(), 64),
        bits_b in proptest::collection::vec(any::<bool>(), 64),
    ) {
        let pred = BinaryMask::new(8, 8, bits_a);
        let truth = BinaryMask::new(8, 8, bits_b);
        let c = confusion(&pred, &truth).unwrap();
        prop_assert_eq!(c.total(), 64);
        let m = metric_suite(&c);
        for v in [m.iou, m.f1, m.precision, m.recall, m.accuracy, m.balanced_accuracy]
            .into_iter()
            .flatten()
        {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if let (Some(iou), Some(f1)) = (m.iou, m.f1) {
            prop_assert!((f1 - 2.0 * iou / (1.0 + iou)).abs() < 1e-12);
            prop_assert!(iou <= f1 + 1e-15);
        }
    }

    #[test]
    fn self_comparison_is_perfect(bits in proptest::collection::vec(any::<bool>(), 49)) {
        let m = BinaryMask::new(7, 7, bits);
        let suite = metric_suite(&confusion(&m, &m).unwrap());
        let nonempty = m.count_true() > 0;
        let nonfull = m.count_true() < 49;
        if nonempty && nonfull {
            prop_assert_eq!(suite.iou, Some(1.0));
            prop_assert_eq!(suite.f1, Some(1.0));
            prop_assert_eq!(suite.precision, Some(1.0));
            prop_assert_eq!(suite.recall, Some(1.0));
            prop_assert_eq!(suite.balanced_accuracy, Some(1.0));
        }
        prop_assert_eq!(suite.accuracy, Some(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ppm_rgb_roundtrip_is_identity(bytes in proptest::collection::vec(0u8..=255, 3 * 30)) {
        let data: Vec<f64> = bytes.iter().map(|&b| b as f64 / 255.0).collect();
        // plane-major layout: r plane, g plane, b plane
        let img = Image::new(6, 5, 3, data).unwrap();
        let encoded = encode_image(&img, 8);
        let back = decode_image(&encoded).unwrap();
        prop_assert_eq!(img, back);
    }
}
