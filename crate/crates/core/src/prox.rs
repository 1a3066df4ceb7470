/// Proximal map of `t * |x|_2`: shrinks `z` radially by `t`, to exactly zero
/// when `|z|_2 <= t`.
pub fn group_soft_threshold(z: &[f64], t: f64) -> Vec<f64> {
    let mut out = z.to_vec();
    group_soft_threshold_in_place(&mut out, t);
    out
}

pub fn group_soft_threshold_in_place(z: &mut [f64], t: f64) {
    debug_assert!(t >= 0.0);
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > t {
        let scale = 1.0 - t / norm;
        z.iter_mut().for_each(|v| *v *= scale);
    } else {
        z.iter_mut().for_each(|v| *v = 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prox_objective(x: &[f64], z: &[f64], t: f64) -> f64 {
        let d: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
        0.5 * d + t * x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn below_threshold_is_zero() {
        assert_eq!(group_soft_threshold(&[0.3, 0.4], 1.0), vec![0.0, 0.0]);
        assert_eq!(group_soft_threshold(&[0.3, 0.4], 0.5), vec![0.0, 0.0]);
    }

    #[test]
    fn zero_threshold_is_identity() {
        let z = [1.5, -2.0, 0.25];
        assert_eq!(group_soft_threshold(&z, 0.0), z.to_vec());
    }

    #[test]
    fn shrinks_three_four() {
        // oracle: minimize along the ray through z (the minimizer is collinear
        // with z), golden-section on the radius
        let z = [3.0, 4.0];
        let t = 1.0;
        let (mut lo, mut hi) = (0.0f64, 5.0f64);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let f = |r: f64| prox_objective(&[0.6 * r, 0.8 * r], &z, t);
        for _ in 0..200 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let r = 0.5 * (lo + hi);
        let x = group_soft_threshold(&z, t);
        assert!((x[0] - 0.6 * r).abs() < 1e-6 && (x[1] - 0.8 * r).abs() < 1e-6);
        assert!((x[0] - 2.4).abs() < 1e-12 && (x[1] - 3.2).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn output_is_a_local_minimum(
            z in proptest::collection::vec(-3.0f64..3.0, 1..6),
            t in 0.0f64..3.0,
            dir in proptest::collection::vec(-1.0f64..1.0, 6),
        ) {
            let x = group_soft_threshold(&z, t);
            let fx = prox_objective(&x, &z, t);
            for eps in [1e-3, 1e-1] {
                let y: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + eps * d).collect();
                prop_assert!(fx <= prox_objective(&y, &z, t) + 1e-12);
            }
        }
    }
}
