/// Relative-error check against a reference value; falls back to the
/// absolute difference when the reference is zero. A non-finite computed
/// value never verifies.
pub fn verify_scalar(computed: f64, reference: f64, epsilon: f64) -> bool {
    debug_assert!(epsilon > 0.0);
    relative_error(computed, reference).is_some_and(|e| e <= epsilon)
}

/// `None` when `computed` is not finite.
pub fn relative_error(computed: f64, reference: f64) -> Option<f64> {
    if !computed.is_finite() {
        return None;
    }
    let diff = (computed - reference).abs();
    Some(if reference == 0.0 {
        diff
    } else {
        diff / reference.abs()
    })
}

/// Element-wise [`verify_scalar`] over paired slices.
pub fn verify_all(computed: &[f64], reference: &[f64], epsilon: f64) -> bool {
    computed.len() == reference.len()
        && computed
            .iter()
            .zip(reference)
            .all(|(&c, &r)| verify_scalar(c, r, epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_match() {
        assert!(verify_scalar(3.5, 3.5, 1e-12));
    }

    #[test]
    fn just_outside_band() {
        let eps = 1e-8;
        assert!(!verify_scalar(1.0 + 2.0 * eps, 1.0, eps));
    }

    #[test]
    fn zero_reference() {
        assert!(verify_scalar(0.0, 0.0, 1e-8));
        assert!(!verify_scalar(1e-3, 0.0, 1e-8));
    }

    #[test]
    fn non_finite_fails() {
        assert!(!verify_scalar(f64::NAN, 1.0, 1.0));
        assert!(!verify_scalar(f64::INFINITY, 1.0, 1.0));
    }

    proptest! {
        #[test]
        fn symmetric_in_error_sign(r in 1e-3f64..1e3, d in 0.0f64..1e-2, eps in 1e-9f64..1e-1) {
            prop_assert_eq!(verify_scalar(r + d, r, eps), verify_scalar(r - d, r, eps));
        }

        #[test]
        fn monotone_in_epsilon(c in -10.0f64..10.0, r in 0.5f64..10.0, e1 in 1e-9f64..1.0, f in 1.0f64..100.0) {
            if verify_scalar(c, r, e1) {
                prop_assert!(verify_scalar(c, r, e1 * f));
            }
        }
    }
}
