//! Clebsch-Gordan coefficients in the Condon-Shortley convention,
//! evaluated with the Racah closed-form sum.
//!
//! Arguments are doubled quantum numbers (`two_j = 2j`) so half-integer
//! spins are representable, although the solver itself only needs integer
//! spins up to ~4.

/// Factorials 0!..=40! (exact in f64 up to 22!, ample for the ranges here).
fn factorial(k: i64) -> f64 {
    debug_assert!((0..=40).contains(&k));
    let mut acc = 1.0;
    for i in 2..=k {
        acc *= i as f64;
    }
    acc
}

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | J M>` with doubled arguments.
///
/// Selection-rule violations (M != m1 + m2, triangle rule, |m| > j, parity
/// of doubled arguments) return exactly 0.
pub fn clebsch_gordan_two(
    two_j1: i64,
    two_m1: i64,
    two_j2: i64,
    two_m2: i64,
    two_j: i64,
    two_m: i64,
) -> f64 {
    if two_j1 < 0 || two_j2 < 0 || two_j < 0 {
        return 0.0;
    }
    if two_m != two_m1 + two_m2 {
        return 0.0;
    }
    if two_m1.abs() > two_j1 || two_m2.abs() > two_j2 || two_m.abs() > two_j {
        return 0.0;
    }
    // j and m must have the same parity (j + m integer).
    if (two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 || (two_j + two_m) % 2 != 0 {
        return 0.0;
    }
    if two_j > two_j1 + two_j2 || two_j < (two_j1 - two_j2).abs() {
        return 0.0;
    }
    // All factorial arguments below are integers when j1 + j2 + J is.
    if (two_j1 + two_j2 + two_j) % 2 != 0 {
        return 0.0;
    }

    let h = |x: i64| -> f64 {
        debug_assert!(x % 2 == 0);
        factorial(x / 2)
    };

    let prefactor = ((two_j + 1) as f64 * h(two_j1 + two_j2 - two_j) * h(two_j1 - two_j2 + two_j)
        / h(two_j1 + two_j2 + two_j + 2)
        * h(two_j2 - two_j1 + two_j))
        .sqrt()
        * (h(two_j + two_m) * h(two_j - two_m) * h(two_j1 - two_m1) * h(two_j1 + two_m1)
            * h(two_j2 - two_m2)
            * h(two_j2 + two_m2))
        .sqrt();

    // Racah sum over all k with non-negative factorial arguments.
    let k_min = 0i64
        .max((two_j2 - two_j - two_m1) / 2)
        .max((two_j1 + two_m2 - two_j) / 2);
    let k_max = ((two_j1 + two_j2 - two_j) / 2)
        .min((two_j1 - two_m1) / 2)
        .min((two_j2 + two_m2) / 2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let denom = factorial(k)
            * h(two_j1 + two_j2 - two_j - 2 * k)
            * h(two_j1 - two_m1 - 2 * k)
            * h(two_j2 + two_m2 - 2 * k)
            * h(two_j - two_j2 + two_m1 + 2 * k)
            * h(two_j - two_j1 - two_m2 + 2 * k);
        sum += sign / denom;
    }
    prefactor * sum
}

/// Integer-spin convenience wrapper: `<j1 m1; j2 m2 | J M>`.
pub fn clebsch_gordan(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    clebsch_gordan_two(2 * j1, 2 * m1, 2 * j2, 2 * m2, 2 * j, 2 * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_singlet_coefficients() {
        assert_relative_eq!(
            clebsch_gordan(1, 1, 1, -1, 0, 0),
            1.0 / 3.0_f64.sqrt(),
            epsilon = 1e-14
        );
        assert_relative_eq!(
            clebsch_gordan(2, 2, 2, -2, 0, 0),
            1.0 / 5.0_f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn selection_rules_give_exact_zero() {
        assert_eq!(clebsch_gordan(1, 1, 1, 1, 0, 0), 0.0); // M != m1 + m2
        assert_eq!(clebsch_gordan(1, 0, 1, 0, 3, 0), 0.0); // triangle violated
        assert_eq!(clebsch_gordan(1, 2, 1, -2, 0, 0), 0.0); // |m| > j
    }

    #[test]
    fn orthonormality_rows() {
        // sum over m1 of C^2(j1 m1; j2 M-m1 | J M) = 1 for each valid (J, M).
        for j in 0..=4i64 {
            for m in -j..=j {
                let mut sum = 0.0;
                for m1 in -2..=2i64 {
                    sum += clebsch_gordan(2, m1, 2, m - m1, j, m).powi(2);
                }
                assert_relative_eq!(sum, 1.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn half_integer_example() {
        // <1/2 1/2; 1/2 -1/2 | 0 0> = 1/sqrt(2).
        assert_relative_eq!(
            clebsch_gordan_two(1, 1, 1, -1, 0, 0),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn condon_shortley_signs() {
        // <1 1; 1 0 | 2 1> = 1/sqrt(2), <1 1; 1 0 | 1 1> = 1/sqrt(2),
        // <1 0; 1 1 | 1 1> = -1/sqrt(2).
        assert_relative_eq!(clebsch_gordan(1, 1, 1, 0, 2, 1), 0.5_f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(clebsch_gordan(1, 1, 1, 0, 1, 1), 0.5_f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(clebsch_gordan(1, 0, 1, 1, 1, 1), -(0.5_f64.sqrt()), epsilon = 1e-14);
    }
}
