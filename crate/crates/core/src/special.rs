//! Hurwitz zeta tails for the power-law sequences used by the constructions.

/// B_{2j} / (2j)! for j = 1..7.
const BERNOULLI_OVER_FACTORIAL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
];

/// ζ(s, a) = Σ_{k≥0} (a + k)^{-s} for s > 1, a > 0, by Euler–Maclaurin with a
/// shift of 12 terms.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1 and a > 0");
    const SHIFT: usize = 12;
    let head: f64 = (0..SHIFT).map(|k| (a + k as f64).powf(-s)).sum();
    let x = a + SHIFT as f64;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) times x^{-s-2j+1}
    let mut rising = s;
    let mut power = x.powf(-s - 1.0);
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let m = (2 * j) as f64;
            rising *= (s + m - 1.0) * (s + m);
            power /= x * x;
        }
        tail += c * rising * power;
    }
    head + tail
}

/// Riemann zeta for s > 1.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Σ_{k ≥ n} k^{-s}.
pub fn power_tail(s: f64, n: usize) -> f64 {
    hurwitz_zeta(s, n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let pi = std::f64::consts::PI;
        assert!((zeta(2.0) - pi * pi / 6.0).abs() < 1e-15);
        assert!((zeta(4.0) - pi.powi(4) / 90.0).abs() < 1e-15);
        // ζ(3/2) to 16 digits
        assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-14);
    }

    #[test]
    fn tail_matches_direct_sum() {
        let direct: f64 = (1..5).map(|k| (k as f64).powf(-1.5)).sum();
        assert!((zeta(1.5) - power_tail(1.5, 5) - direct).abs() < 1e-14);
        // integral-test sandwich for a far tail
        let n = 100_000.0_f64;
        let t = power_tail(1.5, 100_000);
        assert!(t > 2.0 / n.sqrt() && t < 2.0 / (n - 1.0).sqrt());
    }
}
