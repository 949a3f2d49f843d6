//! Ordinary Bessel functions `J_0`, `J_1` on the real line.
//!
//! Small arguments use the ascending series. Everything else uses Miller's
//! backward recurrence normalised by `J_0 + 2 (J_2 + J_4 + ...) = 1`, which is
//! stable for all orders below the starting index and keeps full absolute
//! precision out to `x = 100` and well beyond.

use std::sync::OnceLock;

const SERIES_LIMIT: f64 = 1.0;
const RESCALE_ABOVE: f64 = 1.0e200;

/// Returns `(J_0(x), J_1(x))`.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    if x < 0.0 {
        let (j0, j1) = bessel_j01(-x);
        return (j0, -j1);
    }
    if x == 0.0 {
        return (1.0, 0.0);
    }
    if x <= SERIES_LIMIT {
        return series_j01(x);
    }
    miller_j01(x)
}

/// `J_n(x)` for `n` in {0, 1}.
///
/// Any other order is rejected with `None`.
pub fn bessel_j(order: u32, x: f64) -> Option<f64> {
    let (j0, j1) = bessel_j01(x);
    match order {
        0 => Some(j0),
        1 => Some(j1),
        _ => None,
    }
}

fn series_j01(x: f64) -> (f64, f64) {
    let q = -0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 0.5 * x;
    let mut s0 = t0;
    let mut s1 = t1;
    for k in 1..40 {
        let kf = k as f64;
        t0 *= q / (kf * kf);
        t1 *= q / (kf * (kf + 1.0));
        s0 += t0;
        s1 += t1;
        if t0.abs() < 1e-18 * s0.abs() && t1.abs() < 1e-18 * s1.abs() {
            break;
        }
    }
    (s0, s1)
}

fn miller_j01(x: f64) -> (f64, f64) {
    let start = {
        let n = (x + 30.0 + 8.0 * x.cbrt()).ceil() as usize;
        n + (n % 2)
    };
    let two_over_x = 2.0 / x;
    let mut next = 0.0_f64; // J_{k+1}
    let mut cur = 1.0e-30_f64; // J_k
    let mut norm = 0.0_f64;
    let mut j1 = 0.0;
    let mut k = start;
    while k > 0 {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let prev = (k as f64) * two_over_x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if k % 2 == 0 && k > 0 {
            norm += 2.0 * cur;
        }
        if k == 1 {
            j1 = cur;
        }
        if cur.abs() > RESCALE_ABOVE {
            cur /= RESCALE_ABOVE;
            next /= RESCALE_ABOVE;
            norm /= RESCALE_ABOVE;
            j1 /= RESCALE_ABOVE;
        }
    }
    norm += cur;
    (cur / norm, j1 / norm)
}

/// First positive zero of `J_0`, refined by Newton iteration with `J_0' = -J_1`.
pub fn first_j0_zero() -> f64 {
    static ZERO: OnceLock<f64> = OnceLock::new();
    *ZERO.get_or_init(|| {
        let mut x = 2.4048_f64;
        for _ in 0..20 {
            let (j0, j1) = bessel_j01(x);
            let step = j0 / j1;
            x += step;
            if step.abs() < 1e-17 * x {
                break;
            }
        }
        x
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// `J_n(x) = (1/2pi) \int_0^{2pi} cos(n t - x sin t) dt`; the trapezoidal
    /// rule is spectrally accurate for this periodic integrand.
    fn trapezoid_oracle(n: u32, x: f64) -> f64 {
        let m = 4 * (x as usize + 64);
        let h = 2.0 * PI / m as f64;
        (0..m)
            .map(|i| {
                let t = i as f64 * h;
                (n as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            / m as f64
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0), Some(1.0));
        assert_eq!(bessel_j(1, 0.0), Some(0.0));
        assert_eq!(bessel_j(2, 1.0), None);
    }

    #[test]
    fn agrees_with_trapezoid_oracle_up_to_100() {
        let mut x = 0.013;
        while x <= 100.0 {
            let (j0, j1) = bessel_j01(x);
            for (n, got) in [(0, j0), (1, j1)] {
                let want = trapezoid_oracle(n, x);
                let tol = 1e-12 * want.abs().max(1e-3);
                assert!(
                    (got - want).abs() <= tol,
                    "J_{n}({x}) = {got}, oracle {want}"
                );
            }
            x *= 1.07;
        }
    }

    #[test]
    fn first_zero() {
        let j = first_j0_zero();
        assert!((j - 2.4048).abs() < 5e-5);
        assert!(j > 2.0 && j < 3.0);
        assert!(bessel_j01(j).0.abs() <= 1e-12);
        assert!(bessel_j01(2.4048).0.abs() < 5e-5);
        // reference value of j_{0,1}
        assert!((j - 2.404_825_557_695_773).abs() < 1e-14);
    }

    #[test]
    fn ratio_bound_inside_first_zero() {
        let j = first_j0_zero();
        for i in 1..=50 {
            let x = j * i as f64 / 51.0;
            let (j0, j1) = bessel_j01(x);
            assert!(j0 / j1 < 2.0 / x, "x = {x}");
        }
    }
}
