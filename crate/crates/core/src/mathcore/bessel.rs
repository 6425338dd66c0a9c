use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 5.0;
const ASYMPTOTIC_FROM: f64 = 25.0;

/// Zeroth-order Bessel function of the first kind.
///
/// Power series for |x| < 5, Miller backward recurrence up to 25, Hankel
/// asymptotic expansion beyond. Absolute error stays near 1e-15, which the
/// Clarke Toeplitz factorization needs: its smallest eigenvalues sit at
/// round-off level, so cruder J0 values make the matrix indefinite.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_LIMIT {
        series(ax)
    } else if ax < ASYMPTOTIC_FROM {
        backward_recurrence(ax)
    } else {
        asymptotic(ax)
    }
}

fn series(x: f64) -> f64 {
    // Σ (−1)^k (x²/4)^k / (k!)²
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn backward_recurrence(x: f64) -> f64 {
    // J_{k-1} = (2k/x) J_k − J_{k+1} from a tiny seed far above the
    // turning point, normalized with J0 + 2 Σ J_{2k} = 1.
    let start = 2 * ((2.0 * x) as usize / 2 + 20);
    let mut above = 0.0_f64;
    let mut current = 1e-30_f64;
    let mut even_sum = 0.0_f64;
    for k in (1..=start).rev() {
        let below = (2.0 * k as f64 / x) * current - above;
        above = current;
        current = below;
        // `current` now holds J_{k-1}.
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            even_sum += current;
        }
        if current.abs() > 1e250 {
            above *= 1e-250;
            current *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    current / (current + 2.0 * even_sum)
}

fn asymptotic(x: f64) -> f64 {
    // J0(x) = sqrt(2/(πx)) [P(x) cos χ − Q(x) sin χ],  χ = x − π/4.
    // Terms are added while they keep decreasing.
    let mu = 0.0_f64; // 4ν²
    let z8 = 8.0 * x;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        let kf = k as f64;
        if k > 0 {
            let odd = 2.0 * kf - 1.0;
            term *= (mu - odd * odd) / (kf * z8);
        }
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - PI / 4.0;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
