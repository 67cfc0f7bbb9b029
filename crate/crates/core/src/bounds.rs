//! Normal approximation of the best achievable frame error rate on the
//! binary-input AWGN channel at finite block length.

use libm::erfc;

use crate::channel::sigma_for_ebn0;
use crate::error::{input_err, PacError, Result};

/// Relative tolerance of the capacity and dispersion integrals.
pub const QUAD_REL_TOL: f64 = 1e-9;

/// Integration range in standard deviations of the channel noise.
const Z_RANGE: f64 = 40.0;
const MAX_INTERVALS: usize = 20_000;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded
/// 7-point Gauss rule.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (mut k, mut g) = (0.0, 0.0);
    for (j, &x) in GK_NODES.iter().enumerate() {
        let pts: &[f64] = if x == 0.0 { &[0.0] } else { &[x, -x] };
        for &t in pts {
            let y = f(c + h * t);
            k += K15_WEIGHTS[j] * y;
            if j % 2 == 1 {
                g += G7_WEIGHTS[j / 2] * y;
            }
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature on `[a, b]`.
fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    // Start from a uniform split so narrow features are not missed.
    let mut intervals: Vec<(f64, f64, f64, f64)> = (0..16)
        .map(|i| {
            let lo = a + (b - a) * i as f64 / 16.0;
            let hi = a + (b - a) * (i + 1) as f64 / 16.0;
            let (e, r) = gk15(&f, lo, hi);
            (lo, hi, e, r)
        })
        .collect();
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let error: f64 = intervals.iter().map(|iv| iv.3).sum();
        if error <= rel_tol * total.abs() || error <= 1e-300 {
            return Ok(total);
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(PacError::Numeric(format!(
                "quadrature did not converge: estimate {total}, error {error}"
            )));
        }
        let worst = (0..intervals.len())
            .max_by(|&i, &j| intervals[i].3.total_cmp(&intervals[j].3))
            .expect("nonempty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (x, y) in [(lo, mid), (mid, hi)] {
            let (e, r) = gk15(&f, x, y);
            intervals.push((x, y, e, r));
        }
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Information density (bits) of BPSK input +1 observed as `y`.
pub fn information_density(y: f64, sigma: f64) -> f64 {
    1.0 - softplus(-2.0 * y / (sigma * sigma)) / std::f64::consts::LN_2
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Capacity `C` (bits/use) and dispersion `V` (bits²/use) of the BI-AWGN
/// channel with noise standard deviation `sigma`.
pub fn biawgn_capacity_dispersion(sigma: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return input_err(format!("sigma must be positive and finite, got {sigma}"));
    }
    let density = |z: f64| information_density(1.0 + sigma * z, sigma);
    let c = integrate(|z| std_normal_pdf(z) * density(z), -Z_RANGE, Z_RANGE, QUAD_REL_TOL)?;
    let v = integrate(
        |z| {
            let d = density(z) - c;
            std_normal_pdf(z) * d * d
        },
        -Z_RANGE,
        Z_RANGE,
        QUAD_REL_TOL,
    )?;
    Ok((c.clamp(0.0, 1.0), v.max(0.0)))
}

/// Gaussian tail `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `ln Q(x)`, switching to the asymptotic series where `Q` underflows.
pub fn log_q(x: f64) -> f64 {
    let q = q_function(x);
    if q > 1e-300 {
        return q.ln();
    }
    log_q_asymptotic(x)
}

fn log_q_asymptotic(x: f64) -> f64 {
    let x2 = x * x;
    -0.5 * x2 - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaPoint {
    pub ebn0_db: f64,
    pub fer: f64,
}

fn check_code(big_n: usize, k: usize) -> Result<()> {
    if big_n == 0 || k == 0 || k > big_n {
        return input_err(format!("invalid code size (N={big_n}, K={k})"));
    }
    Ok(())
}

/// Normal-approximation argument `(N·C − K + ½·log2 N) / sqrt(N·V)`.
pub fn normal_approximation_argument(big_n: usize, k: usize, ebn0_db: f64) -> Result<f64> {
    check_code(big_n, k)?;
    let sigma = sigma_for_ebn0(ebn0_db, k as f64 / big_n as f64);
    let (c, v) = biawgn_capacity_dispersion(sigma)?;
    let n = big_n as f64;
    let num = n * c - k as f64 + 0.5 * n.log2();
    if v <= 0.0 {
        return Err(PacError::Numeric(format!("zero dispersion at Eb/N0 = {ebn0_db} dB")));
    }
    Ok(num / (n * v).sqrt())
}

pub fn normal_approximation_fer(big_n: usize, k: usize, ebn0_db: f64) -> Result<f64> {
    Ok(q_function(normal_approximation_argument(big_n, k, ebn0_db)?))
}

/// Natural log of the normal-approximation FER.
pub fn normal_approximation_log_fer(big_n: usize, k: usize, ebn0_db: f64) -> Result<f64> {
    Ok(log_q(normal_approximation_argument(big_n, k, ebn0_db)?))
}

pub fn na_curve(big_n: usize, k: usize, grid: &[f64]) -> Result<Vec<NaPoint>> {
    grid.iter()
        .map(|&e| Ok(NaPoint { ebn0_db: e, fer: normal_approximation_fer(big_n, k, e)? }))
        .collect()
}

/// Eb/N0 (dB) at which the normal approximation reaches `target_fer`,
/// found by bisection on `[lo_db, hi_db]`.
pub fn na_ebn0_for_fer(big_n: usize, k: usize, target_fer: f64, lo_db: f64, hi_db: f64) -> Result<f64> {
    if !(target_fer > 0.0 && target_fer < 1.0) {
        return input_err(format!("target FER must lie in (0, 1), got {target_fer}"));
    }
    let target = target_fer.ln();
    let g = |e: f64| normal_approximation_log_fer(big_n, k, e).map(|l| l - target);
    let (mut lo, mut hi) = (lo_db, hi_db);
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo < 0.0 || ghi > 0.0 {
        return Err(PacError::Numeric(format!(
            "target FER {target_fer} not bracketed by [{lo_db}, {hi_db}] dB"
        )));
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// CSV with columns `ebn0_db,fer`.
pub fn na_csv(points: &[NaPoint]) -> String {
    let mut s = String::from("ebn0_db,fer\n");
    for p in points {
        s.push_str(&format!("{},{:e}\n", p.ebn0_db, p.fer));
    }
    s
}
