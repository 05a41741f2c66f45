//! Quadrature rules: adaptive Gauss–Kronrod on intervals and the periodic
//! trapezoidal rule with node doubling on circles.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel: `(kronrod estimate, |kronrod − gauss|)`.
fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of a smooth `f` over `[a, b]`.
///
/// Panels are bisected until each panel's error estimate is below its share
/// of `max(abs_tol, rel_tol·|I|)` or the depth limit is reached.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, _) = gk15(&mut f, a, b);
    let target = |approx: f64| abs_tol.max(rel_tol * approx.abs());
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    let width = b - a;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&mut f, lo, hi);
        let share = (hi - lo) / width;
        if err <= target(whole) * share || depth >= 40 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

/// Values the trapezoidal rule can average.
pub trait TrapezoidValue: Clone {
    fn zero_like(&self) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn scaled(&self, s: f64) -> Self;
}

impl TrapezoidValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn scaled(&self, s: f64) -> Self {
        self * s
    }
}

impl TrapezoidValue for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn scaled(&self, s: f64) -> Self {
        self * s
    }
}

impl TrapezoidValue for Vec<C64> {
    fn zero_like(&self) -> Self {
        vec![C64::new(0.0, 0.0); self.len()]
    }
    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += b;
        }
    }
    fn scaled(&self, s: f64) -> Self {
        self.iter().map(|v| v * s).collect()
    }
}

/// Result of a doubling trapezoid run.
#[derive(Clone, Debug)]
pub struct TrapezoidResult<T> {
    pub value: T,
    pub nodes: usize,
    pub converged: bool,
}

/// Mean of a `2π`-periodic function, `(1/2π)∫₀^{2π} f(θ) dθ`, by the
/// trapezoidal rule with node doubling.
///
/// Starts at `n0` nodes and doubles (reusing old nodes) until `accept(prev,
/// next)` holds or `n_max` is reached. `f` may abort with an error.
pub fn periodic_mean<T, E>(
    mut f: impl FnMut(f64) -> Result<T, E>,
    n0: usize,
    n_max: usize,
    mut accept: impl FnMut(&T, &T) -> bool,
) -> Result<TrapezoidResult<T>, E>
where
    T: TrapezoidValue,
{
    let mut n = n0.max(2);
    let first = f(0.0)?;
    let mut sum = first.clone();
    for k in 1..n {
        sum.add_assign(&f(2.0 * PI * k as f64 / n as f64)?);
    }
    let mut mean = sum.scaled(1.0 / n as f64);
    while n < n_max {
        let step = 2.0 * PI / (2 * n) as f64;
        for k in 0..n {
            sum.add_assign(&f(step * (2 * k + 1) as f64)?);
        }
        n *= 2;
        let next = sum.scaled(1.0 / n as f64);
        let done = accept(&mean, &next);
        mean = next;
        if done {
            return Ok(TrapezoidResult {
                value: mean,
                nodes: n,
                converged: true,
            });
        }
    }
    Ok(TrapezoidResult {
        value: mean,
        nodes: n,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomial_exact() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 1e-14, 1e-14);
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn gauss_kronrod_adapts_to_sharp_peak() {
        let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-12);
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn trapezoid_mean_of_log_modulus() {
        // (1/2π)∫ log|2 + e^{iθ}| dθ = log 2.
        let r = periodic_mean::<f64, ()>(
            |t| Ok((C64::new(2.0, 0.0) + C64::from_polar(1.0, t)).norm().ln()),
            64,
            1 << 16,
            |a, b| (a - b).abs() < 1e-14,
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.value - 2f64.ln()).abs() < 1e-13);
    }
}
