//! Sampled extrema of smooth 1-D functions, refined by golden-section search.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, maximize: bool) -> f64 {
    let sign = if maximize { -1.0 } else { 1.0 };
    let g = |x: f64| sign * f(x);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..80 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = g(d);
        }
    }
    sign * g(0.5 * (a + b))
}

/// (min, max) of `f` on [lo, hi]: `samples` evenly spaced evaluations, then
/// golden-section refinement in the neighbourhood of the best samples.
pub(crate) fn extrema(f: impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> (f64, f64) {
    let n = samples.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| if i + 1 == n { hi } else { lo + i as f64 * step }).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let (mut imin, mut imax) = (0, 0);
    for (i, &y) in ys.iter().enumerate() {
        if y < ys[imin] {
            imin = i;
        }
        if y > ys[imax] {
            imax = i;
        }
    }
    let bracket = |i: usize| (xs[i.saturating_sub(1)], xs[(i + 1).min(n - 1)]);
    let (a, b) = bracket(imin);
    let min = golden(&f, a, b, false).min(ys[imin]);
    let (a, b) = bracket(imax);
    let max = golden(&f, a, b, true).max(ys[imax]);
    (min, max)
}

/// Maximum of `f` on [lo, hi] (see [`extrema`]).
pub(crate) fn maximum(f: impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> f64 {
    extrema(f, lo, hi, samples).1
}

/// (max − min)/(max + min), zero for an all-zero signal.
pub(crate) fn contrast(min: f64, max: f64) -> f64 {
    if max + min <= 0.0 {
        0.0
    } else {
        ((max - min) / (max + min)).clamp(0.0, 1.0)
    }
}
