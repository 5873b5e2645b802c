//! Small numerical kernels shared by the modules: deterministic summation,
//! log-sum-exp and bracketing root finders.

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// slice length, so results are bit-identical across runs and thread counts.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `log(Σ exp(v_i))`, evaluated around the maximum. Returns `-inf` for an
/// empty slice or when every entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let shifted: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}

/// Solves `g(x) = target` for `g` monotone on `[lo, hi]`.
///
/// `increasing` gives the orientation. Values of `target` outside the range
/// of `g` are clamped to the corresponding endpoint. Bisection runs until the
/// bracket can no longer be split in `f64`, which is tighter than 1e-12 in
/// every case we use.
pub fn invert_monotone<G: Fn(f64) -> f64>(
    g: G,
    lo: f64,
    hi: f64,
    increasing: bool,
    target: f64,
) -> f64 {
    let (mut a, mut b) = (lo, hi);
    let below = |x: f64| {
        let v = g(x);
        if increasing {
            v < target
        } else {
            v > target
        }
    };
    if !below(a) {
        return a;
    }
    if below(b) {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if below(m) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Finds a zero of `h` on `[lo, hi]` given a sign change between the
/// endpoints. Returns `None` without a sign change.
pub fn bisect_root<H: Fn(f64) -> f64>(h: H, lo: f64, hi: f64) -> Option<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut ha, hb) = (h(a), h(b));
    if ha == 0.0 {
        return Some(a);
    }
    if hb == 0.0 {
        return Some(b);
    }
    if ha.signum() == hb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let hm = h(m);
        if hm == 0.0 {
            return Some(m);
        }
        if hm.signum() == ha.signum() {
            a = m;
            ha = hm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Ordinary least-squares line through `(x, y)`; returns `(slope, intercept,
/// slope standard error)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if xs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, stderr)
}
