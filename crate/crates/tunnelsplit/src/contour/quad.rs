use num_complex::Complex64;

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

/// Kronrod-15 and Gauss-7 estimates of ∫_a^b f for a vector integrand.
pub fn gk15<const N: usize, F>(f: &mut F, a: f64, b: f64) -> ([Complex64; N], [Complex64; N], [f64; N])
where
    F: FnMut(f64) -> [Complex64; N],
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let zero = Complex64::new(0.0, 0.0);
    let mut k = [zero; N];
    let mut g = [zero; N];
    let mut l1 = [0.0; N];
    let fc = f(c);
    for n in 0..N {
        k[n] += fc[n] * WGK[7];
        g[n] += fc[n] * WG[3];
        l1[n] += fc[n].norm() * WGK[7];
    }
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for n in 0..N {
            let s = f1[n] + f2[n];
            k[n] += s * WGK[j];
            l1[n] += (f1[n].norm() + f2[n].norm()) * WGK[j];
            if j % 2 == 1 {
                g[n] += s * WG[j / 2];
            }
        }
    }
    for n in 0..N {
        k[n] *= h;
        g[n] *= h;
        l1[n] *= h.abs();
    }
    (k, g, l1)
}

/// Globally adaptive bisection: the interval with the largest step-halving
/// discrepancy |I(h) − I(h/2)| is split until the summed discrepancy meets
/// `rel_tol` relative to ∫|f| for every component, or the subdivision cap is
/// hit. Returns the estimate and the summed discrepancy.
pub fn integrate<const N: usize, F>(f: &mut F, a: f64, b: f64, rel_tol: f64) -> ([Complex64; N], f64)
where
    F: FnMut(f64) -> [Complex64; N],
{
    integrate_partition(f, &[a, b], rel_tol)
}

/// As `integrate`, starting from the partition given by `breaks` (monotone).
pub fn integrate_partition<const N: usize, F>(f: &mut F, breaks: &[f64], rel_tol: f64) -> ([Complex64; N], f64)
where
    F: FnMut(f64) -> [Complex64; N],
{
    let max_leaves = 4000 + 2 * breaks.len();
    struct Leaf<const N: usize> {
        lo: f64,
        hi: f64,
        val: [Complex64; N],
        err: [f64; N],
        l1: [f64; N],
    }
    let mut eval = |lo: f64, hi: f64| -> Leaf<N> {
        let mid = 0.5 * (lo + hi);
        let (whole, _, _) = gk15(f, lo, hi);
        let (left, _, l1a) = gk15(f, lo, mid);
        let (right, _, l1b) = gk15(f, mid, hi);
        let mut val = [Complex64::new(0.0, 0.0); N];
        let mut err = [0.0; N];
        let mut l1 = [0.0; N];
        for n in 0..N {
            val[n] = left[n] + right[n];
            err[n] = (val[n] - whole[n]).norm();
            l1[n] = l1a[n] + l1b[n];
        }
        Leaf { lo, hi, val, err, l1 }
    };
    let mut leaves: Vec<Leaf<N>> = breaks.windows(2).map(|w| eval(w[0], w[1])).collect();
    loop {
        let mut tot_err = [0.0; N];
        let mut tot_l1 = [0.0; N];
        for l in &leaves {
            for n in 0..N {
                tot_err[n] += l.err[n];
                tot_l1[n] += l.l1[n];
            }
        }
        let done = (0..N).all(|n| tot_err[n] <= rel_tol * tot_l1[n] + 1e-300);
        if done || leaves.len() >= max_leaves {
            break;
        }
        // worst leaf relative to its component budget
        let (k, _) = leaves
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let w = (0..N).map(|n| l.err[n] / (tot_l1[n] + 1e-300)).fold(0.0, f64::max);
                (k, w)
            })
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let leaf = leaves.swap_remove(k);
        if (leaf.hi - leaf.lo).abs() < 1e-15 * (1.0 + leaf.lo.abs()) {
            leaves.push(leaf);
            break;
        }
        let mid = 0.5 * (leaf.lo + leaf.hi);
        leaves.push(eval(leaf.lo, mid));
        leaves.push(eval(mid, leaf.hi));
    }
    let mut total = [Complex64::new(0.0, 0.0); N];
    let mut err = 0.0;
    for l in &leaves {
        for n in 0..N {
            total[n] += l.val[n];
            err += l.err[n];
        }
    }
    (total, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let mut f = |x: f64| [Complex64::new(x.powi(5), x * x)];
        let (v, _) = integrate(&mut f, 0.0, 2.0, 1e-12);
        assert!((v[0].re - 64.0 / 6.0).abs() < 1e-12);
        assert!((v[0].im - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory() {
        let mut f = |x: f64| [Complex64::new((20.0 * x).cos(), 0.0)];
        let (v, err) = integrate(&mut f, 0.0, 3.0, 1e-12);
        assert!((v[0].re - (60.0f64).sin() / 20.0).abs() < 1e-12);
        assert!(err < 1e-10);
    }
}
