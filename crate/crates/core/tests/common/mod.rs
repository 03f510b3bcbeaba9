//! Brute-force reference implementations. Each one takes a different route
//! from the library code so the two can check each other.
#![allow(dead_code)]

/// Textbook raw-sum product-moment formula.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
}

/// Rank by counting: 1 + (values strictly below) + (other equal values) / 2.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let below = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            1.0 + below + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

/// All-pairs concordance count with tau-b tie correction.
pub fn kendall(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let sx = (x[i] - x[j]).signum() * ((x[i] != x[j]) as i32 as f64);
            let sy = (y[i] - y[j]).signum() * ((y[i] != y[j]) as i32 as f64);
            if sx == 0.0 {
                tx += 1;
            }
            if sy == 0.0 {
                ty += 1;
            }
            let prod = sx * sy;
            if prod > 0.0 {
                c += 1;
            } else if prod < 0.0 {
                d += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    (c - d) as f64 / (((n0 - tx) * (n0 - ty)) as f64).sqrt()
}

/// Calls `f` with every permutation of `v` (Heap's algorithm).
pub fn for_each_permutation(v: &mut [f64], f: &mut impl FnMut(&[f64])) {
    let n = v.len();
    let mut c = vec![0usize; n];
    f(v);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                v.swap(0, i);
            } else {
                v.swap(c[i], i);
            }
            f(v);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Exact two-sided permutation p: share of all orderings of `y` whose
/// statistic is at least as extreme as the observed one.
pub fn exact_permutation_p(x: &[f64], y: &[f64], stat: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let observed = stat(x, y).abs();
    let (mut hits, mut total) = (0u64, 0u64);
    let mut yy = y.to_vec();
    for_each_permutation(&mut yy, &mut |p| {
        total += 1;
        if stat(x, p).abs() >= observed - 1e-12 {
            hits += 1;
        }
    });
    hits as f64 / total as f64
}
