//! Reference computations written directly from the definitions, sharing no
//! code with the library. Slow on purpose.
#![allow(dead_code)]

pub type KernelFn = dyn Fn(&[f64], &[f64]) -> f64;

/// Mean of each full trailing window.
pub fn sma(values: &[f64], period: usize) -> Vec<Option<f64>> {
    (0..values.len())
        .map(|t| {
            if t + 1 < period {
                return None;
            }
            let mut s = 0.0;
            for x in &values[t + 1 - period..=t] {
                s += x;
            }
            Some(s / period as f64)
        })
        .collect()
}

/// Exponential smoothing with factor `alpha`, seeded by the mean of the first
/// `period` values, written as the explicit weighted sum
/// `(1-a)^(t-p+1) seed + sum_j a (1-a)^(t-j) x_j`.
fn smoothed(values: &[f64], period: usize, alpha: f64) -> Vec<Option<f64>> {
    let n = values.len();
    let mut out = vec![None; n];
    if n < period {
        return out;
    }
    let seed: f64 = values[..period].iter().sum::<f64>() / period as f64;
    for t in period - 1..n {
        let steps = (t + 1 - period) as i32;
        let mut v = (1.0 - alpha).powi(steps) * seed;
        for j in period..=t {
            v += alpha * (1.0 - alpha).powi((t - j) as i32) * values[j];
        }
        out[t] = Some(v);
    }
    out
}

pub fn ema(values: &[f64], period: usize) -> Vec<Option<f64>> {
    smoothed(values, period, 2.0 / (period as f64 + 1.0))
}

pub fn macd(close: &[f64], fast: usize, slow: usize, signal: usize) -> [Vec<Option<f64>>; 3] {
    let f = ema(close, fast);
    let s = ema(close, slow);
    let line: Vec<Option<f64>> = f.iter().zip(&s).map(|(a, b)| Some(a.as_ref()? - b.as_ref()?)).collect();
    let start = line.iter().position(Option::is_some).unwrap_or(line.len());
    let defined: Vec<f64> = line[start..].iter().map(|v| v.unwrap()).collect();
    let mut sig = vec![None; start];
    sig.extend(ema(&defined, signal));
    let hist = line.iter().zip(&sig).map(|(a, b)| Some(a.as_ref()? - b.as_ref()?)).collect();
    [line, sig, hist]
}

fn rsi_from(avg_gain: f64, avg_loss: f64) -> f64 {
    if avg_loss == 0.0 && avg_gain == 0.0 {
        50.0
    } else if avg_loss == 0.0 {
        100.0
    } else if avg_gain == 0.0 {
        0.0
    } else {
        let rs = avg_gain / avg_loss;
        100.0 - 100.0 / (1.0 + rs)
    }
}

/// Wilder averages are exponential smoothing with `alpha = 1 / period` over the
/// close-to-close gains and losses.
pub fn rsi(close: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = close.len();
    let mut gains = Vec::new();
    let mut losses = Vec::new();
    for t in 1..n {
        let d = close[t] - close[t - 1];
        gains.push(if d > 0.0 { d } else { 0.0 });
        losses.push(if d < 0.0 { -d } else { 0.0 });
    }
    let alpha = 1.0 / period as f64;
    let g = smoothed(&gains, period, alpha);
    let l = smoothed(&losses, period, alpha);
    let mut out = vec![None];
    for k in 0..gains.len() {
        out.push(match (g[k], l[k]) {
            (Some(a), Some(b)) => Some(rsi_from(a, b)),
            _ => None,
        });
    }
    out.truncate(n);
    out
}

pub fn mfi(high: &[f64], low: &[f64], close: &[f64], volume: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = close.len();
    let tp: Vec<f64> = (0..n).map(|i| (high[i] + low[i] + close[i]) / 3.0).collect();
    (0..n)
        .map(|t| {
            if t < period {
                return None;
            }
            let (mut pos, mut neg) = (0.0, 0.0);
            for j in t + 1 - period..=t {
                if tp[j] > tp[j - 1] {
                    pos += tp[j] * volume[j];
                } else if tp[j] < tp[j - 1] {
                    neg += tp[j] * volume[j];
                }
            }
            Some(if pos + neg == 0.0 { 50.0 } else { 100.0 * pos / (pos + neg) })
        })
        .collect()
}

pub fn obv(close: &[f64], volume: &[f64]) -> Vec<f64> {
    (0..close.len())
        .map(|t| {
            (1..=t)
                .map(|j| {
                    if close[j] > close[j - 1] {
                        volume[j]
                    } else if close[j] < close[j - 1] {
                        -volume[j]
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect()
}

/// `(upper, mid, lower)` from a two-pass windowed mean and population std.
pub fn bollinger(close: &[f64], period: usize, width: f64) -> [Vec<Option<f64>>; 3] {
    let n = close.len();
    let mut up = vec![None; n];
    let mut mid = vec![None; n];
    let mut lo = vec![None; n];
    for t in period.saturating_sub(1)..n {
        let w = &close[t + 1 - period..=t];
        let m = w.iter().sum::<f64>() / period as f64;
        let v = w.iter().map(|x| (x - m).powi(2)).sum::<f64>() / period as f64;
        up[t] = Some(m + width * v.sqrt());
        mid[t] = Some(m);
        lo[t] = Some(m - width * v.sqrt());
    }
    [up, mid, lo]
}

/// `[count, mean, std, min, q25, q50, q75, max]` by sorting.
pub fn summary(values: &[f64]) -> [f64; 8] {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    let mean = s.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let q = |p: f64| {
        let pos = p * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
    };
    [n as f64, mean, std, s[0], q(0.25), q(0.5), q(0.75), s[n - 1]]
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    x
}

/// Least squares with intercept via the normal equations. Returns
/// `(coefficients, intercept)`.
pub fn ols_normal_equations(x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let p = x[0].len() + 1;
    let row = |i: usize| {
        let mut r = vec![1.0];
        r.extend_from_slice(&x[i]);
        r
    };
    let mut ata = vec![vec![0.0; p]; p];
    let mut aty = vec![0.0; p];
    for i in 0..x.len() {
        let r = row(i);
        for a in 0..p {
            aty[a] += r[a] * y[i];
            for b in 0..p {
                ata[a][b] += r[a] * r[b];
            }
        }
    }
    let beta = gauss_solve(ata, aty);
    (beta[1..].to_vec(), beta[0])
}

pub fn linear_kernel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rbf_kernel(gamma: f64) -> impl Fn(&[f64], &[f64]) -> f64 {
    move |a, b| (-gamma * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp()
}

/// The SVR dual in doubled variables `beta = [alpha; alpha*]`:
/// `min 1/2 beta' Q beta + p' beta` subject to `s' beta = 0` and
/// `0 <= beta <= C`.
pub struct SvrDual {
    pub q: Vec<Vec<f64>>,
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    pub c: f64,
}

impl SvrDual {
    pub fn new(x: &[Vec<f64>], y: &[f64], c: f64, epsilon: f64, kernel: &dyn Fn(&[f64], &[f64]) -> f64) -> Self {
        let n = x.len();
        let s: Vec<f64> = (0..2 * n).map(|t| if t < n { 1.0 } else { -1.0 }).collect();
        let q = (0..2 * n)
            .map(|a| (0..2 * n).map(|b| s[a] * s[b] * kernel(&x[a % n], &x[b % n])).collect())
            .collect();
        let p = (0..2 * n).map(|t| if t < n { epsilon - y[t] } else { epsilon + y[t - n] }).collect();
        Self { q, p, s, c }
    }

    pub fn objective(&self, beta: &[f64]) -> f64 {
        let mut v = 0.0;
        for a in 0..beta.len() {
            let mut qa = 0.0;
            for b in 0..beta.len() {
                qa += self.q[a][b] * beta[b];
            }
            v += 0.5 * beta[a] * qa + self.p[a] * beta[a];
        }
        v
    }

    fn gradient(&self, beta: &[f64]) -> Vec<f64> {
        (0..beta.len())
            .map(|a| (0..beta.len()).map(|b| self.q[a][b] * beta[b]).sum::<f64>() + self.p[a])
            .collect()
    }

    /// Euclidean projection onto the feasible set: `clip(z - mu s)` with `mu`
    /// found by bisection so that `s' beta = 0`.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let at = |mu: f64| -> (Vec<f64>, f64) {
            let b: Vec<f64> = z.iter().zip(&self.s).map(|(zi, si)| (zi - mu * si).clamp(0.0, self.c)).collect();
            let r = b.iter().zip(&self.s).map(|(bi, si)| bi * si).sum();
            (b, r)
        };
        let span = z.iter().fold(0.0f64, |m, v| m.max(v.abs())) + self.c + 1.0;
        let (mut lo, mut hi) = (-span, span);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if at(mid).1 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi)).0
    }

    /// Accelerated projected gradient with adaptive restart.
    pub fn solve(&self, iterations: usize) -> (Vec<f64>, f64) {
        let m = self.p.len();
        // Frobenius norm bounds the largest eigenvalue.
        let lip = self.q.iter().flatten().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let step = 1.0 / lip;
        let mut x = vec![0.0; m];
        let mut yv = x.clone();
        let mut t = 1.0f64;
        let mut best = self.objective(&x);
        for _ in 0..iterations {
            let g = self.gradient(&yv);
            let z: Vec<f64> = yv.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let nx = self.project(&z);
            let f = self.objective(&nx);
            let nt = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            if f > best {
                // Restart momentum.
                t = 1.0;
                yv = x.clone();
                continue;
            }
            best = f;
            yv = nx.iter().zip(&x).map(|(a, b)| a + (t - 1.0) / nt * (a - b)).collect();
            x = nx;
            t = nt;
        }
        let f = self.objective(&x);
        (x, f)
    }
}

/// Final equity of an all-in/all-out account: `signals[t]` (true = hold the
/// asset) applies at the close of day `t`.
pub fn backtest_final(closes: &[f64], signals: &[bool], capital: f64, fee: f64) -> f64 {
    let mut value = capital;
    let mut entry: Option<f64> = None;
    for (t, &long) in signals.iter().enumerate() {
        match (entry, long) {
            (None, true) => {
                value *= 1.0 - fee;
                entry = Some(closes[t]);
            }
            (Some(e), false) => {
                value *= closes[t] / e * (1.0 - fee);
                entry = None;
            }
            _ => {}
        }
    }
    if let Some(e) = entry {
        value *= closes[closes.len() - 1] / e;
    }
    value
}

/// Best final equity over every signal vector, by enumeration.
pub fn best_over_all_signals(closes: &[f64], capital: f64) -> f64 {
    let days = closes.len() - 1;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << days) {
        let signals: Vec<bool> = (0..days).map(|d| mask >> d & 1 == 1).collect();
        best = best.max(backtest_final(closes, &signals, capital, 0.0));
    }
    best
}

/// Two-pass mean squared error.
pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mut s = 0.0;
    for d in &diffs {
        s += d * d;
    }
    s / diffs.len() as f64
}

/// Best single squared-error split: `(feature, threshold, sse)` over every
/// midpoint between distinct sorted values.
pub fn best_sse_split(x: &[Vec<f64>], y: &[f64], min_leaf: usize) -> Option<(usize, f64, f64)> {
    let sse = |idx: &[usize]| {
        let m = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
        idx.iter().map(|&i| (y[i] - m).powi(2)).sum::<f64>()
    };
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x[0].len() {
        let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let thr = 0.5 * (w[0] + w[1]);
            let left: Vec<usize> = (0..y.len()).filter(|&i| x[i][f] <= thr).collect();
            let right: Vec<usize> = (0..y.len()).filter(|&i| x[i][f] > thr).collect();
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let total = sse(&left) + sse(&right);
            if best.is_none_or(|b| total < b.2 - 1e-15) {
                best = Some((f, thr, total));
            }
        }
    }
    best
}

/// Gradient boosting with exhaustive-search stumps, recomputed stage by stage.
pub fn boosted_stumps(x: &[Vec<f64>], y: &[f64], learning_rate: f64, stages: usize) -> Vec<f64> {
    let n = y.len();
    let init = y.iter().sum::<f64>() / n as f64;
    let mut f = vec![init; n];
    for _ in 0..stages {
        let r: Vec<f64> = (0..n).map(|i| y[i] - f[i]).collect();
        let Some((feat, thr, _)) = best_sse_split(x, &r, 1) else { break };
        let side = |i: usize| x[i][feat] <= thr;
        let mean_of = |left: bool| {
            let idx: Vec<usize> = (0..n).filter(|&i| side(i) == left).collect();
            idx.iter().map(|&i| r[i]).sum::<f64>() / idx.len() as f64
        };
        let (ml, mr) = (mean_of(true), mean_of(false));
        for i in 0..n {
            f[i] += learning_rate * if side(i) { ml } else { mr };
        }
    }
    f
}

/// Largest violation of the epsilon-insensitive complementarity conditions for
/// dual variables `beta = [alpha; alpha*]` and offset `rho` (f = sum - rho).
/// Panics when a variable leaves the box `[0, c]`.
pub fn svr_kkt_violation(
    x: &[Vec<f64>],
    y: &[f64],
    c: f64,
    eps: f64,
    kernel: &dyn Fn(&[f64], &[f64]) -> f64,
    beta: &[f64],
    rho: f64,
) -> f64 {
    let n = y.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let f: f64 = (0..n).map(|j| (beta[j] - beta[j + n]) * kernel(&x[j], &x[i])).sum::<f64>() - rho;
        let r = y[i] - f;
        for (b, slack) in [(beta[i], eps - r), (beta[i + n], eps + r)] {
            assert!((0.0..=c).contains(&b), "dual variable {b} outside [0, {c}]");
            let v = if b <= 0.0 {
                (-slack).max(0.0)
            } else if b >= c {
                slack.max(0.0)
            } else {
                slack.abs()
            };
            worst = worst.max(v);
        }
    }
    worst
}

/// Central finite differences of `f` at `theta`.
pub fn numeric_gradient(mut f: impl FnMut(&[f64]) -> f64, theta: &[f64], h: f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|k| {
            t[k] = theta[k] + h;
            let up = f(&t);
            t[k] = theta[k] - h;
            let down = f(&t);
            t[k] = theta[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Max relative error, skipping entries where both sides are below `floor`.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .filter_map(|(x, y)| {
            let scale = x.abs().max(y.abs());
            (scale > floor).then(|| (x - y).abs() / scale)
        })
        .fold(0.0, f64::max)
}
