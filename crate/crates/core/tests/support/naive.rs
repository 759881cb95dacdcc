//! Loop-by-loop recomputation of the feature transform, sharing no code with
//! the library beyond its data types.

#![allow(dead_code)]

use hitrocket::{BiasTable, Channel, DilationScheme, FeatureKind, TimeSeries, TransformConfig};

/// `H[i][j] = (-1)^popcount(i & j)`, the closed form of the Sylvester matrix.
pub fn hadamard_entry(i: usize, j: usize) -> f64 {
    if (i & j).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Dense dilated weights of column `col` of the order-`len` matrix.
pub fn dense_kernel(len: usize, col: usize, scheme: &DilationScheme) -> Vec<f64> {
    let h: Vec<f64> = (0..len).map(|r| hadamard_entry(r, col)).collect();
    let mut out = Vec::new();
    match *scheme {
        DilationScheme::Uniform { d } => {
            for (k, &w) in h.iter().enumerate() {
                out.push(w);
                if k + 1 < len {
                    out.extend(std::iter::repeat_n(0.0, d - 1));
                }
            }
        }
        DilationScheme::Increasing { m } => {
            for (k, &w) in h.iter().enumerate() {
                out.push(w);
                if k + 1 < len {
                    out.extend(std::iter::repeat_n(0.0, m * (k + 1)));
                }
            }
        }
        DilationScheme::ZeroInsert { position } => {
            for (k, &w) in h.iter().enumerate() {
                if k == position {
                    out.push(0.0);
                }
                out.push(w);
            }
            if position == len {
                out.push(0.0);
            }
        }
        DilationScheme::Random { .. } => panic!("naive oracle does not model random gaps"),
    }
    out
}

pub fn naive_conv(x: &[f64], kernel: &[f64]) -> Vec<f64> {
    let mut y = Vec::new();
    let mut n = 0;
    while n + kernel.len() <= x.len() {
        let mut acc = 0.0;
        for k in 0..kernel.len() {
            if kernel[k] == 1.0 {
                acc += x[n + k];
            } else if kernel[k] == -1.0 {
                acc -= x[n + k];
            }
        }
        y.push(acc);
        n += 1;
    }
    y
}

pub fn naive_quantile(y: &[f64], q: f64) -> f64 {
    let mut s = y.to_vec();
    // insertion sort
    for i in 1..s.len() {
        let mut j = i;
        while j > 0 && s[j - 1] > s[j] {
            s.swap(j - 1, j);
            j -= 1;
        }
    }
    let pos = q * (s.len() as f64 - 1.0);
    let lo = pos.floor() as usize;
    let hi = if lo + 1 < s.len() { lo + 1 } else { lo };
    s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
}

fn channel_input(x: &[f64], channel: Channel, min_len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = match channel {
        Channel::Raw => x.to_vec(),
        Channel::Diff => {
            let mut d = Vec::new();
            for t in 1..x.len() {
                d.push(x[t] - x[t - 1]);
            }
            d
        }
    };
    while v.len() < min_len {
        v.push(0.0);
    }
    v
}

fn kernels(cfg: &TransformConfig) -> Vec<(usize, Vec<Vec<f64>>)> {
    let first = if cfg.include_dc_kernel { 0 } else { 1 };
    (first..cfg.kernel_length)
        .map(|col| {
            let ks = cfg
                .dilations
                .iter()
                .map(|s| dense_kernel(cfg.kernel_length, col, s))
                .collect();
            (col, ks)
        })
        .collect()
}

fn channels(cfg: &TransformConfig) -> Vec<Channel> {
    if cfg.use_diff_channel {
        vec![Channel::Raw, Channel::Diff]
    } else {
        vec![Channel::Raw]
    }
}

fn max_span(cfg: &TransformConfig) -> usize {
    kernels(cfg)
        .iter()
        .flat_map(|(_, ks)| ks.iter().map(Vec::len))
        .max()
        .unwrap()
}

/// Biases recomputed from the sampled series recorded in `table`.
pub fn naive_biases(train: &[TimeSeries], cfg: &TransformConfig, sample_indices: &[usize]) -> Vec<f64> {
    let span = max_span(cfg);
    let mut out = Vec::new();
    for ch in channels(cfg) {
        for (_, ks) in kernels(cfg) {
            for k in &ks {
                for &s in sample_indices {
                    let y = naive_conv(&channel_input(&train[s].values, ch, span), k);
                    for &q in &cfg.quantiles {
                        out.push(naive_quantile(&y, q));
                    }
                }
            }
        }
    }
    out
}

/// Feature rows recomputed with explicit loops.
pub fn naive_transform(data: &[TimeSeries], cfg: &TransformConfig, table: &BiasTable) -> Vec<Vec<f64>> {
    let span = max_span(cfg);
    let per = cfg.n_bias_samples * cfg.quantiles.len();
    data.iter()
        .map(|series| {
            let mut row = Vec::new();
            let mut b = 0;
            for ch in channels(cfg) {
                let x = channel_input(&series.values, ch, span);
                for (_, ks) in kernels(cfg) {
                    for k in &ks {
                        let y = naive_conv(&x, k);
                        for _ in 0..per {
                            let mut count = 0;
                            for &v in &y {
                                if v > table.biases[b] {
                                    count += 1;
                                }
                            }
                            row.push(count as f64 / y.len() as f64);
                            b += 1;
                        }
                        for kind in [FeatureKind::Max, FeatureKind::Mpv, FeatureKind::Mipv, FeatureKind::Lspv] {
                            if !cfg.features.contains(&kind) {
                                continue;
                            }
                            let pos: Vec<(usize, f64)> =
                                y.iter().copied().enumerate().filter(|(_, v)| *v > 0.0).collect();
                            row.push(match kind {
                                FeatureKind::Max => {
                                    let mut m = y[0];
                                    for &v in &y {
                                        if v > m {
                                            m = v;
                                        }
                                    }
                                    m
                                }
                                FeatureKind::Mpv => {
                                    if pos.is_empty() {
                                        0.0
                                    } else {
                                        pos.iter().map(|p| p.1).sum::<f64>() / pos.len() as f64
                                    }
                                }
                                FeatureKind::Mipv => {
                                    if pos.is_empty() {
                                        -1.0
                                    } else {
                                        pos.iter().map(|p| p.0).sum::<usize>() as f64 / pos.len() as f64
                                    }
                                }
                                FeatureKind::Lspv => {
                                    let mut best = 0;
                                    for i in 0..y.len() {
                                        let mut j = i;
                                        while j < y.len() && y[j] > 0.0 {
                                            j += 1;
                                        }
                                        best = best.max(j - i);
                                    }
                                    best as f64
                                }
                                FeatureKind::Ppv => unreachable!(),
                            });
                        }
                    }
                }
            }
            row
        })
        .collect()
}
