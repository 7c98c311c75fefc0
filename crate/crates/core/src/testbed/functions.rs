//! The 24 noiseless function definitions and their instance data.

use std::f64::consts::PI;

use rand_distr::Cauchy;

use super::transforms::{f_pen, lambda_alpha, ratio, scale, sub, t_asy, t_osz, t_osz_scalar};
use crate::numerics::{random_orthogonal, Matrix, Rng};

/// Structural group of a function, matching the usual five-way split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionGroup {
    Separable,
    Moderate,
    IllConditioned,
    Multimodal,
    WeakStructure,
}

impl FunctionGroup {
    pub fn of(fid: usize) -> Option<Self> {
        match fid {
            1..=5 => Some(Self::Separable),
            6..=9 => Some(Self::Moderate),
            10..=14 => Some(Self::IllConditioned),
            15..=19 => Some(Self::Multimodal),
            20..=24 => Some(Self::WeakStructure),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Separable => "separ",
            Self::Moderate => "lcond",
            Self::IllConditioned => "hcond",
            Self::Multimodal => "multi",
            Self::WeakStructure => "mult2",
        }
    }

    pub fn all() -> [Self; 5] {
        [
            Self::Separable,
            Self::Moderate,
            Self::IllConditioned,
            Self::Multimodal,
            Self::WeakStructure,
        ]
    }

    pub fn members(&self) -> std::ops::RangeInclusive<usize> {
        match self {
            Self::Separable => 1..=5,
            Self::Moderate => 6..=9,
            Self::IllConditioned => 10..=14,
            Self::Multimodal => 15..=19,
            Self::WeakStructure => 20..=24,
        }
    }
}

pub const FUNCTION_NAMES: [&str; 24] = [
    "Sphere",
    "Ellipsoid separable",
    "Rastrigin separable",
    "Skew Rastrigin-Bueche",
    "Linear slope",
    "Attractive sector",
    "Step-ellipsoid",
    "Rosenbrock original",
    "Rosenbrock rotated",
    "Ellipsoid",
    "Discus",
    "Bent cigar",
    "Sharp ridge",
    "Sum of different powers",
    "Rastrigin",
    "Weierstrass",
    "Schaffer F7 condition 10",
    "Schaffer F7 condition 1000",
    "Griewank-Rosenbrock F8F2",
    "Schwefel x*sin(x)",
    "Gallagher 101 peaks",
    "Gallagher 21 peaks",
    "Katsuura",
    "Lunacek bi-Rastrigin",
];

/// Local optima of the Gallagher functions.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Peaks {
    pub centers: Vec<Vec<f64>>,
    /// Diagonal of C_i (already divided by α_i^{1/4}).
    pub cond: Vec<Vec<f64>>,
    pub heights: Vec<f64>,
}

/// Everything that varies between instances of one function.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct InstanceData {
    pub fid: usize,
    pub dim: usize,
    pub x_opt: Vec<f64>,
    pub f_opt: f64,
    pub r: Matrix,
    pub q: Matrix,
    /// ±1 per coordinate (f20, f24).
    pub signs: Vec<f64>,
    pub peaks: Option<Peaks>,
}

const SCHWEFEL_OPT: f64 = 4.209_687_462_275_036;
const SCHWEFEL_CONST: f64 = 4.189_828_872_724_339;
const LUNACEK_MU0: f64 = 2.5;

fn draw_f_opt(rng: &mut Rng) -> f64 {
    let cauchy = Cauchy::new(0.0, 100.0).expect("valid Cauchy parameters");
    let v: f64 = rng.sample(&cauchy);
    ((v * 100.0).round() / 100.0).clamp(-1000.0, 1000.0)
}

fn rosenbrock_scale(dim: usize) -> f64 {
    1f64.max((dim as f64).sqrt() / 8.0)
}

impl InstanceData {
    pub fn generate(fid: usize, instance: u64, dim: usize, seed: u64) -> Self {
        let mut rng_x = Rng::stream(seed, "xopt");
        let mut rng_f = Rng::stream(seed, "fopt");
        let mut rng_r = Rng::stream(seed, "rotation-r");
        let mut rng_q = Rng::stream(seed, "rotation-q");
        let _ = instance;

        let f_opt = draw_f_opt(&mut rng_f);
        let r = random_orthogonal(&mut rng_r, dim);
        let q = random_orthogonal(&mut rng_q, dim);
        let mut x_opt: Vec<f64> = (0..dim).map(|_| rng_x.uniform_in(-4.0, 4.0)).collect();
        let mut signs = vec![1.0; dim];
        let mut peaks = None;

        match fid {
            5 => {
                x_opt = x_opt
                    .iter()
                    .map(|v| if *v >= 0.0 { 5.0 } else { -5.0 })
                    .collect();
            }
            8 => x_opt.iter_mut().for_each(|v| *v *= 0.75),
            9 | 19 => {
                let c = rosenbrock_scale(dim);
                x_opt = r.tr_mul_vec(&vec![0.5 / c; dim]);
            }
            20 => {
                signs = x_opt
                    .iter()
                    .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
                    .collect();
                x_opt = signs.iter().map(|s| 0.5 * SCHWEFEL_OPT * s).collect();
            }
            21 | 22 => {
                let n_peaks = if fid == 21 { 101 } else { 21 };
                let (opt_box, peak_box, top_cond) = if fid == 21 {
                    (4.0, 5.0, 1000.0)
                } else {
                    (3.92, 4.9, 1000.0 * 1000.0)
                };
                let mut rng_p = Rng::stream(seed, "peaks");
                x_opt = (0..dim)
                    .map(|_| rng_p.uniform_in(-opt_box, opt_box))
                    .collect();
                let mut centers = vec![x_opt.clone()];
                for _ in 1..n_peaks {
                    centers.push(
                        (0..dim)
                            .map(|_| rng_p.uniform_in(-peak_box, peak_box))
                            .collect(),
                    );
                }
                let perm = rng_p.permutation(n_peaks - 1);
                let mut alphas = vec![top_cond];
                for k in 0..n_peaks - 1 {
                    alphas.push(1000f64.powf(2.0 * perm[k] as f64 / (n_peaks - 2) as f64));
                }
                let cond = alphas
                    .iter()
                    .map(|&a| {
                        let diag = lambda_alpha(a, dim);
                        let p = rng_p.permutation(dim);
                        let quarter = a.powf(0.25);
                        p.iter().map(|&j| diag[j] / quarter).collect()
                    })
                    .collect();
                let heights = (0..n_peaks)
                    .map(|i| {
                        if i == 0 {
                            10.0
                        } else {
                            1.1 + 8.0 * (i - 1) as f64 / (n_peaks - 2) as f64
                        }
                    })
                    .collect();
                peaks = Some(Peaks {
                    centers,
                    cond,
                    heights,
                });
            }
            24 => {
                signs = x_opt
                    .iter()
                    .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
                    .collect();
                x_opt = signs.iter().map(|s| 0.5 * LUNACEK_MU0 * s).collect();
            }
            _ => {}
        }

        Self {
            fid,
            dim,
            x_opt,
            f_opt,
            r,
            q,
            signs,
            peaks,
        }
    }

    /// Raw function value, `f_opt` included.
    pub fn value(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let df = d as f64;
        let xs = || sub(x, &self.x_opt);
        let rot = |m: &Matrix, v: &[f64]| m.mul_vec(v);
        let body = match self.fid {
            1 => xs().iter().map(|v| v * v).sum(),
            2 => ellipsoid(&t_osz(&xs())),
            3 => {
                let z = scale(&lambda_alpha(10.0, d), &t_asy(&t_osz(&xs()), 0.2));
                rastrigin(&z)
            }
            4 => {
                let mut z = t_osz(&xs());
                for (i, zi) in z.iter_mut().enumerate() {
                    let base = 10f64.powf(0.5 * ratio(i, d));
                    let s = if *zi > 0.0 && i % 2 == 0 {
                        10.0 * base
                    } else {
                        base
                    };
                    *zi *= s;
                }
                rastrigin(&z) + 100.0 * f_pen(x)
            }
            5 => {
                let mut s = 0.0;
                for (i, (&xi, &oi)) in x.iter().zip(&self.x_opt).enumerate() {
                    let si = oi.signum() * 10f64.powf(ratio(i, d));
                    let zi = if oi * xi < 25.0 { xi } else { oi };
                    s += 5.0 * si.abs() - si * zi;
                }
                s
            }
            6 => {
                let z = rot(
                    &self.q,
                    &scale(&lambda_alpha(10.0, d), &rot(&self.r, &xs())),
                );
                let s: f64 = z
                    .iter()
                    .zip(&self.x_opt)
                    .map(|(zi, oi)| {
                        let si = if zi * oi > 0.0 { 100.0 } else { 1.0 };
                        (si * zi).powi(2)
                    })
                    .sum();
                t_osz_scalar(s).powf(0.9)
            }
            7 => {
                let zh = scale(&lambda_alpha(10.0, d), &rot(&self.r, &xs()));
                let zt: Vec<f64> = zh
                    .iter()
                    .map(|&v| {
                        if v.abs() > 0.5 {
                            (0.5 + v).floor()
                        } else {
                            (0.5 + 10.0 * v).floor() / 10.0
                        }
                    })
                    .collect();
                let z = rot(&self.q, &zt);
                let e: f64 = z
                    .iter()
                    .enumerate()
                    .map(|(i, v)| 10f64.powf(2.0 * ratio(i, d)) * v * v)
                    .sum();
                0.1 * (zh[0].abs() / 1e4).max(e) + f_pen(x)
            }
            8 => {
                let c = rosenbrock_scale(d);
                let z: Vec<f64> = xs().iter().map(|v| c * v + 1.0).collect();
                rosenbrock(&z)
            }
            9 => {
                let c = rosenbrock_scale(d);
                let z: Vec<f64> = rot(&self.r, x).iter().map(|v| c * v + 0.5).collect();
                rosenbrock(&z)
            }
            10 => ellipsoid(&t_osz(&rot(&self.r, &xs()))),
            11 => {
                let z = t_osz(&rot(&self.r, &xs()));
                1e6 * z[0] * z[0] + z[1..].iter().map(|v| v * v).sum::<f64>()
            }
            12 => {
                let z = rot(&self.r, &t_asy(&rot(&self.r, &xs()), 0.5));
                z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>()
            }
            13 => {
                let z = rot(
                    &self.q,
                    &scale(&lambda_alpha(10.0, d), &rot(&self.r, &xs())),
                );
                z[0] * z[0] + 100.0 * z[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            14 => {
                let z = rot(&self.r, &xs());
                z.iter()
                    .enumerate()
                    .map(|(i, v)| v.abs().powf(2.0 + 4.0 * ratio(i, d)))
                    .sum::<f64>()
                    .sqrt()
            }
            15 => {
                let inner = t_asy(&t_osz(&rot(&self.r, &xs())), 0.2);
                let z = rot(
                    &self.r,
                    &scale(&lambda_alpha(10.0, d), &rot(&self.q, &inner)),
                );
                rastrigin(&z)
            }
            16 => {
                let inner = t_osz(&rot(&self.r, &xs()));
                let z = rot(
                    &self.r,
                    &scale(&lambda_alpha(0.01, d), &rot(&self.q, &inner)),
                );
                let f0: f64 = (0..12)
                    .map(|k| 0.5f64.powi(k) * (PI * 3f64.powi(k)).cos())
                    .sum();
                let s: f64 = z
                    .iter()
                    .map(|zi| {
                        (0..12)
                            .map(|k| 0.5f64.powi(k) * (2.0 * PI * 3f64.powi(k) * (zi + 0.5)).cos())
                            .sum::<f64>()
                    })
                    .sum();
                10.0 * (s / df - f0).powi(3) + 10.0 / df * f_pen(x)
            }
            17 | 18 => {
                let cond = if self.fid == 17 { 10.0 } else { 1000.0 };
                let z = scale(
                    &lambda_alpha(cond, d),
                    &rot(&self.q, &t_asy(&rot(&self.r, &xs()), 0.5)),
                );
                let mut acc = 0.0;
                for i in 0..d - 1 {
                    let s = (z[i] * z[i] + z[i + 1] * z[i + 1]).sqrt();
                    acc += s.sqrt() + s.sqrt() * (50.0 * s.powf(0.2)).sin().powi(2);
                }
                (acc / (df - 1.0)).powi(2) + 10.0 * f_pen(x)
            }
            19 => {
                let c = rosenbrock_scale(d);
                let z: Vec<f64> = rot(&self.r, x).iter().map(|v| c * v + 0.5).collect();
                let mut acc = 0.0;
                for i in 0..d - 1 {
                    let s = 100.0 * (z[i] * z[i] - z[i + 1]).powi(2) + (z[i] - 1.0).powi(2);
                    acc += s / 4000.0 - s.cos();
                }
                10.0 / (df - 1.0) * acc + 10.0
            }
            20 => {
                let xh: Vec<f64> = x
                    .iter()
                    .zip(&self.signs)
                    .map(|(v, s)| 2.0 * s * v)
                    .collect();
                let two_opt: Vec<f64> = self.x_opt.iter().map(|v| 2.0 * v.abs()).collect();
                let mut zh = xh.clone();
                for i in 1..d {
                    zh[i] = xh[i] + 0.25 * (xh[i - 1] - two_opt[i - 1]);
                }
                let shifted = scale(&lambda_alpha(10.0, d), &sub(&zh, &two_opt));
                let z: Vec<f64> = shifted
                    .iter()
                    .zip(&two_opt)
                    .map(|(v, o)| 100.0 * (v + o))
                    .collect();
                let s: f64 = z.iter().map(|v| v * v.abs().sqrt().sin()).sum();
                let zs: Vec<f64> = z.iter().map(|v| v / 100.0).collect();
                -s / (100.0 * df) + SCHWEFEL_CONST + 100.0 * f_pen(&zs)
            }
            21 | 22 => {
                let peaks = self.peaks.as_ref().expect("Gallagher instance has peaks");
                let rx = rot(&self.r, x);
                let mut best: f64 = 0.0;
                for ((center, cond), h) in peaks.centers.iter().zip(&peaks.cond).zip(&peaks.heights)
                {
                    let rc = rot(&self.r, center);
                    let quad: f64 = rx
                        .iter()
                        .zip(&rc)
                        .zip(cond)
                        .map(|((a, b), c)| c * (a - b) * (a - b))
                        .sum();
                    best = best.max(h * (-quad / (2.0 * df)).exp());
                }
                t_osz_scalar(10.0 - best).powi(2) + f_pen(x)
            }
            23 => {
                let z = rot(
                    &self.q,
                    &scale(&lambda_alpha(100.0, d), &rot(&self.r, &xs())),
                );
                let expo = 10.0 / df.powf(1.2);
                let mut prod = 1.0;
                for (i, zi) in z.iter().enumerate() {
                    let mut s = 0.0;
                    for j in 1..=32 {
                        let p = 2f64.powi(j);
                        s += (p * zi - (p * zi).round()).abs() / p;
                    }
                    prod *= (1.0 + (i + 1) as f64 * s).powf(expo);
                }
                10.0 / (df * df) * prod - 10.0 / (df * df) + f_pen(x)
            }
            24 => {
                let s = 1.0 - 1.0 / (2.0 * (df + 20.0).sqrt() - 8.2);
                let mu1 = -((LUNACEK_MU0 * LUNACEK_MU0 - 1.0) / s).sqrt();
                let xh: Vec<f64> = x
                    .iter()
                    .zip(&self.signs)
                    .map(|(v, sg)| 2.0 * sg * v)
                    .collect();
                let a: f64 = xh.iter().map(|v| (v - LUNACEK_MU0).powi(2)).sum();
                let b: f64 = df + s * xh.iter().map(|v| (v - mu1).powi(2)).sum::<f64>();
                let centred: Vec<f64> = xh.iter().map(|v| v - LUNACEK_MU0).collect();
                let z = rot(
                    &self.q,
                    &scale(&lambda_alpha(100.0, d), &rot(&self.r, &centred)),
                );
                let cos_sum: f64 = z.iter().map(|v| (2.0 * PI * v).cos()).sum();
                a.min(b) + 10.0 * (df - cos_sum) + 1e4 * f_pen(x)
            }
            _ => unreachable!("function id validated at construction"),
        };
        body + self.f_opt
    }
}

fn ellipsoid(z: &[f64]) -> f64 {
    let d = z.len();
    z.iter()
        .enumerate()
        .map(|(i, v)| 10f64.powf(6.0 * ratio(i, d)) * v * v)
        .sum()
}

fn rastrigin(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    let cos_sum: f64 = z.iter().map(|v| (2.0 * PI * v).cos()).sum();
    10.0 * (d - cos_sum) + z.iter().map(|v| v * v).sum::<f64>()
}

fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2))
        .sum()
}
