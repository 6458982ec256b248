//! Rayleigh channel draws and the real/imaginary stacking transform.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{SystemConfig, C64};

/// One user's channels: the desired `Nr × Nt` matrix and `K - 1` interferer
/// matrices of the same shape.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSample {
    pub h: DMatrix<C64>,
    pub g: Vec<DMatrix<C64>>,
}

/// Stacked real view of a [`ChannelSample`]: every complex column `x` becomes
/// the real column `[Re x; Im x]` of length `2 Nr`.
#[derive(Clone, Debug, PartialEq)]
pub struct WlChannelSample {
    pub h: DMatrix<f64>,
    pub g: Vec<DMatrix<f64>>,
}

/// Circularly symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    // Column-major fill keeps draw order tied to the column index.
    DMatrix::from_iterator(rows, cols, (0..rows * cols).map(|_| complex_gaussian(rng)))
}

/// Draws one user's desired and interfering channels.
pub fn draw_channel<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> ChannelSample {
    let h = complex_gaussian_matrix(cfg.nr, cfg.nt, rng);
    let g = (1..cfg.k)
        .map(|_| complex_gaussian_matrix(cfg.nr, cfg.nt, rng))
        .collect();
    ChannelSample { h, g }
}

/// `[Re x; Im x]`.
pub fn stack_real(x: &DVector<C64>) -> DVector<f64> {
    let n = x.len();
    DVector::from_fn(2 * n, |i, _| if i < n { x[i].re } else { x[i - n].im })
}

/// Column-wise [`stack_real`].
pub fn stack_real_matrix(x: &DMatrix<C64>) -> DMatrix<f64> {
    let n = x.nrows();
    DMatrix::from_fn(2 * n, x.ncols(), |i, j| {
        if i < n {
            x[(i, j)].re
        } else {
            x[(i - n, j)].im
        }
    })
}

/// Stacked view of `j x`, i.e. `[-Im x; Re x]`. This is the real channel seen
/// by a quadrature-rail symbol.
pub fn stack_real_quadrature(x: &DMatrix<C64>) -> DMatrix<f64> {
    let n = x.nrows();
    DMatrix::from_fn(2 * n, x.ncols(), |i, j| {
        if i < n {
            -x[(i, j)].im
        } else {
            x[(i - n, j)].re
        }
    })
}

impl ChannelSample {
    pub fn to_wl(&self) -> WlChannelSample {
        WlChannelSample {
            h: stack_real_matrix(&self.h),
            g: self.g.iter().map(stack_real_matrix).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn shapes() {
        let cfg = SystemConfig::new(3, 2, 10);
        let s = draw_channel(&cfg, &mut substream(1, 0));
        assert_eq!(s.h.shape(), (2, 1));
        assert_eq!(s.g.len(), 2);
        let wl = s.to_wl();
        assert_eq!(wl.h.shape(), (4, 1));
        assert_eq!(wl.g[1].shape(), (4, 1));
    }

    #[test]
    fn determinism() {
        let cfg = SystemConfig::new(4, 2, 10).with_nt(2);
        let a = draw_channel(&cfg, &mut substream(5, 17));
        let b = draw_channel(&cfg, &mut substream(5, 17));
        assert_eq!(a, b);
    }

    #[test]
    fn stacking_definition() {
        let x = DVector::from_vec(vec![C64::new(1.0, 2.0)]);
        assert_eq!(stack_real(&x).as_slice(), &[1.0, 2.0]);
        let z = DVector::from_vec(vec![C64::new(0.0, 0.0); 2]);
        assert_eq!(stack_real(&z).as_slice(), &[0.0; 4]);
    }

    #[test]
    fn quadrature_stacking_is_orthogonal() {
        let mut rng = substream(3, 0);
        let x = complex_gaussian_matrix(3, 1, &mut rng);
        let i = stack_real_matrix(&x);
        let q = stack_real_quadrature(&x);
        assert!(i.column(0).dot(&q.column(0)).abs() < 1e-14);
        assert!((i.norm() - q.norm()).abs() < 1e-14);
    }

    #[test]
    fn moments() {
        let mut rng = substream(11, 0);
        let n = 100_000;
        let (mut sum, mut sum_sq, mut re2, mut im2, mut cross) = (C64::new(0.0, 0.0), 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = complex_gaussian(&mut rng);
            sum += z;
            sum_sq += z.norm_sqr();
            re2 += z.re * z.re;
            im2 += z.im * z.im;
            cross += z.re * z.im;
        }
        let nf = n as f64;
        assert!((sum / nf).norm() < 0.02);
        assert!((sum_sq / nf - 1.0).abs() < 0.02);
        assert!((re2 / nf - 0.5).abs() < 0.01);
        assert!((im2 / nf - 0.5).abs() < 0.01);
        assert!((cross / nf).abs() < 0.01);
    }
}
