use super::{GrayImage, ImageError};

const MIN_LEVEL_DIM: usize = 8;
const BINOMIAL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Gaussian multi-resolution stack; level 0 is the input frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    levels: Vec<GrayImage>,
}

impl Pyramid {
    pub fn levels(&self) -> &[GrayImage] {
        &self.levels
    }

    pub fn level(&self, idx: usize) -> &GrayImage {
        &self.levels[idx]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn base(&self) -> &GrayImage {
        &self.levels[0]
    }
}

/// Builds up to `levels` levels. Stops early once the next level would have a
/// dimension below 8 pixels.
pub fn build_pyramid(img: &GrayImage, levels: usize) -> Result<Pyramid, ImageError> {
    if levels == 0 {
        return Err(ImageError::ZeroLevels);
    }
    let mut out = Vec::with_capacity(levels);
    out.push(img.clone());
    while out.len() < levels {
        let prev = out.last().expect("non-empty");
        let (w, h) = prev.dims();
        let (nw, nh) = (w.div_ceil(2), h.div_ceil(2));
        if nw < MIN_LEVEL_DIM || nh < MIN_LEVEL_DIM {
            break;
        }
        out.push(downsample(prev));
    }
    Ok(Pyramid { levels: out })
}

/// Separable 5-tap binomial blur with edge replication, sampled at even
/// coordinates.
fn downsample(img: &GrayImage) -> GrayImage {
    let (w, h) = img.dims();
    let (nw, nh) = (w.div_ceil(2), h.div_ceil(2));
    let src = img.pixels();
    let clamp_x = |x: isize| x.clamp(0, w as isize - 1) as usize;
    let clamp_y = |y: isize| y.clamp(0, h as isize - 1) as usize;

    // horizontal pass, only at even columns
    let mut horiz = vec![0.0; nw * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for nx in 0..nw {
            let cx = (2 * nx) as isize;
            let mut acc = 0.0;
            for (k, wt) in BINOMIAL.iter().enumerate() {
                acc += wt * row[clamp_x(cx + k as isize - 2)];
            }
            horiz[y * nw + nx] = acc;
        }
    }
    // vertical pass, only at even rows
    let mut out = vec![0.0; nw * nh];
    for ny in 0..nh {
        let cy = (2 * ny) as isize;
        for (k, wt) in BINOMIAL.iter().enumerate() {
            let sy = clamp_y(cy + k as isize - 2);
            let srow = &horiz[sy * nw..(sy + 1) * nw];
            let orow = &mut out[ny * nw..(ny + 1) * nw];
            for (o, s) in orow.iter_mut().zip(srow) {
                *o += wt * s;
            }
        }
    }
    GrayImage::from_raw_unchecked(nw, nh, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.gen_range(0.0..=255.0))
    }

    /// Direct 2D convolution with the outer-product kernel, used as a reference.
    fn reference_level1(img: &GrayImage) -> Vec<f64> {
        let (w, h) = img.dims();
        let mut out = Vec::new();
        for ny in 0..h.div_ceil(2) {
            for nx in 0..w.div_ceil(2) {
                let mut acc = 0.0;
                for dy in -2isize..=2 {
                    for dx in -2isize..=2 {
                        let wt = BINOMIAL[(dx + 2) as usize] * BINOMIAL[(dy + 2) as usize];
                        acc += wt
                            * img.get_clamped(2 * nx as isize + dx, 2 * ny as isize + dy);
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    #[test]
    fn halving_sizes() {
        let img = GrayImage::constant(320, 240, 10.0).unwrap();
        let pyr = build_pyramid(&img, 3).unwrap();
        let dims: Vec<_> = pyr.levels().iter().map(|l| l.dims()).collect();
        assert_eq!(dims, vec![(320, 240), (160, 120), (80, 60)]);

        let odd = GrayImage::constant(33, 17, 0.0).unwrap();
        let pyr = build_pyramid(&odd, 5).unwrap();
        let dims: Vec<_> = pyr.levels().iter().map(|l| l.dims()).collect();
        assert_eq!(dims, vec![(33, 17), (17, 9)]);
    }

    #[test]
    fn zero_levels_rejected() {
        let img = GrayImage::constant(16, 16, 0.0).unwrap();
        assert_eq!(build_pyramid(&img, 0), Err(ImageError::ZeroLevels));
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = GrayImage::constant(64, 48, 93.0).unwrap();
        for level in build_pyramid(&img, 4).unwrap().levels() {
            assert!(level.pixels().iter().all(|&v| (v - 93.0).abs() < 1e-12));
        }
    }

    #[test]
    fn matches_direct_convolution_and_preserves_mean() {
        let img = noise(37, 29, 7);
        let pyr = build_pyramid(&img, 2).unwrap();
        let reference = reference_level1(&img);
        for (a, b) in pyr.level(1).pixels().iter().zip(&reference) {
            assert!((a - b).abs() < 1e-9);
        }
        let big = noise(320, 240, 11);
        let pyr = build_pyramid(&big, 2).unwrap();
        assert!((pyr.level(1).mean() - big.mean()).abs() < 1.0);
    }

    #[test]
    fn smoothing_is_linear() {
        let img = noise(40, 30, 3);
        let half = img.scaled(0.5);
        let a = build_pyramid(&img, 3).unwrap();
        let b = build_pyramid(&half, 3).unwrap();
        for (la, lb) in a.levels().iter().zip(b.levels()) {
            for (x, y) in la.pixels().iter().zip(lb.pixels()) {
                assert!((0.5 * x - y).abs() < 1e-9);
            }
        }
    }
}
