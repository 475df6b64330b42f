//! Random streams, Gaussian draws and the standard normal upper tail.

use alloc::format;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8, whose 64-bit stream selector gives independent
/// sequences for different trial indices under the same seed.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// One standard normal draw.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// One draw from `N(mean, var)`.
    pub fn gaussian(&mut self, mean: f64, var: f64) -> Result<f64> {
        if var <= 0.0 || !var.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian variance must be positive, got {var}"
            )));
        }
        Ok(mean + libm::sqrt(var) * self.standard_normal())
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Free-function form of [`RandomStream::gaussian`].
pub fn gaussian(rng: &mut RandomStream, mean: f64, var: f64) -> Result<f64> {
    rng.gaussian(mean, var)
}

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x)
}

#[inline]
fn std_survival(z: f64) -> f64 {
    0.5 * libm::erfc(z * core::f64::consts::FRAC_1_SQRT_2)
}

/// `Pr[X >= x]` for `X ~ N(mu, var)`.
pub fn survival(x: f64, mu: f64, var: f64) -> Result<f64> {
    if var <= 0.0 || !var.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "survival variance must be positive, got {var}"
        )));
    }
    Ok(std_survival((x - mu) / libm::sqrt(var)))
}

// Acklam's rational approximation to the lower-tail normal quantile.
// Relative error below 1.15e-9 on (0, 1).
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.024_25;

/// Lower-tail quantile for `p` in `(0, 0.5]`.
fn acklam_lower(p: f64) -> f64 {
    if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Upper-tail standard normal quantile: the `x` with `Pr[Z >= x] = q`.
///
/// Rational approximation followed by one Newton step on the survival
/// function; the result satisfies `|survival(phi(q), 0, 1) - q| <= 1e-9`
/// (in practice a few ulps).
pub fn phi(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "phi is defined on (0, 0.5), got {q}"
        )));
    }
    // Upper tail of q is the negated lower tail of q; avoids forming 1 - q.
    let x0 = -acklam_lower(q);
    // d/dx survival(x) = -pdf(x)
    let x1 = x0 + (std_survival(x0) - q) / normal_pdf(x0);
    Ok(x1)
}
