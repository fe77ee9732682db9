//! Globally adaptive Gauss-Kronrod (10/21 point) quadrature for
//! vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    /// Target bound on the summed error estimate of every component.
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Equal pieces `[a, b]` is split into before adapting.
    pub initial_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_intervals: 4000,
            initial_intervals: 8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadratureResult {
    pub values: Vec<f64>,
    /// Per-component error estimates.
    pub errors: Vec<f64>,
    pub converged: bool,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    worst: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.worst == other.worst
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.worst.total_cmp(&other.worst)
    }
}

fn rule<F, E>(f: &mut F, a: f64, b: f64, dim: usize) -> Result<Segment, E>
where
    F: FnMut(f64, &mut [f64]) -> Result<(), E>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // lo[k], hi[k]: integrand at center -/+ half * XGK[k]; hi[10] is the center
    let mut lo = vec![vec![0.0; dim]; 11];
    let mut hi = vec![vec![0.0; dim]; 11];
    f(center, &mut hi[10])?;
    for k in 0..10 {
        let dx = half * XGK[k];
        f(center - dx, &mut lo[k])?;
        f(center + dx, &mut hi[k])?;
    }
    let mut values = Vec::with_capacity(dim);
    let mut errors = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut kronrod = WGK[10] * hi[10][c];
        let mut gauss = 0.0;
        let mut res_abs = WGK[10] * hi[10][c].abs();
        for k in 0..10 {
            let s = lo[k][c] + hi[k][c];
            kronrod += WGK[k] * s;
            res_abs += WGK[k] * (lo[k][c].abs() + hi[k][c].abs());
            if k % 2 == 1 {
                gauss += WG[k / 2] * s;
            }
        }
        let mean = 0.5 * kronrod;
        let mut res_asc = WGK[10] * (hi[10][c] - mean).abs();
        for k in 0..10 {
            res_asc += WGK[k] * ((lo[k][c] - mean).abs() + (hi[k][c] - mean).abs());
        }
        let (res_abs, res_asc) = (res_abs * half.abs(), res_asc * half.abs());
        // QUADPACK rescaling of the raw Kronrod-Gauss difference
        let mut err = ((kronrod - gauss) * half).abs();
        if err != 0.0 && res_asc != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * res_abs;
        values.push(kronrod * half);
        errors.push(err.max(floor));
    }
    let worst = errors.iter().copied().fold(0.0, f64::max);
    Ok(Segment {
        a,
        b,
        values,
        errors,
        worst,
    })
}

/// Integrates `f` over `[a, b]`. The integrand writes `dim` components into
/// its output slice. Returns the best estimate even when not converged.
pub fn integrate_vec<F, E>(
    mut f: F,
    a: f64,
    b: f64,
    dim: usize,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult, E>
where
    F: FnMut(f64, &mut [f64]) -> Result<(), E>,
{
    let mut heap = BinaryHeap::new();
    let pieces = opts.initial_intervals.max(1);
    for p in 0..pieces {
        let lo = a + (b - a) * p as f64 / pieces as f64;
        let hi = if p + 1 == pieces {
            b
        } else {
            a + (b - a) * (p + 1) as f64 / pieces as f64
        };
        heap.push(rule(&mut f, lo, hi, dim)?);
    }
    loop {
        let mut total_err = vec![0.0; dim];
        for s in heap.iter() {
            for c in 0..dim {
                total_err[c] += s.errors[c];
            }
        }
        let worst = total_err.iter().copied().fold(0.0, f64::max);
        let converged = worst <= opts.abs_tol;
        let top = heap.peek().expect("nonempty");
        let too_narrow = (top.b - top.a).abs() <= 1e3 * f64::EPSILON * (top.a.abs() + top.b.abs());
        if converged || heap.len() >= opts.max_intervals || too_narrow {
            let mut values = vec![0.0; dim];
            // sum in interval order for reproducibility
            let mut segs: Vec<&Segment> = heap.iter().collect();
            segs.sort_by(|x, y| x.a.total_cmp(&y.a));
            for s in segs {
                for c in 0..dim {
                    values[c] += s.values[c];
                }
            }
            return Ok(QuadratureResult {
                values,
                errors: total_err,
                converged,
                intervals: heap.len(),
            });
        }
        let seg = heap.pop().expect("nonempty");
        let mid = 0.5 * (seg.a + seg.b);
        heap.push(rule(&mut f, seg.a, mid, dim)?);
        heap.push(rule(&mut f, mid, seg.b, dim)?);
    }
}

/// Scalar convenience wrapper.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> QuadratureResult {
    integrate_vec::<_, std::convert::Infallible>(
        |t, out| {
            out[0] = f(t);
            Ok(())
        },
        a,
        b,
        1,
        opts,
    )
    .unwrap_or_else(|e| match e {})
}
