//! PSNR metrics over point cloud geometry.
//!
//! Every variant has the form `10 log10(numerator / mse)` per direction:
//!
//! | peak                      | numerator          |
//! |---------------------------|--------------------|
//! | precision                 | `3 p_c^2`          |
//! | largest diagonal          | `LD^2`             |
//! | resolution `r` (I-PSNR)   | `r^2`              |
//! | resolution `r` (RA-PSNR)  | `3 r p_c`          |
//!
//! `p_c = 2^b - 1` is the coordinate peak. Resolutions and the diagonal are
//! measured on the reference cloud and shared by both directions.

pub mod distance;
pub mod resolution;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::cloud::{coordinate_peak, infer_bit_depth, PointCloud};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::index::NeighborIndex;
use crate::normals::{normals_from_index, DEFAULT_NORMAL_K};
use crate::Point3;

pub use distance::{directional_mse, mse_against_index, squared_error, squared_errors, ErrorKind};
pub use resolution::{
    ann, ann_k, apd_k, apd_k_mean_square, density_coefficient, largest_diagonal, mnn,
    planar_distance, planar_distance_vector, Resolution,
};

/// The normalizer placed in the PSNR numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Peak {
    Precision,
    LargestDiagonal,
    Resolution(Resolution),
}

/// Peak selection plus the density-adaptive (RA-PSNR) switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeakSpec {
    pub peak: Peak,
    pub density_adaptive: bool,
}

impl PeakSpec {
    pub const PRECISION: PeakSpec = PeakSpec {
        peak: Peak::Precision,
        density_adaptive: false,
    };
    pub const LARGEST_DIAGONAL: PeakSpec = PeakSpec {
        peak: Peak::LargestDiagonal,
        density_adaptive: false,
    };

    /// I-PSNR: the resolution itself is the peak.
    pub fn intrinsic(resolution: Resolution) -> Self {
        Self {
            peak: Peak::Resolution(resolution),
            density_adaptive: false,
        }
    }

    /// RA-PSNR with the given resolution estimator.
    pub fn resolution_adaptive(resolution: Resolution) -> Self {
        Self {
            peak: Peak::Resolution(resolution),
            density_adaptive: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.peak {
            Peak::Precision | Peak::LargestDiagonal if self.density_adaptive => {
                Err(Error::InvalidParameter(
                    "density-adaptive scaling needs a resolution estimator peak".into(),
                ))
            }
            Peak::Resolution(r) => r.validate(),
            _ => Ok(()),
        }
    }

    pub fn needs_bit_depth(&self) -> bool {
        self.peak == Peak::Precision || self.density_adaptive
    }

    pub fn resolution(&self) -> Option<Resolution> {
        match self.peak {
            Peak::Resolution(r) => Some(r),
            _ => None,
        }
    }

    pub fn k(&self) -> Option<usize> {
        self.resolution().and_then(Resolution::k)
    }

    /// Short name such as `precision`, `ld`, `i-annk` or `ra-apdk`.
    pub fn label(&self) -> String {
        match self.peak {
            Peak::Precision => "precision".into(),
            Peak::LargestDiagonal => "ld".into(),
            Peak::Resolution(r) if self.density_adaptive => format!("ra-{}", r.label()),
            Peak::Resolution(r) => format!("i-{}", r.label()),
        }
    }
}

/// How the two directional PSNRs are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    /// Larger of the two PSNRs.
    #[default]
    PaperMax,
    /// Smaller of the two PSNRs (larger error), as in the MPEG reference
    /// software.
    MpegMin,
}

impl Pooling {
    /// Pools two directional values where `None` is infinite quality.
    pub fn pool(self, ab: Option<f64>, ba: Option<f64>) -> Option<f64> {
        match (self, ab, ba) {
            (Pooling::PaperMax, Some(x), Some(y)) => Some(x.max(y)),
            (Pooling::PaperMax, _, _) => None,
            (Pooling::MpegMin, Some(x), Some(y)) => Some(x.min(y)),
            (Pooling::MpegMin, Some(x), None) | (Pooling::MpegMin, None, Some(x)) => Some(x),
            (Pooling::MpegMin, None, None) => None,
        }
    }
}

/// Error measure and peak of one metric variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricVariant {
    pub error: ErrorKind,
    pub peak: PeakSpec,
}

impl MetricVariant {
    pub fn new(error: ErrorKind, peak: PeakSpec) -> Self {
        Self { error, peak }
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.error.label(), self.peak.label())
    }

    /// The sixteen variants of the benchmark table: PSNR with precision and
    /// diagonal peaks, I-PSNR with MNN/ANN/ANN_k, RA-PSNR with
    /// ANN/ANN_k/APD_k, each with both error kinds.
    pub fn standard_set(k: usize) -> Vec<MetricVariant> {
        let peaks = [
            PeakSpec::PRECISION,
            PeakSpec::LARGEST_DIAGONAL,
            PeakSpec::intrinsic(Resolution::Mnn),
            PeakSpec::intrinsic(Resolution::Ann),
            PeakSpec::intrinsic(Resolution::AnnK(k)),
            PeakSpec::resolution_adaptive(Resolution::Ann),
            PeakSpec::resolution_adaptive(Resolution::AnnK(k)),
            PeakSpec::resolution_adaptive(Resolution::ApdK(k)),
        ];
        peaks
            .iter()
            .flat_map(|&p| [ErrorKind::Po2Po, ErrorKind::Po2Pl].map(|e| MetricVariant::new(e, p)))
            .collect()
    }
}

/// Settings shared by all variants of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricOptions {
    /// Neighborhood size for normal estimation when a cloud carries none.
    pub normal_k: usize,
    /// Coordinate bit depth; overrides the reference cloud's own.
    pub bit_depth: Option<u32>,
    pub pooling: Pooling,
    pub execution: Execution,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            normal_k: DEFAULT_NORMAL_K,
            bit_depth: None,
            pooling: Pooling::default(),
            execution: Execution::default(),
        }
    }
}

/// Where the normals used for a cloud came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalSource {
    File,
    Estimated { k: usize, degenerate: usize },
}

/// Outcome of one metric evaluation. `None` PSNRs denote infinite quality
/// (zero MSE).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub error_kind: ErrorKind,
    pub peak: PeakSpec,
    pub pooling: Pooling,
    pub psnr_ab: Option<f64>,
    pub psnr_ba: Option<f64>,
    pub psnr_pooled: Option<f64>,
    pub infinite_quality: bool,
    pub mse_ab: f64,
    pub mse_ba: f64,
    /// Effective `p_s` with `psnr = 10 log10(p_s^2 / mse)`, in source units.
    pub peak_value: f64,
    /// Resolution estimate of the reference, when the peak uses one.
    pub resolution: Option<f64>,
    pub bit_depth: Option<u32>,
    pub normal_k: usize,
    pub reference_normals: Option<NormalSource>,
    pub degraded_normals: Option<NormalSource>,
}

/// `10 log10(numerator / mse)`, `None` when `mse` is zero.
pub fn psnr_db(numerator: f64, mse: f64) -> Option<f64> {
    if mse == 0.0 {
        None
    } else {
        Some(10.0 * (numerator / mse).log10())
    }
}

/// RA-PSNR written with the precision-normalized numerator and the density
/// coefficient scaling the error: `10 log10(3 p_c^2 / (mu mse))`.
pub fn ra_psnr_db_density_form(bit_depth: u32, resolution: f64, mse: f64) -> Result<Option<f64>> {
    let mu = density_coefficient(bit_depth, resolution)?;
    let pc = coordinate_peak(bit_depth);
    Ok(psnr_db(3.0 * pc * pc, mu * mse))
}

/// RA-PSNR in the simplified form `10 log10(3 r p_c / mse)`.
pub fn ra_psnr_db(bit_depth: u32, resolution: f64, mse: f64) -> Result<Option<f64>> {
    density_coefficient(bit_depth, resolution)?;
    Ok(psnr_db(3.0 * resolution * coordinate_peak(bit_depth), mse))
}

/// A cloud with its search index and lazily computed normals and
/// resolution estimates, reusable across metric variants.
pub struct PreparedCloud {
    cloud: PointCloud,
    index: NeighborIndex,
    normal_k: usize,
    execution: Execution,
    normals: OnceLock<Result<(Vec<Point3>, NormalSource)>>,
    resolutions: Mutex<HashMap<Resolution, Result<f64>>>,
}

impl PreparedCloud {
    pub fn new(cloud: PointCloud, normal_k: usize, execution: Execution) -> Result<Self> {
        let index = NeighborIndex::build(&cloud)?;
        Ok(Self {
            cloud,
            index,
            normal_k,
            execution,
            normals: OnceLock::new(),
            resolutions: Mutex::new(HashMap::new()),
        })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn index(&self) -> &NeighborIndex {
        &self.index
    }

    /// File normals when present, otherwise PCA estimates.
    pub fn normals(&self) -> Result<(&[Point3], NormalSource)> {
        let entry = self.normals.get_or_init(|| match self.cloud.normals() {
            Some(n) => Ok((n.to_vec(), NormalSource::File)),
            None => {
                let (n, degenerate) =
                    normals_from_index(&self.index, self.normal_k, self.execution)?;
                Ok((
                    n,
                    NormalSource::Estimated {
                        k: self.normal_k,
                        degenerate: degenerate.len(),
                    },
                ))
            }
        });
        match entry {
            Ok((n, src)) => Ok((n.as_slice(), *src)),
            Err(e) => Err(e.clone()),
        }
    }

    /// Resolution estimate, memoized per estimator.
    pub fn resolution(&self, estimator: Resolution) -> Result<f64> {
        if let Some(r) = self.resolutions.lock().expect("poisoned").get(&estimator) {
            return r.clone();
        }
        let value = if estimator.needs_normals() {
            self.normals()
                .and_then(|(n, _)| estimator.evaluate(&self.index, Some(n), self.execution))
        } else {
            estimator.evaluate(&self.index, None, self.execution)
        };
        self.resolutions
            .lock()
            .expect("poisoned")
            .insert(estimator, value.clone());
        value
    }

    /// MSE of this cloud's points against `target`.
    pub fn mse_to(
        &self,
        target: &PreparedCloud,
        kind: ErrorKind,
    ) -> Result<(f64, Option<NormalSource>)> {
        let (normals, source) = match kind {
            ErrorKind::Po2Po => (None, None),
            ErrorKind::Po2Pl => {
                let (n, s) = target.normals()?;
                (Some(n), Some(s))
            }
        };
        let mse = mse_against_index(
            self.cloud.points(),
            &target.index,
            normals,
            kind,
            self.execution,
        )?;
        Ok((mse, source))
    }
}

fn resolve_bit_depth(reference: &PointCloud, options: &MetricOptions) -> Result<u32> {
    if let Some(b) = options.bit_depth.or(reference.bit_depth()) {
        return Ok(b);
    }
    infer_bit_depth(reference).map_err(|e| Error::MissingBitDepth(e.to_string()))
}

/// Evaluates one variant on a prepared reference/degraded pair.
pub fn evaluate(
    reference: &PreparedCloud,
    degraded: &PreparedCloud,
    variant: &MetricVariant,
    options: &MetricOptions,
) -> Result<MetricResult> {
    let peak = variant.peak;
    peak.validate()?;
    let bit_depth = if peak.needs_bit_depth() {
        Some(resolve_bit_depth(reference.cloud(), options)?)
    } else {
        None
    };
    let resolution = peak
        .resolution()
        .map(|r| reference.resolution(r))
        .transpose()?;
    let mut reference_normals = None;
    if peak.resolution().is_some_and(Resolution::needs_normals) {
        reference_normals = Some(reference.normals()?.1);
    }

    let numerator = match (peak.peak, resolution, bit_depth) {
        (Peak::Precision, _, Some(b)) => 3.0 * coordinate_peak(b).powi(2),
        (Peak::LargestDiagonal, _, _) => largest_diagonal(reference.cloud())?.powi(2),
        (Peak::Resolution(_), Some(r), Some(b)) if peak.density_adaptive => {
            3.0 * r * coordinate_peak(b)
        }
        (Peak::Resolution(_), Some(r), _) => r * r,
        _ => unreachable!("bit depth and resolution resolved above"),
    };
    if numerator.is_nan() || numerator <= 0.0 {
        return Err(Error::ZeroPeak(match peak.peak {
            Peak::Precision => "precision",
            Peak::LargestDiagonal => "single-location reference has no diagonal",
            Peak::Resolution(_) => "reference resolution is zero",
        }));
    }

    let (mse_ab, degraded_normals) = reference.mse_to(degraded, variant.error)?;
    let (mse_ba, ref_normals_ba) = degraded.mse_to(reference, variant.error)?;
    reference_normals = reference_normals.or(ref_normals_ba);

    let psnr_ab = psnr_db(numerator, mse_ab);
    let psnr_ba = psnr_db(numerator, mse_ba);
    let psnr_pooled = options.pooling.pool(psnr_ab, psnr_ba);
    Ok(MetricResult {
        error_kind: variant.error,
        peak,
        pooling: options.pooling,
        psnr_ab,
        psnr_ba,
        psnr_pooled,
        infinite_quality: psnr_pooled.is_none(),
        mse_ab,
        mse_ba,
        peak_value: numerator.sqrt(),
        resolution,
        bit_depth,
        normal_k: options.normal_k,
        reference_normals,
        degraded_normals,
    })
}

/// Evaluates a variant with explicit options on unprepared clouds.
pub fn evaluate_clouds(
    reference: &PointCloud,
    degraded: &PointCloud,
    variant: &MetricVariant,
    options: &MetricOptions,
) -> Result<MetricResult> {
    let r = PreparedCloud::new(reference.clone(), options.normal_k, options.execution)?;
    let d = PreparedCloud::new(degraded.clone(), options.normal_k, options.execution)?;
    evaluate(&r, &d, variant, options)
}

/// Symmetric PSNR of `degraded` against `reference` with default options.
pub fn psnr(
    reference: &PointCloud,
    degraded: &PointCloud,
    kind: ErrorKind,
    peak: PeakSpec,
) -> Result<MetricResult> {
    evaluate_clouds(
        reference,
        degraded,
        &MetricVariant::new(kind, peak),
        &MetricOptions::default(),
    )
}

/// RA-PSNR with the given resolution estimator and default options.
pub fn ra_psnr(
    reference: &PointCloud,
    degraded: &PointCloud,
    kind: ErrorKind,
    estimator: Resolution,
) -> Result<MetricResult> {
    psnr(
        reference,
        degraded,
        kind,
        PeakSpec::resolution_adaptive(estimator),
    )
}
