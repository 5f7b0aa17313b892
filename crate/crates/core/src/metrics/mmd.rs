use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::histogram::Histogram;
use super::nspdk::{nspdk_kernel, NspdkFeatureVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DescriptorKind {
    Degree,
    Clustering,
    Orbit,
    NodeLabel,
    EdgeLabel,
    JointLabelDegree,
    Nspdk,
}

/// One graph's summary for a single metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Descriptor {
    Degree(Histogram),
    Clustering(Histogram),
    /// Mean per-node orbit counts, compared as an unnormalized histogram.
    Orbit(Vec<f64>),
    NodeLabel(Histogram),
    EdgeLabel(Histogram),
    JointLabelDegree(Histogram),
    Nspdk(NspdkFeatureVector),
}

impl Descriptor {
    pub fn kind(&self) -> DescriptorKind {
        match self {
            Descriptor::Degree(_) => DescriptorKind::Degree,
            Descriptor::Clustering(_) => DescriptorKind::Clustering,
            Descriptor::Orbit(_) => DescriptorKind::Orbit,
            Descriptor::NodeLabel(_) => DescriptorKind::NodeLabel,
            Descriptor::EdgeLabel(_) => DescriptorKind::EdgeLabel,
            Descriptor::JointLabelDegree(_) => DescriptorKind::JointLabelDegree,
            Descriptor::Nspdk(_) => DescriptorKind::Nspdk,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    /// `exp(-W1^2 / (2 sigma^2))` on ordered histograms.
    GaussianEmd { sigma: f64 },
    /// `exp(-TV^2 / (2 sigma^2))` on categorical histograms.
    GaussianTv { sigma: f64 },
    /// Normalized dot product of sparse feature vectors.
    Cosine,
}

impl Kernel {
    pub fn default_for(kind: DescriptorKind, sigma: f64) -> Kernel {
        match kind {
            DescriptorKind::Degree | DescriptorKind::Clustering | DescriptorKind::Orbit => Kernel::GaussianEmd { sigma },
            DescriptorKind::NodeLabel | DescriptorKind::EdgeLabel | DescriptorKind::JointLabelDegree => {
                Kernel::GaussianTv { sigma }
            }
            DescriptorKind::Nspdk => Kernel::Cosine,
        }
    }
}

/// First Wasserstein distance between two histograms on a common grid.
pub fn emd_1d(a: &[f64], b: &[f64], width: f64) -> f64 {
    let n = a.len().max(b.len());
    let (mut ca, mut cb, mut total) = (0.0, 0.0, 0.0);
    for i in 0..n {
        ca += a.get(i).copied().unwrap_or(0.0);
        cb += b.get(i).copied().unwrap_or(0.0);
        total += (ca - cb).abs();
    }
    total * width
}

pub fn total_variation(a: &Histogram, b: &Histogram) -> f64 {
    match (a, b) {
        (Histogram::Categorical(x), Histogram::Categorical(y)) => {
            let keys: BTreeSet<&String> = x.keys().chain(y.keys()).collect();
            0.5 * keys.into_iter().map(|k| (x.get(k).unwrap_or(&0.0) - y.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
        }
        _ => f64::NAN,
    }
}

fn gaussian(dist: f64, sigma: f64) -> f64 {
    (-dist * dist / (2.0 * sigma * sigma)).exp()
}

fn mismatch(a: &Descriptor, kernel: &Kernel) -> Error {
    Error::KindMismatch(format!("{:?} descriptor with {kernel:?} kernel", a.kind()))
}

fn binned(d: &Descriptor) -> Option<(&[f64], f64)> {
    match d {
        Descriptor::Degree(Histogram::Binned { width, mass }) | Descriptor::Clustering(Histogram::Binned { width, mass }) => {
            Some((mass, *width))
        }
        Descriptor::Orbit(v) => Some((v, 1.0)),
        _ => None,
    }
}

fn categorical(d: &Descriptor) -> Option<&Histogram> {
    match d {
        Descriptor::NodeLabel(h) | Descriptor::EdgeLabel(h) | Descriptor::JointLabelDegree(h) => Some(h),
        _ => None,
    }
}

pub fn kernel_value(a: &Descriptor, b: &Descriptor, kernel: &Kernel) -> Result<f64> {
    if a.kind() != b.kind() {
        return Err(Error::KindMismatch(format!("{:?} vs {:?}", a.kind(), b.kind())));
    }
    match *kernel {
        Kernel::GaussianEmd { sigma } => {
            let ((x, w), (y, _)) = binned(a).zip(binned(b)).ok_or_else(|| mismatch(a, kernel))?;
            Ok(gaussian(emd_1d(x, y, w), sigma))
        }
        Kernel::GaussianTv { sigma } => {
            let (x, y) = categorical(a).zip(categorical(b)).ok_or_else(|| mismatch(a, kernel))?;
            Ok(gaussian(total_variation(x, y), sigma))
        }
        Kernel::Cosine => match (a, b) {
            (Descriptor::Nspdk(x), Descriptor::Nspdk(y)) => Ok(nspdk_kernel(x, y)),
            _ => Err(mismatch(a, kernel)),
        },
    }
}

fn mean_kernel(a: &[&Descriptor], b: &[&Descriptor], kernel: &Kernel) -> Result<f64> {
    let rows: Vec<Result<f64>> =
        a.par_iter().map(|x| b.iter().map(|y| kernel_value(x, y, kernel)).sum::<Result<f64>>()).collect();
    let mut total = 0.0;
    for r in rows {
        total += r?;
    }
    Ok(total / (a.len() * b.len()) as f64)
}

/// Biased squared MMD, clamped at zero.
pub fn mmd(a: &[Descriptor], b: &[Descriptor], kernel: &Kernel) -> Result<f64> {
    mmd_refs(&a.iter().collect::<Vec<_>>(), &b.iter().collect::<Vec<_>>(), kernel)
}

pub(crate) fn mmd_refs(a: &[&Descriptor], b: &[&Descriptor], kernel: &Kernel) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyDataset("MMD needs two non-empty descriptor sets"));
    }
    let kind = a[0].kind();
    if let Some(d) = a.iter().chain(b).find(|d| d.kind() != kind) {
        return Err(Error::KindMismatch(format!("{kind:?} vs {:?}", d.kind())));
    }
    let kaa = mean_kernel(a, a, kernel)?;
    let kbb = mean_kernel(b, b, kernel)?;
    let kab = mean_kernel(a, b, kernel)?;
    Ok((kaa + kbb - 2.0 * kab).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(at: usize) -> Descriptor {
        let mut mass = vec![0.0; at + 1];
        mass[at] = 1.0;
        Descriptor::Degree(Histogram::Binned { width: 1.0, mass })
    }

    #[test]
    fn hand_computed_value() {
        let m = mmd(&[delta(2)], &[delta(3)], &Kernel::GaussianEmd { sigma: 1.0 }).unwrap();
        assert!((m - 2.0 * (1.0 - (-0.5f64).exp())).abs() < 1e-12);
        assert!((m - 0.7869).abs() < 1e-4);
    }

    #[test]
    fn identity_and_symmetry() {
        let k = Kernel::GaussianEmd { sigma: 1.0 };
        let x = [delta(1), delta(4), delta(2)];
        let y = [delta(0), delta(2)];
        assert!(mmd(&x, &x, &k).unwrap() <= 1e-12);
        assert_eq!(mmd(&x, &y, &k).unwrap(), mmd(&y, &x, &k).unwrap());
    }

    #[test]
    fn kind_mismatch() {
        let k = Kernel::GaussianEmd { sigma: 1.0 };
        let other = Descriptor::Orbit(vec![0.0; 11]);
        assert!(matches!(mmd(&[delta(1)], &[other], &k), Err(Error::KindMismatch(_))));
        let labels = [Descriptor::NodeLabel(Histogram::Categorical(Default::default()))];
        assert!(matches!(mmd(&labels, &labels, &k), Err(Error::KindMismatch(_))));
    }

    #[test]
    fn emd_of_shifted_mass() {
        assert_eq!(emd_1d(&[1.0], &[0.0, 0.0, 1.0], 1.0), 2.0);
        assert!((emd_1d(&[0.5, 0.5], &[0.0, 1.0], 0.01) - 0.005).abs() < 1e-15);
    }
}
