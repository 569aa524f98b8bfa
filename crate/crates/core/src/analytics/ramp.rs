use super::{AnalyticsError, SdfField};
use crate::mesh::Rgb;
use crate::scalar::Real;

pub const RAMP_RED: Rgb = [255, 0, 0];
pub const RAMP_GREEN: Rgb = [0, 255, 0];

/// Linear-interpolated percentile (`q` in `[0, 100]`) of ascending `sorted`.
pub fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = (q.clamp(0.0, 100.0) / 100.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    let frac = pos - i as f64;
    Some(sorted[i] + (sorted[j] - sorted[i]) * frac)
}

/// Red-to-green ramp over `[lo, hi]`. When either bound is omitted it
/// defaults to the 5th / 95th percentile of the positive values.
pub fn sdf_to_colors<T: Real>(
    f: &SdfField<T>,
    lo: Option<f64>,
    hi: Option<f64>,
) -> Result<Vec<Rgb>, AnalyticsError> {
    let (lo, hi) = match (lo, hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            let mut positive: Vec<f64> = f
                .values
                .iter()
                .map(|v| v.as_f64())
                .filter(|&v| v > 0.0)
                .collect();
            positive.sort_by(f64::total_cmp);
            let p5 = percentile(&positive, 5.0);
            let p95 = percentile(&positive, 95.0);
            match (p5, p95) {
                (Some(a), Some(b)) => (lo.unwrap_or(a), hi.unwrap_or(b)),
                _ => return Err(AnalyticsError::DegenerateRange { lo: 0.0, hi: 0.0 }),
            }
        }
    };
    if !(lo < hi) {
        return Err(AnalyticsError::DegenerateRange { lo, hi });
    }
    Ok(f.values
        .iter()
        .map(|v| {
            let t = ((v.as_f64() - lo) / (hi - lo)).clamp(0.0, 1.0);
            [
                (255.0 * (1.0 - t)).round() as u8,
                (255.0 * t).round() as u8,
                0,
            ]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::SdfConfig;

    fn field(values: Vec<f64>) -> SdfField<f64> {
        SdfField {
            values,
            config: SdfConfig::default(),
        }
    }

    #[test]
    fn ramp_endpoints_and_midpoint() {
        let c = sdf_to_colors(
            &field(vec![2.0, 1.0, 3.0, 2.0 + 1e-12, 10.0]),
            Some(2.0),
            Some(4.0),
        )
        .unwrap();
        assert_eq!(c[0], RAMP_RED);
        assert_eq!(c[1], RAMP_RED);
        assert_eq!(c[2], [128, 128, 0]);
        assert_eq!(c[4], RAMP_GREEN);
    }

    #[test]
    fn degenerate_ranges() {
        assert!(matches!(
            sdf_to_colors(&field(vec![1.0]), Some(2.0), Some(2.0)),
            Err(AnalyticsError::DegenerateRange { .. })
        ));
        assert!(matches!(
            sdf_to_colors(&field(vec![4.0; 10]), None, None),
            Err(AnalyticsError::DegenerateRange { .. })
        ));
        assert!(matches!(
            sdf_to_colors(&field(vec![0.0; 3]), None, None),
            Err(AnalyticsError::DegenerateRange { .. })
        ));
    }

    #[test]
    fn default_bounds_use_positive_percentiles() {
        // Positive values 1..=21: p5 = 2, p95 = 20; zeros are ignored.
        let mut v: Vec<f64> = (1..=21).map(f64::from).collect();
        v.push(0.0);
        let c = sdf_to_colors(&field(v), None, None).unwrap();
        assert_eq!(c[1], RAMP_RED);
        assert_eq!(c[10], [128, 128, 0]);
        assert_eq!(c[19], RAMP_GREEN);
        assert_eq!(c[21], RAMP_RED);
    }

    #[test]
    fn percentile_interpolates() {
        assert_eq!(percentile(&[1.0, 2.0, 3.0, 4.0, 5.0], 50.0), Some(3.0));
        assert_eq!(percentile(&[0.0, 10.0], 25.0), Some(2.5));
        assert_eq!(percentile(&[], 50.0), None);
    }
}
