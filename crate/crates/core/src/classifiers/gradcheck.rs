use crate::{Error, Result};

/// Central-difference gradient of `loss` at `theta`.
pub fn finite_difference_grad<F>(loss: F, theta: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Numeric(format!("step {h} must be positive")));
    }
    let mut point = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        point[i] = theta[i] + h;
        let up = loss(&point);
        point[i] = theta[i] - h;
        let down = loss(&point);
        point[i] = theta[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite loss while perturbing component {i}"
            )));
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

/// Largest component-wise `|a - b| / max(|a|, |b|, floor)`.
///
/// The floor keeps components whose true gradient is ~0 from being judged
/// on finite-difference rounding noise alone.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let g = finite_difference_grad(|t| t[0] * t[0] + t[1] * t[1], &[1.0, 2.0], 1e-5).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8 && (g[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn constant_is_zero() {
        let g = finite_difference_grad(|_| 3.5, &[1.0, -4.0, 9.0], 1e-5).unwrap();
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn bilinear() {
        let g = finite_difference_grad(|t| t[0] * t[1], &[3.0, 5.0], 1e-5).unwrap();
        assert!((g[0] - 5.0).abs() < 1e-8 && (g[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn non_finite_loss_is_error() {
        let r = finite_difference_grad(|t| (t[0]).ln(), &[0.0], 1e-5);
        assert!(matches!(r, Err(Error::Numeric(_))));
        assert!(finite_difference_grad(|t| t[0], &[0.0], 0.0).is_err());
    }
}
