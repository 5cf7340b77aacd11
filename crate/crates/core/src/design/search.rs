//! Scalar root finding and minimization.

use crate::error::Result;

/// Bisection for a root of `g` on `[lo, hi]`, given `g(lo)` and `g(hi)` of
/// opposite sign (or one of them zero). Stops when the bracket is narrower
/// than `x_tol` or `|g| <= g_tol`.
pub fn bisect<F>(mut g: F, mut lo: f64, mut hi: f64, x_tol: f64, g_tol: f64) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo == 0.0 {
        return Ok(Some(lo));
    }
    if g_hi == 0.0 {
        return Ok(Some(hi));
    }
    if g_lo.signum() == g_hi.signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid)?;
        if g_mid.abs() <= g_tol || (hi - lo) <= x_tol {
            return Ok(Some(mid));
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of a unimodal `f` on `[lo, hi]` down to a
/// bracket of width `x_tol`. Returns `(x, f(x))` for the best point seen.
pub fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > x_tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Coarse scan of `points` samples over `[lo, hi]` followed by golden
/// refinement around the best sample. Ties go to the smaller argument, and
/// the result is never worse than the best scanned sample.
pub fn scan_then_golden<F>(mut f: F, lo: f64, hi: f64, points: usize, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let n = points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = (lo, f(lo)?);
    for i in 1..n {
        let x = if i == n - 1 { hi } else { lo + step * i as f64 };
        let v = f(x)?;
        if v < best.1 {
            best = (x, v);
        }
    }
    let a = (best.0 - step).max(lo);
    let b = (best.0 + step).min(hi);
    let refined = golden_section(&mut f, a, b, x_tol)?;
    Ok(if refined.1 < best.1 { refined } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14, 0.0).unwrap().unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| Ok(x * x + 1.0), 0.0, 2.0, 1e-12, 0.0).unwrap().is_none());
        assert_eq!(bisect(Ok, 0.0, 1.0, 1e-12, 0.0).unwrap(), Some(0.0));
    }

    #[test]
    fn golden_finds_parabola_min() {
        let (x, fx) = golden_section(|x| Ok((x - 0.3).powi(2) + 1.0), -1.0, 2.0, 1e-6).unwrap();
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scan_prefers_smaller_on_ties() {
        let (x, _) = scan_then_golden(|_| Ok(1.0), 0.0, 10.0, 64, 1e-6).unwrap();
        assert_eq!(x, 0.0);
        // multimodal: scan picks the global basin
        let f = |x: f64| Ok((x - 8.0).powi(2).min((x - 2.0).powi(2) + 0.5));
        let (x, _) = scan_then_golden(f, 0.0, 10.0, 64, 1e-9).unwrap();
        assert!((x - 8.0).abs() < 1e-6);
    }
}
