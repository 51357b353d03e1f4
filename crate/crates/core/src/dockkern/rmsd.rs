use super::KernelError;

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

fn check_len(expected: usize, got: usize) -> Result<(), KernelError> {
    if expected != got {
        return Err(KernelError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Heavy-atom RMSD with identity pairing and no superposition.
pub fn rmsd_ub(a: &[[f64; 3]], b: &[[f64; 3]], heavy: &[bool]) -> Result<f64, KernelError> {
    check_len(a.len(), b.len())?;
    check_len(a.len(), heavy.len())?;
    let (sum, n) = a
        .iter()
        .zip(b)
        .zip(heavy)
        .filter(|(_, &h)| h)
        .fold((0.0, 0usize), |(s, n), ((p, q), _)| (s + dist2(p, q), n + 1));
    Ok(if n == 0 { 0.0 } else { (sum / n as f64).sqrt() })
}

fn directed(x: &[[f64; 3]], y: &[[f64; 3]], types: &[&str], heavy: &[bool]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (i, p) in x.iter().enumerate() {
        if !heavy[i] {
            continue;
        }
        // atom i itself always qualifies, so the minimum exists
        let best = y
            .iter()
            .enumerate()
            .filter(|(j, _)| heavy[*j] && types[*j] == types[i])
            .map(|(_, q)| dist2(p, q))
            .fold(f64::INFINITY, f64::min);
        sum += best;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Heavy-atom RMSD where each atom is matched to the nearest atom of the same
/// AutoDock type on the other pose; the larger of the two directions.
pub fn rmsd_lb(
    a: &[[f64; 3]],
    b: &[[f64; 3]],
    types: &[&str],
    heavy: &[bool],
) -> Result<f64, KernelError> {
    check_len(a.len(), b.len())?;
    check_len(a.len(), heavy.len())?;
    check_len(a.len(), types.len())?;
    Ok(directed(a, b, types, heavy).max(directed(b, a, types, heavy)))
}
