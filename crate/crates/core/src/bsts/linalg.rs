use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub(crate) fn symmetrize(p: &DMatrix<f64>) -> DMatrix<f64> {
    (p + p.transpose()) * 0.5
}

/// Symmetrizes and clips negative eigenvalues to zero.
pub(crate) fn psd_floor(p: &DMatrix<f64>) -> DMatrix<f64> {
    let s = symmetrize(p);
    match s.nrows() {
        0 => s,
        1 => DMatrix::from_element(1, 1, s[(0, 0)].max(0.0)),
        2 if s[(0, 0)] >= 0.0
            && s[(1, 1)] >= 0.0
            && s[(0, 0)] * s[(1, 1)] >= s[(0, 1)] * s[(0, 1)] =>
        {
            s
        }
        _ => {
            if s.clone().cholesky().is_some() {
                return s;
            }
            let eig = s.symmetric_eigen();
            let vals = eig.eigenvalues.map(|v| v.max(0.0));
            let v = &eig.eigenvectors;
            symmetrize(&(v * DMatrix::from_diagonal(&vals) * v.transpose()))
        }
    }
}

/// `x` with `g x = b`, falling back to the pseudo-inverse when `g` is singular.
pub(crate) fn solve_psd(g: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    if g.nrows() == 1 {
        let d = g[(0, 0)];
        return if d > 0.0 { b / d } else { DMatrix::zeros(b.nrows(), b.ncols()) };
    }
    if let Some(ch) = g.clone().cholesky() {
        return ch.solve(b);
    }
    let scale = g.diagonal().amax().max(f64::MIN_POSITIVE);
    match g.clone().pseudo_inverse(1e-12 * scale) {
        Ok(pinv) => pinv * b,
        Err(_) => DMatrix::zeros(b.nrows(), b.ncols()),
    }
}

/// Draw from `N(mean, cov)` for a symmetric PSD `cov`.
pub(crate) fn mvn_sample(mean: &DVector<f64>, cov: &DMatrix<f64>, rng: &mut impl Rng) -> DVector<f64> {
    let d = mean.len();
    let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    if d == 1 {
        return DVector::from_element(1, mean[0] + cov[(0, 0)].max(0.0).sqrt() * z[0]);
    }
    if let Some(ch) = cov.clone().cholesky() {
        return mean + ch.l() * z;
    }
    let eig = psd_floor(cov).symmetric_eigen();
    let root = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    mean + &eig.eigenvectors * DVector::from_iterator(d, root.iter().zip(z.iter()).map(|(r, z)| r * z))
}
