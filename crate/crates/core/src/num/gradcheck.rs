use super::Matrix;

/// Central-difference gradient estimate of a scalar function of a parameter
/// list: (f(x+h) - f(x-h)) / 2h per coordinate. Used as the independent
/// oracle for every hand-written backward pass.
pub fn finite_diff_grad<F>(f: F, params: &[Matrix], h: f64) -> Vec<Matrix>
where
    F: Fn(&[Matrix]) -> f64,
{
    assert!(h > 0.0, "step size must be positive");
    let mut grads: Vec<Matrix> = params
        .iter()
        .map(|p| Matrix::zeros(p.rows(), p.cols()))
        .collect();
    let mut work: Vec<Matrix> = params.to_vec();
    for (ti, param) in params.iter().enumerate() {
        for i in 0..param.data().len() {
            let original = param.data()[i];
            work[ti].data_mut()[i] = original + h;
            let plus = f(&work);
            work[ti].data_mut()[i] = original - h;
            let minus = f(&work);
            work[ti].data_mut()[i] = original;
            grads[ti].data_mut()[i] = (plus - minus) / (2.0 * h);
        }
    }
    grads
}
