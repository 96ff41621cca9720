use super::{Gradients, ParamStore, Real};

/// Central-difference check of analytic gradients.
///
/// For every coordinate of every parameter named in `analytic`, compares
/// `(f(theta+eps) - f(theta-eps)) / 2 eps` against the analytic value and
/// returns the maximum relative error `|a-n| / max(|a|, |n|, 1e-8)`.
///
/// `loss` must be deterministic (64-bit mode, dropout disabled); it is
/// re-evaluated with individual coordinates perturbed in place.
pub fn grad_check<F: Real>(
    store: &mut ParamStore<F>,
    analytic: &Gradients<F>,
    mut loss: impl FnMut(&ParamStore<F>) -> F,
    epsilon: f64,
) -> f64 {
    let eps = F::from_f64(epsilon);
    let names: Vec<String> = analytic.names().map(str::to_owned).collect();
    let mut max_rel = 0.0f64;
    for name in names {
        let len = store.tensor(&name).len();
        for idx in 0..len {
            let orig = store.tensor(&name).as_slice()[idx];
            store.tensor_mut(&name).as_mut_slice()[idx] = orig + eps;
            let f_plus = loss(store).as_f64();
            store.tensor_mut(&name).as_mut_slice()[idx] = orig - eps;
            let f_minus = loss(store).as_f64();
            store.tensor_mut(&name).as_mut_slice()[idx] = orig;
            let numeric = (f_plus - f_minus) / (2.0 * epsilon);
            let a = analytic.tensor(&name).as_slice()[idx].as_f64();
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    max_rel
}
