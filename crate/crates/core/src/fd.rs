//! Fourth-order central finite differences for derivative orders 0 to 4.

/// Stencil weights (offsets `-r..=r`) and the power of `h` to divide by.
pub fn stencil(order: usize) -> &'static [f64] {
    const D0: [f64; 1] = [1.0];
    const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
    const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
    const D3: [f64; 7] = [1.0 / 8.0, -8.0 / 8.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0];
    const D4: [f64; 7] = [
        -1.0 / 6.0,
        12.0 / 6.0,
        -39.0 / 6.0,
        56.0 / 6.0,
        -39.0 / 6.0,
        12.0 / 6.0,
        -1.0 / 6.0,
    ];
    match order {
        0 => &D0,
        1 => &D1,
        2 => &D2,
        3 => &D3,
        4 => &D4,
        _ => panic!("finite differences implemented up to order 4, got {order}"),
    }
}

/// Approximate `d^order f / dx^order` at `x` with step `h`.
pub fn derivative<T, F>(f: F, x: f64, order: usize, h: f64) -> T
where
    F: Fn(f64) -> T,
    T: std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
{
    let w = stencil(order);
    let r = (w.len() / 2) as i64;
    let scale = h.powi(order as i32).recip();
    w.iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .fold(T::default(), |acc, (i, c)| {
            acc + f(x + (i as i64 - r) as f64 * h) * (c * scale)
        })
}

/// Mixed partial derivative `d^alpha f` at `point` with per-axis steps `h`,
/// as a tensor product of one-dimensional stencils.
pub fn partial<T, F>(f: &F, point: &[f64], alpha: &[usize], h: &[f64]) -> T
where
    F: Fn(&[f64]) -> T,
    T: std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default + Copy,
{
    let mut scratch = point.to_vec();
    partial_rec(f, &mut scratch, alpha, h, 0)
}

fn partial_rec<T, F>(f: &F, p: &mut Vec<f64>, alpha: &[usize], h: &[f64], axis: usize) -> T
where
    F: Fn(&[f64]) -> T,
    T: std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default + Copy,
{
    if axis == alpha.len() {
        return f(p);
    }
    if alpha[axis] == 0 {
        return partial_rec(f, p, alpha, h, axis + 1);
    }
    let w = stencil(alpha[axis]);
    let r = (w.len() / 2) as i64;
    let scale = h[axis].powi(alpha[axis] as i32).recip();
    let centre = p[axis];
    let mut acc = T::default();
    for (i, c) in w.iter().enumerate() {
        if *c == 0.0 {
            continue;
        }
        p[axis] = centre + (i as i64 - r) as f64 * h[axis];
        acc = acc + partial_rec(f, p, alpha, h, axis + 1) * (c * scale);
    }
    p[axis] = centre;
    acc
}

/// All multi-indices in `dim` variables with total order `<= max_order`.
pub fn multi_indices(dim: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for prefix in &out {
            let used: usize = prefix.iter().sum();
            for k in 0..=max_order - used {
                let mut v = prefix.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_low_degree_polynomials() {
        // Fourth-order stencils differentiate polynomials of degree order + 3 exactly.
        for order in 0..=4usize {
            let deg = order + 3;
            let f = |x: f64| x.powi(deg as i32);
            let x0: f64 = 0.7;
            let exact = (0..order).fold(1.0, |acc, i| acc * (deg - i) as f64) * x0.powi((deg - order) as i32);
            let approx: f64 = derivative(f, x0, order, 0.05);
            assert!((approx - exact).abs() < 1e-8 * exact.abs().max(1.0), "order {order}");
        }
    }

    #[test]
    fn mixed_partial_of_product() {
        let f = |p: &[f64]| p[0].sin() * p[1].exp();
        let v: f64 = partial(&f, &[0.3, 0.2], &[1, 2], &[1e-2, 1e-2]);
        let exact = 0.3f64.cos() * 0.2f64.exp();
        assert!((v - exact).abs() < 1e-8);
    }

    #[test]
    fn counts_multi_indices() {
        assert_eq!(multi_indices(1, 3).len(), 4);
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(3, 1).len(), 4);
    }
}
