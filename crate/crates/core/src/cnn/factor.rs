//! Factorization of a coefficient sequence into short convolution filters.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest sequence length accepted by [`factor_filter`].
pub const MAX_FACTOR_LEN: usize = 60;

/// Coefficients `taps[0..=s]` of a filter supported on `{0, …, s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    taps: Vec<f64>,
}

impl Filter {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.len() < 2 {
            return Err(Error::InvalidArgument("a filter needs s >= 1, i.e. at least 2 taps".into()));
        }
        Ok(Self { taps })
    }

    /// The identity filter `δ_0` of length `s + 1`.
    pub fn delta(s: usize) -> Self {
        let mut taps = vec![0.0; s + 1];
        taps[0] = 1.0;
        Self { taps }
    }

    pub fn s(&self) -> usize {
        self.taps.len() - 1
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn taps_mut(&mut self) -> &mut [f64] {
        &mut self.taps
    }
}

/// Full linear convolution.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `w^{(L−1)} ∗ ⋯ ∗ w^{(0)}`.
pub fn convolve_all(filters: &[Filter]) -> Vec<f64> {
    filters.iter().fold(vec![1.0], |acc, f| convolve(&acc, f.taps()))
}

/// `max |v − conv(filters)|`, padding the shorter sequence with zeros.
pub fn reconstruction_residual(v: &[f64], filters: &[Filter]) -> f64 {
    let w = convolve_all(filters);
    let n = v.len().max(w.len());
    (0..n)
        .map(|i| (v.get(i).copied().unwrap_or(0.0) - w.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

/// Parlett–Reinsch diagonal balancing with radix 2.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Roots of `Σ_j p_j z^j` (with `p_last ≠ 0`) from the eigenvalues of the
/// balanced companion matrix.
pub fn polynomial_roots(p: &[f64]) -> Result<Vec<Complex<f64>>> {
    let deg = p.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = p[deg];
    if lead == 0.0 {
        return Err(Error::InvalidArgument("leading coefficient must be nonzero".into()));
    }
    let mut c = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        c[(i, deg - 1)] = -p[i] / lead;
    }
    balance(&mut c);
    let eig = c.complex_eigenvalues();
    let roots: Vec<Complex<f64>> = eig.iter().copied().collect();
    if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("companion eigenvalues are not finite".into()));
    }
    Ok(roots)
}

/// Real factors of degree 1 or 2, as monic coefficient vectors (low first).
fn real_factors(roots: &[Complex<f64>]) -> Result<Vec<Vec<f64>>> {
    let tol = |z: &Complex<f64>| 1e-9 * z.norm().max(1.0);
    let mut reals: Vec<f64> = Vec::new();
    let mut upper: Vec<Complex<f64>> = Vec::new();
    let mut lower = 0usize;
    for z in roots {
        if z.im.abs() <= tol(z) {
            reals.push(z.re);
        } else if z.im > 0.0 {
            upper.push(*z);
        } else {
            lower += 1;
        }
    }
    if upper.len() != lower {
        return Err(Error::Numerical("complex roots do not come in conjugate pairs".into()));
    }
    upper.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    reals.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<Vec<f64>> = upper.iter().map(|z| vec![z.norm_sqr(), -2.0 * z.re, 1.0]).collect();
    out.extend(reals.into_iter().map(|r| vec![-r, 1.0]));
    Ok(out)
}

/// First-fit packing of factors (quadratics first) into polynomials of degree ≤ s.
fn pack(factors: Vec<Vec<f64>>, s: usize) -> Vec<Vec<f64>> {
    let mut bins: Vec<Vec<f64>> = Vec::new();
    for f in factors {
        let deg = f.len() - 1;
        match bins.iter_mut().find(|b| b.len() - 1 + deg <= s) {
            Some(b) => *b = convolve(b, &f),
            None => bins.push(f),
        }
    }
    bins
}

/// Least-squares update of one filter with the others held fixed.
fn refine(v: &[f64], filters: &mut [Vec<f64>]) {
    for i in 0..filters.len() {
        let rest = filters
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .fold(vec![1.0], |acc, (_, f)| convolve(&acc, f));
        let len = filters[i].len();
        if rest.len() + len - 1 != v.len() {
            continue;
        }
        let m = DMatrix::from_fn(v.len(), len, |r, c| {
            if r >= c && r - c < rest.len() {
                rest[r - c]
            } else {
                0.0
            }
        });
        let b = DVector::from_column_slice(v);
        if let Ok(x) = m.svd(true, true).solve(&b, 1e-14) {
            if x.iter().all(|t| t.is_finite()) {
                filters[i] = x.iter().copied().collect();
            }
        }
    }
}

/// Outcome of [`factor_filter`].
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub filters: Vec<Filter>,
    /// `max |v − w^{(L−1)} ∗ ⋯ ∗ w^{(0)}|`.
    pub residual: f64,
}

/// Writes `v` as a convolution of exactly `layers` filters of length `s + 1`.
///
/// Low-order zero coefficients become pure-shift filters. The remaining
/// polynomial is factored through its roots into real linear and quadratic
/// factors, which are packed into filters of degree at most `s`. The leading
/// coefficient goes on the first filter and identity filters pad the list.
/// One least-squares pass per filter polishes the product; a residual above
/// `1e−6 · max|v|` is a conditioning failure.
pub fn factor_filter(v: &[f64], s: usize, layers: usize) -> Result<Factorization> {
    if s < 2 {
        return Err(Error::InvalidArgument(format!("filter length parameter s must be >= 2, got {s}")));
    }
    if v.is_empty() {
        return Err(Error::InvalidArgument("cannot factor an empty sequence".into()));
    }
    if v.len() > MAX_FACTOR_LEN {
        return Err(Error::InvalidArgument(format!(
            "sequence length {} exceeds the factorization limit {MAX_FACTOR_LEN}",
            v.len()
        )));
    }
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let too_few = |need: usize| {
        Error::InvalidArgument(format!("factorization needs {need} layers but only {layers} were allowed"))
    };
    if scale == 0.0 {
        if layers == 0 {
            return Err(too_few(1));
        }
        let mut filters = vec![Filter { taps: vec![0.0; s + 1] }];
        filters.extend((1..layers).map(|_| Filter::delta(s)));
        return Ok(Factorization { filters, residual: 0.0 });
    }
    let lo = v.iter().position(|x| *x != 0.0).unwrap_or(0);
    let hi = v.iter().rposition(|x| *x != 0.0).unwrap_or(0);
    let core = &v[lo..=hi];

    let mut polys: Vec<Vec<f64>> = if core.len() <= s + 1 {
        vec![core.to_vec()]
    } else {
        let roots = polynomial_roots(core)?;
        let mut bins = pack(real_factors(&roots)?, s);
        let lead = core[core.len() - 1];
        for t in bins[0].iter_mut() {
            *t *= lead;
        }
        refine(core, &mut bins);
        bins
    };
    let mut shift = lo;
    while shift > 0 {
        let step = shift.min(s);
        let mut taps = vec![0.0; step + 1];
        taps[step] = 1.0;
        polys.push(taps);
        shift -= step;
    }
    if polys.len() > layers {
        return Err(too_few(polys.len()));
    }
    let mut filters: Vec<Filter> = polys
        .into_iter()
        .map(|mut p| {
            p.resize(s + 1, 0.0);
            Filter { taps: p }
        })
        .collect();
    filters.resize_with(layers, || Filter::delta(s));
    let residual = reconstruction_residual(v, &filters);
    let tolerance = 1e-6 * scale;
    if !(residual <= tolerance) {
        return Err(Error::Conditioning { residual, tolerance });
    }
    Ok(Factorization { filters, residual })
}
