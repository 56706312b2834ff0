//! Dense fixed-rank arrays of [`ScalarExpr`] in row-major order.

use crate::expr::ScalarExpr;

#[derive(Debug, Clone)]
pub struct ExprArray<const R: usize> {
    dims: [usize; R],
    data: Vec<ScalarExpr>,
}

impl<const R: usize> ExprArray<R> {
    pub fn from_fn(dims: [usize; R], mut f: impl FnMut([usize; R]) -> ScalarExpr) -> Self {
        let len = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            data.push(f(unflatten(&dims, flat)));
        }
        Self { dims, data }
    }

    pub fn zeros(dims: [usize; R]) -> Self {
        Self::from_fn(dims, |_| ScalarExpr::zero())
    }

    pub fn dims(&self) -> [usize; R] {
        self.dims
    }

    pub fn get(&self, idx: [usize; R]) -> &ScalarExpr {
        &self.data[self.flat(idx)]
    }

    pub fn set(&mut self, idx: [usize; R], value: ScalarExpr) {
        let flat = self.flat(idx);
        self.data[flat] = value;
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Components paired with their multi-index.
    pub fn indexed(&self) -> impl Iterator<Item = ([usize; R], &ScalarExpr)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(|(flat, e)| (unflatten(&self.dims, flat), e))
    }

    fn flat(&self, idx: [usize; R]) -> usize {
        let mut flat = 0;
        for (axis, (&i, &d)) in idx.iter().zip(self.dims.iter()).enumerate() {
            assert!(i < d, "index {i} out of range {d} on axis {axis}");
            flat = flat * d + i;
        }
        flat
    }
}

fn unflatten<const R: usize>(dims: &[usize; R], mut flat: usize) -> [usize; R] {
    let mut idx = [0; R];
    for axis in (0..R).rev() {
        idx[axis] = flat % dims[axis];
        flat /= dims[axis];
    }
    idx
}
