//! Dense row-major `f64` tensors and the arithmetic kernels used by the network code.
//!
//! Tensors are values: every operation returns a fresh tensor and never mutates its operands.
//! Only rank-1 and rank-2 arithmetic is provided; images are kept as `[N, H, W]` and reshaped
//! to `[N, H*W]` before they reach a network.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Elementwise operator for [`ew_binary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
}

impl BinaryOp {
    #[inline]
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
        }
    }
}

fn shape_str(shape: &[usize]) -> String {
    let dims: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
    format!("[{}]", dims.join("x"))
}

impl Tensor {
    /// Builds a tensor from a shape and row-major data.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        // A zero leading dimension is allowed so that empty batches can be represented.
        if shape.is_empty() || shape[1..].contains(&0) {
            return Err(Error::Dimension(format!(
                "invalid shape {}: dimensions must be positive",
                shape_str(&shape)
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Dimension(format!(
                "shape {} needs {} elements, got {}",
                shape_str(&shape),
                expected,
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn zeros_like(other: &Tensor) -> Self {
        Self::zeros(&other.shape)
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    /// Rank-2 tensor from nested rows. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Tensor::new(vec![rows.len(), cols], data)
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of rows of a rank-2 tensor (or length of a rank-1 tensor).
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Number of columns of a rank-2 tensor; 1 for rank-1.
    pub fn cols(&self) -> usize {
        if self.shape.len() >= 2 {
            self.shape[1..].iter().product()
        } else {
            1
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn get2(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.shape[1] + j]
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Tensor> {
        Tensor::new(shape.to_vec(), self.data.clone())
    }

    /// Collapses every axis after the first: `[N, H, W]` becomes `[N, H*W]`.
    pub fn flatten_rows(&self) -> Tensor {
        Tensor {
            shape: vec![self.shape[0], self.cols()],
            data: self.data.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Tensor {
        self.map(|v| v * s)
    }

    /// Gathers the listed rows of a tensor of rank ≥ 2, keeping trailing axes.
    pub fn select_rows(&self, indices: &[usize]) -> Tensor {
        let c = self.cols();
        let mut data = Vec::with_capacity(indices.len() * c);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        let mut shape = self.shape.clone();
        shape[0] = indices.len();
        Tensor { shape, data }
    }

    /// Stacks tensors along the first axis. Trailing axes must agree.
    pub fn concat_rows(parts: &[&Tensor]) -> Result<Tensor> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Dimension("concat of zero tensors".into()))?;
        let tail = &first.shape[1..];
        let mut rows = 0;
        let mut data = Vec::new();
        for p in parts {
            if &p.shape[1..] != tail {
                return Err(Error::Dimension(format!(
                    "cannot concatenate {} with {}",
                    shape_str(&first.shape),
                    shape_str(&p.shape)
                )));
            }
            rows += p.shape[0];
            data.extend_from_slice(&p.data);
        }
        let mut shape = first.shape.clone();
        shape[0] = rows;
        Ok(Tensor { shape, data })
    }

    /// Column sums of a rank-2 tensor, as a rank-1 tensor of length `cols`.
    pub fn sum_rows(&self) -> Tensor {
        let c = self.cols();
        let mut out = vec![0.0; c];
        for r in self.data.chunks_exact(c) {
            for (o, v) in out.iter_mut().zip(r) {
                *o += v;
            }
        }
        Tensor::vector(out)
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor{} ", shape_str(&self.shape))?;
        if self.data.len() <= 16 {
            write!(f, "{:?}", self.data)
        } else {
            write!(f, "{:?}...", &self.data[..16])
        }
    }
}

fn require_rank2(t: &Tensor, what: &str) -> Result<()> {
    if t.rank() != 2 {
        return Err(Error::Dimension(format!(
            "{what} requires a rank-2 tensor, got {}",
            shape_str(&t.shape)
        )));
    }
    Ok(())
}

/// Raw GEMM: `c = op(a) · op(b)` where `op` optionally transposes.
/// `a` is stored `[ar × ac]`, `b` is stored `[br × bc]`.
fn gemm(a: &Tensor, trans_a: bool, b: &Tensor, trans_b: bool) -> Tensor {
    let (ar, ac) = (a.shape[0], a.shape[1]);
    let (br, bc) = (b.shape[0], b.shape[1]);
    let (m, k) = if trans_a { (ac, ar) } else { (ar, ac) };
    let n = if trans_b { br } else { bc };
    let (rsa, csa) = if trans_a { (1, ac) } else { (ac, 1) };
    let (rsb, csb) = if trans_b { (1, bc) } else { (bc, 1) };
    let mut c = vec![0.0; m * n];
    if m > 0 && n > 0 && k > 0 {
        // SAFETY: the strides describe exactly the row-major buffers owned by `a`, `b` and `c`,
        // whose lengths are m·k, k·n and m·n respectively.
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                1.0,
                a.data.as_ptr(),
                rsa as isize,
                csa as isize,
                b.data.as_ptr(),
                rsb as isize,
                csb as isize,
                0.0,
                c.as_mut_ptr(),
                n as isize,
                1,
            );
        }
    }
    Tensor {
        shape: vec![m, n],
        data: c,
    }
}

/// Matrix product of `[m×k]` and `[k×n]`.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    require_rank2(a, "matmul")?;
    require_rank2(b, "matmul")?;
    if a.shape[1] != b.shape[0] {
        return Err(Error::Dimension(format!(
            "matmul inner dimensions differ: {} x {}",
            shape_str(&a.shape),
            shape_str(&b.shape)
        )));
    }
    Ok(gemm(a, false, b, false))
}

/// `a · bᵀ` without materializing the transpose. Shapes `[m×k]`, `[n×k]`.
pub fn matmul_nt(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    require_rank2(a, "matmul")?;
    require_rank2(b, "matmul")?;
    if a.shape[1] != b.shape[1] {
        return Err(Error::Dimension(format!(
            "matmul inner dimensions differ: {} x {}ᵀ",
            shape_str(&a.shape),
            shape_str(&b.shape)
        )));
    }
    Ok(gemm(a, false, b, true))
}

/// `aᵀ · b` without materializing the transpose. Shapes `[k×m]`, `[k×n]`.
pub fn matmul_tn(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    require_rank2(a, "matmul")?;
    require_rank2(b, "matmul")?;
    if a.shape[0] != b.shape[0] {
        return Err(Error::Dimension(format!(
            "matmul inner dimensions differ: {}ᵀ x {}",
            shape_str(&a.shape),
            shape_str(&b.shape)
        )));
    }
    Ok(gemm(a, true, b, false))
}

/// Elementwise `a op b`. `b` may also be a rank-1 bias whose length equals the last axis of `a`,
/// in which case it is repeated over all leading positions.
pub fn ew_binary(op: BinaryOp, a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape == b.shape {
        let data = a
            .data
            .iter()
            .zip(&b.data)
            .map(|(&x, &y)| op.apply(x, y))
            .collect();
        return Ok(Tensor {
            shape: a.shape.clone(),
            data,
        });
    }
    let last = *a.shape.last().unwrap_or(&0);
    if b.rank() == 1 && a.rank() >= 2 && b.shape[0] == last {
        let data = a
            .data
            .chunks_exact(last)
            .flat_map(|row| row.iter().zip(&b.data).map(|(&x, &y)| op.apply(x, y)))
            .collect();
        return Ok(Tensor {
            shape: a.shape.clone(),
            data,
        });
    }
    Err(Error::Dimension(format!(
        "cannot apply {op:?} to {} and {}",
        shape_str(&a.shape),
        shape_str(&b.shape)
    )))
}

pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    ew_binary(BinaryOp::Add, a, b)
}

pub fn sub(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    ew_binary(BinaryOp::Sub, a, b)
}

pub fn mul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    ew_binary(BinaryOp::Mul, a, b)
}

/// Arithmetic mean of every element.
pub fn reduce_mean(a: &Tensor) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Domain("mean of an empty tensor".into()));
    }
    Ok(a.data.iter().sum::<f64>() / a.data.len() as f64)
}

pub fn transpose(a: &Tensor) -> Result<Tensor> {
    require_rank2(a, "transpose")?;
    let (m, n) = (a.shape[0], a.shape[1]);
    let mut data = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            data[j * m + i] = a.data[i * n + j];
        }
    }
    Ok(Tensor {
        shape: vec![n, m],
        data,
    })
}
