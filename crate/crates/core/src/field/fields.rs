use rayon::prelude::*;

use super::grid::{Grid, Point, TimeGrid};
use crate::error::{Error, Result};

fn check_finite(data: &[f64], what: &str) -> Result<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Real samples of a scalar function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        check_finite(&data, "scalar field samples")?;
        Ok(Self { grid, data })
    }

    /// Constructor for internal producers whose output is finite by construction.
    pub(crate) fn from_raw(grid: Grid, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self { grid, data }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, data: vec![value; grid.len()] }
    }

    /// Samples `f` at every lattice point.
    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64 + Sync) -> Result<Self> {
        let data: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| f(grid.point(i))).collect();
        Self::new(grid, data)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise product with a function of position.
    pub fn mul_fn(&self, f: impl Fn(Point) -> f64) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, v)| v * f(self.grid.point(i)))
            .collect();
        Self::from_raw(self.grid, data)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_raw(self.grid, self.data.iter().map(|v| c * v).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        ))
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: f64, other: &Self) -> Result<()> {
        self.same_grid(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect(),
        ))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete L2 norm with the `dx^dim` volume element.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub(crate) fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch(format!(
                "grids differ: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

/// A vector field with one [`ScalarField`] per spatial axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let grid = *components
            .first()
            .ok_or_else(|| Error::ShapeMismatch("vector field needs components".into()))?
            .grid();
        if components.len() != grid.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} components on a {}-dimensional grid",
                components.len(),
                grid.dim()
            )));
        }
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::ShapeMismatch("components live on different grids".into()));
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, components: vec![ScalarField::zeros(grid); grid.dim()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> [f64; 3] + Sync) -> Result<Self> {
        let comps = (0..grid.dim())
            .map(|c| ScalarField::from_fn(grid, |p| f(p)[c]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, components: self.components.iter().map(|f| f.scaled(c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    /// Pointwise Euclidean magnitude squared.
    pub fn magnitude_squared(&self) -> ScalarField {
        let mut out = vec![0.0; self.grid.len()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c.data()) {
                *o += v * v;
            }
        }
        ScalarField::from_raw(self.grid, out)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude_squared().data().iter().fold(0.0f64, |m, v| m.max(*v)).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.components.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    /// Value at a flat lattice index.
    pub fn at(&self, flat: usize) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (c, comp) in self.components.iter().enumerate() {
            v[c] = comp.data()[flat];
        }
        v
    }
}

/// Rank-2 tensor field, components stored row-major (`F_{ij}` at `i * dim + j`).
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    grid: Grid,
    components: Vec<ScalarField>,
}

impl TensorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let grid = *components
            .first()
            .ok_or_else(|| Error::ShapeMismatch("tensor field needs components".into()))?
            .grid();
        let d = grid.dim();
        if components.len() != d * d {
            return Err(Error::ShapeMismatch(format!(
                "{} components for a rank-2 tensor in dimension {d}",
                components.len()
            )));
        }
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::ShapeMismatch("components live on different grids".into()));
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: Grid) -> Self {
        let d = grid.dim();
        Self { grid, components: vec![ScalarField::zeros(grid); d * d] }
    }

    /// `u ⊗ v`, i.e. `F_{ij} = u_i v_j`.
    pub fn outer(u: &VectorField, v: &VectorField) -> Result<Self> {
        let d = u.dim();
        let mut comps = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                comps.push(u.component(i).pointwise_mul(v.component(j))?);
            }
        }
        Self::new(comps)
    }

    /// `s(x) I`
    pub fn scalar_identity(s: &ScalarField) -> Self {
        let grid = *s.grid();
        let d = grid.dim();
        let mut comps = vec![ScalarField::zeros(grid); d * d];
        for i in 0..d {
            comps[i * d + i] = s.clone();
        }
        Self { grid, components: comps }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.components[i * self.grid.dim() + j]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, components: self.components.iter().map(|f| f.scaled(c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&ScalarField, &ScalarField) -> Result<ScalarField>,
    ) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("tensor fields on different grids".into()));
        }
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_>>()?;
        Ok(Self { grid: self.grid, components: comps })
    }

    /// Subtracts each component's mean.
    pub fn mean_free(&self) -> Self {
        let comps = self
            .components
            .iter()
            .map(|c| {
                let m = c.mean();
                ScalarField::from_raw(self.grid, c.data().iter().map(|v| v - m).collect())
            })
            .collect();
        Self { grid: self.grid, components: comps }
    }

    /// Pointwise Frobenius norm squared.
    pub fn frobenius_squared(&self) -> ScalarField {
        let mut out = vec![0.0; self.grid.len()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c.data()) {
                *o += v * v;
            }
        }
        ScalarField::from_raw(self.grid, out)
    }
}

/// Frames of a scalar field on a fixed grid at the nodes of a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid,
    time_grid: TimeGrid,
    frames: Vec<ScalarField>,
}

impl SpaceTimeField {
    pub fn new(time_grid: TimeGrid, frames: Vec<ScalarField>) -> Result<Self> {
        if frames.len() != time_grid.frames() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} frames, got {}",
                time_grid.frames(),
                frames.len()
            )));
        }
        let grid = *frames[0].grid();
        if frames.iter().any(|f| *f.grid() != grid) {
            return Err(Error::ShapeMismatch("frames live on different grids".into()));
        }
        Ok(Self { grid, time_grid, frames })
    }

    pub fn zeros(grid: Grid, time_grid: TimeGrid) -> Self {
        Self { grid, time_grid, frames: vec![ScalarField::zeros(grid); time_grid.frames()] }
    }

    /// Builds frame `m` from `f(m, t_m)`, frames evaluated in parallel.
    pub fn from_frames(
        grid: Grid,
        time_grid: TimeGrid,
        f: impl Fn(usize, f64) -> Result<ScalarField> + Sync,
    ) -> Result<Self> {
        let frames = (0..time_grid.frames())
            .into_par_iter()
            .map(|m| f(m, time_grid.time(m)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(time_grid, frames).and_then(|s| {
            if s.grid != grid {
                Err(Error::ShapeMismatch("frame grid differs from requested grid".into()))
            } else {
                Ok(s)
            }
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time_grid
    }

    pub fn frames(&self) -> &[ScalarField] {
        &self.frames
    }

    pub fn frame(&self, m: usize) -> &ScalarField {
        &self.frames[m]
    }

    pub fn into_frames(self) -> Vec<ScalarField> {
        self.frames
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            time_grid: self.time_grid,
            frames: self.frames.iter().map(|f| f.scaled(c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let frames = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.time_grid, frames)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let frames = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.time_grid, frames)
    }

    /// Multiplies every sample by `f(x, t)`.
    pub fn mul_fn(&self, f: impl Fn(Point, f64) -> f64 + Sync) -> Self {
        let frames = self
            .frames
            .par_iter()
            .enumerate()
            .map(|(m, fr)| {
                let t = self.time_grid.time(m);
                fr.mul_fn(|p| f(p, t))
            })
            .collect();
        Self { grid: self.grid, time_grid: self.time_grid, frames }
    }

    pub fn max_abs(&self) -> f64 {
        self.frames.iter().fold(0.0, |m, f| m.max(f.max_abs()))
    }

    /// Whether the first and last frames vanish identically.
    pub fn vanishes_at_time_ends(&self) -> bool {
        self.frames[0].max_abs() == 0.0 && self.frames[self.frames.len() - 1].max_abs() == 0.0
    }

    pub(crate) fn same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.time_grid != other.time_grid {
            return Err(Error::ShapeMismatch("space-time fields on different lattices".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(2, 8, 2.0).unwrap()
    }

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        assert!(ScalarField::new(grid(), vec![0.0; 63]).is_err());
        let mut d = vec![0.0; 64];
        d[5] = f64::NAN;
        assert!(matches!(ScalarField::new(grid(), d), Err(Error::NonFinite(_))));
    }

    #[test]
    fn vector_components_share_grid() {
        let a = ScalarField::zeros(grid());
        let b = ScalarField::zeros(Grid::new(2, 8, 3.0).unwrap());
        assert!(VectorField::new(vec![a.clone(), b]).is_err());
        assert!(VectorField::new(vec![a.clone()]).is_err());
        assert!(VectorField::new(vec![a.clone(), a]).is_ok());
    }

    #[test]
    fn outer_product_components() {
        let g = grid();
        let u = VectorField::from_fn(g, |p| [p[0], 2.0, 0.0]).unwrap();
        let v = VectorField::from_fn(g, |p| [1.0, p[1], 0.0]).unwrap();
        let t = TensorField::outer(&u, &v).unwrap();
        for i in 0..g.len() {
            let p = g.point(i);
            assert_eq!(t.get(0, 1).data()[i], p[0] * p[1]);
            assert_eq!(t.get(1, 0).data()[i], 2.0);
        }
    }

    #[test]
    fn spacetime_frame_count() {
        let tg = TimeGrid::default_with_steps(4).unwrap();
        assert!(SpaceTimeField::new(tg, vec![ScalarField::zeros(grid()); 4]).is_err());
        let z = SpaceTimeField::zeros(grid(), tg);
        assert!(z.vanishes_at_time_ends());
    }
}
