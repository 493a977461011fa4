use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Axis;

/// Coordinate directions of the (r, v, y) mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    R,
    V,
    Y,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::R, Direction::V, Direction::Y];

    pub fn name(self) -> &'static str {
        match self {
            Direction::R => "r",
            Direction::V => "v",
            Direction::Y => "y",
        }
    }
}

/// The three axes of a tensor mesh. Storage order is `r` slowest, `y` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Axes {
    pub r: Axis,
    pub v: Axis,
    pub y: Axis,
}

impl Axes {
    pub fn new(r: Axis, v: Axis, y: Axis) -> Self {
        Axes { r, v, y }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.r.len(), self.v.len(), self.y.len())
    }

    pub fn len(&self) -> usize {
        self.r.len() * self.v.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self, dir: Direction) -> &Axis {
        match dir {
            Direction::R => &self.r,
            Direction::V => &self.v,
            Direction::Y => &self.y,
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.v.len() + j) * self.y.len() + k
    }

    /// Inverse of [`Axes::index`].
    #[inline]
    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let ny = self.y.len();
        let nv = self.v.len();
        (idx / (nv * ny), (idx / ny) % nv, idx % ny)
    }

    /// Distance in storage between consecutive nodes along `dir`.
    #[inline]
    pub fn stride(&self, dir: Direction) -> usize {
        match dir {
            Direction::R => self.v.len() * self.y.len(),
            Direction::V => self.y.len(),
            Direction::Y => 1,
        }
    }

    /// Number of lines along `dir` and the extents of the two other indices.
    pub fn line_count(&self, dir: Direction) -> (usize, usize) {
        let (nr, nv, ny) = self.dims();
        match dir {
            Direction::R => (nv, ny),
            Direction::V => (nr, ny),
            Direction::Y => (nr, nv),
        }
    }

    /// Storage index of position `p` on the line `(a, b)` along `dir`, where
    /// `(a, b)` are the remaining indices in (r, v, y) order.
    #[inline]
    pub fn line_index(&self, dir: Direction, a: usize, b: usize, p: usize) -> usize {
        match dir {
            Direction::R => self.index(p, a, b),
            Direction::V => self.index(a, p, b),
            Direction::Y => self.index(a, b, p),
        }
    }

    /// Node coordinates `(r, v, y)`.
    #[inline]
    pub fn coords(&self, i: usize, j: usize, k: usize) -> (f64, f64, f64) {
        (self.r.z_nodes()[i], self.v.z_nodes()[j], self.y.z_nodes()[k])
    }
}

/// Discretized solution over the `(nr × nv × ny)` nodes at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3 {
    data: Vec<f64>,
    axes: Arc<Axes>,
    /// Calendar time of this level (years).
    time: f64,
}

impl Grid3 {
    pub fn filled(axes: Arc<Axes>, value: f64, time: f64) -> Self {
        Grid3 {
            data: vec![value; axes.len()],
            axes,
            time,
        }
    }

    /// Evaluates `f(r, v, y)` at every node.
    pub fn from_fn(axes: Arc<Axes>, time: f64, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(axes.len());
        let (nr, nv, ny) = axes.dims();
        for i in 0..nr {
            for j in 0..nv {
                for k in 0..ny {
                    let (r, v, y) = axes.coords(i, j, k);
                    data.push(f(r, v, y));
                }
            }
        }
        Grid3 { data, axes, time }
    }

    pub fn from_data(axes: Arc<Axes>, data: Vec<f64>, time: f64) -> Result<Self> {
        if data.len() != axes.len() {
            return Err(Error::Domain(format!(
                "grid data has {} entries, axes need {}",
                data.len(),
                axes.len()
            )));
        }
        Ok(Grid3 { data, axes, time })
    }

    pub fn axes(&self) -> &Arc<Axes> {
        &self.axes
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.axes.dims()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
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

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.axes.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.axes.index(i, j, k);
        self.data[idx] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}
