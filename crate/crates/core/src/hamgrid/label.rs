use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Integer displacement from the base geometry, in units of the grid step,
/// keyed by 0-based Cartesian coordinate index. Zero entries are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DisplacementLabel(BTreeMap<usize, i32>);

impl DisplacementLabel {
    pub fn base() -> Self {
        Self::default()
    }

    pub fn is_base(&self) -> bool {
        self.0.is_empty()
    }

    /// From `(coordinate, steps)` pairs; repeated coordinates accumulate.
    pub fn from_steps<I: IntoIterator<Item = (usize, i32)>>(steps: I) -> Self {
        let mut out = Self::base();
        for (c, k) in steps {
            out.shift(c, k);
        }
        out
    }

    /// From the manifest form: signed 1-based coordinate indices, one entry
    /// per step (`[3, 3, -1]` is two steps along coordinate 2 and one step
    /// back along coordinate 0).
    pub fn from_signed(entries: &[i64], n_coords: usize) -> Result<Self, String> {
        let mut out = Self::base();
        for &e in entries {
            if e == 0 {
                return Err("label entry 0 is not a coordinate (indices are 1-based)".into());
            }
            let c = e.unsigned_abs() as usize - 1;
            if c >= n_coords {
                return Err(format!("label entry {e} exceeds {n_coords} coordinates"));
            }
            out.shift(c, if e > 0 { 1 } else { -1 });
        }
        Ok(out)
    }

    /// Inverse of [`DisplacementLabel::from_signed`].
    pub fn to_signed(&self) -> Vec<i64> {
        let mut out = Vec::new();
        for (&c, &k) in &self.0 {
            let e = (c + 1) as i64 * k.signum() as i64;
            out.extend(std::iter::repeat(e).take(k.unsigned_abs() as usize));
        }
        out
    }

    pub fn shift(&mut self, coord: usize, steps: i32) {
        let v = self.0.entry(coord).or_insert(0);
        *v += steps;
        if *v == 0 {
            self.0.remove(&coord);
        }
    }

    pub fn shifted(&self, coord: usize, steps: i32) -> Self {
        let mut out = self.clone();
        out.shift(coord, steps);
        out
    }

    pub fn steps(&self, coord: usize) -> i32 {
        self.0.get(&coord).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i32)> + '_ {
        self.0.iter().map(|(&c, &k)| (c, k))
    }

    pub fn scaled(&self, factor: i32) -> Self {
        Self::from_steps(self.iter().map(|(c, k)| (c, k * factor)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (c, k) in other.iter() {
            out.shift(c, k);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1))
    }

    pub fn linf(&self) -> i32 {
        self.0.values().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn l2(&self) -> f64 {
        self.0.values().map(|&k| (k as f64).powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_coord(&self) -> Option<usize> {
        self.0.keys().next_back().copied()
    }

    /// Displacement vector in Bohr for a grid with `n_coords` coordinates.
    pub fn displacement(&self, n_coords: usize, step: f64) -> Vec<f64> {
        let mut d = vec![0.0; n_coords];
        for (c, k) in self.iter() {
            if c < n_coords {
                d[c] = k as f64 * step;
            }
        }
        d
    }
}

impl fmt::Display for DisplacementLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, (c, k)) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            if k.abs() == 1 {
                write!(f, "{}{}", if k > 0 { '+' } else { '-' }, c + 1)?;
            } else {
                write!(f, "{k:+}×{}", c + 1)?;
            }
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for DisplacementLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Label{self}")
    }
}

/// Central 1-D weights (offset, weight) for derivative `order`, before
/// division by `h^order`.
pub fn central_weights(order: usize) -> Result<&'static [(i32, f64)]> {
    Ok(match order {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => return Err(Error::Order(order)),
    })
}

/// Tensor-product central stencil for a mixed partial derivative.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    /// Multiset of differentiated coordinates, sorted.
    pub coords: Vec<usize>,
    /// `(label, weight)` with weights already divided by `h^order`, sorted
    /// by label.
    pub points: Vec<(DisplacementLabel, f64)>,
    pub step: f64,
}

impl Stencil {
    /// Stencil for `∂^|coords| / ∂R_coords` at spacing `step · spread`
    /// (`spread = 1` is the grid's own spacing; `spread = 2` doubles every
    /// offset, as used for Richardson error estimates).
    pub fn new(coords: &[usize], step: f64, spread: i32) -> Result<Self> {
        let mut sorted = coords.to_vec();
        sorted.sort_unstable();
        let mut orders: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &sorted {
            *orders.entry(c).or_insert(0) += 1;
        }
        let mut points = vec![(DisplacementLabel::base(), 1.0)];
        for (&c, &m) in &orders {
            let w1 = central_weights(m)?;
            let mut next = Vec::with_capacity(points.len() * w1.len());
            for (label, w) in &points {
                for &(off, wk) in w1 {
                    next.push((label.shifted(c, off * spread), w * wk));
                }
            }
            points = next;
        }
        let h = step * spread as f64;
        let scale = h.powi(sorted.len() as i32);
        let mut points: Vec<_> = points.into_iter().map(|(l, w)| (l, w / scale)).collect();
        points.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self {
            coords: sorted,
            points,
            step: h,
        })
    }

    pub fn order(&self) -> usize {
        self.coords.len()
    }

    /// `Σ |w|`, the roundoff amplification factor of the stencil.
    pub fn weight_norm(&self) -> f64 {
        self.points.iter().map(|(_, w)| w.abs()).sum()
    }

    /// Applies the stencil to a scalar function of the label.
    pub fn apply<F, E>(&self, mut f: F) -> std::result::Result<f64, E>
    where
        F: FnMut(&DisplacementLabel) -> std::result::Result<f64, E>,
    {
        let mut acc = 0.0;
        for (l, w) in &self.points {
            acc += w * f(l)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_round_trip() {
        let l = DisplacementLabel::from_signed(&[3, 3, -1], 6).unwrap();
        assert_eq!(l.steps(2), 2);
        assert_eq!(l.steps(0), -1);
        assert_eq!(l.to_signed(), vec![-1, 3, 3]);
        assert!(DisplacementLabel::from_signed(&[1, -1], 3).unwrap().is_base());
        assert!(DisplacementLabel::from_signed(&[0], 3).is_err());
        assert!(DisplacementLabel::from_signed(&[4], 3).is_err());
    }

    #[test]
    fn mixed_stencil_matches_four_point_formula() {
        let s = Stencil::new(&[3, 1], 0.1, 1).unwrap();
        assert_eq!(s.points.len(), 4);
        let w = |a: i32, b: i32| {
            let l = DisplacementLabel::from_steps([(1, a), (3, b)]);
            s.points.iter().find(|(x, _)| *x == l).unwrap().1
        };
        let q = 1.0 / (4.0 * 0.01);
        assert!((w(1, 1) - q).abs() < 1e-12);
        assert!((w(1, -1) + q).abs() < 1e-12);
        assert!((w(-1, 1) + q).abs() < 1e-12);
        assert!((w(-1, -1) - q).abs() < 1e-12);
        assert_eq!(s, Stencil::new(&[1, 3], 0.1, 1).unwrap());
    }

    #[test]
    fn stencils_exact_on_polynomials() {
        // f(x, y) = x^4 + 2 x^3 y + 3 x y^2, step 0.3
        let h = 0.3;
        let f = |l: &DisplacementLabel| -> Result<f64, ()> {
            let x = l.steps(0) as f64 * h;
            let y = l.steps(1) as f64 * h;
            Ok(x.powi(4) + 2.0 * x.powi(3) * y + 3.0 * x * y * y)
        };
        let d = |c: &[usize]| Stencil::new(c, h, 1).unwrap().apply(f).unwrap();
        assert!((d(&[0, 0, 0, 0]) - 24.0).abs() < 1e-9);
        assert!((d(&[0, 0, 0, 1]) - 12.0).abs() < 1e-9);
        assert!((d(&[0, 1, 1]) - 6.0).abs() < 1e-9);
        assert!(d(&[0]).abs() < 1e-12);
        assert!((d(&[0, 0]) - 2.0 * h * h).abs() < 1e-9);
    }

    #[test]
    fn unsupported_order() {
        assert!(matches!(Stencil::new(&[0; 5], 0.1, 1), Err(Error::Order(5))));
    }
}
