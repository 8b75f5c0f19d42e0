use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constant density on `[lo, hi)`. Only the first piece may start at `-inf`
/// and only the last may end at `+inf`; in JSON an unbounded end is `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityPiece {
    #[serde(with = "lower_end")]
    pub lo: f64,
    #[serde(with = "upper_end")]
    pub hi: f64,
    pub density: f64,
}

macro_rules! unbounded_end {
    ($name:ident, $inf:expr) => {
        mod $name {
            use serde::{Deserialize, Deserializer, Serialize, Serializer};

            pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
                if *v == $inf { None::<f64>.serialize(s) } else { Some(*v).serialize(s) }
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                Ok(Option::<f64>::deserialize(d)?.unwrap_or($inf))
            }
        }
    };
}

unbounded_end!(lower_end, f64::NEG_INFINITY);
unbounded_end!(upper_end, f64::INFINITY);

impl DensityPiece {
    fn mass(&self) -> f64 {
        if self.density == 0.0 {
            0.0
        } else {
            self.density * (self.hi - self.lo)
        }
    }
}

/// Measure on ℝ made of atoms and piecewise-constant densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure1D", into = "RawMeasure1D")]
pub struct BaseMeasure1D {
    atoms: Vec<(f64, f64)>,
    pieces: Vec<DensityPiece>,
    atom_prefix: Vec<f64>,
    // piece_prefix[i] = mass of pieces[1..i]; the unbounded end pieces never
    // appear strictly between two others.
    piece_prefix: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawMeasure1D {
    #[serde(default)]
    atoms: Vec<(f64, f64)>,
    #[serde(default)]
    pieces: Vec<DensityPiece>,
}

impl TryFrom<RawMeasure1D> for BaseMeasure1D {
    type Error = Error;
    fn try_from(r: RawMeasure1D) -> Result<Self> {
        BaseMeasure1D::new(r.atoms, r.pieces)
    }
}

impl From<BaseMeasure1D> for RawMeasure1D {
    fn from(m: BaseMeasure1D) -> Self {
        RawMeasure1D {
            atoms: m.atoms,
            pieces: m.pieces,
        }
    }
}

impl BaseMeasure1D {
    pub fn new(mut atoms: Vec<(f64, f64)>, mut pieces: Vec<DensityPiece>) -> Result<Self> {
        for &(x, w) in &atoms {
            if !x.is_finite() || !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidMeasure(format!("bad atom ({x}, {w})")));
            }
        }
        for p in &pieces {
            if p.lo.is_nan() || p.hi.is_nan() || !(p.lo < p.hi) {
                return Err(Error::InvalidMeasure(format!("bad piece [{}, {})", p.lo, p.hi)));
            }
            if !p.density.is_finite() || p.density < 0.0 {
                return Err(Error::InvalidMeasure(format!("bad density {}", p.density)));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in pieces.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::InvalidMeasure(format!(
                    "overlapping pieces [{}, {}) and [{}, {})",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        let last = pieces.len().saturating_sub(1);
        for (i, p) in pieces.iter().enumerate() {
            if (p.lo.is_infinite() && i != 0) || (p.hi.is_infinite() && i != last) {
                return Err(Error::InvalidMeasure("unbounded piece must be at an end".into()));
            }
        }
        let mut atom_prefix = Vec::with_capacity(atoms.len() + 1);
        let mut acc = 0.0;
        atom_prefix.push(0.0);
        for &(_, w) in &atoms {
            acc += w;
            atom_prefix.push(acc);
        }
        let mut piece_prefix = vec![0.0; pieces.len() + 1];
        for i in 1..pieces.len() {
            piece_prefix[i + 1] = piece_prefix[i] + pieces[i].mass();
        }
        Ok(Self {
            atoms,
            pieces,
            atom_prefix,
            piece_prefix,
        })
    }

    /// Density `c` on all of ℝ.
    pub fn lebesgue(c: f64) -> Result<Self> {
        Self::new(
            vec![],
            vec![DensityPiece {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
                density: c,
            }],
        )
    }

    /// Density `c` on `[lo, hi)`.
    pub fn uniform(lo: f64, hi: f64, c: f64) -> Result<Self> {
        Self::new(vec![], vec![DensityPiece { lo, hi, density: c }])
    }

    pub fn atomic(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(atoms, vec![])
    }

    /// `cells` equal cells on `[lo, hi)`, each carrying the exact mass of the
    /// density whose antiderivative is `antiderivative`.
    pub fn from_antiderivative(
        lo: f64,
        hi: f64,
        cells: usize,
        antiderivative: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if cells == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidMeasure("bad cell grid".into()));
        }
        let h = (hi - lo) / cells as f64;
        let edges: Vec<f64> = (0..=cells)
            .map(|i| if i == cells { hi } else { lo + h * i as f64 })
            .collect();
        let pieces = edges
            .windows(2)
            .map(|e| DensityPiece {
                lo: e[0],
                hi: e[1],
                density: (antiderivative(e[1]) - antiderivative(e[0])) / (e[1] - e[0]),
            })
            .collect();
        Self::new(vec![], pieces)
    }

    /// Cell averages of `|x|^p` (with `p > -1`) on `[lo, hi)`.
    pub fn power_density(p: f64, lo: f64, hi: f64, cells: usize) -> Result<Self> {
        if !(p > -1.0) {
            return Err(Error::InvalidMeasure(format!("|x|^{p} is not locally integrable")));
        }
        let q = p + 1.0;
        Self::from_antiderivative(lo, hi, cells, |x| x.signum() * x.abs().powf(q) / q)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_prefix.last().copied().unwrap_or(0.0)
            + self.pieces.iter().map(DensityPiece::mass).sum::<f64>()
    }

    /// True when the measure is `c` times Lebesgue measure on ℝ.
    pub fn lebesgue_density(&self) -> Option<f64> {
        match (self.atoms.is_empty(), self.pieces.as_slice()) {
            (true, [p]) if p.lo == f64::NEG_INFINITY && p.hi == f64::INFINITY => Some(p.density),
            _ => None,
        }
    }

    /// Finite breakpoints: atom positions and piece edges.
    pub fn features(&self) -> Vec<f64> {
        let mut f: Vec<f64> = self.atoms.iter().map(|a| a.0).collect();
        for p in &self.pieces {
            f.extend([p.lo, p.hi].into_iter().filter(|x| x.is_finite()));
        }
        f.sort_by(f64::total_cmp);
        f.dedup();
        f
    }

    /// Density at `t` (atoms excluded).
    pub fn density_at(&self, t: f64) -> f64 {
        let i = self.pieces.partition_point(|p| p.hi <= t);
        match self.pieces.get(i) {
            Some(p) if p.lo <= t => p.density,
            _ => 0.0,
        }
    }

    /// Atoms with position in the closed interval `[s, t]`.
    pub fn atoms_in(&self, s: f64, t: f64) -> &[(f64, f64)] {
        let i = self.atoms.partition_point(|a| a.0 < s);
        let j = self.atoms.partition_point(|a| a.0 <= t);
        &self.atoms[i..j.max(i)]
    }

    fn density_integral(&self, s: f64, t: f64) -> f64 {
        if !(s < t) || self.pieces.is_empty() {
            return 0.0;
        }
        let first = self.pieces.partition_point(|p| p.hi <= s);
        let end = self.pieces.partition_point(|p| p.lo < t);
        if first >= end {
            return 0.0;
        }
        let part = |p: &DensityPiece| {
            if p.density == 0.0 {
                0.0
            } else {
                p.density * (t.min(p.hi) - s.max(p.lo))
            }
        };
        let last = end - 1;
        if first == last {
            return part(&self.pieces[first]);
        }
        let middle = self.piece_prefix[last] - self.piece_prefix[first + 1];
        part(&self.pieces[first]) + middle + part(&self.pieces[last])
    }

    /// `μ([s, t])`, closed on both ends.
    pub fn cdf(&self, s: f64, t: f64) -> Result<f64> {
        if s.is_nan() || t.is_nan() {
            return Err(Error::NonFinite("interval"));
        }
        if s > t {
            return Err(Error::InvalidInterval { s, t });
        }
        Ok(self.closed_mass(s, t))
    }

    pub(crate) fn closed_mass(&self, s: f64, t: f64) -> f64 {
        let i = self.atoms.partition_point(|a| a.0 < s);
        let j = self.atoms.partition_point(|a| a.0 <= t);
        let atoms = if j > i { self.atom_prefix[j] - self.atom_prefix[i] } else { 0.0 };
        atoms + self.density_integral(s, t)
    }

    /// `μ([s, t])` where `width` is `t - s` computed directly by the caller;
    /// inside a single density piece the mass is taken as `density * width`.
    pub(crate) fn span_mass(&self, s: f64, t: f64, width: f64) -> f64 {
        let first = self.pieces.partition_point(|p| p.hi <= s);
        if let Some(p) = self.pieces.get(first) {
            if p.lo <= s && t <= p.hi && self.atoms_in(s, t).is_empty() {
                return if p.density == 0.0 { 0.0 } else { p.density * width };
            }
        }
        self.closed_mass(s, t)
    }

    /// `μ((s, t])`.
    pub fn half_open_mass(&self, s: f64, t: f64) -> Result<f64> {
        if s > t {
            return Err(Error::InvalidInterval { s, t });
        }
        let i = self.atoms.partition_point(|a| a.0 <= s);
        let j = self.atoms.partition_point(|a| a.0 <= t);
        let atoms = if j > i { self.atom_prefix[j] - self.atom_prefix[i] } else { 0.0 };
        Ok(atoms + self.density_integral(s, t))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.atoms.iter().map(|&(x, w)| (x, w * c)).collect(),
            self.pieces
                .iter()
                .map(|p| DensityPiece {
                    density: p.density * c,
                    ..*p
                })
                .collect(),
        )
    }

    pub fn shifted(&self, by: f64) -> Result<Self> {
        Self::new(
            self.atoms.iter().map(|&(x, w)| (x + by, w)).collect(),
            self.pieces
                .iter()
                .map(|p| DensityPiece {
                    lo: p.lo + by,
                    hi: p.hi + by,
                    density: p.density,
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unbounded_pieces_round_trip_through_json() {
        let m = BaseMeasure1D::lebesgue(2.0).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, r#"{"atoms":[],"pieces":[{"lo":null,"hi":null,"density":2.0}]}"#);
        let back: BaseMeasure1D = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
    use proptest::prelude::*;

    #[test]
    fn lebesgue_window() {
        let m = BaseMeasure1D::uniform(-10.0, 10.0, 1.0).unwrap();
        assert_eq!(m.cdf(0.0, 2.0).unwrap(), 2.0);
        let inf = BaseMeasure1D::lebesgue(1.0).unwrap();
        assert_eq!(inf.cdf(-3.0, 4.5).unwrap(), 7.5);
        assert_eq!(inf.lebesgue_density(), Some(1.0));
    }

    #[test]
    fn single_atom() {
        let m = BaseMeasure1D::atomic(vec![(0.0, 3.0)]).unwrap();
        assert_eq!(m.cdf(-1.0, 1.0).unwrap(), 3.0);
        assert_eq!(m.cdf(0.0, 0.0).unwrap(), 3.0);
        assert_eq!(m.half_open_mass(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_sqrt_density() {
        let m = BaseMeasure1D::power_density(-0.5, 0.0, 1.0, 1024).unwrap();
        assert!((m.cdf(0.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        // cell edges carry the exact antiderivative
        assert!((m.cdf(0.0, 0.25).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_interval_is_an_error() {
        let m = BaseMeasure1D::lebesgue(1.0).unwrap();
        assert!(matches!(m.cdf(1.0, 0.0), Err(Error::InvalidInterval { .. })));
    }

    #[test]
    fn rejects_overlap_and_inner_infinity() {
        let p = |lo, hi| DensityPiece { lo, hi, density: 1.0 };
        assert!(BaseMeasure1D::new(vec![], vec![p(0.0, 2.0), p(1.0, 3.0)]).is_err());
        assert!(BaseMeasure1D::new(vec![], vec![p(0.0, 1.0), p(2.0, f64::INFINITY), p(5.0, 6.0)])
            .is_err());
        assert!(BaseMeasure1D::atomic(vec![(0.0, -1.0)]).is_err());
    }

    fn measure() -> impl Strategy<Value = BaseMeasure1D> {
        (
            prop::collection::vec((-5.0..5.0f64, 0.1..3.0f64), 0..5),
            prop::collection::vec(0.0..2.0f64, 1..12),
        )
            .prop_map(|(atoms, dens)| {
                let h = 10.0 / dens.len() as f64;
                let pieces = dens
                    .iter()
                    .enumerate()
                    .map(|(i, &d)| DensityPiece {
                        lo: -5.0 + h * i as f64,
                        hi: -5.0 + h * (i + 1) as f64,
                        density: d,
                    })
                    .collect();
                BaseMeasure1D::new(atoms, pieces).unwrap()
            })
    }

    proptest! {
        #[test]
        fn additivity(m in measure(), a in -6.0..6.0f64, b in -6.0..6.0f64, c in -6.0..6.0f64) {
            let mut v = [a, b, c];
            v.sort_by(f64::total_cmp);
            let [s, t, u] = v;
            let lhs = m.cdf(s, t).unwrap() + m.half_open_mass(t, u).unwrap();
            let rhs = m.cdf(s, u).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn additivity_with_atom_at_split(m in measure(), s in -6.0..-5.5f64, u in 5.5..6.0f64) {
            if let Some(&(t, _)) = m.atoms().first() {
                let lhs = m.cdf(s, t).unwrap() + m.half_open_mass(t, u).unwrap();
                prop_assert!((lhs - m.cdf(s, u).unwrap()).abs() <= 1e-12 * (1.0 + lhs));
            }
        }

        #[test]
        fn monotone(m in measure(), s in -6.0..6.0f64, d in 0.0..3.0f64, e in 0.0..3.0f64) {
            prop_assert!(m.cdf(s, s + d).unwrap() >= 0.0);
            prop_assert!(m.cdf(s, s + d + e).unwrap() + 1e-12 >= m.cdf(s, s + d).unwrap());
        }
    }
}
