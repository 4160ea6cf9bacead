//! Cellular homology of a multibranched surface.
//!
//! CW structure:
//! - 0-cells: `v` per locus, `u` per region.
//! - 1-cells: a loop `e` per locus; per region `2g` handle loops (or `g`
//!   crosscap loops), a tether `t` from `u` to the locus of each attached
//!   boundary circle, and a loop `f` for each unattached boundary circle.
//! - 2-cells: one per region, glued along
//!   `prod [a, b] * prod t e^(sw) t^-1 * prod f` (orientable, `s = -1` for a
//!   reversed circle) or `prod x^2 * prod t e^w t^-1 * prod f`
//!   (non-orientable).
//!
//! Closed regions get the one-vertex closed-surface structure, which is the
//! same word without tethers.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;

use super::matrix::{smith_normal_form, IntegerMatrix};
use crate::error::{Error, Result};
use crate::model::{MultibranchedSurface, ValidityMode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    /// rows: 0-cells, columns: 1-cells
    pub d1: IntegerMatrix,
    /// rows: 1-cells, columns: 2-cells
    pub d2: IntegerMatrix,
    pub cells0: Vec<String>,
    pub cells1: Vec<String>,
    pub cells2: Vec<String>,
}

pub fn build_chain_complex(x: &MultibranchedSurface) -> ChainComplex {
    let inc = x.incidence();
    let mut cells0 = Vec::new();
    let mut cells1 = Vec::new();
    let cells2: Vec<String> = x.regions.iter().map(|r| r.id.to_string()).collect();

    for l in &x.loci {
        cells0.push(format!("v:{}", l.id));
    }
    for r in &x.regions {
        cells0.push(format!("u:{}", r.id));
    }
    for l in &x.loci {
        cells1.push(format!("e:{}", l.id));
    }

    // (1-cell index, coefficient) per 2-cell; (1-cell, from 0-cell, to 0-cell) for tethers
    let mut columns: Vec<Vec<(usize, i64)>> = vec![Vec::new(); x.regions.len()];
    let mut tethers: Vec<(usize, usize, usize)> = Vec::new();
    let nl = x.loci.len();

    for (ri, r) in x.regions.iter().enumerate() {
        if r.orientable {
            for m in 1..=r.genus {
                cells1.push(format!("a{m}:{}", r.id));
                cells1.push(format!("b{m}:{}", r.id));
            }
        } else {
            for m in 1..=r.genus {
                columns[ri].push((cells1.len(), 2));
                cells1.push(format!("x{m}:{}", r.id));
            }
        }
        for c in &r.boundaries {
            match inc.slot_of.get(c) {
                Some(&(li, _)) => {
                    let sign = if r.orientable { x.sign(c) } else { 1 };
                    let w = sign * x.loci[li].wrapping as i64;
                    columns[ri].push((li, w));
                    tethers.push((cells1.len(), li, nl + ri));
                    cells1.push(format!("t:{}:{}", r.id, c));
                }
                None => {
                    columns[ri].push((cells1.len(), 1));
                    cells1.push(format!("f:{}:{}", r.id, c));
                }
            }
        }
    }

    let mut d1 = IntegerMatrix::zeros(cells0.len(), cells1.len());
    for &(t, locus_vertex, region_vertex) in &tethers {
        d1.add_to(locus_vertex, t, 1);
        d1.add_to(region_vertex, t, -1);
    }
    let mut d2 = IntegerMatrix::zeros(cells1.len(), cells2.len());
    for (ri, col) in columns.iter().enumerate() {
        for &(row, coeff) in col {
            d2.add_to(row, ri, coeff);
        }
    }

    ChainComplex {
        d1,
        d2,
        cells0,
        cells1,
        cells2,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct HomologyGroup {
    pub betti: usize,
    /// Invariant factors greater than 1, each dividing the next.
    pub torsion: Vec<u64>,
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_owned()),
            b => parts.push(format!("Z^{b}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct HomologyProfile {
    pub h0: HomologyGroup,
    pub h1: HomologyGroup,
    pub h2: HomologyGroup,
}

impl HomologyProfile {
    pub fn euler(&self) -> i64 {
        self.h0.betti as i64 - self.h1.betti as i64 + self.h2.betti as i64
    }
}

impl fmt::Display for HomologyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H0 = {}, H1 = {}, H2 = {}", self.h0, self.h1, self.h2)
    }
}

fn nontrivial_factors(factors: Vec<BigInt>) -> Vec<u64> {
    factors
        .into_iter()
        .filter(|d| !d.is_one())
        .map(|d| u64::try_from(&d).expect("torsion coefficient exceeds u64"))
        .collect()
}

pub fn homology_profile(x: &MultibranchedSurface) -> HomologyProfile {
    let cc = build_chain_complex(x);
    let snf1 = smith_normal_form(&cc.d1);
    let snf2 = smith_normal_form(&cc.d2);
    let (r1, r2) = (snf1.rank(), snf2.rank());
    let (n0, n1, n2) = (cc.cells0.len(), cc.cells1.len(), cc.cells2.len());
    HomologyProfile {
        h0: HomologyGroup {
            betti: n0 - r1,
            torsion: nontrivial_factors(snf1.invariant_factors()),
        },
        h1: HomologyGroup {
            betti: n1 - r1 - r2,
            torsion: nontrivial_factors(snf2.invariant_factors()),
        },
        h2: HomologyGroup {
            betti: n2 - r2,
            torsion: Vec::new(),
        },
    }
}

/// Piece counts of the splitting of the regular neighborhood along the
/// characteristic annuli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionSummary {
    pub solid_torus_count: usize,
    pub product_bundle_count: usize,
    pub twisted_bundle_count: usize,
    pub characteristic_annuli_count: usize,
}

pub fn decomposition_summary(x: &MultibranchedSurface) -> Result<DecompositionSummary> {
    if x.mode != ValidityMode::Strict {
        return Err(Error::RequiresStrict);
    }
    let bounded = x.regions.iter().filter(|r| !r.boundaries.is_empty());
    let (product, twisted) = bounded.fold((0, 0), |(p, t), r| if r.orientable { (p + 1, t) } else { (p, t + 1) });
    Ok(DecompositionSummary {
        solid_torus_count: x.loci.len(),
        product_bundle_count: product,
        twisted_bundle_count: twisted,
        characteristic_annuli_count: x.loci.iter().map(|l| l.slots.len()).sum(),
    })
}

/// Euler characteristic of the boundary of the regular neighborhood.
pub fn boundary_euler(x: &MultibranchedSurface) -> Result<i64> {
    if x.mode != ValidityMode::Strict {
        return Err(Error::RequiresStrict);
    }
    Ok(2 * x.euler_characteristic())
}
