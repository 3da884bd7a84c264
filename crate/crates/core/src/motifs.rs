//! Co-specialization motif counts: two countries specialized in the same
//! sector.
//!
//! Everything here is exact integer arithmetic derived from per-sector
//! specialist counts split by country group, so the decomposition
//! identities hold bit-for-bit.

use std::io::Write;

use crate::error::{Error, Result};
use crate::ingest::{CountryGroup, CountryGroups};
use crate::rca::{BinaryMatrix, BipartiteNetwork};

#[inline]
fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// `½ Σ_s u_s (u_s − 1)`.
pub fn motif_total(matrix: &BinaryMatrix) -> u64 {
    matrix.col_sums().into_iter().map(|u| pairs(u as u64)).sum()
}

/// Network-level motif split by the groups of the two countries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GroupMotifs {
    pub eu15: u64,
    pub cee: u64,
    pub external: u64,
}

impl GroupMotifs {
    pub fn internal(&self, group: CountryGroup) -> u64 {
        match group {
            CountryGroup::Eu15 => self.eu15,
            CountryGroup::Cee => self.cee,
        }
    }

    pub fn total(&self) -> u64 {
        self.eu15 + self.cee + self.external
    }
}

/// Specialist count per sector and group, indexed `[s][group.index()]`.
pub(crate) fn specialists_by_group(matrix: &BinaryMatrix, membership: &[CountryGroup]) -> Vec<[u64; 2]> {
    assert_eq!(membership.len(), matrix.rows(), "one group per country");
    let mut counts = vec![[0u64; 2]; matrix.cols()];
    for (r, g) in membership.iter().enumerate() {
        for (cnt, &v) in counts.iter_mut().zip(matrix.row(r)) {
            cnt[g.index()] += v as u64;
        }
    }
    counts
}

pub(crate) fn group_motifs_from_counts<'a>(counts: impl IntoIterator<Item = &'a [u64; 2]>) -> GroupMotifs {
    let mut out = GroupMotifs::default();
    for [eu, cee] in counts {
        out.eu15 += pairs(*eu);
        out.cee += pairs(*cee);
        out.external += eu * cee;
    }
    out
}

pub fn decompose_by_membership(matrix: &BinaryMatrix, membership: &[CountryGroup]) -> GroupMotifs {
    group_motifs_from_counts(&specialists_by_group(matrix, membership))
}

/// Internal EU15, internal CEE and external motif counts.
pub fn motif_decompose(net: &BipartiteNetwork, groups: &CountryGroups) -> Result<GroupMotifs> {
    let membership = groups.resolve(&net.countries)?;
    Ok(decompose_by_membership(&net.matrix, &membership))
}

/// Node-level count `(u_s − 1) M_cs`, row-major.
pub fn motif_node(matrix: &BinaryMatrix) -> Vec<u64> {
    let u = matrix.col_sums();
    let mut out = Vec::with_capacity(matrix.rows() * matrix.cols());
    for r in 0..matrix.rows() {
        out.extend(
            matrix
                .row(r)
                .iter()
                .zip(&u)
                .map(|(&m, &us)| if m != 0 { us as u64 - 1 } else { 0 }),
        );
    }
    out
}

/// Node-level counts split into partners from the node's own group
/// (internal) and from the other group (external). Row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDecomposition {
    pub rows: usize,
    pub cols: usize,
    pub internal: Vec<u64>,
    pub external: Vec<u64>,
}

impl NodeDecomposition {
    pub fn internal_at(&self, c: usize, s: usize) -> u64 {
        self.internal[c * self.cols + s]
    }

    pub fn external_at(&self, c: usize, s: usize) -> u64 {
        self.external[c * self.cols + s]
    }
}

pub fn node_decompose_by_membership(matrix: &BinaryMatrix, membership: &[CountryGroup]) -> NodeDecomposition {
    let counts = specialists_by_group(matrix, membership);
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let mut internal = vec![0; rows * cols];
    let mut external = vec![0; rows * cols];
    for (r, g) in membership.iter().enumerate() {
        for (s, &m) in matrix.row(r).iter().enumerate() {
            if m != 0 {
                internal[r * cols + s] = counts[s][g.index()] - 1;
                external[r * cols + s] = counts[s][g.other().index()];
            }
        }
    }
    NodeDecomposition {
        rows,
        cols,
        internal,
        external,
    }
}

pub fn motif_node_decompose(net: &BipartiteNetwork, groups: &CountryGroups) -> Result<NodeDecomposition> {
    let membership = groups.resolve(&net.countries)?;
    Ok(node_decompose_by_membership(&net.matrix, &membership))
}

/// All motif counts for one network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotifCounts {
    pub year: i32,
    pub countries: Vec<String>,
    pub sectors: Vec<String>,
    pub membership: Vec<CountryGroup>,
    pub total: u64,
    pub groups: GroupMotifs,
    /// Row-major `(u_s − 1) M_cs`.
    pub node: Vec<u64>,
    pub node_split: NodeDecomposition,
}

impl MotifCounts {
    pub fn node_at(&self, c: usize, s: usize) -> u64 {
        self.node[c * self.sectors.len() + s]
    }
}

pub fn motif_counts(net: &BipartiteNetwork, groups: &CountryGroups) -> Result<MotifCounts> {
    let membership = groups.resolve(&net.countries)?;
    Ok(MotifCounts {
        year: net.year,
        countries: net.countries.clone(),
        sectors: net.sectors.clone(),
        total: motif_total(&net.matrix),
        groups: decompose_by_membership(&net.matrix, &membership),
        node: motif_node(&net.matrix),
        node_split: node_decompose_by_membership(&net.matrix, &membership),
        membership,
    })
}

/// Tidy CSV: `year,level,group,country,sector,scope,count`.
///
/// Network rows carry `overall` (whole network), `internal` per group and
/// `external`; node rows carry all three scopes for every linked cell.
pub fn write_motif_csv<W: Write>(counts: &[MotifCounts], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["year", "level", "group", "country", "sector", "scope", "count"])?;
    for mc in counts {
        let year = mc.year.to_string();
        let mut row = |level: &str, group: &str, country: &str, sector: &str, scope: &str, count: u64| {
            w.write_record([year.as_str(), level, group, country, sector, scope, &count.to_string()])
        };
        row("network", "", "", "", "overall", mc.total)?;
        for g in CountryGroup::ALL {
            row("network", g.label(), "", "", "internal", mc.groups.internal(g))?;
        }
        row("network", "", "", "", "external", mc.groups.external)?;
        for (c, country) in mc.countries.iter().enumerate() {
            let g = mc.membership[c].label();
            for (s, sector) in mc.sectors.iter().enumerate() {
                if mc.node_at(c, s) == 0 && mc.node_split.internal_at(c, s) == 0 {
                    continue;
                }
                row("node", g, country, sector, "overall", mc.node_at(c, s))?;
                row("node", g, country, sector, "internal", mc.node_split.internal_at(c, s))?;
                row("node", g, country, sector, "external", mc.node_split.external_at(c, s))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<motif csv>", e))
}
