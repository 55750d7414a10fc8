//! Tessellation of the demand matrix into disjoint rectangular tiles, and the
//! association of tiles with servers.
//!
//! The constructive pattern is a grid of `Delta x Gamma` blocks anchored at
//! the top-left corner, a right strip of `Delta x (L mod Gamma)` blocks, a
//! bottom strip of `(K mod Delta) x Gamma` blocks and one corner block. Families
//! whose remainder is zero are omitted, so the number of tiles is always
//! `ceil(K/Delta) * ceil(L/Gamma)`, the minimum needed to cover F.
//!
//! Tiles are enumerated row-major over the block grid, then the right strip
//! top to bottom, the bottom strip left to right, and the corner last. All
//! indices are zero-based.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TessError};
use crate::factorization::rank_budget;
use crate::model::SchemeParams;

/// Which part of the pattern a tile belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TileFamily {
    /// Full `Delta x Gamma` block of the main grid.
    #[serde(rename = "C1")]
    Block,
    /// `Delta x (L mod Gamma)` block of the right strip.
    #[serde(rename = "C2")]
    RightStrip,
    /// `(K mod Delta) x Gamma` block of the bottom strip.
    #[serde(rename = "C3")]
    BottomStrip,
    /// The `(K mod Delta) x (L mod Gamma)` corner.
    #[serde(rename = "C4")]
    Corner,
}

impl TileFamily {
    pub fn label(self) -> &'static str {
        match self {
            TileFamily::Block => "C1",
            TileFamily::RightStrip => "C2",
            TileFamily::BottomStrip => "C3",
            TileFamily::Corner => "C4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub id: usize,
    /// Row indices of F (users) covered by the tile.
    pub rows: Vec<usize>,
    /// Column indices of F (subfunctions) covered by the tile.
    pub cols: Vec<usize>,
    pub family: TileFamily,
    pub max_rank: usize,
    pub allocated_rank: usize,
    pub servers: Vec<usize>,
}

impl Tile {
    /// Unallocated tile over arbitrary row and column sets.
    pub fn new(id: usize, rows: Vec<usize>, cols: Vec<usize>, family: TileFamily) -> Self {
        let max_rank = rows.len().min(cols.len());
        Self {
            id,
            rows,
            cols,
            family,
            max_rank,
            allocated_rank: 0,
            servers: Vec::new(),
        }
    }

    fn block(
        id: usize,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
        family: TileFamily,
    ) -> Self {
        Self::new(id, rows.collect(), cols.collect(), family)
    }

    pub fn cell_count(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.rows.contains(&row) && self.cols.contains(&col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilePlan {
    pub params: SchemeParams,
    pub tiles: Vec<Tile>,
}

impl TilePlan {
    pub fn servers_used(&self) -> usize {
        self.tiles.iter().map(|t| t.servers.len()).sum()
    }

    pub fn family_count(&self, family: TileFamily) -> usize {
        self.tiles.iter().filter(|t| t.family == family).count()
    }

    /// Ids of tiles that were allocated rank zero.
    pub fn dropped_tiles(&self) -> Vec<usize> {
        self.tiles
            .iter()
            .filter(|t| t.allocated_rank == 0 && t.max_rank > 0)
            .map(|t| t.id)
            .collect()
    }

    /// Owner tile of every cell of F, `None` where uncovered. Cells covered
    /// twice keep the first owner; use [`check_disjoint`] to detect that.
    pub fn owner_grid(&self) -> Vec<Vec<Option<usize>>> {
        let p = &self.params;
        let mut grid = vec![vec![None; p.subfunctions]; p.users];
        for (idx, tile) in self.tiles.iter().enumerate() {
            for &i in &tile.rows {
                for &j in &tile.cols {
                    if i < p.users && j < p.subfunctions && grid[i][j].is_none() {
                        grid[i][j] = Some(idx);
                    }
                }
            }
        }
        grid
    }
}

/// Builds the constructive tessellation for `params` (server count ignored).
pub fn build_tessellation(params: &SchemeParams) -> Result<TilePlan> {
    params.check_budgets()?;
    let (k, l) = (params.users, params.subfunctions);
    let (dl, gm) = (params.comm_budget, params.comp_budget);
    let (row_blocks, col_blocks) = (k / dl, l / gm);
    let (row_rem, col_rem) = (k % dl, l % gm);

    let mut tiles = Vec::new();
    for i in 0..row_blocks {
        for j in 0..col_blocks {
            tiles.push(Tile::block(
                tiles.len(),
                i * dl..(i + 1) * dl,
                j * gm..(j + 1) * gm,
                TileFamily::Block,
            ));
        }
    }
    if col_rem > 0 {
        for i in 0..row_blocks {
            tiles.push(Tile::block(
                tiles.len(),
                i * dl..(i + 1) * dl,
                l - col_rem..l,
                TileFamily::RightStrip,
            ));
        }
    }
    if row_rem > 0 {
        for j in 0..col_blocks {
            tiles.push(Tile::block(
                tiles.len(),
                k - row_rem..k,
                j * gm..(j + 1) * gm,
                TileFamily::BottomStrip,
            ));
        }
    }
    if row_rem > 0 && col_rem > 0 {
        tiles.push(Tile::block(
            tiles.len(),
            k - row_rem..k,
            l - col_rem..l,
            TileFamily::Corner,
        ));
    }

    Ok(TilePlan {
        params: *params,
        tiles,
    })
}

/// `ceil(K/Delta) * ceil(L/Gamma)`: the fewest budget-respecting tiles that
/// can cover F.
pub fn min_tile_count(params: &SchemeParams) -> usize {
    params.users.div_ceil(params.comm_budget) * params.subfunctions.div_ceil(params.comp_budget)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Allocation {
    /// Every tile gets its full rank.
    Lossless,
    /// Ranks are limited by a budget of `servers` servers.
    Lossy { servers: usize, allow_dropped: bool },
}

/// Assigns ranks and contiguous server ids to the tiles of `plan`.
///
/// Lossy allocation here has no access to F, so leftover servers go to tiles
/// in enumeration order; `factorize_lossy` uses the singular values instead.
pub fn allocate_servers(plan: &TilePlan, mode: Allocation) -> Result<TilePlan> {
    let ranks = match mode {
        Allocation::Lossless => {
            let ranks: Vec<usize> = plan.tiles.iter().map(|t| t.max_rank).collect();
            let required = servers_for_ranks(&ranks, plan.params.shots);
            if required > plan.params.servers {
                return Err(TessError::InsufficientServers {
                    required,
                    available: plan.params.servers,
                });
            }
            ranks
        }
        Allocation::Lossy {
            servers,
            allow_dropped,
        } => rank_budget(plan, servers, None, allow_dropped)?,
    };
    assign_ranks(plan, &ranks)
}

/// Applies an explicit per-tile rank vector; each tile then holds
/// `ceil(rank / T)` servers, numbered contiguously in tile order.
pub fn assign_ranks(plan: &TilePlan, ranks: &[usize]) -> Result<TilePlan> {
    if ranks.len() != plan.tiles.len() {
        return Err(TessError::ShapeMismatch {
            context: "assign_ranks",
            expected: format!("{} ranks", plan.tiles.len()),
            found: format!("{}", ranks.len()),
        });
    }
    let shots = plan.params.shots;
    let mut next_server = 0;
    let mut tiles = plan.tiles.clone();
    for (tile, &rank) in tiles.iter_mut().zip(ranks) {
        if rank > tile.max_rank {
            return Err(TessError::RankOutOfRange {
                rank,
                max: tile.max_rank,
            });
        }
        let count = rank.div_ceil(shots);
        tile.allocated_rank = rank;
        tile.servers = (next_server..next_server + count).collect();
        next_server += count;
    }
    Ok(TilePlan {
        params: plan.params,
        tiles,
    })
}

pub(crate) fn servers_for_ranks(ranks: &[usize], shots: usize) -> usize {
    ranks.iter().map(|r| r.div_ceil(shots)).sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub covered: bool,
    pub uncovered: Vec<(usize, usize)>,
}

pub fn check_coverage(plan: &TilePlan) -> CoverageReport {
    let grid = plan.owner_grid();
    let uncovered: Vec<(usize, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, owner)| owner.is_none())
                .map(move |(j, _)| (i, j))
        })
        .collect();
    CoverageReport {
        covered: uncovered.is_empty(),
        uncovered,
    }
}

/// Cells claimed by more than one tile.
pub fn check_disjoint(plan: &TilePlan) -> Vec<(usize, usize)> {
    let p = &plan.params;
    let mut hits = vec![0u32; p.users * p.subfunctions];
    for tile in &plan.tiles {
        for &i in &tile.rows {
            for &j in &tile.cols {
                if i < p.users && j < p.subfunctions {
                    hits[i * p.subfunctions + j] += 1;
                }
            }
        }
    }
    hits.iter()
        .enumerate()
        .filter(|(_, &h)| h > 1)
        .map(|(c, _)| (c / p.subfunctions, c % p.subfunctions))
        .collect()
}

/// True when no server id is shared between tiles and the ids used form a
/// prefix `0..n` of the server range.
pub fn servers_form_prefix(plan: &TilePlan) -> bool {
    let mut ids: Vec<usize> = plan
        .tiles
        .iter()
        .flat_map(|t| t.servers.iter().copied())
        .collect();
    ids.sort_unstable();
    ids.iter().enumerate().all(|(expected, &id)| expected == id)
}

const TILE_GLYPHS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

fn glyph(index: usize) -> char {
    TILE_GLYPHS.get(index).map_or('#', |&b| b as char)
}

/// One character per cell of F; `.` marks an uncovered cell. Tiles past the
/// 62nd share the glyph `#`.
pub fn render_ascii(plan: &TilePlan) -> String {
    let mut out = String::new();
    for row in plan.owner_grid() {
        for owner in row {
            out.push(owner.map_or('.', glyph));
        }
        out.push('\n');
    }
    out
}

/// SVG diagram with one filled rectangle per cell, colored by owning tile.
pub fn render_svg(plan: &TilePlan, cell: usize) -> String {
    let p = &plan.params;
    let (w, h) = (p.subfunctions * cell, p.users * cell);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    for (i, row) in plan.owner_grid().into_iter().enumerate() {
        for (j, owner) in row.into_iter().enumerate() {
            let fill = owner.map_or_else(|| "#ffffff".to_string(), palette);
            let _ = writeln!(
                out,
                "  <rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"{fill}\" stroke=\"#333333\" stroke-width=\"0.5\"/>",
                j * cell,
                i * cell
            );
        }
    }
    for (idx, tile) in plan.tiles.iter().enumerate() {
        if let (Some(&r0), Some(&c0)) = (tile.rows.first(), tile.cols.first()) {
            let _ = writeln!(
                out,
                "  <text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"{}\">{}</text>",
                c0 * cell + cell / 4,
                r0 * cell + 3 * cell / 4,
                cell / 2,
                glyph(idx)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn palette(index: usize) -> String {
    // Golden-angle hue walk keeps neighbouring tiles distinguishable.
    let hue = (index as f64 * 137.507_764) % 360.0;
    format!("hsl({hue:.1},65%,72%)")
}
