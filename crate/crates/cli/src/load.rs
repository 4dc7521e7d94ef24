use std::path::Path;

use mql_core::model_io::{parse_model, ParseOptions, ParsedModel};
use mql_core::quiver::refinement_grids;
use mql_core::{Error, GridModel, InteriorMode, MarkovModel, Quiver, Rational, Result, SpaceSpec};

/// States allowed in finite models and quiver files.
pub const MAX_STATES: usize = 20;
/// Points allowed in the finest refinement grid.
pub const MAX_GRID_POINTS: usize = 1_000_001;

/// A model ready for analysis.
pub enum Loaded {
    Exact(MarkovModel<Rational>),
    Grid(GridModel),
    Quiver(Quiver<Rational>),
}

pub fn load(path: &Path, transpose: bool, grid: Option<usize>, refinements: usize) -> Result<Loaded> {
    let parsed = parse_model(path, ParseOptions { transpose })?;
    let loaded = match parsed {
        ParsedModel::Quiver(q) => {
            if grid.is_some() {
                return Err(Error::Validation("--grid needs a model on an interval grid".into()));
            }
            check_states(q.vertex_count())?;
            Loaded::Quiver(q)
        }
        ParsedModel::Markov(m) => match m.space() {
            Some(SpaceSpec::IntervalGrid { .. }) => {
                let mut g = m.to_f64();
                if let Some(points) = grid {
                    if points < 2 {
                        return Err(Error::Validation("--grid needs at least 2 points".into()));
                    }
                    g = g.with_grid_points(points).expect("interval grid model");
                }
                let finest = match g.interior_mode() {
                    InteriorMode::Continuum => *refinement_grids(g.len(), refinements.max(3)).last().expect("nonempty"),
                    InteriorMode::Discrete => g.len(),
                };
                if finest > MAX_GRID_POINTS {
                    return Err(Error::Capacity {
                        what: "finest refinement grid",
                        got: finest,
                        limit: MAX_GRID_POINTS,
                    });
                }
                Loaded::Grid(g)
            }
            _ => {
                if grid.is_some() {
                    return Err(Error::Validation("--grid needs a model on an interval grid".into()));
                }
                check_states(m.len())?;
                Loaded::Exact(m)
            }
        },
    };
    Ok(loaded)
}

fn check_states(n: usize) -> Result<()> {
    if n > MAX_STATES {
        return Err(Error::Capacity {
            what: "state count",
            got: n,
            limit: MAX_STATES,
        });
    }
    Ok(())
}
