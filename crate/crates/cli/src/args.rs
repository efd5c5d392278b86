use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use coarsecoh::Ring;

#[derive(Debug, Parser)]
#[command(name = "coarsecoh", version, about = "Coarse cohomology of finite metric models")]
pub struct Cli {
    /// Worker threads (defaults to $COARSECOH_THREADS, then all cores).
    #[arg(long, global = true, env = "COARSECOH_THREADS")]
    pub threads: Option<usize>,
    /// Result file; the JSON goes to stdout when omitted. A `.tsv` table is
    /// written next to it.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

/// Every subcommand and its parameters. This is the `config` block of each
/// result file, so a result can be replayed from it.
#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Emit an example space as JSON.
    Gen {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
    },
    /// Rips complex of a space (or of a subset).
    Rips {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        /// Restrict to a subset.
        #[arg(long)]
        subset: Option<String>,
        /// Include the simplex lists in the output.
        #[arg(long)]
        simplices: bool,
    },
    /// Cohomology of the Rips complex of a space.
    Betti {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        #[arg(long, default_value_t = Ring::Rational)]
        ring: Ring,
        /// Reduced cohomology.
        #[arg(long)]
        reduced: bool,
    },
    /// Complement tower `r -> X - N_r(A)` with persistent ranks.
    Tower {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        #[serde(flatten)]
        coarse: CoarseArgs,
        /// Subset `A` (defaults to the basepoint).
        #[arg(long)]
        subset: Option<String>,
    },
    /// Coarse cohomology profile about the basepoint.
    Coarse {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        #[serde(flatten)]
        coarse: CoarseArgs,
    },
    /// Coarse cohomology of `X - A`.
    Complement {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        #[serde(flatten)]
        coarse: CoarseArgs,
        #[arg(long)]
        subset: String,
    },
    /// Compare complement towers over `d` and over the quotient pseudometric `d_A`.
    #[command(name = "check-dA")]
    #[serde(rename = "check-dA")]
    CheckDa {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        #[serde(flatten)]
        coarse: CoarseArgs,
        #[arg(long)]
        subset: String,
    },
    /// Sample far balls and check that their cycles die in controlled neighborhoods.
    CheckAcyclic {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        scale: Option<f64>,
        /// μ(r) = a r + b, given as `a,b`.
        #[arg(long, default_value = "0,1")]
        mu: String,
        /// ρ(r) = a r + b, given as `a,b`.
        #[arg(long, default_value = "1,2")]
        rho: String,
        /// Upper bound on ρ.
        #[arg(long)]
        rho_cap: Option<f64>,
        /// Ball radii, comma separated.
        #[arg(long)]
        radii: Option<String>,
        #[arg(long, default_value_t = 8)]
        centers: usize,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        #[arg(long, default_value_t = Ring::Gf2)]
        ring: Ring,
    },
    /// Controlled filling map on the far subcomplex, on seed simplices, or
    /// the operator audit for a cochain.
    Fill {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        scale: Option<f64>,
        /// μ(r) = a r + b, given as `a,b`.
        #[arg(long, default_value = "1,0")]
        mu: String,
        /// Largest diameter of a generator (defaults to the scale).
        #[arg(long)]
        width: Option<f64>,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        /// Largest neighborhood radius tried.
        #[arg(long, default_value_t = 8.0)]
        cap: f64,
        /// Record every failed simplex instead of stopping at the first.
        #[arg(long)]
        audit: bool,
        /// Fill the face closure of these tuples instead, e.g. `3,7,9`.
        #[arg(long = "simplex")]
        #[serde(default)]
        simplices: Vec<String>,
        /// Cochain literal; runs the operator audit instead.
        #[arg(long)]
        cochain: Option<PathBuf>,
        /// Margin of the bounded cover element (operator audit).
        #[arg(long, default_value_t = 3.0)]
        margin: f64,
        /// Radius cap of the other cover elements (operator audit).
        #[arg(long, default_value_t = 3.0)]
        ball_cap: f64,
        #[arg(long, default_value_t = Ring::Rational)]
        ring: Ring,
    },
    /// Check the cone homotopy on seeded random controlled chain maps.
    VerifyHomotopy {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        scale: Option<f64>,
        /// Largest vertex displacement (defaults to twice the scale).
        #[arg(long)]
        shift: Option<f64>,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        #[arg(long, default_value_t = Ring::Rational)]
        ring: Ring,
    },
    /// Cohomology of the full simplex on a small space.
    FullCochain {
        #[command(flatten)]
        #[serde(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
        #[arg(long, default_value_t = Ring::Integer)]
        ring: Ring,
    },
    /// Re-run the configuration stored in a result file and compare.
    Replay { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    Grid,
    CirclePack,
    Annulus,
}

/// Where the space comes from: a file or a generator.
#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SpaceArgs {
    /// Distance matrix (.csv, .json) or point cloud (.json).
    #[arg(long, conflicts_with = "space")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub space: Option<SpaceKind>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 8.0)]
    pub half_extent: f64,
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 3)]
    pub circles: usize,
    #[arg(long, default_value_t = 16)]
    pub points_per_circle: usize,
    /// Inner radius of an annulus.
    #[arg(long, default_value_t = 2.0)]
    pub inner: f64,
    /// Outer radius of an annulus.
    #[arg(long, default_value_t = 8.0)]
    pub outer: f64,
    /// Basepoint of a loaded space.
    #[arg(long)]
    pub basepoint: Option<usize>,
    /// Marks a loaded space as a truncation at this radius.
    #[arg(long)]
    pub truncation: Option<f64>,
    /// Reject loaded tables that violate the triangle inequality.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct CoarseArgs {
    #[arg(long)]
    pub scale: Option<f64>,
    /// Radii as `r1,r2,...` or `geom:lo:hi:count`.
    #[arg(long)]
    pub r_grid: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub max_degree: usize,
    #[arg(long, default_value_t = Ring::Rational)]
    pub ring: Ring,
    #[arg(long, default_value_t = coarsecoh::towers::DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value_t = coarsecoh::towers::DEFAULT_STABILITY)]
    pub stability: usize,
}
