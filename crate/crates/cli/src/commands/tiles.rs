use std::path::PathBuf;

use clap::{Args, ValueEnum};
use tessfact_core::build_tessellation;
use tessfact_core::tessellation::{render_ascii, render_svg};

use crate::error::CliResult;
use crate::io::{to_json, write_text};
use crate::params::ParamArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TilesFormat {
    Ascii,
    Svg,
    Json,
}

#[derive(Debug, Args)]
pub struct TilesArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = TilesFormat::Ascii)]
    pub format: TilesFormat,
    /// Cell edge in SVG pixels
    #[arg(long, default_value_t = 24)]
    pub cell: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &TilesArgs) -> CliResult<()> {
    let plan = build_tessellation(&args.params.resolve(0)?)?;
    let text = match args.format {
        TilesFormat::Ascii => render_ascii(&plan),
        TilesFormat::Svg => render_svg(&plan, args.cell.max(1)),
        TilesFormat::Json => to_json(&plan.tiles)?,
    };
    write_text(args.out.as_deref(), &text)
}
