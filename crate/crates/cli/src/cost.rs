use clap::{Args, Subcommand};
use seacat_core::costmodel::{estimate, expert_cost, LaborSpec};
use seacat_core::{Rational64, Scalar};
use serde::Serialize;

use crate::error::CliError;
use crate::{print_json, Io};

/// Crowd labor: `--hours H --rate R`, or `--images N --iph P --rate R`.
/// Arithmetic is exact on decimal inputs.
#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true, allow_negative_numbers = true)]
pub struct CostArgs {
    #[command(subcommand)]
    expert: Option<ExpertCommand>,
    /// Worker hours
    #[arg(long, conflicts_with_all = ["images", "iph"])]
    hours: Option<String>,
    /// Images to label
    #[arg(long, requires = "iph")]
    images: Option<String>,
    /// Images labeled per worker hour
    #[arg(long, requires = "images")]
    iph: Option<String>,
    /// Workers per image
    #[arg(long, default_value = "1", requires = "images")]
    redundancy: String,
    /// Hourly wage
    #[arg(long)]
    rate: Option<String>,
    /// Print hours and cost as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum ExpertCommand {
    /// Expert labeling priced per image
    Expert {
        /// Midwater images
        #[arg(long)]
        mid: String,
        /// Benthic images
        #[arg(long)]
        benthic: String,
        #[arg(long, default_value = "1")]
        mid_rate: String,
        #[arg(long, default_value = "3")]
        benthic_rate: String,
    },
}

fn number(field: &str, s: &str) -> Result<Rational64, CliError> {
    Rational64::parse_decimal(s.trim())
        .ok_or_else(|| CliError::validation(format!("{field}: {s:?} is not a decimal number")).field(field))
}

/// Exact decimal when the expansion terminates, otherwise six places.
pub fn format_exact(q: Rational64) -> String {
    if *q.denom() == 1 {
        return q.numer().to_string();
    }
    let mut d = *q.denom();
    let mut places = 0;
    for p in [2, 5] {
        while d % p == 0 {
            d /= p;
        }
    }
    if d == 1 {
        let mut scaled = q;
        while *scaled.denom() != 1 {
            scaled *= Rational64::from_integer(10);
            places += 1;
        }
        let n = scaled.numer().unsigned_abs();
        let digits = format!("{n:0>width$}", width = places + 1);
        let (int, frac) = digits.split_at(digits.len() - places);
        let sign = if *q.numer() < 0 { "-" } else { "" };
        return format!("{sign}{int}.{frac}");
    }
    format!("{:.6}", q.to_f64())
}

#[derive(Serialize)]
struct Report {
    hours: Option<String>,
    cost: String,
}

pub fn run(a: CostArgs, io: &mut Io<'_>) -> Result<(), CliError> {
    let report = match a.expert {
        Some(ExpertCommand::Expert { mid, benthic, mid_rate, benthic_rate }) => {
            let cost = expert_cost(
                number("mid", &mid)?,
                number("benthic", &benthic)?,
                number("mid_rate", &mid_rate)?,
                number("benthic_rate", &benthic_rate)?,
            )?;
            Report { hours: None, cost: format_exact(cost) }
        }
        None => {
            let rate = number("rate", a.rate.as_deref().ok_or_else(|| CliError::validation("--rate is required").field("rate"))?)?;
            let spec = match (a.hours, a.images, a.iph) {
                (Some(h), _, _) => LaborSpec::Hours { hours: number("hours", &h)?, hourly_rate: rate },
                (None, Some(n), Some(p)) => LaborSpec::Images {
                    images: number("images", &n)?,
                    images_per_hour: number("iph", &p)?,
                    redundancy: number("redundancy", &a.redundancy)?,
                    hourly_rate: rate,
                },
                _ => return Err(CliError::validation("give --hours, or --images with --iph").field("hours")),
            };
            let e = estimate(spec)?;
            Report { hours: Some(format_exact(e.hours)), cost: format_exact(e.cost) }
        }
    };
    if a.json {
        print_json(io, &report)
    } else {
        writeln!(io.out, "{}", report.cost)?;
        Ok(())
    }
}
