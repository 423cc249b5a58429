//! Subcommand drivers. A staged run recomputes ingest (cheap and
//! deterministic) and reads every other upstream result from `out_dir`, so
//! running the stages one by one writes the same bytes as `pipeline`.

use std::path::Path;

use clap::ValueEnum;

use super::artifacts::{self as art, write_json};
use super::cr::{category_rate, ClassifiedTopic};
use super::manifest::RunManifest;
use super::pipeline::{
    run_classify, run_correlate, run_ingest, run_periods, run_rt, run_topics, tokenize_regions,
    word_frequencies, IngestOutput, RegionPeriods, RunContext,
};
use super::svg::volume_vs_cases;
use crate::classify::write_model;
use crate::epi::Period;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Ingest,
    Rt,
    Periods,
    Correlate,
    Topics,
    Classify,
    Report,
    Pipeline,
}

pub fn run_stage(stage: Stage, ctx: &RunContext, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let manifest = RunManifest::new(&ctx.config, ctx.seed, &ctx.regions, ctx.strict)?;
    let ingest = run_ingest(ctx)?;
    match stage {
        Stage::Ingest => write_ingest(out, &ingest)?,
        Stage::Rt => art::write_rt(out, &run_rt(ctx, &ingest))?,
        Stage::Periods => {
            let maps = art::read_rt(out, &ctx.regions)?;
            art::write_periods(out, &run_periods(ctx, &maps))?;
        }
        Stage::Correlate => {
            let periods = art::read_periods(out, &ctx.regions)?;
            art::write_correlations(out, &run_correlate(ctx, &ingest, &periods))?;
        }
        Stage::Topics => art::write_topics(out, &run_topics(ctx, &ingest)?)?,
        Stage::Classify => {
            let days = art::read_topics(out, &ctx.regions)?;
            classify(ctx, out, &days)?;
        }
        Stage::Report => {
            let periods = art::read_periods(out, &ctx.regions)?;
            let predictions = art::read_predictions(out)?;
            report(ctx, out, &ingest, &periods, &predictions)?;
        }
        Stage::Pipeline => {
            write_ingest(out, &ingest)?;
            let rts = run_rt(ctx, &ingest);
            art::write_rt(out, &rts)?;
            let maps: Vec<_> = rts.iter().map(|r| r.trajectory()).collect();
            let periods = run_periods(ctx, &maps);
            art::write_periods(out, &periods)?;
            art::write_correlations(out, &run_correlate(ctx, &ingest, &periods))?;
            let days = run_topics(ctx, &ingest)?;
            art::write_topics(out, &days)?;
            let predictions = classify(ctx, out, &days)?;
            report(ctx, out, &ingest, &periods, &predictions)?;
        }
    }
    write_json(&out.join("manifest.json"), &manifest)
}

fn write_ingest(out: &Path, ingest: &IngestOutput) -> Result<()> {
    art::write_summary(out, ingest)?;
    art::write_daily(out, ingest)?;
    art::write_ingest_report(out, ingest)
}

fn classify(
    ctx: &RunContext,
    out: &Path,
    days: &[super::pipeline::DayEntry],
) -> Result<Vec<ClassifiedTopic>> {
    let c = run_classify(ctx, days)?;
    write_model(&out.join("model.json"), &c.dump)?;
    art::write_metrics(out, &c.evaluation)?;
    art::write_cv_scores(out, &c.cv, c.chosen)?;
    art::write_predictions(out, &c.predictions)?;
    Ok(c.predictions)
}

fn report(
    ctx: &RunContext,
    out: &Path,
    ingest: &IngestOutput,
    periods: &[RegionPeriods],
    predictions: &[ClassifiedTopic],
) -> Result<()> {
    art::write_topic_counts(out, &ctx.regions, predictions)?;
    let days = ctx.topic_days();
    let cr: Vec<_> = ctx
        .regions
        .iter()
        .map(|r| category_rate(predictions, r, &days))
        .collect();
    art::write_cr_heatmap(out, &cr)?;

    let tokens = tokenize_regions(ctx, ingest)?;
    for rp in periods {
        let Some(p) = &rp.periods else { continue };
        for period in Period::ALL {
            let iv = p.interval(period);
            if iv.is_empty() {
                continue;
            }
            let ranked = word_frequencies(&tokens[&rp.region], &iv, ctx.config.report.wordfreq_top);
            art::write_wordfreq(out, &rp.region, period.name(), &ranked)?;
        }
    }

    let plot = ctx
        .config
        .report
        .plot_region
        .clone()
        .filter(|r| ctx.regions.contains(r))
        .unwrap_or_else(|| ctx.regions[0].clone());
    if let Some(data) = ingest.region(&plot) {
        let p = periods
            .iter()
            .find(|p| p.region == plot)
            .and_then(|p| p.periods.as_ref());
        let svg = volume_vs_cases(
            &format!("{plot}: daily tweets and new cases"),
            &data.volume,
            &data.cases.cases,
            p,
        );
        std::fs::write(out.join("volume_vs_cases.svg"), svg)?;
    }
    Ok(())
}
