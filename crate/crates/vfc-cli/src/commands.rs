//! Command implementations.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use vfc_core::budget::{
    count_classes, truncate_context_aware, truncate_naive, LineClass, TokenClassCounts, Tokenizer,
};
use vfc_core::corpus::{
    self, dedup_exact, dedup_semantic, sliding_window_scan, CommitRecord, FilterCriteria,
    Fractions, LabelSource, SnapshotStore, SplitAssignment,
};
use vfc_core::diff::{parse_unified_diff, DocumentLine};
use vfc_core::enrich::{enrich_commit_with, EnrichmentLevel, EnrichOptions, EnrichedDiff};
use vfc_core::metrics::{check_unique_ids, f1_at, pd_s, threshold_sweep, MetricsError, ScoredPrediction};

use crate::io::{read_jsonl, stream_batches, stream_lines, AtomicOutput, Manifest};
use crate::{
    CliError, DedupArgs, EnrichArgs, EvalArgs, FilterArgs, IngestArgs, SplitArgs, StatsArgs,
    TemporalScanArgs, TruncateArgs,
};

fn parse_tokenizer(spec: &str) -> Result<Tokenizer, CliError> {
    if spec == "builtin" {
        return Ok(Tokenizer::builtin());
    }
    if let Some(path) = spec.strip_prefix("vocab:") {
        return Tokenizer::from_vocab_file(Path::new(path))
            .map_err(|e| CliError::config(e.to_string()));
    }
    Err(CliError::config(format!(
        "unknown tokenizer {spec:?}; expected builtin or vocab:<path>"
    )))
}

fn parse_fractions(spec: &str) -> Result<Fractions, CliError> {
    let parts: Vec<f64> = spec
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::config(format!("bad fractions {spec:?}: {e}")))?;
    if parts.len() != 3 {
        return Err(CliError::config(format!(
            "fractions must be three comma-separated numbers, got {spec:?}"
        )));
    }
    let fractions = Fractions {
        train: parts[0],
        val: parts[1],
        test: parts[2],
    };
    fractions
        .validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(fractions)
}

fn load_records(path: &Path) -> Result<Vec<CommitRecord>, CliError> {
    read_jsonl::<CommitRecord>(path)
}

pub fn ingest(args: IngestArgs) -> Result<(), CliError> {
    let mut out = AtomicOutput::create(&args.output)?;
    let mut kept = 0usize;
    let mut rejected = 0usize;
    stream_lines(&args.input, |lineno, line| {
        let report = corpus::ingest_str(line);
        for v in &report.violations {
            eprintln!("{}:{lineno}: {}", args.input.display(), v.message);
            rejected += 1;
        }
        for record in &report.records {
            out.write_json(record)?;
            kept += 1;
        }
        Ok(())
    })?;
    out.commit()?;
    let mut manifest = Manifest::new("ingest").input(&args.input);
    manifest.count("kept", kept);
    manifest.count("rejected", rejected);
    manifest.write_beside(&args.output)?;
    if kept == 0 && rejected > 0 {
        return Err(CliError::data("no valid records in input".to_string()));
    }
    Ok(())
}

pub fn dedup(args: DedupArgs) -> Result<(), CliError> {
    let records = load_records(&args.input)?;
    let before = records.len();
    let deduped = match args.strategy.as_str() {
        "exact" => dedup_exact(records),
        "semantic" => dedup_semantic(records),
        "both" => dedup_semantic(dedup_exact(records)),
        other => {
            return Err(CliError::config(format!(
                "unknown dedup strategy {other:?}; expected exact, semantic, or both"
            )))
        }
    };
    let mut out = AtomicOutput::create(&args.output)?;
    for record in &deduped {
        out.write_json(record)?;
    }
    out.commit()?;
    let mut manifest = Manifest::new("dedup")
        .input(&args.input)
        .config(&json!({ "strategy": args.strategy }));
    manifest.count("input", before);
    manifest.count("kept", deduped.len());
    manifest.count("removed", before - deduped.len());
    manifest.write_beside(&args.output)
}

pub fn filter(args: FilterArgs) -> Result<(), CliError> {
    let split_set = |s: &Option<String>| -> Option<BTreeSet<String>> {
        s.as_ref().map(|v| {
            v.split(',')
                .map(|p| p.trim().to_ascii_lowercase())
                .filter(|p| !p.is_empty())
                .collect()
        })
    };
    let label_sources = match &args.label_sources {
        None => None,
        Some(raw) => {
            let mut set = BTreeSet::new();
            for part in raw.split(',') {
                let parsed: LabelSource =
                    serde_json::from_value(json!(part.trim().to_ascii_lowercase())).map_err(
                        |_| CliError::config(format!("unknown label source {part:?}")),
                    )?;
                set.insert(parsed);
            }
            Some(set)
        }
    };
    let time_range = match (args.after, args.before) {
        (None, None) => None,
        (a, b) => Some((a.unwrap_or(i64::MIN), b.unwrap_or(i64::MAX))),
    };
    let criteria = FilterCriteria {
        languages: split_set(&args.languages),
        label_sources,
        sources: split_set(&args.sources),
        time_range,
        has_cve: args.has_cve,
    };
    let records = load_records(&args.input)?;
    let before = records.len();
    let kept = corpus::filter(records, &criteria);
    let mut out = AtomicOutput::create(&args.output)?;
    for record in &kept {
        out.write_json(record)?;
    }
    out.commit()?;
    let mut manifest = Manifest::new("filter").input(&args.input).config(&criteria);
    manifest.count("input", before);
    manifest.count("kept", kept.len());
    manifest.write_beside(&args.output)
}

pub fn split(args: SplitArgs) -> Result<(), CliError> {
    let fractions = parse_fractions(&args.fractions)?;
    let mut records = load_records(&args.input)?;
    if let Some(map_path) = &args.group_map {
        let text = std::fs::read_to_string(map_path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", map_path.display())))?;
        let map: std::collections::BTreeMap<String, String> = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("bad group map: {e}")))?;
        for record in &mut records {
            if record.group_id.is_empty() {
                if let Some(group) = map.get(&record.repo.name) {
                    record.group_id = group.clone();
                }
            }
        }
    }
    let assignment: SplitAssignment = match args.strategy.as_str() {
        "random" => corpus::split_random(&records, fractions, args.seed),
        "temporal" => corpus::split_temporal(&records, fractions),
        "group" => corpus::split_group_stratified(&records, fractions, args.seed),
        "cve" => corpus::split_cve(&records, fractions, args.seed, args.vuln_ratio),
        other => {
            return Err(CliError::config(format!(
                "unknown split strategy {other:?}; expected random, temporal, group, or cve"
            )))
        }
    }
    .map_err(|e| CliError::data(e.to_string()))?;

    let mut out = AtomicOutput::create(&args.output)?;
    for (id, split) in &assignment.assignments {
        out.write_json(&json!({ "id": id, "split": split }))?;
    }
    out.commit()?;
    let mut manifest = Manifest::new("split")
        .input(&args.input)
        .seed(args.seed)
        .config(&json!({
            "strategy": assignment.strategy,
            "fractions": fractions,
            "vuln_ratio": args.vuln_ratio,
            "achieved": assignment.achieved,
        }));
    for w in &assignment.warnings {
        manifest.warn(w.clone());
        eprintln!("warning: {w}");
    }
    manifest.count("records", records.len());
    manifest.write_beside(&args.output)
}

pub fn enrich(args: EnrichArgs) -> Result<(), CliError> {
    let level = EnrichmentLevel::parse(&args.level)
        .ok_or_else(|| CliError::config(format!("unknown level {:?}", args.level)))?;
    let store = snapshot_store(&args)?;
    let options = EnrichOptions {
        context_width: args.context,
        full_enclosure_chain: args.full_chain,
    };
    if args.jobs == 0 {
        return Err(CliError::config("--jobs must be at least 1".to_string()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::config(e.to_string()))?;

    // Stream in batches: workers run per batch, output stays input-ordered
    // and memory stays bounded.
    let mut out = AtomicOutput::create(&args.output)?;
    let mut total = 0usize;
    let mut failures = 0usize;
    let mut fallback_files = 0usize;
    stream_batches::<CommitRecord>(&args.input, 64.max(args.jobs * 16), |batch| {
        let results: Vec<Result<EnrichedDiff, String>> = pool.install(|| {
            batch
                .par_iter()
                .map(|record| {
                    enrich_commit_with(record, &store, level, options).map_err(|e| e.to_string())
                })
                .collect()
        });
        for (record, result) in batch.iter().zip(results) {
            total += 1;
            match result {
                Ok(enriched) => {
                    fallback_files += enriched.fallback_files;
                    let mut value = serde_json::to_value(record)
                        .map_err(|e| CliError::data(e.to_string()))?;
                    let obj = value.as_object_mut().expect("record serializes to object");
                    if args.emit_text {
                        obj.insert("enriched_text".to_string(), json!(enriched.render_text()));
                    }
                    obj.insert(
                        "enriched".to_string(),
                        serde_json::to_value(&enriched)
                            .map_err(|e| CliError::data(e.to_string()))?,
                    );
                    out.write_json(&value)?;
                }
                Err(msg) => {
                    failures += 1;
                    eprintln!("{}: {msg}", record.record_id());
                }
            }
        }
        Ok(())
    })?;
    out.commit()?;
    let mut manifest = Manifest::new("enrich").input(&args.input).config(&json!({
        "level": level,
        "context": args.context,
        "full_chain": args.full_chain,
        "jobs": args.jobs,
    }));
    manifest.count("records", total);
    manifest.count("failed", failures);
    manifest.count("fallback_files", fallback_files);
    manifest.write_beside(&args.output)?;
    if failures > 0 {
        return Err(CliError::data(format!("{failures} records failed to enrich")));
    }
    Ok(())
}

fn snapshot_store(args: &EnrichArgs) -> Result<SnapshotStore, CliError> {
    if let Ok(path) = std::env::var("VFC_SNAPSHOT_STORE") {
        return Ok(SnapshotStore::file_cache(PathBuf::from(path)));
    }
    if let Ok(path) = std::env::var("VFC_GIT_STORE") {
        return Ok(SnapshotStore::local_git(PathBuf::from(path)));
    }
    match (&args.snapshots, &args.git) {
        (Some(path), None) => Ok(SnapshotStore::file_cache(path.clone())),
        (None, Some(path)) => Ok(SnapshotStore::local_git(path.clone())),
        (Some(_), Some(_)) => Err(CliError::config(
            "--snapshots and --git are mutually exclusive".to_string(),
        )),
        (None, None) => Err(CliError::config(
            "a snapshot source is required: --snapshots DIR, --git DIR, or \
             VFC_SNAPSHOT_STORE / VFC_GIT_STORE"
                .to_string(),
        )),
    }
}

/// Document lines of a record: the embedded enriched form when present,
/// otherwise the parsed raw diff plus message.
fn record_document(value: &serde_json::Value) -> Result<Vec<DocumentLine>, String> {
    if let Some(enriched) = value.get("enriched") {
        let enriched: EnrichedDiff =
            serde_json::from_value(enriched.clone()).map_err(|e| e.to_string())?;
        return Ok(enriched.document_lines());
    }
    let diff_text = value.get("diff").and_then(|d| d.as_str()).unwrap_or("");
    let message = value.get("message").and_then(|m| m.as_str());
    let diff = parse_unified_diff(diff_text, message).map_err(|e| e.to_string())?;
    Ok(diff.document_lines())
}

pub fn truncate(args: TruncateArgs) -> Result<(), CliError> {
    if args.limit == 0 {
        return Err(CliError::config("--limit must be at least 1".to_string()));
    }
    let tokenizer = parse_tokenizer(&args.tokenizer)?;
    if !matches!(args.strategy.as_str(), "context-aware" | "naive") {
        return Err(CliError::config(format!(
            "unknown truncation strategy {:?}",
            args.strategy
        )));
    }
    let mut out = AtomicOutput::create(&args.output)?;
    let mut total = 0usize;
    let mut failures = 0usize;
    let mut affected = 0usize;
    stream_lines(&args.input, |lineno, line| {
        let mut value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| CliError::data(format!("{}:{lineno}: {e}", args.input.display())))?;
        total += 1;
        let lines = match record_document(&value) {
            Ok(lines) => lines,
            Err(e) => {
                failures += 1;
                eprintln!("record at line {lineno} skipped: {e}");
                return Ok(());
            }
        };
        let result = match args.strategy.as_str() {
            "context-aware" => truncate_context_aware(&lines, args.limit, &tokenizer),
            _ => truncate_naive(&lines, args.limit, &tokenizer),
        };
        let (kept, report) = result.map_err(|e| CliError::config(e.to_string()))?;
        if report.affected {
            affected += 1;
        }
        let obj = value.as_object_mut().expect("jsonl rows are objects");
        obj.insert(
            "truncated".to_string(),
            json!({
                "strategy": args.strategy,
                "lines": kept.iter().map(|l| l.rendered.clone()).collect::<Vec<_>>(),
                "report": report,
            }),
        );
        out.write_json(&value)
    })?;
    out.commit()?;
    let mut manifest = Manifest::new("truncate").input(&args.input).config(&json!({
        "limit": args.limit,
        "strategy": args.strategy,
        "tokenizer": tokenizer.name,
    }));
    manifest.count("records", total);
    manifest.count("affected", affected);
    manifest.count("failed", failures);
    manifest.write_beside(&args.output)?;
    if failures > 0 {
        return Err(CliError::data(format!("{failures} records failed")));
    }
    Ok(())
}

pub fn stats(args: StatsArgs) -> Result<(), CliError> {
    let tokenizer = parse_tokenizer(&args.tokenizer)?;
    let mut totals: Vec<usize> = Vec::new();
    let mut per_class: Vec<TokenClassCounts> = Vec::new();
    let mut failures = 0usize;
    stream_lines(&args.input, |lineno, line| {
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| CliError::data(format!("{}:{lineno}: {e}", args.input.display())))?;
        match record_document(&value) {
            Ok(lines) => {
                let counts = count_classes(&lines, &tokenizer);
                totals.push(counts.total());
                per_class.push(counts);
            }
            Err(e) => {
                failures += 1;
                eprintln!("record at line {lineno} skipped: {e}");
            }
        }
        Ok(())
    })?;
    if per_class.is_empty() {
        return Err(CliError::data("no analyzable records".to_string()));
    }
    let classes = [
        ("change", LineClass::Change),
        ("header", LineClass::Header),
        ("context", LineClass::Context),
        ("message", LineClass::Message),
    ];
    let grand_total: usize = totals.iter().sum();
    let mut report = serde_json::Map::new();
    report.insert("records".into(), json!(per_class.len()));
    report.insert("median_total".into(), json!(median(&mut totals.clone())));
    let mut class_report = serde_json::Map::new();
    println!("{:<10} {:>12} {:>10}", "class", "median", "share");
    for (name, class) in classes {
        let mut values: Vec<usize> = per_class.iter().map(|c| c.get(class)).collect();
        let med = median(&mut values);
        let class_total: usize = per_class.iter().map(|c| c.get(class)).sum();
        let share = if grand_total == 0 {
            0.0
        } else {
            class_total as f64 / grand_total as f64
        };
        println!("{name:<10} {med:>12} {share:>9.1}%", share = share * 100.0);
        class_report.insert(
            name.to_string(),
            json!({ "median": med, "share": share, "total": class_total }),
        );
    }
    println!("{:<10} {:>12}", "total", median(&mut totals.clone()));
    report.insert("classes".into(), serde_json::Value::Object(class_report));
    if let Some(output) = &args.output {
        let mut out = AtomicOutput::create(output)?;
        out.write_line(
            &serde_json::to_string_pretty(&serde_json::Value::Object(report))
                .map_err(|e| CliError::data(e.to_string()))?,
        )?;
        out.commit()?;
        let mut manifest = Manifest::new("stats").input(&args.input);
        manifest.count("records", per_class.len());
        manifest.count("failed", failures);
        manifest.write_beside(output)?;
    }
    if failures > 0 {
        return Err(CliError::data(format!("{failures} records failed")));
    }
    Ok(())
}

fn median(values: &mut [usize]) -> usize {
    if values.is_empty() {
        return 0;
    }
    values.sort_unstable();
    values[values.len() / 2]
}

pub fn eval(args: EvalArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.r) {
        return Err(CliError::config(format!("--r must lie in [0,1], got {}", args.r)));
    }
    let preds: Vec<ScoredPrediction> = read_jsonl(&args.predictions)?;
    check_unique_ids(&preds).map_err(|e| CliError::data(e.to_string()))?;
    let op = f1_at(&preds, args.threshold).map_err(|e| CliError::data(e.to_string()))?;
    let sweep = threshold_sweep(&preds).map_err(|e| CliError::data(e.to_string()))?;
    let pd = match pd_s(&preds, args.r) {
        Ok(v) => json!(v),
        Err(e @ MetricsError::DiscreteScores) => {
            eprintln!("note: {e}");
            json!({ "unavailable": e.to_string() })
        }
        Err(e) => return Err(CliError::data(e.to_string())),
    };
    let report = json!({
        "predictions": preds.len(),
        "threshold": args.threshold,
        "f1": op.f1,
        "precision": op.precision,
        "recall": op.recall,
        "confusion": { "tp": op.tp, "fp": op.fp, "tn": op.tn, "fn": op.fn_ },
        "r": args.r,
        "pd_s": pd,
        "sweep_points": sweep.len(),
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::data(e.to_string()))?;
    println!("{text}");
    if let Some(output) = &args.output {
        let mut out = AtomicOutput::create(output)?;
        out.write_line(&text)?;
        out.commit()?;
        let mut manifest = Manifest::new("eval").input(&args.predictions).config(&json!({
            "threshold": args.threshold,
            "r": args.r,
        }));
        manifest.count("predictions", preds.len());
        manifest.write_beside(output)?;
    }
    Ok(())
}

pub fn temporal_scan(args: TemporalScanArgs) -> Result<(), CliError> {
    let parts: Vec<f64> = args
        .window
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::config(format!("bad window {:?}: {e}", args.window)))?;
    if parts.len() != 3 {
        return Err(CliError::config(
            "window must be three comma-separated fractions".to_string(),
        ));
    }
    let records = load_records(&args.input)?;
    let mut windows = sliding_window_scan(&records, (parts[0], parts[1], parts[2]), args.stride)
        .map_err(|e| CliError::data(e.to_string()))?;

    if let Some(scores_path) = &args.scores {
        #[derive(serde::Deserialize)]
        struct ScoreRow {
            offset: f64,
            f1: f64,
        }
        let scores: Vec<ScoreRow> = read_jsonl(scores_path)?;
        for w in &mut windows {
            if let Some(row) = scores
                .iter()
                .min_by(|a, b| {
                    (a.offset - w.offset)
                        .abs()
                        .partial_cmp(&(b.offset - w.offset).abs())
                        .unwrap()
                })
                .filter(|row| (row.offset - w.offset).abs() < args.stride / 2.0)
            {
                w.test_f1 = Some(row.f1);
            }
        }
    }

    let mut out = AtomicOutput::create(&args.output)?;
    for w in &windows {
        out.write_json(w)?;
    }
    out.commit()?;
    let mut manifest = Manifest::new("temporal-scan").input(&args.input).config(&json!({
        "window": args.window,
        "stride": args.stride,
    }));
    manifest.count("records", records.len());
    manifest.count("windows", windows.len());
    manifest.write_beside(&args.output)
}
