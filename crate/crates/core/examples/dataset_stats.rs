//! Parse a dataset, validate it and print its statistics.
//!
//! cargo run --example dataset_stats [-- path/to/dataset.tsv]

use hgd::dataset::{compute_stats, parse_dataset_with, validate, ParseOptions};

const SAMPLE: &str = "homograph\tphoneme\tsentence
سر\tsar\tسر درد دارم
سر\tser\tاز این کار سیر شدم و سر شدم
سر\tsor\tسر خوردم روی یخ
گل\tgol\tاو گل زد
گل\tgel\tکفشم پر از گل شد
گل\tgol\tاو گل زد
كشت\tkesht\tكشت گندم امسال خوب بود
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let options = ParseOptions { normalize_arabic_yeh_kaf: true };
    let dataset = match std::env::args().nth(1) {
        Some(path) => parse_dataset_with(std::fs::File::open(path)?, options)?,
        None => parse_dataset_with(SAMPLE.as_bytes(), options)?,
    };
    println!("{} records, {} homographs", dataset.len(), dataset.index().len());

    let stats = compute_stats(&dataset);
    println!("sentence lengths (tokens -> records): {:?}", stats.sentence_length_hist);
    println!("homograph positions: {:?} ({} unresolved)", stats.homograph_position_hist, stats.position_unresolved);
    println!("phonemes per homograph: {:?}", stats.phoneme_count_dist);
    for inv in &stats.inventories {
        println!("  {}: {:?}", inv.homograph, inv.counts);
    }

    for issue in validate(&dataset).issues {
        println!("record {}: {}", issue.record_id, issue.kind.name());
    }
    Ok(())
}
