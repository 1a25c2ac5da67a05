//! The six contextual baseline features on a hand-written item, and their
//! training-set standardization on a synthetic corpus.
//!
//! ```text
//! cargo run --example baseline_features
//! ```

mod common;

use chrono::NaiveDate;

use nap::baselines::{item_features, FeatureKind, SentimentLexicon, Standardizer};
use nap::corpus::{tokenize_review, ItemSequence, Partition, Review};
use nap::harness::SyntheticConfig;

fn review(id: &str, date: (i32, u32, u32), stars: u8, votes: u32, text: &str) -> Review {
    Review {
        item_id: "kettle".into(),
        review_id: id.into(),
        position: 0,
        date: NaiveDate::from_ymd_opt(date.0, date.1, date.2).unwrap(),
        star_rating: stars,
        helpful_votes: votes,
        raw_text: text.into(),
        tokens: tokenize_review(text),
    }
}

fn main() -> nap::Result<()> {
    let item = ItemSequence::new(
        "kettle",
        vec![
            review("a", (2021, 3, 9), 5, 4, "Great kettle, boils fast and looks great."),
            review("b", (2021, 3, 2), 1, 0, "Terrible. The lid broke after a week, awful support."),
            review("c", (2021, 2, 20), 4, 2, "Good kettle. Boils fast, the handle gets warm."),
            review("d", (2021, 2, 20), 5, 0, "Fast shipping, good price."),
            review("e", (2021, 1, 5), 3, 1, "It boils water. Nothing special, a bit loud."),
        ],
    );
    let features = item_features(&item, &SentimentLexicon::bundled());
    print!("{:<4}", "id");
    for kind in FeatureKind::ALL {
        print!("{:>8}", kind.name());
    }
    println!();
    for (r, f) in item.reviews.iter().zip(&features) {
        print!("{:<4}", r.review_id);
        for kind in FeatureKind::ALL {
            print!("{:>8.3}", f[kind.name()]);
        }
        println!();
    }

    let ws = common::synthetic_workspace(&SyntheticConfig {
        items: 10,
        ..SyntheticConfig::default()
    })?;
    let scaler = Standardizer::fit(ws.corpus.reviews(Partition::Train), &FeatureKind::ALL)?;
    println!("\ntraining statistics on a synthetic corpus:");
    for kind in FeatureKind::ALL {
        let (mean, std) = scaler.mean_std(kind).unwrap();
        println!("  {:<6} mean {mean:>8.4}  std {std:>8.4}", kind.code());
    }
    let first = ws.corpus.reviews(Partition::Test).next().unwrap();
    println!("z-scores of test review {}: {:?}", first.review_id, scaler.transform(first, &FeatureKind::ALL)?);
    Ok(())
}
