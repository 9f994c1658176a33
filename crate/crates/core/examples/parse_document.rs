//! Parses one toy paper and prints its sentences, references and mentions.
//!
//! cargo run --example parse_document [path/to/paper.json]

use std::env;
use std::fs;

use citation_influence::document::{parse_paper, ParseOptions};

fn main() -> citation_influence::Result<()> {
    let path =
        env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy/p06.json").to_string());
    let json = fs::read_to_string(&path).expect("readable document");
    let ingested = parse_paper(&json, ParseOptions::default())?;
    let p = &ingested.paper;

    println!("{} ({}) by {:?}, shares {:?}", p.title, p.year, p.authors, p.author_shares);
    for s in &p.sentences {
        println!("  [{:>2}] para {} {:?}: {}", s.sent_id, s.paragraph_id, s.section, s.text);
    }
    println!("references:");
    for r in &p.references {
        println!("  {} {:?} n_cit={} au_overlap={:.3}", r.cit_id, r.cit_title, r.n_cit, r.au_overlap);
    }
    for d in &ingested.diagnostics {
        println!("unresolved {} in sentence {}: {}", d.marker, d.sent_id, d.reason);
    }
    Ok(())
}
