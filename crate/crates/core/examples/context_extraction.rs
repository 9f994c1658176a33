//! Context windows around each citing sentence, with the lexical relatedness
//! test and with a custom closure.

use citation_influence::context::{extract_context, Direction, LexicalRelatedness, RelatednessVerdict};
use citation_influence::document::{parse_paper, ParseOptions};

const DOC: &str = r#"{
  "paper_id": "demo", "title": "Context demo", "authors": ["Ann Lee"], "year": 2021,
  "sections": [{"heading": "Method", "paragraphs": [
    "Graph encoders learn node features. We adopt the graph encoder of [1]. The encoder stacks three graph layers. Training uses a single GPU.",
    "Separately, our tokenizer is trained from scratch [2]."
  ]}],
  "references": [
    {"cit_id": 1, "title": "Graph Encoders", "authors": ["Bo Chen"], "year": 2019},
    {"cit_id": 2, "title": "Tokenizers", "authors": ["Cy Diaz"], "year": 2018}
  ]
}"#;

fn main() -> citation_influence::Result<()> {
    let paper = parse_paper(DOC, ParseOptions::default())?.paper;
    let lexical = LexicalRelatedness::default();
    let permissive = |_: &str, _: &str| RelatednessVerdict::related(1.0);

    for m in &paper.mentions {
        println!("[{}] {}", m.cit_id, paper.sentences[m.sent_id].text);
        for (name, before, after) in [
            (
                "lexical",
                extract_context(&paper.sentences, m.sent_id, Direction::Backward, &lexical, Default::default()),
                extract_context(&paper.sentences, m.sent_id, Direction::Forward, &lexical, Default::default()),
            ),
            (
                "whole paragraph",
                extract_context(&paper.sentences, m.sent_id, Direction::Backward, &permissive, Default::default()),
                extract_context(&paper.sentences, m.sent_id, Direction::Forward, &permissive, Default::default()),
            ),
        ] {
            println!("  {name:>15}: before {before:?}");
            println!("  {:>15}  after  {after:?}", "");
        }
    }
    Ok(())
}
