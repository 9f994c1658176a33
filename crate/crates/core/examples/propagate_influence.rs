//! Builds a small citation graph by hand, propagates influence and prints
//! paper and author factors.

use citation_influence::classifier::ContributionClass;
use citation_influence::influence::{author_influence, local_influence, propagate, InfluenceGraph, PropagationParams};

fn main() -> citation_influence::Result<()> {
    let mut g = InfluenceGraph::new();
    g.add_paper("survey", &[("m bianchi".into(), 1.0)])?;
    g.add_paper("method", &[("a moreau".into(), 0.5), ("b tanaka".into(), 0.5)])?;
    g.add_paper("followup", &[("a moreau".into(), 1.0)])?;
    g.add_paper("critique", &[("c diaz".into(), 1.0)])?;

    // followup extends method (rank 1 of 2); critique rejects it; the survey
    // mentions both as related work.
    g.add_edge("followup", "method", local_influence(ContributionClass::Extending, 1, 2)?)?;
    g.add_edge("critique", "method", local_influence(ContributionClass::Negative, 1, 1)?)?;
    g.add_edge("survey", "method", local_influence(ContributionClass::Related, 1, 2)?)?;
    g.add_edge("survey", "followup", local_influence(ContributionClass::Related, 2, 2)?)?;

    let params = PropagationParams::default();
    let af = propagate(&g, &params)?;
    println!("converged after {} iterations", af.iterations);
    for id in g.paper_ids() {
        println!("  {id:>9}  AF {:.4}", af.score_of(&g, id)?);
    }
    for name in g.authors().keys() {
        println!("  {name:>9}  AF {:.4}", author_influence(&g, &af, name)?);
    }
    print!("{}", g.to_text());
    Ok(())
}
