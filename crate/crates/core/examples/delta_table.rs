//! Name minus NoName deltas with Welch tests, written as CSV and SVG.
//!
//! cargo run --example delta_table

use pgg_core::analysis::export::to_csv_string;
use pgg_core::analysis::{delta_table, DEFAULT_ALPHA};
use pgg_core::game::{Condition, StudyStyle};
use pgg_core::report::svg::render_delta_grid;
use pgg_core::runner::{enumerate_conditions, Harness};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = vec!["scripted:random_uniform@Rand".parse()?, "scripted:matcher@Match".parse()?];
    let cells = enumerate_conditions(StudyStyle::Study1, &specs, Some(40))?;
    let harness = Harness::offline();
    let mut rows = Vec::new();
    for (i, pair) in cells.chunks(2).take(3).enumerate() {
        let noname = harness.run_batch(&pair[0], 2 * i as u64, 4)?;
        let name = harness.run_batch(&pair[1], 2 * i as u64 + 1, 4)?;
        assert_eq!((noname.cell.condition, name.cell.condition), (Condition::NoName, Condition::Name));
        rows.extend(delta_table(&name, &noname, DEFAULT_ALPHA)?);
    }
    for r in &rows {
        println!(
            "{:<28} delta {:+.3}  t {:+.3}  df {:.1}  p {:.3}{}",
            r.key,
            r.delta_mean,
            r.t,
            r.df,
            r.p_value,
            if r.significant { "  *" } else { "" }
        );
    }
    let out = std::env::temp_dir().join("pgg-deltas");
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("deltas.csv"), to_csv_string(&rows)?)?;
    std::fs::write(out.join("deltas.svg"), render_delta_grid(&rows))?;
    println!("wrote {}", out.display());
    Ok(())
}
