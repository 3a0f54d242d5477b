//! Generate a synthetic embedding store, write it in the line-delimited
//! format and read it back.
//!
//! cargo run --example synthetic_store [-- out.emb]

use hgd::embeddings::{generate_synthetic_store, read_store, write_store, SynthSpec};
use hgd::fixtures::corpus_inventories;

fn main() -> hgd::Result<()> {
    let spec = SynthSpec::new(16, 0.5, 10.0, 0).with_inventories(corpus_inventories());
    let store = generate_synthetic_store(&spec)?;
    println!(
        "{} records over {} homographs, dim {}, pooling {}",
        store.len(),
        store.index().len(),
        store.dim(),
        store.pooling()
    );

    let mut bytes = Vec::new();
    write_store(&store, &mut bytes)?;
    let back = read_store(bytes.as_slice())?;
    assert_eq!(back, store);
    println!("round trip ok ({} bytes)", bytes.len());

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, &bytes)?;
        println!("wrote {path}");
    }
    // the JSON accepted by `hgd synth --spec`
    let mut small = spec.clone();
    small.inventories.truncate(2);
    println!("{}", serde_json::to_string_pretty(&small)?);
    Ok(())
}
