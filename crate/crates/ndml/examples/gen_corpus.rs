//! Writes the corpus derivations to a directory in the derivation file
//! format (used once to produce the shipped corpus/).

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "corpus".into());
    std::fs::create_dir_all(&dir).unwrap();
    for entry in ndml::corpus::all() {
        let envelope = serde_json::json!({
            "sigma": entry.sigma.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            "mode": "NonInvertible",
            "relaxed_switch": false,
            "derivation": ndml::proof::to_json(&entry.derivation),
        });
        let path = format!("{}/{}.json", dir, entry.name);
        std::fs::write(&path, serde_json::to_string_pretty(&envelope).unwrap()).unwrap();
        println!("wrote {}", path);
    }
}
