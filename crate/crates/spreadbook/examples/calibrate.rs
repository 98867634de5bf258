use spreadbook::classify::relative_amounts;
use spreadbook::pipeline::symbol_day;
use spreadbook::synth::{generate, GeneratorConfig};
use spreadbook::types::Symbol;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seeds: u64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(10);
    let mut os = vec![];
    let mut ds = vec![];
    let mut ts = vec![];
    for seed in 1..=seeds {
        let cfg = GeneratorConfig::calibrated(seed, vec![Symbol::new("AAA").unwrap()]);
        let market = generate(&cfg).unwrap();
        for (sym, events) in &market.streams {
            let day = symbol_day(*sym, events, cfg.session, true).unwrap();
            let ra = relative_amounts(&day.quote_events).unwrap();
            os.push(ra.o());
            ds.push(ra.d());
            ts.push(ra.t());
            println!(
                "seed {seed}: O={:.4} D={:.4} T={:.4} total={} events={}",
                ra.o(),
                ra.d(),
                ra.t(),
                ra.total(),
                events.len()
            );
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("mean O={:.4} D={:.4} T={:.4}", mean(&os), mean(&ds), mean(&ts));
}
