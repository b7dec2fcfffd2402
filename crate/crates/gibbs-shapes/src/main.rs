fn main() {
    if let Ok(raw) = std::env::var("GIBBS_SHAPES_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: GIBBS_SHAPES_THREADS must be a positive integer, got {raw:?}");
                std::process::exit(2);
            }
        }
    }
    std::process::exit(gibbs_shapes::cli::run());
}
