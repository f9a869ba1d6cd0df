fn main() { std::process::exit(anisobesov_cli::run(std::env::args().collect())); }
