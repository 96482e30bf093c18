fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("BCWAVE_LOG")).init();
    std::process::exit(bcwave::cli::dispatch(std::env::args_os()));
}
