use clap::Parser;
use dickelab_cli::{init_threads, run, Cli, EXIT_OK};

fn main() {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| run(&cli));
    let code = match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("dickelab: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
