use clap::Parser;

fn main() {
    let cli = bqt_cli::Cli::parse();
    match bqt_cli::execute(cli) {
        Ok(rendered) => {
            for (path, content) in &rendered.files {
                if let Some(parent) = path.parent() {
                    if !parent.as_os_str().is_empty() {
                        if let Err(e) = std::fs::create_dir_all(parent) {
                            eprintln!("bqt: cannot create {}: {e}", parent.display());
                            std::process::exit(1);
                        }
                    }
                }
                if let Err(e) = std::fs::write(path, content) {
                    eprintln!("bqt: cannot write {}: {e}", path.display());
                    std::process::exit(1);
                }
            }
            print!("{}", rendered.stdout);
        }
        Err(e) => {
            eprintln!("bqt: {e}");
            std::process::exit(2);
        }
    }
}
