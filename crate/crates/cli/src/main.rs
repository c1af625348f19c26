use std::io::IsTerminal;

fn main() {
    let no_color = std::env::var("NO_COLOR").ok();
    let color = cryptarg_cli::color_enabled(std::io::stdout().is_terminal(), no_color.as_deref());
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let code = cryptarg_cli::run(std::env::args_os(), &mut out, &mut err, color);
    drop(out);
    drop(err);
    std::process::exit(code);
}
