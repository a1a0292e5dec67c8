//! Regenerates the bundled rate-1/2 (3,6)-regular codes under `codes/`.
//!
//! cargo run --example gen_codes

use std::path::PathBuf;

use scvamp::denoiser::{peg_regular, to_alist};

const LENGTHS: [usize; 5] = [128, 256, 512, 1056, 2304];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("codes");
    std::fs::create_dir_all(&dir)?;
    for n in LENGTHS {
        // First seed giving a full-rank graph of girth at least 6.
        let mut seed = n as u64;
        let code = loop {
            if let Ok(code) = peg_regular(n, 3, 6, seed) {
                if code.girth().is_some_and(|g| g >= 6) && code.k() == n / 2 {
                    break code;
                }
            }
            seed += 1;
        };
        let path = dir.join(format!("r12-n{n}.alist"));
        std::fs::write(&path, to_alist(&code))?;
        println!("{} seed={seed} k={} girth={:?}", path.display(), code.k(), code.girth());
    }
    Ok(())
}
