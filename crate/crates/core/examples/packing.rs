//! Where each spin of a small lattice lives in the packed arrays.

use ising_multispin::{classify, unclassify, ArrayCode, LatticeDims, PackedArrays, PlainLattice};

fn main() -> ising_multispin::Result<()> {
    let dims = LatticeDims::new(8, 32)?;
    println!("{dims}: {} cells, {} words per vector", dims.cells(), dims.vector_len());

    for idx in [0, 1, 32, 33, 65, 255] {
        let at = classify(idx, dims)?;
        assert_eq!(unclassify(at, dims)?, idx);
        println!(
            "spin {idx:>3} (c={}, r={:>2}) -> {:?} cell {} word {} bit {}",
            idx / dims.n(),
            idx % dims.n(),
            at.code,
            at.cell,
            at.word,
            at.bit
        );
    }

    // pack a single up spin and find its word
    let mut lattice = PlainLattice::filled(dims, -1);
    lattice.set(65, 1);
    let packed = PackedArrays::pack(&lattice);
    for code in ArrayCode::ALL {
        for cell in 1..=dims.cells() {
            for (w, &word) in packed.vector(code, cell).iter().enumerate() {
                if word != 0 {
                    println!("nonzero word: {code:?} cell {cell} element {w} = {word:#018b}");
                }
            }
        }
    }
    assert_eq!(packed.unpack(), lattice);
    Ok(())
}
