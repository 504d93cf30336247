//! Vertex, edge and loop statistics of every lattice the simulator knows.

use gpeps::lattice::{build_heavy_hex, build_unit_cell, Device, Fixture, SystemSize};

fn main() {
    println!("{:<12} {:>5} {:>5} {:>4} {:>6} {:>5} {:>9}", "lattice", "V", "E", "deg", "girth", "diam", "bipartite");
    let named = Device::ALL.iter().map(|&d| (SystemSize::Device(d).to_string(), build_heavy_hex(d)));
    let fixtures = Fixture::ALL.iter().map(|f| (f.name().to_string(), f.graph()));
    for (name, g) in named.chain(fixtures) {
        let girth = g.girth().map_or("-".to_string(), |x| x.to_string());
        println!(
            "{name:<12} {:>5} {:>5} {:>4} {girth:>6} {:>5} {:>9}",
            g.num_vertices(),
            g.num_edges(),
            g.max_degree(),
            g.diameter(),
            g.is_bipartite()
        );
    }

    let cell = build_unit_cell();
    let tiled = cell.tile(4, 4);
    println!(
        "\nunit cell: {} sites, {} intra + {} inter-cell edges; a 4x4 tiling has girth {:?}",
        cell.cell_size(),
        cell.intra_edges().len(),
        cell.inter_edges().len(),
        tiled.graph.girth()
    );
}
