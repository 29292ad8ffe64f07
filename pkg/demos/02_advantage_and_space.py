"""From raw patents to the technology space.

Ingest a corpus, compute revealed technological advantage (RTA) for one
year, derive the proximity matrix between technologies from co-advantage
patterns, and export the technology-space graph: a maximum spanning tree
over proximity plus every edge above a threshold, which is the standard
skeleton for plotting these spaces.

Run:  python3 demos/02_advantage_and_space.py
"""

import pathlib
import tempfile

import numpy as np

import techspace as ts
from techspace.synthlab import GeneratorParams, gen_corpus

out = pathlib.Path(tempfile.mkdtemp(prefix="space_"))
paths = gen_corpus(GeneratorParams(n_firms=40, n_techs=30,
                                   years=tuple(range(2007, 2019)), seed=11), out)

patents, rejects = ts.load_patents(paths["patents"])
print(f"loaded {len(patents)} patent rows "
      f"({len(rejects)} rejected during validation)")

cube = ts.build_counts(ts.merge_families(patents))
year = 2012
rta = ts.compute_rta(cube, year)
adv = ts.advantage_matrix(rta)
print(f"\n{year}: advantage matrix {adv.values.shape[0]} firms x "
      f"{adv.values.shape[1]} technologies, "
      f"{int(adv.values.sum())} advantage cells")

prox = ts.proximity(adv)
off = prox.values[~np.eye(len(prox.techs), dtype=bool)]
print(f"proximity: mean {off.mean():.3f}, max {off.max():.3f} (off-diagonal)")

# density: how close each firm's current portfolio sits to each technology
omega = ts.density_matrix(adv, prox)
print(f"relatedness density: mean {omega.mean():.3f} "
      f"over all (firm, technology) cells")

year_counts = cube.df[cube.df["year"] == year]
counts = year_counts.groupby("tech_code")["count"].sum().to_dict()
taxonomy = ts.load_taxonomy(paths["taxonomy"])
graph = ts.export_space(prox, counts, taxonomy, threshold=0.25)
n_tree = sum(1 for e in graph.edges if e["kept_reason"] == "spanning_tree")
print(f"\ntechnology space: {len(graph.nodes)} nodes, {len(graph.edges)} edges "
      f"({n_tree} spanning-tree, {len(graph.edges) - n_tree} above threshold), "
      f"{graph.n_components} component(s)")
print("\nstrongest links:")
frame = graph.edge_frame().sort_values("weight", ascending=False)
print(frame.head(5).to_string(index=False))
