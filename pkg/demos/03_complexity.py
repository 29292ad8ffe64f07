"""Technology complexity via the method of reflections.

Starting from an advantage matrix, the reflections recursion alternates
between averaging firm scores over their technologies and technology scores
over their holders, standardizing each iteration. After 20 iterations the
technology vector ranks technologies by how sophisticated the firms holding
them are; the sign convention makes higher = more complex (anti-correlated
with ubiquity). The TCI transform maps those scores to the 0..ln(101) range
used in the panel, and the category/period dataset aggregates complexity
ranks by taxonomy category.

Run:  python3 demos/03_complexity.py
"""

import pathlib
import tempfile

import numpy as np

import techspace as ts
from techspace.synthlab import GeneratorParams, gen_corpus

out = pathlib.Path(tempfile.mkdtemp(prefix="cx_"))
paths = gen_corpus(GeneratorParams(n_firms=40, n_techs=30,
                                   years=tuple(range(2007, 2019)), seed=11), out)
patents, _ = ts.load_patents(paths["patents"])
cube = ts.build_counts(ts.merge_families(patents))

year = 2012
adv = ts.advantage_matrix(ts.compute_rta(cube, year))
scores = ts.mor(adv, n_max=20)

print(f"{year}: {len(scores.firms)} firms, {len(scores.techs)} technologies "
      f"after pruning degenerate rows/columns")
print(f"ubiquity range: {scores.ubiquity.min():.0f}..{scores.ubiquity.max():.0f}")

final = scores.final_tech_scores()
corr = np.corrcoef(final, scores.ubiquity)[0, 1]
print(f"corr(final technology score, ubiquity) = {corr:.3f}  (negative by "
      "construction: widely held technologies are less complex)")

# convergence of the ranking near the stopping point
from scipy.stats import spearmanr
rho = spearmanr(scores.tech_scores[18], scores.tech_scores[20]).statistic
print(f"Spearman(iteration 18, iteration 20) = {rho:.4f}")

tci = ts.tci_transform(scores, year)
print("\nmost and least complex technologies:")
print(tci.table.head(3).to_string(index=False))
print("...")
print(tci.table.tail(3).to_string(index=False))
print(f"\nTCI max = {tci.table['tci'].max():.3f} (= ln 101), min = "
      f"{tci.table['tci'].min():.3f}")

taxonomy = ts.load_taxonomy(paths["taxonomy"])
fig2 = ts.figure2_dataset(cube, taxonomy,
                          periods=((2007, 2010), (2011, 2014), (2015, 2018)))
print(f"\ncategory/period dataset: {len(fig2)} rows")
print(fig2.head(6).to_string(index=False))
