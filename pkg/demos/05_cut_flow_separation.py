"""A clustered random graph has the sparser cut but the higher throughput.

The subdivided expander replaces each link of a random 4-regular graph by a
two-hop path. Its cuts stay large while its paths get long.
"""
# %%
from topobench.benchmark import separation_experiment

rep = separation_experiment(n=50, alpha=8, beta=1, N=8, d=2, p=2, seeds=5)
for row in rep["rows"]:
    print(f"seed {row['seed']:>10d}  clustered cut {row['cut_clustered']:.4f} t {row['t_clustered']:.3f}   "
          f"subdivided cut {row['cut_subdivided']:.4f} t {row['t_subdivided']:.3f}   flip={row['flip']}")
print(f"flips: {rep['flips']}/{len(rep['rows'])}")
