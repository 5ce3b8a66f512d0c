"""Relative throughput: each topology against random graphs built from the same equipment."""
# %%
from topobench.benchmark import relative_throughput, write_csv

specs = ["hypercube:d=4", "fattree:k=4", "flattened_butterfly:k=4,n=3", "dragonfly:a=3,h=1,p=1",
         "bcube:n=3,k=1", "jellyfish:n=16,r=4"]

records = [relative_throughput(spec, "a2a", iterations=5, seed=0) for spec in specs]
print(write_csv(records, timing=False))

# %% [markdown]
# Jellyfish is itself a uniform random graph, so its ratio hovers at 1. The
# interval columns are a 95% Student-t band on the random-graph mean.
