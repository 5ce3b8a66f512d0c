"""Sparsest cut found by the heuristics versus longest-matching throughput."""
# %%
from topobench.benchmark import cut_vs_flow_experiment

specs = ["hypercube:d=4", "fattree:k=4", "bcube:n=2,k=2", "dcell:n=3,k=1", "dragonfly:a=2,h=1,p=2",
         "hyperx:dims=3-3,trunking=1-2", "jellyfish:n=16,r=3", "subdivided_expander:N=8,d=2,p=3"]

for rec in cut_vs_flow_experiment(specs, brute_cap=20_000):
    gap = rec.best_cut_sparsity / rec.t_lm
    print(f"{rec.topo:35s} t_LM={rec.t_lm:.3f} cut={rec.best_cut_sparsity:.3f} "
          f"cut/flow={gap:.3f} winners={','.join(rec.winners)}")

# %% [markdown]
# A cut only bounds throughput from above. The subdivided expander shows a
# clear gap: long paths waste capacity that no single cut accounts for.
