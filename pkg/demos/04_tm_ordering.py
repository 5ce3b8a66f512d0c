"""Ordering of traffic matrices, normalized so that half the all-to-all throughput is 1."""
# %%
from topobench.benchmark import tm_ordering_experiment
from topobench.topologies import gen_fattree, gen_flattened_butterfly, gen_hypercube, gen_jellyfish

nets = {
    "hypercube d=4": gen_hypercube(4),
    "jellyfish n=32 r=4": gen_jellyfish(32, 4, 1, seed=8),
    "fat-tree k=4": gen_fattree(4),
    "flattened butterfly k=4 n=3": gen_flattened_butterfly(4, 3),
}

for name, net in nets.items():
    norm = tm_ordering_experiment(net, seeds=10)["normalized"]
    print(f"{name:28s} " + "  ".join(f"{k}={v:.3f}" for k, v in norm.items()))
