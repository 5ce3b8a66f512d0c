"""Throughput of a few small networks, computed three ways.

ECMP routing gives a feasible lower bound, the volumetric bound an upper
bound, and the LP the exact value in between.
"""
# %%
from topobench.throughput import ecmp_solution, solve_approx, solve_exact, volumetric_upper_bound
from topobench.topologies import gen_fattree, gen_hypercube, gen_jellyfish
from topobench.traffic import tm_all_to_all, tm_longest_matching

nets = {
    "hypercube d=3": gen_hypercube(3),
    "fat-tree k=4": gen_fattree(4),
    "jellyfish n=16 r=4": gen_jellyfish(16, 4, 1, seed=1),
}

# %%
print(f"{'network':20s} {'TM':4s} {'ecmp':>7s} {'exact':>7s} {'approx':>7s} {'volume':>7s}")
for name, net in nets.items():
    for label, tm in (("A2A", tm_all_to_all(net)), ("LM", tm_longest_matching(net)[0])):
        lo = ecmp_solution(net, tm).t
        t = solve_exact(net, tm).t
        approx = solve_approx(net, tm, 0.01).t
        hi = volumetric_upper_bound(net, tm)
        print(f"{name:20s} {label:4s} {lo:7.3f} {t:7.3f} {approx:7.3f} {hi:7.3f}")

# %% [markdown]
# The longest matching sits near the worst case: on the hypercube it lands
# exactly on half the all-to-all value, the floor any hose TM can reach.
