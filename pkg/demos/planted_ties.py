"""Recovering planted reciprocal ties from noisy traffic.

Twenty disjoint pairs exchange a fixed number of calls in each direction on
top of random background traffic. We sweep the per-direction volume and
report how many ties reach the validated mutual network.
"""
from callnet import (SynthConfig, aggregate_pairs, build_mcn, filter_valid,
                     generate_social_cdr, plant_random_ties, validate_mcn)

n_users = 10_000
print("calls/dir  recovered  mcn_edges  svmcn_edges")
for calls in (1, 2, 3, 5, 10, 40):
    ties = plant_random_ties(n_users, 20, calls, seed=calls)
    config = SynthConfig(n_users=n_users, n_calls=100_000, ties=ties)
    records, truth = generate_social_cdr(config, seed=calls)
    mcn = build_mcn(aggregate_pairs(filter_valid(records)))
    sv, _ = validate_mcn(mcn)
    found = {tuple(sorted((sv.labels[s], sv.labels[t]))) for s, t in zip(sv.src, sv.dst)}
    hit = sum(pair in found for pair in truth)
    print(f"{calls:9d}  {hit:6d}/{len(truth)}  {mcn.n_edges:9d}  {sv.n_edges:11d}")
