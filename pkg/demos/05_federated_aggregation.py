"""Decentralized model aggregation without a server.

Every node holds a quantized local model parameter and a dataset size.
Mapping size-weighted parameters to mass and sizes to tokens, the
agreed quotient is the dataset-size-weighted average: the same global
model a central server would compute, reached over a directed network
with integer-only messages, and always within one quantization unit of
the exact value.
"""

import numpy as np

from qcs import (
    DelayModel,
    FederatedInstance,
    RunConfig,
    federated_init,
    federated_recover,
    generate_random_digraph,
    run_async,
    run_sync,
)

rng = np.random.default_rng(8)
n = 20
inst = FederatedInstance(
    dataset_sizes=tuple(int(v) for v in rng.integers(10, 101, n)),
    local_params=tuple(int(v) for v in rng.integers(1000, 100_001, n)),
)
exact = inst.exact_aggregate()
print(f"{n} nodes, dataset sizes {min(inst.dataset_sizes)}..{max(inst.dataset_sizes)}, "
      f"local parameters {min(inst.local_params)}..{max(inst.local_params)}")
print(f"exact weighted aggregate: {float(exact):.4f}")

g = generate_random_digraph(n, edge_prob=0.5, seed=2)
y0, z0 = federated_init(inst)

out = run_sync(RunConfig(graph=g, y0=y0, z0=z0, seed=4))
agg = federated_recover(int(out.final_estimate[0]))
print(f"synchronous: step {out.termination_step}, aggregate {agg}, "
      f"|error| = {abs(agg - float(exact)):.4f} (< 1 quantization unit)")

aout = run_async(RunConfig(graph=g, y0=y0, z0=z0, seed=4), DelayModel(max_delay=5))
aagg = federated_recover(int(aout.final_estimate[0]))
print(f"delayed B=5: step {aout.termination_step}, aggregate {aagg}, "
      f"|error| = {abs(aagg - float(exact)):.4f}")
assert abs(agg - float(exact)) < 1 and abs(aagg - float(exact)) < 1
